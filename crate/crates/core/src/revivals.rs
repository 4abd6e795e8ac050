//! Extrema of sampled observables and their labeling as (fractional)
//! revivals `t ≈ (cycle + p/q) T_rev`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                actual: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidRange("times must be strictly increasing".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max − min` over finite values.
    pub fn range(&self) -> T {
        let finite = self.values.iter().copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if hi >= lo {
            hi - lo
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremumEvent<T> {
    pub t: T,
    pub value: T,
    pub kind: ExtremumKind,
    pub prominence: T,
    /// Sample index of the raw extremum.
    pub index: usize,
}

/// Strict 3-point local extrema whose topographic prominence reaches
/// `threshold`. The time is refined by the parabola through the neighbouring
/// samples; the value stays the sampled one, since the parabola's vertex
/// overshoots badly when the neighbours are lopsided.
pub fn detect_extrema<T: Real>(
    series: &TimeSeries<T>,
    kind: ExtremumKind,
    threshold: T,
) -> Result<Vec<ExtremumEvent<T>>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            actual: n,
        });
    }
    // Work with minima throughout; maxima are minima of the negated series.
    let sign = match kind {
        ExtremumKind::Minimum => T::one(),
        ExtremumKind::Maximum => -T::one(),
    };
    let v: Vec<T> = series.values.iter().map(|&x| x * sign).collect();
    let t = &series.times;
    let mut events = Vec::new();
    for i in 1..n - 1 {
        if !(v[i] < v[i - 1] && v[i] < v[i + 1]) {
            continue;
        }
        let prominence = prominence_of_minimum(&v, i);
        if !(prominence >= threshold) {
            continue;
        }
        let tr = parabolic_vertex((t[i - 1], v[i - 1]), (t[i], v[i]), (t[i + 1], v[i + 1]));
        events.push(ExtremumEvent {
            t: tr,
            value: series.values[i],
            kind,
            prominence,
            index: i,
        });
    }
    Ok(events)
}

/// Height the walk from `i` must climb before reaching a lower sample on
/// the easier side (or the series edge).
fn prominence_of_minimum<T: Real>(v: &[T], i: usize) -> T {
    let climb = |range: &mut dyn Iterator<Item = usize>| {
        let mut peak = v[i];
        for j in range {
            if v[j] < v[i] {
                break;
            }
            peak = peak.max(v[j]);
        }
        peak
    };
    let left = climb(&mut (0..i).rev());
    let right = climb(&mut (i + 1..v.len()));
    left.min(right) - v[i]
}

fn parabolic_vertex<T: Real>(a: (T, T), b: (T, T), c3: (T, T)) -> T {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let (x2, y2) = c3;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv.abs() > T::zero()) || !curv.is_finite() {
        return x1;
    }
    // Around x1: y = y1 + slope (x − x1) + curv (x − x1)².
    let slope = d01 + curv * (x1 - x0);
    let dx = -slope / (curv * c(2.0));
    x1 + dx.max(x0 - x1).min(x2 - x1)
}

/// Threshold as a fraction of the series range.
pub fn relative_threshold<T: Real>(series: &TimeSeries<T>, fraction: T) -> T {
    series.range() * fraction
}

/// Nearest fraction `p/q` to `x ∈ [0, 1]` with `q ≤ q_max`, by descending the
/// Stern–Brocot tree to the two Farey neighbours of `x`. Ties go to the
/// smaller denominator (then the smaller numerator).
pub fn nearest_fraction<T: Real>(x: T, q_max: u32) -> (u32, u32) {
    let x = x.max(T::zero()).min(T::one());
    let (mut lo, mut hi) = ((0u32, 1u32), (1u32, 1u32));
    loop {
        let med = (lo.0 + hi.0, lo.1 + hi.1);
        if med.1 > q_max {
            break;
        }
        let m = T::from_index(med.0 as usize) / T::from_index(med.1 as usize);
        if x < m {
            hi = med;
        } else if x > m {
            lo = med;
        } else {
            return med;
        }
    }
    let value = |f: (u32, u32)| T::from_index(f.0 as usize) / T::from_index(f.1 as usize);
    let dl = x - value(lo);
    let dh = value(hi) - x;
    if dl < dh || (dl == dh && (lo.1, lo.0) <= (hi.1, hi.0)) {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevivalLabel<T> {
    pub event: ExtremumEvent<T>,
    pub p: u32,
    pub q: u32,
    /// Whole revival periods elapsed before the fraction.
    pub cycle: u32,
    /// `|t − (cycle + p/q) T_rev| / T_rev`.
    pub deviation: T,
}

/// Labels each event with its nearest `(cycle + p/q) T_rev`, keeping labels
/// with deviation at most `tolerance`. Events within tolerance of `t = 0`
/// stay unlabeled.
pub fn label_fractional<T: Real>(
    events: &[ExtremumEvent<T>],
    t_rev: T,
    q_max: u32,
    tolerance: T,
) -> Result<Vec<RevivalLabel<T>>> {
    if !(t_rev > T::zero()) || !t_rev.is_finite() {
        return Err(Error::InvalidRange(format!("T_rev = {t_rev} must be positive")));
    }
    if q_max < 2 {
        return Err(Error::InvalidRange(format!("q_max = {q_max} must be at least 2")));
    }
    let mut labels = Vec::new();
    for e in events {
        let x = e.t / t_rev;
        if !x.is_finite() || x < T::zero() {
            continue;
        }
        let whole = x.floor();
        let (mut p, q) = nearest_fraction(x - whole, q_max);
        let mut cycle = whole.to_u32().unwrap_or(u32::MAX);
        let deviation = (x - whole - T::from_index(p as usize) / T::from_index(q as usize)).abs();
        if p == 0 {
            // 0/1 of this cycle is 1/1 of the previous one.
            if cycle == 0 {
                continue;
            }
            cycle -= 1;
            p = 1;
        }
        if deviation <= tolerance {
            labels.push(RevivalLabel {
                event: *e,
                p,
                q,
                cycle,
                deviation,
            });
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions<T> {
    pub q_max: u32,
    /// Largest accepted `|t/T_rev − p/q|`.
    pub tolerance: T,
    /// Prominence threshold as a fraction of each series' range.
    pub prominence: T,
    /// Early window, in classical periods, searched for classical-period minima.
    pub classical_window: T,
    /// Accepted offset from `k T_cl`, as a fraction of `T_cl`.
    pub classical_tolerance: T,
}

impl<T: Real> Default for AnalysisOptions<T> {
    fn default() -> Self {
        Self {
            q_max: 8,
            tolerance: c(0.005),
            prominence: c(0.05),
            classical_window: c(5.0),
            classical_tolerance: c(0.05),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    JNc,
    AbsA2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportEvent<T> {
    pub observable: Observable,
    #[serde(flatten)]
    pub event: ExtremumEvent<T>,
    pub label: Option<FractionTag<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionTag<T> {
    pub p: u32,
    pub q: u32,
    pub cycle: u32,
    pub deviation: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalMinimum<T> {
    pub k: u32,
    pub t: T,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevivalReport<T> {
    pub t_revival: T,
    pub t_classical: T,
    /// J_nc minima and maxima, and |A|² maxima, in time order per observable.
    pub events: Vec<ReportEvent<T>>,
    /// Labeled events with `p = q`.
    pub full_revivals: Vec<ReportEvent<T>>,
    pub classical_period_minima: Vec<ClassicalMinimum<T>>,
}

/// Merges extrema of `J_nc` and `|A|²` and labels J_nc minima and `|A|²`
/// maxima against `t_revival`.
pub fn revival_report<T: Real>(
    jnc: &TimeSeries<T>,
    abs_a2: &TimeSeries<T>,
    t_revival: T,
    t_classical: T,
    opts: &AnalysisOptions<T>,
) -> Result<RevivalReport<T>> {
    if jnc.times() != abs_a2.times() {
        return Err(Error::InvalidRange("observable time grids differ".into()));
    }
    let tag = |l: &RevivalLabel<T>| FractionTag {
        p: l.p,
        q: l.q,
        cycle: l.cycle,
        deviation: l.deviation,
    };
    let mut events = Vec::new();
    let mut labeled = |obs, series: &TimeSeries<T>, kind| -> Result<Vec<ReportEvent<T>>> {
        let found = detect_extrema(series, kind, relative_threshold(series, opts.prominence))?;
        let labels = label_fractional(&found, t_revival, opts.q_max, opts.tolerance)?;
        let mut li = labels.iter().peekable();
        let out: Vec<ReportEvent<T>> = found
            .iter()
            .map(|e| {
                let label = match li.peek() {
                    Some(l) if l.event.index == e.index => li.next().map(tag),
                    _ => None,
                };
                ReportEvent {
                    observable: obs,
                    event: *e,
                    label,
                }
            })
            .collect();
        events.extend(out.iter().copied());
        Ok(out)
    };
    let j_min = labeled(Observable::JNc, jnc, ExtremumKind::Minimum)?;
    let j_max = detect_extrema(jnc, ExtremumKind::Maximum, relative_threshold(jnc, opts.prominence))?;
    let a_max = labeled(Observable::AbsA2, abs_a2, ExtremumKind::Maximum)?;
    events.extend(j_max.into_iter().map(|e| ReportEvent {
        observable: Observable::JNc,
        event: e,
        label: None,
    }));
    events.sort_by(|a, b| {
        (a.observable as u8, a.event.t)
            .partial_cmp(&(b.observable as u8, b.event.t))
            .expect("finite event times")
    });
    let full_revivals = j_min
        .iter()
        .chain(&a_max)
        .filter(|e| matches!(e.label, Some(l) if l.p == l.q))
        .copied()
        .collect();
    let classical_period_minima = classical_minima(&j_min, t_classical, opts);
    Ok(RevivalReport {
        t_revival,
        t_classical,
        events,
        full_revivals,
        classical_period_minima,
    })
}

fn classical_minima<T: Real>(
    minima: &[ReportEvent<T>],
    t_cl: T,
    opts: &AnalysisOptions<T>,
) -> Vec<ClassicalMinimum<T>> {
    if !(t_cl > T::zero()) {
        return Vec::new();
    }
    let window = t_cl * opts.classical_window;
    let mut out: Vec<ClassicalMinimum<T>> = Vec::new();
    for e in minima {
        let t = e.event.t;
        if t > window + t_cl * opts.classical_tolerance {
            break;
        }
        let k = (t / t_cl).round();
        if k < T::one() || (t - k * t_cl).abs() > t_cl * opts.classical_tolerance {
            continue;
        }
        let k = k.to_u32().unwrap_or(0);
        // Keep the deepest minimum per period.
        match out.last_mut() {
            Some(last) if last.k == k => {
                if e.event.value < last.value {
                    *last = ClassicalMinimum {
                        k,
                        t,
                        value: e.event.value,
                    };
                }
            }
            _ => out.push(ClassicalMinimum {
                k,
                t,
                value: e.event.value,
            }),
        }
    }
    out
}
