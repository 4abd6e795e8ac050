//! Airy function of the first kind, its derivative, and its zeros.
//!
//! Evaluation regimes:
//!
//! * `|x| <= 10`: Taylor expansion of the Airy equation `y'' = x y` around
//!   the nearest anchor point of a table spaced 0.5 apart (so `|dx| <= 0.25`).
//!   The anchor at the origin holds the exact values `Ai(0)`, `Ai'(0)`, making
//!   the expansion there the Maclaurin series itself.
//! * `|x| > 10`: the standard asymptotic expansions, truncated at their
//!   smallest term (`ζ > 21`, so the truncation error is below `e^{-2ζ}`).
//!
//! The anchor table is filled once. Negative anchors are propagated outward
//! from the origin, where the equation is oscillatory and stable in both
//! directions. Positive anchors are propagated inward from the asymptotic
//! values at `x = 10`, since `Ai` is the recessive solution there and
//! integrating toward the origin damps the error.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
pub const AI_AT_ZERO: f64 = 0.355_028_053_887_817_239_26;
/// `Ai'(0) = -3^{-1/3} / Γ(1/3)`.
pub const AI_PRIME_AT_ZERO: f64 = -0.258_819_403_792_806_798_41;

const ANCHOR_SPACING: f64 = 0.5;
const ANCHOR_LIMIT: f64 = 10.0;
const ANCHOR_COUNT: usize = 41;

fn anchors() -> &'static [(f64, f64); ANCHOR_COUNT] {
    static TABLE: OnceLock<[(f64, f64); ANCHOR_COUNT]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mid = ANCHOR_COUNT / 2;
        let mut t = [(0.0, 0.0); ANCHOR_COUNT];
        t[mid] = (AI_AT_ZERO, AI_PRIME_AT_ZERO);
        for j in (0..mid).rev() {
            let x0 = anchor_x(j + 1);
            let (y, d) = t[j + 1];
            t[j] = taylor::<f64>(x0, y, d, -ANCHOR_SPACING);
        }
        t[ANCHOR_COUNT - 1] = asymptotic_positive::<f64>(ANCHOR_LIMIT);
        for j in (mid + 1..ANCHOR_COUNT - 1).rev() {
            let x0 = anchor_x(j + 1);
            let (y, d) = t[j + 1];
            t[j] = taylor::<f64>(x0, y, d, -ANCHOR_SPACING);
        }
        t
    })
}

#[inline]
fn anchor_x(j: usize) -> f64 {
    -ANCHOR_LIMIT + ANCHOR_SPACING * j as f64
}

/// Taylor expansion of the Airy equation from `(x0, y0, y0')` to `x0 + h`.
/// Coefficients obey `c_{k+2} = (x0 c_k + c_{k-1}) / ((k+1)(k+2))`.
fn taylor<T: Real>(x0: T, y0: T, d0: T, h: T) -> (T, T) {
    let eps = T::epsilon() * c(0.1);
    let (mut cm1, mut ck, mut ck1) = (T::zero(), y0, d0);
    let mut y = y0 + d0 * h;
    let mut d = d0;
    let mut hk = h; // h^(k+1) for the term being added below
    let mut small_run = 0;
    for k in 0..200usize {
        let kf = T::from_index(k);
        let next = (x0 * ck + cm1) / ((kf + c(1.0)) * (kf + c(2.0)));
        let dterm = next * (kf + c(2.0)) * hk;
        hk = hk * h;
        let yterm = next * hk;
        y = y + yterm;
        d = d + dterm;
        let scale = y.abs() + d.abs() * h.abs();
        if yterm.abs() <= eps * scale && dterm.abs() * h.abs() <= eps * scale {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
        cm1 = ck;
        ck = ck1;
        ck1 = next;
    }
    (y, d)
}

/// Coefficient pairs `(u_k, v_k)` of the asymptotic series.
fn asymptotic_coefficients<T: Real>(k_max: usize) -> impl Iterator<Item = (T, T)> {
    let mut u = T::one();
    (0..=k_max).map(move |k| {
        if k > 0 {
            let kf = T::from_index(k);
            u = u * (c::<T>(6.0) * kf - c(5.0)) * (c::<T>(6.0) * kf - c(3.0))
                * (c::<T>(6.0) * kf - c(1.0))
                / ((c::<T>(2.0) * kf - c(1.0)) * c(216.0) * kf);
        }
        let kf = T::from_index(k);
        let v = if k == 0 {
            T::one()
        } else {
            -u * (c::<T>(6.0) * kf + c(1.0)) / (c::<T>(6.0) * kf - c(1.0))
        };
        (u, v)
    })
}

/// Sums `Σ (∓1)^k a_k / ζ^k` up to the smallest term.
fn truncated_series<T: Real>(zeta: T, alternate: bool) -> (T, T) {
    let mut su = T::zero();
    let mut sv = T::zero();
    let mut pow = T::one();
    let mut last = T::infinity();
    for (k, (u, v)) in asymptotic_coefficients::<T>(120).enumerate() {
        let sign = if alternate && k % 2 == 1 { -T::one() } else { T::one() };
        let tu = sign * u / pow;
        let tv = sign * v / pow;
        let mag = tu.abs().max(tv.abs());
        if mag > last {
            break;
        }
        su = su + tu;
        sv = sv + tv;
        if mag < T::epsilon() * c(1e-3) {
            break;
        }
        last = mag;
        pow = pow * zeta;
    }
    (su, sv)
}

fn asymptotic_positive<T: Real>(x: T) -> (T, T) {
    let zeta = c::<T>(2.0 / 3.0) * x * x.sqrt();
    let (su, sv) = truncated_series(zeta, true);
    let q = x.sqrt().sqrt();
    let pre = (-zeta).exp() / (c::<T>(2.0) * T::PI().sqrt());
    (pre / q * su, -pre * q * sv)
}

fn asymptotic_negative<T: Real>(x: T) -> (T, T) {
    let z = -x;
    let zeta = c::<T>(2.0 / 3.0) * z * z.sqrt();
    // Even and odd parts of Σ (-1)^k u_k ζ^-k, each with its own alternating sign.
    let mut ue = T::zero();
    let mut uo = T::zero();
    let mut ve = T::zero();
    let mut vo = T::zero();
    let mut pow = T::one();
    let mut last = T::infinity();
    for (k, (u, v)) in asymptotic_coefficients::<T>(120).enumerate() {
        let tu = u / pow;
        let tv = v / pow;
        let mag = tu.abs().max(tv.abs());
        if mag > last {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
        if k % 2 == 0 {
            ue = ue + sign * tu;
            ve = ve + sign * tv;
        } else {
            uo = uo + sign * tu;
            vo = vo + sign * tv;
        }
        if mag < T::epsilon() * c(1e-3) {
            break;
        }
        last = mag;
        pow = pow * zeta;
    }
    let phase = zeta - T::FRAC_PI_4();
    let (s, co) = phase.sin_cos();
    let q = z.sqrt().sqrt();
    let rpi = T::PI().sqrt();
    let ai = (co * ue + s * uo) / (rpi * q);
    let aip = q / rpi * (s * ve - co * vo);
    (ai, aip)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair<T: Real>(x: T) -> Result<(T, T)> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("Airy argument {x}")));
    }
    let limit = c::<T>(ANCHOR_LIMIT);
    if x > limit {
        return Ok(asymptotic_positive(x));
    }
    if x < -limit {
        return Ok(asymptotic_negative(x));
    }
    let table = anchors();
    let pos = ((x + limit) / c(ANCHOR_SPACING)).round();
    let j = pos.to_usize().unwrap_or(0).min(ANCHOR_COUNT - 1);
    let x0 = c::<T>(anchor_x(j));
    let (y0, d0) = table[j];
    Ok(taylor(x0, c(y0), c(d0), x - x0))
}

pub fn airy_ai<T: Real>(x: T) -> Result<T> {
    airy_pair(x).map(|p| p.0)
}

pub fn airy_ai_prime<T: Real>(x: T) -> Result<T> {
    airy_pair(x).map(|p| p.1)
}

/// Leading-order estimate `z_n ≈ [(3π/2)(n - 1/4)]^{2/3}` of the n-th zero
/// magnitude (`Ai(-z_n) = 0`).
pub fn airy_zero_seed<T: Real>(n: usize) -> Result<T> {
    if n < 1 {
        return Err(Error::LevelOutOfRange {
            level: n,
            min: 1,
            max: usize::MAX,
        });
    }
    let t = c::<T>(1.5) * T::PI() * (T::from_index(n) - c(0.25));
    Ok(t.powf(c(2.0 / 3.0)))
}

/// Magnitude `z_n > 0` of the n-th zero of `Ai`, refined from
/// [`airy_zero_seed`] by Newton iteration with a bisection fallback.
pub fn airy_zero<T: Real>(n: usize) -> Result<T> {
    let seed = airy_zero_seed::<T>(n)?;
    // Neighbouring zeros are about π/√z apart; keep the bracket narrower than that.
    let spacing = T::PI() / seed.sqrt();
    let half = c::<T>(0.5).min(c::<T>(0.45) * spacing);
    let (lo, hi) = (seed - half, seed + half);
    let tol = T::epsilon() * c(4.0) * seed;
    let mut z = seed;
    for _ in 0..50 {
        let (ai, aip) = airy_pair(-z)?;
        if aip == T::zero() {
            break;
        }
        let step = ai / aip;
        z = z + step;
        if !(z > lo && z < hi) {
            break;
        }
        if step.abs() <= tol {
            return Ok(z);
        }
    }
    bisect_zero(lo, hi)
}

fn bisect_zero<T: Real>(mut lo: T, mut hi: T) -> Result<T> {
    let f = |z: T| airy_ai(-z);
    let mut flo = f(lo)?;
    if flo * f(hi)? > T::zero() {
        return Err(Error::OutsideDomain(format!(
            "no sign change of Ai(-z) on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * c(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * c(0.5))
}
