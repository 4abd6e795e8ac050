//! Gaussian initial states and their expansion coefficients.
//!
//! The packet is always
//! `ψ(x,0) = (σħ√π)^{-1/2} exp(−(x−x0)²/(2σ²ħ²)) exp(ip0(x−x0)/ħ)`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::airy_ai;
use crate::error::{Error, Result};
use crate::grid::{integrate, Grid1D, SampledField, Space};
use crate::scalar::{c, Real};
use crate::systems::{Eigenbasis, InfiniteWell, QuantumBouncer};

/// Half-width of the packet support, in units of `σħ`, used for projection.
pub const SUPPORT_HALF_WIDTH: f64 = 10.0;

const SAMPLES_PER_WAVELENGTH: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacketSpec<T> {
    pub center: T,
    pub width_sigma: T,
    pub momentum: T,
}

impl<T: Real> GaussianPacketSpec<T> {
    pub fn new(center: T, width_sigma: T, momentum: T) -> Result<Self> {
        if !(width_sigma > T::zero()) || !width_sigma.is_finite() {
            return Err(Error::InvalidRange(format!("sigma = {width_sigma} must be positive")));
        }
        if !center.is_finite() || !momentum.is_finite() {
            return Err(Error::NonFinite("packet center or momentum".into()));
        }
        Ok(Self {
            center,
            width_sigma,
            momentum,
        })
    }

    /// Spatial width `b = σħ`.
    pub fn spatial_width(&self, hbar: T) -> T {
        self.width_sigma * hbar
    }

    pub fn amplitude(&self, x: T, hbar: T) -> Complex<T> {
        let b = self.spatial_width(hbar);
        let norm = (b * T::PI().sqrt()).sqrt().recip();
        let u = x - self.center;
        let env = norm * (-(u * u) / (b * b * c(2.0))).exp();
        Complex::from_polar(env, self.momentum * u / hbar)
    }
}

/// Samples the packet on `grid`; fails if the grid holds less than
/// `1 − 1e-6` of its norm.
pub fn sample_gaussian<T: Real>(
    spec: &GaussianPacketSpec<T>,
    grid: Grid1D<T>,
    hbar: T,
) -> Result<SampledField<T>> {
    let field = SampledField::from_fn(grid, Space::Position, |x| spec.amplitude(x, hbar));
    let captured = field.norm_sqr();
    if !(captured >= T::one() - c(1e-6)) {
        return Err(Error::GridTooNarrow {
            captured: captured.to_f64_lossy(),
            tolerance: 1e-6,
        });
    }
    Ok(field)
}

/// Expansion coefficients for the consecutive levels `first_n, first_n + 1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<T> {
    pub first_n: usize,
    pub coefficients: Vec<Complex<T>>,
    pub captured_norm: T,
}

impl<T: Real> CoefficientSet<T> {
    pub fn new(first_n: usize, coefficients: Vec<Complex<T>>) -> Result<Self> {
        if first_n == 0 {
            return Err(Error::LevelOutOfRange {
                level: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        if coefficients.is_empty() {
            return Err(Error::TooFewPoints {
                needed: 1,
                actual: 0,
            });
        }
        if coefficients.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite("expansion coefficient".into()));
        }
        let captured_norm = coefficients.iter().map(|a| a.norm_sqr()).sum();
        Ok(Self {
            first_n,
            coefficients,
            captured_norm,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn last_n(&self) -> usize {
        self.first_n + self.coefficients.len() - 1
    }

    pub fn levels(&self) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &a)| (self.first_n + i, a))
    }

    pub fn get(&self, n: usize) -> Complex<T> {
        n.checked_sub(self.first_n)
            .and_then(|i| self.coefficients.get(i))
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Level carrying the largest weight; ties go to the lower level.
    pub fn n_bar(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.coefficients.iter().enumerate() {
            if a.norm_sqr() > self.coefficients[best].norm_sqr() {
                best = i;
            }
        }
        self.first_n + best
    }

    /// Keeps levels `first_n..=n_max`.
    pub fn truncated(&self, n_max: usize) -> Result<Self> {
        if n_max < self.first_n {
            return Err(Error::LevelOutOfRange {
                level: n_max,
                min: self.first_n,
                max: self.last_n(),
            });
        }
        let keep = (n_max - self.first_n + 1).min(self.len());
        Self::new(self.first_n, self.coefficients[..keep].to_vec())
    }

    /// Drops leading and trailing levels whose combined weight on each side
    /// stays at or below `tolerance`.
    pub fn trimmed(&self, tolerance: T) -> Self {
        let w: Vec<T> = self.coefficients.iter().map(|a| a.norm_sqr()).collect();
        let mut lo = 0;
        let mut acc = T::zero();
        while lo + 1 < w.len() && acc + w[lo] <= tolerance {
            acc = acc + w[lo];
            lo += 1;
        }
        let mut hi = w.len();
        acc = T::zero();
        while hi > lo + 1 && acc + w[hi - 1] <= tolerance {
            acc = acc + w[hi - 1];
            hi -= 1;
        }
        Self::new(self.first_n + lo, self.coefficients[lo..hi].to_vec())
            .expect("non-empty slice of finite values")
    }

    /// Smallest prefix `1..=n` whose captured norm reaches `target`; returns
    /// the full set when the target is never reached.
    pub fn shortest_reaching(&self, target: T) -> Self {
        let mut acc = T::zero();
        for (i, a) in self.coefficients.iter().enumerate() {
            acc = acc + a.norm_sqr();
            if acc >= target {
                return Self::new(self.first_n, self.coefficients[..=i].to_vec())
                    .expect("non-empty slice of finite values");
            }
        }
        self.clone()
    }
}

/// Grid over the packet support intersected with the basis domain, fine
/// enough to resolve both the packet phase and `u_{n_max}`.
pub fn projection_grid<T: Real, B: Eigenbasis<T> + ?Sized>(
    basis: &B,
    spec: &GaussianPacketSpec<T>,
    n_max: usize,
) -> Result<Grid1D<T>> {
    let hbar = basis.hbar();
    let (lo, hi) = basis.domain(n_max)?;
    let half = spec.spatial_width(hbar) * c(SUPPORT_HALF_WIDTH);
    let start = (spec.center - half).max(lo);
    let end = (spec.center + half).min(hi);
    if !(end > start) {
        // No level up to n_max reaches the packet.
        return Err(Error::InsufficientCapture {
            captured: 0.0,
            tolerance: 1e-4,
        });
    }
    let k = basis.wavenumber_bound(n_max)? + (spec.momentum / hbar).abs();
    let step = T::TAU() / (k.max(T::one()) * c(SAMPLES_PER_WAVELENGTH));
    let count = ((end - start) / step).ceil().to_usize().unwrap_or(0) | 1;
    Grid1D::new(start, end, count.max(1025))
}

/// `a_n = ∫ u_n(x) ψ(x,0) dx` by quadrature for `n = 1..=n_max`.
pub fn project_numeric<T: Real, B: Eigenbasis<T> + ?Sized>(
    basis: &B,
    spec: &GaussianPacketSpec<T>,
    n_max: usize,
) -> Result<CoefficientSet<T>> {
    if n_max == 0 {
        return Err(Error::LevelOutOfRange {
            level: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let grid = projection_grid(basis, spec, n_max)?;
    let hbar = basis.hbar();
    let psi: Vec<Complex<T>> = grid.points().map(|x| spec.amplitude(x, hbar)).collect();
    project_field(basis, &psi, &grid, n_max)
}

/// Projects sampled amplitudes onto levels `1..=n_max`.
pub fn project_field<T: Real, B: Eigenbasis<T> + ?Sized>(
    basis: &B,
    psi: &[Complex<T>],
    grid: &Grid1D<T>,
    n_max: usize,
) -> Result<CoefficientSet<T>> {
    if psi.len() != grid.count() {
        return Err(Error::LengthMismatch {
            expected: grid.count(),
            actual: psi.len(),
        });
    }
    let coefficients = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let prod = grid
                .points()
                .zip(psi)
                .map(|(x, &v)| basis.eigenfunction(n, x).map(|u| v * u))
                .collect::<Result<Vec<_>>>()?;
            integrate(&prod, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientSet::new(1, coefficients)
}

/// Projects with the level count chosen automatically: the shortest basis
/// `1..=n` reaching `capture_target`, searched up to `cap`.
///
/// Fails when even `cap` levels hold less than `1 − 1e-4` of the norm.
pub fn project_auto<T: Real, B: Eigenbasis<T> + ?Sized>(
    basis: &B,
    spec: &GaussianPacketSpec<T>,
    capture_target: T,
    cap: usize,
) -> Result<CoefficientSet<T>> {
    let full = project_numeric(basis, spec, cap)?;
    check_capture(full.shortest_reaching(capture_target))
}

fn check_capture<T: Real>(set: CoefficientSet<T>) -> Result<CoefficientSet<T>> {
    if !(set.captured_norm >= T::one() - c(1e-4)) {
        return Err(Error::InsufficientCapture {
            captured: set.captured_norm.to_f64_lossy(),
            tolerance: 1e-4,
        });
    }
    Ok(set)
}

/// Closed-form well coefficients, valid when the packet sits well inside the
/// box (`6σħ < min(x0, L − x0)`):
///
/// `a_n = 2√(b√π/L)/(2i) [e^{ikx0} e^{−σ²(p0+p_n)²/2} − e^{−ikx0} e^{−σ²(p0−p_n)²/2}]`
/// with `b = σħ`, `k = nπ/L`, `p_n = nπħ/L`.
pub fn well_coefficients_analytic<T: Real>(
    well: &InfiniteWell<T>,
    spec: &GaussianPacketSpec<T>,
    n_max: usize,
) -> Result<CoefficientSet<T>> {
    let hbar = Eigenbasis::hbar(well);
    let l = well.length();
    let b = spec.spatial_width(hbar);
    let margin = spec.center.min(l - spec.center);
    if !(b * c(6.0) < margin) {
        return Err(Error::PacketTooWide(format!(
            "6σħ = {} exceeds distance {margin} to the nearest wall",
            b * c(6.0)
        )));
    }
    if n_max == 0 {
        return Err(Error::LevelOutOfRange {
            level: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let pre = (b * T::PI().sqrt() / l).sqrt() * c(2.0);
    let s2 = spec.width_sigma * spec.width_sigma * c(0.5);
    let p0 = spec.momentum;
    let coefficients = (1..=n_max)
        .map(|n| {
            let pn = well.level_momentum(n);
            let kx = pn / hbar * spec.center;
            let plus = Complex::from_polar((-s2 * (p0 + pn) * (p0 + pn)).exp(), kx);
            let minus = Complex::from_polar((-s2 * (p0 - pn) * (p0 - pn)).exp(), -kx);
            // 1/(2i) = −i/2
            (plus - minus) * Complex::new(T::zero(), -pre * c(0.5))
        })
        .collect();
    CoefficientSet::new(1, coefficients)
}

/// Closed-form bouncer coefficients for a packet at rest (`p0 = 0`) far from
/// the floor.
///
/// With `s = √2 σħ`:
/// `C_n = N_n (σħ√π)^{-1/2} s√π exp((s²/4)(z0 − z_n) + s⁶/96) Ai(z0 − z_n + s⁴/16)`
/// where `N_n` is the eigenfunction normalization.
pub fn bouncer_coefficients_analytic<T: Real>(
    bouncer: &QuantumBouncer<T>,
    spec: &GaussianPacketSpec<T>,
    n_max: usize,
) -> Result<CoefficientSet<T>> {
    if spec.momentum != T::zero() {
        return Err(Error::Unsupported(
            "analytic bouncer coefficients require p0 = 0".into(),
        ));
    }
    let hbar = Eigenbasis::hbar(bouncer);
    let b = spec.spatial_width(hbar);
    if !(spec.center > b * c(6.0)) {
        return Err(Error::PacketTooWide(format!(
            "z0 = {} is within 6σħ of the floor",
            spec.center
        )));
    }
    let s2 = b * b * c(2.0);
    let pre = (b * T::PI().sqrt()).sqrt().recip() * s2.sqrt() * T::PI().sqrt();
    let z0 = spec.center;
    let coefficients = (1..=n_max)
        .map(|n| {
            let zn = bouncer.zero(n)?;
            let ai = airy_ai(z0 - zn + s2 * s2 / c(16.0))?;
            let g = (s2 / c(4.0) * (z0 - zn) + s2 * s2 * s2 / c(96.0)).exp();
            let v = if ai == T::zero() { T::zero() } else { ai * g };
            Ok(Complex::new(bouncer.norm(n)? * pre * v, T::zero()))
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientSet::new(1, coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::to_momentum_padded;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn well_spec() -> GaussianPacketSpec<f64> {
        GaussianPacketSpec::new(0.5, 1.0 / 200f64.sqrt(), 400.0 * PI).unwrap()
    }

    #[test]
    fn sample_well_packet() {
        let spec = well_spec();
        let g = Grid1D::new(0.0, 1.0, 16385).unwrap();
        let f = sample_gaussian(&spec, g, 1.0).unwrap();
        assert_abs_diff_eq!(f.norm_sqr(), 1.0, epsilon = 1e-8);
        let d = f.density();
        assert_abs_diff_eq!(d.mean(), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(d.variance(), spec.width_sigma.powi(2) / 2.0, epsilon = 1e-6);
        let m = to_momentum_padded(&f, 1.0, 1 << 15).unwrap().density();
        assert_abs_diff_eq!(m.mean(), 400.0 * PI, epsilon = 1e-6);
    }

    #[test]
    fn packet_at_rest_is_real() {
        let spec = GaussianPacketSpec::new(3.0, 0.7, 0.0).unwrap();
        let g = Grid1D::new(-5.0, 11.0, 2001).unwrap();
        let f = sample_gaussian(&spec, g, 1.3).unwrap();
        assert!(f.values.iter().all(|v| v.im == 0.0));
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let spec = GaussianPacketSpec::new(0.0, 1.0, 0.0).unwrap();
        let g = Grid1D::new(0.0, 5.0, 501).unwrap();
        assert!(matches!(
            sample_gaussian(&spec, g, 1.0),
            Err(Error::GridTooNarrow { .. })
        ));
        assert!(GaussianPacketSpec::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn eigenstate_projects_onto_itself() {
        let w = InfiniteWell::<f64>::scaled();
        let g = Grid1D::new(0.0, 1.0, 8193).unwrap();
        let psi: Vec<Complex<f64>> = g
            .points()
            .map(|x| Complex::new(w.eigenfunction(5, x).unwrap(), 0.0))
            .collect();
        let set = project_field(&w, &psi, &g, 12).unwrap();
        for (n, a) in set.levels() {
            let expect = if n == 5 { 1.0 } else { 0.0 };
            assert!((a - expect).norm() < 1e-8, "n={n} a={a}");
        }
    }

    #[test]
    fn well_quadrature_captures_the_packet() {
        let w = InfiniteWell::<f64>::scaled();
        let set = project_numeric(&w, &well_spec(), 800).unwrap();
        assert!(set.captured_norm >= 1.0 - 1e-8, "{}", set.captured_norm);
        assert!(set.captured_norm <= 1.0 + 1e-9);
        assert_eq!(set.n_bar(), 400);
    }

    #[test]
    fn well_analytic_matches_quadrature() {
        let w = InfiniteWell::<f64>::scaled();
        let spec = well_spec();
        let quad = project_numeric(&w, &spec, 800).unwrap();
        let ana = well_coefficients_analytic(&w, &spec, 800).unwrap();
        let worst = quad
            .coefficients
            .iter()
            .zip(&ana.coefficients)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        assert!(ana.captured_norm >= 1.0 - 1e-8);
    }

    #[test]
    fn well_analytic_matches_literal_form_for_slow_packets() {
        // 2√(b√π/L) e^{-σ²(p0²+p_n²)/2} sin(k x0 + iσ²p0p_n)
        let w = InfiniteWell::<f64>::scaled();
        let spec = GaussianPacketSpec::new(0.4, 0.05, 30.0).unwrap();
        let ana = well_coefficients_analytic(&w, &spec, 40).unwrap();
        let b: f64 = 0.05;
        for (n, a) in ana.levels() {
            let pn = n as f64 * PI;
            let pre = 2.0 * (b * PI.sqrt()).sqrt() * (-b * b * (30.0f64.powi(2) + pn * pn) / 2.0).exp();
            let arg = Complex::new(pn * 0.4, b * b * 30.0 * pn);
            let lit = arg.sin() * pre;
            assert!((a - lit).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn centered_packet_at_rest_has_no_even_levels() {
        let w = InfiniteWell::<f64>::scaled();
        let spec = GaussianPacketSpec::new(0.5, 0.05, 0.0).unwrap();
        let set = well_coefficients_analytic(&w, &spec, 60).unwrap();
        for (n, a) in set.levels() {
            if n % 2 == 0 {
                assert!(a.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wide_well_packet_is_rejected() {
        let w = InfiniteWell::<f64>::scaled();
        let spec = GaussianPacketSpec::new(0.2, 0.05, 0.0).unwrap();
        assert!(matches!(
            well_coefficients_analytic(&w, &spec, 10),
            Err(Error::PacketTooWide(_))
        ));
    }

    #[test]
    fn bouncer_analytic_matches_quadrature() {
        let b = QuantumBouncer::<f64>::new(400).unwrap();
        let spec = GaussianPacketSpec::new(100.0, 1.0, 0.0).unwrap();
        let quad = project_numeric(&b, &spec, 400).unwrap();
        let ana = bouncer_coefficients_analytic(&b, &spec, 400).unwrap();
        let worst = quad
            .coefficients
            .iter()
            .zip(&ana.coefficients)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
        assert!(ana.captured_norm >= 1.0 - 1e-6);
        // Weight peaks where z_n meets ⟨H⟩ = z0 + 1/(2σ²), two levels above
        // the zero nearest z0.
        assert!(quad.n_bar().abs_diff(212) <= 2, "{}", quad.n_bar());
        let peak = ana.coefficients.iter().map(|a| a.norm()).fold(0.0, f64::max);
        for (n, a) in ana.levels() {
            let dz = b.zero(n).unwrap() - 100.0;
            if dz < -10.0 {
                assert!(a.norm() < 1e-6 * peak, "n={n}");
            }
            // Above z0 the kinetic tail only decays like e^{-(z_n - z0)/2}.
            if dz > 10.0 {
                assert!(a.norm() < 2.0 * (-dz / 2.0).exp() * peak, "n={n}");
            }
            if dz > 28.0 {
                assert!(a.norm() < 1e-6 * peak, "n={n}");
            }
        }
    }

    #[test]
    fn bouncer_analytic_requires_rest() {
        let b = QuantumBouncer::<f64>::new(10).unwrap();
        let spec = GaussianPacketSpec::new(100.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            bouncer_coefficients_analytic(&b, &spec, 10),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn auto_projection_and_trimming() {
        let w = InfiniteWell::<f64>::scaled();
        let set = project_auto(&w, &well_spec(), 1.0 - 1e-8, 800).unwrap();
        assert!(set.captured_norm >= 1.0 - 1e-8);
        assert!(set.last_n() < 800);
        let t = set.trimmed(1e-14);
        assert!(t.first_n > 300 && t.last_n() < 500, "{}..{}", t.first_n, t.last_n());
        assert!(set.captured_norm - t.captured_norm <= 2e-14);
        assert!(matches!(
            project_auto(&w, &well_spec(), 1.0 - 1e-8, 300),
            Err(Error::InsufficientCapture { .. })
        ));
    }

    #[test]
    fn coefficient_set_bookkeeping() {
        let set = CoefficientSet::new(
            3,
            vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8), Complex::new(0.0, 0.0)],
        )
        .unwrap();
        assert_abs_diff_eq!(set.captured_norm, 1.0, epsilon = 1e-15);
        assert_eq!(set.last_n(), 5);
        assert_eq!(set.n_bar(), 4);
        assert_eq!(set.get(2), Complex::new(0.0, 0.0));
        assert_eq!(set.truncated(4).unwrap().len(), 2);
        let tie = CoefficientSet::new(1, vec![Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)]).unwrap();
        assert_eq!(tie.n_bar(), 1);
        assert!(CoefficientSet::<f64>::new(1, vec![Complex::new(f64::NAN, 0.0)]).is_err());
    }
}
