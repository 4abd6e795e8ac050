//! Uniform grids, quadrature, finite differences and the unitary
//! position/momentum Fourier transform.
//!
//! Transform convention (ħ-scaled, unitary):
//!
//! ```text
//! Φ(p) = (2πħ)^(-1/2) ∫ ψ(x) e^(-ipx/ħ) dx
//! ψ(x) = (2πħ)^(-1/2) ∫ Φ(p) e^(+ipx/ħ) dp
//! ```
//!
//! Momentum grids come out in ascending order with `p = 0` at index `N/2`.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Uniform, endpoint-inclusive 1-D grid: `point(i) = start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    start: T,
    step: T,
    count: usize,
}

impl<T: Real> Grid1D<T> {
    /// Grid over `[start, end]` with both endpoints included.
    pub fn new(start: T, end: T, count: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::NonFinite("grid endpoints".into()));
        }
        if end <= start {
            return Err(Error::InvalidRange(format!("end {end} <= start {start}")));
        }
        if count < 2 {
            return Err(Error::InvalidRange(format!("count {count} < 2")));
        }
        let step = (end - start) / T::from_index(count - 1);
        Ok(Self { start, step, count })
    }

    pub fn from_step(start: T, step: T, count: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() || !start.is_finite() {
            return Err(Error::InvalidRange(format!("step {step} must be positive")));
        }
        if count < 2 {
            return Err(Error::InvalidRange(format!("count {count} < 2")));
        }
        Ok(Self { start, step, count })
    }

    #[inline]
    pub fn start(&self) -> T {
        self.start
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn point(&self, i: usize) -> T {
        self.start + T::from_index(i) * self.step
    }

    pub fn end(&self) -> T {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.count {
            return Err(Error::LengthMismatch {
                expected: self.count,
                actual: len,
            });
        }
        Ok(())
    }
}

/// Which conjugate space a sampled amplitude lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Position,
    Momentum,
}

impl Space {
    fn name(self) -> &'static str {
        match self {
            Space::Position => "position",
            Space::Momentum => "momentum",
        }
    }
}

/// Complex amplitudes sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<T> {
    pub grid: Grid1D<T>,
    pub values: Vec<Complex<T>>,
    pub space: Space,
    /// Zero samples appended to the source field before it was transformed
    /// into this one (0 for fields that were sampled directly).
    pub padding: usize,
}

impl<T: Real> SampledField<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<Complex<T>>, space: Space) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self {
            grid,
            values,
            space,
            padding: 0,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid1D<T>, space: Space, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.points().map(f).collect();
        Self {
            grid,
            values,
            space,
            padding: 0,
        }
    }

    pub fn density(&self) -> SampledDensity<T> {
        SampledDensity {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// `∫ |values|²` over the grid.
    pub fn norm_sqr(&self) -> T {
        let d: Vec<T> = self.values.iter().map(|v| v.norm_sqr()).collect();
        integrate(&d, &self.grid).expect("lengths agree by construction")
    }

    /// `⟨ψ|φ⟩` by quadrature; both fields must share a grid.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.grid.check_len(other.values.len())?;
        let prod: Vec<Complex<T>> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .collect();
        integrate(&prod, &self.grid)
    }

    pub fn scale(&mut self, k: T) {
        for v in &mut self.values {
            *v = *v * k;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Real, non-negative density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity<T> {
    pub grid: Grid1D<T>,
    pub values: Vec<T>,
}

impl<T: Real> SampledDensity<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("density value {v}")));
        }
        if values.iter().any(|&v| v < T::zero()) {
            return Err(Error::Negative("density value below zero".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn total(&self) -> T {
        integrate(&self.values, &self.grid).expect("lengths agree by construction")
    }

    /// First moment `∫ x ρ(x) dx`.
    pub fn mean(&self) -> T {
        let w: Vec<T> = self
            .grid
            .points()
            .zip(&self.values)
            .map(|(x, &r)| x * r)
            .collect();
        integrate(&w, &self.grid).expect("lengths agree by construction")
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        let w: Vec<T> = self
            .grid
            .points()
            .zip(&self.values)
            .map(|(x, &r)| (x - m) * (x - m) * r)
            .collect();
        integrate(&w, &self.grid).expect("lengths agree by construction")
    }
}

/// Composite quadrature over a uniform grid.
///
/// Odd counts use Simpson's 1/3 rule. Even counts use 1/3 on all but the last
/// three intervals and Simpson's 3/8 rule on those. Two points fall back to the
/// trapezoid rule.
pub fn integrate<T, V>(values: &[V], grid: &Grid1D<T>) -> Result<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
{
    grid.check_len(values.len())?;
    let h = grid.step();
    let n = values.len();
    if n == 2 {
        return Ok((values[0] + values[1]) * (h * c(0.5)));
    }
    let (simpson_end, tail) = if n % 2 == 1 { (n, false) } else { (n - 3, true) };
    let mut sum = V::zero();
    if simpson_end >= 3 {
        let mut odd = V::zero();
        let mut even = V::zero();
        for (i, &v) in values[1..simpson_end - 1].iter().enumerate() {
            if i % 2 == 0 {
                odd = odd + v;
            } else {
                even = even + v;
            }
        }
        sum = (values[0] + values[simpson_end - 1] + odd * c(4.0) + even * c(2.0)) * (h / c(3.0));
    }
    if tail {
        let k = n - 4;
        let f = &values[k..];
        sum = sum + (f[0] + f[1] * c(3.0) + f[2] * c(3.0) + f[3]) * (h * c(3.0 / 8.0));
    }
    Ok(sum)
}

/// Order of the central finite-difference stencil used at interior points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Second,
    #[default]
    Fourth,
    Sixth,
}

/// Second-order central differences with second-order one-sided endpoints.
pub fn central_derivative<T: Real>(values: &[T], grid: &Grid1D<T>) -> Result<Vec<T>> {
    derivative(values, grid, Stencil::Second)
}

/// Central differences of the requested order. Points too close to an edge for
/// the full stencil drop to the widest central stencil that fits; the two
/// endpoints use second-order one-sided formulas.
pub fn derivative<T, V>(values: &[V], grid: &Grid1D<T>, stencil: Stencil) -> Result<Vec<V>>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
{
    grid.check_len(values.len())?;
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, actual: n });
    }
    let f = values;
    let h = grid.step();
    let half = c::<T>(0.5) / h;
    let twelfth = T::one() / (c::<T>(12.0) * h);
    let sixtieth = T::one() / (c::<T>(60.0) * h);
    let reach = match stencil {
        Stencil::Second => 1,
        Stencil::Fourth => 2,
        Stencil::Sixth => 3,
    };
    let mut out = vec![V::zero(); n];
    out[0] = (f[1] * c(4.0) - f[0] * c(3.0) - f[2]) * half;
    out[n - 1] = (f[n - 1] * c(3.0) - f[n - 2] * c(4.0) + f[n - 3]) * half;
    for i in 1..n - 1 {
        let r = reach.min(i).min(n - 1 - i);
        out[i] = match r {
            1 => (f[i + 1] - f[i - 1]) * half,
            2 => ((f[i + 1] - f[i - 1]) * c(8.0) - (f[i + 2] - f[i - 2])) * twelfth,
            _ => ((f[i + 1] - f[i - 1]) * c(45.0) - (f[i + 2] - f[i - 2]) * c(9.0)
                + (f[i + 3] - f[i - 3]))
                * sixtieth,
        };
    }
    Ok(out)
}

/// Reusable unitary transform between one position grid and its conjugate
/// momentum grid. Holds the FFT plans and the phase factors for the grid origin.
pub struct MomentumTransform<T: Real> {
    position: Grid1D<T>,
    momentum: Grid1D<T>,
    padded: usize,
    hbar: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// `e^{-i p_k x_0 / ħ}` for every momentum sample.
    origin_phase: Vec<Complex<T>>,
}

impl<T: Real> MomentumTransform<T> {
    /// `min_count` requests extra zero padding (finer momentum spacing); the
    /// transform length is the next power of two at or above
    /// `max(position.count, min_count)`.
    pub fn new(position: Grid1D<T>, hbar: T, min_count: usize) -> Result<Self> {
        if !(hbar > T::zero()) {
            return Err(Error::InvalidRange(format!("hbar {hbar} must be positive")));
        }
        let padded = position.count().max(min_count).next_power_of_two();
        let dp = T::TAU() * hbar / (T::from_index(padded) * position.step());
        let momentum =
            Grid1D::from_step(-T::from_index(padded / 2) * dp, dp, padded)?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        let x0 = position.start();
        let origin_phase = momentum
            .points()
            .map(|p| Complex::from_polar(T::one(), -p * x0 / hbar))
            .collect();
        Ok(Self {
            position,
            momentum,
            padded,
            hbar,
            forward,
            inverse,
            origin_phase,
        })
    }

    pub fn momentum_grid(&self) -> Grid1D<T> {
        self.momentum
    }

    pub fn position_grid(&self) -> Grid1D<T> {
        self.position
    }

    pub fn padded_count(&self) -> usize {
        self.padded
    }

    /// Transforms raw position samples into momentum amplitudes.
    pub fn forward_values(&self, psi: &[Complex<T>]) -> Result<SampledField<T>> {
        self.position.check_len(psi.len())?;
        let mut buf = vec![Complex::zero(); self.padded];
        // (-1)^j shifts the output so that p = 0 lands at index N/2.
        for (j, (b, v)) in buf.iter_mut().zip(psi).enumerate() {
            *b = if j % 2 == 0 { *v } else { -*v };
        }
        self.forward.process(&mut buf);
        let scale = self.position.step() / (T::TAU() * self.hbar).sqrt();
        for (b, ph) in buf.iter_mut().zip(&self.origin_phase) {
            *b = *b * *ph * scale;
        }
        Ok(SampledField {
            grid: self.momentum,
            values: buf,
            space: Space::Momentum,
            padding: self.padded - self.position.count(),
        })
    }

    pub fn forward(&self, field: &SampledField<T>) -> Result<SampledField<T>> {
        if field.space != Space::Position {
            return Err(Error::WrongSpace {
                expected: Space::Position.name(),
                actual: field.space.name(),
            });
        }
        if field.grid != self.position {
            return Err(Error::InvalidRange("field grid differs from transform grid".into()));
        }
        self.forward_values(&field.values)
    }

    /// Inverse transform; drops the padded tail so the result lives on the
    /// original position grid.
    pub fn inverse(&self, field: &SampledField<T>) -> Result<SampledField<T>> {
        if field.space != Space::Momentum {
            return Err(Error::WrongSpace {
                expected: Space::Momentum.name(),
                actual: field.space.name(),
            });
        }
        self.momentum.check_len(field.values.len())?;
        let mut buf: Vec<Complex<T>> = field
            .values
            .iter()
            .zip(&self.origin_phase)
            .map(|(v, ph)| v * ph.conj())
            .collect();
        self.inverse.process(&mut buf);
        let scale = self.momentum.step() / (T::TAU() * self.hbar).sqrt();
        let values = buf
            .iter()
            .take(self.position.count())
            .enumerate()
            .map(|(j, v)| if j % 2 == 0 { *v * scale } else { -*v * scale })
            .collect();
        SampledField::new(self.position, values, Space::Position)
    }
}

/// One-shot position → momentum transform, zero-padded to the next power of two.
pub fn to_momentum<T: Real>(field: &SampledField<T>, hbar: T) -> Result<SampledField<T>> {
    to_momentum_padded(field, hbar, 0)
}

/// As [`to_momentum`] with at least `min_count` transform points.
pub fn to_momentum_padded<T: Real>(
    field: &SampledField<T>,
    hbar: T,
    min_count: usize,
) -> Result<SampledField<T>> {
    if field.space != Space::Position {
        return Err(Error::WrongSpace {
            expected: Space::Position.name(),
            actual: field.space.name(),
        });
    }
    MomentumTransform::new(field.grid, hbar, min_count)?.forward(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn make_grid_examples() {
        let g = Grid1D::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.step(), 0.25);
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        let g = Grid1D::new(0.0, 1.0, 2).unwrap();
        assert_eq!(g.step(), 1.0);
        assert_eq!(g.points().collect::<Vec<_>>(), vec![0.0, 1.0]);

        assert!(matches!(Grid1D::new(1.0, 0.0, 5), Err(Error::InvalidRange(_))));
        assert!(matches!(Grid1D::new(0.0, 1.0, 1), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn integrate_examples() {
        let g = Grid1D::new(0.0, 1.0, 1001).unwrap();
        let ones = vec![1.0; 1001];
        assert_abs_diff_eq!(integrate(&ones, &g).unwrap(), 1.0, epsilon = 1e-14);
        let x: Vec<f64> = g.points().collect();
        assert_abs_diff_eq!(integrate(&x, &g).unwrap(), 0.5, epsilon = 1e-14);
        let s: Vec<f64> = g.points().map(|x| (PI * x).sin().powi(2)).collect();
        assert_abs_diff_eq!(integrate(&s, &g).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn integrate_even_counts_and_trapezoid() {
        // Even count exercises the 3/8 tail; cubic integrands are exact.
        for n in [4usize, 6, 10, 1000] {
            let g = Grid1D::new(0.0, 2.0, n).unwrap();
            let f: Vec<f64> = g.points().map(|x| x * x * x - x).collect();
            assert_abs_diff_eq!(integrate(&f, &g).unwrap(), 2.0, epsilon = 1e-12);
        }
        let g = Grid1D::new(0.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(integrate(&[1.0, 3.0], &g).unwrap(), 2.0);
        assert!(matches!(
            integrate(&[1.0, 2.0, 3.0], &g),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn simpson_converges_at_fourth_order() {
        let err = |n: usize| {
            let g = Grid1D::<f64>::new(0.0, 1.0, n).unwrap();
            let f: Vec<f64> = g.points().map(|x| (3.0 * x).exp()).collect();
            (integrate(&f, &g).unwrap() - ((3.0f64).exp() - 1.0) / 3.0).abs()
        };
        let ratio = err(41) / err(81);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn derivative_examples() {
        let g = Grid1D::new(-1.0, 2.0, 31).unwrap();
        let x: Vec<f64> = g.points().collect();
        for d in central_derivative(&x, &g).unwrap() {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-12);
        }
        for d in central_derivative(&vec![3.5; 31], &g).unwrap() {
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-12);
        }
        let g = Grid1D::new(0.0, PI, 2001).unwrap();
        let s: Vec<f64> = g.points().map(f64::sin).collect();
        let d = central_derivative(&s, &g).unwrap();
        let err = g
            .points()
            .zip(&d)
            .map(|(x, d)| (d - x.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "max error {err}");
        assert!(matches!(
            central_derivative(&[1.0, 2.0], &Grid1D::new(0.0, 1.0, 2).unwrap()),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn higher_stencils_are_more_accurate() {
        let g = Grid1D::<f64>::new(0.0, 6.0, 301).unwrap();
        let f: Vec<f64> = g.points().map(|x| (2.0 * x).sin()).collect();
        let interior_err = |s| {
            let d = derivative(&f, &g, s).unwrap();
            (5..296)
                .map(|i| (d[i] - 2.0 * (2.0 * g.point(i)).cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e2, e4, e6) = (
            interior_err(Stencil::Second),
            interior_err(Stencil::Fourth),
            interior_err(Stencil::Sixth),
        );
        assert!(e4 < e2 / 100.0 && e6 < e4 / 10.0, "{e2} {e4} {e6}");
    }

    fn gaussian_field(n: usize, x0: f64, sigma: f64, p0: f64, lo: f64, hi: f64) -> SampledField<f64> {
        let g = Grid1D::new(lo, hi, n).unwrap();
        let a = (sigma * PI.sqrt()).powf(-0.5);
        SampledField::from_fn(g, Space::Position, |x| {
            let env = a * (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp();
            Complex::from_polar(env, p0 * (x - x0))
        })
    }

    #[test]
    fn momentum_gaussian_matches_closed_form() {
        // Φ(p) = sqrt(σ/√π) e^{-σ²(p-p0)²/2} e^{-ipx0}, ħ = 1.
        let (x0, sigma, p0) = (0.5, 1.0 / 200f64.sqrt(), 40.0);
        let f = gaussian_field(4096, x0, sigma, p0, 0.0, 1.0);
        let m = to_momentum_padded(&f, 1.0, 1 << 15).unwrap();
        assert_eq!(m.space, Space::Momentum);
        assert_eq!(m.padding, (1 << 15) - 4096);
        let amp = (sigma / PI.sqrt()).sqrt();
        let err = m
            .grid
            .points()
            .zip(&m.values)
            .map(|(p, v)| {
                let exact = Complex::from_polar(
                    amp * (-sigma * sigma * (p - p0).powi(2) / 2.0).exp(),
                    -p * x0,
                );
                (v - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err}");
    }

    #[test]
    fn momentum_grid_is_ascending_and_contains_zero() {
        let f = gaussian_field(100, 5.0, 1.0, 0.0, 0.0, 10.0);
        let m = to_momentum(&f, 1.0).unwrap();
        assert_eq!(m.grid.count(), 128);
        assert_eq!(m.padding, 28);
        assert_abs_diff_eq!(m.grid.point(64), 0.0, epsilon = 1e-12);
        assert!(m.grid.step() > 0.0);
    }

    #[test]
    fn shift_theorem_translates_density() {
        let base = gaussian_field(2048, 10.0, 1.0, 0.0, 0.0, 20.0);
        let boosted = gaussian_field(2048, 10.0, 1.0, 3.0, 0.0, 20.0);
        let m0 = to_momentum(&base, 1.0).unwrap().density();
        let m1 = to_momentum(&boosted, 1.0).unwrap().density();
        assert_abs_diff_eq!(m1.mean() - m0.mean(), 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m1.variance(), m0.variance(), epsilon = 1e-8);
    }

    #[test]
    fn wrong_space_is_rejected() {
        let f = gaussian_field(64, 5.0, 1.0, 0.0, 0.0, 10.0);
        let m = to_momentum(&f, 1.0).unwrap();
        assert!(matches!(to_momentum(&m, 1.0), Err(Error::WrongSpace { .. })));
    }

    #[test]
    fn hbar_scales_momentum_axis() {
        let f = gaussian_field(1024, 5.0, 1.0, 0.0, 0.0, 10.0);
        let m1 = to_momentum_padded(&f, 1.0, 8192).unwrap();
        let m2 = to_momentum_padded(&f, 2.0, 8192).unwrap();
        assert_abs_diff_eq!(m2.grid.step(), 2.0 * m1.grid.step(), epsilon = 1e-14);
        assert_abs_diff_eq!(m2.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn f32_grid_and_quadrature() {
        let g = Grid1D::<f32>::new(0.0, 1.0, 101).unwrap();
        let f: Vec<f32> = g.points().map(|x| x * x).collect();
        assert!((integrate(&f, &g).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }
}
