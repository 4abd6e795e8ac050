//! Spectral time evolution: `ψ(x,t) = Σ a_n u_n(x) e^{−iE_n t/ħ}`.
//!
//! Eigenfunctions are tabulated once per grid; each time point is then a
//! phase multiplication and one pass over the table.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, MomentumTransform, SampledField, Space};
use crate::packets::CoefficientSet;
use crate::scalar::Real;
use crate::systems::{EnergySpectrum, Eigenbasis, InfiniteWell};

/// `u_n(x_j)` for consecutive levels, one row per level.
#[derive(Debug, Clone)]
pub struct EigenTable<T, V = T> {
    first_n: usize,
    grid: Grid1D<T>,
    rows: Vec<Vec<V>>,
}

impl<T: Real> EigenTable<T, T> {
    pub fn position<B: Eigenbasis<T> + ?Sized>(
        basis: &B,
        grid: Grid1D<T>,
        first_n: usize,
        last_n: usize,
    ) -> Result<Self> {
        let rows = (first_n..=last_n)
            .into_par_iter()
            .map(|n| grid.points().map(|x| basis.eigenfunction(n, x)).collect())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { first_n, grid, rows })
    }
}

impl<T: Real> EigenTable<T, Complex<T>> {
    pub fn momentum<B: Eigenbasis<T> + ?Sized>(
        basis: &B,
        grid: Grid1D<T>,
        first_n: usize,
        last_n: usize,
    ) -> Result<Self> {
        let rows = (first_n..=last_n)
            .into_par_iter()
            .map(|n| {
                grid.points()
                    .map(|p| {
                        basis.momentum_eigenfunction(n, p).ok_or_else(|| {
                            Error::Unsupported("basis has no closed-form momentum states".into())
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { first_n, grid, rows })
    }
}

impl<T: Real, V> EigenTable<T, V>
where
    V: Copy + Send + Sync,
    Complex<T>: std::ops::Mul<V, Output = Complex<T>>,
{
    pub fn grid(&self) -> Grid1D<T> {
        self.grid
    }

    pub fn first_n(&self) -> usize {
        self.first_n
    }

    pub fn level_count(&self) -> usize {
        self.rows.len()
    }

    /// `Σ_i weights[i] · row(first_n + i)`.
    pub fn superpose(&self, weights: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if weights.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                expected: self.rows.len(),
                actual: weights.len(),
            });
        }
        let mut out = vec![Complex::zero(); self.grid.count()];
        for (w, row) in weights.iter().zip(&self.rows) {
            if w.is_zero() {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(row) {
                *o = *o + *w * u;
            }
        }
        Ok(out)
    }
}

/// How momentum amplitudes are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumMethod<T> {
    /// Sum closed-form momentum eigenfunctions on the given grid.
    EigenSum(Grid1D<T>),
    /// Transform the position amplitude, zero-padded to at least `min_count`.
    Fft { min_count: usize },
}

enum MomentumEngine<T: Real> {
    EigenSum(EigenTable<T, Complex<T>>),
    Fft(MomentumTransform<T>),
}

/// Evolves one coefficient set on fixed position and momentum grids.
pub struct Propagator<T: Real> {
    hbar: T,
    coeffs: CoefficientSet<T>,
    energies: Vec<T>,
    position: EigenTable<T>,
    momentum: MomentumEngine<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new<B: Eigenbasis<T> + ?Sized>(
        basis: &B,
        coeffs: CoefficientSet<T>,
        position_grid: Grid1D<T>,
        method: MomentumMethod<T>,
    ) -> Result<Self> {
        let (first, last) = (coeffs.first_n, coeffs.last_n());
        let energies = (first..=last)
            .map(|n| basis.energy(n))
            .collect::<Result<Vec<_>>>()?;
        let position = EigenTable::position(basis, position_grid, first, last)?;
        let momentum = match method {
            MomentumMethod::EigenSum(grid) => {
                MomentumEngine::EigenSum(EigenTable::momentum(basis, grid, first, last)?)
            }
            MomentumMethod::Fft { min_count } => MomentumEngine::Fft(MomentumTransform::new(
                position_grid,
                basis.hbar(),
                min_count,
            )?),
        };
        Ok(Self {
            hbar: basis.hbar(),
            coeffs,
            energies,
            position,
            momentum,
        })
    }

    pub fn coefficients(&self) -> &CoefficientSet<T> {
        &self.coeffs
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn position_grid(&self) -> Grid1D<T> {
        self.position.grid()
    }

    pub fn momentum_grid(&self) -> Grid1D<T> {
        match &self.momentum {
            MomentumEngine::EigenSum(table) => table.grid(),
            MomentumEngine::Fft(tr) => tr.momentum_grid(),
        }
    }

    /// `a_n e^{−iE_n t/ħ}`.
    pub fn phased(&self, t: T) -> Vec<Complex<T>> {
        self.coeffs
            .coefficients
            .iter()
            .zip(&self.energies)
            .map(|(&a, &e)| a * Complex::from_polar(T::one(), -e * t / self.hbar))
            .collect()
    }

    fn position_from(&self, weights: &[Complex<T>]) -> SampledField<T> {
        let values = self.position.superpose(weights).expect("weights match the table");
        SampledField {
            grid: self.position.grid(),
            values,
            space: Space::Position,
            padding: 0,
        }
    }

    fn momentum_from(
        &self,
        weights: &[Complex<T>],
        position: Option<&SampledField<T>>,
    ) -> Result<SampledField<T>> {
        match &self.momentum {
            MomentumEngine::EigenSum(table) => Ok(SampledField {
                grid: table.grid(),
                values: table.superpose(weights)?,
                space: Space::Momentum,
                padding: 0,
            }),
            MomentumEngine::Fft(tr) => match position {
                Some(f) => tr.forward(f),
                None => tr.forward(&self.position_from(weights)),
            },
        }
    }

    pub fn position_at(&self, t: T) -> SampledField<T> {
        self.position_from(&self.phased(t))
    }

    pub fn momentum_at(&self, t: T) -> Result<SampledField<T>> {
        self.momentum_from(&self.phased(t), None)
    }

    /// Position and momentum amplitudes at `t`, sharing the phase pass.
    pub fn state_at(&self, t: T) -> Result<(SampledField<T>, SampledField<T>)> {
        let w = self.phased(t);
        let psi = self.position_from(&w);
        let phi = self.momentum_from(&w, Some(&psi))?;
        Ok((psi, phi))
    }

    /// `A(t) = Σ |a_n|² e^{−iE_n t/ħ}`.
    pub fn autocorrelation(&self, t: T) -> Complex<T> {
        self.coeffs
            .coefficients
            .iter()
            .zip(&self.energies)
            .map(|(a, &e)| Complex::from_polar(a.norm_sqr(), -e * t / self.hbar))
            .fold(Complex::zero(), |acc, v| acc + v)
    }

    /// `ψ_cl(x,t) = Σ a_n u_n(x) e^{−i2πnt/T_cl}`.
    pub fn classical_component(&self, t: T, t_classical: T) -> Result<SampledField<T>> {
        if !(t_classical > T::zero()) {
            return Err(Error::InvalidRange(format!(
                "classical period {t_classical} must be positive"
            )));
        }
        let w: Vec<Complex<T>> = self
            .coeffs
            .levels()
            .map(|(n, a)| {
                // Reduce n·t/T_cl to its fractional part before scaling by 2π.
                let cycles = T::from_index(n) * (t / t_classical);
                a * Complex::from_polar(T::one(), -T::TAU() * cycles.fract())
            })
            .collect();
        Ok(self.position_from(&w))
    }
}

/// `A(t) = Σ |a_n|² e^{−iE_n t/ħ}` against a spectrum indexed from 1.
pub fn autocorrelation<T: Real>(
    coeffs: &CoefficientSet<T>,
    spectrum: &EnergySpectrum<T>,
    t: T,
    hbar: T,
) -> Result<Complex<T>> {
    coeffs
        .levels()
        .map(|(n, a)| {
            let e = spectrum.energy(n).ok_or(Error::LevelOutOfRange {
                level: n,
                min: 1,
                max: spectrum.len(),
            })?;
            Ok(Complex::from_polar(a.norm_sqr(), -e * t / hbar))
        })
        .try_fold(Complex::zero(), |acc, v: Result<Complex<T>>| Ok(acc + v?))
}

/// `⟨ψ(0)|ψ(t)⟩` by quadrature over a shared grid.
pub fn overlap_autocorrelation<T: Real>(
    initial: &SampledField<T>,
    evolved: &SampledField<T>,
) -> Result<Complex<T>> {
    if initial.space != evolved.space {
        return Err(Error::WrongSpace {
            expected: space_name(initial.space),
            actual: space_name(evolved.space),
        });
    }
    initial.inner(evolved)
}

fn space_name(s: Space) -> &'static str {
    match s {
        Space::Position => "position",
        Space::Momentum => "momentum",
    }
}

/// Default half-width of the well's momentum grid, in units of `p_{last_n}`.
///
/// Once the packet touches a wall, `Φ(p)` decays only like `1/p²`, so the
/// grid must reach well past the retained band to hold the norm.
pub const WELL_MOMENTUM_REACH: f64 = 3.0;

/// Symmetric momentum grid `±reach·p_{last_n}` for the well's eigenstate sum.
pub fn well_momentum_grid<T: Real>(
    well: &InfiniteWell<T>,
    last_n: usize,
    reach: T,
    count: usize,
) -> Result<Grid1D<T>> {
    let p = well.level_momentum(last_n) * reach;
    Grid1D::new(-p, p, count)
}

/// Uniform time samples over `[start, end]`.
pub fn time_grid<T: Real>(start: T, end: T, samples: usize) -> Result<Vec<T>> {
    if samples < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            actual: samples,
        });
    }
    Ok(Grid1D::new(start, end, samples)?.points().collect())
}

/// Sampling grid for the bouncer: `[0, z_N + 15]`.
pub fn bouncer_position_grid<T: Real, B: Eigenbasis<T> + ?Sized>(
    basis: &B,
    last_n: usize,
    count: usize,
) -> Result<Grid1D<T>> {
    let (lo, hi) = basis.domain(last_n)?;
    Grid1D::new(lo, hi, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::{
        bouncer_coefficients_analytic, sample_gaussian, well_coefficients_analytic,
        GaussianPacketSpec,
    };
    use crate::systems::QuantumBouncer;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn well_setup(points: usize) -> (InfiniteWell<f64>, Propagator<f64>, GaussianPacketSpec<f64>) {
        let w = InfiniteWell::scaled();
        let spec = GaussianPacketSpec::new(0.5, 1.0 / 200f64.sqrt(), 400.0 * PI).unwrap();
        let coeffs = well_coefficients_analytic(&w, &spec, 800).unwrap().trimmed(1e-20);
        let pg = well_momentum_grid(&w, coeffs.last_n(), WELL_MOMENTUM_REACH, 32768).unwrap();
        let grid = Grid1D::new(0.0, 1.0, points).unwrap();
        let prop = Propagator::new(&w, coeffs, grid, MomentumMethod::EigenSum(pg)).unwrap();
        (w, prop, spec)
    }

    #[test]
    fn well_initial_state_and_exact_revival() {
        let (_, prop, spec) = well_setup(4097);
        let psi0 = prop.position_at(0.0);
        let sampled = sample_gaussian(&spec, prop.position_grid(), 1.0).unwrap();
        assert!(psi0.max_abs_diff(&sampled) < 1e-8);
        let t_rev = 2.0 / PI;
        let back = prop.position_at(t_rev);
        assert!(back.max_abs_diff(&psi0) < 1e-9, "{}", back.max_abs_diff(&psi0));
        let a = prop.autocorrelation(t_rev);
        assert_abs_diff_eq!(a.norm(), prop.coefficients().captured_norm, epsilon = 1e-12);
    }

    #[test]
    fn well_mirror_revival() {
        let (_, prop, _) = well_setup(4097);
        let psi0 = prop.position_at(0.0);
        let mid = prop.position_at(1.0 / PI);
        let n = psi0.values.len();
        let worst = (0..n)
            .map(|j| (mid.values[j].norm() - psi0.values[n - 1 - j].norm()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn norm_is_conserved_in_both_spaces() {
        let (w, prop, _) = well_setup(16384);
        let fft = Propagator::new(
            &w,
            prop.coefficients().clone(),
            prop.position_grid(),
            MomentumMethod::Fft { min_count: 1 << 16 },
        )
        .unwrap();
        let cap = prop.coefficients().captured_norm;
        let reach = prop.momentum_grid().end();
        for t in [0.0, 0.013, 0.1, 0.37] {
            let (psi, phi) = prop.state_at(t).unwrap();
            assert_abs_diff_eq!(psi.norm_sqr(), cap, epsilon = 1e-8);
            let full = fft.momentum_at(t).unwrap();
            assert_abs_diff_eq!(full.norm_sqr(), cap, epsilon = 1e-6);
            // The eigenstate sum is exact pointwise; its deficit is the
            // slowly decaying tail beyond the grid, which the FFT route sees.
            let inside: Vec<f64> = full
                .grid
                .points()
                .zip(&full.values)
                .map(|(p, v)| if p.abs() <= reach { v.norm_sqr() } else { 0.0 })
                .collect();
            let inside = crate::grid::integrate(&inside, &full.grid).unwrap();
            assert_abs_diff_eq!(phi.norm_sqr(), inside, epsilon = 2e-6);
            assert!(phi.norm_sqr() > cap - 1e-4, "{}", phi.norm_sqr());
        }
    }

    #[test]
    fn well_momentum_at_zero_is_the_gaussian() {
        let (_, prop, spec) = well_setup(4097);
        let phi = prop.momentum_at(0.0).unwrap();
        let s = spec.width_sigma;
        let mut worst: f64 = 0.0;
        for (p, v) in phi.grid.points().zip(&phi.values) {
            let env = (s / PI.sqrt()).sqrt() * (-s * s * (p - spec.momentum).powi(2) / 2.0).exp();
            let exact = Complex::from_polar(env, -p * spec.center);
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn well_eigensum_and_fft_routes_agree() {
        let (w, prop, _) = well_setup(16384);
        let fft = Propagator::new(
            &w,
            prop.coefficients().clone(),
            prop.position_grid(),
            MomentumMethod::Fft { min_count: 1 << 14 },
        )
        .unwrap();
        let t = 0.1;
        let w_t = prop.phased(t);
        let b = fft.momentum_at(t).unwrap();
        let mut worst: f64 = 0.0;
        for (p, v) in b.grid.points().zip(&b.values) {
            if p.abs() > 2000.0 {
                continue;
            }
            let exact: Complex<f64> = prop
                .coefficients()
                .levels()
                .zip(&w_t)
                .map(|((n, _), &wn)| wn * w.momentum_eigenfunction(n, p).unwrap())
                .sum();
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn autocorrelation_routes_agree() {
        let (w, prop, _) = well_setup(4097);
        let spec = w.spectrum(prop.coefficients().last_n()).unwrap();
        let psi0 = prop.position_at(0.0);
        for t in [0.0, 0.0123, 0.2, 1.0 / PI] {
            let a = prop.autocorrelation(t);
            let b = autocorrelation(prop.coefficients(), &spec, t, 1.0).unwrap();
            let o = overlap_autocorrelation(&psi0, &prop.position_at(t)).unwrap();
            assert!((a - b).norm() < 1e-9);
            assert_abs_diff_eq!(a.norm_sqr(), o.norm_sqr(), epsilon = 1e-6);
            assert!(a.norm() <= prop.coefficients().captured_norm + 1e-12);
        }
        assert_abs_diff_eq!(prop.autocorrelation(0.0).re, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn classical_component_is_periodic() {
        let (_, prop, _) = well_setup(4097);
        let t_cl = 1.0 / (400.0 * PI);
        let c0 = prop.classical_component(0.0, t_cl).unwrap();
        assert!(c0.max_abs_diff(&prop.position_at(0.0)) < 1e-12);
        for t in [0.0, 0.3 * t_cl, 7.1 * t_cl] {
            let a = prop.classical_component(t, t_cl).unwrap();
            let b = prop.classical_component(t + t_cl, t_cl).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10);
        }
        assert!(prop.classical_component(0.0, 0.0).is_err());
    }

    #[test]
    fn classical_component_tracks_the_reflected_packet() {
        let (_, prop, _) = well_setup(4097);
        let t_cl = 1.0 / (400.0 * PI);
        // Half a period after t = T_cl the packet has bounced off x = 1 and
        // is heading back through the center.
        let t = 1.5 * t_cl;
        let cl = prop.classical_component(t, t_cl).unwrap().density();
        let q = prop.position_at(t).density();
        assert_abs_diff_eq!(cl.mean(), q.mean(), epsilon = 0.01);
        assert_abs_diff_eq!(cl.mean(), 0.5, epsilon = 0.01);
        // Quarter period: packet sitting against the right wall.
        let quarter = prop.classical_component(0.25 * t_cl, t_cl).unwrap().density();
        assert!(quarter.mean() > 0.8, "{}", quarter.mean());
    }

    #[test]
    fn bouncer_fft_route_conserves_norm() {
        let b = QuantumBouncer::<f64>::new(400).unwrap();
        let spec = GaussianPacketSpec::new(100.0, 1.0, 0.0).unwrap();
        let coeffs = bouncer_coefficients_analytic(&b, &spec, 400).unwrap().trimmed(1e-20);
        let grid = bouncer_position_grid(&b, coeffs.last_n(), 8192).unwrap();
        let prop = Propagator::new(&b, coeffs, grid, MomentumMethod::Fft { min_count: 1 << 17 }).unwrap();
        for t in [0.0, 5.0, 137.0] {
            let (psi, phi) = prop.state_at(t).unwrap();
            let cap = prop.coefficients().captured_norm;
            assert_abs_diff_eq!(psi.norm_sqr(), cap, epsilon = 1e-6);
            assert_abs_diff_eq!(phi.norm_sqr(), cap, epsilon = 1e-6);
        }
        let psi0 = prop.position_at(0.0).density();
        assert_abs_diff_eq!(psi0.mean(), 100.0, epsilon = 1e-6);
        assert!(Propagator::new(
            &b,
            prop.coefficients().clone(),
            grid,
            MomentumMethod::EigenSum(grid)
        )
        .is_err());
    }
}
