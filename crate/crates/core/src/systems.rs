//! Bound systems: the infinite square well and the quantum bouncer.
//!
//! The bouncer lives in scaled gravitational units where `H = p² + z`
//! (so `ħ = 1`, `2m = 1`) and the energies are the Airy zeros `E_n = z_n`.

use num_complex::Complex;
use serde::Serialize;

use crate::airy::{airy_ai, airy_ai_prime, airy_zero};
use crate::error::{Error, Result};
use crate::grid::{integrate, Grid1D};
use crate::scalar::{c, Real};

/// A bound system with a discrete spectrum indexed from `n = 1`.
pub trait Eigenbasis<T: Real>: Sync {
    fn hbar(&self) -> T;

    /// Highest level the basis can evaluate, if bounded.
    fn max_level(&self) -> Option<usize>;

    fn energy(&self, n: usize) -> Result<T>;

    /// Real position eigenfunction `u_n(x)`.
    fn eigenfunction(&self, n: usize, x: T) -> Result<T>;

    /// Interval that carries every eigenfunction up to `n_max`.
    fn domain(&self, n_max: usize) -> Result<(T, T)>;

    /// Upper bound on the local wavenumber of `u_n` for `n ≤ n_max`.
    fn wavenumber_bound(&self, n_max: usize) -> Result<T>;

    /// Closed-form momentum eigenfunction, where one exists.
    fn momentum_eigenfunction(&self, _n: usize, _p: T) -> Option<Complex<T>> {
        None
    }

    fn spectrum(&self, n_max: usize) -> Result<EnergySpectrum<T>> {
        let levels = (1..=n_max).map(|n| self.energy(n)).collect::<Result<Vec<_>>>()?;
        EnergySpectrum::new(levels)
    }
}

/// Energies `E_1, E_2, …` in increasing order, stored as `scale * reduced[n]`
/// so that spectra with an exact integer pattern difference without rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum<T> {
    scale: T,
    levels: Vec<T>,
}

impl<T: Real> EnergySpectrum<T> {
    pub fn new(levels: Vec<T>) -> Result<Self> {
        Self::scaled(T::one(), levels)
    }

    pub fn scaled(scale: T, levels: Vec<T>) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidRange(format!("energy scale {scale} must be positive")));
        }
        if levels.is_empty() {
            return Err(Error::TooFewPoints {
                needed: 1,
                actual: 0,
            });
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("energy level".into()));
        }
        if let Some(i) = levels.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRange(format!(
                "spectrum not strictly increasing at level {}",
                i + 2
            )));
        }
        Ok(Self { scale, levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `E_n`, with `n` counted from 1.
    pub fn energy(&self, n: usize) -> Option<T> {
        n.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .map(|&e| e * self.scale)
    }

    pub fn levels(&self) -> Vec<T> {
        self.levels.iter().map(|&e| e * self.scale).collect()
    }
}

/// Classical period and revival time around the central level `n_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeScales<T> {
    pub t_classical: T,
    pub t_revival: T,
    pub n_bar: usize,
}

/// `T_cl = 2πħ/|E′(n̄)|` and `T_rev = 2πħ/(|E″(n̄)|/2)` with central
/// differences in the level index.
pub fn spectrum_timescales<T: Real>(
    spectrum: &EnergySpectrum<T>,
    n_bar: usize,
    hbar: T,
) -> Result<TimeScales<T>> {
    let len = spectrum.len();
    if n_bar < 2 || n_bar + 1 > len {
        return Err(Error::SpectrumEdge {
            n_bar,
            max: len.saturating_sub(1),
        });
    }
    let e = |n: usize| spectrum.levels[n - 1];
    let (lo, mid, hi) = (e(n_bar - 1), e(n_bar), e(n_bar + 1));
    let first = (hi - lo) * c(0.5) * spectrum.scale;
    let second = ((hi - mid) - (mid - lo)) * spectrum.scale;
    let two_pi_hbar = T::TAU() * hbar;
    Ok(TimeScales {
        t_classical: two_pi_hbar / first.abs(),
        t_revival: two_pi_hbar * c(2.0) / second.abs(),
        n_bar,
    })
}

/// Bouncer closed forms `T_cl = 2√z0`, `T_rev = 4z0²/π`; `n_bar` is the level
/// whose energy lies closest to `z0`.
pub fn bouncer_closed_form_timescales<T: Real>(z0: T) -> Result<TimeScales<T>> {
    if !(z0 > T::zero()) || !z0.is_finite() {
        return Err(Error::InvalidRange(format!("z0 = {z0} must be positive")));
    }
    Ok(TimeScales {
        t_classical: z0.sqrt() * c(2.0),
        t_revival: z0 * z0 * c(4.0) / T::PI(),
        n_bar: nearest_bouncer_level(z0)?,
    })
}

fn nearest_bouncer_level<T: Real>(z0: T) -> Result<usize> {
    // Invert z_n ≈ [(3π/2)(n − 1/4)]^{2/3}, then settle on the true zeros.
    let guess = z0.powf(c(1.5)) * c(2.0) / (T::PI() * c(3.0)) + c(0.25);
    let mut n = guess.round().to_usize().unwrap_or(1).max(1);
    let dist = |n: usize| airy_zero::<T>(n).map(|z| (z - z0).abs());
    loop {
        if n > 1 && dist(n - 1)? < dist(n)? {
            n -= 1;
        } else if dist(n + 1)? < dist(n)? {
            n += 1;
        } else {
            return Ok(n);
        }
    }
}

/// Infinite square well on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteWell<T> {
    length: T,
    mass: T,
    hbar: T,
}

impl<T: Real> InfiniteWell<T> {
    pub fn new(length: T, mass: T, hbar: T) -> Result<Self> {
        for (name, v) in [("length", length), ("mass", mass), ("hbar", hbar)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidRange(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { length, mass, hbar })
    }

    /// `2m = ħ = L = 1`.
    pub fn scaled() -> Self {
        Self {
            length: T::one(),
            mass: c(0.5),
            hbar: T::one(),
        }
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    fn check_level(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::LevelOutOfRange {
                level: n,
                min: 1,
                max: usize::MAX,
            });
        }
        Ok(())
    }

    /// `p_n = nπħ/L`.
    pub fn level_momentum(&self, n: usize) -> T {
        T::from_index(n) * T::PI() * self.hbar / self.length
    }

    /// `E_n = n²π²ħ²/(2mL²)`.
    pub fn energy(&self, n: usize) -> Result<T> {
        Self::check_level(n)?;
        let p = self.level_momentum(n);
        Ok(p * p / (self.mass * c(2.0)))
    }

    /// `√(2/L) sin(nπx/L)`.
    pub fn eigenfunction(&self, n: usize, x: T) -> Result<T> {
        Self::check_level(n)?;
        if !(x >= T::zero() && x <= self.length) {
            return Err(Error::OutsideDomain(format!(
                "x = {x} outside [0, {}]",
                self.length
            )));
        }
        let k = T::from_index(n) * T::PI() / self.length;
        Ok((c::<T>(2.0) / self.length).sqrt() * (k * x).sin())
    }

    /// `√(ħ/(πL)) p_n/(p² − p_n²) [(−1)ⁿ e^{−ipL/ħ} − 1]`, evaluated through
    /// the nearest root `±p_n` so the removable singularity never divides by
    /// zero.
    pub fn momentum_eigenfunction(&self, n: usize, p: T) -> Result<Complex<T>> {
        Self::check_level(n)?;
        if !p.is_finite() {
            return Err(Error::NonFinite(format!("momentum {p}")));
        }
        let (hbar, l) = (self.hbar, self.length);
        let k = T::from_index(n) * T::PI() / l;
        let q = p / hbar;
        // With δ = q ∓ k: (−1)ⁿe^{−iqL} − 1 = e^{−iδL} − 1 and
        // q² − k² = δ (q ± k).
        let (delta, partner) = if q >= T::zero() {
            (q - k, q + k)
        } else {
            (q + k, q - k)
        };
        let ratio = exp_minus_one_over(delta, l);
        let scale = T::one() / (T::PI() * hbar * l).sqrt();
        Ok(ratio * (k * scale / partner))
    }

    /// Closed forms `T_cl = 2mL²/(ħπn̄)`, `T_rev = 4mL²/(ħπ)`.
    pub fn closed_form_timescales(&self, n_bar: usize) -> Result<TimeScales<T>> {
        Self::check_level(n_bar)?;
        let ml2 = self.mass * self.length * self.length;
        Ok(TimeScales {
            t_classical: ml2 * c(2.0) / (self.hbar * T::PI() * T::from_index(n_bar)),
            t_revival: ml2 * c(4.0) / (self.hbar * T::PI()),
            n_bar,
        })
    }
}

/// `(e^{−iδL} − 1)/δ`, by series for small `δL`.
fn exp_minus_one_over<T: Real>(delta: T, l: T) -> Complex<T> {
    let z = delta * l;
    if z.abs() > c(0.1) {
        let e = Complex::from_polar(T::one(), -z) - T::one();
        return e / delta;
    }
    // −iL Σ_m (−iz)^m/(m+1)!
    let w = Complex::new(T::zero(), -z);
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    for m in 1..16 {
        term = term * w / T::from_index(m + 1);
        sum = sum + term;
    }
    sum * Complex::new(T::zero(), -l)
}

impl<T: Real> Eigenbasis<T> for InfiniteWell<T> {
    fn hbar(&self) -> T {
        self.hbar
    }

    fn max_level(&self) -> Option<usize> {
        None
    }

    fn energy(&self, n: usize) -> Result<T> {
        InfiniteWell::energy(self, n)
    }

    fn eigenfunction(&self, n: usize, x: T) -> Result<T> {
        InfiniteWell::eigenfunction(self, n, x)
    }

    fn domain(&self, _n_max: usize) -> Result<(T, T)> {
        Ok((T::zero(), self.length))
    }

    fn wavenumber_bound(&self, n_max: usize) -> Result<T> {
        Ok(T::from_index(n_max.max(1)) * T::PI() / self.length)
    }

    fn momentum_eigenfunction(&self, n: usize, p: T) -> Option<Complex<T>> {
        InfiniteWell::momentum_eigenfunction(self, n, p).ok()
    }

    fn spectrum(&self, n_max: usize) -> Result<EnergySpectrum<T>> {
        let unit = self.level_momentum(1);
        let scale = unit * unit / (self.mass * c(2.0));
        EnergySpectrum::scaled(scale, (1..=n_max).map(|n| T::from_index(n * n)).collect())
    }
}

/// Distance past the highest turning point kept in the sampling domain.
pub const BOUNCER_DOMAIN_MARGIN: f64 = 15.0;

/// Quantum bouncer in scaled units: `u_n(z) = Ai(z − z_n)/|Ai′(−z_n)|` for
/// `z ≥ 0`, zero below the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumBouncer<T> {
    zeros: Vec<T>,
    norms: Vec<T>,
}

impl<T: Real> QuantumBouncer<T> {
    /// Tabulates zeros and normalization constants for levels `1..=max_level`.
    ///
    /// Each constant is checked against a direct quadrature of `Ai²` and
    /// replaced by the quadrature value when they differ by more than 1e-6.
    pub fn new(max_level: usize) -> Result<Self> {
        if max_level == 0 {
            return Err(Error::LevelOutOfRange {
                level: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        let zeros = (1..=max_level).map(airy_zero::<T>).collect::<Result<Vec<_>>>()?;
        let norms = zeros
            .iter()
            .map(|&z| {
                let analytic = T::one() / airy_ai_prime(-z)?.abs();
                let quad = Self::quadrature_norm(z, analytic)?;
                if (quad - T::one()).abs() > c(1e-6) {
                    Ok(analytic / quad.sqrt())
                } else {
                    Ok(analytic)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { zeros, norms })
    }

    fn quadrature_norm(zn: T, norm: T) -> Result<T> {
        let end = zn + c(BOUNCER_DOMAIN_MARGIN);
        // About 40 samples per local wavelength at the floor.
        let k = zn.sqrt().max(T::one());
        let count = ((end * k * c(40.0) / T::TAU()).to_usize().unwrap_or(0) | 1).max(2001);
        let grid = Grid1D::new(T::zero(), end, count)?;
        let vals = grid
            .points()
            .map(|z| airy_ai(z - zn).map(|a| a * a * norm * norm))
            .collect::<Result<Vec<_>>>()?;
        integrate(&vals, &grid)
    }

    pub fn level_count(&self) -> usize {
        self.zeros.len()
    }

    fn index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.zeros.len() {
            return Err(Error::LevelOutOfRange {
                level: n,
                min: 1,
                max: self.zeros.len(),
            });
        }
        Ok(n - 1)
    }

    /// `z_n`, which is also `E_n`.
    pub fn zero(&self, n: usize) -> Result<T> {
        Ok(self.zeros[self.index(n)?])
    }

    /// Normalization constant of `u_n`.
    pub fn norm(&self, n: usize) -> Result<T> {
        Ok(self.norms[self.index(n)?])
    }

    pub fn eigenfunction(&self, n: usize, z: T) -> Result<T> {
        let i = self.index(n)?;
        if !z.is_finite() {
            return Err(Error::NonFinite(format!("z = {z}")));
        }
        if z < T::zero() {
            return Ok(T::zero());
        }
        Ok(airy_ai(z - self.zeros[i])? * self.norms[i])
    }
}

impl<T: Real> Eigenbasis<T> for QuantumBouncer<T> {
    fn hbar(&self) -> T {
        T::one()
    }

    fn max_level(&self) -> Option<usize> {
        Some(self.zeros.len())
    }

    fn energy(&self, n: usize) -> Result<T> {
        self.zero(n)
    }

    fn eigenfunction(&self, n: usize, z: T) -> Result<T> {
        QuantumBouncer::eigenfunction(self, n, z)
    }

    fn domain(&self, n_max: usize) -> Result<(T, T)> {
        Ok((T::zero(), self.zero(n_max)? + c(BOUNCER_DOMAIN_MARGIN)))
    }

    fn wavenumber_bound(&self, n_max: usize) -> Result<T> {
        Ok(self.zero(n_max)?.sqrt())
    }
}
