//! Fisher informations, the nonclassicality `J_nc`, and the classical
//! momentum `P_cl ψ = ħ (arg ψ)′ ψ`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::grid::{derivative, integrate, SampledDensity, SampledField, Space, Stencil};
use crate::scalar::{c, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherPair<T> {
    pub i_rho: T,
    pub i_gamma: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonclassicalityPoint<T> {
    pub t: T,
    pub fisher: FisherPair<T>,
    pub j_nc: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FisherOptions<T> {
    /// Points with `ρ < floor · max ρ` are left out of the quadrature.
    pub floor: T,
    /// Stencil for `d√ρ/dx`.
    pub stencil: Stencil,
    /// Stencil for `ψ′` in the classical momentum.
    pub phase_stencil: Stencil,
    /// Allowed deviation of `∫ρ` from 1.
    pub norm_tolerance: T,
}

impl<T: Real> Default for FisherOptions<T> {
    fn default() -> Self {
        Self {
            floor: c(1e-12),
            stencil: Stencil::Fourth,
            phase_stencil: Stencil::Sixth,
            norm_tolerance: c(1e-4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherEstimate<T> {
    pub value: T,
    /// Probability mass sitting on excluded points.
    pub excluded_mass: T,
}

fn floor_mask<T: Real>(values: &[T], floor: T) -> Vec<bool> {
    let max = values.iter().copied().fold(T::zero(), T::max);
    let cut = max * floor;
    values.iter().map(|&v| v >= cut && v > T::zero()).collect()
}

/// `4 ∫ (d√ρ/dx)² dx`.
pub fn fisher_from_density<T: Real>(
    density: &SampledDensity<T>,
    opts: &FisherOptions<T>,
) -> Result<FisherEstimate<T>> {
    let total = density.total();
    if !((total - T::one()).abs() <= opts.norm_tolerance) {
        return Err(Error::Unnormalized(total.to_f64_lossy()));
    }
    let amp: Vec<T> = density.values.iter().map(|v| v.sqrt()).collect();
    let d = derivative(&amp, &density.grid, opts.stencil)?;
    let keep = floor_mask(&density.values, opts.floor);
    let integrand: Vec<T> = d
        .iter()
        .zip(&keep)
        .map(|(&g, &k)| if k { g * g * c(4.0) } else { T::zero() })
        .collect();
    let dropped: Vec<T> = density
        .values
        .iter()
        .zip(&keep)
        .map(|(&r, &k)| if k { T::zero() } else { r })
        .collect();
    Ok(FisherEstimate {
        value: integrate(&integrand, &density.grid)?,
        excluded_mass: integrate(&dropped, &density.grid)?,
    })
}

/// `J_nc = (ħ/2) √(I_ρ I_γ)`.
pub fn nonclassicality<T: Real>(pair: &FisherPair<T>, hbar: T) -> Result<T> {
    for (name, v) in [("I_rho", pair.i_rho), ("I_gamma", pair.i_gamma), ("hbar", hbar)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name.into()));
        }
        if v < T::zero() {
            return Err(Error::Negative(format!("{name} = {v}")));
        }
    }
    Ok(hbar * c(0.5) * (pair.i_rho * pair.i_gamma).sqrt())
}

/// Pointwise `P_cl(x) = ħ Im(ψ′/ψ)`; points below the density floor are
/// flagged and set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalMomentum<T> {
    pub values: Vec<T>,
    pub included: Vec<bool>,
}

pub fn classical_momentum_field<T: Real>(
    psi: &SampledField<T>,
    hbar: T,
    opts: &FisherOptions<T>,
) -> Result<ClassicalMomentum<T>> {
    if psi.space != Space::Position {
        return Err(Error::WrongSpace {
            expected: "position",
            actual: "momentum",
        });
    }
    let d = derivative(&psi.values, &psi.grid, opts.phase_stencil)?;
    let rho: Vec<T> = psi.values.iter().map(|v| v.norm_sqr()).collect();
    let included = floor_mask(&rho, opts.floor);
    let values = psi
        .values
        .iter()
        .zip(&d)
        .zip(rho.iter().zip(&included))
        .map(|((v, dv), (&r, &k))| {
            if k {
                hbar * (v.conj() * dv).im / r
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(ClassicalMomentum { values, included })
}

/// `∫ ρ P_cl^k dx` for `k = 1, 2`.
pub fn classical_moment<T: Real>(
    psi: &SampledField<T>,
    pcl: &ClassicalMomentum<T>,
    power: i32,
) -> Result<T> {
    let w: Vec<T> = psi
        .values
        .iter()
        .zip(&pcl.values)
        .map(|(v, &p)| v.norm_sqr() * p.powi(power))
        .collect();
    integrate(&w, &psi.grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorRoute<T> {
    /// `(4/ħ²)(⟨P²⟩ − ⟨P_cl²⟩)`.
    pub value: T,
    pub p_squared: T,
    pub p_cl_squared: T,
    /// Share of `∫p²γ` carried by the outer 5% of the momentum grid on each side.
    pub tail_fraction: T,
    pub tail_warning: bool,
}

/// Fisher information of `ρ` from `(4/ħ²)(∫p²γ dp − ∫ρ P_cl² dx)`.
pub fn fisher_operator_route<T: Real>(
    position: &SampledField<T>,
    momentum: &SampledField<T>,
    hbar: T,
    opts: &FisherOptions<T>,
) -> Result<OperatorRoute<T>> {
    if momentum.space != Space::Momentum {
        return Err(Error::WrongSpace {
            expected: "momentum",
            actual: "position",
        });
    }
    let g = momentum.grid;
    let p2: Vec<T> = g
        .points()
        .zip(&momentum.values)
        .map(|(p, v)| p * p * v.norm_sqr())
        .collect();
    let p_squared = integrate(&p2, &g)?;
    let edge = (g.count() / 20).max(1);
    let outer: T = p2[..edge].iter().chain(&p2[g.count() - edge..]).copied().sum::<T>() * g.step();
    let tail_fraction = if p_squared > T::zero() {
        outer / p_squared
    } else {
        T::zero()
    };
    let pcl = classical_momentum_field(position, hbar, opts)?;
    let p_cl_squared = classical_moment(position, &pcl, 2)?;
    Ok(OperatorRoute {
        value: (p_squared - p_cl_squared) * c(4.0) / (hbar * hbar),
        p_squared,
        p_cl_squared,
        tail_fraction,
        tail_warning: tail_fraction > c(1e-6),
    })
}

/// One time sample of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub t: T,
    pub autocorrelation: Complex<T>,
    pub fisher: FisherPair<T>,
    pub j_nc: T,
    pub excluded_mass: (T, T),
    pub warnings: Vec<String>,
}

impl<T: Real> SweepPoint<T> {
    pub fn as_point(&self) -> NonclassicalityPoint<T> {
        NonclassicalityPoint {
            t: self.t,
            fisher: self.fisher,
            j_nc: self.j_nc,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.j_nc.is_finite() && self.fisher.i_rho.is_finite() && self.fisher.i_gamma.is_finite()
    }
}

/// Excluded probability above which a sweep point carries a warning.
pub const EXCLUDED_MASS_WARNING: f64 = 1e-6;

fn sweep_point<T: Real>(prop: &Propagator<T>, t: T, opts: &FisherOptions<T>) -> SweepPoint<T> {
    let mut warnings = Vec::new();
    let nan = T::nan();
    let mut fisher = FisherPair {
        i_rho: nan,
        i_gamma: nan,
    };
    let mut excluded = (T::zero(), T::zero());
    match prop.state_at(t) {
        Ok((psi, phi)) => {
            match fisher_from_density(&psi.density(), opts) {
                Ok(f) => {
                    fisher.i_rho = f.value;
                    excluded.0 = f.excluded_mass;
                }
                Err(e) => warnings.push(format!("I_rho: {e}")),
            }
            match fisher_from_density(&phi.density(), opts) {
                Ok(f) => {
                    fisher.i_gamma = f.value;
                    excluded.1 = f.excluded_mass;
                }
                Err(e) => warnings.push(format!("I_gamma: {e}")),
            }
        }
        Err(e) => warnings.push(format!("evolution: {e}")),
    }
    for (name, m) in [("position", excluded.0), ("momentum", excluded.1)] {
        if m > c(EXCLUDED_MASS_WARNING) {
            warnings.push(format!("{name} density floor excluded mass {m:e}"));
        }
    }
    let j_nc = nonclassicality(&fisher, prop.hbar()).unwrap_or(nan);
    SweepPoint {
        t,
        autocorrelation: prop.autocorrelation(t),
        fisher,
        j_nc,
        excluded_mass: excluded,
        warnings,
    }
}

/// Evaluates every time in parallel; output order follows `times`.
pub fn nonclassicality_series<T: Real>(
    prop: &Propagator<T>,
    times: &[T],
    opts: &FisherOptions<T>,
) -> Vec<SweepPoint<T>> {
    times.par_iter().map(|&t| sweep_point(prop, t, opts)).collect()
}
