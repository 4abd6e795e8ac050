//! Wave-packet revivals in the infinite square well and the quantum bouncer.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix `f64`,
//! which is what the scenario layer and the `revivals` binary use.

pub mod airy;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod information;
pub mod packets;
pub mod revivals;
pub mod scalar;
pub mod scenario;
pub mod systems;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Real;

pub type Complex = num_complex::Complex<f64>;
pub type Grid = grid::Grid1D<f64>;
pub type Field = grid::SampledField<f64>;
pub type Density = grid::SampledDensity<f64>;
pub type Transform = grid::MomentumTransform<f64>;
pub type Well = systems::InfiniteWell<f64>;
pub type Bouncer = systems::QuantumBouncer<f64>;
pub type Spectrum = systems::EnergySpectrum<f64>;
pub type TimeScales = systems::TimeScales<f64>;
pub type Packet = packets::GaussianPacketSpec<f64>;
pub type Coefficients = packets::CoefficientSet<f64>;
pub type Propagator = evolution::Propagator<f64>;
pub type FisherOptions = information::FisherOptions<f64>;
pub type SweepPoint = information::SweepPoint<f64>;
pub type Series = revivals::TimeSeries<f64>;
pub type Extremum = revivals::ExtremumEvent<f64>;
pub type Label = revivals::RevivalLabel<f64>;
pub type Report = revivals::RevivalReport<f64>;
