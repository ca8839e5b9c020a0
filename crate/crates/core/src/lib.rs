//! Linearized coupled-mode networks with engineered nonreciprocity.
//!
//! The crate models small networks of electromagnetic and mechanical modes
//! joined by phase-carrying beam-splitter couplings, computes their
//! multiport scattering response, and synthesizes parameter sets that turn
//! reciprocal hardware into isolators and circulators.
//!
//! The pieces fit together like this:
//!
//! * [`system`] declares modes and couplings and validates them into a
//!   well-formed network,
//! * [`dynamics`] turns a validated network into its dynamical matrix and
//!   scattering response,
//! * [`noise`] propagates thermal bath occupancies to the output ports,
//! * [`network`] composes ideal scattering elements (gyrators, lines,
//!   beam splitters) into larger multiports,
//! * [`gauge`] applies time-origin frame changes and decides whether a
//!   response is genuinely nonreciprocal,
//! * [`design`] reduces mechanically mediated links to effective couplings
//!   and searches for deeply isolating working points,
//! * [`config`] reads and writes the on-disk TOML descriptions of systems
//!   and netlists.
//!
//! All frequencies and rates are angular (rad/s) throughout. Spectra are
//! expressed against the probe detuning `delta` measured from the center of
//! the conversion window; the sign conventions for the equations of motion
//! are fixed once in [`dynamics`].

pub mod config;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod network;
pub mod noise;
pub mod system;

mod fmt;

pub use error::{Error, Result, Violation};
pub use system::{
    Coupling, CouplingKind, Mode, ModeKind, Port, PortKind, SystemSpec, ValidatedSystem,
};

pub use dynamics::{DynamicalMatrix, ResponseCurve, ScatteringMatrix};
pub use gauge::{GaugeFrame, NonreciprocityVerdict};
pub use network::{NetworkComponent, Netlist};
pub use noise::NoiseSpectrum;

pub use design::{DesignResult, EffectiveSystem, IsolationMetrics};
