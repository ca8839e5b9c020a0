//! Error types shared across the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// A single defect found while validating a [`crate::SystemSpec`].
///
/// Validation collects every violation it can find rather than stopping at
/// the first, so error messages name all offending modes and couplings.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateModeId(String),
    UnknownEndpoint { coupling: usize, id: String },
    SelfCoupling { coupling: usize, id: String },
    NegativeRate { context: String },
    KindMismatch { coupling: usize, detail: String },
    ExternalCouplingOnMechanicalMode(String),
    UndampedMode(String),
    NegativeOccupancy(String),
    DisconnectedModes(Vec<String>),
    PumpCalibrationMismatch { coupling: usize, expected: f64, declared: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateModeId(id) => write!(f, "duplicate mode id `{id}`"),
            Violation::UnknownEndpoint { coupling, id } => {
                write!(f, "coupling #{coupling} references unknown mode `{id}`")
            }
            Violation::SelfCoupling { coupling, id } => {
                write!(f, "coupling #{coupling} joins mode `{id}` to itself")
            }
            Violation::NegativeRate { context } => write!(f, "negative rate: {context}"),
            Violation::KindMismatch { coupling, detail } => {
                write!(f, "coupling #{coupling} kind mismatch: {detail}")
            }
            Violation::ExternalCouplingOnMechanicalMode(id) => {
                write!(f, "mechanical mode `{id}` cannot have an external coupling rate")
            }
            Violation::UndampedMode(id) => {
                write!(f, "mode `{id}` has zero total decay rate")
            }
            Violation::NegativeOccupancy(id) => {
                write!(f, "mode `{id}` has negative bath occupancy")
            }
            Violation::DisconnectedModes(ids) => {
                write!(f, "modes not connected to the rest of the network: {}", ids.join(", "))
            }
            Violation::PumpCalibrationMismatch { coupling, expected, declared } => write!(
                f,
                "coupling #{coupling} declares rate {declared} but g0*sqrt(n_c) = {expected}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The system description failed validation; every defect is listed.
    InvalidSystem(Vec<Violation>),
    /// A loop handed to the flux computation does not close on itself.
    NotALoop(String),
    /// The response matrix is singular (or numerically indistinguishable
    /// from singular) at the given probe detuning.
    SingularResponse { delta: f64, residual: f64 },
    /// Interconnection of a netlist produced a singular wave equation,
    /// typically a lossless loop with unit round-trip gain.
    SingularNetwork(String),
    /// A netlist refers to a component instance that was never declared.
    UnknownComponent(String),
    /// A netlist refers to a port that does not exist on its component.
    UnknownPort(String),
    /// A port appears in more than one connection, or is both connected
    /// and declared external.
    PortConflict(String),
    /// A port is neither connected nor listed as external.
    UnaccountedPort(String),
    /// The reduction left no external ports to describe.
    NoExternalPorts,
    /// A sweep grid needs at least two points and a positive span.
    BadGrid(String),
    /// Equal-phase frames require two ports at distinct frequencies.
    DegenerateFrequencies,
    /// The phase of a zero transmission amplitude is undefined.
    UndefinedPhase,
    /// Adiabatic elimination was asked for on an unsupported topology.
    EliminationTopology(String),
    /// Optimization bounds are empty or inverted.
    InfeasibleBounds(String),
    /// A configuration file could not be understood.
    Config(String),
    /// A lookup by label failed.
    UnknownLabel(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSystem(violations) => {
                write!(f, "invalid system ({} problem(s)):", violations.len())?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
            Error::NotALoop(detail) => write!(f, "couplings do not form a closed loop: {detail}"),
            Error::SingularResponse { delta, residual } => write!(
                f,
                "singular response at delta = {delta:e} rad/s (solve residual {residual:e})"
            ),
            Error::SingularNetwork(detail) => {
                write!(f, "netlist reduction is singular: {detail}")
            }
            Error::UnknownComponent(name) => write!(f, "unknown component instance `{name}`"),
            Error::UnknownPort(port) => write!(f, "unknown port `{port}`"),
            Error::PortConflict(port) => write!(f, "port `{port}` is used more than once"),
            Error::UnaccountedPort(port) => {
                write!(f, "port `{port}` is neither connected nor external")
            }
            Error::NoExternalPorts => write!(f, "reduction leaves no external ports"),
            Error::BadGrid(detail) => write!(f, "bad sweep grid: {detail}"),
            Error::DegenerateFrequencies => {
                write!(f, "equal-phase frame needs two distinct port frequencies")
            }
            Error::UndefinedPhase => write!(f, "phase of a zero amplitude is undefined"),
            Error::EliminationTopology(detail) => {
                write!(f, "cannot eliminate mechanical modes: {detail}")
            }
            Error::InfeasibleBounds(detail) => write!(f, "infeasible bounds: {detail}"),
            Error::Config(detail) => write!(f, "config error: {detail}"),
            Error::UnknownLabel(label) => write!(f, "unknown label `{label}`"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// Convenience used by tests and the CLI to pattern-match on the broad
    /// failure class without destructuring every variant.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::SingularResponse { .. } | Error::SingularNetwork(_))
    }
}
