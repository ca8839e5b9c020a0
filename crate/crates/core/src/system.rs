//! Mode and coupling declarations, validation, and loop phases.
//!
//! A [`SystemSpec`] is a plain description of a coupled-mode network: a set
//! of damped harmonic modes (electromagnetic cavities and mechanical
//! oscillators) joined pairwise by parametric beam-splitter couplings. The
//! description carries everything the linear response depends on and
//! nothing else; pump powers and carrier frequencies only enter through the
//! rates and phases recorded here.
//!
//! [`SystemSpec::validate`] checks the description against the rules below
//! and returns a [`ValidatedSystem`] whose phases are wrapped to the
//! principal range and whose modes are indexed for matrix assembly. The
//! rest of the crate only accepts validated systems.
//!
//! # Conventions
//!
//! * All rates and detunings are angular frequencies in rad/s.
//! * A mode's `detuning` is its residual detuning in the frame rotating at
//!   the conversion-window center: its susceptibility peaks at probe
//!   detuning `delta = -detuning`. Modes that sit exactly on the window
//!   center have `detuning = 0`.
//! * A coupling's `phase` is attached to its ordered endpoint pair
//!   `(from, to)`: a quantum hopping `from -> to` picks up `e^{+i phase}`,
//!   and the reverse hop the conjugate.
//! * The synthetic flux of a loop of couplings is the signed sum of these
//!   phases around the loop; it is invariant under redefining any single
//!   mode's phase origin and is the only phase combination with physical
//!   consequences.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use crate::error::{Error, Result, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Electromagnetic,
    Mechanical,
}

/// One harmonic mode of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub id: String,
    pub kind: ModeKind,
    /// Residual detuning in the rotating frame (rad/s); see module docs.
    pub detuning: f64,
    /// External (measurement line) coupling rate. Zero for mechanical modes.
    pub kappa_ex: f64,
    /// Intrinsic loss rate: kappa_0 for cavities, Gamma_m for oscillators.
    pub intrinsic_loss: f64,
    /// Thermal occupancy of the bath behind the intrinsic loss channel.
    pub occupancy: f64,
}

impl Mode {
    pub fn electromagnetic(id: &str, detuning: f64, kappa_ex: f64, kappa_0: f64) -> Self {
        Mode {
            id: id.to_string(),
            kind: ModeKind::Electromagnetic,
            detuning,
            kappa_ex,
            intrinsic_loss: kappa_0,
            occupancy: 0.0,
        }
    }

    pub fn mechanical(id: &str, detuning: f64, gamma_m: f64) -> Self {
        Mode {
            id: id.to_string(),
            kind: ModeKind::Mechanical,
            detuning,
            kappa_ex: 0.0,
            intrinsic_loss: gamma_m,
            occupancy: 0.0,
        }
    }

    pub fn with_occupancy(mut self, n: f64) -> Self {
        self.occupancy = n;
        self
    }

    /// Total energy decay rate, external plus intrinsic.
    pub fn total_decay(&self) -> f64 {
        self.kappa_ex + self.intrinsic_loss
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// Pump-enhanced optomechanical link; must join a cavity to an oscillator.
    Optomechanical,
    /// Direct coherent hopping between two modes of the same kind.
    Coherent,
}

/// Optional record of how a pump-enhanced rate was obtained, kept so the
/// declared rate can be cross-checked against `g0 * sqrt(n_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpCalibration {
    pub g0: f64,
    pub photon_number: f64,
}

/// A phase-carrying beam-splitter coupling between two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    /// Ordered endpoints `(from, to)`; the order orients the phase.
    pub from: String,
    pub to: String,
    pub kind: CouplingKind,
    /// Coupling rate g (or J) in rad/s, non-negative.
    pub rate: f64,
    /// Pump phase in radians, attached to the `from -> to` hop.
    pub phase: f64,
    pub calibration: Option<PumpCalibration>,
}

impl Coupling {
    pub fn optomechanical(from: &str, to: &str, rate: f64, phase: f64) -> Self {
        Coupling {
            from: from.to_string(),
            to: to.to_string(),
            kind: CouplingKind::Optomechanical,
            rate,
            phase,
            calibration: None,
        }
    }

    pub fn coherent(from: &str, to: &str, rate: f64, phase: f64) -> Self {
        Coupling {
            from: from.to_string(),
            to: to.to_string(),
            kind: CouplingKind::Coherent,
            rate,
            phase,
            calibration: None,
        }
    }

    pub fn with_calibration(mut self, g0: f64, photon_number: f64) -> Self {
        self.calibration = Some(PumpCalibration { g0, photon_number });
        self
    }
}

/// An unvalidated network description.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemSpec {
    pub modes: Vec<Mode>,
    pub couplings: Vec<Coupling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortKind {
    /// Measurement line attached through kappa_ex.
    External,
    /// Thermal bath behind the intrinsic loss channel.
    Bath,
}

/// One input-output channel of the validated system.
#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub label: String,
    pub kind: PortKind,
    /// Index of the mode this port drains.
    pub mode: usize,
    /// Energy decay rate carried by this port.
    pub rate: f64,
}

/// A checked and normalized system, ready for matrix assembly.
///
/// External ports come first in port order, then bath ports, both in mode
/// declaration order. Cloning is cheap enough for the sizes involved and
/// the value is immutable, so it can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSystem {
    spec: SystemSpec,
    index: BTreeMap<String, usize>,
    ports: Vec<Port>,
    n_external: usize,
}

impl SystemSpec {
    pub fn new(modes: Vec<Mode>, couplings: Vec<Coupling>) -> Self {
        SystemSpec { modes, couplings }
    }

    /// Checks the description and returns its normalized form.
    ///
    /// All violations are collected before returning, so a bad config is
    /// reported in one pass. Validation is idempotent: validating the spec
    /// of a validated system reproduces it exactly.
    pub fn validate(&self) -> Result<ValidatedSystem> {
        let mut violations = Vec::new();
        let mut index = BTreeMap::new();

        for (i, mode) in self.modes.iter().enumerate() {
            if index.insert(mode.id.clone(), i).is_some() {
                violations.push(Violation::DuplicateModeId(mode.id.clone()));
            }
            if mode.kappa_ex < 0.0 {
                violations.push(Violation::NegativeRate {
                    context: format!("kappa_ex of mode `{}`", mode.id),
                });
            }
            if mode.intrinsic_loss < 0.0 {
                violations.push(Violation::NegativeRate {
                    context: format!("intrinsic loss of mode `{}`", mode.id),
                });
            }
            if mode.kind == ModeKind::Mechanical && mode.kappa_ex != 0.0 {
                violations.push(Violation::ExternalCouplingOnMechanicalMode(mode.id.clone()));
            }
            if mode.total_decay() <= 0.0 && mode.kappa_ex >= 0.0 && mode.intrinsic_loss >= 0.0 {
                violations.push(Violation::UndampedMode(mode.id.clone()));
            }
            if mode.occupancy < 0.0 {
                violations.push(Violation::NegativeOccupancy(mode.id.clone()));
            }
        }

        for (ci, coupling) in self.couplings.iter().enumerate() {
            if coupling.rate < 0.0 {
                violations.push(Violation::NegativeRate {
                    context: format!("coupling #{ci} rate"),
                });
            }
            let mut endpoint = |id: &str| -> Option<usize> {
                let found = index.get(id).copied();
                if found.is_none() {
                    violations.push(Violation::UnknownEndpoint {
                        coupling: ci,
                        id: id.to_string(),
                    });
                }
                found
            };
            let from = endpoint(&coupling.from);
            let to = endpoint(&coupling.to);
            let (Some(from), Some(to)) = (from, to) else { continue };
            if from == to {
                violations.push(Violation::SelfCoupling {
                    coupling: ci,
                    id: coupling.from.clone(),
                });
                continue;
            }
            let kinds = (self.modes[from].kind, self.modes[to].kind);
            match coupling.kind {
                CouplingKind::Optomechanical => {
                    let ok = matches!(
                        kinds,
                        (ModeKind::Electromagnetic, ModeKind::Mechanical)
                            | (ModeKind::Mechanical, ModeKind::Electromagnetic)
                    );
                    if !ok {
                        violations.push(Violation::KindMismatch {
                            coupling: ci,
                            detail: format!(
                                "optomechanical coupling must join a cavity to an oscillator, \
                                 got `{}` and `{}`",
                                coupling.from, coupling.to
                            ),
                        });
                    }
                }
                CouplingKind::Coherent => {
                    if kinds.0 != kinds.1 {
                        violations.push(Violation::KindMismatch {
                            coupling: ci,
                            detail: format!(
                                "coherent coupling must join modes of the same kind, \
                                 got `{}` and `{}`",
                                coupling.from, coupling.to
                            ),
                        });
                    }
                }
            }
            if let Some(cal) = coupling.calibration {
                let expected = cal.g0 * cal.photon_number.sqrt();
                let scale = expected.abs().max(coupling.rate.abs()).max(f64::MIN_POSITIVE);
                if (expected - coupling.rate).abs() > 1e-9 * scale {
                    violations.push(Violation::PumpCalibrationMismatch {
                        coupling: ci,
                        expected,
                        declared: coupling.rate,
                    });
                }
            }
        }

        if self.modes.len() > 1 && violations.is_empty() {
            if let Some(stranded) = self.disconnected_modes(&index) {
                violations.push(Violation::DisconnectedModes(stranded));
            }
        }

        if !violations.is_empty() {
            return Err(Error::InvalidSystem(violations));
        }

        let mut spec = self.clone();
        for coupling in &mut spec.couplings {
            coupling.phase = wrap_phase(coupling.phase);
        }

        let mut ports = Vec::new();
        for (i, mode) in spec.modes.iter().enumerate() {
            if mode.kappa_ex > 0.0 {
                ports.push(Port {
                    label: mode.id.clone(),
                    kind: PortKind::External,
                    mode: i,
                    rate: mode.kappa_ex,
                });
            }
        }
        let n_external = ports.len();
        for (i, mode) in spec.modes.iter().enumerate() {
            if mode.intrinsic_loss > 0.0 {
                let suffix = match mode.kind {
                    ModeKind::Electromagnetic => "int",
                    ModeKind::Mechanical => "bath",
                };
                ports.push(Port {
                    label: format!("{}.{suffix}", mode.id),
                    kind: PortKind::Bath,
                    mode: i,
                    rate: mode.intrinsic_loss,
                });
            }
        }

        Ok(ValidatedSystem { spec, index, ports, n_external })
    }

    /// Returns ids of modes unreachable from the first mode, if any.
    fn disconnected_modes(&self, index: &BTreeMap<String, usize>) -> Option<Vec<String>> {
        let n = self.modes.len();
        let mut adjacency = vec![Vec::new(); n];
        for coupling in &self.couplings {
            let (Some(&a), Some(&b)) = (index.get(&coupling.from), index.get(&coupling.to)) else {
                continue;
            };
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        let stranded: Vec<String> = (0..n)
            .filter(|&i| !seen[i])
            .map(|i| self.modes[i].id.clone())
            .collect();
        if stranded.is_empty() { None } else { Some(stranded) }
    }
}

impl ValidatedSystem {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn modes(&self) -> &[Mode] {
        &self.spec.modes
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.spec.couplings
    }

    pub fn mode_index(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    /// All input-output channels, external ports first.
    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn n_external(&self) -> usize {
        self.n_external
    }

    pub fn port_index(&self, label: &str) -> Result<usize> {
        self.ports
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Dimensionless cooperativity of one coupling.
    ///
    /// For an optomechanical link this is `4 g^2 / (kappa Gamma_m)` with
    /// the total decay rates of the two endpoints; for a coherent link
    /// `4 J^2 / (kappa_1 kappa_2)`. Scales quadratically in the rate.
    pub fn cooperativity(&self, coupling_index: usize) -> Result<f64> {
        let coupling = self
            .spec
            .couplings
            .get(coupling_index)
            .ok_or_else(|| Error::UnknownLabel(format!("coupling #{coupling_index}")))?;
        let from = &self.spec.modes[self.index[&coupling.from]];
        let to = &self.spec.modes[self.index[&coupling.to]];
        let denominator = from.total_decay() * to.total_decay();
        if denominator <= 0.0 {
            return Err(Error::InvalidSystem(vec![Violation::UndampedMode(
                if from.total_decay() <= 0.0 { from.id.clone() } else { to.id.clone() },
            )]));
        }
        Ok(4.0 * coupling.rate * coupling.rate / denominator)
    }

    /// Synthetic flux threading a loop of couplings.
    ///
    /// `loop_couplings` lists coupling indices forming a closed chain. The
    /// first coupling is traversed in its declared `from -> to` direction
    /// and contributes `+phase`; each later coupling is traversed in
    /// whichever direction continues the chain, contributing `+phase`
    /// along its declared order and `-phase` against it. The result is
    /// wrapped to `(-pi, pi]`.
    pub fn synthetic_flux(&self, loop_couplings: &[usize]) -> Result<f64> {
        if loop_couplings.len() < 2 {
            return Err(Error::NotALoop("a loop needs at least two couplings".into()));
        }
        let distinct: BTreeSet<usize> = loop_couplings.iter().copied().collect();
        if distinct.len() != loop_couplings.len() {
            return Err(Error::NotALoop("a loop cannot traverse a coupling twice".into()));
        }
        let couplings: Vec<&Coupling> = loop_couplings
            .iter()
            .map(|&i| {
                self.spec
                    .couplings
                    .get(i)
                    .ok_or_else(|| Error::UnknownLabel(format!("coupling #{i}")))
            })
            .collect::<Result<_>>()?;

        let start = &couplings[0].from;
        let mut here = &couplings[0].to;
        let mut flux = couplings[0].phase;
        for (step, coupling) in couplings.iter().enumerate().skip(1) {
            if &coupling.from == here {
                flux += coupling.phase;
                here = &coupling.to;
            } else if &coupling.to == here {
                flux -= coupling.phase;
                here = &coupling.from;
            } else {
                return Err(Error::NotALoop(format!(
                    "coupling #{} (`{}` <-> `{}`) does not continue the chain at `{here}`",
                    loop_couplings[step], coupling.from, coupling.to
                )));
            }
        }
        if here != start {
            return Err(Error::NotALoop(format!(
                "chain ends at `{here}` instead of returning to `{start}`"
            )));
        }
        Ok(wrap_phase(flux))
    }

    /// Re-anchors the phase origin of one mode, adding `shift` to the
    /// phase of every coupling leaving `id` and subtracting it from every
    /// coupling arriving at `id`.
    ///
    /// This is a gauge transformation: it changes individual coupling
    /// phases but no observable, in particular no loop flux.
    pub fn gauge_shift(&self, id: &str, shift: f64) -> Result<ValidatedSystem> {
        self.mode_index(id)?;
        let mut spec = self.spec.clone();
        for coupling in &mut spec.couplings {
            if coupling.from == id {
                coupling.phase = wrap_phase(coupling.phase + shift);
            } else if coupling.to == id {
                coupling.phase = wrap_phase(coupling.phase - shift);
            }
        }
        spec.validate()
    }
}

/// Wraps an angle to the principal range `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(2.0 * PI);
    if wrapped > PI { wrapped - 2.0 * PI } else { wrapped }
}
