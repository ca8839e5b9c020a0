//! TOML descriptions of systems and netlists.
//!
//! Two schemas are understood, distinguished by a mandatory `schema`
//! key: `modeflux/system/1` for coupled-mode systems and
//! `modeflux/netlist/1` for component networks. System files may state
//! their rates in `"Hz"` or `"rad/s"` (`frequency_unit`, default
//! rad/s); everything dimensionful is converted to angular rates on
//! load. Phases, occupancies and photon numbers are dimensionless and
//! never scaled.
//!
//! A synthesis run can be written back as a report that is itself a
//! loadable system file, with the search outcome attached under
//! `[design_result]`.

use serde::{Deserialize, Serialize};

use crate::design::{scheme_c_system, DesignResult};
use crate::error::{Error, Result};
use crate::network::{Netlist, NetworkComponent};
use crate::system::{Coupling, CouplingKind, Mode, ModeKind, SystemSpec};

pub const SYSTEM_SCHEMA: &str = "modeflux/system/1";
pub const NETLIST_SCHEMA: &str = "modeflux/netlist/1";

fn default_unit() -> String {
    "rad/s".to_string()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    schema: String,
    #[serde(default = "default_unit")]
    frequency_unit: String,
    #[serde(default, rename = "mode")]
    modes: Vec<ModeEntry>,
    #[serde(default, rename = "coupling")]
    couplings: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    design_result: Option<DesignResult>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeEntry {
    id: String,
    kind: String,
    #[serde(default)]
    detuning: f64,
    #[serde(default)]
    kappa_ex: f64,
    #[serde(default)]
    intrinsic_loss: f64,
    #[serde(default)]
    occupancy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingEntry {
    from: String,
    to: String,
    kind: String,
    rate: f64,
    #[serde(default)]
    phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    photon_number: Option<f64>,
}

fn unit_scale(unit: &str) -> Result<f64> {
    match unit {
        "rad/s" => Ok(1.0),
        "Hz" => Ok(2.0 * std::f64::consts::PI),
        other => Err(Error::Config(format!(
            "unknown frequency_unit {other:?} (expected \"Hz\" or \"rad/s\")"
        ))),
    }
}

fn system_from_file(file: SystemFile) -> Result<SystemSpec> {
    if file.schema != SYSTEM_SCHEMA {
        return Err(Error::Config(format!(
            "schema {:?} is not {SYSTEM_SCHEMA:?}",
            file.schema
        )));
    }
    let scale = unit_scale(&file.frequency_unit)?;
    let mut modes = Vec::with_capacity(file.modes.len());
    for entry in file.modes {
        let kind = match entry.kind.as_str() {
            "electromagnetic" => ModeKind::Electromagnetic,
            "mechanical" => ModeKind::Mechanical,
            other => {
                return Err(Error::Config(format!(
                    "mode {:?}: unknown kind {other:?}",
                    entry.id
                )))
            }
        };
        modes.push(Mode {
            id: entry.id,
            kind,
            detuning: entry.detuning * scale,
            kappa_ex: entry.kappa_ex * scale,
            intrinsic_loss: entry.intrinsic_loss * scale,
            occupancy: entry.occupancy,
        });
    }
    let mut couplings = Vec::with_capacity(file.couplings.len());
    for entry in file.couplings {
        let kind = match entry.kind.as_str() {
            "optomechanical" => CouplingKind::Optomechanical,
            "coherent" => CouplingKind::Coherent,
            other => {
                return Err(Error::Config(format!(
                    "coupling {} -> {}: unknown kind {other:?}",
                    entry.from, entry.to
                )))
            }
        };
        let mut coupling = Coupling {
            from: entry.from,
            to: entry.to,
            kind,
            rate: entry.rate * scale,
            phase: entry.phase,
            calibration: None,
        };
        coupling = match (entry.g0, entry.photon_number) {
            (None, None) => coupling,
            (Some(g0), Some(n)) => coupling.with_calibration(g0 * scale, n),
            _ => {
                return Err(Error::Config(format!(
                    "coupling {} -> {}: g0 and photon_number must be given together",
                    coupling.from, coupling.to
                )))
            }
        };
        couplings.push(coupling);
    }
    Ok(SystemSpec::new(modes, couplings))
}

fn parse_system_file(text: &str) -> Result<SystemFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Loads a system description, converting all rates to rad/s.
pub fn parse_system(text: &str) -> Result<SystemSpec> {
    system_from_file(parse_system_file(text)?)
}

/// Loads a system description together with an attached design result,
/// if any.
pub fn parse_report(text: &str) -> Result<(SystemSpec, Option<DesignResult>)> {
    let mut file = parse_system_file(text)?;
    let result = file.design_result.take();
    Ok((system_from_file(file)?, result))
}

fn file_from_system(spec: &SystemSpec, design_result: Option<DesignResult>) -> SystemFile {
    SystemFile {
        schema: SYSTEM_SCHEMA.to_string(),
        frequency_unit: default_unit(),
        modes: spec
            .modes
            .iter()
            .map(|m| ModeEntry {
                id: m.id.clone(),
                kind: match m.kind {
                    ModeKind::Electromagnetic => "electromagnetic".to_string(),
                    ModeKind::Mechanical => "mechanical".to_string(),
                },
                detuning: m.detuning,
                kappa_ex: m.kappa_ex,
                intrinsic_loss: m.intrinsic_loss,
                occupancy: m.occupancy,
            })
            .collect(),
        couplings: spec
            .couplings
            .iter()
            .map(|c| CouplingEntry {
                from: c.from.clone(),
                to: c.to.clone(),
                kind: match c.kind {
                    CouplingKind::Optomechanical => "optomechanical".to_string(),
                    CouplingKind::Coherent => "coherent".to_string(),
                },
                rate: c.rate,
                phase: c.phase,
                g0: c.calibration.map(|cal| cal.g0),
                photon_number: c.calibration.map(|cal| cal.photon_number),
            })
            .collect(),
        design_result,
    }
}

/// Writes a system description in rad/s.
pub fn write_system(spec: &SystemSpec) -> String {
    toml::to_string(&file_from_system(spec, None)).expect("system specs always serialize")
}

/// Writes a synthesis outcome as a loadable system file with the
/// search summary attached under `[design_result]`.
pub fn design_report(result: &DesignResult) -> String {
    let spec = scheme_c_system(&result.params);
    toml::to_string(&file_from_system(&spec, Some(result.clone())))
        .expect("design results always serialize")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetlistFile {
    schema: String,
    #[serde(default, rename = "component")]
    components: Vec<ComponentEntry>,
    #[serde(default, rename = "connection")]
    connections: Vec<ConnectionEntry>,
    #[serde(default)]
    terminate: Vec<String>,
    #[serde(default)]
    external: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentEntry {
    name: String,
    element: String,
    #[serde(default)]
    phase: Option<f64>,
    #[serde(default)]
    reflectivity: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionEntry {
    ports: Vec<String>,
}

fn build_component(entry: &ComponentEntry) -> Result<NetworkComponent> {
    let reject_phase = || {
        if entry.phase.is_some() {
            Err(Error::Config(format!(
                "component {:?}: element {:?} takes no phase",
                entry.name, entry.element
            )))
        } else {
            Ok(())
        }
    };
    let reject_reflectivity = || {
        if entry.reflectivity.is_some() {
            Err(Error::Config(format!(
                "component {:?}: element {:?} takes no reflectivity",
                entry.name, entry.element
            )))
        } else {
            Ok(())
        }
    };
    let name = entry.name.as_str();
    match entry.element.as_str() {
        "gyrator" => {
            reject_phase()?;
            reject_reflectivity()?;
            Ok(NetworkComponent::gyrator(name))
        }
        "transmission_line" => {
            reject_reflectivity()?;
            let phase = entry.phase.ok_or_else(|| {
                Error::Config(format!("component {name:?}: transmission_line needs a phase"))
            })?;
            Ok(NetworkComponent::transmission_line(name, phase))
        }
        "beam_splitter" => {
            reject_phase()?;
            reject_reflectivity()?;
            Ok(NetworkComponent::beam_splitter(name))
        }
        "mirror" => {
            reject_phase()?;
            let r = entry.reflectivity.ok_or_else(|| {
                Error::Config(format!("component {name:?}: mirror needs a reflectivity"))
            })?;
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!(
                    "component {name:?}: reflectivity {r} outside [0, 1]"
                )));
            }
            Ok(NetworkComponent::mirror(name, r))
        }
        "matched_load" => {
            reject_phase()?;
            reject_reflectivity()?;
            Ok(NetworkComponent::matched_load(name))
        }
        "isolator" => {
            reject_phase()?;
            reject_reflectivity()?;
            Ok(NetworkComponent::isolator(name))
        }
        "circulator" => {
            reject_phase()?;
            reject_reflectivity()?;
            Ok(NetworkComponent::circulator(name))
        }
        other => Err(Error::Config(format!(
            "component {name:?}: unknown element {other:?}"
        ))),
    }
}

/// Loads a netlist: components built, connections made, terminations
/// absorbed. When the file declares its expected `external` ports the
/// open ports are cross-checked against them.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let file: NetlistFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.schema != NETLIST_SCHEMA {
        return Err(Error::Config(format!(
            "schema {:?} is not {NETLIST_SCHEMA:?}",
            file.schema
        )));
    }
    let mut net = Netlist::new();
    let mut open: Vec<String> = Vec::new();
    for entry in &file.components {
        let component = build_component(entry)?;
        for label in &component.port_labels {
            open.push(format!("{}.{}", component.name, label));
        }
        net.add(component)?;
    }
    for connection in &file.connections {
        let [a, b] = connection.ports.as_slice() else {
            return Err(Error::Config(format!(
                "connection must list exactly two ports, got {:?}",
                connection.ports
            )));
        };
        net.connect(a, b)?;
        open.retain(|p| p != a && p != b);
    }
    for port in &file.terminate {
        net.terminate(port)?;
        open.retain(|p| p != port);
    }
    if let Some(declared) = &file.external {
        let mut open_sorted = open.clone();
        open_sorted.sort();
        let mut declared_sorted = declared.clone();
        declared_sorted.sort();
        if open_sorted != declared_sorted {
            return Err(Error::UnaccountedPort(format!(
                "open ports {open_sorted:?} do not match declared external {declared_sorted:?}"
            )));
        }
    }
    Ok(net)
}
