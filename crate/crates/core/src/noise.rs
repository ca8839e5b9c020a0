//! Output noise from port occupancies.
//!
//! Every input port carries a thermal occupancy (quanta); the
//! normal-ordered output flux at port `j` is the incoherent sum
//! `N_j(delta) = sum_k |S_jk(delta)|^2 nbar_k`. Since the port-resolved
//! scattering matrix is unitary, equal occupancies on all inputs
//! reproduce themselves at every output, which pins the bookkeeping
//! here against the engine.
//!
//! By default external ports are cold (vacuum input from the feedlines)
//! and bath ports inherit the occupancy declared on their mode.

use crate::dynamics::{ResponseCurve, ScatteringMatrix};
use crate::system::{PortKind, ValidatedSystem};

/// Input occupancy per port, in port order: external ports cold, bath
/// ports at their mode's declared occupancy.
pub fn port_occupancies(system: &ValidatedSystem) -> Vec<f64> {
    system
        .ports()
        .iter()
        .map(|port| match port.kind {
            PortKind::External => 0.0,
            PortKind::Bath => system.modes()[port.mode].occupancy,
        })
        .collect()
}

/// Total output occupancy at one port for one scattering point.
pub fn output_noise(point: &ScatteringMatrix, occupancies: &[f64], out: usize) -> f64 {
    let s = point.matrix();
    assert_eq!(occupancies.len(), s.ncols(), "one occupancy per port");
    (0..s.ncols()).map(|k| s[(out, k)].norm_sqr() * occupancies[k]).sum()
}

/// Output noise along a detuning grid, with a per-source decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    /// Label of the output port.
    pub port: String,
    /// Labels of the decomposed input ports, matching `contributions`.
    pub sources: Vec<String>,
    /// Total occupancy at the output, one value per grid point.
    pub total: Vec<f64>,
    /// Per-source occupancy at the output, `contributions[source][point]`.
    pub contributions: Vec<Vec<f64>>,
}

/// Evaluates the output noise of `curve` at port `out`.
///
/// `sources` selects the input ports decomposed individually; the total
/// always sums over every port regardless.
pub fn noise_spectrum(
    curve: &ResponseCurve,
    occupancies: &[f64],
    out: usize,
    sources: &[usize],
) -> NoiseSpectrum {
    let ports = curve.ports();
    let total = curve
        .points()
        .iter()
        .map(|point| output_noise(point, occupancies, out))
        .collect();
    let contributions = sources
        .iter()
        .map(|&src| {
            curve
                .points()
                .iter()
                .map(|point| point.matrix()[(out, src)].norm_sqr() * occupancies[src])
                .collect()
        })
        .collect();
    NoiseSpectrum {
        port: ports.ports[out].label.clone(),
        sources: sources.iter().map(|&s| ports.ports[s].label.clone()).collect(),
        total,
        contributions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::converter_system;
    use crate::dynamics::sweep;

    fn warm_converter(occupancy: f64) -> crate::system::ValidatedSystem {
        let mut spec = converter_system(1.0, 1.0, 0.0, 1.0, 1.0, 1.0);
        for mode in &mut spec.modes {
            if mode.id == "b" {
                mode.occupancy = occupancy;
            }
        }
        spec.validate().unwrap()
    }

    #[test]
    fn default_occupancies_are_cold_except_declared_baths() {
        let sys = warm_converter(9.0);
        assert_eq!(port_occupancies(&sys), vec![0.0, 0.0, 9.0]);
    }

    #[test]
    fn cold_inputs_give_vacuum_output() {
        let sys = converter_system(1.0, 1.0, 0.0, 1.0, 1.0, 1.0).validate().unwrap();
        let curve = sweep(&sys, -2.0, 2.0, 5).unwrap();
        let occ = port_occupancies(&sys);
        for point in curve.points() {
            assert_eq!(output_noise(point, &occ, 1), 0.0);
        }
    }

    #[test]
    fn uniform_occupancy_is_conserved_by_unitarity() {
        let sys = warm_converter(2.0);
        let curve = sweep(&sys, -3.0, 3.0, 7).unwrap();
        let occ = vec![3.7; sys.ports().len()];
        for point in curve.points() {
            for out in 0..sys.ports().len() {
                assert!((output_noise(point, &occ, out) - 3.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matched_converter_leaks_four_ninths_of_the_bath() {
        // At unit cooperativities the center response is S21 = S12 = 2/3
        // and S11 = S22 = 1/3, so unitarity fixes the bath leakage into
        // either cavity output at 4/9.
        let sys = warm_converter(9.0);
        let curve = sweep(&sys, -1.0, 1.0, 3).unwrap();
        let occ = port_occupancies(&sys);
        let center = &curve.points()[curve.center_index()];
        let noise = output_noise(center, &occ, 1);
        assert!((noise - 4.0).abs() < 1e-9, "{noise}");
    }

    #[test]
    fn decomposition_sums_to_total_when_all_sources_listed() {
        let mut spec = converter_system(0.8, 1.4, 0.3, 1.0, 1.3, 0.6);
        spec.modes[0].occupancy = 0.1;
        spec.modes[1].occupancy = 50.0;
        let mut occ_override = Vec::new();
        let sys = spec.validate().unwrap();
        for port in sys.ports() {
            occ_override.push(match port.label.as_str() {
                "a1" => 1.5,
                _ => sys.modes()[port.mode].occupancy,
            });
        }
        let curve = sweep(&sys, -2.0, 2.0, 9).unwrap();
        let all: Vec<usize> = (0..sys.ports().len()).collect();
        let spectrum = noise_spectrum(&curve, &occ_override, 0, &all);
        for (row, &total) in spectrum.total.iter().enumerate() {
            let sum: f64 = spectrum.contributions.iter().map(|c| c[row]).sum();
            assert!((sum - total).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_includes_noise_columns() {
        let sys = warm_converter(5.0);
        let curve = sweep(&sys, -1.0, 1.0, 3).unwrap();
        let occ = port_occupancies(&sys);
        let bath = curve.ports().index("b.bath").unwrap();
        let spectrum = noise_spectrum(&curve, &occ, 1, &[bath]);
        assert_eq!(spectrum.port, "a2");
        assert_eq!(spectrum.sources, vec!["b.bath".to_string()]);
        let mut bytes = Vec::new();
        curve.write_csv(&[(1, 0)], &[spectrum], &mut bytes).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("delta,abs_S[a2<-a1],arg_S[a2<-a1],N[a2],N[a2<-b.bath]\n"));
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[2].split(',').count(), 5);
    }
}
