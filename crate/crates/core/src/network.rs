//! Composition of multiport scattering networks.
//!
//! A [`NetworkComponent`] is a named scattering matrix with labeled
//! ports; a [`Netlist`] wires components together by connecting port
//! pairs and reduces to the scattering matrix seen from the remaining
//! open ports. The reduction solves the multiple-scattering series
//! exactly: with ports split into external and internal blocks and
//! `P` the permutation routing each internal output into its partner,
//!
//! ```text
//! S_ext = T_EE + T_EI P (I - T_II P)^{-1} T_IE
//! ```
//!
//! A singular `I - T_II P` means the network rings forever (a lossless
//! loop on resonance) and is reported as an error rather than
//! regularized away.
//!
//! The ideal elements here follow fixed conventions: the beam splitter
//! transmits `1/sqrt(2)` and cross-couples `i/sqrt(2)`, the gyrator
//! passes `+1` forward and `-1` backward, and the circulator routes
//! `1 -> 2 -> 3 -> 4 -> 1`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkComponent {
    pub name: String,
    pub port_labels: Vec<String>,
    s: DMatrix<Complex64>,
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl NetworkComponent {
    /// Wraps an arbitrary scattering matrix as a component.
    ///
    /// Panics if the label count does not match the matrix dimension or
    /// labels repeat; components are built programmatically and these
    /// are caller bugs, not runtime conditions.
    pub fn from_scattering(
        name: impl Into<String>,
        port_labels: Vec<String>,
        s: DMatrix<Complex64>,
    ) -> Self {
        assert_eq!(s.nrows(), s.ncols(), "scattering matrix must be square");
        assert_eq!(port_labels.len(), s.nrows(), "one label per port");
        let unique: BTreeSet<&String> = port_labels.iter().collect();
        assert_eq!(unique.len(), port_labels.len(), "port labels must be unique");
        NetworkComponent { name: name.into(), port_labels, s }
    }

    fn two_port(name: impl Into<String>, entries: [Complex64; 4]) -> Self {
        Self::from_scattering(
            name,
            vec!["1".into(), "2".into()],
            DMatrix::from_row_slice(2, 2, &entries),
        )
    }

    /// Ideal gyrator: unit transmission both ways, a pi phase only
    /// against the arrow.
    pub fn gyrator(name: impl Into<String>) -> Self {
        Self::two_port(name, [
            Complex64::ZERO,
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            Complex64::ZERO,
        ])
    }

    /// Matched transmission line imprinting `phase` in both directions.
    pub fn transmission_line(name: impl Into<String>, phase: f64) -> Self {
        let t = Complex64::from_polar(1.0, phase);
        Self::two_port(name, [Complex64::ZERO, t, t, Complex64::ZERO])
    }

    /// Ideal isolator passing `1 -> 2` and absorbing `2 -> 1`.
    pub fn isolator(name: impl Into<String>) -> Self {
        Self::two_port(name, [
            Complex64::ZERO,
            Complex64::ZERO,
            c64(1.0, 0.0),
            Complex64::ZERO,
        ])
    }

    /// Partially reflective lossless mirror with amplitude reflectivity
    /// `r` in [0, 1].
    pub fn mirror(name: impl Into<String>, r: f64) -> Self {
        assert!((0.0..=1.0).contains(&r), "reflectivity out of range");
        let t = (1.0 - r * r).sqrt();
        Self::two_port(name, [c64(r, 0.0), c64(0.0, t), c64(0.0, t), c64(r, 0.0)])
    }

    /// Matched single-port termination.
    pub fn matched_load(name: impl Into<String>) -> Self {
        Self::from_scattering(name, vec!["1".into()], DMatrix::zeros(1, 1))
    }

    /// 50/50 beam splitter: inputs 1, 2 mix into outputs 3, 4 with
    /// through amplitude `1/sqrt(2)` and cross amplitude `i/sqrt(2)`;
    /// reciprocal, reflectionless.
    pub fn beam_splitter(name: impl Into<String>) -> Self {
        let t = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let x = c64(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let z = Complex64::ZERO;
        Self::from_scattering(
            name,
            vec!["1".into(), "2".into(), "3".into(), "4".into()],
            DMatrix::from_row_slice(4, 4, &[
                z, z, t, x, //
                z, z, x, t, //
                t, x, z, z, //
                x, t, z, z,
            ]),
        )
    }

    /// Ideal four-port circulator routing `1 -> 2 -> 3 -> 4 -> 1`.
    pub fn circulator(name: impl Into<String>) -> Self {
        let mut s = DMatrix::zeros(4, 4);
        for input in 0..4 {
            s[((input + 1) % 4, input)] = c64(1.0, 0.0);
        }
        Self::from_scattering(
            name,
            (1..=4).map(|p| p.to_string()).collect(),
            s,
        )
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn port_index(&self, label: &str) -> Option<usize> {
        self.port_labels.iter().position(|l| l == label)
    }

    pub fn n_ports(&self) -> usize {
        self.port_labels.len()
    }
}

/// A set of components plus the connections between their ports.
///
/// Ports are addressed as `"component.port"`. Components must be added
/// before their ports are connected, each port can appear in at most
/// one connection, and reduction requires at least one port left open.
#[derive(Debug, Clone, Default)]
pub struct Netlist {
    components: Vec<NetworkComponent>,
    connections: Vec<[(usize, usize); 2]>,
    used: BTreeSet<(usize, usize)>,
    loads: usize,
}

impl Netlist {
    pub fn new() -> Self {
        Netlist::default()
    }

    pub fn add(&mut self, component: NetworkComponent) -> Result<()> {
        if component.name.contains('.') {
            return Err(Error::Config(format!(
                "component name {:?} may not contain '.'",
                component.name
            )));
        }
        if self.components.iter().any(|c| c.name == component.name) {
            return Err(Error::PortConflict(format!(
                "component {:?} is already defined",
                component.name
            )));
        }
        self.components.push(component);
        Ok(())
    }

    pub fn component(&self, name: &str) -> Option<&NetworkComponent> {
        self.components.iter().find(|c| c.name == name)
    }

    fn resolve(&self, address: &str) -> Result<(usize, usize)> {
        let Some((name, port)) = address.split_once('.') else {
            return Err(Error::UnknownPort(format!(
                "{address:?} is not of the form component.port"
            )));
        };
        let Some(ci) = self.components.iter().position(|c| c.name == name) else {
            return Err(Error::UnknownComponent(name.to_string()));
        };
        let Some(pi) = self.components[ci].port_index(port) else {
            return Err(Error::UnknownPort(address.to_string()));
        };
        Ok((ci, pi))
    }

    /// Connects two open ports, addressed as `"component.port"`.
    pub fn connect(&mut self, a: &str, b: &str) -> Result<()> {
        let pa = self.resolve(a)?;
        let pb = self.resolve(b)?;
        if pa == pb {
            return Err(Error::PortConflict(format!("{a} cannot connect to itself")));
        }
        for (address, port) in [(a, pa), (b, pb)] {
            if self.used.contains(&port) {
                return Err(Error::PortConflict(format!("{address} is already connected")));
            }
        }
        self.used.insert(pa);
        self.used.insert(pb);
        self.connections.push([pa, pb]);
        Ok(())
    }

    /// Absorbs a port into a matched load.
    pub fn terminate(&mut self, address: &str) -> Result<()> {
        self.resolve(address)?;
        self.loads += 1;
        let name = format!("_load{}", self.loads);
        self.add(NetworkComponent::matched_load(name.clone()))?;
        self.connect(address, &format!("{name}.1"))
    }

    /// Reduces the netlist to the scattering matrix of its open ports.
    pub fn reduce(&self) -> Result<NetworkComponent> {
        let mut external = Vec::new();
        for (ci, component) in self.components.iter().enumerate() {
            for pi in 0..component.n_ports() {
                if !self.used.contains(&(ci, pi)) {
                    external.push((ci, pi));
                }
            }
        }
        if external.is_empty() {
            return Err(Error::NoExternalPorts);
        }
        let internal: Vec<(usize, usize)> =
            self.connections.iter().flatten().copied().collect();

        let entry = |(cj, pj): (usize, usize), (ck, pk): (usize, usize)| {
            if cj == ck {
                self.components[cj].matrix()[(pj, pk)]
            } else {
                Complex64::ZERO
            }
        };
        let block = |rows: &[(usize, usize)], cols: &[(usize, usize)]| {
            DMatrix::from_fn(rows.len(), cols.len(), |j, k| entry(rows[j], cols[k]))
        };

        let t_ee = block(&external, &external);
        if internal.is_empty() {
            return Ok(self.wrap(external, t_ee));
        }
        let t_ei = block(&external, &internal);
        let t_ie = block(&internal, &external);
        let t_ii = block(&internal, &internal);

        // P swaps the two slots of each connection.
        let permute_rows = |m: &DMatrix<Complex64>| {
            let mut out = m.clone();
            for k in 0..self.connections.len() {
                out.swap_rows(2 * k, 2 * k + 1);
            }
            out
        };

        let n_int = internal.len();
        let a = DMatrix::identity(n_int, n_int) - &t_ii * permute_rows(&DMatrix::identity(n_int, n_int));
        let Some((x, residual)) = linalg::solve(&a, &t_ie) else {
            return Err(Error::SingularNetwork(
                "interconnection has an undamped resonant loop".into(),
            ));
        };
        if residual > linalg::SINGULAR_RESIDUAL {
            return Err(Error::SingularNetwork(format!(
                "interconnection solve residual {residual:.2e}"
            )));
        }
        let s_ext = t_ee + t_ei * permute_rows(&x);
        Ok(self.wrap(external, s_ext))
    }

    fn wrap(&self, external: Vec<(usize, usize)>, s: DMatrix<Complex64>) -> NetworkComponent {
        let labels = external
            .iter()
            .map(|&(ci, pi)| {
                format!("{}.{}", self.components[ci].name, self.components[ci].port_labels[pi])
            })
            .collect();
        NetworkComponent::from_scattering("network", labels, s)
    }
}
