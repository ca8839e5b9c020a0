//! Dynamical matrices and multiport scattering.
//!
//! # Equations of motion and sign conventions
//!
//! These conventions are fixed here once; every other module inherits
//! them. In the frame rotating at the conversion-window center, the mode
//! amplitude vector `x` obeys
//!
//! ```text
//! dx_j/dt = (i Delta_j - kappa_j / 2) x_j
//!           - i sum_k g_jk e^{+-i phi_jk} x_k
//!           + sqrt(kappa_p) x_in,p
//! ```
//!
//! together with the input-output relation `x_out,p = x_in,p - sqrt(kappa_p) x_j`.
//! In the frequency domain at probe detuning `delta` this becomes
//!
//! ```text
//! (-i delta I + M) x = K x_in        S(delta) = I - K^T chi(delta) K
//! ```
//!
//! with `chi(delta) = (-i delta I + M)^{-1}` and
//!
//! * diagonal `M_jj = -i Delta_j + kappa_j / 2` (total decay rate),
//! * for a coupling `(from, to)` with rate `g` and phase `phi`:
//!   `M_{from,to} = i g e^{-i phi}` and `M_{to,from} = i g e^{+i phi}`,
//! * `K` an `N x P` real non-negative mode-to-port map with
//!   `sum_p K_jp^2 = kappa_j`.
//!
//! Because every decay channel of every mode appears as a column of `K`,
//! the full port-resolved scattering matrix is exactly unitary at every
//! real `delta`; numerical tests hold this to better than 1e-12.
//!
//! The resonant two-cavity converter (both cavities bridged by one
//! oscillator, everything on the window center) has the closed-form
//! center response implemented in [`conversion_closed_form`]; a direct
//! cavity-cavity coupling gives [`coherent_closed_form`], which carries
//! the extra inherent `e^{i pi/2}` of the coherent link. Both serve as
//! independent oracles for the matrix pipeline here.

use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt;
use crate::linalg;
use crate::noise::NoiseSpectrum;
use crate::system::{Port, ValidatedSystem};

/// Port layout shared by every response object derived from one system.
#[derive(Debug, Clone, PartialEq)]
pub struct PortList {
    pub ports: Vec<Port>,
    pub n_external: usize,
}

impl PortList {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.ports.iter().map(|p| p.label.as_str())
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.ports
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }
}

/// The frequency-independent part of the linear response.
#[derive(Debug, Clone)]
pub struct DynamicalMatrix {
    m: DMatrix<Complex64>,
    k: DMatrix<f64>,
    k_complex: DMatrix<Complex64>,
    ports: Arc<PortList>,
}

/// Builds the dynamical matrix `M` and mode-to-port map `K` of a system.
pub fn build_dynamics(system: &ValidatedSystem) -> DynamicalMatrix {
    let n = system.modes().len();
    let ports = system.ports();
    let p = ports.len();

    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (j, mode) in system.modes().iter().enumerate() {
        m[(j, j)] = Complex64::new(mode.total_decay() / 2.0, -mode.detuning);
    }
    for coupling in system.couplings() {
        let from = system.mode_index(&coupling.from).expect("validated");
        let to = system.mode_index(&coupling.to).expect("validated");
        let hop = Complex64::i() * coupling.rate;
        let phase = Complex64::from_polar(1.0, coupling.phase);
        m[(from, to)] += hop * phase.conj();
        m[(to, from)] += hop * phase;
    }

    let mut k = DMatrix::<f64>::zeros(n, p);
    for (pi, port) in ports.iter().enumerate() {
        k[(port.mode, pi)] = port.rate.sqrt();
    }
    let k_complex = k.map(|x| Complex64::new(x, 0.0));

    DynamicalMatrix {
        m,
        k,
        k_complex,
        ports: Arc::new(PortList {
            ports: ports.to_vec(),
            n_external: system.n_external(),
        }),
    }
}

impl DynamicalMatrix {
    pub fn n_modes(&self) -> usize {
        self.m.nrows()
    }

    pub fn m(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn ports(&self) -> &Arc<PortList> {
        &self.ports
    }

    /// Full port-resolved scattering matrix at one probe detuning.
    ///
    /// # Errors
    ///
    /// [`Error::SingularResponse`] when the response matrix cannot be
    /// solved reliably (an undamped resonance); the result is never
    /// regularized.
    pub fn scattering(&self, delta: f64) -> Result<ScatteringMatrix> {
        let n = self.n_modes();
        let mut a = self.m.clone();
        let minus_i_delta = Complex64::new(0.0, -delta);
        for j in 0..n {
            a[(j, j)] += minus_i_delta;
        }
        let Some((chi_k, residual)) = linalg::solve(&a, &self.k_complex) else {
            return Err(Error::SingularResponse { delta, residual: f64::INFINITY });
        };
        if residual > linalg::SINGULAR_RESIDUAL {
            return Err(Error::SingularResponse { delta, residual });
        }
        let mut s = -(self.k_complex.transpose() * chi_k);
        for p in 0..s.nrows() {
            s[(p, p)] += Complex64::new(1.0, 0.0);
        }
        Ok(ScatteringMatrix { delta, s, ports: Arc::clone(&self.ports), residual })
    }

    #[cfg(test)]
    pub(crate) fn from_raw(m: DMatrix<Complex64>, k: DMatrix<f64>, ports: PortList) -> Self {
        let k_complex = k.map(|x| Complex64::new(x, 0.0));
        DynamicalMatrix { m, k, k_complex, ports: Arc::new(ports) }
    }
}

/// Scattering response at a single probe detuning, all ports resolved.
#[derive(Debug, Clone)]
pub struct ScatteringMatrix {
    pub delta: f64,
    s: DMatrix<Complex64>,
    ports: Arc<PortList>,
    pub residual: f64,
}

impl ScatteringMatrix {
    pub(crate) fn assemble(
        delta: f64,
        s: DMatrix<Complex64>,
        ports: Arc<PortList>,
        residual: f64,
    ) -> Self {
        ScatteringMatrix { delta, s, ports, residual }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.s
    }

    pub fn ports(&self) -> &PortList {
        &self.ports
    }

    /// `S[out <- in]` looked up by port labels.
    pub fn entry(&self, out: &str, input: &str) -> Result<Complex64> {
        Ok(self.s[(self.ports.index(out)?, self.ports.index(input)?)])
    }

    /// The external-port block of the matrix.
    pub fn external(&self) -> DMatrix<Complex64> {
        let n = self.ports.n_external;
        self.s.view((0, 0), (n, n)).into_owned()
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.s)
    }
}

/// Computes `S(delta)` for a validated system in one call.
pub fn scattering(system: &ValidatedSystem, delta: f64) -> Result<ScatteringMatrix> {
    build_dynamics(system).scattering(delta)
}

/// Center-response of the resonant two-cavity converter.
///
/// For cooperativities `c1`, `c2` and pump phase difference `dphi`
/// (phase of the first link minus the second):
///
/// ```text
/// S21 = 2 sqrt(c1 c2) / (1 + c1 + c2) * e^{+i dphi}       S12 = conj(S21)
/// ```
///
/// The magnitude peaks at matched unit cooperativities (`|S21| = 2/3`)
/// and approaches 1 from below as both cooperativities grow together.
pub fn conversion_closed_form(c1: f64, c2: f64, dphi: f64) -> (Complex64, Complex64) {
    let amplitude = 2.0 * (c1 * c2).sqrt() / (1.0 + c1 + c2);
    let s21 = Complex64::from_polar(amplitude, dphi);
    (s21, s21.conj())
}

/// Center-response of two resonant cavities with a direct coherent link.
///
/// ```text
/// S21 = 2 sqrt(c) / (1 + c) * i e^{+i theta}
/// S12 = 2 sqrt(c) / (1 + c) * i e^{-i theta}
/// ```
///
/// Unlike the mechanically mediated conversion, the coherent link carries
/// an inherent `e^{i pi/2}` in both directions on top of the tunable
/// pump phase `theta`.
pub fn coherent_closed_form(c: f64, theta: f64) -> (Complex64, Complex64) {
    let amplitude = 2.0 * c.sqrt() / (1.0 + c);
    let i = Complex64::i();
    (
        i * Complex64::from_polar(amplitude, theta),
        i * Complex64::from_polar(amplitude, -theta),
    )
}

/// Scattering response sampled on a detuning grid.
#[derive(Debug, Clone)]
pub struct ResponseCurve {
    deltas: Vec<f64>,
    points: Vec<ScatteringMatrix>,
}

/// Sweeps the probe detuning over an inclusive linear grid.
///
/// The per-point solves run data-parallel; results are assembled in grid
/// order, and a singular point aborts the sweep with the offending
/// detuning (the smallest such detuning in grid order).
pub fn sweep(
    system: &ValidatedSystem,
    delta_min: f64,
    delta_max: f64,
    points: usize,
) -> Result<ResponseCurve> {
    if points < 2 {
        return Err(Error::BadGrid(format!("need at least 2 points, got {points}")));
    }
    if delta_min.is_nan() || delta_max.is_nan() || delta_max <= delta_min {
        return Err(Error::BadGrid(format!(
            "delta_max ({delta_max}) must exceed delta_min ({delta_min})"
        )));
    }
    let dynamics = build_dynamics(system);
    let deltas: Vec<f64> = (0..points)
        .map(|i| delta_min + (delta_max - delta_min) * (i as f64 / (points - 1) as f64))
        .collect();
    let solved: Vec<Result<ScatteringMatrix>> =
        deltas.par_iter().map(|&d| dynamics.scattering(d)).collect();
    let mut out = Vec::with_capacity(points);
    for point in solved {
        out.push(point?);
    }
    Ok(ResponseCurve { deltas, points: out })
}

impl ResponseCurve {
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn points(&self) -> &[ScatteringMatrix] {
        &self.points
    }

    pub fn ports(&self) -> &PortList {
        self.points[0].ports()
    }

    /// Index of the grid point closest to zero detuning.
    pub fn center_index(&self) -> usize {
        let mut best = 0;
        for (i, d) in self.deltas.iter().enumerate() {
            if d.abs() < self.deltas[best].abs() {
                best = i;
            }
        }
        best
    }

    /// `|S[out <- in]|` along the grid, by port indices.
    pub fn magnitude(&self, out: usize, input: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.matrix()[(out, input)].norm()).collect()
    }

    /// Writes the curve as CSV: a `delta` column, then magnitude and
    /// phase columns for each requested `(out, in)` port pair, then any
    /// noise spectra (total plus per-source decomposition).
    ///
    /// All numbers are fixed-precision decimals so identical runs write
    /// identical bytes.
    pub fn write_csv<W: Write>(
        &self,
        pairs: &[(usize, usize)],
        noise: &[NoiseSpectrum],
        w: &mut W,
    ) -> io::Result<()> {
        let ports = self.ports();
        let mut header = vec!["delta".to_string()];
        for &(out, input) in pairs {
            let o = &ports.ports[out].label;
            let i = &ports.ports[input].label;
            header.push(format!("abs_S[{o}<-{i}]"));
            header.push(format!("arg_S[{o}<-{i}]"));
        }
        for spectrum in noise {
            header.push(format!("N[{}]", spectrum.port));
            for source in &spectrum.sources {
                header.push(format!("N[{}<-{}]", spectrum.port, source));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for (row, point) in self.points.iter().enumerate() {
            let mut fields = vec![fmt::num(self.deltas[row])];
            for &(out, input) in pairs {
                let z = point.matrix()[(out, input)];
                fields.push(fmt::num(z.norm()));
                fields.push(fmt::num(z.arg()));
            }
            for spectrum in noise {
                fields.push(fmt::num(spectrum.total[row]));
                for contributions in &spectrum.contributions {
                    fields.push(fmt::num(contributions[row]));
                }
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}
