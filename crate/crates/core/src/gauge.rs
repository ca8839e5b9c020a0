//! Gauge freedom of scattering phases.
//!
//! Ports of a frequency-converting network sit at different carrier
//! frequencies, so shifting the shared time origin by `t0` multiplies
//! each entry by a phase:
//!
//! ```text
//! S'_jk = S_jk e^{-i (omega_j - omega_k) t0}
//! ```
//!
//! Transmission magnitudes are invariant, which makes `|S_jk| != |S_kj|`
//! the frame-independent notion of nonreciprocity. Phase asymmetries
//! between frequency-distinct ports are pure gauge: the same device
//! scatters like a gyrator in one frame and like a plain delay line in
//! another, and [`equal_phase_frame`] computes the retiming between
//! them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A choice of time origin together with the port carrier frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFrame {
    pub t0: f64,
    pub frequencies: Vec<f64>,
}

impl GaugeFrame {
    pub fn new(t0: f64, frequencies: Vec<f64>) -> Self {
        GaugeFrame { t0, frequencies }
    }

    /// Phase factor applied to `S[j <- k]` in this frame.
    pub fn phase_factor(&self, j: usize, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, -(self.frequencies[j] - self.frequencies[k]) * self.t0)
    }

    /// Re-times a scattering matrix whose ports match `frequencies`.
    pub fn transform(&self, s: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(s.nrows(), self.frequencies.len(), "one frequency per port");
        assert_eq!(s.ncols(), self.frequencies.len(), "one frequency per port");
        DMatrix::from_fn(s.nrows(), s.ncols(), |j, k| s[(j, k)] * self.phase_factor(j, k))
    }
}

/// The frame in which `S[b <- a]` and `S[a <- b]` have equal phase.
///
/// # Errors
///
/// [`Error::DegenerateFrequencies`] when ports `a` and `b` share a
/// carrier (no retiming can move their relative phase) and
/// [`Error::UndefinedPhase`] when either transmission vanishes.
pub fn equal_phase_frame(
    s: &DMatrix<Complex64>,
    frequencies: &[f64],
    a: usize,
    b: usize,
) -> Result<GaugeFrame> {
    let forward = s[(b, a)];
    let backward = s[(a, b)];
    if forward.norm() == 0.0 || backward.norm() == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    let domega = frequencies[b] - frequencies[a];
    if domega == 0.0 {
        return Err(Error::DegenerateFrequencies);
    }
    let t0 = (forward.arg() - backward.arg()) / (2.0 * domega);
    Ok(GaugeFrame::new(t0, frequencies.to_vec()))
}

/// Outcome of the frame-independent nonreciprocity test.
#[derive(Debug, Clone, PartialEq)]
pub struct NonreciprocityVerdict {
    pub nonreciprocal: bool,
    /// 1-based port pair `(j, k)`, `j < k`, with the largest magnitude
    /// asymmetry; `None` when nothing exceeds the tolerance.
    pub witness: Option<(usize, usize)>,
    /// The largest `| |S_jk| - |S_kj| |` over all pairs.
    pub asymmetry: f64,
}

/// Tests `| |S_jk| - |S_kj| | > tol` over all port pairs.
pub fn is_nonreciprocal(s: &DMatrix<Complex64>, tol: f64) -> NonreciprocityVerdict {
    let mut witness = None;
    let mut asymmetry = 0.0;
    for j in 0..s.nrows() {
        for k in (j + 1)..s.ncols() {
            let gap = (s[(j, k)].norm() - s[(k, j)].norm()).abs();
            if gap > asymmetry {
                asymmetry = gap;
                witness = Some((j + 1, k + 1));
            }
        }
    }
    if asymmetry <= tol {
        witness = None;
    }
    NonreciprocityVerdict { nonreciprocal: witness.is_some(), witness, asymmetry }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gyrator() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[
            Complex64::ZERO,
            c64(1.0, 0.0),
            c64(-1.0, 0.0),
            Complex64::ZERO,
        ])
    }

    fn isolator() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(2, 2, &[
            Complex64::ZERO,
            Complex64::ZERO,
            c64(1.0, 0.0),
            Complex64::ZERO,
        ])
    }

    #[test]
    fn zero_origin_is_identity() {
        let frame = GaugeFrame::new(0.0, vec![1.0e9, 2.0e9]);
        let s = gyrator();
        assert_eq!(frame.transform(&s), s);
    }

    #[test]
    fn transform_preserves_magnitudes() {
        let s = DMatrix::from_fn(3, 3, |j, k| {
            Complex64::from_polar(0.1 + (j * 3 + k) as f64, (j as f64) - 1.7 * (k as f64))
        });
        let frame = GaugeFrame::new(2.3e-9, vec![5.0e9, 6.2e9, 0.9e7]);
        let t = frame.transform(&s);
        for j in 0..3 {
            for k in 0..3 {
                assert!((t[(j, k)].norm() - s[(j, k)].norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_is_diagonal_conjugation() {
        let s = gyrator();
        let frame = GaugeFrame::new(0.4e-9, vec![4.0e9, 7.0e9]);
        let d = DMatrix::from_fn(2, 2, |j, k| {
            if j == k {
                Complex64::from_polar(1.0, -frame.frequencies[j] * frame.t0)
            } else {
                Complex64::ZERO
            }
        });
        let expect = &d * &s * d.adjoint();
        let got = frame.transform(&s);
        for j in 0..2 {
            for k in 0..2 {
                assert!((got[(j, k)] - expect[(j, k)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_entries_are_frame_invariant() {
        let s = DMatrix::from_fn(2, 2, |j, k| c64(0.3 + j as f64, 0.1 * k as f64));
        let frame = GaugeFrame::new(1.0, vec![3.0, 11.0]);
        let t = frame.transform(&s);
        assert_eq!(t[(0, 0)], s[(0, 0)]);
        assert_eq!(t[(1, 1)], s[(1, 1)]);
    }

    #[test]
    fn gyrator_retimes_to_a_delay_line() {
        let omega = [4.0e9, 7.0e9];
        let t0 = FRAC_PI_2 / (omega[1] - omega[0]);
        let frame = GaugeFrame::new(t0, omega.to_vec());
        let t = frame.transform(&gyrator());
        // Antisymmetric transmission becomes a symmetric quarter-wave
        // delay: both directions scatter as +i.
        assert!((t[(1, 0)] - c64(0.0, 1.0)).norm() < 1e-12);
        assert!((t[(0, 1)] - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn equal_phase_frame_finds_the_gyrator_retiming() {
        let omega = [4.0e9, 7.0e9];
        let frame = equal_phase_frame(&gyrator(), &omega, 0, 1).unwrap();
        assert!(((omega[1] - omega[0]) * frame.t0 - FRAC_PI_2).abs() < 1e-12);
        let t = frame.transform(&gyrator());
        let dphi = (t[(1, 0)].arg() - t[(0, 1)].arg()).abs() % (2.0 * PI);
        assert!(dphi < 1e-12 || (dphi - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn equal_phase_frame_needs_distinct_carriers() {
        let err = equal_phase_frame(&gyrator(), &[5.0e9, 5.0e9], 0, 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrequencies));
    }

    #[test]
    fn equal_phase_frame_needs_both_transmissions() {
        let err = equal_phase_frame(&isolator(), &[4.0e9, 7.0e9], 0, 1).unwrap_err();
        assert!(matches!(err, Error::UndefinedPhase));
    }

    #[test]
    fn gyrator_is_reciprocal_in_magnitude() {
        let verdict = is_nonreciprocal(&gyrator(), 1e-12);
        assert!(!verdict.nonreciprocal);
        assert!(verdict.asymmetry < 1e-15);
    }

    #[test]
    fn isolator_is_strictly_nonreciprocal() {
        let verdict = is_nonreciprocal(&isolator(), 1e-12);
        assert!(verdict.nonreciprocal);
        assert_eq!(verdict.witness, Some((1, 2)));
        assert!((verdict.asymmetry - 1.0).abs() < 1e-15);
    }

    #[test]
    fn verdict_is_frame_invariant() {
        let frame = GaugeFrame::new(3.1e-10, vec![4.0e9, 7.0e9]);
        for s in [gyrator(), isolator()] {
            let before = is_nonreciprocal(&s, 1e-9);
            let after = is_nonreciprocal(&frame.transform(&s), 1e-9);
            assert_eq!(before.nonreciprocal, after.nonreciprocal);
            assert!((before.asymmetry - after.asymmetry).abs() < 1e-12);
        }
    }
}
