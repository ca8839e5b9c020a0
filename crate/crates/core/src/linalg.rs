//! Small dense complex linear algebra helpers.
//!
//! Every matrix in this crate is tiny (a handful of modes or ports), so the
//! solves go through an LU factorization with partial pivoting and a
//! residual check instead of anything iterative. A solve that fails to
//! factor, or whose relative residual exceeds [`SINGULAR_RESIDUAL`], is
//! treated as singular and surfaces as an explicit error at the call site;
//! nothing is regularized silently.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative residual above which a solve is declared singular.
pub const SINGULAR_RESIDUAL: f64 = 1e-6;

/// Solves `A X = B` for complex dense `A`, returning the solution together
/// with the worst relative residual over all entries.
///
/// Returns `None` when the factorization itself reports a singular matrix.
pub fn solve(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Option<(DMatrix<Complex64>, f64)> {
    let x = a.clone().lu().solve(b)?;
    let residual = &(a * &x) - b;
    let scale = (max_abs(a) * max_abs(&x)).max(max_abs(b)).max(f64::MIN_POSITIVE);
    let rel = max_abs(&residual) / scale;
    Some((x, rel))
}

/// Largest entry magnitude of a complex matrix.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Largest entry magnitude of `S^H S - I`; zero for a unitary matrix.
pub fn unitarity_defect(s: &DMatrix<Complex64>) -> f64 {
    let n = s.nrows();
    let mut g = s.adjoint() * s;
    for j in 0..n {
        g[(j, j)] -= Complex64::new(1.0, 0.0);
    }
    max_abs(&g)
}

/// Largest entrywise difference between two matrices of identical shape.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}
