//! Fixed-width numeric formatting for CSV and report output.
//!
//! Everything written to disk goes through [`num`] so that repeated runs of
//! the same computation produce byte-identical files.

/// Formats a float in plain decimal with 12 fractional digits.
///
/// Values that round to zero are normalized to an unsigned zero so grid
/// endpoints arriving as `-0.0` (or as `-1e-15`) do not change the bytes.
pub(crate) fn num(x: f64) -> String {
    let s = format!("{x:.12}");
    if s == "-0.000000000000" {
        s[1..].to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn formats_with_twelve_digits() {
        assert_eq!(num(2.0 / 3.0), "0.666666666667");
        assert_eq!(num(-0.0), "0.000000000000");
        assert_eq!(num(1.5e-13), "0.000000000000");
        assert_eq!(num(-1.5e-13), "0.000000000000");
        assert_eq!(num(-0.25), "-0.250000000000");
    }
}
