//! Fixed-precision float handling for everything written to disk.
//!
//! Exported numbers carry 9 significant digits. Values are rounded once, as
//! `f64`, and then printed with the shortest representation that reads back
//! to the same `f64`; reloading an export therefore reproduces it exactly.

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds to `SIGNIFICANT_DIGITS` significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("exponent formatting always parses")
}

/// Text form of `round_sig(x)`.
pub fn fmt_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}
