//! Number formatting shared by every file the tool writes.

/// Significant digits kept in serialized output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Scientific notation with [`SIGNIFICANT_DIGITS`] significant digits.
/// Negative zero is printed as zero so outputs do not depend on the sign of
/// rounding noise.
pub fn sig(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    sig(x).parse().unwrap_or(x)
}
