//! Fixed-precision number formatting shared by every text output.

/// Significant digits used for all numeric output.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` rounded to 12 significant digits, in the shortest form that
/// reads back to the rounded value. Negative zero prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}
