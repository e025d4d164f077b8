//! Fixed numeric formatting shared by every text output.

/// Scientific notation with 17 significant digits, `.` separator.
pub fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}
