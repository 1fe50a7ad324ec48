//! Shared text formatting for CSV/JSON artifacts.

/// Formats a float with 17 significant digits so that every emitted value
/// round-trips exactly through parsing.
pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    format!("{v:.16e}")
}
