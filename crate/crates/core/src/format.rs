//! Locale-independent number formatting shared by the CSV writers.

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Comma-joined [`num`] values.
pub fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(num).collect::<Vec<_>>().join(",")
}
