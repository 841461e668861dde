//! Library half of the command-line tool: the sequence-file format and the
//! small CSV helpers the subcommands share. The binary in `main.rs` stays a
//! thin argument-handling layer over this and the core crate.

pub mod seqfile;

/// Angular frequency (rad/s) of a detuning given in kHz.
pub fn khz_to_rad_per_s(khz: f64) -> f64 {
    2.0 * std::f64::consts::PI * 1e3 * khz
}

/// Detuning in kHz of an angular frequency in rad/s.
pub fn rad_per_s_to_khz(rad: f64) -> f64 {
    rad / (2.0 * std::f64::consts::PI * 1e3)
}

/// Parse simple numeric CSV content: one header row, then rows of
/// comma-separated floats with `min_cols..=max_cols` columns. Returns the
/// rows; short, long, or non-numeric rows are errors labeled with their
/// 1-based line number.
pub fn parse_numeric_csv(
    text: &str,
    min_cols: usize,
    max_cols: usize,
) -> Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 {
            // Single header row, mandated by the output conventions too.
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < min_cols || fields.len() > max_cols {
            return Err(format!(
                "line {}: expected {min_cols}..{max_cols} columns, got {}",
                idx + 1,
                fields.len()
            ));
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in fields {
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => return Err(format!("line {}: `{f}` is not a finite number", idx + 1)),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows after the header".into());
    }
    Ok(rows)
}
