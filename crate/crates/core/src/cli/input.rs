//! Data sources for `estimate` and `profile`.

use std::path::Path;

use super::CliError;
use crate::estimator::SufficientStats;

/// Reads durations from a text file.
///
/// One record per line; fields may be separated by commas or whitespace.
/// Blank lines and lines starting with `#` are skipped. A first record that
/// does not parse as a number is a header, and the `duration` column is used
/// if present (otherwise the first). Further fields, such as birth times,
/// are ignored.
pub fn read_durations(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_durations(&text).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

pub fn parse_durations(text: &str) -> Result<Vec<f64>, CliError> {
    let mut column: Option<usize> = None;
    let mut seen_record = false;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_fields(line);
        if !seen_record {
            seen_record = true;
            if fields[0].parse::<f64>().is_err() {
                let idx = fields
                    .iter()
                    .position(|f| f.eq_ignore_ascii_case("duration"));
                column = Some(idx.unwrap_or(0));
                continue;
            }
        }
        let col = column.unwrap_or(0);
        let field = fields.get(col).ok_or_else(|| {
            CliError::Data(format!(
                "line {}: missing duration column {}",
                i + 1,
                col + 1
            ))
        })?;
        let x: f64 = field
            .parse()
            .map_err(|_| CliError::Data(format!("line {}: `{field}` is not a number", i + 1)))?;
        if !(x.is_finite() && x >= 0.0) {
            return Err(CliError::Data(format!(
                "line {}: duration {x} must be non-negative",
                i + 1
            )));
        }
        out.push(x);
    }
    Ok(out)
}

/// Expands `"82:0-5,112:6-10"` into 82 copies of 2.5 and 112 copies of 8.
pub fn parse_grouped(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |item: &str, why: &str| CliError::Usage(format!("--grouped item `{item}`: {why}"));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (count, range) = item
            .split_once(':')
            .ok_or_else(|| bad(item, "expected COUNT:LO-HI"))?;
        let (lo, hi) = range
            .split_once('-')
            .ok_or_else(|| bad(item, "expected LO-HI"))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| bad(item, "count is not an integer"))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| bad(item, "lower bound is not a number"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| bad(item, "upper bound is not a number"))?;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(bad(item, "need 0 <= LO <= HI"));
        }
        out.extend(std::iter::repeat_n(0.5 * (lo + hi), count));
    }
    Ok(out)
}

/// Sufficient statistics given inline on the command line.
pub fn inline_stats(m: u64, sum_x: f64, sum_x2: Option<f64>) -> Result<SufficientStats, CliError> {
    SufficientStats::new(m, sum_x, sum_x2).map_err(CliError::from)
}
