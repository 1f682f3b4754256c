//! Artifact emission: deterministic number formatting, CSV and JSON
//! writers, and atomic file replacement.
//!
//! Every numeric field is printed with 17 significant digits, enough to
//! reparse to the identical binary value, so artifacts are byte-stable
//! across runs and machines with the same build. Files are written to a
//! sibling temporary file and renamed into place, so a failed run never
//! leaves a partial artifact behind.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One output cell: number, integer, or empty (for unavailable values).
pub enum Cell {
    Num(f64),
    Int(i64),
    Empty,
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> String {
        match self {
            // 17-significant-digit scientific notation is a valid JSON
            // number token, so both formats carry identical digit text.
            Cell::Num(x) if x.is_finite() => fmt_f64(*x),
            Cell::Num(_) => "null".into(),
            Cell::Int(i) => i.to_string(),
            Cell::Empty => "null".into(),
        }
    }
}

/// A rectangular table with a fixed header, rendered as CSV or as a JSON
/// array of objects.
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns).expect("in-memory csv");
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            w.write_record(row.iter().map(|c| c.csv_field()))
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("\"{name}\": {}", cell.json_value()));
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }
}

/// Renders the sweep event log in its fixed schema:
/// `[{kind, theta_star, zeta_star, bracket: [lo, hi]}, ...]`.
pub fn events_json(events: &[wavetrain::spectrum::SweepEvent]) -> String {
    let mut out = String::from("[\n");
    for (i, e) in events.iter().enumerate() {
        let kind = match e.kind {
            wavetrain::spectrum::EventKind::HopfOnset => "HopfOnset",
            wavetrain::spectrum::EventKind::HopfOffset => "HopfOffset",
            wavetrain::spectrum::EventKind::PassThrough => "PassThrough",
        };
        out.push_str(&format!(
            "  {{\"kind\": \"{kind}\", \"theta_star\": {}, \"zeta_star\": {}, \"bracket\": [{}, {}]}}",
            fmt_f64(e.theta_star),
            fmt_f64(e.zeta_star),
            fmt_f64(e.bracket.0),
            fmt_f64(e.bracket.1),
        ));
        if i + 1 < events.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

/// Writes `content` to `path`, or to standard output when `path` is `-`.
///
/// File writes go through a temporary file in the destination directory
/// followed by a rename, so the destination is either untouched or
/// complete.
pub fn write_artifact(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(content.as_bytes())
            .and_then(|()| lock.flush())
            .map_err(|e| CliError::validation(format!("cannot write to standard output: {e}")))?;
        return Ok(());
    }
    let target = Path::new(path);
    let dir = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let write = || -> std::io::Result<()> {
        let mut tmp = tempfile::Builder::new()
            .prefix(".wavetrain-")
            .tempfile_in(dir)?;
        tmp.write_all(content.as_bytes())?;
        tmp.flush()?;
        tmp.persist(target).map_err(|e| e.error)?;
        Ok(())
    };
    write().map_err(|e| CliError::validation(format!("cannot write '{path}': {e}")))
}

/// Sibling path for the sweep event log: the output path with its
/// extension replaced by `events.json`.
pub fn events_path(output: &str) -> String {
    let p = Path::new(output);
    p.with_extension("events.json").to_string_lossy().into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_through_the_printed_text() {
        for &x in &[
            0.1,
            -3.2095703125e0,
            1.0 / 3.0,
            6.626e-34,
            -1.7976931348623157e308,
            5e-324,
            0.0,
        ] {
            let printed = fmt_f64(x);
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{printed}");
        }
    }

    #[test]
    fn csv_and_json_share_cell_text() {
        let t = Table {
            columns: &["a", "b"],
            rows: vec![
                vec![Cell::Num(0.5), Cell::Int(-1)],
                vec![Cell::Empty, Cell::Int(7)],
            ],
        };
        let csv = t.to_csv();
        assert!(csv.starts_with("a,b\n"));
        assert!(csv.contains(&fmt_f64(0.5)));
        assert!(csv.contains("\n,7\n"));
        let json = t.to_json();
        assert!(json.contains(&format!("\"a\": {}", fmt_f64(0.5))));
        assert!(json.contains("\"a\": null"));
    }

    #[test]
    fn event_paths_replace_the_extension() {
        assert_eq!(events_path("out.csv"), "out.events.json");
        assert_eq!(events_path("dir/run.json"), "dir/run.events.json");
        assert_eq!(events_path("bare"), "bare.events.json");
    }
}
