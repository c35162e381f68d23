//! CSV output with an embedded run stamp.
//!
//! Every CSV this crate writes starts with a single `#` comment line that
//! records the tool version, the command, the master seed, and the resolved
//! configuration, followed by a mandatory header row. Floats are formatted
//! with the shortest representation that round-trips, so re-running a
//! deterministic command reproduces files byte for byte.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Identifies the run that produced an output file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStamp {
    pub command: String,
    pub seed: u64,
    pub config: Vec<(String, String)>,
}

impl RunStamp {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        RunStamp { command: command.into(), seed, config: Vec::new() }
    }

    /// Appends one resolved configuration entry.
    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    /// The `#` comment line written above each CSV header.
    pub fn comment_line(&self) -> String {
        let mut line = format!(
            "# postbias={} command={} seed={}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.seed
        );
        for (k, v) in &self.config {
            line.push(' ');
            line.push_str(k);
            line.push('=');
            line.push_str(v);
        }
        line
    }
}

/// Writes a CSV file: optional stamp comment, then header, then rows.
pub fn write_csv<I>(
    path: &Path,
    stamp: Option<&RunStamp>,
    header: &[impl AsRef<str>],
    rows: I,
) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = File::create(path)?;
    if let Some(stamp) = stamp {
        writeln!(file, "{}", stamp.comment_line())?;
    }
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamp_line_contains_version_and_config() {
        let stamp = RunStamp::new("bias-estimate", 7)
            .with("model", "weibull")
            .with("samples", 20_000);
        let line = stamp.comment_line();
        assert!(line.starts_with("# postbias="));
        assert!(line.contains("command=bias-estimate"));
        assert!(line.contains("seed=7"));
        assert!(line.contains("model=weibull"));
        assert!(line.contains("samples=20000"));
    }

    #[test]
    fn csv_has_comment_then_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let stamp = RunStamp::new("test", 1);
        write_csv(
            &path,
            Some(&stamp),
            &["a", "b"],
            vec![vec!["1".to_string(), "0.5".to_string()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# postbias="));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1,0.5");
    }

    #[test]
    fn float_formatting_round_trips() {
        // The shortest-digits formatting must parse back to the same bits.
        for v in [6.0 / 13.0, -5.0 / 156.0, 1e-17, 3.5, f64::MIN_POSITIVE] {
            let s = format!("{v}");
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
