//! CSV body plus plain-text summary for one command run.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    pub failures: usize,
    pub not_applicable: usize,
}

impl Report {
    pub fn new(header: Vec<&'static str>) -> Self {
        Report { header, ..Report::default() }
    }

    pub fn row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            1
        } else {
            0
        }
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_text(&self, command: &str, config: &str, elapsed_s: f64) -> String {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut s = format!("command: {command}\nfinished at unix time {stamp} after {elapsed_s:.3} s\n");
        s.push_str(&format!(
            "rows: {}, failed: {}, not applicable: {}\n",
            self.rows.len(),
            self.failures,
            self.not_applicable
        ));
        for line in &self.summary {
            s.push_str(line);
            s.push('\n');
        }
        s.push_str("config:\n");
        for line in config.lines() {
            s.push_str("  ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    pub fn write_files(&self, dir: &Path, command: &str, config: &str, elapsed_s: f64) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        let f = std::fs::File::create(dir.join(format!("{command}.csv")))?;
        self.write_csv(std::io::BufWriter::new(f))?;
        std::fs::write(dir.join(format!("{command}_summary.txt")), self.summary_text(command, config, elapsed_s))?;
        Ok(())
    }
}
