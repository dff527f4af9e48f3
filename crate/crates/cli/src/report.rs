use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

pub const COLUMNS: [&str; 8] = [
    "suite", "slice_t", "quantity", "value", "reference", "residual", "tolerance", "pass",
];

/// One CSV row. `slice_t` is empty for checks not tied to a slice.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub suite: String,
    pub slice_t: Option<i64>,
    pub quantity: String,
    pub value: f64,
    pub reference: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub suite: String,
    pub pass_count: usize,
    pub fail_count: usize,
    pub max_residual: f64,
}

#[derive(Debug, Default)]
pub struct Report {
    suite: String,
    rows: Vec<Row>,
}

impl Report {
    pub fn new(suite: &str) -> Self {
        Report {
            suite: suite.to_string(),
            rows: Vec::new(),
        }
    }

    /// Records `value` against `reference` with residual `|value - reference|`.
    pub fn check(&mut self, slice_t: Option<i64>, quantity: impl Into<String>, value: f64, reference: f64, tolerance: f64) {
        self.check_residual(slice_t, quantity, value, reference, (value - reference).abs(), tolerance);
    }

    pub fn check_residual(
        &mut self,
        slice_t: Option<i64>,
        quantity: impl Into<String>,
        value: f64,
        reference: f64,
        residual: f64,
        tolerance: f64,
    ) {
        self.rows.push(Row {
            suite: self.suite.clone(),
            slice_t,
            quantity: quantity.into(),
            value,
            reference,
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    }

    pub fn summary(&self) -> Summary {
        let pass_count = self.rows.iter().filter(|r| r.pass).count();
        Summary {
            suite: self.suite.clone(),
            pass_count,
            fail_count: self.rows.len() - pass_count,
            max_residual: self.rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        }
    }

    pub fn write(&self, out: &Path) -> io::Result<()> {
        fs::create_dir_all(out)?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(out.join("report.csv"))?;
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let json = serde_json::to_string_pretty(&self.summary())?;
        fs::write(out.join("summary.json"), json + "\n")
    }
}
