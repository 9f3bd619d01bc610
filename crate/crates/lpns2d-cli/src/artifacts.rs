//! Run artifacts: the key=value manifest, the results table, and plots.
//!
//! The table carries only reproducible numbers, printed losslessly, so two
//! correct runs diff clean byte for byte. Volatile metadata (wall time,
//! thread count, status) lives in the manifest.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// Floating-point cell format: 17 significant digits round-trip f64
/// exactly.
pub fn fnum(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Artifacts {
    manifest: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<String>,
    plots: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new(command: &str) -> Artifacts {
        let mut a = Artifacts {
            manifest: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            plots: Vec::new(),
        };
        a.set("tool", format!("lpns2d {}", env!("CARGO_PKG_VERSION")));
        a.set("command", command);
        a
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.manifest.push((key.to_string(), value.to_string()));
    }

    /// Provenance of one table column as a module/operation/lattice triple.
    pub fn trace(&mut self, column: &str, module: &str, operation: &str, lattice: &str) {
        self.set(
            &format!("trace.results.csv.{column}"),
            format!("{module}/{operation}/{lattice}"),
        );
    }

    pub fn columns(&mut self, cols: &[&str]) {
        self.columns = cols.iter().map(|s| s.to_string()).collect();
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns.len(), "row width differs from header");
        self.rows.push(fields.join(","));
    }

    pub fn plot(&mut self, name: &str, body: String) {
        self.plots.push((name.to_string(), body));
    }

    /// The table as it will be written, for echoing to the terminal.
    pub fn table(&self) -> String {
        let mut s = self.columns.join(",");
        for r in &self.rows {
            s.push('\n');
            s.push_str(r);
        }
        s.push('\n');
        s
    }

    pub fn write(
        mut self,
        dir: &Path,
        status: &str,
        wall_seconds: f64,
        emit_plots: bool,
    ) -> Result<()> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        fs::write(dir.join("results.csv"), self.table())
            .with_context(|| format!("writing {}", dir.join("results.csv").display()))?;
        if emit_plots {
            for (name, body) in &self.plots {
                fs::write(dir.join(name), body)
                    .with_context(|| format!("writing {}", dir.join(name).display()))?;
            }
        }
        self.set("status", status);
        self.set("wall_seconds", format!("{wall_seconds:.3}"));
        let mut m = String::new();
        for (k, v) in &self.manifest {
            m.push_str(k);
            m.push('=');
            m.push_str(v);
            m.push('\n');
        }
        fs::write(dir.join("manifest.txt"), m)
            .with_context(|| format!("writing {}", dir.join("manifest.txt").display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_round_trip_exactly() {
        for x in [1.0 / 3.0, 2.0f64.sqrt(), 1e-300, -7.25e17, 3.001070333931e-3] {
            let s = fnum(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn table_shape_is_enforced() {
        let mut a = Artifacts::new("demo");
        a.columns(&["n", "value"]);
        a.row(&["4".into(), fnum(0.5)]);
        let t = a.table();
        assert!(t.starts_with("n,value\n4,"));
        assert!(t.ends_with('\n'));
    }
}
