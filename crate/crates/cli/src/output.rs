//! Output files: CSV time series, JSON reports, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use superspin::evolution::ObservableRecord;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Slack allowed by the post-write validator.
pub const VALIDATION_TOL: f64 = 1e-7;

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn subdir(&self, name: &str) -> Result<Self, CliError> {
        Self::create(&self.root.join(name))
    }

    /// Appends another directory's file list, used after running in a subdir.
    pub fn absorb(&mut self, other: OutputDir) {
        self.written.extend(other.written);
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes a time series and re-reads it through [`validate_series`].
    pub fn write_series(
        &mut self,
        name: &str,
        records: &[ObservableRecord],
        cfg: &ScenarioConfig,
    ) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        let header = series_header(cfg);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&header)?;
        for r in records {
            w.write_record(series_row(r, cfg))?;
        }
        w.flush()?;
        drop(w);
        validate_series(&path, &header, cfg.n_sites)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_table(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// Full double precision in scientific notation; `nan` marks undefined values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

const SCALAR_COLUMNS: [&str; 6] = ["R", "Sz", "S2", "s", "var_Sz", "xi_D"];

pub fn series_header(cfg: &ScenarioConfig) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(
        SCALAR_COLUMNS
            .iter()
            .filter(|c| cfg.wants(c))
            .map(|c| c.to_string()),
    );
    if cfg.wants("populations") {
        h.extend((0..=cfg.n_sites).map(|m| format!("pop_m{m}")));
    }
    h
}

fn series_row(r: &ObservableRecord, cfg: &ScenarioConfig) -> Vec<String> {
    let mut row = vec![fmt_f64(r.t)];
    let values = [
        r.emission_rate,
        r.sz_mean,
        r.s2_mean,
        r.spin_length,
        r.var_sz,
        r.xi_d.unwrap_or(f64::NAN),
    ];
    row.extend(
        SCALAR_COLUMNS
            .iter()
            .zip(values)
            .filter(|(c, _)| cfg.wants(c))
            .map(|(_, v)| fmt_f64(v)),
    );
    if cfg.wants("populations") {
        row.extend(r.manifold_populations.iter().map(|&p| fmt_f64(p)));
    }
    row
}

/// Re-reads a written series and checks the header, that every value
/// parses, `R ≥ 0`, `0 ≤ s ≤ N/2` and that populations sum to one.
pub fn validate_series(path: &Path, header: &[String], n_sites: usize) -> Result<(), CliError> {
    let fail = |msg: String| Err(CliError::Numerical(format!("{}: {msg}", path.display())));
    let mut rd = csv::Reader::from_path(path)?;
    let found: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return fail(format!("header {found:?} does not match {header:?}"));
    }
    let col = |name: &str| header.iter().position(|h| h == name);
    let (r_col, s_col) = (col("R"), col("s"));
    let pops: Vec<usize> = (0..=n_sites)
        .filter_map(|m| col(&format!("pop_m{m}")))
        .collect();
    let mut rows = 0;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let values: Vec<f64> = match rec.iter().map(str::parse::<f64>).collect() {
            Ok(v) => v,
            Err(e) => return fail(format!("row {i}: {e}")),
        };
        if values.len() != header.len() {
            return fail(format!("row {i} has {} fields", values.len()));
        }
        if let Some(c) = r_col {
            if !(values[c] >= -VALIDATION_TOL) {
                return fail(format!("row {i}: emission rate {} < 0", values[c]));
            }
        }
        if let Some(c) = s_col {
            if !(values[c] >= -VALIDATION_TOL && values[c] <= n_sites as f64 / 2.0 + VALIDATION_TOL)
            {
                return fail(format!(
                    "row {i}: spin length {} outside [0, N/2]",
                    values[c]
                ));
            }
        }
        if !pops.is_empty() {
            let total: f64 = pops.iter().map(|&c| values[c]).sum();
            if !((total - 1.0).abs() <= VALIDATION_TOL) {
                return fail(format!("row {i}: populations sum to {total}"));
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return fail("no rows".into());
    }
    Ok(())
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub library_version: &'a str,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_seconds: f64,
    /// The configuration actually run, as TOML.
    pub resolved_config: String,
    /// The configuration text as supplied, or the preset name.
    pub source: String,
    pub outputs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use superspin::Spacing;

    fn record(t: f64, r: f64, s: f64, pops: Vec<f64>) -> ObservableRecord {
        ObservableRecord {
            t,
            emission_rate: r,
            sz_mean: 0.0,
            s2_mean: 0.0,
            spin_length: s,
            var_sz: 0.0,
            xi_d: None,
            manifold_populations: pops,
        }
    }

    #[test]
    fn full_precision_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn validator_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::minimal(1, Spacing::new(1, 1).unwrap());
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write_series("ok.csv", &[record(0.0, 1.0, 0.5, vec![0.0, 1.0])], &cfg)
            .unwrap();
        let bad = out.write_series("bad.csv", &[record(0.0, 1.0, 0.5, vec![0.3, 0.3])], &cfg);
        assert!(matches!(bad, Err(CliError::Numerical(_))));
        let bad = out.write_series("bad_s.csv", &[record(0.0, 1.0, 0.9, vec![0.0, 1.0])], &cfg);
        assert!(matches!(bad, Err(CliError::Numerical(_))));
    }

    #[test]
    fn header_lists_populations() {
        let cfg = ScenarioConfig::minimal(2, Spacing::new(1, 1).unwrap());
        assert_eq!(
            series_header(&cfg).join(","),
            "t,R,Sz,S2,s,var_Sz,xi_D,pop_m0,pop_m1,pop_m2"
        );
    }
}
