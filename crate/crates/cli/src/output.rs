use std::io::Write;
use std::path::{Path, PathBuf};

use b92link::sim::AssumptionFlag;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use crate::config::Config;
use crate::CliError;

/// Shortest decimal that parses back to the same bits.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_to<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Per-command extras recorded in the manifest.
#[derive(Debug, Default, Serialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumption_flags: Vec<AssumptionFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracking: Option<TrackSummary>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackSummary {
    pub rms_residual: f64,
    pub open_loop_rms: f64,
    pub rejection_db: f64,
    pub saturation_fraction: f64,
    pub diverged: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'static str,
    command: &'a str,
    digest: String,
    started_utc: String,
    finished_utc: String,
    outputs: Vec<String>,
    assumption_flags: &'a [AssumptionFlag],
    #[serde(skip_serializing_if = "Option::is_none")]
    tracking: Option<TrackSummary>,
    config: &'a Config,
}

/// `runs/out.csv` → `runs/out.manifest.toml`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.manifest.toml"))
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub struct Emit<'a> {
    pub command: &'a str,
    pub config: &'a Config,
    pub started_utc: String,
    pub out: Option<&'a Path>,
}

impl Emit<'_> {
    /// Writes the table to `--out` with a manifest beside it, or to stdout.
    pub fn table(&self, table: &Table, summary: &Summary) -> Result<(), CliError> {
        let Some(path) = self.out else {
            let stdout = std::io::stdout();
            return table
                .write_to(stdout.lock())
                .map_err(|e| CliError::Runtime(format!("writing CSV to stdout: {e}")));
        };
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        table
            .write_to(std::io::BufWriter::new(file))
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;

        let mpath = manifest_path(path);
        let manifest = Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            digest: self.config.digest(),
            started_utc: self.started_utc.clone(),
            finished_utc: timestamp(),
            outputs: vec![path.display().to_string(), mpath.display().to_string()],
            assumption_flags: &summary.assumption_flags,
            tracking: summary.tracking,
            config: self.config,
        };
        let text = toml::to_string(&manifest)
            .map_err(|e| CliError::Runtime(format!("serializing manifest: {e}")))?;
        std::fs::write(&mpath, text).map_err(|e| CliError::Runtime(format!("{}: {e}", mpath.display())))?;
        eprintln!("wrote {} and {}", path.display(), mpath.display());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 0.1, 1e-15, 2450.0, 1.0 / 3.0, 6.02214076e23, -0.0] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            assert!(!s.contains(','));
        }
        assert_eq!(num(1e-15), "1e-15");
        assert_eq!(num(0.025), "0.025");
    }

    #[test]
    fn manifest_sits_beside_the_csv() {
        assert_eq!(
            manifest_path(Path::new("runs/sweep.csv")),
            PathBuf::from("runs/sweep.manifest.toml")
        );
    }
}
