//! Data ingestion, evaluation metrics, coefficient-file schemas and the CLI
//! subcommand implementations.

pub mod coeffs;
pub mod commands;
pub mod config;
pub mod evaluate;
pub mod flight;

pub use coeffs::{CoefficientDoc, CoeffError, SolveDiagnostics, TrainingMetadata};
pub use commands::{ModelChoice, PipelineError, PlotKind, TrainRow};
pub use config::{AngleUnit, ConfigError, OmegaUnit, PipelineConfig};
pub use evaluate::{evaluate, EvalError, EvalReport};
pub use flight::{
    ingest_flight_csv, write_flight_csv, FlightRecord, IngestError, IngestOptions, IngestReport,
};

use std::io;
use std::path::Path;

/// Write a file atomically: write to a sibling temp file, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
    }
}
