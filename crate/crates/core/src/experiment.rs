//! Experiment harness: data loading, algorithm dispatch and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use log::{error, info};

use crate::config::RunConfig;
use crate::data::{gen_synthetic_split, Dataset};
use crate::driver::{run, Evaluation, PhaseRecord, RunMetrics};
use crate::error::{Error, Result};
use crate::linalg::DenseVector;

pub const CSV_HEADER: &str = "phase,epoch,rounds,samples_seen,train_loss,test_loss,auc,subopt,wall_ms";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
        Error::Diverged { .. } => EXIT_DIVERGED,
        _ => EXIT_USAGE,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn csv_row(r: &PhaseRecord) -> String {
    format!(
        "{},{},{},{},{:e},{},{},{},{:.3}",
        r.phase.as_str(),
        r.epoch,
        r.rounds,
        r.samples_seen,
        r.train_loss,
        opt(r.test_loss),
        opt(r.auc),
        opt(r.subopt),
        r.wall_ms
    )
}

/// Full CSV document for a run, header included.
pub fn to_csv(records: &[PhaseRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", csv_row(r));
    }
    out
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One coordinate per line, full round-trip precision.
pub fn write_weights(path: &Path, w: &DenseVector) -> Result<()> {
    let mut text = String::with_capacity(24 * w.dim());
    for x in w.iter() {
        let _ = writeln!(text, "{x:e}");
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_weights(path: &Path, dim: usize) -> Result<DenseVector> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut w = Vec::with_capacity(dim);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let x: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("bad weight {line:?}"),
        })?;
        w.push(x);
    }
    Error::check_dim(dim, w.len())?;
    Ok(DenseVector::from_vec(w))
}

/// Training data, optional test data and an optional reference optimum.
pub fn load_data(cfg: &RunConfig) -> Result<(Dataset, Option<Dataset>, Option<DenseVector>)> {
    let (train, test) = match (&cfg.data, &cfg.synthetic) {
        (Some(path), None) => {
            let train = Dataset::load_libsvm(path, cfg.hash_bits)?;
            let test = cfg
                .test
                .as_ref()
                .map(|p| Dataset::load_libsvm(p, cfg.hash_bits))
                .transpose()?;
            (train, test)
        }
        (None, Some(spec)) => {
            let (train, test, _) = gen_synthetic_split(spec, cfg.seed)?;
            (train, test)
        }
        _ => return Err(Error::Config("exactly one data source required".into())),
    };
    let w_star = cfg.wstar.as_ref().map(|p| read_weights(p, train.dim())).transpose()?;
    Ok((train, test, w_star))
}

fn write_output(cfg: &RunConfig, csv: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, csv).map_err(|e| io_err(path, e)),
        None => io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

/// Validates, runs and writes the CSV; returns the records and final model.
/// On divergence the partial CSV is written before the error is returned.
pub fn execute(cfg: &RunConfig) -> Result<(DenseVector, RunMetrics)> {
    cfg.validate()?;
    let (train, test, w_star) = load_data(cfg)?;
    info!(
        "{} / {}: {} training examples, dim {}",
        cfg.algo,
        cfg.learner,
        train.len(),
        train.dim()
    );
    let eval = Evaluation {
        test: test.as_ref(),
        w_star: w_star.as_ref(),
    };
    match run(cfg, &train, eval) {
        Ok((w, metrics)) => {
            write_output(cfg, &to_csv(&metrics.records))?;
            if let Some(path) = &cfg.weights_out {
                write_weights(path, &w)?;
            }
            Ok((w, metrics))
        }
        Err(Error::Diverged { reason, metrics }) => {
            write_output(cfg, &to_csv(&metrics.records))?;
            Err(Error::Diverged { reason, metrics })
        }
        Err(e) => Err(e),
    }
}

/// Runs a configured experiment and maps the outcome to an exit code.
pub fn run_experiment(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            error!("{e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Phase;

    #[test]
    fn csv_formatting() {
        let r = PhaseRecord {
            phase: Phase::Batch,
            epoch: 1,
            rounds: 1,
            samples_seen: 64,
            train_loss: 0.5,
            test_loss: None,
            auc: Some(0.75),
            subopt: None,
            wall_ms: 0.0,
        };
        assert_eq!(csv_row(&r), "batch,1,1,64,5e-1,,7.5e-1,,0.000");
        let doc = to_csv(&[r]);
        assert!(doc.starts_with(CSV_HEADER));
        assert!(doc.ends_with('\n') && !doc.contains('\r'));
    }

    #[test]
    fn weights_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.txt");
        let w: DenseVector = vec![0.1, -2.5e-300, 3.0].into();
        write_weights(&p, &w).unwrap();
        assert_eq!(read_weights(&p, 3).unwrap(), w);
        assert!(read_weights(&p, 2).is_err());
    }

    #[test]
    fn exit_codes() {
        let mut cfg = RunConfig::default();
        assert_eq!(run_experiment(&cfg), EXIT_USAGE);
        cfg.data = Some("/nonexistent/train.svm".into());
        assert_eq!(run_experiment(&cfg), EXIT_IO);
    }
}
