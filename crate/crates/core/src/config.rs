//! Run configuration: flat `key=value` settings shared by the command line
//! and plain-text config files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{SyntheticSpec, MAX_HASH_BITS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    /// Variance-reduced gradients fed to the configured online learner.
    SvrgOl,
    /// One sample per learner step.
    Sgd,
    /// `batch` samples averaged in parallel per learner step.
    Minibatch,
    /// The SVRG-OL loop with a constant-step learner and no compensation.
    SvrgConst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerKind {
    AdaGrad,
    Coin,
    Const,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Doubling epochs, constant batch size (`T^2` by default).
    Theory,
    /// Doubling epochs, batch size `ceil(T^(4/3))`.
    TheoryFirstOrder,
    /// Constant epochs of length `t1`, batch size `k * c` in epoch `k`.
    Practical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Switch {
    On,
    Off,
    /// On exactly when the domain is unbounded.
    Auto,
}

macro_rules! keyword_enum {
    ($ty:ident { $($name:literal => $variant:ident),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} {other:?} (expected one of: {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let name = match self {
                    $($ty::$variant => $name,)+
                };
                f.write_str(name)
            }
        }
    };
}

keyword_enum!(Algo { "svrg-ol" => SvrgOl, "sgd" => Sgd, "minibatch" => Minibatch, "svrg-const" => SvrgConst });
keyword_enum!(LearnerKind { "adagrad" => AdaGrad, "coin" => Coin, "const" => Const });
keyword_enum!(ScheduleMode { "theory" => Theory, "theory-firstorder" => TheoryFirstOrder, "practical" => Practical });

impl FromStr for Switch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" | "true" | "1" | "yes" => Ok(Switch::On),
            "off" | "false" | "0" | "no" => Ok(Switch::Off),
            "auto" => Ok(Switch::Auto),
            other => Err(Error::Config(format!("expected on/off/auto, got {other:?}"))),
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algo: Algo,
    pub learner: LearnerKind,
    pub schedule: ScheduleMode,
    /// First (practical: every) serial epoch length.
    pub t1: u64,
    /// Practical batch-size constant: epoch `k` uses `k * c` samples.
    pub c: u64,
    pub k_max: u64,
    /// Fixed batch size for the theory schedules; defaults to `T^2`.
    pub n_hat: Option<u64>,
    /// Total sample budget `N` (batch plus serial draws).
    pub budget: Option<u64>,
    /// Serial budget `T` for the theory schedules; the last epoch is truncated.
    pub serial_budget: Option<u64>,
    /// Minibatch size for `Algo::Minibatch`.
    pub batch: u64,
    pub eta: Option<f64>,
    pub diameter: Option<f64>,
    pub epsilon: f64,
    pub workers: usize,
    pub block_size: usize,
    pub hash_bits: u32,
    pub seed: u64,
    pub compensate: Switch,
    pub sparse_combine: bool,
    /// Replace the batch phase's sampling by a full pass over the data.
    pub full_batch: bool,
    /// Record wall-clock time. Off by default: `wall_ms` is then written as
    /// zero and repeated runs produce byte-identical output.
    pub timing: bool,
    /// Steps between evaluation rows for the `sgd` and `minibatch` baselines;
    /// defaults to `t1`.
    pub log_every: Option<u64>,
    pub data: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub out: Option<PathBuf>,
    pub wstar: Option<PathBuf>,
    pub weights_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algo: Algo::SvrgOl,
            learner: LearnerKind::AdaGrad,
            schedule: ScheduleMode::Practical,
            t1: 64,
            c: 64,
            k_max: 16,
            n_hat: None,
            budget: None,
            serial_budget: None,
            batch: 64,
            eta: None,
            diameter: None,
            epsilon: 1e-12,
            workers: 1,
            block_size: 4096,
            hash_bits: 23,
            seed: 1,
            compensate: Switch::Auto,
            sparse_combine: true,
            full_batch: false,
            timing: false,
            log_every: None,
            data: None,
            test: None,
            synthetic: None,
            out: None,
            wstar: None,
            weights_out: None,
        }
    }
}

const BOOL_KEYS: &[&str] = &["compensate", "sparse-combine", "full-batch", "timing"];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.parse::<Switch>()? {
        Switch::On => Ok(true),
        Switch::Off => Ok(false),
        Switch::Auto => Err(Error::Config(format!("{key} does not accept auto"))),
    }
}

fn parse_optional_f64(key: &str, value: &str) -> Result<Option<f64>> {
    match value {
        "none" | "inf" | "unbounded" => Ok(None),
        v => parse_num(key, v).map(Some),
    }
}

/// Parses `dim=20,n=16384[,sparsity=5,wnorm=3,test=4096]`.
pub fn parse_synthetic(spec: &str) -> Result<SyntheticSpec> {
    let mut dim = None;
    let mut n = None;
    let mut sparsity = None;
    let mut w_norm = None;
    let mut n_test = None;
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("malformed synthetic field {part:?}")))?;
        match k.trim() {
            "dim" => dim = Some(parse_num("synthetic dim", v)?),
            "n" => n = Some(parse_num("synthetic n", v)?),
            "sparsity" => sparsity = Some(parse_num("synthetic sparsity", v)?),
            "wnorm" => w_norm = Some(parse_num("synthetic wnorm", v)?),
            "test" => n_test = Some(parse_num("synthetic test", v)?),
            other => return Err(Error::Config(format!("unknown synthetic field {other:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Config("synthetic spec needs dim=".into()))?;
    let n = n.ok_or_else(|| Error::Config("synthetic spec needs n=".into()))?;
    let mut s = SyntheticSpec::new(dim, n);
    if let Some(v) = sparsity {
        s.sparsity = v;
    }
    if let Some(v) = w_norm {
        s.w_norm = v;
    }
    if let Some(v) = n_test {
        s.n_test = v;
    }
    Ok(s)
}

impl RunConfig {
    /// Applies one `key=value` setting. Keys are the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "algo" => self.algo = value.parse()?,
            "learner" => self.learner = value.parse()?,
            "schedule" => self.schedule = value.parse()?,
            "t1" => self.t1 = parse_num(key, value)?,
            "c" => self.c = parse_num(key, value)?,
            "kmax" => self.k_max = parse_num(key, value)?,
            "nhat" => self.n_hat = Some(parse_num(key, value)?),
            "budget" => self.budget = Some(parse_num(key, value)?),
            "budget-t" => self.serial_budget = Some(parse_num(key, value)?),
            "batch" => self.batch = parse_num(key, value)?,
            "eta" => self.eta = Some(parse_num(key, value)?),
            "diameter" => self.diameter = parse_optional_f64(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "block-size" => self.block_size = parse_num(key, value)?,
            "hash-bits" => self.hash_bits = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "compensate" => self.compensate = value.parse()?,
            "sparse-combine" => self.sparse_combine = parse_bool(key, value)?,
            "full-batch" => self.full_batch = parse_bool(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            "log-every" => self.log_every = Some(parse_num(key, value)?),
            "data" => self.data = Some(PathBuf::from(value)),
            "test" => self.test = Some(PathBuf::from(value)),
            "synthetic" => self.synthetic = Some(parse_synthetic(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "wstar" => self.wstar = Some(PathBuf::from(value)),
            "weights-out" => self.weights_out = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every `key=value` line of a config text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
            self.set(k.trim().trim_start_matches("--"), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Parses command-line flags: `--key value`, `--key=value`, bare boolean
    /// flags, and `--config <file>` applied in place.
    pub fn from_args<I, S>(args: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        let mut cfg = RunConfig::default();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let flag = arg
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("unexpected argument {arg:?}")))?;
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let next = args.get(i + 1).filter(|n| !n.starts_with("--"));
                    match next {
                        Some(v) => {
                            i += 1;
                            (flag.to_string(), v.clone())
                        }
                        None if BOOL_KEYS.contains(&flag) => (flag.to_string(), "on".to_string()),
                        None => return Err(Error::Config(format!("missing value for --{flag}"))),
                    }
                }
            };
            if key == "config" {
                cfg.apply_file(&value)?;
            } else {
                cfg.set(&key, &value)?;
            }
            i += 1;
        }
        Ok(cfg)
    }

    /// Checks ranges and that exactly one data source is configured.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match (&self.data, &self.synthetic) {
            (Some(_), Some(_)) => return bad("give either --data or --synthetic, not both".into()),
            (None, None) => return bad("no data source: give --data or --synthetic".into()),
            _ => {}
        }
        if self.synthetic.is_some() && self.test.is_some() {
            return bad("--test applies to --data runs only".into());
        }
        if let Some(s) = &self.synthetic {
            if s.dim == 0 || s.n == 0 || s.sparsity > s.dim {
                return bad(format!("invalid synthetic spec {s:?}"));
            }
        }
        if !(1..=MAX_HASH_BITS).contains(&self.hash_bits) {
            return bad(format!("hash-bits must be in [1, {MAX_HASH_BITS}]"));
        }
        for (name, v) in [
            ("c", self.c),
            ("kmax", self.k_max),
            ("batch", self.batch),
            ("workers", self.workers as u64),
            ("block-size", self.block_size as u64),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        for (name, v) in [
            ("nhat", self.n_hat),
            ("budget", self.budget),
            ("log-every", self.log_every),
        ] {
            if v == Some(0) {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if let Some(d) = self.diameter {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("diameter must be positive, got {d}"));
            }
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return bad(format!("eta must be finite and >= 0, got {eta}"));
            }
        }
        if !(self.epsilon >= 0.0) {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if self.algo == Algo::SvrgConst && self.eta.is_none() {
            return bad("svrg-const needs --eta".into());
        }
        if self.learner == LearnerKind::Const && self.eta.is_none() && self.algo != Algo::SvrgConst {
            return bad("learner const needs --eta".into());
        }
        Ok(())
    }

    /// Whether bias compensation is active for this run.
    pub fn compensation_enabled(&self) -> bool {
        match self.compensate {
            Switch::On => true,
            Switch::Off => false,
            Switch::Auto => self.diameter.is_none(),
        }
    }
}
