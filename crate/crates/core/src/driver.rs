//! The SVRG-OL outer loop and the baselines it is compared against.
//!
//! Each epoch has a batch phase (a parallel batch gradient at the anchor,
//! one communication round) and a serial phase (the online learner consumes
//! variance-reduced gradients). The next anchor is the mean of the epoch's
//! iterates and the returned model is the mean of all serial iterates.

use std::time::Instant;

use log::{debug, info};

use crate::config::{Algo, LearnerKind, RunConfig, ScheduleMode};
use crate::data::{Dataset, Example, StreamSampler};
use crate::error::{Error, Result};
use crate::learner::{bias_compensate, AdaGrad, Ball, CoinBetting, ConstantStep, Gradient, OnlineLearner};
use crate::linalg::DenseVector;
use crate::loss::{estimate_constants, logistic_grad, ProblemMeta};
use crate::metrics::{average_loss, dataset_auc};
use crate::vr::{batch_error_bound, combine_dense, combine_sparse, BatchEngine};

/// Serial length and batch size of one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpochPlan {
    pub serial_len: u64,
    pub batch_size: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochSchedule {
    pub mode: ScheduleMode,
    pub t1: u64,
    pub k_max: u64,
    /// Practical mode: epoch `k` uses `k * c` batch samples.
    pub c: u64,
    /// Theory modes: the fixed batch size.
    pub n_hat: u64,
    /// Theory modes: serial steps across all epochs; the last epoch is cut
    /// to fit.
    pub serial_budget: Option<u64>,
}

/// Smallest `n` with `n^3 >= t^4`, i.e. `ceil(t^(4/3))` without rounding error.
fn ceil_four_thirds(t: u64) -> u64 {
    let target = (t as u128).pow(4);
    let mut n = ((t as f64).powf(4.0 / 3.0).ceil() as u128).max(1);
    while n > 1 && (n - 1).pow(3) >= target {
        n -= 1;
    }
    while n.pow(3) < target {
        n += 1;
    }
    n as u64
}

/// Serial steps in `k` doubling epochs starting at `t1`.
fn doubling_total(t1: u64, k: u64) -> u64 {
    let factor = 1u64.checked_shl(k.min(63) as u32).unwrap_or(u64::MAX).saturating_sub(1);
    t1.saturating_mul(factor)
}

impl EpochSchedule {
    pub fn practical(t1: u64, c: u64, k_max: u64) -> Self {
        EpochSchedule {
            mode: ScheduleMode::Practical,
            t1,
            k_max,
            c,
            n_hat: 0,
            serial_budget: None,
        }
    }

    /// Doubling epochs with a fixed batch size; `n_hat` defaults to `T^2`
    /// for the planned serial total `T`.
    pub fn theory(t1: u64, k_max: u64, n_hat: Option<u64>, serial_budget: Option<u64>) -> Self {
        let mut s = EpochSchedule {
            mode: ScheduleMode::Theory,
            t1,
            k_max,
            c: 0,
            n_hat: 0,
            serial_budget,
        };
        let t = s.planned_serial_total();
        s.n_hat = n_hat.unwrap_or_else(|| t.saturating_mul(t)).max(1);
        s
    }

    /// Doubling epochs with batch size `ceil(T^(4/3))`, suited to learners
    /// whose regret scales with the root of summed gradient norms.
    pub fn theory_first_order(t1: u64, k_max: u64, n_hat: Option<u64>, serial_budget: Option<u64>) -> Self {
        let mut s = EpochSchedule::theory(t1, k_max, Some(1), serial_budget);
        s.mode = ScheduleMode::TheoryFirstOrder;
        s.n_hat = n_hat
            .unwrap_or_else(|| ceil_four_thirds(s.planned_serial_total()))
            .max(1);
        s
    }

    pub fn from_config(cfg: &RunConfig) -> Self {
        match cfg.schedule {
            ScheduleMode::Practical => EpochSchedule::practical(cfg.t1, cfg.c, cfg.k_max),
            ScheduleMode::Theory => EpochSchedule::theory(cfg.t1, cfg.k_max, cfg.n_hat, cfg.serial_budget),
            ScheduleMode::TheoryFirstOrder => {
                EpochSchedule::theory_first_order(cfg.t1, cfg.k_max, cfg.n_hat, cfg.serial_budget)
            }
        }
    }

    /// Total serial steps the schedule will run if nothing stops it early.
    pub fn planned_serial_total(&self) -> u64 {
        match (self.mode, self.serial_budget) {
            (ScheduleMode::Practical, _) => self.t1.saturating_mul(self.k_max),
            (_, None) => doubling_total(self.t1, self.k_max),
            (_, Some(_)) => self.budgeted_epochs().map(|p| p.serial_len).sum(),
        }
    }

    /// Number of epochs the schedule will run.
    pub fn planned_epochs(&self) -> u64 {
        match (self.mode, self.serial_budget) {
            (ScheduleMode::Practical, _) | (_, None) => self.k_max,
            (_, Some(_)) => self.budgeted_epochs().count() as u64,
        }
    }

    fn budgeted_epochs(&self) -> impl Iterator<Item = EpochPlan> + '_ {
        (1..=self.k_max).map_while(|k| self.next_epoch(k).ok())
    }

    /// Plan for epoch `k` (1-based).
    ///
    /// Under a serial budget `T` the doubling epochs are cut to fit, and an
    /// epoch only starts while at least `T1` steps remain, which gives
    /// exactly `floor(log2(T / T1)) + 1` epochs.
    pub fn next_epoch(&self, k: u64) -> Result<EpochPlan> {
        if k == 0 {
            return Err(Error::invalid("epochs are numbered from 1"));
        }
        let exhausted = Err(Error::ScheduleExhausted { k, k_max: self.k_max });
        if k > self.k_max {
            return exhausted;
        }
        match self.mode {
            ScheduleMode::Practical => Ok(EpochPlan {
                serial_len: self.t1,
                batch_size: k.saturating_mul(self.c),
            }),
            ScheduleMode::Theory | ScheduleMode::TheoryFirstOrder => {
                let doubled = 1u64
                    .checked_shl((k - 1).min(63) as u32)
                    .map_or(u64::MAX, |f| self.t1.saturating_mul(f));
                let serial_len = match self.serial_budget {
                    Some(budget) if self.t1 > 0 => {
                        let remaining = budget.saturating_sub(doubling_total(self.t1, k - 1));
                        if remaining < self.t1 {
                            return exhausted;
                        }
                        doubled.min(remaining)
                    }
                    _ => doubled,
                };
                Ok(EpochPlan {
                    serial_len,
                    batch_size: self.n_hat,
                })
            }
        }
    }
}

/// Coordinatewise mean of a non-empty sequence of iterates.
pub fn anchor_average(iterates: &[DenseVector]) -> Result<DenseVector> {
    let first = iterates
        .first()
        .ok_or_else(|| Error::invalid("cannot average an empty sequence"))?;
    let mut sum = DenseVector::zeros(first.dim());
    for w in iterates {
        sum.axpy(1.0, w)?;
    }
    sum.scale(1.0 / iterates.len() as f64);
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Batch,
    Serial,
    Minibatch,
    Final,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Batch => "batch",
            Phase::Serial => "serial",
            Phase::Minibatch => "minibatch",
            Phase::Final => "final",
        }
    }
}

/// Evaluation snapshot at a phase boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRecord {
    pub phase: Phase,
    pub epoch: u64,
    pub rounds: u64,
    pub samples_seen: u64,
    /// Training loss of the averaged iterate.
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    /// AUC on the test set when given, otherwise on the training set.
    pub auc: Option<f64>,
    pub subopt: Option<f64>,
    /// Cumulative optimisation wall time, evaluation excluded.
    pub wall_ms: f64,
}

/// Ledger of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMetrics {
    /// Communication rounds: one per batch-gradient computation.
    pub rounds: u64,
    pub samples_seen: u64,
    pub batch_samples: u64,
    pub serial_samples: u64,
    /// Draws made by the stream samplers, plus examples enumerated by a
    /// full-batch phase.
    pub sampler_draws: u64,
    pub records: Vec<PhaseRecord>,
    pub clip_count: u64,
    pub budget_exhausted: bool,
}

impl RunMetrics {
    pub fn last(&self) -> Option<&PhaseRecord> {
        self.records.last()
    }
}

/// Held-out data and reference optimum used for reporting only.
#[derive(Clone, Copy, Debug, Default)]
pub struct Evaluation<'a> {
    pub test: Option<&'a Dataset>,
    pub w_star: Option<&'a DenseVector>,
}

const DIVERGENCE_FACTOR: f64 = 10.0;

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix-style mixing keeps the streams of nearby seeds unrelated
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const BATCH_STREAM: u64 = 1;
const SERIAL_STREAM: u64 = 2;

/// Builds the configured learner. `grad_bound` is the coin-betting scale.
pub fn build_learner(
    kind: LearnerKind,
    cfg: &RunConfig,
    dim: usize,
    grad_bound: f64,
) -> Result<Box<dyn OnlineLearner>> {
    let ball = cfg.diameter.map(|d| Ball::at_origin(dim, d)).transpose()?;
    Ok(match kind {
        LearnerKind::AdaGrad => {
            let eta = cfg.eta.unwrap_or_else(|| AdaGrad::default_eta(ball.as_ref()));
            Box::new(AdaGrad::new(dim, eta, cfg.epsilon, ball)?)
        }
        LearnerKind::Coin => {
            let scale = if grad_bound > 0.0 { grad_bound } else { 1.0 };
            Box::new(CoinBetting::new(dim, scale, ball)?)
        }
        LearnerKind::Const => {
            let eta = cfg
                .eta
                .ok_or_else(|| Error::Config("constant-step learner needs eta".into()))?;
            Box::new(ConstantStep::new(dim, eta, ball)?)
        }
    })
}

/// Shared bookkeeping for every algorithm: timing, evaluation, divergence.
struct Tracker<'a> {
    cfg: &'a RunConfig,
    data: &'a Dataset,
    eval: Evaluation<'a>,
    metrics: RunMetrics,
    elapsed_ms: f64,
    phase_start: Option<Instant>,
    initial_loss: f64,
    iterate_sum: DenseVector,
    iterate_count: u64,
    initial_point: DenseVector,
}

impl<'a> Tracker<'a> {
    fn new(cfg: &'a RunConfig, data: &'a Dataset, eval: Evaluation<'a>, w1: &DenseVector) -> Result<Self> {
        let initial_loss = average_loss(w1, data)?;
        Ok(Tracker {
            cfg,
            data,
            eval,
            metrics: RunMetrics::default(),
            elapsed_ms: 0.0,
            phase_start: None,
            initial_loss,
            iterate_sum: DenseVector::zeros(w1.dim()),
            iterate_count: 0,
            initial_point: w1.clone(),
        })
    }

    fn start(&mut self) {
        if self.cfg.timing {
            self.phase_start = Some(Instant::now());
        }
    }

    fn stop(&mut self) {
        if let Some(t) = self.phase_start.take() {
            self.elapsed_ms += t.elapsed().as_secs_f64() * 1e3;
        }
    }

    #[inline]
    fn add_iterate(&mut self, w: &DenseVector) -> Result<()> {
        self.iterate_count += 1;
        self.iterate_sum.axpy(1.0, w)
    }

    fn average_iterate(&self) -> DenseVector {
        if self.iterate_count == 0 {
            return self.initial_point.clone();
        }
        let mut w = self.iterate_sum.clone();
        w.scale(1.0 / self.iterate_count as f64);
        w
    }

    fn record(&mut self, phase: Phase, epoch: u64) -> Result<()> {
        let w = self.average_iterate();
        let train_loss = average_loss(&w, self.data)?;
        let test_loss = match self.eval.test {
            Some(t) if !t.is_empty() => Some(average_loss(&w, t)?),
            _ => None,
        };
        let auc_set = self.eval.test.filter(|t| !t.is_empty()).unwrap_or(self.data);
        let auc = if w.is_finite() {
            dataset_auc(&w, auc_set).ok()
        } else {
            None
        };
        let subopt = match self.eval.w_star {
            Some(ws) => Some(train_loss - average_loss(ws, self.data)?),
            None => None,
        };
        let rec = PhaseRecord {
            phase,
            epoch,
            rounds: self.metrics.rounds,
            samples_seen: self.metrics.samples_seen,
            train_loss,
            test_loss,
            auc,
            subopt,
            wall_ms: if self.cfg.timing { self.elapsed_ms } else { 0.0 },
        };
        debug!("{:?}", rec);
        self.metrics.records.push(rec);
        Ok(())
    }

    /// Aborts on a non-finite iterate or a training loss above ten times
    /// the initial loss.
    fn check_divergence(&mut self, w: &DenseVector, epoch: u64) -> Result<()> {
        let reason = if !w.is_finite() {
            Some("iterate has non-finite coordinates".to_string())
        } else {
            let loss = average_loss(w, self.data)?;
            (!loss.is_finite() || loss > DIVERGENCE_FACTOR * self.initial_loss).then(|| {
                format!(
                    "training loss {loss} exceeds {DIVERGENCE_FACTOR} x initial loss {}",
                    self.initial_loss
                )
            })
        };
        match reason {
            None => Ok(()),
            Some(reason) => {
                let reason = format!("epoch {epoch}: {reason}");
                info!("divergence: {reason}");
                if self.average_iterate().is_finite() {
                    self.record(Phase::Final, epoch)?;
                }
                Err(Error::Diverged {
                    reason,
                    metrics: Box::new(std::mem::take(&mut self.metrics)),
                })
            }
        }
    }

    fn finish(mut self, epoch: u64, clip_count: u64, draws: u64) -> Result<(DenseVector, RunMetrics)> {
        self.metrics.clip_count = clip_count;
        self.metrics.sampler_draws = draws;
        self.record(Phase::Final, epoch)?;
        Ok((self.average_iterate(), self.metrics))
    }
}

/// Runs SVRG-OL with the learner named in `cfg`.
pub fn run_svrg_ol(cfg: &RunConfig, data: &Dataset, eval: Evaluation<'_>) -> Result<(DenseVector, RunMetrics)> {
    let kind = if cfg.algo == Algo::SvrgConst {
        LearnerKind::Const
    } else {
        cfg.learner
    };
    let meta = estimate_constants(data);
    let schedule = EpochSchedule::from_config(cfg);
    let compensate = cfg.compensation_enabled() && cfg.algo != Algo::SvrgConst;
    // batch gradients are bounded by G, the two per-sample terms differ by at most G per coordinate
    let first_bias = if compensate {
        let n1 = if cfg.full_batch {
            data.len() as u64
        } else {
            schedule.next_epoch(1).map_or(1, |p| p.batch_size)
        };
        compensation_bound(&meta, &schedule, n1)
    } else {
        0.0
    };
    let learner = build_learner(kind, cfg, data.dim(), 2.0 * meta.lipschitz + first_bias)?;
    run_svrg_ol_with(cfg, data, eval, learner, compensate)
}

/// Runs the classic constant-step SVRG loop: the same epochs as SVRG-OL, a
/// constant-step learner with `cfg.eta`, and no bias compensation.
pub fn run_classic_svrg(cfg: &RunConfig, data: &Dataset, eval: Evaluation<'_>) -> Result<(DenseVector, RunMetrics)> {
    let eta = cfg
        .eta
        .ok_or_else(|| Error::Config("classic SVRG needs a step size (eta)".into()))?;
    let ball = cfg.diameter.map(|d| Ball::at_origin(data.dim(), d)).transpose()?;
    let learner = Box::new(ConstantStep::new(data.dim(), eta, ball)?);
    run_svrg_ol_with(cfg, data, eval, learner, false)
}

fn compensation_bound(meta: &ProblemMeta, schedule: &EpochSchedule, batch_size: u64) -> f64 {
    let t = schedule.planned_serial_total().max(2);
    let k = schedule.planned_epochs().max(1);
    batch_error_bound(meta.lipschitz, k, 1.0 / t as f64, batch_size.max(1))
}

/// The SVRG-OL loop around an arbitrary online learner.
pub fn run_svrg_ol_with(
    cfg: &RunConfig,
    data: &Dataset,
    eval: Evaluation<'_>,
    mut learner: Box<dyn OnlineLearner>,
    compensate: bool,
) -> Result<(DenseVector, RunMetrics)> {
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    Error::check_dim(data.dim(), learner.current().dim())?;
    let schedule = EpochSchedule::from_config(cfg);
    let meta = estimate_constants(data);
    let engine = BatchEngine::new(cfg.workers, cfg.block_size)?;
    let mut batch_sampler = StreamSampler::new(data, derive_seed(cfg.seed, BATCH_STREAM));
    let mut serial_sampler = StreamSampler::new(data, derive_seed(cfg.seed, SERIAL_STREAM));

    let mut v = learner.current().clone();
    let mut tracker = Tracker::new(cfg, data, eval, &v)?;
    let mut epoch_sum = DenseVector::zeros(data.dim());
    let mut last_epoch = 0;
    let mut enumerated = 0;

    for k in 1..=schedule.k_max {
        let plan = match schedule.next_epoch(k) {
            Ok(p) => p,
            Err(Error::ScheduleExhausted { .. }) => break,
            Err(e) => return Err(e),
        };
        let batch_size = if cfg.full_batch {
            data.len() as u64
        } else {
            plan.batch_size
        };
        if let Some(budget) = cfg.budget {
            if tracker.metrics.samples_seen + batch_size + plan.serial_len > budget {
                tracker.metrics.budget_exhausted = true;
                info!("sample budget {budget} exhausted before epoch {k}");
                break;
            }
        }
        last_epoch = k;

        // batch phase
        tracker.start();
        let samples: Vec<&Example> = if cfg.full_batch {
            enumerated += batch_size;
            data.examples().iter().collect()
        } else {
            batch_sampler.take(batch_size as usize)?
        };
        let (batch_grad, stats) = engine.gradient(&v, &samples)?;
        drop(samples);
        tracker.metrics.rounds += 1;
        tracker.metrics.batch_samples += batch_size;
        tracker.metrics.samples_seen += batch_size;
        let bias = if compensate {
            compensation_bound(&meta, &schedule, batch_size)
        } else {
            0.0
        };
        tracker.stop();
        tracker.record(Phase::Batch, k)?;

        // serial phase
        tracker.start();
        epoch_sum.scale(0.0);
        for _ in 0..plan.serial_len {
            let e = serial_sampler.next_sample()?;
            let w = learner.current();
            let grad_w = logistic_grad(w, e)?;
            let grad_v = logistic_grad(&v, e)?;
            let g = if cfg.sparse_combine {
                Gradient::Sparse(combine_sparse(&grad_w, &grad_v, &batch_grad, &stats)?)
            } else {
                Gradient::Dense(combine_dense(&grad_w, &grad_v, &batch_grad)?)
            };
            let g = if compensate { bias_compensate(g, w, bias)? } else { g };
            epoch_sum.axpy(1.0, w)?;
            tracker.add_iterate(w)?;
            learner.update(&g)?;
        }
        tracker.metrics.serial_samples += plan.serial_len;
        tracker.metrics.samples_seen += plan.serial_len;
        if plan.serial_len > 0 {
            v = epoch_sum.clone();
            v.scale(1.0 / plan.serial_len as f64);
        }
        tracker.stop();
        tracker.check_divergence(learner.current(), k)?;
        tracker.record(Phase::Serial, k)?;
        debug!("epoch {k}: T_k = {}, N_k = {batch_size}", plan.serial_len);
    }
    let draws = batch_sampler.samples_drawn() + serial_sampler.samples_drawn() + enumerated;
    tracker.finish(last_epoch, learner.clip_count(), draws)
}

fn baseline_budget(cfg: &RunConfig) -> u64 {
    cfg.budget.unwrap_or_else(|| {
        EpochSchedule::practical(cfg.t1, cfg.c, cfg.k_max)
            .planned_serial_total()
            .max(1)
    })
}

/// Plain serial SGD with the configured learner: one sample per step,
/// `budget` steps, no communication.
pub fn run_sgd(cfg: &RunConfig, data: &Dataset, eval: Evaluation<'_>) -> Result<(DenseVector, RunMetrics)> {
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let meta = estimate_constants(data);
    let mut learner = build_learner(cfg.learner, cfg, data.dim(), meta.lipschitz)?;
    let budget = baseline_budget(cfg);
    let log_every = cfg.log_every.unwrap_or(cfg.t1).max(1);
    let mut sampler = StreamSampler::new(data, derive_seed(cfg.seed, SERIAL_STREAM));
    let mut tracker = Tracker::new(cfg, data, eval, learner.current())?;

    let mut chunk = 0;
    let mut step = 0;
    while step < budget {
        chunk += 1;
        let len = log_every.min(budget - step);
        tracker.start();
        for _ in 0..len {
            let e = sampler.next_sample()?;
            let g = logistic_grad(learner.current(), e)?;
            tracker.add_iterate(learner.current())?;
            learner.update(&Gradient::Sparse(g))?;
        }
        step += len;
        tracker.metrics.serial_samples += len;
        tracker.metrics.samples_seen += len;
        tracker.stop();
        tracker.check_divergence(learner.current(), chunk)?;
        tracker.record(Phase::Serial, chunk)?;
    }
    tracker.finish(chunk, learner.clip_count(), sampler.samples_drawn())
}

/// Minibatch SGD: every step averages `cfg.batch` fresh gradients at the
/// current point in parallel, so every step is a communication round.
pub fn run_minibatch_sgd(cfg: &RunConfig, data: &Dataset, eval: Evaluation<'_>) -> Result<(DenseVector, RunMetrics)> {
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if cfg.batch == 0 {
        return Err(Error::invalid("minibatch size must be >= 1"));
    }
    let meta = estimate_constants(data);
    let mut learner = build_learner(cfg.learner, cfg, data.dim(), meta.lipschitz)?;
    let engine = BatchEngine::new(cfg.workers, cfg.block_size)?;
    let budget = baseline_budget(cfg);
    let log_every = cfg.log_every.unwrap_or(cfg.t1).max(1);
    let mut sampler = StreamSampler::new(data, derive_seed(cfg.seed, SERIAL_STREAM));
    let mut tracker = Tracker::new(cfg, data, eval, learner.current())?;

    let mut chunk = 0;
    let mut consumed = 0;
    while consumed < budget {
        chunk += 1;
        tracker.start();
        let mut steps = 0;
        while steps < log_every && consumed < budget {
            let b = cfg.batch.min(budget - consumed);
            let samples = sampler.take(b as usize)?;
            let (g, _) = engine.gradient(learner.current(), &samples)?;
            tracker.add_iterate(learner.current())?;
            learner.update(&Gradient::Dense(g))?;
            consumed += b;
            steps += 1;
            tracker.metrics.rounds += 1;
            tracker.metrics.batch_samples += b;
            tracker.metrics.samples_seen += b;
        }
        tracker.stop();
        tracker.check_divergence(learner.current(), chunk)?;
        tracker.record(Phase::Minibatch, chunk)?;
    }
    tracker.finish(chunk, learner.clip_count(), sampler.samples_drawn())
}

/// Dispatches on `cfg.algo`.
pub fn run(cfg: &RunConfig, data: &Dataset, eval: Evaluation<'_>) -> Result<(DenseVector, RunMetrics)> {
    match cfg.algo {
        Algo::SvrgOl => run_svrg_ol(cfg, data, eval),
        Algo::SvrgConst => run_classic_svrg(cfg, data, eval),
        Algo::Sgd => run_sgd(cfg, data, eval),
        Algo::Minibatch => run_minibatch_sgd(cfg, data, eval),
    }
}
