//! Variance-reduced stochastic optimization on top of black-box online learners.
//!
//! Each epoch computes a large-batch gradient at an anchor point in parallel
//! (one communication round), then feeds an online learner the corrected
//! gradients `grad f(w) - grad f(v) + batch_grad(v)` one sample at a time.
//! The learner needs no step size tuned to the smoothness of the problem.
//!
//! ```
//! use svrg_ol::{gen_synthetic_split, run_svrg_ol, Evaluation, RunConfig, SyntheticSpec};
//!
//! let (train, _, _) = gen_synthetic_split(&SyntheticSpec::new(10, 2000), 3).unwrap();
//! let cfg = RunConfig { k_max: 4, ..RunConfig::default() };
//! let (w, metrics) = run_svrg_ol(&cfg, &train, Evaluation::default()).unwrap();
//! assert_eq!(w.dim(), 10);
//! assert_eq!(metrics.rounds, 4);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod driver;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod linalg;
pub mod loss;
pub mod metrics;
pub mod vr;

pub use config::{Algo, LearnerKind, RunConfig, ScheduleMode, Switch};
pub use data::{
    gen_synthetic, gen_synthetic_split, hash_feature, random_weights, Dataset, Example, Label, StreamSampler,
    SyntheticSpec,
};
pub use driver::{
    anchor_average, build_learner, run, run_classic_svrg, run_minibatch_sgd, run_sgd, run_svrg_ol, run_svrg_ol_with,
    EpochPlan, EpochSchedule, Evaluation, Phase, PhaseRecord, RunMetrics,
};
pub use error::{Error, Result};
pub use experiment::run_experiment;
pub use learner::{bias_compensate, project_ball, AdaGrad, Ball, CoinBetting, ConstantStep, Gradient, OnlineLearner};
pub use linalg::{axpy_sparse, dot, l2_norm, DenseVector, SparseVector};
pub use loss::{estimate_constants, logistic_grad, logistic_loss, ProblemMeta};
pub use metrics::{auc, average_loss, dataset_auc, suboptimality};
pub use vr::{
    batch_error_bound, batch_gradient, combine_dense, combine_sparse, monte_carlo_variance_check, required_batch_size,
    AnchorState, BatchEngine, FeatureStats,
};
