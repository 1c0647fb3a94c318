//! End-to-end SVRG-OL on a synthetic sparse logistic problem with a held-out set.
use svrg_ol::experiment::to_csv;
use svrg_ol::{gen_synthetic_split, run_svrg_ol, Evaluation, LearnerKind, RunConfig, Switch, SyntheticSpec};

fn main() -> svrg_ol::Result<()> {
    let spec = SyntheticSpec {
        dim: 50,
        n: 20_000,
        sparsity: 8,
        w_norm: 3.0,
        n_test: 5_000,
    };
    let (train, test, _) = gen_synthetic_split(&spec, 11)?;

    let cfg = RunConfig {
        learner: LearnerKind::AdaGrad,
        t1: 2000,
        c: 500,
        k_max: 8,
        // the worst-case compensation term is large at this scale; see the README
        compensate: Switch::Off,
        workers: 2,
        ..RunConfig::default()
    };
    let eval = Evaluation {
        test: test.as_ref(),
        w_star: None,
    };
    let (w, metrics) = run_svrg_ol(&cfg, &train, eval)?;

    print!("{}", to_csv(&metrics.records));
    println!(
        "rounds = {}, samples = {} ({} batch + {} serial), ||w|| = {:.3}",
        metrics.rounds,
        metrics.samples_seen,
        metrics.batch_samples,
        metrics.serial_samples,
        w.norm_sq().sqrt()
    );
    Ok(())
}
