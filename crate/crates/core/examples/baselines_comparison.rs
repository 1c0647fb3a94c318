//! SVRG-OL against serial SGD and minibatch SGD: loss versus samples and
//! communication rounds.
use svrg_ol::{gen_synthetic_split, run, Algo, Evaluation, RunConfig, ScheduleMode, Switch, SyntheticSpec};

fn main() -> svrg_ol::Result<()> {
    let (train, test, _) = gen_synthetic_split(&SyntheticSpec::new(20, 1 << 14), 7)?;
    let eval = Evaluation {
        test: test.as_ref(),
        w_star: None,
    };

    let svrg = RunConfig {
        schedule: ScheduleMode::Theory,
        t1: 64,
        serial_budget: Some(8192),
        n_hat: Some(4096),
        compensate: Switch::Off,
        ..RunConfig::default()
    };
    let (_, m) = run(&svrg, &train, eval)?;
    let budget = m.samples_seen;
    report("svrg-ol (theory)", &m);

    let sgd = RunConfig {
        algo: Algo::Sgd,
        budget: Some(budget),
        ..RunConfig::default()
    };
    report("sgd", &run(&sgd, &train, eval)?.1);

    let b = budget.isqrt();
    let mb = RunConfig {
        algo: Algo::Minibatch,
        batch: b,
        budget: Some(budget),
        log_every: Some(20),
        ..RunConfig::default()
    };
    report(&format!("minibatch b = {b}"), &run(&mb, &train, eval)?.1);
    Ok(())
}

fn report(name: &str, m: &svrg_ol::RunMetrics) {
    let last = m.last().unwrap();
    println!(
        "{name:<20} samples {:>6}  rounds {:>4}  train {:.4}  test {:.4}  auc {:.3}",
        m.samples_seen,
        m.rounds,
        last.train_loss,
        last.test_loss.unwrap_or(f64::NAN),
        last.auc.unwrap_or(f64::NAN)
    );
}
