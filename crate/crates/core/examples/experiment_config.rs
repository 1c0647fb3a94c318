//! Driving a run from key=value flags, the way the command-line tool does,
//! and inspecting the epoch schedule it implies.
use svrg_ol::experiment::{execute, to_csv};
use svrg_ol::{EpochSchedule, RunConfig};

fn main() -> svrg_ol::Result<()> {
    let cfg = RunConfig::from_args([
        "--schedule",
        "theory",
        "--t1",
        "32",
        "--budget-t",
        "1000",
        "--nhat",
        "2000",
        "--synthetic",
        "dim=30,n=8000,sparsity=6,test=2000",
        "--seed",
        "4",
    ])?;

    let schedule = EpochSchedule::from_config(&cfg);
    println!(
        "planned: {} epochs, {} serial steps",
        schedule.planned_epochs(),
        schedule.planned_serial_total()
    );
    for k in 1..=schedule.planned_epochs() {
        let p = schedule.next_epoch(k)?;
        println!("  epoch {k}: T_k = {:>4}, batch = {}", p.serial_len, p.batch_size);
    }

    let (_, metrics) = execute(&cfg)?;
    print!("{}", to_csv(&metrics.records));
    Ok(())
}
