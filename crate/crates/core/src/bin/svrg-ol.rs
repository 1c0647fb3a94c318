use std::process::ExitCode;

use svrg_ol::experiment::{run_experiment, EXIT_USAGE};
use svrg_ol::RunConfig;

const USAGE: &str = "usage: svrg-ol [--config FILE] [--key value ...]
  --algo svrg-ol|sgd|minibatch|svrg-const   --learner adagrad|coin|const
  --schedule practical|theory|theory-firstorder
  --t1 N --c N --kmax N --nhat N --budget N --budget-t N --batch N
  --eta X --diameter X --epsilon X --workers N --hash-bits N --seed N
  --compensate on|off|auto --sparse-combine on|off --full-batch --timing on|off
  --data FILE [--test FILE] | --synthetic dim=D,n=N[,sparsity=S,wnorm=R,test=M]
  --out FILE --wstar FILE --weights-out FILE";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let code = match RunConfig::from_args(args) {
        Ok(cfg) => run_experiment(&cfg),
        Err(e) => {
            eprintln!("error: {e}\n{USAGE}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code as u8)
}
