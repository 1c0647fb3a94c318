//! The three online learners on a fixed linear-loss stream, plus the
//! bias-compensation wrapper.
use svrg_ol::{bias_compensate, AdaGrad, Ball, CoinBetting, ConstantStep, DenseVector, Gradient, OnlineLearner};

/// Gradients of |w - 2| on a noisy stream: sign(w - 2) + noise.
fn stream(t: usize, w: f64) -> f64 {
    let noise = ((t * 7919) % 13) as f64 / 13.0 - 0.5;
    (w - 2.0).signum() + 0.5 * noise
}

fn run(mut learner: Box<dyn OnlineLearner>, steps: usize) -> f64 {
    let mut avg = 0.0;
    for t in 0..steps {
        let w = learner.current()[0];
        avg += w / steps as f64;
        let g: DenseVector = vec![stream(t, w)].into();
        learner.update(&Gradient::Dense(g)).unwrap();
    }
    avg
}

fn main() -> svrg_ol::Result<()> {
    let steps = 5000;
    let ball = Ball::at_origin(1, 10.0)?;
    println!("averaged iterate after {steps} steps (target 2):");
    println!(
        "  adagrad in a ball of diameter 10: {:.3}",
        run(Box::new(AdaGrad::with_defaults(1, Some(ball))?), steps)
    );
    println!(
        "  adagrad, unconstrained:           {:.3}",
        run(Box::new(AdaGrad::with_defaults(1, None)?), steps)
    );
    println!(
        "  coin betting, G = 1.5:            {:.3}",
        run(Box::new(CoinBetting::new(1, 1.5, None)?), steps)
    );
    println!(
        "  constant step 0.01:               {:.3}",
        run(Box::new(ConstantStep::new(1, 0.01, None)?), steps)
    );
    println!(
        "  constant step 1.0:                {:.3}",
        run(Box::new(ConstantStep::new(1, 1.0, None)?), steps)
    );

    // bias compensation adds B w / ||w||, pulling an unconstrained learner toward the origin
    let w: DenseVector = vec![3.0, 4.0].into();
    let g = bias_compensate(Gradient::Dense(vec![0.1, 0.1].into()), &w, 0.5)?;
    println!(
        "compensated gradient at w = (3, 4), B = 0.5: {:?}",
        g.to_dense().as_slice()
    );
    Ok(())
}
