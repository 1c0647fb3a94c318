//! Logistic loss, gradients and problem constants on a synthetic dataset.
use svrg_ol::loss::{empirical_gradient, empirical_loss};
use svrg_ol::{estimate_constants, gen_synthetic_split, logistic_grad, logistic_loss, DenseVector, SyntheticSpec};

fn main() -> svrg_ol::Result<()> {
    let (train, _, w_true) = gen_synthetic_split(
        &SyntheticSpec {
            n_test: 0,
            ..SyntheticSpec::new(10, 5000)
        },
        1,
    )?;
    let meta = estimate_constants(&train);
    println!(
        "G (Lipschitz) = {:.3}, L (smoothness) = {:.3}",
        meta.lipschitz, meta.smoothness
    );

    let e = &train.examples()[0];
    let zero = DenseVector::zeros(10);
    println!(
        "f(0) on one example = {:.6} (ln 2 = {:.6})",
        logistic_loss(&zero, e)?,
        std::f64::consts::LN_2
    );
    println!("grad f(0) support = {:?}", logistic_grad(&zero, e)?.indices());

    for (name, w) in [("origin", zero.clone()), ("generating weights", w_true.clone())] {
        let g = empirical_gradient(&w, &train)?;
        println!(
            "{name:>20}: F = {:.4}, ||grad F|| = {:.4}",
            empirical_loss(&w, &train)?,
            g.norm_sq().sqrt()
        );
    }

    // a few hundred full-gradient steps with the safe step 1/L
    let mut w = zero;
    for _ in 0..300 {
        let g = empirical_gradient(&w, &train)?;
        w.axpy(-1.0 / meta.smoothness, &g)?;
    }
    println!(
        "after 300 steps of gradient descent: F = {:.4}",
        empirical_loss(&w, &train)?
    );
    Ok(())
}
