//! Variance-reduced gradients: second moment of the plain stochastic
//! gradient versus the corrected one as the anchor approaches the point.
use svrg_ol::loss::empirical_gradient;
use svrg_ol::{
    combine_dense, gen_synthetic_split, logistic_grad, monte_carlo_variance_check, AnchorState, DenseVector,
    StreamSampler, SyntheticSpec,
};

fn main() -> svrg_ol::Result<()> {
    let (d, _, w_true) = gen_synthetic_split(
        &SyntheticSpec {
            n_test: 0,
            ..SyntheticSpec::new(20, 4000)
        },
        5,
    )?;
    let mut w = w_true.clone();
    w.scale(0.8);

    let plain: f64 = {
        let mut s = StreamSampler::new(&d, 1);
        (0..20_000)
            .map(|_| logistic_grad(&w, s.next_sample().unwrap()).unwrap().norm_sq())
            .sum::<f64>()
            / 20_000.0
    };
    println!("E||grad f(w)||^2 = {plain:.4}");

    for shrink in [0.0, 0.5, 0.9, 0.99, 1.0] {
        // anchor on the segment from the origin to w
        let mut v = w.clone();
        v.scale(shrink);
        let b = empirical_gradient(&v, &d)?;
        let mut s = StreamSampler::new(&d, 2);
        let mut second = 0.0;
        for _ in 0..20_000 {
            let e = s.next_sample()?;
            second += combine_dense(&logistic_grad(&w, e)?, &logistic_grad(&v, e)?, &b)?.norm_sq();
        }
        println!("anchor = {shrink:.2} w: E||g||^2 = {:.4}", second / 20_000.0);
    }

    // the smoothness bound on the second moment, with the generating weights as reference
    let anchor = AnchorState::new(
        DenseVector::zeros(20),
        empirical_gradient(&DenseVector::zeros(20), &d)?,
        1,
        4000,
    )?;
    let r = monte_carlo_variance_check(&w, &anchor, &d, 10_000, &w_true, 3)?;
    println!(
        "variance check: estimate {:.4}, bound {:.4}, pass = {}",
        r.estimate, r.bound, r.pass
    );
    Ok(())
}
