use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use svrg_ol::{AdaGrad, Ball, CoinBetting, DenseVector, Gradient, OnlineLearner};

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DenseVector {
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect::<Vec<_>>()
        .into()
}

/// Largest regret against any point of the ball: attained on the boundary,
/// opposite the summed gradient.
fn max_regret(loss_alg: f64, g_sum: &DenseVector, ball: &Ball) -> f64 {
    let gn = g_sum.norm_sq().sqrt();
    loss_alg - g_sum.dot_dense(&ball.center).unwrap() + ball.radius() * gn
}

fn play(learner: &mut dyn OnlineLearner, grads: &[DenseVector]) -> (f64, DenseVector) {
    let mut loss = 0.0;
    let mut sum = DenseVector::zeros(grads[0].dim());
    for g in grads {
        loss += g.dot_dense(learner.current()).unwrap();
        sum.axpy(1.0, g).unwrap();
        learner.update(&Gradient::Dense(g.clone())).unwrap();
    }
    (loss, sum)
}

#[test]
fn adagrad_meets_its_per_coordinate_bound_on_adversarial_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seq in 0..200 {
        let dim = rng.random_range(1..=8);
        let steps = rng.random_range(1..=1000);
        let ball = Ball::new(gaussian(&mut rng, dim, 0.5), rng.random_range(0.5..4.0)).unwrap();
        let drift = gaussian(&mut rng, dim, 1.0);
        let grads: Vec<DenseVector> = (0..steps)
            .map(|t| match seq % 3 {
                0 => {
                    let mut g = drift.clone();
                    g.scale(if t % 2 == 0 { 1.0 } else { -1.0 });
                    g
                }
                1 => drift.clone(),
                _ => gaussian(&mut rng, dim, 1.0),
            })
            .collect();
        let mut learner = AdaGrad::with_defaults(dim, Some(ball.clone())).unwrap();
        let (loss, sum) = play(&mut learner, &grads);
        let per_coord: f64 = learner.sum_sq().iter().map(|s| s.sqrt()).sum();
        let bound = std::f64::consts::SQRT_2 * ball.diameter * per_coord;
        assert!(max_regret(loss, &sum, &ball) <= bound + 1e-6, "sequence {seq}");
        let offset = learner.current().sub(&ball.center).unwrap();
        assert!(offset.norm_sq().sqrt() <= ball.radius() * (1.0 + 1e-9));
    }
}

#[test]
fn adagrad_meets_the_norm_bound_on_iid_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let dim = rng.random_range(1..=8);
        let steps = rng.random_range(1..=1000);
        let ball = Ball::at_origin(dim, rng.random_range(0.5..4.0)).unwrap();
        let grads: Vec<DenseVector> = (0..steps).map(|_| gaussian(&mut rng, dim, 1.0)).collect();
        let sq: f64 = grads.iter().map(|g| g.norm_sq()).sum();
        let mut learner = AdaGrad::with_defaults(dim, Some(ball.clone())).unwrap();
        let (loss, sum) = play(&mut learner, &grads);
        assert!(max_regret(loss, &sum, &ball) <= ball.diameter * (2.0 * sq).sqrt() + 1e-6);
    }
}

#[test]
fn coin_wealth_stays_positive_for_bounded_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..50 {
        let dim = rng.random_range(1..=8);
        let scale = rng.random_range(0.1..5.0);
        let mut coin = CoinBetting::new(dim, scale, None).unwrap();
        for _ in 0..500 {
            let g: DenseVector = (0..dim)
                .map(|_| rng.random_range(-scale..=scale))
                .collect::<Vec<_>>()
                .into();
            coin.update(&Gradient::Dense(g)).unwrap();
            assert!(coin.wealth().iter().all(|&w| w > 0.0));
        }
        assert_eq!(coin.clip_count(), 0);
    }
}

#[test]
fn coin_regret_against_origin_is_bounded_by_initial_wealth() {
    // with wealth in loss units, the loss of the bets is initial wealth minus final wealth
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let dim = rng.random_range(1..=8);
        let mut coin = CoinBetting::new(dim, 1.0, None).unwrap();
        let initial: f64 = coin.wealth().iter().sum();
        let mut loss = 0.0;
        for _ in 0..300 {
            let g: DenseVector = (0..dim)
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect::<Vec<_>>()
                .into();
            loss += g.dot_dense(coin.current()).unwrap();
            coin.update(&Gradient::Dense(g)).unwrap();
        }
        let final_wealth: f64 = coin.wealth().iter().sum();
        assert!((loss - (initial - final_wealth)).abs() <= 1e-9);
        assert!(loss < initial);
    }
}
