//! Online learners behind a uniform contract: report the current point, take
//! a gradient, move.
//!
//! The driver treats every learner as a black box. Three are provided:
//! diagonal AdaGrad, per-coordinate Krichevsky-Trofimov coin betting
//! (parameter-free), and constant-step SGD.

use crate::error::{Error, Result};
use crate::linalg::{l2_norm, DenseVector, SparseVector};

/// A gradient handed to a learner.
#[derive(Clone, Debug, PartialEq)]
pub enum Gradient {
    Sparse(SparseVector),
    Dense(DenseVector),
}

impl Gradient {
    pub fn dim(&self) -> usize {
        match self {
            Gradient::Sparse(g) => g.dim(),
            Gradient::Dense(g) => g.dim(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match self {
            Gradient::Sparse(g) => g.norm_sq(),
            Gradient::Dense(g) => g.norm_sq(),
        }
    }

    pub fn to_dense(&self) -> DenseVector {
        match self {
            Gradient::Sparse(g) => g.to_dense(),
            Gradient::Dense(g) => g.clone(),
        }
    }

    /// Calls `f(i, g_i)` for every coordinate that may be nonzero, in
    /// ascending order. Dense zeros are skipped so that sparse and dense
    /// forms of the same vector drive identical updates.
    fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Gradient::Sparse(g) => g.iter().for_each(|(i, v)| f(i, v)),
            Gradient::Dense(g) => g
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .for_each(|(i, &v)| f(i, v)),
        }
    }
}

impl From<SparseVector> for Gradient {
    fn from(g: SparseVector) -> Self {
        Gradient::Sparse(g)
    }
}

impl From<DenseVector> for Gradient {
    fn from(g: DenseVector) -> Self {
        Gradient::Dense(g)
    }
}

/// Black-box online learner: `current` is `w_t`, `update` consumes `g_t`.
pub trait OnlineLearner: Send {
    fn current(&self) -> &DenseVector;

    fn update(&mut self, g: &Gradient) -> Result<()>;

    /// Number of gradient coordinates clipped so far.
    fn clip_count(&self) -> u64 {
        0
    }

    fn name(&self) -> &'static str;
}

/// Euclidean ball of a given diameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: DenseVector,
    pub diameter: f64,
}

impl Ball {
    pub fn new(center: DenseVector, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) {
            return Err(Error::invalid(format!("diameter must be positive, got {diameter}")));
        }
        Ok(Ball { center, diameter })
    }

    pub fn at_origin(dim: usize, diameter: f64) -> Result<Self> {
        Ball::new(DenseVector::zeros(dim), diameter)
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.diameter / 2.0
    }

    fn project_in_place(&self, w: &mut DenseVector) {
        project_in_place(w, &self.center, self.radius());
    }
}

fn project_in_place(w: &mut DenseVector, center: &DenseVector, radius: f64) {
    let dist = w
        .iter()
        .zip(center.iter())
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    if dist > radius {
        let s = radius / dist;
        for (a, c) in w.as_mut_slice().iter_mut().zip(center.iter()) {
            *a = c + s * (*a - c);
        }
    }
}

/// Projection onto `{u : ||u - center|| <= radius}` in the metric
/// `sum_i h_i (u_i - w_i)^2`. The minimiser is
/// `u_i = c_i + h_i (w_i - c_i) / (h_i + lambda)` for the `lambda >= 0` that
/// puts `u` on the sphere; `lambda` is found by bisection.
fn project_weighted_in_place(w: &mut DenseVector, center: &DenseVector, radius: f64, h: &[f64]) {
    let dist_sq: f64 = w.iter().zip(center.iter()).map(|(a, c)| (a - c) * (a - c)).sum();
    if dist_sq <= radius * radius {
        return;
    }
    let r_sq = radius * radius;
    let shrunk_sq = |lambda: f64| -> f64 {
        w.iter()
            .zip(center.iter())
            .zip(h)
            .map(|((a, c), &hi)| {
                let u = hi * (a - c) / (hi + lambda);
                u * u
            })
            .sum()
    };
    let h_max = h.iter().copied().fold(0.0, f64::max);
    if !(h_max > 0.0) {
        project_in_place(w, center, radius);
        return;
    }
    let (mut lo, mut hi) = (0.0, h_max * dist_sq.sqrt() / radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shrunk_sq(mid) > r_sq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for ((a, c), &hi_i) in w.as_mut_slice().iter_mut().zip(center.iter()).zip(h) {
        *a = c + hi_i * (*a - c) / (hi_i + hi);
    }
    // bisection lands on the feasible side; this only absorbs rounding
    project_in_place(w, center, radius);
}

/// Euclidean projection of `w` onto the ball `{u : ||u - center|| <= radius}`.
pub fn project_ball(w: &DenseVector, center: &DenseVector, radius: f64) -> Result<DenseVector> {
    Error::check_dim(center.dim(), w.dim())?;
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    let mut out = w.clone();
    project_in_place(&mut out, center, radius);
    Ok(out)
}

/// Returns `g + B * w / ||w||`, or `g` unchanged when `w = 0` or `B = 0`.
///
/// Feeding the compensated gradient to a learner bounds the cost of an
/// unknown gradient bias of norm at most `B` by `O(B ||w*||)`.
pub fn bias_compensate(g: Gradient, w: &DenseVector, bound: f64) -> Result<Gradient> {
    Error::check_dim(w.dim(), g.dim())?;
    if bound < 0.0 {
        return Err(Error::invalid(format!("bias bound must be >= 0, got {bound}")));
    }
    let norm = l2_norm(w);
    if bound == 0.0 || norm == 0.0 {
        return Ok(g);
    }
    let mut out = g.to_dense();
    out.axpy(bound / norm, w)?;
    Ok(Gradient::Dense(out))
}

/// Diagonal AdaGrad. Inside a ball the iterate is projected in the
/// metric `diag(sqrt(s_i) + epsilon)`, so it stays put on coordinates the
/// gradients have barely touched.
#[derive(Clone, Debug)]
pub struct AdaGrad {
    w: DenseVector,
    sum_sq: Vec<f64>,
    eta: f64,
    epsilon: f64,
    ball: Option<Ball>,
}

impl AdaGrad {
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    /// Step size defaults to `D / sqrt(2)` inside a ball of diameter `D`
    /// and to 1 when unconstrained.
    pub fn default_eta(ball: Option<&Ball>) -> f64 {
        ball.map_or(1.0, |b| b.diameter / std::f64::consts::SQRT_2)
    }

    pub fn new(dim: usize, eta: f64, epsilon: f64, ball: Option<Ball>) -> Result<Self> {
        if !(eta >= 0.0) {
            return Err(Error::invalid(format!("eta must be >= 0, got {eta}")));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if let Some(b) = &ball {
            Error::check_dim(dim, b.center.dim())?;
        }
        let mut w = DenseVector::zeros(dim);
        if let Some(b) = &ball {
            b.project_in_place(&mut w);
        }
        Ok(AdaGrad {
            w,
            sum_sq: vec![0.0; dim],
            eta,
            epsilon,
            ball,
        })
    }

    pub fn with_defaults(dim: usize, ball: Option<Ball>) -> Result<Self> {
        let eta = AdaGrad::default_eta(ball.as_ref());
        AdaGrad::new(dim, eta, AdaGrad::DEFAULT_EPSILON, ball)
    }

    pub fn sum_sq(&self) -> &[f64] {
        &self.sum_sq
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl OnlineLearner for AdaGrad {
    fn current(&self) -> &DenseVector {
        &self.w
    }

    fn update(&mut self, g: &Gradient) -> Result<()> {
        Error::check_dim(self.w.dim(), g.dim())?;
        let (eta, eps) = (self.eta, self.epsilon);
        let w = self.w.as_mut_slice();
        let s = &mut self.sum_sq;
        g.for_each_nonzero(|i, gi| {
            s[i] += gi * gi;
            w[i] -= eta * gi / (s[i].sqrt() + eps);
        });
        if let Some(b) = &self.ball {
            // projecting in the learner's own metric is what keeps the regret bound
            let h: Vec<f64> = self.sum_sq.iter().map(|si| si.sqrt() + eps).collect();
            project_weighted_in_place(&mut self.w, &b.center, b.radius(), &h);
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "adagrad"
    }
}

/// Per-coordinate Krichevsky-Trofimov coin betting.
///
/// Each coordinate bets `w_i = beta_i * wealth_i / G` with
/// `beta_i = -(sum of past g_i) / (G (t + 1))` and `wealth_i -= g_i w_i`.
/// Wealth is measured in loss units, which keeps it positive whenever
/// `|g_i| <= G` and makes the iterates equivariant under rescaling of the
/// features. Larger coordinates are clipped to `+-G` and counted.
#[derive(Clone, Debug)]
pub struct CoinBetting {
    w: DenseVector,
    wealth: Vec<f64>,
    grad_sum: Vec<f64>,
    rounds: u64,
    scale: f64,
    clips: u64,
    ball: Option<Ball>,
}

impl CoinBetting {
    pub const INITIAL_WEALTH: f64 = 1.0;

    pub fn new(dim: usize, scale: f64, ball: Option<Ball>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!(
                "coin-betting scale must be positive, got {scale}"
            )));
        }
        if let Some(b) = &ball {
            Error::check_dim(dim, b.center.dim())?;
        }
        Ok(CoinBetting {
            w: DenseVector::zeros(dim),
            wealth: vec![CoinBetting::INITIAL_WEALTH; dim],
            grad_sum: vec![0.0; dim],
            rounds: 0,
            scale,
            clips: 0,
            ball,
        })
    }

    pub fn wealth(&self) -> &[f64] {
        &self.wealth
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl OnlineLearner for CoinBetting {
    fn current(&self) -> &DenseVector {
        &self.w
    }

    fn update(&mut self, g: &Gradient) -> Result<()> {
        Error::check_dim(self.w.dim(), g.dim())?;
        let scale = self.scale;
        let w = self.w.as_slice();
        let wealth = &mut self.wealth;
        let grad_sum = &mut self.grad_sum;
        let mut clips = 0u64;
        g.for_each_nonzero(|i, gi| {
            let gi = if gi.abs() > scale {
                clips += 1;
                gi.signum() * scale
            } else {
                gi
            };
            wealth[i] -= gi * w[i];
            grad_sum[i] += gi;
        });
        self.clips += clips;
        self.rounds += 1;

        // beta / G: one factor normalises the bet fraction, one converts wealth to w units
        let denom = scale * scale * (self.rounds as f64 + 1.0);
        for ((wi, &s), &wealth) in self
            .w
            .as_mut_slice()
            .iter_mut()
            .zip(self.grad_sum.iter())
            .zip(self.wealth.iter())
        {
            *wi = -s / denom * wealth;
        }
        if let Some(b) = &self.ball {
            b.project_in_place(&mut self.w);
        }
        Ok(())
    }

    fn clip_count(&self) -> u64 {
        self.clips
    }

    fn name(&self) -> &'static str {
        "coin"
    }
}

/// Constant-step gradient descent, `w <- w - eta g`.
#[derive(Clone, Debug)]
pub struct ConstantStep {
    w: DenseVector,
    eta: f64,
    ball: Option<Ball>,
}

impl ConstantStep {
    pub fn new(dim: usize, eta: f64, ball: Option<Ball>) -> Result<Self> {
        ConstantStep::starting_at(DenseVector::zeros(dim), eta, ball)
    }

    pub fn starting_at(w: DenseVector, eta: f64, ball: Option<Ball>) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be finite and >= 0, got {eta}")));
        }
        let mut w = w;
        if let Some(b) = &ball {
            Error::check_dim(w.dim(), b.center.dim())?;
            b.project_in_place(&mut w);
        }
        Ok(ConstantStep { w, eta, ball })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl OnlineLearner for ConstantStep {
    fn current(&self) -> &DenseVector {
        &self.w
    }

    fn update(&mut self, g: &Gradient) -> Result<()> {
        Error::check_dim(self.w.dim(), g.dim())?;
        let eta = self.eta;
        let w = self.w.as_mut_slice();
        g.for_each_nonzero(|i, gi| w[i] -= eta * gi);
        if let Some(b) = &self.ball {
            b.project_in_place(&mut self.w);
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "const"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dense(v: &[f64]) -> Gradient {
        Gradient::Dense(DenseVector::from_vec(v.to_vec()))
    }

    #[test]
    fn fresh_learners_start_at_origin() {
        assert!(AdaGrad::with_defaults(3, None).unwrap().current().is_zero());
        assert!(CoinBetting::new(3, 1.0, None).unwrap().current().is_zero());
        assert!(ConstantStep::new(3, 0.1, None).unwrap().current().is_zero());
    }

    #[test]
    fn zero_gradient_leaves_point_unchanged() {
        let mut learners: Vec<Box<dyn OnlineLearner>> = vec![
            Box::new(AdaGrad::with_defaults(2, None).unwrap()),
            Box::new(CoinBetting::new(2, 1.0, None).unwrap()),
            Box::new(ConstantStep::new(2, 0.5, None).unwrap()),
        ];
        for l in learners.iter_mut() {
            l.update(&dense(&[1.0, -2.0])).unwrap();
            let before = l.current().clone();
            if l.name() == "coin" {
                // bets decay with t; covered by coin_zero_gradients_stay_at_origin
                continue;
            }
            l.update(&dense(&[0.0, 0.0])).unwrap();
            assert_eq!(l.current(), &before, "{}", l.name());
        }
        let mut ada = AdaGrad::with_defaults(2, None).unwrap();
        ada.update(&dense(&[0.0, 0.0])).unwrap();
        assert_eq!(ada.sum_sq(), &[0.0, 0.0]);
    }

    #[test]
    fn adagrad_hand_steps() {
        let mut a = AdaGrad::new(1, 1.0, 0.0, None).unwrap();
        a.update(&dense(&[1.0])).unwrap();
        assert_eq!(a.current()[0], -1.0);
        a.update(&dense(&[1.0])).unwrap();
        assert_relative_eq!(a.current()[0], -1.0 - 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(a.current()[0], -1.7071, epsilon = 1e-4);
    }

    #[test]
    fn adagrad_defaults() {
        let b = Ball::at_origin(2, 4.0).unwrap();
        assert_relative_eq!(AdaGrad::default_eta(Some(&b)), 4.0 / 2f64.sqrt());
        assert_eq!(AdaGrad::default_eta(None), 1.0);
    }

    #[test]
    fn dimension_errors() {
        let sparse = Gradient::Sparse(SparseVector::empty(3));
        assert!(AdaGrad::with_defaults(2, None).unwrap().update(&sparse).is_err());
        assert!(CoinBetting::new(2, 1.0, None).unwrap().update(&sparse).is_err());
        assert!(ConstantStep::new(2, 1.0, None).unwrap().update(&sparse).is_err());
    }

    #[test]
    fn coin_hand_step() {
        let mut c = CoinBetting::new(1, 1.0, None).unwrap();
        c.update(&dense(&[-1.0])).unwrap();
        assert_eq!(c.wealth(), &[1.0]);
        assert_eq!(c.current()[0], 0.5);
    }

    #[test]
    fn coin_zero_gradients_stay_at_origin() {
        let mut c = CoinBetting::new(3, 2.0, None).unwrap();
        for _ in 0..50 {
            c.update(&dense(&[0.0, 0.0, 0.0])).unwrap();
            assert!(c.current().is_zero());
        }
    }

    #[test]
    fn coin_grows_on_consistent_direction() {
        let mut c = CoinBetting::new(1, 1.0, None).unwrap();
        let mut prev = c.current()[0];
        for _ in 0..100 {
            c.update(&dense(&[-1.0])).unwrap();
            let w = c.current()[0];
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn coin_is_equivariant_under_gradient_scaling() {
        // gradients x10 with scale x10 is the same game played at w / 10
        let mut a = CoinBetting::new(2, 1.5, None).unwrap();
        let mut b = CoinBetting::new(2, 15.0, None).unwrap();
        for t in 0..200 {
            let g = [((t * 7) % 5) as f64 / 4.0 - 0.6, -0.3 + ((t * 3) % 4) as f64 / 10.0];
            a.update(&dense(&g)).unwrap();
            b.update(&dense(&[g[0] * 10.0, g[1] * 10.0])).unwrap();
            for i in 0..2 {
                assert!((a.current()[i] - 10.0 * b.current()[i]).abs() <= 1e-12 * a.current()[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn coin_clips_and_counts() {
        let mut c = CoinBetting::new(2, 1.0, None).unwrap();
        c.update(&dense(&[5.0, 0.5])).unwrap();
        assert_eq!(c.clip_count(), 1);
        let mut d = CoinBetting::new(2, 1.0, None).unwrap();
        d.update(&dense(&[1.0, 0.5])).unwrap();
        assert_eq!(c.current(), d.current());
    }

    #[test]
    fn constant_step_examples() {
        let mut c = ConstantStep::new(1, 0.0, None).unwrap();
        c.update(&dense(&[3.0])).unwrap();
        assert_eq!(c.current()[0], 0.0);

        let mut c = ConstantStep::new(1, 0.5, None).unwrap();
        c.update(&dense(&[2.0])).unwrap();
        assert_eq!(c.current()[0], -1.0);

        let ball = Ball::at_origin(1, 1.0).unwrap();
        let mut c = ConstantStep::starting_at(vec![0.9].into(), 1.0, Some(ball)).unwrap();
        c.update(&dense(&[-2.0])).unwrap();
        assert_eq!(c.current()[0], 0.5);
    }

    #[test]
    fn bias_compensation_examples() {
        let g = dense(&[1.0, 2.0]);
        assert_eq!(bias_compensate(g.clone(), &DenseVector::zeros(2), 7.0).unwrap(), g);
        assert_eq!(bias_compensate(g.clone(), &vec![3.0, 4.0].into(), 0.0).unwrap(), g);
        let out = bias_compensate(dense(&[0.0, 0.0]), &vec![3.0, 4.0].into(), 5.0).unwrap();
        let out = out.to_dense();
        assert_relative_eq!(out[0], 3.0, epsilon = 1e-15);
        assert_relative_eq!(out[1], 4.0, epsilon = 1e-15);
        // compensation of a zero gradient at the origin is zero
        let z = bias_compensate(dense(&[0.0, 0.0]), &DenseVector::zeros(2), 3.0).unwrap();
        assert!(z.to_dense().is_zero());
        assert!(bias_compensate(g, &vec![1.0, 0.0].into(), -1.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let c0 = DenseVector::zeros(2);
        let w: DenseVector = vec![0.3, 0.4].into();
        assert_eq!(project_ball(&w, &c0, 1.0).unwrap(), w);
        assert_eq!(
            project_ball(&vec![0.0, 2.0].into(), &c0, 1.0).unwrap().as_slice(),
            &[0.0, 1.0]
        );
        let p = project_ball(&vec![5.0, 0.0].into(), &vec![1.0, 0.0].into(), 2.0).unwrap();
        assert_eq!(p.as_slice(), &[3.0, 0.0]);
        assert!(project_ball(&w, &c0, 0.0).is_err());
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, dim)
    }

    proptest! {
        #[test]
        fn projection_idempotent_and_nonexpansive(
            a in vec_strategy(4), b in vec_strategy(4), c in vec_strategy(4), r in 0.1f64..4.0
        ) {
            let (a, b, c) = (DenseVector::from_vec(a), DenseVector::from_vec(b), DenseVector::from_vec(c));
            let pa = project_ball(&a, &c, r).unwrap();
            let pb = project_ball(&b, &c, r).unwrap();
            let ppa = project_ball(&pa, &c, r).unwrap();
            for i in 0..4 {
                prop_assert!((ppa[i] - pa[i]).abs() <= 1e-12);
            }
            let d_proj = l2_norm(&pa.sub(&pb).unwrap());
            let d = l2_norm(&a.sub(&b).unwrap());
            prop_assert!(d_proj <= d + 1e-12);
        }

        #[test]
        fn adagrad_sparse_dense_equivalence(
            steps in prop::collection::vec(prop::collection::vec((0usize..6, -3.0f64..3.0), 0..6), 1..20),
            bounded in any::<bool>(),
        ) {
            let ball = bounded.then(|| Ball::at_origin(6, 2.0).unwrap());
            let mut sparse_l = AdaGrad::with_defaults(6, ball.clone()).unwrap();
            let mut dense_l = AdaGrad::with_defaults(6, ball).unwrap();
            for pairs in steps {
                let g = SparseVector::from_pairs(6, pairs).unwrap();
                sparse_l.update(&Gradient::Sparse(g.clone())).unwrap();
                dense_l.update(&Gradient::Dense(g.to_dense())).unwrap();
                prop_assert_eq!(sparse_l.current(), dense_l.current());
                prop_assert_eq!(sparse_l.sum_sq(), dense_l.sum_sq());
            }
        }

        #[test]
        fn adagrad_sum_sq_monotone(steps in prop::collection::vec(vec_strategy(3), 1..30)) {
            let mut a = AdaGrad::with_defaults(3, None).unwrap();
            let mut prev = a.sum_sq().to_vec();
            for g in steps {
                a.update(&dense(&g)).unwrap();
                for (new, old) in a.sum_sq().iter().zip(prev.iter()) {
                    prop_assert!(new >= old);
                }
                prev = a.sum_sq().to_vec();
            }
        }

        #[test]
        fn coin_wealth_stays_positive(
            scale in 0.1f64..10.0,
            steps in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 3), 1..200),
        ) {
            let mut c = CoinBetting::new(3, scale, None).unwrap();
            for g in steps {
                let g: Vec<f64> = g.iter().map(|v| v * scale).collect();
                c.update(&dense(&g)).unwrap();
                prop_assert!(c.wealth().iter().all(|&w| w > 0.0));
            }
            prop_assert_eq!(c.clip_count(), 0);
        }

        #[test]
        fn projected_learners_stay_in_ball(steps in prop::collection::vec(vec_strategy(3), 1..30)) {
            let mk = || Some(Ball::new(vec![1.0, -1.0, 0.5].into(), 3.0).unwrap());
            let mut learners: Vec<Box<dyn OnlineLearner>> = vec![
                Box::new(AdaGrad::with_defaults(3, mk()).unwrap()),
                Box::new(CoinBetting::new(3, 5.0, mk()).unwrap()),
                Box::new(ConstantStep::new(3, 0.7, mk()).unwrap()),
            ];
            let center: DenseVector = vec![1.0, -1.0, 0.5].into();
            for g in steps {
                for l in learners.iter_mut() {
                    l.update(&dense(&g)).unwrap();
                    let d = l2_norm(&l.current().sub(&center).unwrap());
                    prop_assert!(d <= 1.5 + 1e-12);
                }
            }
        }
    }
}
