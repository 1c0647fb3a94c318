//! Variance-reduced gradients and the parallel batch-gradient phase.
//!
//! Given an anchor `v` with an approximate full gradient `batch_grad`, the
//! estimate handed to the learner at `w` for a fresh sample `f` is
//! `grad f(w) - grad f(v) + batch_grad`. The sparse variant replaces the
//! dense `batch_grad` term by `batch_grad_i / p_i` on the sample's support,
//! where `p_i` is the probability that coordinate `i` is nonzero. The
//! expectation is unchanged and every update stays as sparse as the sample.

use log::debug;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::data::{Dataset, Example, StreamSampler};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseVector, SparseVector};
use crate::loss::{empirical_gradient, empirical_loss, estimate_constants, logistic_grad, logistic_slope};

/// Anchor point of one epoch together with its batch gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorState {
    pub v: DenseVector,
    pub batch_grad: DenseVector,
    pub epoch: u64,
    pub batch_size_used: u64,
}

impl AnchorState {
    pub fn new(v: DenseVector, batch_grad: DenseVector, epoch: u64, batch_size_used: u64) -> Result<Self> {
        Error::check_dim(v.dim(), batch_grad.dim())?;
        if batch_size_used == 0 {
            return Err(Error::invalid("batch_size_used must be >= 1"));
        }
        Ok(AnchorState {
            v,
            batch_grad,
            epoch,
            batch_size_used,
        })
    }
}

/// Per-coordinate nonzero counts from a batch phase.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    nonzero_counts: Vec<u64>,
    total: u64,
    p_floor: f64,
}

impl FeatureStats {
    pub fn new(nonzero_counts: Vec<u64>, total: u64, p_floor: f64) -> Result<Self> {
        if !(p_floor > 0.0 && p_floor <= 1.0) {
            return Err(Error::invalid(format!("p_floor must be in (0, 1], got {p_floor}")));
        }
        if let Some(c) = nonzero_counts.iter().find(|&&c| c > total) {
            return Err(Error::invalid(format!("count {c} exceeds total {total}")));
        }
        Ok(FeatureStats {
            nonzero_counts,
            total,
            p_floor,
        })
    }

    /// Stats with no observations; `combine_sparse` rejects these.
    pub fn empty(dim: usize) -> Self {
        FeatureStats {
            nonzero_counts: vec![0; dim],
            total: 0,
            p_floor: 1.0,
        }
    }

    /// Exact empirical nonzero frequencies over a whole dataset.
    pub fn from_dataset(d: &Dataset, p_floor: f64) -> Result<Self> {
        let mut counts = vec![0u64; d.dim()];
        for e in d.examples() {
            for &i in e.features.indices() {
                counts[i as usize] += 1;
            }
        }
        FeatureStats::new(counts, d.len() as u64, p_floor)
    }

    pub fn dim(&self) -> usize {
        self.nonzero_counts.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn p_floor(&self) -> f64 {
        self.p_floor
    }

    pub fn nonzero_counts(&self) -> &[u64] {
        &self.nonzero_counts
    }

    pub fn with_floor(mut self, p_floor: f64) -> Result<Self> {
        if !(p_floor > 0.0 && p_floor <= 1.0) {
            return Err(Error::invalid(format!("p_floor must be in (0, 1], got {p_floor}")));
        }
        self.p_floor = p_floor;
        Ok(self)
    }

    /// Estimated nonzero probability of coordinate `i`, in `[p_floor, 1]`.
    #[inline]
    pub fn p_hat(&self, i: usize) -> f64 {
        let freq = if self.total == 0 {
            0.0
        } else {
            self.nonzero_counts[i] as f64 / self.total as f64
        };
        freq.max(self.p_floor).min(1.0)
    }
}

/// Visits the union of two supports in ascending order as `(i, a_i, b_i)`.
fn merge_supports(a: &SparseVector, b: &SparseVector, mut f: impl FnMut(usize, f64, f64)) {
    let (ai, av) = (a.indices(), a.values());
    let (bi, bv) = (b.indices(), b.values());
    let (mut p, mut q) = (0, 0);
    while p < ai.len() || q < bi.len() {
        if q == bi.len() || (p < ai.len() && ai[p] < bi[q]) {
            f(ai[p] as usize, av[p], 0.0);
            p += 1;
        } else if p == ai.len() || bi[q] < ai[p] {
            f(bi[q] as usize, 0.0, bv[q]);
            q += 1;
        } else {
            f(ai[p] as usize, av[p], bv[q]);
            p += 1;
            q += 1;
        }
    }
}

/// `grad_w - grad_anchor + batch_grad`, dense.
pub fn combine_dense(
    grad_w: &SparseVector,
    grad_anchor: &SparseVector,
    batch_grad: &DenseVector,
) -> Result<DenseVector> {
    Error::check_dim(batch_grad.dim(), grad_w.dim())?;
    Error::check_dim(batch_grad.dim(), grad_anchor.dim())?;
    let mut out = batch_grad.clone();
    let b = batch_grad.as_slice();
    let o = out.as_mut_slice();
    merge_supports(grad_w, grad_anchor, |i, gw, ga| o[i] = (gw - ga) + b[i]);
    Ok(out)
}

/// Importance-weighted sparse estimate: on the sample's support,
/// `grad_w_i - grad_anchor_i + batch_grad_i / p_i`; zero elsewhere.
///
/// For linear losses both gradients come from the same sample, so the
/// anchor support is contained in `grad_w`'s and the output support is
/// exactly `grad_w`'s. Stray anchor coordinates are still carried.
pub fn combine_sparse(
    grad_w: &SparseVector,
    grad_anchor: &SparseVector,
    batch_grad: &DenseVector,
    stats: &FeatureStats,
) -> Result<SparseVector> {
    Error::check_dim(batch_grad.dim(), grad_w.dim())?;
    Error::check_dim(batch_grad.dim(), grad_anchor.dim())?;
    Error::check_dim(batch_grad.dim(), stats.dim())?;
    if stats.total == 0 {
        return Err(Error::InvalidState(
            "feature statistics are empty; run a batch phase first".into(),
        ));
    }
    let b = batch_grad.as_slice();
    let mut indices = Vec::with_capacity(grad_w.nnz());
    let mut values = Vec::with_capacity(grad_w.nnz());
    merge_supports(grad_w, grad_anchor, |i, gw, ga| {
        indices.push(i as u32);
        values.push((gw - ga) + b[i] / stats.p_hat(i));
    });
    Ok(SparseVector::from_sorted_parts(grad_w.dim(), indices, values))
}

/// Block partial sum: gradient sums and nonzero counts on a sorted support.
#[derive(Clone, Debug, Default)]
struct Partial {
    indices: Vec<u32>,
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl Partial {
    fn merge(left: &Partial, right: &Partial) -> Partial {
        let cap = left.indices.len() + right.indices.len();
        let mut out = Partial {
            indices: Vec::with_capacity(cap),
            sums: Vec::with_capacity(cap),
            counts: Vec::with_capacity(cap),
        };
        let (mut p, mut q) = (0, 0);
        let (li, ri) = (&left.indices, &right.indices);
        while p < li.len() || q < ri.len() {
            if q == ri.len() || (p < li.len() && li[p] < ri[q]) {
                out.push(li[p], left.sums[p], left.counts[p]);
                p += 1;
            } else if p == li.len() || ri[q] < li[p] {
                out.push(ri[q], right.sums[q], right.counts[q]);
                q += 1;
            } else {
                out.push(li[p], left.sums[p] + right.sums[q], left.counts[p] + right.counts[q]);
                p += 1;
                q += 1;
            }
        }
        out
    }

    #[inline]
    fn push(&mut self, i: u32, s: f64, c: u64) {
        self.indices.push(i);
        self.sums.push(s);
        self.counts.push(c);
    }
}

/// Dimensions up to this size accumulate blocks in a dense scratch buffer;
/// larger ones sort the block's entries. Both paths add each coordinate's
/// contributions in sample order, so the sums agree.
const DENSE_SCRATCH_MAX_DIM: usize = 1 << 16;

fn block_partial(v: &DenseVector, block: &[&Example]) -> Result<Partial> {
    let dim = v.dim();
    if dim <= DENSE_SCRATCH_MAX_DIM {
        let mut sums = vec![0.0f64; dim];
        let mut counts = vec![0u64; dim];
        for e in block {
            let slope = logistic_slope(dot(&e.features, v)?, e.y());
            for (i, x) in e.features.iter() {
                sums[i] += slope * x;
                counts[i] += 1;
            }
        }
        let mut out = Partial::default();
        for i in 0..dim {
            if counts[i] > 0 {
                out.push(i as u32, sums[i], counts[i]);
            }
        }
        Ok(out)
    } else {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for e in block {
            let slope = logistic_slope(dot(&e.features, v)?, e.y());
            entries.extend(e.features.iter().map(|(i, x)| (i as u32, slope * x)));
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut out = Partial::default();
        for (i, g) in entries {
            if out.indices.last() == Some(&i) {
                *out.sums.last_mut().unwrap() += g;
                *out.counts.last_mut().unwrap() += 1;
            } else {
                // 0.0 + g keeps the dense path's signed-zero behaviour
                out.push(i, 0.0 + g, 1);
            }
        }
        Ok(out)
    }
}

/// Pairwise reduction in block order; odd tails carry to the next level.
/// The tree depends only on the number of leaves.
fn tree_reduce(mut level: Vec<Partial>, pool: Option<&ThreadPool>) -> Partial {
    while level.len() > 1 {
        let step = |pair: &[Partial]| match pair {
            [a, b] => Partial::merge(a, b),
            [a] => a.clone(),
            _ => unreachable!(),
        };
        level = match pool {
            Some(pool) => pool.install(|| level.par_chunks(2).map(step).collect()),
            None => level.chunks(2).map(step).collect(),
        };
    }
    level.pop().unwrap_or_default()
}

/// Computes mean gradients over a batch with `workers` threads.
///
/// Samples are cut into fixed-size leaf blocks. Each block's partial sum is
/// computed by whichever worker picks it up, then partials are combined by
/// a binary tree fixed by the block count. The output is bitwise identical
/// for every worker count.
pub struct BatchEngine {
    workers: usize,
    block_size: usize,
    pool: Option<ThreadPool>,
}

impl BatchEngine {
    pub const DEFAULT_BLOCK_SIZE: usize = 4096;

    pub fn new(workers: usize, block_size: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be >= 1"));
        }
        if block_size == 0 {
            return Err(Error::invalid("block size must be >= 1"));
        }
        let pool = if workers > 1 {
            Some(
                ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("batch-worker-{i}"))
                    .build()
                    .map_err(|e| Error::InvalidState(format!("cannot start worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(BatchEngine {
            workers,
            block_size,
            pool,
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Mean gradient at `v` and nonzero counts over `samples`. The stats
    /// floor is `1 / samples.len()`.
    pub fn gradient(&self, v: &DenseVector, samples: &[&Example]) -> Result<(DenseVector, FeatureStats)> {
        if samples.is_empty() {
            return Err(Error::invalid("batch gradient needs at least one sample"));
        }
        for e in samples {
            Error::check_dim(v.dim(), e.features.dim())?;
        }
        let blocks: Vec<&[&Example]> = samples.chunks(self.block_size).collect();
        let leaves: Vec<Partial> = match &self.pool {
            Some(pool) => pool.install(|| blocks.par_iter().map(|b| block_partial(v, b)).collect::<Result<_>>())?,
            None => blocks.iter().map(|b| block_partial(v, b)).collect::<Result<_>>()?,
        };
        debug!("batch gradient: {} samples in {} blocks", samples.len(), leaves.len());
        let root = tree_reduce(leaves, self.pool.as_ref());

        let n = samples.len();
        let mut grad = DenseVector::zeros(v.dim());
        let mut counts = vec![0u64; v.dim()];
        for ((&i, &s), &c) in root.indices.iter().zip(root.sums.iter()).zip(root.counts.iter()) {
            grad[i as usize] = s / n as f64;
            counts[i as usize] = c;
        }
        let stats = FeatureStats::new(counts, n as u64, 1.0 / n as f64)?;
        Ok((grad, stats))
    }
}

/// One-shot [`BatchEngine`] with the default block size.
pub fn batch_gradient(v: &DenseVector, samples: &[&Example], workers: usize) -> Result<(DenseVector, FeatureStats)> {
    BatchEngine::new(workers, BatchEngine::DEFAULT_BLOCK_SIZE)?.gradient(v, samples)
}

/// High-probability bound on `max_k ||batch_grad_k - grad F(v_k)||` over
/// `epochs` anchors when each batch has `batch_size` samples of
/// `lipschitz`-Lipschitz losses: `sqrt((2 G^2 log(K / delta) + G^2) / N)`.
pub fn batch_error_bound(lipschitz: f64, epochs: u64, delta: f64, batch_size: u64) -> f64 {
    let g2 = lipschitz * lipschitz;
    ((2.0 * g2 * (epochs as f64 / delta).ln() + g2) / batch_size as f64).sqrt()
}

/// Smallest batch size for which [`batch_error_bound`] is at most `eps`.
pub fn required_batch_size(lipschitz: f64, epochs: u64, delta: f64, eps: f64) -> Result<u64> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid(format!("G must be positive, got {lipschitz}")));
    }
    if epochs == 0 {
        return Err(Error::invalid("K must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let g2 = lipschitz * lipschitz;
    let n = (2.0 * g2 * (epochs as f64 / delta).ln() + g2) / (eps * eps);
    if !(n.is_finite() && n < u64::MAX as f64) {
        return Err(Error::invalid("required batch size overflows"));
    }
    Ok((n.ceil() as u64).max(1))
}

/// Outcome of [`monte_carlo_variance_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    /// Monte-Carlo estimate of `E ||g||^2`.
    pub estimate: f64,
    /// `8L (F(w) - F*) + 8L (F(v) - F*) + 2 ||b||^2`.
    pub bound: f64,
    /// `||batch_grad - grad F(v)||`.
    pub bias_norm: f64,
    pub loss_w: f64,
    pub loss_v: f64,
    pub loss_star: f64,
    pub smoothness: f64,
    pub slack: f64,
    /// Estimate below `1e-6 G^2`: nothing to compare.
    pub degenerate: bool,
    pub pass: bool,
}

pub const VARIANCE_CHECK_SLACK: f64 = 1.5;

/// Samples `n_samples` dense variance-reduced gradients at `w` and compares
/// their mean squared norm with the smoothness bound at the anchor.
pub fn monte_carlo_variance_check(
    w: &DenseVector,
    anchor: &AnchorState,
    d: &Dataset,
    n_samples: usize,
    w_star: &DenseVector,
    seed: u64,
) -> Result<VarianceReport> {
    let meta = estimate_constants(d);
    let l = meta.smoothness;
    let mut sampler = StreamSampler::new(d, seed);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let e = sampler.next_sample()?;
        let g = combine_dense(&logistic_grad(w, e)?, &logistic_grad(&anchor.v, e)?, &anchor.batch_grad)?;
        acc += g.norm_sq();
    }
    let estimate = if n_samples == 0 { 0.0 } else { acc / n_samples as f64 };

    let exact_v = empirical_gradient(&anchor.v, d)?;
    let bias_norm = anchor.batch_grad.sub(&exact_v)?.norm_sq().sqrt();
    let loss_w = empirical_loss(w, d)?;
    let loss_v = empirical_loss(&anchor.v, d)?;
    let loss_star = empirical_loss(w_star, d)?;
    let bound = 8.0 * l * (loss_w - loss_star) + 8.0 * l * (loss_v - loss_star) + 2.0 * bias_norm * bias_norm;

    let degenerate = estimate < 1e-6 * meta.lipschitz * meta.lipschitz;
    let pass = degenerate || estimate <= VARIANCE_CHECK_SLACK * bound;
    Ok(VarianceReport {
        estimate,
        bound,
        bias_norm,
        loss_w,
        loss_v,
        loss_star,
        smoothness: l,
        slack: VARIANCE_CHECK_SLACK,
        degenerate,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;

    fn sv(dim: usize, pairs: &[(usize, f64)]) -> SparseVector {
        SparseVector::from_pairs(dim, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn combine_dense_examples() {
        let g = sv(3, &[(0, 0.3), (2, -1.7)]);
        let b: DenseVector = vec![0.1, 0.2, 0.7].into();
        assert_eq!(combine_dense(&g, &g, &b).unwrap(), b);

        let z = SparseVector::empty(3);
        assert_eq!(combine_dense(&g, &z, &DenseVector::zeros(3)).unwrap(), g.to_dense());

        let out = combine_dense(&sv(1, &[(0, 3.0)]), &sv(1, &[(0, 1.0)]), &vec![2.0].into()).unwrap();
        assert_eq!(out.as_slice(), &[4.0]);

        assert!(combine_dense(&sv(2, &[]), &z, &b).is_err());
    }

    #[test]
    fn combine_sparse_examples() {
        let stats = FeatureStats::new(vec![2, 1], 2, 0.5).unwrap();
        let out = combine_sparse(&sv(2, &[(0, 1.0)]), &sv(2, &[(0, 0.5)]), &vec![2.0, 3.0].into(), &stats).unwrap();
        assert_eq!(out.indices(), &[0]);
        assert_eq!(out.values(), &[2.5]);

        let empty = combine_sparse(&sv(2, &[]), &sv(2, &[]), &vec![2.0, 3.0].into(), &stats).unwrap();
        assert!(empty.is_empty());

        let err = combine_sparse(
            &sv(2, &[]),
            &sv(2, &[]),
            &vec![2.0, 3.0].into(),
            &FeatureStats::empty(2),
        );
        assert!(matches!(err, Err(Error::InvalidState(_))));
    }

    #[test]
    fn combine_sparse_with_unit_probabilities_matches_dense() {
        let gw = sv(3, &[(0, 0.25), (1, -1.5), (2, 2.0)]);
        let ga = sv(3, &[(0, 0.5), (1, 0.125), (2, -1.0)]);
        let b: DenseVector = vec![0.3, -0.6, 0.9].into();
        let stats = FeatureStats::new(vec![4, 4, 4], 4, 0.25).unwrap();
        let sparse = combine_sparse(&gw, &ga, &b, &stats).unwrap();
        assert_eq!(sparse.to_dense(), combine_dense(&gw, &ga, &b).unwrap());
    }

    #[test]
    fn p_hat_is_floored_and_capped() {
        let s = FeatureStats::new(vec![0, 5, 10], 10, 0.2).unwrap();
        assert_eq!(s.p_hat(0), 0.2);
        assert_eq!(s.p_hat(1), 0.5);
        assert_eq!(s.p_hat(2), 1.0);
        assert!(FeatureStats::new(vec![11], 10, 0.1).is_err());
        assert!(FeatureStats::new(vec![1], 10, 0.0).is_err());
    }

    fn ex(dim: usize, pairs: &[(usize, f64)], label: Label) -> Example {
        Example::new(sv(dim, pairs), label)
    }

    #[test]
    fn batch_gradient_examples() {
        // slopes at v = 0 are -y/2, so y = -2 * slope; choose features giving [1,0] and [0,1]
        let a = ex(2, &[(0, -2.0)], Label::Positive);
        let b = ex(2, &[(1, 2.0)], Label::Negative);
        let (g, stats) = batch_gradient(&DenseVector::zeros(2), &[&a, &b], 2).unwrap();
        assert_eq!(g.as_slice(), &[0.5, 0.5]);
        assert_eq!(stats.nonzero_counts(), &[1, 1]);
        assert_eq!(stats.total(), 2);

        let v: DenseVector = vec![0.3, -0.2].into();
        let c = ex(2, &[(0, 0.7), (1, 1.1)], Label::Positive);
        let (g, _) = batch_gradient(&v, &[&c], 1).unwrap();
        assert_eq!(g, logistic_grad(&v, &c).unwrap().to_dense());

        assert!(batch_gradient(&v, &[], 1).is_err());
        assert!(batch_gradient(&v, &[&c], 0).is_err());
    }

    #[test]
    fn sorted_and_dense_block_paths_agree() {
        let dim = 10;
        let examples: Vec<Example> = (0..50)
            .map(|k| {
                ex(
                    dim,
                    &[
                        (k % dim, 0.1 * k as f64 - 2.0),
                        ((3 * k + 1) % dim, 1.0 / (k as f64 + 1.0)),
                    ],
                    if k % 3 == 0 { Label::Positive } else { Label::Negative },
                )
            })
            .collect();
        let refs: Vec<&Example> = examples.iter().collect();
        let v: DenseVector = (0..dim).map(|i| 0.05 * i as f64).collect::<Vec<_>>().into();
        let dense_path = block_partial(&v, &refs).unwrap();

        let mut entries = Vec::new();
        for e in &refs {
            let slope = logistic_slope(dot(&e.features, &v).unwrap(), e.y());
            entries.extend(e.features.iter().map(|(i, x)| (i as u32, slope * x)));
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut sorted = Partial::default();
        for (i, g) in entries {
            if sorted.indices.last() == Some(&i) {
                *sorted.sums.last_mut().unwrap() += g;
                *sorted.counts.last_mut().unwrap() += 1;
            } else {
                sorted.push(i, 0.0 + g, 1);
            }
        }
        assert_eq!(dense_path.indices, sorted.indices);
        assert_eq!(dense_path.sums, sorted.sums);
        assert_eq!(dense_path.counts, sorted.counts);
    }

    #[test]
    fn batch_size_inversion_examples() {
        assert_eq!(required_batch_size(1.0, 1, (-1.0f64).exp(), 1.0).unwrap(), 3);
        assert_eq!(required_batch_size(2.0, 8, 0.01, 0.1).unwrap(), 5748);
        let n = required_batch_size(2.0, 8, 0.01, 0.1).unwrap();
        assert!(batch_error_bound(2.0, 8, 0.01, n) <= 0.1);
        assert!(batch_error_bound(2.0, 8, 0.01, n - 1) > 0.1);
    }

    #[test]
    fn halving_eps_quadruples_batch_size() {
        for &(g, k, d, e) in &[(1.0, 4, 0.1, 0.3), (3.0, 16, 0.05, 0.02), (0.5, 1, 0.5, 1.0)] {
            let a = required_batch_size(g, k, d, e).unwrap();
            let b = required_batch_size(g, k, d, e / 2.0).unwrap();
            assert!(b >= 4 * a - 4 && b <= 4 * a, "{a} -> {b}");
        }
    }

    #[test]
    fn batch_size_rejects_bad_input() {
        assert!(required_batch_size(0.0, 1, 0.5, 1.0).is_err());
        assert!(required_batch_size(1.0, 0, 0.5, 1.0).is_err());
        assert!(required_batch_size(1.0, 1, 1.0, 1.0).is_err());
        assert!(required_batch_size(1.0, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn anchor_state_validation() {
        assert!(AnchorState::new(DenseVector::zeros(2), DenseVector::zeros(3), 1, 1).is_err());
        assert!(AnchorState::new(DenseVector::zeros(2), DenseVector::zeros(2), 1, 0).is_err());
    }
}
