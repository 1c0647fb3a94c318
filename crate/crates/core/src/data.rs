//! LibSVM ingestion with feature hashing, the i.i.d. sample stream, and the
//! synthetic logistic problem generator.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseVector, SparseVector};
use crate::loss::sigmoid;

pub const MAX_HASH_BITS: u32 = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn from_sign(y: f64) -> Self {
        if y > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// One labelled data point.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub features: SparseVector,
    pub label: Label,
}

impl Example {
    pub fn new(features: SparseVector, label: Label) -> Self {
        Example { features, label }
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.label.sign()
    }

    /// Canonical LibSVM line over the already-hashed indices.
    pub fn to_libsvm(&self) -> String {
        let mut out = String::from(match self.label {
            Label::Positive => "+1",
            Label::Negative => "-1",
        });
        for (i, v) in self.features.iter() {
            let _ = write!(out, " {i}:{v}");
        }
        out
    }

    /// Same example with every feature multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Example {
        Example::new(self.features.scaled(factor), self.label)
    }
}

/// An in-memory collection of examples sharing one dimension.
#[derive(Clone, Debug)]
pub struct Dataset {
    examples: Vec<Example>,
    dim: usize,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, dim: usize) -> Result<Self> {
        for e in &examples {
            Error::check_dim(dim, e.features.dim())?;
        }
        Ok(Dataset { examples, dim })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    #[inline]
    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn get(&self, i: usize) -> Option<&Example> {
        self.examples.get(i)
    }

    /// Dataset with every feature vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Dataset {
        Dataset {
            examples: self.examples.iter().map(|e| e.scaled(factor)).collect(),
            dim: self.dim,
        }
    }

    /// Parses LibSVM text, hashing every raw feature index into `2^hash_bits`
    /// buckets. Blank lines and `#` comments are skipped.
    pub fn from_libsvm_str(text: &str, hash_bits: u32) -> Result<Self> {
        check_hash_bits(hash_bits)?;
        let mut examples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.trim().is_empty() {
                continue;
            }
            let e = parse_libsvm_line(line, hash_bits).map_err(|err| match err {
                Error::Parse { msg, .. } => Error::Parse { line: lineno + 1, msg },
                other => other,
            })?;
            examples.push(e);
        }
        Dataset::new(examples, 1usize << hash_bits)
    }

    pub fn load_libsvm(path: impl AsRef<Path>, hash_bits: u32) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Dataset::from_libsvm_str(&text, hash_bits)
    }

    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for e in &self.examples {
            out.push_str(&e.to_libsvm());
            out.push('\n');
        }
        out
    }
}

fn check_hash_bits(hash_bits: u32) -> Result<()> {
    if (1..=MAX_HASH_BITS).contains(&hash_bits) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "hash_bits must be in [1, {MAX_HASH_BITS}], got {hash_bits}"
        )))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// SplitMix64 finalizer (Steele, Lea & Flood 2014), truncated to `hash_bits`.
///
/// Seedless and platform independent.
pub fn hash_feature(raw_index: u64, hash_bits: u32) -> u64 {
    debug_assert!((1..=MAX_HASH_BITS).contains(&hash_bits));
    let mut z = raw_index.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z & ((1u64 << hash_bits) - 1)
}

fn parse_error(msg: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        msg: msg.into(),
    }
}

fn parse_label(token: &str) -> Result<Label> {
    match token {
        "1" | "+1" => return Ok(Label::Positive),
        "0" | "-1" => return Ok(Label::Negative),
        _ => {}
    }
    match token.parse::<f64>() {
        Ok(1.0) => Ok(Label::Positive),
        Ok(v) if v == 0.0 || v == -1.0 => Ok(Label::Negative),
        _ => Err(parse_error(format!("invalid label {token:?}"))),
    }
}

fn parse_line_with<F>(line: &str, dim: usize, mut map_index: F) -> Result<Example>
where
    F: FnMut(u64) -> Result<usize>,
{
    let line = strip_comment(line);
    let mut tokens = line.split_whitespace();
    let label = parse_label(tokens.next().ok_or_else(|| parse_error("missing label"))?)?;
    let mut pairs = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_error(format!("malformed token {tok:?}")))?;
        let idx: u64 = idx
            .parse()
            .map_err(|_| parse_error(format!("non-numeric index in {tok:?}")))?;
        let val: f64 = val
            .parse()
            .map_err(|_| parse_error(format!("non-numeric value in {tok:?}")))?;
        if !val.is_finite() {
            return Err(parse_error(format!("non-finite value in {tok:?}")));
        }
        pairs.push((map_index(idx)?, val));
    }
    let features = SparseVector::from_pairs(dim, pairs)?;
    Ok(Example::new(features, label))
}

/// Parses one `<label> <idx>:<val> ...` line, hashing indices into
/// `[0, 2^hash_bits)`. Colliding indices are summed.
pub fn parse_libsvm_line(line: &str, hash_bits: u32) -> Result<Example> {
    check_hash_bits(hash_bits)?;
    parse_line_with(line, 1usize << hash_bits, |raw| {
        Ok(hash_feature(raw, hash_bits) as usize)
    })
}

/// Parses a line whose indices are already in `[0, dim)`, e.g. the output
/// of [`Example::to_libsvm`].
pub fn parse_libsvm_line_unhashed(line: &str, dim: usize) -> Result<Example> {
    parse_line_with(line, dim, |raw| {
        if (raw as usize) < dim {
            Ok(raw as usize)
        } else {
            Err(parse_error(format!("index {raw} out of range for dimension {dim}")))
        }
    })
}

/// Uniform with-replacement sampler over a dataset.
pub struct StreamSampler<'a> {
    dataset: &'a Dataset,
    rng: ChaCha8Rng,
    drawn: u64,
}

impl<'a> StreamSampler<'a> {
    pub fn new(dataset: &'a Dataset, seed: u64) -> Self {
        StreamSampler {
            dataset,
            rng: ChaCha8Rng::seed_from_u64(seed),
            drawn: 0,
        }
    }

    pub fn next_sample(&mut self) -> Result<&'a Example> {
        let n = self.dataset.len();
        if n == 0 {
            return Err(Error::InvalidState("cannot sample from an empty dataset".into()));
        }
        let i = self.rng.random_range(0..n as u64) as usize;
        self.drawn += 1;
        Ok(&self.dataset.examples[i])
    }

    /// Draws `count` samples into a new vector.
    pub fn take(&mut self, count: usize) -> Result<Vec<&'a Example>> {
        (0..count).map(|_| self.next_sample()).collect()
    }

    #[inline]
    pub fn samples_drawn(&self) -> u64 {
        self.drawn
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }
}

/// Parameters of a synthetic logistic problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub n: usize,
    pub sparsity: usize,
    /// Euclidean norm of the generating weight vector.
    pub w_norm: f64,
    /// Held-out examples drawn from the same distribution.
    pub n_test: usize,
}

impl SyntheticSpec {
    pub fn new(dim: usize, n: usize) -> Self {
        SyntheticSpec {
            dim,
            n,
            sparsity: dim.min(5),
            w_norm: 3.0,
            n_test: n / 4,
        }
    }
}

/// Random direction of the given norm, deterministic in `seed`.
pub fn random_weights(dim: usize, norm: f64, seed: u64) -> DenseVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let len = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len > 0.0 {
        w.iter_mut().for_each(|v| *v *= norm / len);
    }
    DenseVector::from_vec(w)
}

/// Generates `n` examples with `sparsity` distinct standard-normal features
/// each, labelled +1 with probability `sigmoid(w_true . x)`.
pub fn gen_synthetic(dim: usize, n: usize, sparsity: usize, w_true: &DenseVector, seed: u64) -> Result<Dataset> {
    if dim == 0 || n == 0 || sparsity > dim {
        return Err(Error::invalid(format!(
            "need dim >= 1, n >= 1, sparsity <= dim (dim={dim}, n={n}, sparsity={sparsity})"
        )));
    }
    Error::check_dim(dim, w_true.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut coords = index::sample(&mut rng, dim, sparsity).into_vec();
        coords.sort_unstable();
        let pairs: Vec<(usize, f64)> = coords
            .into_iter()
            .map(|i| (i, rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let features = SparseVector::from_pairs(dim, pairs)?;
        let p = sigmoid(dot(&features, w_true)?);
        let label = if rng.random::<f64>() < p {
            Label::Positive
        } else {
            Label::Negative
        };
        examples.push(Example::new(features, label));
    }
    Dataset::new(examples, dim)
}

/// Train and test sets plus the generating weights for a synthetic spec.
pub fn gen_synthetic_split(spec: &SyntheticSpec, seed: u64) -> Result<(Dataset, Option<Dataset>, DenseVector)> {
    let w_true = random_weights(spec.dim, spec.w_norm, seed);
    let train = gen_synthetic(spec.dim, spec.n, spec.sparsity, &w_true, seed.wrapping_add(1))?;
    let test = if spec.n_test > 0 {
        Some(gen_synthetic(
            spec.dim,
            spec.n_test,
            spec.sparsity,
            &w_true,
            seed.wrapping_add(2),
        )?)
    } else {
        None
    };
    Ok((train, test, w_true))
}
