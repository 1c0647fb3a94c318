//! Logistic loss oracle and problem constants.

use crate::data::{Dataset, Example};
use crate::error::Result;
use crate::linalg::{axpy_sparse_in_place, dot, DenseVector, SparseVector};

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-z))`, stable on both sides of zero.
#[inline]
pub fn log1p_exp_neg(z: f64) -> f64 {
    if z >= 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Loss from a precomputed margin `w . x`.
#[inline]
pub fn logistic_loss_margin(margin: f64, y: f64) -> f64 {
    log1p_exp_neg(y * margin)
}

/// Derivative of the loss with respect to the margin: `-y * sigmoid(-y * margin)`.
#[inline]
pub fn logistic_slope(margin: f64, y: f64) -> f64 {
    -y * sigmoid(-y * margin)
}

pub fn logistic_loss(w: &DenseVector, e: &Example) -> Result<f64> {
    let margin = dot(&e.features, w)?;
    Ok(logistic_loss_margin(margin, e.y()))
}

/// Gradient `slope * x`; its support is the support of `x`.
pub fn logistic_grad(w: &DenseVector, e: &Example) -> Result<SparseVector> {
    let margin = dot(&e.features, w)?;
    Ok(e.features.scaled(logistic_slope(margin, e.y())))
}

/// Mean loss over a dataset, summed in example order. Zero for an empty set.
pub fn empirical_loss(w: &DenseVector, d: &Dataset) -> Result<f64> {
    let mut acc = 0.0;
    for e in d.examples() {
        acc += logistic_loss(w, e)?;
    }
    Ok(if d.is_empty() { 0.0 } else { acc / d.len() as f64 })
}

/// Exact gradient of the mean loss over a dataset, summed in example order.
pub fn empirical_gradient(w: &DenseVector, d: &Dataset) -> Result<DenseVector> {
    let mut out = DenseVector::zeros(w.dim());
    for e in d.examples() {
        let margin = dot(&e.features, w)?;
        axpy_sparse_in_place(logistic_slope(margin, e.y()), &e.features, &mut out)?;
    }
    if !d.is_empty() {
        out.scale(1.0 / d.len() as f64);
    }
    Ok(out)
}

/// Lipschitz, smoothness and diameter bounds for a logistic problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemMeta {
    /// Lipschitz bound `max ||x||`.
    pub lipschitz: f64,
    /// Smoothness bound `max ||x||^2 / 4`.
    pub smoothness: f64,
    /// Domain diameter; `None` means unbounded.
    pub diameter: Option<f64>,
    pub dim: usize,
}

impl ProblemMeta {
    pub fn with_diameter(mut self, diameter: Option<f64>) -> Self {
        self.diameter = diameter;
        self
    }
}

pub fn estimate_constants(d: &Dataset) -> ProblemMeta {
    let max_sq = d.examples().iter().map(|e| e.features.norm_sq()).fold(0.0, f64::max);
    ProblemMeta {
        lipschitz: max_sq.sqrt(),
        smoothness: max_sq / 4.0,
        diameter: None,
        dim: d.dim(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;
    use approx::assert_relative_eq;

    fn example(pairs: &[(usize, f64)], dim: usize, label: Label) -> Example {
        Example::new(SparseVector::from_pairs(dim, pairs.iter().copied()).unwrap(), label)
    }

    #[test]
    fn loss_values() {
        let e = example(&[(0, 1.0), (2, -3.0)], 3, Label::Negative);
        assert_relative_eq!(
            logistic_loss(&DenseVector::zeros(3), &e).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        let e = example(&[(0, 1.0)], 1, Label::Positive);
        let v = logistic_loss(&vec![2.0].into(), &e).unwrap();
        assert_relative_eq!(v, 0.126928011042973, epsilon = 1e-12);
        let v = logistic_loss(&vec![40.0].into(), &e).unwrap();
        assert!((0.0..=1e-15).contains(&v));
        let v = logistic_loss(&vec![-800.0].into(), &e).unwrap();
        assert_eq!(v, 800.0);
    }

    #[test]
    fn grad_values() {
        let e = example(&[(0, 2.0), (1, -4.0)], 2, Label::Positive);
        let g = logistic_grad(&DenseVector::zeros(2), &e).unwrap();
        assert_eq!(g.values(), &[-1.0, 2.0]);

        let e = example(&[], 2, Label::Positive);
        assert!(logistic_grad(&vec![1.0, 1.0].into(), &e).unwrap().is_empty());

        let e = example(&[(0, 1.0)], 1, Label::Positive);
        let g = logistic_grad(&vec![2.0].into(), &e).unwrap();
        assert_relative_eq!(g.get(0), -0.11920292202211755, epsilon = 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let e = example(&[(0, 1.0)], 2, Label::Positive);
        assert!(logistic_loss(&DenseVector::zeros(3), &e).is_err());
        assert!(logistic_grad(&DenseVector::zeros(1), &e).is_err());
    }

    #[test]
    fn constants() {
        let unit = Dataset::new(
            vec![
                example(&[(0, 1.0)], 2, Label::Positive),
                example(&[(0, 0.6), (1, 0.8)], 2, Label::Negative),
            ],
            2,
        )
        .unwrap();
        let m = estimate_constants(&unit);
        assert_relative_eq!(m.lipschitz, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.smoothness, 0.25, epsilon = 1e-15);
        assert_eq!(m.diameter, None);

        let single = Dataset::new(vec![example(&[(0, 2.0)], 1, Label::Positive)], 1).unwrap();
        let m = estimate_constants(&single);
        assert_eq!((m.lipschitz, m.smoothness), (2.0, 1.0));

        let blank = Dataset::new(vec![example(&[], 3, Label::Positive)], 3).unwrap();
        let m = estimate_constants(&blank);
        assert_eq!((m.lipschitz, m.smoothness), (0.0, 0.0));
    }

    #[test]
    fn sigmoid_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }
}
