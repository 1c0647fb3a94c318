//! Reference tooling shared by the integration tests: a damped Newton
//! solver for the empirical logistic objective, written against nalgebra
//! and independent of the library's loss code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use svrg_ol::{Dataset, DenseVector};

fn dense_rows(d: &Dataset) -> (Vec<DVector<f64>>, Vec<f64>) {
    let rows = d
        .examples()
        .iter()
        .map(|e| DVector::from_vec(e.features.to_dense().into_vec()))
        .collect();
    let ys = d.examples().iter().map(|e| e.y()).collect();
    (rows, ys)
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        z.exp() / (1.0 + z.exp())
    }
}

/// Mean loss `log(1 + exp(-y w.x))` over densified rows.
pub fn objective(rows: &[DVector<f64>], ys: &[f64], w: &DVector<f64>) -> f64 {
    rows.iter().zip(ys).map(|(x, &y)| softplus(-y * x.dot(w))).sum::<f64>() / rows.len() as f64
}

pub fn oracle_loss(d: &Dataset, w: &DenseVector) -> f64 {
    let (rows, ys) = dense_rows(d);
    objective(&rows, &ys, &DVector::from_column_slice(w.as_slice()))
}

pub fn oracle_gradient(d: &Dataset, w: &DenseVector) -> Vec<f64> {
    let (rows, ys) = dense_rows(d);
    let w = DVector::from_column_slice(w.as_slice());
    let mut g = DVector::zeros(w.len());
    for (x, &y) in rows.iter().zip(&ys) {
        g += x * (-y * logistic(-y * x.dot(&w)));
    }
    (g / rows.len() as f64).as_slice().to_vec()
}

#[derive(Debug, Clone)]
pub struct Optimum {
    pub w: DenseVector,
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Damped Newton with backtracking until `||grad|| <= 1e-10`. Panics if the
/// problem has no finite minimiser within the iteration cap (separable data).
pub fn solve(d: &Dataset) -> Optimum {
    let (rows, ys) = dense_rows(d);
    let n = rows.len() as f64;
    let dim = d.dim();
    let mut w = DVector::<f64>::zeros(dim);
    let mut f = objective(&rows, &ys, &w);
    for it in 0..200 {
        let mut g = DVector::<f64>::zeros(dim);
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for (x, &y) in rows.iter().zip(&ys) {
            let m = x.dot(&w);
            let s = logistic(-y * m);
            g += x * (-y * s / n);
            h += (x * x.transpose()) * (s * (1.0 - s) / n);
        }
        let gn = g.norm();
        if gn <= 1e-10 {
            return Optimum {
                w: DenseVector::from_vec(w.as_slice().to_vec()),
                loss: f,
                grad_norm: gn,
                iterations: it,
            };
        }
        // tiny ridge keeps the system solvable on unused coordinates
        for i in 0..dim {
            h[(i, i)] += 1e-12;
        }
        let step = h.cholesky().expect("Hessian not positive definite").solve(&(-&g));
        let decrement = -g.dot(&step);
        if decrement < 1e-14 {
            // inside the quadratic region: loss changes are below f64 resolution
            w += &step;
            f = objective(&rows, &ys, &w);
            continue;
        }
        let mut t = 1.0;
        loop {
            let cand = &w + &step * t;
            let fc = objective(&rows, &ys, &cand);
            if fc <= f + 1e-4 * t * g.dot(&step) || t < 1e-12 {
                w = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
    }
    panic!("Newton oracle did not reach gradient norm 1e-10; is the data separable?");
}
