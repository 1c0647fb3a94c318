//! Sparse and dense vectors used for features, gradients and iterates.
//!
//! All reductions run in ascending index order so that repeated runs produce
//! identical floating-point results.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense vector of fixed dimension.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        DenseVector { values: vec![0.0; dim] }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        DenseVector { values }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self += alpha * other`, dense.
    pub fn axpy(&mut self, alpha: f64, other: &DenseVector) -> Result<()> {
        Error::check_dim(self.dim(), other.dim())?;
        for (y, x) in self.values.iter_mut().zip(other.values.iter()) {
            *y += alpha * x;
        }
        Ok(())
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(DenseVector::from_vec(
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn dot_dense(&self, other: &DenseVector) -> Result<f64> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(self.values.iter().zip(other.values.iter()).map(|(a, b)| a * b).sum())
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for DenseVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(values: Vec<f64>) -> Self {
        DenseVector::from_vec(values)
    }
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a sparse vector from arbitrary `(index, value)` pairs.
    ///
    /// Pairs are sorted by index, duplicates are summed in input order, and
    /// entries that end up exactly zero are dropped.
    pub fn from_pairs<I>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        if dim > u32::MAX as usize + 1 {
            return Err(Error::invalid(format!("dimension {dim} exceeds u32 index range")));
        }
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().collect();
        if let Some(&(bad, _)) = pairs.iter().find(|(i, _)| *i >= dim) {
            return Err(Error::invalid(format!("index {bad} out of range for dimension {dim}")));
        }
        // stable: duplicates keep their input order for summation
        pairs.sort_by_key(|&(i, _)| i);

        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&(i as u32)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i as u32);
                values.push(v);
            }
        }
        let mut out = SparseVector { dim, indices, values };
        out.drop_zeros();
        Ok(out)
    }

    /// Densify-free construction from already canonical parts.
    pub(crate) fn from_sorted_parts(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.last().is_none_or(|&i| (i as usize) < dim));
        let mut out = SparseVector { dim, indices, values };
        out.drop_zeros();
        out
    }

    fn drop_zeros(&mut self) {
        if self.values.contains(&0.0) {
            let mut k = 0;
            for j in 0..self.values.len() {
                if self.values[j] != 0.0 {
                    self.indices[k] = self.indices[j];
                    self.values[k] = self.values[j];
                    k += 1;
                }
            }
            self.indices.truncate(k);
            self.values.truncate(k);
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(index, value)` pairs in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(self.values.iter())
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Returns `alpha * self`; zero alpha yields an empty vector.
    pub fn scaled(&self, alpha: f64) -> SparseVector {
        SparseVector::from_sorted_parts(
            self.dim,
            self.indices.clone(),
            self.values.iter().map(|v| alpha * v).collect(),
        )
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut out = DenseVector::zeros(self.dim);
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Sparse-dense inner product over the support of `a`, ascending index order.
pub fn dot(a: &SparseVector, b: &DenseVector) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    let b = b.as_slice();
    let mut acc = 0.0;
    for (&i, &v) in a.indices.iter().zip(a.values.iter()) {
        acc += v * b[i as usize];
    }
    Ok(acc)
}

/// In-place `y += alpha * x`, touching only the support of `x`.
pub fn axpy_sparse_in_place(alpha: f64, x: &SparseVector, y: &mut DenseVector) -> Result<()> {
    Error::check_dim(x.dim(), y.dim())?;
    let y = y.as_mut_slice();
    for (&i, &v) in x.indices.iter().zip(x.values.iter()) {
        y[i as usize] += alpha * v;
    }
    Ok(())
}

/// Returns `y + alpha * x`.
pub fn axpy_sparse(alpha: f64, x: &SparseVector, y: &DenseVector) -> Result<DenseVector> {
    let mut out = y.clone();
    axpy_sparse_in_place(alpha, x, &mut out)?;
    Ok(out)
}

pub fn l2_norm(v: &DenseVector) -> f64 {
    v.norm_sq().sqrt()
}
