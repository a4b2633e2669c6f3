//! Dense matrices, sparse vectors, and the elementwise nonlinearities.
//!
//! Everything is 64-bit. Matrices are row-major. Sparse vectors are sorted
//! `(index, value)` pairs so iteration order is deterministic. These types
//! carry no BLAS backing; the scales in this crate (thousands of features,
//! a few hundred hidden units) never need one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn dim_mismatch(op: &'static str, expected: String, found: String) -> Error {
    Error::DimMismatch { op, expected, found }
}

/// Dense vector of finite 64-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVec {
    data: Vec<f64>,
}

impl DenseVec {
    /// Builds from raw storage, rejecting NaN/Inf entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArg("DenseVec entries must be finite".into()));
        }
        Ok(DenseVec { data })
    }

    pub fn zeros(len: usize) -> Self {
        DenseVec { data: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn dot(&self, other: &DenseVec) -> Result<f64> {
        if self.len() != other.len() {
            return Err(dim_mismatch(
                "dot",
                format!("len {}", self.len()),
                format!("len {}", other.len()),
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &DenseVec) -> Result<()> {
        if self.len() != other.len() {
            return Err(dim_mismatch(
                "add_scaled",
                format!("len {}", self.len()),
                format!("len {}", other.len()),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArg(format!(
                "DenseMat storage length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArg("DenseMat entries must be finite".into()));
        }
        Ok(DenseMat { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `M x` for dense `x`.
    pub fn matvec(&self, x: &DenseVec) -> Result<DenseVec> {
        if x.len() != self.cols {
            return Err(dim_mismatch(
                "matvec",
                format!("{}x{} matrix", self.rows, self.cols),
                format!("len {} vector", x.len()),
            ));
        }
        let mut out = DenseVec::zeros(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.as_slice()) {
                acc += a * b;
            }
            out.set(r, acc);
        }
        Ok(out)
    }

    /// `M x` for sparse `x`; touches only stored entries of `x`.
    pub fn matvec_sparse(&self, x: &SparseVec) -> Result<DenseVec> {
        if x.dim() != self.cols {
            return Err(dim_mismatch(
                "matvec_sparse",
                format!("{}x{} matrix", self.rows, self.cols),
                format!("dim {} sparse vector", x.dim()),
            ));
        }
        let mut out = DenseVec::zeros(self.rows);
        for r in 0..self.rows {
            let base = r * self.cols;
            let mut acc = 0.0;
            for &(i, v) in x.entries() {
                acc += self.data[base + i] * v;
            }
            out.set(r, acc);
        }
        Ok(out)
    }

    /// `M^T v`.
    pub fn matvec_transpose(&self, v: &DenseVec) -> Result<DenseVec> {
        if v.len() != self.rows {
            return Err(dim_mismatch(
                "matvec_transpose",
                format!("{}x{} matrix", self.rows, self.cols),
                format!("len {} vector", v.len()),
            ));
        }
        let mut out = DenseVec::zeros(self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            let s = v.get(r);
            for (o, a) in out.as_mut_slice().iter_mut().zip(row) {
                *o += s * a;
            }
        }
        Ok(out)
    }

    /// `self += s * u x^T` for sparse `x`; touches only columns in `x`'s
    /// support.
    pub fn add_scaled_outer_sparse(&mut self, s: f64, u: &DenseVec, x: &SparseVec) -> Result<()> {
        if u.len() != self.rows || x.dim() != self.cols {
            return Err(dim_mismatch(
                "add_scaled_outer_sparse",
                format!("{}x{} matrix", self.rows, self.cols),
                format!("len {} vector, dim {} sparse", u.len(), x.dim()),
            ));
        }
        for r in 0..self.rows {
            let su = s * u.get(r);
            if su == 0.0 {
                continue;
            }
            let base = r * self.cols;
            for &(i, v) in x.entries() {
                self.data[base + i] += su * v;
            }
        }
        Ok(())
    }

    /// `self += s * u x^T` for dense `x`.
    pub fn add_scaled_outer(&mut self, s: f64, u: &DenseVec, x: &DenseVec) -> Result<()> {
        if u.len() != self.rows || x.len() != self.cols {
            return Err(dim_mismatch(
                "add_scaled_outer",
                format!("{}x{} matrix", self.rows, self.cols),
                format!("len {} by len {} outer", u.len(), x.len()),
            ));
        }
        for r in 0..self.rows {
            let su = s * u.get(r);
            if su == 0.0 {
                continue;
            }
            let row = self.row_mut(r);
            for (o, v) in row.iter_mut().zip(x.as_slice()) {
                *o += su * v;
            }
        }
        Ok(())
    }

    /// `self += s * other`, elementwise.
    pub fn add_scaled(&mut self, s: f64, other: &DenseMat) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(dim_mismatch(
                "add_scaled (matrix)",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `u x^T` as a fresh dense matrix (sparse `x`).
pub fn outer_sparse(u: &DenseVec, x: &SparseVec) -> DenseMat {
    let mut m = DenseMat::zeros(u.len(), x.dim());
    m.add_scaled_outer_sparse(1.0, u, x).expect("shapes match by construction");
    m
}

/// `u x^T` as a fresh dense matrix (dense `x`).
pub fn outer(u: &DenseVec, x: &DenseVec) -> DenseMat {
    let mut m = DenseMat::zeros(u.len(), x.len());
    m.add_scaled_outer(1.0, u, x).expect("shapes match by construction");
    m
}

/// Sparse vector: sorted, strictly increasing indices with nonzero finite
/// values. Absent indices are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut last: Option<usize> = None;
        for &(i, v) in &entries {
            if i >= dim {
                return Err(Error::InvalidArg(format!(
                    "sparse index {i} out of range for dim {dim}"
                )));
            }
            if let Some(p) = last {
                if i <= p {
                    return Err(Error::InvalidArg(format!(
                        "sparse indices must be strictly increasing, got {p} then {i}"
                    )));
                }
            }
            if !v.is_finite() || v == 0.0 {
                return Err(Error::InvalidArg(format!(
                    "sparse value at index {i} must be finite and nonzero, got {v}"
                )));
            }
            last = Some(i);
        }
        Ok(SparseVec { dim, entries })
    }

    pub fn empty(dim: usize) -> Self {
        SparseVec { dim, entries: Vec::new() }
    }

    /// Densifies and drops exact zeros.
    pub fn from_dense(x: &DenseVec) -> Self {
        let entries = x
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        SparseVec { dim: x.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DenseVec {
        let mut out = DenseVec::zeros(self.dim);
        for &(i, v) in &self.entries {
            out.set(i, v);
        }
        out
    }

    pub fn dot_dense(&self, w: &DenseVec) -> Result<f64> {
        if w.len() != self.dim {
            return Err(dim_mismatch(
                "dot_dense",
                format!("dim {}", self.dim),
                format!("len {}", w.len()),
            ));
        }
        Ok(self.entries.iter().map(|&(i, v)| v * w.get(i)).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }
}

/// Elementwise logistic. Arguments are clamped to `[-700, 700]` before
/// exponentiation and outputs to the largest double below 1, so results stay
/// strictly inside `(0, 1)`.
pub fn sigm(a: &DenseVec) -> DenseVec {
    let mut out = DenseVec::zeros(a.len());
    for (o, v) in out.as_mut_slice().iter_mut().zip(a.as_slice()) {
        *o = sigmoid(*v);
    }
    out
}

/// Scalar logistic with the same clamping policy as [`sigm`].
pub fn sigmoid(a: f64) -> f64 {
    let a = a.clamp(-700.0, 700.0);
    let s = if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Numerically shifted softmax: invariant under adding a constant to every
/// input. Entries are positive and sum to 1 up to rounding.
pub fn softmax(a: &DenseVec) -> Result<DenseVec> {
    if a.is_empty() {
        return Err(Error::EmptyInput { what: "softmax input" });
    }
    let max = a.iter().fold(f64::NEG_INFINITY, f64::max);
    let mut out = DenseVec::zeros(a.len());
    let mut sum = 0.0;
    for (o, v) in out.as_mut_slice().iter_mut().zip(a.as_slice()) {
        let e = (v - max).exp();
        *o = e;
        sum += e;
    }
    for o in out.as_mut_slice() {
        *o /= sum;
        if *o == 0.0 {
            *o = f64::MIN_POSITIVE;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_basics() {
        assert_eq!(sigmoid(0.0), 0.5);
        let hi = sigmoid(1e9);
        let lo = sigmoid(-1e9);
        assert!(hi < 1.0 && hi > 0.999);
        assert!(lo > 0.0 && lo < 1e-300);
        // Direct scalar evaluation oracle.
        assert!((sigmoid(-0.3) - 1.0 / (1.0 + 0.3f64.exp())).abs() < 1e-15);
        assert!((sigmoid(0.7) - 1.0 / (1.0 + (-0.7f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_monotone() {
        let mut prev = 0.0;
        for k in -20..=20 {
            let s = sigmoid(k as f64 * 0.5);
            assert!(s > prev || k == -20);
            prev = s;
        }
    }

    #[test]
    fn softmax_basics() {
        let s = softmax(&DenseVec::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(s.as_slice(), &[0.5, 0.5]);
        let c = softmax(&DenseVec::new(vec![3.7, 3.7, 3.7]).unwrap()).unwrap();
        for v in c.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        // Proportions of (e^1, e^2, e^3).
        let p = softmax(&DenseVec::new(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        let z = 1f64.exp() + 2f64.exp() + 3f64.exp();
        for (i, v) in p.iter().enumerate() {
            assert!((v - ((i + 1) as f64).exp() / z).abs() < 1e-12);
        }
        assert!(softmax(&DenseVec::zeros(0)).is_err());
    }

    #[test]
    fn matvec_identity_and_zero() {
        let x = DenseVec::new(vec![1.0, 2.0]).unwrap();
        let id = DenseMat::identity(2);
        assert_eq!(id.matvec(&x).unwrap().as_slice(), &[1.0, 2.0]);
        let z = DenseMat::zeros(3, 2);
        assert_eq!(z.matvec(&x).unwrap().as_slice(), &[0.0, 0.0, 0.0]);
        assert!(id.matvec(&DenseVec::zeros(3)).is_err());
    }

    #[test]
    fn dim_mismatch_names_both_shapes() {
        let m = DenseMat::zeros(2, 3);
        let err = m.matvec(&DenseVec::zeros(4)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("4"), "{msg}");
    }

    #[test]
    fn sparse_matvec_matches_dense_expansion() {
        let mut rng = Rng::new(11);
        for _ in 0..20 {
            let (rows, cols) = (3, 4);
            let mut m = DenseMat::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, rng.uniform(-1.0, 1.0));
                }
            }
            let mut entries = Vec::new();
            for i in 0..cols {
                if rng.uniform(0.0, 1.0) < 0.6 {
                    entries.push((i, rng.uniform(-2.0, 2.0)));
                }
            }
            let sx = SparseVec::new(cols, entries).unwrap();
            let a = m.matvec_sparse(&sx).unwrap();
            let b = m.matvec(&sx.to_dense()).unwrap();
            for (u, v) in a.iter().zip(b.iter()) {
                assert!((u - v).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sparse_validation() {
        assert!(SparseVec::new(3, vec![(0, 1.0), (0, 2.0)]).is_err());
        assert!(SparseVec::new(3, vec![(1, 1.0), (0, 2.0)]).is_err());
        assert!(SparseVec::new(3, vec![(3, 1.0)]).is_err());
        assert!(SparseVec::new(3, vec![(1, 0.0)]).is_err());
        assert!(SparseVec::new(3, vec![(0, f64::NAN)]).is_err());
        assert!(SparseVec::new(3, vec![(0, 1.5), (2, -2.0)]).is_ok());
    }

    #[test]
    fn outer_against_elementwise() {
        let u = DenseVec::new(vec![1.0, -2.0]).unwrap();
        let x = SparseVec::new(3, vec![(0, 3.0), (2, 0.5)]).unwrap();
        let m = outer_sparse(&u, &x);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(0, 2), 0.5);
        assert_eq!(m.get(1, 0), -6.0);
        assert_eq!(m.get(1, 2), -1.0);
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(xs in proptest::collection::vec(-30.0f64..30.0, 1..20)) {
            let v = DenseVec::new(xs).unwrap();
            let s = softmax(&v).unwrap();
            let total: f64 = s.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(s.iter().all(|p| p > 0.0));
        }

        #[test]
        fn sigmoid_complement(x in -100.0f64..100.0) {
            prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn softmax_shift_invariant(xs in proptest::collection::vec(-10.0f64..10.0, 1..10), c in -50.0f64..50.0) {
            let v = DenseVec::new(xs.clone()).unwrap();
            let shifted = DenseVec::new(xs.iter().map(|x| x + c).collect()).unwrap();
            let a = softmax(&v).unwrap();
            let b = softmax(&shifted).unwrap();
            for (p, q) in a.iter().zip(b.iter()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }

        #[test]
        fn sparse_dense_matvec_agree(seed in 0u64..1000) {
            let mut rng = Rng::new(seed);
            let rows = 1 + rng.index(5);
            let cols = 1 + rng.index(6);
            let mut m = DenseMat::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, rng.uniform(-3.0, 3.0));
                }
            }
            let mut entries = Vec::new();
            for i in 0..cols {
                if rng.uniform(0.0, 1.0) < 0.5 {
                    entries.push((i, rng.uniform(-3.0, 3.0)));
                }
            }
            let sx = SparseVec::new(cols, entries).unwrap();
            let a = m.matvec_sparse(&sx).unwrap();
            let b = m.matvec(&sx.to_dense()).unwrap();
            for (u, v) in a.iter().zip(b.iter()) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }
}
