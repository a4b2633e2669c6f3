//! Closed-form marginalized stacked denoising autoencoder.
//!
//! Each layer is the linear map that best reconstructs clean inputs from
//! feature-dropout corruptions, computed in closed form by marginalizing
//! over the corruption distribution: with scatter `S` of bias-augmented
//! inputs and per-coordinate survival probabilities `q` (1-p for features,
//! 1 for the never-corrupted bias), the expected input/output second
//! moments are `P[i][j] = S[i][j] q_j` and `Q[i][j] = S[i][j] q_i q_j`
//! (diagonal `S[i][i] q_i`), and the layer solves `W Q = P` with a ridge
//! term for numerical safety. Layers stack with tanh between them; the
//! final representation concatenates the raw input with every layer output.
//! No sampling happens anywhere, so fitting is exactly deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, cholesky_solve};
use crate::tensor::{DenseMat, DenseVec, SparseVec};

/// Fitted feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdaModel {
    /// One `d x (d+1)` reconstruction map per layer.
    layers: Vec<DenseMat>,
    pub corruption_p: f64,
    pub ridge: f64,
    /// Dimension the layers operate in (after optional truncation).
    input_dim: usize,
    /// Dimension of raw inputs fed to [`transform`].
    source_dim: usize,
    /// Original indices kept by the frequency truncation, ascending;
    /// `None` when the full dimension is used.
    truncation: Option<Vec<usize>>,
}

impl MsdaModel {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn layers(&self) -> &[DenseMat] {
        &self.layers
    }

    pub fn truncation(&self) -> Option<&[usize]> {
        self.truncation.as_deref()
    }

    /// Length of the transformed representation: `d * (layers + 1)`.
    pub fn output_dim(&self) -> usize {
        self.input_dim * (self.layers.len() + 1)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let model: MsdaModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        for layer in &model.layers {
            if layer.shape() != (model.input_dim, model.input_dim + 1) {
                return Err(Error::Data("msda layer shape mismatch".into()));
            }
        }
        Ok(model)
    }
}

fn validate_fit_args(x: &[SparseVec], p: f64, layers: usize, ridge: f64) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyInput { what: "msda training data" });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArg(format!(
            "corruption probability must lie in (0, 1), got {p}"
        )));
    }
    if layers == 0 {
        return Err(Error::InvalidArg("number of layers must be >= 1".into()));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArg(format!("ridge must be >= 0, got {ridge}")));
    }
    let dim = x[0].dim();
    for xi in x {
        if xi.dim() != dim {
            return Err(Error::DimMismatch {
                op: "msda_fit",
                expected: format!("dim {dim}"),
                found: format!("dim {}", xi.dim()),
            });
        }
    }
    Ok(dim)
}

/// Solves one marginalized layer from the augmented scatter matrix.
fn solve_layer(scatter: &DenseMat, d: usize, p: f64, ridge: f64) -> Result<DenseMat> {
    let k = d + 1;
    let q_of = |i: usize| if i == d { 1.0 } else { 1.0 - p };

    let mut big_q = DenseMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let v = if i == j {
                scatter.get(i, i) * q_of(i) + ridge
            } else {
                scatter.get(i, j) * q_of(i) * q_of(j)
            };
            big_q.set(i, j, v);
        }
    }
    cholesky_factor(&mut big_q)?;

    let mut w = DenseMat::zeros(d, k);
    let mut rhs = vec![0.0; k];
    for i in 0..d {
        for j in 0..k {
            rhs[j] = scatter.get(i, j) * q_of(j);
        }
        cholesky_solve(&big_q, &mut rhs)?;
        w.row_mut(i).copy_from_slice(&rhs);
    }
    Ok(w)
}

fn scatter_from_sparse(x: &[SparseVec], d: usize) -> DenseMat {
    let mut s = DenseMat::zeros(d + 1, d + 1);
    for xi in x {
        for &(i, vi) in xi.entries() {
            for &(j, vj) in xi.entries() {
                let cur = s.get(i, j);
                s.set(i, j, cur + vi * vj);
            }
            let cur = s.get(i, d);
            s.set(i, d, cur + vi);
            let cur = s.get(d, i);
            s.set(d, i, cur + vi);
        }
        let cur = s.get(d, d);
        s.set(d, d, cur + 1.0);
    }
    s
}

fn scatter_from_dense(h: &[DenseVec], d: usize) -> DenseMat {
    let mut s = DenseMat::zeros(d + 1, d + 1);
    for hi in h {
        let v = hi.as_slice();
        for i in 0..d {
            if v[i] == 0.0 {
                continue;
            }
            let base = v[i];
            for (j, vj) in v.iter().enumerate() {
                let cur = s.get(i, j);
                s.set(i, j, cur + base * vj);
            }
            let cur = s.get(i, d);
            s.set(i, d, cur + base);
            let cur = s.get(d, i);
            s.set(d, i, cur + base);
        }
        let cur = s.get(d, d);
        s.set(d, d, cur + 1.0);
    }
    s
}

fn layer_forward(w: &DenseMat, input: &DenseVec) -> DenseVec {
    let d = w.rows();
    let mut out = DenseVec::zeros(d);
    for r in 0..d {
        let row = w.row(r);
        let mut acc = row[d]; // bias column
        for (a, b) in row[..d].iter().zip(input.as_slice()) {
            acc += a * b;
        }
        out.set(r, acc.tanh());
    }
    out
}

fn layer_forward_sparse(w: &DenseMat, input: &SparseVec) -> DenseVec {
    let d = w.rows();
    let mut out = DenseVec::zeros(d);
    for r in 0..d {
        let row = w.row(r);
        let mut acc = row[d];
        for &(i, v) in input.entries() {
            acc += row[i] * v;
        }
        out.set(r, acc.tanh());
    }
    out
}

fn fit_core(
    x: &[SparseVec],
    p: f64,
    layers: usize,
    ridge: f64,
    source_dim: usize,
    truncation: Option<Vec<usize>>,
) -> Result<MsdaModel> {
    let d = x[0].dim();
    let mut layer_mats = Vec::with_capacity(layers);

    let scatter = scatter_from_sparse(x, d);
    let w0 = solve_layer(&scatter, d, p, ridge)?;
    let mut hidden: Vec<DenseVec> = x.iter().map(|xi| layer_forward_sparse(&w0, xi)).collect();
    layer_mats.push(w0);

    for _ in 1..layers {
        let scatter = scatter_from_dense(&hidden, d);
        let w = solve_layer(&scatter, d, p, ridge)?;
        hidden = hidden.iter().map(|h| layer_forward(&w, h)).collect();
        layer_mats.push(w);
    }

    Ok(MsdaModel {
        layers: layer_mats,
        corruption_p: p,
        ridge,
        input_dim: d,
        source_dim,
        truncation,
    })
}

/// Fits the stacked model on unlabeled data (typically source and target
/// features pooled together).
pub fn fit(x: &[SparseVec], p: f64, layers: usize, ridge: f64) -> Result<MsdaModel> {
    let dim = validate_fit_args(x, p, layers, ridge)?;
    fit_core(x, p, layers, ridge, dim, None)
}

/// Like [`fit`] but first restricts to the `keep` most frequent features
/// (ties broken by index). A `5001 x 5001` solve is feasible but slow;
/// desk-scale runs keep roughly a thousand features. The kept indices are
/// recorded in the model.
pub fn fit_truncated(
    x: &[SparseVec],
    p: f64,
    layers: usize,
    ridge: f64,
    keep: usize,
) -> Result<MsdaModel> {
    let dim = validate_fit_args(x, p, layers, ridge)?;
    if keep == 0 {
        return Err(Error::InvalidArg("keep must be >= 1".into()));
    }
    if keep >= dim {
        return fit_core(x, p, layers, ridge, dim, None);
    }

    let mut counts = vec![0usize; dim];
    for xi in x {
        for &(i, _) in xi.entries() {
            counts[i] += 1;
        }
    }
    let mut by_freq: Vec<usize> = (0..dim).collect();
    by_freq.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = by_freq[..keep].to_vec();
    kept.sort_unstable();

    let projected: Vec<SparseVec> = x.iter().map(|xi| project(xi, &kept)).collect();
    fit_core(&projected, p, layers, ridge, dim, Some(kept))
}

fn project(x: &SparseVec, kept: &[usize]) -> SparseVec {
    let mut entries = Vec::new();
    for &(i, v) in x.entries() {
        if let Ok(new_idx) = kept.binary_search(&i) {
            entries.push((new_idx, v));
        }
    }
    SparseVec::new(kept.len(), entries).expect("projection preserves ordering")
}

/// Transforms one example: the (possibly truncated) raw input followed by
/// every layer output, `d * (layers + 1)` values in total.
pub fn transform(model: &MsdaModel, x: &SparseVec) -> Result<DenseVec> {
    if x.dim() != model.source_dim {
        return Err(Error::DimMismatch {
            op: "msda_transform",
            expected: format!("dim {}", model.source_dim),
            found: format!("dim {}", x.dim()),
        });
    }
    let projected;
    let input: &SparseVec = match &model.truncation {
        Some(kept) => {
            projected = project(x, kept);
            &projected
        }
        None => x,
    };

    let d = model.input_dim;
    let mut out = DenseVec::zeros(model.output_dim());
    for &(i, v) in input.entries() {
        out.set(i, v);
    }
    let mut h = layer_forward_sparse(&model.layers[0], input);
    for (slot, val) in out.as_mut_slice()[d..2 * d].iter_mut().zip(h.iter()) {
        *slot = val;
    }
    for (k, w) in model.layers.iter().enumerate().skip(1) {
        h = layer_forward(w, &h);
        let start = (k + 1) * d;
        for (slot, val) in out.as_mut_slice()[start..start + d].iter_mut().zip(h.iter()) {
            *slot = val;
        }
    }
    Ok(out)
}

/// Transforms and re-sparsifies, dropping exact zeros only, so transformed
/// datasets can be written in the sparse text format.
pub fn transform_to_sparse(model: &MsdaModel, x: &SparseVec) -> Result<SparseVec> {
    Ok(SparseVec::from_dense(&transform(model, x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn low_rank_points(n: usize, dim: usize, rng: &mut Rng) -> Vec<SparseVec> {
        // One latent factor plus small noise: coordinates are strongly
        // correlated, so corruption is recoverable.
        let direction: Vec<f64> = (0..dim).map(|_| rng.uniform(0.5, 1.5)).collect();
        (0..n)
            .map(|_| {
                let t = rng.uniform(-2.0, 2.0);
                let entries = (0..dim)
                    .filter_map(|j| {
                        let v = t * direction[j] + 0.05 * rng.gauss();
                        (v != 0.0).then_some((j, v))
                    })
                    .collect();
                SparseVec::new(dim, entries).unwrap()
            })
            .collect()
    }

    #[test]
    fn vanishing_corruption_recovers_identity() {
        let mut rng = Rng::new(2);
        let x = low_rank_points(20, 3, &mut rng);
        // Full rank needs more than one factor; add noise-heavy points.
        let mut x = x;
        for _ in 0..20 {
            let entries = (0..3)
                .filter_map(|j| {
                    let v = rng.uniform(-1.0, 1.0);
                    (v != 0.0).then_some((j, v))
                })
                .collect();
            x.push(SparseVec::new(3, entries).unwrap());
        }
        let model = fit(&x, 1e-6, 1, 1e-5).unwrap();
        let w = &model.layers()[0];
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (w.get(i, j) - expect).abs() < 1e-3,
                    "W[{i},{j}] = {}",
                    w.get(i, j)
                );
            }
            assert!(w.get(i, 3).abs() < 1e-3, "bias column not small");
        }
    }

    #[test]
    fn output_length_law() {
        let mut rng = Rng::new(5);
        for (dim, layers) in [(3usize, 2usize), (5, 1), (4, 3), (2, 5)] {
            let x = low_rank_points(12, dim, &mut rng);
            let model = fit(&x, 0.5, layers, 1e-5).unwrap();
            let out = transform(&model, &x[0]).unwrap();
            assert_eq!(out.len(), dim * (layers + 1));
            // Raw input leads the concatenation.
            let dense = x[0].to_dense();
            for j in 0..dim {
                assert_eq!(out.get(j), dense.get(j));
            }
            // Layer outputs live strictly inside (-1, 1) after tanh.
            for j in dim..out.len() {
                assert!(out.get(j) > -1.0 && out.get(j) < 1.0);
            }
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let mut rng = Rng::new(6);
        let x = low_rank_points(15, 4, &mut rng);
        let a = fit(&x, 0.5, 3, 1e-5).unwrap();
        let b = fit(&x, 0.5, 3, 1e-5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singular_system_without_ridge_names_the_fix() {
        // Feature 2 never appears, so its moment row is all zero.
        let x = vec![
            SparseVec::new(3, vec![(0, 1.0), (1, 2.0)]).unwrap(),
            SparseVec::new(3, vec![(0, -1.0), (1, 0.5)]).unwrap(),
        ];
        let err = fit(&x, 0.5, 1, 0.0).unwrap_err().to_string();
        assert!(err.contains("ridge"), "{err}");
        assert!(fit(&x, 0.5, 1, 1e-5).is_ok());
    }

    /// Monte-Carlo corruption oracle: dropping features by hand and
    /// reconstructing through the first layer (pre-tanh linear map) must
    /// beat leaving the corrupted vector untouched.
    fn denoising_wins(p: f64, seed: u64) -> bool {
        let mut rng = Rng::new(seed);
        let x = low_rank_points(10, 3, &mut rng);
        let model = fit(&x, p, 1, 1e-5).unwrap();
        let w = &model.layers()[0];

        let mut err_learned = 0.0;
        let mut err_identity = 0.0;
        for _ in 0..1000 {
            let xi = &x[rng.index(x.len())];
            let dense = xi.to_dense();
            let corrupted: Vec<f64> = dense
                .as_slice()
                .iter()
                .map(|&v| if rng.uniform(0.0, 1.0) < p { 0.0 } else { v })
                .collect();
            for i in 0..3 {
                let mut rec = w.get(i, 3);
                for (j, cv) in corrupted.iter().enumerate() {
                    rec += w.get(i, j) * cv;
                }
                let diff = rec - dense.get(i);
                err_learned += diff * diff;
                let diff_id = corrupted[i] - dense.get(i);
                err_identity += diff_id * diff_id;
            }
        }
        err_learned < err_identity
    }

    #[test]
    fn monte_carlo_denoising_beats_identity() {
        for (i, p) in [0.3, 0.5, 0.7].iter().enumerate() {
            assert!(denoising_wins(*p, 100 + i as u64), "p={p}");
        }
    }

    #[test]
    fn truncation_keeps_most_frequent_features() {
        let mut rng = Rng::new(9);
        // Features 0 and 1 appear everywhere, 2..6 rarely.
        let x: Vec<SparseVec> = (0..30)
            .map(|_| {
                let mut entries = vec![(0, rng.uniform(0.5, 1.5)), (1, rng.uniform(0.5, 1.5))];
                let rare = 2 + rng.index(4);
                entries.push((rare, 1.0));
                SparseVec::new(6, entries).unwrap()
            })
            .collect();
        let model = fit_truncated(&x, 0.5, 2, 1e-5, 2).unwrap();
        assert_eq!(model.truncation(), Some(&[0usize, 1][..]));
        assert_eq!(model.input_dim(), 2);
        assert_eq!(model.source_dim(), 6);
        let out = transform(&model, &x[0]).unwrap();
        assert_eq!(out.len(), 2 * 3);

        // keep >= dim means no truncation.
        let full = fit_truncated(&x, 0.5, 1, 1e-5, 10).unwrap();
        assert!(full.truncation().is_none());
    }

    #[test]
    fn model_roundtrips_through_json() {
        let mut rng = Rng::new(12);
        let x = low_rank_points(10, 3, &mut rng);
        let model = fit(&x, 0.5, 2, 1e-5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("msda.json");
        model.save(&path).unwrap();
        let back = MsdaModel::load(&path).unwrap();
        assert_eq!(back, model);
    }
}
