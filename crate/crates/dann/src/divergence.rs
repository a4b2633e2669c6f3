//! Empirical H-divergence and the proxy A-distance (PAD).
//!
//! The domain-discrimination dataset labels source examples 1 and target
//! examples 0. PAD follows the five-step protocol: build the combined
//! dataset, split it in half at random, train linear SVMs over a grid of C
//! values on one half, measure their errors on the other half, and plug the
//! lowest error into `2 * (1 - 2 * eps)`. Values below zero are meaningful
//! (a discriminator worse than chance) and are never clipped.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::net::DannParams;
use crate::rng::Rng;
use crate::svm;
use crate::tensor::SparseVec;

const TAG_SPLIT_BASE: u64 = 0x20;
const TAG_SVM_BASE: u64 = 0x40;
const MAX_SPLIT_ATTEMPTS: usize = 10;

/// Source/target discrimination problem: features with domain labels,
/// source first (z = 1), target after (z = 0).
#[derive(Debug, Clone)]
pub struct DomainDataset {
    pub examples: Vec<(SparseVec, u8)>,
    pub dim: usize,
}

/// Builds the discrimination dataset from the two feature samples.
pub fn build_u(s_feats: &[SparseVec], t_feats: &[SparseVec]) -> Result<DomainDataset> {
    if s_feats.is_empty() || t_feats.is_empty() {
        return Err(Error::EmptyInput { what: "domain dataset side" });
    }
    let dim = s_feats[0].dim();
    for x in s_feats.iter().chain(t_feats) {
        if x.dim() != dim {
            return Err(Error::DimMismatch {
                op: "build_u",
                expected: format!("dim {dim}"),
                found: format!("dim {}", x.dim()),
            });
        }
    }
    let mut examples = Vec::with_capacity(s_feats.len() + t_feats.len());
    examples.extend(s_feats.iter().cloned().map(|x| (x, 1u8)));
    examples.extend(t_feats.iter().cloned().map(|x| (x, 0u8)));
    Ok(DomainDataset { examples, dim })
}

/// Plug-in empirical H-divergence from a trained discriminator's per-domain
/// errors: `2 * (1 - (err_s + err_t))`, where `err_s` is the fraction of
/// source examples not classified as source and `err_t` the fraction of
/// target examples not classified as target.
pub fn empirical_h_divergence(err_source_as_1: f64, err_target_as_0: f64) -> Result<f64> {
    for (name, e) in [("source", err_source_as_1), ("target", err_target_as_0)] {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidArg(format!(
                "{name} error rate must lie in [0, 1], got {e}"
            )));
        }
    }
    Ok(2.0 * (1.0 - (err_source_as_1 + err_target_as_0)))
}

/// PAD arithmetic of the held-out discrimination error.
pub fn pad_from_epsilon(epsilon: f64) -> f64 {
    2.0 * (1.0 - 2.0 * epsilon)
}

/// Outcome of one PAD computation, auditable down to the per-C errors and
/// the SVM budget used to produce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadReport {
    pub split_seed: u64,
    pub per_c_errors: Vec<(f64, f64)>,
    pub best_epsilon: f64,
    pub pad_value: f64,
    pub representation_tag: String,
    pub svm_epochs: usize,
}

impl PadReport {
    /// Re-checks the arithmetic invariants; called whenever a report is
    /// loaded from disk.
    pub fn validate(&self) -> Result<()> {
        let min = self
            .per_c_errors
            .iter()
            .map(|&(_, e)| e)
            .fold(f64::INFINITY, f64::min);
        if self.best_epsilon != min {
            return Err(Error::Data(format!(
                "pad report: best_epsilon {} is not the minimum per-C error {min}",
                self.best_epsilon
            )));
        }
        if self.pad_value != pad_from_epsilon(self.best_epsilon) {
            return Err(Error::Data(format!(
                "pad report: pad_value {} does not match 2*(1-2*{})",
                self.pad_value, self.best_epsilon
            )));
        }
        if !(-2.0..=2.0).contains(&self.pad_value) {
            return Err(Error::Data(format!(
                "pad report: pad_value {} outside [-2, 2]",
                self.pad_value
            )));
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let report: PadReport = serde_json::from_str(&text)?;
        report.validate()?;
        Ok(report)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Ten C values log-spaced over `[1e-5, 1]`.
pub fn default_c_grid() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-5.0 + 5.0 * k as f64 / 9.0)).collect()
}

fn cmp_sparse(a: &SparseVec, b: &SparseVec) -> Ordering {
    for (ea, eb) in a.entries().iter().zip(b.entries()) {
        match ea.0.cmp(&eb.0) {
            Ordering::Equal => {}
            other => return other,
        }
        match ea.1.total_cmp(&eb.1) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    a.nnz().cmp(&b.nnz())
}

/// Computes the PAD between two samples. The split is a seeded uniform
/// shuffle of the combined dataset, halved with any odd example going to the
/// training half; the shuffle is applied to a canonical ordering of the
/// examples (sorted by feature vector, then domain label) so that swapping
/// the source/target arguments changes only the labels, never the split
/// membership. Combined with the SVM's exact label-flip antisymmetry this
/// makes PAD symmetric under source/target swap. Splits that leave one half
/// with a single domain are redrawn a bounded number of times.
pub fn compute_pad(
    s_feats: &[SparseVec],
    t_feats: &[SparseVec],
    c_grid: &[f64],
    seed: u64,
    tag: &str,
) -> Result<PadReport> {
    if s_feats.len() < 2 || t_feats.len() < 2 {
        return Err(Error::Data(
            "pad needs at least two examples on each side".into(),
        ));
    }
    if c_grid.is_empty() {
        return Err(Error::EmptyInput { what: "C grid" });
    }
    let u = build_u(s_feats, t_feats)?;
    let n = u.examples.len();

    let mut canonical: Vec<usize> = (0..n).collect();
    canonical.sort_by(|&i, &j| {
        let (xi, zi) = &u.examples[i];
        let (xj, zj) = &u.examples[j];
        cmp_sparse(xi, xj).then(zi.cmp(zj))
    });

    let root = Rng::new(seed);
    let train_len = n.div_ceil(2);
    let mut chosen: Option<(Vec<usize>, Vec<usize>)> = None;
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut order = canonical.clone();
        let mut rng = root.derive(TAG_SPLIT_BASE + attempt as u64);
        rng.shuffle(&mut order);
        let (train, test) = order.split_at(train_len);
        let both = |ids: &[usize]| {
            let mut saw = [false, false];
            for &i in ids {
                saw[u.examples[i].1 as usize] = true;
            }
            saw[0] && saw[1]
        };
        if both(train) && both(test) {
            chosen = Some((train.to_vec(), test.to_vec()));
            break;
        }
    }
    let (train_idx, test_idx) = chosen.ok_or(Error::DegenerateSplit {
        attempts: MAX_SPLIT_ATTEMPTS,
    })?;

    let collect = |ids: &[usize], name: &str| -> Result<LabeledSet> {
        let examples = ids.iter().map(|&i| u.examples[i].clone()).collect();
        LabeledSet::new(name, u.dim, examples)
    };
    let train_set = collect(&train_idx, "pad-train")?;
    let test_set = collect(&test_idx, "pad-test")?;

    let mut per_c_errors = Vec::with_capacity(c_grid.len());
    for (ci, &c) in c_grid.iter().enumerate() {
        let svm_seed = root.derive_seed(TAG_SVM_BASE + ci as u64);
        let model = svm::train(&train_set, c, svm::DEFAULT_EPOCHS, svm_seed)?;
        let eps = svm::error_rate(&model, &test_set)?;
        per_c_errors.push((c, eps));
    }
    let best_epsilon = per_c_errors
        .iter()
        .map(|&(_, e)| e)
        .fold(f64::INFINITY, f64::min);

    Ok(PadReport {
        split_seed: seed,
        per_c_errors,
        best_epsilon,
        pad_value: pad_from_epsilon(best_epsilon),
        representation_tag: tag.to_string(),
        svm_epochs: svm::DEFAULT_EPOCHS,
    })
}

/// PAD of the hidden representations: every example is mapped through the
/// network's hidden layer first.
pub fn pad_on_representation(
    params: &DannParams,
    s_feats: &[SparseVec],
    t_feats: &[SparseVec],
    c_grid: &[f64],
    seed: u64,
    tag: &str,
) -> Result<PadReport> {
    let map = |feats: &[SparseVec]| -> Result<Vec<SparseVec>> {
        feats
            .iter()
            .map(|x| Ok(SparseVec::from_dense(&params.forward_hidden(x)?)))
            .collect()
    };
    let hs = map(s_feats)?;
    let ht = map(t_feats)?;
    compute_pad(&hs, &ht, c_grid, seed, tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn cloud(n: usize, dim: usize, center: f64, spread: f64, rng: &mut Rng) -> Vec<SparseVec> {
        (0..n)
            .map(|_| {
                let entries = (0..dim)
                    .filter_map(|j| {
                        let v = center + spread * rng.gauss();
                        (v != 0.0).then_some((j, v))
                    })
                    .collect();
                SparseVec::new(dim, entries).unwrap()
            })
            .collect()
    }

    #[test]
    fn build_u_labels_and_sizes() {
        let s = vec![
            SparseVec::new(2, vec![(0, 1.0)]).unwrap(),
            SparseVec::new(2, vec![(1, 1.0)]).unwrap(),
            SparseVec::new(2, vec![(0, 2.0)]).unwrap(),
        ];
        let t = vec![
            SparseVec::new(2, vec![(0, 3.0)]).unwrap(),
            SparseVec::new(2, vec![(1, 3.0)]).unwrap(),
        ];
        let u = build_u(&s, &t).unwrap();
        assert_eq!(u.examples.len(), 5);
        let labels: Vec<u8> = u.examples.iter().map(|(_, z)| *z).collect();
        assert_eq!(labels, vec![1, 1, 1, 0, 0]);

        let bad = vec![SparseVec::new(3, vec![(0, 1.0)]).unwrap()];
        assert!(build_u(&s, &bad).is_err());
        assert!(build_u(&s, &[]).is_err());
    }

    #[test]
    fn h_divergence_arithmetic() {
        assert_eq!(empirical_h_divergence(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(empirical_h_divergence(0.5, 0.5).unwrap(), 0.0);
        assert!((empirical_h_divergence(0.1, 0.3).unwrap() - 1.2).abs() < 1e-15);
        assert!(empirical_h_divergence(-0.1, 0.0).is_err());
        assert!(empirical_h_divergence(0.0, 1.5).is_err());
    }

    #[test]
    fn pad_arithmetic_not_clipped() {
        assert_eq!(pad_from_epsilon(0.5), 0.0);
        assert_eq!(pad_from_epsilon(0.05), 1.8);
        assert!(pad_from_epsilon(0.6) < 0.0);
    }

    #[test]
    fn identical_samples_give_chance_level_pad() {
        let mut rng = Rng::new(17);
        let pts = cloud(200, 3, 0.0, 1.0, &mut rng);
        let report = compute_pad(&pts, &pts, &default_c_grid(), 3, "raw").unwrap();
        assert!(
            report.pad_value <= 0.25,
            "identical samples should be chance level, pad {}",
            report.pad_value
        );
        report.validate().unwrap();
    }

    #[test]
    fn separated_clouds_give_high_pad() {
        let mut rng = Rng::new(23);
        let s = cloud(100, 3, 2.0, 0.3, &mut rng);
        let t = cloud(100, 3, -2.0, 0.3, &mut rng);
        let report = compute_pad(&s, &t, &default_c_grid(), 5, "raw").unwrap();
        assert!(report.pad_value >= 1.8, "pad {}", report.pad_value);
        assert!(report.pad_value <= 2.0);
    }

    #[test]
    fn pad_is_symmetric_under_swap() {
        let mut rng = Rng::new(29);
        // Uneven sizes exercise the odd-split path too.
        let s = cloud(60, 2, 0.8, 1.0, &mut rng);
        let t = cloud(41, 2, -0.8, 1.0, &mut rng);
        let a = compute_pad(&s, &t, &default_c_grid(), 11, "fwd").unwrap();
        let b = compute_pad(&t, &s, &default_c_grid(), 11, "rev").unwrap();
        assert_eq!(a.pad_value, b.pad_value);
        assert_eq!(a.best_epsilon, b.best_epsilon);
        assert_eq!(a.per_c_errors, b.per_c_errors);
    }

    #[test]
    fn plug_in_error_upper_bounds_enumerated_minimum() {
        // 1D instances small enough to enumerate every threshold classifier
        // in both orientations (the symmetric hypothesis class).
        let mut rng = Rng::new(41);
        for _ in 0..10 {
            let s: Vec<f64> = (0..12).map(|_| rng.uniform(-1.0, 1.5)).collect();
            let t: Vec<f64> = (0..10).map(|_| rng.uniform(-1.5, 1.0)).collect();
            let to_sparse = |vals: &[f64]| -> Vec<SparseVec> {
                vals.iter()
                    .map(|&v| {
                        let entries = if v != 0.0 { vec![(0, v)] } else { vec![] };
                        SparseVec::new(1, entries).unwrap()
                    })
                    .collect()
            };
            let sv = to_sparse(&s);
            let tv = to_sparse(&t);

            // Exact minimum of the bracketed error sum over all thresholds.
            let mut cuts: Vec<f64> = s.iter().chain(&t).cloned().collect();
            cuts.push(f64::NEG_INFINITY);
            let mut best = f64::INFINITY;
            for &cut in &cuts {
                for orient in [true, false] {
                    let classify = |v: f64| -> u8 {
                        let hi = v >= cut;
                        u8::from(hi == orient)
                    };
                    let err_s =
                        s.iter().filter(|&&v| classify(v) != 1).count() as f64 / s.len() as f64;
                    let err_t =
                        t.iter().filter(|&&v| classify(v) != 0).count() as f64 / t.len() as f64;
                    best = best.min(err_s + err_t);
                }
            }

            // Plug-in error sum from a trained discriminator.
            let u = build_u(&sv, &tv).unwrap();
            let all = LabeledSet::new("u", 1, u.examples.clone()).unwrap();
            let model = svm::train(&all, 10.0, 50, 1).unwrap();
            let err_s = sv
                .iter()
                .filter(|x| svm::predict(&model, x).unwrap() != 1)
                .count() as f64
                / sv.len() as f64;
            let err_t = tv
                .iter()
                .filter(|x| svm::predict(&model, x).unwrap() != 0)
                .count() as f64
                / tv.len() as f64;
            assert!(
                err_s + err_t >= best - 1e-12,
                "plug-in {} below enumerated minimum {best}",
                err_s + err_t
            );
        }
    }

    #[test]
    fn report_validation_catches_tampering() {
        let mut rng = Rng::new(53);
        let s = cloud(20, 2, 1.0, 0.5, &mut rng);
        let t = cloud(20, 2, -1.0, 0.5, &mut rng);
        let mut report = compute_pad(&s, &t, &default_c_grid(), 7, "raw").unwrap();
        report.validate().unwrap();
        report.pad_value += 0.1;
        assert!(report.validate().is_err());
    }
}
