//! Data generation and ingestion.
//!
//! Two data sources are built in: the rotated inter-twinning moons toy
//! problem (2D, dense-ish) and a plain-text sparse vector format for
//! bag-of-words style benchmarks. `make_task` carves labeled pools into the
//! standard adaptation layout: labeled source, unlabeled target, a small
//! labeled target validation set for hyper-parameter selection, and a held
//!  out target test set.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::SparseVec;

const TAG_MOONS_SOURCE: u64 = 0x10;
const TAG_MOONS_TARGET: u64 = 0x11;
const TAG_TASK_SOURCE: u64 = 0x12;
const TAG_TASK_TARGET: u64 = 0x13;

/// Labeled sample: sparse features with binary labels, uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub examples: Vec<(SparseVec, u8)>,
    pub dim: usize,
    pub name: String,
}

impl LabeledSet {
    pub fn new(name: &str, dim: usize, examples: Vec<(SparseVec, u8)>) -> Result<Self> {
        for (x, y) in &examples {
            if x.dim() != dim {
                return Err(Error::DimMismatch {
                    op: "LabeledSet::new",
                    expected: format!("dim {dim}"),
                    found: format!("dim {}", x.dim()),
                });
            }
            if *y > 1 {
                return Err(Error::InvalidArg(format!("label must be 0 or 1, got {y}")));
            }
        }
        Ok(LabeledSet { examples, dim, name: name.to_string() })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn features(&self) -> Vec<SparseVec> {
        self.examples.iter().map(|(x, _)| x.clone()).collect()
    }

    /// New set holding clones of the examples at `indices`.
    pub fn subset(&self, name: &str, indices: &[usize]) -> Result<Self> {
        let examples = indices
            .iter()
            .map(|&i| {
                self.examples
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Data(format!("subset index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        LabeledSet::new(name, self.dim, examples)
    }

    pub fn drop_labels(&self, name: &str) -> UnlabeledSet {
        UnlabeledSet {
            examples: self.examples.iter().map(|(x, _)| x.clone()).collect(),
            dim: self.dim,
            name: name.to_string(),
        }
    }
}

/// Unlabeled sample with uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledSet {
    pub examples: Vec<SparseVec>,
    pub dim: usize,
    pub name: String,
}

impl UnlabeledSet {
    pub fn new(name: &str, dim: usize, examples: Vec<SparseVec>) -> Result<Self> {
        for x in &examples {
            if x.dim() != dim {
                return Err(Error::DimMismatch {
                    op: "UnlabeledSet::new",
                    expected: format!("dim {dim}"),
                    found: format!("dim {}", x.dim()),
                });
            }
        }
        Ok(UnlabeledSet { examples, dim, name: name.to_string() })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Geometry and sampling knobs for the inter-twinning moons problem.
///
/// The moons are the usual interleaved half-circles: the upper moon (label
/// 1) is a radius-`radius` half-circle over angles `[0, pi)` centered at the
/// origin; the lower moon (label 0) is the opposite half-circle centered at
/// `(radius, width)`, so `width` controls the vertical interleaving.
/// Gaussian noise of `noise_sd` is added to both coordinates. These
/// constants are presentation-level defaults, not canon; they are echoed
/// into every output that depends on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoonsConfig {
    pub n_per_moon: usize,
    pub rotation_deg: f64,
    pub noise_sd: f64,
    pub radius: f64,
    pub width: f64,
    pub seed: u64,
}

impl Default for MoonsConfig {
    fn default() -> Self {
        MoonsConfig {
            n_per_moon: 150,
            rotation_deg: 35.0,
            noise_sd: 0.1,
            radius: 1.0,
            width: 0.5,
            seed: 0,
        }
    }
}

impl MoonsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_moon == 0 {
            return Err(Error::InvalidArg("n_per_moon must be >= 1".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArg(format!("radius must be > 0, got {}", self.radius)));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidArg(format!(
                "noise_sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn point_to_sparse(p: [f64; 2]) -> SparseVec {
    let mut entries = Vec::new();
    if p[0] != 0.0 {
        entries.push((0, p[0]));
    }
    if p[1] != 0.0 {
        entries.push((1, p[1]));
    }
    SparseVec::new(2, entries).expect("2d point entries are sorted and finite")
}

/// Draws one fresh moons sample: `n_per_moon` points per class, lower moon
/// first (label 0), then the upper moon (label 1).
pub fn sample_moons(cfg: &MoonsConfig, rng: &mut Rng) -> Vec<([f64; 2], u8)> {
    let mut pts = Vec::with_capacity(2 * cfg.n_per_moon);
    for _ in 0..cfg.n_per_moon {
        let theta = rng.uniform(0.0, std::f64::consts::PI);
        let x = cfg.radius - cfg.radius * theta.cos() + cfg.noise_sd * rng.gauss();
        let y = cfg.width - cfg.radius * theta.sin() + cfg.noise_sd * rng.gauss();
        pts.push(([x, y], 0u8));
    }
    for _ in 0..cfg.n_per_moon {
        let theta = rng.uniform(0.0, std::f64::consts::PI);
        let x = cfg.radius * theta.cos() + cfg.noise_sd * rng.gauss();
        let y = cfg.radius * theta.sin() + cfg.noise_sd * rng.gauss();
        pts.push(([x, y], 1u8));
    }
    pts
}

/// Rotates `p` by `deg` degrees counter-clockwise about `center`. A zero
/// angle is the exact identity.
pub fn rotate_point(p: [f64; 2], deg: f64, center: [f64; 2]) -> [f64; 2] {
    if deg == 0.0 {
        return p;
    }
    let rad = deg.to_radians();
    let (s, c) = rad.sin_cos();
    let dx = p[0] - center[0];
    let dy = p[1] - center[1];
    [center[0] + c * dx - s * dy, center[1] + s * dx + c * dy]
}

/// Generates the adaptation problem: a labeled source sample, an unlabeled
/// target sample drawn the same way and then rotated about the coordinate
/// origin (`x -> R x`), and the rotated target with its generating labels
/// kept for evaluation only.
///
/// The rotation is deliberately about the origin rather than the cloud
/// centroid: a centroid-centered rotation of this figure leaves the two
/// marginals nearly indistinguishable to any linear discriminator, which
/// starves both the domain regressor and the proxy A-distance of signal.
pub fn gen_moons(cfg: &MoonsConfig) -> Result<(LabeledSet, UnlabeledSet, LabeledSet)> {
    cfg.validate()?;
    let root = Rng::new(cfg.seed);
    let mut rng_s = root.derive(TAG_MOONS_SOURCE);
    let mut rng_t = root.derive(TAG_MOONS_TARGET);

    let source_pts = sample_moons(cfg, &mut rng_s);
    let target_pts = sample_moons(cfg, &mut rng_t);
    let rotated: Vec<([f64; 2], u8)> = target_pts
        .iter()
        .map(|(p, y)| (rotate_point(*p, cfg.rotation_deg, [0.0, 0.0]), *y))
        .collect();

    let source = LabeledSet::new(
        "moons-source",
        2,
        source_pts.iter().map(|(p, y)| (point_to_sparse(*p), *y)).collect(),
    )?;
    let target = UnlabeledSet::new(
        "moons-target",
        2,
        rotated.iter().map(|(p, _)| point_to_sparse(*p)).collect(),
    )?;
    let target_truth = LabeledSet::new(
        "moons-target-truth",
        2,
        rotated.iter().map(|(p, y)| (point_to_sparse(*p), *y)).collect(),
    )?;
    Ok((source, target, target_truth))
}

/// Either side of the sparse text format.
#[derive(Debug, Clone, PartialEq)]
pub enum SparseData {
    Labeled(LabeledSet),
    Unlabeled(UnlabeledSet),
}

impl SparseData {
    pub fn dim(&self) -> usize {
        match self {
            SparseData::Labeled(s) => s.dim,
            SparseData::Unlabeled(s) => s.dim,
        }
    }

    pub fn labeled(self) -> Result<LabeledSet> {
        match self {
            SparseData::Labeled(s) => Ok(s),
            SparseData::Unlabeled(s) => Err(Error::Data(format!(
                "{}: expected labeled data, file holds unlabeled examples",
                s.name
            ))),
        }
    }

    pub fn unlabeled(self) -> Result<UnlabeledSet> {
        match self {
            SparseData::Unlabeled(s) => Ok(s),
            SparseData::Labeled(s) => Ok(s.drop_labels("unlabeled")),
        }
    }
}

/// Loads the text format: one example per line, `<label> <idx>:<val> ...`,
/// label `-1` marking unlabeled examples, 0-based strictly ascending
/// indices. The dimension is the largest index seen plus one (at least
/// `min_dim`). A file must be entirely labeled or entirely unlabeled.
pub fn load_sparse(path: &Path, min_dim: usize) -> Result<SparseData> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let path_str = path.display().to_string();
    let mut rows: Vec<(i64, Vec<(usize, f64)>)> = Vec::new();
    let mut dim = min_dim;

    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: i64 = label_tok.parse().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: line_no,
            msg: format!("bad label {label_tok:?}"),
        })?;
        if !(-1..=1).contains(&label) {
            return Err(Error::Parse {
                path: path_str.clone(),
                line: line_no,
                msg: format!("label must be -1, 0 or 1, got {label}"),
            });
        }
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                msg: format!("bad index {idx_s:?}"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                msg: format!("bad value {val_s:?}"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: line_no,
                    msg: format!("value at index {idx} is not finite"),
                });
            }
            if let Some(&(prev, _)) = entries.last() {
                if idx == prev {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        line: line_no,
                        msg: format!("duplicate index {idx}"),
                    });
                }
                if idx < prev {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        line: line_no,
                        msg: format!("indices must be ascending, got {prev} then {idx}"),
                    });
                }
            }
            dim = dim.max(idx + 1);
            if val != 0.0 {
                // Explicit zeros are semantically absent; skip them.
                entries.push((idx, val));
            }
        }
        rows.push((label, entries));
    }

    if rows.is_empty() {
        return Err(Error::EmptyInput { what: "sparse data file" });
    }

    let any_unlabeled = rows.iter().any(|(y, _)| *y == -1);
    let any_labeled = rows.iter().any(|(y, _)| *y != -1);
    if any_unlabeled && any_labeled {
        return Err(Error::Data(format!(
            "{path_str}: file mixes labeled and unlabeled examples"
        )));
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sparse".to_string());

    if any_unlabeled {
        let examples = rows
            .into_iter()
            .map(|(_, e)| SparseVec::new(dim, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseData::Unlabeled(UnlabeledSet::new(&name, dim, examples)?))
    } else {
        let examples = rows
            .into_iter()
            .map(|(y, e)| Ok((SparseVec::new(dim, e)?, y as u8)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseData::Labeled(LabeledSet::new(&name, dim, examples)?))
    }
}

fn write_entries(out: &mut impl Write, x: &SparseVec) -> Result<()> {
    for &(i, v) in x.entries() {
        write!(out, " {i}:{v}")?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn save_sparse_labeled(set: &LabeledSet, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (x, y) in &set.examples {
        write!(out, "{y}")?;
        write_entries(&mut out, x)?;
    }
    Ok(())
}

pub fn save_sparse_unlabeled(set: &UnlabeledSet, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for x in &set.examples {
        write!(out, "-1")?;
        write_entries(&mut out, x)?;
    }
    Ok(())
}

/// One adaptation task: everything a learner may see plus the held-out
/// target test set.
#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub source: LabeledSet,
    pub target_unlabeled: UnlabeledSet,
    pub target_val: LabeledSet,
    pub target_test: LabeledSet,
}

/// Draws `m` labeled source examples and three disjoint target subsets:
/// `m_prime` unlabeled for training, `val_target` labeled for
/// hyper-parameter selection, and the remainder as the test set.
pub fn make_task(
    source: &LabeledSet,
    target: &LabeledSet,
    m: usize,
    m_prime: usize,
    val_target: usize,
    seed: u64,
) -> Result<Task> {
    if source.dim != target.dim {
        return Err(Error::DimMismatch {
            op: "make_task",
            expected: format!("source dim {}", source.dim),
            found: format!("target dim {}", target.dim),
        });
    }
    if source.len() < m {
        return Err(Error::Data(format!(
            "source pool holds {} examples, need {m}",
            source.len()
        )));
    }
    if target.len() < m_prime + val_target {
        return Err(Error::Data(format!(
            "target pool holds {} examples, need {} for training and validation",
            target.len(),
            m_prime + val_target
        )));
    }
    if target.len() == m_prime + val_target {
        return Err(Error::Data(
            "target pool leaves no examples for the test set".into(),
        ));
    }

    let root = Rng::new(seed);
    let mut rng_s = root.derive(TAG_TASK_SOURCE);
    let mut rng_t = root.derive(TAG_TASK_TARGET);

    let mut s_idx: Vec<usize> = (0..source.len()).collect();
    rng_s.shuffle(&mut s_idx);
    let source_sel = source.subset(&source.name, &s_idx[..m])?;

    let mut t_idx: Vec<usize> = (0..target.len()).collect();
    rng_t.shuffle(&mut t_idx);
    let unl = target.subset("target-train", &t_idx[..m_prime])?;
    let val = target.subset("target-val", &t_idx[m_prime..m_prime + val_target])?;
    let test = target.subset("target-test", &t_idx[m_prime + val_target..])?;

    let name = format!("{}->{}", source.name, target.name);
    Ok(Task {
        name,
        source: source_sel,
        target_unlabeled: unl.drop_labels("target-train"),
        target_val: val,
        target_test: test,
    })
}

/// Knobs for the synthetic high-dimensional shift benchmark.
///
/// Feature layout: a source-only predictive block, a shared predictive
/// block that works in both domains, a target-only nuisance block, and a
/// wide uniform background. A source-trained network leans on the
/// source-only block and is destabilized on the target side, where that
/// block is silent and the nuisance block excites untrained weight columns;
/// a domain-adversarial learner is pushed toward the shared block instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTaskConfig {
    pub dim: usize,
    pub n_source: usize,
    pub n_target: usize,
    pub seed: u64,
    /// Draws per example from the domain-specific predictive/nuisance block.
    pub specific_draws: usize,
    /// Draws per example from the shared predictive block that agree with
    /// the label.
    pub shared_correct: usize,
    /// Contaminating draws from the wrong half of the shared block.
    pub shared_wrong: usize,
    /// Background draws per example.
    pub background_draws: usize,
}

impl Default for ShiftTaskConfig {
    fn default() -> Self {
        ShiftTaskConfig {
            dim: 5000,
            n_source: 600,
            n_target: 1600,
            seed: 0,
            specific_draws: 8,
            shared_correct: 4,
            shared_wrong: 2,
            background_draws: 20,
        }
    }
}

const SHIFT_BLOCK: usize = 100;

fn shift_example(cfg: &ShiftTaskConfig, rng: &mut Rng, y: u8, is_source: bool) -> SparseVec {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    let mut bump = |i: usize| *counts.entry(i).or_insert(0.0) += 1.0;

    let half = SHIFT_BLOCK / 2;
    if is_source {
        // Source-only predictive block [0, 100): halves keyed by label.
        let base = y as usize * half;
        for _ in 0..cfg.specific_draws {
            bump(base + rng.index(half));
        }
    } else {
        // Target-only nuisance block [200, 300): label-independent.
        for _ in 0..cfg.specific_draws {
            bump(2 * SHIFT_BLOCK + rng.index(SHIFT_BLOCK));
        }
    }
    // Shared predictive block [100, 200).
    let shared_base = SHIFT_BLOCK + y as usize * half;
    let shared_other = SHIFT_BLOCK + (1 - y as usize) * half;
    for _ in 0..cfg.shared_correct {
        bump(shared_base + rng.index(half));
    }
    for _ in 0..cfg.shared_wrong {
        bump(shared_other + rng.index(half));
    }
    // Background [300, dim).
    let bg = cfg.dim - 3 * SHIFT_BLOCK;
    for _ in 0..cfg.background_draws {
        bump(3 * SHIFT_BLOCK + rng.index(bg));
    }

    SparseVec::new(cfg.dim, counts.into_iter().collect()).expect("counts are sorted and positive")
}

/// Generates labeled source and target pools with the injected shift.
pub fn gen_shift_task(cfg: &ShiftTaskConfig) -> Result<(LabeledSet, LabeledSet)> {
    if cfg.dim < 4 * SHIFT_BLOCK {
        return Err(Error::InvalidArg(format!(
            "shift task needs dim >= {}, got {}",
            4 * SHIFT_BLOCK,
            cfg.dim
        )));
    }
    let root = Rng::new(cfg.seed);
    let mut rng_s = root.derive(TAG_TASK_SOURCE);
    let mut rng_t = root.derive(TAG_TASK_TARGET);

    let source_examples: Vec<(SparseVec, u8)> = (0..cfg.n_source)
        .map(|_| {
            let y = rng_s.index(2) as u8;
            (shift_example(cfg, &mut rng_s, y, true), y)
        })
        .collect();
    let target_examples: Vec<(SparseVec, u8)> = (0..cfg.n_target)
        .map(|_| {
            let y = rng_t.index(2) as u8;
            (shift_example(cfg, &mut rng_t, y, false), y)
        })
        .collect();

    Ok((
        LabeledSet::new("shift-source", cfg.dim, source_examples)?,
        LabeledSet::new("shift-target", cfg.dim, target_examples)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centroid(pts: &[([f64; 2], u8)]) -> [f64; 2] {
        let n = pts.len() as f64;
        let (sx, sy) = pts
            .iter()
            .fold((0.0, 0.0), |(sx, sy), (p, _)| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    #[test]
    fn rotation_matches_rotation_matrix() {
        let p = rotate_point([1.0, 0.0], 35.0, [0.0, 0.0]);
        assert!((p[0] - 0.8191520442889918).abs() < 1e-12);
        assert!((p[1] - 0.573576436351046).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_pairwise_distances() {
        let cfg = MoonsConfig::default().with_seed(3);
        let mut rng = Rng::new(cfg.seed);
        let pts = sample_moons(&cfg, &mut rng);
        let center = centroid(&pts);
        let rotated: Vec<[f64; 2]> = pts
            .iter()
            .map(|(p, _)| rotate_point(*p, 35.0, center))
            .collect();
        for i in (0..pts.len()).step_by(17) {
            for j in (i + 1..pts.len()).step_by(23) {
                let d0 = ((pts[i].0[0] - pts[j].0[0]).powi(2)
                    + (pts[i].0[1] - pts[j].0[1]).powi(2))
                .sqrt();
                let d1 = ((rotated[i][0] - rotated[j][0]).powi(2)
                    + (rotated[i][1] - rotated[j][1]).powi(2))
                .sqrt();
                assert!((d0 - d1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn moons_sizes_and_balance() {
        let cfg = MoonsConfig::default().with_seed(1);
        let (s, t, t_truth) = gen_moons(&cfg).unwrap();
        assert_eq!(s.len(), 300);
        assert_eq!(t.len(), 300);
        assert_eq!(t_truth.len(), 300);
        let ones = s.examples.iter().filter(|(_, y)| *y == 1).count();
        assert_eq!(ones, 150);
        let t_ones = t_truth.examples.iter().filter(|(_, y)| *y == 1).count();
        assert_eq!(t_ones, 150);
        // Truth carries the same rotated features as the unlabeled sample.
        for (u, (x, _)) in t.examples.iter().zip(&t_truth.examples) {
            assert_eq!(u, x);
        }
    }

    #[test]
    fn identity_rotation_with_shared_draw_reproduces_features() {
        let cfg = MoonsConfig {
            rotation_deg: 0.0,
            noise_sd: 0.0,
            ..MoonsConfig::default()
        };
        let mut rng_a = Rng::new(123);
        let mut rng_b = Rng::new(123);
        let a = sample_moons(&cfg, &mut rng_a);
        let b = sample_moons(&cfg, &mut rng_b);
        let center = centroid(&b);
        for ((pa, _), (pb, _)) in a.iter().zip(&b) {
            let r = rotate_point(*pb, cfg.rotation_deg, center);
            assert_eq!(pa, &r);
        }
    }

    #[test]
    fn sparse_format_roundtrip_and_inference() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.sparse");
        std::fs::write(&path, "1 0:2.0 4:1.0\n").unwrap();
        let set = load_sparse(&path, 0).unwrap().labeled().unwrap();
        assert_eq!(set.dim, 5);
        assert_eq!(set.examples[0].1, 1);

        let unl_path = dir.path().join("unl.sparse");
        std::fs::write(&unl_path, "-1 3:1.0\n").unwrap();
        match load_sparse(&unl_path, 0).unwrap() {
            SparseData::Unlabeled(u) => assert_eq!(u.len(), 1),
            SparseData::Labeled(_) => panic!("expected unlabeled"),
        }

        // Round trip on random sets.
        let mut rng = Rng::new(44);
        for case in 0..20 {
            let dim = 6 + rng.index(10);
            let mut examples = Vec::new();
            for _ in 0..5 {
                let mut entries = Vec::new();
                for i in 0..dim {
                    if rng.uniform(0.0, 1.0) < 0.4 {
                        entries.push((i, (rng.index(9) + 1) as f64 * 0.5));
                    }
                }
                examples.push((SparseVec::new(dim, entries).unwrap(), rng.index(2) as u8));
            }
            let set = LabeledSet::new("roundtrip", dim, examples).unwrap();
            let p = dir.path().join(format!("case{case}.sparse"));
            save_sparse_labeled(&set, &p).unwrap();
            let back = load_sparse(&p, dim).unwrap().labeled().unwrap();
            assert_eq!(back.examples, set.examples);
        }
    }

    #[test]
    fn sparse_format_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.sparse");
        std::fs::write(&path, "1 0:1.0\n0 2:1.0 2:3.0\n").unwrap();
        let err = load_sparse(&path, 0).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("duplicate"), "{err}");

        std::fs::write(&path, "1 nonsense\n").unwrap();
        let err = load_sparse(&path, 0).unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");

        std::fs::write(&path, "1 0:1.0\n-1 1:1.0\n").unwrap();
        let err = load_sparse(&path, 0).unwrap_err().to_string();
        assert!(err.contains("mixes"), "{err}");
    }

    #[test]
    fn task_split_is_disjoint_and_sized() {
        let mut rng = Rng::new(70);
        let dim = 4;
        let mk = |n: usize, name: &str, rng: &mut Rng| {
            let examples = (0..n)
                .map(|i| {
                    let v = rng.uniform(0.5, 2.0);
                    (SparseVec::new(dim, vec![(i % dim, v)]).unwrap(), (i % 2) as u8)
                })
                .collect();
            LabeledSet::new(name, dim, examples).unwrap()
        };
        let source = mk(50, "src", &mut rng);
        let target = mk(60, "tgt", &mut rng);
        let task = make_task(&source, &target, 30, 20, 10, 5).unwrap();
        assert_eq!(task.source.len(), 30);
        assert_eq!(task.target_unlabeled.len(), 20);
        assert_eq!(task.target_val.len(), 10);
        assert_eq!(task.target_test.len(), 30);
        assert_eq!(task.name, "src->tgt");

        // Same seed, same split.
        let again = make_task(&source, &target, 30, 20, 10, 5).unwrap();
        assert_eq!(again.target_val.examples, task.target_val.examples);

        // Exact-minimum pools leave no test set.
        assert!(make_task(&source, &target, 30, 50, 10, 5).is_err());
    }

    #[test]
    fn shift_task_shapes() {
        let cfg = ShiftTaskConfig {
            dim: 500,
            n_source: 40,
            n_target: 60,
            ..ShiftTaskConfig::default()
        };
        let (s, t) = gen_shift_task(&cfg).unwrap();
        assert_eq!(s.len(), 40);
        assert_eq!(t.len(), 60);
        assert_eq!(s.dim, 500);
        // Source examples never touch the nuisance block, target examples
        // never touch the source-only block.
        for (x, _) in &s.examples {
            assert!(x.entries().iter().all(|&(i, _)| !(200..300).contains(&i)));
        }
        for (x, _) in &t.examples {
            assert!(x.entries().iter().all(|&(i, _)| i >= 100));
        }
    }
}
