//! Numeric emissions behind the four standard views of a trained 2D model:
//! label-classification surface, domain-classification surface, PCA of the
//! hidden representations, and per-neuron level-set lines. Everything is
//! plain numbers (grids and point lists) meant to be plotted elsewhere.

use std::io::Write;

use crate::data::{LabeledSet, UnlabeledSet};
use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen_sym;
use crate::net::DannParams;
use crate::tensor::{DenseMat, DenseVec, SparseVec};

/// Axis-aligned evaluation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max && x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidArg(format!(
                "region bounds must be finite with min < max, got x [{x_min}, {x_max}], y [{y_min}, {y_max}]"
            )));
        }
        Ok(Region { x_min, x_max, y_min, y_max })
    }

    /// Bounding box of 2D points, inflated by `margin` of its span per side.
    pub fn bounding(points: &[[f64; 2]], margin: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput { what: "region points" });
        }
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for p in points {
            x_min = x_min.min(p[0]);
            x_max = x_max.max(p[0]);
            y_min = y_min.min(p[1]);
            y_max = y_max.max(p[1]);
        }
        let dx = (x_max - x_min).max(1e-9) * margin;
        let dy = (y_max - y_min).max(1e-9) * margin;
        Region::new(x_min - dx, x_max + dx, y_min - dy, y_max + dy)
    }
}

/// Scalar field sampled on a `steps x steps` lattice over a region. Row `iy`
/// holds values for `y = y_min + iy * (y_max - y_min) / (steps - 1)`, column
/// `ix` likewise along x. Values are pure per-node evaluations; nothing is
/// interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub region: Region,
    pub steps: usize,
    pub values: DenseMat,
}

impl Grid2D {
    pub fn node(&self, ix: usize, iy: usize) -> [f64; 2] {
        let fx = ix as f64 / (self.steps - 1) as f64;
        let fy = iy as f64 / (self.steps - 1) as f64;
        [
            self.region.x_min + fx * (self.region.x_max - self.region.x_min),
            self.region.y_min + fy * (self.region.y_max - self.region.y_min),
        ]
    }
}

fn point_sparse(p: [f64; 2]) -> SparseVec {
    let mut entries = Vec::new();
    if p[0] != 0.0 {
        entries.push((0, p[0]));
    }
    if p[1] != 0.0 {
        entries.push((1, p[1]));
    }
    SparseVec::new(2, entries).expect("finite 2d point")
}

fn require_2d(params: &DannParams, op: &'static str) -> Result<()> {
    if params.input_dim() != 2 {
        return Err(Error::DimMismatch {
            op,
            expected: "2-dimensional model".into(),
            found: format!("input dim {}", params.input_dim()),
        });
    }
    Ok(())
}

fn eval_grid(
    region: Region,
    steps: usize,
    mut f: impl FnMut(&SparseVec) -> Result<f64>,
) -> Result<Grid2D> {
    if steps < 2 {
        return Err(Error::InvalidArg("grid needs at least 2 steps per axis".into()));
    }
    let mut values = DenseMat::zeros(steps, steps);
    let grid = Grid2D { region, steps, values: DenseMat::zeros(0, 0) };
    for iy in 0..steps {
        for ix in 0..steps {
            let p = grid.node(ix, iy);
            values.set(iy, ix, f(&point_sparse(p))?);
        }
    }
    Ok(Grid2D { region, steps, values })
}

/// Probability assigned to label 1 at every grid node; the decision boundary
/// is the 0.5 level set.
pub fn label_boundary_grid(params: &DannParams, region: Region, steps: usize) -> Result<Grid2D> {
    require_2d(params, "label_boundary_grid")?;
    eval_grid(region, steps, |x| {
        let f = params.forward_output(&params.forward_hidden(x)?)?;
        Ok(f.get(1))
    })
}

/// Domain-regressor output at every grid node; nodes with value >= 0.5 are
/// classified as source.
pub fn domain_boundary_grid(params: &DannParams, region: Region, steps: usize) -> Result<Grid2D> {
    require_2d(params, "domain_boundary_grid")?;
    eval_grid(region, steps, |x| {
        params.domain_regressor(&params.forward_hidden(x)?)
    })
}

/// One projected point of the PCA embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaPoint {
    pub x: f64,
    pub y: f64,
    /// 1 for source, 0 for target.
    pub domain: u8,
    /// Class label when known (source points); target points carry `None`.
    pub label: Option<u8>,
}

/// Two-component PCA of the pooled hidden representations.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca2D {
    pub mean: DenseVec,
    pub components: [DenseVec; 2],
    pub eigenvalues: [f64; 2],
    pub projected: Vec<PcaPoint>,
}

/// Maps every source and target example through the hidden layer, fits PCA
/// on the pooled representations (centering only), and projects onto the
/// top two components. Component signs are fixed by making each component's
/// largest-magnitude coordinate positive.
pub fn pca_embed(params: &DannParams, source: &LabeledSet, target: &UnlabeledSet) -> Result<Pca2D> {
    let total = source.len() + target.len();
    if total < 3 {
        return Err(Error::Data(format!(
            "pca needs at least 3 pooled examples, got {total}"
        )));
    }
    let l = params.hidden_size();
    let mut reps: Vec<DenseVec> = Vec::with_capacity(total);
    for (x, _) in &source.examples {
        reps.push(params.forward_hidden(x)?);
    }
    for x in &target.examples {
        reps.push(params.forward_hidden(x)?);
    }

    let mut mean = DenseVec::zeros(l);
    for h in &reps {
        mean.add_scaled(1.0 / total as f64, h)?;
    }
    let mut cov = DenseMat::zeros(l, l);
    for h in &reps {
        let mut centered = h.clone();
        centered.add_scaled(-1.0, &mean)?;
        for i in 0..l {
            let ci = centered.get(i);
            if ci == 0.0 {
                continue;
            }
            for j in 0..l {
                let cur = cov.get(i, j);
                cov.set(i, j, cur + ci * centered.get(j));
            }
        }
    }
    let denom = (total - 1) as f64;
    for i in 0..l {
        for j in 0..l {
            let cur = cov.get(i, j);
            cov.set(i, j, cur / denom);
        }
    }

    let (vals, vecs) = jacobi_eigen_sym(&cov, 1e-12, 100)?;
    if l < 2 || vals[0] <= 1e-15 {
        return Err(Error::ZeroVariance);
    }

    let mut components = [DenseVec::zeros(l), DenseVec::zeros(l)];
    for (c, comp) in components.iter_mut().enumerate() {
        for r in 0..l {
            comp.set(r, vecs.get(r, c));
        }
        // Sign convention: largest-magnitude coordinate positive.
        let mut arg = 0usize;
        for r in 1..l {
            if comp.get(r).abs() > comp.get(arg).abs() {
                arg = r;
            }
        }
        if comp.get(arg) < 0.0 {
            comp.scale(-1.0);
        }
    }

    let project = |h: &DenseVec| -> Result<(f64, f64)> {
        let mut centered = h.clone();
        centered.add_scaled(-1.0, &mean)?;
        Ok((centered.dot(&components[0])?, centered.dot(&components[1])?))
    };
    let mut projected = Vec::with_capacity(total);
    for (idx, (_, y)) in source.examples.iter().enumerate() {
        let (px, py) = project(&reps[idx])?;
        projected.push(PcaPoint { x: px, y: py, domain: 1, label: Some(*y) });
    }
    for (k, h) in reps[source.len()..].iter().enumerate() {
        let _ = k;
        let (px, py) = project(h)?;
        projected.push(PcaPoint { x: px, y: py, domain: 0, label: None });
    }

    Ok(Pca2D {
        mean,
        components,
        eigenvalues: [vals[0], vals[1]],
        projected,
    })
}

/// Level-set line of one hidden neuron: the points where its activation is
/// exactly one half, i.e. where the pre-activation `a*x1 + b*x2 + c` is
/// zero. Rows with a zero weight vector have constant activation and are
/// flagged instead of emitted as lines.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetLine {
    pub neuron: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub degenerate: bool,
}

pub fn hidden_level_sets(params: &DannParams) -> Result<Vec<LevelSetLine>> {
    require_2d(params, "hidden_level_sets")?;
    let mut out = Vec::with_capacity(params.hidden_size());
    for i in 0..params.hidden_size() {
        let a = params.hidden_weights.get(i, 0);
        let b = params.hidden_weights.get(i, 1);
        let c = params.hidden_bias.get(i);
        out.push(LevelSetLine {
            neuron: i,
            a,
            b,
            c,
            degenerate: a == 0.0 && b == 0.0,
        });
    }
    Ok(out)
}

/// Writes `x,y,value` rows.
pub fn write_grid_csv(grid: &Grid2D, out: &mut impl Write) -> Result<()> {
    writeln!(out, "x,y,value")?;
    for iy in 0..grid.steps {
        for ix in 0..grid.steps {
            let p = grid.node(ix, iy);
            writeln!(out, "{},{},{}", p[0], p[1], grid.values.get(iy, ix))?;
        }
    }
    Ok(())
}

/// Writes `pc1,pc2,domain,label` rows; unlabeled points carry label -1.
pub fn write_pca_csv(pca: &Pca2D, out: &mut impl Write) -> Result<()> {
    writeln!(out, "pc1,pc2,domain,label")?;
    for p in &pca.projected {
        let label = p.label.map(|y| y as i64).unwrap_or(-1);
        writeln!(out, "{},{},{},{}", p.x, p.y, p.domain, label)?;
    }
    Ok(())
}

/// Writes `neuron_id,a,b,c,degenerate_flag` rows.
pub fn write_levelsets_csv(lines: &[LevelSetLine], out: &mut impl Write) -> Result<()> {
    writeln!(out, "neuron_id,a,b,c,degenerate_flag")?;
    for l in lines {
        writeln!(
            out,
            "{},{},{},{},{}",
            l.neuron,
            l.a,
            l.b,
            l.c,
            u8::from(l.degenerate)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{TrainConfig, TrainMode, Trainer};
    use crate::rng::Rng;
    use crate::tensor::sigmoid;

    fn zero_params(l: usize) -> DannParams {
        DannParams {
            hidden_weights: DenseMat::zeros(l, 2),
            hidden_bias: DenseVec::zeros(l),
            output_weights: DenseMat::zeros(2, l),
            output_bias: DenseVec::zeros(2),
            domain_weights: DenseVec::zeros(l),
            domain_bias: 0.0,
        }
    }

    fn region() -> Region {
        Region::new(-1.0, 1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_model_gives_constant_grid() {
        let p = zero_params(3);
        let g = label_boundary_grid(&p, region(), 5).unwrap();
        for iy in 0..5 {
            for ix in 0..5 {
                assert_eq!(g.values.get(iy, ix), 0.5);
            }
        }
        let d = domain_boundary_grid(&p, region(), 5).unwrap();
        assert_eq!(d.values.get(2, 2), 0.5);
    }

    #[test]
    fn grid_values_are_probabilities_and_recomputable() {
        let mut rng = Rng::new(77);
        let mut p = zero_params(4);
        for r in 0..4 {
            p.hidden_weights.set(r, 0, rng.uniform(-2.0, 2.0));
            p.hidden_weights.set(r, 1, rng.uniform(-2.0, 2.0));
            p.hidden_bias.set(r, rng.uniform(-1.0, 1.0));
            p.domain_weights.set(r, rng.uniform(-1.0, 1.0));
            p.output_weights.set(0, r, rng.uniform(-1.0, 1.0));
            p.output_weights.set(1, r, rng.uniform(-1.0, 1.0));
        }
        let g = label_boundary_grid(&p, region(), 7).unwrap();
        for iy in 0..7 {
            for ix in 0..7 {
                let v = g.values.get(iy, ix);
                assert!(v > 0.0 && v < 1.0);
                // Exact recomputation through the forward ops.
                let node = g.node(ix, iy);
                let x = point_sparse(node);
                let f = p.forward_output(&p.forward_hidden(&x).unwrap()).unwrap();
                assert_eq!(v, f.get(1));
            }
        }
    }

    #[test]
    fn non_2d_model_is_rejected() {
        let p = DannParams {
            hidden_weights: DenseMat::zeros(3, 4),
            hidden_bias: DenseVec::zeros(3),
            output_weights: DenseMat::zeros(2, 3),
            output_bias: DenseVec::zeros(2),
            domain_weights: DenseVec::zeros(3),
            domain_bias: 0.0,
        };
        assert!(label_boundary_grid(&p, region(), 4).is_err());
        assert!(domain_boundary_grid(&p, region(), 4).is_err());
        assert!(hidden_level_sets(&p).is_err());
    }

    #[test]
    fn level_set_lines_and_degenerates() {
        let mut p = zero_params(2);
        p.hidden_weights.set(0, 0, 1.0); // vertical line x1 = 0
        p.hidden_bias.set(1, 1.0); // degenerate: constant sigm(1)
        let lines = hidden_level_sets(&p).unwrap();
        assert_eq!(lines[0], LevelSetLine { neuron: 0, a: 1.0, b: 0.0, c: 0.0, degenerate: false });
        assert!(lines[1].degenerate);

        // Points sampled on an emitted line sit on activation one half.
        let mut rng = Rng::new(3);
        let mut p2 = zero_params(3);
        for r in 0..3 {
            p2.hidden_weights.set(r, 0, rng.uniform(-2.0, 2.0));
            p2.hidden_weights.set(r, 1, rng.uniform(0.5, 2.0));
            p2.hidden_bias.set(r, rng.uniform(-1.0, 1.0));
        }
        for line in hidden_level_sets(&p2).unwrap() {
            assert!(!line.degenerate);
            for t in [-2.0, -0.5, 0.0, 1.3] {
                // Solve a*x1 + b*x2 + c = 0 at x1 = t.
                let x2 = -(line.a * t + line.c) / line.b;
                let pre = line.a * t + line.b * x2 + line.c;
                assert!(pre.abs() < 1e-12);
                let h = p2.forward_hidden(&point_sparse([t, x2])).unwrap();
                assert!((h.get(line.neuron) - 0.5).abs() < 1e-9);
                let _ = sigmoid(pre);
            }
        }
    }

    #[test]
    fn pca_on_axis_aligned_spread() {
        // Hidden layer is identity-ish: 2 neurons reading x1 and x2. With
        // points spread mostly along x1, components align with the axes.
        let mut p = zero_params(2);
        p.hidden_weights.set(0, 0, 0.2);
        p.hidden_weights.set(1, 1, 0.05);
        let mut rng = Rng::new(10);
        let mut src = Vec::new();
        for _ in 0..40 {
            let x1 = rng.uniform(-3.0, 3.0);
            let x2 = rng.uniform(-0.3, 0.3);
            src.push((point_sparse([x1, x2]), 0u8));
        }
        let source = LabeledSet::new("s", 2, src).unwrap();
        let target = UnlabeledSet::new("t", 2, vec![point_sparse([0.5, 0.1])]).unwrap();
        let pca = pca_embed(&p, &source, &target).unwrap();
        // First component concentrates on neuron 0.
        assert!(pca.components[0].get(0).abs() > 0.99);
        assert!(pca.eigenvalues[0] >= pca.eigenvalues[1]);
        // Orthonormal within tolerance.
        assert!(pca.components[0].dot(&pca.components[1]).unwrap().abs() < 1e-9);
        assert!((pca.components[0].norm() - 1.0).abs() < 1e-9);

        // Projection of the mean representation is the origin.
        let mean_h = pca.mean.clone();
        let mut centered = mean_h;
        centered.add_scaled(-1.0, &pca.mean).unwrap();
        assert_eq!(centered.dot(&pca.components[0]).unwrap(), 0.0);

        // Projected variance reproduces the eigenvalues.
        let n = pca.projected.len() as f64;
        let mean_x: f64 = pca.projected.iter().map(|q| q.x).sum::<f64>() / n;
        let var_x: f64 =
            pca.projected.iter().map(|q| (q.x - mean_x).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var_x - pca.eigenvalues[0]).abs() < 1e-8);
    }

    #[test]
    fn pca_matches_brute_force_eigensolve() {
        // Random small representation cloud; eigenvalues from the module
        // must match a dense eigensolve of the same covariance.
        let mut rng = Rng::new(31);
        let n = 5;
        let cfg = TrainConfig::new(n, 0.0, 0.1, 3, TrainMode::NnPlain);
        let trainer = Trainer::new(2, &cfg).unwrap();
        let params = trainer.params().clone();
        let mut src = Vec::new();
        for _ in 0..30 {
            src.push((point_sparse([rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)]), 1u8));
        }
        let source = LabeledSet::new("s", 2, src).unwrap();
        let target = UnlabeledSet::new(
            "t",
            2,
            (0..20)
                .map(|_| point_sparse([rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)]))
                .collect(),
        )
        .unwrap();
        let pca = pca_embed(&params, &source, &target).unwrap();

        // Brute force covariance of the same hidden vectors.
        let mut reps = Vec::new();
        for (x, _) in &source.examples {
            reps.push(params.forward_hidden(x).unwrap());
        }
        for x in &target.examples {
            reps.push(params.forward_hidden(x).unwrap());
        }
        let total = reps.len() as f64;
        let mut mean = DenseVec::zeros(n);
        for h in &reps {
            mean.add_scaled(1.0 / total, h).unwrap();
        }
        let mut cov = DenseMat::zeros(n, n);
        for h in &reps {
            for i in 0..n {
                for j in 0..n {
                    let cur = cov.get(i, j);
                    cov.set(
                        i,
                        j,
                        cur + (h.get(i) - mean.get(i)) * (h.get(j) - mean.get(j)) / (total - 1.0),
                    );
                }
            }
        }
        let (vals, _) = jacobi_eigen_sym(&cov, 1e-14, 200).unwrap();
        assert!((pca.eigenvalues[0] - vals[0]).abs() < 1e-8);
        assert!((pca.eigenvalues[1] - vals[1]).abs() < 1e-8);
    }

    #[test]
    fn zero_variance_is_detected() {
        let p = zero_params(2); // every representation is (0.5, 0.5)
        let pts: Vec<(SparseVec, u8)> = (0..5)
            .map(|i| (point_sparse([i as f64, 1.0]), 0u8))
            .collect();
        let source = LabeledSet::new("s", 2, pts).unwrap();
        let target = UnlabeledSet::new("t", 2, vec![point_sparse([1.0, 2.0])]).unwrap();
        assert!(matches!(
            pca_embed(&p, &source, &target),
            Err(Error::ZeroVariance)
        ));
    }
}
