//! Shallow domain-adversarial network.
//!
//! One sigmoid hidden layer feeds a two-way softmax label classifier and a
//! logistic domain regressor. Training is per-example SGD: the label loss is
//! the negative log-probability of the correct label; the domain term is the
//! regressor's log-likelihood on a (source, sampled target) pair, scaled by
//! `lambda`. Classifier parameters descend on the combined objective while
//! the regressor parameters ascend on it, so the hidden layer is pushed to
//! make the two domains indistinguishable exactly as fast as the regressor
//! learns to tell them apart.
//!
//! Three modes share the same update code:
//! - `Dann`: the full adversarial update.
//! - `NnPlain`: `lambda` forced to 0 and the domain pass skipped entirely;
//!   equivalent to a plain source-only network.
//! - `NnWithRegressor`: the regressor is trained on both domains but its
//!   gradient is never propagated into the hidden layer, giving a plain
//!   network plus an independent domain probe.

use serde::{Deserialize, Serialize};

use crate::data::{LabeledSet, UnlabeledSet};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{sigm, sigmoid, softmax, DenseMat, DenseVec, SparseVec};

/// Probabilities are clamped to this band inside logarithms only.
pub const PROB_CLAMP: f64 = 1e-12;

const TAG_INIT: u64 = 0x01;
const TAG_VAL_SPLIT: u64 = 0x02;
const TAG_SHUFFLE: u64 = 0x03;
const TAG_TARGET: u64 = 0x04;

fn ln_clamped(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP).ln()
}

/// Which parts of the adversarial update are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// Full adversarial training.
    Dann,
    /// Source-only network; the target sample is never touched.
    NnPlain,
    /// Plain network plus a domain regressor that observes both domains but
    /// cannot influence the hidden layer.
    NnWithRegressor,
}

impl TrainMode {
    fn uses_target(self) -> bool {
        !matches!(self, TrainMode::NnPlain)
    }

    /// Whether the regularizer backpropagates into the hidden layer.
    fn adversarial_hidden(self) -> bool {
        matches!(self, TrainMode::Dann)
    }
}

fn default_max_epochs() -> usize {
    500
}
fn default_patience() -> usize {
    10
}
fn default_val_fraction() -> f64 {
    0.10
}
fn default_shuffle() -> bool {
    true
}

/// Hyper-parameters for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub seed: u64,
    pub mode: TrainMode,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "default_shuffle")]
    pub shuffle: bool,
}

impl TrainConfig {
    pub fn new(hidden_size: usize, lambda: f64, learning_rate: f64, seed: u64, mode: TrainMode) -> Self {
        TrainConfig {
            hidden_size,
            lambda,
            learning_rate,
            seed,
            mode,
            max_epochs: default_max_epochs(),
            patience: default_patience(),
            val_fraction: default_val_fraction(),
            shuffle: default_shuffle(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 {
            return Err(Error::InvalidArg("hidden_size must be >= 1".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidArg(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArg(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidArg(format!(
                "val_fraction must lie in (0, 1), got {}",
                self.val_fraction
            )));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidArg("max_epochs and patience must be >= 1".into()));
        }
        Ok(())
    }

    /// Effective adaptation weight: `NnPlain` behaves as `lambda = 0`.
    fn effective_lambda(&self) -> f64 {
        match self.mode {
            TrainMode::NnPlain => 0.0,
            _ => self.lambda,
        }
    }
}

/// All learnable parameters.
///
/// Shapes for hidden size `l` over `n`-dimensional inputs: hidden weights
/// `l x n` with bias `l`, output weights `2 x l` with bias `2`, domain
/// weights `l` with a scalar domain bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DannParams {
    pub hidden_weights: DenseMat,
    pub hidden_bias: DenseVec,
    pub output_weights: DenseMat,
    pub output_bias: DenseVec,
    pub domain_weights: DenseVec,
    pub domain_bias: f64,
}

impl DannParams {
    /// Scaled uniform init for the weight matrices (`+-1/sqrt(fan_in)`),
    /// zeros for biases and the domain regressor. Hidden weights are drawn
    /// first, then output weights, row by row.
    pub fn init(input_dim: usize, hidden_size: usize, rng: &mut Rng) -> Self {
        let mut hidden_weights = DenseMat::zeros(hidden_size, input_dim);
        let bound_w = 1.0 / (input_dim as f64).sqrt();
        for r in 0..hidden_size {
            for c in 0..input_dim {
                hidden_weights.set(r, c, rng.uniform(-bound_w, bound_w));
            }
        }
        let mut output_weights = DenseMat::zeros(2, hidden_size);
        let bound_v = 1.0 / (hidden_size as f64).sqrt();
        for r in 0..2 {
            for c in 0..hidden_size {
                output_weights.set(r, c, rng.uniform(-bound_v, bound_v));
            }
        }
        DannParams {
            hidden_weights,
            hidden_bias: DenseVec::zeros(hidden_size),
            output_weights,
            output_bias: DenseVec::zeros(2),
            domain_weights: DenseVec::zeros(hidden_size),
            domain_bias: 0.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden_weights.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_weights.rows()
    }

    /// Hidden representation `sigm(b + W x)`; entries in (0, 1).
    pub fn forward_hidden(&self, x: &SparseVec) -> Result<DenseVec> {
        let mut pre = self.hidden_weights.matvec_sparse(x)?;
        pre.add_scaled(1.0, &self.hidden_bias)?;
        Ok(sigm(&pre))
    }

    /// Class distribution `softmax(c + V h)`; a positive 2-vector summing
    /// to 1 whose component `y` is the probability assigned to class `y`.
    pub fn forward_output(&self, h: &DenseVec) -> Result<DenseVec> {
        let mut logits = self.output_weights.matvec(h)?;
        logits.add_scaled(1.0, &self.output_bias)?;
        softmax(&logits)
    }

    /// Domain regressor `sigm(d + w . h)`: modeled probability that the
    /// representation came from the source domain.
    pub fn domain_regressor(&self, h: &DenseVec) -> Result<f64> {
        Ok(sigmoid(self.domain_bias + self.domain_weights.dot(h)?))
    }

    /// Predicted label; exact ties go to label 0.
    pub fn predict(&self, x: &SparseVec) -> Result<u8> {
        let f = self.forward_output(&self.forward_hidden(x)?)?;
        Ok(if f.get(1) > f.get(0) { 1 } else { 0 })
    }

    /// First non-finite block, if any, in serialization-name order.
    fn first_non_finite_small(&self) -> Option<&'static str> {
        if !self.hidden_bias.all_finite() {
            return Some("b");
        }
        if !self.output_weights.all_finite() {
            return Some("V");
        }
        if !self.output_bias.all_finite() {
            return Some("c");
        }
        if !self.domain_weights.all_finite() {
            return Some("w");
        }
        if !self.domain_bias.is_finite() {
            return Some("d");
        }
        None
    }
}

/// Negative log-probability of the correct label.
pub fn nll_loss(f: &DenseVec, y: u8) -> Result<f64> {
    if y > 1 {
        return Err(Error::InvalidArg(format!("label must be 0 or 1, got {y}")));
    }
    if f.len() != 2 {
        return Err(Error::DimMismatch {
            op: "nll_loss",
            expected: "2-class distribution".into(),
            found: format!("len {}", f.len()),
        });
    }
    Ok(-ln_clamped(f.get(y as usize)))
}

/// Domain log-loss `-z log o - (1-z) log(1-o)`.
pub fn domain_loss(o: f64, z: u8) -> Result<f64> {
    if z > 1 {
        return Err(Error::InvalidArg(format!("domain label must be 0 or 1, got {z}")));
    }
    if !(o > 0.0 && o < 1.0) {
        return Err(Error::InvalidArg(format!(
            "domain regressor output must lie in (0, 1), got {o}"
        )));
    }
    Ok(-(z as f64) * ln_clamped(o) - (1.0 - z as f64) * ln_clamped(1.0 - o))
}

/// Misclassified fraction.
pub fn risk(params: &DannParams, data: &LabeledSet) -> Result<f64> {
    if data.examples.is_empty() {
        return Err(Error::EmptyInput { what: "risk data" });
    }
    let mut wrong = 0usize;
    for (x, y) in &data.examples {
        if params.predict(x)? != *y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / data.examples.len() as f64)
}

/// Per-step quantities shared by the in-place update and the materialized
/// deltas, computed once from the pre-update parameters.
struct StepScalars {
    h_s: DenseVec,
    /// `f(x_s) - e(y)`.
    delta_c: DenseVec,
    /// Classification part of the hidden-bias delta.
    delta_b_cls: DenseVec,
    domain: Option<DomainScalars>,
}

struct DomainScalars {
    delta_d: f64,
    delta_w: DenseVec,
    /// Regularizer contribution through the source hidden vector.
    tmp_s: DenseVec,
    /// Same through the sampled target hidden vector.
    tmp_t: DenseVec,
}

fn compute_step(
    params: &DannParams,
    xs: &SparseVec,
    ys: u8,
    xt: Option<&SparseVec>,
    cfg: &TrainConfig,
) -> Result<StepScalars> {
    if ys > 1 {
        return Err(Error::InvalidArg(format!("label must be 0 or 1, got {ys}")));
    }
    let l = params.hidden_size();
    let h_s = params.forward_hidden(xs)?;
    let f_s = params.forward_output(&h_s)?;

    let mut delta_c = f_s;
    delta_c.set(ys as usize, delta_c.get(ys as usize) - 1.0);

    let vt_dc = params.output_weights.matvec_transpose(&delta_c)?;
    let mut delta_b_cls = DenseVec::zeros(l);
    for i in 0..l {
        let h = h_s.get(i);
        delta_b_cls.set(i, vt_dc.get(i) * h * (1.0 - h));
    }

    let domain = if cfg.mode.uses_target() {
        let xt = xt.ok_or(Error::EmptyInput { what: "target example" })?;
        let lambda = cfg.effective_lambda();
        let o_s = params.domain_regressor(&h_s)?;
        let mut delta_d = lambda * (1.0 - o_s);
        let mut delta_w = h_s.clone();
        delta_w.scale(lambda * (1.0 - o_s));
        let mut tmp_s = DenseVec::zeros(l);
        for i in 0..l {
            let h = h_s.get(i);
            tmp_s.set(i, lambda * (1.0 - o_s) * params.domain_weights.get(i) * h * (1.0 - h));
        }

        let h_t = params.forward_hidden(xt)?;
        let o_t = params.domain_regressor(&h_t)?;
        delta_d -= lambda * o_t;
        delta_w.add_scaled(-lambda * o_t, &h_t)?;
        let mut tmp_t = DenseVec::zeros(l);
        for i in 0..l {
            let h = h_t.get(i);
            tmp_t.set(i, -lambda * o_t * params.domain_weights.get(i) * h * (1.0 - h));
        }

        Some(DomainScalars { delta_d, delta_w, tmp_s, tmp_t })
    } else {
        None
    };

    Ok(StepScalars { h_s, delta_c, delta_b_cls, domain })
}

/// Materialized per-example deltas, in the descent/ascent convention of the
/// update rule: classifier blocks move along `-alpha * delta`, the domain
/// regressor along `+alpha * delta`.
#[derive(Debug, Clone)]
pub struct StepDeltas {
    pub hidden_weights: DenseMat,
    pub hidden_bias: DenseVec,
    pub output_weights: DenseMat,
    pub output_bias: DenseVec,
    pub domain_weights: DenseVec,
    pub domain_bias: f64,
}

/// Computes the deltas of one SGD step without applying them. `xt` is the
/// already-sampled target example; it is required unless the mode is
/// `NnPlain`.
pub fn step_deltas(
    params: &DannParams,
    xs: &SparseVec,
    ys: u8,
    xt: Option<&SparseVec>,
    cfg: &TrainConfig,
) -> Result<StepDeltas> {
    let s = compute_step(params, xs, ys, xt, cfg)?;
    let l = params.hidden_size();
    let n = params.input_dim();

    let mut output_weights = DenseMat::zeros(2, l);
    output_weights.add_scaled_outer(1.0, &s.delta_c, &s.h_s)?;

    let mut hidden_weights = DenseMat::zeros(l, n);
    hidden_weights.add_scaled_outer_sparse(1.0, &s.delta_b_cls, xs)?;
    let mut hidden_bias = s.delta_b_cls.clone();

    let (domain_weights, domain_bias) = match &s.domain {
        Some(d) => {
            if cfg.mode.adversarial_hidden() {
                hidden_bias.add_scaled(1.0, &d.tmp_s)?;
                hidden_bias.add_scaled(1.0, &d.tmp_t)?;
                hidden_weights.add_scaled_outer_sparse(1.0, &d.tmp_s, xs)?;
                hidden_weights.add_scaled_outer_sparse(
                    1.0,
                    &d.tmp_t,
                    xt.expect("domain scalars imply a target example"),
                )?;
            }
            (d.delta_w.clone(), d.delta_d)
        }
        None => (DenseVec::zeros(l), 0.0),
    };

    Ok(StepDeltas {
        hidden_weights,
        hidden_bias,
        output_weights,
        output_bias: s.delta_c,
        domain_weights,
        domain_bias,
    })
}

fn sparse_cols_finite(m: &DenseMat, x: &SparseVec) -> bool {
    for r in 0..m.rows() {
        for &(i, _) in x.entries() {
            if !m.get(r, i).is_finite() {
                return false;
            }
        }
    }
    true
}

/// Applies one SGD step in place. Sparse inputs touch only their support in
/// the hidden weight matrix. The updated blocks are checked for NaN/Inf and
/// the step aborts naming the offending block.
pub fn sgd_step(
    params: &mut DannParams,
    xs: &SparseVec,
    ys: u8,
    xt: Option<&SparseVec>,
    cfg: &TrainConfig,
) -> Result<()> {
    sgd_step_indexed(params, xs, ys, xt, cfg, 0)
}

fn sgd_step_indexed(
    params: &mut DannParams,
    xs: &SparseVec,
    ys: u8,
    xt: Option<&SparseVec>,
    cfg: &TrainConfig,
    step: usize,
) -> Result<()> {
    let s = compute_step(params, xs, ys, xt, cfg)?;
    let alpha = cfg.learning_rate;

    params.output_weights.add_scaled_outer(-alpha, &s.delta_c, &s.h_s)?;
    params.output_bias.add_scaled(-alpha, &s.delta_c)?;

    params.hidden_weights.add_scaled_outer_sparse(-alpha, &s.delta_b_cls, xs)?;
    params.hidden_bias.add_scaled(-alpha, &s.delta_b_cls)?;

    if let Some(d) = &s.domain {
        if cfg.mode.adversarial_hidden() {
            let xt = xt.expect("domain scalars imply a target example");
            params.hidden_weights.add_scaled_outer_sparse(-alpha, &d.tmp_s, xs)?;
            params.hidden_weights.add_scaled_outer_sparse(-alpha, &d.tmp_t, xt)?;
            params.hidden_bias.add_scaled(-alpha, &d.tmp_s)?;
            params.hidden_bias.add_scaled(-alpha, &d.tmp_t)?;
        }
        // Ascent: the regressor maximizes its log-likelihood.
        params.domain_weights.add_scaled(alpha, &d.delta_w)?;
        params.domain_bias += alpha * d.delta_d;
    }

    if let Some(block) = params.first_non_finite_small() {
        return Err(Error::NonFinite { block, step });
    }
    if !sparse_cols_finite(&params.hidden_weights, xs)
        || xt.is_some_and(|t| !sparse_cols_finite(&params.hidden_weights, t))
    {
        return Err(Error::NonFinite { block: "W", step });
    }
    Ok(())
}

/// Drives epochs over a fixed training slice. `train` wraps this with the
/// validation split and early stopping; tests drive it directly to compare
/// parameter trajectories.
pub struct Trainer {
    params: DannParams,
    cfg: TrainConfig,
    shuffle_rng: Rng,
    target_rng: Rng,
    steps: usize,
}

impl Trainer {
    pub fn new(input_dim: usize, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let root = Rng::new(cfg.seed);
        let mut init_rng = root.derive(TAG_INIT);
        Ok(Trainer {
            params: DannParams::init(input_dim, cfg.hidden_size, &mut init_rng),
            cfg: cfg.clone(),
            shuffle_rng: root.derive(TAG_SHUFFLE),
            target_rng: root.derive(TAG_TARGET),
            steps: 0,
        })
    }

    pub fn params(&self) -> &DannParams {
        &self.params
    }

    /// Replaces the parameters, e.g. to warm-start from a saved model.
    pub fn set_params(&mut self, params: DannParams) -> Result<()> {
        if params.hidden_size() != self.params.hidden_size()
            || params.input_dim() != self.params.input_dim()
        {
            return Err(Error::DimMismatch {
                op: "set_params",
                expected: format!("{}x{}", self.params.hidden_size(), self.params.input_dim()),
                found: format!("{}x{}", params.hidden_size(), params.input_dim()),
            });
        }
        self.params = params;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// One pass over the source slice, sampling one target example per
    /// source example in the modes that use the target sample.
    pub fn epoch(&mut self, source: &LabeledSet, target: Option<&UnlabeledSet>) -> Result<()> {
        if source.examples.is_empty() {
            return Err(Error::EmptyInput { what: "source sample" });
        }
        let target_examples = if self.cfg.mode.uses_target() {
            let t = target.ok_or(Error::EmptyInput { what: "target sample" })?;
            if t.examples.is_empty() {
                return Err(Error::EmptyInput { what: "target sample" });
            }
            if t.dim != source.dim {
                return Err(Error::DimMismatch {
                    op: "epoch",
                    expected: format!("source dim {}", source.dim),
                    found: format!("target dim {}", t.dim),
                });
            }
            Some(&t.examples)
        } else {
            None
        };

        let mut order: Vec<usize> = (0..source.examples.len()).collect();
        if self.cfg.shuffle {
            self.shuffle_rng.shuffle(&mut order);
        }
        for idx in order {
            let (xs, ys) = &source.examples[idx];
            let xt = target_examples.map(|t| &t[self.target_rng.index(t.len())]);
            self.steps += 1;
            sgd_step_indexed(&mut self.params, xs, *ys, xt, &self.cfg, self.steps)?;
        }
        Ok(())
    }
}

/// Outcome of a training run. The returned parameters are the snapshot from
/// `best_epoch`; `best_val_risk` always equals the minimum of the history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_risk: f64,
    pub val_risk_history: Vec<f64>,
    /// Indices into the source sample held out for validation.
    pub val_indices: Vec<usize>,
}

/// Trains with early stopping: a fixed fraction of the source sample is held
/// out once before training, and the run stops after `patience` epochs
/// without strict improvement of the held-out risk (or at `max_epochs`).
/// Among epochs tying the minimal risk the latest snapshot is returned, so
/// domain adaptation keeps progressing while the source risk is flat.
pub fn train(
    source: &LabeledSet,
    target: Option<&UnlabeledSet>,
    cfg: &TrainConfig,
) -> Result<(DannParams, TrainReport)> {
    cfg.validate()?;
    let m = source.examples.len();
    if m == 0 {
        return Err(Error::EmptyInput { what: "source sample" });
    }
    if m < 2 {
        return Err(Error::Data(
            "source sample too small to hold out a validation slice".into(),
        ));
    }

    let root = Rng::new(cfg.seed);
    let mut split_rng = root.derive(TAG_VAL_SPLIT);
    let mut order: Vec<usize> = (0..m).collect();
    split_rng.shuffle(&mut order);
    let val_count = ((m as f64 * cfg.val_fraction).round() as usize).clamp(1, m - 1);
    let split_at = m - val_count;
    let mut val_indices: Vec<usize> = order[split_at..].to_vec();
    val_indices.sort_unstable();
    let train_indices = &order[..split_at];

    let train_set = source.subset("train", train_indices)?;
    let val_set = source.subset("validation", &val_indices)?;

    let mut trainer = Trainer::new(source.dim, cfg)?;
    let mut history: Vec<f64> = Vec::new();
    let mut best_risk = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params = trainer.params().clone();
    let mut epochs_since_improvement = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 1..=cfg.max_epochs {
        trainer.epoch(&train_set, target)?;
        epochs_run = epoch;
        let val_risk = risk(trainer.params(), &val_set)?;
        history.push(val_risk);
        if val_risk < best_risk {
            best_risk = val_risk;
            best_epoch = epoch;
            best_params = trainer.params().clone();
            epochs_since_improvement = 0;
        } else {
            if val_risk == best_risk {
                // Ties refresh the snapshot but not the patience counter.
                best_epoch = epoch;
                best_params = trainer.params().clone();
            }
            epochs_since_improvement += 1;
            if epochs_since_improvement >= cfg.patience {
                break;
            }
        }
    }

    Ok((
        best_params,
        TrainReport {
            epochs_run,
            best_epoch,
            best_val_risk: best_risk,
            val_risk_history: history,
            val_indices,
        },
    ))
}

/// On-disk model: flat row-major weight arrays plus the config and report
/// that produced them. JSON round-trips are bit-exact for finite values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub n: usize,
    pub l: usize,
    #[serde(rename = "W")]
    pub hidden_weights: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "V")]
    pub output_weights: Vec<f64>,
    pub c: Vec<f64>,
    pub w: Vec<f64>,
    pub d: f64,
    pub config: TrainConfig,
    pub report: TrainReport,
}

impl ModelDocument {
    pub fn from_parts(params: &DannParams, cfg: &TrainConfig, report: &TrainReport) -> Self {
        ModelDocument {
            n: params.input_dim(),
            l: params.hidden_size(),
            hidden_weights: params.hidden_weights.as_slice().to_vec(),
            b: params.hidden_bias.as_slice().to_vec(),
            output_weights: params.output_weights.as_slice().to_vec(),
            c: params.output_bias.as_slice().to_vec(),
            w: params.w_as_vec(),
            d: params.domain_bias,
            config: cfg.clone(),
            report: report.clone(),
        }
    }

    pub fn to_params(&self) -> Result<DannParams> {
        Ok(DannParams {
            hidden_weights: DenseMat::from_vec(self.l, self.n, self.hidden_weights.clone())?,
            hidden_bias: DenseVec::new(self.b.clone())?,
            output_weights: DenseMat::from_vec(2, self.l, self.output_weights.clone())?,
            output_bias: DenseVec::new(self.c.clone())?,
            domain_weights: DenseVec::new(self.w.clone())?,
            domain_bias: self.d,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        // Shape sanity before anything downstream trusts the arrays.
        if doc.hidden_weights.len() != doc.l * doc.n
            || doc.b.len() != doc.l
            || doc.output_weights.len() != 2 * doc.l
            || doc.c.len() != 2
            || doc.w.len() != doc.l
        {
            return Err(Error::Data(format!(
                "model file {} has inconsistent shapes",
                path.display()
            )));
        }
        Ok(doc)
    }
}

impl DannParams {
    fn w_as_vec(&self) -> Vec<f64> {
        self.domain_weights.as_slice().to_vec()
    }
}
