//! Linear SVM trained by projected subgradient descent on the
//! L2-regularized hinge loss (Pegasos-style).
//!
//! The regularization strength is `1/(C*m)` so larger `C` means a softer
//! margin, matching the usual C-parametrized formulation. Weights start at
//! zero and the only randomness is the per-epoch example order, which makes
//! the learner exactly antisymmetric under a global label flip: retraining
//! on flipped labels negates the decision function and reproduces the same
//! error rates. The domain-discrimination machinery relies on that symmetry.

use serde::{Deserialize, Serialize};

use crate::data::LabeledSet;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{DenseVec, SparseVec};

/// Trained linear separator.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: DenseVec,
    pub bias: f64,
    pub c_param: f64,
}

/// Default number of passes over the data.
pub const DEFAULT_EPOCHS: usize = 50;

/// Trains on `{0,1}` labels (mapped internally to `{-1,+1}`).
pub fn train(data: &LabeledSet, c: f64, epochs: usize, seed: u64) -> Result<SvmModel> {
    if data.is_empty() {
        return Err(Error::EmptyInput { what: "svm training data" });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArg(format!("C must be > 0, got {c}")));
    }
    if epochs == 0 {
        return Err(Error::InvalidArg("epochs must be >= 1".into()));
    }

    let m = data.len();
    let lambda_reg = 1.0 / (c * m as f64);
    let radius = 1.0 / lambda_reg.sqrt();

    let mut w = DenseVec::zeros(data.dim);
    let mut bias = 0.0f64;
    let mut rng = Rng::new(seed);
    let mut order: Vec<usize> = (0..m).collect();
    let mut t: u64 = 0;

    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1;
            let (x, y01) = &data.examples[i];
            let y = if *y01 == 1 { 1.0 } else { -1.0 };
            let eta = 1.0 / (lambda_reg * t as f64);
            let margin = y * (x.dot_dense(&w)? + bias);

            // Shrink from the regularizer; at t = 1 this zeroes w, which is
            // the standard Pegasos first step.
            w.scale(1.0 - eta * lambda_reg);
            if margin < 1.0 {
                for &(j, v) in x.entries() {
                    let cur = w.get(j);
                    w.set(j, cur + eta * y * v);
                }
                bias += eta * y;
            }

            // Project onto the ball that contains the optimum.
            let norm = w.norm();
            if norm > radius {
                w.scale(radius / norm);
            }
        }
    }

    Ok(SvmModel { weights: w, bias, c_param: c })
}

/// Signed decision value `w . x + bias`.
pub fn decision(model: &SvmModel, x: &SparseVec) -> Result<f64> {
    Ok(x.dot_dense(&model.weights)? + model.bias)
}

/// Predicted label; zero margin maps to label 1.
pub fn predict(model: &SvmModel, x: &SparseVec) -> Result<u8> {
    Ok(if decision(model, x)? >= 0.0 { 1 } else { 0 })
}

/// Misclassified fraction on a labeled set.
pub fn error_rate(model: &SvmModel, data: &LabeledSet) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput { what: "svm evaluation data" });
    }
    let mut wrong = 0usize;
    for (x, y) in &data.examples {
        if predict(model, x)? != *y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / data.len() as f64)
}

/// Primal objective: `lambda_reg/2 ||w||^2 + mean hinge`.
pub fn objective(model: &SvmModel, data: &LabeledSet) -> Result<f64> {
    let m = data.len() as f64;
    let lambda_reg = 1.0 / (model.c_param * m);
    let mut hinge = 0.0;
    for (x, y01) in &data.examples {
        let y = if *y01 == 1 { 1.0 } else { -1.0 };
        hinge += (1.0 - y * decision(model, x)?).max(0.0);
    }
    Ok(0.5 * lambda_reg * model.weights.dot(&model.weights)? + hinge / m)
}

/// On-disk form: `{n, weights, bias, C}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmDocument {
    pub n: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    #[serde(rename = "C")]
    pub c_param: f64,
}

impl SvmDocument {
    pub fn from_model(model: &SvmModel) -> Self {
        SvmDocument {
            n: model.weights.len(),
            weights: model.weights.as_slice().to_vec(),
            bias: model.bias,
            c_param: model.c_param,
        }
    }

    pub fn to_model(&self) -> Result<SvmModel> {
        if self.weights.len() != self.n {
            return Err(Error::Data("svm document weight length mismatch".into()));
        }
        Ok(SvmModel {
            weights: DenseVec::new(self.weights.clone())?,
            bias: self.bias,
            c_param: self.c_param,
        })
    }
}
