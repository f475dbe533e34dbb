//! Simulated variational quantum classifier: data-encoding block, trainable
//! ansatz, modular bitstring readout, cross-entropy training with
//! parameter-shift gradients.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{cross_entropy_loss, OptimizerHyper, OptimizerKind, OptimizerState};
use crate::qsim::{
    measure_probs, real_amplitudes_state, zz_feature_map_state, AnsatzSpec, FeatureMapSpec,
    StateVector,
};

const CE_FLOOR: f64 = 1e-12;

/// Feature map + ansatz + readout rule (bitstring value mod C).
#[derive(Debug, Clone)]
pub struct VqcModel {
    pub feature_map: FeatureMapSpec,
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub n_classes: usize,
}

impl VqcModel {
    /// Initial angles are uniform in [-pi, pi].
    pub fn new(
        feature_map: FeatureMapSpec,
        ansatz: AnsatzSpec,
        n_classes: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if feature_map.n_qubits != ansatz.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "feature map on {} qubits, ansatz on {}",
                feature_map.n_qubits, ansatz.n_qubits
            )));
        }
        if n_classes < 2 {
            return Err(Error::InvalidArgument("classifier needs at least 2 classes".into()));
        }
        let theta = (0..ansatz.n_params())
            .map(|_| rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI))
            .collect();
        Ok(Self { feature_map, ansatz, theta, n_classes })
    }

    fn aggregate(&self, probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for (k, p) in probs.iter().enumerate() {
            out[k % self.n_classes] += p;
        }
        out
    }

    fn class_probs_from_encoded(&self, encoded: &StateVector, theta: &[f64]) -> Result<Vec<f64>> {
        let out = real_amplitudes_state(encoded, theta, &self.ansatz)?;
        Ok(self.aggregate(&measure_probs(&out)))
    }

    /// Class probabilities for one sample of encoded angles.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let state = zz_feature_map_state(x, &self.feature_map)?;
        self.class_probs_from_encoded(&state, &self.theta)
    }

    /// Argmax prediction, ties broken toward the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let probs = self.forward(x)?;
        let mut best = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Fraction of argmax-correct predictions.
pub fn vqc_evaluate(model: &VqcModel, xs: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if xs.nrows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows vs {} labels",
            xs.nrows(),
            labels.len()
        )));
    }
    let mut correct = 0usize;
    for (i, &label) in labels.iter().enumerate() {
        let row: Vec<f64> = xs.row(i).iter().copied().collect();
        if model.predict(&row)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}

/// Cross-entropy over the batch plus its exact gradient in theta.
///
/// Class probabilities are expectations of basis-state projectors, so the
/// parameter-shift rule gives exact dp/dtheta from two shifted evaluations
/// per parameter; the chain rule through -log(p + eps) does the rest. The
/// data-encoding states do not depend on theta and are prepared once.
pub fn vqc_loss_and_grad(
    model: &VqcModel,
    xs: &DMatrix<f64>,
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    let n = xs.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty training batch".into()));
    }
    if n != labels.len() {
        return Err(Error::DimensionMismatch(format!("{n} rows vs {} labels", labels.len())));
    }
    let encoded: Vec<StateVector> = (0..n)
        .map(|i| {
            let row: Vec<f64> = xs.row(i).iter().copied().collect();
            zz_feature_map_state(&row, &model.feature_map)
        })
        .collect::<Result<_>>()?;

    let mut prob_rows = DMatrix::zeros(n, model.n_classes);
    let mut p_label = vec![0.0; n];
    for i in 0..n {
        let probs = model.class_probs_from_encoded(&encoded[i], &model.theta)?;
        if labels[i] >= model.n_classes {
            return Err(Error::InvalidArgument(format!(
                "label {} out of range for {} classes",
                labels[i], model.n_classes
            )));
        }
        p_label[i] = probs[labels[i]];
        for c in 0..model.n_classes {
            prob_rows[(i, c)] = probs[c];
        }
    }
    let loss = cross_entropy_loss(&prob_rows, labels)?;

    let n_params = model.theta.len();
    let mut grad = vec![0.0; n_params];
    let mut shifted = model.theta.clone();
    for k in 0..n_params {
        let base = model.theta[k];
        let mut acc = 0.0;
        shifted[k] = base + std::f64::consts::FRAC_PI_2;
        let mut plus = Vec::with_capacity(n);
        for enc in &encoded {
            plus.push(model.class_probs_from_encoded(enc, &shifted)?);
        }
        shifted[k] = base - std::f64::consts::FRAC_PI_2;
        for (i, enc) in encoded.iter().enumerate() {
            let minus = model.class_probs_from_encoded(enc, &shifted)?;
            let dp = (plus[i][labels[i]] - minus[labels[i]]) / 2.0;
            acc -= dp / (p_label[i] + CE_FLOOR);
        }
        shifted[k] = base;
        grad[k] = acc / n as f64;
    }
    Ok((loss, grad))
}

/// Training knobs; the studied setup is 100 epochs of full-batch adam.
#[derive(Debug, Clone, Copy)]
pub struct VqcTrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for VqcTrainOptions {
    fn default() -> Self {
        Self { epochs: 100, learning_rate: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VqcEpoch {
    pub train_loss: f64,
    pub test_accuracy: f64,
}

/// Full-batch cross-entropy descent with parameter-shift gradients; records
/// per-epoch loss and test accuracy.
pub fn vqc_train(
    model: &mut VqcModel,
    train_x: &DMatrix<f64>,
    train_y: &[usize],
    test_x: &DMatrix<f64>,
    test_y: &[usize],
    opts: &VqcTrainOptions,
) -> Result<Vec<VqcEpoch>> {
    let mut opt = OptimizerState::new(
        OptimizerKind::Adam,
        OptimizerHyper::with_learning_rate(opts.learning_rate),
        model.theta.len(),
    );
    let mut history = Vec::with_capacity(opts.epochs);
    for epoch in 0..opts.epochs {
        let (loss, grad) = vqc_loss_and_grad(model, train_x, train_y)?;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("non-finite VQC loss at epoch {epoch}")));
        }
        let mut theta = model.theta.clone();
        opt.step(&mut theta, &grad)?;
        model.theta = theta;
        let test_accuracy = vqc_evaluate(model, test_x, test_y)?;
        history.push(VqcEpoch { train_loss: loss, test_accuracy });
    }
    Ok(history)
}
