//! Classical linear layers, losses, optimizers and the gradient bridges
//! (analytic backprop, central finite differences, parameter shift) that
//! connect classical weights to the quantum blocks.
//!
//! All layers are strictly linear: no activation functions anywhere.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One affine map y = W x + b.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayer {
    /// out_dim x in_dim.
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl LinearLayer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::DimensionMismatch(format!(
                "bias length {} does not match weight rows {}",
                bias.len(),
                weights.nrows()
            )));
        }
        Ok(Self { weights, bias })
    }

    /// Uniform init in [-1/sqrt(in_dim), 1/sqrt(in_dim)] for weights and bias.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights =
            DMatrix::from_fn(out_dim, in_dim, |_, _| rng.gen_range(-bound..=bound));
        let bias = DVector::from_fn(out_dim, |_, _| rng.gen_range(-bound..=bound));
        Self { weights, bias }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.weights * x + &self.bias
    }
}

/// An ordered chain of linear layers with matching widths.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<LinearLayer>,
}

impl LayerStack {
    pub fn new(layers: Vec<LinearLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("layer stack cannot be empty".into()));
        }
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "layer output width {} feeds layer input width {}",
                    w[0].out_dim(),
                    w[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Build a seeded stack from a width chain like [N, 32, 4].
    pub fn init(widths: &[usize], rng: &mut impl Rng) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidArgument(
                "width chain needs at least input and output".into(),
            ));
        }
        let layers = widths
            .windows(2)
            .map(|w| LinearLayer::init(w[0], w[1], rng))
            .collect();
        Self::new(layers)
    }

    /// Rebuild a stack from its width chain and flat parameter vector
    /// (checkpoint loading).
    pub fn from_flat(widths: &[usize], flat: &[f64]) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidArgument(
                "width chain needs at least input and output".into(),
            ));
        }
        let layers = widths
            .windows(2)
            .map(|w| LinearLayer::new(DMatrix::zeros(w[1], w[0]), DVector::zeros(w[1])))
            .collect::<Result<Vec<_>>>()?;
        let mut stack = Self::new(layers)?;
        stack.set_params(flat)?;
        Ok(stack)
    }

    pub fn layers(&self) -> &[LinearLayer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Width chain including input and every layer output.
    pub fn widths(&self) -> Vec<usize> {
        let mut v = vec![self.in_dim()];
        v.extend(self.layers.iter().map(|l| l.out_dim()));
        v
    }

    /// Total number of scalar parameters.
    pub fn param_len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Flatten parameters: per layer, weights in row-major order then bias.
    pub fn flatten_params(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            for r in 0..l.out_dim() {
                for c in 0..l.in_dim() {
                    out.push(l.weights[(r, c)]);
                }
            }
            out.extend(l.bias.iter());
        }
    }

    /// Inverse of [`flatten_params`]; consumes exactly `param_len` values.
    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.param_len(),
                flat.len()
            )));
        }
        let mut it = flat.iter();
        for l in &mut self.layers {
            for r in 0..l.weights.nrows() {
                for c in 0..l.weights.ncols() {
                    l.weights[(r, c)] = *it.next().unwrap();
                }
            }
            for r in 0..l.bias.len() {
                l.bias[r] = *it.next().unwrap();
            }
        }
        Ok(())
    }
}

/// Per-layer inputs recorded by a forward pass, consumed by backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// inputs[l] is the input vector to layer l.
    inputs: Vec<DVector<f64>>,
}

/// y = W_L (... (W_1 x + b_1) ...) + b_L, with cached per-layer inputs.
pub fn stack_forward(stack: &LayerStack, x: &DVector<f64>) -> Result<(DVector<f64>, ForwardCache)> {
    if x.len() != stack.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "stack expects input width {}, got {}",
            stack.in_dim(),
            x.len()
        )));
    }
    let mut inputs = Vec::with_capacity(stack.layers.len());
    let mut cur = x.clone();
    for layer in &stack.layers {
        inputs.push(cur.clone());
        cur = layer.forward(&cur);
    }
    Ok((cur, ForwardCache { inputs }))
}

/// Per-layer parameter gradients, shaped like the stack itself.
#[derive(Debug, Clone)]
pub struct StackGradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl StackGradients {
    pub fn zeros_like(stack: &LayerStack) -> Self {
        Self {
            weights: stack
                .layers
                .iter()
                .map(|l| DMatrix::zeros(l.out_dim(), l.in_dim()))
                .collect(),
            biases: stack.layers.iter().map(|l| DVector::zeros(l.out_dim())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &StackGradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    /// Same flat layout as [`LayerStack::flatten_params`].
    pub fn flatten(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for r in 0..w.nrows() {
                for c in 0..w.ncols() {
                    out.push(w[(r, c)]);
                }
            }
            out.extend(b.iter());
        }
    }
}

/// Exact reverse-mode gradients for the linear chain: for each layer,
/// dW = g x^T, db = g, dx = W^T g.
pub fn stack_backward(
    stack: &LayerStack,
    cache: &ForwardCache,
    upstream: &DVector<f64>,
) -> Result<(StackGradients, DVector<f64>)> {
    if cache.inputs.len() != stack.layers.len() {
        return Err(Error::InvalidArgument(
            "forward cache does not match this stack".into(),
        ));
    }
    if upstream.len() != stack.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "upstream gradient width {} vs stack output {}",
            upstream.len(),
            stack.out_dim()
        )));
    }
    let mut grads = StackGradients::zeros_like(stack);
    let mut g = upstream.clone();
    for li in (0..stack.layers.len()).rev() {
        let x = &cache.inputs[li];
        if x.len() != stack.layers[li].in_dim() {
            return Err(Error::InvalidArgument(
                "forward cache does not match this stack".into(),
            ));
        }
        grads.weights[li] = &g * x.transpose();
        grads.biases[li] = g.clone();
        g = stack.layers[li].weights.transpose() * g;
    }
    Ok((grads, g))
}

/// Mean over all n*N entries of the squared difference, plus d/d(x_hat).
pub fn mse_loss(x: &DMatrix<f64>, x_hat: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    if x.shape() != x_hat.shape() {
        return Err(Error::DimensionMismatch(format!(
            "MSE shapes {:?} vs {:?}",
            x.shape(),
            x_hat.shape()
        )));
    }
    let count = (x.nrows() * x.ncols()) as f64;
    let diff = x_hat - x;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / count;
    let grad = diff * (2.0 / count);
    Ok((loss, grad))
}

const CE_FLOOR: f64 = 1e-12;

/// -(1/n) sum_i log(probs[i][label_i] + 1e-12). Rows must sum to 1.
pub fn cross_entropy_loss(probs: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if probs.nrows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probability rows vs {} labels",
            probs.nrows(),
            labels.len()
        )));
    }
    let classes = probs.ncols();
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        let row_sum: f64 = probs.row(i).sum();
        if (row_sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "probability row {i} sums to {row_sum}, not 1"
            )));
        }
        total -= (probs[(i, label)] + CE_FLOOR).ln();
    }
    Ok(total / labels.len() as f64)
}

/// Which first-order update rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    RmsProp,
}

/// Optimizer hyperparameters with the usual defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerHyper {
    pub learning_rate: f64,
    /// First-moment decay (adam only).
    pub beta1: f64,
    /// Second-moment decay (adam only).
    pub beta2: f64,
    /// Squared-gradient decay (rmsprop only).
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for OptimizerHyper {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            alpha: 0.99,
            epsilon: 1e-8,
        }
    }
}

impl OptimizerHyper {
    pub fn with_learning_rate(lr: f64) -> Self {
        Self { learning_rate: lr, ..Self::default() }
    }
}

/// What a step did; non-finite gradients skip the update instead of
/// poisoning a long run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    SkippedNonFinite,
}

/// Moment accumulators over one flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub hyper: OptimizerHyper,
    pub step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, hyper: OptimizerHyper, n_params: usize) -> Self {
        Self {
            kind,
            hyper,
            step_count: 0,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
        }
    }

    /// One ADAM (bias-corrected) or RMSprop update in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<StepOutcome> {
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::DimensionMismatch(format!(
                "optimizer holds {} accumulators, got {} params / {} grads",
                self.first_moment.len(),
                params.len(),
                grads.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Ok(StepOutcome::SkippedNonFinite);
        }
        self.step_count += 1;
        let h = self.hyper;
        match self.kind {
            OptimizerKind::Adam => {
                let bc1 = 1.0 - h.beta1.powi(self.step_count as i32);
                let bc2 = 1.0 - h.beta2.powi(self.step_count as i32);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.first_moment[i] = h.beta1 * self.first_moment[i] + (1.0 - h.beta1) * g;
                    self.second_moment[i] =
                        h.beta2 * self.second_moment[i] + (1.0 - h.beta2) * g * g;
                    let m_hat = self.first_moment[i] / bc1;
                    let v_hat = self.second_moment[i] / bc2;
                    params[i] -= h.learning_rate * m_hat / (v_hat.sqrt() + h.epsilon);
                }
            }
            OptimizerKind::RmsProp => {
                for i in 0..params.len() {
                    let g = grads[i];
                    self.second_moment[i] =
                        h.alpha * self.second_moment[i] + (1.0 - h.alpha) * g * g;
                    params[i] -= h.learning_rate * g / (self.second_moment[i].sqrt() + h.epsilon);
                }
            }
        }
        Ok(StepOutcome::Applied)
    }
}

/// Central-difference Jacobian of a vector-valued black box, one column per
/// input coordinate. The default step for the kernel+KPCA bridge is 1e-4.
pub fn finite_diff_grad<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut work = x.to_vec();
    let mut jac: Option<DMatrix<f64>> = None;
    for j in 0..x.len() {
        work[j] = x[j] + h;
        let plus = f(&work)?;
        work[j] = x[j] - h;
        let minus = f(&work)?;
        work[j] = x[j];
        if plus.len() != minus.len() {
            return Err(Error::DimensionMismatch(
                "black box output length changed between calls".into(),
            ));
        }
        let m = jac.get_or_insert_with(|| DMatrix::zeros(plus.len(), x.len()));
        if m.nrows() != plus.len() {
            return Err(Error::DimensionMismatch(
                "black box output length changed between calls".into(),
            ));
        }
        for r in 0..plus.len() {
            let v = (plus[r] - minus[r]) / (2.0 * h);
            if !v.is_finite() {
                return Err(Error::Numerical(
                    "non-finite value in finite-difference Jacobian".into(),
                ));
            }
            m[(r, j)] = v;
        }
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// Parameter-shift gradient of an expectation-valued function of rotation
/// angles: df/dtheta_k = [f(theta_k + pi/2) - f(theta_k - pi/2)] / 2.
pub fn parameter_shift_grad<F>(f: F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let shift = std::f64::consts::FRAC_PI_2;
    let mut work = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        work[k] = theta[k] + shift;
        let plus = f(&work)?;
        work[k] = theta[k] - shift;
        let minus = f(&work)?;
        work[k] = theta[k];
        grad.push((plus - minus) / 2.0);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_stack_passes_input_through() {
        let layer = LinearLayer::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let stack = LayerStack::new(vec![layer]).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let (y, _) = stack_forward(&stack, &x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn zero_weights_output_bias() {
        let bias = DVector::from_vec(vec![0.3, -0.7]);
        let layer = LinearLayer::new(DMatrix::zeros(2, 3), bias.clone()).unwrap();
        let stack = LayerStack::new(vec![layer]).unwrap();
        let (y, _) = stack_forward(&stack, &DVector::from_vec(vec![9.0, 9.0, 9.0])).unwrap();
        assert_eq!(y, bias);
    }

    #[test]
    fn stack_width_chain_enforced() {
        let a = LinearLayer::new(DMatrix::zeros(3, 2), DVector::zeros(3)).unwrap();
        let b = LinearLayer::new(DMatrix::zeros(2, 4), DVector::zeros(2)).unwrap();
        assert!(LayerStack::new(vec![a, b]).is_err());
    }

    #[test]
    fn single_layer_backward_formulas() {
        let w = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let layer = LinearLayer::new(w.clone(), DVector::zeros(2)).unwrap();
        let stack = LayerStack::new(vec![layer]).unwrap();
        let x = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let (_, cache) = stack_forward(&stack, &x).unwrap();
        let g = DVector::from_vec(vec![1.0, -0.5]);
        let (grads, dx) = stack_backward(&stack, &cache, &g).unwrap();
        assert_eq!(grads.weights[0], &g * x.transpose());
        assert_eq!(grads.biases[0], g);
        assert_eq!(dx, w.transpose() * g);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stack = LayerStack::init(&[4, 3, 2], &mut rng).unwrap();
        let (_, cache) = stack_forward(&stack, &DVector::from_vec(vec![1.0; 4])).unwrap();
        let (grads, dx) = stack_backward(&stack, &cache, &DVector::zeros(2)).unwrap();
        assert!(dx.abs().max() == 0.0);
        for w in grads.weights {
            assert!(w.abs().max() == 0.0);
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = LayerStack::init(&[4, 3], &mut rng).unwrap();
        let b = LayerStack::init(&[4, 4, 3], &mut rng).unwrap();
        let (_, cache) = stack_forward(&a, &DVector::from_vec(vec![1.0; 4])).unwrap();
        assert!(stack_backward(&b, &cache, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn mse_cases() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let (l, _) = mse_loss(&x, &x).unwrap();
        assert_eq!(l, 0.0);
        let x_hat = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let (l, g) = mse_loss(&x, &x_hat).unwrap();
        assert!(close(l, 0.5, 1e-15));
        assert!(close(g[(0, 0)], -1.0, 1e-15));
        assert!(mse_loss(&x, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn cross_entropy_cases() {
        let onehot = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let l = cross_entropy_loss(&onehot, &[0, 1]).unwrap();
        assert!(l <= 1e-9);
        let uniform = DMatrix::from_element(4, 3, 1.0 / 3.0);
        let l = cross_entropy_loss(&uniform, &[0, 1, 2, 0]).unwrap();
        assert!(close(l, 3.0f64.ln(), 1e-10));
        assert!(cross_entropy_loss(&uniform, &[3, 0, 0, 0]).is_err());
    }

    #[test]
    fn adam_first_step_magnitude() {
        // Fresh state, scalar g = 1: m_hat = v_hat = 1, step = lr / (1 + eps).
        let mut st = OptimizerState::new(OptimizerKind::Adam, OptimizerHyper::default(), 1);
        let mut p = vec![0.0];
        st.step(&mut p, &[1.0]).unwrap();
        assert!(close(p[0], -1e-3 / (1.0 + 1e-8), 1e-12));
    }

    #[test]
    fn zero_gradient_keeps_params() {
        for kind in [OptimizerKind::Adam, OptimizerKind::RmsProp] {
            let mut st = OptimizerState::new(kind, OptimizerHyper::default(), 2);
            let mut p = vec![1.5, -2.5];
            st.step(&mut p, &[0.0, 0.0]).unwrap();
            assert_eq!(p, vec![1.5, -2.5]);
        }
    }

    #[test]
    fn nonfinite_gradient_skips_step() {
        let mut st = OptimizerState::new(OptimizerKind::Adam, OptimizerHyper::default(), 1);
        let mut p = vec![1.0];
        let out = st.step(&mut p, &[f64::NAN]).unwrap();
        assert_eq!(out, StepOutcome::SkippedNonFinite);
        assert_eq!(p, vec![1.0]);
        assert_eq!(st.step_count, 0);
    }

    #[test]
    fn both_optimizers_minimize_quadratic() {
        for kind in [OptimizerKind::Adam, OptimizerKind::RmsProp] {
            let mut st = OptimizerState::new(kind, OptimizerHyper::default(), 1);
            let mut w = vec![1.0];
            for _ in 0..5000 {
                let g = [2.0 * w[0]];
                st.step(&mut w, &g).unwrap();
            }
            assert!(w[0].abs() < 1e-3, "{kind:?} stalled at {}", w[0]);
        }
    }

    #[test]
    fn finite_diff_on_square() {
        let j = finite_diff_grad(|x| Ok(vec![x[0] * x[0]]), &[3.0], 1e-4).unwrap();
        assert!(close(j[(0, 0)], 6.0, 1e-6));
    }

    #[test]
    fn finite_diff_linear_is_exact() {
        let j = finite_diff_grad(|x| Ok(vec![2.0 * x[0] - 3.0 * x[1]]), &[0.4, -1.2], 1e-4)
            .unwrap();
        assert!(close(j[(0, 0)], 2.0, 1e-10));
        assert!(close(j[(0, 1)], -3.0, 1e-10));
    }

    #[test]
    fn finite_diff_matches_backprop_input_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let stack = LayerStack::init(&[3, 5, 2], &mut rng).unwrap();
        let x = vec![0.3, -0.8, 1.1];
        let j = finite_diff_grad(
            |v| {
                let (y, _) = stack_forward(&stack, &DVector::from_column_slice(v))?;
                Ok(y.iter().copied().collect())
            },
            &x,
            1e-4,
        )
        .unwrap();
        // dx for upstream e_r equals row r of the Jacobian
        let (_, cache) = stack_forward(&stack, &DVector::from_column_slice(&x)).unwrap();
        for r in 0..2 {
            let mut e = DVector::zeros(2);
            e[r] = 1.0;
            let (_, dx) = stack_backward(&stack, &cache, &e).unwrap();
            for cidx in 0..3 {
                assert!(close(j[(r, cidx)], dx[cidx], 1e-6));
            }
        }
    }

    #[test]
    fn parameter_shift_sine_squared() {
        // f(t) = sin^2(t/2) = P(|1>) after RY(t)|0>; f'(pi/2) = 1/2.
        let f = |t: &[f64]| Ok((t[0] / 2.0).sin().powi(2));
        let g = parameter_shift_grad(f, &[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!(close(g[0], 0.5, 1e-12));
        // stationary point at t = pi
        let g = parameter_shift_grad(f, &[std::f64::consts::PI]).unwrap();
        assert!(g[0].abs() < 1e-10);
    }

    #[test]
    fn seeded_init_reproducible() {
        let a = LayerStack::init(&[4, 3], &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = LayerStack::init(&[4, 3], &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        let mut flat_a = Vec::new();
        a.flatten_params(&mut flat_a);
        let mut c = LayerStack::init(&[4, 3], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        c.set_params(&flat_a).unwrap();
        assert_eq!(a, c);
    }
}
