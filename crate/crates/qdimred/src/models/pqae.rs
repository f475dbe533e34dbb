//! The kernel-PCA-embedded autoencoder: a classical encoder feeds the
//! quantum feature map, batchwise quantum kernels go through KPCA, and a
//! classical decoder reconstructs the input. After training, the encoder
//! alone serves as a qubit-encoding front end for the classifier.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::{kpca_project, quantum_kernel_matrix};
use crate::nn::{
    finite_diff_grad, stack_backward, stack_forward, LayerStack, OptimizerState, StackGradients,
};
use crate::qsim::FeatureMapSpec;

/// Step for the finite-difference bridge through the kernel+KPCA block; the
/// map runs through an eigendecomposition, so a coarser step than the
/// Jacobian default guards against eigensolver noise.
pub const KERNEL_BRIDGE_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct PqaeModel {
    pub encoder: LayerStack,
    pub decoder: LayerStack,
    pub feature_map: FeatureMapSpec,
    /// Retained principal components per batch.
    pub n_d: usize,
    /// Nominal training batch size M.
    pub batch_size: usize,
    pub kpca_center: bool,
}

impl PqaeModel {
    pub fn new(
        encoder: LayerStack,
        decoder: LayerStack,
        feature_map: FeatureMapSpec,
        n_d: usize,
        batch_size: usize,
        kpca_center: bool,
    ) -> Result<Self> {
        let n_q = feature_map.n_qubits;
        let n = encoder.in_dim();
        if encoder.out_dim() != n_q {
            return Err(Error::DimensionMismatch(format!(
                "encoder output {} must equal the qubit count {n_q}",
                encoder.out_dim()
            )));
        }
        if decoder.in_dim() != n_d {
            return Err(Error::DimensionMismatch(format!(
                "decoder input {} must equal n_d = {n_d}",
                decoder.in_dim()
            )));
        }
        if decoder.out_dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "decoder output {} must equal the data width {n}",
                decoder.out_dim()
            )));
        }
        if n_d < n_q || n_d > n {
            return Err(Error::Config(format!(
                "constraint n_q <= n_d <= N violated: n_q={n_q}, n_d={n_d}, N={n}"
            )));
        }
        if n_d > batch_size {
            return Err(Error::Config(format!(
                "constraint n_d <= M violated: n_d={n_d}, M={batch_size}"
            )));
        }
        if batch_size < 2 {
            return Err(Error::Config("KPCA needs batches of at least 2 samples".into()));
        }
        Ok(Self { encoder, decoder, feature_map, n_d, batch_size, kpca_center })
    }

    /// The trained qubit-encoding black box: encoder output only.
    pub fn encode(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (z, _) = stack_forward(&self.encoder, x)?;
        Ok(z)
    }

    /// Encode every row of a matrix.
    pub fn encode_rows(&self, xs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n_q = self.feature_map.n_qubits;
        let mut out = DMatrix::zeros(xs.nrows(), n_q);
        for i in 0..xs.nrows() {
            let x = DVector::from_iterator(xs.ncols(), xs.row(i).iter().copied());
            let z = self.encode(&x)?;
            for c in 0..n_q {
                out[(i, c)] = z[c];
            }
        }
        Ok(out)
    }

    pub fn param_len(&self) -> usize {
        self.encoder.param_len() + self.decoder.param_len()
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_len());
        self.encoder.flatten_params(&mut out);
        self.decoder.flatten_params(&mut out);
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.param_len(),
                flat.len()
            )));
        }
        let split = self.encoder.param_len();
        self.encoder.set_params(&flat[..split])?;
        self.decoder.set_params(&flat[split..])
    }
}

/// The composite quantum block: encoded batch rows -> kernel -> KPCA ->
/// per-sample projections, flattened row-major. This is the black box the
/// finite-difference bridge differentiates.
pub fn kernel_block(
    z_flat: &[f64],
    rows: usize,
    spec: &FeatureMapSpec,
    n_d: usize,
    center: bool,
) -> Result<Vec<f64>> {
    let n_q = spec.n_qubits;
    if z_flat.len() != rows * n_q {
        return Err(Error::DimensionMismatch(format!(
            "expected {rows}x{n_q} encoded values, got {}",
            z_flat.len()
        )));
    }
    let z = DMatrix::from_fn(rows, n_q, |r, c| z_flat[r * n_q + c]);
    let kernel = quantum_kernel_matrix(&z, spec)
        .map_err(|e| Error::Divergence(format!("kernel invariant violation: {e}")))?;
    let proj = kpca_project(&kernel, n_d, center)?;
    let mut out = Vec::with_capacity(rows * n_d);
    for r in 0..rows {
        for c in 0..n_d {
            out.push(proj.projections[(r, c)]);
        }
    }
    Ok(out)
}

/// Loss and flattened gradients for one batch: decoder gradients by
/// backprop; encoder gradients chained through the finite-difference
/// Jacobian of the kernel+KPCA block over the whole encoded batch.
pub fn pqae_batch_loss_and_grads(
    model: &PqaeModel,
    batch: &DMatrix<f64>,
) -> Result<(f64, Vec<f64>)> {
    let mb = batch.nrows();
    let width = batch.ncols();
    let n_q = model.feature_map.n_qubits;
    let n_d = model.n_d;
    if mb < 2 {
        return Err(Error::InvalidArgument("KPCA batch needs at least 2 samples".into()));
    }
    if width != model.encoder.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "batch width {width} vs model input {}",
            model.encoder.in_dim()
        )));
    }

    // Encode every sample, keeping caches for backprop.
    let mut enc_caches = Vec::with_capacity(mb);
    let mut z_flat = Vec::with_capacity(mb * n_q);
    for i in 0..mb {
        let x = DVector::from_iterator(width, batch.row(i).iter().copied());
        let (z, cache) = stack_forward(&model.encoder, &x)?;
        enc_caches.push(cache);
        z_flat.extend(z.iter());
    }

    let spec = model.feature_map;
    let center = model.kpca_center;
    let block = |flat: &[f64]| kernel_block(flat, mb, &spec, n_d, center);

    // Forward through the quantum block and decoder.
    let projections = block(&z_flat)?;
    let scale = 2.0 / (mb * width) as f64;
    let mut dec_grads = StackGradients::zeros_like(&model.decoder);
    let mut g_proj = vec![0.0; mb * n_d];
    let mut loss = 0.0;
    for i in 0..mb {
        let p = DVector::from_column_slice(&projections[i * n_d..(i + 1) * n_d]);
        let (x_hat, cache) = stack_forward(&model.decoder, &p)?;
        let x = DVector::from_iterator(width, batch.row(i).iter().copied());
        let diff = &x_hat - &x;
        loss += diff.iter().map(|d| d * d).sum::<f64>();
        let upstream = &diff * scale;
        let (dg, gp) = stack_backward(&model.decoder, &cache, &upstream)?;
        dec_grads.add_assign(&dg);
        for c in 0..n_d {
            g_proj[i * n_d + c] = gp[c];
        }
    }
    loss /= (mb * width) as f64;

    // Bridge: d(projections)/d(encoded batch) by central differences over
    // the whole M x n_q input treated as one vector.
    let jac = finite_diff_grad(|flat| block(flat), &z_flat, KERNEL_BRIDGE_FD_STEP)?;
    let g_proj_v = DVector::from_column_slice(&g_proj);
    let g_z = jac.transpose() * g_proj_v;

    let mut enc_grads = StackGradients::zeros_like(&model.encoder);
    for i in 0..mb {
        let gz = DVector::from_column_slice(&g_z.as_slice()[i * n_q..(i + 1) * n_q]);
        let (eg, _) = stack_backward(&model.encoder, &enc_caches[i], &gz)?;
        enc_grads.add_assign(&eg);
    }

    let mut flat = Vec::with_capacity(model.param_len());
    enc_grads.flatten(&mut flat);
    dec_grads.flatten(&mut flat);
    Ok((loss, flat))
}

/// Split shuffled indices into batches of M, folding a trailing batch of
/// fewer than 2 n_d samples into its predecessor.
fn plan_batches(order: &[usize], m: usize, n_d: usize) -> Vec<Vec<usize>> {
    let mut batches: Vec<Vec<usize>> = order.chunks(m).map(|c| c.to_vec()).collect();
    if batches.len() > 1 {
        let last = batches.last().unwrap().len();
        if last < 2 * n_d {
            let tail = batches.pop().unwrap();
            batches.last_mut().unwrap().extend(tail);
        }
    }
    batches
}

/// One pass over the shuffled training set; returns the mean batch MSE.
pub fn pqae_train_epoch(
    model: &mut PqaeModel,
    train: &DMatrix<f64>,
    opt: &mut OptimizerState,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let n = train.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument("PQAE training needs at least 2 samples".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let batches = plan_batches(&order, model.batch_size, model.n_d);
    let mut params = model.flatten_params();
    let mut total = 0.0;
    for idx in &batches {
        let sub = DMatrix::from_fn(idx.len(), train.ncols(), |r, c| train[(idx[r], c)]);
        let (loss, grads) = pqae_batch_loss_and_grads(model, &sub)?;
        if !loss.is_finite() {
            return Err(Error::Divergence("non-finite PQAE batch loss".into()));
        }
        if opt.step(&mut params, &grads)? == crate::nn::StepOutcome::SkippedNonFinite {
            eprintln!("PQAE batch: non-finite gradient, step skipped");
        }
        model.set_params(&params)?;
        total += loss;
    }
    Ok(total / batches.len() as f64)
}

/// Run `epochs` epochs; returns per-epoch mean batch losses.
pub fn pqae_train(
    model: &mut PqaeModel,
    train: &DMatrix<f64>,
    epochs: usize,
    opt: &mut OptimizerState,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let mut history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        history.push(pqae_train_epoch(model, train, opt, rng)?);
    }
    Ok(history)
}
