//! The autoencoder family: a linear encoder stack, an optional non-trainable
//! bottleneck map (SU(n) exponential, Bloch, or polynomial), and a linear
//! decoder stack, trained on reconstruction MSE.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{
    bloch_encode, bloch_jacobian, extract_features, gellmann_generators, su_exponential,
    su_exponential_jacobian, ExtractionMode, GeneratorBasis,
};
use crate::nn::{
    mse_loss, stack_backward, stack_forward, LayerStack, OptimizerHyper, OptimizerKind,
    OptimizerState, StackGradients,
};

/// Fixed polynomial feature maps used by the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyMap {
    /// {x1, x2} -> {x1^2, x2^2, x1 x2}
    Squares2,
    /// {x1, x2, x3} -> {x1^2, x2^2, x3^2, x1 x2 + x1 x3 + x2 x3}
    Squares3,
}

impl PolyMap {
    pub fn in_width(self) -> usize {
        match self {
            PolyMap::Squares2 => 2,
            PolyMap::Squares3 => 3,
        }
    }

    pub fn out_width(self) -> usize {
        match self {
            PolyMap::Squares2 => 3,
            PolyMap::Squares3 => 4,
        }
    }

    pub fn apply(self, x: &[f64]) -> Vec<f64> {
        match self {
            PolyMap::Squares2 => vec![x[0] * x[0], x[1] * x[1], x[0] * x[1]],
            PolyMap::Squares3 => vec![
                x[0] * x[0],
                x[1] * x[1],
                x[2] * x[2],
                x[0] * x[1] + x[0] * x[2] + x[1] * x[2],
            ],
        }
    }

    pub fn jacobian(self, x: &[f64]) -> DMatrix<f64> {
        match self {
            PolyMap::Squares2 => DMatrix::from_row_slice(
                3,
                2,
                &[2.0 * x[0], 0.0, 0.0, 2.0 * x[1], x[1], x[0]],
            ),
            PolyMap::Squares3 => DMatrix::from_row_slice(
                4,
                3,
                &[
                    2.0 * x[0],
                    0.0,
                    0.0,
                    0.0,
                    2.0 * x[1],
                    0.0,
                    0.0,
                    0.0,
                    2.0 * x[2],
                    x[1] + x[2],
                    x[0] + x[2],
                    x[0] + x[1],
                ],
            ),
        }
    }
}

/// The non-trainable map sitting between encoder and decoder.
#[derive(Debug, Clone)]
pub enum Bottleneck {
    /// Plain linear autoencoder: features are the encoder output.
    Identity,
    /// Chunks of the reduced representation parametrize SU(n) rotations;
    /// each chunk yields 2n extracted reals.
    SuMap {
        basis: GeneratorBasis,
        selection: Vec<usize>,
        mode: ExtractionMode,
        batches: usize,
    },
    /// Two angles to three Bloch components.
    Bloch,
    /// Fixed polynomial features, chunk-wise like the SU map.
    Poly { map: PolyMap, batches: usize },
}

impl Bottleneck {
    /// Builder for the SU(n) map over the full generator basis.
    pub fn su_full(n: usize, batches: usize, mode: ExtractionMode) -> Result<Self> {
        let basis = gellmann_generators(n)?;
        let selection = (0..basis.len()).collect();
        Ok(Bottleneck::SuMap { basis, selection, mode, batches })
    }

    fn chunk_in(&self) -> usize {
        match self {
            Bottleneck::Identity => 0,
            Bottleneck::SuMap { selection, .. } => selection.len(),
            Bottleneck::Bloch => 2,
            Bottleneck::Poly { map, .. } => map.in_width(),
        }
    }

    fn chunk_out(&self) -> usize {
        match self {
            Bottleneck::Identity => 0,
            Bottleneck::SuMap { basis, .. } => 2 * basis.dim(),
            Bottleneck::Bloch => 3,
            Bottleneck::Poly { map, .. } => map.out_width(),
        }
    }

    fn batches(&self) -> usize {
        match self {
            Bottleneck::Identity => 1,
            Bottleneck::SuMap { batches, .. } | Bottleneck::Poly { batches, .. } => *batches,
            Bottleneck::Bloch => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Bottleneck::Identity => "linear",
            Bottleneck::SuMap { .. } => "qae",
            Bottleneck::Bloch => "bloch_qae",
            Bottleneck::Poly { .. } => "poly",
        }
    }
}

/// Encoder -> bottleneck map -> decoder.
#[derive(Debug, Clone)]
pub struct Autoencoder {
    pub encoder: LayerStack,
    pub bottleneck: Bottleneck,
    pub decoder: LayerStack,
}

impl Autoencoder {
    pub fn new(encoder: LayerStack, bottleneck: Bottleneck, decoder: LayerStack) -> Result<Self> {
        let l = encoder.out_dim();
        let f = decoder.in_dim();
        match &bottleneck {
            Bottleneck::Identity => {
                if l != f {
                    return Err(Error::DimensionMismatch(format!(
                        "encoder output {l} must equal decoder input {f}"
                    )));
                }
            }
            _ => {
                let m = bottleneck.batches();
                if m == 0 {
                    return Err(Error::InvalidArgument("bottleneck needs batches >= 1".into()));
                }
                if l != m * bottleneck.chunk_in() {
                    return Err(Error::DimensionMismatch(format!(
                        "encoder output {l} does not split into {m} chunks of {}",
                        bottleneck.chunk_in()
                    )));
                }
                if f != m * bottleneck.chunk_out() {
                    return Err(Error::DimensionMismatch(format!(
                        "decoder input {f} does not match {m} feature blocks of {}",
                        bottleneck.chunk_out()
                    )));
                }
            }
        }
        if encoder.in_dim() != decoder.out_dim() {
            return Err(Error::DimensionMismatch(format!(
                "encoder input {} vs decoder output {}",
                encoder.in_dim(),
                decoder.out_dim()
            )));
        }
        Ok(Self { encoder, bottleneck, decoder })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    /// Reported latent dimension: the narrowest internal width, where the
    /// pre-map and post-map layers both count (so the SU(2) bottleneck sits
    /// before the map, and for n > 2 after it).
    pub fn latent_dim(&self) -> usize {
        let enc_widths = self.encoder.widths();
        let dec_widths = self.decoder.widths();
        let mut candidates: Vec<usize> = enc_widths[1..].to_vec();
        candidates.extend(&dec_widths[..dec_widths.len() - 1]);
        candidates.into_iter().min().unwrap()
    }

    fn map_features(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.bottleneck {
            Bottleneck::Identity => Ok(z.clone()),
            Bottleneck::Bloch => {
                let b = bloch_encode(z[0], z[1])?;
                Ok(DVector::from_column_slice(&b))
            }
            Bottleneck::SuMap { basis, selection, mode, batches } => {
                let l = selection.len();
                let mut out = Vec::with_capacity(batches * 2 * basis.dim());
                for b in 0..*batches {
                    let chunk: Vec<f64> = (0..l).map(|i| z[b * l + i]).collect();
                    let u = su_exponential(&chunk, basis, selection)?;
                    out.extend(extract_features(&u, *mode));
                }
                Ok(DVector::from_vec(out))
            }
            Bottleneck::Poly { map, batches } => {
                let l = map.in_width();
                let mut out = Vec::with_capacity(batches * map.out_width());
                for b in 0..*batches {
                    let chunk: Vec<f64> = (0..l).map(|i| z[b * l + i]).collect();
                    out.extend(map.apply(&chunk));
                }
                Ok(DVector::from_vec(out))
            }
        }
    }

    /// d(features)/d(z), block-diagonal over chunks.
    fn map_jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        match &self.bottleneck {
            Bottleneck::Identity => Ok(DMatrix::identity(z.len(), z.len())),
            Bottleneck::Bloch => Ok(bloch_jacobian(z[0], z[1])),
            Bottleneck::SuMap { basis, selection, mode, batches } => {
                let l = selection.len();
                let fo = 2 * basis.dim();
                let mut jac = DMatrix::zeros(batches * fo, batches * l);
                for b in 0..*batches {
                    let chunk: Vec<f64> = (0..l).map(|i| z[b * l + i]).collect();
                    let block = su_exponential_jacobian(&chunk, basis, selection, *mode)?;
                    for r in 0..fo {
                        for c in 0..l {
                            jac[(b * fo + r, b * l + c)] = block[(r, c)];
                        }
                    }
                }
                Ok(jac)
            }
            Bottleneck::Poly { map, batches } => {
                let l = map.in_width();
                let fo = map.out_width();
                let mut jac = DMatrix::zeros(batches * fo, batches * l);
                for b in 0..*batches {
                    let chunk: Vec<f64> = (0..l).map(|i| z[b * l + i]).collect();
                    let block = map.jacobian(&chunk);
                    for r in 0..fo {
                        for c in 0..l {
                            jac[(b * fo + r, b * l + c)] = block[(r, c)];
                        }
                    }
                }
                Ok(jac)
            }
        }
    }

    /// Reconstruct one sample; returns (x_hat, bottleneck features).
    pub fn forward(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let (z, _) = stack_forward(&self.encoder, x)?;
        let features = self.map_features(&z)?;
        let (x_hat, _) = stack_forward(&self.decoder, &features)?;
        Ok((x_hat, features))
    }

    /// Mean squared reconstruction error over rows of `data`.
    pub fn reconstruction_mse(&self, data: &DMatrix<f64>) -> Result<f64> {
        let mut recon = DMatrix::zeros(data.nrows(), data.ncols());
        for i in 0..data.nrows() {
            let x = DVector::from_iterator(data.ncols(), data.row(i).iter().copied());
            let (x_hat, _) = self.forward(&x)?;
            for c in 0..data.ncols() {
                recon[(i, c)] = x_hat[c];
            }
        }
        let (loss, _) = mse_loss(data, &recon)?;
        Ok(loss)
    }

    pub fn param_len(&self) -> usize {
        self.encoder.param_len() + self.decoder.param_len()
    }

    /// Flat parameter layout: encoder then decoder.
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

/// Full-batch loss and flattened gradients over the rows of `batch`:
/// decoder gradients by backprop, chained through the analytic bottleneck
/// Jacobian into the encoder.
pub fn ae_loss_and_grads(model: &Autoencoder, batch: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    let n = batch.nrows();
    let width = batch.ncols();
    if width != model.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "batch width {width} vs model input {}",
            model.input_dim()
        )));
    }
    let mut enc_grads = StackGradients::zeros_like(&model.encoder);
    let mut dec_grads = StackGradients::zeros_like(&model.decoder);
    let scale = 2.0 / (n * width) as f64;
    let mut loss = 0.0;
    for i in 0..n {
        let x = DVector::from_iterator(width, batch.row(i).iter().copied());
        let (z, enc_cache) = stack_forward(&model.encoder, &x)?;
        let features = model.map_features(&z)?;
        let (x_hat, dec_cache) = stack_forward(&model.decoder, &features)?;
        let diff = &x_hat - &x;
        loss += diff.iter().map(|d| d * d).sum::<f64>();
        let upstream = &diff * scale;
        let (dg, g_features) = stack_backward(&model.decoder, &dec_cache, &upstream)?;
        dec_grads.add_assign(&dg);
        let jac = model.map_jacobian(&z)?;
        let g_z = jac.transpose() * g_features;
        let (eg, _) = stack_backward(&model.encoder, &enc_cache, &g_z)?;
        enc_grads.add_assign(&eg);
    }
    loss /= (n * width) as f64;
    let mut flat = Vec::with_capacity(model.param_len());
    enc_grads.flatten(&mut flat);
    dec_grads.flatten(&mut flat);
    Ok((loss, flat))
}

/// Training knobs for the reconstruction loop.
#[derive(Debug, Clone, Copy)]
pub struct AeTrainOptions {
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
}

/// Per-epoch reconstruction errors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochRecord {
    pub train_mse: f64,
    pub test_mse: f64,
}

/// Full-batch training of the reconstruction MSE with one optimizer step per
/// epoch. Deterministic: all randomness lives in the caller-seeded init.
pub fn ae_train(
    model: &mut Autoencoder,
    train: &DMatrix<f64>,
    test: &DMatrix<f64>,
    opts: &AeTrainOptions,
) -> Result<Vec<EpochRecord>> {
    let mut params = model.flatten_params();
    let mut opt = OptimizerState::new(
        opts.optimizer,
        OptimizerHyper::with_learning_rate(opts.learning_rate),
        params.len(),
    );
    let mut history = Vec::with_capacity(opts.epochs);
    for epoch in 0..opts.epochs {
        let (train_mse, grads) = ae_loss_and_grads(model, train)?;
        if !train_mse.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite reconstruction loss at epoch {epoch}"
            )));
        }
        if opt.step(&mut params, &grads)? == crate::nn::StepOutcome::SkippedNonFinite {
            eprintln!("epoch {epoch}: non-finite gradient, step skipped");
        }
        model.set_params(&params)?;
        let test_mse = model.reconstruction_mse(test)?;
        history.push(EpochRecord { train_mse, test_mse });
    }
    Ok(history)
}

/// Convenience constructors mirroring the studied architectures.
impl Autoencoder {
    /// Plain linear autoencoder from a width chain (encoder) and its mirror
    /// or an explicit decoder chain.
    pub fn linear(
        enc_widths: &[usize],
        dec_widths: &[usize],
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        Self::new(
            LayerStack::init(enc_widths, rng)?,
            Bottleneck::Identity,
            LayerStack::init(dec_widths, rng)?,
        )
    }

    /// SU(n) bottleneck over the full generator basis, `batches` chunks.
    pub fn su(
        enc_widths: &[usize],
        dec_widths: &[usize],
        n: usize,
        batches: usize,
        mode: ExtractionMode,
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        Self::new(
            LayerStack::init(enc_widths, rng)?,
            Bottleneck::su_full(n, batches, mode)?,
            LayerStack::init(dec_widths, rng)?,
        )
    }

    pub fn bloch(
        enc_widths: &[usize],
        dec_widths: &[usize],
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        Self::new(LayerStack::init(enc_widths, rng)?, Bottleneck::Bloch, LayerStack::init(dec_widths, rng)?)
    }

    pub fn poly(
        enc_widths: &[usize],
        dec_widths: &[usize],
        map: PolyMap,
        batches: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        Self::new(
            LayerStack::init(enc_widths, rng)?,
            Bottleneck::Poly { map, batches },
            LayerStack::init(dec_widths, rng)?,
        )
    }
}

/// Unit-norm check used by tests and assertions: per-block feature norm of
/// first-column extraction is 1 for any input.
pub fn su_feature_block_norms(model: &Autoencoder, features: &DVector<f64>) -> Vec<f64> {
    match &model.bottleneck {
        Bottleneck::SuMap { basis, batches, .. } => {
            let fo = 2 * basis.dim();
            (0..*batches)
                .map(|b| (0..fo).map(|i| features[b * fo + i].powi(2)).sum::<f64>().sqrt())
                .collect()
        }
        Bottleneck::Bloch => vec![features.iter().map(|v| v * v).sum::<f64>().sqrt()],
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_wiring_reconstructs_exactly() {
        use crate::nn::LinearLayer;
        let id = |d: usize| LinearLayer::new(DMatrix::identity(d, d), nalgebra::DVector::zeros(d)).unwrap();
        let model = Autoencoder::new(
            LayerStack::new(vec![id(3)]).unwrap(),
            Bottleneck::Identity,
            LayerStack::new(vec![id(3)]).unwrap(),
        )
        .unwrap();
        let x = nalgebra::DVector::from_vec(vec![0.3, -0.4, 0.9]);
        let (x_hat, _) = model.forward(&x).unwrap();
        assert!((x_hat - x).abs().max() < 1e-15);
    }

    #[test]
    fn zero_decoder_outputs_bias() {
        use crate::nn::LinearLayer;
        let mut r = rng(0);
        let enc = LayerStack::init(&[3, 3], &mut r).unwrap();
        let bias = nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let dec = LayerStack::new(vec![LinearLayer::new(DMatrix::zeros(3, 3), bias.clone()).unwrap()])
            .unwrap();
        let model = Autoencoder::new(enc, Bottleneck::Identity, dec).unwrap();
        let (x_hat, _) = model.forward(&nalgebra::DVector::from_vec(vec![5.0, 5.0, 5.0])).unwrap();
        assert_eq!(x_hat, bias);
    }

    #[test]
    fn qae_zero_encoder_gives_identity_features() {
        use crate::nn::LinearLayer;
        // zero weights and bias -> each chunk z = 0 -> U = I -> block (1,0,...,0)
        let enc = LayerStack::new(vec![
            LinearLayer::new(DMatrix::zeros(3, 4), nalgebra::DVector::zeros(3)).unwrap(),
        ])
        .unwrap();
        let mut r = rng(1);
        let dec = LayerStack::init(&[4, 4], &mut r).unwrap();
        let model =
            Autoencoder::new(enc, Bottleneck::su_full(2, 1, ExtractionMode::FirstColumn).unwrap(), dec)
                .unwrap();
        let (_, features) = model.forward(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!((features[0] - 1.0).abs() < 1e-12);
        assert!(features.iter().skip(1).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn qae_feature_blocks_unit_norm() {
        let mut r = rng(2);
        let model = Autoencoder::su(&[4, 3], &[4, 4], 2, 1, ExtractionMode::FirstColumn, &mut r).unwrap();
        for trial in 0..10 {
            let x = nalgebra::DVector::from_fn(4, |i, _| (trial * 4 + i) as f64 * 0.17 - 1.0);
            let (_, features) = model.forward(&x).unwrap();
            for norm in su_feature_block_norms(&model, &features) {
                assert!((norm - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn latent_dimension_rule() {
        let mut r = rng(3);
        // SU(2), L = 3 < 2n = 4: bottleneck before the map.
        let m = Autoencoder::su(&[4, 3], &[4, 4], 2, 1, ExtractionMode::FirstColumn, &mut r).unwrap();
        assert_eq!(m.latent_dim(), 3);
        // SU(3), L = 8 > 2n = 6: bottleneck after the map.
        let m = Autoencoder::su(&[10, 8], &[6, 10], 3, 1, ExtractionMode::FirstColumn, &mut r).unwrap();
        assert_eq!(m.latent_dim(), 6);
        // batched wines shape: 13 -> 12 -> (4 su2 maps) -> 16 -> 13
        let m = Autoencoder::su(&[13, 12], &[16, 13], 2, 4, ExtractionMode::FirstColumn, &mut r).unwrap();
        assert_eq!(m.latent_dim(), 12);
        let m = Autoencoder::bloch(&[4, 2], &[3, 4], &mut r).unwrap();
        assert_eq!(m.latent_dim(), 2);
    }

    #[test]
    fn bloch_zero_angles() {
        let mut r = rng(4);
        let model = Autoencoder::bloch(&[4, 2], &[3, 4], &mut r).unwrap();
        let z = nalgebra::DVector::from_vec(vec![0.0, 0.0]);
        let f = model.map_features(&z).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15 && f[1].abs() < 1e-15 && f[2].abs() < 1e-15);
    }

    #[test]
    fn poly_map_values() {
        assert_eq!(PolyMap::Squares2.apply(&[1.0, 1.0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(PolyMap::Squares3.apply(&[1.0, 1.0, 1.0]), vec![1.0, 1.0, 1.0, 3.0]);
    }

    #[test]
    fn wiring_mismatches_rejected() {
        let mut r = rng(5);
        // encoder output 4 does not chunk into SU(2) triples
        assert!(Autoencoder::su(&[5, 4], &[4, 5], 2, 1, ExtractionMode::FirstColumn, &mut r).is_err());
        // decoder input must be m * 2n
        assert!(Autoencoder::su(&[5, 3], &[5, 5], 2, 1, ExtractionMode::FirstColumn, &mut r).is_err());
        // bloch encoder width must be 2
        assert!(Autoencoder::bloch(&[4, 3], &[3, 4], &mut r).is_err());
        // outer widths must agree
        assert!(Autoencoder::linear(&[4, 2], &[2, 5], &mut r).is_err());
    }

    #[test]
    fn identity_capable_linear_ae_trains_to_zero() {
        // latent = N: the model can represent the identity, and 2000 epochs
        // of full-batch adam get train MSE below 1e-4.
        let mut r = rng(6);
        let mut model = Autoencoder::linear(&[3, 3], &[3, 3], &mut r).unwrap();
        let data = DMatrix::from_fn(12, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin() * 0.5);
        let opts = AeTrainOptions { epochs: 2000, optimizer: OptimizerKind::Adam, learning_rate: 1e-3 };
        let hist = ae_train(&mut model, &data, &data, &opts).unwrap();
        assert!(hist.last().unwrap().train_mse < 1e-4, "{}", hist.last().unwrap().train_mse);
    }

    #[test]
    fn training_loss_mostly_decreases() {
        let mut r = rng(7);
        let mut model =
            Autoencoder::su(&[4, 3], &[4, 4], 2, 1, ExtractionMode::FirstColumn, &mut r).unwrap();
        let data = DMatrix::from_fn(16, 4, |i, j| ((i + 2 * j) as f64 * 0.21).cos() * 0.4 + 0.3);
        let opts =
            AeTrainOptions { epochs: 200, optimizer: OptimizerKind::RmsProp, learning_rate: 1e-3 };
        let hist = ae_train(&mut model, &data, &data, &opts).unwrap();
        let decreasing = hist.windows(2).filter(|w| w[1].train_mse <= w[0].train_mse).count();
        assert!(
            decreasing as f64 >= 0.8 * (hist.len() - 1) as f64,
            "only {decreasing} of {} steps decreased",
            hist.len() - 1
        );
        assert!(hist.last().unwrap().train_mse < hist[0].train_mse);
    }
}
