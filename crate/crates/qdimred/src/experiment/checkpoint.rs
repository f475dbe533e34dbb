//! Model checkpoints: structured JSON with width chains and flat parameter
//! arrays in the canonical float format, plus the fitted scaler and the
//! optimizer state, so a trained encoder can be reused on new data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::floatfmt;
use crate::models::PqaeModel;
use crate::nn::{LayerStack, OptimizerState};
use crate::qsim::FeatureMapSpec;

/// One serialized layer stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackCheckpoint {
    pub widths: Vec<usize>,
    pub params: Vec<f64>,
}

impl StackCheckpoint {
    pub fn of(stack: &LayerStack) -> Self {
        let mut params = Vec::with_capacity(stack.param_len());
        stack.flatten_params(&mut params);
        Self { widths: stack.widths(), params }
    }

    pub fn rebuild(&self) -> Result<LayerStack> {
        LayerStack::from_flat(&self.widths, &self.params)
    }
}

/// A trained qubit-encoding pipeline: scaler, encoder, decoder, feature-map
/// wiring and the optimizer state it stopped with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqaeCheckpoint {
    pub model_kind: String,
    pub feature_map: FeatureMapSpec,
    pub n_d: usize,
    pub batch_size: usize,
    pub kpca_center: bool,
    pub scaler: Scaler,
    pub encoder: StackCheckpoint,
    pub decoder: StackCheckpoint,
    pub optimizer: OptimizerState,
}

impl PqaeCheckpoint {
    pub fn of(model: &PqaeModel, scaler: &Scaler, optimizer: &OptimizerState) -> Self {
        Self {
            model_kind: "pqae".to_string(),
            feature_map: model.feature_map,
            n_d: model.n_d,
            batch_size: model.batch_size,
            kpca_center: model.kpca_center,
            scaler: scaler.clone(),
            encoder: StackCheckpoint::of(&model.encoder),
            decoder: StackCheckpoint::of(&model.decoder),
            optimizer: optimizer.clone(),
        }
    }

    pub fn rebuild(&self) -> Result<(PqaeModel, Scaler)> {
        let model = PqaeModel::new(
            self.encoder.rebuild()?,
            self.decoder.rebuild()?,
            self.feature_map,
            self.n_d,
            self.batch_size,
            self.kpca_center,
        )?;
        Ok((model, self.scaler.clone()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, floatfmt::to_json_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingArtifact(format!("checkpoint {}", path.display()))
            } else {
                Error::Io(e)
            }
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("checkpoint parse: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ScalerKind;
    use crate::nn::{OptimizerHyper, OptimizerKind};
    use crate::qsim::Entanglement;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn checkpoint_round_trip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let encoder = LayerStack::init(&[4, 4], &mut rng).unwrap();
        let decoder = LayerStack::init(&[4, 4], &mut rng).unwrap();
        let fm = FeatureMapSpec::new(4, 2, Entanglement::Full).unwrap();
        let model = PqaeModel::new(encoder, decoder, fm, 4, 32, true).unwrap();
        let scaler = Scaler { kind: ScalerKind::MinMax01, mins: vec![0.0; 4], maxs: vec![1.0; 4] };
        let opt = OptimizerState::new(OptimizerKind::Adam, OptimizerHyper::default(), model.param_len());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let ck = PqaeCheckpoint::of(&model, &scaler, &opt);
        ck.save(&path).unwrap();
        let loaded = PqaeCheckpoint::load(&path).unwrap();
        assert_eq!(ck, loaded);
        let (rebuilt, _) = loaded.rebuild().unwrap();
        assert_eq!(rebuilt.flatten_params(), model.flatten_params());
    }

    #[test]
    fn missing_checkpoint_is_missing_artifact() {
        let err = PqaeCheckpoint::load(Path::new("/nonexistent/ckpt.json")).unwrap_err();
        assert!(matches!(err, Error::MissingArtifact(_)));
    }
}
