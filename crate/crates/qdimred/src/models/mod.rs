//! The model zoo: plain linear, SU(n)-bottleneck, Bloch and polynomial
//! autoencoders, the kernel-PCA-embedded autoencoder, and the variational
//! classifier, with their training loops.

pub mod autoencoder;
pub mod pqae;
pub mod vqc;

pub use autoencoder::{
    ae_loss_and_grads, ae_train, AeTrainOptions, Autoencoder, Bottleneck, EpochRecord, PolyMap,
};
pub use pqae::{
    kernel_block, pqae_batch_loss_and_grads, pqae_train, pqae_train_epoch, PqaeModel,
    KERNEL_BRIDGE_FD_STEP,
};
pub use vqc::{
    vqc_evaluate, vqc_loss_and_grad, vqc_train, VqcEpoch, VqcModel, VqcTrainOptions,
};
