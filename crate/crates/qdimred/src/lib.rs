//! Hybrid quantum-classical dimensionality reduction.
//!
//! The crate provides, on top of a dense statevector simulator:
//!
//! - quantum fidelity kernels of a configurable data-encoding circuit and
//!   the kernel PCA built on them ([`kernels`]),
//! - autoencoders whose bottleneck is an SU(n) exponential map, a Bloch map
//!   or a polynomial map ([`models`], [`liealg`]),
//! - a kernel-PCA-embedded autoencoder that learns a qubit encoding for a
//!   downstream variational classifier ([`models::pqae`]),
//! - a simulated variational quantum classifier trained with the
//!   parameter-shift rule ([`models::vqc`]),
//! - bundled benchmark datasets and a config-driven experiment runner
//!   ([`data`], [`experiment`]).
//!
//! The guide under `book/` walks through the concepts; its code snippets are
//! compiled and run as doctests of this crate.

pub mod data;
pub mod error;
pub mod experiment;
pub mod floatfmt;
pub mod kernels;
pub mod liealg;
pub mod models;
pub mod nn;
pub mod parallel;
pub mod qsim;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(simulator, "../../../book/src/simulator.md");
    chapter!(lie_maps, "../../../book/src/lie-maps.md");
    chapter!(kernels, "../../../book/src/kernels.md");
    chapter!(training, "../../../book/src/training.md");
    chapter!(models, "../../../book/src/models.md");
    chapter!(experiments, "../../../book/src/experiments.md");
}
