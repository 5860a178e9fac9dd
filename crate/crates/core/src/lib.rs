//! Signed graph Fourier transform (SGFT) toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] small dense matrices used throughout.
//! * [`markov`] the one-break Markov model, its covariance and precision.
//! * [`graph`] signed graphs with self-loops, Laplacians, inertia.
//! * [`spectral`] deterministic Jacobi eigensolver and SGFT bases.
//! * [`transforms`] SGFT, WGFT and DCT block transforms.
//! * [`contour`] broken-link maps shared by the codec and the entropy layer.
//! * [`entropy`] range coder, contour chain coding, coefficient coding.
//! * [`codec`] the block-based depth image codec.
//! * [`eval`] PSNR and rate-distortion sweeps.
//!
//! Batch entry points take an [`Exec`] policy; with the `parallel` feature
//! disabled every policy runs sequentially.

pub mod codec;
pub mod contour;
pub mod entropy;
mod error;
pub mod eval;
mod exec;
pub mod graph;
pub mod linalg;
pub mod markov;
pub mod spectral;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
pub use exec::Exec;
