//! Sturmian words, their hierarchical partitions, and transfer-matrix
//! cocycles of the discrete Schrödinger operators
//!
//! ```text
//! (H u)(n) = u(n+1) + u(n-1) + λ v(n) u(n),   v(n) = χ_[1-α,1)(nα + θ mod 1)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`cf`]: the rotation number α as a continued fraction, convergents and
//!   the lengths of the approximant words;
//! * [`word`] and [`sturmian`]: bit-packed binary words, the approximants
//!   `s_n`, the limit word `c_α`, rotation words and subword sets;
//! * [`partition`]: block decompositions of words into `s_n`/`s_{n-1}` blocks;
//! * [`transfer`]: overflow-safe products of the 2×2 transfer matrices;
//! * [`spectral`]: periodic-approximant spectra, Lyapunov exponent estimates
//!   and polynomial growth envelopes;
//! * [`verify`]: the end-to-end numerical checks behind `sturmctl verify-all`.

pub mod cf;
pub mod error;
pub mod partition;
pub mod records;
pub mod spectral;
pub mod sturmian;
pub mod transfer;
pub mod verify;
pub mod word;

pub use cf::{ContinuedFraction, LengthTable};
pub use error::{Error, ErrorClass, Result};
pub use partition::{BlockTag, Partition, TwoBlockSplit};
pub use sturmian::{Approximants, Phase, RotationParams};
pub use transfer::{Energy, Mat2, TransferProduct};
pub use word::Word;
