//! Numerical spectral quantities built on the transfer-matrix products:
//! approximant spectra, Lyapunov exponents and polynomial growth envelopes.

pub mod growth;
pub mod lyapunov;
pub mod spectrum;

pub use growth::{certified_bound, growth_fit, resample_violation, CertifiedBound, EnergyFit, Envelope, GrowthFit};
pub use lyapunov::{
    lyapunov_along_phase, lyapunov_estimate, subadditive_limit, LevelSample, LyapunovEstimate, PhaseSample,
    SubadditiveLimit, WordFunctional,
};
pub use spectrum::{approximate_spectrum, sigma_proxy, Band, SpectrumApprox};
