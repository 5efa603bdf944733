//! Hybrid analog/digital precoder design for angle-of-departure estimation.
//!
//! A fully digital precoder `F_opt` is designed from a codebook of directional
//! and derivative beams to minimize the worst-case angle error bound over an
//! uncertainty interval. It is then factored into an analog precoder with
//! `B`-bit phase shifters and a digital baseband precoder.
//!
//! Everything is generic over the scalar type; the aliases at the crate root
//! fix it to `f64`.

pub mod array;
pub mod decomposition;
pub mod digital;
pub mod error;
pub mod fisher;
pub mod numerics;
pub mod quant_bound;
pub mod quantizer;
pub mod scalar;

pub use array::{deg, PositionOperator, UlaGeometry};
pub use decomposition::{
    admm_step, alt_opt_ls_admm, augmented_lagrangian, bb_update, decomposition_error, random_power_normalized,
    rho_rule, stationarity_residual, AdmmSolver, AdmmState, AltOptConfig, Diagnostics, HybridFactors, IterationRecord,
    OuterRecord, OutputPairing,
};
pub use digital::{
    assemble_f_opt, build_codebook, design_digital_precoder, optimize_power_allocation, project_to_simplex,
    AllocationConfig, AllocationReport, Codebook, DigitalDesign, PowerAllocation, UncertaintySet,
};
pub use error::{Error, Result};
pub use fisher::{aeb, crb, fim, BeamResponses, ChannelState, FisherMatrix};
pub use numerics::{frobenius_norm, left_pseudoinverse, min_max_eigenvalues, Cholesky, ComplexMatrix, Mat3};
pub use quant_bound::{quant_bound_factor, verify_quantization_bound, QuantBoundReport, QuantBoundRow};
pub use quantizer::QuantizerSpec;
pub use scalar::Real;

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type Matrix = ComplexMatrix<f64>;
pub type Geometry = UlaGeometry<f64>;
pub type State = ChannelState<f64>;
pub type Factors = HybridFactors<f64>;
pub type Fim = FisherMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type State32 = ChannelState<f32>;
