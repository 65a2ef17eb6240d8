//! Spectral evolution of lifted stacks.
//!
//! A periodic 2-D DFT per angle decouples the discretized generator into
//! `M^2` independent `N x N` blocks. Blocks are evolved with exact matrix
//! exponentials (optionally from a shared [`ExponentialBank`]) or with
//! Crank-Nicolson. [`apply_generator_physical`] evaluates the same generator
//! with finite-difference stencils and serves as an oracle.

mod block;
pub(crate) mod dft;
mod evolve;
mod physical;

pub use block::{block_signature, frequency_block, spectral_symbol, BlockSignature, ExponentialBank, FrequencyBlock};
pub use dft::{forward_dft, forward_dft_reference, inverse_dft, inverse_dft_reference, inverse_dft_with_residual};
pub use evolve::{diffuse, evolve_cn, evolve_exact, EvolutionStats};
pub use physical::apply_generator_physical;
