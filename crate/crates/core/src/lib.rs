//! Semi-discrete hypoelliptic diffusion on the group SE(2,N).
//!
//! Grey images are lifted to an orientation stack with `N` directions, evolved
//! under the discretized Fokker-Planck equation of the jump process (solved
//! exactly per spatial frequency after an FFT), and projected back. Static and
//! dynamic restoration steer the evolution when the corrupted region is known.
//!
//! The `segroup`, `kernel` and `apev` modules expose the group-theoretic side:
//! irreducible representations, the heat kernel computed two ways, and the
//! almost-periodic polynomial evolution with its rotation-orbit reduction.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apev;
pub mod diffusion;
pub mod error;
pub mod image;
pub mod kernel;
pub mod lift;
pub mod linalg;
pub mod params;
pub mod pipeline;
pub mod pnm;
pub mod restore;
pub mod segroup;
pub mod stack;
pub mod stackio;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
pub use image::{GreyImage, Mask};
pub use params::{DiffusionParams, Integrator, Mode};
pub use stack::{LiftedStack, SpectralStack};

pub use num_complex::Complex64;
