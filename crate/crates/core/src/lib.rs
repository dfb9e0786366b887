//! Analytic Fourier–Feynman transforms and convolution-type operations over
//! the Gaussian processes `Z_h(x, t) = ∫₀ᵗ h dx` on Wiener space.
//!
//! Exponential functionals get exact closed forms at complex parameters;
//! anything else is estimated by Monte Carlo at real `λ > 0`.

pub mod error;
pub mod functional;
pub mod grid;
pub mod kernel;
pub mod draws;
pub mod path;
pub mod rotation;
pub mod scalar;
pub mod suite;
pub mod system;

pub use error::{Error, Result};
pub use functional::{CtoSpec, ExpCombo, ExpTerm, TransformParam};
pub use grid::Grid;
pub use kernel::{combine_s, inner, l2_norm_sq, support, Expr, Kernel, SupportSet};
pub use path::{McEstimate, PathSampler, WienerPath};
pub use rotation::{CoordFunctional, CoordFunctional2, RotationCase, RotationReport};
pub use scalar::Scalar;
pub use system::{check_system, KernelSystem, SystemReport};

pub type KernelSystem64 = KernelSystem<f64>;

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type Kernel64 = Kernel<f64>;
pub type Kernel32 = Kernel<f32>;
pub type ExpCombo64 = ExpCombo<f64>;
pub type ExpCombo32 = ExpCombo<f32>;
pub type McEstimate64 = McEstimate<f64>;
pub type PathSampler64 = PathSampler<f64>;
pub type WienerPath64 = WienerPath<f64>;
