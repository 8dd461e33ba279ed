//! Harmonic-analysis toolkit on uniform midpoint grids.
//!
//! Functions are sampled on `[-L, L)^n` (`n <= 3`) and treated as zero
//! outside the box. On top of the samples the crate computes distribution
//! functions, weak and Lorentz norms, decreasing rearrangements, Fourier
//! transforms with the `e^{-2 pi i x . xi}` convention, homogeneous Sobolev
//! norms, full-space convolutions, dyadic BMO norms and Calderón–Zygmund
//! decompositions, and verifies interpolation inequalities by comparing both
//! sides and their behaviour under dilation.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.
//!
//! ```
//! use harmonic_core::{sample, GeneratorId, GridSpec64, measure, fourier};
//!
//! let spec = GridSpec64::new(1, 8.0, 256).unwrap();
//! let g = sample(spec, &GeneratorId::Gaussian).unwrap();
//! let weak = measure::weak_norm(&g, 2.0).unwrap();
//! assert!(weak <= harmonic_core::lp_quadrature(&g, 2.0).unwrap());
//! assert!(fourier::plancherel_defect(&g) < 1e-10);
//! ```

pub mod bmo;
pub mod convolve;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod inequality;
pub mod measure;
pub mod report;
pub mod scalar;
pub mod tolerance;

pub use bmo::{CubeDecomposition, DyadicCube, SelectedCube};
pub use convolve::ConvolutionResult;
pub use error::{Error, Result};
pub use fourier::SpectralFunction;
pub use grid::{dilate, lp_quadrature, sample, sample_recipe, Generator, GeneratorId, GridFunction, GridSpec};
pub use inequality::{solve_theta, ExponentTuple, SweepReport, SweepSummary, Verifier};
pub use measure::{AmplitudeSplit, DistributionProfile, Rearrangement, SplitBounds};
pub use report::InequalityReport;
pub use scalar::Scalar;

pub type GridSpec64 = GridSpec<f64>;
pub type GridSpec32 = GridSpec<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type Generator64 = Generator<f64>;
pub type SpectralFunction64 = SpectralFunction<f64>;
pub type SpectralFunction32 = SpectralFunction<f32>;
pub type DistributionProfile64 = DistributionProfile<f64>;
pub type Rearrangement64 = Rearrangement<f64>;
pub type ConvolutionResult64 = ConvolutionResult<f64>;
pub type CubeDecomposition64 = CubeDecomposition<f64>;
pub type ExponentTuple64 = ExponentTuple<f64>;
pub type InequalityReport64 = InequalityReport<f64>;
pub type InequalityReport32 = InequalityReport<f32>;
pub type Verifier64 = Verifier<f64>;
pub type SweepReport64 = SweepReport<f64>;
