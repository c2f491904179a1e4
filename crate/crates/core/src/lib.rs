//! Numerical toolkit for counting rational points of bounded height on
//! equivariant compactifications of the `ax+b` group over the rationals.
//!
//! The crate ships three built-in example surfaces together with the
//! machinery needed to check a Manin-type asymptotic on the first of them:
//!
//! * [`surface`] — boundary-divisor combinatorics of the built-in models,
//! * [`cone`] — rational dual-cone volumes, Peyre's alpha, shifted integrals,
//! * [`heights`] — exact local and global Weil heights,
//! * [`count`] — enumeration of points of bounded anticanonical height,
//! * [`tamagawa`] — local Tamagawa densities and Peyre's constant,
//! * [`local`] — p-adic oscillatory height integrals and their bias terms,
//! * [`expsum`] — exponential-sum evaluators and bound diagnostics.
//!
//! All exact arithmetic is done with arbitrary-precision rationals; floating
//! point appears only where an archimedean integral or a fitted coefficient
//! is inherently approximate.

pub mod arith;
pub mod cone;
pub mod count;
pub mod expsum;
pub mod heights;
pub mod local;
pub mod surface;
pub mod tamagawa;

mod error;

pub use error::Error;

/// Arbitrary-precision rational, the crate's exact scalar type.
pub type Rat = num_rational::BigRational;
/// Arbitrary-precision integer.
pub type Int = num_bigint::BigInt;
/// Double-precision complex scalar.
pub type C64 = num_complex::Complex64;

pub use cone::{ConeSpec, ConeVolume};
pub use count::{FitResult, SmoothWeight};
pub use heights::{LocalHeights, Place, RationalPoint};
pub use local::{OscillationQuery, OscillationValue};
pub use surface::{Classification, DivisorDatum, GeometryReport, SurfaceModel, Translate};

pub type Result<T> = std::result::Result<T, Error>;
