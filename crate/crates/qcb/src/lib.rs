//! Quantum circle bundles, exactly and numerically.
pub mod cli;
pub mod fdbundle;
pub mod linalg;
pub mod metrics;
pub mod ncalg;
pub mod qhopf;
pub mod repnorms;
pub mod report;
pub mod sample;
pub mod scalars;
pub mod sphere;
pub mod suites;
pub use ncalg::{Algebra, Element, Word};
pub use scalars::Scalar;
pub use sphere::Sphere;

/// Double-precision instances of the generic numeric types.
pub type Bundle = fdbundle::Bundle<f64>;
pub type BundleDatum = fdbundle::BundleDatum<f64>;
