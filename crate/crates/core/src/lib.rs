pub mod coefficients;
pub mod definiteness;
pub mod error;
pub mod index;
pub mod linalg;
pub mod metric;
pub mod quadrature;
pub mod scalar;
pub mod summation;
pub mod witnesses;

pub use error::{Error, Result};

pub type Space = metric::SpaceDescriptor<f64>;
pub type Space32 = metric::SpaceDescriptor<f32>;
pub type Pt = metric::Point<f64>;
pub type Profile = metric::RevolutionProfile<f64>;
pub type Kernel = definiteness::KernelSpec<f64>;
pub type Config = definiteness::PointConfig<f64>;
pub type Matrix = linalg::SymMatrix<f64>;
pub type Params = witnesses::WitnessParams<f64>;
pub type Report = witnesses::SumsReport<f64>;
pub type Estimate = index::IndexEstimate<f64>;
pub type CoeffTable = coefficients::ExactCoeffTable;
