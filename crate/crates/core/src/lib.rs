//! Numerical laboratory for Denjoy-Carleman weight sequences, weight
//! functions, weight matrices and ultradifferentiable formal power series.
//!
//! Every quantity is carried in log form; verdicts on asymptotic conditions
//! are produced from finite truncations by the trend protocol in [`verdict`].

pub mod error;
pub mod formal_series;
pub mod io;
pub mod matrices;
pub mod numeric;
pub mod report;
pub mod sequences;
pub mod verdict;
pub mod weight_functions;
pub mod witness;

pub use error::{Error, Result};
pub use formal_series::{ScaledCoefficient, WeightedPowerSeries};
pub use matrices::{MatrixCondition, WeightMatrix};
pub use sequences::{FamilyDescriptor, SequenceCondition, WeightSequence};
pub use verdict::{ConditionVerdict, Verdict};
pub use weight_functions::{FunctionCondition, LogGrid, WeightFunction};
pub use witness::{AlgebraElement, ExponentBasis, GapSequence, SummationWeightOracle};
