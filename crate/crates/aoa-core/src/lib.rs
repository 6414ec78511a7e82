//! Almost-orthogonal arrays: non-orthogonality metrics, finite-field
//! constructions, symmetry-compressed local Pareto search and integer
//! programming model emission.

pub mod array;
pub mod constructions;
pub mod discrepancy;
pub mod error;
pub mod galois;
pub mod io;
pub mod ip;
pub mod metrics;
pub mod search;
pub mod symmetry;

pub use array::{Array, ColumnTuple, Rational};
pub use error::{AoaError, Result};
pub use constructions::{construct, ConstructionSpec, Variant};
pub use io::{parse_array, write_array, ArrayFile};
pub use ip::{IpInstance, IpModel};
pub use search::{local_pareto_search, ObjectiveVector, ParetoFront, SearchConfig};
pub use symmetry::{GroupElement, SymmetricEncoding, SymmetryKind};
