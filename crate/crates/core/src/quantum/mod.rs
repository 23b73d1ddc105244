//! Validated quantum linear-algebra layer: states, density matrices,
//! POVMs, partial traces, entropies, and symmetric subspaces.

mod entropy;
mod povm;
mod state;
mod symmetric;

pub use entropy::{binary_entropy, renyi2_binary, renyi2_entropy, von_neumann_entropy, EntropyKind};
pub use povm::Povm;
pub use state::{partial_trace, reduced_density, DensityMatrix, PureState, Subsystem};
pub use symmetric::{symmetric_dimension, SymmetricSubspace, DEFAULT_SIZE_CAP};
