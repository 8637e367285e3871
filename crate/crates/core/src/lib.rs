//! Exact transfer-matrix contraction of gauge-invariant PEPS for abelian
//! lattice gauge theories: norms, Wilson loops, transfer-matrix spectra and
//! confinement diagnostics.

pub mod analysis;
pub mod contraction;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod symmetry;
pub mod tensor;
pub mod thermo;
pub mod transfer;

pub use error::{Error, Result};
pub use symmetry::{GroupSpec, IrrepLabel, LinkOperator, C64};
pub use tensor::{GaugeTensor, Z2Params};
pub use transfer::{FluxSpec, ReducedTransfer, SpectralReduction, TransferOperator};
