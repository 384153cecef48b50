//! Spectral harness for Maxwell systems on the half-space, posed on a
//! reflected torus.

pub mod coeffs;
pub mod diagnostics;
pub mod envelope;
pub mod evolution;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod lp;
pub mod norms;
pub mod ops;
pub mod reflect;
pub mod symbol;

pub use coeffs::CoefficientSet;
pub use error::{MaxlabError, Result};
pub use field::{FieldState, Parity, ScalarField};
pub use grid::TorusGrid;
