//! Distance-like multipartite entanglement measures at desk scale:
//! the geometric measure and its mixed-state extension, relative-entropy
//! and robustness upper bounds, equality certification via group-averaging
//! (twirling), separable-measurement discrimination bounds, and
//! geometric-measure entanglement witnesses.

pub mod error;
pub mod linalg;
pub mod states;
pub mod geometric;
pub mod symmetry;
pub mod measures;
pub mod discrimination;
pub mod witness;

pub use error::{EntcertError, Result};
