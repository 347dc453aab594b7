//! Coherence spaces with totality, the uniform structures their co-totalities
//! induce, and linear realizers of uniformly continuous real functions over the
//! dyadic coherence space.

pub mod bits;
pub mod descriptor;
pub mod error;
pub mod maps;
pub mod realizers;
pub mod reals;
pub mod reps;
pub mod space;
pub mod sweep;
pub mod totality;
pub mod uniformity;

pub use bits::BitSet;
pub use error::{Error, Result};
pub use space::{build_space, Connective, Space, Token};
