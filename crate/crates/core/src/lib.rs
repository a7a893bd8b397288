//! Loop-group machinery for minimal surfaces in S³ (associated families,
//! Iwasawa splitting, DPW potentials, holonomy) and the genus-2 algebra that
//! classifies extensions `0 → S⁻¹ → V → S → 0` by quadratic differentials.

pub mod loopcore;
pub mod chartfamily;
pub mod extensions;
pub mod genus2;
pub mod iwasawa;
pub mod poly;
pub mod potential;
pub mod synthesis;
pub mod transport;

pub use loopcore::{LoopClass, LoopError, Matrix2, MatrixLoop, C64};
