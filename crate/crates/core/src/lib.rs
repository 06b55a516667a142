//! Constant mean curvature surfaces of Delaunay type from loop-group data.
//!
//! The pipeline runs holomorphic potential → holomorphic frame `Φ` →
//! Iwasawa splitting `Φ = F·B` → Sym–Bobenko immersion `f_{λ₀}`, with the
//! closing conditions read off the monodromy of `Φ`.

pub mod delaunay;
pub mod dpw;
pub mod error;
pub mod iwasawa;
pub mod loop_algebra;
pub mod mat2;
pub mod monodromy;
pub mod su2;
pub mod surface;

pub use delaunay::{DelaunayParams, SurfaceKind};
pub use dpw::{immerse, DPWTriple, ImmerseOptions, Potential};
pub use error::{Error, Result};
pub use iwasawa::{iwasawa_decompose, IwasawaFactors};
pub use loop_algebra::LoopMatrix;
pub use monodromy::{ClosingReport, MonodromyMatrix};
pub use su2::SU2Vector;
