//! Constructive bi-Lipschitz extension of circle embeddings to the whole plane.
//!
//! The pipeline: a sampled embedding `f` of the unit circle is mapped
//! conformally ([`conformal`]), its boundary correspondence is extended into
//! the disk by a Beurling-Ahlfors type construction ([`ba_ext`]), and the
//! pieces are composed into a plane homeomorphism ([`extend`]). Curves without
//! central symmetry go through winding symmetrization first ([`symmetrize`]).
//! Every inequality the construction relies on has a numerical check.

pub mod ba_ext;
pub mod conformal;
pub mod curves;
pub mod error;
pub mod extend;
pub mod geom;
pub mod harmonic;
pub mod report;
pub mod symmetrize;
pub mod verify;

pub use error::{Error, Result};
pub use geom::{Jacobian2, C64};
