//! Improvable upper bounds to the piezoelectric polaron ground-state
//! energy, at rest and slow-moving.
//!
//! The pipeline: [`model`] builds the transformed Hamiltonian H(f) as a
//! normal-ordered term list; [`wick`] computes vacuum moments
//! M_m = ⟨0|H(f)^m|0⟩ by exhaustive Wick pairing, reducing continuum
//! contributions to exact angular averages ([`angular`]) times closed-form
//! radial integrals ([`radint`]); [`bounds`] turns a moment sequence into
//! the non-increasing sequence of upper bounds via the orthogonal-
//! polynomial / Jacobi-matrix route; [`reference`] carries the published
//! closed forms and literature lower bounds used for comparison; and
//! [`moving`] treats the slow-moving polaron (self-consistent drag
//! parameter, first-order bound, effective mass).

pub mod angular;
pub mod bounds;
pub mod model;
pub mod moving;
pub mod radint;
pub mod reference;
pub mod wick;

pub use model::{
    build_hamiltonian, coupling_from_material, FChoice, MaterialConstants, ModelParams, TermList,
};
