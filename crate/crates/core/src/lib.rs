//! Exact numerics for quantum double models on small tori.
//!
//! Three families are supported: the plain quantum double `D(Z_N)`, the
//! model `D^K(Z_N)` with `Z_K` matter on faces coupled through a homomorphism
//! `f: Z_K -> Z_N`, and `D_M(Z_N)` with `M`-level matter on vertices carrying
//! a `Z_N` action. Every Hamiltonian term is built as a sparse operator on its
//! own few sites, so commutation and projector identities are checked locally
//! and ground-space dimensions are computed exactly from the term structure.
//!
//! ```
//! use qdlab::{models::{Model, ModelSpec}, spectra};
//!
//! let model = Model::build(&ModelSpec::dual(2, 2, 1, 2, 2)).unwrap();
//! let gsd = spectra::ground_space_dimension(&model, spectra::DEFAULT_CAP).unwrap();
//! assert_eq!(gsd, 1);
//! ```

pub mod error;
pub mod groups;
pub mod hilbert;
pub mod lattice;
pub mod models;
pub mod spectra;

pub use error::{Error, Result};
pub use groups::{
    classify, enumerate_homomorphisms, gsd_formula, Character, Classification, CyclicGroup,
    GroupElement, Homomorphism, ModelClass,
};
pub use hilbert::{BasisState, CharacterBasis, LinearOp, SiteKind, SiteLayout, StateVector};
pub use lattice::{DualPath, FaceOrder, Path, TorusLattice};
pub use models::{Family, Hamiltonian, Model, ModelSpec, ThetaAction};
pub use num_complex::Complex64;
