//! Exact computer algebra for the homology of free loop spaces.
//!
//! The crate is organised in layers. [`linalg`] provides arbitrary-precision
//! integer matrices with Smith normal form and subquotient bookkeeping;
//! [`groups`] builds finitely generated abelian groups and graded groups on
//! top of it. [`rings`] implements graded-commutative ring presentations with
//! degreewise monomial bases, and [`spectral`] first-quadrant spectral
//! sequence pages with differentials, morphisms and Leibniz products.
//! [`serre`] assembles the loop-space spectral sequences of spheres and
//! projective spaces together with their ring catalog and Atiyah-Hirzebruch
//! tensor computations, [`sullivan`] covers the rational side through free
//! differential graded algebras, and [`gysin`] the cellular umkehr map of a
//! transverse triangulation.

pub mod groups;
pub mod gysin;
pub mod linalg;
pub mod rings;
pub mod serre;
pub mod spectral;
pub mod sullivan;

pub use groups::{FinAbGroup, GradedGroup};
pub use linalg::{smith_normal_form, IntMatrix, SnfResult, Subquotient};
pub use rings::{GeneratorKind, RingElement, RingPresentation};
pub use serre::{CoefficientRing, SpaceSpec};
pub use spectral::{Page, SpectralSequence, SsMorphism, Window};
pub use sullivan::SullivanAlgebra;
