//! Finite-dimensional reproducing (-*)-kernels on like-Hermitian bundles.
//!
//! The library realizes, at desk scale, the category of reproducing kernels
//! whose positivity is taken with respect to duality pairings between the
//! fiber at a base point `z` and the fiber at its involuted partner `z^{-*}`,
//! rather than fiberwise inner products.  On top of that sit:
//!
//! * RKHS construction from positive kernels (`kernel`),
//! * kernel pull-backs along bundle (anti)morphisms and the induced
//!   operators between the RKHS spaces (`kernel`),
//! * universal (tautological) kernels on finite Grassmannians and
//!   compression CP maps (`grassmann`),
//! * Stinespring dilations, GNS, and the CPos morphism category (`cpmap`),
//! * the universality theorems tying everything together: every positive
//!   kernel is a pull-back of a Grassmannian universal kernel, homogeneous
//!   and transfer kernels factor as predicted, and the tracial-state GNS
//!   suite (`universality`).
//!
//! Everything is dense complex double-precision linear algebra; all claims
//! are verified as residuals against a default relative tolerance of `1e-9`.

pub mod bundle;
pub mod cpmap;
pub mod error;
pub mod grassmann;
pub mod kernel;
pub mod linalg;
pub mod sample;
pub mod universality;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C, DEFAULT_TOL};
