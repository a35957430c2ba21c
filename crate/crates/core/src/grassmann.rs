//! Tautological-bundle kernels on finite-dimensional Grassmannians: the
//! universal kernel `Q_H`, its involutive variants `Q_{H,C}`, compression
//! CP maps, and conditional expectations onto projection commutants.
//!
//! Points are explicit subspaces of `C^h` stored through orthonormal bases;
//! all kernel blocks are expressed in those stored bases.

use crate::bundle::{BaseSet, Bundle};
use crate::cpmap::{CpMap, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{
    cidentity, conj_m, max_abs, psd_check, CMatrix, Pairing, Subspace,
};

/// An isometric involution of the ambient space: a unitary `C` with
/// `C² = id`, either linear or antilinear (`x ↦ M conj(x)`).
#[derive(Debug, Clone)]
pub struct InvolutionIsometry {
    matrix: CMatrix,
    antilinear: bool,
}

impl InvolutionIsometry {
    pub fn new(matrix: CMatrix, antilinear: bool) -> Result<Self> {
        let h = matrix.nrows();
        if matrix.ncols() != h {
            return Err(Error::Dimension("involution must be square".into()));
        }
        // isometric: unitary matrix part in both cases
        let unit_res = max_abs(&(matrix.adjoint() * &matrix - cidentity(h)));
        if unit_res > 1e-9 {
            return Err(Error::Precondition(format!(
                "involution is not isometric (residual {unit_res:e})"
            )));
        }
        // involutive: C² = id, with the conjugation threaded through in the
        // antilinear case (M conj(M) = id)
        let square = if antilinear { &matrix * conj_m(&matrix) } else { &matrix * &matrix };
        let inv_res = max_abs(&(square - cidentity(h)));
        if inv_res > 1e-9 {
            return Err(Error::Precondition(format!(
                "involution does not square to the identity (residual {inv_res:e})"
            )));
        }
        Ok(InvolutionIsometry { matrix, antilinear })
    }

    pub fn identity(h: usize) -> Self {
        InvolutionIsometry { matrix: cidentity(h), antilinear: false }
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Applies `C` column-wise to a matrix of vectors.
    pub fn apply_cols(&self, m: &CMatrix) -> CMatrix {
        if self.antilinear {
            &self.matrix * conj_m(m)
        } else {
            &self.matrix * m
        }
    }

    /// Image subspace `C(S)`.
    pub fn map_subspace(&self, s: &Subspace) -> Subspace {
        crate::linalg::orthonormal_basis(&self.apply_cols(s.basis()))
    }
}

fn common_ambient(points: &[Subspace]) -> Result<usize> {
    let h = points
        .first()
        .ok_or_else(|| Error::Invalid("at least one subspace required".into()))?
        .ambient_dim();
    if points.iter().any(|s| s.ambient_dim() != h) {
        return Err(Error::Dimension("subspaces live in different ambient spaces".into()));
    }
    Ok(h)
}

fn point_names(points: &[Subspace]) -> Vec<String> {
    (0..points.len()).map(|i| format!("S{i}")).collect()
}

/// The universal kernel `Q_H(S₁,S₂) = p_{S₁}|_{S₂}` over a list of
/// subspaces, on the Hermitian bundle with identity involution and
/// standard pairings; in stored bases the block is `basis₁^† basis₂`.
pub fn universal_kernel(points: &[Subspace]) -> Result<Kernel> {
    common_ambient(points)?;
    let dims: Vec<usize> = points.iter().map(|s| s.dim()).collect();
    let bundle = Bundle::hermitian(point_names(points), dims)?;
    Kernel::from_fn(bundle, |i, j| points[i].basis().adjoint() * points[j].basis())
}

/// The involutive universal kernel `Q_{H,C}(S₁,S₂) = p_{S₁} ∘ C|_{S₂}` on
/// the like-Hermitian bundle whose base involution is `S ↦ C(S)` and whose
/// pairings are `(x|y)_{S,S^{-*}} = (x | C y)_H`, all in stored bases.
/// The subspace list must be closed under `S ↦ C(S)`.
pub fn involutive_kernel(points: &[Subspace], c: &InvolutionIsometry) -> Result<Kernel> {
    let h = common_ambient(points)?;
    if c.matrix().nrows() != h {
        return Err(Error::Dimension("involution acts on a different ambient space".into()));
    }
    let n = points.len();
    let mut involution = Vec::with_capacity(n);
    for s in points {
        let image = c.map_subspace(s);
        let idx = points
            .iter()
            .position(|t| t.coincides_with(&image, 1e-8))
            .ok_or_else(|| {
                Error::Precondition("subspace list is not closed under the involution".into())
            })?;
        involution.push(idx);
    }
    let base = BaseSet::new(point_names(points), involution.clone())?;
    let dims: Vec<usize> = points.iter().map(|s| s.dim()).collect();
    let mut pairings = Vec::with_capacity(n);
    for (i, s) in points.iter().enumerate() {
        // G entries from basis evaluation of (B_S a | C(B_{S^{-*}} b))_H
        let g = c.apply_cols(points[involution[i]].basis()).adjoint() * s.basis();
        pairings.push(Pairing::new(g)?);
    }
    let bundle = Bundle::new(base, dims, pairings)?;
    Kernel::from_fn(bundle, |i, j| points[i].basis().adjoint() * c.apply_cols(points[j].basis()))
}

/// The conditional expectation `E_p : T ↦ pTp + (1−p)T(1−p)` onto the
/// commutant of a projection.
#[derive(Debug, Clone)]
pub struct ConditionalExpectation {
    p: CMatrix,
}

pub fn conditional_expectation(p: &CMatrix) -> Result<ConditionalExpectation> {
    let rep = psd_check(p)?;
    if !rep.is_hermitian || max_abs(&(p * p - p)) > 1e-9 * max_abs(p).max(1.0) {
        return Err(Error::Precondition("E_p requires an orthogonal projection".into()));
    }
    Ok(ConditionalExpectation { p: p.clone() })
}

impl ConditionalExpectation {
    pub fn apply(&self, t: &CMatrix) -> CMatrix {
        let n = self.p.nrows();
        let q = cidentity(n) - &self.p;
        &self.p * t * &self.p + &q * t * q
    }

    /// Commutator of a matrix with the projection; zero on the range of `E_p`.
    pub fn commutant_residual(&self, t: &CMatrix) -> f64 {
        max_abs(&(&self.p * t - t * &self.p))
    }
}

/// The compression map `Φ_K : T ↦ p_K ∘ T ∘ ι_K` from the full matrix
/// algebra of the ambient space to operators on `K`, expressed in the
/// stored basis of `K`; requires `K ⊆ S₀`.
pub fn compression_map(k: &Subspace, s0: &Subspace) -> Result<CpMap> {
    if k.ambient_dim() != s0.ambient_dim() {
        return Err(Error::Dimension("K and S₀ live in different ambient spaces".into()));
    }
    let inclusion = max_abs(&(s0.projection() * k.projection() - k.projection()));
    if inclusion > 1e-9 {
        return Err(Error::Precondition(format!(
            "K is not contained in S₀ (residual {inclusion:e})"
        )));
    }
    let h = k.ambient_dim();
    let algebra = MatrixAlgebra::full(h);
    let bk = k.basis();
    let action = algebra.basis().iter().map(|e| bk.adjoint() * e * bk).collect();
    CpMap::new(algebra, k.dim(), action)
}
