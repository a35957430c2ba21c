//! Dense complex linear algebra: Hermitian eigendecompositions, PSD tests,
//! orthonormalization, Gram quotients, and adjoints with respect to
//! non-standard sesquilinear pairings.
//!
//! Conventions used throughout the crate:
//!
//! * a pairing with matrix `G` evaluates as `(xi|eta) = eta^† G xi`
//!   (linear in the first slot, antilinear in the second);
//! * antilinear maps are a matrix plus a conjugation flag,
//!   `apply(xi) = M conj(xi)`; composition XORs the flags and conjugates
//!   the right factor when the left map is antilinear.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C = Complex<f64>;
pub type CMatrix = DMatrix<C>;
pub type CVector = DVector<C>;

/// Default relative tolerance for every residual check in the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C {
    Complex::new(re, 0.0)
}

pub fn czeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn cidentity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Entrywise complex conjugate (no transpose).
pub fn conj_m(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

/// Largest entry magnitude; zero for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
/// Returns `(eigenvalues, eigenvectors)` with `m ≈ V diag(λ) V^†`.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = m.nrows();
    let herm = (m + m.adjoint()) * cr(0.5);
    let se = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let vecs = CMatrix::from_columns(&order.iter().map(|&i| se.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

/// Spectrum of the smaller Gram side of `m` (`m m^†` or `m^† m`),
/// ascending eigenvalues clamped at zero.  Singular values of `m` are the
/// square roots.  The symmetric eigensolver is used throughout because the
/// general complex SVD can silently fail to converge on matrices with
/// clustered singular values.
fn gram_spectrum(m: &CMatrix) -> (DVector<f64>, CMatrix, bool) {
    // returns (eigenvalues, eigenvectors, rows_side)
    if m.nrows() <= m.ncols() {
        let (vals, vecs) = hermitian_eigen(&(m * m.adjoint()));
        (vals.map(|v| v.max(0.0)), vecs, true)
    } else {
        let (vals, vecs) = hermitian_eigen(&(m.adjoint() * m));
        (vals.map(|v| v.max(0.0)), vecs, false)
    }
}

/// Operator (spectral) norm; zero for empty matrices.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let (vals, _, _) = gram_spectrum(m);
    vals[vals.len() - 1].sqrt()
}

/// Moore-Penrose pseudo-inverse with a machine-level spectral cutoff.
pub fn pinv(m: &CMatrix) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return czeros(m.ncols(), m.nrows());
    }
    let (vals, vecs, rows_side) = gram_spectrum(m);
    let k = vals.len();
    let lmax = vals[k - 1];
    let cutoff = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * lmax;
    let mut core = czeros(k, k);
    for i in 0..k {
        if vals[i] > cutoff {
            core[(i, i)] = cr(1.0 / vals[i]);
        }
    }
    let g_pinv = &vecs * core * vecs.adjoint();
    if rows_side {
        // m⁺ = m† (m m†)⁺
        m.adjoint() * g_pinv
    } else {
        // m⁺ = (m† m)⁺ m†
        g_pinv * m.adjoint()
    }
}

/// Solves `a x = b` for square invertible `a`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "solve needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve: lhs has {} rows, rhs has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    a.clone()
        .full_piv_lu()
        .solve(b)
        .ok_or_else(|| Error::SingularPairing(smallest_singular_value(a)))
}

pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let (vals, _, _) = gram_spectrum(m);
    // eigenvalues below the Gram noise floor are perturbed zeros
    let floor = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * vals[vals.len() - 1];
    let lmin = vals[0];
    if lmin <= floor {
        0.0
    } else {
        lmin.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    pub is_hermitian: bool,
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Hermitian / positive-semidefinite test with an explicit minimal eigenvalue.
pub fn psd_check(m: &CMatrix) -> Result<PsdReport> {
    psd_check_tol(m, DEFAULT_TOL)
}

pub fn psd_check_tol(m: &CMatrix, tol: f64) -> Result<PsdReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "psd_check needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(PsdReport { is_hermitian: true, is_psd: true, min_eigenvalue: 0.0 });
    }
    let scale = max_abs(m).max(1.0);
    let is_hermitian = max_abs(&(m - m.adjoint())) <= tol * scale;
    let (vals, _) = hermitian_eigen(m);
    let min_eigenvalue = vals[0];
    let max_mag = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let is_psd = is_hermitian && min_eigenvalue >= -tol * max_mag.max(1.0);
    Ok(PsdReport { is_hermitian, is_psd, min_eigenvalue })
}

/// A subspace of `C^ambient_dim` stored through an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Wraps an already-orthonormal basis; checked.
    pub fn from_orthonormal(basis: CMatrix) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.adjoint() * &basis;
        if max_abs(&(gram - cidentity(k))) > 1e-8 {
            return Err(Error::Invalid("subspace basis is not orthonormal".into()));
        }
        Ok(Subspace { ambient_dim: basis.nrows(), basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projection `basis · basis^†` onto the subspace.
    pub fn projection(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Distance of a vector from the subspace.
    pub fn residual(&self, v: &CVector) -> f64 {
        (v - self.projection() * v).norm()
    }

    /// Basis-independent equality through projection matrices.
    pub fn coincides_with(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim
            && max_abs(&(self.projection() - other.projection())) <= tol
    }
}

/// Orthonormal basis of the column span, rank decided by a spectral cutoff
/// at machine level relative to the largest singular value.
pub fn orthonormal_basis(vectors: &CMatrix) -> Subspace {
    let ambient = vectors.nrows();
    if vectors.ncols() == 0 || max_abs(vectors) == 0.0 {
        return Subspace { ambient_dim: ambient, basis: czeros(ambient, 0) };
    }
    let svd = vectors.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = ambient.max(vectors.ncols()) as f64 * f64::EPSILON * smax;
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cutoff)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    let basis = if cols.is_empty() { czeros(ambient, 0) } else { CMatrix::from_columns(&cols) };
    Subspace { ambient_dim: ambient, basis }
}

/// Sesquilinear strong duality pairing `(xi|eta) = eta^† G xi`.
///
/// `G` maps the `d`-dimensional fiber into the `d'`-dimensional dual side;
/// strong duality forces `G` square and invertible.
#[derive(Debug, Clone)]
pub struct Pairing {
    matrix: CMatrix,
}

impl Pairing {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "a strong duality pairing matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let smin = smallest_singular_value(&matrix);
        let smax = op_norm(&matrix);
        if matrix.nrows() > 0 && smin <= DEFAULT_TOL * smax {
            return Err(Error::SingularPairing(smin));
        }
        Ok(Pairing { matrix })
    }

    pub fn standard(dim: usize) -> Self {
        Pairing { matrix: cidentity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `(xi|eta) = eta^† G xi`.
    pub fn eval(&self, xi: &CVector, eta: &CVector) -> C {
        (eta.adjoint() * &self.matrix * xi)[(0, 0)]
    }
}

/// Quotient of a generator family by the null space of its Gram matrix.
///
/// `embedding` is `rank x n`; column `i` holds the coordinates of generator
/// `i` in the quotient space, so that `embedding^† embedding = gram`.
#[derive(Debug, Clone)]
pub struct GramQuotient {
    pub gram: CMatrix,
    pub rank: usize,
    pub embedding: CMatrix,
}

pub fn gram_quotient(gram: &CMatrix) -> Result<GramQuotient> {
    let n = gram.nrows();
    let report = psd_check(gram)?;
    if !report.is_psd {
        return Err(Error::NotPsd { min_eigenvalue: report.min_eigenvalue });
    }
    let (vals, vecs) = hermitian_eigen(gram);
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    // generous safety factor: eigenvalues this small are perturbed zeros of
    // the quotient, and keeping them amplifies noise through the embedding
    let cutoff = n as f64 * 1e3 * f64::EPSILON * lmax;
    let kept: Vec<usize> = (0..n).filter(|&i| vals[i] > cutoff).collect();
    let rank = kept.len();
    let mut embedding = czeros(rank, n);
    for (row, &i) in kept.iter().enumerate() {
        let scale = cr(vals[i].sqrt());
        for j in 0..n {
            embedding[(row, j)] = scale * vecs[(j, i)].conj();
        }
    }
    Ok(GramQuotient { gram: gram.clone(), rank, embedding })
}

/// The unique `A` with `(op·xi | eta)_target = (xi | A·eta)_source`
/// for a linear `op` between the fibers; closed form
/// `(G_source^†)^{-1} · op^† · G_target^†`.
pub fn pairing_adjoint(op: &CMatrix, source: &Pairing, target: &Pairing) -> Result<CMatrix> {
    if op.ncols() != source.dim() {
        return Err(Error::Dimension(format!(
            "operator takes {} columns but the source pairing has dimension {}",
            op.ncols(),
            source.dim()
        )));
    }
    if op.nrows() != target.dim() {
        return Err(Error::Dimension(format!(
            "operator has {} rows but the target pairing has dimension {}",
            op.nrows(),
            target.dim()
        )));
    }
    let rhs = op.adjoint() * target.matrix().adjoint();
    solve(&source.matrix().adjoint(), &rhs)
}

/// Antilinear variant: for `op` acting as `xi ↦ M conj(xi)`, returns the
/// matrix `A` of the antilinear quasi-adjoint `eta ↦ A conj(eta)` defined by
/// `(op·xi | eta)_target = conj((xi | A·eta)_source)`.
pub fn pairing_adjoint_anti(m: &CMatrix, source: &Pairing, target: &Pairing) -> Result<CMatrix> {
    if m.ncols() != source.dim() || m.nrows() != target.dim() {
        return Err(Error::Dimension(
            "antilinear operator shape does not match the pairings".into(),
        ));
    }
    let rhs = m.transpose() * target.matrix().transpose();
    solve(&source.matrix().adjoint(), &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c_: f64, d: f64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[cr(a), cr(b), cr(c_), cr(d)])
    }

    #[test]
    fn psd_check_identity() {
        let r = psd_check(&cidentity(3)).unwrap();
        assert!(r.is_hermitian && r.is_psd);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_check_negative_scalar() {
        let r = psd_check(&CMatrix::from_row_slice(1, 1, &[cr(-1.0)])).unwrap();
        assert!(r.is_hermitian && !r.is_psd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_check_two_by_two() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let r = psd_check(&m2(2.0, 1.0, 1.0, 2.0)).unwrap();
        assert!(r.is_psd);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_check_detects_non_hermitian() {
        let r = psd_check(&m2(1.0, 1.0, 0.0, 1.0)).unwrap();
        assert!(!r.is_hermitian && !r.is_psd);
    }

    #[test]
    fn orthonormal_basis_collapses_dependent_columns() {
        let v = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(2.0), cr(0.0), cr(0.0)]);
        let s = orthonormal_basis(&v);
        assert_eq!(s.dim(), 1);
        assert!((s.basis().column(0)[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_basis_full_rank() {
        let v = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(1.0), cr(-1.0)]);
        let s = orthonormal_basis(&v);
        assert_eq!(s.dim(), 2);
        let g = s.basis().adjoint() * s.basis();
        assert!(max_abs(&(g - cidentity(2))) < 1e-12);
    }

    #[test]
    fn orthonormal_basis_empty() {
        let s = orthonormal_basis(&czeros(3, 0));
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient_dim(), 3);
    }

    #[test]
    fn projection_examples() {
        let e1 = orthonormal_basis(&CMatrix::from_row_slice(2, 1, &[cr(1.0), cr(0.0)]));
        assert!(max_abs(&(e1.projection() - m2(1.0, 0.0, 0.0, 0.0))) < 1e-12);

        let diag = orthonormal_basis(&CMatrix::from_row_slice(2, 1, &[cr(1.0), cr(1.0)]));
        assert!(max_abs(&(diag.projection() - m2(0.5, 0.5, 0.5, 0.5))) < 1e-12);

        let full = orthonormal_basis(&cidentity(2));
        assert!(max_abs(&(full.projection() - cidentity(2))) < 1e-12);
    }

    #[test]
    fn gram_quotient_reproduces_gram() {
        for g in [cidentity(2), m2(1.0, 1.0, 1.0, 1.0), m2(2.0, 0.0, 0.0, 0.0)] {
            let q = gram_quotient(&g).unwrap();
            let back = q.embedding.adjoint() * &q.embedding;
            assert!(max_abs(&(back - &g)) < 1e-10 * max_abs(&g).max(1.0));
        }
    }

    #[test]
    fn gram_quotient_rank_one() {
        let q = gram_quotient(&m2(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(q.rank, 1);
        // both generators map to the same unit coordinate vector
        let d = q.embedding.column(0) - q.embedding.column(1);
        assert!(d.norm() < 1e-12);
        assert!((q.embedding.column(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_quotient_null_generator_maps_to_zero() {
        let q = gram_quotient(&m2(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(q.rank, 1);
        assert!(q.embedding.column(1).norm() < 1e-12);
    }

    #[test]
    fn gram_quotient_rejects_indefinite() {
        assert!(matches!(
            gram_quotient(&m2(1.0, 2.0, 2.0, 1.0)),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn pairing_adjoint_reduces_to_ordinary_adjoint() {
        let op = CMatrix::from_row_slice(2, 3, &[
            c(1.0, 2.0), c(0.0, -1.0), cr(3.0),
            cr(0.5), c(2.0, 2.0), c(-1.0, 0.25),
        ]);
        let a = pairing_adjoint(&op, &Pairing::standard(3), &Pairing::standard(2)).unwrap();
        assert!(max_abs(&(a - op.adjoint())) < 1e-12);
    }

    #[test]
    fn pairing_adjoint_scalar_example() {
        let op = CMatrix::from_row_slice(1, 1, &[cr(2.0)]);
        let gs = Pairing::new(CMatrix::from_row_slice(1, 1, &[cr(1.0)])).unwrap();
        let gt = Pairing::new(CMatrix::from_row_slice(1, 1, &[cr(3.0)])).unwrap();
        let a = pairing_adjoint(&op, &gs, &gt).unwrap();
        assert!((a[(0, 0)] - cr(6.0)).norm() < 1e-12);
    }

    #[test]
    fn pairing_adjoint_defining_identity_brute_force() {
        // random-ish 2x3 operator with invertible non-Hermitian pairings
        let op = CMatrix::from_row_slice(2, 3, &[
            c(1.0, 0.5), c(-0.25, 1.0), cr(2.0),
            c(0.0, -1.5), cr(1.0), c(0.75, 0.75),
        ]);
        let gs = Pairing::new(CMatrix::from_row_slice(3, 3, &[
            cr(2.0), c(0.5, 0.5), cr(0.0),
            cr(0.25), cr(1.5), c(0.0, -0.5),
            c(0.0, 1.0), cr(0.0), cr(1.0),
        ]))
        .unwrap();
        let gt = Pairing::new(CMatrix::from_row_slice(2, 2, &[
            cr(1.0), c(0.25, -0.75),
            cr(0.0), c(2.0, 0.5),
        ]))
        .unwrap();
        let a = pairing_adjoint(&op, &gs, &gt).unwrap();
        // (op·xi | eta)_target = (xi | A·eta)_source on all basis pairs
        for i in 0..3 {
            let xi = cidentity(3).column(i).into_owned();
            for j in 0..2 {
                let eta = cidentity(2).column(j).into_owned();
                let lhs = gt.eval(&(op.clone() * &xi), &eta);
                let rhs = gs.eval(&xi, &(a.clone() * &eta));
                assert!((lhs - rhs).norm() < 1e-12, "basis pair ({i},{j})");
            }
        }
    }

    #[test]
    fn pairing_adjoint_double_application_with_swapped_pairings() {
        // applying the adjoint twice, swapping pairings via G' = G^†,
        // returns the original operator
        let op = CMatrix::from_row_slice(2, 2, &[
            c(1.0, 1.0), cr(0.5),
            c(0.0, -2.0), cr(3.0),
        ]);
        let gs = Pairing::new(CMatrix::from_row_slice(2, 2, &[
            cr(1.0), c(0.5, 0.25),
            cr(0.0), cr(2.0),
        ]))
        .unwrap();
        let gt = Pairing::new(CMatrix::from_row_slice(2, 2, &[
            cr(3.0), cr(0.0),
            c(0.0, 1.0), cr(1.0),
        ]))
        .unwrap();
        let a = pairing_adjoint(&op, &gs, &gt).unwrap();
        let gs_swapped = Pairing::new(gt.matrix().adjoint()).unwrap();
        let gt_swapped = Pairing::new(gs.matrix().adjoint()).unwrap();
        let back = pairing_adjoint(&a, &gs_swapped, &gt_swapped).unwrap();
        assert!(max_abs(&(back - op)) < 1e-10);
    }

    #[test]
    fn antilinear_adjoint_defining_identity() {
        let m = CMatrix::from_row_slice(2, 2, &[
            c(1.0, 0.5), cr(-1.0),
            cr(0.25), c(0.0, 2.0),
        ]);
        let gs = Pairing::new(CMatrix::from_row_slice(2, 2, &[
            cr(2.0), c(0.0, 0.5),
            cr(0.5), cr(1.0),
        ]))
        .unwrap();
        let gt = Pairing::new(CMatrix::from_row_slice(2, 2, &[
            cr(1.0), cr(0.25),
            c(0.0, -1.0), cr(3.0),
        ]))
        .unwrap();
        let a = pairing_adjoint_anti(&m, &gs, &gt).unwrap();
        for i in 0..2 {
            let xi = cidentity(2).column(i).into_owned();
            for j in 0..2 {
                let eta = cidentity(2).column(j).into_owned();
                let lhs = gt.eval(&(m.clone() * xi.map(|z| z.conj())), &eta);
                let rhs = gs.eval(&xi, &(a.clone() * eta.map(|z| z.conj()))).conj();
                assert!((lhs - rhs).norm() < 1e-12, "basis pair ({i},{j})");
            }
        }
    }

}
