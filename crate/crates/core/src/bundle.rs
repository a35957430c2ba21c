//! Finite realizations of like-Hermitian vector bundles and their
//! (anti)morphisms.
//!
//! A bundle lives over a finite ordered base set with an involution
//! `z ↦ z^{-*}`; each point carries a coordinate fiber `C^d` and a duality
//! pairing matrix `G_z` coupling the fiber at `z` with the fiber at
//! `z^{-*}` as `(xi|eta)_{z,z^{-*}} = eta^† G_z xi`.  Strong duality makes
//! every `G_z` square and invertible, and conjugate symmetry of the family
//! reads `G_{z^{-*}} = G_z^†`.

use crate::error::{Error, Result};
use crate::linalg::{
    conj_m, max_abs, pairing_adjoint, pairing_adjoint_anti, smallest_singular_value, CMatrix,
    CVector, Pairing, DEFAULT_TOL,
};

/// Finite base set with an involutive permutation.
#[derive(Debug, Clone)]
pub struct BaseSet {
    points: Vec<String>,
    involution: Vec<usize>,
}

impl BaseSet {
    pub fn new(points: Vec<String>, involution: Vec<usize>) -> Result<Self> {
        let n = points.len();
        if involution.len() != n {
            return Err(Error::Dimension(format!(
                "involution table has {} entries for {} points",
                involution.len(),
                n
            )));
        }
        for (i, &j) in involution.iter().enumerate() {
            if j >= n {
                return Err(Error::Invalid(format!("involution maps point {i} out of range")));
            }
            if involution[j] != i {
                return Err(Error::Invalid(format!(
                    "involution is not involutive at point '{}'",
                    points[i]
                )));
            }
        }
        Ok(BaseSet { points, involution })
    }

    /// Base set with the identity involution.
    pub fn hermitian(points: Vec<String>) -> Self {
        let n = points.len();
        BaseSet { points, involution: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p == id)
    }

    /// `z ↦ z^{-*}` as an index map.
    pub fn involute(&self, i: usize) -> usize {
        self.involution[i]
    }

    pub fn same_structure(&self, other: &BaseSet) -> bool {
        self.points == other.points && self.involution == other.involution
    }
}

/// Like-Hermitian bundle: base set, fiber dimensions, pairing matrices.
#[derive(Debug, Clone)]
pub struct Bundle {
    base: BaseSet,
    fiber_dims: Vec<usize>,
    pairings: Vec<Pairing>,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub max_residual: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Bundle {
    pub fn new(base: BaseSet, fiber_dims: Vec<usize>, pairings: Vec<Pairing>) -> Result<Self> {
        let n = base.len();
        if fiber_dims.len() != n || pairings.len() != n {
            return Err(Error::Dimension(
                "fiber dimension and pairing tables must cover every base point".into(),
            ));
        }
        for i in 0..n {
            // strong duality couples D_z with D_{z^{-*}}, so G_z is square
            // and the two fiber dimensions agree
            if fiber_dims[i] != fiber_dims[base.involute(i)] {
                return Err(Error::Dimension(format!(
                    "fiber dimensions at '{}' and its involuted point differ",
                    base.id(i)
                )));
            }
            if pairings[i].dim() != fiber_dims[i] {
                return Err(Error::Dimension(format!(
                    "pairing at '{}' has dimension {} but the fiber has {}",
                    base.id(i),
                    pairings[i].dim(),
                    fiber_dims[i]
                )));
            }
        }
        Ok(Bundle { base, fiber_dims, pairings })
    }

    /// Hermitian bundle: identity involution, standard inner products.
    pub fn hermitian(points: Vec<String>, fiber_dims: Vec<usize>) -> Result<Self> {
        let base = BaseSet::hermitian(points);
        let pairings = fiber_dims.iter().map(|&d| Pairing::standard(d)).collect();
        Bundle::new(base, fiber_dims, pairings)
    }

    pub fn base(&self) -> &BaseSet {
        &self.base
    }

    pub fn n_points(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self, z: usize) -> usize {
        self.fiber_dims[z]
    }

    pub fn pairing(&self, z: usize) -> &Pairing {
        &self.pairings[z]
    }

    /// Pairing evaluation `(xi|eta)_{z,z^{-*}}` with `xi ∈ D_z`,
    /// `eta ∈ D_{z^{-*}}`.
    pub fn pair(&self, z: usize, xi: &CVector, eta: &CVector) -> crate::linalg::C {
        self.pairings[z].eval(xi, eta)
    }

    /// Checks conjugate symmetry `G_{z^{-*}} = G_z^†` and non-degeneracy,
    /// reporting residuals instead of failing.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for z in 0..self.n_points() {
            let zi = self.base.involute(z);
            let g = self.pairings[z].matrix();
            let gi = self.pairings[zi].matrix();
            let sym = max_abs(&(gi - g.adjoint()));
            let scale = max_abs(g).max(1.0);
            if sym > DEFAULT_TOL * scale {
                report.violations.push(format!(
                    "conjugate symmetry broken at '{}' (residual {sym:e})",
                    self.base.id(z)
                ));
            }
            report.max_residual = report.max_residual.max(sym);
            let smin = smallest_singular_value(g);
            if self.dim(z) > 0 && smin <= DEFAULT_TOL * crate::linalg::op_norm(g) {
                report.violations.push(format!(
                    "pairing at '{}' is numerically singular (sigma_min {smin:e})",
                    self.base.id(z)
                ));
            }
        }
        report
    }

    pub fn same_shape(&self, other: &Bundle, tol: f64) -> bool {
        self.base.same_structure(&other.base)
            && self.fiber_dims == other.fiber_dims
            && self
                .pairings
                .iter()
                .zip(&other.pairings)
                .all(|(a, b)| max_abs(&(a.matrix() - b.matrix())) <= tol)
    }
}

/// Bundle (anti)morphism `Θ = (δ, ζ)`: a base map intertwining the
/// involutions and fiber maps `δ_z : D_z → D_{ζ(z)}` (with a conjugation
/// flag in the antilinear case).
#[derive(Debug, Clone)]
pub struct BundleMorphism {
    source: Bundle,
    target: Bundle,
    base_map: Vec<usize>,
    fiber_maps: Vec<CMatrix>,
    antilinear: bool,
}

impl BundleMorphism {
    pub fn new(
        source: Bundle,
        target: Bundle,
        base_map: Vec<usize>,
        fiber_maps: Vec<CMatrix>,
        antilinear: bool,
    ) -> Result<Self> {
        let n = source.n_points();
        if base_map.len() != n || fiber_maps.len() != n {
            return Err(Error::Dimension(
                "base map and fiber maps must cover every source point".into(),
            ));
        }
        for z in 0..n {
            let zt = base_map[z];
            if zt >= target.n_points() {
                return Err(Error::Invalid(format!(
                    "base map sends '{}' out of the target base",
                    source.base().id(z)
                )));
            }
            // ζ(z^{-*}) = ζ(z)^{-*}
            if base_map[source.base().involute(z)] != target.base().involute(zt) {
                return Err(Error::Invalid(format!(
                    "base map does not intertwine the involutions at '{}'",
                    source.base().id(z)
                )));
            }
            let m = &fiber_maps[z];
            if m.nrows() != target.dim(zt) || m.ncols() != source.dim(z) {
                return Err(Error::Dimension(format!(
                    "fiber map at '{}' has shape {}x{}, expected {}x{}",
                    source.base().id(z),
                    m.nrows(),
                    m.ncols(),
                    target.dim(zt),
                    source.dim(z)
                )));
            }
        }
        Ok(BundleMorphism { source, target, base_map, fiber_maps, antilinear })
    }

    pub fn identity(bundle: &Bundle) -> Self {
        let n = bundle.n_points();
        BundleMorphism {
            source: bundle.clone(),
            target: bundle.clone(),
            base_map: (0..n).collect(),
            fiber_maps: (0..n).map(|z| crate::linalg::cidentity(bundle.dim(z))).collect(),
            antilinear: false,
        }
    }

    pub fn source(&self) -> &Bundle {
        &self.source
    }

    pub fn target(&self) -> &Bundle {
        &self.target
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn base_map(&self, z: usize) -> usize {
        self.base_map[z]
    }

    pub fn fiber_map(&self, z: usize) -> &CMatrix {
        &self.fiber_maps[z]
    }

    /// Applies the morphism to a fiber vector: `(ζ(z), δ_z·xi)`, with the
    /// argument conjugated first for antimorphisms.
    pub fn apply(&self, z: usize, xi: &CVector) -> Result<(usize, CVector)> {
        if xi.len() != self.source.dim(z) {
            return Err(Error::Dimension(format!(
                "vector of length {} in fiber of dimension {}",
                xi.len(),
                self.source.dim(z)
            )));
        }
        let arg = if self.antilinear { xi.map(|v| v.conj()) } else { xi.clone() };
        Ok((self.base_map[z], &self.fiber_maps[z] * arg))
    }

    /// The quasi-adjoint `(δ_z)^{-*} : D_{ζ(z)^{-*}} → D_{z^{-*}}`, the
    /// unique operator dual to `δ_z` with respect to the two pairings
    /// (conjugated defining identity in the antilinear case).
    pub fn quasi_adjoint(&self, z: usize) -> Result<CMatrix> {
        let gs = self.source.pairing(z);
        let gt = self.target.pairing(self.base_map[z]);
        if self.antilinear {
            pairing_adjoint_anti(&self.fiber_maps[z], gs, gt)
        } else {
            pairing_adjoint(&self.fiber_maps[z], gs, gt)
        }
    }

    /// Pairing-isometry test over all points and fiber basis pairs;
    /// returns the verdict and the maximal residual.
    pub fn is_isometry(&self) -> (bool, f64) {
        let mut res = 0.0f64;
        for z in 0..self.source.n_points() {
            let zi = self.source.base().involute(z);
            let gt = self.target.pairing(self.base_map[z]).matrix();
            let gs = self.source.pairing(z).matrix();
            // (δ_{z^{-*}} η)^† G_{ζ(z)} (δ_z ξ) against (ξ|η) (conjugated
            // on the right for antimorphisms) in matrix form
            let pulled = self.fiber_maps[zi].adjoint() * gt * &self.fiber_maps[z];
            let reference = if self.antilinear { conj_m(gs) } else { gs.clone() };
            res = res.max(max_abs(&(pulled - reference)));
        }
        (res <= DEFAULT_TOL, res)
    }

    /// Composition `outer ∘ inner`; the antilinearity flags XOR and the
    /// inner matrix is conjugated when the outer map is antilinear.
    pub fn compose(outer: &BundleMorphism, inner: &BundleMorphism) -> Result<BundleMorphism> {
        if !outer.source.same_shape(&inner.target, 1e-12) {
            return Err(Error::Invalid(
                "composition mismatch: inner target differs from outer source".into(),
            ));
        }
        let n = inner.source.n_points();
        let base_map: Vec<usize> = (0..n).map(|z| outer.base_map[inner.base_map[z]]).collect();
        let fiber_maps: Vec<CMatrix> = (0..n)
            .map(|z| {
                let mo = &outer.fiber_maps[inner.base_map[z]];
                let mi = &inner.fiber_maps[z];
                if outer.antilinear {
                    mo * conj_m(mi)
                } else {
                    mo * mi
                }
            })
            .collect();
        BundleMorphism::new(
            inner.source.clone(),
            outer.target.clone(),
            base_map,
            fiber_maps,
            outer.antilinear ^ inner.antilinear,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cidentity, cr, CVector};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("z{i}")).collect()
    }

    /// Two-point base swapped by the involution, non-Hermitian pairings.
    fn swapped_bundle() -> Bundle {
        let base = BaseSet::new(names(2), vec![1, 0]).unwrap();
        let g0 = CMatrix::from_row_slice(2, 2, &[
            cr(1.0), c(0.5, 0.25),
            cr(0.0), cr(2.0),
        ]);
        let g1 = g0.adjoint();
        Bundle::new(
            base,
            vec![2, 2],
            vec![Pairing::new(g0).unwrap(), Pairing::new(g1).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn hermitian_bundle_validates() {
        let b = Bundle::hermitian(names(3), vec![1, 2, 2]).unwrap();
        assert!(b.validate().is_valid());
    }

    #[test]
    fn swapped_bundle_validates() {
        assert!(swapped_bundle().validate().is_valid());
    }

    #[test]
    fn broken_conjugate_symmetry_is_reported() {
        let base = BaseSet::new(names(2), vec![1, 0]).unwrap();
        let g0 = CMatrix::from_row_slice(1, 1, &[c(0.0, 1.0)]);
        let g1 = CMatrix::from_row_slice(1, 1, &[c(0.0, 1.0)]); // should be conj
        let b = Bundle::new(
            base,
            vec![1, 1],
            vec![Pairing::new(g0).unwrap(), Pairing::new(g1).unwrap()],
        )
        .unwrap();
        let report = b.validate();
        assert!(!report.is_valid());
        assert!(report.violations[0].contains("conjugate symmetry"));
    }

    #[test]
    fn non_involutive_base_rejected() {
        assert!(BaseSet::new(names(3), vec![1, 2, 0]).is_err());
    }

    #[test]
    fn identity_morphism_is_isometry_with_identity_quasi_adjoint() {
        let b = swapped_bundle();
        let id = BundleMorphism::identity(&b);
        let (ok, res) = id.is_isometry();
        assert!(ok, "residual {res}");
        for z in 0..2 {
            let qa = id.quasi_adjoint(z).unwrap();
            assert!(max_abs(&(qa - cidentity(2))) < 1e-10);
        }
    }

    #[test]
    fn scaling_by_two_gives_quasi_adjoint_two_and_breaks_isometry() {
        let b = Bundle::hermitian(names(1), vec![2]).unwrap();
        let m = BundleMorphism::new(
            b.clone(),
            b,
            vec![0],
            vec![cidentity(2) * cr(2.0)],
            false,
        )
        .unwrap();
        let qa = m.quasi_adjoint(0).unwrap();
        assert!(max_abs(&(qa - cidentity(2) * cr(2.0))) < 1e-12);
        let (ok, res) = m.is_isometry();
        assert!(!ok);
        assert!((res - 3.0).abs() < 1e-12); // |(2ξ|2η) − (ξ|η)| = 3 on unit pairs
    }

    #[test]
    fn quasi_adjoint_defining_identity_on_swapped_base() {
        let b = swapped_bundle();
        let t = Bundle::hermitian(names(1), vec![3]).unwrap();
        // both source points map to the single Hermitian target point
        let d0 = CMatrix::from_row_slice(3, 2, &[
            cr(1.0), c(0.0, 1.0),
            cr(0.5), cr(-1.0),
            c(2.0, -0.5), cr(0.0),
        ]);
        let d1 = CMatrix::from_row_slice(3, 2, &[
            cr(0.25), cr(1.0),
            c(0.0, -2.0), cr(0.5),
            cr(1.0), c(1.0, 1.0),
        ]);
        let m = BundleMorphism::new(b.clone(), t.clone(), vec![0, 0], vec![d0, d1], false).unwrap();
        for z in 0..2 {
            let a = m.quasi_adjoint(z).unwrap();
            let zi = b.base().involute(z);
            for i in 0..2 {
                let xi = CVector::from_fn(2, |r, _| if r == i { cr(1.0) } else { cr(0.0) });
                for j in 0..3 {
                    let eta = CVector::from_fn(3, |r, _| if r == j { cr(1.0) } else { cr(0.0) });
                    let (_, dxi) = m.apply(z, &xi).unwrap();
                    let lhs = t.pair(0, &dxi, &eta);
                    let rhs = b.pair(z, &xi, &(a.clone() * &eta));
                    let _ = zi;
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quasi_adjoint_of_unitary_isometry_inverts_at_involuted_point() {
        // fiberwise-bijective isometry: (δ_z)^{-*} = (δ_{z^{-*}})^{-1}
        let b = swapped_bundle();
        // build an isometric morphism onto the same bundle: δ_1^† G_0 δ_0 = G_0
        // choose δ_0 arbitrary invertible, δ_1 = G_0^{-†} ... simplest: use
        // identity base map with δ determined by an invertible w: δ_0 = w,
        // δ_1 = (G_0 w G_0^{-1})^{-†}
        let w = CMatrix::from_row_slice(2, 2, &[
            cr(1.0), c(0.5, -1.0),
            cr(0.0), c(0.0, 2.0),
        ]);
        let g0 = b.pairing(0).matrix().clone();
        let tmp = &g0 * &w * crate::linalg::solve(&g0, &cidentity(2)).unwrap();
        let d1 = crate::linalg::solve(&tmp.adjoint(), &cidentity(2)).unwrap();
        let m = BundleMorphism::new(b.clone(), b.clone(), vec![0, 1], vec![w, d1], false).unwrap();
        let (ok, res) = m.is_isometry();
        assert!(ok, "residual {res}");
        for z in 0..2 {
            let zi = b.base().involute(z);
            let qa = m.quasi_adjoint(z).unwrap();
            let inv = crate::linalg::solve(m.fiber_map(zi), &cidentity(2)).unwrap();
            assert!(max_abs(&(qa - inv)) < 1e-9);
        }
    }

    #[test]
    fn compose_matches_matrix_products_and_flag_rules() {
        let b = Bundle::hermitian(names(2), vec![2, 2]).unwrap();
        let m1 = BundleMorphism::new(
            b.clone(),
            b.clone(),
            vec![1, 0],
            vec![
                CMatrix::from_row_slice(2, 2, &[cr(1.0), c(0.0, 1.0), cr(2.0), cr(0.0)]),
                CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), c(1.0, -1.0), cr(3.0)]),
            ],
            false,
        )
        .unwrap();
        let m2 = BundleMorphism::new(
            b.clone(),
            b.clone(),
            vec![0, 1],
            vec![
                CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.0), c(0.0, -2.0), cr(1.0)]),
                CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(0.0), c(2.0, 1.0)]),
            ],
            true,
        )
        .unwrap();
        // linear ∘ identity = same maps
        let id = BundleMorphism::identity(&b);
        let comp = BundleMorphism::compose(&m1, &id).unwrap();
        for z in 0..2 {
            assert!(max_abs(&(comp.fiber_map(z) - m1.fiber_map(z))) < 1e-14);
        }
        // antimorphism ∘ antimorphism = morphism
        let mm = BundleMorphism::compose(&m2, &m2).unwrap();
        assert!(!mm.is_antilinear());
        // action agrees with sequential application on a sample vector
        let xi = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.25)]);
        let (p1, v1) = m2.apply(0, &xi).unwrap();
        let (p2, v2) = m2.apply(p1, &v1).unwrap();
        let (pc, vc) = mm.apply(0, &xi).unwrap();
        assert_eq!(p2, pc);
        assert!((v2 - vc).norm() < 1e-12);
        // mixed composition flag
        let mix = BundleMorphism::compose(&m1, &m2).unwrap();
        assert!(mix.is_antilinear());
        let (q1, w1) = m2.apply(1, &xi).unwrap();
        let (q2, w2) = m1.apply(q1, &w1).unwrap();
        let (qc, wc) = mix.apply(1, &xi).unwrap();
        assert_eq!(q2, qc);
        assert!((w2 - wc).norm() < 1e-12);
    }

    #[test]
    fn antilinear_apply_conjugates() {
        let b = Bundle::hermitian(names(1), vec![2]).unwrap();
        let m = BundleMorphism::new(b.clone(), b, vec![0], vec![cidentity(2)], true).unwrap();
        let xi = CVector::from_vec(vec![c(0.0, 1.0), cr(0.0)]);
        let (_, out) = m.apply(0, &xi).unwrap();
        assert!((out[0] - c(0.0, -1.0)).norm() < 1e-15);
    }
}
