//! Completely positive maps on finite-dimensional C*-algebras, the
//! Stinespring construction, GNS as its one-dimensional case, the
//! two-squares lemma, and morphism bounds for the CPos category.
//!
//! Algebras are direct sums of full matrix blocks embedded block-diagonally
//! into `M_N`; complete positivity is decided by the Choi criterion (with
//! the definitional amplification test retained as a cross-check in the
//! test suite).

use crate::error::{Error, Result};
use crate::kernel::{form_bound, HomBound};
use crate::linalg::{
    cidentity, cr, czeros, gram_quotient, max_abs, pinv, psd_check, CMatrix, CVector,
    GramQuotient, C,
};

/// Direct sum of full matrix algebras, embedded into `M_N`,
/// `N = sum of block sizes`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAlgebra {
    block_sizes: Vec<usize>,
}

impl MatrixAlgebra {
    pub fn full(n: usize) -> Self {
        MatrixAlgebra { block_sizes: vec![n] }
    }

    pub fn direct_sum(block_sizes: Vec<usize>) -> Self {
        assert!(!block_sizes.is_empty() && block_sizes.iter().all(|&s| s > 0));
        MatrixAlgebra { block_sizes }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Size `N` of the ambient matrix space.
    pub fn ambient_dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Linear dimension (sum of squared block sizes).
    pub fn dim(&self) -> usize {
        self.block_sizes.iter().map(|s| s * s).sum()
    }

    pub fn unit(&self) -> CMatrix {
        cidentity(self.ambient_dim())
    }

    /// Positions `(row, col)` of the matrix units, in basis order.
    fn unit_positions(&self) -> Vec<(usize, usize)> {
        let mut pos = Vec::with_capacity(self.dim());
        let mut off = 0;
        for &s in &self.block_sizes {
            for i in 0..s {
                for j in 0..s {
                    pos.push((off + i, off + j));
                }
            }
            off += s;
        }
        pos
    }

    /// Embedded matrix units `e_{ij}` of every block, in basis order.
    pub fn basis(&self) -> Vec<CMatrix> {
        let n = self.ambient_dim();
        self.unit_positions()
            .into_iter()
            .map(|(i, j)| {
                let mut m = czeros(n, n);
                m[(i, j)] = cr(1.0);
                m
            })
            .collect()
    }

    /// Block-diagonal truncation of an ambient matrix onto the algebra
    /// (a conditional expectation `M_N → A`).
    pub fn truncate(&self, m: &CMatrix) -> CMatrix {
        let n = self.ambient_dim();
        let mut out = czeros(n, n);
        for (i, j) in self.unit_positions() {
            out[(i, j)] = m[(i, j)];
        }
        out
    }

    pub fn contains(&self, m: &CMatrix, tol: f64) -> bool {
        m.nrows() == self.ambient_dim()
            && m.ncols() == self.ambient_dim()
            && max_abs(&(m - self.truncate(m))) <= tol * max_abs(m).max(1.0)
    }

    /// Coefficients over the matrix-unit basis; the matrix must lie in the
    /// embedded algebra.
    pub fn coords(&self, m: &CMatrix) -> Result<CVector> {
        if !self.contains(m, 1e-9) {
            return Err(Error::Invalid("matrix lies outside the embedded algebra".into()));
        }
        Ok(CVector::from_iterator(
            self.dim(),
            self.unit_positions().into_iter().map(|(i, j)| m[(i, j)]),
        ))
    }

    pub fn from_coords(&self, c: &CVector) -> CMatrix {
        let n = self.ambient_dim();
        let mut out = czeros(n, n);
        for (k, (i, j)) in self.unit_positions().into_iter().enumerate() {
            out[(i, j)] = c[k];
        }
        out
    }

    /// Matrix of left multiplication by `a` on basis coordinates.
    pub fn left_mult(&self, a: &CMatrix) -> Result<CMatrix> {
        let d = self.dim();
        let mut out = czeros(d, d);
        for (k, b) in self.basis().iter().enumerate() {
            let col = self.coords(&(a * b))?;
            out.set_column(k, &col);
        }
        Ok(out)
    }
}

/// Linear map `Φ : A → B(C^m)` given by its values on the matrix-unit
/// basis of the domain algebra.
#[derive(Debug, Clone)]
pub struct CpMap {
    domain: MatrixAlgebra,
    codomain_dim: usize,
    action: Vec<CMatrix>,
}

impl CpMap {
    pub fn new(domain: MatrixAlgebra, codomain_dim: usize, action: Vec<CMatrix>) -> Result<Self> {
        if action.len() != domain.dim() {
            return Err(Error::Dimension(format!(
                "action table has {} entries for an algebra of dimension {}",
                action.len(),
                domain.dim()
            )));
        }
        for m in &action {
            if m.nrows() != codomain_dim || m.ncols() != codomain_dim {
                return Err(Error::Dimension("codomain block of wrong shape".into()));
            }
        }
        Ok(CpMap { domain, codomain_dim, action })
    }

    /// Kraus form `Φ(a) = Σ V_i^† a V_i` on a full matrix algebra, with
    /// `V_i : C^m → C^n`.
    pub fn from_kraus(n: usize, kraus: &[CMatrix]) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Invalid("at least one Kraus operator required".into()));
        }
        let m = kraus[0].ncols();
        for v in kraus {
            if v.nrows() != n || v.ncols() != m {
                return Err(Error::Dimension("Kraus operators of inconsistent shape".into()));
            }
        }
        let domain = MatrixAlgebra::full(n);
        let action = domain
            .basis()
            .iter()
            .map(|e| {
                let mut out = czeros(m, m);
                for v in kraus {
                    out += v.adjoint() * e * v;
                }
                out
            })
            .collect();
        CpMap::new(domain, m, action)
    }

    /// The transpose map on `M_n` (the standard non-CP positive map).
    pub fn transpose_map(n: usize) -> Self {
        let domain = MatrixAlgebra::full(n);
        let action = domain.basis().iter().map(|e| e.transpose()).collect();
        CpMap { domain, codomain_dim: n, action }
    }

    pub fn domain(&self) -> &MatrixAlgebra {
        &self.domain
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        let c = self.domain.coords(a)?;
        let mut out = czeros(self.codomain_dim, self.codomain_dim);
        for (k, m) in self.action.iter().enumerate() {
            out += m * c[k];
        }
        Ok(out)
    }

    pub fn is_unital(&self, tol: f64) -> Result<bool> {
        let u = self.apply(&self.domain.unit())?;
        Ok(max_abs(&(u - cidentity(self.codomain_dim))) <= tol)
    }

    /// `Φ(a^*) = Φ(a)^†` residual over the basis.
    pub fn selfadjointness_residual(&self) -> Result<f64> {
        let mut res = 0.0f64;
        for b in self.domain.basis() {
            let lhs = self.apply(&b.adjoint())?;
            let rhs = self.apply(&b)?.adjoint();
            res = res.max(max_abs(&(lhs - rhs)));
        }
        Ok(res)
    }

    /// Choi matrix `Σ_{ij} E_{ij} ⊗ Φ(P_A(E_{ij}))` over ambient matrix
    /// units, with `P_A` the block truncation; for a full algebra this is
    /// the standard Choi matrix, and PSD of it is equivalent to complete
    /// positivity of `Φ` on the direct sum.
    pub fn choi_matrix(&self) -> Result<CMatrix> {
        let n = self.domain.ambient_dim();
        let m = self.codomain_dim;
        let mut choi = czeros(n * m, n * m);
        for i in 0..n {
            for j in 0..n {
                let mut e = czeros(n, n);
                e[(i, j)] = cr(1.0);
                let phi = self.apply(&self.domain.truncate(&e))?;
                for p in 0..m {
                    for q in 0..m {
                        choi[(i * m + p, j * m + q)] = phi[(p, q)];
                    }
                }
            }
        }
        Ok(choi)
    }

    pub fn is_completely_positive(&self) -> Result<bool> {
        Ok(psd_check(&self.choi_matrix()?)?.is_psd)
    }
}

/// Stinespring dilation data: the representation space `K₀ ≅ C^r` obtained
/// by quotienting `A ⊗ H₀` by the null space of the CP form, the
/// representation `π_Φ` by left multiplication, and the isometry `V`
/// embedding `H₀` as the class of `1 ⊗ h`.
#[derive(Debug, Clone)]
pub struct StinespringData {
    domain: MatrixAlgebra,
    codomain_dim: usize,
    pub space_dim: usize,
    rep_images: Vec<CMatrix>,
    pub isometry: CMatrix,
    pub quotient: GramQuotient,
    /// residual of `V^†V = I`
    pub isometry_residual: f64,
    /// residual of multiplicativity and *-preservation of `π_Φ` on basis pairs
    pub rep_residual: f64,
    /// residual of `Φ(a) = V^† π_Φ(a) V` on the algebra basis
    pub dilation_residual: f64,
}

impl StinespringData {
    /// `π_Φ(a)` for an arbitrary element of the embedded algebra.
    pub fn rep(&self, a: &CMatrix) -> Result<CMatrix> {
        let c = self.domain.coords(a)?;
        let mut out = czeros(self.space_dim, self.space_dim);
        for (k, m) in self.rep_images.iter().enumerate() {
            out += m * c[k];
        }
        Ok(out)
    }

    pub fn rep_basis_image(&self, k: usize) -> &CMatrix {
        &self.rep_images[k]
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    /// Coordinates in `K₀` of the class of `a ⊗ h`.
    pub fn class_of(&self, a: &CMatrix, h: &CVector) -> Result<CVector> {
        let c = self.domain.coords(a)?;
        let mut coord = CVector::zeros(self.space_dim);
        let m = self.codomain_dim;
        for k in 0..self.domain.dim() {
            for p in 0..m {
                coord += self.quotient.embedding.column(k * m + p) * (c[k] * h[p]);
            }
        }
        Ok(coord)
    }
}

/// Gram matrix of `A ⊗ H₀` under the CP form
/// `(a_k⊗e_p, a_l⊗e_q) ↦ (Φ(a_k^* a_l) e_q | e_p)`.
fn cp_form_gram(phi: &CpMap) -> Result<CMatrix> {
    let basis = phi.domain.basis();
    let d = basis.len();
    let m = phi.codomain_dim;
    let mut gram = czeros(d * m, d * m);
    for k in 0..d {
        for l in 0..d {
            let block = phi.apply(&(basis[k].adjoint() * &basis[l]))?;
            for p in 0..m {
                for q in 0..m {
                    gram[(k * m + p, l * m + q)] = block[(p, q)];
                }
            }
        }
    }
    Ok(gram)
}

pub fn stinespring(phi: &CpMap) -> Result<StinespringData> {
    if !phi.is_unital(1e-8)? {
        return Err(Error::Precondition("Stinespring construction needs a unital map".into()));
    }
    if !phi.is_completely_positive()? {
        return Err(Error::Precondition("Stinespring construction needs a completely positive map".into()));
    }
    let gram = cp_form_gram(phi)?;
    let quotient = gram_quotient(&gram)?;
    let w = quotient.embedding.clone();
    let w_pinv = pinv(&w);
    let m = phi.codomain_dim;
    let r = quotient.rank;
    let basis = phi.domain.basis();

    // π(a) acts as left multiplication on representatives
    let mut rep_images = Vec::with_capacity(basis.len());
    for b in &basis {
        let lm = phi.domain.left_mult(b)?;
        let op = &w * lm.kronecker(&cidentity(m)) * &w_pinv;
        rep_images.push(op);
    }

    // V e_h = class of 1 ⊗ e_h
    let unit_coords = phi.domain.coords(&phi.domain.unit())?;
    let mut isometry = czeros(r, m);
    for h in 0..m {
        let mut col = CVector::zeros(r);
        for k in 0..basis.len() {
            col += w.column(k * m + h) * unit_coords[k];
        }
        isometry.set_column(h, &col);
    }

    let data = StinespringData {
        domain: phi.domain.clone(),
        codomain_dim: m,
        space_dim: r,
        rep_images,
        isometry,
        quotient,
        isometry_residual: 0.0,
        rep_residual: 0.0,
        dilation_residual: 0.0,
    };

    // self-verification residuals
    let isometry_residual = max_abs(&(data.isometry.adjoint() * &data.isometry - cidentity(m)));
    let mut rep_residual = 0.0f64;
    for (k, bk) in basis.iter().enumerate() {
        let star = data.rep(&bk.adjoint())?;
        rep_residual = rep_residual.max(max_abs(&(star - data.rep_images[k].adjoint())));
        for (l, bl) in basis.iter().enumerate() {
            let prod = data.rep(&(bk * bl))?;
            rep_residual =
                rep_residual.max(max_abs(&(prod - &data.rep_images[k] * &data.rep_images[l])));
        }
    }
    let mut dilation_residual = 0.0f64;
    for (k, bk) in basis.iter().enumerate() {
        let lhs = phi.apply(bk)?;
        let rhs = data.isometry.adjoint() * &data.rep_images[k] * &data.isometry;
        dilation_residual = dilation_residual.max(max_abs(&(lhs - rhs)));
    }
    Ok(StinespringData { isometry_residual, rep_residual, dilation_residual, ..data })
}

/// GNS construction: the Stinespring dilation of a state (`H₀ = C`).
/// The state is supplied by its values on the matrix-unit basis.
pub fn gns(domain: MatrixAlgebra, values: &[C]) -> Result<StinespringData> {
    if values.len() != domain.dim() {
        return Err(Error::Dimension("state values must cover the algebra basis".into()));
    }
    let action: Vec<CMatrix> =
        values.iter().map(|v| CMatrix::from_row_slice(1, 1, &[*v])).collect();
    let phi = CpMap::new(domain, 1, action)?;
    if !phi.is_unital(1e-8)? {
        return Err(Error::Precondition("a state must satisfy φ(1) = 1".into()));
    }
    if !phi.is_completely_positive()? {
        return Err(Error::Precondition("a state must be a positive functional".into()));
    }
    stinespring(&phi)
}

/// Evaluates a functional given on the basis at an algebra element.
pub fn functional_at(domain: &MatrixAlgebra, values: &[C], a: &CMatrix) -> Result<C> {
    let c = domain.coords(a)?;
    Ok((0..values.len()).map(|k| values[k] * c[k]).sum())
}

/// A subalgebra `B ⊆ M_N` presented abstractly together with its embedding.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    algebra: MatrixAlgebra,
    images: Vec<CMatrix>, // embedded image of each abstract basis element
}

impl Subalgebra {
    pub fn new(algebra: MatrixAlgebra, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != algebra.dim() {
            return Err(Error::Dimension("one embedded image per basis element required".into()));
        }
        Ok(Subalgebra { algebra, images })
    }

    /// The diagonal subalgebra `C^n ⊆ M_n`.
    pub fn diagonal(n: usize) -> Self {
        let algebra = MatrixAlgebra::direct_sum(vec![1; n]);
        let images = (0..n)
            .map(|i| {
                let mut m = czeros(n, n);
                m[(i, i)] = cr(1.0);
                m
            })
            .collect();
        Subalgebra { algebra, images }
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn image(&self, k: usize) -> &CMatrix {
        &self.images[k]
    }

    pub fn embed_coords(&self, c: &CVector) -> CMatrix {
        let n = self.images[0].nrows();
        let mut out = czeros(n, n);
        for (k, img) in self.images.iter().enumerate() {
            out += img * c[k];
        }
        out
    }

    /// Abstract coordinates of an embedded element; errors when the matrix
    /// is not in the span within tolerance.
    pub fn coords_of(&self, m: &CMatrix) -> Result<CVector> {
        let n = m.nrows() * m.ncols();
        let mut span = czeros(n, self.images.len());
        for (k, img) in self.images.iter().enumerate() {
            span.set_column(k, &CVector::from_iterator(n, img.iter().cloned()));
        }
        let v = CVector::from_iterator(n, m.iter().cloned());
        let c = pinv(&span) * &v;
        let res = (&span * &c - &v).norm();
        if res > 1e-8 * v.norm().max(1.0) {
            return Err(Error::Invalid(format!(
                "matrix is not in the subalgebra (residual {res:e})"
            )));
        }
        Ok(c)
    }

    pub fn contains(&self, m: &CMatrix, tol: f64) -> bool {
        match self.coords_of(m) {
            Ok(c) => max_abs(&(self.embed_coords(&c) - m)) <= tol * max_abs(m).max(1.0),
            Err(_) => false,
        }
    }

    /// Restriction of a CP map along the embedding.
    pub fn restrict(&self, phi: &CpMap) -> Result<CpMap> {
        let action = self
            .images
            .iter()
            .map(|img| phi.apply(img))
            .collect::<Result<Vec<_>>>()?;
        CpMap::new(self.algebra.clone(), phi.codomain_dim(), action)
    }
}

#[derive(Debug, Clone)]
pub struct TwoSquaresReport {
    pub pass: bool,
    /// residual of `P ∘ ι_{h₀} = ι_{h₀} ∘ E` over basis elements
    pub first_square_residual: f64,
    /// residual of `P ∘ π_A(b) = π_B(b) ∘ P` over the subalgebra basis
    pub second_square_residual: f64,
    /// well-definedness defect of `P` on the quotient
    pub projection_defect: f64,
}

/// The two-squares lemma: for a conditional expectation `E : A → B` and a
/// unital CP map `Φ` with `Φ∘E = Φ`, the map
/// `P(class_A(Σ a_i ⊗ y_i)) = class_B(Σ E(a_i) ⊗ y_i)` intertwines the two
/// Stinespring constructions.
pub fn two_squares(
    expectation: &dyn Fn(&CMatrix) -> CMatrix,
    phi: &CpMap,
    sub: &Subalgebra,
) -> Result<TwoSquaresReport> {
    let a = phi.domain();
    let n = a.ambient_dim();
    let basis = a.basis();
    // validate E: unital, idempotent, range in B, B-bimodule property
    if max_abs(&(expectation(&a.unit()) - a.unit())) > 1e-9 {
        return Err(Error::Precondition("expectation is not unital".into()));
    }
    for b in &basis {
        let e1 = expectation(b);
        if max_abs(&(expectation(&e1) - &e1)) > 1e-9 * max_abs(&e1).max(1.0) {
            return Err(Error::Precondition("expectation is not idempotent".into()));
        }
        if !sub.contains(&e1, 1e-8) {
            return Err(Error::Precondition("expectation range is not inside B".into()));
        }
        // Φ∘E = Φ
        let lhs = phi.apply(&expectation(b))?;
        let rhs = phi.apply(b)?;
        if max_abs(&(lhs - rhs)) > 1e-8 * max_abs(&phi.apply(b)?).max(1.0) {
            return Err(Error::Precondition("Φ ∘ E differs from Φ".into()));
        }
    }
    // module property on a few deterministic triples b₁ a b₂
    for (i, b1) in sub.images.iter().enumerate().take(2) {
        for b2 in sub.images.iter().take(2) {
            for a_el in basis.iter().take(3) {
                let lhs = expectation(&(b1 * a_el * b2));
                let rhs = b1 * expectation(a_el) * b2;
                if max_abs(&(lhs - rhs)) > 1e-8 {
                    return Err(Error::Precondition(format!(
                        "expectation violates the B-module property (basis {i})"
                    )));
                }
            }
        }
    }
    let _ = n;

    let st_a = stinespring(phi)?;
    let phi_b = sub.restrict(phi)?;
    let st_b = stinespring(&phi_b)?;
    let m = phi.codomain_dim();

    // coordinates of E over the two coordinate systems: d_B x d_A
    let mut e_mat = czeros(sub.algebra.dim(), a.dim());
    for (k, bk) in basis.iter().enumerate() {
        e_mat.set_column(k, &sub.coords_of(&expectation(bk))?);
    }
    let wa = &st_a.quotient.embedding;
    let wb = &st_b.quotient.embedding;
    let lift = e_mat.kronecker(&cidentity(m));
    let p = wb * &lift * pinv(wa);
    let projection_defect = max_abs(&(&p * wa - wb * &lift));

    // first square on classes of a ⊗ e_h
    let mut first = 0.0f64;
    for bk in &basis {
        for h in 0..m {
            let eh = CVector::from_fn(m, |r, _| if r == h { cr(1.0) } else { cr(0.0) });
            let lhs = &p * st_a.class_of(bk, &eh)?;
            let rhs = st_b.class_of(&sub.embed_coords(&sub.coords_of(&expectation(bk))?), &eh)?;
            // class_of on the B side works with the embedded picture of B
            let rhs_b = {
                let c = sub.coords_of(&expectation(bk))?;
                let mut coord = CVector::zeros(st_b.space_dim);
                for k2 in 0..sub.algebra.dim() {
                    for pdx in 0..m {
                        coord += st_b.quotient.embedding.column(k2 * m + pdx) * (c[k2] * eh[pdx]);
                    }
                }
                coord
            };
            let _ = rhs;
            first = first.max((lhs - rhs_b).norm());
        }
    }

    // second square on the subalgebra basis
    let mut second = 0.0f64;
    for k in 0..sub.algebra.dim() {
        let pa = st_a.rep(sub.image(k))?;
        let pb = st_b.rep_basis_image(k);
        second = second.max(max_abs(&(&p * pa - pb * &p)));
    }

    let pass = projection_defect <= 1e-8 && first <= 1e-8 && second <= 1e-8;
    Ok(TwoSquaresReport {
        pass,
        first_square_residual: first,
        second_square_residual: second,
        projection_defect,
    })
}

/// A CPos-category morphism candidate `(α, T)` from `Φ̃ : Ã → B(H̃₀)` to
/// `Φ : A → B(H₀)`: a unital *-homomorphism given by its values on the
/// basis of `Ã`, and a linear `T : H̃₀ → H₀`.
pub struct CposMorphism {
    pub alpha: Vec<CMatrix>,
    pub t: CMatrix,
}

impl CposMorphism {
    pub fn alpha_at(&self, src: &MatrixAlgebra, a: &CMatrix) -> Result<CMatrix> {
        let c = src.coords(a)?;
        let n = self.alpha[0].nrows();
        let mut out = czeros(n, n);
        for (k, img) in self.alpha.iter().enumerate() {
            out += img * c[k];
        }
        Ok(out)
    }

    fn validate_star_hom(&self, src: &MatrixAlgebra) -> Result<()> {
        if self.alpha.len() != src.dim() {
            return Err(Error::Dimension("α must be given on the full basis".into()));
        }
        let basis = src.basis();
        for (k, bk) in basis.iter().enumerate() {
            let star = self.alpha_at(src, &bk.adjoint())?;
            if max_abs(&(star - self.alpha[k].adjoint())) > 1e-8 {
                return Err(Error::Precondition("α does not preserve adjoints".into()));
            }
            for (l, bl) in basis.iter().enumerate() {
                let prod = self.alpha_at(src, &(bk * bl))?;
                if max_abs(&(prod - &self.alpha[k] * &self.alpha[l])) > 1e-8 {
                    return Err(Error::Precondition("α is not multiplicative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Least `M` in the complete-positivity inequality for `(α, T)`, computed
/// over the determining family of positive matrices `(a_k^* a_l)` built
/// from the algebra basis against full codomain bases, plus its equality
/// residual (for the extremal `M = 1` cases).
pub fn cpos_morphism_bound(
    mor: &CposMorphism,
    phi_src: &CpMap,
    phi_tgt: &CpMap,
) -> Result<(HomBound, f64)> {
    mor.validate_star_hom(&phi_src.domain)?;
    if mor.t.ncols() != phi_src.codomain_dim() || mor.t.nrows() != phi_tgt.codomain_dim() {
        return Err(Error::Dimension("T must map the source H₀ into the target H₀".into()));
    }
    let source = cp_form_gram(phi_src)?;
    let basis = phi_src.domain.basis();
    let d = basis.len();
    let m = phi_src.codomain_dim();
    let mut pulled = czeros(d * m, d * m);
    for k in 0..d {
        for l in 0..d {
            let img = mor.alpha[k].adjoint() * &mor.alpha[l];
            let block = mor.t.adjoint() * phi_tgt.apply(&img)? * &mor.t;
            for p in 0..m {
                for q in 0..m {
                    pulled[(k * m + p, l * m + q)] = block[(p, q)];
                }
            }
        }
    }
    let bound = form_bound(&pulled, &source)?;
    let equality_residual = max_abs(&(&pulled - &source));
    Ok((bound, equality_residual))
}

/// The quotient operator induced by `α ⊗ T` between the two Stinespring
/// spaces, gated by the complete-positivity bound.
pub fn tensor_morphism(
    mor: &CposMorphism,
    phi_src: &CpMap,
    phi_tgt: &CpMap,
) -> Result<CMatrix> {
    let (bound, _) = cpos_morphism_bound(mor, phi_src, phi_tgt)?;
    if !bound.is_morphism {
        return Err(Error::NotMorphism(format!(
            "(α, T) violates the positivity inequality (null defect {:e})",
            bound.null_residual
        )));
    }
    let st_src = stinespring(phi_src)?;
    let st_tgt = stinespring(phi_tgt)?;
    // coordinates of α as a d_src → d_tgt matrix
    let mut a_mat = czeros(phi_tgt.domain.dim(), phi_src.domain.dim());
    for (k, img) in mor.alpha.iter().enumerate() {
        a_mat.set_column(k, &phi_tgt.domain.coords(img)?);
    }
    let lift = a_mat.kronecker(&mor.t);
    let x = &st_tgt.quotient.embedding * &lift * pinv(&st_src.quotient.embedding);
    let defect = max_abs(&(&x * &st_src.quotient.embedding - &st_tgt.quotient.embedding * &lift));
    if defect > 1e-7 {
        return Err(Error::NotMorphism(format!(
            "α ⊗ T is not well defined on the quotient (defect {defect:e})"
        )));
    }
    // intertwining: X π̃(u) = π(α(u)) X on the source basis
    for (k, img) in mor.alpha.iter().enumerate() {
        let lhs = &x * st_src.rep_basis_image(k);
        let rhs = st_tgt.rep(img)? * &x;
        if max_abs(&(lhs - rhs)) > 1e-7 {
            return Err(Error::NotMorphism("α ⊗ T fails to intertwine the representations".into()));
        }
    }
    Ok(x)
}

#[derive(Debug, Clone)]
pub struct CompressionFactorization {
    /// residual of `Φ(a) = V^† Φ_{V(H₀)}(π_A(a)) V` over the basis
    pub factorization_residual: f64,
    /// the morphism bound of `(π_A, V)`; equals 1 with equality
    pub least_m: f64,
    pub equality_residual: f64,
    pub pass: bool,
}

/// Factorization of a unital CP map through the compression to `V(H₀)`
/// inside its Stinespring space, together with the extremal `M = 1`
/// morphism property of `(π_A, V)`.
pub fn compression_factorization(phi: &CpMap) -> Result<CompressionFactorization> {
    let st = stinespring(phi)?;
    let v_subspace = crate::linalg::orthonormal_basis(&st.isometry);
    if v_subspace.dim() != phi.codomain_dim() {
        return Err(Error::Precondition("Stinespring isometry is rank-deficient".into()));
    }
    let phi_k = crate::grassmann::compression_map(&v_subspace, &full_space(st.space_dim))?;
    // the coordinate change H₀ → V(H₀) in the stored basis of the subspace
    let coord = v_subspace.basis().adjoint() * &st.isometry;
    let mut factorization_residual = 0.0f64;
    for (k, bk) in phi.domain.basis().iter().enumerate() {
        let compressed = phi_k.apply(st.rep_basis_image(k))?;
        let rhs = coord.adjoint() * compressed * &coord;
        let lhs = phi.apply(bk)?;
        factorization_residual = factorization_residual.max(max_abs(&(lhs - rhs)));
    }
    // (π_A, V) as a CPos morphism from Φ into Φ_{V(H₀)}
    let mor = CposMorphism {
        alpha: (0..phi.domain.dim()).map(|k| st.rep_basis_image(k).clone()).collect(),
        t: coord.clone(),
    };
    let (bound, equality_residual) = cpos_morphism_bound(&mor, phi, &phi_k)?;
    let pass = factorization_residual <= 1e-8
        && bound.is_morphism
        && (bound.least_m - 1.0).abs() <= 1e-8
        && equality_residual <= 1e-8;
    Ok(CompressionFactorization {
        factorization_residual,
        least_m: bound.least_m,
        equality_residual,
        pass,
    })
}

fn full_space(n: usize) -> crate::linalg::Subspace {
    crate::linalg::orthonormal_basis(&cidentity(n))
}
