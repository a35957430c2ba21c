//! Reproducing (-*)-kernels: positivity, the RKHS construction, morphism
//! bounds, induced operators between RKHS spaces, kernel pull-backs, and
//! conjugations.
//!
//! A kernel assigns to every base pair `(s,t)` a block `K(s,t): D_t → D_s`.
//! Positivity is taken with respect to the bundle pairings: the Gram matrix
//! with entries `(K(s^{-*},t) e_b | e_a)_{s^{-*},s}` over all points and
//! fiber basis vectors must be positive semidefinite.  The same Gram matrix
//! is the inner product table of the generators `K_xi = K(·,s)xi` of the
//! reproducing kernel Hilbert space `H^K`.

use crate::bundle::{Bundle, BundleMorphism};
use crate::error::{Error, Result};
use crate::linalg::{
    self, cidentity, conj_m, cr, czeros, gram_quotient, hermitian_eigen, max_abs, op_norm, pinv,
    psd_check, CMatrix, CVector, GramQuotient, C, DEFAULT_TOL,
};

#[derive(Debug, Clone)]
pub struct Kernel {
    bundle: Bundle,
    blocks: Vec<CMatrix>, // row-major over (s, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub min_eigenvalue: f64,
}

impl Kernel {
    pub fn from_blocks(bundle: Bundle, blocks: Vec<CMatrix>) -> Result<Self> {
        let n = bundle.n_points();
        if blocks.len() != n * n {
            return Err(Error::MissingBlock(
                "complete block table required".into(),
                format!("got {} of {}", blocks.len(), n * n),
            ));
        }
        for s in 0..n {
            for t in 0..n {
                let b = &blocks[s * n + t];
                if b.nrows() != bundle.dim(s) || b.ncols() != bundle.dim(t) {
                    return Err(Error::Dimension(format!(
                        "block ({}, {}) has shape {}x{}, expected {}x{}",
                        bundle.base().id(s),
                        bundle.base().id(t),
                        b.nrows(),
                        b.ncols(),
                        bundle.dim(s),
                        bundle.dim(t)
                    )));
                }
            }
        }
        Ok(Kernel { bundle, blocks })
    }

    pub fn from_fn(bundle: Bundle, f: impl Fn(usize, usize) -> CMatrix) -> Result<Self> {
        let n = bundle.n_points();
        let blocks = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Kernel::from_blocks(bundle, blocks)
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn block(&self, s: usize, t: usize) -> &CMatrix {
        &self.blocks[s * self.bundle.n_points() + t]
    }

    /// Generator list of `H^K`: every (base point, fiber basis index).
    pub fn generators(&self) -> Vec<(usize, usize)> {
        let mut g = Vec::new();
        for s in 0..self.bundle.n_points() {
            for a in 0..self.bundle.dim(s) {
                g.push((s, a));
            }
        }
        g
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0usize];
        for s in 0..self.bundle.n_points() {
            off.push(off[s] + self.bundle.dim(s));
        }
        off
    }

    /// Gram matrix of the generators: entry for row `(s,a)`, column `(t,b)`
    /// is `(K(s^{-*},t) e_b | e_a)_{s^{-*},s}`, i.e. the block
    /// `G_{s^{-*}} K(s^{-*}, t)`.  Positive semidefiniteness of this matrix
    /// is the (-*)-positivity of the kernel.
    pub fn gram(&self) -> CMatrix {
        let n = self.bundle.n_points();
        let off = self.offsets();
        let total = off[n];
        let mut gram = czeros(total, total);
        for s in 0..n {
            let si = self.bundle.base().involute(s);
            let left = self.bundle.pairing(si).matrix();
            for t in 0..n {
                let block = left * self.block(si, t);
                for a in 0..self.bundle.dim(s) {
                    for b in 0..self.bundle.dim(t) {
                        gram[(off[s] + a, off[t] + b)] = block[(a, b)];
                    }
                }
            }
        }
        gram
    }

    pub fn check_positive(&self) -> Result<PositivityReport> {
        let report = psd_check(&self.gram())?;
        Ok(PositivityReport {
            positive: report.is_psd,
            min_eigenvalue: report.min_eigenvalue,
        })
    }

    /// `K(s,t)^{-*} : D_{s^{-*}} → D_{t^{-*}}`, the quasi-adjoint of the
    /// block with respect to the pairings at `t` (source) and `s` (target).
    pub fn kernel_adjoint(&self, s: usize, t: usize) -> Result<CMatrix> {
        linalg::pairing_adjoint(self.block(s, t), self.bundle.pairing(t), self.bundle.pairing(s))
    }

    /// Maximal residual of the exchange identity
    /// `K(s,t)^{-*} = K(t^{-*}, s^{-*})` over all block pairs.
    pub fn exchange_residual(&self) -> Result<f64> {
        let n = self.bundle.n_points();
        let mut res = 0.0f64;
        for s in 0..n {
            for t in 0..n {
                let adj = self.kernel_adjoint(s, t)?;
                let other = self.block(self.bundle.base().involute(t), self.bundle.base().involute(s));
                res = res.max(max_abs(&(adj - other)));
            }
        }
        Ok(res)
    }

    /// Pointwise sum (cone structure); bundles must coincide.
    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        if !self.bundle.same_shape(&other.bundle, 1e-12) {
            return Err(Error::Invalid("kernel sum over different bundles".into()));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Kernel::from_blocks(self.bundle.clone(), blocks)
    }

    pub fn scale(&self, factor: f64) -> Kernel {
        let blocks = self.blocks.iter().map(|b| b * cr(factor)).collect();
        Kernel { bundle: self.bundle.clone(), blocks }
    }
}

/// The reproducing kernel Hilbert space `H^K`, realized as `C^r` through a
/// quotient of the generator Gram matrix.
#[derive(Debug, Clone)]
pub struct Rkhs {
    kernel: Kernel,
    generators: Vec<(usize, usize)>,
    quotient: GramQuotient,
    offsets: Vec<usize>,
}

impl Rkhs {
    pub fn build(kernel: Kernel) -> Result<Rkhs> {
        let gram = kernel.gram();
        let quotient = gram_quotient(&gram).map_err(|e| match e {
            Error::NotPsd { min_eigenvalue } => Error::NotPsd { min_eigenvalue },
            other => other,
        })?;
        let generators = kernel.generators();
        let offsets = kernel.offsets();
        Ok(Rkhs { kernel, generators, quotient, offsets })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn generators(&self) -> &[(usize, usize)] {
        &self.generators
    }

    pub fn gram(&self) -> &CMatrix {
        &self.quotient.gram
    }

    pub fn embedding(&self) -> &CMatrix {
        &self.quotient.embedding
    }

    /// Dimension of `H^K` (numerical rank of the Gram matrix).
    pub fn dim(&self) -> usize {
        self.quotient.rank
    }

    /// Quotient coordinates of the generator `K_{e_a}` at base point `s`.
    pub fn generator_coord(&self, s: usize, a: usize) -> CVector {
        self.quotient.embedding.column(self.offsets[s] + a).into_owned()
    }

    /// Quotient coordinates of `K_xi` for an arbitrary fiber vector `xi`.
    pub fn coord_of(&self, s: usize, xi: &CVector) -> Result<CVector> {
        let d = self.kernel.bundle().dim(s);
        if xi.len() != d {
            return Err(Error::Dimension(format!(
                "fiber vector of length {} at a point of dimension {d}",
                xi.len()
            )));
        }
        let mut out = CVector::zeros(self.dim());
        for a in 0..d {
            out += self.generator_coord(s, a) * xi[a];
        }
        Ok(out)
    }

    /// Section value `F(t) ∈ D_t` of the quotient element with coordinates
    /// `f`, obtained by expressing `f` over the generators.  Elements of
    /// zero norm are zero sections, so any preimage works.
    pub fn evaluate(&self, f: &CVector, t: usize) -> Result<CVector> {
        if f.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "coordinate vector of length {}, RKHS dimension {}",
                f.len(),
                self.dim()
            )));
        }
        if t >= self.kernel.bundle().n_points() {
            return Err(Error::Invalid(format!("unknown point index {t}")));
        }
        let coeffs = pinv(&self.quotient.embedding) * f;
        let mut out = CVector::zeros(self.kernel.bundle().dim(t));
        for (j, &(s, a)) in self.generators.iter().enumerate() {
            let col = self.kernel.block(t, s).column(a).into_owned();
            out += col * coeffs[j];
        }
        Ok(out)
    }

    /// Standard inner product of quotient coordinates, `(f|g) = g^† f`.
    pub fn inner(&self, f: &CVector, g: &CVector) -> C {
        (g.adjoint() * f)[(0, 0)]
    }
}

/// Pull-back `Θ^*K(s,t) = (δ_{s^{-*}})^{-*} ∘ K(ζ(s), ζ(t)) ∘ δ_t` of a
/// kernel on the target bundle to the source bundle of a morphism; for
/// antimorphisms the two antilinear factors make the block linear again.
pub fn pullback(m: &BundleMorphism, k: &Kernel) -> Result<Kernel> {
    if !m.target().same_shape(k.bundle(), 1e-12) {
        return Err(Error::Invalid("pull-back of a kernel living on a different bundle".into()));
    }
    let src = m.source().clone();
    let n = src.n_points();
    let mut blocks = Vec::with_capacity(n * n);
    // quasi-adjoints of δ at the involuted points, one per s
    let mut adj = Vec::with_capacity(n);
    for s in 0..n {
        adj.push(m.quasi_adjoint(src.base().involute(s))?);
    }
    for s in 0..n {
        for t in 0..n {
            let inner = k.block(m.base_map(s), m.base_map(t));
            let block = if m.is_antilinear() {
                &adj[s] * conj_m(inner) * conj_m(m.fiber_map(t))
            } else {
                &adj[s] * inner * m.fiber_map(t)
            };
            blocks.push(block);
        }
    }
    Kernel::from_blocks(src, blocks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomBound {
    pub is_morphism: bool,
    pub least_m: f64,
    /// largest pulled-form value on null directions of the source form
    pub null_residual: f64,
}

/// Least constant `M` with `pulled quadratic form ≤ M · source form` over
/// all generator combinations: the largest generalized eigenvalue of the
/// pulled Gram against the source Gram on the range of the latter.
/// Directions in the null space of the source Gram must be null for the
/// pulled form as well, otherwise no finite `M` exists.
pub fn hom_bound(m: &BundleMorphism, k_src: &Kernel, k_tgt: &Kernel) -> Result<HomBound> {
    let pulled = pullback(m, k_tgt)?.gram();
    let source = k_src.gram();
    form_bound(&pulled, &source)
}

/// Least `M` with `pulled ⪯ M · source` for two Hermitian PSD forms given
/// on a common generator family, plus the null-space consistency check.
pub fn form_bound(pulled: &CMatrix, source: &CMatrix) -> Result<HomBound> {
    let n = source.nrows();
    if pulled.nrows() != n {
        return Err(Error::Dimension("form dimensions differ".into()));
    }
    if n == 0 {
        return Ok(HomBound { is_morphism: true, least_m: 0.0, null_residual: 0.0 });
    }
    let (vals, vecs) = hermitian_eigen(source);
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let cutoff = n as f64 * f64::EPSILON * lmax.max(f64::MIN_POSITIVE);
    let scale = max_abs(pulled).max(1.0);
    let mut null_residual = 0.0f64;
    let mut range_cols = Vec::new();
    for i in 0..n {
        let v = vecs.column(i).into_owned();
        if vals[i] > cutoff {
            range_cols.push(v * cr(1.0 / vals[i].sqrt()));
        } else {
            let q = (v.adjoint() * pulled * &v)[(0, 0)].re;
            null_residual = null_residual.max(q.abs());
        }
    }
    let is_morphism = null_residual <= DEFAULT_TOL * scale;
    let least_m = if range_cols.is_empty() {
        0.0
    } else {
        let w = CMatrix::from_columns(&range_cols);
        let compressed = w.adjoint() * pulled * &w;
        let (cvals, _) = hermitian_eigen(&compressed);
        cvals.iter().cloned().fold(0.0, f64::max).max(0.0)
    };
    Ok(HomBound { is_morphism, least_m, null_residual })
}

/// The operator `H^Θ` induced on quotient coordinates by a bundle morphism:
/// it sends the class of `K̃_xi` to the class of `K_{δ(xi)}`.
#[derive(Debug, Clone)]
pub struct InducedOperator {
    pub matrix: CMatrix,
    pub antilinear: bool,
    /// measured operator norm of the matrix
    pub norm: f64,
    /// residual of the defining property over all generators
    pub defect: f64,
}

impl InducedOperator {
    pub fn apply(&self, f: &CVector) -> CVector {
        if self.antilinear {
            &self.matrix * f.map(|z| z.conj())
        } else {
            &self.matrix * f
        }
    }
}

pub fn induced_operator(m: &BundleMorphism, r_src: &Rkhs, r_tgt: &Rkhs) -> Result<InducedOperator> {
    if !m.source().same_shape(r_src.kernel().bundle(), 1e-12)
        || !m.target().same_shape(r_tgt.kernel().bundle(), 1e-12)
    {
        return Err(Error::Invalid("induced operator over mismatched bundles".into()));
    }
    let n_gen = r_src.generators().len();
    let mut images = czeros(r_tgt.dim(), n_gen);
    for (j, &(s, a)) in r_src.generators().iter().enumerate() {
        // δ applied to a (real) basis vector is just column a of the matrix
        let dxi = m.fiber_map(s).column(a).into_owned();
        let coord = r_tgt.coord_of(m.base_map(s), &dxi)?;
        images.set_column(j, &coord);
    }
    let src_emb = r_src.embedding();
    let arg = if m.is_antilinear() { conj_m(src_emb) } else { src_emb.clone() };
    let matrix = &images * pinv(&arg);
    let defect = max_abs(&(&matrix * &arg - &images));
    let scale = max_abs(&images).max(1.0);
    if defect > 1e-7 * scale {
        return Err(Error::NotMorphism(format!(
            "induced operator is not well defined on the quotient (defect {defect:e})"
        )));
    }
    let norm = op_norm(&matrix);
    Ok(InducedOperator { matrix, antilinear: m.is_antilinear(), norm, defect })
}

#[derive(Debug, Clone)]
pub struct PullbackCharacterization {
    pub equal: bool,
    pub residual: f64,
    pub is_morphism: bool,
    pub least_m: f64,
    pub isometry: bool,
    pub isometry_residual: f64,
    /// the equivalence `equal ⇔ morphism ∧ isometry` observed on this input
    pub consistent: bool,
}

/// Characterization of pull-backs: `k_src = Θ^*k_tgt` holds exactly when
/// `Θ` is a morphism of kernels and `H^Θ` is an isometry.
pub fn pullback_characterization(
    m: &BundleMorphism,
    k_src: &Kernel,
    k_tgt: &Kernel,
) -> Result<PullbackCharacterization> {
    let pulled = pullback(m, k_tgt)?;
    let n = k_src.bundle().n_points();
    let mut residual = 0.0f64;
    let mut scale = 1.0f64;
    for s in 0..n {
        for t in 0..n {
            residual = residual.max(max_abs(&(k_src.block(s, t) - pulled.block(s, t))));
            scale = scale.max(max_abs(k_src.block(s, t)));
        }
    }
    let equal = residual <= DEFAULT_TOL * scale;
    let bound = hom_bound(m, k_src, k_tgt)?;

    // Gram preservation of the induced operator, computed directly from the
    // image coordinates so it is available even when H^Θ is unbounded.
    let r_src = Rkhs::build(k_src.clone())?;
    let r_tgt = Rkhs::build(k_tgt.clone())?;
    let mut images = czeros(r_tgt.dim(), r_src.generators().len());
    for (j, &(s, a)) in r_src.generators().iter().enumerate() {
        let dxi = m.fiber_map(s).column(a).into_owned();
        images.set_column(j, &r_tgt.coord_of(m.base_map(s), &dxi)?);
    }
    let image_gram = images.adjoint() * &images;
    let reference = if m.is_antilinear() { conj_m(r_src.gram()) } else { r_src.gram().clone() };
    let isometry_residual = max_abs(&(image_gram - reference));
    let isometry = isometry_residual <= DEFAULT_TOL * max_abs(r_src.gram()).max(1.0);
    let consistent = equal == (bound.is_morphism && isometry);
    Ok(PullbackCharacterization {
        equal,
        residual,
        is_morphism: bound.is_morphism,
        least_m: bound.least_m,
        isometry,
        isometry_residual,
        consistent,
    })
}

#[derive(Debug, Clone)]
pub struct Conjugation {
    pub operator: InducedOperator,
    /// residual of `τ̄² = id` in quotient coordinates
    pub involution_residual: f64,
    /// residual of the symmetry `K(s,t) = τ^{-1} ∘ K(s^{-*},t^{-*}) ∘ τ`
    pub symmetry_residual: f64,
}

/// Builds the involutive antilinear isometry `τ̄` on `H^K` induced by an
/// involutive antilinear bundle isometry `τ` covering the base involution,
/// provided the kernel is `τ`-symmetric; reports the offending block
/// otherwise.
pub fn conjugation(k: &Kernel, tau: &BundleMorphism) -> Result<Conjugation> {
    if !tau.is_antilinear() {
        return Err(Error::Precondition("conjugation requires an antilinear morphism".into()));
    }
    if !tau.source().same_shape(k.bundle(), 1e-12) || !tau.target().same_shape(k.bundle(), 1e-12) {
        return Err(Error::Precondition("conjugation must act on the kernel's own bundle".into()));
    }
    for z in 0..k.bundle().n_points() {
        if tau.base_map(z) != k.bundle().base().involute(z) {
            return Err(Error::Precondition(
                "conjugation must cover the base involution".into(),
            ));
        }
    }
    // τ² = id on fibers
    let squared = BundleMorphism::compose(tau, tau)?;
    for z in 0..k.bundle().n_points() {
        let d = k.bundle().dim(z);
        let res = max_abs(&(squared.fiber_map(z) - cidentity(d)));
        if res > 1e-8 {
            return Err(Error::Precondition(format!(
                "τ is not involutive at '{}' (residual {res:e})",
                k.bundle().base().id(z)
            )));
        }
    }
    let (isom, isom_res) = tau.is_isometry();
    if !isom {
        return Err(Error::Precondition(format!(
            "τ is not a pairing isometry (residual {isom_res:e})"
        )));
    }
    // the symmetry condition is exactly "K equals its own τ-pull-back"
    let pulled = pullback(tau, k)?;
    let n = k.bundle().n_points();
    let mut symmetry_residual = 0.0f64;
    let mut worst = (0usize, 0usize);
    for s in 0..n {
        for t in 0..n {
            let r = max_abs(&(k.block(s, t) - pulled.block(s, t)));
            if r > symmetry_residual {
                symmetry_residual = r;
                worst = (s, t);
            }
        }
    }
    let scale = (0..n * n).map(|i| max_abs(k.block(i / n, i % n))).fold(1.0, f64::max);
    if symmetry_residual > DEFAULT_TOL * scale {
        return Err(Error::Precondition(format!(
            "kernel is not τ-symmetric at block ({}, {}) (residual {symmetry_residual:e})",
            k.bundle().base().id(worst.0),
            k.bundle().base().id(worst.1)
        )));
    }
    let r = Rkhs::build(k.clone())?;
    let operator = induced_operator(tau, &r, &r)?;
    let involution_residual =
        max_abs(&(&operator.matrix * conj_m(&operator.matrix) - cidentity(r.dim())));
    Ok(Conjugation { operator, involution_residual, symmetry_residual })
}

/// One sampled group element of an action on a bundle: a base permutation
/// `ν(u,·)`, fiber maps `μ(u,·)_z : D_z → D_{ν(u,z)}`, and the index of the
/// sampled inverse element.
#[derive(Debug, Clone)]
pub struct ActionElement {
    pub label: String,
    pub base_perm: Vec<usize>,
    pub fiber_maps: Vec<CMatrix>,
    pub inverse: usize,
}

#[derive(Debug, Clone)]
pub struct EquivarianceReport {
    pub pass: bool,
    pub max_residual: f64,
}

/// Verifies `K(t, ν(u,s)) μ(u,ξ) = μ(u, K(ν(u^{-1},t), s) ξ)` over all
/// sampled elements, base pairs, and fiber basis vectors.
pub fn equivariance_check(k: &Kernel, action: &[ActionElement]) -> Result<EquivarianceReport> {
    let n = k.bundle().n_points();
    for (ui, u) in action.iter().enumerate() {
        if u.base_perm.len() != n || u.fiber_maps.len() != n {
            return Err(Error::Invalid(format!(
                "sampled element '{}' does not cover the base set",
                u.label
            )));
        }
        if u.inverse >= action.len() {
            return Err(Error::Invalid(format!(
                "sampled element '{}' lacks its inverse",
                u.label
            )));
        }
        let inv = &action[u.inverse];
        for z in 0..n {
            if inv.base_perm[u.base_perm[z]] != z {
                return Err(Error::Invalid(format!(
                    "base permutations of '{}' and its inverse do not cancel",
                    u.label
                )));
            }
        }
        let _ = ui;
    }
    let mut res = 0.0f64;
    let mut scale = 1.0f64;
    for u in action {
        let uinv = &action[u.inverse];
        for s in 0..n {
            for t in 0..n {
                let lhs = k.block(t, u.base_perm[s]) * &u.fiber_maps[s];
                let tb = uinv.base_perm[t];
                let rhs = &u.fiber_maps[tb] * k.block(tb, s);
                scale = scale.max(max_abs(&lhs));
                res = res.max(max_abs(&(lhs - rhs)));
            }
        }
    }
    Ok(EquivarianceReport { pass: res <= DEFAULT_TOL * scale, max_residual: res })
}
