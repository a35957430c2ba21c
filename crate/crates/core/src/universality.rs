//! Universality theorems: every positive kernel is the pull-back of a
//! Grassmannian universal kernel along the canonical morphism `Δ_K`;
//! homogeneous and transfer kernels, the complexified (Ω-free) variant,
//! orbit comparison, and the tracial GNS application suite.

use crate::bundle::{BaseSet, Bundle, BundleMorphism};
use crate::cpmap::{gns, functional_at, MatrixAlgebra, Subalgebra};
use crate::error::{Error, Result};
use crate::grassmann::{universal_kernel, InvolutionIsometry};
use crate::kernel::{
    conjugation, equivariance_check, pullback, pullback_characterization, ActionElement,
    EquivarianceReport, Kernel, Rkhs,
};
use crate::linalg::{
    cidentity, conj_m, cr, czeros, max_abs, orthonormal_basis, pinv, smallest_singular_value,
    solve, CMatrix, CVector, Pairing, Subspace,
};

/// The canonical morphism `Δ_K = (δ_K, ζ_K)` into the Grassmannian of the
/// RKHS: `δ_K(s,ξ)` is the quotient coordinate vector of `K_ξ` and
/// `ζ_K(s)` the span of the fiber images.
#[derive(Debug, Clone)]
pub struct UniversalMorphism {
    rkhs: Rkhs,
    zeta: Vec<Subspace>,
    delta: Vec<CMatrix>,
}

impl UniversalMorphism {
    pub fn rkhs(&self) -> &Rkhs {
        &self.rkhs
    }

    pub fn zeta(&self, s: usize) -> &Subspace {
        &self.zeta[s]
    }

    pub fn zetas(&self) -> &[Subspace] {
        &self.zeta
    }

    /// Matrix of `δ_K` at `s`: columns are the RKHS coordinates of the
    /// generators `K_{e_a}`.
    pub fn delta(&self, s: usize) -> &CMatrix {
        &self.delta[s]
    }
}

pub fn build_universal_morphism(k: &Kernel) -> Result<UniversalMorphism> {
    let report = k.check_positive()?;
    if !report.positive {
        return Err(Error::NotPsd { min_eigenvalue: report.min_eigenvalue });
    }
    let rkhs = Rkhs::build(k.clone())?;
    let n = k.bundle().n_points();
    let mut delta = Vec::with_capacity(n);
    let mut zeta = Vec::with_capacity(n);
    for s in 0..n {
        let d = k.bundle().dim(s);
        let mut m = czeros(rkhs.dim(), d);
        for a in 0..d {
            m.set_column(a, &rkhs.generator_coord(s, a));
        }
        zeta.push(orthonormal_basis(&m));
        delta.push(m);
    }
    Ok(UniversalMorphism { rkhs, zeta, delta })
}

#[derive(Debug, Clone)]
pub struct UniversalityReport {
    pub residual: f64,
    pub pass: bool,
    pub isometry: bool,
    pub least_m: f64,
}

fn block_residual(a: &Kernel, b: &Kernel) -> (f64, f64) {
    let n = a.bundle().n_points();
    let mut res = 0.0f64;
    let mut scale = 1.0f64;
    for s in 0..n {
        for t in 0..n {
            res = res.max(max_abs(&(a.block(s, t) - b.block(s, t))));
            scale = scale.max(max_abs(a.block(s, t)));
        }
    }
    (res, scale)
}

/// `K = Δ_K^* Q_{H^K}` for a positive kernel on a Hermitian bundle: the
/// pull-back of the universal kernel on the subspaces `ζ_K(s)` along the
/// canonical morphism reproduces `K`.
pub fn verify_universal_hermitian(k: &Kernel, tol: f64) -> Result<UniversalityReport> {
    let base = k.bundle().base();
    for s in 0..k.bundle().n_points() {
        if base.involute(s) != s {
            return Err(Error::Precondition(
                "Hermitian verification requires the identity involution on the base".into(),
            ));
        }
        let g = k.bundle().pairing(s).matrix();
        if max_abs(&(g - g.adjoint())) > 1e-10 * max_abs(g).max(1.0) {
            return Err(Error::Precondition(format!(
                "pairing at '{}' is not Hermitian",
                base.id(s)
            )));
        }
    }
    let um = build_universal_morphism(k)?;
    let q = universal_kernel(um.zetas())?;
    let n = k.bundle().n_points();
    let fiber_maps: Vec<CMatrix> =
        (0..n).map(|s| um.zeta(s).basis().adjoint() * um.delta(s)).collect();
    let m = BundleMorphism::new(
        k.bundle().clone(),
        q.bundle().clone(),
        (0..n).collect(),
        fiber_maps,
        false,
    )?;
    let ch = pullback_characterization(&m, k, &q)?;
    let pulled = pullback(&m, &q)?;
    let (residual, scale) = block_residual(k, &pulled);
    Ok(UniversalityReport {
        residual,
        pass: residual <= tol * scale,
        isometry: ch.isometry,
        least_m: ch.least_m,
    })
}

#[derive(Debug, Clone)]
pub struct InvolutiveReport {
    /// `ζ_K(s^{-*}) = C(ζ_K(s))` within tolerance
    pub hypothesis_ok: bool,
    pub hypothesis_residual: f64,
    pub residual: f64,
    pub pass: bool,
}

/// `K = Δ_K^* Q_{H^K,C}` for a positive kernel on a like-Hermitian bundle,
/// given an involutive isometry `C` on the RKHS coordinates that is
/// compatible with the base involution on the subspaces `ζ_K(s)`.  If the
/// compatibility hypothesis fails, no verdict on the pull-back identity is
/// given.
pub fn verify_universal_involutive(
    k: &Kernel,
    c: &InvolutionIsometry,
    tol: f64,
) -> Result<InvolutiveReport> {
    let um = build_universal_morphism(k)?;
    if c.matrix().nrows() != um.rkhs().dim() {
        return Err(Error::Dimension(
            "involution does not act on the RKHS coordinate space".into(),
        ));
    }
    let base = k.bundle().base();
    let n = k.bundle().n_points();
    let mut hyp = 0.0f64;
    for s in 0..n {
        let image = c.map_subspace(um.zeta(s));
        hyp = hyp.max(max_abs(&(image.projection() - um.zeta(base.involute(s)).projection())));
    }
    if hyp > 1e-7 {
        return Ok(InvolutiveReport {
            hypothesis_ok: false,
            hypothesis_residual: hyp,
            residual: f64::NAN,
            pass: false,
        });
    }
    // Q_{H^K,C} assembled with the base involution of k, so that index-level
    // coincidences among the ζ_K(s) cannot scramble the point matching.
    let dims: Vec<usize> = (0..n).map(|s| um.zeta(s).dim()).collect();
    let mut pairings = Vec::with_capacity(n);
    for s in 0..n {
        let g = c.apply_cols(um.zeta(base.involute(s)).basis()).adjoint() * um.zeta(s).basis();
        pairings.push(Pairing::new(g)?);
    }
    let bundle = Bundle::new(base.clone(), dims, pairings)?;
    let q = Kernel::from_fn(bundle, |s, t| {
        um.zeta(s).basis().adjoint() * c.apply_cols(um.zeta(t).basis())
    })?;
    let fiber_maps: Vec<CMatrix> =
        (0..n).map(|s| um.zeta(s).basis().adjoint() * um.delta(s)).collect();
    let m = BundleMorphism::new(
        k.bundle().clone(),
        q.bundle().clone(),
        (0..n).collect(),
        fiber_maps,
        false,
    )?;
    let pulled = pullback(&m, &q)?;
    let (residual, scale) = block_residual(k, &pulled);
    Ok(InvolutiveReport {
        hypothesis_ok: true,
        hypothesis_residual: hyp,
        residual,
        pass: residual <= tol * scale,
    })
}

#[derive(Debug, Clone)]
pub struct PointRank {
    pub point: String,
    pub smallest_singular_value: f64,
    /// numerical rank of `K̂` on the fiber, `dim ζ_K(s)`
    pub rank: usize,
    pub fiber_dim: usize,
    /// `K(s,s)` invertible, so `Ǩ` identifies the fiber with `ζ_K(s)`
    pub invertible: bool,
    /// `ξ ↦ K_ξ ↦ K(s,s)^{-1} K_ξ(s)` against the identity
    pub roundtrip_residual: f64,
}

pub fn invertibility_and_rank(k: &Kernel) -> Result<Vec<PointRank>> {
    let um = build_universal_morphism(k)?;
    let n = k.bundle().n_points();
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let diag = k.block(s, s);
        let d = k.bundle().dim(s);
        let sigma = smallest_singular_value(diag);
        let scale = max_abs(diag).max(1.0);
        let invertible = d > 0 && sigma > 1e-10 * scale;
        let roundtrip_residual = if invertible {
            let mut res = 0.0f64;
            for a in 0..d {
                let f = um.rkhs().generator_coord(s, a);
                let value = um.rkhs().evaluate(&f, s)?;
                let back = solve(diag, &CMatrix::from_columns(&[value]))?;
                let mut e = CVector::zeros(d);
                e[a] = cr(1.0);
                let diff = back.column(0).into_owned() - e;
                res = res.max(diff.iter().map(|x| x.norm()).fold(0.0, f64::max));
            }
            res
        } else {
            f64::NAN
        };
        out.push(PointRank {
            point: k.bundle().base().id(s).to_string(),
            smallest_singular_value: sigma,
            rank: um.zeta(s).dim(),
            fiber_dim: d,
            invertible,
            roundtrip_residual,
        });
    }
    Ok(out)
}

/// The kernel `K^R(s,t) = (R_{s^{-*}})^{-*} ∘ R_t` defined by a transfer
/// mapping: per-point injective maps `R_s : D_s → C^h` that realize the
/// pairings as `(ξ|η)_{z,z^{-*}} = (R_z ξ | R_{z^{-*}} η)_H`.  In
/// coordinates the blocks are `G_s^{-1} R_{s^{-*}}^† R_t`, and
/// `K^R(s,s) = id` holds identically.
pub fn transfer_kernel(bundle: &Bundle, r: &[CMatrix]) -> Result<Kernel> {
    let n = bundle.n_points();
    if r.len() != n {
        return Err(Error::Dimension("one transfer map per base point required".into()));
    }
    let h = r.first().map(|m| m.nrows()).unwrap_or(0);
    for (s, m) in r.iter().enumerate() {
        if m.nrows() != h || m.ncols() != bundle.dim(s) {
            return Err(Error::Dimension(format!(
                "transfer map at '{}' has the wrong shape",
                bundle.base().id(s)
            )));
        }
        if bundle.dim(s) > 0 {
            let sigma = smallest_singular_value(m);
            if sigma <= 1e-10 * max_abs(m).max(1.0) {
                return Err(Error::Precondition(format!(
                    "transfer map at '{}' is not injective",
                    bundle.base().id(s)
                )));
            }
        }
    }
    for s in 0..n {
        let si = bundle.base().involute(s);
        let g = r[si].adjoint() * &r[s];
        let res = max_abs(&(&g - bundle.pairing(s).matrix()));
        if res > 1e-8 * max_abs(bundle.pairing(s).matrix()).max(1.0) {
            return Err(Error::Precondition(format!(
                "transfer maps do not realize the pairing at '{}' (residual {res:e})",
                bundle.base().id(s)
            )));
        }
    }
    let mut blocks = Vec::with_capacity(n * n);
    for s in 0..n {
        let si = bundle.base().involute(s);
        for t in 0..n {
            let rhs = r[si].adjoint() * &r[t];
            blocks.push(solve(bundle.pairing(s).matrix(), &rhs)?);
        }
    }
    Kernel::from_blocks(bundle.clone(), blocks)
}

/// The canonical transfer maps of a positive kernel with invertible
/// diagonal: `R_K(s) = K(s,s)^{-1/2}`-free realization through the RKHS
/// coordinates of the generators, satisfying
/// `(R_K ξ | R_K η)_H = (K(s,s)ξ | η)`.
pub fn canonical_transfer(k: &Kernel) -> Result<(UniversalMorphism, Vec<CMatrix>)> {
    let um = build_universal_morphism(k)?;
    let maps = um.delta.clone();
    Ok((um, maps))
}

/// A finite sample of an involutive group of invertible matrices together
/// with a multiplicative representation, a subgroup membership test, and a
/// subspace `H_B` of the representation space.
pub struct SampledHomogeneous {
    elems: Vec<CMatrix>,
    involutes: Vec<usize>,
    inverses: Vec<usize>,
    rep: Vec<CMatrix>,
    membership: Box<dyn Fn(&CMatrix) -> bool>,
    hb_basis: CMatrix,
}

fn find_matrix(list: &[CMatrix], m: &CMatrix, tol: f64) -> Option<usize> {
    list.iter().position(|x| max_abs(&(x - m)) <= tol * max_abs(m).max(1.0))
}

impl SampledHomogeneous {
    /// Builds the sample from explicit group elements; the list must be
    /// closed under `u ↦ u^{-1}` and `u ↦ u^{-*}`.  The representation is
    /// validated to be multiplicative and *-preserving on the sample, with
    /// `H_B` invariant under the represented subgroup members.
    pub fn new(
        elems: Vec<CMatrix>,
        rep: Vec<CMatrix>,
        membership: Box<dyn Fn(&CMatrix) -> bool>,
        hb_basis: CMatrix,
    ) -> Result<Self> {
        if elems.len() != rep.len() || elems.is_empty() {
            return Err(Error::Invalid("one representation matrix per group element".into()));
        }
        let mut involutes = Vec::with_capacity(elems.len());
        let mut inverses = Vec::with_capacity(elems.len());
        for u in &elems {
            let inv = u
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Precondition("group element is not invertible".into()))?;
            let j = find_matrix(&elems, &inv, 1e-9).ok_or_else(|| {
                Error::Precondition("sample is not closed under inversion".into())
            })?;
            inverses.push(j);
            let istar = inv.adjoint();
            let j = find_matrix(&elems, &istar, 1e-9).ok_or_else(|| {
                Error::Precondition("sample is not closed under the involution".into())
            })?;
            involutes.push(j);
        }
        let hb = &hb_basis;
        if max_abs(&(hb.adjoint() * hb - cidentity(hb.ncols()))) > 1e-9 {
            return Err(Error::Precondition("H_B basis must be orthonormal".into()));
        }
        let p_hb = hb * hb.adjoint();
        for (i, u) in elems.iter().enumerate() {
            if rep[i].nrows() != hb.nrows() || rep[i].ncols() != hb.nrows() {
                return Err(Error::Dimension(
                    "representation matrices must act on the space of H_B".into(),
                ));
            }
            // multiplicativity on sampled pairs whose product is sampled
            for (j, v) in elems.iter().enumerate() {
                if let Some(k) = find_matrix(&elems, &(u * v), 1e-9) {
                    let res = max_abs(&(&rep[i] * &rep[j] - &rep[k]));
                    if res > 1e-8 * max_abs(&rep[k]).max(1.0) {
                        return Err(Error::Precondition(
                            "representation is not multiplicative on the sample".into(),
                        ));
                    }
                }
            }
            // *-preservation: rep(u^{-*}) = rep(u)^{-*}
            let lhs = &rep[involutes[i]];
            let rhs = rep[i]
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Precondition("representation matrix is singular".into()))?
                .adjoint();
            if max_abs(&(lhs - &rhs)) > 1e-8 * max_abs(lhs).max(1.0) {
                return Err(Error::Precondition(
                    "representation does not preserve the involution".into(),
                ));
            }
            // H_B invariance for subgroup members: rep(u) H_B ⊆ H_B
            if self_membership(&membership, u) {
                let img = &rep[i] * hb;
                if max_abs(&((cidentity(hb.nrows()) - &p_hb) * img)) > 1e-8 {
                    return Err(Error::Precondition(
                        "H_B is not invariant under the represented subgroup".into(),
                    ));
                }
            }
        }
        Ok(SampledHomogeneous { elems, involutes, inverses, rep, membership, hb_basis })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elems[i]
    }

    pub fn rep(&self, i: usize) -> &CMatrix {
        &self.rep[i]
    }

    pub fn hb_basis(&self) -> &CMatrix {
        &self.hb_basis
    }

    fn same_coset(&self, i: usize, j: usize) -> Result<bool> {
        let ui = self.elems[self.inverses[i]].clone();
        Ok((self.membership)(&(ui * &self.elems[j])))
    }
}

fn self_membership(membership: &dyn Fn(&CMatrix) -> bool, u: &CMatrix) -> bool {
    membership(u)
}

/// A homogeneous kernel at sampled cosets, with its transfer realization.
pub struct HomogeneousKernel {
    pub kernel: Kernel,
    /// coset representative index (into the sample) per base point
    pub reps: Vec<usize>,
    /// transfer maps `R_s = π(u_s)|_{H_B}`
    pub transfer: Vec<CMatrix>,
}

/// The kernel `K^π(s,t) = P ∘ π(u_s^{-1} u_t)|_{H_B}` on the coset bundle
/// `G_A ×_{G_B} H_B`, with pairings realized through the transfer maps
/// `R_s = π(u_s)|_{H_B}`; coset identity is decided by the supplied
/// membership test on `u^{-1} v`.
pub fn homogeneous_kernel(h: &SampledHomogeneous, cosets: &[usize]) -> Result<HomogeneousKernel> {
    let n = cosets.len();
    if n == 0 {
        return Err(Error::Invalid("at least one coset required".into()));
    }
    for (a, &i) in cosets.iter().enumerate() {
        if i >= h.len() {
            return Err(Error::Invalid("coset representative outside the sample".into()));
        }
        for &j in &cosets[a + 1..] {
            if h.same_coset(i, j)? {
                return Err(Error::Invalid("coset list contains duplicates".into()));
            }
        }
    }
    // base involution: the coset of u_i^{-*} must be listed
    let mut involution = Vec::with_capacity(n);
    for &i in cosets {
        let istar = h.involutes[i];
        let pos = (0..n)
            .find_map(|b| match h.same_coset(cosets[b], istar) {
                Ok(true) => Some(Ok(b)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            })
            .transpose()?
            .ok_or_else(|| {
                Error::Precondition("coset list is not closed under the involution".into())
            })?;
        involution.push(pos);
    }
    let names: Vec<String> = (0..n).map(|a| format!("c{a}")).collect();
    let base = BaseSet::new(names, involution.clone())?;
    let b = &h.hb_basis;
    let d = b.ncols();
    let transfer: Vec<CMatrix> = cosets.iter().map(|&i| &h.rep[i] * b).collect();
    let mut pairings = Vec::with_capacity(n);
    for s in 0..n {
        pairings.push(Pairing::new(transfer[involution[s]].adjoint() * &transfer[s])?);
    }
    let bundle = Bundle::new(base, vec![d; n], pairings)?;
    let inv_rep: Vec<CMatrix> =
        cosets.iter().map(|&i| h.rep[h.inverses[i]].clone()).collect();
    let kernel = Kernel::from_fn(bundle, |s, t| {
        b.adjoint() * &inv_rep[s] * &h.rep[cosets[t]] * b
    })?;
    Ok(HomogeneousKernel { kernel, reps: cosets.to_vec(), transfer })
}

impl HomogeneousKernel {
    /// Sampled action of a group element on the coset bundle: the base
    /// permutation `u_s G_B ↦ (u u_s) G_B` and the fiber maps
    /// `μ_{u,s} = π(u_{ν(u,s)}^{-1} u u_s)|_{H_B}`.  Fails when a translate
    /// leaves the sampled coset list.
    pub fn action_element(&self, h: &SampledHomogeneous, u: usize) -> Result<ActionElement> {
        let n = self.reps.len();
        let mut base_perm = Vec::with_capacity(n);
        let mut fiber_maps = Vec::with_capacity(n);
        let b = &h.hb_basis;
        for s in 0..n {
            let moved = &h.elems[u] * &h.elems[self.reps[s]];
            let target = (0..n)
                .find(|&t| {
                    let ut_inv = &h.elems[h.inverses[self.reps[t]]];
                    (h.membership)(&(ut_inv * &moved))
                })
                .ok_or_else(|| {
                    Error::Precondition(
                        "the sampled action does not preserve the coset list".into(),
                    )
                })?;
            base_perm.push(target);
            let w = &h.rep[h.inverses[self.reps[target]]] * &h.rep[u] * &h.rep[self.reps[s]];
            fiber_maps.push(b.adjoint() * w * b);
        }
        Ok(ActionElement {
            label: format!("u{u}"),
            base_perm,
            fiber_maps,
            inverse: h.inverses[u],
        })
    }

    /// Action elements for every sampled group element, with inverse
    /// indices preserved from the sample.
    pub fn action_elements(&self, h: &SampledHomogeneous) -> Result<Vec<ActionElement>> {
        (0..h.len()).map(|u| self.action_element(h, u)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ComplexifiedReport {
    pub equivariance: EquivarianceReport,
    /// `U_u · ζ_K(s) = ζ_K(ν(u,s))` over all sampled elements and points
    pub zetaorbits_residual: f64,
    /// `U_{u_s}^{-*} S_0 = ζ_K(s^{-*})` over all points
    pub pairs_residual: f64,
    /// positivity of the realized complexified kernel blocks
    pub q_positive: bool,
    pub residual: f64,
    pub pass: bool,
}

/// The Ω-free universality theorem: for a kernel equivariant under a
/// transitive sampled action with a self-involutive base point `s0`, the
/// kernel is the pull-back of the complexified universal kernel realized on
/// the RKHS coordinates, `K = Δ̃_K^* Q^C`.
pub fn complexified_universality(
    k: &Kernel,
    action: &[ActionElement],
    s0: usize,
    tol: f64,
) -> Result<ComplexifiedReport> {
    let n = k.bundle().n_points();
    if s0 >= n || k.bundle().base().involute(s0) != s0 {
        return Err(Error::Precondition("s0 must be a self-involutive base point".into()));
    }
    let equivariance = equivariance_check(k, action)?;
    if !equivariance.pass {
        return Err(Error::Precondition(format!(
            "the kernel is not equivariant under the sampled action (residual {:e})",
            equivariance.max_residual
        )));
    }
    let um = build_universal_morphism(k)?;
    let r = um.rkhs().dim();
    let w_pinv = pinv(um.rkhs().embedding());
    // induced operators on H^K: U_u K_xi = K_{mu(u,xi)}
    let n_gen = um.rkhs().generators().len();
    let mut ops = Vec::with_capacity(action.len());
    for u in action {
        let mut images = czeros(r, n_gen);
        for (j, &(s, a)) in um.rkhs().generators().iter().enumerate() {
            let col = &um.delta[u.base_perm[s]] * u.fiber_maps[s].column(a);
            images.set_column(j, &col.column(0).into_owned());
        }
        ops.push(&images * &w_pinv);
    }
    for (i, u) in action.iter().enumerate() {
        let res = max_abs(&(&ops[i] * &ops[u.inverse] - cidentity(r)));
        if res > 1e-7 {
            return Err(Error::Precondition(format!(
                "induced operators of '{}' and its inverse do not cancel (residual {res:e})",
                u.label
            )));
        }
    }
    let mut zetaorbits_residual = 0.0f64;
    for (i, u) in action.iter().enumerate() {
        for s in 0..n {
            let moved = orthonormal_basis(&(&ops[i] * um.zeta(s).basis()));
            zetaorbits_residual = zetaorbits_residual
                .max(max_abs(&(moved.projection() - um.zeta(u.base_perm[s]).projection())));
        }
    }
    // transitivity: coset representatives u_s with nu(u_s, s0) = s
    let mut reps = Vec::with_capacity(n);
    for s in 0..n {
        let i = action.iter().position(|u| u.base_perm[s0] == s).ok_or_else(|| {
            Error::Precondition("the sampled action is not transitive over the base".into())
        })?;
        reps.push(i);
    }
    let b0 = um.zeta(s0).basis().clone();
    let mut pairs_residual = 0.0f64;
    for s in 0..n {
        let si = k.bundle().base().involute(s);
        let minus_star = pinv(&ops[reps[s]]).adjoint();
        let moved = orthonormal_basis(&(minus_star * &b0));
        pairs_residual =
            pairs_residual.max(max_abs(&(moved.projection() - um.zeta(si).projection())));
    }
    if zetaorbits_residual > 1e-7 || pairs_residual > 1e-7 {
        return Err(Error::Precondition(format!(
            "orbit hypotheses fail (zetaorbits {zetaorbits_residual:e}, pairs {pairs_residual:e})"
        )));
    }
    // complexified universal kernel at the sampled cosets, in S_0 coordinates
    let d0 = b0.ncols();
    let mut pairings = Vec::with_capacity(n);
    for s in 0..n {
        let si = k.bundle().base().involute(s);
        let g = (&ops[reps[si]] * &b0).adjoint() * (&ops[reps[s]] * &b0);
        pairings.push(Pairing::new(g)?);
    }
    let bundle = Bundle::new(k.bundle().base().clone(), vec![d0; n], pairings)?;
    let q = Kernel::from_fn(bundle, |s, t| {
        b0.adjoint() * &ops[action[reps[s]].inverse] * &ops[reps[t]] * &b0
    })?;
    let q_positive = q.check_positive()?.positive;
    let fiber_maps: Vec<CMatrix> =
        (0..n).map(|t| b0.adjoint() * &ops[action[reps[t]].inverse] * &um.delta[t]).collect();
    let m = BundleMorphism::new(
        k.bundle().clone(),
        q.bundle().clone(),
        (0..n).collect(),
        fiber_maps,
        false,
    )?;
    let pulled = pullback(&m, &q)?;
    let (residual, scale) = block_residual(k, &pulled);
    Ok(ComplexifiedReport {
        equivariance,
        zetaorbits_residual,
        pairs_residual,
        q_positive,
        residual,
        pass: residual <= tol * scale && q_positive,
    })
}

#[derive(Debug, Clone)]
pub struct OrbitCompareReport {
    /// equivariance of the transfer maps, `R_{ν(u,z)} μ_{u,z} = π(u) R_z`
    pub transrel_residual: f64,
    /// `R_s θ_s = π(u_s) R_{z0}`
    pub r_theta_residual: f64,
    /// `K^π = Θ^* K^R` blockwise
    pub pullback_residual: f64,
    pub pass: bool,
}

/// Orbit comparison: over the sampled orbit of a self-involutive point
/// `z0`, the maps `θ_s = R_s^{-1} π(u_s) R_{z0}` intertwine the transfer
/// kernel `K^R` with the homogeneous kernel `K^π` of the representation,
/// and `K^π` is the `θ`-pull-back of `K^R`.
pub fn orbit_compare(
    bundle: &Bundle,
    r: &[CMatrix],
    action: &[ActionElement],
    rep: &[CMatrix],
    z0: usize,
    tol: f64,
) -> Result<OrbitCompareReport> {
    let n = bundle.n_points();
    if rep.len() != action.len() {
        return Err(Error::Invalid("one representation matrix per action element".into()));
    }
    if z0 >= n || bundle.base().involute(z0) != z0 {
        return Err(Error::Precondition("z0 must be a self-involutive base point".into()));
    }
    let kr = transfer_kernel(bundle, r)?;
    let mut transrel = 0.0f64;
    for (i, u) in action.iter().enumerate() {
        for z in 0..n {
            let lhs = &r[u.base_perm[z]] * &u.fiber_maps[z];
            let rhs = &rep[i] * &r[z];
            transrel = transrel.max(max_abs(&(lhs - rhs)));
        }
    }
    if transrel > 1e-7 {
        return Err(Error::Precondition(format!(
            "transfer maps are not equivariant under the sampled action (residual {transrel:e})"
        )));
    }
    let mut reps_idx = Vec::with_capacity(n);
    for s in 0..n {
        let i = action.iter().position(|u| u.base_perm[z0] == s).ok_or_else(|| {
            Error::Precondition("the sampled orbit does not cover the base".into())
        })?;
        reps_idx.push(i);
    }
    let d0 = bundle.dim(z0);
    let mut theta = Vec::with_capacity(n);
    let mut r_theta_residual = 0.0f64;
    for s in 0..n {
        let rhs = &rep[reps_idx[s]] * &r[z0];
        let th = pinv(&r[s]) * &rhs;
        r_theta_residual = r_theta_residual.max(max_abs(&(&r[s] * &th - rhs)));
        theta.push(th);
    }
    // homogeneous kernel of the representation over the same cosets, with
    // transfer maps π(u_s) R_{z0}
    let r_pi: Vec<CMatrix> = (0..n).map(|s| &rep[reps_idx[s]] * &r[z0]).collect();
    let mut pairings = Vec::with_capacity(n);
    for s in 0..n {
        let si = bundle.base().involute(s);
        pairings.push(Pairing::new(r_pi[si].adjoint() * &r_pi[s])?);
    }
    let pi_bundle = Bundle::new(bundle.base().clone(), vec![d0; n], pairings)?;
    let k_pi = transfer_kernel(&pi_bundle, &r_pi)?;
    let m = BundleMorphism::new(
        pi_bundle.clone(),
        bundle.clone(),
        (0..n).collect(),
        theta,
        false,
    )?;
    let pulled = pullback(&m, &kr)?;
    let (pullback_residual, scale) = block_residual(&k_pi, &pulled);
    Ok(OrbitCompareReport {
        transrel_residual: transrel,
        r_theta_residual,
        pullback_residual,
        pass: r_theta_residual <= tol * scale && pullback_residual <= tol * scale,
    })
}

#[derive(Debug, Clone)]
pub struct TracialReport {
    pub tracial_residual: f64,
    pub expectation_residual: f64,
    /// `Θ_1^* K_ρ = K_λ`
    pub theta1_residual: f64,
    /// `Θ_2^* K_λ = K_ρ`
    pub theta2_residual: f64,
    /// `Θ_3^* K_π = K_π`
    pub theta3_residual: f64,
    /// `τ̄² = id` on the RKHS of `K_π`
    pub tau_involution_residual: f64,
    /// antilinear isometry of `τ̄` on generators
    pub tau_isometry_residual: f64,
    pub pass: bool,
}

fn right_mult(algebra: &MatrixAlgebra, u: &CMatrix) -> Result<CMatrix> {
    let basis = algebra.basis();
    let mut m = czeros(algebra.dim(), algebra.dim());
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, &algebra.coords(&(b * u))?);
    }
    Ok(m)
}

/// The GNS application suite: for a tracial state `φ` on `A` with a
/// compatible conditional expectation onto a subalgebra `B`, the left,
/// right, and adjoint representations of `G_B` define homogeneous kernels
/// `K_λ, K_ρ, K_π` at sampled cosets; conjugation by the modular
/// involution intertwines them as antimorphism pull-backs and yields an
/// involutive antilinear isometry `τ̄` on the RKHS of `K_π`.
pub fn tracial_gns_suite(
    algebra: &MatrixAlgebra,
    sub: &Subalgebra,
    expectation: &dyn Fn(&CMatrix) -> CMatrix,
    phi: &[crate::linalg::C],
    group: &[CMatrix],
    cosets: &[usize],
    tol: f64,
) -> Result<TracialReport> {
    let basis = algebra.basis();
    // traciality and compatibility of φ with E on basis pairs
    let mut tracial_residual = 0.0f64;
    for a in &basis {
        for b in &basis {
            let lhs = functional_at(algebra, phi, &(a * b))?;
            let rhs = functional_at(algebra, phi, &(b * a))?;
            tracial_residual = tracial_residual.max((lhs - rhs).norm());
        }
    }
    if tracial_residual > 1e-9 {
        return Err(Error::Precondition(format!(
            "φ is not tracial, so ρ is not well defined (residual {tracial_residual:e})"
        )));
    }
    let mut expectation_residual = 0.0f64;
    for a in &basis {
        let lhs = functional_at(algebra, phi, &expectation(a))?;
        let rhs = functional_at(algebra, phi, a)?;
        expectation_residual = expectation_residual.max((lhs - rhs).norm());
        if !sub.contains(&expectation(a), 1e-8) {
            return Err(Error::Precondition("E does not map into the subalgebra".into()));
        }
    }
    if expectation_residual > 1e-9 {
        return Err(Error::Precondition(format!(
            "φ∘E = φ fails (residual {expectation_residual:e})"
        )));
    }
    // GNS space of φ on A; quotient coordinates of classes [a]
    let st = gns(algebra.clone(), phi)?;
    let w = st.quotient.embedding.clone();
    let w_pinv = pinv(&w);
    let r = st.space_dim;
    let null = cidentity(algebra.dim()) - &w_pinv * &w;
    let quotient_op = |coord_op: &CMatrix| -> Result<CMatrix> {
        let defect = max_abs(&(&w * coord_op * &null));
        if defect > 1e-8 * max_abs(&w).max(1.0) {
            return Err(Error::Precondition(format!(
                "operator does not descend to the GNS quotient (defect {defect:e})"
            )));
        }
        Ok(&w * coord_op * &w_pinv)
    };
    // H_B = classes of the subalgebra, and the modular conjugation C_A
    let mut hb_cols = Vec::new();
    for j in 0..sub.algebra().dim() {
        let mut e = CVector::zeros(sub.algebra().dim());
        e[j] = cr(1.0);
        hb_cols.push(&w * algebra.coords(&sub.embed_coords(&e))?);
    }
    let b0 = orthonormal_basis(&CMatrix::from_columns(&hb_cols)).basis().clone();
    let mut t_star = czeros(algebra.dim(), algebra.dim());
    for (j, a) in basis.iter().enumerate() {
        t_star.set_column(j, &algebra.coords(&a.adjoint())?);
    }
    let c_a = &w * &t_star * pinv(&conj_m(&w));
    let c_b = b0.adjoint() * &c_a * conj_m(&b0);
    // representations λ(u)[f] = [uf], ρ(u)[f] = [fu^{-1}], π = λρ
    let mut lam = Vec::with_capacity(group.len());
    let mut rho = Vec::with_capacity(group.len());
    let mut pi = Vec::with_capacity(group.len());
    for u in group {
        let u_inv = u
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("group element is not invertible".into()))?;
        if !algebra.contains(u, 1e-8) {
            return Err(Error::Precondition("group element outside the algebra".into()));
        }
        let l = quotient_op(&algebra.left_mult(u)?)?;
        let rm = quotient_op(&right_mult(algebra, &u_inv)?)?;
        pi.push(&l * &rm);
        lam.push(l);
        rho.push(rm);
    }
    let membership = |sub: Subalgebra| {
        move |m: &CMatrix| {
            sub.contains(m, 1e-8)
                && smallest_singular_value(m) > 1e-10 * max_abs(m).max(1.0)
        }
    };
    let make = |rep: &[CMatrix]| -> Result<(HomogeneousKernel, SampledHomogeneous)> {
        let h = SampledHomogeneous::new(
            group.to_vec(),
            rep.to_vec(),
            Box::new(membership(sub.clone())),
            b0.clone(),
        )?;
        let hk = homogeneous_kernel(&h, cosets)?;
        Ok((hk, h))
    };
    let (k_lam, h_lam) = make(&lam)?;
    let (k_rho, _) = make(&rho)?;
    let (k_pi, _) = make(&pi)?;
    // antimorphisms [(u,f)] ↦ [(u^{-*}, C_B f)] in coset coordinates
    let n = cosets.len();
    let base = k_lam.kernel.bundle().base().clone();
    let theta_fibers = |target_rep: &[CMatrix]| -> Result<Vec<CMatrix>> {
        let mut out = Vec::with_capacity(n);
        for s in 0..n {
            let si = base.involute(s);
            let us = &group[cosets[s]];
            let usi = &group[cosets[si]];
            let g = usi.clone().try_inverse().unwrap() * us.clone().try_inverse().unwrap().adjoint();
            if !sub.contains(&g, 1e-8) {
                return Err(Error::Precondition(
                    "coset representatives are not involution-compatible".into(),
                ));
            }
            let i = find_matrix(group, &g, 1e-8).ok_or_else(|| {
                Error::Precondition("the sample does not contain the matching subgroup element".into())
            })?;
            let beta = b0.adjoint() * &target_rep[i] * &b0;
            out.push(beta * &c_b);
        }
        Ok(out)
    };
    let anti = |src: &Kernel, tgt: &Kernel, target_rep: &[CMatrix]| -> Result<BundleMorphism> {
        BundleMorphism::new(
            src.bundle().clone(),
            tgt.bundle().clone(),
            (0..n).map(|s| base.involute(s)).collect(),
            theta_fibers(target_rep)?,
            true,
        )
    };
    let theta1 = anti(&k_lam.kernel, &k_rho.kernel, &rho)?;
    let theta2 = anti(&k_rho.kernel, &k_lam.kernel, &lam)?;
    let theta3 = anti(&k_pi.kernel, &k_pi.kernel, &pi)?;
    let (theta1_residual, scale1) = block_residual(&k_lam.kernel, &pullback(&theta1, &k_rho.kernel)?);
    let (theta2_residual, scale2) = block_residual(&k_rho.kernel, &pullback(&theta2, &k_lam.kernel)?);
    let (theta3_residual, scale3) = block_residual(&k_pi.kernel, &pullback(&theta3, &k_pi.kernel)?);
    let conj = conjugation(&k_pi.kernel, &theta3)?;
    let tau_involution_residual = conj.involution_residual;
    // antilinear isometry of τ̄ on generator coordinates
    let rk = Rkhs::build(k_pi.kernel.clone())?;
    let mut tau_isometry_residual = 0.0f64;
    for &(s, a) in rk.generators() {
        for &(t, b) in rk.generators() {
            let f = rk.generator_coord(s, a);
            let g = rk.generator_coord(t, b);
            let tf = conj.operator.apply(&f);
            let tg = conj.operator.apply(&g);
            let lhs = rk.inner(&tf, &tg);
            let rhs = rk.inner(&f, &g).conj();
            tau_isometry_residual = tau_isometry_residual.max((lhs - rhs).norm());
        }
    }
    let _ = h_lam;
    let pass = theta1_residual <= tol * scale1
        && theta2_residual <= tol * scale2
        && theta3_residual <= tol * scale3
        && tau_involution_residual <= 1e-8
        && tau_isometry_residual <= 1e-8;
    let _ = r;
    Ok(TracialReport {
        tracial_residual,
        expectation_residual,
        theta1_residual,
        theta2_residual,
        theta3_residual,
        tau_involution_residual,
        tau_isometry_residual,
        pass,
    })
}
