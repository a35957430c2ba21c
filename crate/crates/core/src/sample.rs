//! Seeded random instances for tests and demos: positive kernels, bundle
//! morphisms, and unital CP maps.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{Bundle, BundleMorphism};
use crate::cpmap::CpMap;
use crate::error::Result;
use crate::kernel::Kernel;
use crate::linalg::{c, cidentity, CMatrix, C};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// A random positive Hermitian kernel: `K(s,t) = F_s^† F_t` for random
/// frames into a common space, on a Hermitian bundle with standard
/// pairings.
pub fn random_positive_kernel(
    rng: &mut ChaCha8Rng,
    n_points: usize,
    max_fiber_dim: usize,
) -> Result<Kernel> {
    let dims: Vec<usize> = (0..n_points).map(|_| rng.gen_range(1..=max_fiber_dim)).collect();
    let ambient = dims.iter().sum::<usize>().max(2) + rng.gen_range(0..=2);
    let frames: Vec<CMatrix> = dims.iter().map(|&d| random_matrix(rng, ambient, d)).collect();
    let names: Vec<String> = (0..n_points).map(|i| format!("z{i}")).collect();
    let bundle = Bundle::hermitian(names, dims)?;
    Kernel::from_fn(bundle, |s, t| frames[s].adjoint() * &frames[t])
}

/// A random linear morphism between two Hermitian bundles over the same
/// number of points, with a random base permutation.
pub fn random_morphism(
    rng: &mut ChaCha8Rng,
    source: &Bundle,
    target: &Bundle,
) -> Result<BundleMorphism> {
    let n = source.n_points();
    // random permutation of the target points (identity involutions keep
    // any permutation admissible)
    let mut base_map: Vec<usize> = (0..target.n_points()).collect();
    for i in (1..base_map.len()).rev() {
        let j = rng.gen_range(0..=i);
        base_map.swap(i, j);
    }
    base_map.truncate(n);
    // ensure coverage is not required: morphisms may miss target points
    let fiber_maps: Vec<CMatrix> = (0..n)
        .map(|z| random_matrix(rng, target.dim(base_map[z]), source.dim(z)))
        .collect();
    BundleMorphism::new(source.clone(), target.clone(), base_map, fiber_maps, false)
}

/// A random unital CP map on `M_n` from `k` Kraus operators, normalized so
/// that `Σ V_i^† V_i = 1`.
pub fn random_unital_cp(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<CpMap> {
    let kraus: Vec<CMatrix> = (0..k).map(|_| random_matrix(rng, n, n)).collect();
    // normalize: with S = Σ V_i^† V_i ≻ 0, replace V_i by V_i S^{-1/2}
    let mut s = CMatrix::zeros(n, n);
    for v in &kraus {
        s += v.adjoint() * v;
    }
    let s_half_inv = inv_sqrt(&s);
    let kraus: Vec<CMatrix> = kraus.iter().map(|v| v * &s_half_inv).collect();
    CpMap::from_kraus(n, &kraus)
}

fn inv_sqrt(s: &CMatrix) -> CMatrix {
    let (vals, vecs) = crate::linalg::hermitian_eigen(s);
    let d = CMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j && vals[i] > 0.0 {
            crate::linalg::cr(1.0 / vals[i].sqrt())
        } else {
            C::new(0.0, 0.0)
        }
    });
    &vecs * d * vecs.adjoint()
}

/// A random state (positive normalized functional) on `M_n`, given in the
/// matrix-unit coordinates of `MatrixAlgebra::full(n)`: `φ(a) = tr(ρ a)`.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    let g = random_matrix(rng, n, n);
    let mut rho = g.adjoint() * &g;
    let tr: C = (0..n).map(|i| rho[(i, i)]).sum();
    rho /= tr;
    // φ(E_{ij}) = tr(ρ E_{ij}) = ρ_{ji}; matrix units are ordered (i,j)
    // column-major to match MatrixAlgebra::full's basis
    let algebra = crate::cpmap::MatrixAlgebra::full(n);
    algebra
        .basis()
        .iter()
        .map(|b| {
            let prod = &rho * b;
            (0..n).map(|i| prod[(i, i)]).sum()
        })
        .collect()
}

/// A random isometry `C^k → C^n` (`k ≤ n`).
pub fn random_isometry(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMatrix {
    let g = random_matrix(rng, n, k);
    let basis = crate::linalg::orthonormal_basis(&g);
    if basis.dim() == k {
        basis.basis().clone()
    } else {
        // random matrices are almost surely full rank; pad deterministically
        let mut m = cidentity(n).columns(0, k).into_owned();
        let b = basis.basis();
        for j in 0..basis.dim() {
            m.set_column(j, &b.column(j).into_owned());
        }
        m
    }
}

/// A random invertible matrix with a bounded condition number, produced by
/// pushing singular values away from zero.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    let shift = cidentity(n) * crate::linalg::cr(2.0 + n as f64);
    let m = g.adjoint() * &g + shift;
    // Hermitian positive definite times a random unitary-ish factor
    let u = random_matrix(rng, n, n);
    let q = crate::linalg::orthonormal_basis(&u);
    if q.dim() == n {
        q.basis() * m
    } else {
        m
    }
}
