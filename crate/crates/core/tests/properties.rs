//! Property tests: structural invariants checked over randomized inputs,
//! with independent oracles where a value (not just an identity) is claimed.

use proptest::prelude::*;
use rand::Rng;

use rkbundle::bundle::{Bundle, BundleMorphism};
use rkbundle::kernel::{induced_operator, pullback, Rkhs};
use rkbundle::linalg::{
    hermitian_eigen, max_abs, op_norm, orthonormal_basis, pinv, psd_check, CMatrix,
};
use rkbundle::sample;

fn rayleigh_min(m: &CMatrix, trials: usize, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    // independent oracle for the smallest eigenvalue: minimize the Rayleigh
    // quotient over random unit vectors (an upper bound that random search
    // makes tight only in low dimension; used as a one-sided check)
    let n = m.nrows();
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        let v = sample::random_matrix(rng, n, 1);
        let norm2 = v.adjoint() * &v;
        let q = (v.adjoint() * m * &v)[(0, 0)].re / norm2[(0, 0)].re;
        best = best.min(q);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projections_are_idempotent_hermitian(seed in any::<u64>(), n in 1usize..6, k in 1usize..6) {
        let mut rng = sample::rng(seed);
        let vectors = sample::random_matrix(&mut rng, n, k);
        let sub = orthonormal_basis(&vectors);
        let p = sub.projection();
        prop_assert!(max_abs(&(&p * &p - &p)) < 1e-10);
        prop_assert!(max_abs(&(p.adjoint() - &p)) < 1e-12);
        // the projection fixes the spanning vectors
        prop_assert!(max_abs(&(&p * &vectors - &vectors)) < 1e-9 * (1.0 + max_abs(&vectors)));
    }

    #[test]
    fn psd_check_agrees_with_rayleigh_oracle(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = sample::rng(seed);
        let b = sample::random_matrix(&mut rng, n, n);
        let gram = b.adjoint() * &b;
        let report = psd_check(&gram).unwrap();
        prop_assert!(report.is_hermitian);
        prop_assert!(report.is_psd);
        // any Rayleigh quotient upper-bounds the smallest eigenvalue
        let ray = rayleigh_min(&gram, 64, &mut rng);
        prop_assert!(report.min_eigenvalue <= ray + 1e-9 * (1.0 + op_norm(&gram)));
        prop_assert!(ray >= -1e-12);
        // subtracting slightly more than the smallest eigenvalue breaks positivity
        let shift = report.min_eigenvalue + 1e-6 * (1.0 + op_norm(&gram));
        let shifted = &gram - rkbundle::linalg::cidentity(n) * rkbundle::linalg::cr(shift);
        prop_assert!(!psd_check(&shifted).unwrap().is_psd);
    }

    #[test]
    fn pinv_satisfies_moore_penrose(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
        let mut rng = sample::rng(seed);
        let m = sample::random_matrix(&mut rng, rows, cols);
        let p = pinv(&m);
        let scale = 1.0 + op_norm(&m);
        prop_assert!(max_abs(&(&m * &p * &m - &m)) < 1e-9 * scale);
        prop_assert!(max_abs(&(&p * &m * &p - &p)) < 1e-9 * (1.0 + op_norm(&p)));
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!(max_abs(&(mp.adjoint() - &mp)) < 1e-9);
        prop_assert!(max_abs(&(pm.adjoint() - &pm)) < 1e-9);
    }

    #[test]
    fn op_norm_dominates_action_on_vectors(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
        let mut rng = sample::rng(seed);
        let m = sample::random_matrix(&mut rng, rows, cols);
        let norm = op_norm(&m);
        for _ in 0..16 {
            let v = sample::random_matrix(&mut rng, cols, 1);
            let num = (&m * &v).norm();
            prop_assert!(num <= norm * v.norm() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn positive_kernels_exchange_and_stay_positive_under_pullback(
        seed in any::<u64>(), n_points in 1usize..4, max_dim in 1usize..3,
    ) {
        let mut rng = sample::rng(seed);
        let k = sample::random_positive_kernel(&mut rng, n_points, max_dim).unwrap();
        let scale = 1.0 + op_norm(&k.gram());
        prop_assert!(k.check_positive().unwrap().positive);
        prop_assert!(k.exchange_residual().unwrap() < 1e-9 * scale);

        let dims: Vec<usize> = (0..n_points).map(|_| 1 + seed as usize % max_dim).collect();
        let names: Vec<String> = (0..n_points).map(|i| format!("w{i}")).collect();
        let src = Bundle::hermitian(names, dims).unwrap();
        let m = sample::random_morphism(&mut rng, &src, k.bundle()).unwrap();
        let pulled = pullback(&m, &k).unwrap();
        let (vals, _) = hermitian_eigen(&pulled.gram());
        let pscale = 1.0 + op_norm(&pulled.gram());
        prop_assert!(vals[0] >= -1e-9 * pscale);
        prop_assert!(pulled.exchange_residual().unwrap() < 1e-9 * pscale);
    }

    #[test]
    fn induced_operators_are_functorial(seed in any::<u64>(), n_points in 1usize..4) {
        let mut rng = sample::rng(seed);
        let k3 = sample::random_positive_kernel(&mut rng, n_points, 2).unwrap();
        let mk = |tag: &str, rng: &mut rand_chacha::ChaCha8Rng| {
            let dims: Vec<usize> = (0..n_points).map(|_| rng.gen_range(1..=2)).collect();
            let names: Vec<String> = (0..n_points).map(|i| format!("{tag}{i}")).collect();
            Bundle::hermitian(names, dims).unwrap()
        };
        let src2 = mk("y", &mut rng);
        let m_a = sample::random_morphism(&mut rng, &src2, k3.bundle()).unwrap();
        let k2 = pullback(&m_a, &k3).unwrap();
        let src1 = mk("x", &mut rng);
        let m_b = sample::random_morphism(&mut rng, &src1, k2.bundle()).unwrap();
        let k1 = pullback(&m_b, &k2).unwrap();

        let r1 = Rkhs::build(k1).unwrap();
        let r2 = Rkhs::build(k2.clone()).unwrap();
        let r3 = Rkhs::build(k3.clone()).unwrap();
        let ind_a = induced_operator(&m_a, &r2, &r3).unwrap();
        let ind_b = induced_operator(&m_b, &r1, &r2).unwrap();
        let composed = BundleMorphism::compose(&m_a, &m_b).unwrap();
        let ind_c = induced_operator(&composed, &r1, &r3).unwrap();
        let lhs = &ind_a.matrix * &ind_b.matrix;
        let scale = 1.0 + op_norm(&ind_c.matrix);
        prop_assert!(max_abs(&(lhs - &ind_c.matrix)) < 1e-8 * scale);
    }
}
