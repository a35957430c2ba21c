//! Acceptance suite: one criterion per test, one printed pass/fail line each.

use std::time::Instant;

use rkbundle::bundle::{BaseSet, Bundle, BundleMorphism};
use rkbundle::cpmap::{
    compression_factorization, gns, stinespring, CpMap, MatrixAlgebra, Subalgebra,
};
use rkbundle::grassmann::universal_kernel;
use rkbundle::kernel::{induced_operator, pullback, Kernel, Rkhs};
use rkbundle::linalg::{
    c, cidentity, cr, max_abs, orthonormal_basis, smallest_singular_value, CMatrix, Pairing,
};
use rkbundle::sample;
use rkbundle::universality::{
    complexified_universality, homogeneous_kernel, tracial_gns_suite, transfer_kernel,
    verify_universal_hermitian, HomogeneousKernel, SampledHomogeneous,
};
use rkbundle::Error;

fn verdict(criterion: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[{status}] {criterion}: {detail}");
    assert!(pass, "{criterion}: {detail}");
}

fn diagonal_membership() -> Box<dyn Fn(&CMatrix) -> bool> {
    Box::new(|m: &CMatrix| {
        let mut off = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    off = off.max(m[(i, j)].norm());
                }
            }
        }
        off <= 1e-8 * max_abs(m).max(1.0)
            && smallest_singular_value(m) > 1e-10 * max_abs(m).max(1.0)
    })
}

/// order-5 rotation group in M₂ with the tautological representation and
/// H_B = span{e₁}; five diagonal cosets
fn c5_homogeneous() -> (SampledHomogeneous, Vec<usize>) {
    let theta = 2.0 * std::f64::consts::PI / 5.0;
    let elems: Vec<CMatrix> = (0..5)
        .map(|k| {
            let a = theta * k as f64;
            CMatrix::from_row_slice(2, 2, &[cr(a.cos()), cr(-a.sin()), cr(a.sin()), cr(a.cos())])
        })
        .collect();
    let rep = elems.clone();
    let hb = cidentity(2).columns(0, 1).into_owned();
    let h = SampledHomogeneous::new(elems, rep, diagonal_membership(), hb).unwrap();
    let cosets = (0..5).collect();
    (h, cosets)
}

/// permutation group S₃ in M₃ with H_B = span{e₁}; six diagonal cosets
fn s3_homogeneous() -> (SampledHomogeneous, Vec<usize>) {
    let perms: [[usize; 3]; 6] =
        [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    let elems: Vec<CMatrix> = perms
        .iter()
        .map(|p| CMatrix::from_fn(3, 3, |i, j| if p[j] == i { cr(1.0) } else { cr(0.0) }))
        .collect();
    let rep = elems.clone();
    let hb = cidentity(3).columns(0, 1).into_owned();
    let h = SampledHomogeneous::new(elems, rep, diagonal_membership(), hb).unwrap();
    let cosets = (0..6).collect();
    (h, cosets)
}

/// the 9-element matrix sample closed under inverse and `u ↦ u^{-*}`, used
/// for the tracial GNS suite; six diagonal cosets
fn m2_group() -> (Vec<CMatrix>, Vec<usize>) {
    let rows: [[f64; 4]; 9] = [
        [1.0, 0.0, 0.0, 1.0],
        [2.0, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 2.0],
        [1.0, 1.0, 0.0, 1.0],
        [1.0, -1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0, 1.0],
        [1.0, 0.0, 1.0, 1.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
    ];
    let group = rows
        .iter()
        .map(|r| CMatrix::from_row_slice(2, 2, &[cr(r[0]), cr(r[1]), cr(r[2]), cr(r[3])]))
        .collect();
    (group, vec![0, 3, 4, 5, 6, 7])
}

fn tr_half(n: usize) -> Vec<rkbundle::C> {
    MatrixAlgebra::full(n)
        .basis()
        .iter()
        .map(|b| {
            let tr: rkbundle::C = (0..n).map(|i| b[(i, i)]).sum();
            tr / cr(n as f64)
        })
        .collect()
}

#[test]
fn criterion_1_hermitian_universality() {
    let start = Instant::now();
    let mut rng = sample::rng(101);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n_points = 1 + (i % 5);
        let k = sample::random_positive_kernel(&mut rng, n_points, 3).unwrap();
        let rep = verify_universal_hermitian(&k, 1e-8).unwrap();
        worst = worst.max(rep.residual);
        assert!(rep.pass, "instance {i} residual {}", rep.residual);
    }
    let elapsed = start.elapsed();
    verdict(
        "criterion 1 (hermitian universality, 100 random kernels)",
        worst <= 1e-8 && elapsed.as_secs_f64() < 10.0,
        format!("max residual {worst:.3e}, elapsed {:.2}s", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_2_complexified_universality() {
    let mut worst = 0.0f64;
    for (h, cosets) in [c5_homogeneous(), s3_homogeneous()] {
        assert!(cosets.len() >= 4);
        let hk = homogeneous_kernel(&h, &cosets).unwrap();
        let action = hk.action_elements(&h).unwrap();
        let rep = complexified_universality(&hk.kernel, &action, 0, 1e-8).unwrap();
        assert!(rep.pass, "residual {}", rep.residual);
        worst = worst.max(rep.residual);
    }
    verdict(
        "criterion 2 (complexified universality on M2/M3 coset kernels)",
        worst <= 1e-8,
        format!("max residual {worst:.3e} over 5- and 6-coset samples"),
    );
}

#[test]
fn criterion_3_stinespring_and_gns() {
    let mut rng = sample::rng(303);
    let mut worst_dilation = 0.0f64;
    let mut worst_isometry = 0.0f64;
    let mut worst_choi = 0.0f64;
    for i in 0..50 {
        let n = 2 + (i % 2);
        let k = 1 + (i % 3);
        let phi = sample::random_unital_cp(&mut rng, n, k).unwrap();
        let st = stinespring(&phi).unwrap();
        worst_dilation = worst_dilation.max(st.dilation_residual);
        worst_isometry = worst_isometry.max(st.isometry_residual);
        let dilated: Vec<CMatrix> = (0..n * n)
            .map(|j| st.isometry.adjoint() * st.rep_basis_image(j) * &st.isometry)
            .collect();
        let dilated_map = CpMap::new(phi.domain().clone(), n, dilated).unwrap();
        worst_choi = worst_choi.max(max_abs(
            &(dilated_map.choi_matrix().unwrap() - phi.choi_matrix().unwrap()),
        ));
    }
    // GNS special case: φ = tr/2 on M₂, hand-built Gram oracle, dim K₀ = 4
    let algebra = MatrixAlgebra::full(2);
    let phi = tr_half(2);
    let st = gns(algebra.clone(), &phi).unwrap();
    let basis = algebra.basis();
    let hand = CMatrix::from_fn(4, 4, |k, l| {
        let prod = basis[k].adjoint() * &basis[l];
        ((0..2).map(|i| prod[(i, i)]).sum::<rkbundle::C>()) / cr(2.0)
    });
    let gram_res = max_abs(&(&st.quotient.gram - hand));
    let pass = worst_dilation <= 1e-8
        && worst_isometry <= 1e-10
        && worst_choi <= 1e-8
        && st.space_dim == 4
        && gram_res <= 1e-12
        && st.dilation_residual <= 1e-10;
    verdict(
        "criterion 3 (Stinespring dilations, 50 random unital CP maps + GNS tr/2)",
        pass,
        format!(
            "dilation {worst_dilation:.3e}, V†V−1 {worst_isometry:.3e}, Choi {worst_choi:.3e}, GNS dim {} gram residual {gram_res:.3e}",
            st.space_dim
        ),
    );
}

#[test]
fn criterion_4_compression_factorization() {
    let mut rng = sample::rng(303);
    let mut worst_fact = 0.0f64;
    let mut worst_m = 0.0f64;
    let mut worst_eq = 0.0f64;
    for i in 0..50 {
        let n = 2 + (i % 2);
        let k = 1 + (i % 3);
        let phi = sample::random_unital_cp(&mut rng, n, k).unwrap();
        let cf = compression_factorization(&phi).unwrap();
        assert!(cf.pass, "instance {i}");
        worst_fact = worst_fact.max(cf.factorization_residual);
        worst_m = worst_m.max((cf.least_m - 1.0).abs());
        worst_eq = worst_eq.max(cf.equality_residual);
    }
    verdict(
        "criterion 4 (compression factorization, same 50 CP maps)",
        worst_fact <= 1e-8 && worst_m <= 1e-8 && worst_eq <= 1e-8,
        format!(
            "factorization {worst_fact:.3e}, |least M − 1| {worst_m:.3e}, equality {worst_eq:.3e}"
        ),
    );
}

#[test]
fn criterion_5_tracial_suite() {
    let algebra = MatrixAlgebra::full(2);
    let sub = Subalgebra::diagonal(2);
    let e = |t: &CMatrix| {
        CMatrix::from_fn(2, 2, |i, j| if i == j { t[(i, j)] } else { c(0.0, 0.0) })
    };
    let phi = tr_half(2);
    let (group, cosets) = m2_group();
    assert!(cosets.len() >= 4);
    let rep = tracial_gns_suite(&algebra, &sub, &e, &phi, &group, &cosets, 1e-8).unwrap();
    let worst = rep.theta1_residual.max(rep.theta2_residual).max(rep.theta3_residual);
    verdict(
        "criterion 5 (tracial GNS suite on M2 with diagonal B)",
        rep.pass && worst <= 1e-8 && rep.tau_involution_residual <= 1e-10,
        format!(
            "pull-back identities {worst:.3e}, tau involution {:.3e}",
            rep.tau_involution_residual
        ),
    );
}

#[test]
fn criterion_6_kernel_category_laws() {
    let mut rng = sample::rng(606);
    // exchange identity on generated positive kernels
    let mut worst_exchange = 0.0f64;
    let mut kernels: Vec<Kernel> = (0..20)
        .map(|i| sample::random_positive_kernel(&mut rng, 1 + (i % 5), 3).unwrap())
        .collect();
    for (h, cosets) in [c5_homogeneous(), s3_homogeneous()] {
        kernels.push(homogeneous_kernel(&h, &cosets).unwrap().kernel);
    }
    for k in &kernels {
        worst_exchange = worst_exchange.max(k.exchange_residual().unwrap());
    }
    // functoriality of the induced RKHS operators on composable pairs
    let mut worst_funct = 0.0f64;
    for _ in 0..50 {
        let k3 = sample::random_positive_kernel(&mut rng, 3, 2).unwrap();
        let src2 = sample::random_positive_kernel(&mut rng, 3, 2).unwrap();
        let m_a = sample::random_morphism(&mut rng, src2.bundle(), k3.bundle()).unwrap();
        let k2 = pullback(&m_a, &k3).unwrap();
        let src1 = sample::random_positive_kernel(&mut rng, 3, 2).unwrap();
        let m_b = sample::random_morphism(&mut rng, src1.bundle(), k2.bundle()).unwrap();
        let k1 = pullback(&m_b, &k2).unwrap();
        let r1 = Rkhs::build(k1.clone()).unwrap();
        let r2 = Rkhs::build(k2.clone()).unwrap();
        let r3 = Rkhs::build(k3.clone()).unwrap();
        let h_a = induced_operator(&m_a, &r2, &r3).unwrap();
        let h_b = induced_operator(&m_b, &r1, &r2).unwrap();
        let comp = BundleMorphism::compose(&m_a, &m_b).unwrap();
        let h_c = induced_operator(&comp, &r1, &r3).unwrap();
        let scale = max_abs(&h_c.matrix).max(1.0);
        worst_funct =
            worst_funct.max(max_abs(&(&h_a.matrix * &h_b.matrix - &h_c.matrix)) / scale);
    }
    // pull-backs of positive kernels stay positive
    let mut worst_eig = 0.0f64;
    for _ in 0..50 {
        let k = sample::random_positive_kernel(&mut rng, 4, 3).unwrap();
        let src = sample::random_positive_kernel(&mut rng, 4, 3).unwrap();
        let m = sample::random_morphism(&mut rng, src.bundle(), k.bundle()).unwrap();
        let pulled = pullback(&m, &k).unwrap();
        let pos = pulled.check_positive().unwrap();
        worst_eig = worst_eig.min(pos.min_eigenvalue);
    }
    verdict(
        "criterion 6 (kernel category laws)",
        worst_exchange <= 1e-9 && worst_funct <= 1e-10 && worst_eig >= -1e-9,
        format!(
            "exchange {worst_exchange:.3e}, functoriality {worst_funct:.3e}, min pull-back eigenvalue {worst_eig:.3e}"
        ),
    );
}

#[test]
fn criterion_7_structural_identities() {
    // K^R(s,s) = id on random transfer data
    let mut rng = sample::rng(707);
    let mut worst_diag = 0.0f64;
    for _ in 0..20 {
        let frames: Vec<CMatrix> =
            (0..3).map(|_| sample::random_matrix(&mut rng, 5, 2)).collect();
        let pairings: Vec<Pairing> = frames
            .iter()
            .map(|f| Pairing::new(f.adjoint() * f).unwrap())
            .collect();
        let base =
            BaseSet::new((0..3).map(|i| format!("z{i}")).collect(), vec![0, 1, 2]).unwrap();
        let bundle = Bundle::new(base, vec![2; 3], pairings).unwrap();
        let k = transfer_kernel(&bundle, &frames).unwrap();
        for s in 0..3 {
            worst_diag = worst_diag.max(max_abs(&(k.block(s, s) - cidentity(2))));
        }
    }
    // Q_H(S,S) = id on random subspaces
    let mut worst_q = 0.0f64;
    for _ in 0..20 {
        let subspaces: Vec<_> = (0..3)
            .map(|_| orthonormal_basis(&sample::random_matrix(&mut rng, 5, 2)))
            .collect();
        let q = universal_kernel(&subspaces).unwrap();
        for s in 0..3 {
            worst_q = worst_q.max(max_abs(&(q.block(s, s) - cidentity(q.bundle().dim(s)))));
        }
    }
    // homogeneous ≡ transfer, and the zeta-orbit identity
    let mut worst_hom = 0.0f64;
    let mut worst_orbits = 0.0f64;
    for (h, cosets) in [c5_homogeneous(), s3_homogeneous()] {
        let hk: HomogeneousKernel = homogeneous_kernel(&h, &cosets).unwrap();
        let kr = transfer_kernel(hk.kernel.bundle(), &hk.transfer).unwrap();
        for s in 0..cosets.len() {
            for t in 0..cosets.len() {
                worst_hom =
                    worst_hom.max(max_abs(&(hk.kernel.block(s, t) - kr.block(s, t))));
            }
        }
        let action = hk.action_elements(&h).unwrap();
        let rep = complexified_universality(&hk.kernel, &action, 0, 1e-8).unwrap();
        worst_orbits = worst_orbits.max(rep.zetaorbits_residual);
    }
    verdict(
        "criterion 7 (structural identities)",
        worst_diag <= 1e-10 && worst_q <= 1e-10 && worst_hom <= 1e-9 && worst_orbits <= 1e-9,
        format!(
            "K^R diagonal {worst_diag:.3e}, Q diagonal {worst_q:.3e}, homogeneous≡transfer {worst_hom:.3e}, zeta orbits {worst_orbits:.3e}"
        ),
    );
}

#[test]
fn criterion_8_negative_controls() {
    // the transpose map is positive but not completely positive
    let transpose = CpMap::transpose_map(2);
    let cp = transpose.is_completely_positive().unwrap();
    let choi = transpose.choi_matrix().unwrap();
    let (vals, _) = rkbundle::linalg::hermitian_eigen(&choi);
    let min_choi = vals.iter().cloned().fold(f64::INFINITY, f64::min);

    // a kernel with a −1 diagonal block is not positive
    let bundle = Bundle::hermitian(vec!["z".into()], vec![1]).unwrap();
    let bad = Kernel::from_fn(bundle, |_, _| CMatrix::from_row_slice(1, 1, &[cr(-1.0)])).unwrap();
    let pos = bad.check_positive().unwrap();

    // a non-tracial state is rejected by the tracial suite
    let algebra = MatrixAlgebra::full(2);
    let sub = Subalgebra::diagonal(2);
    let e = |t: &CMatrix| {
        CMatrix::from_fn(2, 2, |i, j| if i == j { t[(i, j)] } else { c(0.0, 0.0) })
    };
    let phi: Vec<rkbundle::C> = algebra
        .basis()
        .iter()
        .map(|b| cr(0.75) * b[(0, 0)] + cr(0.25) * b[(1, 1)])
        .collect();
    let (group, cosets) = m2_group();
    let err = tracial_gns_suite(&algebra, &sub, &e, &phi, &group, &cosets, 1e-8);
    let rejected = matches!(&err, Err(Error::Precondition(msg)) if msg.contains("tracial"));

    verdict(
        "criterion 8 (negative controls)",
        !cp && min_choi < -0.5 && !pos.positive && pos.min_eigenvalue < -0.5 && rejected,
        format!(
            "transpose Choi min eigenvalue {min_choi:.3}, bad-kernel min eigenvalue {:.3}, non-tracial rejection: {rejected}",
            pos.min_eigenvalue
        ),
    );
}

#[test]
fn criterion_9_cli_demos() {
    use assert_cmd::Command;
    let start = Instant::now();
    for name in ["szego", "gaussian", "m2-diagonal-gns", "kraus-cp", "tautological-c3"] {
        Command::cargo_bin("rkbundle")
            .unwrap()
            .args(["demo", name])
            .assert()
            .success();
    }
    let elapsed = start.elapsed();
    verdict(
        "criterion 9 (CLI demos end-to-end)",
        elapsed.as_secs_f64() < 60.0,
        format!("five demos exited 0 in {:.2}s", elapsed.as_secs_f64()),
    );
}
