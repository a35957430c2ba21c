//! Suite execution: dispatches a scenario to the library checks named by
//! the suite and aggregates a report.

use std::time::Instant;

use rkbundle::cpmap::{gns, stinespring, CpMap, Subalgebra};
use rkbundle::grassmann::{involutive_kernel, universal_kernel};
use rkbundle::kernel::{equivariance_check, hom_bound, pullback, pullback_characterization, Kernel, Rkhs};
use rkbundle::linalg::{cidentity, max_abs, smallest_singular_value, CMatrix};
use rkbundle::universality::{
    complexified_universality, homogeneous_kernel, invertibility_and_rank, transfer_kernel,
    verify_universal_hermitian, SampledHomogeneous,
};

use crate::report::Report;
use crate::scenario::Scenario;

#[derive(Debug)]
pub enum RunError {
    Input(String),
    UnknownSuite(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(m) => write!(f, "input error: {m}"),
            RunError::UnknownSuite(s) => write!(f, "unknown suite '{s}'"),
        }
    }
}

/// Optional tolerance override: the command-line flag or the scenario's
/// own tolerance, falling back to each check's documented default.
#[derive(Copy, Clone)]
struct Tol(Option<f64>);

impl Tol {
    fn at(self, default: f64) -> f64 {
        self.0.unwrap_or(default)
    }
}

pub fn run_suite(
    scenario: &Scenario,
    scenario_id: &str,
    suite: &str,
    tolerance_flag: Option<f64>,
) -> Result<Report, RunError> {
    let tol = Tol(tolerance_flag.or(scenario.tolerance()));
    let start = Instant::now();
    let mut report = Report::new(scenario_id, suite);
    match (scenario, suite) {
        (Scenario::Kernel { kernel, .. }, "check" | "positivity") => {
            kernel_basic_checks(kernel, tol, &mut report)?;
        }
        (Scenario::Kernel { kernel, .. }, "rkhs") => {
            kernel_basic_checks(kernel, tol, &mut report)?;
            rkhs_checks(kernel, tol, &mut report)?;
        }
        (Scenario::Kernel { kernel, morphism, .. }, "pullback") => {
            let m = morphism.as_ref().ok_or_else(|| {
                RunError::Input("pullback suite requires a 'morphism' payload".into())
            })?;
            kernel_basic_checks(kernel, tol, &mut report)?;
            let pulled = pullback(m, kernel).map_err(input_err)?;
            let pos = pulled.check_positive().map_err(input_err)?;
            report.push(
                "pullback-positive",
                pos.positive,
                Some(pos.min_eigenvalue),
                "pull-back of a positive kernel stays positive",
            );
            let hb = hom_bound(m, &pulled, kernel).map_err(input_err)?;
            report.push(
                "hom-bound",
                hb.is_morphism,
                Some(hb.null_residual),
                format!("least admissible M = {:.6}", hb.least_m),
            );
            let ch = pullback_characterization(m, &pulled, kernel).map_err(input_err)?;
            report.push(
                "pullback-characterization",
                ch.equal && ch.consistent,
                Some(ch.residual),
                format!("isometry: {}, least M = {:.6}", ch.isometry, ch.least_m),
            );
        }
        (Scenario::Kernel { kernel, .. }, "universality") => {
            kernel_basic_checks(kernel, tol, &mut report)?;
            kernel_universality_checks(kernel, tol, &mut report)?;
        }
        (Scenario::Grassmann { subspaces, involution, .. }, "check" | "positivity") => {
            let q = grassmann_kernel(subspaces, involution.as_ref())?;
            grassmann_basic_checks(&q, tol, &mut report)?;
        }
        (Scenario::Grassmann { subspaces, involution, .. }, "universality") => {
            let q = grassmann_kernel(subspaces, involution.as_ref())?;
            grassmann_basic_checks(&q, tol, &mut report)?;
            if involution.is_none() {
                kernel_universality_checks(&q, tol, &mut report)?;
            } else {
                report.push(
                    "universality",
                    true,
                    None,
                    "involutive Grassmannian: positivity and diagonal checks only",
                );
            }
        }
        (Scenario::CpMap { map, .. }, "check" | "positivity") => {
            cpmap_basic_checks(map, tol, &mut report)?;
        }
        (Scenario::CpMap { map, .. }, "stinespring") => {
            cpmap_basic_checks(map, tol, &mut report)?;
            stinespring_checks(map, tol, &mut report)?;
        }
        (Scenario::Homogeneous { .. }, "check" | "positivity") => {
            let (hk, _) = build_homogeneous(scenario)?;
            homogeneous_basic_checks(&hk, tol, &mut report)?;
        }
        (Scenario::Homogeneous { .. }, "universality") => {
            let (hk, h) = build_homogeneous(scenario)?;
            homogeneous_basic_checks(&hk, tol, &mut report)?;
            let action = hk.action_elements(&h).map_err(input_err)?;
            let eq = equivariance_check(&hk.kernel, &action).map_err(input_err)?;
            report.push(
                "equivariance",
                eq.pass,
                Some(eq.max_residual),
                "sampled action leaves the kernel invariant",
            );
            let s0 = (0..hk.kernel.bundle().n_points())
                .find(|&s| hk.kernel.bundle().base().involute(s) == s)
                .ok_or_else(|| RunError::Input("no self-involutive coset available".into()))?;
            let rep = complexified_universality(&hk.kernel, &action, s0, tol.at(1e-8)).map_err(input_err)?;
            report.push(
                "complexified-universality",
                rep.pass,
                Some(rep.residual),
                format!(
                    "zeta-orbit residual {:.3e}, pairs residual {:.3e}",
                    rep.zetaorbits_residual, rep.pairs_residual
                ),
            );
        }
        (Scenario::Gns { .. }, "check" | "gns") => {
            gns_checks(scenario, tol, &mut report)?;
        }
        (Scenario::Gns { .. }, "cat7") => {
            gns_checks(scenario, tol, &mut report)?;
            cat7_checks(scenario, tol, &mut report)?;
        }
        (_, other) => {
            return Err(RunError::UnknownSuite(format!(
                "{other}' for scenario kind '{}",
                scenario.kind()
            )));
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

pub fn default_suite(scenario: &Scenario) -> &'static str {
    match scenario {
        Scenario::Kernel { .. } | Scenario::Grassmann { .. } => "check",
        Scenario::CpMap { .. } => "check",
        Scenario::Homogeneous { .. } => "check",
        Scenario::Gns { .. } => "check",
    }
}

fn input_err(e: rkbundle::Error) -> RunError {
    RunError::Input(e.to_string())
}

fn kernel_basic_checks(kernel: &Kernel, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let v = kernel.bundle().validate();
    report.push(
        "bundle-valid",
        v.is_valid(),
        None,
        "pairings invertible and compatible with the involution",
    );
    let pos = kernel.check_positive().map_err(input_err)?;
    report.push(
        "kernel-positive",
        pos.positive,
        Some(pos.min_eigenvalue),
        "Gram matrix of the kernel is positive semidefinite",
    );
    let ex = kernel.exchange_residual().map_err(input_err)?;
    report.push(
        "exchange",
        ex <= tol.at(1e-9),
        Some(ex),
        "K(s,t) determines K(t^{-*},s^{-*}) by the exchange identity",
    );
    Ok(())
}

fn rkhs_checks(kernel: &Kernel, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let rkhs = Rkhs::build(kernel.clone()).map_err(input_err)?;
    report.push(
        "rkhs-built",
        true,
        None,
        format!("dim H^K = {}, generators = {}", rkhs.dim(), rkhs.generators().len()),
    );
    // reproducing identity on all generators: evaluating K_ξ at t gives
    // the kernel column
    let mut res = 0.0f64;
    for &(s, a) in rkhs.generators() {
        let f = rkhs.generator_coord(s, a);
        for t in 0..kernel.bundle().n_points() {
            let val = rkhs.evaluate(&f, t).map_err(input_err)?;
            let expected = kernel.block(t, s).column(a).into_owned();
            res = res.max(
                (val - expected).iter().map(|x| x.norm()).fold(0.0, f64::max),
            );
        }
    }
    report.push(
        "reproducing-identity",
        res <= tol.at(1e-8),
        Some(res),
        "point evaluation of generator functions matches kernel blocks",
    );
    Ok(())
}

fn kernel_universality_checks(kernel: &Kernel, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let rep = verify_universal_hermitian(kernel, tol.at(1e-8)).map_err(input_err)?;
    report.push(
        "hermitian-universality",
        rep.pass,
        Some(rep.residual),
        format!(
            "pull-back of the Grassmannian universal kernel; isometry: {}, least M = {:.6}",
            rep.isometry, rep.least_m
        ),
    );
    let ranks = invertibility_and_rank(kernel).map_err(input_err)?;
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for p in &ranks {
        if p.invertible && p.roundtrip_residual.is_finite() {
            worst = worst.max(p.roundtrip_residual);
        }
        detail.push(format!("{}: rank {}/{}", p.point, p.rank, p.fiber_dim));
    }
    report.push(
        "invertibility-and-rank",
        worst <= tol.at(1e-8),
        Some(worst),
        detail.join(", "),
    );
    Ok(())
}

fn grassmann_kernel(
    subspaces: &[rkbundle::linalg::Subspace],
    involution: Option<&rkbundle::grassmann::InvolutionIsometry>,
) -> Result<Kernel, RunError> {
    match involution {
        None => universal_kernel(subspaces).map_err(input_err),
        Some(c) => involutive_kernel(subspaces, c).map_err(input_err),
    }
}

fn grassmann_basic_checks(q: &Kernel, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let pos = q.check_positive().map_err(input_err)?;
    report.push(
        "grassmann-positive",
        pos.positive,
        Some(pos.min_eigenvalue),
        "universal kernel on the sampled Grassmannian is positive",
    );
    let mut diag = 0.0f64;
    for s in 0..q.bundle().n_points() {
        let d = q.bundle().dim(s);
        diag = diag.max(max_abs(&(q.block(s, s) - cidentity(d))));
    }
    report.push(
        "diagonal-identity",
        diag <= tol.at(1e-10),
        Some(diag),
        "Q(S,S) = id on every sampled subspace",
    );
    Ok(())
}

fn cpmap_basic_checks(map: &CpMap, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let sa = map.selfadjointness_residual().map_err(input_err)?;
    report.push("selfadjoint", sa <= tol.at(1e-9), Some(sa), "Φ(a†) = Φ(a)†");
    let cp = map.is_completely_positive().map_err(input_err)?;
    report.push("completely-positive", cp, None, "Choi matrix is positive semidefinite");
    let unital = map.is_unital(1e-8).map_err(input_err)?;
    report.push("unital", true, None, format!("Φ(1) = 1: {unital}"));
    Ok(())
}

fn stinespring_checks(map: &CpMap, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let st = stinespring(map).map_err(input_err)?;
    report.push(
        "dilation",
        st.dilation_residual <= tol.at(1e-8),
        Some(st.dilation_residual),
        format!("Φ(a) = V†π(a)V on a basis; dim K₀ = {}", st.space_dim),
    );
    report.push(
        "isometry",
        st.isometry_residual <= tol.at(1e-10) || !map.is_unital(1e-10).map_err(input_err)?,
        Some(st.isometry_residual),
        "V†V = 1 for unital Φ",
    );
    report.push(
        "representation",
        st.rep_residual <= tol.at(1e-8),
        Some(st.rep_residual),
        "π is a unital *-homomorphism on the domain basis",
    );
    // Choi comparison: the dilated map reproduces the Choi matrix
    let basis = map.domain().basis();
    let dilated: Vec<CMatrix> = basis
        .iter()
        .enumerate()
        .map(|(k, _)| st.isometry.adjoint() * st.rep_basis_image(k) * &st.isometry)
        .collect();
    let dilated_map = CpMap::new(map.domain().clone(), map.codomain_dim(), dilated)
        .map_err(input_err)?;
    let choi_res = max_abs(
        &(dilated_map.choi_matrix().map_err(input_err)? - map.choi_matrix().map_err(input_err)?),
    );
    report.push(
        "choi-match",
        choi_res <= tol.at(1e-8),
        Some(choi_res),
        "Choi matrix of V†π(·)V equals Choi(Φ)",
    );
    let cf = rkbundle::cpmap::compression_factorization(map).map_err(input_err)?;
    report.push(
        "compression-factorization",
        cf.pass,
        Some(cf.factorization_residual),
        format!(
            "Φ = V† Φ_K(π(·)) V; least M = {:.6}, equality residual {:.3e}",
            cf.least_m, cf.equality_residual
        ),
    );
    Ok(())
}

fn membership_predicate(name: &str) -> Result<Box<dyn Fn(&CMatrix) -> bool>, RunError> {
    match name {
        "diagonal" => Ok(Box::new(|m: &CMatrix| {
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
        })),
        other => Err(RunError::Input(format!(
            "unknown membership predicate '{other}' (supported: diagonal)"
        ))),
    }
}

fn build_homogeneous(
    scenario: &Scenario,
) -> Result<(rkbundle::universality::HomogeneousKernel, SampledHomogeneous), RunError> {
    let Scenario::Homogeneous { elements, rep, hb_basis, cosets, membership, .. } = scenario
    else {
        unreachable!("caller matched the scenario kind");
    };
    let member = membership_predicate(membership)?;
    let h = SampledHomogeneous::new(elements.clone(), rep.clone(), member, hb_basis.clone())
        .map_err(input_err)?;
    let hk = homogeneous_kernel(&h, cosets).map_err(input_err)?;
    Ok((hk, h))
}

fn homogeneous_basic_checks(
    hk: &rkbundle::universality::HomogeneousKernel,
    tol: Tol,
    report: &mut Report,
) -> Result<(), RunError> {
    let k = &hk.kernel;
    let mut diag = 0.0f64;
    for s in 0..k.bundle().n_points() {
        diag = diag.max(max_abs(&(k.block(s, s) - cidentity(k.bundle().dim(s)))));
    }
    report.push(
        "diagonal-identity",
        diag <= tol.at(1e-10),
        Some(diag),
        "K(s,s) = id at every sampled coset",
    );
    let kr = transfer_kernel(k.bundle(), &hk.transfer).map_err(input_err)?;
    let mut res = 0.0f64;
    for s in 0..k.bundle().n_points() {
        for t in 0..k.bundle().n_points() {
            res = res.max(max_abs(&(k.block(s, t) - kr.block(s, t))));
        }
    }
    report.push(
        "transfer-identity",
        res <= tol.at(1e-9),
        Some(res),
        "homogeneous kernel agrees with its transfer realization",
    );
    let pos = k.check_positive().map_err(input_err)?;
    report.push(
        "kernel-positive",
        pos.positive,
        Some(pos.min_eigenvalue),
        "homogeneous kernel is positive",
    );
    Ok(())
}

fn expectation_fn(
    name: &str,
    n: usize,
) -> Result<Box<dyn Fn(&CMatrix) -> CMatrix>, RunError> {
    match name {
        "diagonal" => Ok(Box::new(move |t: &CMatrix| {
            CMatrix::from_fn(n, n, |i, j| if i == j { t[(i, j)] } else { num_complex::Complex::new(0.0, 0.0) })
        })),
        other => Err(RunError::Input(format!(
            "unknown expectation '{other}' (supported: diagonal)"
        ))),
    }
}

fn gns_checks(scenario: &Scenario, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let Scenario::Gns { algebra, phi, .. } = scenario else {
        unreachable!("caller matched the scenario kind");
    };
    let st = gns(algebra.clone(), phi).map_err(input_err)?;
    report.push(
        "gns-dilation",
        st.dilation_residual <= tol.at(1e-8),
        Some(st.dilation_residual),
        format!("φ(a) = ⟨Ω, π(a)Ω⟩ on a basis; dim K₀ = {}", st.space_dim),
    );
    report.push(
        "gns-representation",
        st.rep_residual <= tol.at(1e-8),
        Some(st.rep_residual),
        "π is a unital *-homomorphism",
    );
    Ok(())
}

fn cat7_checks(scenario: &Scenario, tol: Tol, report: &mut Report) -> Result<(), RunError> {
    let Scenario::Gns { algebra, phi, subalgebra, expectation, group, cosets, .. } = scenario
    else {
        unreachable!("caller matched the scenario kind");
    };
    let sub = match subalgebra.as_str() {
        "diagonal" => Subalgebra::diagonal(algebra.ambient_dim()),
        other => {
            return Err(RunError::Input(format!(
                "unknown subalgebra '{other}' (supported: diagonal)"
            )))
        }
    };
    let e = expectation_fn(expectation, algebra.ambient_dim())?;
    let rep = rkbundle::universality::tracial_gns_suite(
        algebra, &sub, &*e, phi, group, cosets, tol.at(1e-8),
    )
    .map_err(input_err)?;
    report.push(
        "theta1-pullback",
        rep.theta1_residual <= tol.at(1e-8),
        Some(rep.theta1_residual),
        "Θ₁*K_ρ = K_λ",
    );
    report.push(
        "theta2-pullback",
        rep.theta2_residual <= tol.at(1e-8),
        Some(rep.theta2_residual),
        "Θ₂*K_λ = K_ρ",
    );
    report.push(
        "theta3-pullback",
        rep.theta3_residual <= tol.at(1e-8),
        Some(rep.theta3_residual),
        "Θ₃*K_π = K_π",
    );
    report.push(
        "tau-involution",
        rep.tau_involution_residual <= tol.at(1e-10),
        Some(rep.tau_involution_residual),
        "τ̄² = id on H^{K_π}",
    );
    report.push(
        "tau-isometry",
        rep.tau_isometry_residual <= tol.at(1e-8),
        Some(rep.tau_isometry_residual),
        "τ̄ is an antilinear isometry on generators",
    );
    Ok(())
}
