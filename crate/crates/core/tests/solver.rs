mod common;

use common::*;
use radhess::classify::{classify, sandwich_check, ClassifyOptions, HTransform, Pair, SandwichSides, Verdict};
use radhess::iteration::{fixed_point_residual, solve, SolveOptions, SolveOutcome};
use radhess::kernels::{build_kernel_table, potential_profile, Kernel};
use radhess::limits::{estimate_from_samples, LimitOptions};
use radhess::classify::{p_integral_profile, PKind};

/// RK4 for `u″ + (2/r)u′ = u`, `u(0) = 1`, started from the Taylor series
/// `1 + r²/6 + r⁴/120` to step over the regular singular point.
fn rk4_oracle(r_max: f64, steps: usize) -> Vec<f64> {
    let h = r_max / steps as f64;
    let f = |r: f64, y: [f64; 2]| [y[1], y[0] - 2.0 * y[1] / r];
    let mut y = [1.0 + h * h / 6.0 + h.powi(4) / 120.0, h / 3.0 + h.powi(3) / 30.0];
    let mut out = vec![1.0, y[0]];
    for i in 1..steps {
        let r = i as f64 * h;
        let k1 = f(r, y);
        let k2 = f(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(y[0]);
    }
    out
}

#[test]
fn linear_system_matches_ode_oracle() {
    // p ≡ 1, f = t, a = b = 1: both components solve Δu = u, u = sinh(r)/r
    let spec = system(3, (1, 1), ["0", "0", "1", "1", "t", "t"], 1.0, 1.0);
    let opts = SolveOptions { r_max: 1.0, grid_n: 1024, ..Default::default() };
    let p = solve(&spec, &opts).unwrap().into_profile().unwrap();
    let m = p.grid.len() - 1;
    let oracle = rk4_oracle(1.0, 10 * m);
    for (i, &r) in p.grid.iter().enumerate() {
        let reference = oracle[10 * i];
        assert!((p.u1[i] - reference).abs() < 1e-6, "r = {r}: {} vs {reference}", p.u1[i]);
        assert!((p.u2[i] - reference).abs() < 1e-6);
        if r > 0.0 {
            assert!((reference - r.sinh() / r).abs() < 1e-9);
        }
    }
}

#[test]
fn closed_form_profile_and_residuals() {
    let spec = closed_form();
    let opts = SolveOptions { r_max: 5.0, grid_n: 8192, refine_cap: 0, ..Default::default() };
    let p = solve(&spec, &opts).unwrap().into_profile().unwrap();
    for (i, &r) in p.grid.iter().enumerate() {
        assert!((p.u1[i] - (r.powi(4) + 1.0)).abs() / (r.powi(4) + 1.0) < 5e-6);
        assert!((p.u2[i] - (r * r + 1.0)).abs() / (r * r + 1.0) < 5e-6);
    }
    let (e1, e2) = fixed_point_residual(&spec, &p).unwrap();
    assert!(e1.max(e2) < 10.0 * opts.tol);

    let g = p.grid.clone();
    let fd = |u: &[f64]| radhess::hessian::RadialProfile::from_samples(&g, u).unwrap();
    let res = radhess::hessian::pde_residual(&spec, &fd(&p.u1), &fd(&p.u2)).unwrap();
    let (s1, s2) = res.sup_norm();
    assert!(s1.max(s2) < 5e-3, "{s1} {s2}");
}

#[test]
fn blow_up_is_reported_not_raised() {
    let spec = system(3, (1, 1), ["0", "0", "1", "1", "t^2", "t^2"], 10.0, 10.0);
    let out = solve(&spec, &SolveOptions { r_max: 5.0, grid_n: 256, refine_cap: 0, ..Default::default() }).unwrap();
    match out {
        SolveOutcome::BlowUp(b) => assert!(b.radius > 0.0 && b.radius <= 5.0),
        SolveOutcome::Converged(_) => panic!("expected blow-up"),
    }
}

#[test]
fn upper_bound_chain_holds_along_the_iteration() {
    // H₁₂(u₁(r)) ≤ c̄₁ P̄₁₂(r) on the converged profile
    for (spec, w) in [(closed_form(), closed_form_witness()), (small_quadratic(), small_quadratic_witness()), (bounded(), bounded_witness())] {
        let p = solve(&spec, &SolveOptions { r_max: 4.0, grid_n: 2048, refine_cap: 0, ..Default::default() })
            .unwrap()
            .into_profile()
            .unwrap();
        let table = build_kernel_table(&spec, &p.grid).unwrap();
        let u = w.upper1.as_ref().unwrap();
        let h = HTransform::standard(&spec, Pair::OneTwo, &u.h, radhess::classify::growth_constants(&spec).unwrap().0).unwrap();
        let bar = p_integral_profile(&table, PKind::Bar12, &u.phibar).unwrap();
        for (i, &r) in p.grid.iter().enumerate() {
            let lhs = h.value(p.u1[i]).unwrap();
            let rhs = u.cbar * bar[i];
            assert!(lhs <= rhs + 1e-6 * rhs.max(1.0), "r = {r}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn bounded_profile_increments_decay() {
    // u(2R) − u(R) must shrink geometrically; the tail here is c/r, so the
    // ratio settles at exactly ½ and needs a long range to show it
    let p = solve(&bounded(), &SolveOptions { r_max: 512.0, grid_n: 65536, refine_cap: 0, ..Default::default() })
        .unwrap()
        .into_profile()
        .unwrap();
    let opts = LimitOptions { r_budget: 512.0, ..Default::default() };
    for u in [&p.u1, &p.u2] {
        let samples = opts.radii().into_iter().map(|r| (r, radhess::quadrature::interpolate(&p.grid, u, r))).collect();
        let est = estimate_from_samples(samples, &opts);
        assert!(est.is_finite(), "{:?}", est.evidence);
        assert!(est.limit() < 3.0);
    }
}

#[test]
fn verdicts_survive_grid_refinement() {
    for (spec, w) in [(closed_form(), closed_form_witness()), (bounded(), bounded_witness()), (small_quadratic(), small_quadratic_witness())] {
        let verdicts: Vec<Verdict> = [32, 64, 128]
            .iter()
            .map(|&steps| classify(&spec, &w, &ClassifyOptions { steps_per_r0: steps, ..Default::default() }).unwrap().verdict)
            .collect();
        assert!(verdicts.iter().all(|v| *v == verdicts[0]), "{verdicts:?}");
        assert_ne!(verdicts[0], Verdict::Inconclusive);
    }
}

#[test]
fn closed_form_without_witness_uses_remark_defaults() {
    let rep = classify(&closed_form(), &Default::default(), &ClassifyOptions::default()).unwrap();
    assert!(rep.remarks.lower1_defaulted && rep.remarks.lower2_defaulted);
    assert!(rep.p_under_12.as_ref().unwrap().is_divergent());
    assert!(rep.p_under_21.as_ref().unwrap().is_divergent());
}

#[test]
fn tiny_budget_is_inconclusive_and_names_the_blocker() {
    let opts = ClassifyOptions { limits: LimitOptions { r_budget: 4.0, ..Default::default() }, ..Default::default() };
    let rep = classify(&bounded(), &bounded_witness(), &opts).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive);
    assert_eq!(rep.blocking, Some("P_bar_12"));
}

#[test]
fn sandwich_holds_for_small_quadratic_system() {
    let spec = small_quadratic();
    let rep = classify(&spec, &small_quadratic_witness(), &ClassifyOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Thm2I);
    let p = solve(&spec, &SolveOptions { r_max: 10.0, grid_n: 1024, refine_cap: 0, ..Default::default() })
        .unwrap()
        .into_profile()
        .unwrap();
    let res = sandwich_check(&spec, &rep.envelopes, &p, SandwichSides::for_verdict(rep.verdict), 1e-9).unwrap();
    assert!(res.pass, "worst {} at node {}", res.worst_violation, res.worst_node);
}

#[test]
fn potential_of_constant_source_is_quadratic() {
    // k = 1, a = 0, p = 1, φ = 1 in N = 3: r²/6
    let spec = system(3, (1, 1), ["0", "0", "1", "1", "t", "t"], 1.0, 1.0);
    let g = radhess::quadrature::uniform_grid(2.0, 4096);
    let t = build_kernel_table(&spec, &g).unwrap();
    let v = potential_profile(&t, Kernel::G1, &vec![1.0; g.len()]);
    for (r, v) in g.iter().zip(&v) {
        assert!((v - r * r / 6.0).abs() < 1e-6);
    }
}
