#![allow(dead_code)]

use radhess::classify::{GrowthWitness, LowerWitness, UpperWitness};
use radhess::{parse, ProblemSpec};

/// `[a1, a2, p1, p2, f1, f2]` in dimension `n` with orders `k1, k2`.
pub fn system(n: u32, k: (u32, u32), funcs: [&str; 6], a: f64, b: f64) -> ProblemSpec {
    let e = |s: &str| parse(s).unwrap();
    ProblemSpec {
        n,
        k1: k.0,
        k2: k.1,
        a1: e(funcs[0]),
        a2: e(funcs[1]),
        p1: e(funcs[2]),
        p2: e(funcs[3]),
        f1: e(funcs[4]),
        f2: e(funcs[5]),
        central_a: a,
        central_b: b,
    }
}

/// Gradient-term system with entire solution `(r⁴ + 1, r² + 1)` in `N = 3`.
pub fn closed_form() -> ProblemSpec {
    system(3, (1, 1), ["1", "1", "4*(t^3+(N+2)*t^2)/sqrt(t^2+1)", "2*(t+N)/(t^4+1)", "sqrt(t)", "t"], 1.0, 1.0)
}

pub fn closed_form_witness() -> GrowthWitness {
    GrowthWitness { upper1: upper("sqrt(t)", "sqrt(t)", 1.0), upper2: upper("t", "t", 1.0), ..Default::default() }
}

pub fn bounded() -> ProblemSpec {
    system(3, (1, 1), ["0", "0", "exp(-t)", "exp(-t)", "t", "t"], 1.0, 1.0)
}

pub fn bounded_witness() -> GrowthWitness {
    GrowthWitness { upper1: upper("t", "t", 1.0), upper2: upper("t", "t", 1.0), lower1: lower("t", 1.0), lower2: lower("t", 1.0) }
}

pub fn small_quadratic() -> ProblemSpec {
    system(3, (1, 1), ["0", "0", "1e-3*exp(-t)", "1e-3*exp(-t)", "t^2", "t^2"], 1.0, 1.0)
}

pub fn small_quadratic_witness() -> GrowthWitness {
    GrowthWitness { upper1: upper("t^2", "t^2", 1.0), upper2: upper("t^2", "t^2", 1.0), ..Default::default() }
}

pub fn upper(h: &str, phi: &str, c: f64) -> Option<UpperWitness> {
    Some(UpperWitness { h: parse(h).unwrap(), phibar: parse(phi).unwrap(), cbar: c })
}

pub fn lower(phi: &str, c: f64) -> Option<LowerWitness> {
    Some(LowerWitness { phiunder: parse(phi).unwrap(), cunder: c })
}

pub fn sup_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
