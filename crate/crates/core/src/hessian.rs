//! Radial k-Hessian operators.
//!
//! For a radial function `u(x) = ξ(|x|)` the Hessian eigenvalues are
//! `(ξ″, ξ′/r, …, ξ′/r)` for `r > 0` and `(ξ″(0), …, ξ″(0))` at the origin,
//! so `S_k` reduces to a closed form in `ξ′` and `ξ″`.

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::problem::{Coefficient, ProblemSpec, SpecError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HessianError {
    #[error("invalid Hessian order k = {k} for dimension N = {n}")]
    InvalidOrder { k: u32, n: u32 },
    #[error("profile arrays have inconsistent lengths")]
    LengthMismatch,
    #[error("grid must start at 0 and be strictly increasing")]
    BadGrid,
    #[error("finite differences need a uniform grid with at least 4 nodes")]
    NeedUniformGrid,
    #[error("profiles are sampled on different grids")]
    GridMismatch,
    #[error("evaluating candidate at r = {r}: {source}")]
    Candidate { r: f64, source: EvalError },
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// `n! / (k! (n-k)!)` as a float; zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Samples of a radial function and its first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub xi: Vec<f64>,
    pub dxi: Vec<f64>,
    pub ddxi: Vec<f64>,
}

fn check_grid(grid: &[f64]) -> Result<(), HessianError> {
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HessianError::BadGrid);
    }
    Ok(())
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, xi: Vec<f64>, dxi: Vec<f64>, ddxi: Vec<f64>) -> Result<Self, HessianError> {
        check_grid(&grid)?;
        if xi.len() != grid.len() || dxi.len() != grid.len() || ddxi.len() != grid.len() {
            return Err(HessianError::LengthMismatch);
        }
        Ok(RadialProfile { grid, xi, dxi, ddxi })
    }

    /// Samples a closed-form profile; derivatives come from forward-mode
    /// differentiation of the expression, so they are exact up to rounding.
    pub fn from_expr(grid: &[f64], expr: &Expr, n: u32) -> Result<Self, HessianError> {
        check_grid(grid)?;
        let mut xi = Vec::with_capacity(grid.len());
        let mut dxi = Vec::with_capacity(grid.len());
        let mut ddxi = Vec::with_capacity(grid.len());
        for &r in grid {
            let j = expr.eval_jet(r, n).map_err(|source| HessianError::Candidate { r, source })?;
            xi.push(j.value);
            dxi.push(j.d1);
            ddxi.push(j.d2);
        }
        dxi[0] = 0.0;
        Ok(RadialProfile { grid: grid.to_vec(), xi, dxi, ddxi })
    }

    /// Derivatives by second-order finite differences: central in the
    /// interior, one-sided at both ends. `ξ′(0)` is pinned to 0.
    pub fn from_samples(grid: &[f64], xi: &[f64]) -> Result<Self, HessianError> {
        check_grid(grid)?;
        if xi.len() != grid.len() {
            return Err(HessianError::LengthMismatch);
        }
        let m = grid.len();
        if m < 4 {
            return Err(HessianError::NeedUniformGrid);
        }
        let h = grid[1] - grid[0];
        if grid.iter().enumerate().any(|(i, &r)| (r - i as f64 * h).abs() > 1e-9 * h.max(r)) {
            return Err(HessianError::NeedUniformGrid);
        }
        let mut dxi = vec![0.0; m];
        let mut ddxi = vec![0.0; m];
        for i in 1..m - 1 {
            dxi[i] = (xi[i + 1] - xi[i - 1]) / (2.0 * h);
            ddxi[i] = (xi[i + 1] - 2.0 * xi[i] + xi[i - 1]) / (h * h);
        }
        let l = m - 1;
        dxi[l] = (3.0 * xi[l] - 4.0 * xi[l - 1] + xi[l - 2]) / (2.0 * h);
        ddxi[0] = (2.0 * xi[0] - 5.0 * xi[1] + 4.0 * xi[2] - xi[3]) / (h * h);
        ddxi[l] = (2.0 * xi[l] - 5.0 * xi[l - 1] + 4.0 * xi[l - 2] - xi[l - 3]) / (h * h);
        Ok(RadialProfile { grid: grid.to_vec(), xi: xi.to_vec(), dxi, ddxi })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianEigenvalues {
    pub lambda: Vec<f64>,
}

impl HessianEigenvalues {
    /// Sum of all `k × k` principal minors of `diag(lambda)`, i.e. the
    /// elementary symmetric polynomial of degree `k`.
    pub fn elementary_symmetric(&self, k: usize) -> f64 {
        let mut e = vec![0.0; k + 1];
        e[0] = 1.0;
        for &l in &self.lambda {
            for j in (1..=k).rev() {
                e[j] += l * e[j - 1];
            }
        }
        e[k]
    }
}

pub fn eigenvalues_radial(p: &RadialProfile, i: usize, n: u32) -> HessianEigenvalues {
    let r = p.grid[i];
    let n = n as usize;
    let lambda = if r == 0.0 {
        vec![p.ddxi[i]; n]
    } else {
        let mut v = vec![p.dxi[i] / r; n];
        v[0] = p.ddxi[i];
        v
    };
    HessianEigenvalues { lambda }
}

/// `S_k` of the radial Hessian at radius `r`.
pub fn s_k(dxi: f64, ddxi: f64, r: f64, k: u32, n: u32) -> Result<f64, HessianError> {
    if k < 1 || k > n {
        return Err(HessianError::InvalidOrder { k, n });
    }
    if r == 0.0 {
        return Ok(binomial(n, k) * ddxi.powi(k as i32));
    }
    let c = binomial(n - 1, k - 1);
    let q = dxi / r;
    let qk1 = q.powi(k as i32 - 1);
    Ok(c * ddxi * qk1 + c * ((n - k) as f64 / k as f64) * qk1 * q)
}

/// Pointwise residuals of both equations, plus nodes where a candidate has
/// a negative derivative (reported, not rejected).
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub negative_slope_nodes: Vec<usize>,
}

impl Residuals {
    pub fn sup_norm(&self) -> (f64, f64) {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (sup(&self.r1), sup(&self.r2))
    }
}

pub fn pde_residual(spec: &ProblemSpec, u1: &RadialProfile, u2: &RadialProfile) -> Result<Residuals, HessianError> {
    if u1.grid != u2.grid {
        return Err(HessianError::GridMismatch);
    }
    let m = u1.len();
    let mut r1 = Vec::with_capacity(m);
    let mut r2 = Vec::with_capacity(m);
    let mut negative_slope_nodes = Vec::new();
    for i in 0..m {
        let r = u1.grid[i];
        let lhs1 = s_k(u1.dxi[i], u1.ddxi[i], r, spec.k1, spec.n)?
            + spec.eval(Coefficient::A1, r)? * u1.dxi[i].abs().powi(spec.k1 as i32);
        let rhs1 = spec.eval(Coefficient::P1, r)? * spec.eval(Coefficient::F1, u2.xi[i])?;
        let lhs2 = s_k(u2.dxi[i], u2.ddxi[i], r, spec.k2, spec.n)?
            + spec.eval(Coefficient::A2, r)? * u2.dxi[i].abs().powi(spec.k2 as i32);
        let rhs2 = spec.eval(Coefficient::P2, r)? * spec.eval(Coefficient::F2, u1.xi[i])?;
        r1.push(lhs1 - rhs1);
        r2.push(lhs2 - rhs2);
        if u1.dxi[i] < 0.0 || u2.dxi[i] < 0.0 {
            negative_slope_nodes.push(i);
        }
    }
    Ok(Residuals { r1, r2, negative_slope_nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::problem::fixtures;
    use proptest::prelude::*;

    fn grid(r_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| r_max * i as f64 / n as f64).collect()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
        for n in 1..12 {
            for k in 1..n {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
    }

    #[test]
    fn eigenvalues_of_examples() {
        let g = grid(2.0, 4);
        let half_sq = RadialProfile::from_expr(&g, &parse("t^2/2").unwrap(), 5).unwrap();
        for i in 0..g.len() {
            assert_eq!(eigenvalues_radial(&half_sq, i, 5).lambda, vec![1.0; 5]);
        }
        let quartic = RadialProfile::from_expr(&g, &parse("t^4+1").unwrap(), 3).unwrap();
        assert_eq!(eigenvalues_radial(&quartic, 2, 3).lambda, vec![12.0, 4.0, 4.0]);
        let flat = RadialProfile::from_expr(&g, &parse("7").unwrap(), 3).unwrap();
        assert_eq!(eigenvalues_radial(&flat, 3, 3).lambda, vec![0.0; 3]);
    }

    #[test]
    fn s_k_examples() {
        assert_eq!(s_k(1.0, 1.0, 1.0, 2, 3).unwrap(), 3.0);
        assert_eq!(s_k(4.0, 12.0, 1.0, 1, 3).unwrap(), 20.0);
        assert_eq!(s_k(0.0, 0.0, 0.7, 2, 4).unwrap(), 0.0);
        assert_eq!(s_k(0.0, 2.0, 0.0, 2, 3).unwrap(), 12.0);
        assert!(matches!(s_k(1.0, 1.0, 1.0, 0, 3), Err(HessianError::InvalidOrder { .. })));
        assert!(matches!(s_k(1.0, 1.0, 1.0, 4, 3), Err(HessianError::InvalidOrder { .. })));
    }

    #[test]
    fn laplacian_and_monge_ampere_reductions() {
        let (d, dd, r) = (0.8, -1.3, 0.6);
        for n in 3..=8u32 {
            let lap = s_k(d, dd, r, 1, n).unwrap();
            assert!((lap - (dd + (n - 1) as f64 * d / r)).abs() < 1e-12);
            let det = s_k(d, dd, r, n, n).unwrap();
            let p = RadialProfile::new(vec![0.0, r], vec![0.0; 2], vec![0.0, d], vec![0.0, dd]).unwrap();
            let lambda = eigenvalues_radial(&p, 1, n).lambda;
            let product: f64 = lambda.iter().product();
            assert!((det - product).abs() < 1e-12 * product.abs().max(1.0));
        }
    }

    #[test]
    fn closed_form_has_zero_residual() {
        let spec = fixtures::closed_form();
        let g = grid(5.0, 200);
        let u1 = RadialProfile::from_expr(&g, &parse("t^4+1").unwrap(), 3).unwrap();
        let u2 = RadialProfile::from_expr(&g, &parse("t^2+1").unwrap(), 3).unwrap();
        let res = pde_residual(&spec, &u1, &u2).unwrap();
        let (s1, s2) = res.sup_norm();
        assert!(s1 < 1e-9 && s2 < 1e-9, "{s1} {s2}");
        assert!(res.negative_slope_nodes.is_empty());
    }

    #[test]
    fn finite_difference_residual_is_second_order() {
        let spec = fixtures::closed_form();
        let mut prev = f64::INFINITY;
        for n in [100usize, 200, 400] {
            let g = grid(5.0, n);
            let xi1: Vec<f64> = g.iter().map(|r| r.powi(4) + 1.0).collect();
            let xi2: Vec<f64> = g.iter().map(|r| r * r + 1.0).collect();
            let u1 = RadialProfile::from_samples(&g, &xi1).unwrap();
            let u2 = RadialProfile::from_samples(&g, &xi2).unwrap();
            let (s1, _) = pde_residual(&spec, &u1, &u2).unwrap().sup_norm();
            assert!(s1 < prev / 3.5, "{s1} vs {prev}");
            prev = s1;
        }
    }

    #[test]
    fn constant_profiles_with_zero_sources() {
        let spec = fixtures::spec(3, 1, 2, "0", "0", "0", "0", "t", "t", 2.0, 3.0);
        let g = grid(1.0, 8);
        let u1 = RadialProfile::from_expr(&g, &parse("2").unwrap(), 3).unwrap();
        let u2 = RadialProfile::from_expr(&g, &parse("3").unwrap(), 3).unwrap();
        let res = pde_residual(&spec, &u1, &u2).unwrap();
        assert_eq!(res.sup_norm(), (0.0, 0.0));
    }

    #[test]
    fn quadratic_two_hessian_in_four_dimensions() {
        // S_2 of r²/2 in N = 4 is C(4,2) = 6; p₁ f₁(u₂) ≡ 6 balances it
        let spec = fixtures::spec(4, 2, 1, "0", "0", "6", "0", "t", "t", 1.0, 1.0);
        let g = grid(3.0, 12);
        let u1 = RadialProfile::from_expr(&g, &parse("t^2/2").unwrap(), 4).unwrap();
        let u2 = RadialProfile::from_expr(&g, &parse("1").unwrap(), 4).unwrap();
        let res = pde_residual(&spec, &u1, &u2).unwrap();
        assert!(res.r1.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let spec = fixtures::closed_form();
        let e = parse("t").unwrap();
        let a = RadialProfile::from_expr(&grid(1.0, 4), &e, 3).unwrap();
        let b = RadialProfile::from_expr(&grid(2.0, 4), &e, 3).unwrap();
        assert_eq!(pde_residual(&spec, &a, &b), Err(HessianError::GridMismatch));
    }

    #[test]
    fn negative_slopes_are_reported() {
        let spec = fixtures::closed_form();
        let g = grid(1.0, 8);
        let u1 = RadialProfile::from_expr(&g, &parse("2-t^2").unwrap(), 3).unwrap();
        let u2 = RadialProfile::from_expr(&g, &parse("t^2+1").unwrap(), 3).unwrap();
        let res = pde_residual(&spec, &u1, &u2).unwrap();
        assert_eq!(res.negative_slope_nodes, (1..=8).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn quadratic_identity(c in 0.1f64..3.0, r in 0.0f64..5.0, n in 3u32..=8) {
            for k in 1..=n {
                let v = s_k(c * r, c, r, k, n).unwrap();
                let expect = binomial(n, k) * c.powi(k as i32);
                prop_assert!((v - expect).abs() <= 1e-12 * expect.max(1.0));
            }
        }

        #[test]
        fn scalar_formula_matches_principal_minors(
            d in -3.0f64..3.0, dd in -3.0f64..3.0, r in 0.05f64..4.0, n in 3u32..=8
        ) {
            let p = RadialProfile::new(vec![0.0, r], vec![0.0; 2], vec![0.0, d], vec![dd, dd]).unwrap();
            for i in 0..2 {
                let eig = eigenvalues_radial(&p, i, n);
                for k in 1..=n {
                    let scalar = s_k(p.dxi[i], p.ddxi[i], p.grid[i], k, n).unwrap();
                    let minors = eig.elementary_symmetric(k as usize);
                    prop_assert!((scalar - minors).abs() <= 1e-12 * minors.abs().max(1.0));
                }
            }
        }
    }
}
