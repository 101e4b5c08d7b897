//! Monotone successive approximation for the radial system.
//!
//! Starting from `u₁⁰ ≡ a`, `u₂⁰ ≡ b`, each step computes
//!
//! ```text
//! u₁ᵐ(r) = a + ∫₀^r [G₂⁻(t) ∫₀ᵗ G₂⁺(s) f₁(u₂ᵐ⁻¹(s)) ds]^{1/k₁} dt
//! u₂ᵐ(r) = b + ∫₀^r [G₁⁻(t) ∫₀ᵗ G₁⁺(s) f₂(u₁ᵐ(s)) ds]^{1/k₂} dt
//! ```
//!
//! Note the second line already uses the fresh `u₁ᵐ`. Every operation in a
//! step is monotone in its input, so the discrete iterates increase
//! pointwise exactly as the continuous ones do.

use thiserror::Error;

use crate::kernels::{build_kernel_table, potential_profile, slope_profile, Kernel, KernelError, KernelTable};
pub use crate::problem::ProblemSpec;
use crate::problem::{Coefficient, SpecError};
use crate::quadrature::uniform_grid;

/// Iterates above this magnitude are treated as blow-up inside the domain.
pub const OVERFLOW_GUARD: f64 = 1e150;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IterationError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("iterate exceeded {OVERFLOW_GUARD:e} at r = {radius} (step {iteration})")]
    Overflow { radius: f64, iteration: usize },
}

#[derive(Debug, Clone)]
pub struct IterateState<'a> {
    pub spec: &'a ProblemSpec,
    pub table: &'a KernelTable,
    pub m: usize,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

pub fn init_state<'a>(spec: &'a ProblemSpec, table: &'a KernelTable) -> IterateState<'a> {
    let len = table.len();
    IterateState { spec, table, m: 0, u1: vec![spec.central_a; len], u2: vec![spec.central_b; len] }
}

fn compose(spec: &ProblemSpec, f: Coefficient, u: &[f64]) -> Result<Vec<f64>, SpecError> {
    u.iter().map(|&v| spec.eval(f, v)).collect()
}

fn guard(grid: &[f64], u: &[f64], iteration: usize) -> Result<(), IterationError> {
    match u.iter().position(|v| !(v.abs() <= OVERFLOW_GUARD)) {
        Some(i) => Err(IterationError::Overflow { radius: grid[i], iteration }),
        None => Ok(()),
    }
}

/// One Gauss–Seidel sweep of the successive approximation.
pub fn step<'a>(state: &IterateState<'a>) -> Result<IterateState<'a>, IterationError> {
    let spec = state.spec;
    let table = state.table;
    let m = state.m + 1;

    let phi1 = compose(spec, Coefficient::F1, &state.u2)?;
    let mut u1 = potential_profile(table, Kernel::G2, &phi1);
    u1.iter_mut().for_each(|v| *v += spec.central_a);
    guard(&table.grid, &u1, m)?;

    let phi2 = compose(spec, Coefficient::F2, &u1)?;
    let mut u2 = potential_profile(table, Kernel::G1, &phi2);
    u2.iter_mut().for_each(|v| *v += spec.central_b);
    guard(&table.grid, &u2, m)?;

    Ok(IterateState { spec, table, m, u1, u2 })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest drop `uᵐ − uᵐ⁺¹` over both components (≤ 0 for monotone steps).
pub fn monotonicity_defect(prev: &IterateState<'_>, next: &IterateState<'_>) -> f64 {
    let drop = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(f64::NEG_INFINITY, |m, (x, y)| m.max(x - y));
    drop(&prev.u1, &next.u1).max(drop(&prev.u2, &next.u2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub r_max: f64,
    pub grid_n: usize,
    /// Picard stopping tolerance on the sup-norm change, relative to `max(1, sup|u|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of grid doublings allowed; 0 solves on the initial grid only.
    pub refine_cap: u32,
    /// Stop refining once successive resolutions agree to this relative sup-norm.
    pub refine_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { r_max: 5.0, grid_n: 1024, tol: 1e-8, max_iter: 200, refine_cap: 6, refine_tol: 1e-6 }
    }
}

/// Converged radial profiles with the derivatives taken from the integral
/// representation, not from differencing.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionProfile {
    pub grid: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub du1: Vec<f64>,
    pub du2: Vec<f64>,
    pub iterations_used: usize,
    pub sup_norm_delta: f64,
    pub refinement_level: u32,
    /// Relative sup-norm gap to the previous resolution, when refined.
    pub resolution_gap: Option<f64>,
    /// Worst pointwise decrease between consecutive iterates at the final level.
    pub monotonicity_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpReport {
    pub radius: f64,
    pub iteration: usize,
    pub r_max: f64,
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Converged(SolutionProfile),
    /// Iterates left the representable range: blow-up suspected inside `[0, r_max]`.
    BlowUp(BlowUpReport),
}

impl SolveOutcome {
    pub fn profile(&self) -> Option<&SolutionProfile> {
        match self {
            SolveOutcome::Converged(p) => Some(p),
            SolveOutcome::BlowUp(_) => None,
        }
    }

    pub fn into_profile(self) -> Option<SolutionProfile> {
        match self {
            SolveOutcome::Converged(p) => Some(p),
            SolveOutcome::BlowUp(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Budget {
    Iterations { max_iter: usize, last_delta: f64 },
    Refinement { levels: u32, gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid options: {0}")]
    Options(&'static str),
    #[error(transparent)]
    Iteration(IterationError),
    #[error("no convergence within budget: {budget:?}")]
    NotConverged { budget: Budget, partial: Box<SolutionProfile> },
}

impl From<SpecError> for SolveError {
    fn from(e: SpecError) -> Self {
        SolveError::Iteration(e.into())
    }
}

impl From<KernelError> for SolveError {
    fn from(e: KernelError) -> Self {
        SolveError::Iteration(e.into())
    }
}

/// Derivatives `u′ = [G⁻ ∫ G⁺ f(u_other)]^{1/k}` of a pair of profiles.
pub fn derivatives(table: &KernelTable, spec: &ProblemSpec, u1: &[f64], u2: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SpecError> {
    let du1 = slope_profile(table, Kernel::G2, &compose(spec, Coefficient::F1, u2)?);
    let du2 = slope_profile(table, Kernel::G1, &compose(spec, Coefficient::F2, u1)?);
    Ok((du1, du2))
}

/// Relative residuals of the integral equations: one Jacobi application of
/// the fixed-point map compared with the profile itself.
pub fn fixed_point_residual(spec: &ProblemSpec, profile: &SolutionProfile) -> Result<(f64, f64), SolveError> {
    let table = build_kernel_table(spec, &profile.grid)?;
    let mut t1 = potential_profile(&table, Kernel::G2, &compose(spec, Coefficient::F1, &profile.u2)?);
    t1.iter_mut().for_each(|v| *v += spec.central_a);
    let mut t2 = potential_profile(&table, Kernel::G1, &compose(spec, Coefficient::F2, &profile.u1)?);
    t2.iter_mut().for_each(|v| *v += spec.central_b);
    Ok((
        sup_diff(&t1, &profile.u1) / sup(&profile.u1).max(1.0),
        sup_diff(&t2, &profile.u2) / sup(&profile.u2).max(1.0),
    ))
}

enum LevelResult {
    Done(SolutionProfile),
    BlowUp(BlowUpReport),
}

fn solve_level(spec: &ProblemSpec, opts: &SolveOptions, grid_n: usize, level: u32) -> Result<LevelResult, SolveError> {
    let grid = uniform_grid(opts.r_max, grid_n);
    let table = build_kernel_table(spec, &grid)?;
    let mut state = init_state(spec, &table);
    let mut defect = f64::NEG_INFINITY;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    while state.m < opts.max_iter {
        let next = match step(&state) {
            Ok(s) => s,
            Err(IterationError::Overflow { radius, iteration }) => {
                return Ok(LevelResult::BlowUp(BlowUpReport { radius, iteration, r_max: opts.r_max, grid_n }));
            }
            Err(e) => return Err(SolveError::Iteration(e)),
        };
        defect = defect.max(monotonicity_defect(&state, &next));
        let scale = sup(&next.u1).max(sup(&next.u2)).max(1.0);
        delta = sup_diff(&next.u1, &state.u1).max(sup_diff(&next.u2, &state.u2));
        state = next;
        if delta <= opts.tol * scale {
            converged = true;
            break;
        }
    }
    let (du1, du2) = derivatives(&table, spec, &state.u1, &state.u2)?;
    let profile = SolutionProfile {
        grid,
        u1: state.u1,
        u2: state.u2,
        du1,
        du2,
        iterations_used: state.m,
        sup_norm_delta: delta,
        refinement_level: level,
        resolution_gap: None,
        monotonicity_defect: defect,
    };
    if !converged {
        return Err(SolveError::NotConverged {
            budget: Budget::Iterations { max_iter: opts.max_iter, last_delta: delta },
            partial: Box::new(profile),
        });
    }
    Ok(LevelResult::Done(profile))
}

/// Iterates to a fixed point, then doubles the grid until two successive
/// resolutions agree to `refine_tol` or `refine_cap` doublings are used.
pub fn solve(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    if !(opts.tol > 0.0) {
        return Err(SolveError::Options("tol must be positive"));
    }
    if opts.grid_n < 2 {
        return Err(SolveError::Options("grid_n must be at least 2"));
    }
    if !(opts.r_max > 0.0 && opts.r_max.is_finite()) {
        return Err(SolveError::Options("r_max must be positive and finite"));
    }
    spec.validate()?;

    let mut previous: Option<SolutionProfile> = None;
    let mut gap = f64::INFINITY;
    for level in 0..=opts.refine_cap {
        let grid_n = opts.grid_n << level;
        let mut profile = match solve_level(spec, opts, grid_n, level)? {
            LevelResult::Done(p) => p,
            LevelResult::BlowUp(b) => return Ok(SolveOutcome::BlowUp(b)),
        };
        if opts.refine_cap == 0 {
            return Ok(SolveOutcome::Converged(profile));
        }
        if let Some(coarse) = &previous {
            let scale = sup(&profile.u1).max(sup(&profile.u2)).max(1.0);
            let d = coarse
                .u1
                .iter()
                .zip(&coarse.u2)
                .enumerate()
                .fold(0.0f64, |m, (i, (c1, c2))| m.max((profile.u1[2 * i] - c1).abs()).max((profile.u2[2 * i] - c2).abs()));
            gap = d / scale;
            profile.resolution_gap = Some(gap);
            if gap < opts.refine_tol {
                return Ok(SolveOutcome::Converged(profile));
            }
        }
        previous = Some(profile);
    }
    Err(SolveError::NotConverged {
        budget: Budget::Refinement { levels: opts.refine_cap, gap },
        partial: Box::new(previous.expect("at least one level was solved")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fixtures::{closed_form, spec};

    #[test]
    fn initial_state_is_constant() {
        let s = spec(3, 1, 1, "0", "0", "1", "1", "t", "t", 2.0, 5.0);
        let tab = build_kernel_table(&s, &uniform_grid(1.0, 8)).unwrap();
        let st = init_state(&s, &tab);
        assert_eq!(st.m, 0);
        assert_eq!(st.u1, vec![2.0; 9]);
        assert_eq!(st.u2, vec![5.0; 9]);

        let tab = build_kernel_table(&s, &[0.0]).unwrap();
        let st = init_state(&s, &tab);
        assert_eq!((st.u1.len(), st.u2.len()), (1, 1));
        let next = step(&st).unwrap();
        assert_eq!(next.u1, vec![2.0]);
    }

    #[test]
    fn first_step_matches_hand_integration() {
        // u₁¹(r) = 1 + ∫₀^r t^{-2}(t³/3) dt = 1 + r²/6
        let s = spec(3, 1, 1, "0", "0", "1", "1", "t", "t", 1.0, 1.0);
        let g = uniform_grid(1.0, 2048);
        let tab = build_kernel_table(&s, &g).unwrap();
        let next = step(&init_state(&s, &tab)).unwrap();
        assert_eq!(next.m, 1);
        for (i, &r) in g.iter().enumerate() {
            assert!((next.u1[i] - (1.0 + r * r / 6.0)).abs() < 1e-6);
        }
        assert_eq!(next.u1[0], 1.0);
        assert_eq!(next.u2[0], 1.0);
    }

    #[test]
    fn zero_sources_make_step_the_identity() {
        let s = spec(4, 2, 3, "1", "t", "0", "0", "t^2", "t", 1.5, 2.5);
        let tab = build_kernel_table(&s, &uniform_grid(3.0, 30)).unwrap();
        let st = init_state(&s, &tab);
        let next = step(&st).unwrap();
        assert_eq!(next.u1, st.u1);
        assert_eq!(next.u2, st.u2);
    }

    #[test]
    fn steps_are_monotone_in_m_and_r() {
        let s = closed_form();
        let tab = build_kernel_table(&s, &uniform_grid(5.0, 512)).unwrap();
        let mut st = init_state(&s, &tab);
        for _ in 0..40 {
            let next = step(&st).unwrap();
            assert!(monotonicity_defect(&st, &next) <= 1e-12);
            for u in [&next.u1, &next.u2] {
                assert!(u.windows(2).all(|w| w[1] - w[0] >= -1e-12));
            }
            st = next;
        }
    }

    #[test]
    fn zero_sources_converge_immediately() {
        let s = spec(3, 1, 1, "0", "0", "0", "0", "t", "t", 2.0, 3.0);
        let out = solve(&s, &SolveOptions { r_max: 2.0, grid_n: 16, ..Default::default() }).unwrap();
        let p = out.into_profile().unwrap();
        assert_eq!(p.iterations_used, 1);
        assert!(p.u1.iter().all(|&v| v == 2.0));
        assert!(p.u2.iter().all(|&v| v == 3.0));
        assert!(p.du1.iter().chain(&p.du2).all(|&v| v == 0.0));
    }

    #[test]
    fn closed_form_solution_recovered() {
        let s = closed_form();
        let opts = SolveOptions { r_max: 5.0, grid_n: 1 << 13, refine_cap: 0, ..Default::default() };
        let p = solve(&s, &opts).unwrap().into_profile().unwrap();
        assert_eq!(p.u1[0], 1.0);
        assert_eq!(p.u2[0], 1.0);
        for (i, &r) in p.grid.iter().enumerate() {
            let (e1, e2) = (r.powi(4) + 1.0, r * r + 1.0);
            assert!((p.u1[i] - e1).abs() < 1e-5 * e1, "u1 at {r}: {} vs {e1}", p.u1[i]);
            assert!((p.u2[i] - e2).abs() < 1e-5 * e2, "u2 at {r}: {} vs {e2}", p.u2[i]);
            // first trapezoid panel is O(h) accurate in the slope; the error decays like h²/r
            let h = p.grid[1];
            let slope_tol = 1e-5 + h * h / r.max(h);
            assert!((p.du1[i] - 4.0 * r.powi(3)).abs() <= slope_tol * (1.0 + r.powi(3)));
            assert!((p.du2[i] - 2.0 * r).abs() <= slope_tol * (1.0 + r));
        }
        let (f1, f2) = fixed_point_residual(&s, &p).unwrap();
        assert!(f1 < 10.0 * opts.tol && f2 < 10.0 * opts.tol, "{f1} {f2}");
    }

    #[test]
    fn refinement_reaches_tolerance() {
        let s = closed_form();
        let opts = SolveOptions { r_max: 2.0, grid_n: 256, refine_tol: 1e-6, ..Default::default() };
        let p = solve(&s, &opts).unwrap().into_profile().unwrap();
        assert!(p.refinement_level >= 1);
        assert!(p.resolution_gap.unwrap() < 1e-6);
    }

    #[test]
    fn refinement_budget_exhaustion_is_an_error() {
        let s = closed_form();
        let opts = SolveOptions { r_max: 2.0, grid_n: 16, refine_cap: 1, refine_tol: 1e-14, ..Default::default() };
        match solve(&s, &opts) {
            Err(SolveError::NotConverged { budget: Budget::Refinement { levels: 1, .. }, partial }) => {
                assert_eq!(partial.grid.len(), 33);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iteration_budget_exhaustion_is_an_error() {
        let s = closed_form();
        let opts = SolveOptions { r_max: 5.0, grid_n: 64, max_iter: 3, refine_cap: 0, ..Default::default() };
        assert!(matches!(
            solve(&s, &opts),
            Err(SolveError::NotConverged { budget: Budget::Iterations { max_iter: 3, .. }, .. })
        ));
    }

    #[test]
    fn superlinear_growth_reports_blow_up() {
        // u″ + (2/r)u′ = v², v″ + (2/r)v′ = u² blows up at a finite radius
        let s = spec(3, 1, 1, "0", "0", "1", "1", "t^2", "t^2", 10.0, 10.0);
        let opts = SolveOptions { r_max: 10.0, grid_n: 256, refine_cap: 0, ..Default::default() };
        match solve(&s, &opts).unwrap() {
            SolveOutcome::BlowUp(b) => assert!(b.radius > 0.0 && b.radius <= 10.0),
            SolveOutcome::Converged(_) => panic!("expected blow-up"),
        }
    }

    #[test]
    fn invalid_options() {
        let s = closed_form();
        assert!(matches!(solve(&s, &SolveOptions { tol: 0.0, ..Default::default() }), Err(SolveError::Options(_))));
        assert!(matches!(solve(&s, &SolveOptions { grid_n: 1, ..Default::default() }), Err(SolveError::Options(_))));
    }

    #[test]
    fn domain_errors_surface() {
        let s = spec(3, 1, 1, "0", "0", "1", "1", "ln(t-5)", "t", 1.0, 1.0);
        let opts = SolveOptions { r_max: 1.0, grid_n: 8, refine_cap: 0, ..Default::default() };
        assert!(matches!(solve(&s, &opts), Err(SolveError::Iteration(IterationError::Spec(_)))));
    }
}
