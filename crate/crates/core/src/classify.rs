//! Bounded-versus-large classification of radial solutions.
//!
//! The classifier evaluates the growth constants `M₁, M₂, m₁, m₂`, the
//! transforms `H₁₂, H₂₁` and the nested integrals `P̄₁₂, P̲₁₂, P̄₂₁, P̲₂₁`,
//! estimates their limits at infinity with [`limit_estimate`], and maps the
//! six limit verdicts onto the existence/asymptotics cases through a fixed
//! decision table ([`decide`]).

use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::iteration::SolutionProfile;
use crate::kernels::{build_kernel_table, m_plus, potential_profile, geometric_samples, Kernel, KernelError, KernelTable};
pub use crate::limits::{estimate_from_samples, limit_estimate, LimitEstimate, LimitOptions, LimitVerdict};
use crate::problem::{root, Coefficient, ProblemSpec, SpecError};
use crate::quadrature::{adaptive_simpson, uniform_grid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("missing witness component: {0}")]
    MissingWitness(&'static str),
    #[error("H transform denominator vanishes at the lower limit {lower}")]
    SingularLowerEndpoint { lower: f64 },
    #[error("H transform denominator is not positive at t = {t}")]
    BadDenominator { t: f64 },
    #[error("{x} is not below the supremum of the H transform")]
    UnboundedPreimage { x: f64 },
    #[error("M⁺ must be finite and positive for the alternate H transform")]
    MPlusUnavailable,
}

/// Upper growth envelope `f(t·w) ≤ c̄ h(t) φ̄(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperWitness {
    pub h: Expr,
    pub phibar: Expr,
    pub cbar: f64,
}

/// Lower growth envelope `f(m·w) ≥ c̲ φ̲(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerWitness {
    pub phiunder: Expr,
    pub cunder: f64,
}

/// Growth data for `f₁` (index 1) and `f₂` (index 2). A present field
/// asserts the corresponding inequality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthWitness {
    pub upper1: Option<UpperWitness>,
    pub upper2: Option<UpperWitness>,
    pub lower1: Option<LowerWitness>,
    pub lower2: Option<LowerWitness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub m1_cap: f64,
    pub m2_cap: f64,
    pub m1_low: f64,
    pub m2_low: f64,
    pub m1_plus: LimitEstimate,
    pub m2_plus: LimitEstimate,
}

/// `(M₁, M₂, m₁, m₂)` from the central values.
pub fn growth_constants(spec: &ProblemSpec) -> Result<(f64, f64, f64, f64), ClassifyError> {
    let (a, b) = (spec.central_a, spec.central_b);
    let f2a = spec.f_root(Coefficient::F2, a)?;
    let f1b = spec.f_root(Coefficient::F1, b)?;
    if !(f2a > 0.0) {
        return Err(ClassifyError::Hypothesis(format!("f2(a) must be positive, got f2({a}) = {f2a}")));
    }
    if !(f1b > 0.0) {
        return Err(ClassifyError::Hypothesis(format!("f1(b) must be positive, got f1({b}) = {f1b}")));
    }
    let m1_cap = if b > f2a { b / f2a } else { 1.0 };
    let m2_cap = if a > f1b { a / f1b } else { 1.0 };
    Ok((m1_cap, m2_cap, b.min(f2a), a.min(f1b)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub limits: LimitOptions,
    /// Grid intervals per `r0` on `[0, r_budget]`.
    pub steps_per_r0: usize,
    /// Radius over which (P1)-type positivity is probed.
    pub probe_radius: f64,
    pub probe_samples: usize,
    /// Exponent order used in the outer root of the alternate `H₂₁`.
    pub mplus21_outer_order: Option<u32>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            limits: LimitOptions::default(),
            steps_per_r0: 64,
            probe_radius: 10.0,
            probe_samples: 200,
            mplus21_outer_order: None,
        }
    }
}

impl ClassifyOptions {
    pub fn grid(&self) -> Vec<f64> {
        let per = self.steps_per_r0.max(1) as f64;
        let intervals = ((self.limits.r_budget / self.limits.r0) * per).round().max(1.0) as usize;
        uniform_grid(self.limits.r_budget, intervals)
    }
}

pub fn derive_constants_with_table(spec: &ProblemSpec, table: &KernelTable, opts: &LimitOptions) -> Result<DerivedConstants, ClassifyError> {
    let (m1_cap, m2_cap, m1_low, m2_low) = growth_constants(spec)?;
    Ok(DerivedConstants {
        m1_cap,
        m2_cap,
        m1_low,
        m2_low,
        m1_plus: m_plus(table, Kernel::G1, opts),
        m2_plus: m_plus(table, Kernel::G2, opts),
    })
}

pub fn derive_constants(spec: &ProblemSpec, opts: &ClassifyOptions) -> Result<DerivedConstants, ClassifyError> {
    spec.validate()?;
    let table = build_kernel_table(spec, &opts.grid())?;
    derive_constants_with_table(spec, &table, &opts.limits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    /// `H₁₂`, acting on `u₁`, lower limit `a`.
    OneTwo,
    /// `H₂₁`, acting on `u₂`, lower limit `b`.
    TwoOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HVariant {
    /// Denominator `h^{1/k}(M f_other^{1/k_other}(t))`.
    Standard,
    /// Denominator `f^{1/k}(M (1 + M⁺) f_other^{1/k_other}(t))`.
    MPlus,
}

/// `H(r) = ∫_lower^r dt / outer^{1/outer_order}(scale · inner^{1/inner_order}(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTransform {
    pub pair: Pair,
    pub variant: HVariant,
    pub lower: f64,
    pub outer: Expr,
    pub outer_order: u32,
    pub scale: f64,
    pub inner: Expr,
    pub inner_order: u32,
    pub n: u32,
}

const H_QUAD_TOL: f64 = 1e-14;

impl HTransform {
    pub fn standard(spec: &ProblemSpec, pair: Pair, h: &Expr, m_cap: f64) -> Result<Self, ClassifyError> {
        let t = match pair {
            Pair::OneTwo => HTransform {
                pair,
                variant: HVariant::Standard,
                lower: spec.central_a,
                outer: h.clone(),
                outer_order: spec.k1,
                scale: m_cap,
                inner: spec.f2.clone(),
                inner_order: spec.k2,
                n: spec.n,
            },
            Pair::TwoOne => HTransform {
                pair,
                variant: HVariant::Standard,
                lower: spec.central_b,
                outer: h.clone(),
                outer_order: spec.k2,
                scale: m_cap,
                inner: spec.f1.clone(),
                inner_order: spec.k1,
                n: spec.n,
            },
        };
        t.check_lower()?;
        Ok(t)
    }

    /// Alternate transform built from `f` itself and `M⁺`. For `H₂₁` the
    /// outer root uses `k₁` unless `outer_order` overrides it.
    pub fn mplus(spec: &ProblemSpec, pair: Pair, m_cap: f64, m_plus: f64, outer_order: Option<u32>) -> Result<Self, ClassifyError> {
        if !(m_plus.is_finite() && m_plus > 0.0) {
            return Err(ClassifyError::MPlusUnavailable);
        }
        let scale = m_cap * (1.0 + m_plus);
        let t = match pair {
            Pair::OneTwo => HTransform {
                pair,
                variant: HVariant::MPlus,
                lower: spec.central_a,
                outer: spec.f1.clone(),
                outer_order: outer_order.unwrap_or(spec.k1),
                scale,
                inner: spec.f2.clone(),
                inner_order: spec.k2,
                n: spec.n,
            },
            Pair::TwoOne => HTransform {
                pair,
                variant: HVariant::MPlus,
                lower: spec.central_b,
                outer: spec.f2.clone(),
                outer_order: outer_order.unwrap_or(spec.k1),
                scale,
                inner: spec.f1.clone(),
                inner_order: spec.k1,
                n: spec.n,
            },
        };
        t.check_lower()?;
        Ok(t)
    }

    fn check_lower(&self) -> Result<(), ClassifyError> {
        match self.denominator(self.lower) {
            Ok(d) if d > 0.0 && d.is_finite() => Ok(()),
            _ => Err(ClassifyError::SingularLowerEndpoint { lower: self.lower }),
        }
    }

    pub fn denominator(&self, t: f64) -> Result<f64, ClassifyError> {
        let inner = self.inner.eval(t, self.n).map_err(|source| SpecError::Eval { name: "H inner", arg: t, source })?;
        let arg = self.scale * root(inner, self.inner_order);
        let outer = self.outer.eval(arg, self.n).map_err(|source| SpecError::Eval { name: "H outer", arg, source })?;
        Ok(root(outer, self.outer_order))
    }

    fn integrand(&self, t: f64) -> f64 {
        match self.denominator(t) {
            Ok(d) if d > 0.0 => 1.0 / d,
            _ => f64::NAN,
        }
    }

    /// Splits `[from, to]` into panels at most doubling in length and
    /// integrates each to a tolerance relative to its own size, so long
    /// ranges keep full relative accuracy.
    fn integrate(&self, from: f64, to: f64) -> Result<f64, ClassifyError> {
        if from == to {
            return Ok(0.0);
        }
        if to < from {
            return self.integrate(to, from).map(|v| -v);
        }
        let f = |t: f64| self.integrand(t);
        let mut total = 0.0;
        let mut x = from;
        while x < to {
            let next = to.min((2.0 * x).max(x + 1.0));
            let rough = (next - x) / 6.0 * (f(x) + 4.0 * f(0.5 * (x + next)) + f(next));
            let tol = H_QUAD_TOL * rough.abs().max(f64::MIN_POSITIVE);
            let (v, _) = adaptive_simpson(&f, x, next, tol, 50);
            if v.is_nan() {
                let bad = [x, next, 0.5 * (x + next)].into_iter().find(|&t| !(self.integrand(t) > 0.0)).unwrap_or(x);
                return Err(ClassifyError::BadDenominator { t: bad });
            }
            total += v;
            x = next;
        }
        Ok(total)
    }

    /// `H(r)`; strictly increasing in `r`.
    pub fn value(&self, r: f64) -> Result<f64, ClassifyError> {
        self.integrate(self.lower, r)
    }

    /// Preimage `r` with `|H(r) − x| ≤ 1e−10·max(1, |x|)`.
    pub fn inverse(&self, x: f64) -> Result<f64, ClassifyError> {
        if x == 0.0 {
            return Ok(self.lower);
        }
        if x < 0.0 || !x.is_finite() {
            return Err(ClassifyError::UnboundedPreimage { x });
        }
        // bracket [lo, hi] with H(lo) < x ≤ H(hi), accumulating H panel by panel
        let mut lo = self.lower;
        let mut h_lo = 0.0;
        let mut width = 1.0f64.max(self.lower.abs());
        let (hi, h_hi) = loop {
            let hi = lo + width;
            let h_hi = h_lo + self.integrate(lo, hi)?;
            if h_hi >= x {
                break (hi, h_hi);
            }
            if hi > 1e15 * (1.0 + self.lower.abs()) || h_hi == h_lo {
                return Err(ClassifyError::UnboundedPreimage { x });
            }
            lo = hi;
            h_lo = h_hi;
            width *= 2.0;
        };
        let target_tol = 1e-12 * x.abs().max(1.0);
        let (mut lo, mut hi, mut h_lo, mut h_hi) = (lo, hi, h_lo, h_hi);
        for _ in 0..200 {
            if (h_hi - x).abs() <= target_tol {
                return Ok(hi);
            }
            if (x - h_lo).abs() <= target_tol {
                return Ok(lo);
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let h_mid = h_lo + self.integrate(lo, mid)?;
            if h_mid < x {
                lo = mid;
                h_lo = h_mid;
            } else {
                hi = mid;
                h_hi = h_mid;
            }
        }
        Ok(if (h_hi - x).abs() <= (x - h_lo).abs() { hi } else { lo })
    }

    /// Limit of `H` at infinity, sampled at the radii `r0·2^j` beyond the
    /// lower limit (shifted by it when too few remain).
    pub fn limit(&self, opts: &LimitOptions) -> Result<LimitEstimate, ClassifyError> {
        let radii = opts.radii();
        let beyond: Vec<f64> = radii.iter().copied().filter(|&r| r > self.lower).collect();
        let points = if beyond.len() > opts.window.max(2) {
            beyond
        } else {
            radii.iter().map(|r| self.lower + r).collect()
        };
        let mut evidence = Vec::new();
        let mut at = self.lower;
        let mut acc = 0.0;
        for s in points {
            acc += self.integrate(at, s)?;
            at = s;
            evidence.push((s, acc));
        }
        Ok(estimate_from_samples(evidence, opts))
    }
}

pub fn h_transform(h: &HTransform, r: f64) -> Result<f64, ClassifyError> {
    h.value(r)
}

pub fn h_inverse(h: &HTransform, x: f64) -> Result<f64, ClassifyError> {
    h.inverse(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PKind {
    Bar12,
    Under12,
    Bar21,
    Under21,
}

impl PKind {
    pub fn name(self) -> &'static str {
        match self {
            PKind::Bar12 => "P_bar_12",
            PKind::Under12 => "P_under_12",
            PKind::Bar21 => "P_bar_21",
            PKind::Under21 => "P_under_21",
        }
    }

    fn outer_kernel(self) -> Kernel {
        match self {
            PKind::Bar12 | PKind::Under12 => Kernel::G2,
            PKind::Bar21 | PKind::Under21 => Kernel::G1,
        }
    }
}

/// The nested integral
/// `∫₀^r [G⁻(y) ∫₀^y G⁺(t) φ(1 + ∫₀ᵗ (G⁻_o(z)∫₀^z G⁺_o)^{1/k_o} dz) dt]^{1/k} dy`
/// at every node of the table, where the outer kernel is `G₂` for the
/// `12` integrals and `G₁` for the `21` integrals, and `G_o` is the other one.
pub fn p_integral_profile(table: &KernelTable, kind: PKind, phi: &Expr) -> Result<Vec<f64>, ClassifyError> {
    let outer = kind.outer_kernel();
    let ones = vec![1.0; table.len()];
    let q = potential_profile(table, outer.other(), &ones);
    let samples = q
        .iter()
        .map(|&qv| {
            let w = 1.0 + qv;
            phi.eval(w, table.n).map_err(|source| SpecError::Eval { name: "phi", arg: w, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(potential_profile(table, outer, &samples))
}

fn phi_for(witness: &GrowthWitness, kind: PKind) -> Result<&Expr, ClassifyError> {
    match kind {
        PKind::Bar12 => witness.upper1.as_ref().map(|u| &u.phibar).ok_or(ClassifyError::MissingWitness("phibar1")),
        PKind::Bar21 => witness.upper2.as_ref().map(|u| &u.phibar).ok_or(ClassifyError::MissingWitness("phibar2")),
        PKind::Under12 => witness.lower1.as_ref().map(|l| &l.phiunder).ok_or(ClassifyError::MissingWitness("phiunder1")),
        PKind::Under21 => witness.lower2.as_ref().map(|l| &l.phiunder).ok_or(ClassifyError::MissingWitness("phiunder2")),
    }
}

/// Single value of a P integral at radius `r` on a grid of `intervals` steps.
pub fn p_integral(spec: &ProblemSpec, witness: &GrowthWitness, kind: PKind, r: f64, intervals: usize) -> Result<f64, ClassifyError> {
    let phi = phi_for(witness, kind)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let table = build_kernel_table(spec, &uniform_grid(r, intervals.max(1)))?;
    Ok(*p_integral_profile(&table, kind, phi)?.last().expect("nonempty grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Thm1Case1,
    Thm1Case2,
    Thm1Case3,
    Thm1Case4,
    Thm2I,
    Thm2II,
    Thm2III,
    HypothesesNotMet,
    Inconclusive,
}

impl Verdict {
    pub const ALL: [Verdict; 9] = [
        Verdict::Thm1Case1,
        Verdict::Thm1Case2,
        Verdict::Thm1Case3,
        Verdict::Thm1Case4,
        Verdict::Thm2I,
        Verdict::Thm2II,
        Verdict::Thm2III,
        Verdict::HypothesesNotMet,
        Verdict::Inconclusive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Thm1Case1 => "Thm1-case1 bounded/bounded",
            Verdict::Thm1Case2 => "Thm1-case2 large/large",
            Verdict::Thm1Case3 => "Thm1-case3 bounded/large",
            Verdict::Thm1Case4 => "Thm1-case4 large/bounded",
            Verdict::Thm2I => "Thm2-i bounded-with-sandwich",
            Verdict::Thm2II => "Thm2-ii large/bounded",
            Verdict::Thm2III => "Thm2-iii bounded/large",
            Verdict::HypothesesNotMet => "Hypotheses-not-met",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Position of each estimate in [`DecisionInputs::status`].
pub const ESTIMATE_NAMES: [&str; 6] = ["P_bar_12", "P_bar_21", "P_under_12", "P_under_21", "H_12_inf", "H_21_inf"];

/// Inputs of the decision table. `None` marks an estimate that could not
/// be formed because its witness is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionInputs {
    /// `[P̄₁₂, P̄₂₁, P̲₁₂, P̲₂₁, H₁₂(∞), H₂₁(∞)]`
    pub status: [Option<LimitVerdict>; 6],
    pub bar12_below_h12: bool,
    pub bar21_below_h21: bool,
    pub under21_below_h21: bool,
    pub hypotheses_ok: bool,
}

/// The decision table. Returns the verdict and, for `Inconclusive`, the
/// name of the first blocking estimate.
pub fn decide(inp: &DecisionInputs) -> (Verdict, Option<&'static str>) {
    if !inp.hypotheses_ok {
        return (Verdict::HypothesesNotMet, None);
    }
    if let Some(i) = inp.status.iter().position(|s| *s == Some(LimitVerdict::Inconclusive)) {
        return (Verdict::Inconclusive, Some(ESTIMATE_NAMES[i]));
    }
    let fin = |i: usize| inp.status[i] == Some(LimitVerdict::Finite);
    let div = |i: usize| inp.status[i] == Some(LimitVerdict::Divergent);
    let (pb12, pb21, pu12, pu21, h12, h21) = (0, 1, 2, 3, 4, 5);

    if div(h12) && div(h21) {
        let v = if fin(pb12) && fin(pb21) {
            Verdict::Thm1Case1
        } else if div(pu12) && div(pu21) {
            Verdict::Thm1Case2
        } else if fin(pb12) && div(pu21) {
            Verdict::Thm1Case3
        } else if div(pu12) && fin(pb21) {
            Verdict::Thm1Case4
        } else {
            Verdict::HypothesesNotMet
        };
        return (v, None);
    }
    let lower_both = inp.status[pu12].is_some() && inp.status[pu21].is_some();
    if fin(h12) && fin(h21) && fin(pb12) && fin(pb21) && inp.bar12_below_h12 && inp.bar21_below_h21 && lower_both {
        return (Verdict::Thm2I, None);
    }
    if div(h12) && div(pu12) && fin(pu21) && fin(h21) && inp.under21_below_h21 {
        return (Verdict::Thm2II, None);
    }
    if div(pu21) && div(h21) && fin(pb12) && fin(h12) && inp.bar12_below_h12 {
        return (Verdict::Thm2III, None);
    }
    (Verdict::HypothesesNotMet, None)
}

/// `a < b` strictly, beyond both extrapolation error estimates.
pub fn strictly_below(a: &LimitEstimate, b: &LimitEstimate) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    let err = a.error_estimate.unwrap_or(0.0) + b.error_estimate.unwrap_or(0.0);
    a.limit() + err < b.limit()
}

/// Which hypothesis a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Coefficient positivity: `p > 0`, `a ≥ 0`.
    P1,
    /// Nonlinearity positivity and monotonicity.
    C1,
    /// Upper envelope for `f₁`.
    C21,
    /// Upper envelope for `f₂`.
    C22,
    /// Lower envelope for `f₁`.
    C31,
    /// Lower envelope for `f₂`.
    C32,
    /// Sign or monotonicity requirements on witness functions.
    Witness,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::P1 => "P1",
            Hypothesis::C1 => "C1",
            Hypothesis::C21 => "C2.1",
            Hypothesis::C22 => "C2.2",
            Hypothesis::C31 => "C3.1",
            Hypothesis::C32 => "C3.2",
            Hypothesis::Witness => "witness",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    /// Sample argument (radius, `t`, or `w` for lower envelopes).
    pub t: f64,
    /// Second argument `w` for two-argument inequalities.
    pub w: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub message: String,
    /// Number of failing samples for this check.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    pub violations: Vec<Violation>,
    pub samples_checked: usize,
}

impl HypothesisReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisOptions {
    pub radius: f64,
    pub samples: usize,
    /// Decades spanned by the log-spaced `t` and `w` samples.
    pub decades: f64,
    /// Relative slack for inequalities that hold with equality.
    pub rel_slack: f64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        HypothesisOptions { radius: 10.0, samples: 60, decades: 6.0, rel_slack: 1e-9 }
    }
}

fn log_space(from: f64, decades: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count).map(|i| from * 10f64.powf(decades * i as f64 / (count - 1) as f64)).collect()
}

struct Collector<'r> {
    report: &'r mut HypothesisReport,
}

impl Collector<'_> {
    /// Records the first failing sample of a check together with the failure count.
    fn check<I>(&mut self, hypothesis: Hypothesis, message: &str, samples: I)
    where
        I: IntoIterator<Item = (f64, Option<f64>, f64, f64, bool)>,
    {
        let mut first: Option<Violation> = None;
        for (t, w, lhs, rhs, ok) in samples {
            self.report.samples_checked += 1;
            if !ok {
                match first.as_mut() {
                    Some(v) => v.count += 1,
                    None => {
                        first = Some(Violation { hypothesis, t, w, lhs, rhs, message: message.to_string(), count: 1 })
                    }
                }
            }
        }
        if let Some(v) = first {
            self.report.violations.push(v);
        }
    }
}

fn eval_or_nan(e: &Expr, t: f64, n: u32) -> f64 {
    e.eval(t, n).unwrap_or(f64::NAN)
}

/// Samples every hypothesis on the data and the supplied witness.
pub fn check_hypotheses(spec: &ProblemSpec, witness: &GrowthWitness, opts: &HypothesisOptions) -> HypothesisReport {
    let mut report = HypothesisReport::default();
    let mut c = Collector { report: &mut report };
    let n = spec.n;
    let radii = uniform_grid(opts.radius, opts.samples.max(1));
    for (name, e) in [("p1", &spec.p1), ("p2", &spec.p2)] {
        c.check(
            Hypothesis::P1,
            &format!("{name} must be positive for r > 0 and nonnegative at r = 0"),
            radii.iter().map(|&r| {
                let v = eval_or_nan(e, r, n);
                (r, None, v, 0.0, if r > 0.0 { v > 0.0 } else { v >= 0.0 })
            }),
        );
    }
    for (name, e) in [("a1", &spec.a1), ("a2", &spec.a2)] {
        c.check(
            Hypothesis::P1,
            &format!("{name} must be nonnegative"),
            radii.iter().map(|&r| {
                let v = eval_or_nan(e, r, n);
                (r, None, v, 0.0, v >= 0.0)
            }),
        );
    }

    let mut args = vec![0.0];
    args.extend(log_space(10f64.powf(-opts.decades), 2.0 * opts.decades, 2 * opts.samples));
    for (name, e) in [("f1", &spec.f1), ("f2", &spec.f2)] {
        let vals: Vec<f64> = args.iter().map(|&s| eval_or_nan(e, s, n)).collect();
        c.check(
            Hypothesis::C1,
            &format!("{name} must be nonnegative, and positive for s > 0"),
            args.iter().zip(&vals).map(|(&s, &v)| (s, None, v, 0.0, if s > 0.0 { v > 0.0 } else { v >= 0.0 })),
        );
        c.check(
            Hypothesis::C1,
            &format!("{name} must be nondecreasing"),
            args.windows(2).zip(vals.windows(2)).map(|(s, v)| (s[1], None, v[1], v[0], v[1] >= v[0])),
        );
    }

    let consts = growth_constants(spec);
    let ws = log_space(1.0, opts.decades, opts.samples);
    let slack = opts.rel_slack;
    for (hyp, upper, f, threshold) in [
        (Hypothesis::C21, &witness.upper1, &spec.f1, consts.as_ref().ok().map(|c| c.0 * spec.f_root(Coefficient::F2, spec.central_a).unwrap_or(f64::NAN))),
        (Hypothesis::C22, &witness.upper2, &spec.f2, consts.as_ref().ok().map(|c| c.1 * spec.f_root(Coefficient::F1, spec.central_b).unwrap_or(f64::NAN))),
    ] {
        let Some(u) = upper else { continue };
        witness_shape(&mut c, &u.h, true, n, &args, "h");
        witness_shape(&mut c, &u.phibar, false, n, &args, "phibar");
        let Some(t_min) = threshold.filter(|t| t.is_finite() && *t > 0.0) else {
            c.check(hyp, "threshold M f(a) is not positive", [(f64::NAN, None, f64::NAN, f64::NAN, false)]);
            continue;
        };
        let ts = log_space(t_min, opts.decades, opts.samples);
        let samples: Vec<_> = ts
            .iter()
            .flat_map(|&t| ws.iter().map(move |&w| (t, w)))
            .map(|(t, w)| {
                let lhs = eval_or_nan(f, t * w, n);
                let rhs = u.cbar * eval_or_nan(&u.h, t, n) * eval_or_nan(&u.phibar, w, n);
                (t, Some(w), lhs, rhs, lhs <= rhs * (1.0 + slack) + f64::MIN_POSITIVE)
            })
            .collect();
        c.check(hyp, "f(t*w) <= cbar * h(t) * phibar(w) fails", samples);
    }
    for (hyp, lower, f, m_low) in [
        (Hypothesis::C31, &witness.lower1, &spec.f1, consts.as_ref().ok().map(|c| c.2)),
        (Hypothesis::C32, &witness.lower2, &spec.f2, consts.as_ref().ok().map(|c| c.3)),
    ] {
        let Some(l) = lower else { continue };
        witness_shape(&mut c, &l.phiunder, false, n, &args, "phiunder");
        let Some(m) = m_low.filter(|m| *m > 0.0) else {
            c.check(hyp, "constant m is not positive", [(f64::NAN, None, f64::NAN, f64::NAN, false)]);
            continue;
        };
        c.check(
            hyp,
            "f(m*w) >= cunder * phiunder(w) fails",
            ws.iter().map(|&w| {
                let lhs = eval_or_nan(f, m * w, n);
                let rhs = l.cunder * eval_or_nan(&l.phiunder, w, n);
                (w, None, lhs, rhs, lhs >= rhs * (1.0 - slack))
            }),
        );
    }
    report
}

fn witness_shape(c: &mut Collector<'_>, e: &Expr, monotone: bool, n: u32, args: &[f64], name: &str) {
    let vals: Vec<f64> = args.iter().map(|&s| eval_or_nan(e, s, n)).collect();
    c.check(
        Hypothesis::Witness,
        &format!("{name} must be nonnegative"),
        args.iter().zip(&vals).map(|(&s, &v)| (s, None, v, 0.0, v >= 0.0)),
    );
    if monotone {
        c.check(
            Hypothesis::Witness,
            &format!("{name} must be nondecreasing"),
            args.windows(2).zip(vals.windows(2)).map(|(s, v)| (s[1], None, v[1], v[0], v[1] >= v[0])),
        );
    }
}

/// Upper envelope actually used for one pair after applying the
/// alternate-transform rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedUpper {
    pub h: HTransform,
    pub phibar: Expr,
    pub cbar: f64,
}

/// Witness data after defaults and variant selection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Envelopes {
    pub upper12: Option<ResolvedUpper>,
    pub upper21: Option<ResolvedUpper>,
    pub lower1: Option<LowerWitness>,
    pub lower2: Option<LowerWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RemarkFlags {
    /// Alternate `H₁₂` used because no upper witness for `f₁` was given.
    pub mplus12_used: bool,
    pub mplus21_used: bool,
    /// Alternate transform would be admissible but the user witness took precedence.
    pub mplus12_available: bool,
    pub mplus21_available: bool,
    /// `φ̲ = f`, `c̲ = 1` filled in because `m ≥ 1`.
    pub lower1_defaulted: bool,
    pub lower2_defaulted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub constants: DerivedConstants,
    pub p_bar_12: Option<LimitEstimate>,
    pub p_bar_21: Option<LimitEstimate>,
    pub p_under_12: Option<LimitEstimate>,
    pub p_under_21: Option<LimitEstimate>,
    pub h_12_inf: Option<LimitEstimate>,
    pub h_21_inf: Option<LimitEstimate>,
    pub verdict: Verdict,
    pub blocking: Option<&'static str>,
    pub remarks: RemarkFlags,
    pub hypotheses: HypothesisReport,
    pub envelopes: Envelopes,
}

impl ClassificationReport {
    /// `(name, estimate)` in the canonical order.
    pub fn estimates(&self) -> [(&'static str, Option<&LimitEstimate>); 6] {
        [
            (ESTIMATE_NAMES[0], self.p_bar_12.as_ref()),
            (ESTIMATE_NAMES[1], self.p_bar_21.as_ref()),
            (ESTIMATE_NAMES[2], self.p_under_12.as_ref()),
            (ESTIMATE_NAMES[3], self.p_under_21.as_ref()),
            (ESTIMATE_NAMES[4], self.h_12_inf.as_ref()),
            (ESTIMATE_NAMES[5], self.h_21_inf.as_ref()),
        ]
    }
}

fn usable_mplus(est: &LimitEstimate) -> Option<f64> {
    let v = est.limit();
    (est.is_finite() && v > 0.0 && v.is_finite()).then_some(v)
}

/// Applies the lower-envelope defaults and chooses the H variants.
pub fn resolve_envelopes(
    spec: &ProblemSpec,
    witness: &GrowthWitness,
    constants: &DerivedConstants,
    opts: &ClassifyOptions,
) -> Result<(Envelopes, RemarkFlags), ClassifyError> {
    let mut flags = RemarkFlags::default();
    let lower = |given: &Option<LowerWitness>, m: f64, f: &Expr, defaulted: &mut bool| {
        given.clone().or_else(|| {
            (m >= 1.0).then(|| {
                *defaulted = true;
                LowerWitness { phiunder: f.clone(), cunder: 1.0 }
            })
        })
    };
    let lower1 = lower(&witness.lower1, constants.m1_low, &spec.f1, &mut flags.lower1_defaulted);
    let lower2 = lower(&witness.lower2, constants.m2_low, &spec.f2, &mut flags.lower2_defaulted);

    let mp12 = usable_mplus(&constants.m1_plus);
    let mp21 = usable_mplus(&constants.m2_plus);
    let upper12 = match (&witness.upper1, mp12) {
        (Some(u), mp) => {
            flags.mplus12_available = mp.is_some();
            Some(ResolvedUpper { h: HTransform::standard(spec, Pair::OneTwo, &u.h, constants.m1_cap)?, phibar: u.phibar.clone(), cbar: u.cbar })
        }
        (None, Some(mp)) => {
            flags.mplus12_used = true;
            Some(ResolvedUpper {
                h: HTransform::mplus(spec, Pair::OneTwo, constants.m1_cap, mp, None)?,
                phibar: Expr::constant(1.0),
                cbar: 1.0,
            })
        }
        (None, None) => None,
    };
    let upper21 = match (&witness.upper2, mp21) {
        (Some(u), mp) => {
            flags.mplus21_available = mp.is_some();
            Some(ResolvedUpper { h: HTransform::standard(spec, Pair::TwoOne, &u.h, constants.m2_cap)?, phibar: u.phibar.clone(), cbar: u.cbar })
        }
        (None, Some(mp)) => {
            flags.mplus21_used = true;
            Some(ResolvedUpper {
                h: HTransform::mplus(spec, Pair::TwoOne, constants.m2_cap, mp, opts.mplus21_outer_order)?,
                phibar: Expr::constant(1.0),
                cbar: 1.0,
            })
        }
        (None, None) => None,
    };
    Ok((Envelopes { upper12, upper21, lower1, lower2 }, flags))
}

/// Runs the full classification on `[0, r_budget]`.
pub fn classify(spec: &ProblemSpec, witness: &GrowthWitness, opts: &ClassifyOptions) -> Result<ClassificationReport, ClassifyError> {
    spec.validate()?;
    let table = build_kernel_table(spec, &opts.grid())?;
    let constants = derive_constants_with_table(spec, &table, &opts.limits)?;
    let hypotheses = check_hypotheses(
        spec,
        witness,
        &HypothesisOptions { radius: opts.probe_radius, samples: opts.probe_samples.min(60).max(2), ..Default::default() },
    );
    let (envelopes, remarks) = resolve_envelopes(spec, witness, &constants, opts)?;

    let lim = &opts.limits;
    let p_est = |kind: PKind, phi: Option<&Expr>| -> Result<Option<LimitEstimate>, ClassifyError> {
        let Some(phi) = phi else { return Ok(None) };
        let profile = p_integral_profile(&table, kind, phi)?;
        Ok(Some(estimate_from_samples(geometric_samples(&table.grid, &profile, lim), lim)))
    };
    let p_bar_12 = p_est(PKind::Bar12, envelopes.upper12.as_ref().map(|u| &u.phibar))?;
    let p_bar_21 = p_est(PKind::Bar21, envelopes.upper21.as_ref().map(|u| &u.phibar))?;
    let p_under_12 = p_est(PKind::Under12, envelopes.lower1.as_ref().map(|l| &l.phiunder))?;
    let p_under_21 = p_est(PKind::Under21, envelopes.lower2.as_ref().map(|l| &l.phiunder))?;
    let h_12_inf = envelopes.upper12.as_ref().map(|u| u.h.limit(lim)).transpose()?;
    let h_21_inf = envelopes.upper21.as_ref().map(|u| u.h.limit(lim)).transpose()?;

    // compare c̄^{1/k} P̄(∞) with H(∞)
    let scaled = |est: &Option<LimitEstimate>, c: f64, k: u32| {
        est.clone().map(|mut e| {
            let s = root(c, k);
            e.value_at_rmax *= s;
            e.extrapolated_limit = e.extrapolated_limit.map(|v| v * s);
            e.error_estimate = e.error_estimate.map(|v| v * s);
            e
        })
    };
    let below = |a: &Option<LimitEstimate>, b: &Option<LimitEstimate>| match (a, b) {
        (Some(a), Some(b)) => strictly_below(a, b),
        _ => false,
    };
    let cbar1 = envelopes.upper12.as_ref().map_or(1.0, |u| u.cbar);
    let cbar2 = envelopes.upper21.as_ref().map_or(1.0, |u| u.cbar);
    let cunder2 = envelopes.lower2.as_ref().map_or(1.0, |l| l.cunder);
    let inputs = DecisionInputs {
        status: [&p_bar_12, &p_bar_21, &p_under_12, &p_under_21, &h_12_inf, &h_21_inf].map(|e| e.as_ref().map(|e| e.verdict)),
        bar12_below_h12: below(&scaled(&p_bar_12, cbar1, spec.k1), &h_12_inf),
        bar21_below_h21: below(&scaled(&p_bar_21, cbar2, spec.k2), &h_21_inf),
        under21_below_h21: below(&scaled(&p_under_21, cunder2, spec.k2), &h_21_inf),
        hypotheses_ok: hypotheses.is_clean(),
    };
    let (verdict, blocking) = decide(&inputs);

    Ok(ClassificationReport {
        constants,
        p_bar_12,
        p_bar_21,
        p_under_12,
        p_under_21,
        h_12_inf,
        h_21_inf,
        verdict,
        blocking,
        remarks,
        hypotheses,
        envelopes,
    })
}

/// Which envelope inequalities a sandwich check enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandwichSides {
    pub lower1: bool,
    pub upper1: bool,
    pub lower2: bool,
    pub upper2: bool,
}

impl SandwichSides {
    pub const ALL: SandwichSides = SandwichSides { lower1: true, upper1: true, lower2: true, upper2: true };

    /// Bounds implied by each verdict: the upper envelope for every bounded
    /// component and the lower envelope for every large one.
    pub fn for_verdict(v: Verdict) -> SandwichSides {
        let (b1, b2) = match v {
            Verdict::Thm2I => return SandwichSides::ALL,
            Verdict::Thm1Case1 => (true, true),
            Verdict::Thm1Case2 => (false, false),
            Verdict::Thm1Case3 | Verdict::Thm2III => (true, false),
            Verdict::Thm1Case4 | Verdict::Thm2II => (false, true),
            Verdict::HypothesesNotMet | Verdict::Inconclusive => {
                return SandwichSides { lower1: false, upper1: false, lower2: false, upper2: false }
            }
        };
        SandwichSides { lower1: !b1, upper1: b1, lower2: !b2, upper2: b2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichResult {
    pub pass: bool,
    /// Largest violation (≤ 0 when every bound holds with margin).
    pub worst_violation: f64,
    pub worst_node: usize,
    pub worst_component: u8,
    pub lower1: Vec<f64>,
    pub upper1: Vec<f64>,
    pub lower2: Vec<f64>,
    pub upper2: Vec<f64>,
}

/// Envelope values `a + c̲^{1/k} P̲(r)` and `H⁻¹(c̄^{1/k} P̄(r))` on the
/// profile grid. Missing envelopes are returned as `−∞` / `+∞`.
pub fn envelope_profiles(
    spec: &ProblemSpec,
    envelopes: &Envelopes,
    grid: &[f64],
    sides: SandwichSides,
) -> Result<[Vec<f64>; 4], ClassifyError> {
    let table = build_kernel_table(spec, grid)?;
    let m = grid.len();
    let lower = |on: bool, l: &Option<LowerWitness>, kind: PKind, base: f64, k: u32| -> Result<Vec<f64>, ClassifyError> {
        match (on, l) {
            (true, Some(l)) => {
                let s = root(l.cunder, k);
                Ok(p_integral_profile(&table, kind, &l.phiunder)?.into_iter().map(|p| base + s * p).collect())
            }
            (true, None) => Err(ClassifyError::MissingWitness("lower envelope")),
            (false, _) => Ok(vec![f64::NEG_INFINITY; m]),
        }
    };
    let upper = |on: bool, u: &Option<ResolvedUpper>, kind: PKind, k: u32| -> Result<Vec<f64>, ClassifyError> {
        match (on, u) {
            (true, Some(u)) => {
                let s = root(u.cbar, k);
                p_integral_profile(&table, kind, &u.phibar)?.into_iter().map(|p| u.h.inverse(s * p)).collect()
            }
            (true, None) => Err(ClassifyError::MissingWitness("upper envelope")),
            (false, _) => Ok(vec![f64::INFINITY; m]),
        }
    };
    Ok([
        lower(sides.lower1, &envelopes.lower1, PKind::Under12, spec.central_a, spec.k1)?,
        upper(sides.upper1, &envelopes.upper12, PKind::Bar12, spec.k1)?,
        lower(sides.lower2, &envelopes.lower2, PKind::Under21, spec.central_b, spec.k2)?,
        upper(sides.upper2, &envelopes.upper21, PKind::Bar21, spec.k2)?,
    ])
}

/// Checks `lower ≤ u ≤ upper` at every node within `tolerance`.
pub fn sandwich_check(
    spec: &ProblemSpec,
    envelopes: &Envelopes,
    profile: &SolutionProfile,
    sides: SandwichSides,
    tolerance: f64,
) -> Result<SandwichResult, ClassifyError> {
    let [lower1, upper1, lower2, upper2] = envelope_profiles(spec, envelopes, &profile.grid, sides)?;
    let mut worst = (f64::NEG_INFINITY, 0usize, 1u8);
    for i in 0..profile.grid.len() {
        for (comp, u, lo, hi) in [(1u8, profile.u1[i], lower1[i], upper1[i]), (2u8, profile.u2[i], lower2[i], upper2[i])] {
            let v = (lo - u).max(u - hi);
            if v > worst.0 {
                worst = (v, i, comp);
            }
        }
    }
    Ok(SandwichResult {
        pass: worst.0 <= tolerance,
        worst_violation: worst.0,
        worst_node: worst.1,
        worst_component: worst.2,
        lower1,
        upper1,
        lower2,
        upper2,
    })
}
