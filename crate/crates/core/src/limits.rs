//! Finite/divergent detection for nondecreasing one-parameter integrals.
//!
//! The function is sampled at `r0 · 2^j` up to the budget. Over the last
//! `window` doublings the increments must either shrink geometrically
//! (ratio at most `decay_ratio`) or keep growing; anything else is
//! reported as inconclusive.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl fmt::Display for LimitVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitVerdict::Finite => "Finite",
            LimitVerdict::Divergent => "Divergent",
            LimitVerdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub r0: f64,
    pub r_budget: f64,
    pub decay_ratio: f64,
    /// Relative allowance on `decay_ratio`: an exact `1/r` tail has
    /// increment ratio exactly 0.5 and still counts as decaying.
    pub ratio_slack: f64,
    pub window: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { r0: 1.0, r_budget: 1024.0, decay_ratio: 0.5, ratio_slack: 1e-3, window: 3 }
    }
}

impl LimitOptions {
    /// Sample radii `r0 · 2^j ≤ r_budget`.
    pub fn radii(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut r = self.r0;
        while r <= self.r_budget * (1.0 + 1e-12) {
            out.push(r);
            r *= 2.0;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub value_at_rmax: f64,
    pub verdict: LimitVerdict,
    /// `(radius, value)` at the geometric sample radii.
    pub evidence: Vec<(f64, f64)>,
    pub extrapolated_limit: Option<f64>,
    pub error_estimate: Option<f64>,
}

impl LimitEstimate {
    pub fn is_finite(&self) -> bool {
        self.verdict == LimitVerdict::Finite
    }

    pub fn is_divergent(&self) -> bool {
        self.verdict == LimitVerdict::Divergent
    }

    /// Best available value for the limit: the extrapolation when finite.
    pub fn limit(&self) -> f64 {
        match self.verdict {
            LimitVerdict::Finite => self.extrapolated_limit.unwrap_or(self.value_at_rmax),
            LimitVerdict::Divergent => f64::INFINITY,
            LimitVerdict::Inconclusive => f64::NAN,
        }
    }
}

pub fn limit_estimate<F>(mut integral: F, opts: &LimitOptions) -> LimitEstimate
where
    F: FnMut(f64) -> f64,
{
    let evidence: Vec<(f64, f64)> = opts.radii().into_iter().map(|r| (r, integral(r))).collect();
    estimate_from_samples(evidence, opts)
}

/// Classifies already-sampled values at geometrically spaced radii.
pub fn estimate_from_samples(evidence: Vec<(f64, f64)>, opts: &LimitOptions) -> LimitEstimate {
    let value_at_rmax = evidence.last().map_or(f64::NAN, |e| e.1);
    let inconclusive = |evidence| LimitEstimate {
        value_at_rmax,
        verdict: LimitVerdict::Inconclusive,
        evidence,
        extrapolated_limit: None,
        error_estimate: None,
    };
    let window = opts.window.max(2);
    if evidence.len() < window + 1 {
        return inconclusive(evidence);
    }
    if evidence.iter().any(|e| e.1.is_nan()) {
        return inconclusive(evidence);
    }
    if evidence.iter().any(|e| e.1.is_infinite()) {
        return LimitEstimate {
            value_at_rmax,
            verdict: LimitVerdict::Divergent,
            evidence,
            extrapolated_limit: None,
            error_estimate: None,
        };
    }
    let incs: Vec<f64> = evidence.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let last = &incs[incs.len() - window..];
    let scale = evidence.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
    let negligible = 1e-14 * scale + 1e-300;

    if last.iter().all(|d| d.abs() <= negligible) {
        return LimitEstimate {
            value_at_rmax,
            verdict: LimitVerdict::Finite,
            evidence,
            extrapolated_limit: Some(value_at_rmax),
            error_estimate: Some(negligible),
        };
    }

    let q = opts.decay_ratio * (1.0 + opts.ratio_slack);
    let decaying = last.windows(2).all(|w| w[0] > 0.0 && w[1] >= -negligible && w[1] <= q * w[0]);
    if decaying {
        let d = last[window - 1].max(0.0);
        let rho = (d / last[window - 2]).clamp(0.0, q);
        let tail = d * rho / (1.0 - rho);
        return LimitEstimate {
            value_at_rmax,
            verdict: LimitVerdict::Finite,
            evidence,
            extrapolated_limit: Some(value_at_rmax + tail),
            error_estimate: Some(tail.abs() + negligible),
        };
    }

    let growing = last[0] > negligible && last.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    if growing {
        return LimitEstimate {
            value_at_rmax,
            verdict: LimitVerdict::Divergent,
            evidence,
            extrapolated_limit: None,
            error_estimate: None,
        };
    }
    inconclusive(evidence)
}
