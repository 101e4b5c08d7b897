use crate::expr::{EvalError, Expr};
use thiserror::Error;

/// A coupled radial system
///
/// ```text
/// S_k1(λ(D²u₁)) + a₁(|x|)|∇u₁|^k1 = p₁(|x|) f₁(u₂)
/// S_k2(λ(D²u₂)) + a₂(|x|)|∇u₂|^k2 = p₂(|x|) f₂(u₁)
/// ```
///
/// in dimension `n`, with central values `u₁(0) = central_a`, `u₂(0) = central_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n: u32,
    pub k1: u32,
    pub k2: u32,
    pub a1: Expr,
    pub a2: Expr,
    pub p1: Expr,
    pub p2: Expr,
    pub f1: Expr,
    pub f2: Expr,
    pub central_a: f64,
    pub central_b: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("dimension N = {0} must be at least 3")]
    Dimension(u32),
    #[error("Hessian order k{which} = {k} must lie in 1..={n}")]
    Order { which: u8, k: u32, n: u32 },
    #[error("central value {name} = {value} must be positive and finite")]
    CentralValue { name: &'static str, value: f64 },
    #[error("{name}({arg}) failed: {source}")]
    Eval { name: &'static str, arg: f64, source: EvalError },
}

/// Which of the six problem functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    A1,
    A2,
    P1,
    P2,
    F1,
    F2,
}

impl Coefficient {
    pub fn name(self) -> &'static str {
        match self {
            Coefficient::A1 => "a1",
            Coefficient::A2 => "a2",
            Coefficient::P1 => "p1",
            Coefficient::P2 => "p2",
            Coefficient::F1 => "f1",
            Coefficient::F2 => "f2",
        }
    }
}

impl ProblemSpec {
    /// Checks the structural constraints (dimension, orders, central values).
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.n < 3 {
            return Err(SpecError::Dimension(self.n));
        }
        for (which, k) in [(1u8, self.k1), (2u8, self.k2)] {
            if k < 1 || k > self.n {
                return Err(SpecError::Order { which, k, n: self.n });
            }
        }
        for (name, value) in [("a", self.central_a), ("b", self.central_b)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SpecError::CentralValue { name, value });
            }
        }
        Ok(())
    }

    pub fn expr(&self, which: Coefficient) -> &Expr {
        match which {
            Coefficient::A1 => &self.a1,
            Coefficient::A2 => &self.a2,
            Coefficient::P1 => &self.p1,
            Coefficient::P2 => &self.p2,
            Coefficient::F1 => &self.f1,
            Coefficient::F2 => &self.f2,
        }
    }

    pub fn eval(&self, which: Coefficient, t: f64) -> Result<f64, SpecError> {
        self.expr(which)
            .eval(t, self.n)
            .map_err(|source| SpecError::Eval { name: which.name(), arg: t, source })
    }

    /// `f^{1/k}` evaluated at `t`: f₁ uses k₁, f₂ uses k₂.
    pub fn f_root(&self, which: Coefficient, t: f64) -> Result<f64, SpecError> {
        let k = match which {
            Coefficient::F1 => self.k1,
            Coefficient::F2 => self.k2,
            _ => 1,
        };
        Ok(root(self.eval(which, t)?, k))
    }
}

/// `x^{1/k}` for `x ≥ 0`; negative inputs are clamped to zero.
pub fn root(x: f64, k: u32) -> f64 {
    let x = x.max(0.0);
    match k {
        1 => x,
        2 => x.sqrt(),
        3 => x.cbrt(),
        _ => x.powf(1.0 / k as f64),
    }
}
