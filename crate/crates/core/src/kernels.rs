//! Integrating-factor kernels of the radial system.
//!
//! Each equation `S_k(λ(D²u)) + a|∇u|^k = p·φ` reduces to
//!
//! ```text
//! u′(t)^k = G⁻(t) ∫₀ᵗ G⁺(s) φ(s) ds,
//! G⁻(t) = t^{k−N} e^{−E(t)} / C,   G⁺(s) = s^{N−1} e^{E(s)} p(s),
//! E(t)  = ∫₀ᵗ s^{k−1} a(s) / C ds,  C = (N−1)! / (k! (N−k)!).
//! ```
//!
//! `G1` carries `(k₂, a₂, p₂, C₀₀)` and drives `u₂`; `G2` carries
//! `(k₁, a₁, p₁, C₀)` and drives `u₁`. The product `G⁻(t)·∫G⁺φ` is never
//! formed literally: [`fused_profile`] and [`fused_weight`] evaluate the
//! ratio form `(1/C) ∫₀ᵗ (s/t)^{N−k} s^{k−1} e^{E(s)−E(t)} p(s) φ(s) ds`,
//! which stays finite at the origin and for large exponents.

use thiserror::Error;

use crate::hessian::binomial;
use crate::limits::{estimate_from_samples, LimitEstimate, LimitOptions};
use crate::problem::{root, Coefficient, ProblemSpec, SpecError};
pub use crate::quadrature::{cumulative_integral, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("Hessian orders must satisfy 1 <= k <= N (got k1 = {k1}, k2 = {k2}, N = {n})")]
    InvalidOrders { n: u32, k1: u32, k2: u32 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("grid must start at r = 0")]
    GridOrigin,
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianConstants {
    pub n: u32,
    pub c0: f64,
    pub c00: f64,
}

impl HessianConstants {
    /// `(n−1)! / ((k−1)! (n−k)!)`, the coefficient of the radial `S_k`.
    pub fn binom(k: u32, n: u32) -> f64 {
        binomial(n - 1, k - 1)
    }
}

/// `C = (N−1)!/(k!(N−k)!)`, i.e. `C(N−1, k−1) / k`.
fn order_constant(n: u32, k: u32) -> f64 {
    binomial(n - 1, k - 1) / k as f64
}

pub fn constants(n: u32, k1: u32, k2: u32) -> Result<HessianConstants, KernelError> {
    if n == 0 || k1 < 1 || k1 > n || k2 < 1 || k2 > n {
        return Err(KernelError::InvalidOrders { n, k1, k2 });
    }
    Ok(HessianConstants { n, c0: order_constant(n, k1), c00: order_constant(n, k2) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `(k₂, a₂, p₂, C₀₀)`, drives `u₂`.
    G1,
    /// `(k₁, a₁, p₁, C₀)`, drives `u₁`.
    G2,
}

impl Kernel {
    pub fn other(self) -> Kernel {
        match self {
            Kernel::G1 => Kernel::G2,
            Kernel::G2 => Kernel::G1,
        }
    }
}

/// Kernel samples on a radial grid. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub grid: Vec<f64>,
    pub n: u32,
    pub k1: u32,
    pub k2: u32,
    pub constants: HessianConstants,
    /// `E₁(t) = ∫₀ᵗ s^{k₁−1} a₁(s)/C₀ ds`
    pub e1: Vec<f64>,
    /// `E₂(t) = ∫₀ᵗ s^{k₂−1} a₂(s)/C₀₀ ds`
    pub e2: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// Entry 0 is `+∞` for `k < N` (singular at the origin, never used).
    pub g1minus: Vec<f64>,
    pub g1plus: Vec<f64>,
    pub g2minus: Vec<f64>,
    pub g2plus: Vec<f64>,
    pub cum_g1plus: Vec<f64>,
    pub cum_g2plus: Vec<f64>,
}

impl KernelTable {
    pub fn order(&self, kernel: Kernel) -> u32 {
        match kernel {
            Kernel::G1 => self.k2,
            Kernel::G2 => self.k1,
        }
    }

    pub fn constant(&self, kernel: Kernel) -> f64 {
        match kernel {
            Kernel::G1 => self.constants.c00,
            Kernel::G2 => self.constants.c0,
        }
    }

    pub fn exponent(&self, kernel: Kernel) -> &[f64] {
        match kernel {
            Kernel::G1 => &self.e2,
            Kernel::G2 => &self.e1,
        }
    }

    pub fn weight(&self, kernel: Kernel) -> &[f64] {
        match kernel {
            Kernel::G1 => &self.p2,
            Kernel::G2 => &self.p1,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

pub fn build_kernel_table(spec: &ProblemSpec, grid: &[f64]) -> Result<KernelTable, KernelError> {
    let consts = constants(spec.n, spec.k1, spec.k2)?;
    if grid.first() != Some(&0.0) {
        return Err(KernelError::GridOrigin);
    }
    let n = spec.n;
    let sample = |which: Coefficient| -> Result<Vec<f64>, SpecError> {
        grid.iter().map(|&r| spec.eval(which, r)).collect()
    };
    let a1 = sample(Coefficient::A1)?;
    let a2 = sample(Coefficient::A2)?;
    let p1 = sample(Coefficient::P1)?;
    let p2 = sample(Coefficient::P2)?;

    let exponent = |a: &[f64], k: u32, c: f64| -> Result<Vec<f64>, QuadratureError> {
        let integrand: Vec<f64> = grid.iter().zip(a).map(|(&s, &av)| s.powi(k as i32 - 1) * av / c).collect();
        cumulative_integral(grid, &integrand)
    };
    let e1 = exponent(&a1, spec.k1, consts.c0)?;
    let e2 = exponent(&a2, spec.k2, consts.c00)?;

    let minus = |e: &[f64], k: u32, c: f64| -> Vec<f64> {
        grid.iter()
            .zip(e)
            .map(|(&t, &ev)| if t == 0.0 && k < n { f64::INFINITY } else { t.powi(k as i32 - n as i32) * (-ev).exp() / c })
            .collect()
    };
    let plus = |e: &[f64], p: &[f64]| -> Vec<f64> {
        grid.iter().zip(e).zip(p).map(|((&t, &ev), &pv)| t.powi(n as i32 - 1) * ev.exp() * pv).collect()
    };
    let g1minus = minus(&e2, spec.k2, consts.c00);
    let g2minus = minus(&e1, spec.k1, consts.c0);
    let g1plus = plus(&e2, &p2);
    let g2plus = plus(&e1, &p1);
    let cum_g1plus = cumulative_integral(grid, &g1plus)?;
    let cum_g2plus = cumulative_integral(grid, &g2plus)?;

    Ok(KernelTable {
        grid: grid.to_vec(),
        n,
        k1: spec.k1,
        k2: spec.k2,
        constants: consts,
        e1,
        e2,
        p1,
        p2,
        g1minus,
        g1plus,
        g2minus,
        g2plus,
        cum_g1plus,
        cum_g2plus,
    })
}

/// Panel weights `(c₀, c₁)` for `∫_a^b s^{N−1} g(s) ds ≈ b^{N−1} h (c₀ g(a) + c₁ g(b))`
/// with `g` linear on the panel and `q = a/b`. Written through the partial
/// sums `S_j = 1 + q + … + q^{j−1}` so nothing cancels as `q → 1`, where
/// the weights tend to the trapezoid's `(½, ½)`.
fn panel_weights(q: f64, n: u32) -> (f64, f64) {
    let mut s = 1.0;
    let mut sum = 1.0;
    for _ in 1..n {
        s = 1.0 + q * s;
        sum += s;
    }
    let nf = f64::from(n);
    let c1 = sum / (nf * (nf + 1.0));
    (s / nf - c1, c1)
}

/// `G⁻(t) ∫₀ᵗ G⁺(s) φ(s) ds` at every grid node, where `phi[i] = φ(r_i)`.
///
/// Product integration on the ratio-form integrand: `e^{E} p φ` is taken
/// linear on each panel and the weight `s^{N−1}` is integrated exactly, so
/// the relative error stays `O(h²)` down to the origin. Moving the upper
/// limit from `t_m` to `t_{m+1}` rescales every earlier term by the same
/// factor `(t_m/t_{m+1})^{N−k} e^{E(t_m)−E(t_{m+1})}`, so the whole profile
/// costs one pass.
pub fn fused_profile(table: &KernelTable, kernel: Kernel, phi: &[f64]) -> Vec<f64> {
    let grid = &table.grid;
    let k = table.order(kernel) as i32;
    let nk = table.n as i32 - k;
    let c = table.constant(kernel);
    let e = table.exponent(kernel);
    let p = table.weight(kernel);
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(acc);
    for m in 0..grid.len().saturating_sub(1) {
        let (t0, t1) = (grid[m], grid[m + 1]);
        let decay = (e[m] - e[m + 1]).exp();
        let rho = (t0 / t1).powi(nk) * decay;
        let (c0, c1) = panel_weights(t0 / t1, table.n);
        let panel = c0 * decay * p[m] * phi[m] + c1 * p[m + 1] * phi[m + 1];
        acc = rho * acc + (t1 - t0) * t1.powi(k - 1) * panel / c;
        out.push(acc);
    }
    out
}

/// Single-node evaluation of the fused kernel by summing the same panel
/// rule directly, each panel scaled to the target node. Agrees with
/// [`fused_profile`] to rounding.
pub fn fused_weight(table: &KernelTable, kernel: Kernel, phi: &[f64], index: usize) -> f64 {
    let grid = &table.grid;
    let t = grid[index];
    if t == 0.0 {
        return 0.0;
    }
    let k = table.order(kernel) as i32;
    let nk = table.n as i32 - k;
    let c = table.constant(kernel);
    let e = table.exponent(kernel);
    let p = table.weight(kernel);
    let mut sum = 0.0;
    for j in 0..index {
        let (a, b) = (grid[j], grid[j + 1]);
        let (c0, c1) = panel_weights(a / b, table.n);
        let scale = (b - a) * (b / t).powi(nk) * b.powi(k - 1);
        sum += scale * (c0 * (e[j] - e[index]).exp() * p[j] * phi[j] + c1 * (e[j + 1] - e[index]).exp() * p[j + 1] * phi[j + 1]);
    }
    sum / c
}

/// `(G⁻(t) ∫₀ᵗ G⁺ φ)^{1/k}` at every node: the derivative of the next iterate.
pub fn slope_profile(table: &KernelTable, kernel: Kernel, phi: &[f64]) -> Vec<f64> {
    let k = table.order(kernel);
    fused_profile(table, kernel, phi).into_iter().map(|v| root(v, k)).collect()
}

/// `∫₀^r (G⁻(z) ∫₀^z G⁺ φ)^{1/k} dz` at every node.
pub fn potential_profile(table: &KernelTable, kernel: Kernel, phi: &[f64]) -> Vec<f64> {
    let slope = slope_profile(table, kernel, phi);
    cumulative_integral(&table.grid, &slope).expect("table grid is validated at build time")
}

/// Samples a profile at the radii of `opts`, interpolating between nodes.
pub(crate) fn geometric_samples(grid: &[f64], values: &[f64], opts: &LimitOptions) -> Vec<(f64, f64)> {
    opts.radii()
        .into_iter()
        .filter(|&r| r <= *grid.last().unwrap_or(&0.0) * (1.0 + 1e-12))
        .map(|r| (r, crate::quadrature::interpolate(grid, values, r)))
        .collect()
}

/// `M⁺ = sup_t ∫₀ᵗ (G⁻(z)∫₀^z G⁺)^{1/k} dz` over the table: `Kernel::G1`
/// gives M₁⁺, `Kernel::G2` gives M₂⁺. The running integral is
/// nondecreasing, so the supremum is its limit.
pub fn m_plus(table: &KernelTable, kernel: Kernel, opts: &LimitOptions) -> LimitEstimate {
    let ones = vec![1.0; table.len()];
    let running = potential_profile(table, kernel, &ones);
    estimate_from_samples(geometric_samples(&table.grid, &running, opts), opts)
}
