//! Quadrature primitives: cumulative trapezoid on radial grids and an
//! adaptive Simpson rule for one-off definite integrals.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("grid is not strictly increasing at index {0}")]
    NonMonotoneGrid(usize),
    #[error("grid has {grid} nodes but {samples} samples were given")]
    LengthMismatch { grid: usize, samples: usize },
}

/// `n + 1` equally spaced radii on `[0, r_max]`.
pub fn uniform_grid(r_max: f64, intervals: usize) -> Vec<f64> {
    let h = r_max / intervals as f64;
    (0..=intervals).map(|i| if i == intervals { r_max } else { i as f64 * h }).collect()
}

/// Composite trapezoidal running integral; `out[0] = 0`.
pub fn cumulative_integral(grid: &[f64], samples: &[f64]) -> Result<Vec<f64>, QuadratureError> {
    if grid.len() != samples.len() {
        return Err(QuadratureError::LengthMismatch { grid: grid.len(), samples: samples.len() });
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(QuadratureError::NonMonotoneGrid(i + 1));
    }
    let mut out = Vec::with_capacity(grid.len());
    if grid.is_empty() {
        return Ok(out);
    }
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..grid.len() {
        acc += 0.5 * (grid[i] - grid[i - 1]) * (samples[i] + samples[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Linear interpolation of grid samples; clamps outside the grid.
pub fn interpolate(grid: &[f64], values: &[f64], r: f64) -> f64 {
    let last = grid.len() - 1;
    if r <= grid[0] {
        return values[0];
    }
    if r >= grid[last] {
        return values[last];
    }
    let j = grid.partition_point(|&x| x <= r);
    let (x0, x1) = (grid[j - 1], grid[j]);
    if r == x0 {
        return values[j - 1];
    }
    let w = (r - x0) / (x1 - x0);
    values[j - 1] * (1.0 - w) + values[j] * w
}

/// Adaptive Simpson quadrature with Richardson correction on each panel.
/// Returns the estimate and whether every panel met its tolerance.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> (f64, bool)
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return (0.0, true);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = simpson_panel(f, a, b, fa, fm, fb, whole, tol, max_depth, &mut ok);
    (v, ok)
}

#[allow(clippy::too_many_arguments)]
fn simpson_panel<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32, ok: &mut bool) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 || !delta.is_finite() {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *ok = false;
        }
        return left + right + delta / 15.0;
    }
    simpson_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + simpson_panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_is_exact() {
        let g = uniform_grid(1.0, 10);
        let out = cumulative_integral(&g, &g).unwrap();
        assert_eq!(out[0], 0.0);
        assert!((out[10] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_samples_give_zero() {
        let g = uniform_grid(3.0, 7);
        assert!(cumulative_integral(&g, &[0.0; 8]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadratic_error_ratio_is_four() {
        let err = |m: u32| {
            let g = uniform_grid(1.0, 1 << m);
            let s: Vec<f64> = g.iter().map(|x| x * x).collect();
            cumulative_integral(&g, &s).unwrap().last().unwrap() - 1.0 / 3.0
        };
        for m in 3..8 {
            let ratio = err(m) / err(m + 1);
            assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(cumulative_integral(&[0.0, 1.0, 1.0], &[0.0; 3]), Err(QuadratureError::NonMonotoneGrid(2)));
        assert!(matches!(cumulative_integral(&[0.0, 1.0], &[0.0]), Err(QuadratureError::LengthMismatch { .. })));
    }

    #[test]
    fn nonnegative_samples_give_nondecreasing_output() {
        let g = uniform_grid(2.0, 50);
        let s: Vec<f64> = g.iter().map(|x| (5.0 * x).sin().abs()).collect();
        let out = cumulative_integral(&g, &s).unwrap();
        assert!(out.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn simpson_on_log() {
        let (v, ok) = adaptive_simpson(&|t: f64| 1.0 / t, 1.0, std::f64::consts::E, 1e-14, 40);
        assert!(ok);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation() {
        let g = uniform_grid(1.0, 4);
        let v: Vec<f64> = g.iter().map(|x| 2.0 * x).collect();
        assert_eq!(interpolate(&g, &v, 0.25), 0.5);
        assert!((interpolate(&g, &v, 0.3) - 0.6).abs() < 1e-15);
        assert_eq!(interpolate(&g, &v, 5.0), 2.0);
    }
}
