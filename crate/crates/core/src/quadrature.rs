//! Cell-average quadrature for radial profiles `g(|x - c|)` on 2-d cells.

use std::f64::consts::{FRAC_PI_4, PI};

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Mean of `g(|x|)` over the square `[0,h]^2`, given the radial antiderivative
/// `big_g(R) = ∫_0^R g(ρ) ρ dρ`. The angular integral is smooth and is done by
/// Gauss–Legendre, so only the radial singularity is handled in closed form.
pub fn corner_square_mean(h: f64, big_g: impl Fn(f64) -> f64) -> f64 {
    let nodes = gauss_legendre(32);
    let half = FRAC_PI_4 / 2.0;
    let integral: f64 = nodes
        .iter()
        .map(|&(t, wt)| {
            let phi = half * (t + 1.0);
            wt * half * big_g(h / phi.cos())
        })
        .sum();
    2.0 * integral / (h * h)
}

/// Tensor Gauss–Legendre mean of a smooth `f` over `[x0,x0+h]×[y0,y0+h]`.
pub fn square_mean(x0: f64, y0: f64, h: f64, points: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let nodes = gauss_legendre(points);
    let mut total = 0.0;
    for &(ty, wy) in &nodes {
        let y = y0 + 0.5 * h * (ty + 1.0);
        for &(tx, wx) in &nodes {
            let x = x0 + 0.5 * h * (tx + 1.0);
            total += wx * wy * f(x, y);
        }
    }
    total / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 32] {
            let nodes = gauss_legendre(n);
            let total: f64 = nodes.iter().map(|p| p.1).sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            // x^(2n-2) integrates to 2/(2n-1).
            let deg = 2 * n as i32 - 2;
            let q: f64 = nodes.iter().map(|&(x, w)| w * x.powi(deg)).sum();
            assert!((q - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn corner_mean_of_squared_radius() {
        // g(ρ) = ρ², mean of x²+y² over [0,h]² is 2h²/3.
        let h = 0.25;
        let m = corner_square_mean(h, |r| r.powi(4) / 4.0);
        assert!((m - 2.0 * h * h / 3.0).abs() < 1e-14);
    }
}
