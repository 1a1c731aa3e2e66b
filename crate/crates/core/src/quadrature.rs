//! Gauss–Legendre rules, barycentric interpolation and spectral differentiation
//! on uniform periodic grids.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rustfft::FftPlanner;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Differentiation matrix of the polynomial interpolant through `nodes`.
pub fn polynomial_diff_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut diag = 0.0;
        for k in 0..n {
            if k != j {
                d[j][k] = (w[k] / w[j]) / (nodes[j] - nodes[k]);
                diag -= d[j][k];
            }
        }
        d[j][j] = diag;
    }
    d
}

/// Row of Lagrange basis values at `t` for interpolation through `nodes`.
pub fn lagrange_row(nodes: &[f64], bary: &[f64], t: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&x| x == t) {
        let mut row = vec![0.0; nodes.len()];
        row[j] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(x, w)| w / (t - x)).collect();
    let total: f64 = terms.iter().sum();
    terms.iter().map(|v| v / total).collect()
}

/// Weights of the interpolatory rule on `nodes ⊂ [a, b]` (exact for degree < len).
pub fn interpolatory_weights(nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
    let m = nodes.len();
    let (gx, gw) = gauss_legendre_on(m + 2, a, b);
    let bary = barycentric_weights(nodes);
    let mut w = vec![0.0; m];
    for (x, wx) in gx.iter().zip(&gw) {
        for (j, l) in lagrange_row(nodes, &bary, *x).iter().enumerate() {
            w[j] += wx * l;
        }
    }
    w
}

/// Spectral differentiation matrix on `m` uniform points of a `2π`-periodic grid
/// (`m` even), entry `(j, l)`.
pub fn periodic_diff_entry(m: usize, j: usize, l: usize) -> f64 {
    if j == l {
        return 0.0;
    }
    let h = 2.0 * PI / m as f64;
    let k = j as i64 - l as i64;
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    0.5 * sign / (0.5 * k as f64 * h).tan()
}

pub fn periodic_diff_matrix(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|j| (0..m).map(|l| periodic_diff_entry(m, j, l)).collect())
        .collect()
}

/// Periodic cardinal function for `m` (even) uniform points, at offset `theta`.
pub fn periodic_cardinal(m: usize, theta: f64) -> f64 {
    let half = 0.5 * theta;
    if half.sin().abs() < 1e-15 {
        return 1.0;
    }
    (m as f64 * half).sin() / (m as f64 * half.tan())
}

/// Spectral derivative of `2π`-periodic samples on a uniform grid (even length).
pub fn periodic_derivative(data: &[C]) -> Vec<C> {
    let m = data.len();
    let mut planner = FftPlanner::new();
    let mut buf = data.to_vec();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let wave = if 2 * k < m { k as f64 } else { k as f64 - m as f64 };
        *c *= if 2 * k == m { C::new(0.0, 0.0) } else { C::new(0.0, wave / m as f64) };
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf
}
