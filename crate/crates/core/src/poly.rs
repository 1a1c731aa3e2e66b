//! Dense univariate polynomials over `Complex64`, stored in ascending order
//! (`coeffs[k]` multiplies `λ^k`).

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use crate::error::{Error, Result};

pub fn eval(coeffs: &[C], x: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub fn derivative(coeffs: &[C]) -> Vec<C> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Monic characteristic polynomial `det(λI - M)` by Faddeev–LeVerrier.
pub fn char_poly(m: &DMatrix<C>) -> Vec<C> {
    let n = m.nrows();
    let mut coeffs = vec![C::new(0.0, 0.0); n + 1];
    coeffs[n] = C::new(1.0, 0.0);
    let mut mk = DMatrix::<C>::zeros(n, n);
    let id = DMatrix::<C>::identity(n, n);
    for k in 1..=n {
        mk = m * &mk + &id * coeffs[n - k + 1];
        let amk = m * &mk;
        coeffs[n - k] = -amk.trace() / k as f64;
    }
    coeffs
}

/// All roots of a polynomial by Aberth–Ehrlich iteration, polished with Newton steps.
pub fn roots(coeffs: &[C]) -> Result<Vec<C>> {
    let mut p: Vec<C> = coeffs.to_vec();
    while p.len() > 1 && p.last().map_or(false, |c| c.norm() == 0.0) {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let monic: Vec<C> = p.iter().map(|&c| c / lead).collect();
    if deg == 1 {
        return Ok(vec![-monic[0]]);
    }
    if deg == 2 {
        return Ok(quadratic_roots(monic[2], monic[1], monic[0]).to_vec());
    }
    let dp = derivative(&monic);

    // Cauchy bound for the initial circle.
    let radius = 1.0
        + monic[..deg]
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
    let r0 = radius.min(
        monic[0].norm().powf(1.0 / deg as f64).max(1e-3),
    );
    let mut z: Vec<C> = (0..deg)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            C::from_polar(r0, angle)
        })
        .collect();

    let mut converged = false;
    for _ in 0..2000 {
        let mut max_corr: f64 = 0.0;
        for i in 0..deg {
            let pv = eval(&monic, z[i]);
            let dv = eval(&dp, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut s = C::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    s += C::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let w = ratio / (C::new(1.0, 0.0) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[i] -= w;
            max_corr = max_corr.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_corr < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // Aberth stalls only on clusters; accept if the residuals are small.
        let scale = monic.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
        if z.iter().any(|&r| eval(&monic, r).norm() > 1e-8 * scale) {
            return Err(Error::RootFinder {
                coeffs: coeffs.to_vec(),
            });
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let dv = eval(&dp, *r);
            if dv.norm() == 0.0 {
                break;
            }
            let step = eval(&monic, *r) / dv;
            if !(step.norm() < 1e-6 * (1.0 + r.norm())) {
                break;
            }
            *r -= step;
        }
    }
    Ok(z)
}

/// Roots of `a x^2 + b x + c` without catastrophic cancellation.
pub fn quadratic_roots(a: C, b: C, c: C) -> [C; 2] {
    let sq = (b * b - a * c * 4.0).sqrt();
    // pick the sign that avoids cancellation in -b ± sq
    let q = if (b.conj() * sq).re >= 0.0 {
        -(b + sq) * 0.5
    } else {
        -(b - sq) * 0.5
    };
    if q.norm() == 0.0 {
        return [C::new(0.0, 0.0), C::new(0.0, 0.0)];
    }
    [q / a, c / q]
}

/// Resultant of two polynomials as the determinant of their Sylvester matrix.
pub fn resultant(p: &[C], q: &[C]) -> C {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    if size == 0 {
        return C::new(1.0, 0.0);
    }
    let mut s = DMatrix::<C>::zeros(size, size);
    // rows hold descending coefficients, shifted
    for row in 0..n {
        for (k, &c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..m {
        for (k, &c) in q.iter().rev().enumerate() {
            s[(n + row, row + k)] = c;
        }
    }
    s.determinant()
}

/// Discriminant from the resultant of `p` and `p'`.
pub fn discriminant_resultant(p: &[C]) -> C {
    let n = p.len() - 1;
    let lead = p[n];
    let res = resultant(p, &derivative(p));
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    res * sign / lead
}

/// Discriminant of a monic polynomial from its roots: `∏_{i<j} (r_i - r_j)^2`.
pub fn discriminant_from_roots(roots: &[C]) -> C {
    let mut d = C::new(1.0, 0.0);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let diff = roots[i] - roots[j];
            d *= diff * diff;
        }
    }
    d
}
