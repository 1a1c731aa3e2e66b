//! Seeded random group elements and pencils for the sampled property checks.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;

use crate::error::Result;
use crate::group::GroupElement;
use crate::quadric::{pencil_spectrum, Quadric};

fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.random::<f64>() * 2.0 - 1.0
}

/// A real rotation from the QR factor of a random matrix, with sign-fixed columns
/// and determinant `+1`.
pub fn random_rotation<R: Rng>(n: usize, rng: &mut R) -> GroupElement {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| uniform(rng));
        let qr = m.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-3) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        let entries = q.map(|v| C::new(v, 0.0));
        if let Ok(g) = GroupElement::new(entries) {
            return g;
        }
    }
}

/// `k₁ · diag(e^{t_j}) · k₂` with `Σ t_j = 0` and `|t_j| ≤ spread`.
pub fn random_real_element<R: Rng>(n: usize, spread: f64, rng: &mut R) -> GroupElement {
    let mut t: Vec<f64> = (0..n).map(|_| uniform(rng) * spread).collect();
    let mean = t.iter().sum::<f64>() / n as f64;
    t.iter_mut().for_each(|v| *v -= mean);
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { C::new(t[i].exp(), 0.0) } else { C::new(0.0, 0.0) });
    let k1 = random_rotation(n, rng);
    let k2 = random_rotation(n, rng);
    GroupElement::new(k1.entries() * d * k2.entries()).expect("unit determinant by construction")
}

/// A complex matrix with entries uniform in the unit square, scaled to unit determinant.
pub fn random_complex_element<R: Rng>(n: usize, rng: &mut R) -> GroupElement {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| C::new(uniform(rng), uniform(rng)));
        let det = m.determinant();
        if det.norm() < 0.1 {
            continue;
        }
        let root = det.powf(1.0 / n as f64);
        if let Ok(g) = GroupElement::new(m / root) {
            return g;
        }
    }
}

/// A random real symmetric pencil `(A, B)` with `B` positive definite and
/// generalized eigenvalues separated by at least `min_gap` (relative).
pub fn random_symmetric_pencil<R: Rng>(n: usize, min_gap: f64, rng: &mut R) -> Result<(Quadric, Quadric)> {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| uniform(rng));
        let a = (&a + a.transpose()) * 0.5;
        let m = DMatrix::from_fn(n, n, |_, _| uniform(rng));
        let b = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
        let qa = Quadric::new(a.map(|v| C::new(v, 0.0)))?;
        let qb = Quadric::new(b.map(|v| C::new(v, 0.0)))?;
        let eig = pencil_spectrum(&qa, &qb)?;
        let scale = eig.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let mut gap = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                gap = gap.min((eig[i] - eig[j]).norm() / scale);
            }
        }
        if gap >= min_gap {
            return Ok((qa, qb));
        }
    }
}
