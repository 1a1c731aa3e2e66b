//! Complex quadrics `Q_A(x) = x A xᵗ`, simultaneous reduction of a pencil,
//! transversality of two quadrics, and projective clearance.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Quadric {
    matrix: DMatrix<C>,
    norm: f64,
}

impl Quadric {
    /// Symmetrizes the input; rejects the zero matrix.
    pub fn new(matrix: DMatrix<C>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Input("quadric matrix must be square".into()));
        }
        let sym = (&matrix + matrix.transpose()) * C::new(0.5, 0.0);
        let norm = spectral_norm(&sym);
        if !(norm > 0.0) {
            return Err(Error::Input("quadric matrix is zero".into()));
        }
        Ok(Self { matrix: sym, norm })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            norm: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C> {
        &self.matrix
    }

    /// Largest singular value of the matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.norm
    }

    pub fn eval(&self, x: &[C]) -> C {
        let n = self.n();
        let mut acc = C::new(0.0, 0.0);
        for i in 0..n {
            let mut row = C::new(0.0, 0.0);
            for j in 0..n {
                row += self.matrix[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Holomorphic gradient `2 x A`.
    pub fn gradient(&self, x: &[C]) -> Vec<C> {
        let n = self.n();
        (0..n)
            .map(|j| (0..n).map(|i| x[i] * self.matrix[(i, j)]).sum::<C>() * 2.0)
            .collect()
    }

    /// `|Q(x)| / (‖x‖² σ_max)`: scale invariant, zero exactly on the quadric.
    pub fn clearance(&self, x: &[C]) -> f64 {
        let nrm = norm_sqr(x);
        if nrm == 0.0 {
            return 0.0;
        }
        self.eval(x).norm() / (nrm * self.norm)
    }
}

pub fn norm_sqr(x: &[C]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

fn spectral_norm(m: &DMatrix<C>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Evaluates `Q_A(x)`; rejects the zero vector.
pub fn quadric_eval(a: &Quadric, x: &[C]) -> Result<C> {
    if x.len() != a.n() {
        return Err(Error::Input("dimension mismatch".into()));
    }
    if norm_sqr(x) == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(a.eval(x))
}

pub fn projective_clearance(x: &[C], a: &Quadric) -> f64 {
    a.clearance(x)
}

/// Transform `T` with `T B Tᵗ = I` and `T A Tᵗ = diag(lambdas)`.
#[derive(Debug, Clone)]
pub struct PencilReduction {
    pub transform: DMatrix<C>,
    pub lambdas: Vec<C>,
}

impl PencilReduction {
    /// Largest entry of `T M Tᵗ - target` over both members.
    pub fn residual(&self, a: &Quadric, b: &Quadric) -> f64 {
        let t = &self.transform;
        let ta = t * a.matrix() * t.transpose();
        let tb = t * b.matrix() * t.transpose();
        let n = t.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ea = if i == j { self.lambdas[i] } else { C::new(0.0, 0.0) };
                let eb = if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
                worst = worst.max((ta[(i, j)] - ea).norm()).max((tb[(i, j)] - eb).norm());
            }
        }
        worst
    }
}

/// Relative gap below which two pencil eigenvalues count as equal.
pub const EIGEN_GAP_TOL: f64 = 1e-8;

/// Eigenvalues of `det(A - λB) = 0` via the complex Schur form of `B⁻¹A`,
/// together with the Schur factors.
fn pencil_schur(a: &Quadric, b: &Quadric) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let lu = b.matrix().clone().lu();
    let det = lu.determinant();
    let n = b.n();
    if det.norm() <= 1e-14 * b.spectral_norm().powi(n as i32) {
        return Err(Error::SingularPencil(format!("det B = {det}")));
    }
    let c = lu
        .solve(a.matrix())
        .ok_or_else(|| Error::SingularPencil("B is not invertible".into()))?;
    let schur = Schur::try_new(c, 1e-15, 10_000)
        .ok_or_else(|| Error::SingularPencil("Schur iteration did not converge".into()))?;
    Ok(schur.unpack())
}

/// Generalized eigenvalues of the pencil `(A, B)`.
pub fn pencil_spectrum(a: &Quadric, b: &Quadric) -> Result<Vec<C>> {
    let (_, t) = pencil_schur(a, b)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

fn min_relative_gap(values: &[C]) -> f64 {
    let scale = values.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm() / scale);
        }
    }
    gap
}

/// Simultaneous congruence reduction of the pencil to `(diag(λ), I)`.
pub fn weierstrass_reduce(a: &Quadric, b: &Quadric) -> Result<PencilReduction> {
    if a.n() != b.n() {
        return Err(Error::Input("pencil members differ in size".into()));
    }
    let n = a.n();
    let (q, t) = pencil_schur(a, b)?;
    let lambdas: Vec<C> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = lambdas.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let mut transform = DMatrix::<C>::zeros(n, n);
    for k in 0..n {
        // eigenvector of the triangular factor by back substitution
        let mut y = vec![C::new(0.0, 0.0); n];
        y[k] = C::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = C::new(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * y[l];
            }
            let denom = t[(j, j)] - t[(k, k)];
            if denom.norm() <= EIGEN_GAP_TOL * scale {
                return Err(Error::DefectivePencil { value: t[(k, k)] });
            }
            y[j] = -s / denom;
        }
        let v: Vec<C> = (0..n).map(|i| (0..n).map(|l| q[(i, l)] * y[l]).sum()).collect();
        let beta = b.eval(&v);
        if beta.norm() <= 1e-10 * norm_sqr(&v) * b.spectral_norm() {
            // isotropic eigenvector: Jordan block in disguise
            return Err(Error::DefectivePencil { value: t[(k, k)] });
        }
        let s = beta.sqrt();
        for i in 0..n {
            transform[(k, i)] = v[i] / s;
        }
    }
    Ok(PencilReduction { transform, lambdas })
}

/// Normalized size of the 2×2 minors of the matrix with rows `∇Q_A(x)`, `∇Q_B(x)`.
/// Zero iff the gradients are parallel.
pub fn transversality_defect(a: &Quadric, b: &Quadric, x: &[C]) -> Result<f64> {
    if norm_sqr(x) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let ga = a.gradient(x);
    let gb = b.gradient(x);
    let na = norm_sqr(&ga).sqrt();
    let nb = norm_sqr(&gb).sqrt();
    let floor = 1e-14 * norm_sqr(x).sqrt();
    if na <= floor * a.spectral_norm() && nb <= floor * b.spectral_norm() {
        return Err(Error::SingularPoint);
    }
    let mut minors = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            minors += (ga[i] * gb[j] - ga[j] * gb[i]).norm_sqr();
        }
    }
    Ok(minors.sqrt() / (na * nb + 1e-300))
}

#[derive(Debug, Clone, Copy)]
pub struct TransversalityOptions {
    pub trials: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Randomized local descent steps per trial.
    pub descent_steps: usize,
}

impl Default for TransversalityOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            threshold: 1e-6,
            seed: 0,
            descent_steps: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledVerdict {
    Transversal,
    NotTransversal,
    /// No intersection points exist (n = 2 with a non-degenerate pencil).
    EmptyIntersection,
    /// Sampling found no intersection points although some should exist.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityReport {
    pub analytic: bool,
    pub eigenvalues: Vec<[f64; 2]>,
    pub min_relative_gap: f64,
    pub sampled: SampledVerdict,
    pub sampled_min_defect: Option<f64>,
    pub points_found: usize,
    pub trials: usize,
    pub transversal: bool,
}

/// Analytic verdict (distinct pencil eigenvalues) plus a sampled search for
/// tangency points on the intersection.
pub fn transversality_check(
    a: &Quadric,
    b: &Quadric,
    opts: &TransversalityOptions,
) -> Result<TransversalityReport> {
    let eig = pencil_spectrum(a, b)?;
    let gap = min_relative_gap(&eig);
    let analytic = gap > EIGEN_GAP_TOL;
    let n = a.n();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found = 0;
    let mut best = f64::INFINITY;
    for _ in 0..opts.trials {
        let start: Vec<C> = (0..n)
            .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let Some(mut x) = project_to_intersection(a, b, &start) else {
            continue;
        };
        found += 1;
        let mut d = transversality_defect(a, b, &x)?;
        let mut radius = 0.1;
        for _ in 0..opts.descent_steps {
            let trial: Vec<C> = x
                .iter()
                .map(|z| z + C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * radius)
                .collect();
            if let Some(y) = project_to_intersection(a, b, &trial) {
                let dy = transversality_defect(a, b, &y)?;
                if dy < d {
                    d = dy;
                    x = y;
                    continue;
                }
            }
            radius *= 0.6;
        }
        best = best.min(d);
    }

    let (sampled, sampled_min_defect) = if found == 0 {
        if n <= 2 {
            (SampledVerdict::EmptyIntersection, None)
        } else {
            (SampledVerdict::Inconclusive, None)
        }
    } else if best < opts.threshold {
        (SampledVerdict::NotTransversal, Some(best))
    } else {
        (SampledVerdict::Transversal, Some(best))
    };
    Ok(TransversalityReport {
        analytic,
        eigenvalues: eig.iter().map(|z| [z.re, z.im]).collect(),
        min_relative_gap: gap,
        sampled,
        sampled_min_defect,
        points_found: found,
        trials: opts.trials,
        transversal: analytic && sampled != SampledVerdict::NotTransversal,
    })
}

/// Gauss–Newton projection of a point onto `{Q_A = 0} ∩ {Q_B = 0}` on the unit sphere.
/// Uses a pseudo-inverse so that coincident quadrics are handled.
pub fn project_to_intersection(a: &Quadric, b: &Quadric, start: &[C]) -> Option<Vec<C>> {
    let mut x = normalized(start)?;
    for _ in 0..60 {
        let fa = a.eval(&x) / a.spectral_norm();
        let fb = b.eval(&x) / b.spectral_norm();
        if fa.norm() < 1e-14 && fb.norm() < 1e-14 {
            return Some(x);
        }
        let ga: Vec<C> = a.gradient(&x).iter().map(|z| z / a.spectral_norm()).collect();
        let gb: Vec<C> = b.gradient(&x).iter().map(|z| z / b.spectral_norm()).collect();
        // Gram matrix M M^H of the 2 × n Jacobian
        let haa = norm_sqr(&ga);
        let hbb = norm_sqr(&gb);
        let hab: C = ga.iter().zip(&gb).map(|(p, q)| p * q.conj()).sum();
        let (ya, yb) = hermitian2_pinv_solve(haa, hab, hbb, fa, fb)?;
        let step: Vec<C> = (0..x.len())
            .map(|i| -(ga[i].conj() * ya + gb[i].conj() * yb))
            .collect();
        let next: Vec<C> = x.iter().zip(&step).map(|(p, q)| p + q).collect();
        x = normalized(&next)?;
    }
    let fa = a.eval(&x) / a.spectral_norm();
    let fb = b.eval(&x) / b.spectral_norm();
    (fa.norm() < 1e-12 && fb.norm() < 1e-12).then_some(x)
}

fn normalized(x: &[C]) -> Option<Vec<C>> {
    let nrm = norm_sqr(x).sqrt();
    (nrm > 0.0 && nrm.is_finite()).then(|| x.iter().map(|z| z / nrm).collect())
}

/// Solves `[[haa, hab], [conj(hab), hbb]] y = f` with a pseudo-inverse cutoff.
fn hermitian2_pinv_solve(haa: f64, hab: C, hbb: f64, fa: C, fb: C) -> Option<(C, C)> {
    let tr = haa + hbb;
    let det = haa * hbb - hab.norm_sqr();
    let disc = ((haa - hbb).powi(2) + 4.0 * hab.norm_sqr()).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    if !(l1 > 0.0) {
        return None;
    }
    if l2 > 1e-12 * l1 {
        let ya = (fa * hbb - hab * fb) / det;
        let yb = (fb * haa - hab.conj() * fa) / det;
        return Some((ya, yb));
    }
    // rank one: eigenvector of l1
    let (va, vb) = if hab.norm() > 0.0 {
        let va = hab;
        let vb = C::new(l1 - haa, 0.0);
        let nrm = (va.norm_sqr() + vb.norm_sqr()).sqrt();
        (va / nrm, vb / nrm)
    } else if haa >= hbb {
        (C::new(1.0, 0.0), C::new(0.0, 0.0))
    } else {
        (C::new(0.0, 0.0), C::new(1.0, 0.0))
    };
    let coeff = (va.conj() * fa + vb.conj() * fb) / l1;
    Some((va * coeff, vb * coeff))
}
