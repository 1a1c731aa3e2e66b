//! The invariant form, the Jacobian of the projective action, K-finite
//! monomials and the matrix-element integrand, all evaluated against tracked
//! logarithms of the two quadric values.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::quadric::norm_sqr;

/// Below this `|Q| / ‖x‖²` a point is treated as lying on a quadric.
pub const POLE_TOL: f64 = 1e-14;

/// Continuously tracked logarithms of `Q(z)` and `Q(z g)` at one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchState {
    pub log_q_source: C,
    pub log_q_target: C,
}

impl BranchState {
    /// Principal branches; canonical on the real cycle where both values are positive.
    pub fn principal(q_source: C, q_target: C) -> Result<Self> {
        for q in [q_source, q_target] {
            if q.norm() == 0.0 {
                return Err(Error::OnQuadric { value: 0.0 });
            }
        }
        Ok(Self {
            log_q_source: q_source.ln(),
            log_q_target: q_target.ln(),
        })
    }

    /// Continues both logarithms to new values. Returns the new state and the
    /// largest change of imaginary part.
    pub fn continued(&self, q_source: C, q_target: C) -> (Self, f64) {
        let ds = (q_source / self.log_q_source.exp()).ln();
        let dt = (q_target / self.log_q_target.exp()).ln();
        (
            Self {
                log_q_source: self.log_q_source + ds,
                log_q_target: self.log_q_target + dt,
            },
            ds.im.abs().max(dt.im.abs()),
        )
    }
}

/// `∏ x_j^{k_j} / Q(x)^{Σk/2}` with `Σk` even.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KFiniteFunction {
    exponents: Vec<u32>,
}

impl KFiniteFunction {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        let total: u32 = exponents.iter().sum();
        if total % 2 != 0 {
            return Err(Error::Input(format!(
                "exponent sum {total} is odd; K-finite functions need an even sum"
            )));
        }
        Ok(Self { exponents })
    }

    pub fn constant(n: usize) -> Self {
        Self {
            exponents: vec![0; n],
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn half_degree(&self) -> u32 {
        self.exponents.iter().sum::<u32>() / 2
    }

    /// Value at `x` given a logarithm of `Q(x)`.
    pub fn eval_with_log(&self, x: &[C], log_q: C) -> C {
        let mono = self
            .exponents
            .iter()
            .zip(x)
            .fold(C::new(1.0, 0.0), |acc, (&k, &xj)| acc * xj.powu(k));
        if self.half_degree() == 0 {
            return mono;
        }
        mono * (-(self.half_degree() as f64) * log_q).exp()
    }
}

fn unit_q(x: &[C]) -> C {
    x.iter().map(|z| z * z).sum()
}

fn check_pole(q: C, x: &[C]) -> Result<()> {
    let scale = norm_sqr(x);
    if scale == 0.0 {
        return Err(Error::ZeroVector);
    }
    if q.norm() <= POLE_TOL * scale {
        return Err(Error::OnQuadric { value: q.norm() / scale });
    }
    Ok(())
}

/// `det[x; v_1; …; v_{n-1}]`, the contraction `Σ_j (-1)^{j-1} x_j dx_1…d̂x_j…dx_n`
/// applied to the frame.
pub fn frame_determinant(x: &[C], frame: &[Vec<C>]) -> C {
    let n = x.len();
    match n {
        2 => x[0] * frame[0][1] - x[1] * frame[0][0],
        _ => {
            let m = DMatrix::from_fn(n, n, |i, j| if i == 0 { x[j] } else { frame[i - 1][j] });
            m.determinant()
        }
    }
}

/// The invariant `(n-1)`-form on the frame, `Q(x)^{-n/2} det[x; frame]`, oriented so
/// that the real projective space has positive volume.
pub fn invariant_form(x: &[C], frame: &[Vec<C>], branch: &BranchState) -> Result<C> {
    let n = x.len();
    if frame.len() + 1 != n {
        return Err(Error::Input(format!(
            "frame needs {} vectors, got {}",
            n - 1,
            frame.len()
        )));
    }
    check_pole(unit_q(x), x)?;
    let power = (-(n as f64) / 2.0 * branch.log_q_source).exp();
    Ok(power * frame_determinant(x, frame))
}

/// `(n/2)(log Q(x) - log Q(xg))`, a logarithm of `J(g, x) = (Q(x)/Q(xg))^{n/2}`.
pub fn log_jacobian(g: &GroupElement, x: &[C], branch: &BranchState) -> Result<C> {
    check_pole(unit_q(x), x)?;
    let y = g.act(x);
    check_pole(unit_q(&y), &y)?;
    Ok((branch.log_q_source - branch.log_q_target) * (x.len() as f64 / 2.0))
}

pub fn kfinite_eval(f: &KFiniteFunction, x: &[C], branch: &BranchState) -> Result<C> {
    check_pole(unit_q(x), x)?;
    Ok(f.eval_with_log(x, branch.log_q_source))
}

/// The matrix-element integrand `f₁(x) f₂(xg) J(g,x)^α dω(x)` for fixed `(g, α, f₁, f₂)`.
#[derive(Debug, Clone)]
pub struct MatrixElementIntegrand {
    pub g: GroupElement,
    pub alpha: C,
    pub f1: KFiniteFunction,
    pub f2: KFiniteFunction,
}

impl MatrixElementIntegrand {
    pub fn new(g: GroupElement, alpha: C, f1: KFiniteFunction, f2: KFiniteFunction) -> Result<Self> {
        let n = g.n();
        if f1.exponents().len() != n || f2.exponents().len() != n {
            return Err(Error::Input(format!(
                "K-finite exponents must have length n = {n}"
            )));
        }
        Ok(Self { g, alpha, f1, f2 })
    }

    pub fn density(&self, x: &[C], frame: &[Vec<C>], branch: &BranchState) -> Result<C> {
        integrand_density(self, x, frame, branch)
    }
}

pub fn integrand_density(
    ig: &MatrixElementIntegrand,
    x: &[C],
    frame: &[Vec<C>],
    branch: &BranchState,
) -> Result<C> {
    let form = invariant_form(x, frame, branch)?;
    let log_j = log_jacobian(&ig.g, x, branch)?;
    let y = ig.g.act(x);
    let v1 = ig.f1.eval_with_log(x, branch.log_q_source);
    let v2 = ig.f2.eval_with_log(&y, branch.log_q_target);
    Ok(v1 * v2 * (ig.alpha * log_j).exp() * form)
}
