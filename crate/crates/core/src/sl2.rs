//! Independent continuation for n = 2 by deforming a one-dimensional contour.
//!
//! On `x(φ) = (cos φ, sin φ)` the unit quadric is identically 1 and the invariant
//! form is `dφ`, so the matrix element is
//! `∫ f₁(x) · mono₂(x g) · Q_g(φ)^{-(α + h₂)} dφ` over a contour from `φ₀` to `φ₀ + π`,
//! where `Q_g(φ) = x g gᵗ xᵗ` and `h₂` is the half degree of `f₂`. The zeros of `Q_g`
//! solve a quadratic in `w = e^{2iφ}` and are tracked in closed form along the path.
//! The contour is a polyline pushed rigidly by disks around the moving zeros.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupPath};
use crate::integrand::KFiniteFunction;
use crate::quadrature::gauss_legendre;

const I: C = C { re: 0.0, im: 1.0 };

/// Tuning of the contour transport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Longest contour edge far from the zeros.
    pub max_edge: f64,
    /// Largest push radius around a zero.
    pub max_radius: f64,
    /// Largest path-parameter step.
    pub max_step: f64,
    /// Absolute tolerance of the adaptive edge quadrature.
    pub quad_tol: f64,
    /// Cap on the number of contour vertices.
    pub max_nodes: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_edge: 0.1,
            max_radius: 0.25,
            max_step: 0.02,
            quad_tol: 1e-15,
            max_nodes: 20_000,
        }
    }
}

/// A closed contour on the cylinder `ℂ / πℤ`: vertex `k` joins vertex `k + 1`, and the
/// last vertex joins `nodes[0] + π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourPath1D {
    nodes: Vec<C>,
    /// Continued `log Q_g` at `nodes[0]`.
    log_q_start: C,
}

fn gram2(g: &GroupElement) -> [C; 3] {
    let m = g.gram();
    [m[(0, 0)], m[(0, 1)], m[(1, 1)]]
}

fn q_at(m: &[C; 3], phi: C) -> C {
    let (c, s) = (phi.cos(), phi.sin());
    m[0] * c * c + m[1] * c * s * 2.0 + m[2] * s * s
}

/// The two zeros of `Q_g` in `w = e^{2iφ}`.
fn zeros_w(m: &[C; 3]) -> Result<[C; 2]> {
    let d = m[0] - m[2];
    let lead = d - I * m[1] * 2.0;
    let lin = (m[0] + m[2]) * 2.0;
    let cst = d + I * m[1] * 2.0;
    let scale = lin.norm().max(lead.norm()).max(cst.norm());
    if lead.norm() < 1e-14 * scale || cst.norm() < 1e-14 * scale {
        return Err(Error::DiscriminantProximity {
            clearance: lead.norm().min(cst.norm()) / scale,
            index: 0,
            floor: 1e-14,
        });
    }
    let disc = (lin * lin - lead * cst * 4.0).sqrt();
    // stable pair of roots
    let big = if (lin + disc).norm() >= (lin - disc).norm() { -lin - disc } else { -lin + disc };
    let r1 = big / (lead * 2.0);
    let r2 = cst * 2.0 / big;
    Ok([r1, r2])
}

fn phi_of_w(w: C) -> C {
    w.ln() / (I * 2.0)
}

/// `p - z` shifted by a multiple of `π` into the strip `|Re| ≤ π/2`.
fn nearest_offset(p: C, z: C) -> C {
    let d = p - z;
    C::new(d.re - PI * (d.re / PI).round(), d.im)
}

fn distance_to_zeros(p: C, zeros: &[C; 2]) -> f64 {
    zeros
        .iter()
        .map(|&z| nearest_offset(p, z).norm())
        .fold(f64::INFINITY, f64::min)
}

fn push_weight(rho: f64) -> f64 {
    if rho <= 1.0 {
        1.0
    } else if rho >= 2.0 {
        0.0
    } else {
        (FRAC_PI_2 * (rho - 1.0)).cos().powi(2)
    }
}

fn oracle_error(s: f64, vertex: usize, clearance: f64, reason: impl Into<String>) -> Error {
    Error::Isotopy {
        s,
        vertex,
        clearance,
        reason: reason.into(),
        clearance_trace: Vec::new(),
    }
}

struct Integrand<'a> {
    m: [C; 3],
    g: &'a GroupElement,
    f1: &'a KFiniteFunction,
    f2: &'a KFiniteFunction,
    power: C,
}

impl Integrand<'_> {
    fn eval(&self, phi: C, log_q: C) -> C {
        let x = [phi.cos(), phi.sin()];
        let y = self.g.act(&x);
        let mono = |f: &KFiniteFunction, v: &[C]| {
            f.exponents()
                .iter()
                .zip(v)
                .fold(C::new(1.0, 0.0), |acc, (&k, &z)| acc * z.powu(k))
        };
        mono(self.f1, &x) * mono(self.f2, &y) * (-self.power * log_q).exp()
    }
}

impl ContourPath1D {
    /// The real contour `[0, π)` for a real `g`, with `nodes` equal edges.
    pub fn real(g: &GroupElement, nodes: usize) -> Result<Self> {
        if g.n() != 2 {
            return Err(Error::Input("the contour oracle needs n = 2".into()));
        }
        if !g.is_real(1e-12) {
            return Err(Error::Input("the initial contour needs a real group element".into()));
        }
        let nodes = nodes.max(4);
        let pts: Vec<C> = (0..nodes).map(|k| C::new(PI * k as f64 / nodes as f64, 0.0)).collect();
        let q0 = q_at(&gram2(g), pts[0]);
        Ok(Self {
            nodes: pts,
            log_q_start: C::new(q0.re.ln(), 0.0),
        })
    }

    pub fn nodes(&self) -> &[C] {
        &self.nodes
    }

    pub fn log_q_start(&self) -> C {
        self.log_q_start
    }

    fn vertex(&self, k: usize) -> C {
        let len = self.nodes.len();
        self.nodes[k % len] + PI * (k / len) as f64
    }

    /// Integrates the matrix element of `g` along the contour.
    pub fn integrate(
        &self,
        g: &GroupElement,
        alpha: C,
        f1: &KFiniteFunction,
        f2: &KFiniteFunction,
        tol: f64,
    ) -> Result<C> {
        if f1.exponents().len() != 2 || f2.exponents().len() != 2 {
            return Err(Error::Input("K-finite exponents must have length 2".into()));
        }
        let ig = Integrand {
            m: gram2(g),
            g,
            f1,
            f2,
            power: alpha + f2.half_degree() as f64,
        };
        let (gl_x, gl_w) = gauss_legendre(10);
        let mut total = C::new(0.0, 0.0);
        let mut log_a = self.log_q_start;
        for k in 0..self.nodes.len() {
            let (a, b) = (self.vertex(k), self.vertex(k + 1));
            total += adaptive_edge(&ig, a, b, log_a, &gl_x, &gl_w, tol, 0)
                .ok_or_else(|| Error::Quadrature {
                    vertex: k,
                    reason: "contour edge quadrature did not converge".into(),
                })?;
            log_a = continue_log(&ig.m, log_a, b).ok_or_else(|| Error::Quadrature {
                vertex: k,
                reason: "argument jump along a contour edge".into(),
            })?;
        }
        // the closing vertex is nodes[0] + π, where Q_g takes the starting value again
        if (log_a - self.log_q_start).norm() > 1e-8 {
            return Err(Error::Quadrature {
                vertex: 0,
                reason: format!(
                    "branch of log Q does not close up around the contour (gap {:.3e})",
                    (log_a - self.log_q_start).norm()
                ),
            });
        }
        Ok(total)
    }
}

fn continue_log(m: &[C; 3], log_a: C, p: C) -> Option<C> {
    let ratio = q_at(m, p) / log_a.exp();
    let d = ratio.ln();
    (d.im.abs() < FRAC_PI_2).then_some(log_a + d)
}

fn gl_on(ig: &Integrand, a: C, b: C, log_a: C, x: &[f64], w: &[f64]) -> Option<C> {
    let half = (b - a) * 0.5;
    let mid = (a + b) * 0.5;
    let mut sum = C::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let p = mid + half * *xi;
        let lp = continue_log(&ig.m, log_a, p)?;
        sum += ig.eval(p, lp) * *wi;
    }
    Some(sum * half)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_edge(
    ig: &Integrand,
    a: C,
    b: C,
    log_a: C,
    x: &[f64],
    w: &[f64],
    tol: f64,
    depth: u32,
) -> Option<C> {
    let mid = (a + b) * 0.5;
    let whole = gl_on(ig, a, b, log_a, x, w)?;
    let log_mid = continue_log(&ig.m, log_a, mid)?;
    let left = gl_on(ig, a, mid, log_a, x, w)?;
    let right = gl_on(ig, mid, b, log_mid, x, w)?;
    if (left + right - whole).norm() <= tol.max(1e-15 * (left + right).norm()) {
        return Some(left + right);
    }
    if depth >= 30 {
        return None;
    }
    Some(
        adaptive_edge(ig, a, mid, log_a, x, w, tol * 0.5, depth + 1)?
            + adaptive_edge(ig, mid, b, log_mid, x, w, tol * 0.5, depth + 1)?,
    )
}

/// Tracked zeros `φ₁, φ₂` of `Q_g` at one path parameter.
#[derive(Debug, Clone, Copy)]
struct Zeros {
    phi: [C; 2],
}

impl Zeros {
    fn initial(m: &[C; 3]) -> Result<Self> {
        let w = zeros_w(m)?;
        Ok(Self {
            phi: [phi_of_w(w[0]), phi_of_w(w[1])],
        })
    }

    /// Matches the zeros at the next parameter to these by continuity.
    fn follow(&self, m: &[C; 3]) -> Result<Option<(Self, f64)>> {
        let w = zeros_w(m)?;
        let moved = |j: usize, r: C| {
            let prev = (I * self.phi[j] * 2.0).exp();
            self.phi[j] + (r / prev).ln() / (I * 2.0)
        };
        let straight = [moved(0, w[0]), moved(1, w[1])];
        let swapped = [moved(0, w[1]), moved(1, w[0])];
        let cost = |p: &[C; 2]| (p[0] - self.phi[0]).norm().max((p[1] - self.phi[1]).norm());
        let (best, other) = if cost(&straight) <= cost(&swapped) {
            (straight, swapped)
        } else {
            (swapped, straight)
        };
        let step = cost(&best);
        // ambiguous matching: the caller shortens the step
        if cost(&other) < 4.0 * step {
            return Ok(None);
        }
        Ok(Some((Self { phi: best }, step)))
    }

    /// Separation between the two zeros on the cylinder.
    fn separation(&self) -> f64 {
        nearest_offset(self.phi[0], self.phi[1]).norm()
    }
}

/// Continues the matrix element along `path` with the default configuration.
pub fn oracle_continue(
    path: &GroupPath,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
) -> Result<C> {
    oracle_continue_with(path, f1, f2, alpha, &OracleConfig::default()).map(|(v, _)| v)
}

/// Continues the matrix element along `path`, returning the value and the final contour.
pub fn oracle_continue_with(
    path: &GroupPath,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
    config: &OracleConfig,
) -> Result<(C, ContourPath1D)> {
    if path.n() != 2 {
        return Err(Error::Input("the contour oracle needs n = 2".into()));
    }
    let start = path.start();
    let mut contour = ContourPath1D::real(&start, (PI / config.max_edge).ceil() as usize)?;
    let mut m = gram2(&start);
    let mut zeros = Zeros::initial(&m)?;
    refine_contour(&mut contour, &zeros, config, 0.0)?;

    let end = path.segments() as f64;
    let mut s = 0.0f64;
    let mut h = config.max_step;
    while s < end {
        let boundary = (s.floor() + 1.0).min(end);
        let s_next = if s + h >= boundary - 1e-12 { boundary } else { s + h };
        let m_next = gram2(&path.at(s_next));
        let radius = config.max_radius.min(0.3 * zeros.separation());
        let followed = zeros.follow(&m_next)?;
        let Some((next_zeros, _)) = followed.filter(|(z, d)| {
            *d <= 0.25 * radius && 0.3 * z.separation() >= 0.5 * radius
        }) else {
            h *= 0.5;
            if h < 1e-12 {
                return Err(oracle_error(s, 0, 0.0, "zero tracking step underflow"));
            }
            continue;
        };
        push_contour(&mut contour, &zeros, &next_zeros, radius, &m, &m_next, s_next)?;
        m = m_next;
        zeros = next_zeros;
        refine_contour(&mut contour, &zeros, config, s_next)?;
        s = s_next;
        h = (h * 2.0).min(config.max_step);
    }
    let g_end = path.end();
    let value = contour.integrate(&g_end, alpha, f1, f2, config.quad_tol)?;
    Ok((value, contour))
}

fn push_contour(
    contour: &mut ContourPath1D,
    from: &Zeros,
    to: &Zeros,
    radius: f64,
    m_old: &[C; 3],
    m_new: &[C; 3],
    s: f64,
) -> Result<()> {
    let old_start = contour.nodes[0];
    for p in contour.nodes.iter_mut() {
        let mut shift = C::new(0.0, 0.0);
        for j in 0..2 {
            let d = nearest_offset(*p, from.phi[j]).norm();
            shift += (to.phi[j] - from.phi[j]) * push_weight(d / radius);
        }
        *p += shift;
    }
    for (k, &p) in contour.nodes.iter().enumerate() {
        let d = distance_to_zeros(p, &to.phi);
        if d < 0.5 * radius {
            return Err(oracle_error(s, k, d, "zero collided with the contour"));
        }
    }
    let new_start = contour.nodes[0];
    let ratio = q_at(m_new, new_start) / q_at(m_old, old_start);
    let d = ratio.ln();
    if !(d.im.abs() < FRAC_PI_2) {
        return Err(oracle_error(s, 0, 0.0, "branch jump at the contour start"));
    }
    contour.log_q_start += d;
    Ok(())
}

/// Splits edges that are long compared with the distance to the zeros and merges
/// vertices on runs of very short edges.
fn refine_contour(contour: &mut ContourPath1D, zeros: &Zeros, config: &OracleConfig, s: f64) -> Result<()> {
    let allowed = |p: C| config.max_edge.min(0.4 * distance_to_zeros(p, &zeros.phi));
    let len = contour.nodes.len();
    let mut out: Vec<C> = Vec::with_capacity(len + 16);
    for k in 0..len {
        let a = contour.vertex(k);
        let b = contour.vertex(k + 1);
        out.push(a);
        let mut stack = vec![(a, b)];
        let mut inserted = Vec::new();
        while let Some((p, q)) = stack.pop() {
            let mid = (p + q) * 0.5;
            if (q - p).norm() > allowed(mid) {
                stack.push((mid, q));
                stack.push((p, mid));
            } else if p != a {
                inserted.push(p);
            }
            if inserted.len() + out.len() > config.max_nodes {
                return Err(oracle_error(s, k, distance_to_zeros(a, &zeros.phi), "contour node budget exhausted"));
            }
        }
        out.extend(inserted);
    }
    // merge: drop a vertex when it and its successor stay close to the last kept vertex
    let mut merged: Vec<C> = Vec::with_capacity(out.len());
    let total = out.len();
    let at = |v: &[C], k: usize| v[k % total] + PI * (k / total) as f64;
    merged.push(out[0]);
    let mut k = 1;
    while k < total {
        let prev = *merged.last().unwrap();
        let next = at(&out, k + 1);
        let reach = 0.5 * allowed(prev);
        if (next - prev).norm() < reach && (out[k] - prev).norm() < reach {
            k += 1;
            continue;
        }
        merged.push(out[k]);
        k += 1;
    }
    contour.nodes = merged;
    Ok(())
}

/// The `θ = ad/bc` coordinate on SL(2) together with the divisor `abcd = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaReport {
    /// `None` when `bc = 0` (the point at infinity).
    pub theta: Option<C>,
    pub abcd: C,
    pub on_divisor: bool,
}

pub fn theta(g: &GroupElement) -> Result<ThetaReport> {
    if g.n() != 2 {
        return Err(Error::Input("theta is defined for n = 2".into()));
    }
    let e = g.entries();
    let (a, b, c, d) = (e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let bc = b * c;
    let abcd = a * bc * d;
    Ok(ThetaReport {
        theta: (bc.norm() != 0.0).then(|| a * d / bc),
        abcd,
        on_divisor: abcd.norm() == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::matrix_element;
    use crate::group::discriminant;

    fn cx(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn rows(r: [[f64; 2]; 2]) -> GroupElement {
        GroupElement::from_real_rows(&[r[0].to_vec(), r[1].to_vec()]).unwrap()
    }

    #[test]
    fn theta_examples() {
        let id = GroupElement::identity(2).unwrap();
        let t = theta(&id).unwrap();
        assert_eq!(t.theta, None);
        assert!(t.on_divisor);

        let t = theta(&rows([[2.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_eq!(t.theta, Some(cx(2.0, 0.0)));
        assert_eq!(t.abcd, cx(2.0, 0.0));

        let w = rows([[0.0, 1.0], [-1.0, 0.0]]);
        let t = theta(&w).unwrap();
        assert!(t.on_divisor);
        assert_eq!(t.theta, Some(cx(0.0, 0.0)));
        assert!(discriminant(&w).norm() < 1e-14);
    }

    #[test]
    fn zeros_are_zeros() {
        let g = GroupElement::diag2(cx(1.2, 0.3))
            .unwrap()
            .compose(&rows([[2.0, 1.0], [1.0, 1.0]]));
        let m = gram2(&g);
        for w in zeros_w(&m).unwrap() {
            let phi = phi_of_w(w);
            assert!(q_at(&m, phi).norm() < 1e-12);
            assert!(q_at(&m, phi + PI).norm() < 1e-12);
        }
    }

    #[test]
    fn real_contour_matches_direct_quadrature() {
        let g = GroupElement::diag2(cx(2.0, 0.0)).unwrap();
        let one = KFiniteFunction::constant(2);
        let f = KFiniteFunction::new(vec![1, 1]).unwrap();
        for (f1, f2, alpha) in [(&one, &one, cx(0.3, 0.0)), (&f, &one, cx(0.5, 0.25)), (&one, &f, cx(-0.2, 0.1))] {
            let path = GroupPath::constant(g.clone(), 1).unwrap();
            let v = oracle_continue(&path, f1, f2, alpha).unwrap();
            let direct = matrix_element(&g, f1, f2, alpha, 256).unwrap().value;
            assert!((v - direct).norm() <= 1e-9 * direct.norm().max(1.0), "{v} {direct}");
        }
    }

    #[test]
    fn real_path_needs_no_special_care() {
        let wps: Vec<GroupElement> = [1.3, 1.8, 1.5]
            .iter()
            .map(|&a| GroupElement::diag2(cx(a, 0.0)).unwrap())
            .collect();
        let path = GroupPath::unchecked(wps, 4).unwrap();
        let one = KFiniteFunction::constant(2);
        let alpha = cx(0.3, 0.0);
        let v = oracle_continue(&path, &one, &one, alpha).unwrap();
        let direct = matrix_element(&path.end(), &one, &one, alpha, 256).unwrap().value;
        assert!((v - direct).norm() < 1e-9);
    }

    #[test]
    fn rejects_complex_start_and_wrong_dimension() {
        let g = GroupElement::diag2(cx(1.0, 0.5)).unwrap();
        assert!(ContourPath1D::real(&g, 16).is_err());
        let g4 = GroupElement::identity(4).unwrap();
        assert!(theta(&g4).is_err());
    }
}
