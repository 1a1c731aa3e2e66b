//! The integration cycle: a sampled map of the sphere `S^{n-1}` into `ℂ^n ∖ {0}`,
//! odd under the antipodal map so that it descends to a cycle in `ℂP^{n-1}`.
//!
//! Tangent frames are never stored. They are recomputed from the current vertex
//! positions by spectral differentiation in the reference coordinates, so a
//! deformed cycle is always integrated as the smooth interpolant of its vertices.
//!
//! * `n = 2`: uniform grid of `2N` angles on the circle, trapezoidal rule.
//! * `n = 4`: Hopf coordinates `(η, ξ₁, ξ₂)` with Gauss–Legendre nodes in `η` and
//!   uniform periodic grids in `ξ₁, ξ₂`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::integrand::BranchState;
use crate::quadrature::{
    barycentric_weights, gauss_legendre_on, interpolatory_weights, lagrange_row,
    periodic_cardinal, periodic_derivative, periodic_diff_matrix, polynomial_diff_matrix,
};
use crate::quadric::{norm_sqr, Quadric};

pub const MIN_RESOLUTION_CIRCLE: usize = 16;
pub const MIN_RESOLUTION_HOPF: usize = 8;

/// Default clearance floor used by `refine` when none is given.
pub const DEFAULT_REFINE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// `nodes` uniform angles on the full circle.
    Circle { nodes: usize },
    /// `eta` Gauss nodes on `[0, π/2]`, `xi` uniform angles for each of `ξ₁, ξ₂`.
    Hopf { eta: usize, xi: usize },
}

#[derive(Debug, Clone)]
pub struct Cycle {
    n: usize,
    resolution: usize,
    grid: Grid,
    reference: Vec<Vec<f64>>,
    positions: Vec<Vec<C>>,
    branches: Vec<BranchState>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
    representatives: Vec<usize>,
    target: GroupElement,
}

/// Quadrature value with a one-level refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C,
    pub error: f64,
}

fn hopf_point(eta: f64, xi1: f64, xi2: f64) -> [f64; 4] {
    [
        eta.cos() * xi1.cos(),
        eta.cos() * xi1.sin(),
        eta.sin() * xi2.cos(),
        eta.sin() * xi2.sin(),
    ]
}

impl Cycle {
    /// The real cycle at the identity.
    pub fn make_real(n: usize, resolution: usize) -> Result<Self> {
        Self::real(n, resolution, &GroupElement::identity(n)?)
    }

    /// The real cycle with target branches for a real group element `g`.
    pub fn real(n: usize, resolution: usize, g: &GroupElement) -> Result<Self> {
        if n % 2 == 1 {
            return Err(Error::OddDimension(n));
        }
        if g.n() != n {
            return Err(Error::Input("group element dimension differs from cycle".into()));
        }
        if !g.is_real(1e-14) {
            return Err(Error::Input(
                "the real cycle can only be attached to a real group element".into(),
            ));
        }
        let grid = match n {
            2 => {
                if resolution < MIN_RESOLUTION_CIRCLE || resolution % 2 == 1 {
                    return Err(Error::Input(format!(
                        "n = 2 needs an even resolution >= {MIN_RESOLUTION_CIRCLE}, got {resolution}"
                    )));
                }
                Grid::Circle { nodes: 2 * resolution }
            }
            4 => {
                if resolution < MIN_RESOLUTION_HOPF {
                    return Err(Error::Input(format!(
                        "n = 4 needs resolution >= {MIN_RESOLUTION_HOPF}, got {resolution}"
                    )));
                }
                Grid::Hopf { eta: resolution, xi: 2 * resolution }
            }
            _ => {
                return Err(Error::Input(format!(
                    "cycles are implemented for n = 2 and n = 4, got n = {n}"
                )))
            }
        };
        let (reference, weights, antipode, representatives) = layout(grid);
        let mut positions = vec![Vec::new(); reference.len()];
        for &i in &representatives {
            let u = &reference[i];
            positions[i] = match grid {
                Grid::Circle { .. } => vec![C::new(u[0].cos(), 0.0), C::new(u[0].sin(), 0.0)],
                Grid::Hopf { .. } => hopf_point(u[0], u[1], u[2])
                    .iter()
                    .map(|&v| C::new(v, 0.0))
                    .collect(),
            };
        }
        for &i in &representatives {
            positions[antipode[i]] = positions[i].iter().map(|z| -z).collect();
        }
        let gram = Quadric::new(g.gram())?;
        let branches = positions
            .iter()
            .map(|x| BranchState::principal(Quadric::unit(n).eval(x), gram.eval(x)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            resolution,
            grid,
            reference,
            positions,
            branches,
            weights,
            antipode,
            representatives,
            target: g.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec<C>] {
        &self.positions
    }

    pub fn branches(&self) -> &[BranchState] {
        &self.branches
    }

    pub fn reference(&self) -> &[Vec<f64>] {
        &self.reference
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn antipode(&self) -> &[usize] {
        &self.antipode
    }

    /// One vertex from each antipodal pair.
    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    /// Group element the target branches refer to.
    pub fn target(&self) -> &GroupElement {
        &self.target
    }

    pub fn target_quadric(&self) -> Result<Quadric> {
        Quadric::new(self.target.gram())
    }

    /// Replaces the state of the representative vertices and mirrors the rest.
    pub(crate) fn with_state(
        &self,
        rep_positions: Vec<Vec<C>>,
        rep_branches: Vec<BranchState>,
        target: GroupElement,
    ) -> Self {
        let mut next = self.clone();
        for (k, &i) in self.representatives.iter().enumerate() {
            let j = self.antipode[i];
            next.positions[j] = rep_positions[k].iter().map(|z| -z).collect();
            next.positions[i] = rep_positions[k].clone();
            next.branches[i] = rep_branches[k];
            next.branches[j] = rep_branches[k];
        }
        next.target = target;
        next
    }

    /// Mesh edges `(i, j)` with `i` a representative.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        match self.grid {
            Grid::Circle { nodes } => {
                for &i in &self.representatives {
                    out.push((i, (i + 1) % nodes));
                }
            }
            Grid::Hopf { eta, xi } => {
                for &i in &self.representatives {
                    let (ie, a, b) = (i / (xi * xi), (i / xi) % xi, i % xi);
                    out.push((i, hopf_index(xi, ie, (a + 1) % xi, b)));
                    out.push((i, hopf_index(xi, ie, a, (b + 1) % xi)));
                    if ie + 1 < eta {
                        out.push((i, hopf_index(xi, ie + 1, a, b)));
                    }
                }
            }
        }
        out
    }

    /// Tangent frames at every vertex, ordered so that the real cycle is positively oriented.
    pub fn frames(&self) -> Vec<Vec<Vec<C>>> {
        let n = self.n;
        let mut frames = vec![Vec::new(); self.len()];
        match self.grid {
            Grid::Circle { .. } => {
                let derivs: Vec<Vec<C>> = (0..n)
                    .map(|c| {
                        let column: Vec<C> = self.positions.iter().map(|p| p[c]).collect();
                        periodic_derivative(&column)
                    })
                    .collect();
                for &i in &self.representatives {
                    frames[i] = vec![(0..n).map(|c| derivs[c][i]).collect()];
                }
            }
            Grid::Hopf { eta, xi } => {
                let dp = periodic_diff_matrix(xi);
                let etas: Vec<f64> = (0..eta).map(|k| self.reference[hopf_index(xi, k, 0, 0)][0]).collect();
                let de = polynomial_diff_matrix(&etas);
                for &i in &self.representatives {
                    let (ie, a, b) = (i / (xi * xi), (i / xi) % xi, i % xi);
                    let mut d_eta = vec![C::new(0.0, 0.0); n];
                    let mut d_xi1 = vec![C::new(0.0, 0.0); n];
                    let mut d_xi2 = vec![C::new(0.0, 0.0); n];
                    for (k, coef) in de[ie].iter().enumerate() {
                        let p = &self.positions[hopf_index(xi, k, a, b)];
                        for c in 0..n {
                            d_eta[c] += p[c] * coef;
                        }
                    }
                    for l in 0..xi {
                        let c1 = dp[a][l];
                        let c2 = dp[b][l];
                        let p1 = &self.positions[hopf_index(xi, ie, l, b)];
                        let p2 = &self.positions[hopf_index(xi, ie, a, l)];
                        for c in 0..n {
                            d_xi1[c] += p1[c] * c1;
                            d_xi2[c] += p2[c] * c2;
                        }
                    }
                    frames[i] = vec![d_eta, d_xi2, d_xi1];
                }
            }
        }
        for &i in &self.representatives {
            let j = self.antipode[i];
            frames[j] = frames[i]
                .iter()
                .map(|v| v.iter().map(|z| -z).collect())
                .collect();
        }
        frames
    }

    /// Minimum projective clearance over all vertices from `{Q = 0}` and `{Q(·g) = 0}`.
    pub fn min_clearance(&self) -> Result<(f64, usize)> {
        let unit = Quadric::unit(self.n);
        let target = self.target_quadric()?;
        let mut best = (f64::INFINITY, 0);
        for &i in &self.representatives {
            let p = &self.positions[i];
            let c = unit.clearance(p).min(target.clearance(p));
            if c < best.0 {
                best = (c, i);
            }
        }
        Ok(best)
    }

    /// Quadrature of a density `(x, frame, branch) ↦ value` over the cycle.
    pub fn integrate<F>(&self, density: F) -> Result<Quadrature>
    where
        F: Fn(&[C], &[Vec<C>], &BranchState) -> Result<C>,
    {
        let frames = self.frames();
        let mut values = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let v = density(&self.positions[i], &frames[i], &self.branches[i]).map_err(|e| {
                Error::Quadrature {
                    vertex: i,
                    reason: e.to_string(),
                }
            })?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Quadrature {
                    vertex: i,
                    reason: "non-finite density".into(),
                });
            }
            values.push(v);
        }
        let value: C = values.iter().zip(&self.weights).map(|(v, w)| v * *w).sum();
        let error = match self.grid {
            Grid::Circle { .. } => {
                let coarse: C = values
                    .iter()
                    .zip(&self.weights)
                    .step_by(2)
                    .map(|(v, w)| v * (2.0 * w))
                    .sum();
                (value - coarse).norm()
            }
            Grid::Hopf { eta, xi } => {
                let mut coarse_xi = C::new(0.0, 0.0);
                for i in 0..self.len() {
                    let (a, b) = ((i / xi) % xi, i % xi);
                    if a % 2 == 0 && b % 2 == 0 {
                        coarse_xi += values[i] * (4.0 * self.weights[i]);
                    }
                }
                let etas: Vec<f64> = (0..eta).map(|k| self.reference[hopf_index(xi, k, 0, 0)][0]).collect();
                let sub: Vec<f64> = etas.iter().step_by(2).copied().collect();
                let sub_w = interpolatory_weights(&sub, 0.0, PI / 2.0);
                let (_, full_w) = gauss_legendre_on(eta, 0.0, PI / 2.0);
                let mut coarse_eta = C::new(0.0, 0.0);
                for i in 0..self.len() {
                    let ie = i / (xi * xi);
                    if ie % 2 == 0 {
                        coarse_eta += values[i] * (self.weights[i] / full_w[ie] * sub_w[ie / 2]);
                    }
                }
                (value - coarse_xi).norm() + (value - coarse_eta).norm()
            }
        };
        Ok(Quadrature { value, error })
    }

    /// The cycle at doubled resolution with the default clearance floor.
    pub fn refine(&self) -> Result<Self> {
        self.refine_with_floor(DEFAULT_REFINE_FLOOR)
    }

    /// Doubles the resolution: positions are interpolated spectrally, branches are
    /// continued from the nearest coarse vertex.
    pub fn refine_with_floor(&self, floor: f64) -> Result<Self> {
        let resolution = 2 * self.resolution;
        let grid = match self.grid {
            Grid::Circle { nodes } => Grid::Circle { nodes: 2 * nodes },
            Grid::Hopf { eta, xi } => Grid::Hopf { eta: 2 * eta, xi: 2 * xi },
        };
        let (reference, weights, antipode, representatives) = layout(grid);
        let mut positions = vec![Vec::new(); reference.len()];
        let mut parent = vec![0usize; reference.len()];
        match (self.grid, grid) {
            (Grid::Circle { nodes }, Grid::Circle { .. }) => {
                for &i in &representatives {
                    parent[i] = i / 2;
                    positions[i] = if i % 2 == 0 {
                        self.positions[i / 2].clone()
                    } else {
                        let u = reference[i][0];
                        let mut z = vec![C::new(0.0, 0.0); self.n];
                        for l in 0..nodes {
                            let s = periodic_cardinal(nodes, u - self.reference[l][0]);
                            for c in 0..self.n {
                                z[c] += self.positions[l][c] * s;
                            }
                        }
                        z
                    };
                }
            }
            (Grid::Hopf { eta, xi }, Grid::Hopf { eta: eta2, xi: xi2 }) => {
                let n = self.n;
                let old_eta: Vec<f64> = (0..eta).map(|k| self.reference[hopf_index(xi, k, 0, 0)][0]).collect();
                let bary = barycentric_weights(&old_eta);
                let new_eta: Vec<f64> = (0..eta2).map(|k| reference[hopf_index(xi2, k, 0, 0)][0]).collect();
                let xi_old: Vec<f64> = (0..xi).map(|k| 2.0 * PI * k as f64 / xi as f64).collect();
                let card: Vec<Vec<f64>> = (0..xi2)
                    .map(|k| {
                        let u = 2.0 * PI * k as f64 / xi2 as f64;
                        xi_old.iter().map(|v| periodic_cardinal(xi, u - v)).collect()
                    })
                    .collect();
                // interpolate in ξ₂, then ξ₁, then η
                let mut stage1 = vec![vec![C::new(0.0, 0.0); n]; eta * xi * xi2];
                for ie in 0..eta {
                    for a in 0..xi {
                        for b2 in 0..xi2 {
                            let out = &mut stage1[(ie * xi + a) * xi2 + b2];
                            for b in 0..xi {
                                let s = card[b2][b];
                                if s == 0.0 {
                                    continue;
                                }
                                let p = &self.positions[hopf_index(xi, ie, a, b)];
                                for c in 0..n {
                                    out[c] += p[c] * s;
                                }
                            }
                        }
                    }
                }
                let mut stage2 = vec![vec![C::new(0.0, 0.0); n]; eta * xi2 * xi2];
                for ie in 0..eta {
                    for a2 in 0..xi2 {
                        for b2 in 0..xi2 {
                            let out = &mut stage2[(ie * xi2 + a2) * xi2 + b2];
                            for a in 0..xi {
                                let s = card[a2][a];
                                if s == 0.0 {
                                    continue;
                                }
                                let p = &stage1[(ie * xi + a) * xi2 + b2];
                                for c in 0..n {
                                    out[c] += p[c] * s;
                                }
                            }
                        }
                    }
                }
                for &i in &representatives {
                    let (ie2, a2, b2) = (i / (xi2 * xi2), (i / xi2) % xi2, i % xi2);
                    let row = lagrange_row(&old_eta, &bary, new_eta[ie2]);
                    let mut z = vec![C::new(0.0, 0.0); n];
                    for (ie, l) in row.iter().enumerate() {
                        let p = &stage2[(ie * xi2 + a2) * xi2 + b2];
                        for c in 0..n {
                            z[c] += p[c] * *l;
                        }
                    }
                    positions[i] = z;
                    let nearest = old_eta
                        .iter()
                        .enumerate()
                        .min_by(|x, y| {
                            (x.1 - new_eta[ie2]).abs().total_cmp(&(y.1 - new_eta[ie2]).abs())
                        })
                        .map(|(k, _)| k)
                        .unwrap_or(0);
                    parent[i] = hopf_index(xi, nearest, a2 / 2, b2 / 2);
                }
            }
            _ => unreachable!("grid kind is preserved by refinement"),
        }

        let unit = Quadric::unit(self.n);
        let target = self.target_quadric()?;
        let mut branches = vec![self.branches[0]; reference.len()];
        for &i in &representatives {
            let p = &positions[i];
            let clearance = unit.clearance(p).min(target.clearance(p));
            if clearance < floor {
                return Err(Error::Quadrature {
                    vertex: i,
                    reason: format!(
                        "refinement lands within clearance {clearance:.3e} of a quadric (floor {floor:.3e})"
                    ),
                });
            }
            let (b, jump) = self.branches[parent[i]].continued(unit.eval(p), target.eval(p));
            if jump >= PI / 2.0 {
                return Err(Error::Quadrature {
                    vertex: i,
                    reason: format!("branch jump {jump:.3} during refinement"),
                });
            }
            branches[i] = b;
        }
        for &i in &representatives {
            let j = antipode[i];
            positions[j] = positions[i].iter().map(|z| -z).collect();
            branches[j] = branches[i];
        }
        Ok(Self {
            n: self.n,
            resolution,
            grid,
            reference,
            positions,
            branches,
            weights,
            antipode,
            representatives,
            target: self.target.clone(),
        })
    }

    /// Ratio of the longest to the mean chordal edge length; `1` on a uniform mesh.
    pub fn edge_ratio(&self) -> f64 {
        let lengths: Vec<f64> = self
            .edges()
            .iter()
            .map(|&(i, j)| chordal(&self.positions[i], &self.positions[j]))
            .collect();
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        lengths.iter().copied().fold(0.0, f64::max) / mean
    }

    /// CSV snapshot: index, reference coordinates, components, clearances and
    /// imaginary parts of the tracked logarithms.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let unit = Quadric::unit(self.n);
        let target = self.target_quadric()?;
        let mut header = vec!["index".to_string()];
        for k in 0..self.reference[0].len() {
            header.push(format!("u{k}"));
        }
        for c in 0..self.n {
            header.push(format!("re_x{c}"));
            header.push(format!("im_x{c}"));
        }
        header.extend(
            ["clearance_source", "clearance_target", "im_log_q_source", "im_log_q_target"]
                .iter()
                .map(|s| s.to_string()),
        );
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            let p = &self.positions[i];
            let mut row = vec![i.to_string()];
            row.extend(self.reference[i].iter().map(|u| format!("{u:.16e}")));
            for z in p {
                row.push(format!("{:.16e}", z.re));
                row.push(format!("{:.16e}", z.im));
            }
            row.push(format!("{:.16e}", unit.clearance(p)));
            row.push(format!("{:.16e}", target.clearance(p)));
            row.push(format!("{:.16e}", self.branches[i].log_q_source.im));
            row.push(format!("{:.16e}", self.branches[i].log_q_target.im));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Largest chordal distance between normalized neighbouring vertices.
    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(i, j)| chordal(&self.positions[i], &self.positions[j]))
            .fold(0.0, f64::max)
    }
}

/// Distance between the unit-normalized representatives, minimized over the phase.
pub fn chordal(a: &[C], b: &[C]) -> f64 {
    let na = norm_sqr(a).sqrt();
    let nb = norm_sqr(b).sqrt();
    let inner: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let cos = (inner.norm() / (na * nb)).min(1.0);
    (2.0 * (1.0 - cos)).max(0.0).sqrt()
}

fn hopf_index(xi: usize, ie: usize, a: usize, b: usize) -> usize {
    (ie * xi + a) * xi + b
}

type Layout = (Vec<Vec<f64>>, Vec<f64>, Vec<usize>, Vec<usize>);

fn layout(grid: Grid) -> Layout {
    match grid {
        Grid::Circle { nodes } => {
            let h = 2.0 * PI / nodes as f64;
            let reference = (0..nodes).map(|j| vec![h * j as f64]).collect();
            let weights = vec![0.5 * h; nodes];
            let antipode = (0..nodes).map(|j| (j + nodes / 2) % nodes).collect();
            let reps = (0..nodes / 2).collect();
            (reference, weights, antipode, reps)
        }
        Grid::Hopf { eta, xi } => {
            let (etas, ew) = gauss_legendre_on(eta, 0.0, PI / 2.0);
            let h = 2.0 * PI / xi as f64;
            let mut reference = Vec::with_capacity(eta * xi * xi);
            let mut weights = Vec::with_capacity(eta * xi * xi);
            let mut antipode = Vec::with_capacity(eta * xi * xi);
            let mut reps = Vec::new();
            for ie in 0..eta {
                for a in 0..xi {
                    for b in 0..xi {
                        let i = hopf_index(xi, ie, a, b);
                        reference.push(vec![etas[ie], h * a as f64, h * b as f64]);
                        weights.push(0.5 * ew[ie] * h * h);
                        antipode.push(hopf_index(xi, ie, (a + xi / 2) % xi, (b + xi / 2) % xi));
                        if a < xi / 2 {
                            reps.push(i);
                        }
                    }
                }
            }
            (reference, weights, antipode, reps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::invariant_form;

    fn volume(c: &Cycle) -> Quadrature {
        c.integrate(|x, f, b| invariant_form(x, f, b)).unwrap()
    }

    #[test]
    fn circle_volume_is_pi() {
        let c = Cycle::make_real(2, 64).unwrap();
        assert_eq!(c.len(), 128);
        let q = volume(&c);
        assert!((q.value - PI).norm() < 1e-12, "{:?}", q);
        assert!(q.error < 1e-10);
        let (clr, _) = c.min_clearance().unwrap();
        assert!((clr - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hopf_volume_is_pi_squared() {
        let c = Cycle::make_real(4, 8).unwrap();
        let q = volume(&c);
        assert!((q.value - PI * PI).norm() < 1e-3 * PI * PI, "{:?}", q);
        assert!(q.value.re > 0.0);
    }

    #[test]
    fn antipodes_are_exact() {
        for (n, r) in [(2, 16), (4, 8)] {
            let c = Cycle::make_real(n, r).unwrap();
            for i in 0..c.len() {
                let j = c.antipode()[i];
                assert_eq!(c.antipode()[j], i);
                for k in 0..n {
                    assert_eq!(c.positions()[j][k], -c.positions()[i][k]);
                }
            }
        }
    }

    #[test]
    fn cos_squared_integral() {
        let c = Cycle::make_real(2, 32).unwrap();
        let q = c
            .integrate(|x, f, b| {
                let q: C = x.iter().map(|z| z * z).sum();
                Ok(x[0] * x[0] / q * invariant_form(x, f, b)?)
            })
            .unwrap();
        assert!((q.value - PI / 2.0).norm() < 1e-12);
    }

    #[test]
    fn refine_keeps_real_circle_and_volume() {
        let c = Cycle::make_real(2, 16).unwrap();
        let r = c.refine().unwrap();
        assert_eq!(r.resolution(), 32);
        for p in r.positions() {
            assert!(p.iter().all(|z| z.im.abs() < 1e-14));
            assert!((norm_sqr(p) - 1.0).abs() < 1e-12);
        }
        assert!((volume(&r).value - PI).norm() < 1e-11);

        let h = Cycle::make_real(4, 8).unwrap().refine().unwrap();
        assert!((volume(&h).value - PI * PI).norm() < 1e-8);
    }

    #[test]
    fn reparametrized_circle_keeps_volume() {
        // a non-uniformly parametrized real circle: φ(t) = t + 0.3 sin 2t
        let c = Cycle::make_real(2, 64).unwrap();
        let reps = c.representatives().to_vec();
        let pos: Vec<Vec<C>> = reps
            .iter()
            .map(|&i| {
                let t = c.reference()[i][0];
                let phi = t + 0.3 * (2.0 * t).sin();
                vec![C::new(phi.cos(), 0.0), C::new(phi.sin(), 0.0)]
            })
            .collect();
        let br: Vec<BranchState> = reps.iter().map(|&i| c.branches()[i]).collect();
        let warped = c.with_state(pos, br, c.target().clone());
        assert!(warped.edge_ratio() > 1.3);
        assert!((volume(&warped).value - PI).norm() < 1e-10);
    }

    #[test]
    fn rejects_odd_and_coarse() {
        assert!(matches!(Cycle::make_real(3, 16), Err(Error::OddDimension(3))));
        assert!(Cycle::make_real(2, 8).is_err());
        assert!(Cycle::make_real(4, 4).is_err());
    }
}
