//! Transport of a cycle along a path of group elements, keeping every vertex
//! away from the two moving quadrics `{Q = 0}` and `{Q(·g) = 0}`.
//!
//! Each vertex moves by the minimum-norm horizontal displacement that keeps the
//! value of every nearby quadric fixed, so neighbourhoods of the zero sets are
//! carried along with them, plus a push of size `flow_gain` times the clearance
//! deficit. The strength of each constraint is a smooth function of the vertex
//! clearance. Only the part of the displacement normal to the cycle is kept.
//!
//! A step that leaves every vertex at least `delta_target` from both quadrics is
//! taken without moving the cycle. Otherwise the predicted circle cycle is
//! relaxed toward a geodesic of the barrier metric (see [`crate::relax`]), which
//! keeps it smooth and evenly sampled.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::cycle::{Cycle, Grid};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupPath};
use crate::integrand::BranchState;
use crate::quadric::{norm_sqr, Quadric};
use crate::relax::{relax, sobolev_smooth};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsotopyConfig {
    pub delta_target: f64,
    pub delta_min: f64,
    pub max_step: f64,
    pub step_shrink: f64,
    pub max_halvings: u32,
    pub flow_gain: f64,
    /// Clearance, in units of `delta_target`, at which a quadric's hold on a vertex halves.
    pub influence: f64,
    /// Relative softening of fully active constraints.
    pub regularization: f64,
    /// Strength `λ` of the relaxation metric `1 + λ Σ (delta_target / c)⁴`.
    pub relax_weight: f64,
    /// Relaxation iterations after each deforming step (circle cycles only).
    pub relax_iterations: usize,
    /// Relaxation iterations applied to a deformed cycle before endpoint quadrature.
    pub polish_iterations: usize,
}

impl Default for IsotopyConfig {
    fn default() -> Self {
        Self {
            delta_target: 0.05,
            delta_min: 1e-3,
            max_step: 1e-2,
            step_shrink: 0.5,
            max_halvings: 20,
            flow_gain: 0.5,
            influence: 3.0,
            regularization: 1e-3,
            relax_weight: 10.0,
            relax_iterations: 50,
            polish_iterations: 200,
        }
    }
}

impl IsotopyConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.delta_target,
            self.delta_min,
            self.max_step,
            self.flow_gain,
            self.regularization,
            self.relax_weight,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Input("isotopy parameters must be positive and finite".into()));
        }
        if self.delta_min >= self.delta_target {
            return Err(Error::Input("delta_min must be below delta_target".into()));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::Input("step_shrink must lie in (0, 1)".into()));
        }
        if !(self.influence > 1.0) {
            return Err(Error::Input("influence must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub s: f64,
    pub step: f64,
    pub min_clearance: f64,
    pub max_branch_jump: f64,
    pub displacement: f64,
}

/// One row per accepted step.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn min_clearance(&self) -> f64 {
        self.rows.iter().map(|r| r.min_clearance).fold(f64::INFINITY, f64::min)
    }

    pub fn max_branch_jump(&self) -> f64 {
        self.rows.iter().map(|r| r.max_branch_jump).fold(0.0, f64::max)
    }

    pub fn total_displacement(&self) -> f64 {
        self.rows.iter().map(|r| r.displacement).sum()
    }

    pub fn extend(&mut self, other: &Trace, s_offset: f64) {
        self.rows.extend(other.rows.iter().map(|r| TraceRow {
            s: r.s + s_offset,
            ..*r
        }));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,step,min_clearance,max_branch_jump,displacement")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.s, r.step, r.min_clearance, r.max_branch_jump, r.displacement
            )?;
        }
        Ok(())
    }
}

/// Strength of a quadric's hold on a vertex at clearance `c`: `1` on the quadric,
/// `1/2` at `influence · delta_target`, decaying like `c⁻²`. Analytic in `c`, so
/// the displacement field is analytic on the cycle.
fn constraint_weight(c: f64, config: &IsotopyConfig) -> f64 {
    let r = c / (config.influence * config.delta_target);
    1.0 / (1.0 + r * r)
}

struct Constraint {
    /// holomorphic gradient at the vertex
    grad: Vec<C>,
    /// quadric value at the vertex for the old and new group element
    before: C,
    after: C,
    clearance: f64,
    sigma: f64,
}

struct Rejection {
    vertex: usize,
    clearance: f64,
    reason: String,
}

/// Displacement of a unit vertex `z` toward the new configuration, split into the
/// part that carries the quadric values along and the clearance-restoring push.
fn displacement(
    z: &[C],
    constraints: &[Constraint],
    config: &IsotopyConfig,
    push_scale: f64,
) -> (Vec<C>, Vec<C>) {
    let n = z.len();
    let mut rows: Vec<Vec<C>> = Vec::with_capacity(2);
    let mut carry: Vec<C> = Vec::with_capacity(2);
    let mut push: Vec<C> = Vec::with_capacity(2);
    let mut reg: Vec<f64> = Vec::with_capacity(2);
    for k in constraints {
        let w = constraint_weight(k.clearance, config);
        // restrict to displacements orthogonal to z so renormalization is second order
        let gz: C = k.grad.iter().zip(z).map(|(g, x)| g * x).sum();
        let row: Vec<C> = (0..n).map(|j| k.grad[j] - gz * z[j].conj()).collect();
        let deficit = (config.delta_target - k.clearance).max(0.0);
        let phase = if k.after.norm() > 0.0 { k.after / k.after.norm() } else { C::new(0.0, 0.0) };
        carry.push(k.before - k.after);
        push.push(phase * (config.flow_gain * push_scale * deficit * k.sigma));
        reg.push(norm_sqr(&k.grad) * (config.regularization + (1.0 - w) / w));
        rows.push(row);
    }
    let m = rows.len();
    let mut gram = vec![vec![C::new(0.0, 0.0); m]; m];
    for a in 0..m {
        for b in 0..m {
            gram[a][b] = rows[a].iter().zip(&rows[b]).map(|(x, y)| x * y.conj()).sum();
        }
        gram[a][a] += reg[a];
    }
    let solve = |rhs: &[C]| -> Vec<C> {
        let y = match m {
            0 => vec![],
            1 => vec![rhs[0] / gram[0][0]],
            _ => {
                let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
                vec![
                    (gram[1][1] * rhs[0] - gram[0][1] * rhs[1]) / det,
                    (gram[0][0] * rhs[1] - gram[1][0] * rhs[0]) / det,
                ]
            }
        };
        let mut dz = vec![C::new(0.0, 0.0); n];
        for (row, yk) in rows.iter().zip(&y) {
            for j in 0..n {
                dz[j] += row[j].conj() * yk;
            }
        }
        dz
    };
    (solve(&carry), solve(&push))
}

/// Removes from `dz` its real-orthogonal projection onto the tangent space of the cycle
/// at `z`. Tangential motion only reparametrizes the cycle; left in, it lets vertices
/// slide away from low-clearance regions while the cycle itself stays put.
fn normal_part(z: &[C], mut dz: Vec<C>, frame: &[Vec<C>]) -> Vec<C> {
    let zz = norm_sqr(z);
    let mut basis: Vec<Vec<C>> = Vec::with_capacity(frame.len());
    for t in frame {
        let along: C = z.iter().zip(t).map(|(a, b)| a.conj() * b).sum::<C>() / zz;
        let mut v: Vec<C> = t.iter().zip(z).map(|(b, a)| b - a * along).collect();
        let scale = norm_sqr(&v).sqrt();
        for e in &basis {
            let d: f64 = e.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum();
            v.iter_mut().zip(e).for_each(|(x, y)| *x -= y * d);
        }
        let len = norm_sqr(&v).sqrt();
        if len > 1e-8 * scale && len > 0.0 {
            basis.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    for e in &basis {
        let d: f64 = e.iter().zip(&dz).map(|(a, b)| (a.conj() * b).re).sum();
        dz.iter_mut().zip(e).for_each(|(x, y)| *x -= y * d);
    }
    dz
}

fn normalized(z: Vec<C>) -> Vec<C> {
    let s = norm_sqr(&z).sqrt();
    z.into_iter().map(|v| v / s).collect()
}

/// Accepts the step without moving any vertex when every vertex keeps clearance
/// `delta_target` at `g_to`.
fn undeformed_step(
    cycle: &Cycle,
    unit: &Quadric,
    after: &Quadric,
    g_to: &GroupElement,
    config: &IsotopyConfig,
) -> Option<(Cycle, f64, f64, f64)> {
    let reps = cycle.representatives();
    let mut branches = Vec::with_capacity(reps.len());
    let mut min_clear = f64::INFINITY;
    let mut max_jump: f64 = 0.0;
    for &i in reps {
        let z = &cycle.positions()[i];
        let c = unit.clearance(z).min(after.clearance(z));
        if !(c >= config.delta_target) {
            return None;
        }
        let (b, jump) = cycle.branches()[i].continued(unit.eval(z), after.eval(z));
        if !(jump < FRAC_PI_2) {
            return None;
        }
        min_clear = min_clear.min(c);
        max_jump = max_jump.max(jump);
        branches.push(b);
    }
    let positions = reps.iter().map(|&i| cycle.positions()[i].clone()).collect();
    let next = cycle.with_state(positions, branches, g_to.clone());
    if check_edges(&next, unit, after, config, min_clear).is_some() {
        return None;
    }
    Some((next, min_clear, max_jump, 0.0))
}

/// Attempts one step to `g_to`; returns the candidate cycle and its trace row.
fn try_step(
    cycle: &Cycle,
    g_to: &GroupElement,
    config: &IsotopyConfig,
    push_scale: f64,
) -> Result<std::result::Result<(Cycle, f64, f64, f64), Rejection>> {
    let n = cycle.n();
    let unit = Quadric::unit(n);
    let before = cycle.target_quadric()?;
    let after = Quadric::new(g_to.gram())?;
    let reps = cycle.representatives();
    if let Some(stay) = undeformed_step(cycle, &unit, &after, g_to, config) {
        return Ok(Ok(stay));
    }
    let mut new_pos = Vec::with_capacity(reps.len());
    let mut new_branch = Vec::with_capacity(reps.len());
    let mut total_disp = 0.0;
    let mut max_jump: f64 = 0.0;
    let mut min_clear = f64::INFINITY;
    let frames = cycle.frames();
    let mut carried = Vec::with_capacity(reps.len());
    let mut pushed = Vec::with_capacity(reps.len());
    for &i in reps {
        let z = normalized(cycle.positions()[i].clone());
        let qi = unit.eval(&z);
        let constraints = [
            Constraint {
                grad: unit.gradient(&z),
                before: qi,
                after: qi,
                clearance: unit.clearance(&z),
                sigma: 1.0,
            },
            Constraint {
                grad: after.gradient(&z),
                before: before.eval(&z),
                after: after.eval(&z),
                clearance: after.clearance(&z),
                sigma: after.spectral_norm(),
            },
        ];
        let (c, p) = displacement(&z, &constraints, config, push_scale);
        carried.push(c);
        pushed.push(p);
    }
    // Pointwise ascent is ill-posed where the cycle is symmetric about a quadric
    // and neighbours get pushed to opposite sides; smooth the push along circles.
    if let Grid::Circle { nodes } = cycle.grid() {
        let mut field = vec![vec![C::new(0.0, 0.0); n]; nodes];
        for (k, &i) in reps.iter().enumerate() {
            field[cycle.antipode()[i]] = pushed[k].iter().map(|v| -v).collect();
            field[i] = pushed[k].clone();
        }
        sobolev_smooth(&mut field);
        for (k, &i) in reps.iter().enumerate() {
            pushed[k] = field[i].clone();
        }
    }
    for (k, &i) in reps.iter().enumerate() {
        let z = normalized(cycle.positions()[i].clone());
        let dz: Vec<C> = carried[k].iter().zip(&pushed[k]).map(|(a, b)| a + b).collect();
        let dz = normal_part(&z, dz, &frames[i]);
        let moved: Vec<C> = z.iter().zip(&dz).map(|(a, b)| a + b).collect();
        let z_new = normalized(moved);
        let clearance = unit.clearance(&z_new).min(after.clearance(&z_new));
        if !(clearance >= config.delta_min) {
            return Ok(Err(Rejection {
                vertex: i,
                clearance,
                reason: "vertex clearance below delta_min".into(),
            }));
        }
        min_clear = min_clear.min(clearance);
        let (b, jump) = cycle.branches()[i].continued(unit.eval(&z_new), after.eval(&z_new));
        if !(jump < FRAC_PI_2) {
            return Ok(Err(Rejection {
                vertex: i,
                clearance,
                reason: format!("branch jump {jump:.3} rad"),
            }));
        }
        max_jump = max_jump.max(jump);
        new_pos.push(z_new);
        new_branch.push(b);
    }
    let predicted = cycle.with_state(new_pos, new_branch, g_to.clone());
    if let Some(rej) = check_edges(&predicted, &unit, &after, config, min_clear) {
        return Ok(Err(rej));
    }
    let (next, _) = relax(&predicted, config, config.relax_iterations, 0.0)?;
    let (min_clear, _) = next.min_clearance()?;
    for &i in reps {
        let (a, b) = (&cycle.positions()[i], &next.positions()[i]);
        total_disp += 2.0 * a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    }
    Ok(Ok((next, min_clear, max_jump, total_disp)))
}

/// Neighbouring vertices must agree on both logarithms to within `π/2` and the
/// chord midpoint must keep the clearance floor.
fn check_edges(
    next: &Cycle,
    unit: &Quadric,
    after: &Quadric,
    config: &IsotopyConfig,
    min_clear: f64,
) -> Option<Rejection> {
    for (i, j) in next.edges() {
        let (bi, bj) = (next.branches()[i], next.branches()[j]);
        let gap = (bi.log_q_source.im - bj.log_q_source.im)
            .abs()
            .max((bi.log_q_target.im - bj.log_q_target.im).abs());
        if !(gap < FRAC_PI_2) {
            return Some(Rejection {
                vertex: i,
                clearance: min_clear,
                reason: format!("log gap {gap:.3} rad across edge ({i}, {j}); mesh too coarse"),
            });
        }
        let (pi, pj) = (&next.positions()[i], &next.positions()[j]);
        // align the antipodal representative before taking the midpoint
        let dot: C = pi.iter().zip(pj).map(|(a, b)| a.conj() * b).sum();
        let sign = if dot.re < 0.0 { -1.0 } else { 1.0 };
        let mid: Vec<C> = pi.iter().zip(pj).map(|(a, b)| a + b * sign).collect();
        let clearance = unit.clearance(&mid).min(after.clearance(&mid));
        if !(clearance >= config.delta_min) {
            return Some(Rejection {
                vertex: i,
                clearance,
                reason: format!("edge ({i}, {j}) midpoint clearance below delta_min"),
            });
        }
    }
    None
}

pub(crate) fn edges_admissible(next: &Cycle, unit: &Quadric, after: &Quadric, config: &IsotopyConfig) -> bool {
    check_edges(next, unit, after, config, 0.0).is_none()
}

/// Moves `cycle` from the quadrics of `g_from` to those of `g_to` along the straight segment.
pub fn advance(
    cycle: &Cycle,
    g_from: &GroupElement,
    g_to: &GroupElement,
    config: &IsotopyConfig,
) -> Result<Cycle> {
    if g_from.max_abs_diff(g_to) == 0.0 {
        return Ok(cycle.clone());
    }
    let path = GroupPath::unchecked(vec![g_from.clone(), g_to.clone()], 1)?;
    let (out, _) = transport(cycle, &path, config)?;
    Ok(out)
}

/// Transports `cycle` along `path`, halving the step on rejection.
pub fn transport(cycle: &Cycle, path: &GroupPath, config: &IsotopyConfig) -> Result<(Cycle, Trace)> {
    config.validate()?;
    if path.n() != cycle.n() {
        return Err(Error::Input("path and cycle dimensions differ".into()));
    }
    let start = path.start();
    let offset = cycle.target().max_abs_diff(&start);
    if offset > 1e-9 {
        return Err(Error::Input(format!(
            "cycle is attached to a group element {offset:.3e} away from the path start"
        )));
    }
    let (c0, v0) = cycle.min_clearance()?;
    if c0 < config.delta_min {
        return Err(Error::Isotopy {
            s: 0.0,
            vertex: v0,
            clearance: c0,
            reason: "initial cycle is not admissible".into(),
            clearance_trace: vec![c0],
        });
    }
    let mut trace = Trace::default();
    let end = path.segments() as f64;
    let mut current = cycle.clone();
    let mut s = 0.0f64;
    let mut h = config.max_step;
    let h_min = config.max_step * config.step_shrink.powi(config.max_halvings as i32);
    while s < end {
        let mut halvings = 0u32;
        loop {
            let boundary = (s.floor() + 1.0).min(end);
            let s_next = if s + h >= boundary - 1e-12 { boundary } else { s + h };
            let step = s_next - s;
            let g_to = path.at(s_next);
            match try_step(&current, &g_to, config, step / config.max_step)? {
                Ok((next, min_clearance, max_branch_jump, displacement)) => {
                    trace.rows.push(TraceRow {
                        s: s_next,
                        step,
                        min_clearance,
                        max_branch_jump,
                        displacement,
                    });
                    current = next;
                    s = s_next;
                    if halvings == 0 {
                        h = (h / config.step_shrink).min(config.max_step);
                    }
                    break;
                }
                Err(rej) => {
                    halvings += 1;
                    if halvings > config.max_halvings || step * config.step_shrink < h_min {
                        let mut clearance_trace: Vec<f64> =
                            trace.rows.iter().map(|r| r.min_clearance).collect();
                        clearance_trace.push(rej.clearance);
                        return Err(Error::Isotopy {
                            s,
                            vertex: rej.vertex,
                            clearance: rej.clearance,
                            reason: rej.reason,
                            clearance_trace,
                        });
                    }
                    h = step * config.step_shrink;
                }
            }
        }
    }
    // pin the target to the exact path endpoint
    let endpoint = path.end();
    let reps = current.representatives().to_vec();
    let pos: Vec<Vec<C>> = reps.iter().map(|&i| current.positions()[i].clone()).collect();
    let br: Vec<BranchState> = reps.iter().map(|&i| current.branches()[i]).collect();
    let current = current.with_state(pos, br, endpoint);
    Ok((current, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_shape() {
        let config = IsotopyConfig::default();
        assert_eq!(constraint_weight(0.0, &config), 1.0);
        let half = config.influence * config.delta_target;
        assert!((constraint_weight(half, &config) - 0.5).abs() < 1e-15);
        assert!(constraint_weight(0.2, &config) > constraint_weight(0.3, &config));
    }

    #[test]
    fn identical_endpoints_leave_cycle_unchanged() {
        let c = Cycle::make_real(2, 16).unwrap();
        let g = GroupElement::identity(2).unwrap();
        let out = advance(&c, &g, &g, &IsotopyConfig::default()).unwrap();
        assert_eq!(out.positions(), c.positions());
    }

    #[test]
    fn real_step_needs_no_deformation() {
        let g0 = GroupElement::identity(2).unwrap();
        let g1 = GroupElement::diag2(C::new(1.5, 0.0)).unwrap();
        let c = Cycle::make_real(2, 32).unwrap();
        let out = advance(&c, &g0, &g1, &IsotopyConfig::default()).unwrap();
        for p in out.positions() {
            assert!(p.iter().all(|z| z.im == 0.0));
        }
        for (a, b) in out.positions().iter().zip(c.positions()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn complex_step_deforms_and_stays_admissible() {
        let a = C::new(1.3, 0.0);
        let g0 = GroupElement::diag2(a).unwrap();
        let p = C::new(0.0, 1.0) + C::from_polar(0.3, -std::f64::consts::FRAC_PI_4);
        let g1 = GroupElement::diag2(p).unwrap();
        let c = Cycle::real(2, 128, &g0).unwrap();
        let config = IsotopyConfig::default();
        let path = GroupPath::unchecked(vec![g0, g1], 1).unwrap();
        let (out, trace) = transport(&c, &path, &config).unwrap();
        assert!(trace.min_clearance() >= config.delta_min);
        assert!(trace.max_branch_jump() < FRAC_PI_2);
        let max_im = out
            .positions()
            .iter()
            .flat_map(|p| p.iter().map(|z| z.im.abs()))
            .fold(0.0, f64::max);
        assert!(max_im > 1e-3, "{max_im}");
        for i in 0..out.len() {
            let j = out.antipode()[i];
            for k in 0..2 {
                assert_eq!(out.positions()[j][k], -out.positions()[i][k]);
            }
        }
    }

    #[test]
    fn trace_is_deterministic() {
        let g0 = GroupElement::diag2(C::new(1.3, 0.0)).unwrap();
        let g1 = GroupElement::diag2(C::new(0.5, 0.9)).unwrap();
        let path = GroupPath::unchecked(vec![g0.clone(), g1], 1).unwrap();
        let c = Cycle::real(2, 64, &g0).unwrap();
        let (_, t1) = transport(&c, &path, &IsotopyConfig::default()).unwrap();
        let (_, t2) = transport(&c, &path, &IsotopyConfig::default()).unwrap();
        assert_eq!(t1, t2);
    }
}
