//! Relaxation of a circle cycle at a fixed group element.
//!
//! The cycle is moved toward a closed geodesic of the conformal metric
//! `ρ |dz|²` with `ρ = 1 + λ Σ (δ/c)⁴`, one term per quadric. The weight blows up
//! at the quadrics fast enough that a geodesic wrapping a zero stays at clearance
//! of order `δ`. Minimizing the discrete Dirichlet energy `Σ ½ ρ̄ |z_{l+1} − z_l|² / h`
//! instead of the length also fixes the parametrization (constant `ρ`-speed), and
//! its quadratic edge term keeps a folded polygon from looking cheap.
//!
//! Descent is preconditioned by `ρ^{-1/2} (1 − d²/dt²)⁻¹ ρ^{-1/2}`, with a trust
//! region tied to the vertex clearance and an Armijo test on the energy.

use num_complex::Complex64 as C;
use rustfft::FftPlanner;

use crate::cycle::{Cycle, Grid};
use crate::error::Result;
use crate::isotopy::IsotopyConfig;
use crate::quadric::{norm_sqr, Quadric};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxStats {
    pub iterations: usize,
    pub energy: f64,
    /// Largest vertex displacement in the last accepted iteration.
    pub last_move: f64,
}

struct Evaluation {
    energy: f64,
    force: Vec<Vec<C>>,
    rho: Vec<f64>,
    clearance: Vec<f64>,
}

fn evaluate(pos: &[Vec<C>], quadrics: &[&Quadric], config: &IsotopyConfig) -> Evaluation {
    let m = pos.len();
    let n = pos[0].len();
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let lam = config.relax_weight * config.delta_target.powi(4);
    let mut rho = vec![0.0; m];
    let mut grad_rho = vec![vec![C::new(0.0, 0.0); n]; m];
    let mut clearance = vec![f64::INFINITY; m];
    for l in 0..m {
        let z = &pos[l];
        let mut r = 1.0;
        for q in quadrics {
            let value = q.eval(z);
            let c = q.clearance(z);
            clearance[l] = clearance[l].min(c);
            r += lam / c.powi(4);
            let grad = q.gradient(z);
            let scale = -4.0 * lam / c.powi(5) / (q.spectral_norm() * value.norm());
            for k in 0..n {
                grad_rho[l][k] += value * grad[k].conj() * scale;
            }
        }
        rho[l] = r;
    }
    // edge l joins vertex l to l + 1; the weight is the mean over its ends
    let diff: Vec<Vec<C>> = (0..m)
        .map(|l| pos[(l + 1) % m].iter().zip(&pos[l]).map(|(b, a)| b - a).collect())
        .collect();
    let len2: Vec<f64> = diff.iter().map(|d| norm_sqr(d)).collect();
    let weight: Vec<f64> = (0..m).map(|l| 0.5 * (rho[l] + rho[(l + 1) % m])).collect();
    let energy = (0..m).map(|l| 0.5 * weight[l] * len2[l]).sum::<f64>() / h;
    let force = (0..m)
        .map(|l| {
            let p = (l + m - 1) % m;
            let half = 0.25 * (len2[p] + len2[l]);
            let f: Vec<C> = (0..n)
                .map(|k| (diff[l][k] * weight[l] - diff[p][k] * weight[p] - grad_rho[l][k] * half) / (h * h))
                .collect();
            sphere_tangent(&pos[l], &f)
        })
        .collect();
    Evaluation {
        energy,
        force,
        rho,
        clearance,
    }
}

/// Removes the component of `v` that changes `‖z‖`.
fn sphere_tangent(z: &[C], v: &[C]) -> Vec<C> {
    let zz = norm_sqr(z);
    let radial = z.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / zz;
    z.iter().zip(v).map(|(a, b)| b - a * radial).collect()
}

/// Applies `(1 − d²/dt²)⁻¹` to a vector field sampled at the uniform nodes of a
/// closed curve, one component at a time.
pub(crate) fn sobolev_smooth(field: &mut [Vec<C>]) {
    let nodes = field.len();
    if nodes == 0 {
        return;
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nodes);
    let ifft = planner.plan_fft_inverse(nodes);
    for k in 0..field[0].len() {
        let mut col: Vec<C> = field.iter().map(|v| v[k]).collect();
        fft.process(&mut col);
        for (j, v) in col.iter_mut().enumerate() {
            let w = j.min(nodes - j) as f64;
            *v /= nodes as f64 * (1.0 + w * w);
        }
        ifft.process(&mut col);
        for (v, c) in field.iter_mut().zip(col) {
            v[k] = c;
        }
    }
}

fn normalized(z: Vec<C>) -> Vec<C> {
    let s = norm_sqr(&z).sqrt();
    z.into_iter().map(|v| v / s).collect()
}

/// Runs up to `iterations` descent steps, stopping early once a step moves no
/// vertex by more than `tolerance`. Grids other than the circle are returned unchanged.
pub fn relax(
    cycle: &Cycle,
    config: &IsotopyConfig,
    iterations: usize,
    tolerance: f64,
) -> Result<(Cycle, RelaxStats)> {
    let Grid::Circle { nodes } = cycle.grid() else {
        return Ok((
            cycle.clone(),
            RelaxStats {
                iterations: 0,
                energy: f64::NAN,
                last_move: 0.0,
            },
        ));
    };
    let n = cycle.n();
    let unit = Quadric::unit(n);
    let target = cycle.target_quadric()?;
    let quadrics = [&unit, &target];
    let reps = cycle.representatives().to_vec();
    let mut current = cycle.clone();
    let mut eval = evaluate(current.positions(), &quadrics, config);
    let mut stats = RelaxStats {
        iterations: 0,
        energy: eval.energy,
        last_move: 0.0,
    };
    for it in 0..iterations {
        let pos = current.positions();
        // symmetric preconditioner ρ^{-1/2} (1 − d²/dt²)⁻¹ ρ^{-1/2}, so the step
        // is balanced between crowded and free stretches of the curve
        let scale: Vec<f64> = eval.rho.iter().map(|r| r.sqrt().recip()).collect();
        let mut dir: Vec<Vec<C>> = eval
            .force
            .iter()
            .zip(&scale)
            .map(|(f, s)| f.iter().map(|v| v * s).collect())
            .collect();
        sobolev_smooth(&mut dir);
        for l in 0..nodes {
            let d: Vec<C> = dir[l].iter().map(|v| v * scale[l]).collect();
            dir[l] = sphere_tangent(&pos[l], &d);
        }
        let slope: f64 = (0..nodes)
            .map(|l| {
                (0..n)
                    .map(|k| (eval.force[l][k].conj() * dir[l][k]).re)
                    .sum::<f64>()
            })
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI
            / nodes as f64;
        if !(slope > 0.0) {
            break;
        }
        let mut tau: f64 = 0.5;
        for &i in &reps {
            let d = norm_sqr(&dir[i]).sqrt();
            if d > 0.0 {
                tau = tau.min(0.2 * eval.clearance[i] / d);
            }
        }
        let mut accepted = None;
        for _ in 0..config.max_halvings {
            let mut new_pos = Vec::with_capacity(reps.len());
            let mut new_br = Vec::with_capacity(reps.len());
            let mut ok = true;
            for &i in &reps {
                let z = &pos[i];
                let moved = normalized(z.iter().zip(&dir[i]).map(|(a, b)| a + b * tau).collect());
                let c = unit.clearance(&moved).min(target.clearance(&moved));
                let (b, jump) = current.branches()[i].continued(unit.eval(&moved), target.eval(&moved));
                if !(c >= config.delta_min && jump < std::f64::consts::FRAC_PI_2) {
                    ok = false;
                    break;
                }
                new_pos.push(moved);
                new_br.push(b);
            }
            if ok {
                let candidate = current.with_state(new_pos, new_br, current.target().clone());
                let trial = evaluate(candidate.positions(), &quadrics, config);
                if trial.energy <= eval.energy - 1e-4 * tau * slope
                    && crate::isotopy::edges_admissible(&candidate, &unit, &target, config)
                {
                    accepted = Some((candidate, trial));
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some((candidate, trial)) = accepted else {
            break;
        };
        let moved = reps
            .iter()
            .map(|&i| tau * norm_sqr(&dir[i]).sqrt())
            .fold(0.0, f64::max);
        current = candidate;
        eval = trial;
        stats = RelaxStats {
            iterations: it + 1,
            energy: eval.energy,
            last_move: moved,
        };
        if moved < tolerance {
            break;
        }
    }
    Ok((current, stats))
}
