//! Matrix elements, their continuation along paths, monodromy around the
//! discriminant and the homotopy-invariance harness.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::cycle::Cycle;
use crate::error::{Error, Result};
use crate::group::{path_clearance, GroupElement, GroupPath, DEFAULT_DISC_FLOOR};
use crate::integrand::{KFiniteFunction, MatrixElementIntegrand};
use crate::isotopy::{transport, IsotopyConfig, Trace};
use crate::relax::relax;

/// Default resolution: panels of the circle for n = 2, points per Hopf angle for n = 4.
pub fn default_resolution(n: usize) -> usize {
    if n == 2 {
        256
    } else {
        16
    }
}

/// Largest `|initial|` for which a monodromy ratio is not reported.
pub const RATIO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub value: C,
    pub error_estimate: f64,
    pub trace: Trace,
    pub final_cycle: Cycle,
}

/// Integrates the matrix element of the cycle's own group element.
pub fn endpoint_value(
    cycle: &Cycle,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
) -> Result<(C, f64)> {
    let ig = MatrixElementIntegrand::new(cycle.target().clone(), alpha, f1.clone(), f2.clone())?;
    let q = cycle.integrate(|x, frame, b| ig.density(x, frame, b))?;
    if !(q.value.re.is_finite() && q.value.im.is_finite()) {
        return Err(Error::Quadrature {
            vertex: 0,
            reason: "non-finite quadrature value".into(),
        });
    }
    Ok((q.value, q.error))
}

/// Direct quadrature over the real projective space for a real `g`. Real elements on
/// the discriminant (the identity, rotations) are accepted: the real cycle stays away
/// from both quadrics for every real `g`.
pub fn matrix_element(
    g: &GroupElement,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
    resolution: usize,
) -> Result<ContinuationResult> {
    if !g.is_real(1e-12) {
        return Err(Error::Input(
            "direct evaluation needs a real group element; continue along a path instead".into(),
        ));
    }
    let cycle = Cycle::real(g.n(), resolution, g)?;
    let (value, error_estimate) = endpoint_value(&cycle, f1, f2, alpha)?;
    Ok(ContinuationResult {
        value,
        error_estimate,
        trace: Trace::default(),
        final_cycle: cycle,
    })
}

/// Transports the real cycle at the (real) start of `path` to its end and integrates there.
pub fn continue_path(
    path: &GroupPath,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
    resolution: usize,
    config: &IsotopyConfig,
) -> Result<ContinuationResult> {
    let start = path.start();
    if !start.is_real(1e-12) {
        return Err(Error::Input("continuation must start at a real group element".into()));
    }
    let (clearance, index) = path_clearance(path)?;
    if clearance < DEFAULT_DISC_FLOOR {
        return Err(Error::DiscriminantProximity {
            clearance,
            index,
            floor: DEFAULT_DISC_FLOOR,
        });
    }
    let cycle = Cycle::real(path.n(), resolution, &start)?;
    continue_from_cycle(&cycle, path, f1, f2, alpha, config)
}

/// Continues from an already transported cycle attached to the start of `path`.
pub fn continue_from_cycle(
    cycle: &Cycle,
    path: &GroupPath,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
    config: &IsotopyConfig,
) -> Result<ContinuationResult> {
    let (moved, trace) = transport(cycle, path, config)?;
    let final_cycle = if trace.total_displacement() > 0.0 && config.polish_iterations > 0 {
        relax(&moved, config, config.polish_iterations, 1e-14)?.0
    } else {
        moved
    };
    let (value, error_estimate) = endpoint_value(&final_cycle, f1, f2, alpha)?;
    Ok(ContinuationResult {
        value,
        error_estimate,
        trace,
        final_cycle,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    pub initial: C,
    pub initial_error: f64,
    pub final_value: C,
    pub final_error: f64,
    /// `final / initial`, absent when the initial value vanishes.
    pub ratio: Option<C>,
    pub difference: C,
}

/// Continues around a closed loop based at a real point and compares with the start value.
pub fn monodromy(
    lp: &GroupPath,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
    resolution: usize,
    config: &IsotopyConfig,
) -> Result<(MonodromyReport, ContinuationResult)> {
    if lp.start().max_abs_diff(&lp.end()) > 1e-9 {
        return Err(Error::Input("monodromy needs a closed loop".into()));
    }
    let initial = matrix_element(&lp.start(), f1, f2, alpha, resolution)?;
    let fin = continue_path(lp, f1, f2, alpha, resolution, config)?;
    let report = monodromy_report(initial.value, initial.error_estimate, fin.value, fin.error_estimate);
    Ok((report, fin))
}

pub fn monodromy_report(initial: C, initial_error: f64, final_value: C, final_error: f64) -> MonodromyReport {
    MonodromyReport {
        initial,
        initial_error,
        final_value,
        final_error,
        ratio: (initial.norm() > RATIO_FLOOR).then(|| final_value / initial),
        difference: final_value - initial,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyReport {
    pub value_a: C,
    pub error_a: f64,
    pub value_b: C,
    pub error_b: f64,
    pub difference: C,
    pub relative_difference: f64,
    pub pass: bool,
}

/// Continues along two paths with common endpoints, concurrently, and compares the values.
pub fn homotopy_check(
    a: &GroupPath,
    b: &GroupPath,
    f1: &KFiniteFunction,
    f2: &KFiniteFunction,
    alpha: C,
    resolution: usize,
    config: &IsotopyConfig,
) -> Result<HomotopyReport> {
    if a.n() != b.n() {
        return Err(Error::Input("paths have different dimensions".into()));
    }
    if a.start().max_abs_diff(&b.start()) > 1e-9 || a.end().max_abs_diff(&b.end()) > 1e-9 {
        return Err(Error::Input("paths must share both endpoints".into()));
    }
    let (ra, rb) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| continue_path(a, f1, f2, alpha, resolution, config));
        let rb = continue_path(b, f1, f2, alpha, resolution, config);
        (ha.join().expect("continuation thread panicked"), rb)
    });
    let (ra, rb) = (ra?, rb?);
    Ok(homotopy_report(ra.value, ra.error_estimate, rb.value, rb.error_estimate))
}

pub fn homotopy_report(value_a: C, error_a: f64, value_b: C, error_b: f64) -> HomotopyReport {
    let difference = value_b - value_a;
    let scale = value_a.norm().max(value_b.norm());
    let relative_difference = if scale > 0.0 { difference.norm() / scale } else { 0.0 };
    HomotopyReport {
        value_a,
        error_a,
        value_b,
        error_b,
        difference,
        relative_difference,
        pass: difference.norm() <= error_a + error_b,
    }
}
