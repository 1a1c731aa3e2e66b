//! Browser bindings for a few n = 2 computations. Every export returns a JSON string.

use branchint::continuation::{matrix_element, monodromy_report};
use branchint::group::{GroupElement, GroupPath, DEFAULT_DISC_FLOOR};
use branchint::integrand::KFiniteFunction;
use branchint::sl2::{oracle_continue, theta as theta_report};
use branchint::Error;
use num_complex::Complex64 as C;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn cx(z: C) -> Value {
    json!([z.re, z.im])
}

fn finish(result: Result<Value, Error>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// `f = x₁^k x₂^k / Q(x)^k`, the same on both sides.
fn kfinite(k: u32) -> Result<KFiniteFunction, Error> {
    KFiniteFunction::new(vec![k, k])
}

fn eval_inner(a: f64, alpha: C, k: u32, resolution: usize) -> Result<Value, Error> {
    if !(a.is_finite() && a != 0.0) {
        return Err(Error::Input("a must be a nonzero real number".into()));
    }
    let g = GroupElement::diag2(C::new(a, 0.0))?;
    let f = kfinite(k)?;
    let r = matrix_element(&g, &f, &f, alpha, resolution)?;
    Ok(json!({ "value": cx(r.value), "error": r.error_estimate }))
}

/// Matrix element at `diag(a, 1/a)` by quadrature over the real projective line.
#[wasm_bindgen]
pub fn eval_diagonal(a: f64, alpha_re: f64, alpha_im: f64, k: u32, resolution: u32) -> String {
    finish(eval_inner(a, C::new(alpha_re, alpha_im), k, resolution as usize))
}

/// The loop used for monodromy: out from `diag(1.3, 1/1.3)` to a circle of radius `r`
/// around `a = i`, once around it, and back.
fn loop_path(r: f64, turns: usize) -> Result<GroupPath, Error> {
    if !(0.05..=0.6).contains(&r) {
        return Err(Error::Input("radius must lie in [0.05, 0.6]".into()));
    }
    let start = C::new(1.3, 0.0);
    let centre = C::new(0.0, 1.0);
    let mut points = vec![start];
    let base = -std::f64::consts::FRAC_PI_4;
    for j in 0..=turns {
        let t = base + 2.0 * std::f64::consts::PI * j as f64 / turns as f64;
        points.push(centre + C::from_polar(r, t));
    }
    points.push(start);
    let waypoints = points
        .into_iter()
        .map(GroupElement::diag2)
        .collect::<Result<Vec<_>, _>>()?;
    GroupPath::new(waypoints, 16, DEFAULT_DISC_FLOOR)
}

fn monodromy_inner(r: f64, alpha: C, k: u32) -> Result<Value, Error> {
    let path = loop_path(r, 12)?;
    let f = kfinite(k)?;
    let initial = oracle_continue(&GroupPath::constant(path.start(), 1)?, &f, &f, alpha)?;
    let value = oracle_continue(&path, &f, &f, alpha)?;
    let rep = monodromy_report(initial, 0.0, value, 0.0);
    Ok(json!({
        "initial": cx(initial),
        "value": cx(value),
        "ratio": rep.ratio.map(cx),
    }))
}

/// Continues the matrix element once around the loop of radius `r` with the contour oracle.
#[wasm_bindgen]
pub fn monodromy_ratio(r: f64, alpha_re: f64, alpha_im: f64, k: u32) -> String {
    finish(monodromy_inner(r, C::new(alpha_re, alpha_im), k))
}

fn theta_inner(entries: &[f64]) -> Result<Value, Error> {
    if entries.len() != 8 {
        return Err(Error::Input("expected a, b, c, d as re/im pairs".into()));
    }
    let m = nalgebra::DMatrix::from_fn(2, 2, |i, j| {
        let k = 2 * (2 * i + j);
        C::new(entries[k], entries[k + 1])
    });
    let det = m.determinant();
    if !(det.norm() > 1e-12) {
        return Err(Error::Input("matrix is singular".into()));
    }
    let g = GroupElement::new(m / det.sqrt())?;
    let t = theta_report(&g)?;
    Ok(json!({
        "theta": t.theta.map(cx),
        "abcd": cx(t.abcd),
        "on_divisor": t.on_divisor,
        "rows": g
            .entries()
            .row_iter()
            .map(|r| r.iter().map(|z| cx(*z)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    }))
}

/// `θ = ad/bc` for `g = [[a, b], [c, d]]`, given as `[a.re, a.im, b.re, …, d.im]` and
/// rescaled to unit determinant.
#[wasm_bindgen]
pub fn theta(entries: &[f64]) -> String {
    finish(theta_inner(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn identity_gives_pi() {
        let v = parse(&eval_diagonal(1.0, 0.3, 0.0, 0, 64));
        let re = v["value"][0].as_f64().unwrap();
        assert!((re - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn loop_has_nontrivial_monodromy() {
        let v = parse(&monodromy_ratio(0.3, 0.3, 0.0, 0));
        let r = C::new(v["ratio"][0].as_f64().unwrap(), v["ratio"][1].as_f64().unwrap());
        assert!((r - 1.0).norm() > 1e-3);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(parse(&eval_diagonal(0.0, 0.3, 0.0, 0, 64))["error"].is_string());
        assert!(parse(&monodromy_ratio(2.0, 0.3, 0.0, 0))["error"].is_string());
        assert!(parse(&theta(&[1.0]))["error"].is_string());
    }

    #[test]
    fn theta_of_a_unipotent_is_on_the_divisor() {
        let v = parse(&theta(&[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        assert_eq!(v["on_divisor"], json!(true));
        assert!(v["theta"].is_null());
        assert_eq!(v["rows"][0][1], json!([1.0, 0.0]));
        assert_eq!(v["rows"][1][0], json!([0.0, 0.0]));
    }
}
