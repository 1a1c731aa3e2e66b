//! Acceptance suite. Runs the jobs in `fixtures/jobs` through the `branchint` binary
//! and checks the results against oracles computed here, printing one line per criterion.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use branchint::continuation::{default_resolution, matrix_element};
use branchint::group::GroupElement;
use branchint::integrand::{log_jacobian, BranchState, KFiniteFunction};
use branchint::sampling::{random_complex_element, random_real_element, random_rotation};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::f64::consts::PI;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

struct Run {
    code: Option<i32>,
    elapsed: Duration,
    result: Option<Value>,
    bytes: Vec<u8>,
    stderr: String,
}

fn run_job(job: &str, out: &Path) -> Run {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_branchint"))
        .arg("--job")
        .arg(fixtures().join("jobs").join(job))
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let bytes = std::fs::read(out.join("result.json")).unwrap_or_default();
    Run {
        code: output.status.code(),
        elapsed,
        result: serde_json::from_slice(&bytes).ok(),
        bytes,
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

fn complex(v: &Value) -> Option<C> {
    Some(C::new(v.get(0)?.as_f64()?, v.get(1)?.as_f64()?))
}

fn field(r: &Run, key: &str) -> Option<Value> {
    let mut v = r.result.as_ref()?;
    for part in key.split('.') {
        v = v.get(part)?;
    }
    Some(v.clone())
}

fn num(r: &Run, key: &str) -> f64 {
    field(r, key).and_then(|v| v.as_f64()).unwrap_or(f64::NAN)
}

fn cnum(r: &Run, key: &str) -> C {
    field(r, key).and_then(|v| complex(&v)).unwrap_or(C::new(f64::NAN, f64::NAN))
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn failed_run(r: &Run) -> Option<Outcome> {
    (r.code != Some(0)).then(|| outcome(false, format!("exit {:?}: {}", r.code, r.stderr.trim())))
}

/// Gamma at positive integers and half integers.
fn gamma_half(twice: u32) -> f64 {
    let mut x = twice as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    if twice % 2 == 1 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// Volume of real projective space: half the area of the unit sphere.
fn projective_volume(n: u32) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half(n)
}

fn volume(dir: &Path) -> Outcome {
    let r2 = run_job("volume_n2.json", &dir.join("v2"));
    let r4 = run_job("volume_n4.json", &dir.join("v4"));
    if let Some(f) = failed_run(&r2).or_else(|| failed_run(&r4)) {
        return f;
    }
    let e2 = (num(&r2, "value") - projective_volume(2)).abs();
    let e4 = (num(&r4, "value") - projective_volume(4)).abs() / projective_volume(4);
    outcome(
        e2 <= 1e-10 && r2.elapsed < Duration::from_secs(1) && e4 <= 1e-3 && r4.elapsed < Duration::from_secs(60),
        format!(
            "n=2 abs err {e2:.2e} in {:.2?}; n=4 rel err {e4:.2e} in {:.2?}",
            r2.elapsed, r4.elapsed
        ),
    )
}

fn so_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alpha = C::new(0.3, 0.1);
    let mut worst = [0.0f64; 2];
    for (slot, n) in [2usize, 4].into_iter().enumerate() {
        let res = default_resolution(n);
        let mut f = vec![0u32; n];
        f[0] = 2;
        let mut h = vec![0u32; n];
        h[0] = 1;
        h[1] = 1;
        let (f, h) = (KFiniteFunction::new(f).unwrap(), KFiniteFunction::new(h).unwrap());
        let one = KFiniteFunction::constant(n);
        let g = random_real_element(n, 0.4, &mut rng);
        let base_right = matrix_element(&g, &one, &f, alpha, res).unwrap().value;
        let base_left = matrix_element(&g, &h, &one, alpha, res).unwrap().value;
        for _ in 0..20 {
            let k = random_rotation(n, &mut rng);
            // J(kg, x) = J(g, xk) and f(x k g) is f(. g) moved by k
            let right = matrix_element(&k.compose(&g), &one, &f, alpha, res).unwrap().value;
            let left = matrix_element(&g.compose(&k), &h, &one, alpha, res).unwrap().value;
            worst[slot] = worst[slot].max(rel(right, base_right)).max(rel(left, base_left));
        }
    }
    outcome(
        worst[0] <= 1e-8 && worst[1] <= 1e-3,
        format!("max rel change n=2 {:.2e}, n=4 {:.2e}", worst[0], worst[1]),
    )
}

/// `x ↦ xg / |xg|` differentiated numerically on the sphere; returns the volume ratio.
fn fd_jacobian(g: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let map = |y: &[f64]| -> Vec<f64> {
        let img: Vec<f64> = (0..n).map(|j| (0..n).map(|i| y[i] * g[(i, j)]).sum()).collect();
        let nrm = img.iter().map(|v| v * v).sum::<f64>().sqrt();
        img.iter().map(|v| v / nrm).collect()
    };
    // orthonormal tangent frame at x by Gram-Schmidt
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for e in 0..n {
        let mut v: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        for b in std::iter::once(x.to_vec()).chain(frame.iter().cloned()) {
            let d: f64 = v.iter().zip(&b).map(|(p, q)| p * q).sum();
            v.iter_mut().zip(&b).for_each(|(p, q)| *p -= d * q);
        }
        let nrm = v.iter().map(|p| p * p).sum::<f64>().sqrt();
        if nrm > 1e-6 && frame.len() < n - 1 {
            frame.push(v.iter().map(|p| p / nrm).collect());
        }
    }
    let h = 1e-5;
    let images: Vec<Vec<f64>> = frame
        .iter()
        .map(|t| {
            let plus: Vec<f64> = x.iter().zip(t).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - h * b).collect();
            map(&plus).iter().zip(map(&minus)).map(|(p, m)| (p - m) / (2.0 * h)).collect()
        })
        .collect();
    let k = images.len();
    let gram = DMatrix::from_fn(k, k, |i, j| images[i].iter().zip(&images[j]).map(|(p, q)| p * q).sum::<f64>());
    gram.determinant().sqrt()
}

fn quad(x: &[C]) -> C {
    x.iter().map(|z| z * z).sum()
}

fn jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_fd = 0.0f64;
    for k in 0..100 {
        let n = if k % 2 == 0 { 2 } else { 4 };
        let g = random_real_element(n, 0.6, &mut rng);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        let xc: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
        let branch = BranchState::principal(quad(&xc), quad(&g.act(&xc))).unwrap();
        let j = log_jacobian(&g, &xc, &branch).unwrap().exp();
        let gr = g.entries().map(|z| z.re);
        worst_fd = worst_fd.max(rel(j, C::new(fd_jacobian(&gr, &x), 0.0)));
    }
    let mut worst_cocycle = 0.0f64;
    for k in 0..100 {
        let n = if k % 2 == 0 { 2 } else { 4 };
        let g1 = random_complex_element(n, &mut rng);
        let g2 = random_complex_element(n, &mut rng);
        let x: Vec<C> = (0..n).map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let jac = |g: &GroupElement, y: &[C]| {
            let b = BranchState::principal(quad(y), quad(&g.act(y))).unwrap();
            log_jacobian(g, y, &b).unwrap().exp()
        };
        let lhs = jac(&g1.compose(&g2), &x);
        let rhs = jac(&g1, &x) * jac(&g2, &g1.act(&x));
        worst_cocycle = worst_cocycle.max(rel(lhs, rhs));
    }
    outcome(
        worst_fd <= 1e-6 && worst_cocycle <= 1e-12,
        format!("finite difference rel {worst_fd:.2e}; cocycle rel {worst_cocycle:.2e}"),
    )
}

/// Endpoint of a path fixture, read directly from the JSON.
fn last_waypoint(file: &str) -> [[C; 2]; 2] {
    let text = std::fs::read_to_string(fixtures().join("paths").join(file)).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let w = v["waypoints"].as_array().unwrap().last().unwrap().clone();
    let e = |i: usize, j: usize| complex(&w[i][j]).unwrap();
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Trapezoid rule over the real circle for a real `g`.
fn direct_n2(g: [[C; 2]; 2], f1: [u32; 2], f2: [u32; 2], alpha: C) -> C {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let root = det.sqrt();
    let g = [[g[0][0] / root, g[0][1] / root], [g[1][0] / root, g[1][1] / root]];
    let m = 8192;
    let mut acc = C::new(0.0, 0.0);
    for k in 0..m {
        let phi = PI * k as f64 / m as f64;
        let x = [phi.cos(), phi.sin()];
        let y = [
            x[0] * g[0][0].re + x[1] * g[1][0].re,
            x[0] * g[0][1].re + x[1] * g[1][1].re,
        ];
        let qy = y[0] * y[0] + y[1] * y[1];
        let mono1 = x[0].powi(f1[0] as i32) * x[1].powi(f1[1] as i32);
        let mono2 = y[0].powi(f2[0] as i32) * y[1].powi(f2[1] as i32) / qy.powf((f2[0] + f2[1]) as f64 / 2.0);
        acc += C::new(qy, 0.0).powc(-alpha) * (mono1 * mono2);
    }
    acc * (PI / m as f64)
}

fn real_path(dir: &Path) -> Outcome {
    let g = last_waypoint("real_path.json");
    let cases: [(&str, [u32; 2], [u32; 2], C); 3] = [
        ("real_path_1.json", [0, 0], [0, 0], C::new(0.3, 0.0)),
        ("real_path_2.json", [1, 1], [0, 0], C::new(0.5, 0.25)),
        ("real_path_3.json", [2, 0], [0, 2], C::new(-0.2, 0.0)),
    ];
    let mut worst = 0.0f64;
    for (job, f1, f2, alpha) in cases {
        let r = run_job(job, &dir.join(job));
        if let Some(f) = failed_run(&r) {
            return f;
        }
        worst = worst.max(rel(cnum(&r, "value"), direct_n2(g, f1, f2, alpha)));
    }
    outcome(worst <= 1e-8, format!("max rel deviation from direct quadrature {worst:.2e}"))
}

fn homotopy(dir: &Path) -> Outcome {
    let r = run_job("homotopy.json", &dir.join("homotopy"));
    if let Some(f) = failed_run(&r) {
        return f;
    }
    let d = rel(cnum(&r, "value_b"), cnum(&r, "value_a"));
    let back = rel(cnum(&r, "reversal.value"), cnum(&r, "reversal.start_value"));
    outcome(
        d <= 1e-6 && back <= 1e-8,
        format!("paths rel {d:.2e}; reversal rel {back:.2e}"),
    )
}

fn monodromy(dir: &Path) -> Outcome {
    let engine = run_job("monodromy.json", &dir.join("monodromy"));
    let oracle = run_job("oracle_monodromy.json", &dir.join("oracle"));
    let trivial = run_job("contractible.json", &dir.join("contractible"));
    if let Some(f) = failed_run(&engine).or_else(|| failed_run(&oracle)).or_else(|| failed_run(&trivial)) {
        return f;
    }
    let ratio = cnum(&engine, "ratio");
    let oracle_ratio = cnum(&oracle, "ratio");
    let nontrivial = (ratio - 1.0).norm();
    let agreement = rel(ratio, oracle_ratio);
    let contractible = (cnum(&trivial, "ratio") - 1.0).norm();
    outcome(
        nontrivial > 1e-3 && agreement <= 1e-4 && contractible <= 1e-6 && engine.elapsed < Duration::from_secs(30),
        format!(
            "ratio {:.9}{:+.9}i, |ratio-1| {nontrivial:.3}, vs oracle rel {agreement:.2e}, contractible {contractible:.2e}, {:.2?}",
            ratio.re, ratio.im, engine.elapsed
        ),
    )
}

fn transversality(dir: &Path) -> Outcome {
    let r = run_job("transversality.json", &dir.join("transversality"));
    if let Some(f) = failed_run(&r) {
        return f;
    }
    let min_defect = num(&r, "min_defect");
    let control = num(&r, "control.max_defect");
    let analytic = field(&r, "all_analytic").and_then(|v| v.as_bool()) == Some(true);
    let points = num(&r, "points_found");
    let control_points = num(&r, "control.points");
    outcome(
        analytic && min_defect > 1e-6 && points > 0.0 && control < 1e-12 && control_points > 0.0,
        format!("min defect {min_defect:.3e} over {points} points; control max {control:.1e} over {control_points} points"),
    )
}

fn discriminant(dir: &Path) -> Outcome {
    let mut constructed = 0.0f64;
    let mut agreement = 0.0f64;
    for n in [2, 4] {
        let job = format!("discriminant_n{n}.json");
        let r = run_job(&job, &dir.join(&job));
        if let Some(f) = failed_run(&r) {
            return f;
        }
        constructed = constructed.max(num(&r, "constructed_max_abs_disc"));
        agreement = agreement.max(num(&r, "max_relative_disagreement"));
    }
    // a complex rotation, built here and passed in as an explicit element
    let t = C::new(0.4, 0.9);
    let g = [[t.cos(), t.sin()], [-t.sin(), t.cos()]];
    let pairs: Vec<Vec<[f64; 2]>> = g.iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect();
    let job = dir.join("rotation_job.json");
    std::fs::write(
        &job,
        serde_json::to_vec(&serde_json::json!({ "command": "discriminant", "g": pairs })).unwrap(),
    )
    .unwrap();
    let r = run_job(job.to_str().unwrap(), &dir.join("rotation"));
    if let Some(f) = failed_run(&r) {
        return f;
    }
    constructed = constructed.max(cnum(&r, "disc").norm());
    outcome(
        constructed < 1e-10 && agreement <= 1e-8,
        format!("constructed max |disc| {constructed:.2e}; resultant vs roots rel {agreement:.2e}"),
    )
}

fn n4_smoke(dir: &Path) -> Outcome {
    let r = run_job("n4_smoke.json", &dir.join("n4"));
    if let Some(f) = failed_run(&r) {
        return f;
    }
    let delta_min = num(&r, "config.isotopy.delta_min");
    let along = num(&r, "trace.min_clearance");
    let end = num(&r, "final_min_clearance").min(num(&r, "refinement.min_clearance"));
    let change = num(&r, "refinement.relative_change");
    outcome(
        along >= delta_min && end >= delta_min && change <= 1e-2 && r.elapsed < Duration::from_secs(300),
        format!(
            "min clearance {along:.3e} (endpoint {end:.3e}, floor {delta_min:.0e}); refinement rel {change:.2e}; {:.2?}",
            r.elapsed
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let jobs = [
        "real_path_1.json",
        "real_path_2.json",
        "real_path_3.json",
        "homotopy.json",
        "monodromy.json",
        "oracle_monodromy.json",
        "contractible.json",
    ];
    let mut differing = Vec::new();
    for job in jobs {
        let a = run_job(job, &dir.join("first").join(job));
        let b = run_job(job, &dir.join("second").join(job));
        if a.code != Some(0) || b.code != Some(0) || a.bytes.is_empty() || a.bytes != b.bytes {
            differing.push(job);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} jobs byte-identical across runs", jobs.len())
        } else {
            format!("differing or failing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("volume", Box::new(|| volume(dir))),
        ("rotation invariance", Box::new(so_invariance)),
        ("jacobian", Box::new(jacobian)),
        ("real path consistency", Box::new(|| real_path(dir))),
        ("homotopy invariance", Box::new(|| homotopy(dir))),
        ("monodromy", Box::new(|| monodromy(dir))),
        ("transversality", Box::new(|| transversality(dir))),
        ("discriminant", Box::new(|| discriminant(dir))),
        ("n=4 smoke continuation", Box::new(|| n4_smoke(&dir.join("c9")))),
        ("determinism", Box::new(|| determinism(&dir.join("c10")))),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.2?}]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
