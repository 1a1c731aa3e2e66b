//! Job files, result serialization and the batch runner behind the `branchint` binary.
//!
//! A job is a JSON file naming a command and its inputs. Running it produces a set of
//! artifacts (result JSON, optional CSV snapshots) that are only written once the whole
//! computation has succeeded, plus a `run_meta.json` holding the wall-clock data that
//! is kept out of the reproducible result.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::continuation::{
    continue_path, default_resolution, endpoint_value, homotopy_check, matrix_element, monodromy,
    monodromy_report,
};
use crate::cycle::Cycle;
use crate::error::{Error, Result};
use crate::group::{
    discriminant, discriminant_by_roots, matrix_from_pairs, pencil_eigenvalues, sym_char_poly,
    GroupElement, GroupPath, PathFile, DEFAULT_DISC_FLOOR,
};
use crate::integrand::KFiniteFunction;
use crate::isotopy::{IsotopyConfig, Trace};
use crate::quadric::{
    project_to_intersection, transversality_check, transversality_defect, TransversalityOptions,
};
use crate::sampling::{random_complex_element, random_rotation, random_symmetric_pencil};
use crate::sl2::{oracle_continue_with, theta, OracleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eval,
    Continue,
    Monodromy,
    Homotopy,
    Transversality,
    Discriminant,
    Volume,
    Oracle,
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub result: Option<String>,
    pub trace_csv: Option<String>,
    pub cycle_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    /// Path file, relative to the job file.
    #[serde(default)]
    pub path_file: Option<PathBuf>,
    /// Second path for `homotopy`.
    #[serde(default)]
    pub path_file_b: Option<PathBuf>,
    /// Group element as rows of `[re, im]` pairs (`eval`, `discriminant`).
    #[serde(default)]
    pub g: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub f1: Option<Vec<u32>>,
    #[serde(default)]
    pub f2: Option<Vec<u32>>,
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub isotopy: Option<IsotopyConfig>,
    #[serde(default)]
    pub disc_floor: Option<f64>,
    /// Number of random samples for `transversality` and `discriminant`.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Intersection trials per pencil for `transversality`.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// `homotopy`: also continue along `a` followed by its reverse.
    #[serde(default)]
    pub reversal: bool,
    /// `continue`: also integrate over the once-refined final cycle.
    #[serde(default)]
    pub refine_check: bool,
    #[serde(default)]
    pub outputs: OutputPaths,
}

/// Command-line values that take precedence over the job file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub resolution: Option<usize>,
    pub alpha: Option<[f64; 2]>,
    pub seed: Option<u64>,
}

/// Parses `re` or `re,im`.
pub fn parse_alpha(text: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("bad alpha component {s:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("alpha must be `re` or `re,im`, got {text:?}")),
    }
}

/// Files produced by one job, not yet written.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub result: Value,
}

impl Artifacts {
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        for (name, bytes) in &self.files {
            fs::write(out_dir.join(name), bytes)?;
        }
        Ok(())
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct ExactFloats(PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with sorted keys and 17-digit floats, newline terminated.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats(PrettyFormatter::new()));
    // round trip through Value so object keys come out sorted
    serde_json::to_value(value)?.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

fn cx(z: C) -> Value {
    json!([z.re, z.im])
}

fn relative(a: C, b: C) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale > 0.0 {
        (a - b).norm() / scale
    } else {
        0.0
    }
}

fn trace_summary(trace: &Trace) -> Value {
    if trace.is_empty() {
        return json!({ "steps": 0 });
    }
    json!({
        "steps": trace.len(),
        "min_clearance": trace.min_clearance(),
        "max_branch_jump": trace.max_branch_jump(),
        "total_displacement": trace.total_displacement(),
    })
}

/// Everything a job reads, resolved and hashed.
struct Loaded {
    spec: JobSpec,
    dir: PathBuf,
    hasher: Sha256,
}

impl Loaded {
    fn read(job_file: &Path) -> Result<Self> {
        let bytes = fs::read(job_file)
            .map_err(|e| Error::Input(format!("cannot read job {}: {e}", job_file.display())))?;
        let spec: JobSpec = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Input(format!("{}: {e}", job_file.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(b"job\0");
        hasher.update(&bytes);
        let dir = job_file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { spec, dir, hasher })
    }

    fn path(&mut self, file: Option<&PathBuf>, what: &str) -> Result<GroupPath> {
        let file = file.ok_or_else(|| Error::Input(format!("{what} is required for this command")))?;
        let full = self.dir.join(file);
        let bytes = fs::read(&full)
            .map_err(|e| Error::Input(format!("cannot read path file {}: {e}", full.display())))?;
        self.hasher.update(b"file\0");
        self.hasher.update(&bytes);
        let parsed: PathFile = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Input(format!("{}: {e}", full.display())))?;
        parsed.to_path(self.spec.disc_floor.unwrap_or(DEFAULT_DISC_FLOOR))
    }

    fn finish_hash(self, overrides: &Overrides) -> Result<String> {
        let mut hasher = self.hasher;
        hasher.update(b"overrides\0");
        hasher.update(serde_json::to_vec(overrides)?);
        Ok(hex::encode(hasher.finalize()))
    }
}

/// Resolved numeric parameters shared by the evaluation commands.
struct Params {
    n: usize,
    f1: KFiniteFunction,
    f2: KFiniteFunction,
    alpha: C,
    resolution: usize,
    isotopy: IsotopyConfig,
}

impl Params {
    fn resolve(spec: &JobSpec, n: usize, overrides: &Overrides) -> Result<Self> {
        let exps = |v: &Option<Vec<u32>>, name: &str| -> Result<KFiniteFunction> {
            let e = v.clone().unwrap_or_else(|| vec![0; n]);
            if e.len() != n {
                return Err(Error::Input(format!("{name} has {} exponents, expected {n}", e.len())));
            }
            KFiniteFunction::new(e)
        };
        let alpha = overrides.alpha.or(spec.alpha).unwrap_or([0.0, 0.0]);
        let resolution = overrides
            .resolution
            .or(spec.resolution)
            .unwrap_or_else(|| default_resolution(n));
        if resolution == 0 {
            return Err(Error::Input("resolution must be positive".into()));
        }
        let isotopy = spec.isotopy.unwrap_or_default();
        isotopy.validate()?;
        Ok(Self {
            n,
            f1: exps(&spec.f1, "f1")?,
            f2: exps(&spec.f2, "f2")?,
            alpha: C::new(alpha[0], alpha[1]),
            resolution,
            isotopy,
        })
    }

    fn echo(&self) -> Value {
        json!({
            "n": self.n,
            "f1": self.f1.exponents(),
            "f2": self.f2.exponents(),
            "alpha": cx(self.alpha),
            "resolution": self.resolution,
            "isotopy": self.isotopy,
        })
    }
}

fn element_from_spec(spec: &JobSpec) -> Result<Option<GroupElement>> {
    match &spec.g {
        None => Ok(None),
        Some(rows) => GroupElement::new(matrix_from_pairs(rows.len(), rows)?).map(Some),
    }
}

struct Outcome {
    fields: Map<String, Value>,
    config: Value,
    trace: Option<Trace>,
    cycle: Option<Cycle>,
}

impl Outcome {
    fn new(config: Value) -> Self {
        Self {
            fields: Map::new(),
            config,
            trace: None,
            cycle: None,
        }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }
}

/// Runs one job file and returns its artifacts without touching the filesystem.
pub fn run_job(job_file: &Path, overrides: &Overrides) -> Result<Artifacts> {
    let mut loaded = Loaded::read(job_file)?;
    let spec = loaded.spec.clone();
    let outcome = match spec.command {
        Command::Eval => run_eval(&spec, overrides)?,
        Command::Volume => run_volume(&spec, overrides)?,
        Command::Continue => {
            let path = loaded.path(spec.path_file.as_ref(), "path_file")?;
            run_continue(&spec, &path, overrides)?
        }
        Command::Monodromy => {
            let path = loaded.path(spec.path_file.as_ref(), "path_file")?;
            run_monodromy(&spec, &path, overrides)?
        }
        Command::Oracle => {
            let path = loaded.path(spec.path_file.as_ref(), "path_file")?;
            run_oracle(&spec, &path, overrides)?
        }
        Command::Homotopy => {
            let a = loaded.path(spec.path_file.as_ref(), "path_file")?;
            let b = loaded.path(spec.path_file_b.as_ref(), "path_file_b")?;
            run_homotopy(&spec, &a, &b, overrides)?
        }
        Command::Transversality => run_transversality(&spec, overrides)?,
        Command::Discriminant => run_discriminant(&spec, overrides)?,
    };
    let input_hash = loaded.finish_hash(overrides)?;

    let mut result = outcome.fields;
    result.insert("command".into(), serde_json::to_value(spec.command)?);
    result.insert("config".into(), outcome.config);
    result.insert("input_hash".into(), Value::String(input_hash));
    let result = Value::Object(result);

    let names = &spec.outputs;
    let mut files = vec![(
        names.result.clone().unwrap_or_else(|| "result.json".into()),
        to_json_bytes(&result)?,
    )];
    if let Some(trace) = outcome.trace.filter(|t| !t.is_empty()) {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        files.push((names.trace_csv.clone().unwrap_or_else(|| "trace.csv".into()), buf));
    }
    if let (Some(cycle), Some(name)) = (outcome.cycle, names.cycle_csv.clone()) {
        let mut buf = Vec::new();
        cycle.write_csv(&mut buf)?;
        files.push((name, buf));
    }
    for (name, _) in &files {
        let p = Path::new(name);
        if p.is_absolute() || p.components().count() != 1 || name == "run_meta.json" {
            return Err(Error::Input(format!("output name {name:?} must be a plain file name")));
        }
    }
    Ok(Artifacts { files, result })
}

fn run_eval(spec: &JobSpec, overrides: &Overrides) -> Result<Outcome> {
    let g = match element_from_spec(spec)? {
        Some(g) => g,
        None => GroupElement::identity(spec.n.unwrap_or(2))?,
    };
    let p = Params::resolve(spec, g.n(), overrides)?;
    let r = matrix_element(&g, &p.f1, &p.f2, p.alpha, p.resolution)?;
    let mut out = Outcome::new(p.echo());
    out.set("value", cx(r.value));
    out.set("error", json!(r.error_estimate));
    out.cycle = Some(r.final_cycle);
    Ok(out)
}

fn run_volume(spec: &JobSpec, overrides: &Overrides) -> Result<Outcome> {
    let n = spec.n.unwrap_or(2);
    let p = Params::resolve(spec, n, overrides)?;
    let id = GroupElement::identity(n)?;
    let one = KFiniteFunction::constant(n);
    let r = matrix_element(&id, &one, &one, C::new(0.0, 0.0), p.resolution)?;
    let mut out = Outcome::new(json!({ "n": n, "resolution": p.resolution }));
    out.set("value", json!(r.value.re));
    out.set("error", json!(r.error_estimate));
    out.set("vertices", json!(r.final_cycle.len()));
    Ok(out)
}

fn run_continue(spec: &JobSpec, path: &GroupPath, overrides: &Overrides) -> Result<Outcome> {
    let p = Params::resolve(spec, path.n(), overrides)?;
    let initial = matrix_element(&path.start(), &p.f1, &p.f2, p.alpha, p.resolution)?;
    let fin = continue_path(path, &p.f1, &p.f2, p.alpha, p.resolution, &p.isotopy)?;
    let rep = monodromy_report(initial.value, initial.error_estimate, fin.value, fin.error_estimate);
    let mut out = Outcome::new(p.echo());
    out.set("value", cx(fin.value));
    out.set("error", json!(fin.error_estimate));
    out.set("initial", cx(rep.initial));
    out.set("initial_error", json!(rep.initial_error));
    out.set("ratio", rep.ratio.map(cx).unwrap_or(Value::Null));
    out.set("difference", cx(rep.difference));
    out.set("trace", trace_summary(&fin.trace));
    out.set("final_min_clearance", json!(fin.final_cycle.min_clearance()?.0));
    if spec.refine_check {
        let refined = fin.final_cycle.refine()?;
        let (v, e) = endpoint_value(&refined, &p.f1, &p.f2, p.alpha)?;
        out.set(
            "refinement",
            json!({
                "value": cx(v),
                "error": e,
                "relative_change": relative(v, fin.value),
                "min_clearance": refined.min_clearance()?.0,
            }),
        );
    }
    out.trace = Some(fin.trace);
    out.cycle = Some(fin.final_cycle);
    Ok(out)
}

fn run_monodromy(spec: &JobSpec, path: &GroupPath, overrides: &Overrides) -> Result<Outcome> {
    let p = Params::resolve(spec, path.n(), overrides)?;
    let (rep, fin) = monodromy(path, &p.f1, &p.f2, p.alpha, p.resolution, &p.isotopy)?;
    let mut out = Outcome::new(p.echo());
    out.set("value", cx(rep.final_value));
    out.set("error", json!(rep.final_error));
    out.set("initial", cx(rep.initial));
    out.set("initial_error", json!(rep.initial_error));
    out.set("ratio", rep.ratio.map(cx).unwrap_or(Value::Null));
    out.set("difference", cx(rep.difference));
    out.set("trace", trace_summary(&fin.trace));
    out.trace = Some(fin.trace);
    out.cycle = Some(fin.final_cycle);
    Ok(out)
}

fn run_oracle(spec: &JobSpec, path: &GroupPath, overrides: &Overrides) -> Result<Outcome> {
    let p = Params::resolve(spec, path.n(), overrides)?;
    let config = OracleConfig::default();
    let start = GroupPath::constant(path.start(), 1)?;
    let (initial, _) = oracle_continue_with(&start, &p.f1, &p.f2, p.alpha, &config)?;
    let (value, contour) = oracle_continue_with(path, &p.f1, &p.f2, p.alpha, &config)?;
    let rep = monodromy_report(initial, 0.0, value, 0.0);
    let mut echo = p.echo();
    echo["oracle"] = json!({
        "max_edge": config.max_edge,
        "max_radius": config.max_radius,
        "max_step": config.max_step,
        "quad_tol": config.quad_tol,
        "max_nodes": config.max_nodes,
    });
    let mut out = Outcome::new(echo);
    out.set("oracle", json!(true));
    out.set("value", cx(value));
    out.set("initial", cx(initial));
    out.set("ratio", rep.ratio.map(cx).unwrap_or(Value::Null));
    out.set("difference", cx(rep.difference));
    out.set("contour_nodes", json!(contour.nodes().len()));
    Ok(out)
}

fn run_homotopy(spec: &JobSpec, a: &GroupPath, b: &GroupPath, overrides: &Overrides) -> Result<Outcome> {
    let p = Params::resolve(spec, a.n(), overrides)?;
    let rep = homotopy_check(a, b, &p.f1, &p.f2, p.alpha, p.resolution, &p.isotopy)?;
    let mut out = Outcome::new(p.echo());
    out.set("value_a", cx(rep.value_a));
    out.set("error_a", json!(rep.error_a));
    out.set("value_b", cx(rep.value_b));
    out.set("error_b", json!(rep.error_b));
    out.set("difference", cx(rep.difference));
    out.set("relative_difference", json!(rep.relative_difference));
    out.set("pass", json!(rep.pass));
    if spec.reversal {
        let there_and_back = a.concat(&a.reversed()?)?;
        let start = matrix_element(&a.start(), &p.f1, &p.f2, p.alpha, p.resolution)?;
        let back = continue_path(&there_and_back, &p.f1, &p.f2, p.alpha, p.resolution, &p.isotopy)?;
        out.set(
            "reversal",
            json!({
                "start_value": cx(start.value),
                "value": cx(back.value),
                "difference": cx(back.value - start.value),
                "relative_difference": relative(back.value, start.value),
            }),
        );
    }
    Ok(out)
}

fn seed_of(spec: &JobSpec, overrides: &Overrides) -> u64 {
    overrides.seed.or(spec.seed).unwrap_or(0)
}

fn run_transversality(spec: &JobSpec, overrides: &Overrides) -> Result<Outcome> {
    let seed = seed_of(spec, overrides);
    let pencils = spec.samples.unwrap_or(200);
    let trials = spec.trials.unwrap_or(24);
    let dims: Vec<usize> = match spec.n {
        Some(n) => vec![n],
        None => vec![2, 4],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_defect = f64::INFINITY;
    let mut all_analytic = true;
    let mut all_transversal = true;
    let mut points = 0usize;
    let mut per_dim: Vec<Value> = Vec::new();
    for (slot, &n) in dims.iter().enumerate() {
        let count = pencils / dims.len() + usize::from(slot < pencils % dims.len());
        let mut dim_min = f64::INFINITY;
        let mut dim_points = 0;
        for k in 0..count {
            let (a, b) = random_symmetric_pencil(n, 1e-3, &mut rng)?;
            let opts = TransversalityOptions {
                trials,
                seed: seed.wrapping_mul(1_000_003).wrapping_add((n * 100_000 + k) as u64),
                ..TransversalityOptions::default()
            };
            let rep = transversality_check(&a, &b, &opts)?;
            all_analytic &= rep.analytic;
            all_transversal &= rep.transversal;
            dim_points += rep.points_found;
            if let Some(d) = rep.sampled_min_defect {
                dim_min = dim_min.min(d);
            }
        }
        points += dim_points;
        min_defect = min_defect.min(dim_min);
        per_dim.push(json!({
            "n": n,
            "pencils": count,
            "points_found": dim_points,
            "min_defect": dim_min.is_finite().then_some(dim_min),
        }));
    }

    // A = B: every point of the quadric is a tangency
    let mut control_max = 0.0f64;
    let mut control_points = 0usize;
    for &n in &dims {
        let (a, _) = random_symmetric_pencil(n, 0.0, &mut rng)?;
        for _ in 0..trials {
            let start: Vec<C> = (0..n)
                .map(|_| C::new(rand::Rng::random::<f64>(&mut rng) - 0.5, rand::Rng::random::<f64>(&mut rng) - 0.5))
                .collect();
            if let Some(x) = project_to_intersection(&a, &a, &start) {
                control_max = control_max.max(transversality_defect(&a, &a, &x)?);
                control_points += 1;
            }
        }
    }

    let mut out = Outcome::new(json!({
        "dims": dims,
        "pencils": pencils,
        "trials": trials,
        "seed": seed,
        "threshold": TransversalityOptions::default().threshold,
    }));
    out.set("min_defect", min_defect.is_finite().then_some(min_defect).into());
    out.set("points_found", json!(points));
    out.set("all_analytic", json!(all_analytic));
    out.set("all_transversal", json!(all_transversal));
    out.set("by_dimension", Value::Array(per_dim));
    out.set(
        "control",
        json!({ "points": control_points, "max_defect": control_max }),
    );
    Ok(out)
}

fn run_discriminant(spec: &JobSpec, overrides: &Overrides) -> Result<Outcome> {
    if let Some(g) = element_from_spec(spec)? {
        let disc = discriminant(&g);
        let by_roots = discriminant_by_roots(&g)?;
        let mut out = Outcome::new(json!({ "n": g.n() }));
        out.set("char_poly", Value::Array(sym_char_poly(&g).into_iter().map(cx).collect()));
        out.set("eigenvalues", Value::Array(pencil_eigenvalues(&g)?.into_iter().map(cx).collect()));
        out.set("disc", cx(disc));
        out.set("disc_by_roots", cx(by_roots));
        out.set("relative_disagreement", json!(relative(disc, by_roots)));
        if g.n() == 2 {
            out.set("theta", serde_json::to_value(theta(&g)?)?);
        }
        return Ok(out);
    }

    let n = spec.n.unwrap_or(2);
    let samples = spec.samples.unwrap_or(100);
    let seed = seed_of(spec, overrides);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_index = 0;
    for k in 0..samples {
        let g = random_complex_element(n, &mut rng);
        let rel = relative(discriminant(&g), discriminant_by_roots(&g)?);
        if rel > worst {
            worst = rel;
            worst_index = k;
        }
    }
    let mut constructed_max = 0.0f64;
    for _ in 0..samples {
        let g = repeated_eigenvalue_element(n, &mut rng)?;
        constructed_max = constructed_max.max(discriminant(&g).norm());
    }
    let mut out = Outcome::new(json!({ "n": n, "samples": samples, "seed": seed }));
    out.set("max_relative_disagreement", json!(worst));
    out.set("worst_index", json!(worst_index));
    out.set("constructed_max_abs_disc", json!(constructed_max));
    Ok(out)
}

/// `k₁ · D · k₂` with real rotations and a diagonal `D` whose square repeats an entry,
/// so that `g gᵗ = k₁ D² k₁ᵗ` has a multiple eigenvalue.
pub fn repeated_eigenvalue_element<R: rand::Rng>(n: usize, rng: &mut R) -> Result<GroupElement> {
    let d: Vec<C> = if n == 2 {
        vec![C::new(0.0, 1.0), C::new(0.0, -1.0)]
    } else {
        let mut polar = || C::from_polar(0.85 + 0.3 * rng.random::<f64>(), 2.0 * std::f64::consts::PI * rng.random::<f64>());
        let z = polar();
        let mut d = vec![z, -z];
        while d.len() < n - 1 {
            d.push(polar());
        }
        let prod: C = d.iter().product();
        d.push(prod.inv());
        d
    };
    let k1 = random_rotation(n, rng);
    let k2 = random_rotation(n, rng);
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { C::new(0.0, 0.0) });
    GroupElement::new(k1.entries() * dm * k2.entries())
}

/// Wall-clock metadata, written next to the result and excluded from hashing.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub job: String,
    pub started_unix_seconds: f64,
    pub elapsed_seconds: f64,
    pub version: &'static str,
}

/// Runs a job and writes its artifacts plus `run_meta.json` into `out_dir`.
pub fn run_to_dir(job_file: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Value> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();
    let artifacts = run_job(job_file, overrides)?;
    let meta = RunMeta {
        job: job_file.display().to_string(),
        started_unix_seconds: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION"),
    };
    let meta_bytes = to_json_bytes(&meta)?;
    artifacts.write(out_dir)?;
    fs::write(out_dir.join("run_meta.json"), meta_bytes)?;
    Ok(artifacts.result)
}

/// Output directory of job `index` in a batch: `out` itself for a single job,
/// otherwise a subdirectory named after the job file.
pub fn batch_dirs(jobs: &[PathBuf], out: &Path) -> Vec<PathBuf> {
    if jobs.len() == 1 {
        return vec![out.to_path_buf()];
    }
    let mut dirs = Vec::with_capacity(jobs.len());
    for (k, job) in jobs.iter().enumerate() {
        let stem = job
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("job{k}"));
        let clash = jobs[..k].iter().any(|j| j.file_stem() == job.file_stem());
        let name = if clash { format!("{stem}-{k}") } else { stem };
        dirs.push(out.join(name));
    }
    dirs
}

/// Runs jobs on `workers` threads. Results are returned in job order.
pub fn run_batch(jobs: &[PathBuf], out: &Path, overrides: &Overrides, workers: usize) -> Vec<Result<Value>> {
    let dirs = batch_dirs(jobs, out);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Value>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= jobs.len() {
                    break;
                }
                let r = run_to_dir(&jobs[k], &dirs[k], overrides);
                results.lock().expect("result slot poisoned")[k] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("result slot poisoned")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}
