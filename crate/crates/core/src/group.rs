//! Elements and paths of SL(n, ℂ) for even n, the symmetrized characteristic
//! polynomial `det(g gᵗ - λ)` and the discriminant locus where it has a
//! multiple root.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// Largest `|det - 1|` that is silently corrected by rescaling.
pub const DET_RESCALE_TOL: f64 = 1e-6;

/// Default floor on `|disc(g gᵗ)|` along a path.
pub const DEFAULT_DISC_FLOOR: f64 = 1e-6;

/// A complex `n × n` matrix with unit determinant, `n` even.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    entries: DMatrix<C>,
}

impl GroupElement {
    /// Validates and, if `|det - 1| <= 1e-6`, rescales by the principal n-th root of det.
    pub fn new(entries: DMatrix<C>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::Input(format!(
                "group element must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if n % 2 == 1 {
            return Err(Error::OddDimension(n));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("non-finite matrix entry".into()));
        }
        let det = entries.determinant();
        let deviation = (det - 1.0).norm();
        if deviation > DET_RESCALE_TOL {
            return Err(Error::Determinant { det, deviation });
        }
        let entries = if deviation > 0.0 {
            let root = det.powf(1.0 / n as f64);
            entries / root
        } else {
            entries
        };
        Ok(Self { entries })
    }

    /// Scales an arbitrary invertible matrix into SL(n) using the given n-th root of its determinant.
    fn from_scaled(entries: DMatrix<C>, root: C) -> Self {
        Self {
            entries: entries / root,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    /// Builds from real row-major entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            C::new(rows[i].get(j).copied().unwrap_or(f64::NAN), 0.0)
        });
        Self::new(m)
    }

    /// `diag(a, 1/a)` in SL(2, ℂ).
    pub fn diag2(a: C) -> Result<Self> {
        if a.norm() == 0.0 {
            return Err(Error::Input("diag(a, 1/a) needs a != 0".into()));
        }
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = a;
        m[(1, 1)] = a.inv();
        Self::new(m)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C> {
        &self.entries
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        self.entries.iter().all(|z| z.im.abs() <= tol * scale)
    }

    /// `g gᵗ` (plain transpose, not conjugate).
    pub fn gram(&self) -> DMatrix<C> {
        &self.entries * self.entries.transpose()
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            entries: &self.entries * &other.entries,
        }
    }

    pub fn transpose(&self) -> GroupElement {
        GroupElement {
            entries: self.entries.transpose(),
        }
    }

    /// Row vector times matrix: `x ↦ x g`.
    pub fn act(&self, x: &[C]) -> Vec<C> {
        let n = self.n();
        (0..n)
            .map(|j| (0..n).map(|i| x[i] * self.entries[(i, j)]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &GroupElement) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Characteristic data of the pencil `(g gᵗ, I)`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub char_coeffs: Vec<C>,
    pub eigenvalues: Vec<C>,
    pub disc: C,
}

/// Monic `det(λI - g gᵗ)`, ascending coefficients. For even n this equals
/// `det(g gᵗ - λI)`.
pub fn sym_char_poly(g: &GroupElement) -> Vec<C> {
    poly::char_poly(&g.gram())
}

pub fn pencil_eigenvalues(g: &GroupElement) -> Result<Vec<C>> {
    poly::roots(&sym_char_poly(g))
}

/// Resultant-based discriminant of the monic symmetrized characteristic polynomial.
pub fn discriminant(g: &GroupElement) -> C {
    poly::discriminant_resultant(&sym_char_poly(g))
}

/// Discriminant as the product over root pairs.
pub fn discriminant_by_roots(g: &GroupElement) -> Result<C> {
    Ok(poly::discriminant_from_roots(&pencil_eigenvalues(g)?))
}

pub fn in_discriminant(g: &GroupElement, tol: f64) -> bool {
    discriminant(g).norm() < tol
}

pub fn spectral_data(g: &GroupElement) -> Result<SpectralData> {
    let char_coeffs = sym_char_poly(g);
    let eigenvalues = poly::roots(&char_coeffs)?;
    let disc = poly::discriminant_resultant(&char_coeffs);
    Ok(SpectralData {
        char_coeffs,
        eigenvalues,
        disc,
    })
}

/// Piecewise path through waypoints. Each segment interpolates entries linearly and
/// renormalizes by an n-th root of the determinant chosen continuously along the path,
/// so the path is continuous as a matrix-valued function.
#[derive(Debug, Clone)]
pub struct GroupPath {
    waypoints: Vec<GroupElement>,
    samples_per_segment: usize,
    /// root-of-unity factor applied on each segment so consecutive segments join
    phases: Vec<C>,
}

const DET_TRACK_STEPS: usize = 64;

impl GroupPath {
    /// Builds and validates a path; every sample must have `|disc| >= floor`.
    pub fn new(
        waypoints: Vec<GroupElement>,
        samples_per_segment: usize,
        floor: f64,
    ) -> Result<Self> {
        let path = Self::unchecked(waypoints, samples_per_segment)?;
        let (clearance, index) = path_clearance(&path)?;
        if clearance < floor {
            return Err(Error::DiscriminantProximity {
                clearance,
                index,
                floor,
            });
        }
        Ok(path)
    }

    /// Builds a path without the discriminant-clearance check.
    pub fn unchecked(waypoints: Vec<GroupElement>, samples_per_segment: usize) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Input("path needs at least one waypoint".into()));
        }
        if samples_per_segment == 0 {
            return Err(Error::Input("samples_per_segment must be positive".into()));
        }
        let n = waypoints[0].n();
        if waypoints.iter().any(|w| w.n() != n) {
            return Err(Error::Input("waypoints have mixed dimensions".into()));
        }
        for (k, pair) in waypoints.windows(2).enumerate() {
            if pair[0].max_abs_diff(&pair[1]) == 0.0 {
                return Err(Error::Input(format!(
                    "waypoints {k} and {} coincide (zero-length segment)",
                    k + 1
                )));
            }
        }
        let mut phases = vec![C::new(1.0, 0.0)];
        for k in 0..waypoints.len().saturating_sub(1) {
            let log_det = track_log_det(&waypoints[k], &waypoints[k + 1], 1.0);
            let unit = (-log_det / n as f64).exp();
            let next = phases[k] * unit;
            // snap to the unit circle; the product is a root of unity up to rounding
            phases.push(next / next.norm());
        }
        Ok(Self {
            waypoints,
            samples_per_segment,
            phases,
        })
    }

    /// Single-point path.
    pub fn constant(g: GroupElement, samples_per_segment: usize) -> Result<Self> {
        Self::unchecked(vec![g], samples_per_segment)
    }

    pub fn n(&self) -> usize {
        self.waypoints[0].n()
    }

    pub fn waypoints(&self) -> &[GroupElement] {
        &self.waypoints
    }

    pub fn samples_per_segment(&self) -> usize {
        self.samples_per_segment
    }

    /// Number of segments; the path parameter runs over `[0, segments]`.
    pub fn segments(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn start(&self) -> GroupElement {
        self.at(0.0)
    }

    pub fn end(&self) -> GroupElement {
        self.at(self.segments() as f64)
    }

    /// Point of the path at parameter `s ∈ [0, segments]`.
    pub fn at(&self, s: f64) -> GroupElement {
        let segs = self.segments();
        if segs == 0 {
            return self.waypoints[0].clone();
        }
        let s = s.clamp(0.0, segs as f64);
        let k = (s.floor() as usize).min(segs - 1);
        let t = s - k as f64;
        let (a, b) = (&self.waypoints[k], &self.waypoints[k + 1]);
        if t == 0.0 {
            return GroupElement::from_scaled(a.entries.clone(), self.phases[k].inv());
        }
        let m = interpolate(a, b, t);
        let log_det = track_log_det(a, b, t);
        let root = (log_det / self.n() as f64).exp() / self.phases[k];
        GroupElement::from_scaled(m, root)
    }

    /// All sample points: `samples_per_segment` per segment plus the final endpoint.
    pub fn samples(&self) -> Vec<GroupElement> {
        let segs = self.segments();
        if segs == 0 {
            return vec![self.waypoints[0].clone()];
        }
        let m = self.samples_per_segment;
        let mut out = Vec::with_capacity(segs * m + 1);
        for k in 0..segs {
            for i in 0..m {
                out.push(self.at(k as f64 + i as f64 / m as f64));
            }
        }
        out.push(self.end());
        out
    }

    /// The same path traversed backwards, starting from this path's endpoint.
    pub fn reversed(&self) -> Result<Self> {
        let wps: Vec<GroupElement> = (0..=self.segments())
            .rev()
            .map(|k| self.at(k as f64))
            .collect();
        Self::unchecked(wps, self.samples_per_segment)
    }

    /// Concatenation `self` then `other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &GroupPath) -> Result<Self> {
        let end = self.end();
        if end.max_abs_diff(&other.start()) > 1e-9 {
            return Err(Error::Input(
                "paths do not join: end of the first differs from start of the second".into(),
            ));
        }
        let mut wps = self.waypoints.clone();
        // keep the continuous phase of the first path at the junction
        let mut tail: Vec<GroupElement> = other.waypoints[1..].to_vec();
        if let Some(phase) = self.phases.last() {
            for w in tail.iter_mut() {
                w.entries /= *phase;
            }
        }
        wps.extend(tail);
        Self::unchecked(wps, self.samples_per_segment)
    }
}

fn interpolate(a: &GroupElement, b: &GroupElement, t: f64) -> DMatrix<C> {
    &a.entries * C::new(1.0 - t, 0.0) + &b.entries * C::new(t, 0.0)
}

/// Continuous logarithm of `det((1-u) a + u b)` for `u` from 0 to `t`.
fn track_log_det(a: &GroupElement, b: &GroupElement, t: f64) -> C {
    let steps = ((DET_TRACK_STEPS as f64 * t).ceil() as usize).max(1);
    let mut prev = C::new(1.0, 0.0);
    let mut log = C::new(0.0, 0.0);
    for i in 1..=steps {
        let u = t * i as f64 / steps as f64;
        let d = interpolate(a, b, u).determinant();
        log += (d / prev).ln();
        prev = d;
    }
    log
}

/// Minimum `|disc|` over the sampled path and the index of the minimizing sample.
pub fn path_clearance(path: &GroupPath) -> Result<(f64, usize)> {
    let samples = path.samples();
    if samples.is_empty() {
        return Err(Error::Input("empty path".into()));
    }
    let mut best = (f64::INFINITY, 0);
    for (i, g) in samples.iter().enumerate() {
        let d = discriminant(g).norm();
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(best)
}

/// On-disk path description: waypoints as `n × n` arrays of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathFile {
    pub n: usize,
    pub waypoints: Vec<Vec<Vec<[f64; 2]>>>,
    pub samples_per_segment: usize,
}

impl PathFile {
    pub fn from_path(path: &GroupPath) -> Self {
        let n = path.n();
        let waypoints = path
            .waypoints()
            .iter()
            .map(|w| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| [w.entries[(i, j)].re, w.entries[(i, j)].im])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            waypoints,
            samples_per_segment: path.samples_per_segment(),
        }
    }

    pub fn to_path(&self, floor: f64) -> Result<GroupPath> {
        let wps = self
            .waypoints
            .iter()
            .enumerate()
            .map(|(k, rows)| matrix_from_pairs(self.n, rows).map_err(|e| match e {
                Error::Input(msg) => Error::Input(format!("waypoint {k}: {msg}")),
                other => other,
            }))
            .map(|m| m.and_then(GroupElement::new))
            .collect::<Result<Vec<_>>>()?;
        GroupPath::new(wps, self.samples_per_segment, floor)
    }

    pub fn load(file: &Path, floor: f64) -> Result<GroupPath> {
        let text = std::fs::read_to_string(file)?;
        let parsed: PathFile = serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("{}: {e}", file.display())))?;
        parsed.to_path(floor)
    }
}

/// Parses an `n × n` array of `[re, im]` pairs.
pub fn matrix_from_pairs(n: usize, rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("expected a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| C::new(rows[i][j][0], rows[i][j][1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> GroupElement {
        GroupElement::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn char_poly_examples() {
        let p = sym_char_poly(&GroupElement::identity(2).unwrap());
        assert!(close(p[0], C::new(1.0, 0.0), 1e-14) && close(p[1], C::new(-2.0, 0.0), 1e-14));

        let p = sym_char_poly(&real(&[&[2.0, 0.0], &[0.0, 0.5]]));
        assert!(close(p[1], C::new(-17.0 / 4.0, 0.0), 1e-14));
        assert!(close(p[0], C::new(1.0, 0.0), 1e-14));

        // g gᵗ = [[2,1],[1,1]]
        let p = sym_char_poly(&real(&[&[1.0, 1.0], &[0.0, 1.0]]));
        assert!(close(p[1], C::new(-3.0, 0.0), 1e-14));
        assert!(close(p[0], C::new(1.0, 0.0), 1e-14));
        assert!(close(p[2], C::new(1.0, 0.0), 0.0));
    }

    #[test]
    fn eigenvalue_examples() {
        let ev = pencil_eigenvalues(&real(&[&[2.0, 0.0], &[0.0, 0.5]])).unwrap();
        assert!(ev.iter().any(|l| close(*l, C::new(4.0, 0.0), 1e-12)));
        assert!(ev.iter().any(|l| close(*l, C::new(0.25, 0.0), 1e-12)));

        let s5 = 5f64.sqrt();
        let ev = pencil_eigenvalues(&real(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        for target in [(3.0 + s5) / 2.0, (3.0 - s5) / 2.0] {
            assert!(ev.iter().any(|l| close(*l, C::new(target, 0.0), 1e-12)));
        }

        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let ev = pencil_eigenvalues(&real(&[&[c, s], &[-s, c]])).unwrap();
        assert!(ev.iter().all(|l| close(*l, C::new(1.0, 0.0), 1e-7)));
    }

    #[test]
    fn discriminant_examples() {
        assert!(discriminant(&GroupElement::identity(2).unwrap()).norm() < 1e-14);
        let d = discriminant(&real(&[&[2.0, 0.0], &[0.0, 0.5]]));
        assert!(close(d, C::new(225.0 / 16.0, 0.0), 1e-12));
        let d = discriminant(&real(&[&[1.0, 1.0], &[0.0, 1.0]]));
        assert!(close(d, C::new(5.0, 0.0), 1e-12));
    }

    #[test]
    fn odd_dimension_rejected() {
        let m = DMatrix::<C>::identity(3, 3);
        assert!(matches!(GroupElement::new(m), Err(Error::OddDimension(3))));
    }

    #[test]
    fn determinant_normalization() {
        let m = DMatrix::<C>::identity(2, 2) * C::new(1.0 + 1e-7, 0.0);
        let g = GroupElement::new(m).unwrap();
        assert!((g.entries().determinant() - 1.0).norm() < 1e-12);
        let m = DMatrix::<C>::identity(2, 2) * C::new(1.01, 0.0);
        assert!(matches!(GroupElement::new(m), Err(Error::Determinant { .. })));
    }

    #[test]
    fn constant_path_clearance() {
        let g = real(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let p = GroupPath::unchecked(vec![g.clone(), g.compose(&GroupElement::identity(2).unwrap())], 4);
        // coinciding waypoints are rejected
        assert!(p.is_err());
        let p = GroupPath::constant(g, 4).unwrap();
        let (c, _) = path_clearance(&p).unwrap();
        assert!((c - 225.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn path_into_identity_is_rejected() {
        let a = real(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let id = GroupElement::identity(2).unwrap();
        let err = GroupPath::new(vec![a, id], 8, DEFAULT_DISC_FLOOR).unwrap_err();
        assert!(matches!(err, Error::DiscriminantProximity { index: 8, .. }));
    }

    #[test]
    fn circle_around_i_avoids_quartic_roots() {
        // a(t) = i + 0.3 e^{2πit}; disc = (a² - a⁻²)² evaluated on 1000 samples
        let wps: Vec<GroupElement> = (0..=1000)
            .map(|k| {
                let t = k as f64 / 1000.0;
                let a = C::new(0.0, 1.0) + C::from_polar(0.3, 2.0 * std::f64::consts::PI * t);
                GroupElement::diag2(a).unwrap()
            })
            .collect();
        let mut wps = wps;
        wps.pop();
        let path = GroupPath::unchecked(wps, 1).unwrap();
        let (c, _) = path_clearance(&path).unwrap();
        assert!(c > 0.1, "clearance {c}");
        for g in path.samples() {
            let a = g.entries()[(0, 0)];
            let direct = (a * a - (a * a).inv()).powi(2);
            assert!((direct - discriminant(&g)).norm() < 1e-9 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn path_is_continuous_in_sl() {
        let a = GroupElement::diag2(C::new(1.3, 0.0)).unwrap();
        let b = GroupElement::diag2(C::new(0.2, 0.8)).unwrap();
        let c = GroupElement::diag2(C::new(-0.5, 0.9)).unwrap();
        let path = GroupPath::new(vec![a, b, c], 16, DEFAULT_DISC_FLOOR).unwrap();
        let mut prev = path.at(0.0);
        for i in 1..=400 {
            let g = path.at(i as f64 * 2.0 / 400.0);
            assert!((g.entries().determinant() - 1.0).norm() < 1e-10);
            assert!(g.max_abs_diff(&prev) < 0.1);
            prev = g;
        }
    }
}
