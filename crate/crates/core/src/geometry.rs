//! Polygons in the unit square and the Fourier transform of their
//! indicator functions.
//!
//! Two independent evaluation routes are provided and cross-checked:
//!
//! - [`bb_transform`] — the vertex-sum closed form
//!   `1̂_P(t) = (1/4π²) Σ_j |det(u_{j−1},u_j)| / ((u_{j−1}·t)(u_j·t)) · e^{−2πi v_j·t}`,
//!   valid whenever no edge direction is orthogonal to `t`;
//! - [`ft_triangle_oracle`] — ear-clipping triangulation plus the closed-form
//!   transform of each triangle, written as a second divided difference of
//!   the exponential so that removable singularities cost no accuracy. This
//!   route is defined for every `t`, including `t = 0` where it returns the
//!   area.
//!
//! Multiplying the transform by `(s_1·t)···(s_k·t)` over the distinct edge
//! slopes cancels every denominator of the vertex sum and leaves an
//! exponential polynomial whose frequencies are the negated vertices and
//! whose coefficients are products of `k−2` linear forms
//! ([`clear_denominators`], [`vertex_coefficient`],
//! [`assemble_cleared_transform`]).
//!
//! The Fourier convention throughout is `1̂_P(t) = ∫_P e^{−2πi t·x} dx`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

use crate::expoly::{reduce_mod1, unit_phase, ExpPoly2D, Poly2D, Term2D, TorusFreq};
use crate::sampling::FourierSampleSet;
use crate::C64;

/// `|u·t|` below this is treated as a singular direction for the vertex sum.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Cross-product magnitude below which segments count as parallel.
const PARALLEL_EPS: f64 = 1e-9;

/// Shared tolerance for grouping reconstructed vertices onto common lines.
pub const RECONNECT_TOL: f64 = 1e-6;

const COLLINEAR_EPS: f64 = 1e-12;
const TOUCH_EPS: f64 = 1e-9;

// ── Points and vectors ───────────────────────────────────────────────

/// Point or direction in the plane. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Serialize for Vec2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.x, self.y).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(f64, f64)>::deserialize(d)?;
        Ok(Vec2::new(x, y))
    }
}

// ── Errors ───────────────────────────────────────────────────────────

#[derive(Clone, Debug, PartialEq)]
pub enum PolygonViolation {
    TooFewVertices { count: usize },
    OutOfRange { index: usize },
    CollinearTriple { index: usize },
    SelfIntersection { i: usize, j: usize },
}

impl std::fmt::Display for PolygonViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TooFewVertices { count } => write!(f, "only {count} vertices"),
            Self::OutOfRange { index } => write!(f, "vertex {index} outside [0,1)²"),
            Self::CollinearTriple { index } => {
                write!(f, "successive edges parallel at vertex {index}")
            }
            Self::SelfIntersection { i, j } => write!(f, "edges {i} and {j} intersect"),
        }
    }
}

fn format_violations(vs: &[PolygonViolation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid-polygon: {}", format_violations(.0))]
    InvalidPolygon(Vec<PolygonViolation>),
    #[error("singular-direction: |u_{edge}·t| = {value:.3e} below tolerance")]
    SingularDirection { edge: usize, value: f64 },
    #[error("invalid-slopes: {0}")]
    InvalidSlopes(String),
    #[error("parity: {0}")]
    Parity(String),
    #[error("reconnection: {0}")]
    Reconnection(String),
}

// ── Polygon ──────────────────────────────────────────────────────────

/// Simple polygon with vertices in `[0,1)²`, stored counterclockwise, with
/// no two successive edges parallel. Constructed through
/// [`validate_polygon`], which establishes all three invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Twice the signed area (positive for the stored CCW orientation).
    fn shoelace2(vertices: &[Vec2]) -> f64 {
        let n = vertices.len();
        (0..n)
            .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
            .sum()
    }

    pub fn area(&self) -> f64 {
        Self::shoelace2(&self.vertices) / 2.0
    }

    /// Same cycle, rotated to start at the lexicographically smallest
    /// vertex. Deterministic representative for file output.
    pub fn rotated_to_lex_min(&self) -> Polygon {
        let start = self
            .vertices
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
            .map(|(i, _)| i)
            .unwrap();
        let mut vertices = self.vertices.clone();
        vertices.rotate_left(start);
        Polygon { vertices }
    }
}

fn dist_point_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_touch(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    let straddle = |a: f64, b: f64| {
        (a > COLLINEAR_EPS && b < -COLLINEAR_EPS) || (a < -COLLINEAR_EPS && b > COLLINEAR_EPS)
    };
    if straddle(d1, d2) && straddle(d3, d4) {
        return true;
    }
    dist_point_segment(q1, p1, p2) < TOUCH_EPS
        || dist_point_segment(q2, p1, p2) < TOUCH_EPS
        || dist_point_segment(p1, q1, q2) < TOUCH_EPS
        || dist_point_segment(p2, q1, q2) < TOUCH_EPS
}

/// Validate a raw vertex list into a [`Polygon`].
///
/// Checks vertex range, absence of collinear (or reversed) successive
/// edges, and simplicity; collects every violation instead of stopping at
/// the first. Orientation is normalized to counterclockwise by the signed
/// area; the starting vertex is preserved.
pub fn validate_polygon(raw: &[Vec2]) -> Result<Polygon, GeometryError> {
    let n = raw.len();
    if n < 3 {
        return Err(GeometryError::InvalidPolygon(vec![
            PolygonViolation::TooFewVertices { count: n },
        ]));
    }
    let mut violations = Vec::new();
    for (i, v) in raw.iter().enumerate() {
        let ok = (0.0..1.0).contains(&v.x) && (0.0..1.0).contains(&v.y);
        if !ok || !v.x.is_finite() || !v.y.is_finite() {
            violations.push(PolygonViolation::OutOfRange { index: i });
        }
    }
    for j in 0..n {
        let prev = raw[(j + n - 1) % n];
        let cur = raw[j];
        let next = raw[(j + 1) % n];
        if (cur - prev).cross(next - cur).abs() <= COLLINEAR_EPS {
            violations.push(PolygonViolation::CollinearTriple { index: j });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_touch(raw[i], raw[(i + 1) % n], raw[j], raw[(j + 1) % n]) {
                violations.push(PolygonViolation::SelfIntersection { i, j });
            }
        }
    }
    if !violations.is_empty() {
        return Err(GeometryError::InvalidPolygon(violations));
    }
    let mut vertices = raw.to_vec();
    if Polygon::shoelace2(&vertices) < 0.0 {
        vertices.reverse();
    }
    Ok(Polygon { vertices })
}

#[derive(Serialize, Deserialize)]
struct PolygonJson {
    vertices: Vec<Vec2>,
}

impl Serialize for Polygon {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolygonJson {
            vertices: self.vertices.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolygonJson::deserialize(d)?;
        validate_polygon(&raw.vertices).map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ── Slopes and edge frames ───────────────────────────────────────────

/// Pairwise non-parallel unit vectors in canonical orientation (first
/// nonzero coordinate positive).
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeSet {
    dirs: Vec<Vec2>,
}

fn canonical_dir(v: Vec2) -> Vec2 {
    let u = v.normalized();
    if u.x < -PARALLEL_EPS || (u.x.abs() <= PARALLEL_EPS && u.y < 0.0) {
        -u
    } else {
        u
    }
}

impl SlopeSet {
    /// The two coordinate axes `{(1,0), (0,1)}`.
    pub fn axis() -> Self {
        Self {
            dirs: vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        }
    }

    pub fn new(dirs: &[Vec2]) -> Result<Self, GeometryError> {
        if dirs.len() < 2 {
            return Err(GeometryError::InvalidSlopes(
                "need at least two slopes".into(),
            ));
        }
        let dirs: Vec<Vec2> = dirs.iter().map(|&d| canonical_dir(d)).collect();
        for i in 0..dirs.len() {
            for j in (i + 1)..dirs.len() {
                if dirs[i].cross(dirs[j]).abs() <= PARALLEL_EPS {
                    return Err(GeometryError::InvalidSlopes(format!(
                        "slopes {i} and {j} are parallel"
                    )));
                }
            }
        }
        Ok(Self { dirs })
    }

    pub fn dirs(&self) -> &[Vec2] {
        &self.dirs
    }

    pub fn k(&self) -> usize {
        self.dirs.len()
    }

    /// `Π_r (s_r · t)`.
    pub fn product_at(&self, t: (f64, f64)) -> f64 {
        self.dirs.iter().map(|s| s.x * t.0 + s.y * t.1).product()
    }

    pub fn is_axis(&self) -> bool {
        self.k() == 2
            && self
                .dirs
                .iter()
                .all(|s| s.x.abs() <= PARALLEL_EPS || s.y.abs() <= PARALLEL_EPS)
    }
}

impl Serialize for SlopeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct J<'a> {
            slopes: &'a [Vec2],
        }
        J { slopes: &self.dirs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SlopeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct J {
            slopes: Vec<Vec2>,
        }
        let raw = J::deserialize(d)?;
        SlopeSet::new(&raw.slopes).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Per-edge direction data: unit vectors `u_j`, the deduplicated slope set,
/// signs `ε_j` with `u_j = ε_j·s_{φ(j)}`, and the index map `φ`.
#[derive(Clone, Debug)]
pub struct EdgeFrame {
    pub units: Vec<Vec2>,
    pub slopes: SlopeSet,
    pub signs: Vec<f64>,
    pub slope_index: Vec<usize>,
}

/// Compute the edge frame of a valid polygon (indices mod n).
pub fn edge_frame(p: &Polygon) -> EdgeFrame {
    let vs = p.vertices();
    let n = vs.len();
    let units: Vec<Vec2> = (0..n)
        .map(|j| (vs[(j + 1) % n] - vs[j]).normalized())
        .collect();
    let mut dirs: Vec<Vec2> = Vec::new();
    let mut signs = Vec::with_capacity(n);
    let mut slope_index = Vec::with_capacity(n);
    for u in &units {
        let c = canonical_dir(*u);
        let idx = dirs
            .iter()
            .position(|s| s.cross(c).abs() <= PARALLEL_EPS)
            .unwrap_or_else(|| {
                dirs.push(c);
                dirs.len() - 1
            });
        slope_index.push(idx);
        signs.push(if u.dot(dirs[idx]) > 0.0 { 1.0 } else { -1.0 });
    }
    EdgeFrame {
        units,
        slopes: SlopeSet { dirs },
        signs,
        slope_index,
    }
}

// ── Vertex-sum transform ─────────────────────────────────────────────

/// The vertex-sum closed form of `1̂_P(t)`, valid when every `|u_j·t|`
/// exceeds [`SINGULAR_TOL`].
pub fn bb_transform(p: &Polygon, t: (f64, f64)) -> Result<C64, GeometryError> {
    let frame = edge_frame(p);
    let vs = p.vertices();
    let n = vs.len();
    let dots: Vec<f64> = frame.units.iter().map(|u| u.x * t.0 + u.y * t.1).collect();
    for (j, &d) in dots.iter().enumerate() {
        if d.abs() < SINGULAR_TOL {
            return Err(GeometryError::SingularDirection { edge: j, value: d });
        }
    }
    let mut sum = C64::ZERO;
    for j in 0..n {
        let jm = (j + n - 1) % n;
        // signed turn: the absolute value would flip the sign at reflex
        // vertices and break the identity for non-convex regions
        let det = frame.units[jm].cross(frame.units[j]);
        let phase = unit_phase(-(vs[j].x * t.0 + vs[j].y * t.1));
        sum += phase * (det / (dots[jm] * dots[j]));
    }
    Ok(sum / (4.0 * PI * PI))
}

// ── Triangle oracle ──────────────────────────────────────────────────

/// `(e^z − 1)/z`, series below |z| = 0.25.
fn e_fun(z: C64) -> C64 {
    if z.norm() < 0.25 {
        let mut term = C64::ONE;
        let mut sum = C64::ZERO;
        for k in 1..=20 {
            term /= C64::new(k as f64, 0.0);
            let next = sum + term;
            if (next - sum).norm() < 1e-20 {
                return next;
            }
            sum = next;
            term *= z;
        }
        sum
    } else {
        (z.exp() - C64::ONE) / z
    }
}

/// `sinh(z)/z`, series below |z| = 0.25.
fn sinch(z: C64) -> C64 {
    if z.norm() < 0.25 {
        let z2 = z * z;
        let mut term = C64::ONE;
        let mut sum = C64::ONE;
        let mut k = 1.0;
        for _ in 0..10 {
            term = term * z2 / C64::new((k + 1.0) * (k + 2.0), 0.0);
            sum += term;
            k += 2.0;
            if term.norm() < 1e-20 {
                break;
            }
        }
        sum
    } else {
        z.sinh() / z
    }
}

/// First divided difference `(e^b − e^a)/(b − a)`, stable for `a ≈ b`.
fn exp_dd1(a: C64, b: C64) -> C64 {
    let mid = (a + b) / 2.0;
    mid.exp() * sinch((b - a) / 2.0)
}

/// Second divided difference of the exponential at nodes `{0, p, q}`.
///
/// Equal to `∫∫_{u,v≥0, u+v≤1} e^{pu+qv} du dv`; `1/2` at `p = q = 0`.
fn exp_dd2(p: C64, q: C64) -> C64 {
    let (small, big) = if p.norm() >= q.norm() { (q, p) } else { (p, q) };
    let r = big.norm();
    if r <= 0.5 {
        // Σ_m h_m(p,q) / (m+2)! with h_m the complete homogeneous
        // symmetric polynomials, h_m = p·h_{m−1} + q^m. Individual h_m can
        // vanish exactly (p = −q), so convergence is judged by the tail
        // bound |h_m| ≤ (m+1)·r^m, never by a single term.
        let mut h = C64::ONE;
        let mut qpow = C64::ONE;
        let mut rpow = 1.0f64;
        let mut fact = 2.0; // (m+2)! for m = 0
        let mut sum = h / fact;
        for m in 1..=34 {
            qpow *= q;
            h = p * h + qpow;
            rpow *= r;
            fact *= (m + 2) as f64;
            sum += h / fact;
            if (m + 1) as f64 * rpow / fact < 1e-20 {
                break;
            }
        }
        sum
    } else {
        (exp_dd1(small, big) - e_fun(small)) / big
    }
}

/// Closed-form `∫_T e^{−2πi t·x} dx` over the triangle `(a, b, c)`,
/// signed by orientation.
fn triangle_transform(a: Vec2, b: Vec2, c: Vec2, t: (f64, f64)) -> C64 {
    let ab = b - a;
    let ac = c - a;
    let jac = ab.cross(ac);
    let p = C64::new(0.0, -TAU * (t.0 * ab.x + t.1 * ab.y));
    let q = C64::new(0.0, -TAU * (t.0 * ac.x + t.1 * ac.y));
    unit_phase(-(t.0 * a.x + t.1 * a.y)) * exp_dd2(p, q) * jac
}

fn point_in_triangle_closed(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    (b - a).cross(p - a) >= -COLLINEAR_EPS
        && (c - b).cross(p - b) >= -COLLINEAR_EPS
        && (a - c).cross(p - c) >= -COLLINEAR_EPS
}

/// Ear-clipping triangulation of a valid polygon.
#[derive(Clone, Debug)]
pub struct Triangulation {
    tris: Vec<[Vec2; 3]>,
}

impl Triangulation {
    pub fn new(p: &Polygon) -> Self {
        let vs = p.vertices();
        let mut idx: Vec<usize> = (0..vs.len()).collect();
        let mut tris = Vec::with_capacity(vs.len().saturating_sub(2));
        while idx.len() > 3 {
            let m = idx.len();
            let mut clipped = false;
            for k in 0..m {
                let prev = vs[idx[(k + m - 1) % m]];
                let cur = vs[idx[k]];
                let next = vs[idx[(k + 1) % m]];
                let turn = (cur - prev).cross(next - cur);
                if turn.abs() <= COLLINEAR_EPS {
                    // straight vertex exposed by earlier clips; dropping it
                    // leaves the region unchanged
                    idx.remove(k);
                    clipped = true;
                    break;
                }
                if turn < 0.0 {
                    continue; // reflex
                }
                let blocked = idx.iter().enumerate().any(|(pos, &vi)| {
                    let is_corner = pos == k || pos == (k + m - 1) % m || pos == (k + 1) % m;
                    !is_corner && point_in_triangle_closed(vs[vi], prev, cur, next)
                });
                if !blocked {
                    tris.push([prev, cur, next]);
                    idx.remove(k);
                    clipped = true;
                    break;
                }
            }
            assert!(clipped, "ear clipping stalled on a validated polygon");
        }
        tris.push([vs[idx[0]], vs[idx[1]], vs[idx[2]]]);
        Self { tris }
    }

    pub fn triangles(&self) -> &[[Vec2; 3]] {
        &self.tris
    }

    /// `1̂_P(t)` summed over the triangles; defined for every `t`.
    pub fn fourier_at(&self, t: (f64, f64)) -> C64 {
        self.tris
            .iter()
            .map(|&[a, b, c]| triangle_transform(a, b, c, t))
            .sum()
    }
}

/// Triangulation-based `1̂_P(t)`, defined for all `t` including the
/// singular lines of the vertex sum; `1̂_P(0)` is the area.
pub fn ft_triangle_oracle(p: &Polygon, t: (f64, f64)) -> C64 {
    Triangulation::new(p).fourier_at(t)
}

// ── Denominator clearing ─────────────────────────────────────────────

/// Multiply each sample of `1̂_P` by `Π_r (s_r · t)`, producing samples of
/// the entire exponential polynomial `f_P`. Points where some `s_r·t = 0`
/// map to exactly zero.
pub fn clear_denominators(samples: &FourierSampleSet, slopes: &SlopeSet) -> FourierSampleSet {
    let mut out = FourierSampleSet::new();
    for (p, v) in samples.iter() {
        out.insert(p, v * slopes.product_at((p.0 as f64, p.1 as f64)));
    }
    out
}

/// Coefficient polynomial of the vertex-`j` term of `f_P`:
/// `(1/4π²)·det(u_{j−1},u_j)·ε_{j−1}ε_j·Π_{r∉{φ(j−1),φ(j)}} (s_r·t)`,
/// expanded into a dense grid of degree `< k−1`. The determinant keeps its
/// sign, matching the vertex sum of [`bb_transform`].
pub fn vertex_coefficient(p: &Polygon, frame: &EdgeFrame, j: usize) -> Poly2D {
    let n = p.len();
    let jm = (j + n - 1) % n;
    let k = frame.slopes.k();
    let dim = (k - 1).max(1);
    let scalar =
        frame.units[jm].cross(frame.units[j]) * frame.signs[jm] * frame.signs[j] / (4.0 * PI * PI);
    let mut poly = Poly2D::constant(C64::new(scalar, 0.0), dim);
    for (r, s) in frame.slopes.dirs().iter().enumerate() {
        if r != frame.slope_index[jm] && r != frame.slope_index[j] {
            poly = poly.mul_linear_form(s.x, s.y);
        }
    }
    poly
}

/// `f_P(t) = Σ_j coeff_j(t)·e^{−2πi v_j·t}` evaluated with the true vertex
/// phases, valid for every real `t`. Equals `Π_r (s_r·t)·1̂_P(t)`
/// identically, including on the singular lines of the vertex sum.
pub fn cleared_transform_at(p: &Polygon, frame: &EdgeFrame, t: (f64, f64)) -> C64 {
    (0..p.len())
        .map(|j| {
            let v = p.vertices()[j];
            let coeff = vertex_coefficient(p, frame, j);
            coeff.eval(t.0, t.1) * unit_phase(-(v.x * t.0 + v.y * t.1))
        })
        .sum()
}

/// Assemble `f_P = Π_r (s_r·t) · 1̂_P(t)` as an exponential polynomial:
/// one term per vertex, with frequency `(−v_j) mod 1` under the stored
/// `e^{+2πi(…)}` convention. The torus reduction is invisible at integer
/// lattice points; for arbitrary real `t` use [`cleared_transform_at`].
pub fn assemble_cleared_transform(p: &Polygon) -> ExpPoly2D {
    let frame = edge_frame(p);
    let n = p.len();
    let dim = (frame.slopes.k() - 1).max(1);
    let terms = (0..n)
        .map(|j| {
            let v = p.vertices()[j];
            Term2D {
                freq: TorusFreq::new(reduce_mod1(-v.x), reduce_mod1(-v.y)),
                coeff: vertex_coefficient(p, &frame, j),
            }
        })
        .collect();
    ExpPoly2D {
        terms,
        degree_bound: dim,
        term_bound: n,
    }
    .canonicalize(1e-12)
}

// ── Reconnection ─────────────────────────────────────────────────────

/// Pair vertices lying on common lines of direction `s`: on each line the
/// vertices sorted along `s` connect first-to-second, third-to-fourth and
/// so on. `members` lists the indices participating in this direction.
fn pair_along(
    points: &[Vec2],
    members: &[usize],
    s: Vec2,
    partner: &mut [Option<usize>],
) -> Result<(), GeometryError> {
    // group by the line offset cross(s, v), constant along direction s
    let mut keyed: Vec<(f64, usize)> = members.iter().map(|&i| (s.cross(points[i]), i)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut group_start = 0;
    while group_start < keyed.len() {
        let mut group_end = group_start + 1;
        while group_end < keyed.len()
            && keyed[group_end].0 - keyed[group_end - 1].0 <= RECONNECT_TOL
        {
            group_end += 1;
        }
        let mut group: Vec<usize> = keyed[group_start..group_end].iter().map(|e| e.1).collect();
        if !group.len().is_multiple_of(2) {
            return Err(GeometryError::Parity(format!(
                "{} vertices on a line with direction ({:.3}, {:.3})",
                group.len(),
                s.x,
                s.y
            )));
        }
        group.sort_by(|&a, &b| points[a].dot(s).total_cmp(&points[b].dot(s)));
        for pair in group.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            if partner[a].is_some() || partner[b].is_some() {
                return Err(GeometryError::Reconnection(
                    "a vertex received two edges of the same direction".into(),
                ));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        group_start = group_end;
    }
    Ok(())
}

/// Reconnect vertices given, per vertex, the indices of its two incident
/// slopes in `slopes`. The pairing along each line is forced: edges on a
/// common line cannot overlap, so sorted vertices connect consecutively.
pub fn reconnect_with_slopes(
    points: &[Vec2],
    incident: &[(usize, usize)],
    slopes: &SlopeSet,
) -> Result<Polygon, GeometryError> {
    let n = points.len();
    if incident.len() != n {
        return Err(GeometryError::Reconnection(
            "incident-slope list does not match the vertex list".into(),
        ));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= TOUCH_EPS {
                return Err(GeometryError::Reconnection(format!(
                    "vertices {i} and {j} coincide"
                )));
            }
        }
    }
    let k = slopes.k();
    if incident.iter().any(|&(a, b)| a == b || a >= k || b >= k) {
        return Err(GeometryError::Reconnection(
            "each vertex needs two distinct incident slopes".into(),
        ));
    }
    let mut partner_by_slope: Vec<Vec<Option<usize>>> = vec![vec![None; n]; k];
    for (r, slope) in slopes.dirs().iter().enumerate() {
        let members: Vec<usize> = (0..n)
            .filter(|&i| incident[i].0 == r || incident[i].1 == r)
            .collect();
        if members.is_empty() {
            continue;
        }
        pair_along(points, &members, *slope, &mut partner_by_slope[r])?;
    }
    for i in 0..n {
        let (a, b) = incident[i];
        if partner_by_slope[a][i].is_none() || partner_by_slope[b][i].is_none() {
            return Err(GeometryError::Reconnection(format!(
                "vertex {i} has no edge along one of its slopes"
            )));
        }
    }
    // walk the cycle, leaving each vertex along the slope we did not arrive by
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut cur = 0usize;
    let mut arrived_via: Option<usize> = None;
    loop {
        if visited[cur] {
            break;
        }
        visited[cur] = true;
        order.push(points[cur]);
        let (a, b) = incident[cur];
        let leave = match arrived_via {
            Some(r) if r == a => b,
            _ => a,
        };
        let next = partner_by_slope[leave][cur].expect("checked above");
        arrived_via = Some(leave);
        cur = next;
    }
    if order.len() != n || cur != 0 {
        return Err(GeometryError::Reconnection(format!(
            "edges form more than one cycle ({} of {n} vertices reached)",
            order.len()
        )));
    }
    validate_polygon(&order)
        .map(|p| p.rotated_to_lex_min())
        .map_err(|e| GeometryError::Reconnection(format!("traced cycle is not simple: {e}")))
}

/// Reconnect an axis-parallel vertex set: on each vertical line the lowest
/// vertex connects to the second lowest and so on, and likewise along each
/// horizontal line; the interconnections arise uniquely.
pub fn reconnect_axis_parallel(points: &[Vec2]) -> Result<Polygon, GeometryError> {
    let slopes = SlopeSet::axis();
    let incident: Vec<(usize, usize)> = vec![(0, 1); points.len()];
    reconnect_with_slopes(points, &incident, &slopes)
}
