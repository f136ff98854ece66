//! Predetermined lattice sampling sets.
//!
//! All sets are finite subsets of the nonnegative integer lattice, built
//! from unions of axis-aligned boxes `[w]_0 × [h]_0 = {0,…,w} × {0,…,h}`.
//! They are materialized eagerly, deduplicated, and stored in lexicographic
//! order so that iteration, file output, and tests are deterministic.
//!
//! The layered set trades width for height across layers: the union
//! `⋃_{r=1..N} [2⌊N/r⌋D]_0 × [2rD]_0` has `O(D²N log N)` points — only a
//! logarithmic factor above the parameter count of the functions it
//! determines — and every point `(m, n)` in it satisfies `m·n ≤ 4D²N`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::C64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error("invalid-parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("csv-parse: line {line}: {message}")]
    CsvParse { line: usize, message: String },
}

/// Sorted set of nonnegative integers `{0,…}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSet1D {
    points: Vec<u32>,
}

impl LatticeSet1D {
    pub fn points(&self) -> &[u32] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Deduplicated set of lattice points, lexicographically sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSet2D {
    points: Vec<(u32, u32)>,
}

impl LatticeSet2D {
    fn from_points(mut points: Vec<(u32, u32)>) -> Self {
        points.sort_unstable();
        points.dedup();
        Self { points }
    }

    pub fn points(&self) -> &[(u32, u32)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: (u32, u32)) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    pub fn is_subset_of(&self, other: &LatticeSet2D) -> bool {
        self.points.iter().all(|&p| other.contains(p))
    }

    /// CSV export: one `m,n` row per point, lexicographic order, no header.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for &(m, n) in &self.points {
            s.push_str(&format!("{},{}\n", m, n));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, SamplingError> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |tok: Option<&str>| -> Result<u32, SamplingError> {
                tok.ok_or(SamplingError::CsvParse {
                    line: i + 1,
                    message: "expected two comma-separated integers".into(),
                })?
                .trim()
                .parse()
                .map_err(|e| SamplingError::CsvParse {
                    line: i + 1,
                    message: format!("{e}"),
                })
            };
            let m = parse(it.next())?;
            let n = parse(it.next())?;
            if it.next().is_some() {
                return Err(SamplingError::CsvParse {
                    line: i + 1,
                    message: "expected exactly two fields".into(),
                });
            }
            points.push((m, n));
        }
        Ok(Self::from_points(points))
    }
}

fn check_positive(v: usize, name: &'static str) -> Result<(), SamplingError> {
    if v == 0 {
        Err(SamplingError::InvalidParameter(name))
    } else {
        Ok(())
    }
}

/// `{0, …, 2ND}` — determines univariate exponential polynomials with at
/// most `N` terms and coefficient degrees `< D`.
pub fn univariate_grid(n: usize, d: usize) -> Result<LatticeSet1D, SamplingError> {
    check_positive(n, "N must be positive")?;
    check_positive(d, "D must be positive")?;
    Ok(LatticeSet1D {
        points: (0..=(2 * n * d) as u32).collect(),
    })
}

/// `{0,…,D}²` — determines bivariate polynomials of degree `< D` (the
/// `{0,…,D−1}²` subgrid suffices; the extra row and column serve as a
/// consistency check).
pub fn coefficient_grid(d: usize) -> Result<LatticeSet2D, SamplingError> {
    check_positive(d, "D must be positive")?;
    let d = d as u32;
    let mut points = Vec::new();
    for m in 0..=d {
        for n in 0..=d {
            points.push((m, n));
        }
    }
    Ok(LatticeSet2D::from_points(points))
}

fn box_union(rects: impl Iterator<Item = (u32, u32)>) -> LatticeSet2D {
    let mut points = Vec::new();
    for (w, h) in rects {
        for m in 0..=w {
            for n in 0..=h {
                points.push((m, n));
            }
        }
    }
    LatticeSet2D::from_points(points)
}

/// `[2ND]_0 × [D]_0` — determines bivariate exponential polynomials whose
/// frequencies lie in the first variable only.
pub fn unifreq_grid(n: usize, d: usize) -> Result<LatticeSet2D, SamplingError> {
    check_positive(n, "N must be positive")?;
    check_positive(d, "D must be positive")?;
    Ok(box_union(std::iter::once(((2 * n * d) as u32, d as u32))))
}

/// The layered set `A_N = ⋃_{1≤r≤N} [2⌊N/r⌋D]_0 × [2rD]_0`.
pub fn layered_grid(n: usize, d: usize) -> Result<LatticeSet2D, SamplingError> {
    check_positive(n, "N must be positive")?;
    check_positive(d, "D must be positive")?;
    Ok(box_union(
        (1..=n).map(|r| ((2 * (n / r) * d) as u32, (2 * r * d) as u32)),
    ))
}

/// The polygon sampling set `A(k,N) = ⋃_{r=1..N} [2⌊2N/r⌋(k−1)]_0 × [2r(k−1)]_0`
/// for regions with at most `N` vertices and `k` distinct edge slopes.
/// `k = 2` is the axis-parallel case.
pub fn polygon_grid(k: usize, n: usize) -> Result<LatticeSet2D, SamplingError> {
    if k < 2 {
        return Err(SamplingError::InvalidParameter(
            "k must be at least 2 (a polygon has at least two slopes)",
        ));
    }
    check_positive(n, "N must be positive")?;
    let d = k - 1;
    Ok(box_union((1..=n).map(|r| {
        ((2 * (2 * n / r) * d) as u32, (2 * r * d) as u32)
    })))
}

// ── Sampled values ───────────────────────────────────────────────────

/// Map from lattice point to a complex sample value.
///
/// JSON form uses parallel arrays:
/// `{"points": [[m,n],…], "values": [[re,im],…]}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierSampleSet {
    map: BTreeMap<(u32, u32), C64>,
}

impl FourierSampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_fn(set: &LatticeSet2D, mut f: impl FnMut((u32, u32)) -> C64) -> Self {
        let map = set.points().iter().map(|&p| (p, f(p))).collect();
        Self { map }
    }

    pub fn insert(&mut self, p: (u32, u32), v: C64) {
        self.map.insert(p, v);
    }

    pub fn get(&self, p: (u32, u32)) -> Option<C64> {
        self.map.get(&p).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), C64)> + '_ {
        self.map.iter().map(|(&p, &v)| (p, v))
    }

    pub fn max_abs(&self) -> f64 {
        self.map.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Points of `set` that are absent from this sample set.
    pub fn missing_from(&self, set: &LatticeSet2D) -> Vec<(u32, u32)> {
        set.points()
            .iter()
            .copied()
            .filter(|p| !self.map.contains_key(p))
            .collect()
    }

    /// Pointwise `self − other.eval` against an evaluator, over this set.
    pub fn max_abs_diff(&self, mut f: impl FnMut((u32, u32)) -> C64) -> f64 {
        self.iter()
            .map(|(p, v)| (v - f(p)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct SamplesJson {
    points: Vec<(u32, u32)>,
    values: Vec<(f64, f64)>,
}

impl Serialize for FourierSampleSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let points: Vec<(u32, u32)> = self.map.keys().copied().collect();
        let values: Vec<(f64, f64)> = self.map.values().map(|v| (v.re, v.im)).collect();
        SamplesJson { points, values }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierSampleSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = SamplesJson::deserialize(deserializer)?;
        if raw.points.len() != raw.values.len() {
            return Err(serde::de::Error::custom(
                "points and values arrays must have equal length",
            ));
        }
        let map = raw
            .points
            .into_iter()
            .zip(raw.values.into_iter().map(|(re, im)| C64::new(re, im)))
            .collect();
        Ok(Self { map })
    }
}
