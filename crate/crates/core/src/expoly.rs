//! Exponential polynomials with polynomial coefficients.
//!
//! A bivariate exponential polynomial is a finite sum
//!
//! ```text
//! f(ξ, η) = Σ_j p_j(ξ, η) · e^{2πi (x_j ξ + y_j η)}
//! ```
//!
//! where each coefficient `p_j` is a complex polynomial with every variable
//! raised to a power strictly below the degree bound `D`, and each frequency
//! pair `(x_j, y_j)` lives on the torus `T² = (R/Z)²`, represented in
//! `[0, 1)²`. Sampling on integers only sees frequencies mod 1, so the torus
//! representation is the natural one.
//!
//! The stored sign convention is `e^{+2πi(…)}`. Anything producing phases of
//! the opposite sign (such as the polygon vertex formula, whose phases are
//! `e^{−2πi v·t}`) stores the negated frequency reduced mod 1.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;

use crate::C64;

/// Default tolerance for merging nearby torus frequencies.
pub const DEFAULT_MERGE_TOL: f64 = 1e-7;

/// `e^{2πi·turns}` for a real number of turns, reduced mod 1 first.
#[inline]
pub fn unit_phase(turns: f64) -> C64 {
    let (s, c) = (TAU * turns.rem_euclid(1.0)).sin_cos();
    C64::new(c, s)
}

/// Reduce into `[0, 1)`, guarding against `rem_euclid` rounding up to 1.0.
#[inline]
pub fn reduce_mod1(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the torus `R/Z`: `min(|a−b|, 1−|a−b|)`.
#[inline]
pub fn torus_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Circular mean of torus points, reduced into `[0, 1)`.
///
/// Averages the corresponding unit vectors; well defined for the tight
/// clusters this crate produces (never for antipodal spreads).
pub fn circular_mean(xs: &[f64]) -> f64 {
    let sum: C64 = xs.iter().map(|&x| unit_phase(x)).sum();
    reduce_mod1(sum.arg() / TAU)
}

/// Single-linkage clustering of torus points: sorted values split at gaps
/// larger than `tol`, with the first and last cluster rejoined when they
/// meet across the wrap point.
pub(crate) fn cluster_circle(xs: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let mut xs: Vec<f64> = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for x in xs {
        match clusters.last_mut() {
            Some(cl) if x - *cl.last().unwrap() <= tol => cl.push(x),
            _ => clusters.push(vec![x]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters.first().unwrap();
        let last = clusters.last().unwrap();
        if torus_dist(*last.last().unwrap(), first[0]) <= tol {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    clusters
}

// ── Coefficient polynomials ──────────────────────────────────────────

/// Univariate complex polynomial, `coeffs[k]` multiplying `ξ^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1D {
    pub coeffs: Vec<C64>,
}

impl Poly1D {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero(len: usize) -> Self {
        Self {
            coeffs: vec![C64::ZERO; len.max(1)],
        }
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, x: f64) -> C64 {
        let mut acc = C64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Index of the highest coefficient with magnitude above `tol`, if any.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Bivariate complex polynomial on a dense `dim × dim` coefficient grid;
/// the entry at `(a, b)` multiplies `ξ^a η^b`. Every variable is raised to a
/// power `< dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2D {
    dim: usize,
    coeffs: Vec<C64>, // row-major, index a * dim + b
}

impl Poly2D {
    pub fn zero(dim: usize) -> Self {
        let dim = dim.max(1);
        Self {
            dim,
            coeffs: vec![C64::ZERO; dim * dim],
        }
    }

    pub fn constant(c: C64, dim: usize) -> Self {
        let mut p = Self::zero(dim);
        p.coeffs[0] = c;
        p
    }

    pub fn from_grid(dim: usize, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), dim.max(1) * dim.max(1));
        Self {
            dim: dim.max(1),
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.coeffs[a * self.dim + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: C64) {
        self.coeffs[a * self.dim + b] = v;
    }

    /// Horner evaluation: inner Horner in `η` per `ξ`-row, outer in `ξ`.
    pub fn eval(&self, xi: f64, eta: f64) -> C64 {
        let mut acc = C64::ZERO;
        for a in (0..self.dim).rev() {
            let mut row = C64::ZERO;
            for b in (0..self.dim).rev() {
                row = row * eta + self.get(a, b);
            }
            acc = acc * xi + row;
        }
        acc
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Copy into a grid of dimension `dim`, padding with zeros. Panics if any
    /// nonzero coefficient would be truncated.
    pub fn resized(&self, dim: usize) -> Self {
        let dim = dim.max(1);
        let mut out = Self::zero(dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let v = self.get(a, b);
                if a < dim && b < dim {
                    out.set(a, b, v);
                } else {
                    assert!(
                        v.norm() == 0.0,
                        "resize would truncate a nonzero coefficient"
                    );
                }
            }
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Poly2D, s: C64) {
        assert_eq!(self.dim, other.dim);
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += o * s;
        }
    }

    /// Multiply by the linear form `aξ + bη`. Panics if the product does not
    /// fit the grid.
    pub fn mul_linear_form(&self, a: f64, b: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                if v.norm() == 0.0 {
                    continue;
                }
                if a != 0.0 {
                    assert!(i + 1 < self.dim, "linear-form product exceeds the grid");
                    let w = out.get(i + 1, j) + v * a;
                    out.set(i + 1, j, w);
                }
                if b != 0.0 {
                    assert!(j + 1 < self.dim, "linear-form product exceeds the grid");
                    let w = out.get(i, j + 1) + v * b;
                    out.set(i, j + 1, w);
                }
            }
        }
        out
    }
}

// ── Frequencies and terms ────────────────────────────────────────────

/// A frequency pair on the torus, both coordinates in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusFreq {
    pub x: f64,
    pub y: f64,
}

impl TorusFreq {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x: reduce_mod1(x),
            y: reduce_mod1(y),
        }
    }

    /// Per-coordinate torus distance, combined with `max`.
    pub fn dist(&self, other: &TorusFreq) -> f64 {
        torus_dist(self.x, other.x).max(torus_dist(self.y, other.y))
    }
}

/// One term of an [`ExpPoly2D`].
#[derive(Clone, Debug)]
pub struct Term2D {
    pub freq: TorusFreq,
    pub coeff: Poly2D,
}

/// Univariate exponential polynomial `Σ_j p_j(ξ)·e^{2πi x_j ξ}`.
#[derive(Clone, Debug, Default)]
pub struct ExpPoly1D {
    pub terms: Vec<(f64, Poly1D)>,
}

impl ExpPoly1D {
    pub fn empty() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn eval(&self, xi: f64) -> C64 {
        self.terms
            .iter()
            .map(|(x, p)| p.eval(xi) * unit_phase(x * xi))
            .sum()
    }

    /// Coefficient polynomial of the term whose frequency is within `tol`
    /// (torus distance) of `x`, if present.
    pub fn term_at(&self, x: f64, tol: f64) -> Option<&Poly1D> {
        self.terms
            .iter()
            .find(|(f, _)| torus_dist(*f, x) <= tol)
            .map(|(_, p)| p)
    }

    /// Sorted frequency list.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.terms.iter().map(|(x, _)| *x).collect();
        xs.sort_by(f64::total_cmp);
        xs
    }
}

/// Bivariate exponential polynomial with degree bound and term bound.
#[derive(Clone, Debug)]
pub struct ExpPoly2D {
    pub terms: Vec<Term2D>,
    /// Every coefficient polynomial has each variable raised to a power
    /// `< degree_bound`.
    pub degree_bound: usize,
    /// The model class this value is declared to belong to: at most
    /// `term_bound` terms.
    pub term_bound: usize,
}

impl ExpPoly2D {
    pub fn empty(degree_bound: usize, term_bound: usize) -> Self {
        Self {
            terms: Vec::new(),
            degree_bound: degree_bound.max(1),
            term_bound,
        }
    }

    pub fn eval(&self, t: (f64, f64)) -> C64 {
        self.terms
            .iter()
            .map(|tm| tm.coeff.eval(t.0, t.1) * unit_phase(tm.freq.x * t.0 + tm.freq.y * t.1))
            .sum()
    }

    /// Distinct x-projections of the frequency set, sorted ascending.
    pub fn x_projections(&self, tol: f64) -> Vec<f64> {
        let mut xs: Vec<f64> = self.terms.iter().map(|t| t.freq.x).collect();
        xs.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for x in xs {
            if out.last().is_none_or(|&l| torus_dist(l, x) > tol) {
                out.push(x);
            }
        }
        // torus wrap: first and last may coincide mod 1
        if out.len() > 1 && torus_dist(out[0], *out.last().unwrap()) <= tol {
            out.pop();
        }
        out
    }

    /// Canonical form: frequencies within `tol` (torus metric, per
    /// coordinate) are merged by summing coefficient grids, terms whose
    /// coefficient sup-norm is below `tol` are dropped, and the result is
    /// sorted lexicographically by `(x, y)`.
    pub fn canonicalize(&self, tol: f64) -> Self {
        let n = self.terms.len();
        // single-linkage clustering via union-find
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let fi = self.terms[i].freq;
                let fj = self.terms[j].freq;
                if torus_dist(fi.x, fj.x) <= tol && torus_dist(fi.y, fj.y) <= tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            clusters.entry(r).or_default().push(i);
        }
        let dim = self.degree_bound.max(1);
        let mut terms: Vec<Term2D> = Vec::new();
        for (_, members) in clusters {
            let mut coeff = Poly2D::zero(dim);
            for &i in &members {
                coeff.add_assign_scaled(&self.terms[i].coeff.resized(dim), C64::ONE);
            }
            if coeff.sup_norm() < tol {
                continue;
            }
            let xs: Vec<f64> = members.iter().map(|&i| self.terms[i].freq.x).collect();
            let ys: Vec<f64> = members.iter().map(|&i| self.terms[i].freq.y).collect();
            let mut x = circular_mean(&xs);
            let mut y = circular_mean(&ys);
            // snap to 0 across the wrap point so sorting is stable
            if torus_dist(x, 0.0) < tol {
                x = 0.0;
            }
            if torus_dist(y, 0.0) < tol {
                y = 0.0;
            }
            terms.push(Term2D {
                freq: TorusFreq { x, y },
                coeff,
            });
        }
        // sort by x-cluster first so that terms sharing a projection up to
        // noise order deterministically by y
        let xs: Vec<f64> = terms.iter().map(|t| t.freq.x).collect();
        let clusters = cluster_circle(&xs, tol.max(1e-12));
        let rep_of = |x: f64| -> f64 {
            for cl in &clusters {
                if cl
                    .iter()
                    .any(|&c| c == x || torus_dist(c, x) <= tol.max(1e-12))
                {
                    return circular_mean(cl);
                }
            }
            x
        };
        terms.sort_by(|a, b| {
            rep_of(a.freq.x)
                .total_cmp(&rep_of(b.freq.x))
                .then(a.freq.y.total_cmp(&b.freq.y))
                .then(a.freq.x.total_cmp(&b.freq.x))
        });
        Self {
            terms,
            degree_bound: dim,
            term_bound: self.term_bound,
        }
    }

    /// Structural comparison after canonicalization: same term count, each
    /// frequency within `tol` (torus) and each coefficient grid within `tol`
    /// entrywise.
    pub fn approx_eq(&self, other: &ExpPoly2D, tol: f64) -> bool {
        let a = self.canonicalize(tol);
        let b = other.canonicalize(tol);
        if a.terms.len() != b.terms.len() {
            return false;
        }
        let dim = a.degree_bound.max(b.degree_bound);
        a.terms.iter().zip(b.terms.iter()).all(|(ta, tb)| {
            if ta.freq.dist(&tb.freq) > tol {
                return false;
            }
            let ca = ta.coeff.resized(dim);
            let cb = tb.coeff.resized(dim);
            (0..dim * dim).all(|i| (ca.coeffs[i] - cb.coeffs[i]).norm() <= tol)
        })
    }
}

/// `λ·f1 + (1−λ)·f2`, canonicalized with the default merge tolerance.
pub fn linear_combine(lambda: C64, f1: &ExpPoly2D, f2: &ExpPoly2D) -> ExpPoly2D {
    let dim = f1.degree_bound.max(f2.degree_bound).max(1);
    let mut terms: Vec<Term2D> = Vec::new();
    for t in &f1.terms {
        terms.push(Term2D {
            freq: t.freq,
            coeff: t.coeff.resized(dim).scaled(lambda),
        });
    }
    let mu = C64::ONE - lambda;
    for t in &f2.terms {
        terms.push(Term2D {
            freq: t.freq,
            coeff: t.coeff.resized(dim).scaled(mu),
        });
    }
    ExpPoly2D {
        terms,
        degree_bound: dim,
        term_bound: f1.term_bound + f2.term_bound,
    }
    .canonicalize(DEFAULT_MERGE_TOL)
}

// ── JSON form ────────────────────────────────────────────────────────
//
// {"D": int, "terms": [{"x": f, "y": f, "coeffs": [[[re,im], ...], ...]}]}
// The outer coeffs index is the ξ power, the inner one the η power.

#[derive(Serialize, Deserialize)]
struct TermJson {
    x: f64,
    y: f64,
    coeffs: Vec<Vec<(f64, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct ExpPoly2DJson {
    #[serde(rename = "D")]
    d: usize,
    terms: Vec<TermJson>,
}

impl Serialize for ExpPoly2D {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let d = self.degree_bound.max(1);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let g = t.coeff.resized(d);
                TermJson {
                    x: t.freq.x,
                    y: t.freq.y,
                    coeffs: (0..d)
                        .map(|a| (0..d).map(|b| (g.get(a, b).re, g.get(a, b).im)).collect())
                        .collect(),
                }
            })
            .collect();
        ExpPoly2DJson { d, terms }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExpPoly2D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = ExpPoly2DJson::deserialize(deserializer)?;
        if raw.d == 0 {
            return Err(D::Error::custom("degree bound D must be positive"));
        }
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            if t.coeffs.len() != raw.d || t.coeffs.iter().any(|r| r.len() != raw.d) {
                return Err(D::Error::custom("coefficient grid does not match D"));
            }
            let mut grid = Poly2D::zero(raw.d);
            for (a, row) in t.coeffs.iter().enumerate() {
                for (b, &(re, im)) in row.iter().enumerate() {
                    grid.set(a, b, C64::new(re, im));
                }
            }
            terms.push(Term2D {
                freq: TorusFreq::new(t.x, t.y),
                coeff: grid,
            });
        }
        let n = terms.len();
        Ok(ExpPoly2D {
            terms,
            degree_bound: raw.d,
            term_bound: n.max(1),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn one_term(x: f64, y: f64, coeff: C64) -> ExpPoly2D {
        ExpPoly2D {
            terms: vec![Term2D {
                freq: TorusFreq::new(x, y),
                coeff: Poly2D::constant(coeff, 1),
            }],
            degree_bound: 1,
            term_bound: 1,
        }
    }

    #[test]
    fn eval1d_constant_term() {
        let f = ExpPoly1D {
            terms: vec![(0.0, Poly1D::constant(C64::ONE))],
        };
        assert!((f.eval(17.0) - C64::ONE).norm() < 1e-12);
    }

    #[test]
    fn eval1d_quarter_frequency_is_i() {
        let f = ExpPoly1D {
            terms: vec![(0.25, Poly1D::constant(C64::ONE))],
        };
        assert!((f.eval(1.0) - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eval1d_polynomial_only_term() {
        let f = ExpPoly1D {
            terms: vec![(0.0, Poly1D::new(vec![C64::ZERO, C64::ONE]))],
        };
        assert!((f.eval(3.0) - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eval2d_constant() {
        let f = one_term(0.0, 0.0, C64::ONE);
        assert!((f.eval((5.0, 7.0)) - C64::ONE).norm() < 1e-12);
    }

    #[test]
    fn eval2d_half_half_at_ones() {
        let f = one_term(0.5, 0.5, C64::ONE);
        assert!((f.eval((1.0, 1.0)) - C64::ONE).norm() < 1e-12);
    }

    #[test]
    fn eval2d_half_zero_is_minus_one() {
        let f = one_term(0.5, 0.0, C64::ONE);
        assert!((f.eval((1.0, 0.0)) + C64::ONE).norm() < 1e-12);
    }

    #[test]
    fn canonicalize_cancellation() {
        let mut f = one_term(0.5, 0.5, C64::ONE);
        f.terms.push(Term2D {
            freq: TorusFreq::new(0.5, 0.5),
            coeff: Poly2D::constant(-C64::ONE, 1),
        });
        let g = f.canonicalize(1e-9);
        assert!(g.terms.is_empty());
    }

    #[test]
    fn canonicalize_sorts_terms() {
        let mut f = one_term(0.7, 0.0, C64::ONE);
        f.terms.push(Term2D {
            freq: TorusFreq::new(0.2, 0.0),
            coeff: Poly2D::constant(C64::ONE, 1),
        });
        let g = f.canonicalize(1e-9);
        assert_eq!(g.terms.len(), 2);
        assert!((g.terms[0].freq.x - 0.2).abs() < 1e-12);
        assert!((g.terms[1].freq.x - 0.7).abs() < 1e-12);
    }

    #[test]
    fn canonicalize_snaps_near_zero() {
        let f = one_term(0.5, 1e-12, C64::ONE);
        let g = f.canonicalize(1e-9);
        assert_eq!(g.terms.len(), 1);
        assert_eq!(g.terms[0].freq.y, 0.0);
        assert!((g.terms[0].freq.x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn canonicalize_merges_across_wrap() {
        let mut f = one_term(1.0 - 1e-10, 0.3, C64::ONE);
        f.terms.push(Term2D {
            freq: TorusFreq::new(1e-10, 0.3),
            coeff: Poly2D::constant(C64::ONE, 1),
        });
        let g = f.canonicalize(1e-8);
        assert_eq!(g.terms.len(), 1);
        assert_eq!(g.terms[0].freq.x, 0.0);
        assert!((g.terms[0].coeff.get(0, 0) - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn linear_combine_endpoints() {
        let f1 = one_term(0.1, 0.2, c(2.0, 0.0));
        let f2 = one_term(0.6, 0.9, c(0.0, 3.0));
        assert!(linear_combine(C64::ONE, &f1, &f2).approx_eq(&f1, 1e-9));
        assert!(linear_combine(C64::ZERO, &f1, &f2).approx_eq(&f2, 1e-9));
    }

    #[test]
    fn linear_combine_equal_inputs_is_identity() {
        let f = one_term(0.3, 0.8, c(1.0, -1.0));
        let g = linear_combine(c(0.37, 0.0), &f, &f);
        assert!(g.approx_eq(&f, 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let f = ExpPoly2D {
            terms: vec![Term2D {
                freq: TorusFreq::new(0.25, 0.75),
                coeff: Poly2D::from_grid(
                    2,
                    vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0), C64::ZERO],
                ),
            }],
            degree_bound: 2,
            term_bound: 1,
        };
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"D\":2"));
        let g: ExpPoly2D = serde_json::from_str(&s).unwrap();
        assert!(f.approx_eq(&g, 1e-12));
    }
}
