//! Univariate exponential-polynomial recovery from integer samples.
//!
//! A function `f(ξ) = Σ_j p_j(ξ)·e^{2πi x_j ξ}` with `n ≤ N` terms and
//! `deg p_j < D` satisfies, on the integers, a homogeneous linear recurrence
//! of order `Σ_j (1 + deg p_j) ≤ ND`, whose characteristic polynomial is
//! `Π_j (z − e^{2πi x_j})^{1+deg p_j}`. Recovery therefore proceeds in three
//! steps:
//!
//! 1. [`annihilator`] — find the minimal monic recurrence from a windowed
//!    (Hankel-structured) least-squares system;
//! 2. [`unit_roots`] — extract its roots, all on the unit circle for exact
//!    data, and cluster them into frequencies with multiplicities;
//! 3. [`confluent_solve`] — solve the confluent Vandermonde system for the
//!    coefficient polynomials.
//!
//! [`recover_exppoly1d`] composes the three and self-checks the result by
//! re-evaluation against every input sample.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::TAU;
use thiserror::Error;

use crate::expoly::{torus_dist, unit_phase, ExpPoly1D, Poly1D};
use crate::linalg;
use crate::C64;

/// Relative residual threshold deciding the minimal recurrence order.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Torus-distance threshold for clustering annihilator roots.
///
/// Roots of multiplicity `m` computed from coefficients carrying an error
/// `ε` spread into a cluster of radius about `ε^(1/m)`; for `m = 3` and
/// `ε ≈ 1e−12` that is around `1e−4`, so the threshold sits well above the
/// spread and well below the minimum frequency separation this crate's
/// recovery paths assume.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-3;

/// Maximum radial deviation of annihilator roots from the unit circle.
pub const RADIAL_TOL: f64 = 0.05;

/// Condition-number ceiling for the confluent Vandermonde solve.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative residual allowed when re-evaluating a recovered model against
/// the samples it came from.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PronyError {
    #[error("invalid-input: {0}")]
    InvalidInput(String),
    #[error("model-order-exceeded: no annihilator of degree <= {max_order} fits the samples")]
    ModelOrderExceeded { max_order: usize },
    #[error("off-circle-root: root at {root} is {dist:.3e} from the unit circle")]
    OffCircleRoot { root: C64, dist: f64 },
    #[error("conditioning: confluent system condition number {condition:.3e} exceeds limit")]
    IllConditioned { condition: f64 },
    #[error("model-bound-violation: {0}")]
    ModelBoundViolation(String),
    #[error(
        "reconstruction-residual: recovered model misses samples by {residual:.3e} (relative)"
    )]
    ReconstructionResidual { residual: f64 },
}

/// Monic characteristic polynomial of the minimal recurrence satisfied by a
/// sample sequence: `coeffs[0] + coeffs[1]·z + … + z^d` with
/// `Σ_i coeffs[i]·f(n+i) = 0` for every window.
#[derive(Clone, Debug)]
pub struct Annihilator {
    coeffs: Vec<C64>,
}

impl Annihilator {
    pub fn from_monic_coeffs(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

/// Frequencies with multiplicities; multiplicity `m` means the recovered
/// coefficient polynomial has degree `m − 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FreqMult {
    entries: Vec<(f64, usize)>,
}

impl FreqMult {
    pub fn new(mut entries: Vec<(f64, usize)>) -> Self {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { entries }
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total recurrence order `Σ mult`.
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn max_mult(&self) -> usize {
        self.entries.iter().map(|e| e.1).max().unwrap_or(0)
    }
}

fn sample_scale(samples: &[C64]) -> f64 {
    samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Minimal monic annihilator of the sample sequence.
///
/// Tries degrees `d = 0, 1, …, max_order` in turn; for each, solves the
/// windowed system `Σ_{i<d} c_i f(n+i) = −f(n+d)` over all windows in least
/// squares and accepts the first degree whose residual falls below
/// `rank_tol · max(scale, 1)`. Degree 0 (the constant polynomial 1) is
/// accepted exactly when the samples are numerically zero, so the zero
/// sequence recovers the empty model.
pub fn annihilator(
    samples: &[C64],
    max_order: usize,
    rank_tol: f64,
) -> Result<Annihilator, PronyError> {
    if samples.is_empty() {
        return Err(PronyError::InvalidInput("no samples given".into()));
    }
    if max_order == 0 {
        return Err(PronyError::InvalidInput(
            "max_order must be positive".into(),
        ));
    }
    let l = samples.len() - 1;
    if l < 2 * max_order {
        return Err(PronyError::InvalidInput(format!(
            "need samples on {{0,…,L}} with L >= 2·max_order; got L = {l}, max_order = {max_order}"
        )));
    }
    let scale = sample_scale(samples);
    let accept = rank_tol * scale.max(1.0);

    if scale <= accept {
        return Ok(Annihilator {
            coeffs: vec![C64::ONE],
        });
    }
    for d in 1..=max_order {
        let (ann, residual) = annihilator_at(samples, d);
        if residual <= accept {
            return Ok(ann);
        }
    }
    Err(PronyError::ModelOrderExceeded { max_order })
}

/// Monic least-squares annihilator of exactly degree `d`, with the worst
/// windowed residual it leaves.
fn annihilator_at(samples: &[C64], d: usize) -> (Annihilator, f64) {
    let l = samples.len() - 1;
    let rows = l + 1 - d;
    let mut a = DMatrix::<C64>::zeros(rows, d);
    let mut b = DVector::<C64>::zeros(rows);
    for n in 0..rows {
        for i in 0..d {
            a[(n, i)] = samples[n + i];
        }
        b[n] = -samples[n + d];
    }
    let fit = linalg::lstsq(&a, &b);
    let mut coeffs: Vec<C64> = fit.solution.iter().copied().collect();
    coeffs.push(C64::ONE);
    (Annihilator { coeffs }, fit.residual_inf)
}

/// Roots of the annihilator interpreted as torus frequencies.
///
/// All roots must lie within radial distance [`RADIAL_TOL`] of the unit
/// circle; a farther root signals noisy or inconsistent input. Roots whose
/// torus positions fall within `cluster_tol` of each other merge into one
/// frequency whose multiplicity is the cluster size and whose position is
/// the circular mean of the cluster.
pub fn unit_roots(a: &Annihilator, cluster_tol: f64) -> Result<FreqMult, PronyError> {
    let roots = linalg::monic_roots(a.coeffs());
    for &r in &roots {
        let dist = (r.norm() - 1.0).abs();
        if dist > RADIAL_TOL {
            return Err(PronyError::OffCircleRoot { root: r, dist });
        }
    }
    let xs: Vec<f64> = roots
        .iter()
        .map(|r| crate::expoly::reduce_mod1(r.arg() / TAU))
        .collect();
    let entries = crate::expoly::cluster_circle(&xs, cluster_tol)
        .into_iter()
        .map(|cl| {
            let m = cl.len();
            let mut x = crate::expoly::circular_mean(&cl);
            if torus_dist(x, 0.0) < 1e-12 {
                x = 0.0;
            }
            (x, m)
        })
        .collect();
    Ok(FreqMult::new(entries))
}

/// Solve for the coefficient polynomials given frequencies and
/// multiplicities: least-squares fit of `f(n) = Σ_j p_j(n)·e^{2πi x_j n}`
/// with `deg p_j = mult_j − 1`. Returns the model and the absolute residual
/// of the fit.
///
/// Columns are scaled by `(n/L)^σ` before the solve to keep the monomial
/// basis tame; the condition number of the scaled system is still guarded
/// against [`CONDITION_LIMIT`].
pub fn confluent_solve(samples: &[C64], fm: &FreqMult) -> Result<(ExpPoly1D, f64), PronyError> {
    let l = samples.len().saturating_sub(1);
    let total = fm.total();
    if samples.len() < total {
        return Err(PronyError::InvalidInput(format!(
            "need at least {total} samples for {total} unknowns, got {}",
            samples.len()
        )));
    }
    if total == 0 {
        return Ok((ExpPoly1D::empty(), 0.0));
    }
    let width = (l.max(1)) as f64;
    let mut a = DMatrix::<C64>::zeros(samples.len(), total);
    for n in 0..samples.len() {
        let mut col = 0;
        for &(x, mult) in fm.entries() {
            let phase = unit_phase(x * n as f64);
            let mut pw = C64::ONE;
            for _ in 0..mult {
                a[(n, col)] = phase * pw;
                pw *= C64::new(n as f64 / width, 0.0);
                col += 1;
            }
        }
    }
    let b = DVector::from_column_slice(samples);
    let fit = linalg::lstsq(&a, &b);
    if fit.condition > CONDITION_LIMIT {
        return Err(PronyError::IllConditioned {
            condition: fit.condition,
        });
    }
    let mut terms = Vec::with_capacity(fm.len());
    let mut col = 0;
    for &(x, mult) in fm.entries() {
        let mut coeffs = Vec::with_capacity(mult);
        let mut scale = 1.0;
        for _ in 0..mult {
            coeffs.push(fit.solution[col] / scale);
            scale *= width;
            col += 1;
        }
        terms.push((x, Poly1D::new(coeffs)));
    }
    Ok((ExpPoly1D { terms }, fit.residual_inf))
}

/// Joint Gauss–Newton polish of the frequency estimates: each pass solves
/// one real-ified least-squares problem for every polynomial coefficient
/// together with one real shift per frequency. Root extraction leaves
/// multiplicity-m estimates with errors around the cluster radius
/// `ε^(1/m)`; the joint solve pushes them back toward machine precision,
/// which the coefficient solve needs. A shift is only kept when it does
/// not worsen the fit.
fn refine_frequencies(samples: &[C64], fm: &FreqMult, passes: usize) -> FreqMult {
    let mut entries: Vec<(f64, usize)> = fm.entries().to_vec();
    let total: usize = entries.iter().map(|e| e.1).sum();
    if total == 0 {
        return FreqMult::new(entries);
    }
    let len = samples.len();
    let width = (len - 1).max(1) as f64;
    let unknowns = 2 * total + entries.len();
    if 2 * len < unknowns {
        return FreqMult::new(entries);
    }
    let residual_of = |xs: &[(f64, usize)]| -> Option<(ExpPoly1D, f64)> {
        confluent_solve(samples, &FreqMult::new(xs.to_vec())).ok()
    };
    let Some((mut model, mut best_res)) = residual_of(&entries) else {
        return FreqMult::new(entries);
    };
    let scale = sample_scale(samples).max(1.0);
    for _ in 0..passes {
        if best_res < 1e-13 * scale {
            break;
        }
        let mut a = nalgebra::DMatrix::<f64>::zeros(2 * len, unknowns);
        let mut b = nalgebra::DVector::<f64>::zeros(2 * len);
        for (n, &v) in samples.iter().enumerate() {
            b[2 * n] = v.re;
            b[2 * n + 1] = v.im;
            let nf = n as f64;
            let mut col = 0;
            for (j, &(x, mult)) in entries.iter().enumerate() {
                let phase = unit_phase(x * nf);
                let mut pw = 1.0f64;
                for _ in 0..mult {
                    let z = phase * pw;
                    a[(2 * n, col)] = z.re;
                    a[(2 * n + 1, col)] = z.im;
                    a[(2 * n, col + 1)] = -z.im;
                    a[(2 * n + 1, col + 1)] = z.re;
                    pw *= nf / width;
                    col += 2;
                }
                let p = model
                    .term_at(x, 1e-9)
                    .cloned()
                    .unwrap_or_else(|| Poly1D::constant(C64::ZERO));
                let jx = C64::new(0.0, TAU * nf) * p.eval(nf) * phase;
                a[(2 * n, 2 * total + j)] = jx.re;
                a[(2 * n + 1, 2 * total + j)] = jx.im;
            }
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let Ok(sol) = svd.solve(&b, smax * 1e-14) else {
            break;
        };
        let mut candidate = entries.clone();
        let mut largest = 0.0f64;
        for (j, e) in candidate.iter_mut().enumerate() {
            let dx = sol[2 * total + j];
            if dx.abs() < 1e-4 {
                e.0 = crate::expoly::reduce_mod1(e.0 + dx);
                largest = largest.max(dx.abs());
            }
        }
        match residual_of(&candidate) {
            Some((m, r)) if r <= best_res => {
                entries = candidate;
                model = m;
                best_res = r;
            }
            _ => break,
        }
        if largest < 1e-13 {
            break;
        }
    }
    FreqMult::new(entries)
}

/// Tolerances of the univariate recovery pipeline. The defaults suit exact
/// samples; recoveries running on the output of earlier recoveries (whose
/// values carry that layer's noise) relax them.
#[derive(Clone, Copy, Debug)]
pub struct RecoveryTolerances {
    /// Relative residual accepting an annihilator degree.
    pub rank_tol: f64,
    /// Relative residual allowed by the final re-evaluation self-check.
    pub reconstruction_tol: f64,
}

impl Default for RecoveryTolerances {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            reconstruction_tol: RECONSTRUCTION_TOL,
        }
    }
}

impl RecoveryTolerances {
    /// Loosened thresholds for second-layer recoveries inside the staged
    /// bivariate procedure.
    pub fn relaxed() -> Self {
        Self {
            rank_tol: 1e-7,
            reconstruction_tol: 1e-6,
        }
    }
}

/// Full univariate recovery from samples on `{0,…,2ND}`.
///
/// Composition of [`annihilator`], [`unit_roots`] and [`confluent_solve`],
/// with a frequency polish in between, followed by bound checks (at most
/// `n_bound` frequencies, multiplicities at most `d_bound`) and a
/// re-evaluation self-check at [`RECONSTRUCTION_TOL`].
pub fn recover_exppoly1d(
    samples: &[C64],
    n_bound: usize,
    d_bound: usize,
) -> Result<ExpPoly1D, PronyError> {
    recover_exppoly1d_with_tol(samples, n_bound, d_bound, &RecoveryTolerances::default())
}

/// [`recover_exppoly1d`] with caller-chosen tolerances.
pub fn recover_exppoly1d_with_tol(
    samples: &[C64],
    n_bound: usize,
    d_bound: usize,
    tol: &RecoveryTolerances,
) -> Result<ExpPoly1D, PronyError> {
    if n_bound == 0 || d_bound == 0 {
        return Err(PronyError::InvalidInput(
            "term and degree bounds must be positive".into(),
        ));
    }
    let expected = 2 * n_bound * d_bound + 1;
    if samples.len() < expected {
        return Err(PronyError::InvalidInput(format!(
            "need samples on at least {{0,…,{}}}, got {} values",
            expected - 1,
            samples.len()
        )));
    }
    let scale = sample_scale(samples).max(1.0);
    let accept = tol.rank_tol * scale;
    if sample_scale(samples) <= accept {
        return Ok(ExpPoly1D::empty());
    }
    // Walk the candidate recurrence orders, cheapest first, and return the
    // first whose whole downstream pipeline succeeds. A sequence can sit
    // numerically close to a lower-order model (near-cancelling
    // coefficients), in which case the minimal acceptable order yields a
    // cluster structure that violates the bounds while the next order is
    // clean; trying the next candidate instead of giving up makes order
    // selection robust against such borderline cases.
    let max_order = n_bound * d_bound;
    let mut last_err = PronyError::ModelOrderExceeded { max_order };
    for d in 1..=max_order {
        let (ann, residual) = annihilator_at(samples, d);
        if residual > accept {
            continue;
        }
        match finish_recovery(samples, &ann, n_bound, d_bound, tol, scale) {
            Ok(model) => return Ok(model),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn finish_recovery(
    samples: &[C64],
    ann: &Annihilator,
    n_bound: usize,
    d_bound: usize,
    tol: &RecoveryTolerances,
    scale: f64,
) -> Result<ExpPoly1D, PronyError> {
    let fm = unit_roots(ann, DEFAULT_CLUSTER_TOL)?;
    let fm = if fm.max_mult() > 1 {
        refine_frequencies(samples, &fm, 8)
    } else {
        fm
    };
    if fm.len() > n_bound {
        return Err(PronyError::ModelBoundViolation(format!(
            "recovered {} frequencies, bound is {n_bound}",
            fm.len()
        )));
    }
    if fm.max_mult() > d_bound {
        return Err(PronyError::ModelBoundViolation(format!(
            "recovered coefficient degree {} >= bound {d_bound}",
            fm.max_mult() - 1,
        )));
    }
    let (model, _) = confluent_solve(samples, &fm)?;
    let err = samples
        .iter()
        .enumerate()
        .map(|(n, &v)| (model.eval(n as f64) - v).norm())
        .fold(0.0, f64::max)
        / scale;
    if err > tol.reconstruction_tol {
        return Err(PronyError::ReconstructionResidual { residual: err });
    }
    // drop numerically dead terms so the model satisfies its invariants
    let terms = model
        .terms
        .into_iter()
        .filter(|(_, p)| p.sup_norm() > 1e-12 * scale)
        .collect();
    Ok(ExpPoly1D { terms })
}
