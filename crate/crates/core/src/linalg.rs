//! Small dense complex linear-algebra helpers shared by the recovery code.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub(crate) struct Lstsq {
    pub solution: DVector<C64>,
    /// `‖A x − b‖_∞` of the returned solution.
    pub residual_inf: f64,
    /// Ratio of extreme singular values; `f64::INFINITY` when rank-deficient.
    pub condition: f64,
}

/// Least-squares solve of `A x = b` via SVD.
pub(crate) fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>) -> Lstsq {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let cutoff = smax * 1e-14;
    let solution = svd
        .solve(b, cutoff)
        .expect("SVD solve cannot fail when U and V are computed");
    let residual_inf = (a * &solution - b)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    Lstsq {
        solution,
        residual_inf,
        condition,
    }
}

/// Roots of the monic polynomial `c_0 + c_1 z + … + c_{d−1} z^{d−1} + z^d`
/// given all `d+1` coefficients (leading coefficient must be 1).
///
/// Uses the companion-matrix Schur decomposition; falls back to
/// Durand–Kerner iteration in the unlikely event the QR iteration fails to
/// converge.
pub(crate) fn monic_roots(coeffs: &[C64]) -> Vec<C64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    debug_assert!((coeffs[d] - C64::ONE).norm() < 1e-12);
    if d == 1 {
        return vec![-coeffs[0]];
    }
    let mut companion = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = C64::ONE;
    }
    for i in 0..d {
        companion[(i, d - 1)] = -coeffs[i];
    }
    match nalgebra::linalg::Schur::try_new(companion, 1e-14, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            t.diagonal().iter().copied().collect()
        }
        None => durand_kerner(coeffs),
    }
}

fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let d = coeffs.len() - 1;
    let mut z: Vec<C64> = (0..d)
        .map(|i| {
            let th = std::f64::consts::TAU * (i as f64 / d as f64 + 0.07);
            0.95 * C64::new(th.cos(), th.sin())
        })
        .collect();
    for _ in 0..2000 {
        let mut max_step = 0.0f64;
        for i in 0..d {
            let mut denom = C64::ONE;
            for j in 0..d {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = poly_eval(coeffs, z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 {
            break;
        }
    }
    z
}
