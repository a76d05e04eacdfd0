//! First-order structure of the potential over the diagonal-phase torus.
//!
//! Fix a unitary `A` and consider
//! `g(lambda, rho) = Psi(diag(e^{i lambda}) A diag(e^{i rho}))` as a function
//! of the `2n` phase angles. Writing the row sums as `r_j = s_j + i t_j`,
//! the column sums as `c_j = d_j + i e_j` and the matrix sum as
//! `m = p + i q`, the derivative of `g` at the origin is
//!
//! ```text
//! dg/dlambda_j = 2 (p t_j - q s_j),    dg/drho_j = 2 (p e_j - q d_j).
//! ```
//!
//! Each component is twice the cross product of a line sum with the matrix
//! sum, so the gradient vanishes exactly when every nonzero line sum is
//! collinear with `m` (in either direction), or when `m = 0`. Those are the
//! starts the scaling loop has to perturb before iterating.

use crate::matrix::{apply_diagonals, line_sums, potential, DiagonalPhase, UnitaryMatrix};

/// Step used by the finite-difference comparison.
pub const GRADCHECK_H: f64 = 1e-6;

/// Relative tolerance of a passing gradient check.
pub const GRADCHECK_REL_TOL: f64 = 1e-5;

/// Components smaller than this guard are compared absolutely: the scaled
/// deviation divides by `max(|analytic|, GRADCHECK_ZERO_GUARD)`, so near-zero
/// components pass when the absolute deviation is below
/// `GRADCHECK_REL_TOL * GRADCHECK_ZERO_GUARD = 1e-8`.
pub const GRADCHECK_ZERO_GUARD: f64 = 1e-3;

/// Gradient of the potential with respect to the left and right phase
/// angles, evaluated at zero phases.
#[derive(Clone, Debug)]
pub struct LandscapeGradient {
    pub dlambda: Vec<f64>,
    pub drho: Vec<f64>,
}

impl LandscapeGradient {
    pub fn max_abs(&self) -> f64 {
        self.dlambda
            .iter()
            .chain(self.drho.iter())
            .fold(0.0f64, |acc, &g| acc.max(g.abs()))
    }
}

/// Analytic gradient from the line sums.
pub fn gradient(a: &UnitaryMatrix) -> LandscapeGradient {
    let s = line_sums(a);
    let m = s.matrix_sum;
    let cross = |z: num_complex::Complex64| 2.0 * (m.re * z.im - m.im * z.re);
    LandscapeGradient {
        dlambda: s.rows.iter().map(|&r| cross(r)).collect(),
        drho: s.cols.iter().map(|&c| cross(c)).collect(),
    }
}

/// Central finite differences of the potential over the `2n` phase angles.
pub fn finite_difference_gradient(a: &UnitaryMatrix, h: f64) -> LandscapeGradient {
    assert!(h > 0.0 && h.is_finite(), "step must be positive");
    let n = a.n();
    let zero = DiagonalPhase::zero(n);
    let eval_left = |j: usize, d: f64| {
        let l = DiagonalPhase::single(n, j, d);
        potential(&apply_diagonals(&l, a, &zero).expect("dimensions match"))
    };
    let eval_right = |j: usize, d: f64| {
        let r = DiagonalPhase::single(n, j, d);
        potential(&apply_diagonals(&zero, a, &r).expect("dimensions match"))
    };
    let dlambda = (0..n)
        .map(|j| (eval_left(j, h) - eval_left(j, -h)) / (2.0 * h))
        .collect();
    let drho = (0..n)
        .map(|j| (eval_right(j, h) - eval_right(j, -h)) / (2.0 * h))
        .collect();
    LandscapeGradient { dlambda, drho }
}

/// Outcome of comparing the analytic gradient against finite differences.
#[derive(Clone, Copy, Debug)]
pub struct GradCheckReport {
    /// Largest absolute deviation over all `2n` components.
    pub max_abs_deviation: f64,
    /// Largest deviation scaled by `max(|analytic component|, zero guard)`.
    pub max_scaled_deviation: f64,
    pub pass: bool,
}

/// Compare the analytic gradient with central differences of step `h`.
pub fn gradcheck(a: &UnitaryMatrix, h: f64) -> GradCheckReport {
    let analytic = gradient(a);
    let numeric = finite_difference_gradient(a, h);
    let mut max_abs = 0.0f64;
    let mut max_scaled = 0.0f64;
    let pairs = analytic
        .dlambda
        .iter()
        .zip(&numeric.dlambda)
        .chain(analytic.drho.iter().zip(&numeric.drho));
    for (&g, &f) in pairs {
        let dev = (g - f).abs();
        max_abs = max_abs.max(dev);
        max_scaled = max_scaled.max(dev / g.abs().max(GRADCHECK_ZERO_GUARD));
    }
    GradCheckReport {
        max_abs_deviation: max_abs,
        max_scaled_deviation: max_scaled,
        pass: max_scaled < GRADCHECK_REL_TOL,
    }
}

/// Coarse classification of a stationary point of the potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationaryClass {
    /// The gradient does not vanish within the tolerance.
    NotStationary,
    /// The matrix sum vanishes: the global maximum `Psi = n^2`.
    GlobalMaxZeroSum,
    /// Nonzero matrix sum with all nonzero line sums on its axis.
    ConstantArgumentLineSums,
}

pub fn classify_stationary(a: &UnitaryMatrix, tol: f64) -> StationaryClass {
    let g = gradient(a);
    if g.max_abs() > tol {
        return StationaryClass::NotStationary;
    }
    if line_sums(a).matrix_sum.norm() < tol {
        StationaryClass::GlobalMaxZeroSum
    } else {
        StationaryClass::ConstantArgumentLineSums
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_unitary, RngStream};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Worked example: row sums (-i/2, (1-i)/2, 3/2) and matrix sum 2 - i
    /// give dg/dlambda_1 = 2 (2 * (-1/2) - (-1) * 0) = -2.
    #[test]
    fn gradient_matches_hand_computation() {
        let q = 0.25;
        let a = UnitaryMatrix::checked(
            3,
            vec![
                c(q, 0.0),
                c(q, -3.0 * q),
                c(-2.0 * q, q),
                c(-q, -3.0 * q),
                c(2.0 * q, 0.0),
                c(q, q),
                c(2.0 * q, q),
                c(q, -q),
                c(3.0 * q, 0.0),
            ],
        )
        .unwrap();
        let g = gradient(&a);
        assert!((g.dlambda[0] + 2.0).abs() < 1e-12);
        // second row sum (1 - i)/2: 2 * (2 * (-1/2) - (-1) * (1/2)) = -1
        assert!((g.dlambda[1] + 1.0).abs() < 1e-12);
        // third row sum 3/2 real: 2 * (0 - (-1) * 3/2) = 3
        assert!((g.dlambda[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_axis_aligned_starts() {
        assert_eq!(
            classify_stationary(&UnitaryMatrix::identity(3), 1e-10),
            StationaryClass::ConstantArgumentLineSums
        );
        let d = UnitaryMatrix::from_entries(
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        )
        .unwrap();
        // line sums 1 and -1 are collinear with the (zero) matrix sum
        assert_eq!(
            classify_stationary(&d, 1e-10),
            StationaryClass::GlobalMaxZeroSum
        );
        let u = sample_unitary(4, &mut RngStream::new(21, 0));
        assert_eq!(classify_stationary(&u, 1e-10), StationaryClass::NotStationary);
    }

    #[test]
    fn finite_differences_confirm_the_analytic_gradient() {
        for i in 0..20 {
            let n = 2 + (i % 4) as usize;
            let u = sample_unitary(n, &mut RngStream::new(100 + i, 0));
            let report = gradcheck(&u, GRADCHECK_H);
            assert!(
                report.pass,
                "gradcheck failed: scaled deviation {}",
                report.max_scaled_deviation
            );
        }
    }

    #[test]
    fn gradcheck_detects_a_wrong_gradient() {
        // Sanity for the checker itself: against a corrupted analytic value
        // the scaled deviation must blow past the tolerance.
        let u = sample_unitary(3, &mut RngStream::new(55, 0));
        let mut g = gradient(&u);
        g.dlambda[0] += 1.0;
        let f = finite_difference_gradient(&u, GRADCHECK_H);
        let dev = (g.dlambda[0] - f.dlambda[0]).abs();
        assert!(dev / g.dlambda[0].abs().max(GRADCHECK_ZERO_GUARD) > GRADCHECK_REL_TOL);
    }
}
