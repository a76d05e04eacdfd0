//! ZXZ and XZXZXZ factorizations, and the one-parameter gates behind them.
//!
//! Two subgroups of U(n) organize everything here:
//!
//! - `ZU(n)`: diagonal unitaries whose upper-left entry is 1;
//! - `XU(n)`: unitaries all of whose `2n` line sums equal 1.
//!
//! Every unitary `U` factors as `U = e^{i alpha} Z1 X Z2` with `Z1, Z2` in
//! `ZU(n)` and `X` in `XU(n)`. The `X` factor is produced by the scaling
//! iteration (or in closed form for n = 2), and the accumulated diagonal
//! phases are normalized so that the two `Z` factors carry a 1 in the
//! corner, the leftover corner phases joining into the scalar `e^{i alpha}`.
//! For even n the scalar and `Z1` can be traded for two more `X` factors
//! around a plain diagonal, giving the six-factor `X0 Z0 X0^-1 Z1' X Z2`
//! form whose factors alternate between the two subgroups.

use num_complex::Complex64;

use crate::error::Error;
use crate::matrix::{
    apply_diagonals, matrix_product, max_entry_distance, unitarity_residual, wrap_angle,
    DiagonalPhase, UnitaryMatrix,
};
use crate::scale::{line_sum_residual, scale, ScaleConfig, ScaleStatus};
use crate::u2;

/// `diag(1, e^{i theta})`: generator of `ZU(2)`.
pub fn phasor(theta: f64) -> UnitaryMatrix {
    DiagonalPhase::new(vec![0.0, theta])
        .expect("two finite phases")
        .matrix()
}

/// The one-parameter subgroup of `XU(2)`:
/// `negator(theta) = e^{-i theta} [[cos theta, i sin theta], [i sin theta, cos theta]]`.
///
/// Both line sums are `e^{-i theta} (cos theta + i sin theta) = 1` exactly,
/// `negator(0)` is the identity and `negator(pi/2)` the NOT gate, and
/// `negator(a) * negator(b) = negator(a + b)`.
pub fn negator(theta: f64) -> UnitaryMatrix {
    let (s, c) = theta.sin_cos();
    let w = Complex64::from_polar(1.0, -theta);
    let diag = c * w;
    let off = Complex64::new(0.0, s) * w;
    UnitaryMatrix::from_entries(2, vec![diag, off, off, diag])
        .expect("entries are finite")
}

/// Cyclic shift permutation: row `j` has its 1 in column `(j + 1) mod n`.
/// A permutation matrix has all line sums 1, so this lies in `XU(n)`; its
/// inverse is its transpose.
pub fn cyclic_shift(n: usize) -> UnitaryMatrix {
    assert!(n >= 1, "dimension must be at least 1");
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        entries[j * n + (j + 1) % n] = Complex64::new(1.0, 0.0);
    }
    UnitaryMatrix::from_entries(n, entries).expect("permutation entries are finite")
}

/// Which of the two subgroups a matrix belongs to, within a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// All line sums 1 (and unitary).
    Xu,
    /// Diagonal with upper-left entry 1 (and unitary).
    Zu,
    /// Both, i.e. the identity.
    Both,
    Neither,
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Membership::Xu => "xu",
            Membership::Zu => "zu",
            Membership::Both => "both",
            Membership::Neither => "neither",
        };
        f.write_str(s)
    }
}

/// Classify a matrix against `XU(n)` and `ZU(n)`.
pub fn membership(m: &UnitaryMatrix, tol: f64) -> Membership {
    if unitarity_residual(m) > tol {
        return Membership::Neither;
    }
    let in_xu = line_sum_residual(m) <= tol;
    let n = m.n();
    let mut in_zu = (m.get(0, 0) - Complex64::new(1.0, 0.0)).norm() <= tol;
    if in_zu {
        'off: for j in 0..n {
            for k in 0..n {
                if j != k && m.get(j, k).norm() > tol {
                    in_zu = false;
                    break 'off;
                }
            }
        }
    }
    match (in_xu, in_zu) {
        (true, true) => Membership::Both,
        (true, false) => Membership::Xu,
        (false, true) => Membership::Zu,
        (false, false) => Membership::Neither,
    }
}

/// Three-factor decomposition `U = e^{i alpha} Z1 X Z2`.
///
/// `z1` and `z2` store the diagonal phase angles; their first entries are
/// zero by construction, which is exactly the `ZU(n)` normalization.
#[derive(Clone, Debug)]
pub struct ZxzDecomposition {
    pub alpha: f64,
    pub z1: DiagonalPhase,
    pub x: UnitaryMatrix,
    pub z2: DiagonalPhase,
}

impl ZxzDecomposition {
    /// Multiply the factors back together.
    pub fn reconstruct(&self) -> UnitaryMatrix {
        apply_diagonals(&self.z1, &self.x, &self.z2)
            .expect("factor dimensions agree")
            .scaled_by_phase(self.alpha)
    }

    /// Largest entrywise deviation of the reconstruction from `u`.
    pub fn residual_against(&self, u: &UnitaryMatrix) -> f64 {
        max_entry_distance(&self.reconstruct(), u)
    }
}

/// Six-factor decomposition `U = X0 Z0 X0^-1 Z1' X Z2` for even dimension.
///
/// `x0` is the cyclic shift, so `X0^-1` is its transpose. The scalar phase
/// of the underlying ZXZ form is absorbed: `Z0` alternates phases
/// `(0, alpha, 0, alpha, ...)`, conjugation by the shift turns that into
/// `diag(e^{i alpha}, 1, ...)` pointwise multiplied against `Z1' = Z0 Z1`,
/// which restores `e^{i alpha} Z1` exactly when `n` is even.
#[derive(Clone, Debug)]
pub struct XzxzxzDecomposition {
    pub x0: UnitaryMatrix,
    pub z0: DiagonalPhase,
    pub z1p: DiagonalPhase,
    pub x: UnitaryMatrix,
    pub z2: DiagonalPhase,
}

impl XzxzxzDecomposition {
    pub fn reconstruct(&self) -> UnitaryMatrix {
        matrix_product(&[
            self.x0.clone(),
            self.z0.matrix(),
            self.x0.transpose(),
            self.z1p.matrix(),
            self.x.clone(),
            self.z2.matrix(),
        ])
        .expect("factor dimensions agree")
    }

    pub fn residual_against(&self, u: &UnitaryMatrix) -> f64 {
        max_entry_distance(&self.reconstruct(), u)
    }
}

/// Factor `U = e^{i alpha} Z1 X Z2`.
///
/// For n = 2 the closed form is used (first branch); otherwise the scaling
/// iteration produces `X` and the accumulated phases are normalized into the
/// `Z` factors. Fails with [`Error::ScalingDidNotConverge`] when the
/// iteration stops without reaching the residual target.
pub fn zxz_decompose(u: &UnitaryMatrix, cfg: &ScaleConfig) -> Result<ZxzDecomposition, Error> {
    if u.n() == 2 {
        return u2::analytic_zxz(u, u2::U2Branch::First);
    }
    let res = scale(u, cfg)?;
    if res.status != ScaleStatus::Converged {
        return Err(Error::ScalingDidNotConverge {
            result: Box::new(res),
        });
    }
    // B = L U R, so U = L^-1 B R^-1. Shifting the corner phases of L^-1 and
    // R^-1 into a scalar leaves diagonals with leading entry 1.
    let linv = res.left.inverse();
    let rinv = res.right.inverse();
    let alpha = wrap_angle(linv.phase(0) + rinv.phase(0));
    let n = u.n();
    let z1 = DiagonalPhase::new(
        (0..n)
            .map(|j| wrap_angle(linv.phase(j) - linv.phase(0)))
            .collect(),
    )
    .expect("wrapped differences are finite");
    let z2 = DiagonalPhase::new(
        (0..n)
            .map(|j| wrap_angle(rinv.phase(j) - rinv.phase(0)))
            .collect(),
    )
    .expect("wrapped differences are finite");
    Ok(ZxzDecomposition {
        alpha,
        z1,
        x: res.b,
        z2,
    })
}

/// Rewrite a ZXZ decomposition in the six-factor form. Even dimension only.
pub fn xzxzxz_from_zxz(d: &ZxzDecomposition) -> Result<XzxzxzDecomposition, Error> {
    let n = d.x.n();
    if n % 2 != 0 {
        return Err(Error::OddDimension { n });
    }
    let z0 = DiagonalPhase::new(
        (0..n)
            .map(|j| if j % 2 == 1 { d.alpha } else { 0.0 })
            .collect(),
    )
    .expect("alternating phases are finite");
    let z1p = z0.compose(&d.z1);
    Ok(XzxzxzDecomposition {
        x0: cyclic_shift(n),
        z0,
        z1p,
        x: d.x.clone(),
        z2: d.z2.clone(),
    })
}

/// Factor `U = X0 Z0 X0^-1 Z1' X Z2` directly. Even dimension only.
pub fn xzxzxz_decompose(
    u: &UnitaryMatrix,
    cfg: &ScaleConfig,
) -> Result<XzxzxzDecomposition, Error> {
    if u.n() % 2 != 0 {
        return Err(Error::OddDimension { n: u.n() });
    }
    xzxzxz_from_zxz(&zxz_decompose(u, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_unitary, RngStream};
    use crate::matrix::line_sums;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard() -> UnitaryMatrix {
        let r = 1.0 / 2.0f64.sqrt();
        UnitaryMatrix::checked(2, vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]).unwrap()
    }

    #[test]
    fn negator_is_a_subgroup_of_xu2() {
        assert!(max_entry_distance(&negator(0.0), &UnitaryMatrix::identity(2)) < 1e-15);
        let not = UnitaryMatrix::from_entries(
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(max_entry_distance(&negator(FRAC_PI_2), &not) < 1e-15);
        // quarter negator, entries (1 -+ i)/2
        let m = negator(FRAC_PI_4);
        assert!((m.get(0, 0) - c(0.5, -0.5)).norm() < 1e-15);
        assert!((m.get(0, 1) - c(0.5, 0.5)).norm() < 1e-15);
        // closure and inverses
        let prod = negator(0.35).mul(&negator(0.9)).unwrap();
        assert!(max_entry_distance(&prod, &negator(1.25)) < 1e-14);
        let inv = negator(0.35).mul(&negator(-0.35)).unwrap();
        assert!(max_entry_distance(&inv, &UnitaryMatrix::identity(2)) < 1e-14);
        for theta in [-1.2, 0.0, 0.4, FRAC_PI_2, 2.9] {
            assert_eq!(membership(&negator(theta), 1e-10), if theta == 0.0 {
                Membership::Both
            } else {
                Membership::Xu
            });
        }
    }

    #[test]
    fn phasor_and_shift_land_in_their_subgroups() {
        assert_eq!(membership(&phasor(0.8), 1e-10), Membership::Zu);
        assert_eq!(membership(&phasor(0.0), 1e-10), Membership::Both);
        for n in [2, 3, 5] {
            let x0 = cyclic_shift(n);
            assert_eq!(membership(&x0, 1e-10), Membership::Xu);
            let id = x0.mul(&x0.transpose()).unwrap();
            assert!(max_entry_distance(&id, &UnitaryMatrix::identity(n)) < 1e-15);
        }
        // row 0 carries the 1 in column 1
        assert_eq!(cyclic_shift(3).get(0, 1), c(1.0, 0.0));
        assert_eq!(cyclic_shift(3).get(2, 0), c(1.0, 0.0));
        // non-unitary matrices are in neither subgroup
        let bad = UnitaryMatrix::from_entries(
            2,
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(membership(&bad, 1e-10), Membership::Neither);
    }

    #[test]
    fn product_of_gate_family_members_can_leave_the_subgroup() {
        // negator(-pi/4) times a real rotation: line sums move off 1.
        let m1 = negator(-FRAC_PI_4);
        let h = 0.5;
        let r3 = 3.0f64.sqrt();
        let m2 = UnitaryMatrix::checked(
            2,
            vec![c(r3 * h, 0.0), c(-h, 0.0), c(h, 0.0), c(r3 * h, 0.0)],
        )
        .unwrap();
        let p = m1.mul(&m2).unwrap();
        let s = line_sums(&p);
        assert!((s.cols[0] - c((r3 + 1.0) / 2.0, 0.0)).norm() < 1e-14);
        assert!((s.rows[0] - c(r3 / 2.0, -0.5)).norm() < 1e-14);
        assert_eq!(membership(&p, 1e-10), Membership::Neither);
    }

    #[test]
    fn hadamard_zxz_factors_are_exact() {
        let h = hadamard();
        let d = zxz_decompose(&h, &ScaleConfig::default()).unwrap();
        assert!((d.alpha - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(d.z1.phase(0), 0.0);
        assert_eq!(d.z2.phase(0), 0.0);
        // both diagonal factors are diag(1, -i)
        assert!((d.z1.phase(1) + FRAC_PI_2).abs() < 1e-12);
        assert!((d.z2.phase(1) + FRAC_PI_2).abs() < 1e-12);
        // X = negator(pi/4), entries (1 -+ i)/2
        assert!(max_entry_distance(&d.x, &negator(FRAC_PI_4)) < 1e-12);
        assert!(d.residual_against(&h) < 1e-12);
        // diag(1, +i) in place of Z1 does not reproduce the matrix: the
        // corner phases pin Z1 uniquely to diag(1, -i) given alpha and X.
        let wrong = apply_diagonals(
            &DiagonalPhase::new(vec![0.0, FRAC_PI_2]).unwrap(),
            &d.x,
            &d.z2,
        )
        .unwrap()
        .scaled_by_phase(d.alpha);
        assert!(max_entry_distance(&wrong, &h) > 0.5);
    }

    #[test]
    fn hadamard_xzxzxz_factors_are_exact() {
        let h = hadamard();
        let d = xzxzxz_decompose(&h, &ScaleConfig::default()).unwrap();
        assert!(d.residual_against(&h) < 1e-12);
        // Z0 = diag(1, e^{i pi/4}), Z1' = diag(1, e^{-i pi/4})
        assert!((d.z0.phase(1) - FRAC_PI_4).abs() < 1e-12);
        assert!((d.z1p.phase(1) + FRAC_PI_4).abs() < 1e-12);
        let w = d.z1p.factor(1);
        let r = 1.0 / 2.0f64.sqrt();
        assert!((w - c(r, -r)).norm() < 1e-12);
    }

    #[test]
    fn zxz_round_trips_on_haar_samples() {
        // The potential landscape has non-global local minima and a Haar
        // draw lands in one of their basins a few percent of the time, so
        // this batch pins seeds whose twenty runs all converge; the trapped
        // case is covered by zxz_reports_an_untrappable_stall below.
        let cfg = ScaleConfig::default();
        for n in 2..=5 {
            for i in 0..5 {
                let u = sample_unitary(n, &mut RngStream::new(312 + i, n as u64));
                let d = zxz_decompose(&u, &cfg).unwrap();
                assert!(
                    d.residual_against(&u) < 1e-8,
                    "reconstruction off at n = {n}, i = {i}"
                );
                assert_eq!(d.z1.phase(0), 0.0);
                assert_eq!(d.z2.phase(0), 0.0);
                assert!(
                    line_sum_residual(&d.x) < 1e-8,
                    "x factor misses unit line sums at n = {n}"
                );
            }
        }
    }

    #[test]
    fn xzxzxz_round_trips_and_respects_parity() {
        let cfg = ScaleConfig::default();
        for n in [2usize, 4, 6] {
            let u = sample_unitary(n, &mut RngStream::new(700, n as u64));
            let d = xzxzxz_decompose(&u, &cfg).unwrap();
            assert!(d.residual_against(&u) < 1e-8, "reconstruction off at n = {n}");
            assert_eq!(membership(&d.x0, 1e-9), Membership::Xu);
            assert_eq!(d.z0.phase(0), 0.0);
            assert_eq!(d.z1p.phase(0), 0.0);
            assert!(line_sum_residual(&d.x) < 1e-8);
        }
        let odd = sample_unitary(3, &mut RngStream::new(701, 0));
        assert!(matches!(
            xzxzxz_decompose(&odd, &cfg),
            Err(Error::OddDimension { n: 3 })
        ));
    }

    #[test]
    fn zxz_reports_scaling_failures() {
        // With escape disabled a rotation start stalls, and the failure
        // surfaces as an error instead of a bogus decomposition. Dimension 3
        // keeps the iterative path in play (n = 2 would take the closed form).
        let block = {
            let (s, co) = 0.4f64.sin_cos();
            UnitaryMatrix::checked(
                3,
                vec![
                    c(co, 0.0),
                    c(-s, 0.0),
                    c(0.0, 0.0),
                    c(s, 0.0),
                    c(co, 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    c(1.0, 0.0),
                ],
            )
            .unwrap()
        };
        let cfg = ScaleConfig {
            escape_enabled: false,
            max_iter: 300,
            ..ScaleConfig::default()
        };
        assert!(matches!(
            zxz_decompose(&block, &cfg),
            Err(Error::ScalingDidNotConverge { .. })
        ));
    }

    #[test]
    fn zxz_reports_an_untrappable_stall() {
        // This Haar draw descends into a local minimum of the potential
        // (all line sums real and positive, potential about 4.9e-3) where
        // every escape probe raises the potential, so even with escape on
        // the decomposition must fail and hand back the run for diagnosis.
        let u = sample_unitary(4, &mut RngStream::new(2025, 4u64 << 32 | 16));
        let err = zxz_decompose(&u, &ScaleConfig::default()).unwrap_err();
        match err {
            Error::ScalingDidNotConverge { result } => {
                assert_eq!(result.status, ScaleStatus::StalledAtSaddle);
                let last = result.trace.final_record();
                assert!(last.psi > 1e-3, "stopped at psi = {}", last.psi);
                assert!(line_sum_residual(&result.b) > 1e-3);
            }
            other => panic!("expected a non-convergence report, got {other:?}"),
        }
    }
}
