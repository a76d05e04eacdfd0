//! Closed-form results for 2x2 unitaries.
//!
//! Every `U` in U(2) can be written as
//!
//! ```text
//! U(phi, theta, psi, chi) = e^{i theta} [  cos(phi) e^{i psi}   sin(phi) e^{i chi} ]
//!                                       [ -sin(phi) e^{-i chi}  cos(phi) e^{-i psi} ]
//! ```
//!
//! with `phi` in `[0, pi/2]`. Multiplying by diagonal phase matrices on
//! either side changes only `(theta, psi, chi)`, so the double coset of `U`
//! is labeled by `phi` alone, and the whole scaling trajectory of `U` stays
//! inside that coset. Its two scaled fixed points are `B = negator(phi)` and
//! `B' = negator(-phi)`; which one a trajectory reaches is decided by the
//! sign of `wrap(chi - psi)`, and the asymptotic per-step contraction of the
//! potential near either is `cos(2 phi)^4`.

use num_complex::Complex64;

use crate::error::Error;
use crate::matrix::{unitarity_residual, wrap_angle, DiagonalPhase, UnitaryMatrix};
use crate::zxz::{negator, ZxzDecomposition};

/// Unitarity tolerance applied to inputs of the closed-form routines.
pub const U2_UNITARITY_TOL: f64 = 1e-8;

/// Below this distance from the boundary values `phi = 0, pi/2` a coset is
/// treated as degenerate (diagonal or antidiagonal matrices).
pub const DEGENERATE_PHI_TOL: f64 = 1e-9;

/// Within this distance of `chi - psi = 0` or `pi` a start counts as lying
/// on the separatrix between the two attractor basins.
pub const SEPARATRIX_TOL: f64 = 1e-9;

/// Angles below this are clamped when a parameter is undetermined (the
/// column phase of a diagonal matrix, say); purely a canonicalization.
const PARAM_CLAMP_TOL: f64 = 1e-12;

/// Canonical parameters of a 2x2 unitary.
///
/// `phi` lies in `[0, pi/2]` and `theta` in `(-pi/2, pi/2]`; `psi` and `chi`
/// are wrapped to `(-pi, pi]`. When `phi` is at a boundary the undetermined
/// angle among `psi, chi` is set to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct U2Params {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub chi: f64,
}

/// Which sign of the `X` angle an analytic decomposition uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum U2Branch {
    /// `X = negator(phi)`.
    First,
    /// `X = negator(-phi)`.
    Second,
}

/// Scaled fixed point a 2x2 trajectory converges to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attractor {
    /// `negator(phi)`.
    B,
    /// `negator(-phi)`.
    BPrime,
    /// The start sits on the boundary between the two basins and flows to a
    /// saddle instead.
    Separatrix,
    /// `phi` is at a boundary value: the coset consists of diagonal or
    /// antidiagonal matrices and the distinction between `B` and `B'`
    /// collapses.
    DegenerateCoset,
}

impl std::fmt::Display for Attractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Attractor::B => "b",
            Attractor::BPrime => "b_prime",
            Attractor::Separatrix => "separatrix",
            Attractor::DegenerateCoset => "degenerate_coset",
        };
        f.write_str(s)
    }
}

fn require_u2(u: &UnitaryMatrix) -> Result<(), Error> {
    if u.n() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            got: u.n(),
        });
    }
    let residual = unitarity_residual(u);
    if residual > U2_UNITARITY_TOL {
        return Err(Error::NonUnitaryInput {
            residual,
            tol: U2_UNITARITY_TOL,
        });
    }
    Ok(())
}

/// Extract the canonical parameters of a 2x2 unitary.
pub fn params(u: &UnitaryMatrix) -> Result<U2Params, Error> {
    require_u2(u)?;
    let a = u.get(0, 0);
    let b = u.get(0, 1);
    let phi = b.norm().atan2(a.norm());
    let det = u.get(0, 0) * u.get(1, 1) - u.get(0, 1) * u.get(1, 0);
    // det = e^{2 i theta}; halving arg(det) in (-pi, pi] lands theta in
    // (-pi/2, pi/2], and any pi shift this forces relative to the "natural"
    // overall phase is absorbed by psi and chi below.
    let theta = 0.5 * det.arg();
    let psi = if std::f64::consts::FRAC_PI_2 - phi > PARAM_CLAMP_TOL {
        wrap_angle(a.arg() - theta)
    } else {
        0.0
    };
    let chi = if phi > PARAM_CLAMP_TOL {
        wrap_angle(b.arg() - theta)
    } else {
        0.0
    };
    Ok(U2Params {
        phi,
        theta,
        psi,
        chi,
    })
}

/// Build the matrix `U(phi, theta, psi, chi)`.
pub fn from_params(p: &U2Params) -> UnitaryMatrix {
    let (s, c) = p.phi.sin_cos();
    let g = Complex64::from_polar(1.0, p.theta);
    let epsi = Complex64::from_polar(1.0, p.psi);
    let echi = Complex64::from_polar(1.0, p.chi);
    UnitaryMatrix::from_entries(
        2,
        vec![
            g * c * epsi,
            g * s * echi,
            -g * s * echi.conj(),
            g * c * epsi.conj(),
        ],
    )
    .expect("entries built from finite angles")
}

/// Closed-form ZXZ decomposition of a 2x2 unitary.
///
/// With `s = +1` for the first branch and `s = -1` for the second,
///
/// ```text
/// X  = negator(s phi)
/// alpha = wrap(theta + psi + s phi)
/// Z1 = diag(1, e^{i wrap(s pi/2 - psi - chi)})
/// Z2 = diag(1, e^{i wrap(-s pi/2 - psi + chi)})
/// ```
///
/// reproduces `U` exactly; both branches are valid decompositions.
pub fn analytic_zxz(u: &UnitaryMatrix, branch: U2Branch) -> Result<ZxzDecomposition, Error> {
    let p = params(u)?;
    let s = match branch {
        U2Branch::First => 1.0,
        U2Branch::Second => -1.0,
    };
    let half = s * std::f64::consts::FRAC_PI_2;
    let alpha = wrap_angle(p.theta + p.psi + s * p.phi);
    let z1 = DiagonalPhase::new(vec![0.0, wrap_angle(half - p.psi - p.chi)])
        .expect("finite angles");
    let z2 = DiagonalPhase::new(vec![0.0, wrap_angle(-half - p.psi + p.chi)])
        .expect("finite angles");
    Ok(ZxzDecomposition {
        alpha,
        z1,
        x: negator(s * p.phi),
        z2,
    })
}

/// Predict where the scaling iteration sends a 2x2 unitary.
///
/// The basin indicator is `d = wrap(chi - psi)`: trajectories with
/// `d` in `(0, pi)` converge to `B = negator(phi)`, those with `d` in
/// `(-pi, 0)` to `B' = negator(-phi)`. `d` within [`SEPARATRIX_TOL`] of
/// `0` or `pi` lies on the separatrix, and `phi` within
/// [`DEGENERATE_PHI_TOL`] of a boundary makes the coset degenerate.
pub fn predict_attractor(u: &UnitaryMatrix) -> Result<Attractor, Error> {
    let p = params(u)?;
    if p.phi < DEGENERATE_PHI_TOL || std::f64::consts::FRAC_PI_2 - p.phi < DEGENERATE_PHI_TOL {
        return Ok(Attractor::DegenerateCoset);
    }
    let d = wrap_angle(p.chi - p.psi);
    if d.abs() < SEPARATRIX_TOL || (std::f64::consts::PI - d.abs()) < SEPARATRIX_TOL {
        return Ok(Attractor::Separatrix);
    }
    Ok(if d > 0.0 { Attractor::B } else { Attractor::BPrime })
}

/// Asymptotic per-step contraction factor of the potential near the
/// attractors of the coset labeled by `phi`: `cos(2 phi)^4`.
pub fn convergence_ratio(phi: f64) -> f64 {
    (2.0 * phi).cos().powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_unitary, RngStream};
    use crate::matrix::{line_sums, max_entry_distance, potential};
    use crate::scale::{scale, ScaleConfig, ScaleStatus};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard() -> UnitaryMatrix {
        let r = 1.0 / 2.0f64.sqrt();
        UnitaryMatrix::checked(2, vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]).unwrap()
    }

    #[test]
    fn hadamard_parameters() {
        let p = params(&hadamard()).unwrap();
        assert!((p.phi - FRAC_PI_4).abs() < 1e-12);
        assert!((p.theta - FRAC_PI_2).abs() < 1e-12);
        assert!((p.psi + FRAC_PI_2).abs() < 1e-12);
        assert!((p.chi + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn params_round_trip_through_the_matrix() {
        for i in 0..50 {
            let u = sample_unitary(2, &mut RngStream::new(500 + i, 0));
            let p = params(&u).unwrap();
            assert!(p.phi >= 0.0 && p.phi <= FRAC_PI_2 + 1e-12);
            assert!(p.theta > -FRAC_PI_2 - 1e-12 && p.theta <= FRAC_PI_2 + 1e-12);
            let rebuilt = from_params(&p);
            assert!(
                max_entry_distance(&rebuilt, &u) < 1e-10,
                "round trip failed at i = {i}"
            );
        }
    }

    #[test]
    fn params_reject_wrong_inputs() {
        let u3 = UnitaryMatrix::identity(3);
        assert!(matches!(
            params(&u3),
            Err(Error::WrongDimension { expected: 2, got: 3 })
        ));
        let bad = UnitaryMatrix::from_entries(
            2,
            vec![c(1.0, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(params(&bad), Err(Error::NonUnitaryInput { .. })));
    }

    #[test]
    fn degenerate_cosets_clamp_the_free_angle() {
        let p = params(&phasor_like(0.9)).unwrap();
        assert!(p.phi < 1e-12);
        assert_eq!(p.chi, 0.0);
        let anti = UnitaryMatrix::checked(
            2,
            vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let pa = params(&anti).unwrap();
        assert!((pa.phi - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(pa.psi, 0.0);
    }

    fn phasor_like(t: f64) -> UnitaryMatrix {
        UnitaryMatrix::checked(
            2,
            vec![
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, t),
            ],
        )
        .unwrap()
    }

    #[test]
    fn both_branches_reconstruct() {
        for i in 0..30 {
            let u = sample_unitary(2, &mut RngStream::new(800 + i, 0));
            for branch in [U2Branch::First, U2Branch::Second] {
                let d = analytic_zxz(&u, branch).unwrap();
                assert!(
                    d.residual_against(&u) < 1e-12,
                    "branch {branch:?} failed at i = {i}"
                );
                assert_eq!(d.z1.phase(0), 0.0);
                assert_eq!(d.z2.phase(0), 0.0);
            }
        }
    }

    #[test]
    fn attractor_prediction_matches_the_iteration() {
        let cfg = ScaleConfig::default();
        let mut checked = 0;
        for i in 0..80 {
            let u = sample_unitary(2, &mut RngStream::new(900 + i, 0));
            let p = params(&u).unwrap();
            let d = wrap_angle(p.chi - p.psi);
            // stay clearly off the separatrix and away from degenerate cosets
            if p.phi < 1e-3 || FRAC_PI_2 - p.phi < 1e-3 {
                continue;
            }
            if d.abs() < 1e-3 || PI - d.abs() < 1e-3 {
                continue;
            }
            let predicted = predict_attractor(&u).unwrap();
            let res = scale(&u, &cfg).unwrap();
            assert_eq!(res.status, ScaleStatus::Converged);
            let target = match predicted {
                Attractor::B => negator(p.phi),
                Attractor::BPrime => negator(-p.phi),
                other => panic!("unexpected prediction {other:?} for a generic draw"),
            };
            assert!(
                max_entry_distance(&res.b, &target) < 1e-6,
                "endpoint missed prediction at i = {i}"
            );
            checked += 1;
        }
        assert!(checked > 40, "too few generic draws: {checked}");
    }

    #[test]
    fn separatrix_starts_stall_without_escape() {
        // chi = psi puts the start on the basin boundary, so the bare
        // iteration flows into the saddle. At small phi the unstable mode
        // amplifies rounding noise too slowly to matter and the stall window
        // fills while the iterate still sits at the saddle value 4 sin^2 phi.
        let p = U2Params {
            phi: 0.3,
            theta: 0.0,
            psi: -0.8,
            chi: -0.8,
        };
        let u = from_params(&p);
        assert_eq!(predict_attractor(&u).unwrap(), Attractor::Separatrix);
        let cfg = ScaleConfig {
            escape_enabled: false,
            ..ScaleConfig::default()
        };
        let res = scale(&u, &cfg).unwrap();
        assert_eq!(res.status, ScaleStatus::StalledAtSaddle);
        let saddle = 4.0 * 0.3f64.sin().powi(2);
        assert!((res.trace.final_record().psi - saddle).abs() < 1e-9);
    }

    #[test]
    fn strongly_unstable_separatrix_start_drifts_off_in_rounding() {
        // At larger phi the saddle repels hard enough that last-bit rounding
        // noise grows past the stall window; the run visits the saddle and
        // then converges to one of the attractors anyway.
        let p = U2Params {
            phi: 0.5,
            theta: 0.2,
            psi: 0.3,
            chi: 0.3,
        };
        let u = from_params(&p);
        assert_eq!(predict_attractor(&u).unwrap(), Attractor::Separatrix);
        let cfg = ScaleConfig {
            escape_enabled: false,
            ..ScaleConfig::default()
        };
        let res = scale(&u, &cfg).unwrap();
        assert_eq!(res.status, ScaleStatus::Converged);
        let saddle = 4.0 * 0.5f64.sin().powi(2);
        let closest = res
            .trace
            .records
            .iter()
            .map(|r| (r.psi - saddle).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-9, "never came near the saddle: {closest:.3e}");
    }

    #[test]
    fn twelve_axis_tuples_split_by_potential() {
        // For a fixed coset angle, twelve parameter tuples make all four
        // line sums real: four at potential 4 sin^2(phi) (rotation type),
        // four at 4 cos^2(phi) (reflection type) and four at 0 (the signed
        // attractors).
        let phi = 0.7f64;
        let (s, co) = phi.sin_cos();
        let tuples = [
            (0.0, 0.0, 0.0),
            (0.0, PI, 0.0),
            (FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2),
            (FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2),
            (FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2),
            (FRAC_PI_2, FRAC_PI_2, FRAC_PI_2),
            (PI, 0.0, 0.0),
            (PI, PI, 0.0),
            (-phi, 0.0, FRAC_PI_2),
            (-phi, PI, -FRAC_PI_2),
            (phi, 0.0, -FRAC_PI_2),
            (phi, PI, FRAC_PI_2),
        ];
        let mut at_sin = 0;
        let mut at_cos = 0;
        let mut at_zero = 0;
        for (theta, psi, chi) in tuples {
            let u = from_params(&U2Params {
                phi,
                theta,
                psi,
                chi,
            });
            let sums = line_sums(&u);
            for z in sums.rows.iter().chain(sums.cols.iter()) {
                assert!(z.im.abs() < 1e-12, "line sum {z} is not real");
            }
            let psi_val = potential(&u);
            if (psi_val - 4.0 * s * s).abs() < 1e-10 {
                at_sin += 1;
            } else if (psi_val - 4.0 * co * co).abs() < 1e-10 {
                at_cos += 1;
            } else if psi_val.abs() < 1e-10 {
                at_zero += 1;
            } else {
                panic!("unexpected potential {psi_val}");
            }
        }
        assert_eq!((at_sin, at_cos, at_zero), (4, 4, 4));
    }

    #[test]
    fn contraction_ratio_shows_up_in_the_tail() {
        // One coset probed in depth; the acceptance suite sweeps more.
        let phi = std::f64::consts::FRAC_PI_8;
        let u = from_params(&U2Params {
            phi,
            theta: 0.3,
            psi: 0.2,
            chi: -0.9,
        });
        let cfg = ScaleConfig {
            tol_residual: 1e-13,
            ..ScaleConfig::default()
        };
        let res = scale(&u, &cfg).unwrap();
        assert_eq!(res.status, ScaleStatus::Converged);
        let ratio = tail_ratio(&res.trace.records.iter().map(|r| r.psi).collect::<Vec<_>>());
        let expected = convergence_ratio(phi);
        assert!(
            (ratio - expected).abs() < 0.02 * expected,
            "tail ratio {ratio} vs expected {expected}"
        );
    }

    /// Geometric mean of consecutive potential ratios over the window where
    /// the potential sits between 1e-11 and 1e-5.
    fn tail_ratio(psis: &[f64]) -> f64 {
        let mut logs = Vec::new();
        for w in psis.windows(2) {
            if w[0] < 1e-5 && w[0] > 1e-11 && w[1] > 1e-11 {
                logs.push((w[1] / w[0]).ln());
            }
        }
        assert!(logs.len() >= 3, "tail window too short: {}", logs.len());
        (logs.iter().sum::<f64>() / logs.len() as f64).exp()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// from_params and params invert each other on canonical tuples.
        #[test]
        fn params_are_canonical_coordinates(
            phi in 0.05f64..1.5,
            theta in -1.5f64..1.5,
            psi in -3.1f64..3.1,
            chi in -3.1f64..3.1,
        ) {
            let p = U2Params { phi, theta, psi, chi };
            let u = from_params(&p);
            let q = params(&u).unwrap();
            prop_assert!((q.phi - phi).abs() < 1e-9);
            prop_assert!((q.theta - theta).abs() < 1e-9);
            prop_assert!((wrap_angle(q.psi - psi)).abs() < 1e-9);
            prop_assert!((wrap_angle(q.chi - chi)).abs() < 1e-9);
        }
    }
}
