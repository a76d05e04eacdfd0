//! The diagonal phase scaling iteration.
//!
//! One step takes `A` to `L A R` where `L` cancels the phases of the row
//! sums and `R` then cancels the phases of the column sums of `L A`. After a
//! step every column sum is real and non-negative. The potential
//! `Psi(A) = n^2 - |matrix sum|^2` never increases along the iteration, and
//! `Psi = 0` together with unit line sums is the convergence target.
//!
//! Two complications are handled around the bare iteration:
//!
//! - Starts whose nonzero line sums all share one argument axis leave the
//!   gradient of `Psi` at zero, so the iteration can sit still from the very
//!   first step. [`detect_constant_argument_start`] spots them and
//!   [`prestart_perturbation`] knocks the matrix off the axis before
//!   iterating.
//! - The iteration can also walk into a saddle of `Psi` later on. A stalled
//!   potential window triggers [`escape_saddle`], which probes a fixed set
//!   of diagonal perturbation directions and greedily applies the best
//!   strictly improving one.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::matrix::{
    apply_diagonals, line_sums, potential, unitarity_residual, wrap_angle, DiagonalPhase,
    UnitaryMatrix,
};

/// Unitarity tolerance applied to the input of [`scale`].
pub const INPUT_UNITARITY_TOL: f64 = 1e-8;

/// Argument tolerance used when testing a start for stationarity.
pub const STATIONARY_ARG_TOL: f64 = 1e-8;

/// Phase kick applied by [`prestart_perturbation`].
pub const PRESTART_DELTA: f64 = std::f64::consts::FRAC_PI_2;

/// Line sums below this modulus are treated as zero when choosing the
/// perturbation target; matches the stationarity test scale.
const PRESTART_SUM_TOL: f64 = 1e-9;

/// Relative residual progress per stall window below which the residual
/// series counts as flat. Trajectories trapped at a critical point improve
/// the residual by at most a few hundred ulps per window (relative progress
/// under 1e-9), while even the slowest genuinely converging tails gain well
/// over 1e-3 relative per window, so orders of magnitude separate the two
/// populations.
pub const RESIDUAL_FLAT_REL: f64 = 1e-5;

/// Configuration of the scaling loop.
#[derive(Clone, Debug)]
pub struct ScaleConfig {
    /// Convergence threshold on the line-sum residual
    /// `max_j max(|r_j - 1|, |c_j - 1|)`.
    pub tol_residual: f64,
    /// Hard cap on the number of iterations.
    pub max_iter: usize,
    /// Length of the look-back window for stall detection.
    pub stall_window: usize,
    /// Stall threshold on the potential: the iteration counts as stalled at
    /// step `k` once `Psi(A_{k-w}) - Psi(A_k) < stall_epsilon` over a full
    /// look-back window `w`, provided the residual series is also flat (see
    /// [`RESIDUAL_FLAT_REL`]). The residual guard matters near convergence:
    /// the potential is a difference of n^2-sized quantities and bottoms out
    /// in cancellation noise around 1e-15 while the residual, computed
    /// directly from the line sums, keeps falling cleanly to the tolerance,
    /// so a healthy late tail looks flat in the potential alone.
    pub stall_epsilon: f64,
    /// Whether a stall triggers a saddle-escape attempt (otherwise the run
    /// stops with [`ScaleStatus::StalledAtSaddle`]).
    pub escape_enabled: bool,
    /// Magnitude of the probe angles used by [`escape_saddle`].
    pub escape_delta: f64,
    /// Seed for the escape-orientation randomness. Everything else in the
    /// loop is deterministic.
    pub rng_seed: u64,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iter: 100_000,
            stall_window: 50,
            stall_epsilon: 1e-14,
            escape_enabled: true,
            escape_delta: 1e-3,
            rng_seed: 0,
        }
    }
}

impl ScaleConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |reason: &str| {
            Err(Error::InvalidConfig {
                reason: reason.to_string(),
            })
        };
        if !(self.tol_residual.is_finite() && self.tol_residual > 0.0) {
            return fail("tol_residual must be positive and finite");
        }
        if self.max_iter == 0 {
            return fail("max_iter must be at least 1");
        }
        if self.stall_window < 2 {
            return fail("stall_window must be at least 2");
        }
        if !(self.stall_epsilon > 0.0 && self.stall_epsilon < self.tol_residual) {
            return fail("stall_epsilon must lie strictly between 0 and tol_residual");
        }
        if !(self.escape_delta > 0.0 && self.escape_delta <= 0.1) {
            return fail("escape_delta must lie in (0, 0.1]");
        }
        Ok(())
    }
}

/// One row of the convergence trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceRecord {
    pub k: usize,
    pub psi: f64,
    pub residual: f64,
}

/// Kinds of discrete events the loop can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    PrestartPerturbation,
    SaddleEscape,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::PrestartPerturbation => write!(f, "prestart_perturbation"),
            EventKind::SaddleEscape => write!(f, "saddle_escape"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub k: usize,
    pub kind: EventKind,
}

/// Per-iteration history of a scaling run.
#[derive(Clone, Debug, Default)]
pub struct ScaleTrace {
    /// One record per iterate, starting at `k = 0`; `records[k].k == k`.
    pub records: Vec<TraceRecord>,
    pub events: Vec<TraceEvent>,
}

impl ScaleTrace {
    pub fn final_record(&self) -> TraceRecord {
        *self.records.last().expect("trace always has a record")
    }
}

/// Why the loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleStatus {
    Converged,
    StalledAtSaddle,
    MaxIterReached,
}

impl ScaleStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScaleStatus::Converged => "converged",
            ScaleStatus::StalledAtSaddle => "stalled_at_saddle",
            ScaleStatus::MaxIterReached => "max_iter_reached",
        }
    }
}

impl std::fmt::Display for ScaleStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of [`scale`]: the scaled matrix `B = L A R`, the accumulated
/// diagonal phases, the trace and the stop status.
#[derive(Clone, Debug)]
pub struct ScaleResult {
    pub b: UnitaryMatrix,
    pub left: DiagonalPhase,
    pub right: DiagonalPhase,
    pub trace: ScaleTrace,
    pub status: ScaleStatus,
}

/// Distance of the line sums from the all-ones target:
/// `max_j max(|r_j - 1|, |c_j - 1|)`.
pub fn line_sum_residual(a: &UnitaryMatrix) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let s = line_sums(a);
    s.rows
        .iter()
        .chain(s.cols.iter())
        .map(|z| (z - one).norm())
        .fold(0.0, f64::max)
}

/// One scaling step. Returns `(L_k, R_k, A_k)` with `A_k = L_k A R_k`.
///
/// `L_k` carries the angles `wrap(-arg r_j)` of the row sums of `A`, and
/// `R_k` the angles `wrap(-arg c'_j)` of the column sums of `L_k A`. Rows or
/// columns whose sum is exactly zero get angle zero and are left alone.
pub fn sinkhorn_step(a: &UnitaryMatrix) -> (DiagonalPhase, DiagonalPhase, UnitaryMatrix) {
    let n = a.n();
    let sums = line_sums(a);
    // arg(0 + 0i) is 0, matching the fix-zero-sums convention of phi.
    let lambda: Vec<f64> = sums.rows.iter().map(|r| wrap_angle(-r.arg())).collect();
    let left = DiagonalPhase::new(lambda).expect("angles of finite sums are finite");

    let mut entries = Vec::with_capacity(n * n);
    let mut col_sums = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let f = left.factor(j);
        for k in 0..n {
            let v = f * a.get(j, k);
            col_sums[k] += v;
            entries.push(v);
        }
    }

    let rho: Vec<f64> = col_sums.iter().map(|c| wrap_angle(-c.arg())).collect();
    let right = DiagonalPhase::new(rho).expect("angles of finite sums are finite");
    for k in 0..n {
        let f = right.factor(k);
        for j in 0..n {
            entries[j * n + k] *= f;
        }
    }

    let next = UnitaryMatrix::from_entries(n, entries).expect("phase scaling keeps entries finite");
    (left, right, next)
}

/// Detect a start at which the potential is stationary.
///
/// True when all line sums of modulus above `tol` share a single argument
/// axis, i.e. agree modulo pi. The modulo-pi comparison matches the
/// vanishing-gradient condition: each gradient component is (twice) the
/// cross product of a line sum with the matrix sum, so sums pointing along
/// one line through the origin, in either direction, make every component
/// zero. `diag(1, -1)` is the canonical example: its line sums are 1, -1, 1,
/// -1, and the gradient of the potential vanishes there.
pub fn detect_constant_argument_start(a: &UnitaryMatrix, tol: f64) -> bool {
    let s = line_sums(a);
    let nonzero: Vec<Complex64> = s
        .rows
        .iter()
        .chain(s.cols.iter())
        .copied()
        .filter(|z| z.norm() > tol)
        .collect();
    if nonzero.len() <= 1 {
        return true;
    }
    let reference = nonzero[0].arg();
    nonzero[1..].iter().all(|z| {
        let d = (z.arg() - reference).rem_euclid(std::f64::consts::PI);
        d.min(std::f64::consts::PI - d) <= tol
    })
}

/// Diagonal perturbation applied before iterating from a stationary start.
///
/// A phase kick of `pi/2` is placed on a single line so the line sums leave
/// their common axis: on the first row with nonzero sum when at least two
/// row sums are nonzero, otherwise on the first column with nonzero sum when
/// at least two column sums are nonzero, otherwise (a single nonzero row and
/// column sum) on the nonzero row. Returns `(L, R)`, one of which is the
/// identity.
pub fn prestart_perturbation(a: &UnitaryMatrix) -> (DiagonalPhase, DiagonalPhase) {
    let n = a.n();
    let s = line_sums(a);
    let count_nonzero =
        |v: &[Complex64]| v.iter().filter(|z| z.norm() > PRESTART_SUM_TOL).count();
    let first_nonzero =
        |v: &[Complex64]| v.iter().position(|z| z.norm() > PRESTART_SUM_TOL);

    if count_nonzero(&s.rows) >= 2 {
        let x = first_nonzero(&s.rows).expect("counted at least two");
        (DiagonalPhase::single(n, x, PRESTART_DELTA), DiagonalPhase::zero(n))
    } else if count_nonzero(&s.cols) >= 2 {
        let x = first_nonzero(&s.cols).expect("counted at least two");
        (DiagonalPhase::zero(n), DiagonalPhase::single(n, x, PRESTART_DELTA))
    } else {
        // At most one nonzero row sum and one nonzero column sum. A unitary
        // matrix cannot have all row sums zero (the all-ones vector would be
        // orthogonal to every row), so pick the nonzero row.
        let x = first_nonzero(&s.rows).unwrap_or(0);
        (DiagonalPhase::single(n, x, PRESTART_DELTA), DiagonalPhase::zero(n))
    }
}

/// Probe a stalled iterate for a strictly improving diagonal perturbation.
///
/// For each index `j` the probe direction couples the `j`-th left and right
/// phases with a relative sign that alternates with `j`: even `j` probe the
/// difference pattern `(lambda_j, rho_j) = (d, -d)`, odd `j` the common
/// pattern `(d, d)`. The difference pattern moves matrices off saddles with
/// equal row and column phases (rotations, for instance) but acts trivially
/// on diagonal matrices, where every left phase can be absorbed by the
/// matching right phase; the common pattern covers exactly those. Each
/// direction is tried with `d = +-escape_delta` (orientation order
/// randomized), and the trial with the lowest potential wins if it beats the
/// current value strictly. Returns a pair of identity phases when no trial
/// improves.
pub fn escape_saddle<R: Rng>(
    a: &UnitaryMatrix,
    cfg: &ScaleConfig,
    rng: &mut R,
) -> (DiagonalPhase, DiagonalPhase) {
    let n = a.n();
    let psi0 = potential(a);
    let mut best: Option<(f64, DiagonalPhase, DiagonalPhase)> = None;
    for j in 0..n {
        let rel = if j % 2 == 0 { -1.0 } else { 1.0 };
        let orient = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for sign in [orient, -orient] {
            let d = sign * cfg.escape_delta;
            let l = DiagonalPhase::single(n, j, d);
            let r = DiagonalPhase::single(n, j, rel * d);
            let trial = apply_diagonals(&l, a, &r).expect("probe dimensions match");
            let psi = potential(&trial);
            let beats = match &best {
                Some((b, _, _)) => psi < *b,
                None => psi < psi0,
            };
            if beats {
                best = Some((psi, l, r));
            }
        }
    }
    match best {
        Some((_, l, r)) => (l, r),
        None => (DiagonalPhase::zero(n), DiagonalPhase::zero(n)),
    }
}

/// Run the scaling iteration on a unitary matrix.
///
/// The trace holds one record per iterate starting with `k = 0`; when a
/// stationary start is perturbed, the `k = 0` record describes the
/// perturbed matrix and the event list marks the perturbation at `k = 0`.
/// Escape events are marked at the iteration where the stall was detected.
/// The returned factors always satisfy `B = L A R` exactly (up to rounding),
/// whatever the stop status.
pub fn scale(a: &UnitaryMatrix, cfg: &ScaleConfig) -> Result<ScaleResult, Error> {
    cfg.validate()?;
    let input_residual = unitarity_residual(a);
    if input_residual > INPUT_UNITARITY_TOL {
        return Err(Error::NonUnitaryInput {
            residual: input_residual,
            tol: INPUT_UNITARITY_TOL,
        });
    }

    let n = a.n();
    let mut left = DiagonalPhase::zero(n);
    let mut right = DiagonalPhase::zero(n);
    let mut trace = ScaleTrace::default();

    let r0 = line_sum_residual(a);
    if r0 < cfg.tol_residual {
        trace.records.push(TraceRecord {
            k: 0,
            psi: potential(a),
            residual: r0,
        });
        return Ok(ScaleResult {
            b: a.clone(),
            left,
            right,
            trace,
            status: ScaleStatus::Converged,
        });
    }

    let mut current = a.clone();
    if detect_constant_argument_start(&current, STATIONARY_ARG_TOL) {
        let (l0, r0p) = prestart_perturbation(&current);
        current = apply_diagonals(&l0, &current, &r0p)?;
        left = left.compose(&l0);
        right = right.compose(&r0p);
        trace.events.push(TraceEvent {
            k: 0,
            kind: EventKind::PrestartPerturbation,
        });
    }

    let mut residual = line_sum_residual(&current);
    trace.records.push(TraceRecord {
        k: 0,
        psi: potential(&current),
        residual,
    });
    if residual < cfg.tol_residual {
        return Ok(ScaleResult {
            b: current,
            left,
            right,
            trace,
            status: ScaleStatus::Converged,
        });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.rng_seed);
    let mut status = ScaleStatus::MaxIterReached;
    // Earliest record index the stall window may look back to; pushed
    // forward after an escape so the window refills before re-testing.
    let mut window_anchor = 0usize;

    for k in 1..=cfg.max_iter {
        let (lk, rk, next) = sinkhorn_step(&current);
        left = left.compose(&lk);
        right = right.compose(&rk);
        current = next;

        let psi = potential(&current);
        residual = line_sum_residual(&current);
        trace.records.push(TraceRecord { k, psi, residual });

        if residual < cfg.tol_residual {
            status = ScaleStatus::Converged;
            break;
        }

        if k >= window_anchor + cfg.stall_window {
            let past = &trace.records[k - cfg.stall_window];
            // Both series must be flat. The potential alone is unreliable
            // near convergence: n^2 - |m|^2 is all cancellation noise once
            // the matrix sum is within ~1e-8 of its bound, so a healthy tail
            // looks flat in psi while the residual still drops geometrically.
            let psi_flat = past.psi - psi < cfg.stall_epsilon;
            let residual_flat = past.residual - residual < RESIDUAL_FLAT_REL * residual;
            if psi_flat && residual_flat {
                if !cfg.escape_enabled {
                    status = ScaleStatus::StalledAtSaddle;
                    break;
                }
                let (le, re) = escape_saddle(&current, cfg, &mut rng);
                if le.is_zero() && re.is_zero() {
                    status = ScaleStatus::StalledAtSaddle;
                    break;
                }
                current = apply_diagonals(&le, &current, &re)?;
                left = left.compose(&le);
                right = right.compose(&re);
                trace.events.push(TraceEvent {
                    k,
                    kind: EventKind::SaddleEscape,
                });
                window_anchor = k;
            }
        }
    }

    Ok(ScaleResult {
        b: current,
        left,
        right,
        trace,
        status,
    })
}
