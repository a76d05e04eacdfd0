//! Batch campaigns over Haar-random starting matrices.
//!
//! The drivers here reproduce ensemble statistics of the bare iteration:
//! potential values at fixed iteration checkpoints, their per-checkpoint
//! min/average/max, and consecutive-checkpoint pairs for correlation plots.
//! Work fans out across threads with one deterministic random stream per
//! sample index, so results are independent of thread count and schedule;
//! the merge happens by index order.

use rayon::prelude::*;

use crate::haar::{sample_unitary, RngStream};
use crate::scale::{scale, ScaleConfig};

/// Checkpoints used by the potential-statistics table.
pub const TABLE1_CHECKPOINTS: [usize; 12] = [0, 1, 2, 3, 4, 5, 10, 20, 30, 40, 50, 100];

/// Checkpoints used for consecutive-step correlation data.
pub const CORRELATION_CHECKPOINTS: [usize; 4] = [0, 1, 2, 3];

/// Configuration of the bare iteration used by batch campaigns: no saddle
/// escape, stall detection effectively off (the look-back window is longer
/// than the run), and a residual target deep below any checkpoint scale so
/// trajectories only stop early once they are numerically converged.
pub fn bare_iteration_config(max_iter: usize) -> ScaleConfig {
    ScaleConfig {
        tol_residual: 1e-15,
        max_iter,
        stall_window: max_iter + 1,
        stall_epsilon: 1e-16,
        escape_enabled: false,
        escape_delta: 1e-3,
        rng_seed: 0,
    }
}

/// Potential values of every sample at every checkpoint.
#[derive(Clone, Debug)]
pub struct PsiCheckpoints {
    pub n: usize,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
    /// `per_sample[i][j]` is the potential of sample `i` at checkpoint
    /// `checkpoints[j]`, in sample-index order.
    pub per_sample: Vec<Vec<f64>>,
}

/// Run the bare iteration on `samples` Haar draws of dimension `n` and
/// record the potential at the given checkpoints.
///
/// Checkpoints must be strictly increasing. Sample `i` uses the random
/// stream `(seed, i)`; trajectories that converge before the last
/// checkpoint are padded with their final potential.
pub fn psi_at_checkpoints(
    n: usize,
    samples: usize,
    checkpoints: &[usize],
    seed: u64,
) -> PsiCheckpoints {
    assert!(!checkpoints.is_empty(), "need at least one checkpoint");
    assert!(
        checkpoints.windows(2).all(|w| w[0] < w[1]),
        "checkpoints must be strictly increasing"
    );
    let max_k = *checkpoints.last().expect("nonempty");
    let cfg = bare_iteration_config(max_k.max(1));
    let per_sample: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::new(seed, i as u64);
            let u = sample_unitary(n, &mut stream);
            let res = scale(&u, &cfg).expect("Haar samples are unitary");
            let records = &res.trace.records;
            checkpoints
                .iter()
                .map(|&k| records[k.min(records.len() - 1)].psi)
                .collect()
        })
        .collect();
    PsiCheckpoints {
        n,
        seed,
        checkpoints: checkpoints.to_vec(),
        per_sample,
    }
}

/// Min / average / max of the potential at one checkpoint.
#[derive(Clone, Copy, Debug)]
pub struct TableStats {
    pub k: usize,
    pub min_psi: f64,
    pub ave_psi: f64,
    pub max_psi: f64,
}

/// Collapse checkpoint data into per-checkpoint statistics.
pub fn table_stats(data: &PsiCheckpoints) -> Vec<TableStats> {
    let samples = data.per_sample.len().max(1) as f64;
    data.checkpoints
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for row in &data.per_sample {
                let v = row[j];
                min = min.min(v);
                max = max.max(v);
                sum += v;
            }
            if data.per_sample.is_empty() {
                min = 0.0;
                max = 0.0;
            }
            TableStats {
                k,
                min_psi: min,
                ave_psi: sum / samples,
                max_psi: max,
            }
        })
        .collect()
}

/// One consecutive-checkpoint pair of potentials for one sample.
#[derive(Clone, Copy, Debug)]
pub struct CorrelationPair {
    pub k: usize,
    pub psi_k: f64,
    pub psi_next: f64,
}

/// Flatten checkpoint data into `(k, psi_k, psi_{k+1})` rows, taken over
/// every pair of adjacent checkpoints that are one step apart.
pub fn correlation_pairs(data: &PsiCheckpoints) -> Vec<CorrelationPair> {
    let mut out = Vec::new();
    for row in &data.per_sample {
        for j in 0..data.checkpoints.len().saturating_sub(1) {
            if data.checkpoints[j + 1] == data.checkpoints[j] + 1 {
                out.push(CorrelationPair {
                    k: data.checkpoints[j],
                    psi_k: row[j],
                    psi_next: row[j + 1],
                });
            }
        }
    }
    out
}

/// CSV with one row per checkpoint: `k,min_psi,ave_psi,max_psi`.
pub fn table_to_csv(stats: &[TableStats]) -> String {
    let mut s = String::from("k,min_psi,ave_psi,max_psi\n");
    for row in stats {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            row.k, row.min_psi, row.ave_psi, row.max_psi
        ));
    }
    s
}

/// CSV with one row per sample and one column per checkpoint of raw
/// potential values; the header names the checkpoints.
pub fn histogram_to_csv(data: &PsiCheckpoints) -> String {
    let header: Vec<String> = data
        .checkpoints
        .iter()
        .map(|k| format!("psi_k{k}"))
        .collect();
    let mut s = header.join(",");
    s.push('\n');
    for row in &data.per_sample {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// CSV with one row per correlation pair: `k,psi_k,psi_next`.
pub fn correlation_to_csv(pairs: &[CorrelationPair]) -> String {
    let mut s = String::from("k,psi_k,psi_next\n");
    for p in pairs {
        s.push_str(&format!(
            "{},{:.16e},{:.16e}\n",
            p.k, p.psi_k, p.psi_next
        ));
    }
    s
}
