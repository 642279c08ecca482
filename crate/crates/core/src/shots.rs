//! Seeded measurement simulation and the Hoeffding shot budget check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};
use crate::planner::{accuracy_window, shot_budget};
use crate::spectral::PhaseDistribution;

/// Identity of the generator behind every sample, recorded in outputs.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub m: u64,
    pub counts: Vec<u64>,
    /// Most frequent outcome, smallest index on ties.
    pub empirical_top: u64,
}

fn cumulative(probs: &[f64]) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let cdf: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if !(acc > 0.0 && acc.is_finite()) {
        return Err(QpeError::Validation("distribution has no probability mass".into()));
    }
    Ok(cdf)
}

fn draw(cdf: &[f64], m: u64, seed: u64) -> ShotRecord {
    let total = *cdf.last().expect("non-empty cdf");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..m {
        let u = rng.random::<f64>() * total;
        let l = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[l] += 1;
    }
    let mut top = 0;
    for (l, &c) in counts.iter().enumerate() {
        if c > counts[top] {
            top = l;
        }
    }
    ShotRecord {
        seed,
        m,
        counts,
        empirical_top: top as u64,
    }
}

/// `m` inverse-CDF draws from `dist`.
pub fn sample_shots(dist: &PhaseDistribution, m: u64, seed: u64) -> Result<ShotRecord> {
    if m == 0 {
        return Err(QpeError::Domain("shot count must be at least 1".into()));
    }
    Ok(draw(&cumulative(&dist.probs)?, m, seed))
}

/// counts[l] / m.
pub fn empirical_estimator(rec: &ShotRecord, l: u64) -> f64 {
    rec.counts.get(l as usize).map_or(0.0, |&c| c as f64 / rec.m as f64)
}

/// counts[l] − counts[j].
pub fn z_statistic(rec: &ShotRecord, l: u64, j: u64) -> Result<i64> {
    if l == j {
        return Err(QpeError::Domain("z statistic needs two different outcomes".into()));
    }
    let get = |k: u64| rec.counts.get(k as usize).copied().unwrap_or(0) as i64;
    Ok(get(l) - get(j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub m_eps: u64,
    pub epsilon: f64,
    pub delta_gap: f64,
    pub l_star: u64,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub seed: u64,
    pub generator: String,
}

/// Runs `trials` experiments of m_ε shots each; a trial fails when some
/// outcome is read at least as often as l*. Trial i uses seed + i.
pub fn hoeffding_trial(dist: &PhaseDistribution, epsilon: f64, trials: u64, seed: u64) -> Result<TrialReport> {
    if trials == 0 {
        return Err(QpeError::Domain("trial count must be at least 1".into()));
    }
    let m_eps = shot_budget(epsilon, dist.delta_gap)?;
    let cdf = cumulative(&dist.probs)?;
    let l_star = dist.l_star as usize;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let rec = draw(&cdf, m_eps, seed.wrapping_add(i));
            let top = rec.counts[l_star];
            rec.counts.iter().enumerate().any(|(l, &c)| l != l_star && c >= top)
        })
        .count() as u64;
    Ok(TrialReport {
        m_eps,
        epsilon,
        delta_gap: dist.delta_gap,
        l_star: dist.l_star,
        trials,
        failures,
        failure_rate: failures as f64 / trials as f64,
        seed,
        generator: GENERATOR.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraQubitCandidate {
    pub a: u32,
    pub n_phase: u32,
    pub e: u64,
    pub empirical_top: u64,
    /// Fraction of shots within ±e of the empirical top.
    pub window_frequency: f64,
    /// Mean squared phase distance (in turns) of the shots from the top.
    pub spread: f64,
}

/// Few-shot comparison of extra-qubit counts: each distribution (one per `a`)
/// gets `shots` draws with seed + a; candidates are ranked by window
/// frequency, then by smaller spread, then by smaller a.
pub fn select_extra_qubits(
    candidates: &[(u32, &PhaseDistribution)],
    shots: u64,
    seed: u64,
) -> Result<Vec<ExtraQubitCandidate>> {
    let mut ranked = candidates
        .iter()
        .map(|&(a, dist)| {
            let rec = sample_shots(dist, shots, seed.wrapping_add(u64::from(a)))?;
            let m = dist.bins() as i64;
            let e = accuracy_window(a);
            let top = rec.empirical_top as i64;
            let mut inside = 0u64;
            let mut spread = 0.0;
            for (l, &c) in rec.counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let d = (l as i64 - top).rem_euclid(m);
                let d = d.min(m - d);
                if d as u64 <= e {
                    inside += c;
                }
                spread += c as f64 * (d as f64 / m as f64).powi(2);
            }
            Ok(ExtraQubitCandidate {
                a,
                n_phase: dist.n,
                e,
                empirical_top: rec.empirical_top,
                window_frequency: inside as f64 / shots as f64,
                spread: spread / shots as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|x, y| {
        y.window_frequency
            .total_cmp(&x.window_frequency)
            .then(x.spread.total_cmp(&y.spread))
            .then(x.a.cmp(&y.a))
    });
    Ok(ranked)
}
