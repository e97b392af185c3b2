//! Seeded Monte Carlo harness for random-matrix ensembles over F_p.
//!
//! Every trial is a pure function of (master_seed, trial index), so a run
//! can be split across any number of worker threads and still produce a
//! byte-identical result: workers only accumulate integer counts and f64
//! maxima, both of which merge commutatively. Experiment configurations and
//! results are plain JSON documents; predictions come from the exact
//! distribution code in [`crate::stats`], and empirical frequencies are
//! judged by z-scores against a configurable threshold.

mod oracle;
mod runners;

pub use oracle::{enumerate_oracle, OracleStatistic};
pub use runners::{
    run_divisibility_experiment, run_eigfree_experiment, run_experiment,
    run_normal_vector_experiment, run_partition_experiment, run_rank_experiment,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extfield::ExtensionField;
use crate::field::PrimeModulus;
use crate::linalg::MatrixFp;
use crate::poly::Poly;
use crate::prng::{AtomSampler, TrialRng};
use crate::anticonc::DistributionSpec;
use crate::series::ratio_u64;

/// One atom of the entry distribution: P(entry = value) = num/den.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AtomConfig {
    pub value: u64,
    pub num: u64,
    pub den: u64,
}

/// Exact rational written as a num/den pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RationalConfig {
    pub num: u64,
    pub den: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DistributionConfig {
    pub atoms: Vec<AtomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<RationalConfig>,
}

/// Modulus polynomial of an extension field, coefficients lowest-first in
/// the same comma format `Poly::parse` accepts (x² + 1 is "1,0,1").
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ExtensionConfig {
    pub phi: String,
    pub degree: usize,
}

/// Which ensemble statistic to run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Rank,
    Eigfree,
    Divisibility,
    Partition,
    NormalVector,
}

/// Pass/fail policy: |z| at or below the threshold passes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolicyConfig {
    pub z_threshold: f64,
}

impl Default for PolicyConfig {
    fn default() -> PolicyConfig {
        // two-sided 4 sigma keeps the false-failure rate of a ~40-check
        // suite under one percent
        PolicyConfig { z_threshold: 4.0 }
    }
}

/// Entry (i, j, value) for the normal-vector pair statistic.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PairConfig {
    pub i: usize,
    pub j: usize,
    pub a: u64,
}

fn default_schema_version() -> u32 {
    1
}

fn default_workers() -> usize {
    1
}

/// A complete experiment description, deserializable from a single JSON
/// document. Unknown fields are rejected so typos surface immediately.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub n: usize,
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionConfig>,
    /// Second modulus polynomial for joint partition statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension2: Option<ExtensionConfig>,
    pub distribution: DistributionConfig,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub statistic: StatisticKind,
    #[serde(default)]
    pub policy: PolicyConfig,
    /// Values whose joint eigenvalue event the eigfree experiment tracks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_values: Option<Vec<u64>>,
    /// Pair statistic for the normal-vector experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != 1 {
            return Err(Error::Config(format!(
                "unsupported schema_version {}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn field(&self) -> Result<PrimeModulus> {
        PrimeModulus::new(self.p)
    }

    pub fn distribution_spec(&self, field: &PrimeModulus) -> Result<DistributionSpec> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let atoms: Vec<_> = self
            .distribution
            .atoms
            .iter()
            .map(|a| {
                if a.den == 0 {
                    return Err(Error::Config("atom denominator must be nonzero".into()));
                }
                Ok((a.value, ratio_u64(a.num, a.den)))
            })
            .collect::<Result<_>>()?;
        let alpha = match &self.distribution.alpha {
            Some(r) => {
                if r.den == 0 {
                    return Err(Error::Config("alpha denominator must be nonzero".into()));
                }
                Some(ratio_u64(r.num, r.den))
            }
            None => None,
        };
        DistributionSpec::new(field, &atoms, alpha)
    }

    /// Parse and validate a configured extension modulus.
    pub fn parse_extension(
        &self,
        field: &PrimeModulus,
        ext: &ExtensionConfig,
    ) -> Result<(Poly, ExtensionField)> {
        let phi = Poly::parse(field.clone(), &ext.phi)?;
        let deg = phi.degree().ok_or(Error::NonMonic)?;
        if deg != ext.degree {
            return Err(Error::Config(format!(
                "declared degree {} but phi has degree {deg}",
                ext.degree
            )));
        }
        let k = ExtensionField::new(phi.clone())?;
        Ok((phi, k))
    }
}

/// One comparison line of an experiment: an event bucket, its empirical
/// count out of `denom` qualifying trials, and the verdict against the
/// prediction.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub bucket: String,
    pub count: u64,
    /// Trials the bucket frequency is taken over (differs from the total
    /// for conditional statistics).
    pub denom: u64,
    pub freq: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub pred: f64,
    /// Certified numerical error carried by the prediction itself.
    pub pred_err: f64,
    pub z: f64,
    pub pass: bool,
}

/// Full outcome of a run: the verdict rows plus named scalar diagnostics.
/// Serializing this struct is byte-deterministic for a fixed (config,
/// master_seed) regardless of worker count.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub statistic: String,
    /// Trials entering conditional statistics (= trials − excluded).
    pub trials_used: u64,
    pub excluded: u64,
    pub rows: Vec<ResultRow>,
    /// Named scalar diagnostics (maxima, fitted constants, …).
    pub extras: Vec<(String, f64)>,
    pub all_pass: bool,
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Aligned human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "statistic: {}   trials used: {}   excluded: {}\n",
            self.statistic, self.trials_used, self.excluded
        ));
        out.push_str(&format!(
            "{:<18} {:>10} {:>10} {:>12} {:>12} {:>8}  {}\n",
            "bucket", "count", "freq", "pred", "pred_err", "z", "verdict"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<18} {:>10} {:>10.6} {:>12.6} {:>12.2e} {:>8.2}  {}\n",
                r.bucket,
                r.count,
                r.freq,
                r.pred,
                r.pred_err,
                r.z,
                if r.pass { "pass" } else { "FAIL" }
            ));
        }
        for (name, value) in &self.extras {
            out.push_str(&format!("{name} = {value}\n"));
        }
        out
    }

    /// CSV of the per-bucket rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket,count,freq,pred,pred_err,z\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.bucket, r.count, r.freq, r.pred, r.pred_err, r.z
            ));
        }
        out
    }
}

/// z-score and Wilson-interval verdict for `count` successes out of `denom`
/// trials against a prediction carrying its own certified error. The pass
/// band is |freq − pred| ≤ pred_err + threshold·se, so exact predictions
/// (pred_err = 0) reduce to the plain z-test.
pub fn statistical_verdict(
    count: u64,
    denom: u64,
    bucket: &str,
    pred: f64,
    pred_err: f64,
    policy: &PolicyConfig,
) -> ResultRow {
    let t = denom.max(1) as f64;
    let freq = count as f64 / t;
    let se = (pred.clamp(0.0, 1.0) * (1.0 - pred.clamp(0.0, 1.0)) / t).sqrt();
    let z = if se > 0.0 {
        (freq - pred) / se
    } else if (freq - pred).abs() <= pred_err {
        0.0
    } else {
        f64::INFINITY
    };
    let pass = (freq - pred).abs() <= pred_err + policy.z_threshold * se.max(0.0);
    let zt = policy.z_threshold;
    let denom_w = 1.0 + zt * zt / t;
    let center = (freq + zt * zt / (2.0 * t)) / denom_w;
    let half = zt * (freq * (1.0 - freq) / t + zt * zt / (4.0 * t * t)).sqrt() / denom_w;
    ResultRow {
        bucket: bucket.to_string(),
        count,
        denom,
        freq,
        wilson_lo: (center - half).max(0.0),
        wilson_hi: (center + half).min(1.0),
        pred,
        pred_err,
        z,
        pass,
    }
}

/// Sample a rows×cols matrix with iid entries from the atom sampler. Entry
/// (i, j) consumes the sub-stream `i·cols + j` of the trial stream, so the
/// map (seed, trial) → matrix is fixed across platforms and worker counts.
pub fn sample_matrix(
    field: &PrimeModulus,
    rows: usize,
    cols: usize,
    sampler: &AtomSampler,
    stream: &TrialRng,
) -> MatrixFp {
    let mut m = MatrixFp::zero(field.clone(), rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut rng = stream.entry((i * cols + j) as u64);
            m.set(i, j, sampler.sample(&mut rng));
        }
    }
    m
}

/// Run `trials` independent trials split into contiguous chunks across
/// `workers` threads. Each worker folds its chunk into a fresh accumulator;
/// chunks are merged in worker order. As long as `merge` is commutative on
/// the accumulated data (integer counts, f64 maxima) the outcome is
/// schedule-independent.
pub fn parallel_trials<A, I, S, M>(trials: u64, workers: usize, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(u64, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let workers = workers.max(1).min(trials.max(1) as usize);
    if workers == 1 {
        let mut acc = init();
        for t in 0..trials {
            step(t, &mut acc);
        }
        return acc;
    }
    let chunk = trials.div_ceil(workers as u64);
    let mut partials: Vec<Option<A>> = Vec::new();
    for _ in 0..workers {
        partials.push(None);
    }
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for k in 0..workers {
            let lo = k as u64 * chunk;
            let hi = trials.min(lo + chunk);
            let init = &init;
            let step = &step;
            handles.push(scope.spawn(move || {
                let mut acc = init();
                for t in lo..hi {
                    step(t, &mut acc);
                }
                acc
            }));
        }
        for (k, h) in handles.into_iter().enumerate() {
            partials[k] = Some(h.join().expect("worker panicked"));
        }
    });
    let mut iter = partials.into_iter().map(|p| p.expect("worker result"));
    let mut acc = iter.next().expect("at least one worker");
    for part in iter {
        merge(&mut acc, part);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_cfg(p: u64, n: usize, statistic: StatisticKind) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: 1,
            n,
            p,
            extension: None,
            extension2: None,
            distribution: DistributionConfig {
                atoms: (0..p).map(|v| AtomConfig { value: v, num: 1, den: p }).collect(),
                alpha: None,
            },
            trials: 1000,
            master_seed: 7,
            workers: 1,
            statistic,
            policy: PolicyConfig::default(),
            joint_values: None,
            pair: None,
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = uniform_cfg(3, 5, StatisticKind::Rank);
        let json = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);
        // unknown fields are rejected
        assert!(ExperimentConfig::from_json(&json.replace("\"n\":5", "\"n\":5,\"bogus\":1"))
            .is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = uniform_cfg(5, 3, StatisticKind::Rank);
        let field = cfg.field().unwrap();
        assert!(cfg.distribution_spec(&field).is_ok());
        cfg.trials = 0;
        assert!(cfg.distribution_spec(&field).is_err());
        cfg.trials = 10;
        cfg.distribution.atoms[0].den = 0;
        assert!(cfg.distribution_spec(&field).is_err());
    }

    #[test]
    fn sampled_entries_are_deterministic_and_lawful() {
        let field = PrimeModulus::new(3).unwrap();
        // signs over F_3: entries can only land on 1 and 2
        let spec = DistributionSpec::bernoulli_pm1(&field).unwrap();
        let sampler = spec.sampler().unwrap();
        let stream = TrialRng::new(99, 0);
        let m1 = sample_matrix(&field, 6, 6, &sampler, &stream);
        let m2 = sample_matrix(&field, 6, 6, &sampler, &stream);
        assert_eq!(m1.to_text(), m2.to_text());
        for i in 0..6 {
            for j in 0..6 {
                assert!([1u64, 2].contains(m1.get(i, j)));
            }
        }
        // a different trial index gives a different matrix
        let m3 = sample_matrix(&field, 6, 6, &sampler, &TrialRng::new(99, 1));
        assert_ne!(m1.to_text(), m3.to_text());
    }

    #[test]
    fn single_entry_frequencies_match_uniform_law() {
        let p = 5u64;
        let field = PrimeModulus::new(p).unwrap();
        let spec = DistributionSpec::uniform(&field).unwrap();
        let sampler = spec.sampler().unwrap();
        let draws = 100_000u64;
        let mut counts = vec![0u64; p as usize];
        for t in 0..draws {
            let m = sample_matrix(&field, 1, 1, &sampler, &TrialRng::new(31, t));
            counts[*m.get(0, 0) as usize] += 1;
        }
        let se = ((1.0 / p as f64) * (1.0 - 1.0 / p as f64) / draws as f64).sqrt();
        for (v, &c) in counts.iter().enumerate() {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.2).abs() <= 4.0 * se, "value {v}: freq {freq}");
        }
    }

    #[test]
    fn verdict_examples() {
        let policy = PolicyConfig::default();
        // dead-on prediction
        let row = statistical_verdict(500, 1000, "b", 0.5, 0.0, &policy);
        assert_eq!(row.z, 0.0);
        assert!(row.pass);
        assert!(row.wilson_lo < 0.5 && 0.5 < row.wilson_hi);
        // ten standard errors off
        let se = (0.5f64 * 0.5 / 1000.0).sqrt();
        let shifted = ((0.5 + 10.0 * se) * 1000.0).round() as u64;
        let row = statistical_verdict(shifted, 1000, "b", 0.5, 0.0, &policy);
        assert!(!row.pass);
        assert!(row.z > 9.0);
        // certified prediction error widens the pass band
        let row = statistical_verdict(shifted, 1000, "b", 0.5, 0.2, &policy);
        assert!(row.pass);
        // degenerate se: exact prediction must match exactly
        let row = statistical_verdict(0, 1000, "b", 0.0, 0.0, &policy);
        assert!(row.pass && row.z == 0.0);
        let row = statistical_verdict(3, 1000, "b", 0.0, 0.0, &policy);
        assert!(!row.pass);
    }

    #[test]
    fn parallel_trials_merge_is_schedule_independent() {
        let run = |workers: usize| {
            parallel_trials(
                1000,
                workers,
                || (vec![0u64; 7], 0.0f64),
                |t, acc| {
                    let h = crate::prng::mix64(t);
                    acc.0[(h % 7) as usize] += 1;
                    acc.1 = acc.1.max((h >> 32) as f64);
                },
                |a, b| {
                    for (x, y) in a.0.iter_mut().zip(b.0) {
                        *x += y;
                    }
                    a.1 = a.1.max(b.1);
                },
            )
        };
        let one = run(1);
        for workers in [2, 3, 8, 16] {
            let multi = run(workers);
            assert_eq!(one.0, multi.0);
            assert_eq!(one.1.to_bits(), multi.1.to_bits());
        }
    }
}
