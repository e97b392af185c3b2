//! The five ensemble experiments. Each runner samples iid-entry matrices
//! with the shared counter PRNG, folds per-trial outcomes into integer
//! counts (plus f64 maxima), and judges the merged frequencies against the
//! exact predictions of [`crate::stats`].

use crate::anticonc::{rho_exact, DistributionSpec, RhoMode};
use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::linalg::{lift_minus_generator, MatrixFp};
use crate::partition::partitions_of;
use crate::prng::{AtomSampler, TrialRng};
use crate::qpoch::Bounded;
use crate::stats::{cohen_lenstra_measure, divisibility_limit, fine_herstein_limit,
    mat_eigenvalue_free_limit, universal_corank_prob};

use super::{
    parallel_trials, sample_matrix, statistical_verdict, ExperimentConfig, ExperimentResult,
    ResultRow, StatisticKind,
};

/// Certified-accuracy target for the exact-prediction tails.
const PRED_TOL: f64 = 1e-12;

/// Dispatch on the configured statistic. `workers_override` replaces the
/// config's worker count for execution only; the echoed config is untouched
/// so results stay byte-identical across worker counts.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    workers_override: Option<usize>,
) -> Result<ExperimentResult> {
    let workers = workers_override.unwrap_or(cfg.workers);
    match cfg.statistic {
        StatisticKind::Rank => run_rank_experiment(cfg, workers),
        StatisticKind::Eigfree => run_eigfree_experiment(cfg, workers),
        StatisticKind::Divisibility => run_divisibility_experiment(cfg, workers),
        StatisticKind::Partition => run_partition_experiment(cfg, workers),
        StatisticKind::NormalVector => run_normal_vector_experiment(cfg, workers),
    }
}

struct Prepared {
    field: PrimeModulus,
    spec: DistributionSpec,
    sampler: AtomSampler,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    if cfg.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let field = cfg.field()?;
    let spec = cfg.distribution_spec(&field)?;
    let sampler = spec.sampler()?;
    Ok(Prepared { field, spec, sampler })
}

fn row_vs_bounded(
    count: u64,
    denom: u64,
    bucket: &str,
    pred: &Bounded,
    cfg: &ExperimentConfig,
) -> ResultRow {
    statistical_verdict(count, denom, bucket, pred.value, pred.error_bound, &cfg.policy)
}

fn finish(
    cfg: &ExperimentConfig,
    statistic: &str,
    trials_used: u64,
    excluded: u64,
    rows: Vec<ResultRow>,
    extras: Vec<(String, f64)>,
) -> ExperimentResult {
    let all_pass = rows.iter().all(|r| r.pass);
    ExperimentResult {
        config: cfg.clone(),
        statistic: statistic.to_string(),
        trials_used,
        excluded,
        rows,
        extras,
        all_pass,
    }
}

/// Corank histogram of n×n matrices against the universal corank law.
pub fn run_rank_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    let pre = prepare(cfg)?;
    let n = cfg.n;
    let counts = parallel_trials(
        cfg.trials,
        workers,
        || vec![0u64; n + 1],
        |t, acc: &mut Vec<u64>| {
            let m = sample_matrix(&pre.field, n, n, &pre.sampler, &TrialRng::new(cfg.master_seed, t));
            acc[n - m.rank_fp()] += 1;
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        },
    );
    debug_assert_eq!(counts.iter().sum::<u64>(), cfg.trials);
    let dmax = n.min(4);
    let mut rows = Vec::new();
    let mut covered = 0u64;
    let mut pred_sum = 0.0;
    let mut err_sum = 0.0;
    for d in 0..=dmax {
        let pred = universal_corank_prob(cfg.p, d, PRED_TOL)?;
        rows.push(row_vs_bounded(counts[d], cfg.trials, &format!("corank={d}"), &pred, cfg));
        covered += counts[d];
        pred_sum += pred.value;
        err_sum += pred.error_bound;
    }
    if n > dmax {
        let other = Bounded::new((1.0 - pred_sum).max(0.0), err_sum);
        rows.push(row_vs_bounded(cfg.trials - covered, cfg.trials, "corank>=5", &other, cfg));
    }
    Ok(finish(cfg, "rank", cfg.trials, 0, rows, Vec::new()))
}

#[derive(Clone)]
struct EigAcc {
    free: u64,
    joint: u64,
    hist: [u64; 5], // eigenvalue counts 0..=3, then 4+
}

/// Eigenvalue statistics: the eigenvalue-free frequency against the exact
/// n→∞ limit, the joint eigenvalue event for a configured value set against
/// the 1/p^d reference, and the distinct-eigenvalue count histogram against
/// the Poisson(1) idealization.
pub fn run_eigfree_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    let pre = prepare(cfg)?;
    let n = cfg.n;
    let joint_values: Vec<u64> = cfg
        .joint_values
        .clone()
        .unwrap_or_default()
        .iter()
        .map(|&a| pre.field.reduce_u64(a))
        .collect();
    let acc = parallel_trials(
        cfg.trials,
        workers,
        || EigAcc { free: 0, joint: 0, hist: [0; 5] },
        |t, acc: &mut EigAcc| {
            let m = sample_matrix(&pre.field, n, n, &pre.sampler, &TrialRng::new(cfg.master_seed, t));
            let c = m.charpoly().expect("square matrix has a charpoly");
            let g = MatrixFp::eigenvalue_gcd(&c).expect("gcd with the split polynomial");
            let distinct = g.degree().unwrap_or(0);
            if distinct == 0 {
                acc.free += 1;
            }
            acc.hist[distinct.min(4)] += 1;
            if !joint_values.is_empty() && joint_values.iter().all(|&a| c.eval(a) == 0) {
                acc.joint += 1;
            }
        },
        |a, b| {
            a.free += b.free;
            a.joint += b.joint;
            for (x, y) in a.hist.iter_mut().zip(b.hist) {
                *x += y;
            }
        },
    );
    let mut rows = Vec::new();
    let limit = mat_eigenvalue_free_limit(cfg.p, PRED_TOL)?;
    rows.push(row_vs_bounded(acc.free, cfg.trials, "eigfree", &limit, cfg));
    let mut extras = vec![
        // the invertible-ensemble limit and the Poisson(1) idealization, for
        // comparison with the iid-entry limit the row is judged against
        ("gl_eigenvalue_free_limit".to_string(), fine_herstein_limit(cfg.p, PRED_TOL)?.value),
        ("poisson_anchor".to_string(), (-1.0f64).exp()),
    ];
    if !joint_values.is_empty() {
        let d = joint_values.len() as i32;
        let pred = (cfg.p as f64).powi(-d);
        let bucket = format!(
            "all_eigenvalues[{}]",
            joint_values.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        );
        rows.push(statistical_verdict(acc.joint, cfg.trials, &bucket, pred, 0.0, &cfg.policy));
        // the exact limit of the single-value event, for context: the joint
        // frequency converges to this raised to the d-th power under
        // asymptotic independence
        let single = divisibility_limit(cfg.p, 1, PRED_TOL)?;
        extras.push(("single_eigenvalue_event_limit".to_string(), single.value));
        extras.push((
            "joint_product_of_single_limits".to_string(),
            single.value.powi(d),
        ));
    }
    let e1 = (-1.0f64).exp();
    let poisson = [e1, e1, e1 / 2.0, e1 / 6.0];
    let mut tail = 1.0;
    for (k, pk) in poisson.iter().enumerate() {
        rows.push(statistical_verdict(
            acc.hist[k],
            cfg.trials,
            &format!("eigcount={k}"),
            *pk,
            0.0,
            &cfg.policy,
        ));
        tail -= pk;
    }
    rows.push(statistical_verdict(acc.hist[4], cfg.trials, "eigcount>=4", tail, 0.0, &cfg.policy));
    Ok(finish(cfg, "eigfree", cfg.trials, 0, rows, extras))
}

#[derive(Clone)]
struct DivAcc {
    divisible: u64,
    checked: u64,
    agree: u64,
}

/// How many trials of each run cross-check charpoly divisibility against
/// the rank of M − α over the extension field.
const CROSSCHECK_TRIALS: u64 = 100;

/// Frequency of φ | charpoly(M) against the universal divisibility limit,
/// with an exact consistency check on a subsample: φ divides the
/// characteristic polynomial exactly when M − α is singular over
/// F_q = F_p[x]/φ.
pub fn run_divisibility_experiment(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult> {
    let pre = prepare(cfg)?;
    let ext = cfg
        .extension
        .as_ref()
        .ok_or_else(|| Error::Config("divisibility experiment needs an extension".into()))?;
    let (phi, k_ext) = cfg.parse_extension(&pre.field, ext)?;
    let n = cfg.n;
    let acc = parallel_trials(
        cfg.trials,
        workers,
        || DivAcc { divisible: 0, checked: 0, agree: 0 },
        |t, acc: &mut DivAcc| {
            let m = sample_matrix(&pre.field, n, n, &pre.sampler, &TrialRng::new(cfg.master_seed, t));
            let c = m.charpoly().expect("square matrix has a charpoly");
            let divides = phi.divides(&c).expect("same field");
            if divides {
                acc.divisible += 1;
            }
            if t < CROSSCHECK_TRIALS {
                let lifted = lift_minus_generator(&m, &k_ext).expect("lift over F_q");
                let singular = lifted.rank() < n;
                acc.checked += 1;
                if singular == divides {
                    acc.agree += 1;
                }
            }
        },
        |a, b| {
            a.divisible += b.divisible;
            a.checked += b.checked;
            a.agree += b.agree;
        },
    );
    let deg = phi.degree().expect("validated nonzero");
    let pred = divisibility_limit(cfg.p, deg, PRED_TOL)?;
    let mut rows = vec![row_vs_bounded(acc.divisible, cfg.trials, "divisible", &pred, cfg)];
    rows.push(statistical_verdict(
        acc.agree,
        acc.checked,
        "rank_crosscheck_agree",
        1.0,
        0.0,
        &cfg.policy,
    ));
    Ok(finish(cfg, "divisibility", cfg.trials, 0, rows, Vec::new()))
}

#[derive(Clone, Default)]
struct PartAcc {
    hist: std::collections::BTreeMap<String, u64>,
    joint: std::collections::BTreeMap<String, u64>,
}

fn partition_bucket(lambda: &crate::partition::Partition) -> String {
    if lambda.size() <= 4 {
        lambda.to_string()
    } else {
        "other".to_string()
    }
}

/// Histogram of the module type λ_φ(M) against the limiting measure, with
/// an optional second polynomial for the joint-independence table.
pub fn run_partition_experiment(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult> {
    let pre = prepare(cfg)?;
    let ext = cfg
        .extension
        .as_ref()
        .ok_or_else(|| Error::Config("partition experiment needs an extension".into()))?;
    let (phi, _) = cfg.parse_extension(&pre.field, ext)?;
    let phi2 = match &cfg.extension2 {
        Some(e2) => Some(cfg.parse_extension(&pre.field, e2)?.0),
        None => None,
    };
    if let Some(p2) = &phi2 {
        if p2 == &phi {
            return Err(Error::Config(
                "joint partition statistics need two distinct polynomials".into(),
            ));
        }
    }
    let n = cfg.n;
    let acc = parallel_trials(
        cfg.trials,
        workers,
        PartAcc::default,
        |t, acc: &mut PartAcc| {
            let m = sample_matrix(&pre.field, n, n, &pre.sampler, &TrialRng::new(cfg.master_seed, t));
            let l1 = m.lambda_phi(&phi).expect("validated irreducible");
            let b1 = partition_bucket(&l1);
            *acc.hist.entry(b1.clone()).or_insert(0) += 1;
            if let Some(p2) = &phi2 {
                let b2 = partition_bucket(&m.lambda_phi(p2).expect("validated irreducible"));
                // joint table over the two heaviest marginal cells
                if (b1 == "[]" || b1 == "[1]") && (b2 == "[]" || b2 == "[1]") {
                    *acc.joint.entry(format!("{b1}|{b2}")).or_insert(0) += 1;
                }
            }
        },
        |a, b| {
            for (k, v) in b.hist {
                *a.hist.entry(k).or_insert(0) += v;
            }
            for (k, v) in b.joint {
                *a.joint.entry(k).or_insert(0) += v;
            }
        },
    );
    let q = ext_order(cfg.p, phi.degree().expect("monic"))?;
    let mut rows = Vec::new();
    let mut pred_sum = 0.0;
    let mut err_sum = 0.0;
    let mut covered = 0u64;
    for size in 0..=4u64 {
        for lambda in partitions_of(size) {
            let pred = cohen_lenstra_measure(q, &lambda, PRED_TOL)?;
            let key = lambda.to_string();
            let count = acc.hist.get(&key).copied().unwrap_or(0);
            rows.push(row_vs_bounded(count, cfg.trials, &key, &pred, cfg));
            pred_sum += pred.value;
            err_sum += pred.error_bound;
            covered += count;
        }
    }
    let other = Bounded::new((1.0 - pred_sum).max(0.0), err_sum);
    rows.push(row_vs_bounded(cfg.trials - covered, cfg.trials, "other", &other, cfg));
    if let Some(p2) = &phi2 {
        let q2 = ext_order(cfg.p, p2.degree().expect("monic"))?;
        for ka in ["[]", "[1]"] {
            for kb in ["[]", "[1]"] {
                let la: crate::partition::Partition = ka.parse().expect("bucket key parses");
                let lb: crate::partition::Partition = kb.parse().expect("bucket key parses");
                let ma = cohen_lenstra_measure(q, &la, PRED_TOL)?;
                let mb = cohen_lenstra_measure(q2, &lb, PRED_TOL)?;
                let pred = Bounded::new(
                    ma.value * mb.value,
                    ma.error_bound * mb.value
                        + mb.error_bound * ma.value
                        + ma.error_bound * mb.error_bound,
                );
                let key = format!("{ka}|{kb}");
                let count = acc.joint.get(&key).copied().unwrap_or(0);
                rows.push(row_vs_bounded(count, cfg.trials, &format!("joint={key}"), &pred, cfg));
            }
        }
    }
    Ok(finish(cfg, "partition", cfg.trials, 0, rows, Vec::new()))
}

fn ext_order(p: u64, degree: usize) -> Result<u64> {
    p.checked_pow(degree as u32)
        .ok_or_else(|| Error::Domain("extension order exceeds u64".into()))
}

#[derive(Clone)]
struct NormalAcc {
    excluded: u64,
    w1_zero: u64,
    pair_hits: u64,
    pair_cond_total: u64,
    na_ok: u64,
    rho_max: f64,
}

/// Fraction of coordinate deviation |n_a/n − 1/p| tolerated by the
/// equidistribution event, in units of 1/p.
const NA_DELTA: f64 = 0.5;

/// Entrywise statistics of the normal vector of a random n×(n−1) matrix:
/// P(w_1 = 0), the pair event in both the unconditional and the
/// w_j ≠ 0-conditioned conventions, equidistribution of the value counts
/// n_a, and the anti-concentration of the kernel vector itself. Trials
/// whose column span is rank-deficient are excluded and counted.
pub fn run_normal_vector_experiment(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult> {
    let pre = prepare(cfg)?;
    let n = cfg.n;
    if n < 2 {
        return Err(Error::Config("normal-vector experiment needs n >= 2".into()));
    }
    let pair = cfg.pair;
    if let Some(pc) = &pair {
        if pc.i >= n || pc.j >= n || pc.i == pc.j {
            return Err(Error::Config("pair indices must be distinct and below n".into()));
        }
    }
    let p = cfg.p;
    let acc = parallel_trials(
        cfg.trials,
        workers,
        || NormalAcc {
            excluded: 0,
            w1_zero: 0,
            pair_hits: 0,
            pair_cond_total: 0,
            na_ok: 0,
            rho_max: 0.0,
        },
        |t, acc: &mut NormalAcc| {
            let m =
                sample_matrix(&pre.field, n, n - 1, &pre.sampler, &TrialRng::new(cfg.master_seed, t));
            let w = match m.canonical_normal_vector().expect("n x (n-1) shape") {
                Some(w) => w,
                None => {
                    acc.excluded += 1;
                    return;
                }
            };
            if w[0] == 0 {
                acc.w1_zero += 1;
            }
            if let Some(pc) = &pair {
                if w[pc.j] != 0 {
                    acc.pair_cond_total += 1;
                    let inv = pre.field.inv(w[pc.j]).expect("nonzero");
                    if pre.field.mul(w[pc.i], inv) == pre.field.reduce_u64(pc.a) {
                        acc.pair_hits += 1;
                    }
                }
            }
            let mut counts = vec![0u64; p as usize];
            for &wi in &w {
                counts[wi as usize] += 1;
            }
            // |n_a/n - 1/p| <= delta/p for every a, checked in integers:
            // |p*n_a - n| <= delta*n with delta = 1/2
            if counts.iter().all(|&c| {
                let diff = (p * c) as i128 - n as i128;
                2 * diff.abs() <= n as i128
            }) {
                acc.na_ok += 1;
            }
            let rho = rho_exact(&pre.field, &w, &pre.spec, RhoMode::Float)
                .expect("nonempty walk")
                .rho;
            acc.rho_max = acc.rho_max.max(rho);
        },
        |a, b| {
            a.excluded += b.excluded;
            a.w1_zero += b.w1_zero;
            a.pair_hits += b.pair_hits;
            a.pair_cond_total += b.pair_cond_total;
            a.na_ok += b.na_ok;
            a.rho_max = a.rho_max.max(b.rho_max);
        },
    );
    let used = cfg.trials - acc.excluded;
    let inv_p = 1.0 / p as f64;
    let mut rows = vec![statistical_verdict(acc.w1_zero, used, "w1=0", inv_p, 0.0, &cfg.policy)];
    if let Some(pc) = &pair {
        let tag = format!("[i={},j={},a={}]", pc.i, pc.j, pc.a);
        rows.push(statistical_verdict(
            acc.pair_hits,
            acc.pair_cond_total,
            &format!("pair_cond{tag}"),
            inv_p,
            0.0,
            &cfg.policy,
        ));
        rows.push(statistical_verdict(
            acc.pair_hits,
            used,
            &format!("pair_uncond{tag}"),
            (p - 1) as f64 / (p * p) as f64,
            0.0,
            &cfg.policy,
        ));
    }
    let na_freq = if used > 0 { acc.na_ok as f64 / used as f64 } else { 0.0 };
    // fit c in the 1 - exp(-c delta^2 n / p) shape; the failure probability
    // is truncated at the resolution of the sample so the fit stays finite
    let miss = (1.0 - na_freq).max(0.5 / used.max(1) as f64);
    let fitted_c = -miss.ln() * p as f64 / (NA_DELTA * NA_DELTA * n as f64);
    let extras = vec![
        ("max_rho".to_string(), acc.rho_max),
        ("na_delta".to_string(), NA_DELTA),
        ("na_within_delta_freq".to_string(), na_freq),
        ("na_fitted_c".to_string(), fitted_c),
    ];
    Ok(finish(cfg, "normal_vector", used, acc.excluded, rows, extras))
}
