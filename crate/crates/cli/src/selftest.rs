//! Built-in invariant suite: frozen reference values, oracle equalities,
//! bound dominations, and the determinism contract, each cheap enough to
//! run on every install. One line per check; exit 1 on any failure.

use std::process::ExitCode;

use num::rational::BigRational;
use num::ToPrimitive;

use fflab::anticonc::{
    centered_lift, erdos_turan_rhs, fourier_upper_bound, rho_exact, rho_fourier, rk_count,
    rk_delta_count, smallp_bound_check, ulcd, DistributionSpec, RhoMode, ULCDParams,
};
use fflab::experiments::{
    enumerate_oracle, run_experiment, AtomConfig, DistributionConfig, ExperimentConfig,
    OracleStatistic, PolicyConfig, StatisticKind,
};
use fflab::field::PrimeModulus;
use fflab::partition::Partition;
use fflab::prng::{mix64, TrialRng};
use fflab::series::ratio_u64;
use fflab::stats::{
    cohen_lenstra_measure, count_all_identity_check, derangement_series, divisibility_limit,
    fine_herstein_limit, uniform_rank_prob, universal_corank_prob,
};

struct Suite {
    failures: u32,
    index: u32,
}

impl Suite {
    fn check(&mut self, name: &str, ok: bool) {
        self.index += 1;
        println!("check {:02} {name} ... {}", self.index, if ok { "ok" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

pub fn run() -> ExitCode {
    let mut s = Suite { failures: 0, index: 0 };

    let near = |b: &fflab::qpoch::Bounded, target: f64| (b.value - target).abs() < 1e-9;

    s.check(
        "splitmix finalizer reference values",
        mix64(1) == 0x5692161D100B05E5 && mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF,
    );
    s.check(
        "corank limits over F_2",
        near(&universal_corank_prob(2, 0, 1e-12).unwrap(), 0.288788095086602)
            && near(&universal_corank_prob(2, 1, 1e-12).unwrap(), 0.577576190173204),
    );
    s.check(
        "module-type measures over F_3",
        near(&cohen_lenstra_measure(3, &Partition::empty(), 1e-12).unwrap(), 0.560126077927949)
            && near(
                &cohen_lenstra_measure(3, &Partition::new(vec![1]).unwrap(), 1e-12).unwrap(),
                0.280063038963974,
            ),
    );
    s.check(
        "divisibility limit q=3 d=2",
        near(&divisibility_limit(3, 2, 1e-12).unwrap(), 0.123439645964036),
    );
    s.check(
        "eigenvalue-free limit at q=2 equals corank-0 mass",
        near(&fine_herstein_limit(2, 1e-12).unwrap(), 0.288788095086602),
    );
    s.check(
        "cycle-index identity through order 6",
        [2u64, 3, 4]
            .iter()
            .all(|&q| count_all_identity_check(q, 6).map(|(ok, _)| ok).unwrap_or(false)),
    );
    s.check(
        "derangement coefficient a_2 over F_2 is 1/3",
        derangement_series(2, 2).unwrap().coeff(2) == ratio_u64(1, 3),
    );

    let f2 = PrimeModulus::new(2).unwrap();
    let uniform2 = DistributionSpec::uniform(&f2).unwrap();
    let rank_oracle = enumerate_oracle(&f2, 2, &OracleStatistic::Rank, &uniform2).unwrap();
    s.check(
        "2x2 enumeration equals the exact rank law",
        (0..=2).all(|k| rank_oracle[&(2 - k).to_string()] == uniform_rank_prob(2, 2, k).unwrap()),
    );

    let f13 = PrimeModulus::new(13).unwrap();
    let pm1_13 = DistributionSpec::bernoulli_pm1(&f13).unwrap();
    let mut fourier_ok = true;
    let mut bound_ok = true;
    let stream = TrialRng::new(0x5E1F, 0);
    for t in 0..20u64 {
        let mut rng = stream.entry(t);
        let w: Vec<u64> = (0..5).map(|_| rng.next_below(13)).collect();
        if w.iter().all(|&x| x == 0) {
            continue;
        }
        let exact = rho_exact(&f13, &w, &pm1_13, RhoMode::Float).unwrap().rho;
        let by_fourier = rho_fourier(&f13, &w, &pm1_13).unwrap();
        fourier_ok &= (exact - by_fourier).abs() <= 1e-9;
        bound_ok &= exact <= fourier_upper_bound(&f13, &w, &pm1_13).unwrap() + 1e-12;
    }
    s.check("fourier inversion reproduces rho to 1e-9", fourier_ok);
    s.check("gaussian-decay upper bound dominates rho", bound_ok);

    let all_ones = [1u64; 4];
    let lift = centered_lift(&f13, &all_ones);
    s.check(
        "worked denominator example: p=13 all-ones gives 12",
        ulcd(&lift, &ULCDParams::new(0.125, 1.0).unwrap()).unwrap() == 12,
    );
    s.check(
        "sign-walk return counts: R_1 and the distinct variant",
        rk_count(&f13, &[1, 2], 1).unwrap() == 4u32.into()
            && rk_delta_count(&PrimeModulus::new(3).unwrap(), &[0, 0], 1, 0.5).unwrap()
                == 8u32.into(),
    );
    s.check(
        "small-p comparison at the worked example",
        {
            let f3 = PrimeModulus::new(3).unwrap();
            let (bound, ok) = smallp_bound_check(&f3, &[1; 100]).unwrap();
            ok && (bound - (-100.0 / 18.0f64).exp()).abs() < 1e-12
        },
    );
    s.check(
        "equidistribution tail bound stays one-sided on a grid",
        {
            let mut ok = true;
            for t in 0..8u64 {
                let mut rng = stream.entry(100 + t);
                let a: Vec<f64> =
                    (0..6).map(|_| rng.next_below(1000) as f64 / 1000.0).collect();
                for eps in [0.05, 0.2, 0.45] {
                    let ing = erdos_turan_rhs(&a, eps).unwrap();
                    let exact = fflab::anticonc::small_ball_mod1(
                        &a,
                        eps,
                        fflab::anticonc::SmallBallMode::ExactEnum,
                    )
                    .unwrap()
                    .0;
                    ok &= exact <= ing.bound() + 1e-12;
                }
            }
            ok
        },
    );

    // determinism: a small experiment is byte-identical across worker counts
    let cfg = ExperimentConfig {
        schema_version: 1,
        n: 6,
        p: 3,
        extension: None,
        extension2: None,
        distribution: DistributionConfig {
            atoms: vec![
                AtomConfig { value: 1, num: 1, den: 2 },
                AtomConfig { value: 2, num: 1, den: 2 },
            ],
            alpha: None,
        },
        trials: 400,
        master_seed: 7,
        workers: 1,
        statistic: StatisticKind::Rank,
        policy: PolicyConfig::default(),
        joint_values: None,
        pair: None,
    };
    let lone = run_experiment(&cfg, Some(1)).map(|r| r.to_json());
    let multi = run_experiment(&cfg, Some(4)).map(|r| r.to_json());
    s.check(
        "experiment results identical at 1 and 4 workers",
        matches!((&lone, &multi), (Ok(a), Ok(b)) if a == b),
    );
    s.check(
        "rank histogram conserves trials",
        run_experiment(&cfg, None)
            .map(|r| r.rows.iter().map(|row| row.count).sum::<u64>() == cfg.trials)
            .unwrap_or(false),
    );
    s.check(
        "truncated module-type measure nearly sums to one",
        {
            let mut total = 0.0;
            for size in 0..=20u64 {
                for lam in fflab::partition::partitions_of(size) {
                    total += cohen_lenstra_measure(3, &lam, 1e-12).unwrap().value;
                }
            }
            (total - 1.0).abs() < 1e-6
        },
    );
    s.check(
        "exact rho is a rational probability deviation",
        {
            let report = rho_exact(&f13, &[1, 2, 3], &pm1_13, RhoMode::ExactRational).unwrap();
            let (rho, dist) = report.exact.unwrap();
            let total: BigRational = dist.iter().cloned().sum();
            total == BigRational::from_integer(1.into())
                && rho.to_f64().unwrap() <= 1.0 - 1.0 / 13.0
        },
    );

    println!(
        "selftest: {} checks, {} failures",
        s.index, s.failures
    );
    if s.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
