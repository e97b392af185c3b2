//! Closed-form and generating-function statistics for random matrices over
//! F_q: exact finite-n rank laws, universal corank limits, Cohen-Lenstra
//! measures on partitions, characteristic-polynomial divisibility limits, the
//! matrix cycle-index identity, and eigenvalue-free (derangement) series.
//!
//! Exact values are `BigRational`; limits computed from infinite products or
//! series come back as [`Bounded`] with a certified truncation error so
//! callers can assert tolerances instead of trusting hidden defaults.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::prime_power_base;
use crate::partition::{partitions_of, Partition};
use crate::poly::irreducible_count;
use crate::qpoch::{q_pochhammer_exact, q_pochhammer_infinite, Bounded};
use crate::series::PowerSeries;

fn require_prime_power(q: u64) -> Result<u64> {
    prime_power_base(q).ok_or(Error::NotPrimePower(q))?;
    Ok(q)
}

fn big_ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn inv_q(q: u64) -> BigRational {
    big_ratio(BigInt::one(), BigInt::from(q))
}

/// |GL(n, q)| = prod_{i=0}^{n-1} (q^n - q^i); |GL(0, q)| = 1.
pub fn gl_order(n: usize, q: u64) -> Result<BigInt> {
    require_prime_power(q)?;
    let qn = BigInt::from(q).pow(n as u32);
    let mut acc = BigInt::one();
    let mut qi = BigInt::one();
    for _ in 0..n {
        acc *= &qn - &qi;
        qi *= q;
    }
    Ok(acc)
}

/// Gaussian binomial coefficient: the number of r-dimensional subspaces of
/// F_q^n.
pub fn gaussian_binomial(n: usize, r: usize, q: u64) -> Result<BigInt> {
    require_prime_power(q)?;
    if r > n {
        return Ok(BigInt::zero());
    }
    let mut acc = BigRational::one();
    let qb = BigInt::from(q);
    for i in 0..r {
        let num = qb.pow((n - i) as u32) - BigInt::one();
        let den = qb.pow((i + 1) as u32) - BigInt::one();
        acc *= big_ratio(num, den);
    }
    debug_assert!(acc.is_integer());
    Ok(acc.to_integer())
}

/// Number of n x n matrices over F_q of rank exactly r:
/// (# of column spaces) * (# of surjections onto one) =
/// binom_q(n,r)^2 * |GL(r,q)|.
pub fn matrix_rank_count(n: usize, r: usize, q: u64) -> Result<BigInt> {
    let b = gaussian_binomial(n, r, q)?;
    Ok(&b * &b * gl_order(r, q)?)
}

/// P(an iid-uniform n x n matrix over F_q has corank k), exact.
pub fn uniform_rank_prob(n: usize, q: u64, k: usize) -> Result<BigRational> {
    require_prime_power(q)?;
    if k > n {
        return Err(Error::Domain(format!("corank {k} out of range for n = {n}")));
    }
    let total = BigInt::from(q).pow((n * n) as u32);
    Ok(big_ratio(matrix_rank_count(n, n - k, q)?, total))
}

/// Limiting corank-d probability as n grows:
/// (1/q^{d^2}) * prod_{i=d+1}^inf (1 - q^{-i}) / prod_{i=1}^{d} (1 - q^{-i}).
pub fn universal_corank_prob(q: u64, d: usize, tol: f64) -> Result<Bounded> {
    require_prime_power(q)?;
    let inf = q_pochhammer_infinite(&inv_q(q), (tol / 4.0).max(1e-16))?;
    // denominator q^{d^2} * ((1/q)_d)^2, exact
    let finite = q_pochhammer_exact(&inv_q(q), d as u64);
    let denom = BigRational::from_integer(BigInt::from(q).pow((d * d) as u32)) * &finite * &finite;
    let denom_f = crate::series::rational_to_f64(&denom);
    let value = inf.value / denom_f;
    let error = inf.error_bound / denom_f + 4.0 * f64::EPSILON * value.abs() + f64::MIN_POSITIVE;
    Ok(Bounded { value, error_bound: error })
}

/// q^{sum_i (lambda'_i)^2} * prod_i (1/q)_{m_i(lambda)} — the reciprocal of
/// the lambda-term's weight in the cycle-index series; empty lambda gives 1.
pub fn partition_weight(q: u64, lambda: &Partition) -> Result<BigRational> {
    require_prime_power(q)?;
    let dss = lambda.dual_square_sum();
    if dss > u32::MAX as u64 {
        return Err(Error::BudgetExceeded("partition too large for exact weight".into()));
    }
    let mut acc = BigRational::from_integer(BigInt::from(q).pow(dss as u32));
    for (_, m) in lambda.multiplicities() {
        acc *= q_pochhammer_exact(&inv_q(q), m as u64);
    }
    Ok(acc)
}

/// The classical name c_lambda(q); requires a nonempty lambda.
pub fn cycle_index_weight(q: u64, lambda: &Partition) -> Result<BigRational> {
    if lambda.is_empty() {
        return Err(Error::InvalidPartition("cycle_index_weight needs a nonempty partition".into()));
    }
    partition_weight(q, lambda)
}

/// Cohen-Lenstra measure M_q(lambda) = prod_{r>=1}(1 - q^{-r}) / c_lambda(q).
pub fn cohen_lenstra_measure(q: u64, lambda: &Partition, tol: f64) -> Result<Bounded> {
    require_prime_power(q)?;
    let inf = q_pochhammer_infinite(&inv_q(q), (tol / 4.0).max(1e-16))?;
    let c = partition_weight(q, lambda)?;
    let c_f = crate::series::rational_to_f64(&c);
    let value = inf.value / c_f;
    let error = inf.error_bound / c_f + 4.0 * f64::EPSILON * value.abs() + f64::MIN_POSITIVE;
    Ok(Bounded { value, error_bound: error })
}

/// Limiting probability that a fixed irreducible of degree d divides the
/// characteristic polynomial: 1 - prod_{i>=1}(1 - q^{-i d}), i.e. the
/// complement of the empty-partition Cohen-Lenstra mass at parameter q^d.
pub fn divisibility_limit(q: u64, d: usize, tol: f64) -> Result<Bounded> {
    require_prime_power(q)?;
    if d == 0 {
        return Err(Error::Domain("degree must be at least 1".into()));
    }
    let x = big_ratio(BigInt::one(), BigInt::from(q).pow(d as u32));
    let inf = q_pochhammer_infinite(&x, (tol / 2.0).max(1e-16))?;
    Ok(Bounded {
        value: 1.0 - inf.value,
        error_bound: inf.error_bound + 2.0 * f64::EPSILON,
    })
}

/// Sum over partitions of s of 1/partition_weight — one block of the
/// cycle-index factor for a fixed irreducible.
fn block_coefficient(q: u64, s: u64) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for lam in partitions_of(s) {
        acc += partition_weight(q, &lam)?.recip();
    }
    Ok(acc)
}

/// One cycle-index factor for a degree-d irreducible, truncated at n_trunc:
/// F_d(u) = 1 + sum_{s: s*d <= n_trunc} u^{s d} / c-weights at parameter q^d.
fn factor_series(q: u64, d: usize, n_trunc: usize) -> Result<PowerSeries> {
    let qd = q
        .checked_pow(d as u32)
        .ok_or_else(|| Error::BudgetExceeded(format!("q^{d} overflows u64")))?;
    let mut f_d = PowerSeries::one(n_trunc);
    let mut s = 1u64;
    while (s as usize) * d <= n_trunc {
        f_d = f_d.add(&PowerSeries::monomial(
            n_trunc,
            s as usize * d,
            block_coefficient(qd, s)?,
        ));
        s += 1;
    }
    Ok(f_d)
}

/// The cycle-index identity at the all-ones specialization. The product of
/// the factors F_d(u)^{I(q,d)} over monic irreducibles *other than x*
/// telescopes to the invertible-matrix count normalization:
///
///   F_1(u)^{q-1} * prod_{d>=2} F_d(u)^{I(q,d)} = 1/(1-u) + O(u^{N+1}).
///
/// (Including the phi = x factor as well gives sum_n u^n q^{n^2}/|GL(n,q)|
/// instead — see `mat_normalization_series` in the tests.) Returns whether
/// the identity holds exactly plus the residual series.
pub fn count_all_identity_check(q: u64, n_trunc: usize) -> Result<(bool, PowerSeries)> {
    require_prime_power(q)?;
    if n_trunc > 16 {
        return Err(Error::BudgetExceeded(format!(
            "identity check truncation {n_trunc} exceeds the supported 16"
        )));
    }
    let mut lhs = PowerSeries::one(n_trunc);
    for d in 1..=n_trunc.max(1) {
        if d > n_trunc {
            break;
        }
        let all = irreducible_count(q, d as u64)?
            .to_u64()
            .ok_or_else(|| Error::BudgetExceeded(format!("irreducible count at d = {d} too large")))?;
        let count = if d == 1 { all - 1 } else { all };
        lhs = lhs.mul(&factor_series(q, d, n_trunc)?.pow_u64(count));
    }
    let residual = lhs.sub(&PowerSeries::geometric(n_trunc));
    Ok((residual.is_zero(), residual))
}

/// Exact series whose n-th coefficient is H_{n,q}/|GL(n,q)|: the probability
/// that a uniform element of GL(n,q) has no eigenvalue in F_q. Computed as
/// F(u)^{1-q} / (1-u) with F(u) = 1 + sum_s u^s * block_coefficient(q, s),
/// the exponent split as reciprocal-then-(q-1)-power.
pub fn derangement_series(q: u64, n_trunc: usize) -> Result<PowerSeries> {
    require_prime_power(q)?;
    if n_trunc > 40 {
        return Err(Error::BudgetExceeded(format!(
            "derangement series truncation {n_trunc} exceeds the supported 40"
        )));
    }
    let mut f = PowerSeries::one(n_trunc);
    for s in 1..=n_trunc as u64 {
        f = f.add(&PowerSeries::monomial(n_trunc, s as usize, block_coefficient(q, s)?));
    }
    let out = f.recip()?.pow_u64(q - 1).mul(&PowerSeries::geometric(n_trunc));
    debug_assert!(out.coeff(0).is_one());
    Ok(out)
}

/// Limit of the derangement coefficients:
/// (1 + sum_{i>=1} q^{i(i-1)} / [q]_i)^{1-q}, [q]_i = prod_{k=0}^{i-1}(q^i - q^k).
/// The term ratio is 1/(q - q^{-i}) <= 2/3, giving a geometric tail bound;
/// the bracket [S, S + tail] is raised to the exact integer power 1-q on both
/// ends, so the returned error bound is certified.
pub fn fine_herstein_limit(q: u64, tol: f64) -> Result<Bounded> {
    require_prime_power(q)?;
    if q > i32::MAX as u64 {
        return Err(Error::BudgetExceeded(format!("exponent 1 - {q} exceeds supported range")));
    }
    let qb = BigInt::from(q);
    let term = |i: u32| -> BigRational {
        // q^{i(i-1)} / prod_{k=0}^{i-1} (q^i - q^k)
        let num = qb.pow(i * (i - 1));
        let mut den = BigInt::one();
        let qi = qb.pow(i);
        for k in 0..i {
            den *= &qi - qb.pow(k);
        }
        big_ratio(num, den)
    };
    let mut k_terms = 4u32;
    loop {
        let mut s = BigRational::one();
        for i in 1..=k_terms {
            s += term(i);
        }
        let tail = term(k_terms + 1) * BigRational::from_integer(BigInt::from(3));
        // bracket the limit: S <= true sum <= S + tail; x -> x^{1-q} is decreasing
        let hi = s.pow(-((q - 1) as i32));
        let lo = (&s + &tail).pow(-((q - 1) as i32));
        let value = crate::series::rational_to_f64(&((&hi + &lo) / BigRational::from_integer(BigInt::from(2))));
        let half_width = crate::series::rational_to_f64(&((&hi - &lo) / BigRational::from_integer(BigInt::from(2))));
        let error = half_width + 8.0 * f64::EPSILON * value.abs() + f64::MIN_POSITIVE;
        if error <= tol || k_terms >= 256 {
            return Ok(Bounded { value, error_bound: error });
        }
        k_terms *= 2;
    }
}

/// Limiting probability that an iid-entry matrix over F_q has no eigenvalue
/// in F_q: by asymptotic independence of the q linear-factor module types,
/// the product of their empty-partition masses, (prod_{i>=1}(1 - q^{-i}))^q.
/// Tends to 1/e as q grows.
pub fn mat_eigenvalue_free_limit(q: u64, tol: f64) -> Result<Bounded> {
    require_prime_power(q)?;
    if q > i32::MAX as u64 {
        return Err(Error::BudgetExceeded(format!("exponent {q} exceeds supported range")));
    }
    let c = universal_corank_prob(q, 0, tol / (2.0 * q as f64))?;
    let lo = (c.value - c.error_bound).max(0.0).powi(q as i32);
    let hi = (c.value + c.error_bound).powi(q as i32);
    let value = c.value.powi(q as i32);
    let error = (hi - lo) + 8.0 * f64::EPSILON * value + f64::MIN_POSITIVE;
    Ok(Bounded { value, error_bound: error })
}

/// Corank law: exact at finite n, or the universal large-n limit.
#[derive(Clone, Debug)]
pub enum RankLaw {
    ExactFinite { q: u64, n: usize, probs: Vec<BigRational> },
    UniversalLimit { q: u64, probs: Vec<Bounded> },
}

impl RankLaw {
    pub fn exact_finite(n: usize, q: u64) -> Result<RankLaw> {
        let probs: Vec<BigRational> = (0..=n)
            .map(|k| uniform_rank_prob(n, q, k))
            .collect::<Result<_>>()?;
        let total = probs.iter().fold(BigRational::zero(), |acc, p| acc + p);
        if !total.is_one() {
            return Err(Error::Internal("finite rank law does not sum to 1".into()));
        }
        Ok(RankLaw::ExactFinite { q, n, probs })
    }

    pub fn universal(q: u64, max_corank: usize, tol: f64) -> Result<RankLaw> {
        let probs = (0..=max_corank)
            .map(|d| universal_corank_prob(q, d, tol))
            .collect::<Result<_>>()?;
        Ok(RankLaw::UniversalLimit { q, probs })
    }

    /// (value, error_bound) for corank k; zero for coranks beyond the table.
    pub fn corank_prob_f64(&self, k: usize) -> (f64, f64) {
        match self {
            RankLaw::ExactFinite { probs, .. } => probs
                .get(k)
                .map(|r| (crate::series::rational_to_f64(r), 0.0))
                .unwrap_or((0.0, 0.0)),
            RankLaw::UniversalLimit { probs, .. } => probs
                .get(k)
                .map(|b| (b.value, b.error_bound))
                .unwrap_or((0.0, 0.0)),
        }
    }

    pub fn max_corank(&self) -> usize {
        match self {
            RankLaw::ExactFinite { probs, .. } => probs.len() - 1,
            RankLaw::UniversalLimit { probs, .. } => probs.len() - 1,
        }
    }
}
