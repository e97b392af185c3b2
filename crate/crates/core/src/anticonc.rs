//! Anti-concentration diagnostics for linear walks over F_p.
//!
//! For a step vector w ∈ F_p^n and i.i.d. coefficients μ_1, …, μ_n drawn
//! from a balanced distribution on F_p, the central quantity is the
//! concentration deviation
//!
//! ρ(w) = max_a |P(μ_1 w_1 + ⋯ + μ_n w_n ≡ a) − 1/p|,
//!
//! which measures how far the walk is from its uniform limit. This module
//! computes ρ exactly (cyclic convolutions over rationals), cross-checks it
//! through the discrete Fourier transform, and implements the structural
//! quantities that control it: the unnormalized least common denominator of
//! the centered lift, quadratic level sets, signed solution counts R_k,
//! Halász-type upper bounds, and detection of rank-one progressions that
//! capture near-degenerate dilations.

use std::collections::BTreeMap;

use num::bigint::{BigInt, BigUint};
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::prng::{AtomSampler, TrialRng};
use crate::series::{ratio_u64, rational_to_f64};

/// Distance from a real number to the nearest integer.
pub fn torus_norm(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// A finitely supported coefficient distribution on F_p with exact rational
/// probabilities. `alpha` records the balancedness margin: no single atom
/// carries more than 1 − α of the mass.
#[derive(Clone, Debug)]
pub struct DistributionSpec {
    field: PrimeModulus,
    atoms: Vec<(u64, BigRational)>,
    alpha: BigRational,
}

impl DistributionSpec {
    /// Validates and canonicalizes: residues reduced, duplicates merged,
    /// atoms sorted ascending. When `alpha` is omitted the largest valid
    /// margin 1 − max_a P(a) is recorded.
    pub fn new(
        field: &PrimeModulus,
        atoms: &[(u64, BigRational)],
        alpha: Option<BigRational>,
    ) -> Result<DistributionSpec> {
        let mut merged: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (v, pr) in atoms {
            if pr <= &BigRational::zero() {
                return Err(Error::InvalidDistribution(
                    "atom probabilities must be positive".into(),
                ));
            }
            let r = field.reduce_u64(*v);
            let slot = merged.entry(r).or_insert_with(BigRational::zero);
            *slot = slot.clone() + pr;
        }
        if merged.len() < 2 {
            return Err(Error::InvalidDistribution(
                "need at least two distinct atoms".into(),
            ));
        }
        let total = merged.values().fold(BigRational::zero(), |a, b| a + b);
        if total != BigRational::one() {
            return Err(Error::InvalidDistribution(
                "atom probabilities must sum to 1".into(),
            ));
        }
        let max_prob = merged.values().max().cloned().expect("nonempty");
        let alpha = match alpha {
            Some(a) => {
                if a <= BigRational::zero() || a >= BigRational::one() {
                    return Err(Error::InvalidDistribution(
                        "alpha must lie in (0, 1)".into(),
                    ));
                }
                if max_prob > BigRational::one() - &a {
                    return Err(Error::InvalidDistribution(
                        "distribution is not alpha-balanced: an atom exceeds 1 - alpha".into(),
                    ));
                }
                a
            }
            None => BigRational::one() - &max_prob,
        };
        Ok(DistributionSpec {
            field: field.clone(),
            atoms: merged.into_iter().collect(),
            alpha,
        })
    }

    /// Uniform ±1 signs. Over F_2 the two signs coincide, leaving a single
    /// atom, which is rejected; use [`DistributionSpec::uniform`] there.
    pub fn bernoulli_pm1(field: &PrimeModulus) -> Result<DistributionSpec> {
        let half = ratio_u64(1, 2);
        DistributionSpec::new(field, &[(1, half.clone()), (field.p() - 1, half)], None)
    }

    /// Uniform over all of F_p.
    pub fn uniform(field: &PrimeModulus) -> Result<DistributionSpec> {
        let pr = ratio_u64(1, field.p());
        let atoms: Vec<(u64, BigRational)> = (0..field.p()).map(|v| (v, pr.clone())).collect();
        DistributionSpec::new(field, &atoms, None)
    }

    /// Uniform over a given set of residues.
    pub fn uniform_on(field: &PrimeModulus, values: &[u64]) -> Result<DistributionSpec> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let pr = ratio_u64(1, values.len() as u64);
        let atoms: Vec<(u64, BigRational)> = values.iter().map(|&v| (v, pr.clone())).collect();
        DistributionSpec::new(field, &atoms, None)
    }

    pub fn field(&self) -> &PrimeModulus {
        &self.field
    }

    pub fn atoms(&self) -> &[(u64, BigRational)] {
        &self.atoms
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn max_prob(&self) -> BigRational {
        self.atoms.iter().map(|(_, pr)| pr).max().cloned().expect("nonempty")
    }

    /// Exact sampler over the atoms (for Monte Carlo ensembles).
    pub fn sampler(&self) -> Result<AtomSampler> {
        AtomSampler::new(&self.atoms)
    }

    /// Distribution ψ of the symmetrized step μ − μ′ (independent copies):
    /// ψ[s] = Σ_a P(μ=a) P(μ′=a−s). Symmetric: ψ[s] = ψ[p−s].
    pub fn symmetrized(&self) -> Vec<BigRational> {
        let p = self.field.p() as usize;
        let mut psi = vec![BigRational::zero(); p];
        for (a, pa) in &self.atoms {
            for (b, pb) in &self.atoms {
                let s = self.field.sub(*a, *b) as usize;
                psi[s] = psi[s].clone() + pa * pb;
            }
        }
        psi
    }

    /// Weights β_t = ψ[t] for t = 1..⌊p/2⌋ of the folded symmetrized walk,
    /// so that P(μ−μ′ = ±t) = 2β_t for t ≠ p−t. Frequencies with β_t = 0 are
    /// dropped. Used by the Fourier-side upper bounds and weighted level
    /// sets; only the decay they certify is one-sided, so float precision
    /// here is harmless.
    pub fn beta_weights(&self) -> Vec<(u64, f64)> {
        let psi = self.symmetrized();
        let p = self.field.p();
        (1..=p / 2)
            .filter_map(|t| {
                let b = rational_to_f64(&psi[t as usize]);
                (b > 0.0).then_some((t, b))
            })
            .collect()
    }
}

/// How to carry the walk distribution: exact rationals (bit-exact ρ) or
/// double precision (large p·n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoMode {
    ExactRational,
    Float,
}

/// Full law of the walk endpoint S = Σ μ_i w_i together with its deviation
/// from uniform.
#[derive(Clone, Debug)]
pub struct RhoReport {
    /// max_a |P(S=a) − 1/p| as a double.
    pub rho: f64,
    /// First atom attaining the maximum deviation.
    pub argmax: u64,
    /// P(S=a) for a = 0..p, as doubles.
    pub distribution: Vec<f64>,
    /// Exact law and deviation when computed in rational mode.
    pub exact: Option<(BigRational, Vec<BigRational>)>,
}

/// Exact anti-concentration of the walk: n successive cyclic convolutions of
/// the point mass at 0 with the pushforward of μ under multiplication by
/// w_i. O(n · p · #atoms) field operations.
pub fn rho_exact(
    field: &PrimeModulus,
    w: &[u64],
    mu: &DistributionSpec,
    mode: RhoMode,
) -> Result<RhoReport> {
    field.check_same(mu.field())?;
    if w.is_empty() {
        return Err(Error::Domain("walk needs at least one step".into()));
    }
    let p = field.p() as usize;
    match mode {
        RhoMode::ExactRational => {
            let mut dist = vec![BigRational::zero(); p];
            dist[0] = BigRational::one();
            for &wi in w {
                let wi = field.reduce_u64(wi);
                let mut next = vec![BigRational::zero(); p];
                for (v, pr) in mu.atoms() {
                    let shift = field.mul(*v, wi) as usize;
                    for (s, mass) in dist.iter().enumerate() {
                        if !mass.is_zero() {
                            let t = (s + shift) % p;
                            next[t] = next[t].clone() + mass * pr;
                        }
                    }
                }
                dist = next;
            }
            let inv_p = ratio_u64(1, p as u64);
            let mut best = BigRational::zero();
            let mut argmax = 0u64;
            for (a, mass) in dist.iter().enumerate() {
                let dev = (mass - &inv_p).abs();
                if dev > best {
                    best = dev;
                    argmax = a as u64;
                }
            }
            Ok(RhoReport {
                rho: rational_to_f64(&best),
                argmax,
                distribution: dist.iter().map(rational_to_f64).collect(),
                exact: Some((best, dist)),
            })
        }
        RhoMode::Float => {
            let mut dist = vec![0.0f64; p];
            dist[0] = 1.0;
            let atoms: Vec<(u64, f64)> = mu
                .atoms()
                .iter()
                .map(|(v, pr)| (*v, rational_to_f64(pr)))
                .collect();
            for &wi in w {
                let wi = field.reduce_u64(wi);
                let mut next = vec![0.0f64; p];
                for &(v, pr) in &atoms {
                    let shift = field.mul(v, wi) as usize;
                    for (s, &mass) in dist.iter().enumerate() {
                        next[(s + shift) % p] += mass * pr;
                    }
                }
                dist = next;
            }
            let inv_p = 1.0 / p as f64;
            let mut best = -1.0f64;
            let mut argmax = 0u64;
            for (a, &mass) in dist.iter().enumerate() {
                let dev = (mass - inv_p).abs();
                if dev > best {
                    best = dev;
                    argmax = a as u64;
                }
            }
            Ok(RhoReport { rho: best, argmax, distribution: dist, exact: None })
        }
    }
}

/// ρ through the inversion formula P(S=a) = 1/p + (1/p) Σ_{x≠0} ∏_i φ(x w_i)
/// e(−xa/p), where φ(y) = E e(yμ/p) is the characteristic function of μ.
/// Serves as a cross-implementation oracle for the convolution.
pub fn rho_fourier(field: &PrimeModulus, w: &[u64], mu: &DistributionSpec) -> Result<f64> {
    field.check_same(mu.field())?;
    if w.is_empty() {
        return Err(Error::Domain("walk needs at least one step".into()));
    }
    let p = field.p();
    let pf = p as f64;
    let tau = std::f64::consts::TAU;
    let atoms: Vec<(u64, f64)> = mu
        .atoms()
        .iter()
        .map(|(v, pr)| (*v, rational_to_f64(pr)))
        .collect();
    let phi: Vec<Complex64> = (0..p)
        .map(|y| {
            atoms
                .iter()
                .map(|&(v, pr)| {
                    let theta = tau * (field.mul(y, v) as f64) / pf;
                    Complex64::new(pr * theta.cos(), pr * theta.sin())
                })
                .sum()
        })
        .collect();
    let mut prod = vec![Complex64::new(1.0, 0.0); p as usize];
    for &wi in w {
        let wi = field.reduce_u64(wi);
        for (x, acc) in prod.iter_mut().enumerate().skip(1) {
            *acc *= phi[field.mul(x as u64, wi) as usize];
        }
    }
    let mut best = 0.0f64;
    for a in 0..p {
        let mut sum = Complex64::new(0.0, 0.0);
        for (x, acc) in prod.iter().enumerate().skip(1) {
            let theta = -tau * (field.mul(x as u64, a) as f64) / pf;
            sum += acc * Complex64::new(theta.cos(), theta.sin());
        }
        // the deviation is real; the imaginary residue is float noise
        best = best.max((sum.re / pf).abs());
    }
    Ok(best)
}

/// One-sided Fourier bound ρ ≤ (1/p) Σ_{x≠0} exp(−2 Σ_i Σ_t β_t ‖x t w_i/p‖²)
/// with β_t the folded weights of the symmetrized step μ − μ′. The exponent
/// constant 2 is deliberately weaker than the sharp 8 from
/// |sin(πθ)| ≥ 2‖θ‖, so float rounding cannot push the bound below ρ.
pub fn fourier_upper_bound(field: &PrimeModulus, w: &[u64], mu: &DistributionSpec) -> Result<f64> {
    field.check_same(mu.field())?;
    let p = field.p();
    let pf = p as f64;
    let betas = mu.beta_weights();
    let mut sum = 0.0f64;
    for x in 1..p {
        let mut expo = 0.0f64;
        for &wi in w {
            let wi = field.reduce_u64(wi);
            for &(t, beta) in &betas {
                let r = field.mul(field.mul(x, t), wi);
                let d = r.min(p - r) as f64 / pf;
                expo += beta * d * d;
            }
        }
        sum += (-2.0 * expo).exp();
    }
    Ok(sum / pf)
}

/// The centered lift w′ = (c_1/p, …, c_n/p) with c_i ∈ [−(p−1)/2, (p−1)/2]
/// the symmetric representative of w_i (for p = 2 the residue 1 lifts to
/// 1/2). Each coordinate satisfies |w′_i| ≤ 1/2 and p·w′_i ∈ Z.
#[derive(Clone, Debug)]
pub struct CenteredLift {
    p: u64,
    numerators: Vec<i64>,
}

impl CenteredLift {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Integer numerators c_i with w′_i = c_i/p.
    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    /// The lifted coordinates as exact rationals.
    pub fn values(&self) -> Vec<BigRational> {
        self.numerators
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), BigInt::from(self.p)))
            .collect()
    }

    /// Map back to canonical residues (round-trip identity).
    pub fn residues(&self) -> Vec<u64> {
        self.numerators
            .iter()
            .map(|&c| c.rem_euclid(self.p as i64) as u64)
            .collect()
    }
}

pub fn centered_lift(field: &PrimeModulus, w: &[u64]) -> CenteredLift {
    let p = field.p();
    let numerators = w
        .iter()
        .map(|&v| {
            let r = field.reduce_u64(v);
            if 2 * r <= p {
                r as i64
            } else {
                r as i64 - p as i64
            }
        })
        .collect();
    CenteredLift { p, numerators }
}

/// Parameters of the unnormalized least common denominator: a dilation L
/// counts as a denominator when dist(Lw′, Zⁿ) ≤ min(γ‖Lw′‖₂, κ).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ULCDParams {
    pub gamma: f64,
    pub kappa: f64,
}

impl ULCDParams {
    pub fn new(gamma: f64, kappa: f64) -> Result<ULCDParams> {
        if !(gamma.is_finite() && gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain("gamma must lie in (0, 1)".into()));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Domain("kappa must be positive".into()));
        }
        Ok(ULCDParams { gamma, kappa })
    }

    /// γ = 1/8 and κ = n^{1/8}: a fixed contraction factor and a slowly
    /// growing proximity budget.
    pub fn default_for_dimension(n: usize) -> ULCDParams {
        ULCDParams { gamma: 0.125, kappa: (n.max(1) as f64).powf(0.125) }
    }
}

/// Smallest positive integer L ≤ p with dist(Lw′, Zⁿ) ≤ min(γ‖Lw′‖₂, κ).
/// Both comparisons are exact: squared distances are integers over p², and
/// γ², κ² enter as the exact binary rationals of the given doubles. The scan
/// always terminates because L = p lands in Zⁿ; for nonzero w′ the result is
/// at least 2 since γ < 1 rules out L = 1.
pub fn ulcd(lift: &CenteredLift, params: &ULCDParams) -> Result<u64> {
    let p = lift.p();
    if lift.numerators().iter().all(|&c| c == 0) {
        return Err(Error::Domain("ULCD of the zero vector is undefined".into()));
    }
    let gamma = BigRational::from_float(params.gamma)
        .ok_or_else(|| Error::Domain("gamma must be finite".into()))?;
    let kappa = BigRational::from_float(params.kappa)
        .ok_or_else(|| Error::Domain("kappa must be finite".into()))?;
    let sum_c2: u128 = lift
        .numerators()
        .iter()
        .map(|&c| (c as i128 * c as i128) as u128)
        .sum();
    let gamma2 = &gamma * &gamma;
    // κ²p²: the proximity budget with both sides scaled by p²
    let kappa_side = &kappa * &kappa * BigRational::from_integer(BigInt::from(p) * BigInt::from(p));
    for l in 1..=p {
        let mut sum_m2: u128 = 0;
        for &c in lift.numerators() {
            let r = (l as i128 * c as i128).rem_euclid(p as i128) as u64;
            let m = r.min(p - r);
            sum_m2 += m as u128 * m as u128;
        }
        let lhs = BigRational::from_integer(BigInt::from(sum_m2));
        let norm_side =
            &gamma2 * BigRational::from_integer(BigInt::from(l) * BigInt::from(l) * BigInt::from(sum_c2));
        if lhs <= norm_side && lhs <= kappa_side {
            return Ok(l);
        }
    }
    Err(Error::Internal("ULCD scan failed to terminate at L = p".into()))
}

/// Nonzero dilation t minimizing ‖(tw)′‖₂², returned with the exact squared
/// norm. Ties break toward the smaller t. Degenerate directions show up as
/// small values here.
pub fn min_dilated_lift_norm_sq(field: &PrimeModulus, w: &[u64]) -> Result<(u64, BigRational)> {
    let p = field.p();
    if w.iter().all(|&v| field.reduce_u64(v) == 0) {
        return Err(Error::Domain("zero vector has no dilation norm".into()));
    }
    let mut best: Option<(u128, u64)> = None;
    for t in 1..p {
        let mut sum_m2: u128 = 0;
        for &wi in w {
            let r = field.mul(t, field.reduce_u64(wi));
            let m = r.min(p - r);
            sum_m2 += m as u128 * m as u128;
        }
        if best.map_or(true, |(s, _)| sum_m2 < s) {
            best = Some((sum_m2, t));
        }
    }
    let (sum_m2, t) = best.expect("p >= 2");
    let norm = BigRational::new(BigInt::from(sum_m2), BigInt::from(p) * BigInt::from(p));
    Ok((t, norm))
}

/// Quadratic level set T(m) = {t : Σ_l ‖t w_l/p‖² ≤ m} with unit weights,
/// decided exactly (membership is the integer comparison Σ m_l² ≤ m·p² with
/// m taken as the exact binary rational of the given double). Sorted output.
pub fn level_set_uniform(
    field: &PrimeModulus,
    w: &[u64],
    m: f64,
    include_zero: bool,
) -> Result<Vec<u64>> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::Domain("level threshold must be a finite nonnegative real".into()));
    }
    let p = field.p();
    let threshold = BigRational::from_float(m).expect("finite")
        * BigRational::from_integer(BigInt::from(p) * BigInt::from(p));
    let start = if include_zero { 0 } else { 1 };
    let mut out = Vec::new();
    for t in start..p {
        let mut sum_m2: u128 = 0;
        for &wi in w {
            let r = field.mul(t, field.reduce_u64(wi));
            let mi = r.min(p - r);
            sum_m2 += mi as u128 * mi as u128;
        }
        if BigRational::from_integer(BigInt::from(sum_m2)) <= threshold {
            out.push(t);
        }
    }
    Ok(out)
}

/// Weighted level set {x : Σ_i Σ_j β_j ‖x t_j w_i/p‖² ≤ m}, evaluated in
/// doubles (the weights come from a float symmetrization). Sorted output.
pub fn level_set_weighted(
    field: &PrimeModulus,
    w: &[u64],
    weights: &[(u64, f64)],
    m: f64,
    include_zero: bool,
) -> Vec<u64> {
    let p = field.p();
    let pf = p as f64;
    let start = if include_zero { 0 } else { 1 };
    (start..p)
        .filter(|&x| {
            let mut sum = 0.0f64;
            for &wi in w {
                let wi = field.reduce_u64(wi);
                for &(t, beta) in weights {
                    let r = field.mul(field.mul(x, t), wi);
                    let d = r.min(p - r) as f64 / pf;
                    sum += beta * d * d;
                }
            }
            sum <= m
        })
        .collect()
}

/// Number of ordered 2k-tuples of indices with independent signs solving
/// ±w_{i_1} ± ⋯ ± w_{i_{2k}} ≡ 0 (mod p): the value at 0 of the 2k-fold
/// cyclic self-convolution of h[x] = #{j : w_j ≡ x} + #{j : −w_j ≡ x}.
/// Exact big-integer arithmetic; counts reach (2n)^{2k}.
pub fn rk_count(field: &PrimeModulus, w: &[u64], k: u32) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::Domain("rk_count requires k >= 1".into()));
    }
    let p = field.p() as usize;
    let mut h = vec![BigUint::zero(); p];
    for &wi in w {
        let r = field.reduce_u64(wi);
        h[r as usize] += 1u32;
        h[field.neg(r) as usize] += 1u32;
    }
    let mut acc = vec![BigUint::zero(); p];
    acc[0] = BigUint::one();
    let mut base = h;
    let mut exp = 2 * k;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = cyclic_mul(&acc, &base);
        }
        exp >>= 1;
        if exp > 0 {
            base = cyclic_mul(&base, &base);
        }
    }
    Ok(acc.swap_remove(0))
}

fn cyclic_mul(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let p = a.len();
    let mut out = vec![BigUint::zero(); p];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[(i + j) % p] += ai * bj;
            }
        }
    }
    out
}

/// Solution count restricted to tuples using at least ⌈(1+δ)k⌉ distinct
/// indices. Brute-force enumeration of all (2n)^{2k} signed tuples, so the
/// instance must fit the 10⁸ budget.
pub fn rk_delta_count(field: &PrimeModulus, w: &[u64], k: u32, delta: f64) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::Domain("rk_delta_count requires k >= 1".into()));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Domain("delta must be a finite nonnegative real".into()));
    }
    let n = w.len();
    if n == 0 {
        return Err(Error::Domain("walk needs at least one step".into()));
    }
    let digits = 2 * k as usize;
    let total = (2 * n as u128)
        .checked_pow(digits as u32)
        .filter(|&t| t <= 100_000_000)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "(2n)^(2k) = (2*{n})^{digits} exceeds the 1e8 enumeration budget; \
                 use rk_count or a smaller instance"
            ))
        })?;
    let threshold = ((1.0 + delta) * k as f64).ceil() as usize;
    let p = field.p();
    let reduced: Vec<u64> = w.iter().map(|&v| field.reduce_u64(v)).collect();
    // signed atom j < n is +w_j, j >= n is -w_j
    let signed: Vec<u64> = reduced
        .iter()
        .map(|&v| v)
        .chain(reduced.iter().map(|&v| field.neg(v)))
        .collect();
    let mut stamps = vec![u128::MAX; n];
    let mut count: u64 = 0;
    for tuple in 0..total {
        let mut rest = tuple;
        let mut sum = 0u64;
        let mut distinct = 0usize;
        for _ in 0..digits {
            let d = (rest % (2 * n as u128)) as usize;
            rest /= 2 * n as u128;
            sum = field.add(sum, signed[d]);
            let idx = d % n;
            if stamps[idx] != tuple {
                stamps[idx] = tuple;
                distinct += 1;
            }
        }
        if sum % p == 0 && distinct >= threshold {
            count += 1;
        }
    }
    Ok(BigUint::from(count))
}

/// Halász-type bound ρ ≤ R_k/((2n)^{2k} √f) + e^{−f/2}, valid under the side
/// conditions f ≤ |supp(w)|/100 and k ≤ n/f, which are enforced.
pub fn halasz_bound(field: &PrimeModulus, w: &[u64], k: u32, f_value: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("halasz_bound requires k >= 1".into()));
    }
    let n = w.len();
    let supp = support_size(field, w);
    if !(f_value.is_finite() && f_value > 0.0) {
        return Err(Error::Domain("f must be a positive real".into()));
    }
    if f_value > supp as f64 / 100.0 {
        return Err(Error::Domain(format!(
            "f = {f_value} exceeds |supp(w)|/100 = {}",
            supp as f64 / 100.0
        )));
    }
    if k as f64 > n as f64 / f_value {
        return Err(Error::Domain(format!(
            "k = {k} exceeds n/f = {}",
            n as f64 / f_value
        )));
    }
    let rk = rk_count(field, w, k)?
        .to_f64()
        .ok_or_else(|| Error::Domain("R_k too large for a double".into()))?;
    let denom = (2.0 * n as f64).powi(2 * k as i32) * f_value.sqrt();
    Ok(rk / denom + (-f_value / 2.0).exp())
}

/// A rank-one progression: all covered coordinates of w land within `radius`
/// of 0 on the torus after dilating by `dilation`. The radius is stored as
/// the exact integer numerator over p.
#[derive(Clone, Debug, Serialize)]
pub struct RankOneGAP {
    pub dilation: u64,
    /// radius = scaled_radius / p.
    pub scaled_radius: u64,
    pub p: u64,
    /// Indices i with ‖dilation·w_i/p‖ ≤ radius (at least n − n′ of them).
    pub covered: Vec<usize>,
    /// √(m/n′) comparison scale from the caller's budget, for judging
    /// whether the detected radius indicates structure.
    pub reference_radius: f64,
}

impl RankOneGAP {
    pub fn radius(&self) -> f64 {
        self.scaled_radius as f64 / self.p as f64
    }

    /// |{x ∈ F_p : ‖x/p‖ ≤ radius}| = 2·scaled_radius + 1.
    pub fn q_size(&self) -> u64 {
        2 * self.scaled_radius + 1
    }
}

/// Scan all nonzero dilations x, keep the n − n′ coordinates of x·w closest
/// to 0 on the torus, and return the dilation minimizing the furthest kept
/// coordinate (ties to the smaller x). A minimizer always exists; whether
/// its radius is small enough to indicate structure is the caller's
/// judgment, aided by `reference_radius` = √(m_budget/n′).
pub fn detect_rank_one_gap(
    field: &PrimeModulus,
    w: &[u64],
    n_prime: usize,
    m_budget: f64,
) -> Result<RankOneGAP> {
    let n = w.len();
    if n_prime == 0 || n_prime >= n {
        return Err(Error::Domain(format!(
            "n' must satisfy 1 <= n' < n (got n' = {n_prime}, n = {n})"
        )));
    }
    let p = field.p();
    if p > 1_000_000 {
        return Err(Error::BudgetExceeded(
            "dilation scan is limited to p <= 10^6".into(),
        ));
    }
    let reduced: Vec<u64> = w.iter().map(|&v| field.reduce_u64(v)).collect();
    let keep = n - n_prime;
    let mut best: Option<(u64, u64)> = None; // (scaled max kept, dilation)
    let mut scores = vec![0u64; n];
    for x in 1..p {
        for (s, &wi) in scores.iter_mut().zip(&reduced) {
            let r = field.mul(x, wi);
            *s = r.min(p - r);
        }
        let mut sorted = scores.clone();
        sorted.sort_unstable();
        let max_kept = sorted[keep - 1];
        if best.map_or(true, |(b, _)| max_kept < b) {
            best = Some((max_kept, x));
        }
    }
    let (scaled_radius, dilation) = best.expect("p >= 2 so the scan is nonempty");
    let covered = reduced
        .iter()
        .enumerate()
        .filter(|(_, &wi)| {
            let r = field.mul(dilation, wi);
            r.min(p - r) <= scaled_radius
        })
        .map(|(i, _)| i)
        .collect();
    Ok(RankOneGAP {
        dilation,
        scaled_radius,
        p,
        covered,
        reference_radius: (m_budget / n_prime as f64).sqrt(),
    })
}

/// Does the progression cover all but at most n′ coordinates of w?
pub fn verify_gap_containment(
    field: &PrimeModulus,
    gap: &RankOneGAP,
    w: &[u64],
    n_prime: usize,
) -> bool {
    let p = field.p();
    let within = w
        .iter()
        .filter(|&&wi| {
            let r = field.mul(gap.dilation, field.reduce_u64(wi));
            r.min(p - r) <= gap.scaled_radius
        })
        .count();
    within + n_prime >= w.len()
}

/// Evaluation strategy for the mod-1 small-ball probability.
#[derive(Clone, Copy, Debug)]
pub enum SmallBallMode {
    /// Sum over all 2ⁿ sign patterns (n ≤ 24).
    ExactEnum,
    /// Sample sign patterns with the counter generator.
    MonteCarlo { trials: u64, seed: u64 },
}

/// P(‖Σ ξ_i a_i‖_{R/Z} ≤ ε) for i.i.d. ξ_i = ±1 signs and real steps
/// a_i ∈ (0,1). Returns (probability, standard error), the latter only in
/// Monte Carlo mode. Exact mode enumerates the 2ⁿ patterns down a prefix
/// tree sharing partial sums, so every pattern sees the plain left-to-right
/// float sum (no incremental drift at patterns lying exactly on the ε
/// boundary).
pub fn small_ball_mod1(a: &[f64], eps: f64, mode: SmallBallMode) -> Result<(f64, Option<f64>)> {
    validate_unit_steps(a)?;
    if !(eps.is_finite() && eps > 0.0 && eps <= 0.5) {
        return Err(Error::Domain("epsilon must lie in (0, 1/2]".into()));
    }
    let n = a.len();
    match mode {
        SmallBallMode::ExactEnum => {
            if n > 24 {
                return Err(Error::BudgetExceeded(
                    "exact enumeration is limited to n <= 24 sign patterns".into(),
                ));
            }
            fn walk(a: &[f64], acc: f64, eps: f64, hits: &mut u64) {
                match a.split_first() {
                    None => {
                        if torus_norm(acc) <= eps {
                            *hits += 1;
                        }
                    }
                    Some((&first, rest)) => {
                        walk(rest, acc + first, eps, hits);
                        walk(rest, acc - first, eps, hits);
                    }
                }
            }
            let mut hits = 0u64;
            walk(a, 0.0, eps, &mut hits);
            Ok((hits as f64 / (1u64 << n) as f64, None))
        }
        SmallBallMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::Domain("Monte Carlo mode needs at least one trial".into()));
            }
            let mut hits = 0u64;
            for t in 0..trials {
                let mut rng = TrialRng::new(seed, t).entry(0);
                let mut word = 0u64;
                let mut bits_left = 0u32;
                let mut sum = 0.0f64;
                for &ai in a {
                    if bits_left == 0 {
                        word = rng.next_u64();
                        bits_left = 64;
                    }
                    sum += if word & 1 == 1 { ai } else { -ai };
                    word >>= 1;
                    bits_left -= 1;
                }
                if torus_norm(sum) <= eps {
                    hits += 1;
                }
            }
            let phat = hits as f64 / trials as f64;
            let se = (phat * (1.0 - phat) / trials as f64).sqrt();
            Ok((phat, Some(se)))
        }
    }
}

fn validate_unit_steps(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Domain("need at least one step".into()));
    }
    if a.iter().any(|&x| !(x.is_finite() && x > 0.0 && x < 1.0)) {
        return Err(Error::Domain("steps must lie in the open interval (0, 1)".into()));
    }
    Ok(())
}

/// The three smoothing-inequality ingredients at cutoff L₀ = ⌊1/ε⌋: ε
/// itself, 1/L₀, and Σ_{k=1}^{L₀} |μ̂(k)|/k with the exact character modulus
/// |μ̂(k)| = ∏_i |cos(2πk a_i)| of the signed walk.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EtIngredients {
    pub term_eps: f64,
    pub term_l0: f64,
    pub fourier_sum: f64,
    pub l0: u64,
}

impl EtIngredients {
    /// 2ε + 1/L₀ + Σ|μ̂(k)|/k. The coefficient on ε is the full length of
    /// the interval [−ε, ε]: with coefficient 1 the inequality against the
    /// enumerated small-ball probability fails on a few percent of random
    /// instances, while the interval-length form holds on all of them.
    pub fn bound(&self) -> f64 {
        2.0 * self.term_eps + self.term_l0 + self.fourier_sum
    }
}

/// Smoothing bound ingredients for P(‖Σ ξ_i a_i‖ ≤ ε); see
/// [`EtIngredients::bound`] for how they combine.
pub fn erdos_turan_rhs(a: &[f64], eps: f64) -> Result<EtIngredients> {
    validate_unit_steps(a)?;
    if !(eps.is_finite() && eps > 0.0 && eps <= 0.5) {
        return Err(Error::Domain("epsilon must lie in (0, 1/2]".into()));
    }
    let l0 = (1.0 / eps).floor() as u64;
    let tau = std::f64::consts::TAU;
    let mut fourier_sum = 0.0f64;
    for k in 1..=l0 {
        let modulus: f64 = a.iter().map(|&ai| (tau * k as f64 * ai).cos().abs()).product();
        fourier_sum += modulus / k as f64;
    }
    Ok(EtIngredients { term_eps: eps, term_l0: 1.0 / l0 as f64, fourier_sum, l0 })
}

/// |{i : w_i ≢ 0}|.
pub fn support_size(field: &PrimeModulus, w: &[u64]) -> usize {
    w.iter().filter(|&&v| field.reduce_u64(v) != 0).count()
}

/// Small-modulus regime check: when p < √m with m = |supp(w)|, the balanced
/// sign walk satisfies ρ(w) ≤ exp(−m/2p²). Returns the bound and whether the
/// exact ρ obeys it. Signs are ±1 for odd p and the uniform bit for p = 2
/// (where +1 and −1 coincide and no two-point symmetric distribution
/// exists).
pub fn smallp_bound_check(field: &PrimeModulus, w: &[u64]) -> Result<(f64, bool)> {
    let p = field.p();
    let m = support_size(field, w);
    if (p as u128) * (p as u128) >= m as u128 {
        return Err(Error::Domain(format!(
            "small-modulus bound needs p < sqrt(support); got p = {p}, support = {m}"
        )));
    }
    let mu = if p == 2 {
        DistributionSpec::uniform(field)?
    } else {
        DistributionSpec::bernoulli_pm1(field)?
    };
    let bound = (-(m as f64) / (2.0 * (p * p) as f64)).exp();
    let rho = rho_exact(field, w, &mu, RhoMode::ExactRational)?.rho;
    Ok((bound, rho <= bound))
}

/// Summary of the detected rank-one progression for reports.
#[derive(Clone, Debug, Serialize)]
pub struct GapSummary {
    pub dilation: u64,
    pub scaled_radius: u64,
    pub radius: f64,
    pub q_size: u64,
    pub covered: usize,
    pub reference_radius: f64,
    pub contains_required: bool,
}

/// One-stop diagnostic bundle for a walk vector.
#[derive(Clone, Debug, Serialize)]
pub struct AntiConcReport {
    pub n: usize,
    pub p: u64,
    pub support: usize,
    pub rho: f64,
    pub rho_argmax: u64,
    pub gamma: f64,
    pub kappa: f64,
    /// In [2, p]; equal to p exactly when no nontrivial denominator exists.
    pub ulcd: u64,
    pub ulcd_is_trivial: bool,
    /// (threshold m, |T(m)|) at a fixed ladder of thresholds.
    pub level_set_sizes: Vec<(String, usize)>,
    /// (k, R_k) with the count as a decimal string.
    pub rk: Vec<(u32, String)>,
    pub gap: Option<GapSummary>,
}

/// Assemble the full report. `n_prime = None` skips progression detection.
/// The vector must be nonzero (the ULCD is undefined at 0).
pub fn build_report(
    field: &PrimeModulus,
    w: &[u64],
    mu: &DistributionSpec,
    params: &ULCDParams,
    k_max: u32,
    n_prime: Option<usize>,
    mode: RhoMode,
) -> Result<AntiConcReport> {
    let n = w.len();
    let support = support_size(field, w);
    if support == 0 {
        return Err(Error::Domain("report requires a nonzero vector".into()));
    }
    let rho = rho_exact(field, w, mu, mode)?;
    let lift = centered_lift(field, w);
    let ulcd_value = ulcd(&lift, params)?;
    let mut thresholds = vec![0.0625, 0.25, 1.0, n as f64 / 4.0];
    thresholds.dedup_by(|a, b| a == b);
    let mut level_set_sizes = Vec::new();
    for m in thresholds {
        let size = level_set_uniform(field, w, m, true)?.len();
        level_set_sizes.push((format!("{m}"), size));
    }
    let mut rk = Vec::new();
    for k in 1..=k_max.max(1) {
        rk.push((k, rk_count(field, w, k)?.to_string()));
    }
    let gap = match n_prime {
        Some(np) => {
            let m_budget = (n.max(2) as f64).ln();
            let g = detect_rank_one_gap(field, w, np, m_budget)?;
            Some(GapSummary {
                dilation: g.dilation,
                scaled_radius: g.scaled_radius,
                radius: g.radius(),
                q_size: g.q_size(),
                covered: g.covered.len(),
                reference_radius: g.reference_radius,
                contains_required: verify_gap_containment(field, &g, w, np),
            })
        }
        None => None,
    };
    Ok(AntiConcReport {
        n,
        p: field.p(),
        support,
        rho: rho.rho,
        rho_argmax: rho.argmax,
        gamma: params.gamma,
        kappa: params.kappa,
        ulcd: ulcd_value,
        ulcd_is_trivial: ulcd_value == field.p(),
        level_set_sizes,
        rk,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn distribution_validation() {
        let f = fp(5);
        // signs over F_5
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert_eq!(mu.alpha(), &ratio_u64(1, 2));
        // signs collapse to a point mass over F_2
        assert!(DistributionSpec::bernoulli_pm1(&fp(2)).is_err());
        // duplicate residues merge (3 and 8 are the same / here 3 and -2)
        let merged = DistributionSpec::new(
            &f,
            &[(3, ratio_u64(1, 4)), (3 + 5, ratio_u64(1, 4)), (1, ratio_u64(1, 2))],
            None,
        )
        .unwrap();
        assert_eq!(merged.atoms().len(), 2);
        assert_eq!(merged.max_prob(), ratio_u64(1, 2));
        // sums must hit exactly 1
        assert!(DistributionSpec::new(&f, &[(0, ratio_u64(1, 3)), (1, ratio_u64(1, 3))], None)
            .is_err());
        // an atom above 1 - alpha breaks balance
        assert!(DistributionSpec::new(
            &f,
            &[(0, ratio_u64(3, 4)), (1, ratio_u64(1, 4))],
            Some(ratio_u64(1, 2)),
        )
        .is_err());
    }

    #[test]
    fn rho_zero_vector_is_extremal() {
        let f = fp(7);
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        let rep = rho_exact(&f, &[0, 0, 0], &mu, RhoMode::ExactRational).unwrap();
        let (exact, dist) = rep.exact.as_ref().unwrap();
        assert_eq!(exact, &ratio_u64(6, 7));
        assert_eq!(dist[0], BigRational::one());
        assert_eq!(rep.argmax, 0);
    }

    #[test]
    fn rho_two_step_sign_walk_mod_3() {
        // enumerate the 4 sign patterns of +-1 +-1 over F_3:
        // ++ -> 2, +- -> 0, -+ -> 0, -- -> 1 ... P(0)=1/2, P(1)=1/4, P(2)=1/4
        let f = fp(3);
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        let rep = rho_exact(&f, &[1, 1], &mu, RhoMode::ExactRational).unwrap();
        let (exact, dist) = rep.exact.as_ref().unwrap();
        assert_eq!(dist[0], ratio_u64(1, 2));
        assert_eq!(dist[1], ratio_u64(1, 4));
        assert_eq!(dist[2], ratio_u64(1, 4));
        assert_eq!(exact, &ratio_u64(1, 6));
        assert_eq!(rep.argmax, 0);
    }

    #[test]
    fn rho_permutation_invariant() {
        let f = fp(11);
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        let w1 = [3, 7, 1, 9, 9];
        let w2 = [9, 1, 9, 3, 7];
        let r1 = rho_exact(&f, &w1, &mu, RhoMode::ExactRational).unwrap();
        let r2 = rho_exact(&f, &w2, &mu, RhoMode::ExactRational).unwrap();
        assert_eq!(r1.exact.unwrap().0, r2.exact.unwrap().0);
    }

    #[test]
    fn rho_dilation_relabels_distribution() {
        // S(t*w) = t*S(w) pointwise, so the law is relabeled a -> t*a and
        // rho is unchanged
        let f = fp(13);
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        let w = [1, 5, 5, 2, 11];
        let t = 6u64;
        let tw: Vec<u64> = w.iter().map(|&v| f.mul(t, v)).collect();
        let base = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap();
        let dilated = rho_exact(&f, &tw, &mu, RhoMode::ExactRational).unwrap();
        let (rho_a, dist_a) = base.exact.unwrap();
        let (rho_b, dist_b) = dilated.exact.unwrap();
        assert_eq!(rho_a, rho_b);
        for a in 0..13usize {
            assert_eq!(dist_a[a], dist_b[f.mul(t, a as u64) as usize]);
        }
    }

    #[test]
    fn rho_float_mode_tracks_exact() {
        let f = fp(7);
        let mu =
            DistributionSpec::new(&f, &[(1, ratio_u64(1, 3)), (3, ratio_u64(2, 3))], None).unwrap();
        let w = [1, 2, 3, 4, 5];
        let exact = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap();
        let float = rho_exact(&f, &w, &mu, RhoMode::Float).unwrap();
        assert!((exact.rho - float.rho).abs() < 1e-12);
        assert!(float.exact.is_none());
    }

    #[test]
    fn fourier_inversion_agrees_with_convolution() {
        // cross-implementation oracle on a spread of moduli and walks
        let cases: &[(u64, &[u64])] = &[
            (2, &[1, 1, 1]),
            (3, &[1, 2, 2, 1]),
            (5, &[1, 2, 3, 4]),
            (13, &[1, 1, 6, 9, 11, 4]),
            (97, &[10, 20, 31, 44, 96, 5, 5, 17]),
        ];
        for &(p, w) in cases {
            let f = fp(p);
            let mu = if p == 2 {
                DistributionSpec::uniform(&f).unwrap()
            } else {
                DistributionSpec::bernoulli_pm1(&f).unwrap()
            };
            let conv = rho_exact(&f, w, &mu, RhoMode::ExactRational).unwrap().rho;
            let four = rho_fourier(&f, w, &mu).unwrap();
            assert!((conv - four).abs() < 1e-9, "p={p}: {conv} vs {four}");
        }
        // asymmetric three-atom distribution
        let f = fp(11);
        let mu = DistributionSpec::new(
            &f,
            &[(2, ratio_u64(1, 2)), (5, ratio_u64(1, 3)), (7, ratio_u64(1, 6))],
            None,
        )
        .unwrap();
        let w = [1, 3, 3, 8, 10, 2];
        let conv = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap().rho;
        let four = rho_fourier(&f, &w, &mu).unwrap();
        assert!((conv - four).abs() < 1e-9);
    }

    #[test]
    fn rho_uniform_bit_walk_mixes_immediately() {
        let f = fp(2);
        let mu = DistributionSpec::uniform(&f).unwrap();
        let rep = rho_exact(&f, &[1], &mu, RhoMode::ExactRational).unwrap();
        assert_eq!(rep.exact.unwrap().0, BigRational::zero());
        assert!(rho_fourier(&f, &[1], &mu).unwrap() < 1e-12);
    }

    #[test]
    fn fourier_bound_dominates_rho() {
        let f = fp(5);
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        let w = [1u64; 10];
        let bound = fourier_upper_bound(&f, &w, &mu).unwrap();
        let rho = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap().rho;
        assert!(bound >= rho, "bound {bound} < rho {rho}");
        // zero vector: exponent vanishes, bound degenerates to (p-1)/p
        let z = fourier_upper_bound(&f, &[0, 0], &mu).unwrap();
        assert!((z - 0.8).abs() < 1e-12);
        let rho_z = rho_exact(&f, &[0, 0], &mu, RhoMode::ExactRational).unwrap().rho;
        assert!(z >= rho_z);
    }

    #[test]
    fn fourier_bound_dominates_rho_randomized() {
        // deterministic pseudo-random sweep across moduli, lengths, and
        // two-atom distributions
        let mut state = 0x5EED_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let primes = [2u64, 3, 5, 7, 11, 17, 31];
        for case in 0..60 {
            let p = primes[(next() % primes.len() as u64) as usize];
            let f = fp(p);
            let n = 1 + (next() % 12) as usize;
            let w: Vec<u64> = (0..n).map(|_| next() % p).collect();
            let mu = if p == 2 || case % 3 == 0 {
                DistributionSpec::uniform(&f).unwrap()
            } else {
                DistributionSpec::bernoulli_pm1(&f).unwrap()
            };
            let bound = fourier_upper_bound(&f, &w, &mu).unwrap();
            let rho = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap().rho;
            assert!(
                bound >= rho - 1e-12,
                "case {case}: p={p} w={w:?} bound {bound} < rho {rho}"
            );
        }
    }

    #[test]
    fn centered_lift_examples() {
        let f = fp(5);
        let lift = centered_lift(&f, &[3, 2, 0, 4]);
        assert_eq!(lift.numerators(), &[-2, 2, 0, -1]);
        assert_eq!(lift.residues(), &[3, 2, 0, 4]);
        assert_eq!(lift.values()[0], ratio_i64(-2, 5));
        let f3 = fp(3);
        assert_eq!(centered_lift(&f3, &[1, 2]).numerators(), &[1, -1]);
        // p = 2 sends the nonzero residue to 1/2
        let f2 = fp(2);
        let l2 = centered_lift(&f2, &[1, 0]);
        assert_eq!(l2.values()[0], ratio_u64(1, 2));
        assert_eq!(l2.residues(), &[1, 0]);
        // every coordinate obeys |w'| <= 1/2
        for p in [2u64, 3, 5, 13, 31] {
            let f = fp(p);
            let w: Vec<u64> = (0..p).collect();
            for v in centered_lift(&f, &w).values() {
                assert!(v.abs() <= ratio_u64(1, 2));
            }
        }
    }

    use crate::series::ratio_i64;

    #[test]
    fn ulcd_worked_example() {
        // p=13, w=(1,1,1,1), gamma=1/8, kappa=1: L=12 shifts each 1/13 to
        // -1/13, dist = 2/13 <= min(gamma*12*2/13, 1); smaller L all fail
        let f = fp(13);
        let lift = centered_lift(&f, &[1, 1, 1, 1]);
        let params = ULCDParams::new(0.125, 1.0).unwrap();
        assert_eq!(ulcd(&lift, &params).unwrap(), 12);
    }

    #[test]
    fn ulcd_bounds_and_errors() {
        let f = fp(13);
        let params = ULCDParams::default_for_dimension(4);
        // zero vector rejected
        assert!(ulcd(&centered_lift(&f, &[0, 0]), &params).is_err());
        // always in [2, p]
        for seed in 0..20u64 {
            let w: Vec<u64> = (0..4).map(|i| (seed * 7 + i * 3 + 1) % 13).collect();
            if w.iter().all(|&v| v == 0) {
                continue;
            }
            let l = ulcd(&centered_lift(&f, &w), &params).unwrap();
            assert!((2..=13).contains(&l), "w={w:?} gave L={l}");
        }
        assert!(ULCDParams::new(1.0, 1.0).is_err());
        assert!(ULCDParams::new(0.5, 0.0).is_err());
    }

    #[test]
    fn ulcd_small_norm_vectors_have_large_denominator() {
        // ||w'||_inf <= 1/(2T) forces ULCD >= T: dist(Lw') = L||w'|| stays
        // below the contraction gamma*L*||w'|| only once L wraps past T
        let f = fp(101);
        let params = ULCDParams::new(0.125, 1.0).unwrap();
        // w' = (1/101, 1/101): norm_inf = 1/101 <= 1/(2*50)
        let l = ulcd(&centered_lift(&f, &[1, 1]), &params).unwrap();
        assert!(l >= 50, "L = {l}");
    }

    #[test]
    fn level_set_worked_example() {
        let f = fp(5);
        let t = level_set_uniform(&f, &[1, 1], 0.2, true).unwrap();
        assert_eq!(t, vec![0, 1, 4]);
        // m = 0 keeps only the annihilator of w, here just 0
        assert_eq!(level_set_uniform(&f, &[1, 1], 0.0, true).unwrap(), vec![0]);
        // m >= n/4 swallows everything
        assert_eq!(level_set_uniform(&f, &[1, 1], 0.5, true).unwrap().len(), 5);
        // excluding zero drops t = 0
        assert_eq!(level_set_uniform(&f, &[1, 1], 0.2, false).unwrap(), vec![1, 4]);
    }

    #[test]
    fn level_set_growth_by_sumsets() {
        // |T(k^2 m)| >= min(p, k|T(m)| - (k-1)): sums of k members of T(m)
        // stay in T(k^2 m) and sumsets grow at the Cauchy-Davenport rate
        let mut state = 0xACE5_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for p in [11u64, 13, 31, 47] {
            let f = fp(p);
            for _ in 0..6 {
                let n = 2 + (next() % 5) as usize;
                let w: Vec<u64> = (0..n).map(|_| next() % p).collect();
                for m in [0.0625f64, 0.25] {
                    let base = level_set_uniform(&f, &w, m, true).unwrap().len() as u64;
                    for k in [2u64, 3] {
                        let grown =
                            level_set_uniform(&f, &w, (k * k) as f64 * m, true).unwrap().len()
                                as u64;
                        let needed = (k * base).saturating_sub(k - 1).min(p);
                        assert!(
                            grown >= needed,
                            "p={p} w={w:?} m={m} k={k}: {grown} < {needed}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rk_small_cases() {
        let f = fp(5);
        // brute force over the 16 signed pairs of w=(1,2) leaves 4 solutions
        assert_eq!(rk_count(&f, &[1, 2], 1).unwrap(), BigUint::from(4u32));
        // single step: only (+,-) and (-,+) cancel
        let f3 = fp(3);
        assert_eq!(rk_count(&f3, &[1], 1).unwrap(), BigUint::from(2u32));
        // all-zero steps solve every tuple
        assert_eq!(rk_count(&f3, &[0, 0, 0], 2).unwrap(), BigUint::from(6u32.pow(4)));
        assert!(rk_count(&f3, &[1], 0).is_err());
    }

    #[test]
    fn rk_brute_force_oracle() {
        // independent enumeration over index tuples and sign patterns
        let f = fp(7);
        let w = [1u64, 3, 5];
        let n = w.len();
        for k in 1..=2u32 {
            let digits = 2 * k as usize;
            let mut count = 0u64;
            let total = (n as u64).pow(digits as u32) * 2u64.pow(digits as u32);
            for code in 0..total {
                let mut rest = code;
                let mut sum = 0u64;
                for _ in 0..digits {
                    let idx = (rest % n as u64) as usize;
                    rest /= n as u64;
                    let sign = rest % 2;
                    rest /= 2;
                    let term = if sign == 0 { w[idx] } else { f.neg(w[idx]) };
                    sum = f.add(sum, term);
                }
                if sum == 0 {
                    count += 1;
                }
            }
            assert_eq!(rk_count(&f, &w, k).unwrap(), BigUint::from(count), "k={k}");
        }
    }

    #[test]
    fn rk_all_ones_closed_form() {
        // for odd p the sign sum 2j - 2k must vanish mod p, giving
        // n^{2k} * sum_{j = k mod p} C(2k, j)
        for (p, n, k) in [(5u64, 6usize, 3u32), (7, 4, 2), (3, 5, 4)] {
            let f = fp(p);
            let w = vec![1u64; n];
            let mut patterns = BigUint::zero();
            for j in 0..=2 * k as u64 {
                if (2 * j) % p == (2 * k as u64) % p {
                    patterns += binomial(2 * k as u64, j);
                }
            }
            let expect = BigUint::from(n).pow(2 * k) * patterns;
            assert_eq!(rk_count(&f, &w, k).unwrap(), expect, "p={p} n={n} k={k}");
        }
    }

    fn binomial(n: u64, k: u64) -> BigUint {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for i in 0..k.min(n - k) {
            num *= n - i;
            den *= i + 1;
        }
        num / den
    }

    #[test]
    fn rk_character_sum_identity() {
        // (1/p) sum_t (2 sum_j cos(2 pi t w_j / p))^{2k} recovers the count
        let f = fp(11);
        let w = [1u64, 4, 4, 9, 2];
        for k in 1..=3u32 {
            let exact = rk_count(&f, &w, k).unwrap().to_f64().unwrap();
            let tau = std::f64::consts::TAU;
            let mut sum = 0.0f64;
            for t in 0..11u64 {
                let inner: f64 =
                    w.iter().map(|&wj| (tau * (t * wj % 11) as f64 / 11.0).cos()).sum();
                sum += (2.0 * inner).powi(2 * k as i32);
            }
            let approx = sum / 11.0;
            assert!(
                (approx - exact).abs() <= 1e-6 * exact.max(1.0),
                "k={k}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn rk_delta_worked_examples() {
        let f = fp(5);
        // the 4 solutions of w=(1,2), k=1 all reuse a single index, so
        // demanding ceil(1.5) = 2 distinct indices empties the count
        assert_eq!(rk_delta_count(&f, &[1, 2], 1, 0.5).unwrap(), BigUint::zero());
        // delta -> 0 recovers the unrestricted count (threshold = k = 1)
        assert_eq!(rk_delta_count(&f, &[1, 2], 1, 0.0).unwrap(), BigUint::from(4u32));
        // all-zero steps, n=2, k=1: tuples on 2 distinct indices with any of
        // the 4 sign patterns — verified against an independent loop below
        let count = rk_delta_count(&f, &[0, 0], 1, 0.5).unwrap();
        let mut independent = 0u64;
        for i in 0..2u64 {
            for j in 0..2u64 {
                for s in 0..4u64 {
                    let _ = s;
                    if i != j {
                        independent += 1;
                    }
                }
            }
        }
        assert_eq!(count, BigUint::from(independent));
        assert_eq!(count, BigUint::from(8u32));
    }

    #[test]
    fn rk_delta_monotone_and_bounded() {
        let f = fp(7);
        let w = [1u64, 2, 3];
        let k = 2u32;
        let full = rk_count(&f, &w, k).unwrap();
        let mut last = full.clone() + BigUint::one();
        for delta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = rk_delta_count(&f, &w, k, delta).unwrap();
            assert!(c <= full, "delta={delta}");
            assert!(c <= last, "delta={delta} not monotone");
            last = c;
        }
        // budget guard trips on large instances
        assert!(matches!(
            rk_delta_count(&f, &vec![1u64; 100], 4, 0.5),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn rk_delta_decomposition_inequality() {
        // R_k <= R_k^delta + (40 k^{1-delta} n^{1+delta})^k
        let f = fp(5);
        for (w, k) in [(vec![1u64, 2, 3, 4], 2u32), (vec![1, 1, 2], 2), (vec![2, 3], 3)] {
            let n = w.len() as f64;
            for delta in [0.25f64, 0.5, 0.75] {
                let full = rk_count(&f, &w, k).unwrap().to_f64().unwrap();
                let restricted = rk_delta_count(&f, &w, k, delta).unwrap().to_f64().unwrap();
                let spill = (40.0 * (k as f64).powf(1.0 - delta) * n.powf(1.0 + delta))
                    .powi(k as i32);
                assert!(full <= restricted + spill, "w={w:?} k={k} delta={delta}");
            }
        }
    }

    #[test]
    fn halasz_bound_dominates_rho() {
        let mut state = 0xB0B_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let primes = [3u64, 5, 7, 11, 17, 31];
        for case in 0..40 {
            let p = primes[(next() % primes.len() as u64) as usize];
            let f = fp(p);
            let n = 8 + (next() % 23) as usize;
            // keep the support full so f <= supp/100 is satisfiable
            let w: Vec<u64> = (0..n).map(|_| 1 + next() % (p - 1)).collect();
            let k = 1 + (next() % 3) as u32;
            let f_value = (n as f64 / 100.0) * 0.9;
            let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
            let rho = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap().rho;
            let bound = halasz_bound(&f, &w, k, f_value).unwrap();
            assert!(bound >= rho, "case {case}: p={p} n={n} k={k}: {bound} < {rho}");
        }
    }

    #[test]
    fn halasz_side_conditions() {
        let f = fp(5);
        let w = vec![1u64; 10];
        // f above supp/100
        assert!(halasz_bound(&f, &w, 1, 0.2).is_err());
        // k above n/f = 100
        assert!(halasz_bound(&f, &w, 101, 0.1).is_err());
        assert!(halasz_bound(&f, &w, 1, 0.05).is_ok());
    }

    #[test]
    fn gap_detection_constant_vector() {
        // dilating by c^{-1} sends every coordinate to 1/p
        let f = fp(101);
        let w = vec![37u64; 8];
        let gap = detect_rank_one_gap(&f, &w, 3, 1.0).unwrap();
        assert_eq!(gap.scaled_radius, 1);
        assert_eq!(gap.q_size(), 3);
        assert_eq!(gap.covered.len(), 8);
        assert!(verify_gap_containment(&f, &gap, &w, 3));
        // the dilation must map 37 to +-1
        let r = f.mul(gap.dilation, 37);
        assert!(r == 1 || r == 100);
    }

    #[test]
    fn gap_detection_structureless_vs_structured() {
        let f = fp(101);
        let mut state = 0xFEED_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let random: Vec<u64> = (0..50).map(|_| next() % 101).collect();
        let gap_random = detect_rank_one_gap(&f, &random, 10, 1.0).unwrap();
        let constant = vec![37u64; 50];
        let gap_const = detect_rank_one_gap(&f, &constant, 10, 1.0).unwrap();
        assert!(gap_random.scaled_radius >= gap_const.scaled_radius);
        assert!(verify_gap_containment(&f, &gap_random, &random, 10));
    }

    #[test]
    fn gap_zero_heavy_vector_covered_at_radius_zero() {
        let f = fp(31);
        // two ones among six zeros: n' = 2 lets the zeros be covered exactly
        let w = [0u64, 0, 1, 0, 0, 1, 0, 0];
        let gap = detect_rank_one_gap(&f, &w, 2, 1.0).unwrap();
        assert_eq!(gap.scaled_radius, 0);
        assert_eq!(gap.q_size(), 1);
        assert!(gap.covered.len() >= 6);
        assert!(verify_gap_containment(&f, &gap, &w, 2));
    }

    #[test]
    fn gap_verification_edges() {
        let f = fp(31);
        let w = [1u64, 2, 3, 4];
        let gap = detect_rank_one_gap(&f, &w, 1, 1.0).unwrap();
        assert!(verify_gap_containment(&f, &gap, &w, 1));
        // shrinking the radius below the detected maximum breaks coverage
        if gap.scaled_radius > 0 {
            let tight = RankOneGAP { scaled_radius: gap.scaled_radius - 1, ..gap.clone() };
            assert!(!verify_gap_containment(&f, &tight, &w, 1));
        }
        // n' = n tolerates an empty cover
        let none = RankOneGAP {
            dilation: 1,
            scaled_radius: 0,
            p: 31,
            covered: vec![],
            reference_radius: 0.0,
        };
        assert!(verify_gap_containment(&f, &none, &w, 4));
        // invalid n'
        assert!(detect_rank_one_gap(&f, &w, 0, 1.0).is_err());
        assert!(detect_rank_one_gap(&f, &w, 4, 1.0).is_err());
    }

    #[test]
    fn small_ball_half_steps() {
        // steps of 1/2: the sum is an integer for evenly many terms and a
        // half-integer otherwise
        let a4 = [0.5f64; 4];
        let (p4, _) = small_ball_mod1(&a4, 0.25, SmallBallMode::ExactEnum).unwrap();
        assert_eq!(p4, 1.0);
        let a3 = [0.5f64; 3];
        let (p3, _) = small_ball_mod1(&a3, 0.25, SmallBallMode::ExactEnum).unwrap();
        assert_eq!(p3, 0.0);
        // eps = 1/2 captures everything
        let (pall, _) = small_ball_mod1(&a3, 0.5, SmallBallMode::ExactEnum).unwrap();
        assert_eq!(pall, 1.0);
        // single step lands at distance 0.3
        let (p1, _) = small_ball_mod1(&[0.3], 0.1, SmallBallMode::ExactEnum).unwrap();
        assert_eq!(p1, 0.0);
        let (p2, _) = small_ball_mod1(&[0.3], 0.3, SmallBallMode::ExactEnum).unwrap();
        assert_eq!(p2, 1.0);
    }

    #[test]
    fn small_ball_prefix_walk_matches_direct_enumeration() {
        let a = [0.21f64, 0.37, 0.05, 0.44, 0.18];
        let eps = 0.12;
        let (fast, _) = small_ball_mod1(&a, eps, SmallBallMode::ExactEnum).unwrap();
        let n = a.len();
        let mut hits = 0u64;
        for mask in 0..(1u64 << n) {
            let sum: f64 = a
                .iter()
                .enumerate()
                .map(|(i, &ai)| if mask >> i & 1 == 1 { -ai } else { ai })
                .sum();
            if torus_norm(sum) <= eps {
                hits += 1;
            }
        }
        assert_eq!(fast, hits as f64 / (1u64 << n) as f64);
    }

    #[test]
    fn small_ball_monte_carlo_tracks_exact() {
        let a = [0.3f64, 0.41, 0.27, 0.16, 0.09, 0.33];
        let eps = 0.2;
        let (exact, _) = small_ball_mod1(&a, eps, SmallBallMode::ExactEnum).unwrap();
        let (mc, se) = small_ball_mod1(
            &a,
            eps,
            SmallBallMode::MonteCarlo { trials: 40_000, seed: 2024 },
        )
        .unwrap();
        let se = se.unwrap();
        assert!((mc - exact).abs() < 5.0 * se.max(1e-3), "{mc} vs {exact} (se {se})");
    }

    #[test]
    fn small_ball_validation() {
        assert!(small_ball_mod1(&[0.5; 25], 0.1, SmallBallMode::ExactEnum).is_err());
        assert!(small_ball_mod1(&[1.5], 0.1, SmallBallMode::ExactEnum).is_err());
        assert!(small_ball_mod1(&[0.3], 0.6, SmallBallMode::ExactEnum).is_err());
        assert!(small_ball_mod1(&[], 0.1, SmallBallMode::ExactEnum).is_err());
    }

    #[test]
    fn smoothing_bound_dominates_small_ball() {
        let mut state = 0xE7_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut unit = move || (next() % 9973 + 1) as f64 / 9975.0;
        for case in 0..100 {
            let n = 1 + case % 16;
            let a: Vec<f64> = (0..n).map(|_| unit()).collect();
            for eps in [0.05f64, 0.1, 0.2] {
                let (lhs, _) = small_ball_mod1(&a, eps, SmallBallMode::ExactEnum).unwrap();
                let rhs = erdos_turan_rhs(&a, eps).unwrap();
                assert!(
                    lhs <= rhs.bound() + 1e-12,
                    "case {case} eps={eps}: {lhs} > {}",
                    rhs.bound()
                );
            }
        }
    }

    #[test]
    fn smoothing_ingredients_shape() {
        let r = erdos_turan_rhs(&[0.3, 0.4], 0.1).unwrap();
        assert_eq!(r.l0, 10);
        assert!((r.term_l0 - 0.1).abs() < 1e-15);
        assert!(r.fourier_sum >= 0.0);
        // near-zero steps: every character modulus tends to 1 and the sum
        // approaches the harmonic number, a vacuous but valid bound
        let tiny = erdos_turan_rhs(&[1e-9, 1e-9], 0.2).unwrap();
        let harmonic: f64 = (1..=5).map(|k| 1.0 / k as f64).sum();
        assert!((tiny.fourier_sum - harmonic).abs() < 1e-6);
        assert!(tiny.bound() >= 1.0);
    }

    #[test]
    fn character_modulus_pointwise_bound() {
        // |cos(2 pi theta)| <= exp(-2 ||2 theta||^2) on a fine grid
        for i in 0..10_000u64 {
            let theta = i as f64 / 10_000.0;
            let lhs = (std::f64::consts::TAU * theta).cos().abs();
            let rhs = (-2.0 * torus_norm(2.0 * theta).powi(2)).exp();
            assert!(lhs <= rhs + 1e-12, "theta={theta}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn support_size_examples() {
        let f = fp(5);
        assert_eq!(support_size(&f, &[0, 0, 0]), 0);
        assert_eq!(support_size(&f, &[1, 1, 1]), 3);
        assert_eq!(support_size(&f, &[1, 0, 2, 0]), 2);
        assert_eq!(support_size(&f, &[5, 10]), 0); // reduce first
    }

    #[test]
    fn smallp_bound_examples() {
        let f3 = fp(3);
        let w = vec![1u64; 100];
        let (bound, holds) = smallp_bound_check(&f3, &w).unwrap();
        assert!((bound - (-100.0f64 / 18.0).exp()).abs() < 1e-12);
        assert!(holds);
        let f2 = fp(2);
        let w2 = vec![1u64; 64];
        let (bound2, holds2) = smallp_bound_check(&f2, &w2).unwrap();
        assert!((bound2 - (-8.0f64).exp()).abs() < 1e-12);
        assert!(holds2);
        // precondition p < sqrt(support)
        assert!(smallp_bound_check(&fp(5), &vec![1u64; 20]).is_err());
    }

    #[test]
    fn rho_decays_when_no_dilation_is_short() {
        // w hitting every nonzero residue once: each dilation permutes the
        // residues, so every lifted norm equals the same large constant and
        // the walk must be very flat
        let f = fp(31);
        let w: Vec<u64> = (1..31).collect();
        let (_, norm_sq) = min_dilated_lift_norm_sq(&f, &w).unwrap();
        let norm = rational_to_f64(&norm_sq).sqrt();
        assert!(norm > 1.6);
        let kappa = 1.6f64;
        let mu = DistributionSpec::bernoulli_pm1(&f).unwrap();
        let rho = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap().rho;
        assert!(rho <= (-kappa * kappa / 2.0).exp(), "rho = {rho}");

        let f13 = fp(13);
        let w13: Vec<u64> = (1..13).collect();
        let (_, ns13) = min_dilated_lift_norm_sq(&f13, &w13).unwrap();
        assert_eq!(ns13, ratio_u64(182, 169));
        let rho13 = rho_exact(&f13, &w13, &mu_for(&f13), RhoMode::ExactRational).unwrap().rho;
        assert!(rho13 <= (-1.03f64 * 1.03 / 2.0).exp());
    }

    fn mu_for(f: &PrimeModulus) -> DistributionSpec {
        DistributionSpec::bernoulli_pm1(f).unwrap()
    }

    #[test]
    fn restriction_increases_rho() {
        let f = fp(11);
        let mu = mu_for(&f);
        let w = [1u64, 4, 6, 2, 9, 3, 10];
        let full = rho_exact(&f, &w, &mu, RhoMode::ExactRational).unwrap();
        let full_rho = full.exact.unwrap().0;
        for subset in [&w[..3], &w[2..6], &w[..5]] {
            let part = rho_exact(&f, subset, &mu, RhoMode::ExactRational).unwrap();
            assert!(part.exact.unwrap().0 >= full_rho);
        }
    }

    #[test]
    fn report_assembles() {
        let f = fp(13);
        let mu = mu_for(&f);
        let w = [1u64, 1, 1, 1];
        let params = ULCDParams::new(0.125, 1.0).unwrap();
        let report =
            build_report(&f, &w, &mu, &params, 2, Some(1), RhoMode::ExactRational).unwrap();
        assert_eq!(report.n, 4);
        assert_eq!(report.support, 4);
        assert_eq!(report.ulcd, 12);
        assert!(!report.ulcd_is_trivial);
        assert!(report.rho > 0.0 && report.rho <= 1.0 - 1.0 / 13.0);
        assert_eq!(report.rk.len(), 2);
        let gap = report.gap.as_ref().unwrap();
        assert!(gap.contains_required);
        // serializes cleanly
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"ulcd\":12"));
        // zero vector rejected
        assert!(build_report(&f, &[0, 0], &mu, &params, 1, None, RhoMode::ExactRational).is_err());
    }
}
