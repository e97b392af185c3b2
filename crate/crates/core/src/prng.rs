//! Counter-based pseudorandom generation for reproducible parallel sampling.
//!
//! Every draw is a pure function of (master_seed, trial, entry, attempt), so
//! trials can be partitioned across any number of workers in any order and
//! still produce identical streams. The mixer is the SplitMix64 finalizer,
//! whose output is equidistributed over 64-bit counters.
//!
//! Atom sampling is exact: probabilities are brought to a common denominator
//! D, each outcome owns `numerator` bands of floor(2^64/D) values, and draws
//! landing past `D * floor(2^64/D)` are rejected and retried with the next
//! attempt counter. No probability is rounded to float precision.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial stream root: s1 = mix(master + GOLDEN * (trial + 1)).
#[derive(Clone, Copy, Debug)]
pub struct TrialRng {
    s1: u64,
}

impl TrialRng {
    pub fn new(master_seed: u64, trial: u64) -> TrialRng {
        TrialRng {
            s1: mix64(master_seed.wrapping_add(GOLDEN.wrapping_mul(trial.wrapping_add(1)))),
        }
    }

    /// Sub-stream for one sampled entry (matrix cell, vector coordinate, ...).
    pub fn entry(&self, entry: u64) -> EntryRng {
        EntryRng {
            s2: mix64(self.s1.wrapping_add(GOLDEN.wrapping_mul(entry.wrapping_add(1)))),
            attempt: 0,
        }
    }
}

/// Rejection-capable stream of 64-bit words for a single entry.
#[derive(Clone, Copy, Debug)]
pub struct EntryRng {
    s2: u64,
    attempt: u64,
}

impl EntryRng {
    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.s2.wrapping_add(GOLDEN.wrapping_mul(self.attempt)));
        self.attempt += 1;
        out
    }

    /// Uniform in [0, bound) by rejection below the largest multiple of
    /// `bound` that fits in 64 bits.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// Exact inverse-CDF sampler over a finite set of outcomes with rational
/// probabilities num_i / D.
#[derive(Clone, Debug)]
pub struct AtomSampler {
    values: Vec<u64>,
    cumulative: Vec<u64>, // cumulative numerators, last = D
    denom: u64,
    band: u64,   // floor(2^64 / D)
    accept: u128, // band * D
}

impl AtomSampler {
    /// Build from (value, probability) pairs. Probabilities must be positive
    /// and sum to exactly 1; values must be distinct and are sampled in the
    /// given order (callers fix the order for reproducibility).
    pub fn new(atoms: &[(u64, BigRational)]) -> Result<AtomSampler> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let mut lcm = BigInt::one();
        for (_, pr) in atoms {
            if pr <= &BigRational::zero() {
                return Err(Error::InvalidDistribution("probabilities must be positive".into()));
            }
            lcm = lcm.lcm(pr.denom());
        }
        let denom = lcm
            .to_u64()
            .ok_or_else(|| Error::InvalidDistribution(
                "common denominator exceeds 64 bits; exact sampling unsupported".into(),
            ))?;
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut values = Vec::with_capacity(atoms.len());
        let mut acc = BigInt::zero();
        for (v, pr) in atoms {
            acc += pr.numer() * (&lcm / pr.denom());
            values.push(*v);
            cumulative.push(acc.to_u64().ok_or_else(|| {
                Error::InvalidDistribution("cumulative numerator overflow".into())
            })?);
        }
        if acc != lcm {
            return Err(Error::InvalidDistribution("probabilities must sum to 1".into()));
        }
        let band = if denom == 1 {
            u64::MAX
        } else {
            (((1u128) << 64) / denom as u128) as u64
        };
        let accept = band as u128 * denom as u128;
        Ok(AtomSampler { values, cumulative, denom, band, accept })
    }

    pub fn denominator(&self) -> u64 {
        self.denom
    }

    /// Draw one outcome exactly.
    pub fn sample(&self, rng: &mut EntryRng) -> u64 {
        loop {
            let u = rng.next_u64();
            if (u as u128) < self.accept {
                let slot = u / self.band; // in [0, denom)
                let idx = self.cumulative.partition_point(|&c| c <= slot);
                return self.values[idx];
            }
        }
    }
}
