//! Integer partitions with the fixed enumeration order used throughout the
//! crate: descending lexicographic, so `partitions_of(4)` yields
//! `[4], [3,1], [2,2], [2,1,1], [1,1,1,1]`.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::str::FromStr;

/// A partition: non-increasing positive parts. `[]` is the empty partition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(parts: Vec<u64>) -> Result<Partition> {
        for w in parts.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidPartition(format!(
                    "parts must be non-increasing: {parts:?}"
                )));
            }
        }
        if parts.iter().any(|&x| x == 0) {
            return Err(Error::InvalidPartition("zero part".into()));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Partition {
        Partition { parts: vec![] }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// |lambda| = sum of parts.
    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Conjugate partition: dual'_j = #{i : lambda_i >= j}.
    pub fn dual(&self) -> Partition {
        if self.parts.is_empty() {
            return Partition::empty();
        }
        let max = self.parts[0];
        let mut out = Vec::with_capacity(max as usize);
        for j in 1..=max {
            out.push(self.parts.iter().filter(|&&x| x >= j).count() as u64);
        }
        Partition { parts: out }
    }

    /// m_i(lambda): multiplicity of each distinct part value.
    pub fn multiplicities(&self) -> BTreeMap<u64, usize> {
        let mut m = BTreeMap::new();
        for &x in &self.parts {
            *m.entry(x).or_insert(0) += 1;
        }
        m
    }

    /// sum of squares of the dual's parts (the exponent in the cycle-index
    /// weight q^(sum_i (lambda'_i)^2)).
    pub fn dual_square_sum(&self) -> u64 {
        self.dual().parts.iter().map(|&x| x * x).sum()
    }
}

impl std::fmt::Display for Partition {
    /// `[4,2,1]`; the empty partition prints as `[]`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.parts.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", strs.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Partition> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("partition must look like [2,1]: {s:?}")))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Partition::empty());
        }
        let mut parts = Vec::new();
        for tok in inner.split(',') {
            let v: u64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad part {tok:?}")))?;
            parts.push(v);
        }
        Partition::new(parts)
    }
}

/// All partitions of n in descending lexicographic order.
pub fn partitions_of(n: u64) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    fn rec(remaining: u64, max_part: u64, prefix: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: prefix.clone(),
            });
            return;
        }
        let hi = remaining.min(max_part);
        for k in (1..=hi).rev() {
            prefix.push(k);
            rec(remaining - k, k, prefix, out);
            prefix.pop();
        }
    }
    rec(n, n.max(1), &mut prefix, &mut out);
    out
}
