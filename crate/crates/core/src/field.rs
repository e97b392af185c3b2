//! Prime fields F_p with canonical residue representatives in `[0, p)`.
//!
//! `PrimeModulus` is the field object: it owns the modulus, a cached Barrett
//! reduction constant, and all arithmetic on raw `u64` residues. `FieldElement`
//! is the checked wrapper that carries its modulus and refuses to mix fields.
//! All products go through 128-bit intermediates; there is no silent overflow
//! for moduli up to 2^61.

use crate::error::{Error, Result};

pub const MAX_MODULUS: u64 = 1 << 61;

/// Deterministic Miller-Rabin for u64. The witness set is sufficient for all
/// 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Is `q` a prime power p^e? Returns the base prime if so.
pub fn prime_power_base(q: u64) -> Option<u64> {
    if q < 2 {
        return None;
    }
    for e in (1..=63u32).rev() {
        let r = integer_root(q, e);
        if r >= 2 && r.checked_pow(e) == Some(q) && is_prime_u64(r) {
            return Some(r);
        }
    }
    None
}

fn integer_root(q: u64, e: u32) -> u64 {
    if e == 1 {
        return q;
    }
    let mut r = (q as f64).powf(1.0 / e as f64).round() as u64;
    if r < 1 {
        r = 1;
    }
    // fix up float error
    while r.checked_pow(e).map_or(true, |v| v > q) {
        r -= 1;
    }
    while (r + 1).checked_pow(e).map_or(false, |v| v <= q) {
        r += 1;
    }
    r
}

/// A verified prime modulus together with cached reduction constants.
///
/// Arithmetic methods operate on canonical residues (`u64` in `[0, p)`); the
/// caller is responsible for canonicality of inputs (constructors and parsers
/// in this crate reduce on entry).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeModulus {
    p: u64,
    /// floor(2^64 / p), used for Barrett reduction when p < 2^32.
    barrett: u64,
    small: bool,
}

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p > MAX_MODULUS {
            return Err(Error::ModulusRange(p));
        }
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let small = p < (1 << 32);
        let barrett = if small {
            ((1u128 << 64) / p as u128) as u64 // floor(2^64 / p); see mul()
        } else {
            0
        };
        Ok(PrimeModulus { p, barrett, small })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce_u64(&self, v: u64) -> u64 {
        v % self.p
    }

    /// Canonical residue of a signed integer (used for distribution atoms and
    /// centered lifts).
    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u64 {
        let m = self.p as i128;
        let r = (v as i128).rem_euclid(m);
        r as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b; // a, b < p <= 2^61: no overflow
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.small {
            // Barrett: q ~= floor(x/p); one or two corrective subtractions.
            let x = a as u64 * b as u64; // a,b < 2^32
            let q = ((x as u128 * self.barrett as u128) >> 64) as u64;
            let mut r = x.wrapping_sub(q.wrapping_mul(self.p));
            while r >= self.p {
                r -= self.p;
            }
            r
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by extended Euclid; explicit error on zero.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "modulus must be prime");
        Ok(t0.rem_euclid(self.p as i128) as u64)
    }

    pub fn element(&self, v: u64) -> FieldElement {
        FieldElement {
            value: self.reduce_u64(v),
            modulus: *self,
        }
    }

    pub fn element_i64(&self, v: i64) -> FieldElement {
        FieldElement {
            value: self.reduce_i64(v),
            modulus: *self,
        }
    }

    pub fn check_same(&self, other: &PrimeModulus) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        Ok(())
    }
}

/// A residue that knows its field. Every binary operation verifies the two
/// operands live over the same modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.modulus.check_same(&other.modulus)?;
        Ok(self.modulus.element(self.modulus.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.modulus.check_same(&other.modulus)?;
        Ok(self.modulus.element(self.modulus.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.modulus.check_same(&other.modulus)?;
        Ok(self.modulus.element(self.modulus.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> FieldElement {
        self.modulus.element(self.modulus.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(self.modulus.element(self.modulus.inv(self.value)?))
    }

    pub fn pow(&self, exp: u64) -> FieldElement {
        self.modulus.element(self.modulus.pow(self.value, exp))
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}
