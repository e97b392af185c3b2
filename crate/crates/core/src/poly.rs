//! Dense univariate polynomials over F_p.
//!
//! Coefficients are stored lowest-degree first with no trailing zeros; the
//! zero polynomial has an empty coefficient vector. The text form is the
//! comma-separated residue list in the same order, so `x^2 + x + 1` over F_2
//! reads `1,1,1`.

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use num::bigint::BigInt;
use num::Zero;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    field: PrimeModulus,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(field: PrimeModulus, mut coeffs: Vec<u64>) -> Poly {
        for c in coeffs.iter_mut() {
            *c = field.reduce_u64(*c);
        }
        let mut p = Poly { field, coeffs };
        p.normalize();
        p
    }

    pub fn zero(field: PrimeModulus) -> Poly {
        Poly { field, coeffs: vec![] }
    }

    pub fn one(field: PrimeModulus) -> Poly {
        Poly::new(field, vec![1])
    }

    pub fn constant(field: PrimeModulus, c: u64) -> Poly {
        Poly::new(field, vec![c])
    }

    /// The monomial x.
    pub fn x(field: PrimeModulus) -> Poly {
        Poly::new(field, vec![0, 1])
    }

    pub fn field(&self) -> PrimeModulus {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    fn check_same_field(&self, other: &Poly) -> Result<()> {
        if self.field.p() != other.field.p() {
            return Err(Error::ModulusMismatch(self.field.p(), other.field.p()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_same_field(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.field.add(self.coeff(i), other.coeff(i)));
        }
        Ok(Poly::new(self.field, out))
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.check_same_field(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.field.sub(self.coeff(i), other.coeff(i)));
        }
        Ok(Poly::new(self.field, out))
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check_same_field(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(self.field));
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = self.field.add(out[i + j], self.field.mul(a, b));
            }
        }
        Ok(Poly::new(self.field, out))
    }

    pub fn scale(&self, c: u64) -> Poly {
        let c = self.field.reduce_u64(c);
        Poly::new(
            self.field,
            self.coeffs.iter().map(|&a| self.field.mul(a, c)).collect(),
        )
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divrem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        self.check_same_field(divisor)?;
        if divisor.is_zero() {
            return Err(Error::ZeroPolyDivision);
        }
        let d = divisor.coeffs.len() - 1;
        if self.coeffs.len() < divisor.coeffs.len() {
            return Ok((Poly::zero(self.field), self.clone()));
        }
        let lead_inv = self.field.inv(divisor.leading())?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = self.field.mul(rem[k], lead_inv);
            if c == 0 {
                continue;
            }
            quot[k - d] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[k - d + j] = self.field.sub(rem[k - d + j], self.field.mul(c, b));
            }
        }
        rem.truncate(d);
        Ok((Poly::new(self.field, quot), Poly::new(self.field, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        Ok(self.divrem(divisor)?.1)
    }

    pub fn divides(&self, other: &Poly) -> Result<bool> {
        Ok(other.rem(self)?.is_zero())
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Poly) -> Result<Poly> {
        self.check_same_field(other)?;
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Ok(a);
        }
        let inv = self.field.inv(a.leading())?;
        Ok(a.scale(inv))
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = self.field.reduce_u64(x);
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = self.field.add(self.field.mul(acc, x), c);
        }
        acc
    }

    /// `base^exp mod self` in F_p[x]/(self) by binary exponentiation.
    pub fn pow_mod(&self, base: &Poly, mut exp: u64) -> Result<Poly> {
        self.check_same_field(base)?;
        if self.is_zero() {
            return Err(Error::ZeroPolyDivision);
        }
        let mut acc = Poly::one(self.field).rem(self)?;
        let mut b = base.rem(self)?;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&b)?.rem(self)?;
            }
            b = b.mul(&b)?.rem(self)?;
            exp >>= 1;
        }
        Ok(acc)
    }

    /// `x^(p^k) mod self`, by k successive p-th powers (Frobenius iterates).
    pub fn frobenius_power(&self, k: u32) -> Result<Poly> {
        let p = self.field.p();
        let mut g = Poly::x(self.field).rem(self)?;
        for _ in 0..k {
            g = self.pow_mod(&g, p)?;
        }
        Ok(g)
    }

    /// Irreducibility over F_p: a monic f of degree d is irreducible iff
    /// x^(p^d) = x mod f and gcd(x^(p^(d/l)) - x, f) = 1 for every prime l | d.
    pub fn is_irreducible(&self) -> Result<bool> {
        let d = match self.degree() {
            None | Some(0) => return Ok(false),
            Some(d) => d,
        };
        if !self.is_monic() {
            return Err(Error::NonMonic);
        }
        if d == 1 {
            return Ok(true);
        }
        let x = Poly::x(self.field);
        // Frobenius iterates x^(p^k) mod f for k = 1..d, computed once.
        let p = self.field.p();
        let mut iterates = Vec::with_capacity(d + 1);
        let mut g = x.rem(self)?;
        iterates.push(g.clone()); // k = 0
        for _ in 0..d {
            g = self.pow_mod(&g, p)?;
            iterates.push(g.clone());
        }
        if iterates[d] != x.rem(self)? {
            return Ok(false);
        }
        for l in prime_factors(d as u64) {
            let k = d / l as usize;
            let h = iterates[k].sub(&x)?;
            let g = self.gcd(&h)?;
            if g.degree() != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Parse the comma-separated lowest-first residue form, e.g. `1,1,1`.
    pub fn parse(field: PrimeModulus, s: &str) -> Result<Poly> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Poly::zero(field));
        }
        let mut coeffs = Vec::new();
        for tok in s.split(',') {
            let tok = tok.trim();
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {tok:?}")))?;
            coeffs.push(field.reduce_i64(v));
        }
        Ok(Poly::new(field, coeffs))
    }
}

impl std::fmt::Display for Poly {
    /// Lowest-first residue list; the zero polynomial prints as "0".
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mobius(n: u64) -> i64 {
    let mut m = n;
    let mut mu = 1i64;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if m > 1 {
        mu = -mu;
    }
    mu
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Number of monic irreducible polynomials of degree d over F_q:
/// I(q, d) = (1/d) * sum over e | d of mobius(e) q^(d/e).
pub fn irreducible_count(q: u64, d: u64) -> Result<BigInt> {
    if q < 2 || d == 0 {
        return Err(Error::Domain(format!("irreducible_count needs q >= 2, d >= 1 (got q={q}, d={d})")));
    }
    let qb = BigInt::from(q);
    let mut sum = BigInt::zero();
    for e in divisors(d) {
        let mu = mobius(e);
        if mu == 0 {
            continue;
        }
        let term = qb.pow((d / e) as u32);
        if mu > 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let (quot, rem) = num::Integer::div_rem(&sum, &BigInt::from(d));
    debug_assert!(rem.is_zero());
    let _ = rem;
    Ok(quot)
}
