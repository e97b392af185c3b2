//! Truncated power series with exact rational coefficients.
//!
//! A series holds coefficients for degrees 0..=N and all arithmetic is closed
//! under that truncation. Everything is exact `BigRational`; floats never
//! enter, so generating-function identities can be asserted with `==`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>, // index = degree, length = trunc + 1
}

impl PowerSeries {
    /// Series from explicit coefficients; the truncation order is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<BigRational>) -> Result<PowerSeries> {
        if coeffs.is_empty() {
            return Err(Error::Domain("series needs at least the degree-0 coefficient".into()));
        }
        Ok(PowerSeries { coeffs })
    }

    pub fn zero(trunc: usize) -> PowerSeries {
        PowerSeries { coeffs: vec![BigRational::zero(); trunc + 1] }
    }

    pub fn one(trunc: usize) -> PowerSeries {
        let mut s = PowerSeries::zero(trunc);
        s.coeffs[0] = BigRational::one();
        s
    }

    /// c * u^k truncated at `trunc`.
    pub fn monomial(trunc: usize, k: usize, c: BigRational) -> PowerSeries {
        let mut s = PowerSeries::zero(trunc);
        if k <= trunc {
            s.coeffs[k] = c;
        }
        s
    }

    /// 1/(1-u) = 1 + u + u^2 + ...
    pub fn geometric(trunc: usize) -> PowerSeries {
        PowerSeries { coeffs: vec![BigRational::one(); trunc + 1] }
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn common_trunc(&self, other: &PowerSeries) -> usize {
        self.trunc().min(other.trunc())
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.common_trunc(other);
        let coeffs = (0..=n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        PowerSeries { coeffs }
    }

    pub fn sub(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.common_trunc(other);
        let coeffs = (0..=n).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect();
        PowerSeries { coeffs }
    }

    pub fn scale(&self, c: &BigRational) -> PowerSeries {
        PowerSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.common_trunc(other);
        let mut coeffs = vec![BigRational::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                coeffs[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        PowerSeries { coeffs }
    }

    /// Multiplicative inverse mod u^{N+1}; requires a nonzero constant term.
    pub fn recip(&self) -> Result<PowerSeries> {
        if self.coeffs[0].is_zero() {
            return Err(Error::Domain("series reciprocal needs a nonzero constant term".into()));
        }
        let n = self.trunc();
        let a0_inv = self.coeffs[0].recip();
        let mut b = vec![BigRational::zero(); n + 1];
        b[0] = a0_inv.clone();
        for m in 1..=n {
            let mut acc = BigRational::zero();
            for i in 1..=m {
                if self.coeffs[i].is_zero() {
                    continue;
                }
                acc += &self.coeffs[i] * &b[m - i];
            }
            b[m] = -(&a0_inv * acc);
        }
        Ok(PowerSeries { coeffs: b })
    }

    /// Non-negative integer power by repeated squaring.
    pub fn pow_u64(&self, mut e: u64) -> PowerSeries {
        let mut base = self.clone();
        let mut acc = PowerSeries::one(self.trunc());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Integer power, negative exponents via the reciprocal.
    pub fn pow_i64(&self, e: i64) -> Result<PowerSeries> {
        if e >= 0 {
            Ok(self.pow_u64(e as u64))
        } else {
            Ok(self.recip()?.pow_u64(e.unsigned_abs()))
        }
    }

    /// Largest |coefficient| as f64, used for residual reporting.
    pub fn max_abs_coeff_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| rational_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }
}

/// Rational to nearest double, with a scaled fallback for huge components.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // fall back to a scaled division for very large components
        let digits = 30u32;
        let scale = BigInt::from(10u64).pow(digits);
        let scaled = (r * BigRational::from_integer(scale.clone())).round();
        scaled.to_integer().to_f64().unwrap_or(f64::NAN) / 1e30
    })
}

pub fn ratio_u64(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_i64(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
