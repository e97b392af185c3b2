//! q-Pochhammer products. Finite products are exact rationals; infinite
//! products return a float together with a certified truncation bound derived
//! from sum_{i > K} x^i <= x^(K+1) / (1 - x).

use crate::error::{Error, Result};
use num::rational::BigRational;
use num::traits::ToPrimitive;
use num::{One, Zero};

/// A float value with a certified absolute error bound.
#[derive(Clone, Copy, Debug)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
}

impl Bounded {
    pub fn new(value: f64, error_bound: f64) -> Bounded {
        Bounded { value, error_bound }
    }

    /// Does `target` lie within the certified interval widened by `slack`?
    pub fn contains(&self, target: f64, slack: f64) -> bool {
        (self.value - target).abs() <= self.error_bound + slack
    }
}

/// Exact finite product prod_{j=1..m} (1 - x^j).
pub fn q_pochhammer_exact(x: &BigRational, m: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut xp = BigRational::one();
    for _ in 0..m {
        xp *= x;
        acc *= BigRational::one() - &xp;
    }
    acc
}

/// Infinite product prod_{i>=1} (1 - x^i) for 0 < x < 1, truncated so the
/// certified tail is below `tol`. The partial product is computed exactly and
/// converted once, so the returned error bound is dominated by the tail term
/// prod_{i>K}(1 - x^i) in [1 - t, 1] with t = x^(K+1)/(1-x).
pub fn q_pochhammer_infinite(x: &BigRational, tol: f64) -> Result<Bounded> {
    if x <= &BigRational::zero() || x >= &BigRational::one() {
        return Err(Error::Domain(format!("q-Pochhammer base must be in (0,1), got {x}")));
    }
    let tol = if tol > 0.0 { tol } else { 1e-12 };
    let xf = x.to_f64().ok_or_else(|| Error::Domain("base out of f64 range".into()))?;
    // smallest K with x^(K+1)/(1-x) <= tol
    let mut k = ((tol * (1.0 - xf)).ln() / xf.ln() - 1.0).ceil() as i64;
    if k < 8 {
        k = 8;
    }
    let k = (k as u64).min(4000);
    let partial = q_pochhammer_exact(x, k);
    let value = partial
        .to_f64()
        .ok_or_else(|| Error::Domain("product out of f64 range".into()))?;
    let tail = xf.powi(k as i32 + 1) / (1.0 - xf);
    // conversion rounding is a few ulps; fold in a generous cushion
    let error_bound = value.abs() * tail + 8.0 * f64::EPSILON * value.abs() + f64::MIN_POSITIVE;
    Ok(Bounded { value, error_bound })
}

/// Convenience: prod_{i>=1}(1 - q^(-i)) for integer q >= 2.
pub fn q_pochhammer_infinite_inv(q: u64, tol: f64) -> Result<Bounded> {
    if q < 2 {
        return Err(Error::Domain(format!("need q >= 2, got {q}")));
    }
    q_pochhammer_infinite(&BigRational::new(1.into(), q.into()), tol)
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
