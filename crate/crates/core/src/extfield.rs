//! Extension fields F_q = F_p[x] / (phi) for a monic irreducible phi.
//! Elements are coefficient vectors of length deg(phi), lowest degree first.

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::fieldops::FieldOps;
use crate::poly::Poly;

#[derive(Clone, Debug)]
pub struct ExtensionField {
    base: PrimeModulus,
    modulus: Poly,
    degree: usize,
}

pub type ExtElem = Vec<u64>;

impl ExtensionField {
    /// The modulus polynomial must be monic irreducible; both are validated.
    pub fn new(modulus: Poly) -> Result<ExtensionField> {
        let degree = modulus
            .degree()
            .ok_or_else(|| Error::Domain("zero modulus polynomial".into()))?;
        if degree == 0 {
            return Err(Error::Domain("modulus polynomial must have degree >= 1".into()));
        }
        if !modulus.is_monic() {
            return Err(Error::NonMonic);
        }
        if !modulus.is_irreducible()? {
            return Err(Error::NotIrreducible(modulus.to_string()));
        }
        Ok(ExtensionField {
            base: modulus.field(),
            modulus,
            degree,
        })
    }

    pub fn base(&self) -> PrimeModulus {
        self.base
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// q = p^d as f64 (for reporting; exact value may exceed u64).
    pub fn order_f64(&self) -> f64 {
        (self.base.p() as f64).powi(self.degree as i32)
    }

    /// q = p^d when it fits in u64.
    pub fn order_u64(&self) -> Option<u64> {
        self.base.p().checked_pow(self.degree as u32)
    }

    pub fn embed(&self, c: u64) -> ExtElem {
        let mut e = vec![0u64; self.degree];
        e[0] = self.base.reduce_u64(c);
        e
    }

    /// The class of x (a root of phi).
    pub fn generator(&self) -> ExtElem {
        if self.degree == 1 {
            // x = -a_0 mod (x + a_0)
            self.embed(self.base.neg(self.modulus.coeff(0)))
        } else {
            let mut e = vec![0u64; self.degree];
            e[1] = 1;
            e
        }
    }

    fn to_poly(&self, e: &ExtElem) -> Poly {
        Poly::new(self.base, e.clone())
    }

    fn from_poly(&self, p: &Poly) -> ExtElem {
        let mut e = vec![0u64; self.degree];
        for (i, slot) in e.iter_mut().enumerate() {
            *slot = p.coeff(i);
        }
        e
    }
}

impl FieldOps for ExtensionField {
    type Elem = ExtElem;

    fn zero(&self) -> ExtElem {
        vec![0u64; self.degree]
    }

    fn one(&self) -> ExtElem {
        self.embed(1)
    }

    fn is_zero(&self, a: &ExtElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        a.iter().zip(b).map(|(&x, &y)| self.base.add(x, y)).collect()
    }

    fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        a.iter().zip(b).map(|(&x, &y)| self.base.sub(x, y)).collect()
    }

    fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        // schoolbook product then reduction by phi
        let d = self.degree;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = self.base.add(prod[i + j], self.base.mul(x, y));
            }
        }
        // reduce: phi is monic, so x^d = -(low part of phi)
        for k in (d..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for j in 0..d {
                let t = self.base.mul(c, self.modulus.coeff(j));
                prod[k - d + j] = self.base.sub(prod[k - d + j], t);
            }
        }
        prod.truncate(d);
        prod
    }

    fn neg(&self, a: &ExtElem) -> ExtElem {
        a.iter().map(|&x| self.base.neg(x)).collect()
    }

    fn inv(&self, a: &ExtElem) -> Result<ExtElem> {
        if self.is_zero(a) {
            return Err(Error::ZeroInverse);
        }
        // extended Euclid in F_p[x]: s * a + t * phi = gcd = const
        let mut r0 = self.modulus.clone();
        let mut r1 = self.to_poly(a);
        let mut t0 = Poly::zero(self.base);
        let mut t1 = Poly::one(self.base);
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1)?;
            let t = t0.sub(&q.mul(&t1)?)?;
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        debug_assert_eq!(r0.degree(), Some(0), "modulus must be irreducible");
        let c_inv = self.base.inv(r0.coeff(0))?;
        Ok(self.from_poly(&t0.scale(c_inv)))
    }

    fn describe(&self) -> String {
        format!("F_{}^{}", self.base.p(), self.degree)
    }

    fn same_field(&self, other: &Self) -> bool {
        self.base.p() == other.base.p() && self.modulus == other.modulus
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> ExtensionField {
        let f3 = PrimeModulus::new(3).unwrap();
        ExtensionField::new(Poly::parse(f3, "1,0,1").unwrap()).unwrap()
    }

    #[test]
    fn rejects_reducible_modulus() {
        let f5 = PrimeModulus::new(5).unwrap();
        let phi = Poly::parse(f5, "1,0,1").unwrap(); // reducible over F_5
        assert!(matches!(ExtensionField::new(phi), Err(Error::NotIrreducible(_))));
    }

    #[test]
    fn generator_is_root_of_modulus() {
        let k = f9();
        let alpha = k.generator();
        // alpha^2 + 1 = 0
        let sq = k.mul(&alpha, &alpha);
        let val = k.add(&sq, &k.one());
        assert!(k.is_zero(&val));
    }

    #[test]
    fn all_nonzero_elements_invertible_f9() {
        let k = f9();
        let mut count = 0;
        for a in 0..3u64 {
            for b in 0..3u64 {
                let e = vec![a, b];
                if k.is_zero(&e) {
                    continue;
                }
                let inv = k.inv(&e).unwrap();
                assert_eq!(k.mul(&e, &inv), k.one());
                count += 1;
            }
        }
        assert_eq!(count, 8);
    }

    #[test]
    fn multiplicative_order_divides_q_minus_1() {
        // F_8 = F_2[x]/(x^3 + x + 1); every nonzero element has order dividing 7
        let f2 = PrimeModulus::new(2).unwrap();
        let k = ExtensionField::new(Poly::parse(f2, "1,1,0,1").unwrap()).unwrap();
        for bits in 1..8u64 {
            let e = vec![bits & 1, (bits >> 1) & 1, (bits >> 2) & 1];
            let mut acc = k.one();
            for _ in 0..7 {
                acc = k.mul(&acc, &e);
            }
            assert_eq!(acc, k.one());
        }
    }

    #[test]
    fn degree_one_extension_is_base_field() {
        let f5 = PrimeModulus::new(5).unwrap();
        let k = ExtensionField::new(Poly::parse(f5, "3,1").unwrap()).unwrap(); // x + 3
        assert_eq!(k.degree(), 1);
        assert_eq!(k.generator(), vec![2]); // x = -3 = 2
        let a = k.embed(4);
        let inv = k.inv(&a).unwrap();
        assert_eq!(k.mul(&a, &inv), k.one());
    }
}
