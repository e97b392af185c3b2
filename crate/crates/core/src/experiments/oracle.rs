//! Exhaustive ground truth for small ensembles: iterate every matrix whose
//! entries lie in the support of the entry distribution, weight it by the
//! exact product of entry probabilities, and accumulate the statistic into
//! a rational-valued measure. The Monte Carlo runners are tested against
//! these distributions.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::{One, Zero};

use crate::anticonc::DistributionSpec;
use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::linalg::MatrixFp;
use crate::poly::Poly;

/// Statistic evaluated per matrix. `Partition` and `Divisibility` carry the
/// modulus polynomial they refer to.
#[derive(Clone, Debug)]
pub enum OracleStatistic {
    /// Bucket by rank 0..=n.
    Rank,
    /// Bucket by the number of distinct eigenvalues in F_p.
    EigfreeCount,
    /// Same, but singular matrices land in an "excluded" bucket.
    EigfreeInvertibleCount,
    /// Buckets "divisible" / "not_divisible" of φ | charpoly.
    Divisibility(Poly),
    /// Bucket by the serialized partition λ_φ, with sizes above 4 pooled
    /// into "other".
    Partition(Poly),
}

/// Exact distribution of a statistic over all matrices with entries ranging
/// over the support of `mu`, each weighted by its exact probability.
/// Uniform `mu` reproduces the equal-weight count over all p^{n²} matrices.
/// The enumeration budget is |atoms|^{n²} ≤ 10⁶.
pub fn enumerate_oracle(
    field: &PrimeModulus,
    n: usize,
    stat: &OracleStatistic,
    mu: &DistributionSpec,
) -> Result<BTreeMap<String, BigRational>> {
    field.check_same(mu.field())?;
    let atoms = mu.atoms();
    let cells = n * n;
    let total = (atoms.len() as u128)
        .checked_pow(cells as u32)
        .filter(|&t| t <= 1_000_000)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "{}^{cells} matrices exceed the 1e6 enumeration budget",
                atoms.len()
            ))
        })?;
    let mut out: BTreeMap<String, BigRational> = BTreeMap::new();
    let mut m = MatrixFp::zero(field.clone(), n, n);
    for code in 0..total {
        let mut rest = code;
        let mut weight = BigRational::one();
        for cell in 0..cells {
            let (value, pr) = &atoms[(rest % atoms.len() as u128) as usize];
            rest /= atoms.len() as u128;
            m.set(cell / n, cell % n, *value);
            weight *= pr;
        }
        let bucket = bucket_for(&m, stat)?;
        let slot = out.entry(bucket).or_insert_with(BigRational::zero);
        *slot = slot.clone() + weight;
    }
    Ok(out)
}

fn bucket_for(m: &MatrixFp, stat: &OracleStatistic) -> Result<String> {
    Ok(match stat {
        OracleStatistic::Rank => m.rank_fp().to_string(),
        OracleStatistic::EigfreeCount => m.distinct_eigenvalue_count()?.to_string(),
        OracleStatistic::EigfreeInvertibleCount => {
            if m.rank_fp() < m.rows() {
                "excluded".to_string()
            } else {
                m.distinct_eigenvalue_count()?.to_string()
            }
        }
        OracleStatistic::Divisibility(phi) => {
            if phi.divides(&m.charpoly()?)? {
                "divisible".to_string()
            } else {
                "not_divisible".to_string()
            }
        }
        OracleStatistic::Partition(phi) => {
            let lambda = m.lambda_phi(phi)?;
            if lambda.size() <= 4 {
                lambda.to_string()
            } else {
                "other".to_string()
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ratio_u64;

    #[test]
    fn rank_distribution_of_all_two_by_two_binary_matrices() {
        let field = PrimeModulus::new(2).unwrap();
        let mu = DistributionSpec::uniform(&field).unwrap();
        let dist = enumerate_oracle(&field, 2, &OracleStatistic::Rank, &mu).unwrap();
        assert_eq!(dist["2"], ratio_u64(6, 16));
        assert_eq!(dist["1"], ratio_u64(9, 16));
        assert_eq!(dist["0"], ratio_u64(1, 16));
        // matches the closed-form uniform rank law (argument is corank)
        for r in 0..=2usize {
            assert_eq!(
                dist[&r.to_string()],
                crate::stats::uniform_rank_prob(2, 2, 2 - r).unwrap()
            );
        }
    }

    #[test]
    fn invertible_eigfree_two_by_two_binary() {
        // GL(2,2) has 6 elements; only the two of order 3 avoid eigenvalues
        let field = PrimeModulus::new(2).unwrap();
        let mu = DistributionSpec::uniform(&field).unwrap();
        let dist =
            enumerate_oracle(&field, 2, &OracleStatistic::EigfreeInvertibleCount, &mu).unwrap();
        assert_eq!(dist["0"], ratio_u64(2, 16));
        assert_eq!(dist["excluded"], ratio_u64(10, 16));
    }

    #[test]
    fn weighted_measure_sums_to_one() {
        let field = PrimeModulus::new(3).unwrap();
        let mu = DistributionSpec::new(
            &field,
            &[(0, ratio_u64(2, 3)), (1, ratio_u64(1, 3))],
            None,
        )
        .unwrap();
        for stat in [
            OracleStatistic::Rank,
            OracleStatistic::EigfreeCount,
            OracleStatistic::Partition(Poly::parse(field.clone(), "2,1").unwrap()),
        ] {
            let dist = enumerate_oracle(&field, 2, &stat, &mu).unwrap();
            let total = dist.values().fold(BigRational::zero(), |a, b| a + b);
            assert_eq!(total, BigRational::one(), "{stat:?}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let field = PrimeModulus::new(5).unwrap();
        let mu = DistributionSpec::uniform(&field).unwrap();
        assert!(matches!(
            enumerate_oracle(&field, 4, &OracleStatistic::Rank, &mu),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
