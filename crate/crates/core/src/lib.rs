//! Exact linear algebra, q-series statistics, and anti-concentration
//! diagnostics for random matrices over prime fields.

pub mod anticonc;
pub mod error;
pub mod experiments;
pub mod extfield;
pub mod field;
pub mod fieldops;
pub mod linalg;
pub mod partition;
pub mod poly;
pub mod prng;
pub mod qpoch;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use extfield::ExtensionField;
pub use field::{is_prime_u64, prime_power_base, FieldElement, PrimeModulus, MAX_MODULUS};
pub use fieldops::FieldOps;
pub use linalg::{lift_minus_generator, Gf2Rows, Matrix, MatrixFp};
pub use partition::{partitions_of, Partition};
pub use poly::{irreducible_count, Poly};
pub use qpoch::{q_pochhammer_exact, q_pochhammer_infinite, q_pochhammer_infinite_inv, Bounded};
