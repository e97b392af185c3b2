//! Matrices over finite fields: elimination, rank, kernels, characteristic
//! polynomials, and the primary-decomposition partition of a matrix at an
//! irreducible polynomial.
//!
//! Elimination is generic over [`FieldOps`] so the same code runs over F_p and
//! extension fields. Pivoting is deterministic (first nonzero in column
//! order), and kernel bases come from the reduced row echelon form, so results
//! are reproducible across runs and platforms. A bit-packed GF(2) path covers
//! the p = 2 hot loops and is tested to agree with the generic path.

use crate::error::{Error, Result};
use crate::extfield::ExtensionField;
use crate::field::PrimeModulus;
use crate::fieldops::FieldOps;
use crate::partition::Partition;
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: FieldOps> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: FieldOps> Matrix<F> {
    pub fn zero(field: F, rows: usize, cols: usize) -> Matrix<F> {
        let data = vec![field.zero(); rows * cols];
        Matrix { field, rows, cols, data }
    }

    pub fn identity(field: F, n: usize) -> Matrix<F> {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            let one = m.field.one();
            m.set(i, i, one);
        }
        m
    }

    pub fn from_rows(field: F, rows: Vec<Vec<F::Elem>>) -> Result<Matrix<F>> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_flat(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Result<Matrix<F>> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { field, rows, cols, data })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut out = Matrix::zero(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix<F>) -> Result<Matrix<F>> {
        if !self.field.same_field(&other.field) {
            return Err(Error::Dimension(format!(
                "field mismatch: {} vs {}",
                self.field.describe(),
                other.field.describe()
            )));
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zero(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if self.field.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = self.field.mul(a, other.get(k, j));
                    let cur = self.field.add(out.get(i, j), &t);
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix<F>) -> Result<Matrix<F>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in add".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Matrix::from_flat(self.field.clone(), self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Matrix<F>) -> Result<Matrix<F>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in sub".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.sub(a, b))
            .collect();
        Matrix::from_flat(self.field.clone(), self.rows, self.cols, data)
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|e| self.field.is_zero(e))
    }

    /// Rank by forward elimination with first-nonzero pivoting.
    pub fn rank(&self) -> usize {
        self.rank_generic()
    }

    pub fn rank_generic(&self) -> usize {
        let f = &self.field;
        let mut a = self.data.clone();
        let (n, m) = (self.rows, self.cols);
        let mut rank = 0usize;
        for col in 0..m {
            if rank == n {
                break;
            }
            let Some(pr) = (rank..n).find(|&r| !f.is_zero(&a[r * m + col])) else {
                continue;
            };
            if pr != rank {
                for j in 0..m {
                    a.swap(pr * m + j, rank * m + j);
                }
            }
            let pinv = f
                .inv(&a[rank * m + col])
                .expect("pivot is nonzero by construction");
            for r in rank + 1..n {
                let lead = a[r * m + col].clone();
                if f.is_zero(&lead) {
                    continue;
                }
                let factor = f.mul(&lead, &pinv);
                for j in col..m {
                    let t = f.mul(&factor, &a[rank * m + j]);
                    a[r * m + j] = f.sub(&a[r * m + j], &t);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Reduced row echelon form together with the pivot column list.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let f = self.field.clone();
        let mut a = self.data.clone();
        let (n, m) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m {
            if row == n {
                break;
            }
            let Some(pr) = (row..n).find(|&r| !f.is_zero(&a[r * m + col])) else {
                continue;
            };
            if pr != row {
                for j in 0..m {
                    a.swap(pr * m + j, row * m + j);
                }
            }
            let pinv = f.inv(&a[row * m + col]).expect("pivot nonzero");
            for j in col..m {
                a[row * m + j] = f.mul(&a[row * m + j], &pinv);
            }
            for r in 0..n {
                if r == row || f.is_zero(&a[r * m + col]) {
                    continue;
                }
                let factor = a[r * m + col].clone();
                for j in col..m {
                    let t = f.mul(&factor, &a[row * m + j]);
                    a[r * m + j] = f.sub(&a[r * m + j], &t);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (
            Matrix { field: f, rows: n, cols: m, data: a },
            pivots,
        )
    }

    /// Basis of the right null space { v : M v = 0 }, in the deterministic
    /// reduced-echelon parameterization (one vector per free column, in
    /// column order, with a unit at the free coordinate).
    pub fn nullspace(&self) -> Vec<Vec<F::Elem>> {
        let (r, pivots) = self.rref();
        let f = &self.field;
        let m = self.cols;
        let pivot_set: std::collections::BTreeMap<usize, usize> =
            pivots.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut basis = Vec::new();
        for free in 0..m {
            if pivot_set.contains_key(&free) {
                continue;
            }
            let mut v = vec![f.zero(); m];
            v[free] = f.one();
            for (&pc, &prow) in &pivot_set {
                v[pc] = f.neg(r.get(prow, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left kernel { w : w^T M = 0 }.
    pub fn left_kernel(&self) -> Vec<Vec<F::Elem>> {
        self.transpose().nullspace()
    }

    /// For an n x (n-1) matrix of full column rank, the unique left-kernel
    /// vector normalized so its first nonzero coordinate is 1. Returns `None`
    /// when the column rank is below n-1 (kernel dimension > 1).
    pub fn canonical_normal_vector(&self) -> Result<Option<Vec<F::Elem>>> {
        if self.cols + 1 != self.rows {
            return Err(Error::Dimension(format!(
                "normal vector needs an n x (n-1) matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let kernel = self.left_kernel();
        if kernel.len() != 1 {
            return Ok(None);
        }
        let f = &self.field;
        let v = &kernel[0];
        let first = v
            .iter()
            .position(|e| !f.is_zero(e))
            .ok_or_else(|| Error::Internal("kernel basis vector is zero".into()))?;
        let scale = f.inv(&v[first])?;
        Ok(Some(v.iter().map(|e| f.mul(e, &scale)).collect()))
    }

    /// Inverse by Gauss-Jordan on the augmented matrix; error when singular.
    pub fn inverse(&self) -> Result<Matrix<F>> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let f = self.field.clone();
        let n = self.rows;
        let m = 2 * n;
        let mut a = vec![f.zero(); n * m];
        for r in 0..n {
            for c in 0..n {
                a[r * m + c] = self.get(r, c).clone();
            }
            a[r * m + n + r] = f.one();
        }
        let mut row = 0usize;
        for col in 0..n {
            let Some(pr) = (row..n).find(|&r| !f.is_zero(&a[r * m + col])) else {
                return Err(Error::Domain("matrix is singular".into()));
            };
            if pr != row {
                for j in 0..m {
                    a.swap(pr * m + j, row * m + j);
                }
            }
            let pinv = f.inv(&a[row * m + col])?;
            for j in 0..m {
                a[row * m + j] = f.mul(&a[row * m + j], &pinv);
            }
            for r in 0..n {
                if r == row || f.is_zero(&a[r * m + col]) {
                    continue;
                }
                let factor = a[r * m + col].clone();
                for j in 0..m {
                    let t = f.mul(&factor, &a[row * m + j]);
                    a[r * m + j] = f.sub(&a[r * m + j], &t);
                }
            }
            row += 1;
        }
        let mut out = Matrix::zero(f, n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, a[r * m + n + c].clone());
            }
        }
        Ok(out)
    }
}

pub type MatrixFp = Matrix<PrimeModulus>;

impl Matrix<PrimeModulus> {
    pub fn from_u64_rows(field: PrimeModulus, rows: Vec<Vec<u64>>) -> Result<MatrixFp> {
        let reduced = rows
            .into_iter()
            .map(|row| row.into_iter().map(|v| field.reduce_u64(v)).collect())
            .collect();
        Matrix::from_rows(field, reduced)
    }

    /// Rank; dispatches to the bit-packed GF(2) path when p = 2.
    pub fn rank_fp(&self) -> usize {
        if self.field.p() == 2 {
            Gf2Rows::from_matrix(self).rank()
        } else {
            self.rank_generic()
        }
    }

    /// M - a * I.
    pub fn sub_scalar_diag(&self, a: u64) -> Result<MatrixFp> {
        if !self.is_square() {
            return Err(Error::Dimension("need a square matrix".into()));
        }
        let mut out = self.clone();
        let f = out.field;
        for i in 0..out.rows {
            let v = f.sub(*out.get(i, i), f.reduce_u64(a));
            out.set(i, i, v);
        }
        Ok(out)
    }

    /// phi(M) by Horner's rule in matrix arithmetic.
    pub fn poly_eval_matrix(&self, phi: &Poly) -> Result<MatrixFp> {
        if !self.is_square() {
            return Err(Error::Dimension("need a square matrix".into()));
        }
        if phi.field().p() != self.field.p() {
            return Err(Error::ModulusMismatch(phi.field().p(), self.field.p()));
        }
        let n = self.rows;
        let f = self.field;
        let coeffs = phi.coeffs();
        let mut acc = Matrix::zero(f, n, n);
        for &c in coeffs.iter().rev() {
            acc = acc.mul(self)?;
            if c != 0 {
                for i in 0..n {
                    let v = f.add(*acc.get(i, i), c);
                    acc.set(i, i, v);
                }
            }
        }
        Ok(acc)
    }

    /// Monic characteristic polynomial det(xI - M), computed by similarity
    /// reduction to upper Hessenberg form followed by the leading-minor
    /// recurrence (O(n^3) field operations total). When a subdiagonal entry
    /// vanishes the recurrence's cross terms drop out, which is exactly the
    /// block-triangular factorization of the determinant.
    pub fn charpoly(&self) -> Result<Poly> {
        if !self.is_square() {
            return Err(Error::Dimension("charpoly of non-square matrix".into()));
        }
        let f = self.field;
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::one(f));
        }
        let mut h = self.data.clone();
        // similarity reduction to upper Hessenberg
        for k in 0..n.saturating_sub(2) {
            let Some(pr) = (k + 1..n).find(|&r| h[r * n + k] != 0) else {
                continue;
            };
            if pr != k + 1 {
                for j in 0..n {
                    h.swap(pr * n + j, (k + 1) * n + j);
                }
                for r in 0..n {
                    h.swap(r * n + pr, r * n + (k + 1));
                }
            }
            let pinv = f.inv(h[(k + 1) * n + k])?;
            for i in k + 2..n {
                let lead = h[i * n + k];
                if lead == 0 {
                    continue;
                }
                let factor = f.mul(lead, pinv);
                // rows: R_i <- R_i - factor * R_{k+1}
                for j in k..n {
                    let t = f.mul(factor, h[(k + 1) * n + j]);
                    h[i * n + j] = f.sub(h[i * n + j], t);
                }
                // columns (similarity inverse): C_{k+1} <- C_{k+1} + factor * C_i
                for r in 0..n {
                    let t = f.mul(factor, h[r * n + i]);
                    h[r * n + (k + 1)] = f.add(h[r * n + (k + 1)], t);
                }
            }
        }
        // p_k(x) = (x - H[k][k]) p_{k-1}(x)
        //          - sum_i H[i][k] * (prod of subdiagonals below i) * p_{i-1}(x)
        let mut polys: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
        polys.push(vec![1]);
        for k in 1..=n {
            let hkk = h[(k - 1) * n + (k - 1)];
            let mut pk = vec![0u64; k + 1];
            for (i, &c) in polys[k - 1].iter().enumerate() {
                pk[i + 1] = f.add(pk[i + 1], c);
                pk[i] = f.sub(pk[i], f.mul(hkk, c));
            }
            let mut prod = 1u64;
            for i in (1..k).rev() {
                prod = f.mul(prod, h[i * n + (i - 1)]);
                if prod == 0 {
                    break;
                }
                let coef = f.mul(h[(i - 1) * n + (k - 1)], prod);
                if coef == 0 {
                    continue;
                }
                for (j, &c) in polys[i - 1].iter().enumerate() {
                    pk[j] = f.sub(pk[j], f.mul(coef, c));
                }
            }
            polys.push(pk);
        }
        Ok(Poly::new(f, polys.pop().expect("nonempty")))
    }

    /// Eigenvalues of M that lie in F_p, via gcd(charpoly, x^p - x). The gcd
    /// degree counts distinct eigenvalues; the matrix is eigenvalue-free iff
    /// the gcd is constant.
    pub fn distinct_eigenvalue_count(&self) -> Result<usize> {
        let c = self.charpoly()?;
        Ok(Self::eigenvalue_gcd(&c)?.degree().unwrap_or(0))
    }

    pub fn is_eigenvalue_free(&self) -> Result<bool> {
        Ok(self.distinct_eigenvalue_count()? == 0)
    }

    /// gcd(c, x^p - x) with x^p computed mod c by repeated squaring.
    pub fn eigenvalue_gcd(c: &Poly) -> Result<Poly> {
        let f = c.field();
        let x = Poly::x(f);
        let xp = c.pow_mod(&x, f.p())?;
        let h = xp.sub(&x)?;
        c.gcd(&h)
    }

    /// Distinct eigenvalues by direct evaluation (cross-check path; requires
    /// p small enough to scan).
    pub fn eigenvalues_direct(&self) -> Result<Vec<u64>> {
        let p = self.field.p();
        if p > 1_000_000 {
            return Err(Error::BudgetExceeded(format!("eigenvalue scan over p = {p}")));
        }
        let c = self.charpoly()?;
        Ok((0..p).filter(|&a| c.eval(a) == 0).collect())
    }

    /// The partition lambda_phi(M): Jordan-type block structure of M at the
    /// monic irreducible phi, read off from d_j = dim ker(phi(M)^j). The
    /// increments (d_j - d_{j-1}) / deg(phi) form the conjugate partition.
    pub fn lambda_phi(&self, phi: &Poly) -> Result<Partition> {
        if !phi.is_irreducible()? {
            return Err(Error::NotIrreducible(phi.to_string()));
        }
        let n = self.rows;
        let deg = phi.degree().expect("irreducible implies nonzero") as u64;
        let a = self.poly_eval_matrix(phi)?;
        let mut b = a.clone();
        let mut increments: Vec<u64> = Vec::new();
        let mut d_prev = 0u64;
        for _ in 0..n.max(1) {
            let d = (n - b.rank_fp()) as u64;
            if d == d_prev {
                break;
            }
            increments.push(d - d_prev);
            d_prev = d;
            if d as usize == n {
                break;
            }
            b = b.mul(&a)?;
        }
        let mut dual_parts = Vec::with_capacity(increments.len());
        for inc in increments {
            if inc % deg != 0 {
                return Err(Error::Internal(format!(
                    "kernel increment {inc} not divisible by deg phi = {deg}"
                )));
            }
            dual_parts.push(inc / deg);
        }
        Ok(Partition::new(dual_parts)?.dual())
    }

    /// Companion matrix of a monic polynomial: subdiagonal ones, last column
    /// holding the negated low coefficients.
    pub fn companion(phi: &Poly) -> Result<MatrixFp> {
        let d = phi.degree().ok_or(Error::ZeroPolyDivision)?;
        if d == 0 || !phi.is_monic() {
            return Err(Error::NonMonic);
        }
        let f = phi.field();
        let mut m = Matrix::zero(f, d, d);
        for i in 1..d {
            m.set(i, i - 1, 1);
        }
        for i in 0..d {
            m.set(i, d - 1, f.neg(phi.coeff(i)));
        }
        Ok(m)
    }

    /// Parse the plain text matrix form: first line `n m p`, then n lines of
    /// m residues each.
    pub fn parse_text(s: &str) -> Result<MatrixFp> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(Error::Parse("header must be `n m p`".into()));
        }
        let n: usize = head[0].parse().map_err(|_| Error::Parse("bad n".into()))?;
        let m: usize = head[1].parse().map_err(|_| Error::Parse("bad m".into()))?;
        let p: u64 = head[2].parse().map_err(|_| Error::Parse("bad p".into()))?;
        let field = PrimeModulus::new(p)?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {n} rows")))?;
            let row: Vec<u64> = line
                .split_whitespace()
                .map(|t| -> Result<u64> {
                    let v: i64 = t.parse().map_err(|_| Error::Parse(format!("bad entry {t:?}")))?;
                    Ok(field.reduce_i64(v))
                })
                .collect::<Result<_>>()?;
            if row.len() != m {
                return Err(Error::Parse(format!("expected {m} entries per row")));
            }
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing content after matrix rows".into()));
        }
        Matrix::from_rows(field, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.field.p());
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Lift an F_p matrix into F_q = F_p[x]/(phi) and subtract the generator
/// (the class of x) from the diagonal: M - alpha * I over F_q.
pub fn lift_minus_generator(m: &MatrixFp, k: &ExtensionField) -> Result<Matrix<ExtensionField>> {
    if k.base().p() != m.field().p() {
        return Err(Error::ModulusMismatch(k.base().p(), m.field().p()));
    }
    if !m.is_square() {
        return Err(Error::Dimension("need a square matrix".into()));
    }
    let n = m.rows();
    let alpha = k.generator();
    let mut out = Matrix::zero(k.clone(), n, n);
    for r in 0..n {
        for c in 0..n {
            let mut e = k.embed(*m.get(r, c));
            if r == c {
                e = k.sub(&e, &alpha);
            }
            out.set(r, c, e);
        }
    }
    Ok(out)
}

/// Bit-packed GF(2) rows, 64 columns per word.
pub struct Gf2Rows {
    pub cols: usize,
    pub rows: Vec<Vec<u64>>,
}

impl Gf2Rows {
    pub fn new(cols: usize) -> Gf2Rows {
        Gf2Rows { cols, rows: Vec::new() }
    }

    pub fn words(cols: usize) -> usize {
        cols.div_ceil(64)
    }

    pub fn push_row_bits<I: IntoIterator<Item = u64>>(&mut self, bits: I) {
        let mut row = vec![0u64; Self::words(self.cols)];
        for (c, b) in bits.into_iter().enumerate() {
            if b & 1 == 1 {
                row[c / 64] |= 1u64 << (c % 64);
            }
        }
        self.rows.push(row);
    }

    pub fn from_matrix(m: &MatrixFp) -> Gf2Rows {
        debug_assert_eq!(m.field().p(), 2);
        let mut g = Gf2Rows::new(m.cols());
        for r in 0..m.rows() {
            g.push_row_bits((0..m.cols()).map(|c| *m.get(r, c)));
        }
        g
    }

    /// Rank by word-parallel forward elimination.
    pub fn rank(mut self) -> usize {
        let n = self.rows.len();
        let mut rank = 0usize;
        for col in 0..self.cols {
            if rank == n {
                break;
            }
            let w = col / 64;
            let bit = 1u64 << (col % 64);
            let Some(pr) = (rank..n).find(|&r| self.rows[r][w] & bit != 0) else {
                continue;
            };
            self.rows.swap(rank, pr);
            let (before, rest) = self.rows.split_at_mut(rank + 1);
            let pivot_row = &before[rank];
            for row in rest.iter_mut() {
                if row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
