use super::{RatVector, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Unique(RatVector),
    /// Consistent but underdetermined: one solution plus a kernel basis.
    Family {
        particular: RatVector,
        kernel: Vec<RatVector>,
        rank: usize,
    },
    Inconsistent {
        rank: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|q| q.to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// Fraction-free echelon form of an integer matrix.
struct Echelon {
    m: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn bareiss_echelon(mut m: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..nrows {
            for j in (c + 1)..m[i].len() {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon { m, pivots }
}

/// Scales each row to integers (row scaling keeps row space and solutions).
fn integer_rows(rows: &[Vec<Rational>]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut out = Vec::with_capacity(rows.len());
    let mut scales = Vec::with_capacity(rows.len());
    for row in rows {
        let l = row
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        out.push(row.iter().map(|q| q.numer() * (&l / q.denom())).collect());
        scales.push(l);
    }
    (out, scales)
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_columns(cols: &[RatVector]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> RatVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn rows_vec(&self) -> Vec<RatVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> RatVector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| super::dot(self.row(i), v)).collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rational]) -> RatVector {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| &v[i] * &self[(i, j)])
                    .fold(Rational::zero(), |s, t| s + t)
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        let (m, _) = integer_rows(&self.rows_vec());
        bareiss_echelon(m, self.cols).pivots.len()
    }

    /// Determinant by Bareiss elimination on the integer-scaled matrix.
    pub fn determinant(&self) -> Result<Rational, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::Dimension(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Rational::one());
        }
        let (mut m, scales) = integer_rows(&self.rows_vec());
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                match ((k + 1)..n).find(|&i| !m[i][k].is_zero()) {
                    Some(p) => {
                        m.swap(k, p);
                        sign = -sign;
                    }
                    None => return Ok(Rational::zero()),
                }
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let v = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        let denom = scales.iter().fold(BigInt::one(), |a, s| a * s);
        Ok(Rational::new(sign * &m[n - 1][n - 1], denom))
    }

    /// Solves `A x = b`, reporting rank and consistency.
    pub fn solve(&self, b: &[Rational]) -> Result<SolveResult, MatrixError> {
        if b.len() != self.rows {
            return Err(MatrixError::Dimension(format!(
                "{} rows but rhs of length {}",
                self.rows,
                b.len()
            )));
        }
        let aug: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        let (m, _) = integer_rows(&aug);
        let ech = bareiss_echelon(m, self.cols + 1);
        if ech.pivots.last() == Some(&self.cols) {
            return Ok(SolveResult::Inconsistent {
                rank: ech.pivots.len() - 1,
            });
        }
        let rank = ech.pivots.len();
        let particular = back_substitute(&ech, self.cols, true);
        if rank == self.cols {
            return Ok(SolveResult::Unique(particular));
        }
        Ok(SolveResult::Family {
            particular,
            kernel: kernel_from_echelon(&ech, self.cols),
            rank,
        })
    }

    pub fn solve_unique(&self, b: &[Rational]) -> Option<RatVector> {
        match self.solve(b) {
            Ok(SolveResult::Unique(x)) => Some(x),
            _ => None,
        }
    }

    pub fn null_space(&self) -> Vec<RatVector> {
        let (m, _) = integer_rows(&self.rows_vec());
        let ech = bareiss_echelon(m, self.cols);
        kernel_from_echelon(&ech, self.cols)
    }

    pub fn inverse(&self) -> Result<RatMatrix, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::Dimension("inverse of non-square".into()));
        }
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = Rational::one();
            match self.solve(&e)? {
                SolveResult::Unique(x) => cols.push(x),
                _ => return Err(MatrixError::Singular),
            }
        }
        Ok(Self::from_columns(&cols))
    }

    /// Stacks rows of `self` above rows of `other`.
    pub fn vstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows_vec();
        rows.extend(other.rows_vec());
        RatMatrix::from_rows(rows)
    }

    pub fn select_rows(&self, idx: &[usize]) -> RatMatrix {
        RatMatrix {
            rows: idx.len(),
            cols: self.cols,
            data: idx.iter().flat_map(|&i| self.row(i).to_vec()).collect(),
        }
    }
}

/// Back substitution on an echelon form whose last column may be a rhs.
fn back_substitute(ech: &Echelon, nvars: usize, has_rhs: bool) -> RatVector {
    let mut x = vec![Rational::zero(); nvars];
    for (r, &c) in ech.pivots.iter().enumerate().rev() {
        let row = &ech.m[r];
        let mut acc = if has_rhs {
            Rational::from_integer(row[nvars].clone())
        } else {
            Rational::zero()
        };
        for j in (c + 1)..nvars {
            if !row[j].is_zero() {
                acc -= Rational::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[c] = acc / Rational::from_integer(row[c].clone());
    }
    x
}

fn kernel_from_echelon(ech: &Echelon, nvars: usize) -> Vec<RatVector> {
    let free: Vec<usize> = (0..nvars).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); nvars];
            x[f] = Rational::one();
            for (r, &c) in ech.pivots.iter().enumerate().rev() {
                let row = &ech.m[r];
                let mut acc = Rational::zero();
                for j in (c + 1)..nvars {
                    if !row[j].is_zero() {
                        acc -= Rational::from_integer(row[j].clone()) * &x[j];
                    }
                }
                x[c] = acc / Rational::from_integer(row[c].clone());
            }
            x
        })
        .collect()
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[(i64, i64)]]) -> RatMatrix {
        RatMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                .collect(),
        )
    }

    #[test]
    fn solve_identity() {
        let a = RatMatrix::identity(2);
        assert_eq!(a.solve(&[int(1), int(1)]).unwrap(), SolveResult::Unique(vec![int(1), int(1)]));
    }

    #[test]
    fn solve_cone_system() {
        let a = m(&[&[(2, 3), (1, 3)], &[(1, 3), (2, 3)]]);
        assert_eq!(a.solve_unique(&[int(1), int(1)]).unwrap(), vec![int(1), int(1)]);
    }

    #[test]
    fn solve_inconsistent() {
        let a = m(&[&[(1, 1), (1, 1)], &[(2, 1), (2, 1)]]);
        assert_eq!(a.solve(&[int(1), int(3)]).unwrap(), SolveResult::Inconsistent { rank: 1 });
    }

    #[test]
    fn solve_dimension_error() {
        let a = RatMatrix::identity(2);
        assert!(a.solve(&[int(1)]).is_err());
    }

    #[test]
    fn kernels() {
        assert!(RatMatrix::identity(2).null_space().is_empty());
        let k = m(&[&[(2, 3), (1, 3)]]).null_space();
        assert_eq!(k.len(), 1);
        // proportional to (1, -2)
        assert_eq!(&k[0][1] / &k[0][0], int(-2));
        assert_eq!(RatMatrix::zeros(1, 2).null_space().len(), 2);
    }

    #[test]
    fn determinants() {
        assert_eq!(RatMatrix::identity(3).determinant().unwrap(), int(1));
        let a = m(&[&[(2, 3), (1, 3)], &[(1, 3), (2, 3)]]);
        assert_eq!(a.determinant().unwrap(), rat(1, 3));
        let b = m(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert_eq!(b.determinant().unwrap(), int(0));
        assert!(RatMatrix::zeros(2, 3).determinant().is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[(2, 3), (1, 3)], &[(1, 3), (2, 3)]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, m(&[&[(2, 1), (-1, 1)], &[(-1, 1), (2, 1)]]));
        assert_eq!(a.mul(&inv).unwrap(), RatMatrix::identity(2));
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-6i64..=6, 1i64..=5).prop_map(|(n, d)| rat(n, d))
    }

    fn square(n: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec(small_rat(), n * n).prop_map(move |v| {
            RatMatrix::from_rows(v.chunks(n).map(|c| c.to_vec()).collect())
        })
    }

    proptest! {
        #[test]
        fn solve_recovers_x(n in 1usize..=6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut gen = || rat(rng.random_range(-6..=6), rng.random_range(1..=5));
            let a = RatMatrix::from_rows((0..n).map(|_| (0..n).map(|_| gen()).collect()).collect());
            let x: Vec<Rational> = (0..n).map(|_| gen()).collect();
            let b = a.mul_vec(&x);
            if a.determinant().unwrap() != int(0) {
                prop_assert_eq!(a.solve_unique(&b).unwrap(), x);
            }
        }

        #[test]
        fn det_multiplicative(a in square(4), b in square(4)) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(ab.determinant().unwrap(), a.determinant().unwrap() * b.determinant().unwrap());
        }

        #[test]
        fn kernel_vectors_annihilate(a in proptest::collection::vec(small_rat(), 12)) {
            let a = RatMatrix::from_rows(a.chunks(4).map(|c| c.to_vec()).collect());
            let k = a.null_space();
            prop_assert_eq!(k.len(), 4 - a.rank());
            for v in k {
                prop_assert!(a.mul_vec(&v).iter().all(|x| x.is_zero()));
            }
        }
    }
}
