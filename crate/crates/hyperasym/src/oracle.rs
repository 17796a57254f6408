//! Exact Taylor coefficients by direct series expansion, plus growth fitting
//! for verification reports.

use crate::arrangement::RationalFunction;
use crate::exact::{binomial, factorial, rat_pow, rat_to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Refuse tables with more stored entries than this.
pub const DEFAULT_MAX_ENTRIES: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("index {index:?} lies outside the table")]
    OutOfRange { index: Vec<usize> },
    #[error("table would hold {entries} entries (limit {limit})")]
    TooLarge { entries: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("coefficients carry the transcendental factor exp({0})")]
    Transcendental(String),
    #[error("sequence has fewer than 8 non-zero terms")]
    TooShort,
}

/// Dense coefficient table over the box `∏[0, max_j]`, optionally cut to
/// total degree at most `total`. Entries beyond the cut are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesTable {
    maxes: Vec<usize>,
    total: Option<usize>,
    strides: Vec<usize>,
    data: Vec<Rational>,
    /// Every coefficient is to be multiplied by `exp(exp_constant)`.
    pub exp_constant: Rational,
}

impl SeriesTable {
    pub fn build(f: &RationalFunction, maxes: &[usize], total: Option<usize>) -> Result<Self, OracleError> {
        Self::build_with_limit(f, maxes, total, DEFAULT_MAX_ENTRIES)
    }

    pub fn build_with_limit(
        f: &RationalFunction,
        maxes: &[usize],
        total: Option<usize>,
        limit: usize,
    ) -> Result<Self, OracleError> {
        let d = f.nvars;
        if maxes.len() != d {
            return Err(OracleError::Dimension {
                expected: d,
                got: maxes.len(),
            });
        }
        let mut entries: usize = 1;
        for &m in maxes {
            entries = entries.saturating_mul(m + 1);
        }
        if entries > limit {
            return Err(OracleError::TooLarge { entries, limit });
        }
        let mut strides = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * (maxes[j + 1] + 1);
        }
        let mut table = SeriesTable {
            maxes: maxes.to_vec(),
            total,
            strides,
            data: vec![Rational::zero(); entries],
            exp_constant: Rational::zero(),
        };
        for (e, c) in f.numerator.poly.terms() {
            let idx: Vec<usize> = e.iter().map(|&x| x as usize).collect();
            if let Some(pos) = table.position(&idx) {
                table.data[pos] = c.clone();
            }
        }
        if let Some(ex) = &f.numerator.exp {
            table.exp_constant = ex.constant.clone();
            for (j, c) in ex.linear.iter().enumerate() {
                if !c.is_zero() {
                    table.multiply_exp_axis(j, c);
                }
            }
        }
        for fac in &f.factors {
            for _ in 0..fac.power {
                table.divide_by_form(&fac.b);
            }
        }
        Ok(table)
    }

    pub fn maxes(&self) -> &[usize] {
        &self.maxes
    }

    pub fn total(&self) -> Option<usize> {
        self.total
    }

    fn in_shape(&self, idx: &[usize]) -> bool {
        idx.len() == self.maxes.len()
            && idx.iter().zip(&self.maxes).all(|(a, m)| a <= m)
            && self.total.is_none_or(|t| idx.iter().sum::<usize>() <= t)
    }

    fn position(&self, idx: &[usize]) -> Option<usize> {
        self.in_shape(idx)
            .then(|| idx.iter().zip(&self.strides).map(|(a, s)| a * s).sum())
    }

    fn index_of(&self, mut pos: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let a = pos / s;
                pos %= s;
                a
            })
            .collect()
    }

    fn multiply_exp_axis(&mut self, j: usize, c: &Rational) {
        let m = self.maxes[j];
        let weights: Vec<Rational> = (0..=m)
            .map(|k| rat_pow(c, k as i64) / Rational::from_integer(factorial(k as u64)))
            .collect();
        let old = self.data.clone();
        for pos in 0..self.data.len() {
            let idx = self.index_of(pos);
            if !self.in_shape(&idx) {
                continue;
            }
            let a = idx[j];
            let mut acc = Rational::zero();
            for k in 0..=a {
                let src = pos - k * self.strides[j];
                if !old[src].is_zero() {
                    acc += &old[src] * &weights[k];
                }
            }
            self.data[pos] = acc;
        }
    }

    /// In place division by `1 − b·z`.
    fn divide_by_form(&mut self, b: &[Rational]) {
        let active: Vec<(usize, &Rational)> = b.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
        for pos in 0..self.data.len() {
            let idx = self.index_of(pos);
            if !self.in_shape(&idx) {
                continue;
            }
            let mut acc = self.data[pos].clone();
            for &(j, bj) in &active {
                if idx[j] > 0 {
                    let prev = &self.data[pos - self.strides[j]];
                    if !prev.is_zero() {
                        acc += bj * prev;
                    }
                }
            }
            self.data[pos] = acc;
        }
    }

    /// Coefficient of `z^idx`, without the `exp(exp_constant)` factor.
    pub fn get(&self, idx: &[usize]) -> Result<&Rational, OracleError> {
        self.position(idx)
            .map(|p| &self.data[p])
            .ok_or_else(|| OracleError::OutOfRange { index: idx.to_vec() })
    }

    /// Exact coefficient; fails when the numerator carries `exp(c0)` with `c0 ≠ 0`.
    pub fn coeff(&self, idx: &[usize]) -> Result<Rational, OracleError> {
        if !self.exp_constant.is_zero() {
            return Err(OracleError::Transcendental(self.exp_constant.to_string()));
        }
        self.get(idx).cloned()
    }

    /// Coefficient as f64, including any `exp(c0)` factor.
    pub fn coeff_f64(&self, idx: &[usize]) -> Result<f64, OracleError> {
        let v = rat_to_f64(self.get(idx)?);
        Ok(v * rat_to_f64(&self.exp_constant).exp())
    }

    /// All in-shape `(index, coefficient)` pairs in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &Rational)> {
        (0..self.data.len()).filter_map(move |p| {
            let idx = self.index_of(p);
            self.in_shape(&idx).then(|| (idx, &self.data[p]))
        })
    }
}

pub fn taylor_coeff(f: &RationalFunction, index: &[usize]) -> Result<Rational, OracleError> {
    SeriesTable::build(f, index, None)?.coeff(index)
}

/// `a_{n·dir}` for `n = 1..=n_max`.
pub fn ray_sequence(f: &RationalFunction, dir: &[u64], n_max: usize) -> Result<Vec<Rational>, OracleError> {
    let table = ray_table(f, dir, n_max)?;
    (1..=n_max)
        .map(|n| table.coeff(&dir.iter().map(|&r| n * r as usize).collect::<Vec<_>>()))
        .collect()
}

/// Rational parts of `a_{n·dir}` for `n = 1..=n_max`, with the common
/// `exp(c0)` exponent they all carry.
pub fn ray_parts(f: &RationalFunction, dir: &[u64], n_max: usize) -> Result<(Vec<Rational>, Rational), OracleError> {
    let table = ray_table(f, dir, n_max)?;
    let seq = (1..=n_max)
        .map(|n| table.get(&dir.iter().map(|&r| n * r as usize).collect::<Vec<_>>()).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    Ok((seq, table.exp_constant.clone()))
}

/// Ray values as f64, including any `exp(c0)` factor.
pub fn ray_sequence_f64(f: &RationalFunction, dir: &[u64], n_max: usize) -> Result<Vec<f64>, OracleError> {
    let table = ray_table(f, dir, n_max)?;
    (1..=n_max)
        .map(|n| table.coeff_f64(&dir.iter().map(|&r| n * r as usize).collect::<Vec<_>>()))
        .collect()
}

fn ray_table(f: &RationalFunction, dir: &[u64], n_max: usize) -> Result<SeriesTable, OracleError> {
    if dir.len() != f.nvars {
        return Err(OracleError::Dimension {
            expected: f.nvars,
            got: dir.len(),
        });
    }
    let maxes: Vec<usize> = dir.iter().map(|&r| n_max * r as usize).collect();
    SeriesTable::build(f, &maxes, None)
}

/// Closed double sum for the two-player winning-choice probabilities.
pub fn winning_choices_sequence(r: u64, s: u64) -> Rational {
    let third = Rational::new(BigInt::one(), BigInt::from(3));
    let two_thirds = Rational::new(BigInt::from(2), BigInt::from(3));
    let mut total = Rational::zero();
    for n in 0..=(r + s) {
        for a in 0..=n.min(r) {
            let rest = r + s - n;
            if r - a > rest {
                continue;
            }
            let e = (s + a) as i64 - n as i64;
            let w = Rational::from_integer(binomial(n, a) * binomial(rest, r - a))
                * rat_pow(&two_thirds, a as i64)
                * rat_pow(&third, (n - a) as i64)
                * rat_pow(&third, (r - a) as i64)
                * rat_pow(&two_thirds, e);
            total += w;
        }
    }
    total
}

/// Least-squares fit of `log|a_n| ≈ c + n log(base) + α log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub base: f64,
    pub alpha: f64,
    pub log_constant: f64,
    pub max_residual: f64,
}

/// Fits `seq[i] = a_{i+1}` over the trailing two thirds of its non-zero terms.
pub fn empirical_growth(seq: &[f64]) -> Result<GrowthFit, OracleError> {
    let pts: Vec<(f64, f64)> = seq
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0 && v.is_finite())
        .map(|(i, v)| ((i + 1) as f64, v.abs().ln()))
        .collect();
    if pts.len() < 8 {
        return Err(OracleError::TooShort);
    }
    let tail = &pts[pts.len() / 3..];
    let rows: Vec<[f64; 3]> = tail.iter().map(|(n, _)| [1.0, *n, n.ln()]).collect();
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (row, (_, y)) in rows.iter().zip(tail) {
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let x = solve3(ata, aty);
    let max_residual = rows
        .iter()
        .zip(tail)
        .map(|(row, (_, y))| (row[0] * x[0] + row[1] * x[1] + row[2] * x[2] - y).abs())
        .fold(0.0, f64::max);
    Ok(GrowthFit {
        base: x[1].exp(),
        alpha: x[2],
        log_constant: x[0],
        max_residual,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        a.swap(c, p);
        b.swap(c, p);
        for i in (c + 1)..3 {
            let f = a[i][c] / a[c][c];
            for j in c..3 {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = ((i + 1)..3).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::tests::{lf, main_factors, nonsimp_factors};
    use crate::exact::{int, rat, ExpAffine, MultiPoly, Numerator};
    use proptest::prelude::*;

    fn binom_fn() -> RationalFunction {
        RationalFunction::from_parts(Numerator::one(2), vec![lf(&[(1, 1), (1, 1)], 1)])
    }

    pub(crate) fn probs_fn() -> RationalFunction {
        RationalFunction::from_parts(Numerator::one(2), main_factors())
    }

    #[test]
    fn binomial_diagonal() {
        let f = binom_fn();
        assert_eq!(taylor_coeff(&f, &[0, 0]).unwrap(), int(1));
        assert_eq!(taylor_coeff(&f, &[5, 5]).unwrap(), int(252));
    }

    #[test]
    fn parity_sequence() {
        let f = RationalFunction::from_parts(Numerator::one(1), vec![lf(&[(1, 1)], 1), lf(&[(-1, 1)], 1)]);
        let s = ray_sequence(&f, &[1], 6).unwrap();
        let want: Vec<Rational> = (1..=6).map(|n| if n % 2 == 0 { int(1) } else { int(0) }).collect();
        assert_eq!(s, want);
    }

    #[test]
    fn exponential_numerator() {
        // e^{x} / (1 − y): coefficient of x^3 y^2 is 1/6
        let num = Numerator {
            poly: MultiPoly::one(2),
            exp: Some(ExpAffine {
                constant: int(0),
                linear: vec![int(1), int(0)],
            }),
        };
        let f = RationalFunction::from_parts(num, vec![lf(&[(0, 1), (1, 1)], 1)]);
        assert_eq!(taylor_coeff(&f, &[3, 2]).unwrap(), rat(1, 6));
        let num = Numerator {
            poly: MultiPoly::one(1),
            exp: Some(ExpAffine {
                constant: int(1),
                linear: vec![int(0)],
            }),
        };
        let g = RationalFunction::from_parts(num, vec![lf(&[(1, 1)], 1)]);
        let t = SeriesTable::build(&g, &[3], None).unwrap();
        assert!(t.coeff(&[3]).is_err());
        assert!((t.coeff_f64(&[3]).unwrap() - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn winning_choices_matches_series() {
        assert_eq!(winning_choices_sequence(0, 0), int(1));
        let f = probs_fn();
        let table = SeriesTable::build(&f, &[20, 20], Some(20)).unwrap();
        for (idx, v) in table.entries() {
            assert_eq!(winning_choices_sequence(idx[0] as u64, idx[1] as u64), *v, "at {idx:?}");
        }
    }

    #[test]
    fn winning_choices_limit() {
        let v = rat_to_f64(&winning_choices_sequence(200, 100));
        assert!((v - 1.5).abs() < 0.15, "{v}");
    }

    #[test]
    fn probs_diagonal_near_three() {
        let v = rat_to_f64(&taylor_coeff(&probs_fn(), &[60, 60]).unwrap());
        assert!((v - 3.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn nonsimp_linear_growth() {
        let f = RationalFunction::from_parts(Numerator::one(2), nonsimp_factors());
        let s = ray_sequence(&f, &[1, 1], 30).unwrap();
        let ratio = rat_to_f64(&s[29]) / (15.0 * 30.0 / 4.0);
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn growth_fit() {
        let seq: Vec<f64> = (1..=30).map(|n| rat_to_f64(&Rational::from_integer(binomial(2 * n, n)))).collect();
        let fit = empirical_growth(&seq).unwrap();
        assert!((fit.base - 4.0).abs() < 0.04, "{fit:?}");
        assert!((fit.alpha + 0.5).abs() < 0.1, "{fit:?}");
        let fit = empirical_growth(&[3.0; 12]).unwrap();
        assert!((fit.base - 1.0).abs() < 1e-9 && fit.alpha.abs() < 1e-9);
        assert_eq!(empirical_growth(&[0.0; 12]), Err(OracleError::TooShort));
    }

    #[test]
    fn total_degree_cut() {
        let t = SeriesTable::build(&binom_fn(), &[4, 4], Some(4)).unwrap();
        assert_eq!(t.get(&[2, 2]).unwrap(), &int(6));
        assert!(t.get(&[3, 2]).is_err());
    }

    proptest! {
        #[test]
        fn linearity(a in -4i64..5, b in 1i64..5, c in -4i64..5) {
            let f1 = RationalFunction::from_parts(Numerator::one(2), vec![lf(&[(a, b), (1, 2)], 1)]);
            let f2 = RationalFunction::from_parts(Numerator::one(2), vec![lf(&[(1, 3), (c, b)], 1)]);
            let t1 = SeriesTable::build(&f1, &[5, 5], None).unwrap();
            let t2 = SeriesTable::build(&f2, &[5, 5], None).unwrap();
            // f1 + f2 = (ℓ1 + ℓ2) / (ℓ1 ℓ2)
            let l1 = &f1.factors[0];
            let l2 = &f2.factors[0];
            let num = l1.form().add(&l2.form());
            let sum = RationalFunction::from_parts(Numerator::polynomial(num), vec![l1.clone(), l2.clone()]);
            let ts = SeriesTable::build(&sum, &[5, 5], None).unwrap();
            for (idx, v) in ts.entries() {
                prop_assert_eq!(v.clone(), t1.get(&idx).unwrap() + t2.get(&idx).unwrap());
            }
        }

        #[test]
        fn denominator_identity(a in -4i64..5, b in 1i64..4, p in 1u32..3) {
            let facs = vec![lf(&[(a, b), (1, 2)], p), lf(&[(1, 1), (-1, b)], 1)];
            let g = MultiPoly::affine(int(2), &[int(1), int(-3)]);
            let f = RationalFunction::from_parts(Numerator::polynomial(g.clone()), facs.clone());
            let t = SeriesTable::build(&f, &[6, 6], Some(6)).unwrap();
            let mut den = MultiPoly::one(2);
            for fac in &facs {
                den = den.mul(&fac.form().pow(fac.power));
            }
            for (idx, _) in t.entries() {
                let mut acc = Rational::zero();
                for (e, c) in den.terms() {
                    if e.iter().zip(&idx).all(|(x, y)| (*x as usize) <= *y) {
                        let src: Vec<usize> = idx.iter().zip(e).map(|(y, x)| y - *x as usize).collect();
                        acc += c * t.get(&src).unwrap();
                    }
                }
                let want = g.coeff(&idx.iter().map(|&x| x as u32).collect::<Vec<_>>());
                prop_assert_eq!(acc, want);
            }
        }
    }
}
