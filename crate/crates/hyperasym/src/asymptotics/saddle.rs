//! Saddle-point contributions at positive-dimensional strata.

use super::{
    base_value, AsymptoticsError, Contribution, Exactness, LeadingConstant, SymbolicConstant, Vanishing,
};
use crate::arrangement::RationalFunction;
use crate::critical::{CriticalPoint, Direction, Value};
use crate::exact::{factorial, rat_pow, CertifiedReal, RatMatrix, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Rows `−b_k ⊙ σ` for the stratum, then `e_c` for the completion, the last
/// completion row negated when needed for a positive determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogGradientMatrix {
    pub rows: Vec<Vec<Value>>,
    pub completion: Vec<usize>,
    /// `|det| = |det M| ∏_{j∉C}|σ_j|`.
    pub abs_det: Value,
}

/// Stratum normals stacked over completion rows.
fn completed_matrix(f: &RationalFunction, stratum: &[usize], completion: &[usize]) -> RatMatrix {
    let d = f.nvars;
    let mut rows: Vec<Vec<Rational>> = stratum.iter().map(|&k| f.factors[k].b.clone()).collect();
    for &c in completion {
        let mut e = vec![Rational::zero(); d];
        e[c] = Rational::one();
        rows.push(e);
    }
    RatMatrix::from_rows(rows)
}

/// Coordinate sets `C` (lexicographic) for which `[B_S; E_C]` is invertible.
pub fn valid_completions(f: &RationalFunction, stratum: &[usize]) -> Vec<Vec<usize>> {
    let d = f.nvars;
    let m = d.saturating_sub(stratum.len());
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, d: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, m, cur, out);
            cur.pop();
        }
    }
    rec(0, d, m, &mut cur, &mut out);
    out.retain(|c| {
        let mat = completed_matrix(f, stratum, c);
        mat.determinant().map(|x| !x.is_zero()).unwrap_or(false)
    });
    out
}

fn abs_prod(coords: &[Value], bits: u32) -> Value {
    if let Some(z) = coords.iter().map(|v| v.as_exact().cloned()).collect::<Option<Vec<_>>>() {
        return Value::Exact(z.iter().fold(Rational::one(), |a, x| a * x.abs()));
    }
    let mut acc = CertifiedReal::one(bits);
    for v in coords {
        acc = acc.mul(&v.to_certified(bits).abs());
    }
    Value::Approx(acc)
}

fn value_mul_rational(v: &Value, q: &Rational) -> Value {
    match v {
        Value::Exact(x) => Value::Exact(x * q),
        Value::Approx(c) => Value::Approx(c.mul_rational(q)),
    }
}

pub fn log_gradient_matrix(
    point: &CriticalPoint,
    f: &RationalFunction,
    completion: &[usize],
    bits: u32,
) -> Result<LogGradientMatrix, AsymptoticsError> {
    let mat = completed_matrix(f, &point.stratum, completion);
    let det = mat
        .determinant()
        .ok()
        .filter(|x| !x.is_zero())
        .ok_or_else(|| AsymptoticsError::WrongPoint(format!("completion {completion:?} is singular")))?;
    let s = point.stratum.len();
    let mut rows: Vec<Vec<Value>> = (0..s)
        .map(|i| {
            point
                .coords
                .iter()
                .enumerate()
                .map(|(j, z)| value_mul_rational(z, &-&mat[(i, j)]))
                .collect()
        })
        .collect();
    for i in s..mat.nrows() {
        rows.push((0..f.nvars).map(|j| Value::Exact(mat[(i, j)].clone())).collect());
    }
    let free: Vec<Value> = (0..f.nvars)
        .filter(|j| !completion.contains(j))
        .map(|j| point.coords[j].clone())
        .collect();
    let mut negative = det.is_negative() ^ (s % 2 == 1);
    for z in &free {
        negative ^= z.to_f64() < 0.0;
    }
    if negative {
        if let Some(last) = rows.get_mut(s..).and_then(|r| r.last_mut()) {
            for v in last.iter_mut() {
                *v = value_mul_rational(v, &-Rational::one());
            }
        }
    }
    Ok(LogGradientMatrix {
        rows,
        completion: completion.to_vec(),
        abs_det: value_mul_rational(&abs_prod(&free, bits), &det.abs()),
    })
}

/// Quadratic data of the phase on the transversal torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaddleData {
    pub completion: Vec<usize>,
    pub m_inverse: RatMatrix,
    pub abs_det_m: Rational,
    /// `ℋ[a][b] = Σ_j r_j M⁻¹[j][s+a] M⁻¹[j][s+b] / σ_j²`.
    pub hessian: Vec<Vec<CertifiedReal>>,
    pub exact_hessian: Option<Vec<Vec<Rational>>>,
    pub det_hessian: CertifiedReal,
    pub exact_det: Option<Rational>,
    /// `Some(true)` when every leading principal minor is certified positive.
    pub positive_definite: Option<bool>,
}

impl SaddleData {
    pub fn dim(&self) -> usize {
        self.hessian.len()
    }

    /// Hessian of `y ↦ Σ_j r_j log|σ_j + i u_j(y)|` at `y = 0` by central
    /// differences, `u = M⁻¹ (0; y)`.
    pub fn finite_difference_hessian(&self, sigma: &[f64], r: &[u64], h: f64) -> Vec<Vec<f64>> {
        let m = self.dim();
        let d = sigma.len();
        let s = d - m;
        let minv: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| crate::exact::rat_to_f64(&self.m_inverse[(i, j)])).collect())
            .collect();
        let phase = |y: &[f64]| -> f64 {
            (0..d)
                .map(|j| {
                    let u: f64 = (0..m).map(|a| minv[j][s + a] * y[a]).sum();
                    // constant part ln σ_j² dropped to keep the differences well conditioned
                    r[j] as f64 * 0.5 * (u * u / (sigma[j] * sigma[j])).ln_1p()
                })
                .sum()
        };
        // step relative to the fastest-moving u_j / σ_j
        let speed = (0..d)
            .flat_map(|j| (0..m).map(move |a| (j, a)))
            .fold(0.0f64, |acc, (j, a)| acc.max(minv[j][s + a].abs() / sigma[j].abs()));
        let scale = 1.0 / speed.max(f64::MIN_POSITIVE);
        let second = |a: usize, b: usize, h: f64| -> f64 {
            let mut v = 0.0;
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut y = vec![0.0; m];
                y[a] += sa * h;
                y[b] += sb * h;
                v += w * phase(&y);
            }
            v / (4.0 * h * h)
        };
        let h = h * scale;
        let mut out = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in 0..m {
                // Richardson on the h² error term
                let (d1, d2) = (second(a, b, h), second(a, b, h / 2.0));
                out[a][b] = (4.0 * d2 - d1) / 3.0;
            }
        }
        out
    }
}

fn det_certified(m: &[Vec<CertifiedReal>], bits: u32) -> CertifiedReal {
    let n = m.len();
    match n {
        0 => CertifiedReal::one(bits),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = CertifiedReal::zero(bits);
            for j in 0..n {
                let minor: Vec<Vec<CertifiedReal>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect()).collect();
                let t = m[0][j].mul(&det_certified(&minor, bits));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
    }
}

fn leading_minors_positive(h: &[Vec<CertifiedReal>], bits: u32) -> Option<bool> {
    for k in 1..=h.len() {
        let sub: Vec<Vec<CertifiedReal>> = h[..k].iter().map(|row| row[..k].to_vec()).collect();
        match det_certified(&sub, bits).sign() {
            Some(1) => {}
            Some(_) => return Some(false),
            None => return None,
        }
    }
    Some(true)
}

pub fn saddle_data(
    point: &CriticalPoint,
    f: &RationalFunction,
    dir: &Direction,
    completion: &[usize],
    bits: u32,
) -> Result<SaddleData, AsymptoticsError> {
    let d = f.nvars;
    let s = point.stratum.len();
    if completion.len() + s != d {
        return Err(AsymptoticsError::WrongPoint(format!("completion {completion:?} has the wrong size")));
    }
    let mat = completed_matrix(f, &point.stratum, completion);
    let minv = mat
        .inverse()
        .map_err(|_| AsymptoticsError::WrongPoint(format!("completion {completion:?} is singular")))?;
    let abs_det_m = mat.determinant().expect("square").abs();
    let m = d - s;
    let r = dir.r();
    let w = bits + 32;
    let exact = point.exact_coords();
    let exact_hessian = exact.as_ref().map(|z| {
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        (0..d).fold(Rational::zero(), |acc, j| {
                            acc + Rational::from_integer(BigInt::from(r[j])) * &minv[(j, s + a)] * &minv[(j, s + b)]
                                / (&z[j] * &z[j])
                        })
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    });
    let hessian: Vec<Vec<CertifiedReal>> = match &exact_hessian {
        Some(h) => h.iter().map(|row| row.iter().map(|x| CertifiedReal::exact(x.clone(), w)).collect()).collect(),
        None => {
            let inv_sq: Vec<CertifiedReal> = point
                .certified_coords(w)
                .iter()
                .map(|z| z.square().recip().expect("non-zero coordinate"))
                .collect();
            (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| {
                            (0..d).fold(CertifiedReal::zero(w), |acc, j| {
                                let q = Rational::from_integer(BigInt::from(r[j])) * &minv[(j, s + a)] * &minv[(j, s + b)];
                                acc.add(&inv_sq[j].mul_rational(&q))
                            })
                        })
                        .collect()
                })
                .collect()
        }
    };
    let exact_det = exact_hessian
        .as_ref()
        .map(|h| RatMatrix::from_rows(h.clone()).determinant().unwrap_or_else(|_| Rational::one()));
    let det_hessian = match &exact_det {
        Some(q) => CertifiedReal::exact(q.clone(), w),
        None => det_certified(&hessian, w),
    };
    let positive_definite = match &exact_hessian {
        Some(h) => Some((1..=m).all(|k| {
            let sub: Vec<Vec<Rational>> = h[..k].iter().map(|row| row[..k].to_vec()).collect();
            RatMatrix::from_rows(sub).determinant().map(|x| x.is_positive()).unwrap_or(false)
        })),
        None => leading_minors_positive(&hessian, w),
    };
    Ok(SaddleData {
        completion: completion.to_vec(),
        m_inverse: minv,
        abs_det_m,
        hessian,
        exact_hessian,
        det_hessian,
        exact_det,
        positive_definite,
    })
}

/// Leading term at a point with `0 < |S| < d`, using the first valid completion.
pub fn partial_codim_contribution(
    point: &CriticalPoint,
    f: &RationalFunction,
    dir: &Direction,
    bits: u32,
) -> Result<Contribution, AsymptoticsError> {
    let completion = valid_completions(f, &point.stratum)
        .into_iter()
        .next()
        .ok_or_else(|| AsymptoticsError::WrongPoint("stratum normals are dependent".into()))?;
    partial_codim_contribution_with(point, f, dir, &completion, bits)
}

/// Leading term `C σ^{-nr} n^α` with
/// `C = G(σ) ∏ λ_k^{p_k−1}/(p_k−1)! / (∏_{j∉S} ℓ_j(σ)^{p_j} |det M| ∏|σ_j| √det ℋ (2π)^{m/2})`
/// and `α = Σ p_k − (|S| + d)/2`.
pub fn partial_codim_contribution_with(
    point: &CriticalPoint,
    f: &RationalFunction,
    dir: &Direction,
    completion: &[usize],
    bits: u32,
) -> Result<Contribution, AsymptoticsError> {
    let d = f.nvars;
    let stratum = &point.stratum;
    let s = stratum.len();
    if s == 0 || s >= d {
        return Err(AsymptoticsError::WrongPoint(format!("stratum {stratum:?} is not of partial codimension")));
    }
    let data = saddle_data(point, f, dir, completion, bits)?;
    match data.positive_definite {
        Some(true) => {}
        _ => {
            return Err(AsymptoticsError::NotPositiveDefinite(format!(
                "{:?}",
                point.coords_f64()
            )))
        }
    }
    let m = d - s;
    let psum: u32 = stratum.iter().map(|&k| f.factors[k].power).sum();
    let alpha = Rational::from_integer(BigInt::from(psum)) - Rational::new(BigInt::from(s + d), BigInt::from(2));
    let base = match &point.base {
        Some(b) => Value::Exact(b.clone()),
        None => base_value(&point.coords, dir.r(), bits),
    };
    let w = bits + 32;
    let constant = match point.exact_coords() {
        Some(z) => {
            let (g, e) = f.numerator.evaluate_parts(&z);
            let mut q = g;
            for (lam, &k) in point.lambda.iter().zip(stratum) {
                let p = f.factors[k].power;
                let l = lam
                    .as_exact()
                    .ok_or_else(|| AsymptoticsError::Internal("irrational multiplier at a rational point".into()))?;
                q *= rat_pow(l, (p - 1) as i64) / Rational::from_integer(factorial((p - 1) as u64));
            }
            for (j, fac) in f.factors.iter().enumerate() {
                if !stratum.contains(&j) {
                    q /= rat_pow(&fac.eval(&z), fac.power as i64);
                }
            }
            q /= &data.abs_det_m * z.iter().fold(Rational::one(), |a, x| a * x.abs());
            let det = data.exact_det.clone().expect("rational point has a rational Hessian");
            let radicand = Rational::one() / (rat_pow(&Rational::from_integer(BigInt::from(2)), m as i64) * det);
            let sym = SymbolicConstant::new(q, radicand, -(m as i32), e.unwrap_or_else(Rational::zero));
            LeadingConstant::exact(sym, bits)
        }
        None => {
            let zc = point.certified_coords(w);
            let mut v = f.numerator.evaluate_certified(&zc);
            for (lam, &k) in point.lambda.iter().zip(stratum) {
                let p = f.factors[k].power;
                if p > 1 {
                    let l = lam.to_certified(w).powi(p - 1);
                    v = v.mul(&l).mul_rational(&(Rational::one() / Rational::from_integer(factorial((p - 1) as u64))));
                }
            }
            let mut den = CertifiedReal::exact(data.abs_det_m.clone(), w);
            for (j, fac) in f.factors.iter().enumerate() {
                if !stratum.contains(&j) {
                    let mut l = CertifiedReal::one(w);
                    for (bj, zj) in fac.b.iter().zip(&zc) {
                        l = l.sub(&zj.mul_rational(bj));
                    }
                    den = den.mul(&l.powi(fac.power));
                }
            }
            for z in &zc {
                den = den.mul(&z.abs());
            }
            let two_pi_m = CertifiedReal::pi(w).mul_rational(&Rational::from_integer(BigInt::from(2))).powi(m as u32);
            let root = data
                .det_hessian
                .mul(&two_pi_m)
                .sqrt()
                .ok_or_else(|| AsymptoticsError::NotPositiveDefinite(format!("{:?}", point.coords_f64())))?;
            den = den.mul(&root);
            let value = v
                .div(&den)
                .ok_or_else(|| AsymptoticsError::Internal("vanishing denominator".into()))?;
            LeadingConstant::certified(value.with_bits(bits))
        }
    };
    let vanishing = match constant.is_zero() {
        Some(false) => Vanishing::NonZero,
        _ => Vanishing::ZeroLeadingUnknownOrder,
    };
    Ok(Contribution {
        point: point.coords.clone(),
        stratum: stratum.clone(),
        orthant: point.orthant.clone(),
        height: point.height.clone(),
        base,
        alpha,
        constant,
        exactness: Exactness::LeadingTermOnly,
        vanishing,
        terms: vec![0],
    })
}
