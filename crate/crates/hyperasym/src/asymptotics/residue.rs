//! Exact residues at zero-dimensional strata.

use super::{AsymptoticsError, Contribution, Exactness, LeadingConstant, SymbolicConstant, Vanishing};
use crate::arrangement::RationalFunction;
use crate::critical::{CriticalPoint, Direction, Value};
use crate::exact::{binomial, dot, factorial, MultiPoly, RatMatrix, RatVector, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Truncated power series in `w` whose coefficients are polynomials in `n`
/// (ascending coefficient vectors).
#[derive(Debug, Clone, Default)]
struct NSeries {
    terms: BTreeMap<Vec<u32>, Vec<Rational>>,
}

fn npoly_add(a: &mut Vec<Rational>, b: &[Rational]) {
    if a.len() < b.len() {
        a.resize(b.len(), Rational::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn npoly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl NSeries {
    fn one(d: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; d], vec![Rational::one()]);
        NSeries { terms }
    }

    fn from_poly(p: &MultiPoly, cap: &[u32]) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in p.terms() {
            if e.iter().zip(cap).all(|(a, b)| a <= b) {
                terms.insert(e.clone(), vec![c.clone()]);
            }
        }
        NSeries { terms }
    }

    fn mul(&self, o: &NSeries, cap: &[u32]) -> NSeries {
        let mut terms: BTreeMap<Vec<u32>, Vec<Rational>> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                if e.iter().zip(cap).any(|(a, b)| a > b) {
                    continue;
                }
                npoly_add(terms.entry(e).or_default(), &npoly_mul(c1, c2));
            }
        }
        NSeries { terms }
    }

    fn scale_npoly(&self, s: &[Rational]) -> NSeries {
        NSeries {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), npoly_mul(c, s))).collect(),
        }
    }

    fn add(&mut self, o: &NSeries) {
        for (e, c) in &o.terms {
            npoly_add(self.terms.entry(e.clone()).or_default(), c);
        }
    }

    /// `Σ_k coeff(k) · L^k` for a linear form `L` in `w`.
    fn power_sum(lin: &[Rational], cap: &[u32], coeff: impl Fn(u32) -> Vec<Rational>) -> NSeries {
        let d = lin.len();
        let max_deg: u32 = cap.iter().sum();
        let mut lterm = NSeries::default();
        for (i, c) in lin.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; d];
                e[i] = 1;
                lterm.terms.insert(e, vec![c.clone()]);
            }
        }
        let mut out = NSeries::one(d).scale_npoly(&coeff(0));
        let mut power = NSeries::one(d);
        for k in 1..=max_deg {
            power = power.mul(&lterm, cap);
            if power.terms.is_empty() {
                break;
            }
            out.add(&power.scale_npoly(&coeff(k)));
        }
        out
    }
}

/// `binom(r n + k, k)` as a polynomial in `n`.
fn binom_in_n(r: u64, k: u32) -> Vec<Rational> {
    let mut p = vec![Rational::one()];
    let rr = Rational::from_integer(BigInt::from(r));
    for t in 1..=k {
        let tt = Rational::from_integer(BigInt::from(t));
        p = npoly_mul(&p, &[Rational::one(), &rr / &tt]);
    }
    p
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// The exact contribution `σ^{-nr} P(n)` at a zero-dimensional stratum.
pub fn full_codim_contribution(
    point: &CriticalPoint,
    f: &RationalFunction,
    dir: &Direction,
    bits: u32,
) -> Result<Contribution, AsymptoticsError> {
    let d = f.nvars;
    let sigma = point
        .exact_coords()
        .ok_or_else(|| AsymptoticsError::WrongPoint("zero-dimensional point must be rational".into()))?;
    let stratum = &point.stratum;
    if stratum.len() != d {
        return Err(AsymptoticsError::WrongPoint(format!("stratum {stratum:?} is not zero-dimensional")));
    }
    let b = RatMatrix::from_rows(stratum.iter().map(|&k| f.factors[k].b.clone()).collect());
    let binv = b
        .inverse()
        .map_err(|_| AsymptoticsError::WrongPoint("dependent normals".into()))?;
    let cap: Vec<u32> = stratum.iter().map(|&k| f.factors[k].power - 1).collect();
    // z = σ − B⁻¹ w, so ℓ_{k_i}(z) = w_i
    let neg_binv = RatMatrix::from_rows(
        binv.rows_vec()
            .into_iter()
            .map(|row| row.into_iter().map(|x| -x).collect())
            .collect(),
    );
    let g_local = f.numerator.poly.substitute_affine(&sigma, &neg_binv);
    let mut series = NSeries::from_poly(&g_local, &cap);
    let mut exp_shift = Rational::zero();
    if let Some(ex) = &f.numerator.exp {
        exp_shift = &ex.constant + dot(&ex.linear, &sigma);
        // e^{c·z} = e^{c·σ} e^{−(c B⁻¹)·w}
        let lin: RatVector = (0..d)
            .map(|i| -(0..d).map(|j| &ex.linear[j] * &binv[(j, i)]).fold(Rational::zero(), |a, x| a + x))
            .collect();
        let e = NSeries::power_sum(&lin, &cap, |k| vec![Rational::one() / Rational::from_integer(factorial(k as u64))]);
        series = series.mul(&e, &cap);
    }
    let mut unit_scale = Rational::one();
    for (j, fac) in f.factors.iter().enumerate() {
        if stratum.contains(&j) {
            continue;
        }
        // ℓ_j(σ − B⁻¹w) = a + m·w with a = ℓ_j(σ), m = b_j B⁻¹
        let a = fac.eval(&sigma);
        let m = binv.vec_mul(&fac.b);
        let p = fac.power;
        let lin: RatVector = m.iter().map(|x| -(x / &a)).collect();
        let e = NSeries::power_sum(&lin, &cap, |k| {
            vec![Rational::from_integer(binomial((p + k - 1) as u64, k as u64))]
        });
        series = series.mul(&e, &cap);
        unit_scale /= crate::exact::rat_pow(&a, p as i64);
    }
    // (σ_i − u_i)^{-n r_i − 1} / σ_i^{-n r_i − 1} with u = B⁻¹ w
    for i in 0..d {
        let lin: RatVector = binv.row(i).iter().map(|x| x / &sigma[i]).collect();
        let ri = dir.r()[i];
        let e = NSeries::power_sum(&lin, &cap, |k| binom_in_n(ri, k));
        series = series.mul(&e, &cap);
    }
    let det = b.determinant().expect("square");
    let abs_prod: Rational = sigma.iter().fold(Rational::one(), |acc, s| acc * s.abs());
    let scale = unit_scale / (det.abs() * abs_prod);
    let coeffs: Vec<Rational> = trim(
        series
            .terms
            .get(&cap)
            .cloned()
            .unwrap_or_default()
            .into_iter()
            .map(|c| c * &scale)
            .collect(),
    );
    let base = Value::Exact(crate::critical::exact_base(&sigma, dir));
    let (alpha, lead, vanishing) = match coeffs.last() {
        Some(c) => (
            Rational::from_integer(BigInt::from(coeffs.len() - 1)),
            c.clone(),
            Vanishing::NonZero,
        ),
        None => (Rational::zero(), Rational::zero(), Vanishing::ZeroByIdeal),
    };
    let sym = SymbolicConstant::new(lead, Rational::one(), 0, exp_shift.clone());
    Ok(Contribution {
        point: point.coords.clone(),
        stratum: stratum.clone(),
        orthant: point.orthant.clone(),
        height: point.height.clone(),
        base,
        alpha,
        constant: LeadingConstant::exact(sym, bits),
        exactness: Exactness::ExactPolynomial { coeffs, exp: exp_shift },
        vanishing,
        terms: vec![0],
    })
}

/// Leading term from the closed product formula, for cross-checking:
/// `σ^{-r} G(σ) ∏ λ_k^{p_k−1}/(p_k−1)! / (|det B| ∏|σ_i| ∏_{j∉S} ℓ_j(σ)^{p_j})`.
pub fn product_formula_leading(point: &CriticalPoint, f: &RationalFunction) -> Option<Rational> {
    let sigma = point.exact_coords()?;
    let b = RatMatrix::from_rows(point.stratum.iter().map(|&k| f.factors[k].b.clone()).collect());
    let det = b.determinant().ok()?;
    let mut v = f.numerator.poly.evaluate(&sigma);
    for (lam, &k) in point.lambda.iter().zip(&point.stratum) {
        let p = f.factors[k].power;
        let l = lam.as_exact()?;
        v *= crate::exact::rat_pow(l, (p - 1) as i64) / Rational::from_integer(factorial((p - 1) as u64));
    }
    for (j, fac) in f.factors.iter().enumerate() {
        if !point.stratum.contains(&j) {
            v /= crate::exact::rat_pow(&fac.eval(&sigma), fac.power as i64);
        }
    }
    let abs_prod: Rational = sigma.iter().fold(Rational::one(), |acc, s| acc * s.abs());
    Some(v / (det.abs() * abs_prod))
}
