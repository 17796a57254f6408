//! Directions on a codimension-one face of the normal cone: negative Gaussian
//! moments, the exact-direction constant and the √n transition window.

use crate::arrangement::RationalFunction;
use crate::asymptotics::{AsymptoticsError, Contribution, Exactness, LeadingConstant, SymbolicConstant, Vanishing};
use crate::critical::{CriticalPoint, Direction, Value};
use crate::exact::{factorial, rat_pow, rat_to_f64, CertifiedReal, RatMatrix, RatVector, Rational};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use statrs::function::erf::erf;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MomentError {
    #[error("integral diverges for k = 0 and a = 0")]
    Divergent,
    #[error("a must be non-negative")]
    NegativeScale,
}

/// `i^quarter_turns · magnitude`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMoment {
    pub quarter_turns: u8,
    pub magnitude: SymbolicConstant,
}

impl ExactMoment {
    /// Certified real and imaginary parts.
    pub fn certified(&self, bits: u32) -> (CertifiedReal, CertifiedReal) {
        let m = self.magnitude.to_certified(bits);
        let z = CertifiedReal::zero(bits);
        match self.quarter_turns % 4 {
            0 => (m, z),
            1 => (z, m),
            2 => (m.neg(), z),
            _ => (z, m.neg()),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.magnitude.to_f64();
        match self.quarter_turns % 4 {
            0 => Complex64::new(m, 0.0),
            1 => Complex64::new(0.0, m),
            2 => Complex64::new(-m, 0.0),
            _ => Complex64::new(0.0, -m),
        }
    }
}

/// `∫_{ℝ+iε} e^{-a t²} t^{-k} dt = (−i)^k a^{(k−1)/2} π / Γ((k+1)/2)`, exactly.
pub fn neg_gauss_moment_exact(k: u32, a: &Rational) -> Result<ExactMoment, MomentError> {
    if a.is_negative() {
        return Err(MomentError::NegativeScale);
    }
    if a.is_zero() {
        if k == 0 {
            return Err(MomentError::Divergent);
        }
        // only k = 1 survives: a^0 π / Γ(1)
        let magnitude = if k == 1 {
            SymbolicConstant::new(Rational::one(), Rational::one(), 2, Rational::zero())
        } else {
            SymbolicConstant::rational(Rational::zero())
        };
        return Ok(ExactMoment { quarter_turns: 3, magnitude });
    }
    let quarter_turns = ((3 * k) % 4) as u8;
    let magnitude = if k % 2 == 1 {
        // Γ((k+1)/2) = ((k−1)/2)!
        let h = (k - 1) / 2;
        SymbolicConstant::new(
            rat_pow(a, h as i64) / Rational::from_integer(factorial(h as u64)),
            Rational::one(),
            2,
            Rational::zero(),
        )
    } else {
        // Γ(h + 1/2) = (2h)! √π / (4^h h!), a^{h − 1/2} = a^h / √a
        let h = (k / 2) as u64;
        let gamma_rat = Rational::new(factorial(2 * h), BigInt::from(4u32).pow(h as u32) * factorial(h));
        SymbolicConstant::new(
            rat_pow(a, h as i64) / gamma_rat,
            Rational::one() / a,
            1,
            Rational::zero(),
        )
    };
    Ok(ExactMoment { quarter_turns, magnitude })
}

/// Floating-point version of [`neg_gauss_moment_exact`].
pub fn neg_gauss_moment(k: u32, a: f64) -> Result<Complex64, MomentError> {
    if a < 0.0 || a.is_nan() {
        return Err(MomentError::NegativeScale);
    }
    if a == 0.0 {
        if k == 0 {
            return Err(MomentError::Divergent);
        }
        return Ok(if k == 1 {
            Complex64::new(0.0, -std::f64::consts::PI)
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let mag = a.powf((k as f64 - 1.0) / 2.0) * std::f64::consts::PI / statrs::function::gamma::gamma((k as f64 + 1.0) / 2.0);
    Ok(Complex64::new(0.0, -1.0).powu(k) * mag)
}

/// A boundary point whose cone coefficient vanishes for exactly one factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceData {
    pub sigma: RatVector,
    /// Stratum factors with the vanishing coefficient last.
    pub order: Vec<usize>,
    pub lambda: RatVector,
    /// Rows `b^{(1)} … b^{(t)}` in `order`.
    pub m: RatMatrix,
    pub m_inverse: RatMatrix,
    /// `qᵀq` for `q = diag(√r_j/σ_j) M⁻¹ e_t`.
    pub qtq: Rational,
    /// `σ ⊙ b^{(t)}`, the window direction.
    pub v: RatVector,
    pub r: Vec<u64>,
}

impl FaceData {
    /// `q` in floating point.
    pub fn q(&self) -> Vec<f64> {
        let t = self.order.len() - 1;
        (0..self.sigma.len())
            .map(|j| (self.r[j] as f64).sqrt() / rat_to_f64(&self.sigma[j]) * rat_to_f64(&self.m_inverse[(j, t)]))
            .collect()
    }
}

/// Builds the face data of a boundary point at a zero-dimensional stratum.
pub fn face_data(point: &CriticalPoint, f: &RationalFunction, dir: &Direction) -> Result<FaceData, AsymptoticsError> {
    let d = f.nvars;
    let unsupported = |msg: String| AsymptoticsError::NonGenericUnsupported(msg);
    let sigma = point
        .exact_coords()
        .ok_or_else(|| unsupported("boundary point is not rational".into()))?;
    if point.stratum.len() != d {
        return Err(unsupported(format!(
            "boundary point lies on a stratum of dimension {}",
            d - point.stratum.len().min(d)
        )));
    }
    let lambda: RatVector = point
        .lambda
        .iter()
        .map(|l| l.as_exact().cloned())
        .collect::<Option<_>>()
        .ok_or_else(|| unsupported("cone coefficients are not rational".into()))?;
    let zeros: Vec<usize> = (0..lambda.len()).filter(|&i| lambda[i].is_zero()).collect();
    if zeros.len() != 1 {
        return Err(unsupported(format!(
            "{} cone coefficients vanish; only codimension-one faces are handled",
            zeros.len()
        )));
    }
    if lambda.iter().any(|l| l.is_negative()) {
        return Err(unsupported("point is not in the closed normal cone".into()));
    }
    let z = zeros[0];
    let mut idx: Vec<usize> = (0..lambda.len()).filter(|&i| i != z).collect();
    idx.push(z);
    let order: Vec<usize> = idx.iter().map(|&i| point.stratum[i]).collect();
    let lambda: RatVector = idx.iter().map(|&i| lambda[i].clone()).collect();
    let m = RatMatrix::from_rows(order.iter().map(|&k| f.factors[k].b.clone()).collect());
    let m_inverse = m
        .inverse()
        .map_err(|_| unsupported("stratum normals are dependent".into()))?;
    let t = d - 1;
    let r = dir.r().to_vec();
    let qtq = (0..d).fold(Rational::zero(), |acc, j| {
        let x = &m_inverse[(j, t)] / &sigma[j];
        acc + Rational::from_integer(BigInt::from(r[j])) * &x * &x
    });
    if !qtq.is_positive() {
        return Err(unsupported("degenerate window quadratic form".into()));
    }
    let last = &f.factors[order[t]];
    let v = sigma.iter().zip(&last.b).map(|(s, b)| s * b).collect();
    Ok(FaceData {
        sigma,
        order,
        lambda,
        m,
        m_inverse,
        qtq,
        v,
        r,
    })
}

/// Leading term in the exact non-generic direction:
/// `C σ^{-nr} n^{Σ_{j<t} p_j + p_t/2 − d + 1/2}` with
/// `C = ∏_{j<t} λ_j^{p_j−1}/(p_j−1)! · G(σ)/∏_{j∉S} ℓ_j(σ)^{p_j} · (qᵀq/2)^{(p_t−1)/2} / (2 ∏|σ_j| |det M| Γ((p_t+1)/2))`.
pub fn codim1_constant(
    face: &FaceData,
    point: &CriticalPoint,
    f: &RationalFunction,
    bits: u32,
) -> Result<Contribution, AsymptoticsError> {
    let d = f.nvars;
    let t = face.order.len() - 1;
    let sigma = &face.sigma;
    let (g, e) = f.numerator.evaluate_parts(sigma);
    if g.is_zero() {
        return Err(AsymptoticsError::NonGenericUnsupported("numerator vanishes at the boundary point".into()));
    }
    let mut q = g;
    for j in 0..t {
        let p = f.factors[face.order[j]].power;
        q *= rat_pow(&face.lambda[j], (p - 1) as i64) / Rational::from_integer(factorial((p - 1) as u64));
    }
    for (j, fac) in f.factors.iter().enumerate() {
        if !face.order.contains(&j) {
            q /= rat_pow(&fac.eval(sigma), fac.power as i64);
        }
    }
    let det = face.m.determinant().expect("square").abs();
    q /= Rational::from_integer(BigInt::from(2)) * det * sigma.iter().fold(Rational::one(), |a, x| a * x.abs());
    let pt = f.factors[face.order[t]].power as u64;
    let half_qtq = &face.qtq / Rational::from_integer(BigInt::from(2));
    let sym = if pt % 2 == 1 {
        // (qᵀq/2)^h / h! with h = (p_t − 1)/2
        let h = (pt - 1) / 2;
        SymbolicConstant::new(
            q * rat_pow(&half_qtq, h as i64) / Rational::from_integer(factorial(h)),
            Rational::one(),
            0,
            e.clone().unwrap_or_else(Rational::zero),
        )
    } else {
        // (qᵀq/2)^{h−1/2} / Γ(h + 1/2), p_t = 2h
        let h = pt / 2;
        let gamma_rat = Rational::new(factorial(2 * h), BigInt::from(4u32).pow(h as u32) * factorial(h));
        SymbolicConstant::new(
            q * rat_pow(&half_qtq, h as i64 - 1) / gamma_rat,
            half_qtq.clone(),
            -1,
            e.clone().unwrap_or_else(Rational::zero),
        )
    };
    let psum: u64 = face.order[..t].iter().map(|&k| f.factors[k].power as u64).sum();
    let alpha = Rational::from_integer(BigInt::from(psum)) + Rational::new(BigInt::from(pt), BigInt::from(2))
        - Rational::from_integer(BigInt::from(d))
        + Rational::new(BigInt::one(), BigInt::from(2));
    let dir = Direction::new(face.r.clone())?;
    Ok(Contribution {
        point: point.coords.clone(),
        stratum: point.stratum.clone(),
        orthant: point.orthant.clone(),
        height: point.height.clone(),
        base: Value::Exact(crate::critical::exact_base(sigma, &dir)),
        alpha,
        constant: LeadingConstant::exact(sym, bits),
        exactness: Exactness::LeadingTermOnly,
        vanishing: Vanishing::NonZero,
        terms: vec![0],
    })
}

/// Scale in the standard-normal form of the window: `W(u) = 2Φ₀(κu) − 1`.
pub const WINDOW_KAPPA: f64 = std::f64::consts::SQRT_2;

/// Window profile `W(u) = 2Φ₀(κu) − 1`.
pub fn window(u: f64, kappa: f64) -> f64 {
    erf(kappa * u / std::f64::consts::SQRT_2)
}

/// `G(σ)/(2∏|σ_j||det M|) · (W(θ/√(2qᵀq)) + 1)`, the coefficient along
/// `n r + θ√n v` divided by `σ^{-n r − θ√n v}`.
pub fn transition_profile(face: &FaceData, f: &RationalFunction, theta: f64, kappa: f64) -> Result<f64, AsymptoticsError> {
    if face.order.iter().any(|&k| f.factors[k].power != 1) || f.factors.iter().any(|fac| fac.power != 1) {
        return Err(AsymptoticsError::NonGenericUnsupported("window profile needs simple poles".into()));
    }
    let base = half_constant(face, f)?;
    let u = theta / (2.0 * rat_to_f64(&face.qtq)).sqrt();
    Ok(base * (window(u, kappa) + 1.0))
}

fn half_constant(face: &FaceData, f: &RationalFunction) -> Result<f64, AsymptoticsError> {
    let (g, e) = f.numerator.evaluate_parts(&face.sigma);
    let mut q = g;
    for (j, fac) in f.factors.iter().enumerate() {
        if !face.order.contains(&j) {
            q /= rat_pow(&fac.eval(&face.sigma), fac.power as i64);
        }
    }
    let det = face.m.determinant().expect("square").abs();
    q /= Rational::from_integer(BigInt::from(2)) * det * face.sigma.iter().fold(Rational::one(), |a, x| a * x.abs());
    Ok(rat_to_f64(&q) * e.map(|x| rat_to_f64(&x).exp()).unwrap_or(1.0))
}

/// Maps a lattice point `r'` near the ray to `(n, θ)` with
/// `r' = n r + θ√n v`, using two coordinates where `(r, v)` is independent.
pub fn window_coordinates(face: &FaceData, index: &[u64]) -> Option<(f64, f64)> {
    let d = face.r.len();
    let r: Vec<f64> = face.r.iter().map(|&x| x as f64).collect();
    let v: Vec<f64> = face.v.iter().map(rat_to_f64).collect();
    let x: Vec<f64> = index.iter().map(|&x| x as f64).collect();
    for i in 0..d {
        for j in i + 1..d {
            let det = r[i] * v[j] - r[j] * v[i];
            if det.abs() > 1e-12 {
                let n = (x[i] * v[j] - x[j] * v[i]) / det;
                let w = (r[i] * x[j] - r[j] * x[i]) / det;
                if n <= 0.0 {
                    return None;
                }
                return Some((n, w / n.sqrt()));
            }
        }
    }
    None
}

/// Least-squares `κ` fitting `(θ, observed)` samples of the scaled coefficient
/// to [`transition_profile`], by golden-section search on `[lo, hi]`.
pub fn calibrate_kappa(face: &FaceData, f: &RationalFunction, samples: &[(f64, f64)], lo: f64, hi: f64) -> Result<f64, AsymptoticsError> {
    let loss = |k: f64| -> Result<f64, AsymptoticsError> {
        let mut s = 0.0;
        for &(theta, obs) in samples {
            let e = transition_profile(face, f, theta, k)? - obs;
            s += e * e;
        }
        Ok(s)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut dd = a + g * (b - a);
    let (mut fc, mut fd) = (loss(c)?, loss(dd)?);
    for _ in 0..200 {
        if fc < fd {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = loss(c)?;
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = loss(dd)?;
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    Ok((a + b) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::tests::main_factors;
    use crate::critical::{critical_set, Precision};
    use crate::exact::{int, rat, Numerator};

    fn main_fn() -> RationalFunction {
        RationalFunction::from_parts(Numerator::one(2), main_factors())
    }

    /// Trapezoid rule on `x + i` over `[−L, L]`.
    pub(crate) fn contour_quadrature(k: u32, a: f64) -> Complex64 {
        let h = 1e-3;
        let l = 12.0 / a.sqrt() + 2.0;
        let steps = (2.0 * l / h) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..=steps {
            let x = -l + s as f64 * h;
            let t = Complex64::new(x, 1.0);
            let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
            acc += w * (-a * t * t).exp() / t.powu(k);
        }
        acc * h
    }

    #[test]
    fn moments_match_quadrature() {
        for k in 0..=4 {
            for (a, aq) in [(0.5, rat(1, 2)), (1.0, int(1)), (2.0, int(2))] {
                let closed = neg_gauss_moment(k, a).unwrap();
                let num = contour_quadrature(k, a);
                assert!((closed - num).norm() / closed.norm() < 1e-6, "k={k} a={a}: {closed} vs {num}");
                let ex = neg_gauss_moment_exact(k, &aq).unwrap();
                assert!((ex.to_complex() - closed).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn moment_special_values() {
        let m = neg_gauss_moment_exact(1, &rat(7, 3)).unwrap();
        assert_eq!(m.quarter_turns, 3);
        assert_eq!(m.magnitude, SymbolicConstant::new(int(1), int(1), 2, int(0)));
        let (re, im) = m.certified(128);
        assert_eq!(re.sign(), Some(0));
        assert!(im.lo() < &rat(-3141592653589793, 1_000_000_000_000_000));
        assert!(im.hi() > &rat(-3141592653589794, 1_000_000_000_000_000));
        assert!(im.relative_width() < 1e-30);
        let m = neg_gauss_moment(0, std::f64::consts::PI).unwrap();
        assert!((m.re - 1.0).abs() < 1e-15);
        let m = neg_gauss_moment(2, 1.0).unwrap();
        assert!((m.re + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert_eq!(neg_gauss_moment(0, 0.0), Err(MomentError::Divergent));
    }

    #[test]
    fn main_example_boundary_constant() {
        let f = main_fn();
        let dir = Direction::new(vec![2, 1]).unwrap();
        let set = critical_set(&f, &dir, Precision::default()).unwrap();
        let p = set.points.iter().find(|p| p.classification == crate::critical::Classification::Boundary).unwrap();
        let face = face_data(p, &f, &dir).unwrap();
        assert_eq!(face.qtq, int(6));
        assert_eq!(face.order, vec![0, 1]);
        let c = codim1_constant(&face, p, &f, 128).unwrap();
        assert_eq!(c.constant.symbolic.unwrap(), SymbolicConstant::rational(rat(3, 2)));
        assert_eq!(c.alpha, int(0));
        assert!((transition_profile(&face, &f, 0.0, WINDOW_KAPPA).unwrap() - 1.5).abs() < 1e-15);
    }
}
