use crate::exact::{rat_to_f64, CertifiedReal, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// `rational · √radicand · π^{pi_half_power/2} · e^{exp}` with a square-free
/// positive integer radicand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicConstant {
    pub rational: Rational,
    pub radicand: BigInt,
    pub pi_half_power: i32,
    pub exp: Rational,
}

const TRIAL_LIMIT: u64 = 100_000;

impl SymbolicConstant {
    pub fn rational(q: Rational) -> Self {
        SymbolicConstant {
            rational: q,
            radicand: BigInt::one(),
            pi_half_power: 0,
            exp: Rational::zero(),
        }
    }

    /// Builds `q · √s · π^{k/2} · e^t`, normalizing `s > 0` to a square-free integer.
    pub fn new(q: Rational, s: Rational, pi_half_power: i32, exp: Rational) -> Self {
        assert!(s.is_positive(), "radicand must be positive");
        let den = s.denom().clone();
        let mut m = s.numer() * &den;
        let mut q = q / Rational::from_integer(den);
        let mut p = BigInt::from(2u32);
        let mut count = 0u64;
        while &p * &p <= m && count < TRIAL_LIMIT {
            let sq = &p * &p;
            while m.is_multiple_of(&sq) {
                m /= &sq;
                q *= Rational::from_integer(p.clone());
            }
            p += 1;
            count += 1;
        }
        let root = m.sqrt();
        if &root * &root == m {
            q *= Rational::from_integer(root);
            m = BigInt::one();
        }
        if q.is_zero() {
            m = BigInt::one();
        }
        SymbolicConstant {
            rational: q,
            radicand: m,
            pi_half_power,
            exp,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero()
    }

    pub fn mul(&self, o: &SymbolicConstant) -> SymbolicConstant {
        SymbolicConstant::new(
            &self.rational * &o.rational,
            Rational::from_integer(&self.radicand * &o.radicand),
            self.pi_half_power + o.pi_half_power,
            &self.exp + &o.exp,
        )
    }

    pub fn scale(&self, q: &Rational) -> SymbolicConstant {
        SymbolicConstant {
            rational: &self.rational * q,
            ..self.clone()
        }
    }

    /// Exact sum when both share radicand, π power and exponential.
    pub fn try_add(&self, o: &SymbolicConstant) -> Option<SymbolicConstant> {
        if self.is_zero() {
            return Some(o.clone());
        }
        if o.is_zero() {
            return Some(self.clone());
        }
        (self.radicand == o.radicand && self.pi_half_power == o.pi_half_power && self.exp == o.exp).then(|| {
            let mut s = self.clone();
            s.rational += &o.rational;
            if s.rational.is_zero() {
                s.radicand = BigInt::one();
            }
            s
        })
    }

    pub fn to_certified(&self, bits: u32) -> CertifiedReal {
        let w = bits + 32;
        let mut v = CertifiedReal::exact(self.rational.clone(), w);
        if !self.radicand.is_one() {
            let r = CertifiedReal::exact(Rational::from_integer(self.radicand.clone()), w)
                .sqrt()
                .expect("positive radicand");
            v = v.mul(&r);
        }
        if self.pi_half_power != 0 {
            let sp = CertifiedReal::pi(w).sqrt().expect("pi is positive");
            let k = self.pi_half_power.unsigned_abs();
            let p = sp.powi(k);
            v = if self.pi_half_power > 0 {
                v.mul(&p)
            } else {
                v.div(&p).expect("pi power is non-zero")
            };
        }
        if !self.exp.is_zero() {
            v = v.mul(&CertifiedReal::exact(self.exp.clone(), w).exp());
        }
        v.with_bits(bits)
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = rat_to_f64(&self.rational);
        if !self.radicand.is_one() {
            v *= self.radicand.to_f64().unwrap_or(f64::INFINITY).sqrt();
        }
        v *= std::f64::consts::PI.sqrt().powi(self.pi_half_power);
        v * rat_to_f64(&self.exp).exp()
    }
}

impl fmt::Display for SymbolicConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational)?;
        if self.is_zero() {
            return Ok(());
        }
        if !self.radicand.is_one() {
            write!(f, " * sqrt({})", self.radicand)?;
        }
        match self.pi_half_power {
            0 => {}
            2 => write!(f, " * pi")?,
            k if k % 2 == 0 => write!(f, " * pi^({})", k / 2)?,
            k => write!(f, " * pi^({}/2)", k)?,
        }
        if !self.exp.is_zero() {
            write!(f, " * exp({})", self.exp)?;
        }
        Ok(())
    }
}

/// A leading constant: always certified, exact when a closed form is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadingConstant {
    pub symbolic: Option<SymbolicConstant>,
    pub value: CertifiedReal,
}

impl LeadingConstant {
    pub fn exact(s: SymbolicConstant, bits: u32) -> Self {
        LeadingConstant {
            value: s.to_certified(bits),
            symbolic: Some(s),
        }
    }

    pub fn certified(value: CertifiedReal) -> Self {
        LeadingConstant { symbolic: None, value }
    }

    pub fn zero(bits: u32) -> Self {
        Self::exact(SymbolicConstant::rational(Rational::zero()), bits)
    }

    pub fn to_f64(&self) -> f64 {
        match &self.symbolic {
            Some(s) => s.to_f64(),
            None => self.value.to_f64(),
        }
    }

    /// `Some(true)` when certainly zero, `Some(false)` when certainly not.
    pub fn is_zero(&self) -> Option<bool> {
        match &self.symbolic {
            Some(s) => Some(s.is_zero()),
            None => match self.value.sign() {
                Some(0) => Some(true),
                Some(_) => Some(false),
                None => None,
            },
        }
    }

    pub fn add(&self, o: &LeadingConstant) -> LeadingConstant {
        let bits = self.value.bits().max(o.value.bits());
        if let (Some(a), Some(b)) = (&self.symbolic, &o.symbolic) {
            if let Some(s) = a.try_add(b) {
                return Self::exact(s, bits);
            }
        }
        Self::certified(self.value.add(&o.value))
    }

    pub fn scale(&self, q: &Rational) -> LeadingConstant {
        LeadingConstant {
            symbolic: self.symbolic.as_ref().map(|s| s.scale(q)),
            value: self.value.mul_rational(q),
        }
    }
}

impl fmt::Display for LeadingConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.symbolic {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{:.15e}", self.value.to_f64()),
        }
    }
}
