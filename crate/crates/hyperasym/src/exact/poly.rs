use super::{dot, CertifiedReal, RatMatrix, RatVector, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// `exp(c0 + c·z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpAffine {
    #[serde(with = "super::serde_rat")]
    pub constant: Rational,
    #[serde(with = "super::serde_rat::vec")]
    pub linear: RatVector,
}

/// Numerator `G(z)`: a polynomial times an optional exponential factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numerator {
    pub poly: MultiPoly,
    pub exp: Option<ExpAffine>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    /// `c0 + Σ c_i z_i`.
    pub fn affine(c0: Rational, c: &[Rational]) -> Self {
        let n = c.len();
        let mut p = Self::constant(n, c0);
        for (i, ci) in c.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, ci.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        assert_eq!(e.len(), self.nvars, "exponent length");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> MultiPoly {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn evaluate(&self, z: &[Rational]) -> Rational {
        assert_eq!(z.len(), self.nvars, "point dimension");
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (zi, &k) in z.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(zi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn evaluate_certified(&self, z: &[CertifiedReal]) -> CertifiedReal {
        assert_eq!(z.len(), self.nvars, "point dimension");
        let bits = z.iter().map(|x| x.bits()).max().unwrap_or(super::DEFAULT_BITS);
        let mut acc = CertifiedReal::zero(bits);
        for (e, c) in &self.terms {
            let mut t = CertifiedReal::from_rational(c, bits);
            for (zi, &k) in z.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&zi.powi(k));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Rewrites `p(z)` under `z = z0 + A w`, returning a polynomial in `w`.
    pub fn substitute_affine(&self, z0: &[Rational], a: &RatMatrix) -> MultiPoly {
        assert_eq!(z0.len(), self.nvars);
        assert_eq!(a.nrows(), self.nvars);
        let m = a.ncols();
        let images: Vec<MultiPoly> = (0..self.nvars)
            .map(|i| MultiPoly::affine(z0[i].clone(), a.row(i)))
            .collect();
        let mut cache: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| vec![MultiPoly::one(m), p.clone()])
            .collect();
        let mut out = MultiPoly::zero(m);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while cache[i].len() <= k {
                    let next = cache[i].last().unwrap().mul(&images[i]);
                    cache[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&cache[i][k]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Drops every monomial of total degree above `deg`.
    pub fn truncate(&self, deg: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= deg)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Exact quotient by the affine form `1 − b·z` when it divides.
    pub fn divide_by_form(&self, b: &[Rational]) -> Option<MultiPoly> {
        let (z0, a, t) = form_coordinates(b);
        // In coordinates w with w_0 = 1 − b·z the polynomial must be divisible by w_0.
        let pw = self.substitute_affine(&z0, &a);
        let mut q = MultiPoly::zero(self.nvars);
        for (e, c) in &pw.terms {
            if e[0] == 0 {
                return None;
            }
            let mut e2 = e.clone();
            e2[0] -= 1;
            q.add_term(e2, c.clone());
        }
        let mut e0 = vec![Rational::zero(); self.nvars];
        e0[0] = Rational::one();
        Some(q.substitute_affine(&e0, &t))
    }
}

/// Affine chart `z = z0 + A w` in which `w_0 = 1 − b·z` and the other
/// coordinates are the standard ones except the first with `b_i ≠ 0`.
/// Returns `(z0, A, T)` where `w = T z + e_0`.
pub(crate) fn form_coordinates(b: &[Rational]) -> (RatVector, RatMatrix, RatMatrix) {
    let d = b.len();
    let pivot = b.iter().position(|x| !x.is_zero()).expect("non-zero form");
    let mut rows = vec![b.iter().map(|x| -x.clone()).collect::<Vec<_>>()];
    for i in (0..d).filter(|&i| i != pivot) {
        let mut e = vec![Rational::zero(); d];
        e[i] = Rational::one();
        rows.push(e);
    }
    let t = RatMatrix::from_rows(rows);
    let tinv = t.inverse().expect("completed basis is invertible");
    let mut e0 = vec![Rational::zero(); d];
    e0[0] = Rational::one();
    let z0: RatVector = tinv.mul_vec(&e0).into_iter().map(|x| -x).collect();
    (z0, tinv, t)
}

impl Numerator {
    pub fn polynomial(poly: MultiPoly) -> Self {
        Numerator { poly, exp: None }
    }

    pub fn one(nvars: usize) -> Self {
        Self::polynomial(MultiPoly::one(nvars))
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn scale(&self, s: &Rational) -> Numerator {
        Numerator {
            poly: self.poly.scale(s),
            exp: self.exp.clone(),
        }
    }

    /// Value at a rational point: polynomial value and, if present, the
    /// exponent `c0 + c·z` of the exponential factor.
    pub fn evaluate_parts(&self, z: &[Rational]) -> (Rational, Option<Rational>) {
        let p = self.poly.evaluate(z);
        let e = self
            .exp
            .as_ref()
            .map(|ea| &ea.constant + dot(&ea.linear, z));
        (p, e)
    }

    pub fn evaluate_certified(&self, z: &[CertifiedReal]) -> CertifiedReal {
        let p = self.poly.evaluate_certified(z);
        match &self.exp {
            None => p,
            Some(ea) => {
                let bits = p.bits();
                let mut arg = CertifiedReal::from_rational(&ea.constant, bits);
                for (c, zi) in ea.linear.iter().zip(z) {
                    arg = arg.add(&zi.mul_rational(c));
                }
                p.mul(&arg.exp())
            }
        }
    }
}
