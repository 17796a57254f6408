//! Outward-rounded interval arithmetic on dyadic rationals.

use super::{rat_to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

pub const DEFAULT_BITS: u32 = 256;
pub const MAX_BITS: u32 = 4096;

/// A real number known to lie in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedReal {
    lo: Rational,
    hi: Rational,
    bits: u32,
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// Rounds `q` to a dyadic with about `bits` significant bits, downwards or upwards.
fn round_dyadic(q: &Rational, bits: u32, up: bool) -> Rational {
    if q.is_zero() || q.denom().bits() <= 1 && q.numer().bits() <= bits as u64 {
        return q.clone();
    }
    let est = q.numer().bits() as i64 - q.denom().bits() as i64;
    let k = bits as i64 - est;
    let (num, den) = if k >= 0 {
        (q.numer() * pow2(k as u64), q.denom().clone())
    } else {
        (q.numer().clone(), q.denom() * pow2((-k) as u64))
    };
    let (mut m, r) = num_integer::Integer::div_mod_floor(&num, &den);
    if up && !r.is_zero() {
        m += 1;
    }
    if k >= 0 {
        Rational::new(m, pow2(k as u64))
    } else {
        Rational::from_integer(m * pow2((-k) as u64))
    }
}

fn rmin(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

fn rmax(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a
    } else {
        b
    }
}

impl CertifiedReal {
    pub fn from_bounds(lo: Rational, hi: Rational, bits: u32) -> Self {
        assert!(lo <= hi, "empty interval");
        CertifiedReal {
            lo: round_dyadic(&lo, bits, false),
            hi: round_dyadic(&hi, bits, true),
            bits,
        }
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Self {
        Self::from_bounds(q.clone(), q.clone(), bits)
    }

    pub fn exact(q: Rational, bits: u32) -> Self {
        CertifiedReal {
            lo: q.clone(),
            hi: q,
            bits,
        }
    }

    pub fn zero(bits: u32) -> Self {
        Self::exact(Rational::zero(), bits)
    }

    pub fn one(bits: u32) -> Self {
        Self::exact(Rational::one(), bits)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn rad(&self) -> Rational {
        (&self.hi - &self.lo) / Rational::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.mid())
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        Self::from_bounds(self.lo.clone(), self.hi.clone(), bits)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    /// Sign if decidable from the enclosure.
    pub fn sign(&self) -> Option<i32> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    /// Certified comparison; `None` when the enclosures overlap.
    pub fn compare(&self, other: &CertifiedReal) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && other.lo == other.hi && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Relative width `rad / |mid|` as f64 (infinite when the enclosure holds 0).
    pub fn relative_width(&self) -> f64 {
        let m = self.mid();
        if m.is_zero() {
            return if self.rad().is_zero() { 0.0 } else { f64::INFINITY };
        }
        rat_to_f64(&(self.rad() / m.abs()))
    }

    pub fn is_subset_of(&self, other: &CertifiedReal) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn strictly_inside(&self, other: &CertifiedReal) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn hull(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: rmin(self.lo.clone(), other.lo.clone()),
            hi: rmax(self.hi.clone(), other.hi.clone()),
            bits: self.bits.max(other.bits),
        }
    }

    pub fn intersect(&self, other: &CertifiedReal) -> Option<Self> {
        let lo = rmax(self.lo.clone(), other.lo.clone());
        let hi = rmin(self.hi.clone(), other.hi.clone());
        (lo <= hi).then_some(CertifiedReal {
            lo,
            hi,
            bits: self.bits.max(other.bits),
        })
    }

    pub fn neg(&self) -> Self {
        CertifiedReal {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = rmax(-self.lo.clone(), self.hi.clone());
            CertifiedReal {
                lo: Rational::zero(),
                hi: m,
                bits: self.bits,
            }
        } else if self.hi.is_negative() || self.hi.is_zero() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, o: &CertifiedReal) -> Self {
        Self::from_bounds(&self.lo + &o.lo, &self.hi + &o.hi, self.bits.max(o.bits))
    }

    pub fn sub(&self, o: &CertifiedReal) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &CertifiedReal) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self::from_bounds(lo, hi, self.bits.max(o.bits))
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self.mul(&CertifiedReal::exact(q.clone(), self.bits))
    }

    pub fn add_rational(&self, q: &Rational) -> Self {
        self.add(&CertifiedReal::exact(q.clone(), self.bits))
    }

    pub fn recip(&self) -> Option<Self> {
        if self.contains_zero() {
            return None;
        }
        Some(Self::from_bounds(
            self.hi.recip(),
            self.lo.recip(),
            self.bits,
        ))
    }

    pub fn div(&self, o: &CertifiedReal) -> Option<Self> {
        o.recip().map(|r| self.mul(&r))
    }

    pub fn powi(&self, k: u32) -> Self {
        if k == 0 {
            return Self::one(self.bits);
        }
        if k.is_multiple_of(2) {
            let a = self.abs();
            return Self::from_bounds(
                num_traits::pow(a.lo.clone(), k as usize),
                num_traits::pow(a.hi.clone(), k as usize),
                self.bits,
            );
        }
        Self::from_bounds(
            num_traits::pow(self.lo.clone(), k as usize),
            num_traits::pow(self.hi.clone(), k as usize),
            self.bits,
        )
    }

    pub fn square(&self) -> Self {
        self.powi(2)
    }

    /// Square root; `None` if the enclosure reaches below zero.
    pub fn sqrt(&self) -> Option<Self> {
        if self.lo.is_negative() {
            return None;
        }
        let bits = self.bits;
        Some(CertifiedReal {
            lo: sqrt_bound(&self.lo, bits + 8, false),
            hi: sqrt_bound(&self.hi, bits + 8, true),
            bits,
        })
    }

    /// Natural logarithm; `None` unless the enclosure is positive.
    pub fn ln(&self) -> Option<Self> {
        if !self.lo.is_positive() {
            return None;
        }
        let bits = self.bits;
        let at_lo = ln_point(&self.lo, bits);
        let rel = (&self.hi - &self.lo) / &self.lo;
        // concavity: ln hi ≤ ln lo + (hi − lo) / lo, tight for narrow inputs
        let hi = if rel < Rational::new(BigInt::one(), pow2(32)) {
            at_lo.hi + rel
        } else {
            ln_point(&self.hi, bits).hi
        };
        Some(CertifiedReal::from_bounds(at_lo.lo, hi, bits))
    }

    pub fn exp(&self) -> Self {
        let bits = self.bits;
        let lo = exp_point(&self.lo, bits).lo;
        let hi = exp_point(&self.hi, bits).hi;
        CertifiedReal { lo, hi, bits }
    }

    pub fn pi(bits: u32) -> Self {
        let w = bits + 16;
        let a = atan_inv(5, w).mul_rational(&Rational::from_integer(BigInt::from(16)));
        let b = atan_inv(239, w).mul_rational(&Rational::from_integer(BigInt::from(4)));
        a.sub(&b).with_bits(bits)
    }

    /// `x^q` for rational exponent with `x > 0`.
    pub fn pow_rational(&self, q: &Rational) -> Option<Self> {
        let l = self.ln()?;
        Some(l.mul_rational(q).exp())
    }
}

fn sqrt_bound(q: &Rational, bits: u32, up: bool) -> Rational {
    if q.is_zero() {
        return Rational::zero();
    }
    // scale so that the integer square root carries `bits` bits
    let est = (q.numer().bits() as i64 - q.denom().bits() as i64) / 2;
    let k = bits as i64 - est;
    let k = k.max(0) as u64;
    let scaled = q * Rational::from_integer(pow2(2 * k));
    let fl = scaled.floor().to_integer();
    let mut r = fl.sqrt();
    if up {
        r += 1;
    }
    Rational::new(r, pow2(k))
}

/// Enclosure of `atan(1/m)` via its alternating series.
fn atan_inv(m: i64, bits: u32) -> CertifiedReal {
    let x = Rational::new(BigInt::one(), BigInt::from(m));
    let x2 = CertifiedReal::exact(&x * &x, bits);
    let tol = Rational::new(BigInt::one(), pow2(bits as u64 + 4));
    let mut sum = CertifiedReal::zero(bits);
    let mut pw = CertifiedReal::exact(x, bits);
    let mut k: i64 = 0;
    loop {
        let term = pw.mul_rational(&Rational::new(BigInt::one(), BigInt::from(2 * k + 1)));
        sum = if k % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        pw = pw.mul(&x2);
        k += 1;
        if pw.hi < tol {
            // alternating tail is bounded by its first term
            let r = pw.hi.clone();
            return sum.add(&CertifiedReal::from_bounds(-r.clone(), r, bits));
        }
    }
}

fn ln2(bits: u32) -> CertifiedReal {
    thread_local! {
        static CACHE: std::cell::RefCell<std::collections::HashMap<u32, CertifiedReal>> = Default::default();
    }
    CACHE.with(|c| {
        c.borrow_mut()
            .entry(bits)
            .or_insert_with(|| {
                atanh_series(&Rational::new(BigInt::one(), BigInt::from(3)), bits)
                    .mul_rational(&Rational::from_integer(BigInt::from(2)))
            })
            .clone()
    })
}

/// Enclosure of `atanh(y)` for `|y| ≤ 1/2`, summed in fixed point with
/// `W` fractional bits; every truncation costs at most one unit `2^{-W}`.
fn atanh_series(y: &Rational, bits: u32) -> CertifiedReal {
    use num_integer::Integer;
    let w = bits as u64 + 24;
    let one = pow2(w);
    // |y − Y·2^{-W}| < 2^{-W}
    let yy = (y.numer() << w).div_floor(y.denom());
    let y2 = (&yy * &yy) >> w;
    let mut p = yy.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while p.magnitude().bits() > 1 {
        sum += p.div_floor(&BigInt::from(2 * k + 1));
        p = (&p * &y2).div_floor(&one);
        k += 1;
    }
    // per-term error ≤ 3 units, tail ≤ 4/3 |x|^(2k+1), input rounding ≤ 4/3 unit
    let units = BigInt::from(3 * k + 8) + p.abs() * 2;
    let mid = Rational::new(sum, one.clone());
    let rad = Rational::new(units, one);
    CertifiedReal::from_bounds(&mid - &rad, &mid + &rad, bits + 16).with_bits(bits)
}

fn ln_point(q: &Rational, bits: u32) -> CertifiedReal {
    let w = bits + 16;
    // q = 2^k m with m in [1/√2, √2] (approximately, via bit lengths)
    let mut k = q.numer().bits() as i64 - q.denom().bits() as i64;
    let mut m = scale_pow2(q, -k);
    let two = Rational::from_integer(BigInt::from(2));
    let lo_b = Rational::new(BigInt::from(7), BigInt::from(10));
    let hi_b = Rational::new(BigInt::from(7), BigInt::from(5));
    while m > hi_b {
        m /= &two;
        k += 1;
    }
    while m < lo_b {
        m *= &two;
        k -= 1;
    }
    let m = round_dyadic(&m, w + 8, false);
    let m_exact = scale_pow2(q, -k);
    let one = Rational::one();
    let y = (&m - &one) / (&m + &one);
    let mut val = atanh_series(&y, w).mul_rational(&two);
    // account for rounding m: |ln m_exact − ln m| ≤ |m_exact − m| / min(m, m_exact)
    let dm = (&m_exact - &m).abs();
    if !dm.is_zero() {
        let bound = dm / rmin(m.clone(), m_exact.clone());
        val = val.add(&CertifiedReal::from_bounds(-bound.clone(), bound, w));
    }
    if k != 0 {
        val = val.add(&ln2(w).mul_rational(&Rational::from_integer(BigInt::from(k))));
    }
    val.with_bits(bits)
}

fn scale_pow2(q: &Rational, k: i64) -> Rational {
    if k >= 0 {
        q * Rational::from_integer(pow2(k as u64))
    } else {
        q / Rational::from_integer(pow2((-k) as u64))
    }
}

fn exp_point(q: &Rational, bits: u32) -> CertifiedReal {
    // exp(q) = exp(q / 2^s)^(2^s) with |q / 2^s| ≤ 1/2^10
    let mag = q.numer().bits() as i64 - q.denom().bits() as i64 + 1;
    let s = (mag + 10).max(0) as u32;
    let w = bits + 16 + s;
    let x = scale_pow2(q, -(s as i64));
    let xi = CertifiedReal::from_rational(&x, w);
    let tol = Rational::new(BigInt::one(), pow2(w as u64));
    let mut sum = CertifiedReal::one(w);
    let mut term = CertifiedReal::one(w);
    let mut k: u64 = 1;
    loop {
        term = term
            .mul(&xi)
            .mul_rational(&Rational::new(BigInt::one(), BigInt::from(k)));
        sum = sum.add(&term);
        k += 1;
        let mag = term.abs().hi.clone();
        if mag < tol {
            // remaining terms bounded by 2·|next term| since |x| < 1/2
            let bound = mag * Rational::from_integer(BigInt::from(2));
            sum = sum.add(&CertifiedReal::from_bounds(-bound.clone(), bound, w));
            break;
        }
    }
    for _ in 0..s {
        sum = sum.square();
    }
    sum.with_bits(bits)
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;
    use proptest::prelude::*;

    fn near(x: &CertifiedReal, v: f64, tol: f64) -> bool {
        (x.to_f64() - v).abs() <= tol * v.abs().max(1.0)
    }

    #[test]
    fn constants() {
        let p = CertifiedReal::pi(256);
        assert!(near(&p, std::f64::consts::PI, 1e-15));
        assert!(p.relative_width() < 1e-70);
        let l = ln2(256);
        assert!(near(&l, std::f64::consts::LN_2, 1e-15));
        assert!(l.relative_width() < 1e-70);
    }

    #[test]
    fn logs_and_exps() {
        for (n, d) in [(1, 2), (3, 4), (27648, 1), (1, 27648), (9, 8), (1, 1)] {
            let q = rat(n, d);
            let l = CertifiedReal::from_rational(&q, 256).ln().unwrap();
            assert!(near(&l, (n as f64 / d as f64).ln(), 1e-14), "{n}/{d}");
            assert!(l.rad() < rat(1, 1 << 30) * rat(1, 1 << 30) * rat(1, 1 << 30));
            let e = l.exp();
            assert!(e.contains(&q) || (e.mid() - q.clone()).abs() < rat(1, 1 << 30));
        }
        let e = CertifiedReal::from_rational(&int(1), 256).exp();
        assert!(near(&e, std::f64::consts::E, 1e-15));
        let e = CertifiedReal::from_rational(&rat(-37, 2), 256).exp();
        assert!(near(&e, (-18.5f64).exp(), 1e-13));
    }

    #[test]
    fn sqrt_of_two() {
        let s = CertifiedReal::from_rational(&int(2), 256).sqrt().unwrap();
        assert!(s.square().contains(&int(2)));
        assert!(s.relative_width() < 1e-70);
        let z = CertifiedReal::zero(64).sqrt().unwrap();
        assert!(z.contains_zero());
    }

    #[test]
    fn signs_and_compare() {
        let a = CertifiedReal::from_bounds(rat(-1, 10), rat(1, 10), 64);
        assert_eq!(a.sign(), None);
        assert!(a.recip().is_none());
        let b = CertifiedReal::from_rational(&rat(1, 3), 64);
        assert_eq!(b.sign(), Some(1));
        assert_eq!(a.compare(&b), Some(Ordering::Less));
        assert_eq!(a.compare(&CertifiedReal::zero(64)), None);
        assert_eq!(b.compare(&b.add_rational(&int(1))), Some(Ordering::Less));
    }

    proptest! {
        #[test]
        fn arithmetic_encloses(an in -50i64..50, ad in 1i64..30, bn in -50i64..50, bd in 1i64..30, bits in 8u32..80) {
            let (a, b) = (rat(an, ad), rat(bn, bd));
            let (ia, ib) = (CertifiedReal::from_rational(&a, bits), CertifiedReal::from_rational(&b, bits));
            prop_assert!(ia.add(&ib).contains(&(&a + &b)));
            prop_assert!(ia.sub(&ib).contains(&(&a - &b)));
            prop_assert!(ia.mul(&ib).contains(&(&a * &b)));
            if bn != 0 {
                prop_assert!(ia.div(&ib).unwrap().contains(&(&a / &b)));
            }
            prop_assert!(ia.powi(3).contains(&(&a * &a * &a)));
            if an > 0 {
                let s = ia.sqrt().unwrap();
                prop_assert!(s.square().contains(&a) || s.mul(&s).contains(&a));
                let l = ia.ln().unwrap();
                prop_assert!(l.exp().contains(&a));
            }
        }
    }
}
