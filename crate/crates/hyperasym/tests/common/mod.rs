#![allow(dead_code)]
//! Strategies and invariant checks shared by the property suite and the
//! acceptance run.

use hyperasym::arrangement::{enumerate_flats, is_simple, LinearFactor, RationalFunction};
use hyperasym::asymptotics::{
    assemble, partial_codim_contribution_with, saddle_data, valid_completions, AssembleOptions, Exactness,
};
use hyperasym::critical::{critical_set, Classification, CriticalPoint, CriticalSet, Direction, Precision, Value};
use hyperasym::exact::{int, rat, rat_pow, rat_to_f64, Numerator, RatMatrix, Rational, SolveResult};
use hyperasym::oracle::ray_sequence;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub const PREC: Precision = Precision { bits: 128, max_bits: 1024 };

#[derive(Debug, Clone)]
pub struct Case {
    pub f: RationalFunction,
    pub dir: Direction,
}

fn coefficient() -> impl Strategy<Value = Rational> {
    (1i64..=4, 1i64..=4, any::<bool>()).prop_map(|(p, q, neg)| rat(if neg { -p } else { p }, q))
}

fn factor(d: usize) -> impl Strategy<Value = LinearFactor> {
    proptest::collection::vec(prop_oneof![1 => Just(int(0)), 4 => coefficient()], d)
        .prop_filter("non-zero normal", |b| b.iter().any(|x| !x.is_zero()))
        .prop_map(|b| LinearFactor::new(b, 1))
}

/// Simple arrangements of at most four factors in two or three variables.
pub fn simple_case() -> impl Strategy<Value = Case> {
    (2usize..=3)
        .prop_flat_map(|d| {
            (
                proptest::collection::vec(factor(d), 1..=4),
                proptest::collection::vec(1u64..=3, d),
            )
        })
        .prop_filter_map("simple with distinct factors", |(factors, r)| {
            let distinct: BTreeSet<_> = factors.iter().map(|f| f.b.clone()).collect();
            if distinct.len() != factors.len() || !is_simple(&enumerate_flats(&factors)).is_simple() {
                return None;
            }
            let d = factors[0].b.len();
            Some(Case {
                f: RationalFunction::from_parts(Numerator::one(d), factors),
                dir: Direction::new(r).unwrap(),
            })
        })
}

pub fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 50,
        max_global_rejects: 100_000,
        ..ProptestConfig::default()
    }
}

pub fn set_of(c: &Case) -> CriticalSet {
    critical_set(&c.f, &c.dir, PREC).expect("critical set")
}

fn h(z: &[f64], r: &[u64]) -> f64 {
    -z.iter().zip(r).map(|(x, &w)| w as f64 * x.abs().ln()).sum::<f64>()
}

fn ell(f: &LinearFactor, z: &[f64]) -> f64 {
    1.0 - f.b.iter().zip(z).map(|(b, x)| rat_to_f64(b) * x).sum::<f64>()
}

/// Directions leaving `σ` into `ℓ_k > 0` while keeping the other flat
/// factors at zero, plus any tangent component.
fn face_directions(p: &CriticalPoint, f: &RationalFunction) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    let rows = RatMatrix::from_rows(p.flat.iter().map(|&k| f.factors[k].b.clone()).collect());
    let to_f64 = |v: &[Rational]| v.iter().map(rat_to_f64).collect::<Vec<f64>>();
    (0..p.flat.len())
        .filter_map(|k| {
            let rhs: Vec<Rational> = (0..p.flat.len()).map(|j| if j == k { int(-1) } else { int(0) }).collect();
            match rows.solve(&rhs).ok()? {
                SolveResult::Unique(v) => Some((to_f64(&v), vec![])),
                SolveResult::Family { particular, kernel, .. } => {
                    Some((to_f64(&particular), kernel.iter().map(|v| to_f64(v)).collect()))
                }
                SolveResult::Inconsistent { .. } => None,
            }
        })
        .collect()
}

/// 100 points of `{ℓ_k ≥ 0, k ∈ flat} ∩ orthant(σ)`: spread over the
/// orthant, close to `σ`, and along the faces through `σ`.
fn gamma_samples(p: &CriticalPoint, f: &RationalFunction, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let sigma = p.coords_f64();
    let inside = |z: &[f64]| {
        z.iter().zip(&sigma).all(|(x, s)| x * s > 0.0) && p.flat.iter().all(|&k| ell(&f.factors[k], z) >= -1e-15)
    };
    let mut out = Vec::new();
    let push_until = |out: &mut Vec<Vec<f64>>, goal: usize, gen: &mut dyn FnMut() -> Vec<f64>| {
        for _ in 0..200_000 {
            if out.len() >= goal {
                break;
            }
            let z = gen();
            if inside(&z) {
                out.push(z);
            }
        }
    };
    let mut r2 = rng.clone();
    push_until(&mut out, 50, &mut || sigma.iter().map(|s| s * r2.random_range(-3.0f64..3.0).exp()).collect());
    push_until(&mut out, 75, &mut || {
        let eps = 10f64.powi(-r2.random_range(1..=4));
        sigma.iter().map(|s| s + eps * s.abs() * r2.random_range(-1.0..1.0)).collect()
    });
    let faces = face_directions(p, f);
    let size = sigma.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !faces.is_empty() {
        push_until(&mut out, 100, &mut || {
            let (v, kernel) = &faces[r2.random_range(0..faces.len())];
            let eps = 10f64.powi(-r2.random_range(1..=4));
            let mut dir = v.clone();
            for w in kernel {
                let c = r2.random_range(-1.0..1.0);
                dir.iter_mut().zip(w).for_each(|(x, y)| *x += c * y);
            }
            sigma.iter().zip(&dir).map(|(s, x)| s + eps * size * x).collect()
        });
    }
    *rng = r2;
    out
}

/// Bounded pieces of each line and vertex of a planar arrangement, by
/// walking every open quadrant.
pub fn bounded_pieces(factors: &[LinearFactor]) -> usize {
    let quadrants = [[1i64, 1], [1, -1], [-1, 1], [-1, -1]];
    let mut count = 0;
    for f in factors {
        let (b0, b1) = (&f.b[0], &f.b[1]);
        // z(t) = p + t v on b·z = 1
        let (p, v) = if !b1.is_zero() {
            ([int(0), b1.recip()], [int(1), -(b0 / b1)])
        } else {
            ([b0.recip(), int(0)], [int(0), int(1)])
        };
        for q in quadrants {
            // s (p_j + t v_j) > 0 for both coordinates
            let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = (None, None);
            let mut empty = false;
            for j in 0..2 {
                let (a, s) = (&v[j] * int(q[j]), &p[j] * int(q[j]));
                if a.is_zero() {
                    empty |= !s.is_positive();
                } else {
                    let t = -(&s / &a);
                    if a.is_positive() {
                        lo = Some(lo.map_or(t.clone(), |x: Rational| x.max(t)));
                    } else {
                        hi = Some(hi.map_or(t.clone(), |x: Rational| x.min(t)));
                    }
                }
            }
            if let (Some(l), Some(h)) = (&lo, &hi) {
                if !empty && l < h {
                    count += 1;
                }
            }
        }
    }
    let mut vertices = BTreeSet::new();
    for (i, f) in factors.iter().enumerate() {
        for g in &factors[..i] {
            let det = &f.b[0] * &g.b[1] - &f.b[1] * &g.b[0];
            if det.is_zero() {
                continue;
            }
            let x = (&g.b[1] - &f.b[1]) / &det;
            let y = (&f.b[0] - &g.b[0]) / &det;
            if !x.is_zero() && !y.is_zero() {
                vertices.insert((x, y));
            }
        }
    }
    count + vertices.len()
}

pub fn check_real_and_unique(c: &Case) -> Result<(), TestCaseError> {
    let set = set_of(c);
    let mut seen = BTreeSet::new();
    for p in &set.points {
        for z in p.certified_coords(set.bits) {
            prop_assert!(!z.contains_zero(), "{:?}", p.coords_f64());
            prop_assert!(z.lo() <= z.hi());
        }
        prop_assert!(seen.insert((p.flat.clone(), p.orthant.clone())), "duplicate {:?} {:?}", p.flat, p.orthant);
        let signs: Vec<i8> = p.coords.iter().map(|v| v.sign().unwrap() as i8).collect();
        prop_assert_eq!(&signs, &p.orthant);
    }
    Ok(())
}

pub fn check_minimizer(c: &Case, seed: u64) -> Result<(), TestCaseError> {
    let set = set_of(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = c.dir.r();
    for p in set.points.iter().filter(|p| !p.cross_flat && p.classification != Classification::Boundary) {
        let h0 = h(&p.coords_f64(), r);
        let samples = gamma_samples(p, &c.f, &mut rng);
        prop_assert!(samples.len() >= 50);
        let tol = 1e-9 * (1.0 + h0.abs());
        match p.classification {
            Classification::Contributing => {
                for z in &samples {
                    prop_assert!(h(z, r) >= h0 - tol, "{:?} below {:?}", z, p.coords_f64());
                }
            }
            _ => prop_assert!(samples.iter().any(|z| h(z, r) < h0 - tol), "no descent from {:?}", p.coords_f64()),
        }
    }
    Ok(())
}

pub fn check_scale_invariance(c: &Case) -> Result<(), TestCaseError> {
    let a = set_of(c);
    let b = critical_set(&c.f, &c.dir.scaled(3), PREC).expect("scaled critical set");
    prop_assert_eq!(a.points.len(), b.points.len());
    for (p, q) in a.points.iter().zip(&b.points) {
        prop_assert_eq!(&p.flat, &q.flat);
        prop_assert_eq!(&p.orthant, &q.orthant);
        prop_assert_eq!(p.classification, q.classification);
        for (x, y) in p.coords_f64().iter().zip(q.coords_f64()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs(), "{} vs {}", x, y);
        }
    }
    Ok(())
}

pub fn check_hessian(c: &Case) -> Result<(), TestCaseError> {
    let set = set_of(c);
    let d = c.f.nvars;
    for p in set.points.iter().filter(|p| !p.stratum.is_empty() && p.stratum.len() < d) {
        for comp in valid_completions(&c.f, &p.stratum) {
            let data = saddle_data(p, &c.f, &c.dir, &comp, set.bits).unwrap();
            let fd = data.finite_difference_hessian(&p.coords_f64(), c.dir.r(), 2e-3);
            let scale = data.hessian.iter().flatten().fold(0.0f64, |m, x| m.max(x.to_f64().abs()));
            for (row, fd_row) in data.hessian.iter().zip(&fd) {
                for (x, y) in row.iter().zip(fd_row) {
                    prop_assert!((x.to_f64() - y).abs() <= 1e-8 * scale, "{} vs {}", x.to_f64(), y);
                }
            }
        }
    }
    Ok(())
}

pub fn check_completion_invariance(c: &Case) -> Result<(), TestCaseError> {
    let set = set_of(c);
    let d = c.f.nvars;
    let contributing = set.points.iter().filter(|p| {
        !p.stratum.is_empty() && p.stratum.len() < d && p.classification == Classification::Contributing
    });
    for p in contributing {
        let vals: Vec<f64> = valid_completions(&c.f, &p.stratum)
            .iter()
            .map(|comp| partial_codim_contribution_with(p, &c.f, &c.dir, comp, set.bits).unwrap().constant.to_f64().abs())
            .collect();
        for v in &vals {
            prop_assert!((v - vals[0]).abs() <= 1e-12 * vals[0], "{:?}", vals);
        }
    }
    Ok(())
}

pub fn check_planar_count(c: &Case) -> Result<(), TestCaseError> {
    let set = set_of(c);
    prop_assert_eq!(set.points.len(), bounded_pieces(&c.f.factors));
    Ok(())
}

/// `1/((1 − bz)(1 + bz))` has `a_n = b^n (1 + (−1)^n)/2`; the two dominant
/// residues must reproduce it exactly.
pub fn check_parity(b: &Rational) -> Result<(), TestCaseError> {
    let f = RationalFunction::from_parts(
        Numerator::one(1),
        vec![LinearFactor::new(vec![b.clone()], 1), LinearFactor::new(vec![-b.clone()], 1)],
    );
    let dir = Direction::new(vec![1]).unwrap();
    let rep = assemble(&f, &dir, &AssembleOptions::default()).unwrap();
    prop_assert_eq!(rep.dominant.len(), 2);
    let seq = ray_sequence(&f, &[1], 30).unwrap();
    for n in 1..=30usize {
        let mut pred = Rational::zero();
        for c in &rep.dominant {
            let (Value::Exact(base), Exactness::ExactPolynomial { coeffs, .. }) = (&c.base, &c.exactness) else {
                return Err(TestCaseError::fail("inexact contribution"));
            };
            let poly = coeffs.iter().rev().fold(Rational::zero(), |acc, x| acc * int(n as i64) + x);
            pred += poly * rat_pow(base, n as i64);
        }
        let want = if n % 2 == 0 { rat_pow(b, n as i64) } else { int(0) };
        prop_assert_eq!(&pred, &want);
        prop_assert_eq!(&seq[n - 1], &want);
    }
    Ok(())
}
