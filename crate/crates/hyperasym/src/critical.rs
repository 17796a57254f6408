//! Critical points of the height function on each flat and orthant, their
//! cone coefficients and classification.

use crate::arrangement::{enumerate_flats, is_simple, Arrangement, Flat, LinearFactor, RationalFunction, Simplicity};
use crate::exact::{
    dot, maximize, rat_to_f64, CertifiedReal, RatMatrix, RatVector, Rational, DEFAULT_BITS, MAX_BITS,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CriticalError {
    #[error("direction entries must be positive integers")]
    BadDirection,
    #[error("arrangement is not simple (witness factors {witness:?})")]
    NotSimple { witness: Vec<usize> },
    #[error("Newton iteration failed on flat {flat:?}, orthant {orthant:?}: {detail}")]
    NewtonFailed {
        flat: Vec<usize>,
        orthant: Vec<i8>,
        detail: String,
    },
    #[error("undecidable at {bits} bits: {what}")]
    Undecidable { what: String, bits: u32 },
    #[error("point has a zero coordinate")]
    ZeroCoordinate,
}

/// Working and maximal precision in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub bits: u32,
    pub max_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            bits: DEFAULT_BITS,
            max_bits: MAX_BITS,
        }
    }
}

/// Positive integer ray direction `r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Direction {
    r: Vec<u64>,
}

impl Direction {
    pub fn new(r: Vec<u64>) -> Result<Self, CriticalError> {
        if r.is_empty() || r.contains(&0) {
            return Err(CriticalError::BadDirection);
        }
        Ok(Direction { r })
    }

    pub fn r(&self) -> &[u64] {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn norm(&self) -> u64 {
        self.r.iter().sum()
    }

    pub fn as_rationals(&self) -> RatVector {
        self.r.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()
    }

    pub fn normalized(&self) -> RatVector {
        let n = Rational::from_integer(BigInt::from(self.norm()));
        self.as_rationals().into_iter().map(|x| x / &n).collect()
    }

    pub fn scaled(&self, c: u64) -> Direction {
        Direction {
            r: self.r.iter().map(|x| x * c).collect(),
        }
    }
}

/// An exact rational or a certified enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Exact(Rational),
    Approx(CertifiedReal),
}

impl Value {
    pub fn to_certified(&self, bits: u32) -> CertifiedReal {
        match self {
            Value::Exact(q) => CertifiedReal::exact(q.clone(), bits),
            Value::Approx(c) => c.clone(),
        }
    }

    pub fn sign(&self) -> Option<i32> {
        match self {
            Value::Exact(q) => Some(crate::exact::sign_of(q)),
            Value::Approx(c) => c.sign(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => rat_to_f64(q),
            Value::Approx(c) => c.to_f64(),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Approx(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrthantStatus {
    Empty,
    /// Non-empty with a recession direction; carries an interior point.
    Unbounded(RatVector),
    /// Non-empty and bounded; carries an interior point.
    Bounded(RatVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Contributing,
    NonContributing,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPoint {
    pub coords: Vec<Value>,
    /// Owning flat (zero-based factor indices).
    pub flat: Vec<usize>,
    pub orthant: Vec<i8>,
    /// All factors vanishing at the point.
    pub stratum: Vec<usize>,
    pub height: CertifiedReal,
    /// `σ^{-r}` when the point is rational.
    pub base: Option<Rational>,
    /// One entry per member of `stratum`, solving `Σ λ_j b_j = r/σ`.
    pub lambda: Vec<Value>,
    pub classification: Classification,
    /// The point lies on a hyperplane outside its owning flat.
    pub cross_flat: bool,
    pub newton_iterations: usize,
}

impl CriticalPoint {
    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(|v| v.as_exact().is_some())
    }

    pub fn exact_coords(&self) -> Option<RatVector> {
        self.coords.iter().map(|v| v.as_exact().cloned()).collect()
    }

    pub fn certified_coords(&self, bits: u32) -> Vec<CertifiedReal> {
        self.coords.iter().map(|v| v.to_certified(bits)).collect()
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Value::to_f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalSet {
    pub arrangement: Arrangement,
    /// Sorted by descending height.
    pub points: Vec<CriticalPoint>,
    /// Height classes as index lists into `points`, highest first.
    pub classes: Vec<Vec<usize>>,
    pub generic: bool,
    pub bits: u32,
}

/// `h(z) = −Σ r̂_j log|z_j|`.
pub fn height(point: &[Value], dir: &Direction, bits: u32) -> Result<CertifiedReal, CriticalError> {
    let rh = dir.normalized();
    let mut h = CertifiedReal::zero(bits);
    for (z, w) in point.iter().zip(&rh) {
        let a = z.to_certified(bits).abs();
        let l = a.ln().ok_or(CriticalError::ZeroCoordinate)?;
        h = h.sub(&l.mul_rational(w));
    }
    Ok(h)
}

/// Exact `σ^{-r}` for a rational point.
pub fn exact_base(sigma: &[Rational], dir: &Direction) -> Rational {
    sigma
        .iter()
        .zip(dir.r())
        .fold(Rational::one(), |acc, (s, &k)| acc * crate::exact::rat_pow(s, -(k as i64)))
}

fn kernel_matrix(flat: &Flat, d: usize) -> Vec<RatVector> {
    // rows j of N (d × k)
    (0..d)
        .map(|j| flat.kernel.iter().map(|v| v[j].clone()).collect())
        .collect()
}

fn point_at(flat: &Flat, t: &[Rational]) -> RatVector {
    let d = flat.point.len();
    (0..d)
        .map(|j| &flat.point[j] + flat.kernel.iter().zip(t).map(|(v, ti)| &v[j] * ti).fold(Rational::zero(), |a, b| a + b))
        .collect()
}

/// Interior point in flat parameters, or `None` if the orthant misses the flat.
fn interior_parameters(flat: &Flat, orthant: &[i8]) -> Option<RatVector> {
    let d = flat.point.len();
    let k = flat.kernel.len();
    if k == 0 {
        let ok = flat
            .point
            .iter()
            .zip(orthant)
            .all(|(z, &e)| crate::exact::sign_of(z) == e as i32);
        return ok.then(Vec::new);
    }
    let n = kernel_matrix(flat, d);
    // variables (t, s): maximize s subject to s − ε_j z_j(t) ≤ 0, s ≤ 1
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..d {
        let e = Rational::from_integer(BigInt::from(orthant[j]));
        let mut row: RatVector = n[j].iter().map(|x| -(x * &e)).collect();
        row.push(Rational::one());
        a.push(row);
        b.push(&e * &flat.point[j]);
    }
    let mut top = vec![Rational::zero(); k];
    top.push(Rational::one());
    a.push(top);
    b.push(Rational::one());
    let mut c = vec![Rational::zero(); k];
    c.push(Rational::one());
    let (val, x) = maximize(&a, &b, &c)?;
    val.is_positive().then(|| x[..k].to_vec())
}

fn has_recession(flat: &Flat, orthant: &[i8]) -> bool {
    let d = flat.point.len();
    let k = flat.kernel.len();
    if k == 0 {
        return false;
    }
    let n = kernel_matrix(flat, d);
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut total = vec![Rational::zero(); k];
    for j in 0..d {
        let e = Rational::from_integer(BigInt::from(orthant[j]));
        let row: RatVector = n[j].iter().map(|x| x * &e).collect();
        for (tt, r) in total.iter_mut().zip(&row) {
            *tt += r;
        }
        a.push(row.iter().map(|x| -x.clone()).collect());
        b.push(Rational::zero());
    }
    a.push(total.clone());
    b.push(Rational::one());
    match maximize(&a, &b, &total) {
        Some((v, _)) => v.is_positive(),
        None => false,
    }
}

/// Emptiness and boundedness of `V_S ∩ O` for an open orthant `O`.
pub fn orthant_status(flat: &Flat, orthant: &[i8]) -> OrthantStatus {
    match interior_parameters(flat, orthant) {
        None => OrthantStatus::Empty,
        Some(t) => {
            let z = point_at(flat, &t);
            if has_recession(flat, orthant) {
                OrthantStatus::Unbounded(z)
            } else {
                OrthantStatus::Bounded(z)
            }
        }
    }
}

pub fn all_orthants(d: usize) -> Vec<Vec<i8>> {
    (0..(1usize << d))
        .map(|mask| {
            (0..d)
                .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

// ---------- numeric minimization ----------

fn solve_f64(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in (c + 1)..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

struct FlatObjective {
    z0: Vec<f64>,
    n: Vec<Vec<f64>>,
    r: Vec<f64>,
    orthant: Vec<i8>,
}

impl FlatObjective {
    fn z(&self, t: &[f64]) -> Vec<f64> {
        self.z0
            .iter()
            .zip(&self.n)
            .map(|(z, row)| z + row.iter().zip(t).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn inside(&self, z: &[f64]) -> bool {
        z.iter().zip(&self.orthant).all(|(x, &e)| x * e as f64 > 0.0)
    }

    fn value(&self, z: &[f64]) -> f64 {
        -z.iter().zip(&self.r).map(|(x, r)| r * x.abs().ln()).sum::<f64>()
    }

    fn grad_hess(&self, z: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.n.first().map_or(0, |r| r.len());
        let mut g = vec![0.0; k];
        let mut h = vec![vec![0.0; k]; k];
        for j in 0..z.len() {
            for a in 0..k {
                g[a] -= self.r[j] * self.n[j][a] / z[j];
                for b in 0..k {
                    h[a][b] += self.r[j] * self.n[j][a] * self.n[j][b] / (z[j] * z[j]);
                }
            }
        }
        (g, h)
    }
}

/// Damped Newton in double precision; returns parameters and iteration count.
fn newton_f64(obj: &FlatObjective, t0: Vec<f64>) -> Result<(Vec<f64>, usize), String> {
    let mut t = t0;
    let mut z = obj.z(&t);
    let mut val = obj.value(&z);
    for it in 0..200 {
        let (g, h) = obj.grad_hess(&z);
        let step = solve_f64(h, g.iter().map(|x| -x).collect()).ok_or("singular Hessian")?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=10 {
            let tn: Vec<f64> = t.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let zn = obj.z(&tn);
            if obj.inside(&zn) {
                let vn = obj.value(&zn);
                if vn <= val + 1e-14 * val.abs().max(1.0) {
                    let small = step
                        .iter()
                        .zip(&t)
                        .all(|(s, x)| (alpha * s).abs() <= 1e-15 * x.abs().max(1.0));
                    t = tn;
                    z = zn;
                    val = vn;
                    accepted = true;
                    if small || alpha == 1.0 && step.iter().all(|s| s.abs() < 1e-13) {
                        return Ok((t, it + 1));
                    }
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // no admissible decrease: the point is numerically converged
            return Ok((t, it + 1));
        }
    }
    Err("iteration cap reached".into())
}

fn round_to_bits(q: &Rational, bits: u32) -> Rational {
    CertifiedReal::from_rational(q, bits).lo().clone()
}

fn f64_to_rational(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Exact gradient and Hessian of `−Σ r_j log|z_j|` in flat parameters.
fn exact_grad_hess(z: &[Rational], n: &[RatVector], r: &[Rational]) -> (RatVector, RatMatrix) {
    let k = n.first().map_or(0, |row| row.len());
    let mut g = vec![Rational::zero(); k];
    let mut h = RatMatrix::zeros(k, k);
    for j in 0..z.len() {
        let inv = z[j].recip();
        let w = &r[j] * &inv;
        let w2 = &w * &inv;
        for a in 0..k {
            g[a] -= &w * &n[j][a];
            for b in 0..k {
                h[(a, b)] += &w2 * &n[j][a] * &n[j][b];
            }
        }
    }
    (g, h)
}

/// Continued-fraction reconstruction with denominator at most `2^max_den_bits`.
fn reconstruct(x: &Rational, max_den_bits: u64) -> Rational {
    let limit = BigInt::one() << max_den_bits;
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut rem = x.clone();
    let mut best = Rational::from_integer(x.floor().to_integer());
    for _ in 0..200 {
        let a = rem.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > limit {
            break;
        }
        best = Rational::new(p2.clone(), q2.clone());
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    best
}

/// Checks that a rational point is the critical point of the flat in the orthant.
fn verify_exact_critical(z: &[Rational], flat: &Flat, factors: &[LinearFactor], dir: &Direction, orthant: &[i8]) -> bool {
    if z.iter().zip(orthant).any(|(x, &e)| crate::exact::sign_of(x) != e as i32) {
        return false;
    }
    if !flat.contains(z, factors) {
        return false;
    }
    let rhs: RatVector = dir.as_rationals().iter().zip(z).map(|(r, x)| r / x).collect();
    flat.matrix.transpose().solve_unique(&rhs).is_some()
}

struct Located {
    coords: Vec<Value>,
    iterations: usize,
}

fn locate(
    arr: &Arrangement,
    flat: &Flat,
    orthant: &[i8],
    start: &[Rational],
    dir: &Direction,
    bits: u32,
) -> Result<Located, CriticalError> {
    let d = arr.nvars;
    let fail = |detail: String| CriticalError::NewtonFailed {
        flat: flat.set.clone(),
        orthant: orthant.to_vec(),
        detail,
    };
    if flat.kernel.is_empty() {
        return Ok(Located {
            coords: flat.point.iter().cloned().map(Value::Exact).collect(),
            iterations: 0,
        });
    }
    // A single hyperplane has its critical point at r_j / (|r| b_j).
    if flat.set.len() == 1 && flat.dim + 1 == d {
        let b = &arr.factors[flat.set[0]].b;
        if b.iter().all(|x| !x.is_zero()) {
            let norm = Rational::from_integer(BigInt::from(dir.norm()));
            let z: RatVector = dir.as_rationals().iter().zip(b).map(|(r, bj)| r / (&norm * bj)).collect();
            if verify_exact_critical(&z, flat, &arr.factors, dir, orthant) {
                return Ok(Located {
                    coords: z.into_iter().map(Value::Exact).collect(),
                    iterations: 0,
                });
            }
        }
    }
    let nmat = kernel_matrix(flat, d);
    let r = dir.as_rationals();
    // parameters of the start point
    let ker = RatMatrix::from_columns(&flat.kernel);
    let diff: RatVector = start.iter().zip(&flat.point).map(|(a, b)| a - b).collect();
    let t_start = match ker.solve(&diff).map_err(|e| fail(e.to_string()))? {
        crate::exact::SolveResult::Unique(t) => t,
        _ => return Err(fail("start point not on flat".into())),
    };
    let obj = FlatObjective {
        z0: flat.point.iter().map(rat_to_f64).collect(),
        n: nmat.iter().map(|row| row.iter().map(rat_to_f64).collect()).collect(),
        r: r.iter().map(rat_to_f64).collect(),
        orthant: orthant.to_vec(),
    };
    let (tf, mut iters) = newton_f64(&obj, t_start.iter().map(rat_to_f64).collect()).map_err(fail)?;
    // refine in exact arithmetic with rounding to the working precision
    let work = bits + 32;
    let mut t: RatVector = tf.iter().map(|&x| f64_to_rational(x)).collect();
    if !obj.inside(&obj.z(&tf)) {
        t = t_start.clone();
    }
    let tol = Rational::new(BigInt::one(), BigInt::one() << (bits as u64 + 8));
    let mut converged = false;
    for _ in 0..60 {
        iters += 1;
        let z = point_at(flat, &t);
        let (g, h) = exact_grad_hess(&z, &nmat, &r);
        let step = h
            .solve_unique(&g.iter().map(|x| -x.clone()).collect::<Vec<_>>())
            .ok_or_else(|| fail("singular Hessian in refinement".into()))?;
        let mut alpha = Rational::one();
        let mut moved = false;
        for _ in 0..=10 {
            let tn: RatVector = t.iter().zip(&step).map(|(a, s)| round_to_bits(&(a + &alpha * s), work)).collect();
            let zn = point_at(flat, &tn);
            if zn.iter().zip(orthant).all(|(x, &e)| crate::exact::sign_of(x) == e as i32) {
                t = tn;
                moved = true;
                break;
            }
            alpha /= Rational::from_integer(BigInt::from(2));
        }
        if !moved {
            return Err(fail("damping exhausted in refinement".into()));
        }
        let size = step.iter().map(|s| s.abs()).max().unwrap_or_else(Rational::zero);
        if alpha.is_one() && size < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail("refinement did not converge".into()));
    }
    // exact rational critical points are recognized and verified
    let zt = point_at(flat, &t);
    let guess: RatVector = zt.iter().map(|x| reconstruct(x, (bits / 4) as u64)).collect();
    if verify_exact_critical(&guess, flat, &arr.factors, dir, orthant) {
        return Ok(Located {
            coords: guess.into_iter().map(Value::Exact).collect(),
            iterations: iters,
        });
    }
    let enc = krawczyk(&t, flat, &nmat, &r, bits).ok_or_else(|| fail("interval Newton failed to contract".into()))?;
    let coords = (0..d)
        .map(|j| {
            let mut acc = CertifiedReal::exact(flat.point[j].clone(), work);
            for (a, ta) in enc.iter().enumerate() {
                acc = acc.add(&ta.mul_rational(&nmat[j][a]));
            }
            Value::Approx(acc.with_bits(bits))
        })
        .collect();
    Ok(Located {
        coords,
        iterations: iters,
    })
}

/// Krawczyk test around `t`; returns a certified box holding the unique zero
/// of the gradient.
fn krawczyk(t: &[Rational], flat: &Flat, nmat: &[RatVector], r: &[Rational], bits: u32) -> Option<Vec<CertifiedReal>> {
    let k = t.len();
    let d = nmat.len();
    let work = bits + 64;
    let z = point_at(flat, t);
    let (g, h) = exact_grad_hess(&z, nmat, r);
    let y = h.inverse().ok()?;
    let y: Vec<RatVector> = y.rows_vec().iter().map(|row| row.iter().map(|q| round_to_bits(q, work)).collect()).collect();
    let delta: RatVector = y.iter().map(|row| dot(row, &g)).collect();
    let scale = t.iter().map(|x| x.abs()).fold(Rational::one(), |a, b| if b > a { b } else { a });
    let mut rho = &scale * Rational::new(BigInt::one(), BigInt::one() << (bits as u64 / 2));
    let dmax = delta.iter().map(|x| x.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a });
    if &dmax * Rational::from_integer(BigInt::from(16)) > rho {
        rho = &dmax * Rational::from_integer(BigInt::from(16));
    }
    let mut xbox: Vec<CertifiedReal> = t
        .iter()
        .map(|ti| CertifiedReal::from_bounds(ti - &rho, ti + &rho, work))
        .collect();
    let mut certified = false;
    for round in 0..3 {
        // Hessian over the box
        let zbox: Vec<CertifiedReal> = (0..d)
            .map(|j| {
                let mut acc = CertifiedReal::exact(flat.point[j].clone(), work);
                for a in 0..k {
                    acc = acc.add(&xbox[a].mul_rational(&nmat[j][a]));
                }
                acc
            })
            .collect();
        let mut hbox = vec![vec![CertifiedReal::zero(work); k]; k];
        for j in 0..d {
            let inv2 = zbox[j].square().recip()?;
            let w = inv2.mul_rational(&r[j]);
            for a in 0..k {
                for b in 0..k {
                    let c = &nmat[j][a] * &nmat[j][b];
                    if !c.is_zero() {
                        hbox[a][b] = hbox[a][b].add(&w.mul_rational(&c));
                    }
                }
            }
        }
        // K = t − Y g + (I − Y H(X)) (X − t)
        let mut kbox = Vec::with_capacity(k);
        for a in 0..k {
            let mut acc = CertifiedReal::exact(&t[a] - &delta[a], work);
            for b in 0..k {
                let mut m = if a == b {
                    CertifiedReal::one(work)
                } else {
                    CertifiedReal::zero(work)
                };
                for c in 0..k {
                    m = m.sub(&hbox[c][b].mul_rational(&y[a][c]));
                }
                let dx = xbox[b].add_rational(&-t[b].clone());
                acc = acc.add(&m.mul(&dx));
            }
            kbox.push(acc);
        }
        let inside = kbox.iter().zip(&xbox).all(|(kb, xb)| kb.strictly_inside(xb));
        if inside {
            certified = true;
        } else if round == 0 {
            return None;
        }
        if certified {
            let tighter: Vec<CertifiedReal> = kbox
                .iter()
                .zip(&xbox)
                .map(|(kb, xb)| kb.intersect(xb).unwrap_or_else(|| kb.clone()))
                .collect();
            if !inside {
                break;
            }
            xbox = tighter;
        }
    }
    certified.then_some(xbox)
}

/// Cone coefficients and classification of a located point.
pub struct Classified {
    pub stratum: Vec<usize>,
    pub lambda: Vec<Value>,
    pub classification: Classification,
    pub cross_flat: bool,
}

pub fn classify_point(
    coords: &[Value],
    flat: &[usize],
    factors: &[LinearFactor],
    dir: &Direction,
    bits: u32,
) -> Result<Classified, CriticalError> {
    let d = coords.len();
    let exact: Option<RatVector> = coords.iter().map(|v| v.as_exact().cloned()).collect();
    // lowest stratum
    let mut stratum = flat.to_vec();
    for (k, f) in factors.iter().enumerate() {
        if flat.contains(&k) {
            continue;
        }
        let vanishes = match &exact {
            Some(z) => f.eval(z).is_zero(),
            None => {
                let mut acc = CertifiedReal::one(bits);
                for (c, zj) in f.b.iter().zip(coords) {
                    acc = acc.sub(&zj.to_certified(bits).mul_rational(c));
                }
                match acc.sign() {
                    Some(0) => true,
                    Some(_) => false,
                    None => {
                        return Err(CriticalError::Undecidable {
                            what: format!("whether factor {} vanishes at the point", k + 1),
                            bits,
                        })
                    }
                }
            }
        };
        if vanishes {
            stratum.push(k);
        }
    }
    stratum.sort_unstable();
    let cross_flat = stratum.len() != flat.len();
    let bmat = RatMatrix::from_rows(stratum.iter().map(|&k| factors[k].b.clone()).collect());
    let r = dir.as_rationals();
    let dependent = bmat.rank() < stratum.len();
    if dependent {
        // normals through the point are dependent: test cone membership directly
        let z = exact.as_ref().ok_or_else(|| CriticalError::NotSimple {
            witness: stratum.clone(),
        })?;
        let v: RatVector = r.iter().zip(z).map(|(a, b)| a / b).collect();
        let (lambda, classification) = cone_membership(&bmat, &v);
        return Ok(Classified {
            stratum,
            lambda: lambda.into_iter().map(Value::Exact).collect(),
            classification,
            cross_flat,
        });
    }
    let lambda: Vec<Value> = match &exact {
        Some(z) => {
            let rhs: RatVector = r.iter().zip(z).map(|(a, b)| a / b).collect();
            let l = bmat.transpose().solve_unique(&rhs).ok_or_else(|| CriticalError::Undecidable {
                what: "cone coefficients are not unique or inconsistent".into(),
                bits,
            })?;
            l.into_iter().map(Value::Exact).collect()
        }
        None => {
            let s = stratum.len();
            let bt = bmat.transpose(); // d × s
            let rows = pick_independent_rows(&bt, s, d).ok_or_else(|| CriticalError::Undecidable {
                what: "degenerate normals".into(),
                bits,
            })?;
            let inv = bt.select_rows(&rows).inverse().expect("independent rows");
            let rhs: Vec<CertifiedReal> = rows
                .iter()
                .map(|&j| {
                    coords[j]
                        .to_certified(bits)
                        .recip()
                        .expect("non-zero coordinate")
                        .mul_rational(&r[j])
                })
                .collect();
            (0..s)
                .map(|a| {
                    let mut acc = CertifiedReal::zero(bits);
                    for (b, v) in rhs.iter().enumerate() {
                        acc = acc.add(&v.mul_rational(&inv[(a, b)]));
                    }
                    Value::Approx(acc)
                })
                .collect()
        }
    };
    let mut any_neg = false;
    let mut any_zero = false;
    for (i, l) in lambda.iter().enumerate() {
        match l.sign() {
            Some(1) => {}
            Some(-1) => any_neg = true,
            Some(_) => any_zero = true,
            None => {
                return Err(CriticalError::Undecidable {
                    what: format!("sign of cone coefficient for factor {}", stratum[i] + 1),
                    bits,
                })
            }
        }
    }
    let classification = if any_neg {
        Classification::NonContributing
    } else if any_zero {
        Classification::Boundary
    } else {
        Classification::Contributing
    };
    Ok(Classified {
        stratum,
        lambda,
        classification,
        cross_flat,
    })
}

/// Classifies `v` against the cone spanned by the rows of `b` when the rows
/// are dependent, returning a witness combination with the largest minimum.
fn cone_membership(b: &RatMatrix, v: &[Rational]) -> (RatVector, Classification) {
    let s = b.nrows();
    let d = b.ncols();
    // variables (λ, m): Bᵀλ = v, m − λ_j ≤ 0, m ≤ 1; maximize m
    let mut a = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..d {
        let mut row: RatVector = (0..s).map(|k| b[(k, j)].clone()).collect();
        row.push(Rational::zero());
        a.push(row.iter().map(|x| -x.clone()).collect());
        rhs.push(-v[j].clone());
        a.push(row);
        rhs.push(v[j].clone());
    }
    for k in 0..s {
        let mut row = vec![Rational::zero(); s + 1];
        row[k] = -Rational::one();
        row[s] = Rational::one();
        a.push(row);
        rhs.push(Rational::zero());
    }
    let mut top = vec![Rational::zero(); s + 1];
    top[s] = Rational::one();
    a.push(top.clone());
    rhs.push(Rational::one());
    match maximize(&a, &rhs, &top) {
        Some((m, x)) => {
            let class = match crate::exact::sign_of(&m) {
                1 => Classification::Contributing,
                0 => Classification::Boundary,
                _ => Classification::NonContributing,
            };
            (x[..s].to_vec(), class)
        }
        None => (Vec::new(), Classification::NonContributing),
    }
}

fn pick_independent_rows(m: &RatMatrix, s: usize, d: usize) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..d {
        let mut trial = chosen.clone();
        trial.push(j);
        if m.select_rows(&trial).rank() == trial.len() {
            chosen = trial;
            if chosen.len() == s {
                return Some(chosen);
            }
        }
    }
    (s == 0).then(Vec::new)
}

/// The unique critical point of `h` on `V_S ∩ O` (the orthant must be bounded).
pub fn critical_point(
    arr: &Arrangement,
    flat: &Flat,
    orthant: &[i8],
    interior: &[Rational],
    dir: &Direction,
    bits: u32,
) -> Result<CriticalPoint, CriticalError> {
    let loc = locate(arr, flat, orthant, interior, dir, bits)?;
    let cl = classify_point(&loc.coords, &flat.set, &arr.factors, dir, bits)?;
    let height = height(&loc.coords, dir, bits)?;
    let base = loc
        .coords
        .iter()
        .map(|v| v.as_exact().cloned())
        .collect::<Option<RatVector>>()
        .map(|z| exact_base(&z, dir));
    Ok(CriticalPoint {
        coords: loc.coords,
        flat: flat.set.clone(),
        orthant: orthant.to_vec(),
        stratum: cl.stratum,
        height,
        base,
        lambda: cl.lambda,
        classification: cl.classification,
        cross_flat: cl.cross_flat,
        newton_iterations: loc.iterations,
    })
}

fn compare_heights(a: &CriticalPoint, b: &CriticalPoint) -> Option<Ordering> {
    if let (Some(x), Some(y)) = (&a.base, &b.base) {
        return Some(x.abs().cmp(&y.abs()));
    }
    a.height.compare(&b.height)
}

fn compute_set(arr: &Arrangement, dir: &Direction, bits: u32) -> Result<Vec<CriticalPoint>, CriticalError> {
    let mut out = Vec::new();
    for flat in &arr.flats {
        for o in all_orthants(arr.nvars) {
            if let OrthantStatus::Bounded(z) = orthant_status(flat, &o) {
                out.push(critical_point(arr, flat, &o, &z, dir, bits)?);
            }
        }
    }
    Ok(out)
}

/// All critical points of a simple function's arrangement, sorted by
/// descending height and grouped into height classes.
pub fn critical_set(f: &RationalFunction, dir: &Direction, prec: Precision) -> Result<CriticalSet, CriticalError> {
    if dir.dim() != f.nvars {
        return Err(CriticalError::BadDirection);
    }
    let arr = enumerate_flats(&f.factors);
    if let Simplicity::NotSimple { witness, .. } = is_simple(&arr) {
        return Err(CriticalError::NotSimple { witness });
    }
    critical_set_of(arr, dir, prec)
}

/// Like [`critical_set`] but accepts non-simple arrangements. Points whose
/// vanishing normals are dependent must be rational; they are classified by
/// exact cone membership.
pub fn critical_set_relaxed(f: &RationalFunction, dir: &Direction, prec: Precision) -> Result<CriticalSet, CriticalError> {
    if dir.dim() != f.nvars {
        return Err(CriticalError::BadDirection);
    }
    critical_set_of(enumerate_flats(&f.factors), dir, prec)
}

pub fn critical_set_of(arr: Arrangement, dir: &Direction, prec: Precision) -> Result<CriticalSet, CriticalError> {
    let mut bits = prec.bits;
    loop {
        let attempt = compute_set(&arr, dir, bits).and_then(|pts| group(pts, bits, bits >= prec.max_bits));
        match attempt {
            Ok((points, classes)) => {
                let generic = points
                    .iter()
                    .all(|p| p.classification != Classification::Boundary && !p.cross_flat);
                return Ok(CriticalSet {
                    arrangement: arr,
                    points,
                    classes,
                    generic,
                    bits,
                });
            }
            Err(CriticalError::Undecidable { .. } | CriticalError::NewtonFailed { .. }) if bits < prec.max_bits => {
                bits = (bits * 2).min(prec.max_bits);
            }
            // certification still fails at the cap
            Err(CriticalError::NewtonFailed { flat, orthant, detail }) => {
                return Err(CriticalError::Undecidable {
                    what: format!("flat {flat:?}, orthant {orthant:?}: {detail}"),
                    bits,
                })
            }
            Err(e) => return Err(e),
        }
    }
}

#[allow(clippy::type_complexity)]
fn group(mut pts: Vec<CriticalPoint>, bits: u32, at_cap: bool) -> Result<(Vec<CriticalPoint>, Vec<Vec<usize>>), CriticalError> {
    pts.sort_by(|a, b| {
        compare_heights(b, a)
            .unwrap_or_else(|| rat_to_f64(&b.height.mid()).partial_cmp(&rat_to_f64(&a.height.mid())).unwrap_or(Ordering::Equal))
            .then_with(|| a.flat.cmp(&b.flat))
            .then_with(|| b.orthant.cmp(&a.orthant))
    });
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..pts.len() {
        if let Some(last) = classes.last_mut() {
            let rep = &pts[last[0]];
            match compare_heights(rep, &pts[i]) {
                Some(Ordering::Equal) => {
                    last.push(i);
                    continue;
                }
                Some(_) => {}
                None => {
                    if !at_cap {
                        return Err(CriticalError::Undecidable {
                            what: "height tie".into(),
                            bits,
                        });
                    }
                    // unresolved ties are grouped together
                    last.push(i);
                    continue;
                }
            }
        }
        classes.push(vec![i]);
    }
    Ok((pts, classes))
}

/// `h` as f64, for diagnostics.
pub fn height_f64(p: &CriticalPoint) -> f64 {
    p.height.to_f64()
}

pub fn value_to_f64(v: &Value) -> f64 {
    v.to_f64()
}

#[allow(dead_code)]
fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::tests::{lf, main_factors};
    use crate::exact::{int, rat, Numerator};

    fn dirn(r: &[u64]) -> Direction {
        Direction::new(r.to_vec()).unwrap()
    }

    fn main_fn() -> RationalFunction {
        RationalFunction::from_parts(Numerator::one(2), main_factors())
    }

    #[test]
    fn heights() {
        let d = dirn(&[1, 1]);
        let h = height(&[Value::Exact(int(1)), Value::Exact(int(1))], &d, 128).unwrap();
        assert!(h.contains(&int(0)));
        let h = height(&[Value::Exact(rat(1, 2)), Value::Exact(rat(1, 2))], &d, 128).unwrap();
        assert!((h.to_f64() - 2f64.ln()).abs() < 1e-15);
        let h = height(&[Value::Exact(rat(3, 4)), Value::Exact(rat(3, 2))], &d, 128).unwrap();
        assert!((h.to_f64() + 0.5 * (9.0f64 / 8.0).ln()).abs() < 1e-15);
        assert!(height(&[Value::Exact(int(0)), Value::Exact(int(1))], &d, 64).is_err());
    }

    #[test]
    fn orthants_of_main_example() {
        let arr = enumerate_flats(&main_factors());
        let f1 = &arr.flats[0];
        assert!(matches!(orthant_status(f1, &[1, 1]), OrthantStatus::Bounded(_)));
        assert!(matches!(orthant_status(f1, &[1, -1]), OrthantStatus::Unbounded(_)));
        assert!(matches!(orthant_status(f1, &[-1, -1]), OrthantStatus::Empty));
        let f12 = &arr.flats[2];
        assert_eq!(orthant_status(f12, &[1, 1]), OrthantStatus::Bounded(vec![int(1), int(1)]));
        for o in [[1, -1], [-1, 1], [-1, -1]] {
            assert_eq!(orthant_status(f12, &o), OrthantStatus::Empty);
        }
    }

    #[test]
    fn critical_points_of_main_example() {
        let arr = enumerate_flats(&main_factors());
        let d = dirn(&[1, 1]);
        let OrthantStatus::Bounded(z) = orthant_status(&arr.flats[0], &[1, 1]) else { panic!() };
        let p = critical_point(&arr, &arr.flats[0], &[1, 1], &z, &d, 128).unwrap();
        assert_eq!(p.exact_coords().unwrap(), vec![rat(3, 4), rat(3, 2)]);
        let d = dirn(&[5, 1]);
        let OrthantStatus::Bounded(z) = orthant_status(&arr.flats[1], &[1, 1]) else { panic!() };
        let p = critical_point(&arr, &arr.flats[1], &[1, 1], &z, &d, 128).unwrap();
        assert_eq!(p.exact_coords().unwrap(), vec![rat(5, 2), rat(1, 4)]);
    }

    #[test]
    fn classifications() {
        let f = main_fn();
        let one = [Value::Exact(int(1)), Value::Exact(int(1))];
        let c = classify_point(&one, &[0, 1], &f.factors, &dirn(&[1, 1]), 64).unwrap();
        assert_eq!(c.lambda, vec![Value::Exact(int(1)), Value::Exact(int(1))]);
        assert_eq!(c.classification, Classification::Contributing);
        let c = classify_point(&one, &[0, 1], &f.factors, &dirn(&[5, 1]), 64).unwrap();
        assert_eq!(c.classification, Classification::NonContributing);
        let c = classify_point(&one, &[0, 1], &f.factors, &dirn(&[2, 1]), 64).unwrap();
        assert_eq!(c.lambda, vec![Value::Exact(int(3)), Value::Exact(int(0))]);
        assert_eq!(c.classification, Classification::Boundary);
    }

    #[test]
    fn main_critical_set() {
        let cs = critical_set(&main_fn(), &dirn(&[1, 1]), Precision::default()).unwrap();
        assert_eq!(cs.points.len(), 3);
        assert_eq!(cs.points[0].exact_coords().unwrap(), vec![int(1), int(1)]);
        assert_eq!(cs.classes, vec![vec![0], vec![1, 2]]);
        assert!(cs.generic);
        let cs = critical_set(&main_fn(), &dirn(&[2, 1]), Precision::default()).unwrap();
        assert!(!cs.generic);
        assert!(cs
            .points
            .iter()
            .any(|p| p.classification == Classification::Boundary && p.exact_coords().unwrap() == vec![int(1), int(1)]));
    }

    #[test]
    fn compute1_critical_set() {
        let f = RationalFunction::from_parts(
            Numerator::one(2),
            vec![
                lf(&[(2, 1), (1, 1)], 1),
                lf(&[(1, 1), (2, 1)], 1),
                lf(&[(4, 1), (3, 2)], 1),
                lf(&[(2, 3), (2, 3)], 1),
            ],
        );
        assert_eq!(
            critical_set(&f, &dirn(&[1, 1]), Precision::default()),
            Err(CriticalError::NotSimple { witness: vec![0, 2, 3] })
        );
        let cs = critical_set_relaxed(&f, &dirn(&[1, 1]), Precision::default()).unwrap();
        let contributing: Vec<_> = cs
            .points
            .iter()
            .filter(|p| p.classification == Classification::Contributing)
            .collect();
        assert_eq!(contributing.len(), 5);
        assert_eq!(contributing[0].base.clone().unwrap(), int(24));
    }

    #[test]
    fn irrational_point_is_certified() {
        // two planes in 3-space meeting in a line; the critical point is algebraic
        let f = RationalFunction::from_parts(
            Numerator::one(3),
            vec![lf(&[(1, 1), (2, 1), (1, 1)], 1), lf(&[(3, 1), (1, 1), (2, 1)], 1)],
        );
        let cs = critical_set(&f, &dirn(&[1, 2, 3]), Precision::default()).unwrap();
        let line = cs.points.iter().find(|p| p.flat == vec![0, 1]).unwrap();
        let b = &f.factors;
        for c in line.certified_coords(256) {
            assert!(c.relative_width() < 1e-60);
        }
        // on both planes and critical
        let z = line.coords_f64();
        for fac in b {
            let v = 1.0 - fac.b.iter().zip(&z).map(|(x, y)| rat_to_f64(x) * y).sum::<f64>();
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_direction_same_points() {
        let f = main_fn();
        let a = critical_set(&f, &dirn(&[1, 2]), Precision::default()).unwrap();
        let b = critical_set(&f, &dirn(&[3, 6]), Precision::default()).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.coords, q.coords);
            assert_eq!(p.classification, q.classification);
        }
    }
}
