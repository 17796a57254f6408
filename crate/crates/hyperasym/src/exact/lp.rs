use super::{dot, RatMatrix, RatVector, Rational};
use std::cmp::Ordering;

/// Maximizes `c·x` subject to `a_i·x ≤ b_i` by enumerating vertices.
///
/// The polyhedron must be pointed and the objective bounded above on it;
/// callers add bounding constraints to guarantee this. Returns `None` when
/// infeasible. Ties between optimal vertices go to the first found.
pub fn maximize(a: &[RatVector], b: &[Rational], c: &[Rational]) -> Option<(Rational, RatVector)> {
    let k = c.len();
    let m = a.len();
    assert_eq!(b.len(), m);
    let mut best: Option<(Rational, RatVector)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 {
        return b.iter().all(|x| *x >= Rational::from_integer(0.into()))
            .then(|| (Rational::from_integer(0.into()), vec![]));
    }
    if m < k {
        return None;
    }
    loop {
        let sub = RatMatrix::from_rows(idx.iter().map(|&i| a[i].clone()).collect());
        let rhs: RatVector = idx.iter().map(|&i| b[i].clone()).collect();
        if let Some(x) = sub.solve_unique(&rhs) {
            if a.iter().zip(b).all(|(ai, bi)| dot(ai, &x) <= *bi) {
                let v = dot(c, &x);
                let better = match &best {
                    None => true,
                    Some((bv, _)) => v.cmp(bv) == Ordering::Greater,
                };
                if better {
                    best = Some((v, x));
                }
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    #[test]
    fn unit_square() {
        // max x + 2y on [0,1]^2
        let a = vec![vec![int(1), int(0)], vec![int(-1), int(0)], vec![int(0), int(1)], vec![int(0), int(-1)]];
        let b = vec![int(1), int(0), int(1), int(0)];
        let (v, x) = maximize(&a, &b, &[int(1), int(2)]).unwrap();
        assert_eq!(v, int(3));
        assert_eq!(x, vec![int(1), int(1)]);
    }

    #[test]
    fn infeasible() {
        let a = vec![vec![int(1)], vec![int(-1)]];
        let b = vec![int(-1), int(0)];
        assert!(maximize(&a, &b, &[int(1)]).is_none());
    }

    #[test]
    fn fractional_vertex() {
        // max y s.t. y ≤ 2x/3, y ≤ 1 − x
        let a = vec![vec![rat(-2, 3), int(1)], vec![int(1), int(1)], vec![int(0), int(-1)]];
        let b = vec![int(0), int(1), int(0)];
        let (v, x) = maximize(&a, &b, &[int(0), int(1)]).unwrap();
        assert_eq!(v, rat(2, 5));
        assert_eq!(x, vec![rat(3, 5), rat(2, 5)]);
    }
}
