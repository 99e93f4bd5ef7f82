//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Solves `a x = b`. Free variables are set to zero. Returns `None` when the
/// system is inconsistent.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

pub fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn small_systems() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(solve(&a, &[int(3), int(5)]).unwrap(), vec![ratio(4, 5), ratio(7, 5)]);
        let singular = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert_eq!(solve(&singular, &[int(1), int(2)]).unwrap(), vec![int(1), int(0)]);
        assert!(solve(&singular, &[int(1), int(3)]).is_none());
        assert_eq!(solve(&identity(3), &[int(1), int(2), int(3)]).unwrap(), vec![int(1), int(2), int(3)]);
    }

    proptest! {
        #[test]
        fn solution_satisfies_system(entries in proptest::collection::vec(-5i64..5, 12), xs in proptest::collection::vec(-5i64..5, 4)) {
            let a: Vec<Vec<Rational>> = entries.chunks(4).map(|r| r.iter().map(|&v| int(v)).collect()).collect();
            let x0: Vec<Rational> = xs.iter().map(|&v| int(v)).collect();
            let b: Vec<Rational> = a.iter().map(|r| r.iter().zip(&x0).map(|(p, q)| p * q).sum()).collect();
            let x = solve(&a, &b).expect("consistent by construction");
            for (row, rhs) in a.iter().zip(&b) {
                let lhs: Rational = row.iter().zip(&x).map(|(p, q)| p * q).sum();
                prop_assert_eq!(&lhs, rhs);
            }
        }
    }
}
