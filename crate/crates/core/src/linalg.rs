//! Small dense linear systems, exact and floating point.

use crate::rational::Rational;

/// Solve `a·x = b` exactly. Returns `None` when `a` is singular.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            debug_assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for k in col..=n {
            m[col][k] = &m[col][k] * &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for k in col..=n {
                let delta = &f * &m[col][k];
                m[r][k] -= delta;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Outcome of a floating-point solve used to screen systems before solving
/// them exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum FloatSolve {
    Solved(Vec<f64>),
    /// Pivot too small to trust.
    NearSingular,
}

/// Gaussian elimination with partial pivoting on an `n×(n+1)` augmented matrix.
pub fn solve_f64(aug: &mut [Vec<f64>]) -> FloatSolve {
    let n = aug.len();
    for col in 0..n {
        let (pivot, size) = (col..n)
            .map(|r| (r, aug[r][col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let scale = aug[pivot][..n].iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if size <= 1e-9 * scale.max(1e-300) {
            return FloatSolve::NearSingular;
        }
        aug.swap(col, pivot);
        for r in col + 1..n {
            let f = aug[r][col] / aug[col][col];
            if f != 0.0 {
                for k in col..=n {
                    aug[r][k] -= f * aug[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| aug[r][k] * x[k]).sum();
        x[r] = (aug[r][n] - s) / aug[r][r];
    }
    FloatSolve::Solved(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn exact_two_by_two() {
        // t1 = 0 and (1/2)(t2 − t1) = 1/10
        let a = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(-1, 2), rat(1, 2)]];
        let b = vec![rat(0, 1), rat(1, 10)];
        assert_eq!(solve_exact(&a, &b), Some(vec![rat(0, 1), rat(1, 5)]));
    }

    #[test]
    fn singular_is_none() {
        let a = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 1), rat(0, 1)]];
        assert_eq!(solve_exact(&a, &[rat(0, 1), rat(2, 1)]), None);
        let mut aug = vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 2.0]];
        assert_eq!(solve_f64(&mut aug), FloatSolve::NearSingular);
    }

    #[test]
    fn float_agrees_on_three_by_three() {
        let a = vec![
            vec![rat(2, 1), rat(1, 1), rat(-1, 1)],
            vec![rat(-3, 1), rat(-1, 1), rat(2, 1)],
            vec![rat(-2, 1), rat(1, 1), rat(2, 1)],
        ];
        let b = vec![rat(8, 1), rat(-11, 1), rat(-3, 1)];
        let x = solve_exact(&a, &b).unwrap();
        assert_eq!(x, vec![rat(2, 1), rat(3, 1), rat(-1, 1)]);
        let mut aug: Vec<Vec<f64>> = a
            .iter()
            .zip(&b)
            .map(|(r, v)| r.iter().chain(std::iter::once(v)).map(|q| q.to_f64()).collect())
            .collect();
        let FloatSolve::Solved(y) = solve_f64(&mut aug) else { panic!() };
        for (p, q) in x.iter().zip(y) {
            assert!((p.to_f64() - q).abs() < 1e-12);
        }
    }
}
