//! Small dense helpers for symmetric positive definite systems.

use crate::scalar::Real;

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn mat_vec<T: Real>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub(crate) fn quad_form<T: Real>(m: &[Vec<T>], v: &[T]) -> T {
    dot(v, &mat_vec(m, v))
}

pub(crate) fn trace<T: Real>(m: &[Vec<T>]) -> T {
    (0..m.len()).fold(T::zero(), |acc, i| acc + m[i][i])
}

/// Lower Cholesky factor, or `None` when a pivot is not safely positive.
pub(crate) fn cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let max_diag = (0..n).fold(T::zero(), |m, i| m.max(a[i][i].abs()));
    let floor = max_diag * T::epsilon() * T::lit(64.0);
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = (0..j).fold(a[i][j], |acc, k| acc - l[i][k] * l[j][k]);
            if i == j {
                if !(s > floor) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
pub(crate) fn cho_solve<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        y[i] = (0..i).fold(b[i], |acc, k| acc - l[i][k] * y[k]) / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        x[i] = (i + 1..n).fold(y[i], |acc, k| acc - l[k][i] * x[k]) / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a: Vec<Vec<f64>> = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]];
        let l = cholesky(&a).unwrap();
        let x = cho_solve(&l, &[1.0, 2.0, 3.0]);
        let back = mat_vec(&a, &x);
        for (u, v) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-14);
        }
        assert_eq!(trace(&a), 9.0);
    }

    #[test]
    fn rejects_singular() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(cholesky(&a).is_none());
        assert!(cholesky(&[vec![-1.0]]).is_none());
    }
}
