//! Small dense linear algebra. Every matrix in this crate is tiny (the rank
//! r of the horizontal layer, or one layer dimension), so the solvers below
//! are plain textbook routines rather than an external dependency.

use crate::scalar::Scalar;

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

/// x += c * y
pub(crate) fn axpy<S: Scalar>(x: &mut [S], c: S, y: &[S]) {
    debug_assert_eq!(x.len(), y.len());
    for (xi, &yi) in x.iter_mut().zip(y) {
        *xi = *xi + c * yi;
    }
}

/// Eigenvalues (ascending) and matching unit eigenvectors of a symmetric
/// matrix, by cyclic Jacobi rotations. Off-diagonal mass is driven below
/// `tol * max(1, ||A||_F)`; convergence is quadratic, and 30 sweeps is far
/// beyond what matrices of this size need.
pub(crate) fn sym_eigen<S: Scalar>(a: &[Vec<S>], tol: S) -> (Vec<S>, Vec<Vec<S>>) {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut v: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect();

    let fro = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(S::zero(), |acc, &x| acc + x * x)
        .sqrt();
    let stop = tol * S::one().max(fro);

    for _sweep in 0..30 {
        let mut off = S::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + m[i][j] * m[i][j];
            }
        }
        if (off + off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() == S::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (S::of(2.0) * m[p][q]);
                let t = {
                    let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                    sign / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix.
/// The 2x2 case is closed form (and exact on diagonal matrices); larger
/// matrices go through the Jacobi routine.
pub(crate) fn smallest_eigenpair<S: Scalar>(a: &[Vec<S>], tol: S) -> (S, Vec<S>) {
    let n = a.len();
    assert!(n >= 1, "empty matrix");
    if n == 1 {
        return (a[0][0], vec![S::one()]);
    }
    if n == 2 {
        let (p, b, q) = (a[0][0], a[0][1], a[1][1]);
        if b == S::zero() {
            return if p <= q {
                (p, vec![S::one(), S::zero()])
            } else {
                (q, vec![S::zero(), S::one()])
            };
        }
        let mean = (p + q) / S::of(2.0);
        let half_gap = (p - q) / S::of(2.0);
        let disc = (half_gap * half_gap + b * b).sqrt();
        let lam = mean - disc;
        // Pick the better-conditioned of the two equivalent eigenvector forms.
        let v = if (lam - p).abs() > (lam - q).abs() {
            vec![b, lam - p]
        } else {
            vec![lam - q, b]
        };
        let s = norm(&v);
        return (lam, vec![v[0] / s, v[1] / s]);
    }
    let (values, vectors) = sym_eigen(a, tol);
    (values[0], vectors[0].clone())
}

/// Determinant by LU with partial pivoting.
pub(crate) fn det<S: Scalar>(a: &[Vec<S>]) -> S {
    let n = a.len();
    match n {
        0 => return S::one(),
        1 => return a[0][0],
        2 => return a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        }
        _ => {}
    }
    let mut m = a.to_vec();
    let mut d = S::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).expect("finite"))
            .expect("nonempty");
        if m[pivot][col] == S::zero() {
            return S::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            d = -d;
        }
        d = d * m[col][col];
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] = m[row][k] - f * v;
            }
        }
    }
    d
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Returns `None` when A is numerically singular.
pub(crate) fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = a.len();
    debug_assert_eq!(b.len(), n);
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).expect("finite"))
            .expect("nonempty");
        let scale = m
            .iter()
            .flat_map(|r| r[..n].iter())
            .fold(S::zero(), |acc, &x| acc.max(x.abs()));
        if m[pivot][col].abs() <= S::of(1e-14) * S::one().max(scale) {
            return None;
        }
        m.swap(pivot, col);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[row][k] = m[row][k] - f * v;
            }
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in (row + 1)..n {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Inverse via `solve` against the identity columns.
pub(crate) fn invert<S: Scalar>(a: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![S::zero(); n];
        e[j] = S::one();
        cols.push(solve(a, &e)?);
    }
    // cols[j] is the j-th column of the inverse; transpose into rows.
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Minimum-norm solution of the underdetermined system M x = b
/// (M has full row rank when the map is onto): x = M^T (M M^T)^{-1} b.
/// Returns `None` when M M^T is singular, i.e. the map is not onto.
pub(crate) fn min_norm_solution<S: Scalar>(m: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let rows = m.len();
    debug_assert_eq!(b.len(), rows);
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut gram = vec![vec![S::zero(); rows]; rows];
    for i in 0..rows {
        for j in 0..rows {
            gram[i][j] = dot(&m[i], &m[j]);
        }
    }
    let y = solve(&gram, b)?;
    let mut x = vec![S::zero(); cols];
    for (i, &yi) in y.iter().enumerate() {
        axpy(&mut x, yi, &m[i]);
    }
    Some(x)
}
