//! Dense linear algebra over any [`Field`]: elimination, rank, null spaces,
//! solves, inverses and characteristic polynomials.

use crate::scalar::Field;

pub type Mat<S> = Vec<Vec<S>>;

pub fn zeros<S: Field>(rows: usize, cols: usize) -> Mat<S> {
    vec![vec![S::zero(); cols]; rows]
}

pub fn identity<S: Field>(n: usize) -> Mat<S> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn transpose<S: Field>(a: &Mat<S>) -> Mat<S> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect::<Vec<S>>())
        .collect()
}

pub fn mat_mul<S: Field>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out: Mat<S> = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if b[l][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][l].mul(&b[l][j]));
            }
        }
    }
    out
}

pub fn mat_sub<S: Field>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect())
        .collect()
}

pub fn mat_scale<S: Field>(a: &Mat<S>, s: &S) -> Mat<S> {
    a.iter()
        .map(|r| r.iter().map(|x| x.mul(s)).collect())
        .collect()
}

pub fn mat_vec<S: Field>(a: &Mat<S>, v: &[S]) -> Vec<S> {
    a.iter()
        .map(|r| {
            r.iter()
                .zip(v)
                .fold(S::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
        })
        .collect()
}

pub fn trace<S: Field>(a: &Mat<S>) -> S {
    (0..a.len()).fold(S::zero(), |acc, i| acc.add(&a[i][i]))
}

pub fn is_zero_mat<S: Field>(a: &Mat<S>) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Reduced row echelon form in place; returns pivot columns.
/// Exact fields pivot on the first nonzero entry, `f64` on the largest
/// entry with `tol` as the zero threshold.
pub fn rref<S: Field>(a: &mut Mat<S>, tol: f64) -> Vec<usize> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best: Option<usize> = None;
        let mut best_mag = 0.0;
        for i in r..rows {
            let mag = a[i][c].magnitude();
            let nonzero = if S::is_exact() { !a[i][c].is_zero() } else { mag > tol };
            if nonzero && (best.is_none() || (!S::is_exact() && mag > best_mag)) {
                best = Some(i);
                best_mag = mag;
                if S::is_exact() {
                    break;
                }
            }
        }
        let Some(p) = best else { continue };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("pivot is nonzero");
        for j in c..cols {
            a[r][j] = a[r][j].mul(&inv);
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                if a[r][j].is_zero() {
                    continue;
                }
                let t = f.mul(&a[r][j]);
                a[i][j] = a[i][j].sub(&t);
            }
            if !S::is_exact() {
                a[i][c] = S::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Field>(a: &Mat<S>, tol: f64) -> usize {
    let mut m = a.clone();
    rref(&mut m, tol).len()
}

/// Basis of the right null space `{x : a x = 0}`.
pub fn nullspace<S: Field>(a: &Mat<S>, cols: usize, tol: f64) -> Vec<Vec<S>> {
    let mut m = a.clone();
    let pivots = rref(&mut m, tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = m[row][f].neg();
            }
            v
        })
        .collect()
}

/// Solves `a x = b`, returning one solution (free variables zero) or `None`
/// when the system is inconsistent.
pub fn solve<S: Field>(a: &Mat<S>, b: &[S], tol: f64) -> Option<Vec<S>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Mat<S> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug, tol);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![S::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

pub fn inverse<S: Field>(a: &Mat<S>, tol: f64) -> Option<Mat<S>> {
    let n = a.len();
    let mut aug: Mat<S> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            row
        })
        .collect();
    let pivots = rref(&mut aug, tol);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant<S: Field>(a: &Mat<S>) -> S {
    let n = a.len();
    let mut m = a.clone();
    let mut det = S::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return S::zero();
        };
        if p != c {
            m.swap(p, c);
            det = det.neg();
        }
        det = det.mul(&m[c][c]);
        let inv = m[c][c].inv().expect("nonzero pivot");
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].mul(&inv);
            for j in c..n {
                let t = f.mul(&m[c][j]);
                m[i][j] = m[i][j].sub(&t);
            }
        }
    }
    det
}

/// Characteristic polynomial `det(xI − a)` by Faddeev–LeVerrier; returns
/// coefficients from degree 0 up to the monic leading term.
pub fn charpoly<S: Field>(a: &Mat<S>) -> Vec<S> {
    let n = a.len();
    let mut coeffs = vec![S::zero(); n + 1];
    coeffs[n] = S::one();
    let mut m: Mat<S> = zeros(n, n);
    for k in 1..=n {
        let am = mat_mul(a, &m);
        let mut next = am;
        let c_prev = coeffs[n - k + 1].clone();
        for i in 0..n {
            next[i][i] = next[i][i].add(&c_prev);
        }
        m = next;
        let tr = trace(&mat_mul(a, &m));
        coeffs[n - k] = tr
            .neg()
            .div(&S::from_i64(k as i64))
            .expect("nonzero integer");
    }
    coeffs
}

/// Left inverse `(AᵀA)⁻¹Aᵀ` of an injective matrix.
pub fn left_inverse<S: Field>(a: &Mat<S>, tol: f64) -> Option<Mat<S>> {
    let at = transpose(a);
    let ata = mat_mul(&at, a);
    let inv = inverse(&ata, tol)?;
    Some(mat_mul(&inv, &at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Gq;

    fn q(v: i64) -> Gq {
        Gq::int(v)
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![vec![q(2), q(1)], vec![q(7), q(4)]];
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert_eq!(determinant(&a), q(1));
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]];
        let ns = nullspace(&a, 3, 0.0);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(mat_vec(&a, &v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn charpoly_of_rotation() {
        let a = vec![vec![q(0), q(-1)], vec![q(1), q(0)]];
        assert_eq!(charpoly(&a), vec![q(1), q(0), q(1)]);
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        assert!(solve(&a, &[q(1), q(2)], 0.0).is_none());
        assert_eq!(solve(&a, &[q(1), q(1)], 0.0), Some(vec![q(1), q(0)]));
    }
}
