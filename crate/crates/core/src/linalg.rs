//! Small fixed-size linear algebra used in per-node kernels, plus a dense
//! symmetric third-order tensor.

use nalgebra::{DMatrix, DVector};

/// Fully symmetric (by construction) `d×d×d` tensor stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub d: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d: usize) -> Self {
        Tensor3 { d, data: vec![0.0; d * d * d] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.d + j) * self.d + k]
    }

    /// Write one value into all six index permutations.
    pub fn set_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.d;
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            self.data[(a * d + b) * d + c] = v;
        }
    }

    /// Trilinear form `T(a, b, c)`.
    pub fn contract(&self, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let d = self.d;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                let ab = a[i] * b[j];
                if ab == 0.0 {
                    continue;
                }
                for k in 0..d {
                    s += self.get(i, j, k) * ab * c[k];
                }
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn matvec<const D: usize>(m: &[[f64; D]; D], v: &[f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = dot(&m[i], v);
    }
    out
}

/// Bilinear form `aᵀ M b`.
#[inline]
pub fn bilinear<const D: usize>(m: &[[f64; D]; D], a: &[f64; D], b: &[f64; D]) -> f64 {
    dot(a, &matvec(m, b))
}

/// Cholesky factor (lower triangular) of a symmetric positive-definite matrix.
pub fn cholesky<const D: usize>(m: &[[f64; D]; D]) -> Option<[[f64; D]; D]> {
    let mut l = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
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

/// Solve `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve<const D: usize>(l: &[[f64; D]; D], b: &[f64; D]) -> [f64; D] {
    let mut y = [0.0; D];
    for i in 0..D {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; D];
    for i in (0..D).rev() {
        let mut s = y[i];
        for k in i + 1..D {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse<const D: usize>(m: &[[f64; D]; D]) -> Option<[[f64; D]; D]> {
    let l = cholesky(m)?;
    let mut inv = [[0.0; D]; D];
    for c in 0..D {
        let mut e = [0.0; D];
        e[c] = 1.0;
        let col = cholesky_solve(&l, &e);
        for r in 0..D {
            inv[r][c] = col[r];
        }
    }
    for i in 0..D {
        for j in 0..i {
            let s = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = s;
            inv[j][i] = s;
        }
    }
    Some(inv)
}

/// Orthonormal basis of the orthogonal complement of a unit vector, obtained
/// by Gram–Schmidt against the coordinate axes least aligned with it.
pub fn tangent_basis<const D: usize>(n: &[f64; D]) -> Vec<[f64; D]> {
    let mut order: Vec<usize> = (0..D).collect();
    order.sort_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap());
    let mut basis: Vec<[f64; D]> = Vec::with_capacity(D - 1);
    for &axis in &order {
        if basis.len() == D - 1 {
            break;
        }
        let mut v = [0.0; D];
        v[axis] = 1.0;
        let c = dot(&v, n);
        for i in 0..D {
            v[i] -= c * n[i];
        }
        for b in &basis {
            let c = dot(&v, b);
            for i in 0..D {
                v[i] -= c * b[i];
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            for x in v.iter_mut() {
                *x /= len;
            }
            basis.push(v);
        }
    }
    basis
}

pub fn to_dvector<const D: usize>(a: &[f64; D]) -> DVector<f64> {
    DVector::from_column_slice(a)
}

pub fn to_dmatrix<const D: usize>(m: &[[f64; D]; D]) -> DMatrix<f64> {
    DMatrix::from_fn(D, D, |i, j| m[i][j])
}

/// Copy a slice into a fixed array; panics on a length mismatch.
pub fn arr<const D: usize>(x: &[f64]) -> [f64; D] {
    let mut out = [0.0; D];
    out.copy_from_slice(x);
    out
}

/// Eigenvalues of the symmetric 2×2 matrix `[[a, b], [b, c]]`, ascending.
#[inline]
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (m - r, m + r)
}
