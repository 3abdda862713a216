//! Small fixed-size vector/matrix helpers for runtime dimension d in {2, 3}.
//!
//! Points are stored as `[f64; 3]` with the third component zero in 2D;
//! matrices are row-major `[[f64; 3]; 3]` with the unused row/column set to
//! the identity pattern so determinants and inverses work uniformly.

pub type Pt = [f64; 3];
pub type Mat = [[f64; 3]; 3];

pub const IDENTITY: Mat = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Pt, b: Pt) -> Pt {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Pt, s: f64) -> Pt {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn axpy(a: Pt, s: f64, b: Pt) -> Pt {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn dot(a: Pt, b: Pt) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Pt) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Pt, b: Pt) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn cross(a: Pt, b: Pt) -> Pt {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// z-component of the cross product of two planar vectors.
#[inline]
pub fn cross2(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn det(m: &Mat, dim: usize) -> f64 {
    match dim {
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Cofactor matrix with the sign convention `(cof F)^T F = (det F) Id`.
pub fn cofactor(m: &Mat, dim: usize) -> Mat {
    let mut c = IDENTITY;
    match dim {
        2 => {
            c[0][0] = m[1][1];
            c[0][1] = -m[1][0];
            c[1][0] = -m[0][1];
            c[1][1] = m[0][0];
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    c[i][j] = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
                }
            }
        }
        _ => panic!("unsupported dimension {dim}"),
    }
    c
}

pub fn matvec(m: &Mat, v: Pt, dim: usize) -> Pt {
    let mut out = [0.0; 3];
    for i in 0..dim {
        for (j, vj) in v.iter().enumerate().take(dim) {
            out[i] += m[i][j] * vj;
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat, dim: usize) -> Mat {
    let mut out = IDENTITY;
    for i in 0..dim {
        for j in 0..dim {
            let mut s = 0.0;
            for k in 0..dim {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn transpose(m: &Mat, dim: usize) -> Mat {
    let mut out = IDENTITY;
    for i in 0..dim {
        for j in 0..dim {
            out[i][j] = m[j][i];
        }
    }
    out
}

/// Solve `m x = rhs` via the cofactor inverse. Returns `None` if the
/// determinant magnitude is below `tol`.
pub fn solve(m: &Mat, rhs: Pt, dim: usize, tol: f64) -> Option<Pt> {
    let d = det(m, dim);
    if d.abs() <= tol {
        return None;
    }
    // inv(F) = (cof F)^T / det F with our sign convention... check:
    // (cof F)^T F = det F * Id, so inv(F) = (cof F)^T / det F applied on the left:
    // F^{-1} = (det F)^{-1} (cof F)^T.
    let c = cofactor(m, dim);
    let ct = transpose(&c, dim);
    let mut x = matvec(&ct, rhs, dim);
    for xi in x.iter_mut().take(dim) {
        *xi /= d;
    }
    Some(x)
}

pub fn frobenius(m: &Mat, dim: usize) -> f64 {
    let mut s = 0.0;
    for row in m.iter().take(dim) {
        for v in row.iter().take(dim) {
            s += v * v;
        }
    }
    s.sqrt()
}

/// Columns of a matrix built from `dim` column vectors.
pub fn from_columns(cols: &[Pt], dim: usize) -> Mat {
    let mut m = IDENTITY;
    for i in 0..dim {
        for (j, col) in cols.iter().enumerate().take(dim) {
            m[i][j] = col[i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_identity_2d() {
        let f = [[3.0, 1.0, 0.0], [2.0, 5.0, 0.0], [0.0, 0.0, 1.0]];
        let c = cofactor(&f, 2);
        let p = matmul(&transpose(&c, 2), &f, 2);
        let d = det(&f, 2);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { d } else { 0.0 };
                assert!((p[i][j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cofactor_identity_3d() {
        let f = [[1.0, 2.0, 0.5], [-1.0, 3.0, 1.0], [0.25, 0.0, 2.0]];
        let c = cofactor(&f, 3);
        let p = matmul(&transpose(&c, 3), &f, 3);
        let d = det(&f, 3);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { d } else { 0.0 };
                assert!((p[i][j] - expect).abs() < 1e-12, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn solve_roundtrip() {
        let f = [[2.0, 1.0, 0.0], [0.5, 3.0, 0.0], [0.0, 0.0, 1.0]];
        let x = solve(&f, [1.0, 2.0, 0.0], 2, 1e-300).unwrap();
        let back = matvec(&f, x, 2);
        assert!((back[0] - 1.0).abs() < 1e-12 && (back[1] - 2.0).abs() < 1e-12);
    }
}
