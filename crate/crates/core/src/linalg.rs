//! Small dense linear-algebra helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector};

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    sym_eigen(m).0
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)[0]
}

/// Factor a positive semidefinite matrix `g` (n x n) as `g = Pᵀ P` with `P` of
/// shape `rank x n`, keeping the `rank` largest eigenpairs. Eigenvalues in
/// (-1e-12 * scale, 0) are clamped to zero.
pub fn factor_psd(g: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let n = g.nrows();
    let (values, vectors) = sym_eigen(g);
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut p = DMatrix::zeros(rank, n);
    for row in 0..rank {
        let idx = n - 1 - row;
        let mut lambda = values[idx];
        if lambda < 0.0 && lambda > -1e-12 * scale {
            lambda = 0.0;
        }
        let root = lambda.max(0.0).sqrt();
        for col in 0..n {
            p[(row, col)] = root * vectors[(col, idx)];
        }
    }
    p
}

/// Rotate the columns of `points` (d x (d+1)) so that the generators
/// `v_i = p_i - p_0` become upper triangular with positive leading diagonal.
/// The transformation is a proper rotation, so orientation is preserved and
/// the sign of the volume ends up on the last diagonal entry.
pub fn gauge_fix(points: &DMatrix<f64>) -> DMatrix<f64> {
    let d = points.nrows();
    let gens = generators(points);
    let qr = gens.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..d {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(d - 1).neg_mut();
    }
    q.transpose() * points
}

/// Matrix with columns `p_i - p_0`, i = 1..d.
pub fn generators(points: &DMatrix<f64>) -> DMatrix<f64> {
    let d = points.nrows();
    let p0 = points.column(0).clone_owned();
    let mut m = DMatrix::zeros(d, d);
    for i in 1..=d {
        m.set_column(i - 1, &(points.column(i) - &p0));
    }
    m
}

/// Cofactor matrix `C` with `C_ij = (-1)^(i+j) det(minor_ij)`, assembled from
/// explicit minors so it stays valid when `m` is singular.
pub fn cofactor_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = m.clone().remove_row(i).remove_column(j);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c[(i, j)] = sign * minor.determinant();
        }
    }
    c
}

/// Pack a symmetric matrix into trace-orthonormal coordinates
/// `(X_11, .., X_dd, sqrt2 X_12, ..)` so that the Euclidean inner product of the
/// packed vectors equals `tr(XY)`.
pub fn sym_pack(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        out.push(m[(i, i)]);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    DVector::from_vec(out)
}

pub fn sym_unpack(v: &DVector<f64>, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = v[i];
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let x = v[k] / std::f64::consts::SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

/// Trace inner product `tr(XY)` of two symmetric matrices.
pub fn trace_inner(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.component_mul(y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactors_match_adjugate_of_invertible_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, -1.0, 3.0, 2.0, 0.0, 1.0, 4.0]);
        let c = cofactor_matrix(&m);
        let inv = m.clone().try_inverse().unwrap();
        let adj = inv * m.determinant();
        assert!((c.transpose() - adj).amax() < 1e-12);
    }

    #[test]
    fn factor_reproduces_gram() {
        let g = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0]);
        let p = factor_psd(&g, 2);
        assert!((p.transpose() * &p - g).amax() < 1e-12);
    }

    #[test]
    fn sym_pack_preserves_trace_inner_product() {
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, -1.0, 0.5, 3.0, 0.5, 2.0]);
        let y = DMatrix::from_row_slice(3, 3, &[0.3, -1.0, 0.2, -1.0, 2.0, 1.5, 0.2, 1.5, -0.7]);
        let lhs = sym_pack(&x).dot(&sym_pack(&y));
        assert!((lhs - trace_inner(&x, &y)).abs() < 1e-12);
        assert!((sym_unpack(&sym_pack(&x), 3) - x).amax() < 1e-15);
    }

    #[test]
    fn gauge_fix_is_a_rotation_with_triangular_generators() {
        let p = DMatrix::from_row_slice(2, 3, &[0.3, -0.9, 0.1, 0.8, 0.2, -1.1]);
        let fixed = gauge_fix(&p);
        let before = generators(&p).determinant();
        let gens = generators(&fixed);
        assert!(gens[(1, 0)].abs() < 1e-14);
        assert!(gens[(0, 0)] > 0.0);
        assert!((gens.determinant() - before).abs() < 1e-12);
        assert!((fixed.transpose() * &fixed - p.transpose() * &p).amax() < 1e-12);
    }
}
