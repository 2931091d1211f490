//! Gram-matrix coordinates on the deformation space.
//!
//! A configuration is determined up to orthogonal motion by its full Gram
//! matrix `G(p) = (<p_i, p_j>)`, or equivalently by the squared lengths `s`
//! together with the Gram matrix `omega` of the lattice generators
//! `v_i = p_i - p_0`. For fixed `s` the realizable `omega` lie on a
//! degree-(d+1) hypersurface given by a bordered determinant.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::framework::FrameworkSpec;
use crate::linalg;

/// Relative eigenvalue threshold used for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;

/// Relative tolerance on `|p_0|^2 = s_0` when realizing from `omega`.
pub const HYPERSURFACE_RTOL: f64 = 1e-8;

/// Symmetric `(d+1) x (d+1)` matrix of inner products `<p_i, p_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

/// Symmetric `d x d` matrix of inner products `<v_i, v_j>` of lattice generators.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMatrix(DMatrix<f64>);

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Shape(format!("{what} must be symmetric")));
    }
    Ok((m + m.transpose()) * 0.5)
}

impl GramMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&m, "gram matrix").map(Self)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Dimension `d` of the ambient space (one less than the matrix size).
    pub fn dimension(&self) -> usize {
        self.0.nrows() - 1
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }
}

impl OmegaMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&m, "omega").map(Self)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("omega rows must all have length d".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Upper-triangle entries `omega_11, omega_12, .., omega_dd`, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let d = self.dimension();
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }
}

pub fn gram_of(spec: &FrameworkSpec) -> GramMatrix {
    let p = spec.points();
    GramMatrix(p.transpose() * p)
}

pub fn omega_of(spec: &FrameworkSpec) -> OmegaMatrix {
    let gens = linalg::generators(spec.points());
    OmegaMatrix(gens.transpose() * gens)
}

fn check_lengths(d: usize, s: &[f64]) -> Result<()> {
    if s.len() != d + 1 {
        return Err(Error::Shape(format!(
            "expected {} squared lengths for d = {d}, got {}",
            d + 1,
            s.len()
        )));
    }
    if s.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::Input(
            "squared lengths must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// Recovers `G(p)` from `omega` and the squared lengths:
/// `<p_i, p_0> = (s_i + s_0 - w_ii) / 2` and
/// `<p_i, p_j> = w_ij + (s_i + s_j - w_ii - w_jj) / 2`.
pub fn gram_from_omega(omega: &OmegaMatrix, s: &[f64]) -> Result<GramMatrix> {
    let d = omega.dimension();
    check_lengths(d, s)?;
    let w = omega.matrix();
    let mut g = DMatrix::zeros(d + 1, d + 1);
    for i in 0..=d {
        g[(i, i)] = s[i];
    }
    for i in 1..=d {
        let a = 0.5 * (s[i] + s[0] - w[(i - 1, i - 1)]);
        g[(i, 0)] = a;
        g[(0, i)] = a;
        for j in (i + 1)..=d {
            let a = w[(i - 1, j - 1)] + 0.5 * (s[i] + s[j] - w[(i - 1, i - 1)] - w[(j - 1, j - 1)]);
            g[(i, j)] = a;
            g[(j, i)] = a;
        }
    }
    Ok(GramMatrix(g))
}

/// Inverse of [`gram_from_omega`]: `w_ij = a_ij - a_i0 - a_j0 + a_00`.
pub fn omega_from_gram(gram: &GramMatrix) -> OmegaMatrix {
    let g = gram.matrix();
    let d = gram.dimension();
    OmegaMatrix(DMatrix::from_fn(d, d, |i, j| {
        g[(i + 1, j + 1)] - g[(i + 1, 0)] - g[(j + 1, 0)] + g[(0, 0)]
    }))
}

/// The `(d+1) x (d+1)` bordered matrix: `s_0` in the corner, border entries
/// `(s_i - s_0 - w_ii) / 2`, and `omega` in the lower-right block. It is the
/// Gram matrix of `(p_0, v_1, .., v_d)`.
pub fn bordered_matrix(omega: &OmegaMatrix, s: &[f64]) -> Result<DMatrix<f64>> {
    let d = omega.dimension();
    check_lengths(d, s)?;
    let w = omega.matrix();
    let mut m = DMatrix::zeros(d + 1, d + 1);
    m[(0, 0)] = s[0];
    for i in 1..=d {
        let b = 0.5 * (s[i] - s[0] - w[(i - 1, i - 1)]);
        m[(0, i)] = b;
        m[(i, 0)] = b;
        for j in 1..=d {
            m[(i, j)] = w[(i - 1, j - 1)];
        }
    }
    Ok(m)
}

/// Determinant of the bordered matrix; zero exactly on the realizability
/// hypersurface for squared lengths `s`.
pub fn bordered_residual(omega: &OmegaMatrix, s: &[f64]) -> Result<f64> {
    Ok(bordered_matrix(omega, s)?.determinant())
}

/// Natural scale of the bordered determinant, used for relative comparisons.
pub fn bordered_scale(omega: &OmegaMatrix, s: &[f64]) -> f64 {
    let d = omega.dimension();
    let scale = s
        .iter()
        .copied()
        .chain(omega.matrix().diagonal().iter().copied())
        .fold(0.0, f64::max);
    scale.powi(d as i32 + 1)
}

/// Builds a configuration realizing `(omega, s)`, in the gauge where `v_1` is on
/// the first axis, `v_2` in the first coordinate plane, and so on, with
/// positive volume.
pub fn realize_from_omega(omega: &OmegaMatrix, s: &[f64]) -> Result<FrameworkSpec> {
    let d = omega.dimension();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    check_lengths(d, s)?;
    let w = omega.matrix();
    let eig = linalg::sym_eigenvalues(w);
    let (lo, hi) = (eig[0], eig[d - 1]);
    if hi <= 0.0 || lo <= RANK_RTOL * hi {
        return Err(Error::ConeViolation { min_eigenvalue: lo });
    }
    // columns of `basis` are v_1..v_d
    let basis = linalg::factor_psd(w, d);
    let rhs = DVector::from_iterator(d, (1..=d).map(|i| 0.5 * (s[i] - s[0] - w[(i - 1, i - 1)])));
    let p0 = basis
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular generator basis".into()))?;
    let realized = p0.norm_squared();
    let scale = s
        .iter()
        .copied()
        .chain(w.diagonal().iter().copied())
        .fold(0.0, f64::max);
    if (realized - s[0]).abs() > HYPERSURFACE_RTOL * scale {
        return Err(Error::OffHypersurface {
            realized,
            expected: s[0],
        });
    }
    let mut points = DMatrix::zeros(d, d + 1);
    points.set_column(0, &p0);
    for i in 1..=d {
        points.set_column(i, &(&p0 + basis.column(i - 1)));
    }
    if basis.determinant() < 0.0 {
        points.row_mut(d - 1).neg_mut();
    }
    FrameworkSpec::from_matrix(linalg::gauge_fix(&points))
}

/// Rank classification of a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankClass {
    /// Positive semidefinite of rank exactly `d`.
    Regular,
    /// Rank strictly below `d`: the singular locus.
    Singular { rank: usize },
    /// Full rank `d + 1` or clearly indefinite; not the Gram matrix of `d + 1`
    /// vectors in `R^d`.
    NotRealizable { rank: usize },
}

pub fn rank_singularity_check(gram: &GramMatrix) -> RankClass {
    let d = gram.dimension();
    let eig = linalg::sym_eigenvalues(gram.matrix());
    let largest = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if largest == 0.0 {
        return RankClass::Singular { rank: 0 };
    }
    let tol = RANK_RTOL * largest;
    let rank = eig.iter().filter(|v| v.abs() > tol).count();
    if eig[0] < -tol || rank > d {
        RankClass::NotRealizable { rank }
    } else if rank == d {
        RankClass::Regular
    } else {
        RankClass::Singular { rank }
    }
}
