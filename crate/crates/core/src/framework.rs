//! Diamantine frameworks described by their edge-vector configuration.
//!
//! A framework in `R^d` is determined by `d + 1` edge vectors `p_0..p_d`
//! emanating from the origin. The periodicity lattice is generated by
//! `v_i = p_i - p_0` and the quotient graph has two vertices (the origin and
//! `p_0`) joined by `d + 1` edges.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative cutoff below which a unit cell counts as degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-10;

/// Edge-vector configuration of a d-dimensional diamantine framework.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameworkSpec {
    /// Columns are the edge vectors `p_0..p_d`.
    points: DMatrix<f64>,
    squared_lengths: Vec<f64>,
}

impl FrameworkSpec {
    /// Builds a spec from `d + 1` column vectors of length `d`.
    pub fn from_matrix(points: DMatrix<f64>) -> Result<Self> {
        let d = points.nrows();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if points.ncols() != d + 1 {
            return Err(Error::Shape(format!(
                "expected {} edge vectors in dimension {d}, got {}",
                d + 1,
                points.ncols()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("edge vectors must be finite".into()));
        }
        let squared_lengths: Vec<f64> = points.column_iter().map(|c| c.norm_squared()).collect();
        if let Some(i) = squared_lengths.iter().position(|&s| s == 0.0) {
            return Err(Error::ZeroLengthBar(i));
        }
        Ok(Self {
            points,
            squared_lengths,
        })
    }

    /// Builds a spec from an ordered list of edge vectors `p_0..p_d`.
    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let d = vectors.first().map(Vec::len).unwrap_or(0);
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if vectors.len() != d + 1 {
            return Err(Error::Shape(format!(
                "expected {} edge vectors in dimension {d}, got {}",
                d + 1,
                vectors.len()
            )));
        }
        if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != d) {
            return Err(Error::Shape(format!(
                "p{i} has {} components, expected {d}",
                v.len()
            )));
        }
        let points = DMatrix::from_fn(d, d + 1, |r, c| vectors[c][r]);
        Self::from_matrix(points)
    }

    /// The standard diamond framework: unit edge vectors with pairwise inner
    /// product `-1/d`, positively oriented.
    pub fn standard(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let n = d + 1;
        let off = -1.0 / d as f64;
        let gram = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { off });
        let mut points = linalg::factor_psd(&gram, d);
        if linalg::generators(&points).determinant() < 0.0 {
            points.swap_columns(1, 2);
        }
        Self::from_matrix(linalg::gauge_fix(&points))
    }

    pub fn dimension(&self) -> usize {
        self.points.nrows()
    }

    /// Matrix whose columns are `p_0..p_d`.
    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn edge_vector(&self, i: usize) -> DVector<f64> {
        self.points.column(i).clone_owned()
    }

    pub fn edge_vectors(&self) -> Vec<Vec<f64>> {
        self.points
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }

    /// `s_i = <p_i, p_i>`.
    pub fn squared_lengths(&self) -> &[f64] {
        &self.squared_lengths
    }

    /// Oriented unit-cell volume `det[p_1 - p_0, .., p_d - p_0]`.
    pub fn volume(&self) -> f64 {
        linalg::generators(&self.points).determinant()
    }

    /// `|V|` at or below this value marks the cell as degenerate. Scales as
    /// `length^d` through the geometric mean edge length.
    pub fn degeneracy_threshold(&self) -> f64 {
        let d = self.dimension() as f64;
        let n = self.squared_lengths.len() as f64;
        let log_mean = self
            .squared_lengths
            .iter()
            .map(|s| 0.5 * s.ln())
            .sum::<f64>()
            / n;
        DEGENERACY_RTOL * (d * log_mean).exp()
    }

    pub fn is_degenerate(&self) -> bool {
        self.volume().abs() <= self.degeneracy_threshold()
    }

    /// Fails with [`Error::DegenerateCell`] when the cell is degenerate.
    pub fn require_nondegenerate(&self) -> Result<()> {
        let volume = self.volume();
        if volume.abs() <= self.degeneracy_threshold() {
            Err(Error::DegenerateCell { volume })
        } else {
            Ok(())
        }
    }

    pub fn lattice(&self) -> PeriodicityLattice {
        PeriodicityLattice {
            generators: linalg::generators(&self.points),
        }
    }

    /// Applies `q` to every edge vector.
    pub fn transformed(&self, q: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(q * &self.points)
    }

    /// Same framework rotated so that `v_1` lies on the first axis, `v_2` in the
    /// first coordinate plane with positive second component, and so on.
    pub fn gauge_fixed(&self) -> Self {
        let points = linalg::gauge_fix(&self.points);
        Self {
            points,
            squared_lengths: self.squared_lengths.clone(),
        }
    }

    /// Largest edge-vector mismatch after the best orthogonal alignment of
    /// `self` onto `other` (orthogonal Procrustes, reflections allowed).
    pub fn alignment_distance(&self, other: &FrameworkSpec) -> f64 {
        if self.points.shape() != other.points.shape() {
            return f64::INFINITY;
        }
        let cross = &other.points * self.points.transpose();
        let svd = cross.svd(true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            return f64::INFINITY;
        };
        let rot = u * vt;
        let aligned = rot * &self.points;
        (aligned - &other.points)
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Adds `delta` to the edge vectors and rescales each one back onto its
    /// sphere of radius `sqrt(s_i)`.
    pub fn displaced(&self, delta: &DMatrix<f64>) -> Result<Self> {
        let mut points = &self.points + delta;
        for (i, mut col) in points.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 {
                return Err(Error::ZeroLengthBar(i));
            }
            col *= self.squared_lengths[i].sqrt() / norm;
        }
        Self::from_matrix(points)
    }

    /// Finite periodic patch over translation multi-indices in `[0, reps]^d`.
    pub fn patch(&self, reps: usize) -> Result<Patch> {
        if reps == 0 {
            return Err(Error::Input("patch repetitions must be at least 1".into()));
        }
        self.require_nondegenerate()?;
        Ok(Patch::build(self, reps))
    }
}

/// Translation lattice generated by `v_i = p_i - p_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicityLattice {
    /// Columns are `v_1..v_d`.
    pub generators: DMatrix<f64>,
}

impl PeriodicityLattice {
    /// `v_i` for `i` in `1..=d`.
    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.generators.column(i - 1).clone_owned()
    }

    pub fn translate(&self, index: &[i64]) -> DVector<f64> {
        let coeffs = DVector::from_iterator(index.len(), index.iter().map(|&k| k as f64));
        &self.generators * coeffs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchVertex {
    pub position: DVector<f64>,
    /// 0 for translates of the origin, 1 for translates of `p_0`.
    pub orbit: usize,
    pub translation: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchEdge {
    pub from: usize,
    pub to: usize,
    /// Index `i` of the representative segment `O -> p_i`.
    pub orbit: usize,
}

/// Finite fragment of the periodic framework.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub dimension: usize,
    pub vertices: Vec<PatchVertex>,
    pub edges: Vec<PatchEdge>,
}

impl Patch {
    fn build(spec: &FrameworkSpec, reps: usize) -> Self {
        let d = spec.dimension();
        let side = reps + 1;
        let cells = side.pow(d as u32);
        let lattice = spec.lattice();
        let p0 = spec.edge_vector(0);

        let index_of = |n: &[i64]| -> usize {
            n.iter()
                .rev()
                .fold(0usize, |acc, &k| acc * side + k as usize)
        };
        let multi_index = |mut lin: usize| -> Vec<i64> {
            let mut n = vec![0i64; d];
            for slot in n.iter_mut() {
                *slot = (lin % side) as i64;
                lin /= side;
            }
            n
        };

        let mut vertices = Vec::with_capacity(2 * cells);
        for orbit in 0..2 {
            for lin in 0..cells {
                let translation = multi_index(lin);
                let mut position = lattice.translate(&translation);
                if orbit == 1 {
                    position += &p0;
                }
                vertices.push(PatchVertex {
                    position,
                    orbit,
                    translation,
                });
            }
        }

        // O + t is joined to p_i + t = p_0 + (t + e_i), with e_0 = 0.
        let mut edges = Vec::new();
        for lin in 0..cells {
            let n = multi_index(lin);
            for i in 0..=d {
                let mut m = n.clone();
                if i > 0 {
                    m[i - 1] += 1;
                    if m[i - 1] > reps as i64 {
                        continue;
                    }
                }
                edges.push(PatchEdge {
                    from: lin,
                    to: cells + index_of(&m),
                    orbit: i,
                });
            }
        }
        Self {
            dimension: d,
            vertices,
            edges,
        }
    }

    pub fn edge_length(&self, edge: &PatchEdge) -> f64 {
        (&self.vertices[edge.to].position - &self.vertices[edge.from].position).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_2d_has_120_degree_unit_vectors() {
        let spec = FrameworkSpec::standard(2).unwrap();
        let p = spec.points();
        let g = p.transpose() * p;
        for i in 0..3 {
            assert_relative_eq!(g[(i, i)], 1.0, epsilon = 1e-12);
            for j in 0..3 {
                if i != j {
                    assert_relative_eq!(g[(i, j)], -0.5, epsilon = 1e-12);
                }
            }
        }
        assert!(spec.volume() > 0.0);
        assert_relative_eq!(spec.volume(), 3.0 * 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn standard_3d_is_tetrahedral() {
        let spec = FrameworkSpec::standard(3).unwrap();
        let expected = (-1.0f64 / 3.0).acos().to_degrees();
        assert_relative_eq!(expected, 109.4712206, epsilon = 1e-6);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let a = spec.edge_vector(i);
                let b = spec.edge_vector(j);
                let angle = (a.dot(&b) / (a.norm() * b.norm())).acos().to_degrees();
                assert_relative_eq!(angle, expected, epsilon = 1e-9);
            }
        }
        assert!(spec.volume() > 0.0);
    }

    #[test]
    fn invalid_dimension_is_rejected() {
        assert_eq!(FrameworkSpec::standard(1), Err(Error::InvalidDimension(1)));
        assert_eq!(FrameworkSpec::standard(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn from_vectors_examples() {
        let spec = FrameworkSpec::from_vectors(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]])
            .unwrap();
        assert_eq!(spec.squared_lengths(), &[1.0, 1.0, 2.0]);
        assert!(!spec.is_degenerate());

        let collinear =
            FrameworkSpec::from_vectors(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![-1.0, 0.0]])
                .unwrap();
        assert!(collinear.is_degenerate());
        assert_eq!(collinear.volume(), 0.0);
        assert!(matches!(
            collinear.require_nondegenerate(),
            Err(Error::DegenerateCell { .. })
        ));
    }

    #[test]
    fn from_vectors_shape_errors() {
        assert!(matches!(
            FrameworkSpec::from_vectors(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            FrameworkSpec::from_vectors(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0]]),
            Err(Error::Shape(_))
        ));
        assert_eq!(
            FrameworkSpec::from_vectors(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]]),
            Err(Error::ZeroLengthBar(1))
        );
    }

    #[test]
    fn swapping_vectors_negates_volume() {
        let spec = FrameworkSpec::from_vectors(&[vec![0.3, 1.0], vec![-1.2, 0.1], vec![0.4, -0.9]])
            .unwrap();
        let mut p = spec.points().clone();
        p.swap_columns(1, 2);
        let swapped = FrameworkSpec::from_matrix(p).unwrap();
        assert_relative_eq!(swapped.volume(), -spec.volume(), epsilon = 1e-15);
    }

    #[test]
    fn honeycomb_patch_counts() {
        let spec = FrameworkSpec::standard(2).unwrap();
        let patch = spec.patch(1).unwrap();
        assert_eq!(patch.vertices.len(), 8);
        // (reps+1)^d edges for orbit 0 plus d * reps * (reps+1)^(d-1) for the rest
        assert_eq!(patch.edges.len(), 4 + 2 * 2);
        let mut orbits: Vec<usize> = patch.edges.iter().map(|e| e.orbit).collect();
        orbits.sort();
        orbits.dedup();
        assert_eq!(orbits, vec![0, 1, 2]);
        let mut vorbits: Vec<usize> = patch.vertices.iter().map(|v| v.orbit).collect();
        vorbits.dedup();
        assert_eq!(vorbits, vec![0, 1]);
        for e in &patch.edges {
            assert!((patch.edge_length(e) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_requires_repetitions_and_nondegenerate_cell() {
        let spec = FrameworkSpec::standard(2).unwrap();
        assert!(matches!(spec.patch(0), Err(Error::Input(_))));
        let collinear =
            FrameworkSpec::from_vectors(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![-1.0, 0.0]])
                .unwrap();
        assert!(matches!(
            collinear.patch(1),
            Err(Error::DegenerateCell { .. })
        ));
    }

    #[test]
    fn alignment_distance_ignores_rotations() {
        let spec = FrameworkSpec::from_vectors(&[vec![0.3, 1.0], vec![-1.2, 0.1], vec![0.4, -0.9]])
            .unwrap();
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let moved = spec.transformed(&rot).unwrap();
        assert!(spec.alignment_distance(&moved) < 1e-12);
        assert!(spec.alignment_distance(&FrameworkSpec::standard(2).unwrap()) > 0.1);
    }
}
