//! Closed forms for planar frameworks.
//!
//! For `d = 2` and unit squared lengths the realizability hypersurface in
//! `(w11, w12, w22)` is a Cayley nodal cubic with nodes at the origin,
//! `(4,0,0)`, `(0,0,4)` and `(4,4,4)`. Auxetic capability reduces to a
//! half-space condition, equivalently pointedness of the three edge vectors.
//! The deformation surface for general squared lengths is probed by sampling
//! the torus of angles of `p_0` and `p_1` relative to a fixed `p_2`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::auxetic::Capability;
use crate::critical::{find_critical_alphas, RootKind};
use crate::error::{Error, Result};
use crate::framework::FrameworkSpec;
use crate::gram::{gram_of, OmegaMatrix};
use crate::linalg;

/// Slack for the half-space and pointedness thresholds.
pub const THRESHOLD_TOL: f64 = 1e-9;
/// Relative slack for "on the cubic".
pub const CUBIC_RTOL: f64 = 1e-8;
pub const MIN_GRID: usize = 64;

/// A point `(w11, w12, w22)` in the space of symmetric 2x2 matrices.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OmegaPoint2 {
    pub w11: f64,
    pub w12: f64,
    pub w22: f64,
}

impl OmegaPoint2 {
    pub fn new(w11: f64, w12: f64, w22: f64) -> Self {
        Self { w11, w12, w22 }
    }

    pub fn from_omega(omega: &OmegaMatrix) -> Result<Self> {
        if omega.dimension() != 2 {
            return Err(Error::Shape(format!(
                "expected 2x2 omega, got d = {}",
                omega.dimension()
            )));
        }
        let m = omega.matrix();
        Ok(Self::new(m[(0, 0)], m[(0, 1)], m[(1, 1)]))
    }

    pub fn trace(&self) -> f64 {
        self.w11 + self.w22
    }

    pub fn det(&self) -> f64 {
        self.w11 * self.w22 - self.w12 * self.w12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.trace() > 0.0 && self.det() > 0.0
    }

    fn scale(&self) -> f64 {
        self.w11
            .abs()
            .max(self.w12.abs())
            .max(self.w22.abs())
            .max(1.0)
    }
}

/// `f = 1/4 w11 w22 (2 w12 - w11 - w22) + w11 w22 - w12^2`.
pub fn f_cayley(w: &OmegaPoint2) -> f64 {
    let OmegaPoint2 { w11, w12, w22 } = *w;
    0.25 * w11 * w22 * (2.0 * w12 - w11 - w22) + w11 * w22 - w12 * w12
}

/// Gradient of [`f_cayley`] with respect to `(w11, w12, w22)`.
pub fn grad_f(w: &OmegaPoint2) -> [f64; 3] {
    let OmegaPoint2 { w11, w12, w22 } = *w;
    [
        w22 * (0.5 * w12 - 0.5 * w11 - 0.25 * w22 + 1.0),
        0.5 * w11 * w22 - 2.0 * w12,
        w11 * (0.5 * w12 - 0.5 * w22 - 0.25 * w11 + 1.0),
    ]
}

/// Boundary quartic of the auxetic region: the determinant of the trace-metric
/// normal `(f_1, f_2 / 2, f_3)`.
pub fn g_quartic(w: &OmegaPoint2) -> f64 {
    let OmegaPoint2 { w11, w12, w22 } = *w;
    let a = 0.5 * w12 - 0.5 * w11 - 0.25 * w22 + 1.0;
    let b = 0.5 * w12 - 0.5 * w22 - 0.25 * w11 + 1.0;
    let c = 0.25 * w11 * w22 - w12;
    w11 * w22 * a * b - c * c
}

/// Unit-length capability through `w11 - w12 + w22 < 4`.
pub fn auxetic_halfspace_test(w: &OmegaPoint2) -> Result<Capability> {
    let f = f_cayley(w);
    if f.abs() > CUBIC_RTOL * w.scale().powi(3) {
        return Err(Error::OffCubic(f));
    }
    if !w.is_positive_definite() {
        return Err(Error::ConeViolation {
            min_eigenvalue: 0.5 * (w.trace() - (w.trace().powi(2) - 4.0 * w.det()).max(0.0).sqrt()),
        });
    }
    let lhs = w.w11 - w.w12 + w.w22;
    Ok(if lhs < 4.0 - THRESHOLD_TOL {
        Capability::Capable
    } else if lhs > 4.0 + THRESHOLD_TOL {
        Capability::Incapable
    } else {
        Capability::Boundary
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pointedness {
    Pointed,
    Boundary,
    NotPointed,
}

fn require_unit_planar(spec: &FrameworkSpec) -> Result<()> {
    if spec.dimension() != 2 {
        return Err(Error::UnsupportedLengths(format!(
            "closed forms need d = 2, got {}",
            spec.dimension()
        )));
    }
    if spec
        .squared_lengths()
        .iter()
        .any(|s| (s - 1.0).abs() > THRESHOLD_TOL)
    {
        return Err(Error::UnsupportedLengths(format!(
            "closed forms need unit lengths, got {:?}",
            spec.squared_lengths()
        )));
    }
    Ok(())
}

/// Pointedness at the origin vertex via `-1 < <p0,p1> + <p1,p2> + <p2,p0>`.
pub fn pointedness_test(spec: &FrameworkSpec) -> Result<Pointedness> {
    require_unit_planar(spec)?;
    let g = gram_of(spec);
    let g = g.matrix();
    let sum = g[(0, 1)] + g[(1, 2)] + g[(2, 0)];
    Ok(if sum > -1.0 + THRESHOLD_TOL {
        Pointedness::Pointed
    } else if sum < -1.0 - THRESHOLD_TOL {
        Pointedness::NotPointed
    } else {
        Pointedness::Boundary
    })
}

/// Largest angular gap between consecutive edge directions around the origin.
pub fn largest_sector_angle(spec: &FrameworkSpec) -> f64 {
    let mut angles: Vec<f64> = spec
        .points()
        .column_iter()
        .map(|c| c[1].atan2(c[0]).rem_euclid(TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    (0..n)
        .map(|i| {
            let next = if i + 1 < n {
                angles[i + 1]
            } else {
                angles[0] + TAU
            };
            next - angles[i]
        })
        .fold(0.0, f64::max)
}

/// Configuration with `p_2` fixed on the positive first axis and `p_0`, `p_1`
/// at angles `phi0`, `phi1`.
pub fn torus_points(s: [f64; 3], phi0: f64, phi1: f64) -> DMatrix<f64> {
    let (r0, r1, r2) = (s[0].sqrt(), s[1].sqrt(), s[2].sqrt());
    DMatrix::from_row_slice(
        2,
        3,
        &[
            r0 * phi0.cos(),
            r1 * phi1.cos(),
            r2,
            r0 * phi0.sin(),
            r1 * phi1.sin(),
            0.0,
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TorusSample {
    pub phi0: f64,
    pub phi1: f64,
    pub volume: f64,
    pub degenerate: bool,
}

pub fn torus_sample(s: [f64; 3], phi0: f64, phi1: f64) -> TorusSample {
    let volume = linalg::generators(&torus_points(s, phi0, phi1)).determinant();
    let degenerate = volume.abs() <= zero_tolerance(&s);
    TorusSample {
        phi0,
        phi1,
        volume,
        degenerate,
    }
}

fn zero_tolerance(s: &[f64; 3]) -> f64 {
    1e-12 * s.iter().copied().fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ComponentInfo {
    /// Sign of the oriented area on this component.
    pub orientation: i8,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TopologyReport {
    pub squared_lengths: [f64; 3],
    pub grid: usize,
    pub components: Vec<ComponentInfo>,
    pub saddle_present: bool,
}

impl TopologyReport {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn euler_characteristics(&self) -> Vec<i64> {
        self.components
            .iter()
            .map(|c| c.euler_characteristic)
            .collect()
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Samples the `(phi0, phi1)` torus on a `grid x grid` mesh and reports the
/// connected components of the non-degenerate region with their Euler
/// characteristics (1 for a disc, 0 for a cylinder).
///
/// Grid vertices carry the sign of the oriented area; a mesh edge or cell
/// belongs to the complex only when all its corners share the same nonzero
/// sign, so cells crossing the degenerate locus are discarded.
pub fn topology_probe(s: [f64; 3], grid: usize) -> Result<TopologyReport> {
    if grid < MIN_GRID {
        return Err(Error::Input(format!(
            "grid must be at least {MIN_GRID}, got {grid}"
        )));
    }
    if s.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::Input("squared lengths must be positive".into()));
    }
    let n = grid;
    let step = TAU / n as f64;
    let sign: Vec<i8> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let sample = torus_sample(s, i as f64 * step, j as f64 * step);
            if sample.degenerate {
                0
            } else if sample.volume > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let at = |i: usize, j: usize| (i % n) * n + (j % n);

    let mut sets = DisjointSet::new(n * n);
    for i in 0..n {
        for j in 0..n {
            let here = sign[at(i, j)];
            if here == 0 {
                continue;
            }
            for (a, b) in [(i + 1, j), (i, j + 1)] {
                if sign[at(a, b)] == here {
                    sets.union(at(i, j), at(a, b));
                }
            }
        }
    }

    let mut roots: Vec<usize> = Vec::new();
    let mut slot = vec![usize::MAX; n * n];
    let mut counts: Vec<(i8, usize, usize, usize)> = Vec::new();
    for (idx, &sg) in sign.iter().enumerate() {
        if sg == 0 {
            continue;
        }
        let r = sets.find(idx);
        if slot[r] == usize::MAX {
            slot[r] = roots.len();
            roots.push(r);
            counts.push((sg, 0, 0, 0));
        }
        counts[slot[r]].1 += 1;
    }
    for i in 0..n {
        for j in 0..n {
            let here = sign[at(i, j)];
            if here == 0 {
                continue;
            }
            let c = slot[sets.find(at(i, j))];
            for (a, b) in [(i + 1, j), (i, j + 1)] {
                if sign[at(a, b)] == here {
                    counts[c].2 += 1;
                }
            }
            if sign[at(i + 1, j)] == here
                && sign[at(i, j + 1)] == here
                && sign[at(i + 1, j + 1)] == here
            {
                counts[c].3 += 1;
            }
        }
    }

    let components = counts
        .into_iter()
        .map(|(orientation, v, e, f)| ComponentInfo {
            orientation,
            vertices: v,
            edges: e,
            faces: f,
            euler_characteristic: v as i64 - e as i64 + f as i64,
        })
        .collect();

    let mut sorted = s;
    sorted.sort_by(f64::total_cmp);
    let saddle_present = find_critical_alphas(&sorted)?
        .iter()
        .any(|a| a.kind == RootKind::PositiveSaddleCandidate);

    Ok(TopologyReport {
        squared_lengths: s,
        grid,
        components,
        saddle_present,
    })
}
