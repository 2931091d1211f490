//! Auxetic capability and auxetic deformation paths.
//!
//! A one-parameter deformation is auxetic when the velocity of the lattice
//! Gram matrix `omega(tau)` stays positive semidefinite. Tangent directions of
//! the deformation space map onto the tangent hyperplane of the realizability
//! hypersurface in omega-space; with `N` the normal of that hyperplane under
//! the trace inner product, a nonzero PSD tangent exists exactly when `N` is
//! not definite, since the PSD cone is self-dual.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::framework::FrameworkSpec;
use crate::gram::{self, OmegaMatrix};
use crate::linalg;

/// Relative eigenvalue slack for PSD checks on `omega_dot`.
pub const PSD_RTOL: f64 = 1e-10;
/// `N` is treated as singular when its smallest `|eigenvalue|` is below this
/// fraction of its largest.
pub const NORMAL_SINGULAR_RTOL: f64 = 1e-9;
/// Consecutive omega increments may dip below zero by at most this times `h`.
pub const INCREMENT_PSD_TOL: f64 = 1e-8;
/// Unit-norm directions whose least eigenvalue is below this are on the cone
/// boundary.
pub const MARGIN_TOL: f64 = 1e-10;

const SAMPLING_SEED: u64 = 0x5eed_d1a3;

/// Per-vertex velocities together with the induced omega velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    /// Columns are the velocities of `p_0..p_d`.
    pub velocities: DMatrix<f64>,
    pub omega_dot: DMatrix<f64>,
}

impl TangentVector {
    pub fn from_velocities(spec: &FrameworkSpec, velocities: DMatrix<f64>) -> Self {
        let omega_dot = omega_velocity(spec, &velocities);
        Self {
            velocities,
            omega_dot,
        }
    }

    /// Largest `|<p_i, pdot_i>|` relative to `|p_i| |pdot_i|`.
    pub fn sphere_tangency_defect(&self, spec: &FrameworkSpec) -> f64 {
        self.velocities
            .column_iter()
            .zip(spec.points().column_iter())
            .map(|(v, p)| {
                let denom = v.norm() * p.norm();
                if denom == 0.0 {
                    0.0
                } else {
                    v.dot(&p).abs() / denom
                }
            })
            .fold(0.0, f64::max)
    }

    /// True when the induced omega velocity vanishes (a rigid motion).
    pub fn is_trivial(&self) -> bool {
        let scale = self.velocities.amax().max(f64::MIN_POSITIVE);
        self.omega_dot.amax() <= 1e-12 * scale
    }
}

/// `d omega_ij = <pdot_i - pdot_0, v_j> + <v_i, pdot_j - pdot_0>`.
pub fn omega_velocity(spec: &FrameworkSpec, velocities: &DMatrix<f64>) -> DMatrix<f64> {
    let gens = linalg::generators(spec.points());
    let dgens = linalg::generators(velocities);
    let prod = dgens.transpose() * &gens;
    &prod + prod.transpose()
}

/// Infinitesimal rotation `pdot_i = A p_i` for a skew matrix `A`.
pub fn rotation_field(spec: &FrameworkSpec, skew: &DMatrix<f64>) -> TangentVector {
    TangentVector::from_velocities(spec, skew * spec.points())
}

fn skew_basis(d: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            let mut m = DMatrix::zeros(d, d);
            m[(a, b)] = 1.0;
            m[(b, a)] = -1.0;
            out.push(m);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `p` in `R^d`.
fn sphere_tangent_frame(p: &DVector<f64>) -> DMatrix<f64> {
    let d = p.len();
    let proj = DMatrix::identity(d, d) - p * p.transpose() / p.norm_squared();
    let (_, vectors) = linalg::sym_eigen(&proj);
    vectors.columns(1, d - 1).into_owned()
}

fn stack(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Basis of the tangent space of the deformation space at `spec`: velocity
/// fields tangent to every sphere and orthogonal to all infinitesimal
/// rotations. Its size is `(d+1 choose 2) - 1`.
pub fn tangent_basis(spec: &FrameworkSpec) -> Result<Vec<TangentVector>> {
    spec.require_nondegenerate()?;
    let d = spec.dimension();
    let n = d + 1;
    let rows = d * n;
    let k = n * (d - 1);

    let mut sphere = DMatrix::zeros(rows, k);
    for i in 0..n {
        let frame = sphere_tangent_frame(&spec.edge_vector(i));
        for t in 0..(d - 1) {
            let col = i * (d - 1) + t;
            for r in 0..d {
                sphere[(i * d + r, col)] = frame[(r, t)];
            }
        }
    }

    let skews = skew_basis(d);
    let m = skews.len();
    let mut rot = DMatrix::zeros(rows, m);
    for (j, a) in skews.iter().enumerate() {
        rot.set_column(j, &stack(&(a * spec.points())));
    }
    let rc = sphere.transpose() * rot;
    let gram = rc.transpose() * &rc;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("rotation fields are dependent".into()))?;
    let proj = DMatrix::identity(k, k) - &rc * inv * rc.transpose();
    let (_, vectors) = linalg::sym_eigen(&proj);

    let dim = k - m;
    let basis = (0..dim)
        .map(|j| {
            let coeffs = vectors.column(k - dim + j);
            let stacked = &sphere * coeffs;
            let velocities = DMatrix::from_column_slice(d, n, stacked.as_slice());
            TangentVector::from_velocities(spec, velocities)
        })
        .collect();
    Ok(basis)
}

fn psd_tolerance(m: &DMatrix<f64>) -> f64 {
    let norm = linalg::trace_inner(m, m).sqrt();
    PSD_RTOL * norm.max(1.0)
}

/// True when every eigenvalue of `m` is at least `-1e-10 max(1, |m|)`.
pub fn is_psd(m: &DMatrix<f64>) -> bool {
    linalg::min_eigenvalue(m) >= -psd_tolerance(m)
}

/// True when the omega velocity of `t` lies in the PSD cone. A trivial
/// direction (`omega_dot = 0`) passes; check [`TangentVector::is_trivial`]
/// separately.
pub fn is_auxetic_direction(t: &TangentVector) -> bool {
    is_psd(&t.omega_dot)
}

/// Normal of the realizability hypersurface at `omega` under the trace inner
/// product: the gradient of the bordered determinant with off-diagonal
/// partials halved.
pub fn hypersurface_normal(omega: &OmegaMatrix, s: &[f64]) -> Result<DMatrix<f64>> {
    let bordered = gram::bordered_matrix(omega, s)?;
    let cof = linalg::cofactor_matrix(&bordered);
    let d = omega.dimension();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            cof[(i + 1, i + 1)] - 0.5 * (cof[(0, i + 1)] + cof[(i + 1, 0)])
        } else {
            0.5 * (cof[(i + 1, j + 1)] + cof[(j + 1, i + 1)])
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Capability {
    Capable,
    Boundary,
    Incapable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Nonzero tangent with PSD omega velocity.
    Tangent(TangentVector),
    /// Definite hypersurface normal.
    Normal(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityVerdict {
    pub verdict: Capability,
    pub normal: DMatrix<f64>,
    pub normal_eigenvalues: Vec<f64>,
    pub certificate: Certificate,
    /// Least eigenvalue of the certificate's unit omega velocity (capable and
    /// boundary verdicts), or zero.
    pub margin: f64,
}

impl CapabilityVerdict {
    /// Re-checks the certificate independently of how it was produced.
    pub fn certificate_holds(&self) -> bool {
        match (&self.verdict, &self.certificate) {
            (Capability::Incapable, Certificate::Normal(n)) => {
                let eig = linalg::sym_eigenvalues(n);
                let tol = NORMAL_SINGULAR_RTOL * eig.amax();
                eig.iter().all(|&x| x > tol) || eig.iter().all(|&x| x < -tol)
            }
            (Capability::Capable | Capability::Boundary, Certificate::Tangent(t)) => {
                is_auxetic_direction(t) && !t.is_trivial()
            }
            _ => false,
        }
    }
}

/// Tangent hyperplane in omega-space with a trace-orthonormal basis and the
/// map back to velocities.
struct TangentChart {
    d: usize,
    /// Columns: trace-orthonormal directions in packed omega coordinates.
    q: DMatrix<f64>,
    /// Velocity field (stacked) for each column of `q`.
    lift: DMatrix<f64>,
}

impl TangentChart {
    fn new(spec: &FrameworkSpec) -> Result<Self> {
        let basis = tangent_basis(spec)?;
        let d = spec.dimension();
        let dim = basis.len();
        let packed_len = d * (d + 1) / 2;
        let mut images = DMatrix::zeros(packed_len, dim);
        let mut velocities = DMatrix::zeros(d * (d + 1), dim);
        for (j, t) in basis.iter().enumerate() {
            images.set_column(j, &linalg::sym_pack(&t.omega_dot));
            velocities.set_column(j, &stack(&t.velocities));
        }
        let qr = images.qr();
        let r_inv = qr
            .r()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("omega map is not injective on tangents".into()))?;
        Ok(Self {
            d,
            q: qr.q(),
            lift: velocities * r_inv,
        })
    }

    fn dim(&self) -> usize {
        self.q.ncols()
    }

    fn omega_dot(&self, c: &DVector<f64>) -> DMatrix<f64> {
        linalg::sym_unpack(&(&self.q * c), self.d)
    }

    fn margin(&self, c: &DVector<f64>) -> f64 {
        linalg::min_eigenvalue(&self.omega_dot(c))
    }

    fn coords_of(&self, m: &DMatrix<f64>) -> DVector<f64> {
        self.q.transpose() * linalg::sym_pack(m)
    }

    fn tangent(&self, spec: &FrameworkSpec, c: &DVector<f64>) -> TangentVector {
        let stacked = &self.lift * c;
        let velocities = DMatrix::from_column_slice(self.d, self.d + 1, stacked.as_slice());
        TangentVector::from_velocities(spec, velocities)
    }

    /// Unit direction maximizing the least eigenvalue of omega_dot: dense
    /// sampling, then projected supergradient ascent from the best samples.
    fn max_margin(&self, seeds: &[DVector<f64>]) -> (DVector<f64>, f64) {
        let k = self.dim();
        let mut candidates: Vec<DVector<f64>> = seeds
            .iter()
            .filter(|c| c.norm() > 0.0)
            .map(|c| c.normalize())
            .collect();
        if k == 2 {
            candidates.extend((0..720).map(|i| {
                let t = i as f64 * std::f64::consts::PI / 360.0;
                DVector::from_vec(vec![t.cos(), t.sin()])
            }));
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
            for _ in 0..4096 {
                let v = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0));
                if v.norm() > 1e-3 {
                    candidates.push(v.normalize());
                }
            }
        }
        let mut scored: Vec<(f64, DVector<f64>)> = candidates
            .into_iter()
            .map(|c| (self.margin(&c), c))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        scored.truncate(8);

        let mut best = scored[0].clone();
        for (score, start) in scored {
            let (c, m) = self.refine(start, score);
            if m > best.0 {
                best = (m, c);
            }
        }
        (best.1, best.0)
    }

    fn refine(&self, mut c: DVector<f64>, mut value: f64) -> (DVector<f64>, f64) {
        let mut step = 0.05;
        for _ in 0..400 {
            let (_, vectors) = linalg::sym_eigen(&self.omega_dot(&c));
            let v = vectors.column(0);
            let grad = self.coords_of(&(v * v.transpose()));
            let tangential = &grad - &c * grad.dot(&c);
            if tangential.norm() < 1e-14 {
                break;
            }
            let trial = (&c + tangential * step).normalize();
            let trial_value = self.margin(&trial);
            if trial_value > value {
                c = trial;
                value = trial_value;
                step *= 1.5;
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        (c, value)
    }
}

/// Decides whether some nonzero tangent at `spec` has a PSD omega velocity.
pub fn capability_test(spec: &FrameworkSpec) -> Result<CapabilityVerdict> {
    spec.require_nondegenerate()?;
    let omega = gram::omega_of(spec);
    let normal = hypersurface_normal(&omega, spec.squared_lengths())?;
    let (eig, vecs) = linalg::sym_eigen(&normal);
    let d = spec.dimension();
    let scale = eig.amax();
    let tol = NORMAL_SINGULAR_RTOL * scale;
    let positive = eig.iter().filter(|&&x| x > tol).count();
    let negative = eig.iter().filter(|&&x| x < -tol).count();
    let normal_eigenvalues: Vec<f64> = eig.iter().copied().collect();

    if scale > 0.0 && (positive == d || negative == d) {
        return Ok(CapabilityVerdict {
            verdict: Capability::Incapable,
            normal: normal.clone(),
            normal_eigenvalues,
            certificate: Certificate::Normal(normal),
            margin: 0.0,
        });
    }

    let chart = TangentChart::new(spec)?;
    let mut seeds = Vec::new();
    if positive > 0 && negative > 0 {
        // -n_min u u^T + n_max w w^T is PSD and trace-orthogonal to N
        let (lo, hi) = (eig[0], eig[d - 1]);
        let u = vecs.column(d - 1);
        let w = vecs.column(0);
        let x = u * u.transpose() * (-lo) + w * w.transpose() * hi;
        seeds.push(chart.coords_of(&x));
    } else {
        for i in 0..d {
            if eig[i].abs() <= tol {
                let u = vecs.column(i);
                seeds.push(chart.coords_of(&(u * u.transpose())));
            }
        }
    }
    let (c, margin) = chart.max_margin(&seeds);
    let verdict = if positive > 0 && negative > 0 {
        Capability::Capable
    } else {
        Capability::Boundary
    };
    let certificate = Certificate::Tangent(chart.tangent(spec, &c));
    Ok(CapabilityVerdict {
        verdict,
        normal,
        normal_eigenvalues,
        certificate,
        margin,
    })
}

/// Capability test for a point given in omega coordinates.
pub fn capability_at(omega: &OmegaMatrix, s: &[f64]) -> Result<CapabilityVerdict> {
    let spec = gram::realize_from_omega(omega, s)?;
    capability_test(&spec)
}

/// Rule for choosing the tangent direction at each step of a traced path.
#[derive(Debug, Clone, PartialEq)]
pub enum Steering {
    /// Maximize the least eigenvalue of the unit omega velocity.
    MaxMargin,
    /// Follow the projection of a prescribed symmetric strain direction onto
    /// the tangent hyperplane.
    Strain(DMatrix<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Completed,
    LostCapability,
    NearDegeneracy,
    IncrementNotPsd,
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub tau: f64,
    pub spec: FrameworkSpec,
    pub omega: OmegaMatrix,
    pub volume: f64,
    /// Least eigenvalue of `omega(tau_k) - omega(tau_{k-1})`; `None` for the
    /// first sample.
    pub increment_min_eigenvalue: Option<f64>,
    /// Least eigenvalue of the unit omega velocity used to reach this sample.
    pub direction_margin: Option<f64>,
    /// Largest `| |p_i| - sqrt(s_i) |` after projection back to the spheres.
    pub length_drift: f64,
}

impl TrajectorySample {
    /// True when the step into this sample used a direction on the boundary
    /// of the PSD cone.
    pub fn on_cone_boundary(&self) -> bool {
        self.direction_margin.is_some_and(|m| m <= MARGIN_TOL)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub stop: StopReason,
    pub step_size: f64,
}

fn project_to_spheres(points: DMatrix<f64>, s: &[f64]) -> DMatrix<f64> {
    let mut points = points;
    for (i, mut col) in points.column_iter_mut().enumerate() {
        let norm = col.norm();
        col *= s[i].sqrt() / norm;
    }
    points
}

fn steer(spec: &FrameworkSpec, steering: &Steering) -> Result<(TangentVector, f64)> {
    let chart = TangentChart::new(spec)?;
    let c = match steering {
        Steering::MaxMargin => {
            let omega = gram::omega_of(spec);
            let normal = hypersurface_normal(&omega, spec.squared_lengths())?;
            let (eig, vecs) = linalg::sym_eigen(&normal);
            let d = spec.dimension();
            let u = vecs.column(d - 1);
            let w = vecs.column(0);
            let seed =
                u * u.transpose() * (-eig[0]).max(0.0) + w * w.transpose() * eig[d - 1].max(0.0);
            chart.max_margin(&[chart.coords_of(&seed)]).0
        }
        Steering::Strain(target) => {
            if target.nrows() != spec.dimension() || !target.is_square() {
                return Err(Error::Shape("strain direction must be d x d".into()));
            }
            let c = chart.coords_of(target);
            if c.norm() == 0.0 {
                return Err(Error::Input(
                    "strain direction is normal to the deformation space".into(),
                ));
            }
            c.normalize()
        }
    };
    let margin = chart.margin(&c);
    Ok((chart.tangent(spec, &c), margin))
}

/// Follows an auxetic path from `start` with explicit steps of size `h`,
/// projecting back to the spheres after each step.
pub fn trace_auxetic_path(
    start: &FrameworkSpec,
    steps: usize,
    step_size: f64,
    steering: &Steering,
) -> Result<Trajectory> {
    if !step_size.is_finite() || step_size <= 0.0 {
        return Err(Error::Input("step size must be positive".into()));
    }
    let verdict = capability_test(start)?;
    if verdict.verdict != Capability::Capable {
        return Err(Error::Incapable(format!(
            "start verdict is {:?}",
            verdict.verdict
        )));
    }
    let s: Vec<f64> = start.squared_lengths().to_vec();
    let mut samples = vec![TrajectorySample {
        tau: 0.0,
        spec: start.clone(),
        omega: gram::omega_of(start),
        volume: start.volume(),
        increment_min_eigenvalue: None,
        direction_margin: None,
        length_drift: 0.0,
    }];
    let mut stop = StopReason::Completed;

    for k in 1..=steps {
        let current = &samples[samples.len() - 1];
        let (tangent, margin) = steer(&current.spec, steering)?;
        if margin <= MARGIN_TOL {
            stop = StopReason::LostCapability;
            break;
        }
        let moved = project_to_spheres(current.spec.points() + &tangent.velocities * step_size, &s);
        let next = match FrameworkSpec::from_matrix(moved) {
            Ok(spec) if !spec.is_degenerate() => spec,
            _ => {
                stop = StopReason::NearDegeneracy;
                break;
            }
        };
        let omega = gram::omega_of(&next);
        let increment = omega.matrix() - current.omega.matrix();
        let inc_min = linalg::min_eigenvalue(&increment);
        if inc_min < -INCREMENT_PSD_TOL * step_size {
            stop = StopReason::IncrementNotPsd;
            break;
        }
        let length_drift = next
            .points()
            .column_iter()
            .zip(&s)
            .map(|(p, si)| (p.norm() - si.sqrt()).abs())
            .fold(0.0, f64::max);
        samples.push(TrajectorySample {
            tau: k as f64 * step_size,
            volume: next.volume(),
            spec: next,
            omega,
            increment_min_eigenvalue: Some(inc_min),
            direction_margin: Some(margin),
            length_drift,
        });
    }
    Ok(Trajectory {
        samples,
        stop,
        step_size,
    })
}
