//! Critical points of the unit-cell volume on the product of spheres.
//!
//! At a critical configuration with nonzero volume every pairwise inner
//! product `<p_i, p_j>` (i != j) equals a common value `alpha`, which must be a
//! root of `det(S(alpha)) = 0` where `S(alpha)` has diagonal `s` and constant
//! off-diagonal `alpha`. For sorted distinct `s` the roots interlace: one in
//! each `(s_i, s_{i+1})` plus a unique negative root. The negative root gives
//! the maximal `|V|`; the smallest positive root, when simple, gives a saddle.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::framework::FrameworkSpec;
use crate::gram::gram_of;
use crate::linalg;

/// Squared lengths closer than this (relative to `max s`) are treated as equal.
pub const TIE_RTOL: f64 = 1e-12;
/// Bisection stops once the bracket is narrower than this times `max s`.
pub const BISECTION_RTOL: f64 = 1e-13;
/// Lagrange residual at or below which a configuration counts as critical.
pub const CRITICAL_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    /// The unique negative root: absolute maximum of `|V|`.
    NegativeExtremum,
    /// Smallest positive root when simple: a saddle configuration.
    PositiveSaddleCandidate,
    /// Larger positive roots; excluded by Cauchy-Schwarz.
    PositiveNonrealizable,
    /// Root sitting on a repeated squared length; realizing it forces
    /// coincident edge vectors.
    MultipleRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CriticalAlpha {
    pub value: f64,
    pub kind: RootKind,
    /// Isolating interval the root was located in.
    pub bracket: (f64, f64),
    pub multiplicity: usize,
}

/// `det(S(alpha))`, evaluated through the division-free expansion
/// `prod(s_i - a) + a * sum_i prod_{j != i}(s_j - a)`, which stays accurate at
/// and near the poles `a = s_i`.
pub fn charpoly_eval(alpha: f64, s: &[f64]) -> f64 {
    weighted_secular(alpha, s.iter().map(|&x| (x, 1)))
}

/// `prod_k (sigma_k - a) + a * sum_k m_k prod_{l != k}(sigma_l - a)`, the
/// characteristic determinant with the factors `(sigma_k - a)^(m_k - 1)` of
/// repeated values divided out.
fn weighted_secular(alpha: f64, groups: impl Iterator<Item = (f64, usize)> + Clone) -> f64 {
    let diffs: Vec<(f64, usize)> = groups.map(|(s, m)| (s - alpha, m)).collect();
    let n = diffs.len();
    let mut prefix = vec![1.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] * diffs[k].0;
    }
    let mut suffix = 1.0;
    let mut sum = 0.0;
    for k in (0..n).rev() {
        sum += diffs[k].1 as f64 * prefix[k] * suffix;
        suffix *= diffs[k].0;
    }
    prefix[n] + alpha * sum
}

fn validate_sorted(s: &[f64]) -> Result<()> {
    if s.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 squared lengths, got {}",
            s.len()
        )));
    }
    if s.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::Input(
            "squared lengths must be positive and finite".into(),
        ));
    }
    if s.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Input(
            "squared lengths must be sorted ascending".into(),
        ));
    }
    Ok(())
}

/// Groups of equal squared lengths as `(value, count)`.
fn tie_groups(s: &[f64]) -> Vec<(f64, usize)> {
    let tol = TIE_RTOL * s.iter().copied().fold(0.0, f64::max);
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for &x in s {
        match groups.last_mut() {
            Some((v, m)) if (x - *v).abs() <= tol => *m += 1,
            _ => groups.push((x, 1)),
        }
    }
    groups
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All `d + 1` real roots (with multiplicity) of the characteristic
/// determinant, sorted ascending and classified.
pub fn find_critical_alphas(s: &[f64]) -> Result<Vec<CriticalAlpha>> {
    validate_sorted(s)?;
    let groups = tie_groups(s);
    let smax = s[s.len() - 1];
    let width = BISECTION_RTOL * smax;
    let reduced = |a: f64| weighted_secular(a, groups.iter().copied());

    let mut roots = Vec::with_capacity(s.len());

    // reduced(0) = prod s > 0 and reduced -> -inf as a -> -inf
    let mut lo = -smax;
    while reduced(lo) > 0.0 {
        lo *= 2.0;
    }
    roots.push(CriticalAlpha {
        value: bisect(reduced, lo, 0.0, width),
        kind: RootKind::NegativeExtremum,
        bracket: (lo, 0.0),
        multiplicity: 1,
    });

    let mut positive = Vec::new();
    for (k, &(sigma, m)) in groups.iter().enumerate() {
        if m > 1 {
            positive.push(CriticalAlpha {
                value: sigma,
                kind: RootKind::MultipleRoot,
                bracket: (sigma, sigma),
                multiplicity: m - 1,
            });
        }
        if let Some(&(next, _)) = groups.get(k + 1) {
            positive.push(CriticalAlpha {
                value: bisect(reduced, sigma, next, width),
                kind: RootKind::PositiveNonrealizable,
                bracket: (sigma, next),
                multiplicity: 1,
            });
        }
    }
    positive.sort_by(|a, b| a.value.total_cmp(&b.value));
    if let Some(first) = positive.first_mut() {
        if first.kind != RootKind::MultipleRoot {
            first.kind = RootKind::PositiveSaddleCandidate;
        }
    }
    roots.extend(positive);
    Ok(roots)
}

/// Realizes the configuration whose pairwise inner products all equal
/// `alpha.value`, with positive orientation and fixed gauge.
pub fn realize_critical(alpha: &CriticalAlpha, s: &[f64]) -> Result<FrameworkSpec> {
    match alpha.kind {
        RootKind::NegativeExtremum | RootKind::PositiveSaddleCandidate => {}
        other => {
            return Err(Error::Input(format!(
                "root of kind {other:?} has no critical realization"
            )));
        }
    }
    if s.len() < 3 || s.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::Input(
            "need at least 3 positive squared lengths".into(),
        ));
    }
    let n = s.len();
    let d = n - 1;
    let a = alpha.value;
    let gram = DMatrix::from_fn(n, n, |i, j| if i == j { s[i] } else { a });
    let eig = linalg::sym_eigenvalues(&gram);
    let top = eig[n - 1];
    if eig[0] < -1e-8 * top {
        return Err(Error::Realization(format!(
            "negative eigenvalue {:e}",
            eig[0]
        )));
    }
    if eig[1] <= 1e-10 * top {
        return Err(Error::Realization(format!(
            "rank below d (second eigenvalue {:e})",
            eig[1]
        )));
    }
    let mut points = linalg::factor_psd(&gram, d);
    if linalg::generators(&points).determinant() < 0.0 {
        points.row_mut(d - 1).neg_mut();
    }
    FrameworkSpec::from_matrix(linalg::gauge_fix(&points))
}

/// Columns are `dV/dp_0, .., dV/dp_d`, built from the signed cofactors of the
/// generator matrix.
pub fn volume_gradient(spec: &FrameworkSpec) -> DMatrix<f64> {
    let d = spec.dimension();
    let cof = linalg::cofactor_matrix(&linalg::generators(spec.points()));
    let mut grad = DMatrix::zeros(d, d + 1);
    let mut g0 = DVector::zeros(d);
    for i in 1..=d {
        let gi = cof.column(i - 1);
        g0 -= gi;
        grad.set_column(i, &gi);
    }
    grad.set_column(0, &g0);
    grad
}

/// Largest relative size of the part of `dV/dp_i` orthogonal to `p_i`;
/// zero exactly at critical points.
pub fn lagrange_residual(spec: &FrameworkSpec) -> f64 {
    let grad = volume_gradient(spec);
    let s = spec.squared_lengths();
    let mut worst: f64 = 0.0;
    for (i, g) in grad.column_iter().enumerate() {
        let gn = g.norm();
        if gn == 0.0 {
            continue;
        }
        let p = spec.points().column(i);
        let tangential = g - p * (g.dot(&p) / s[i]);
        worst = worst.max(tangential.norm() / gn);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LagrangeMultipliers {
    pub values: Vec<f64>,
    pub residual: f64,
    /// False when the configuration is not critical; the values are then
    /// only the radial components of the gradient.
    pub critical: bool,
}

impl LagrangeMultipliers {
    /// `sum_i lambda_i s_i`, which equals `d V` by Euler's identity.
    pub fn weighted_sum(&self, s: &[f64]) -> f64 {
        self.values.iter().zip(s).map(|(l, s)| l * s).sum()
    }
}

pub fn lagrange_multipliers(spec: &FrameworkSpec) -> LagrangeMultipliers {
    let grad = volume_gradient(spec);
    let s = spec.squared_lengths();
    let values = grad
        .column_iter()
        .enumerate()
        .map(|(i, g)| g.dot(&spec.points().column(i)) / s[i])
        .collect();
    let residual = lagrange_residual(spec);
    LagrangeMultipliers {
        values,
        residual,
        critical: residual <= CRITICAL_RESIDUAL_TOL,
    }
}

/// Decomposition `p_i = mu p_0 + q_i` with `q_i` orthogonal to `p_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub alpha: f64,
    pub mu: f64,
    /// Columns are `q_1..q_d`.
    pub q: DMatrix<f64>,
}

impl DescentConfig {
    /// Expected common value of `<q_i, q_j>`, i != j: `alpha (1 - alpha / s_0)`.
    pub fn expected_cross(&self, s0: f64) -> f64 {
        self.alpha * (1.0 - self.alpha / s0)
    }
}

pub fn descent_config(spec: &FrameworkSpec) -> Result<DescentConfig> {
    let s = spec.squared_lengths();
    let n = s.len();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let g = gram_of(spec);
    let g = g.matrix();
    let mut off = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            off.push(g[(i, j)]);
        }
    }
    let alpha = off.iter().sum::<f64>() / off.len() as f64;
    if off.iter().any(|x| (x - alpha).abs() > 1e-8 * smax) {
        return Err(Error::SaddleRequired(
            "pairwise inner products are not all equal".into(),
        ));
    }
    if s[1..].iter().any(|&x| x <= s[0] * (1.0 + TIE_RTOL)) {
        return Err(Error::SaddleRequired(
            "requires s_0 < s_i for all i >= 1".into(),
        ));
    }
    if alpha <= s[0] {
        return Err(Error::SaddleRequired(format!(
            "common inner product {alpha} is not above s_0"
        )));
    }
    let mu = alpha / s[0];
    let p0 = spec.edge_vector(0);
    let d = spec.dimension();
    let mut q = DMatrix::zeros(d, d);
    for i in 1..=d {
        q.set_column(i - 1, &(spec.points().column(i) - &p0 * mu));
    }
    Ok(DescentConfig { alpha, mu, q })
}

/// Realized critical point together with its multipliers.
#[derive(Debug, Clone)]
pub struct RealizedCritical {
    pub alpha: CriticalAlpha,
    pub spec: FrameworkSpec,
    pub multipliers: LagrangeMultipliers,
}

#[derive(Debug, Clone)]
pub struct CriticalityReport {
    pub alphas: Vec<CriticalAlpha>,
    pub max_volume: RealizedCritical,
    pub saddle: Option<RealizedCritical>,
}

impl CriticalityReport {
    pub fn max_abs_volume(&self) -> f64 {
        self.max_volume.spec.volume().abs()
    }
}

/// Roots, classification and realized critical points for squared lengths `s`
/// (sorted ascending). The reflected copy of each realization, with opposite
/// volume, is not listed separately.
pub fn criticality_report(s: &[f64]) -> Result<CriticalityReport> {
    let alphas = find_critical_alphas(s)?;
    let realize = |alpha: &CriticalAlpha| -> Result<RealizedCritical> {
        let spec = realize_critical(alpha, s)?;
        let multipliers = lagrange_multipliers(&spec);
        Ok(RealizedCritical {
            alpha: *alpha,
            spec,
            multipliers,
        })
    };
    let max_volume = realize(&alphas[0])?;
    let saddle = alphas
        .iter()
        .find(|a| a.kind == RootKind::PositiveSaddleCandidate)
        .map(realize)
        .transpose()?;
    Ok(CriticalityReport {
        alphas,
        max_volume,
        saddle,
    })
}
