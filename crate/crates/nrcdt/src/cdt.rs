//! Cumulative distribution transforms over Radon projections and the
//! Wasserstein-type distances built from them.
//!
//! The CDT of a line measure is its quantile function sampled at the
//! levels of a fixed reference grid (the uniform distribution on `[0, 1]`
//! discretized by midpoints). Applying it direction-wise to the slices of
//! a planar measure gives the R-CDT field; standardizing each directional
//! curve to zero mean and unit standard deviation and taking the pointwise
//! maximum over all directions yields a curve that is invariant under
//! invertible affine transformations of the input measure.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure1D, DiscreteMeasure2D};
use crate::radon::{antipodal_reflect, slice, AngleGrid, Direction};

/// Default lower bound on a directional standard deviation; below it the
/// projection is numerically a point mass and standardizing would amplify
/// noise.
pub const DEFAULT_EPS_STD: f64 = 1e-8;

/// Default relative collinearity threshold: a measure counts as collinear
/// when the smaller covariance singular value is at most this fraction of
/// the larger one.
pub const COLLINEARITY_REL_TOL: f64 = 1e-9;

/// Midpoint levels `(k + 0.5) / M` of the uniform reference measure on
/// `[0, 1]`. Midpoints avoid evaluating quantiles at 0 and 1, where the
/// generalized inverse degenerates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    levels: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("quantile count must be >= 1".into()));
        }
        let levels = (0..count)
            .map(|k| (k as f64 + 0.5) / count as f64)
            .collect();
        Ok(QuantileGrid { levels })
    }

    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// Quantile values of one projection at the reference grid levels.
/// Nondecreasing by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CdtCurve {
    values: Vec<f64>,
}

impl CdtCurve {
    fn from_values(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        CdtCurve { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// CDT of a line measure: its quantile function sampled at the grid
/// levels. Every value is an atom position of `m`.
pub fn cdt(m: &DiscreteMeasure1D, grid: &QuantileGrid) -> CdtCurve {
    let values = grid
        .levels()
        .iter()
        .map(|&level| m.quantile(level).expect("grid levels lie in [0, 1)"))
        .collect();
    CdtCurve::from_values(values)
}

/// Wasserstein-2 distance of two measures through their CDT curves:
/// the root mean square gap under the reference measure.
pub fn wasserstein2(a: &CdtCurve, b: &CdtCurve) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// The CDT curves of all slices of a planar measure.
///
/// Curves are ordered grid angles first, then their antipodes:
/// `[t_0, .., t_{L-1}, t_0 + pi, .., t_{L-1} + pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RcdtField {
    angle_count: usize,
    direction_angles: Vec<f64>,
    curves: Vec<CdtCurve>,
}

impl RcdtField {
    /// Builds a field from explicit per-direction curves. All curves must
    /// share one length and match the number of angles.
    pub fn from_curves(direction_angles: Vec<f64>, curves: Vec<CdtCurve>) -> Result<Self> {
        if direction_angles.len() != curves.len() {
            return Err(Error::DimensionMismatch {
                left: direction_angles.len(),
                right: curves.len(),
            });
        }
        if curves.is_empty() {
            return Err(Error::InvalidConfig(
                "field needs at least one curve".into(),
            ));
        }
        let m = curves[0].len();
        if curves.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidConfig("curves have unequal lengths".into()));
        }
        Ok(RcdtField {
            angle_count: direction_angles.len() / 2,
            direction_angles,
            curves,
        })
    }

    /// Number of grid angles `L` (half the number of directions).
    pub fn angle_count(&self) -> usize {
        self.angle_count
    }

    /// Number of directions (grid angles plus antipodes).
    pub fn direction_count(&self) -> usize {
        self.curves.len()
    }

    pub fn quantile_count(&self) -> usize {
        self.curves.first().map_or(0, CdtCurve::len)
    }

    pub fn direction_angles(&self) -> &[f64] {
        &self.direction_angles
    }

    pub fn curves(&self) -> &[CdtCurve] {
        &self.curves
    }

    /// Flat copy of all curve values, curve-major.
    pub fn flatten(&self) -> Vec<f64> {
        self.curves
            .iter()
            .flat_map(|c| c.values().iter().copied())
            .collect()
    }
}

/// R-CDT of a planar measure: the CDT of each slice along the grid
/// directions and their antipodes, all against the same reference grid.
pub fn rcdt(m: &DiscreteMeasure2D, angles: &AngleGrid, grid: &QuantileGrid) -> RcdtField {
    let pairs: Vec<(CdtCurve, CdtCurve)> = angles
        .angles()
        .par_iter()
        .map(|&theta| {
            let s = slice(m, &Direction::from_angle(theta));
            let forward = cdt(&s, grid);
            let backward = cdt(&antipodal_reflect(&s), grid);
            (forward, backward)
        })
        .collect();

    let mut direction_angles = Vec::with_capacity(2 * pairs.len());
    let mut curves = Vec::with_capacity(2 * pairs.len());
    for (theta, (forward, _)) in angles.angles().iter().zip(&pairs) {
        direction_angles.push(*theta);
        curves.push(forward.clone());
    }
    for (theta, (_, backward)) in angles.angles().iter().zip(&pairs) {
        direction_angles.push(*theta + std::f64::consts::PI);
        curves.push(backward.clone());
    }
    RcdtField {
        angle_count: angles.count(),
        direction_angles,
        curves,
    }
}

/// Sliced Wasserstein-2 distance of two fields: the root mean square over
/// directions of the per-direction Wasserstein-2 distances.
pub fn sliced_wasserstein2(a: &RcdtField, b: &RcdtField) -> Result<f64> {
    if a.direction_count() != b.direction_count() {
        return Err(Error::DimensionMismatch {
            left: a.direction_count(),
            right: b.direction_count(),
        });
    }
    let mut sum = 0.0;
    for (ca, cb) in a.curves.iter().zip(&b.curves) {
        let w = wasserstein2(ca, cb)?;
        sum += w * w;
    }
    Ok((sum / a.direction_count() as f64).sqrt())
}

/// An R-CDT field with every directional curve standardized to zero mean
/// and unit standard deviation under the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct NrcdtField {
    angle_count: usize,
    direction_angles: Vec<f64>,
    curves: Vec<CdtCurve>,
    // Pre-normalization moments of each directional curve.
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl NrcdtField {
    pub fn angle_count(&self) -> usize {
        self.angle_count
    }

    pub fn direction_count(&self) -> usize {
        self.curves.len()
    }

    pub fn quantile_count(&self) -> usize {
        self.curves.first().map_or(0, CdtCurve::len)
    }

    pub fn direction_angles(&self) -> &[f64] {
        &self.direction_angles
    }

    pub fn curves(&self) -> &[CdtCurve] {
        &self.curves
    }

    /// Pre-normalization mean of each directional curve.
    pub fn curve_means(&self) -> &[f64] {
        &self.means
    }

    /// Pre-normalization standard deviation of each directional curve.
    pub fn curve_stds(&self) -> &[f64] {
        &self.stds
    }

    /// Reinterprets the normalized curves as a plain field, e.g. to
    /// normalize again or to measure sliced distances on normalized data.
    pub fn as_rcdt(&self) -> RcdtField {
        RcdtField {
            angle_count: self.angle_count,
            direction_angles: self.direction_angles.clone(),
            curves: self.curves.clone(),
        }
    }
}

fn curve_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Standardizes every directional curve of a field.
///
/// Fails with [`Error::DegenerateProjection`] if some curve's standard
/// deviation falls below `eps_std`, which signals (numerically) collinear
/// support orthogonal to that direction.
pub fn normalize(field: &RcdtField, eps_std: f64) -> Result<NrcdtField> {
    let mut curves = Vec::with_capacity(field.curves.len());
    let mut means = Vec::with_capacity(field.curves.len());
    let mut stds = Vec::with_capacity(field.curves.len());
    for (curve, &theta) in field.curves.iter().zip(&field.direction_angles) {
        let (mean, std) = curve_moments(curve.values());
        if std < eps_std {
            return Err(Error::DegenerateProjection { theta, std });
        }
        curves.push(CdtCurve::from_values(
            curve.values().iter().map(|&v| (v - mean) / std).collect(),
        ));
        means.push(mean);
        stds.push(std);
    }
    Ok(NrcdtField {
        angle_count: field.angle_count,
        direction_angles: field.direction_angles.clone(),
        curves,
        means,
        stds,
    })
}

/// The standardized CDT curve of a single projection, at an arbitrary
/// direction outside any grid.
pub fn nrcdt_at(
    m: &DiscreteMeasure2D,
    d: &Direction,
    grid: &QuantileGrid,
    eps_std: f64,
) -> Result<CdtCurve> {
    let curve = cdt(&slice(m, d), grid);
    let (mean, std) = curve_moments(curve.values());
    if std < eps_std {
        return Err(Error::DegenerateProjection {
            theta: d.theta(),
            std,
        });
    }
    Ok(CdtCurve::from_values(
        curve.values().iter().map(|&v| (v - mean) / std).collect(),
    ))
}

/// The per-level maximum over all directions of the normalized field;
/// the affine-invariant signature of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MnrcdtCurve {
    values: Vec<f64>,
}

impl MnrcdtCurve {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Knobs of the max-normalized transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MnrcdtOptions {
    /// Lower bound on directional standard deviations.
    pub eps_std: f64,
    /// Take the maximum over grid angles and their antipodes (the full
    /// circle). Disabling restricts the maximum to `[0, pi)`, which
    /// changes the transform; kept only for comparison runs.
    pub include_antipodes: bool,
    /// Relative threshold for the support collinearity precondition.
    pub collinearity_tol: f64,
}

impl Default for MnrcdtOptions {
    fn default() -> Self {
        MnrcdtOptions {
            eps_std: DEFAULT_EPS_STD,
            include_antipodes: true,
            collinearity_tol: COLLINEARITY_REL_TOL,
        }
    }
}

/// Max-normalized R-CDT with default options.
pub fn mnrcdt(
    m: &DiscreteMeasure2D,
    angles: &AngleGrid,
    grid: &QuantileGrid,
) -> Result<MnrcdtCurve> {
    mnrcdt_with(m, angles, grid, &MnrcdtOptions::default())
}

/// Max-normalized R-CDT: the pointwise maximum over directions of the
/// standardized directional curves.
pub fn mnrcdt_with(
    m: &DiscreteMeasure2D,
    angles: &AngleGrid,
    grid: &QuantileGrid,
    opts: &MnrcdtOptions,
) -> Result<MnrcdtCurve> {
    let (lo, hi) = m.covariance_singular_values();
    if lo <= opts.collinearity_tol * hi {
        return Err(Error::CollinearSupport(format!(
            "covariance singular values ({lo:e}, {hi:e})"
        )));
    }
    let field = normalize(&rcdt(m, angles, grid), opts.eps_std)?;
    let used = if opts.include_antipodes {
        field.curves()
    } else {
        &field.curves()[..field.angle_count()]
    };
    let mut values = vec![f64::NEG_INFINITY; grid.count()];
    for curve in used {
        for (v, &c) in values.iter_mut().zip(curve.values()) {
            if c > *v {
                *v = c;
            }
        }
    }
    Ok(MnrcdtCurve { values })
}

/// Norms for comparing curves and feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// Sup norm `max_k |a_k - b_k|`.
    Chebyshev,
    /// Root mean square gap under the reference measure.
    Euclidean,
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "chebyshev" => Ok(Norm::Chebyshev),
            "l2" | "euclidean" => Ok(Norm::Euclidean),
            other => Err(Error::InvalidConfig(format!(
                "unknown norm {other:?}, expected inf or l2"
            ))),
        }
    }
}

/// Distance between two signature curves under the chosen norm.
pub fn curve_distance(a: &MnrcdtCurve, b: &MnrcdtCurve, norm: Norm) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let d = match norm {
        Norm::Chebyshev => a
            .values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| (x - y).abs())
            .fold(0.0, f64::max),
        Norm::Euclidean => {
            let sum: f64 = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum();
            (sum / a.len() as f64).sqrt()
        }
    };
    Ok(d)
}
