//! Slicing pushforward of planar measures, angle grids, and affine maps.
//!
//! Slicing a measure along a direction is the measure analogue of the
//! restricted Radon transform: each atom is projected onto the direction
//! and keeps its weight. Affine maps act on atom coordinates exactly, so
//! the closed-form transformation laws in this module hold atom-exactly
//! rather than up to interpolation error.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure1D, DiscreteMeasure2D, Point2};

/// A unit direction on the circle, stored as angle plus unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    ux: f64,
    uy: f64,
}

impl Direction {
    /// Direction at angle `theta` (radians), `(cos theta, sin theta)`.
    pub fn from_angle(theta: f64) -> Self {
        Direction {
            theta,
            ux: theta.cos(),
            uy: theta.sin(),
        }
    }

    /// Direction of a nonzero vector.
    pub fn from_vector(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite(format!("direction vector ({x}, {y})")));
        }
        if x == 0.0 && y == 0.0 {
            return Err(Error::OutOfRange("zero direction vector".into()));
        }
        Ok(Direction::from_angle(y.atan2(x)))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit vector components `(cos theta, sin theta)`.
    pub fn unit(&self) -> (f64, f64) {
        (self.ux, self.uy)
    }

    /// The opposite direction, at angle `theta + pi`.
    pub fn antipode(&self) -> Self {
        Direction::from_angle(self.theta + PI)
    }

    /// Projection of a point onto this direction.
    pub fn project(&self, p: &Point2) -> f64 {
        p.x * self.ux + p.y * self.uy
    }
}

/// Equispaced angles `j * pi / L` for `j = 0 .. L-1`, covering `[0, pi)`.
///
/// Together with their antipodes these cover the full circle.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    angles: Vec<f64>,
}

impl AngleGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("angle count must be >= 1".into()));
        }
        let angles = (0..count).map(|j| j as f64 * PI / count as f64).collect();
        Ok(AngleGrid { angles })
    }

    pub fn count(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        self.angles.iter().map(|&a| Direction::from_angle(a))
    }
}

/// Projects every atom of `m` onto the direction `d`.
///
/// Coincident projections are merged; the total mass is preserved.
pub fn slice(m: &DiscreteMeasure2D, d: &Direction) -> DiscreteMeasure1D {
    DiscreteMeasure1D::from_atoms(
        m.points()
            .iter()
            .zip(m.weights())
            .map(|(p, &w)| (d.project(p), w)),
    )
    .expect("a valid planar measure has a positively-weighted atom")
}

/// Negation pushforward of a line measure: the projection onto `-d` is the
/// reflected projection onto `d`. Weights follow their atoms bit-for-bit,
/// so double application is the exact identity.
pub fn antipodal_reflect(m: &DiscreteMeasure1D) -> DiscreteMeasure1D {
    let positions: Vec<f64> = m.positions().iter().rev().map(|&p| -p).collect();
    let weights: Vec<f64> = m.weights().iter().rev().copied().collect();
    DiscreteMeasure1D::from_normalized_sorted(positions, weights)
}

/// An invertible affine map `x -> A x + y` of the plane.
///
/// Matrix entries are row-major: `A = [[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub y1: f64,
    pub y2: f64,
}

/// Determinants at or below this magnitude count as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

impl AffineMap {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64, y1: f64, y2: f64) -> Result<Self> {
        for (name, v) in [
            ("a11", a11),
            ("a12", a12),
            ("a21", a21),
            ("a22", a22),
            ("y1", y1),
            ("y2", y2),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("affine entry {name} = {v}")));
            }
        }
        let det = a11 * a22 - a12 * a21;
        if det.abs() <= SINGULAR_TOL {
            return Err(Error::SingularMatrix { det });
        }
        Ok(AffineMap {
            a11,
            a12,
            a21,
            a22,
            y1,
            y2,
        })
    }

    pub fn identity() -> Self {
        AffineMap {
            a11: 1.0,
            a12: 0.0,
            a21: 0.0,
            a22: 1.0,
            y1: 0.0,
            y2: 0.0,
        }
    }

    pub fn translation(y1: f64, y2: f64) -> Self {
        AffineMap {
            y1,
            y2,
            ..AffineMap::identity()
        }
    }

    /// Counterclockwise rotation by `phi`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        AffineMap {
            a11: c,
            a12: -s,
            a21: s,
            a22: c,
            y1: 0.0,
            y2: 0.0,
        }
    }

    /// Reflection across the line through the origin at angle `phi / 2`.
    pub fn reflection(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        AffineMap {
            a11: c,
            a12: s,
            a21: s,
            a22: -c,
            y1: 0.0,
            y2: 0.0,
        }
    }

    /// Axis-aligned scaling by `a` horizontally and `b` vertically.
    pub fn scaling(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scaling factors must be positive, got ({a}, {b})"
            )));
        }
        AffineMap::new(a, 0.0, 0.0, b, 0.0, 0.0)
    }

    /// Shear `(x, y) -> (x + c y, y)`.
    pub fn shear(c: f64) -> Self {
        AffineMap {
            a12: c,
            ..AffineMap::identity()
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// Composition `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            a11: self.a11 * inner.a11 + self.a12 * inner.a21,
            a12: self.a11 * inner.a12 + self.a12 * inner.a22,
            a21: self.a21 * inner.a11 + self.a22 * inner.a21,
            a22: self.a21 * inner.a12 + self.a22 * inner.a22,
            y1: self.a11 * inner.y1 + self.a12 * inner.y2 + self.y1,
            y2: self.a21 * inner.y1 + self.a22 * inner.y2 + self.y2,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let det = self.det();
        let b11 = self.a22 / det;
        let b12 = -self.a12 / det;
        let b21 = -self.a21 / det;
        let b22 = self.a11 / det;
        AffineMap {
            a11: b11,
            a12: b12,
            a21: b21,
            a22: b22,
            y1: -(b11 * self.y1 + b12 * self.y2),
            y2: -(b21 * self.y1 + b22 * self.y2),
        }
    }

    pub fn apply_point(&self, p: &Point2) -> Point2 {
        Point2 {
            x: self.a11 * p.x + self.a12 * p.y + self.y1,
            y: self.a21 * p.x + self.a22 * p.y + self.y2,
        }
    }

    /// Pushforward of a planar measure: atom positions move, weights stay
    /// (bit-for-bit, not merely up to renormalization).
    pub fn apply(&self, m: &DiscreteMeasure2D) -> Result<DiscreteMeasure2D> {
        let det = self.det();
        if det.abs() <= SINGULAR_TOL {
            return Err(Error::SingularMatrix { det });
        }
        DiscreteMeasure2D::from_normalized(
            m.points().iter().map(|p| self.apply_point(p)).collect(),
            m.weights().to_vec(),
        )
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a11, self.a12, self.a21, self.a22, self.y1, self.y2]
    }

    pub fn from_coefficients(c: [f64; 6]) -> Result<Self> {
        AffineMap::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }
}

/// How a slice direction is remapped by an affine map.
///
/// For any measure `m`, `slice(T.apply(m), d)` equals the pushforward of
/// `slice(m, remap.direction)` under `s -> remap.scale * s + remap.shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionRemap {
    pub direction: Direction,
    pub scale: f64,
    pub shift: f64,
}

/// Remaps a direction under the affine map `x -> A x + y`:
/// new direction `A^T d / |A^T d|`, dilation `|A^T d|`, shift `<y, d>`.
pub fn remap_direction(map: &AffineMap, d: &Direction) -> DirectionRemap {
    let (ux, uy) = d.unit();
    let vx = map.a11 * ux + map.a21 * uy;
    let vy = map.a12 * ux + map.a22 * uy;
    let scale = vx.hypot(vy);
    let direction = Direction::from_vector(vx, vy).expect("A^T d is nonzero for invertible A");
    DirectionRemap {
        direction,
        scale,
        shift: map.y1 * ux + map.y2 * uy,
    }
}

/// The families of elementary transformations with closed-form slice
/// remapping laws on angles in `(-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Translation,
    Rotation,
    Reflection,
    AnisotropicScaling,
    VerticalShear,
}

impl TransformKind {
    fn param_count(&self) -> usize {
        match self {
            TransformKind::Translation | TransformKind::AnisotropicScaling => 2,
            _ => 1,
        }
    }

    /// The affine map realizing this transformation with the given
    /// parameters. Its slice remapping agrees with [`table1_remap`].
    pub fn affine_map(&self, params: &[f64]) -> Result<AffineMap> {
        if params.len() != self.param_count() {
            return Err(Error::InvalidConfig(format!(
                "{self:?} takes {} parameter(s), got {}",
                self.param_count(),
                params.len()
            )));
        }
        match self {
            TransformKind::Translation => Ok(AffineMap::translation(params[0], params[1])),
            TransformKind::Rotation => Ok(AffineMap::rotation(params[0])),
            TransformKind::Reflection => Ok(AffineMap::reflection(params[0])),
            TransformKind::AnisotropicScaling => AffineMap::scaling(params[0], params[1]),
            TransformKind::VerticalShear => Ok(AffineMap::shear(params[0])),
        }
    }
}

/// Closed-form slice remapping `(theta_new, scale, shift)` of the
/// elementary transformations, for `theta` in `(-pi/2, pi/2)`.
///
/// Exists purely as an independent oracle: it must agree with
/// [`remap_direction`] applied to [`TransformKind::affine_map`] to 1e-12.
/// Directions outside the right half-circle are covered by
/// [`antipodal_reflect`] instead of extending the formulas.
pub fn table1_remap(kind: TransformKind, params: &[f64], theta: f64) -> Result<(f64, f64, f64)> {
    if !(theta > -PI / 2.0 && theta < PI / 2.0) {
        return Err(Error::OutOfRange(format!(
            "theta = {theta} not in (-pi/2, pi/2)"
        )));
    }
    if params.len() != kind.param_count() {
        return Err(Error::InvalidConfig(format!(
            "{kind:?} takes {} parameter(s), got {}",
            kind.param_count(),
            params.len()
        )));
    }
    let (sin_t, cos_t) = theta.sin_cos();
    match kind {
        TransformKind::Translation => {
            let shift = params[0] * cos_t + params[1] * sin_t;
            Ok((theta, 1.0, shift))
        }
        TransformKind::Rotation => Ok((theta - params[0], 1.0, 0.0)),
        TransformKind::Reflection => Ok((params[0] - theta, 1.0, 0.0)),
        TransformKind::AnisotropicScaling => {
            let (a, b) = (params[0], params[1]);
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "scaling factors must be positive, got ({a}, {b})"
                )));
            }
            let theta_new = ((b / a) * theta.tan()).atan();
            let scale = (a * a * cos_t * cos_t + b * b * sin_t * sin_t).sqrt();
            Ok((theta_new, scale, 0.0))
        }
        TransformKind::VerticalShear => {
            let c = params[0];
            let theta_new = (c + theta.tan()).atan();
            let scale = (1.0 + c * c * cos_t * cos_t + c * (2.0 * theta).sin()).sqrt();
            Ok((theta_new, scale, 0.0))
        }
    }
}
