//! Discrete probability measures on the line and the plane.
//!
//! A planar measure is a weighted point set; a line measure additionally
//! keeps its atoms sorted and merged, which makes CDF and quantile
//! evaluation `O(log n)`. All types are immutable after construction.

use crate::error::{Error, Result};

/// Atoms closer than this are considered the same point after a pushforward.
pub const MERGE_TOL: f64 = 1e-12;

/// A point in the plane, in dimensionless image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2 { x, y }
    }
}

/// A probability measure on the plane with finitely many atoms.
///
/// Weights are nonnegative, sum to one, and at least one is strictly
/// positive. Zero-weight atoms are kept (they are dropped by any
/// pushforward onto the line).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure2D {
    points: Vec<Point2>,
    weights: Vec<f64>,
}

impl DiscreteMeasure2D {
    /// Builds a measure from points and raw (unnormalized) weights.
    ///
    /// The raw weights are divided by their sum, so `raw` and `c * raw`
    /// describe the same measure for any `c > 0`.
    pub fn new(points: Vec<Point2>, raw_weights: Vec<f64>) -> Result<Self> {
        if points.len() != raw_weights.len() {
            return Err(Error::DimensionMismatch {
                left: points.len(),
                right: raw_weights.len(),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite(format!("point {i} = ({}, {})", p.x, p.y)));
            }
        }
        for (i, &w) in raw_weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("weight {i} = {w}")));
            }
            if w < 0.0 {
                return Err(Error::OutOfRange(format!("weight {i} = {w} < 0")));
            }
        }
        let total: f64 = raw_weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass(format!(
                "all {} raw weights are zero",
                raw_weights.len()
            )));
        }
        let weights = raw_weights.iter().map(|w| w / total).collect();
        Ok(DiscreteMeasure2D { points, weights })
    }

    /// Builds a measure from weights that already sum to one, preserving
    /// them bit-for-bit (renormalizing would perturb them by an ulp).
    pub(crate) fn from_normalized(points: Vec<Point2>, weights: Vec<f64>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite(format!("point {i} = ({}, {})", p.x, p.y)));
            }
        }
        debug_assert_eq!(points.len(), weights.len());
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::ZeroMass(format!(
                "all {} weights are zero",
                weights.len()
            )));
        }
        Ok(DiscreteMeasure2D { points, weights })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted mean of the atom positions.
    pub fn mean(&self) -> (f64, f64) {
        let mut mx = 0.0;
        let mut my = 0.0;
        for (p, &w) in self.points.iter().zip(&self.weights) {
            mx += w * p.x;
            my += w * p.y;
        }
        (mx, my)
    }

    /// Singular values `(smaller, larger)` of the weight-centered second
    /// moment matrix `sum_i w_i (p_i - mean)(p_i - mean)^T`.
    ///
    /// The matrix is symmetric positive semidefinite, so its singular
    /// values are its eigenvalues. The smaller one vanishes exactly when
    /// the positively-weighted atoms lie on a line.
    pub fn covariance_singular_values(&self) -> (f64, f64) {
        let (mx, my) = self.mean();
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut syy = 0.0;
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let dx = p.x - mx;
            let dy = p.y - my;
            sxx += w * dx * dx;
            sxy += w * dx * dy;
            syy += w * dy * dy;
        }
        let half_trace = 0.5 * (sxx + syy);
        let disc = (0.5 * (sxx - syy)).hypot(sxy);
        let lo = (half_trace - disc).max(0.0);
        let hi = half_trace + disc;
        (lo, hi)
    }

    /// True iff the positively-weighted atoms are not all within `tol` of
    /// a single line, tested via the smaller covariance singular value.
    pub fn is_non_collinear(&self, tol: f64) -> bool {
        let (lo, _) = self.covariance_singular_values();
        lo > tol
    }

    /// Diameter of the support: the largest pairwise distance between
    /// positively-weighted atoms.
    pub fn diameter(&self) -> f64 {
        let support: Vec<&Point2> = self
            .points
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(p, _)| p)
            .collect();
        let mut best = 0.0f64;
        for i in 0..support.len() {
            for j in (i + 1)..support.len() {
                let d = (support[i].x - support[j].x).hypot(support[i].y - support[j].y);
                best = best.max(d);
            }
        }
        best
    }
}

/// A probability measure on the line: strictly increasing atom positions
/// with strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure1D {
    positions: Vec<f64>,
    weights: Vec<f64>,
    // cumulative[i] = weights[0] + ... + weights[i]
    cumulative: Vec<f64>,
}

impl DiscreteMeasure1D {
    /// Builds a line measure from `(position, weight)` atoms.
    ///
    /// Zero-weight atoms are dropped, positions within [`MERGE_TOL`] are
    /// merged (weights summed, the first position of each group kept),
    /// and weights are normalized to total mass one.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut kept: Vec<(f64, f64)> = Vec::new();
        for (i, (pos, w)) in atoms.into_iter().enumerate() {
            if !pos.is_finite() || !w.is_finite() {
                return Err(Error::NonFinite(format!("atom {i} = ({pos}, {w})")));
            }
            if w < 0.0 {
                return Err(Error::OutOfRange(format!("atom {i} weight {w} < 0")));
            }
            if w > 0.0 {
                kept.push((pos, w));
            }
        }
        if kept.is_empty() {
            return Err(Error::ZeroMass("no positively-weighted atoms".into()));
        }
        kept.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("positions are finite"));

        let mut positions: Vec<f64> = Vec::with_capacity(kept.len());
        let mut weights: Vec<f64> = Vec::with_capacity(kept.len());
        for (pos, w) in kept {
            match positions.last() {
                Some(&last) if pos - last <= MERGE_TOL => {
                    *weights.last_mut().expect("non-empty") += w;
                }
                _ => {
                    positions.push(pos);
                    weights.push(w);
                }
            }
        }

        let total: f64 = weights.iter().sum();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &mut weights {
            *w /= total;
            acc += *w;
            cumulative.push(acc);
        }
        Ok(DiscreteMeasure1D {
            positions,
            weights,
            cumulative,
        })
    }

    /// Builds a line measure from positions already strictly sorted,
    /// merged, and normalized, preserving the weights bit-for-bit.
    pub(crate) fn from_normalized_sorted(positions: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[1] - w[0] > MERGE_TOL));
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        DiscreteMeasure1D {
            positions,
            weights,
            cumulative,
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Cumulative distribution function `F(t)`: total weight of atoms with
    /// position `<= t`. Right-continuous and nondecreasing.
    pub fn cdf(&self, t: f64) -> f64 {
        let idx = self.positions.partition_point(|&p| p <= t);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Quantile function `inf { s : F(s) > p }` for `p` in `[0, 1)`.
    ///
    /// This is the strict-inequality generalized inverse: the smallest atom
    /// position whose cumulative weight strictly exceeds `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::OutOfRange(format!(
                "quantile level {p} not in [0, 1)"
            )));
        }
        let idx = self.cumulative.partition_point(|&c| c <= p);
        // Rounding can leave the last cumulative value a hair below one;
        // the infimum is then still the last atom.
        Ok(self.positions[idx.min(self.positions.len() - 1)])
    }

    /// Weighted mean of the atom positions.
    pub fn mean(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(points: &[(f64, f64)], raw: &[f64]) -> DiscreteMeasure2D {
        DiscreteMeasure2D::new(
            points.iter().map(|&p| Point2::from(p)).collect(),
            raw.to_vec(),
        )
        .unwrap()
    }

    fn m1(atoms: &[(f64, f64)]) -> DiscreteMeasure1D {
        DiscreteMeasure1D::from_atoms(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn symmetric_weights_normalize() {
        let m = m2(&[(0.0, 0.0), (1.0, 0.0)], &[2.0, 2.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn single_atom_normalizes_to_one() {
        let m = m2(&[(3.0, 4.0)], &[7.0]);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn zero_mass_rejected() {
        let err = DiscreteMeasure2D::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)],
            vec![0.0, 0.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroMass(_)));
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = DiscreteMeasure2D::new(vec![Point2::new(0.0, 0.0)], vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn non_finite_rejected() {
        let err = DiscreteMeasure2D::new(vec![Point2::new(f64::NAN, 0.0)], vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        let err =
            DiscreteMeasure2D::new(vec![Point2::new(0.0, 0.0)], vec![f64::INFINITY]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn raw_weight_scale_invariance() {
        let a = m2(&[(0.0, 0.0), (1.0, 2.0)], &[1.0, 3.0]);
        let b = m2(&[(0.0, 0.0), (1.0, 2.0)], &[2.5, 7.5]);
        assert_eq!(a, b);
    }

    #[test]
    fn cdf_atom_boundary_is_right_continuous() {
        let m = m1(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(m.cdf(0.0), 0.5);
        assert_eq!(m.cdf(-1.0), 0.0);
        assert_eq!(m.cdf(2.0), 1.0);
    }

    #[test]
    fn quantile_uses_strict_inequality() {
        let m = m1(&[(0.0, 0.5), (1.0, 0.5)]);
        // F(0) = 0.5 is not > 0.5, so the infimum moves to the next atom.
        assert_eq!(m.quantile(0.5).unwrap(), 1.0);
        assert_eq!(m.quantile(0.25).unwrap(), 0.0);
    }

    #[test]
    fn quantile_of_single_atom_is_constant() {
        let m = m1(&[(3.5, 1.0)]);
        for p in [0.0, 0.3, 0.999] {
            assert_eq!(m.quantile(p).unwrap(), 3.5);
        }
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        let m = m1(&[(0.0, 1.0)]);
        assert!(matches!(m.quantile(-0.1), Err(Error::OutOfRange(_))));
        assert!(matches!(m.quantile(1.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn atoms_merge_and_sort() {
        let m = m1(&[(1.0, 0.25), (0.0, 0.25), (1.0 + 1e-13, 0.5)]);
        assert_eq!(m.positions(), &[0.0, 1.0]);
        assert_eq!(m.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn zero_weight_atoms_dropped() {
        let m = m1(&[(0.0, 0.0), (2.0, 1.0)]);
        assert_eq!(m.positions(), &[2.0]);
    }

    #[test]
    fn mean_of_midpoint_pair() {
        let m = m2(&[(0.0, 0.0), (2.0, 0.0)], &[0.5, 0.5]);
        assert_eq!(m.mean(), (1.0, 0.0));
        let single = m2(&[(1.0, 1.0)], &[1.0]);
        assert_eq!(single.mean(), (1.0, 1.0));
    }

    #[test]
    fn mean_of_unit_square_corners() {
        let m = m2(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)], &[1.0; 4]);
        assert_eq!(m.mean(), (0.5, 0.5));
    }

    #[test]
    fn triangle_is_non_collinear() {
        let m = m2(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], &[1.0; 3]);
        assert!(m.is_non_collinear(1e-9));
    }

    #[test]
    fn two_atoms_are_collinear() {
        let m = m2(&[(0.0, 0.0), (5.0, 5.0)], &[0.5, 0.5]);
        assert!(!m.is_non_collinear(1e-9));
    }

    #[test]
    fn point_support_is_collinear() {
        let m = m2(&[(0.0, 0.0)], &[1.0]);
        assert!(!m.is_non_collinear(1e-9));
    }

    #[test]
    fn zero_weight_atoms_do_not_affect_collinearity() {
        // Off-line atom with zero weight: support is still the x-axis.
        let m = m2(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], &[0.5, 0.5, 0.0]);
        assert!(!m.is_non_collinear(1e-9));
    }

    #[test]
    fn diameter_of_triangle() {
        let m = m2(&[(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)], &[1.0; 3]);
        assert_eq!(m.diameter(), 5.0);
    }
}
