//! Shared helpers for the integration and acceptance suites: independent
//! brute-force oracles and seeded random generators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nrcdt::measures::{DiscreteMeasure1D, DiscreteMeasure2D, Point2};
use nrcdt::radon::AffineMap;

/// Brute-force optimal transport cost between two line measures under the
/// quadratic cost: walks the sorted atoms of both sides, always moving the
/// smallest remaining mass (the monotone coupling, which is optimal for
/// convex costs on the line). Independent of the CDT code path.
pub fn monotone_coupling_cost(a: &DiscreteMeasure1D, b: &DiscreteMeasure1D) -> f64 {
    let (pa, wa) = (a.positions(), a.weights());
    let (pb, wb) = (b.positions(), b.weights());
    let mut ia = 0;
    let mut ib = 0;
    let mut rem_a = wa[0];
    let mut rem_b = wb[0];
    let mut cost = 0.0;
    loop {
        let mass = rem_a.min(rem_b);
        let gap = pa[ia] - pb[ib];
        cost += mass * gap * gap;
        rem_a -= mass;
        rem_b -= mass;
        if rem_a <= 1e-15 {
            ia += 1;
            if ia == pa.len() {
                break;
            }
            rem_a = wa[ia];
        }
        if rem_b <= 1e-15 {
            ib += 1;
            if ib == pb.len() {
                break;
            }
            rem_b = wb[ib];
        }
    }
    cost
}

/// A random planar measure with `atoms` atoms in the unit square and
/// weights bounded away from zero.
pub fn random_measure(rng: &mut ChaCha8Rng, atoms: usize) -> DiscreteMeasure2D {
    let points: Vec<Point2> = (0..atoms)
        .map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let weights: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.05..1.0)).collect();
    DiscreteMeasure2D::new(points, weights).expect("valid random measure")
}

/// Like [`random_measure`], but resampled until the support is clearly
/// two-dimensional.
pub fn random_non_collinear_measure(rng: &mut ChaCha8Rng, atoms: usize) -> DiscreteMeasure2D {
    loop {
        let m = random_measure(rng, atoms.max(3));
        let (lo, hi) = m.covariance_singular_values();
        if lo > 1e-3 * hi.max(1e-12) {
            return m;
        }
    }
}

/// A random line measure whose weights are multiples of `1 / denominator`,
/// with at most `max_atoms` atoms.
pub fn random_rational_measure(
    rng: &mut ChaCha8Rng,
    denominator: usize,
    max_atoms: usize,
) -> DiscreteMeasure1D {
    let atoms = rng.gen_range(1..=max_atoms.min(denominator));
    // Split `denominator` units of mass over the atoms, each getting >= 1.
    let mut counts = vec![1usize; atoms];
    for _ in 0..denominator - atoms {
        counts[rng.gen_range(0..atoms)] += 1;
    }
    let atoms: Vec<(f64, f64)> = counts
        .into_iter()
        .map(|c| (rng.gen_range(-5.0..5.0), c as f64 / denominator as f64))
        .collect();
    DiscreteMeasure1D::from_atoms(atoms).expect("valid rational measure")
}

/// A random invertible affine map with entries in `[-2, 2]`, determinant
/// bounded away from zero, and shift in `[-2, 2]`.
pub fn random_invertible_map(rng: &mut ChaCha8Rng) -> AffineMap {
    loop {
        let a11: f64 = rng.gen_range(-2.0..2.0);
        let a12: f64 = rng.gen_range(-2.0..2.0);
        let a21: f64 = rng.gen_range(-2.0..2.0);
        let a22: f64 = rng.gen_range(-2.0..2.0);
        if (a11 * a22 - a12 * a21).abs() > 0.1 {
            let y1 = rng.gen_range(-2.0..2.0);
            let y2 = rng.gen_range(-2.0..2.0);
            return AffineMap::new(a11, a12, a21, a22, y1, y2).expect("det checked");
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
