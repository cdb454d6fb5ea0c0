//! Combinatorics of the snowflake metric on the singular line.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::snowflake_distance_on_y;
use crate::types::Alpha;

/// Largest point count for which every permutation is enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 9;

fn validate_points(points: &[f64]) -> Result<()> {
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("points must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn path_sum(points: &[f64], order: &[usize], alpha: Alpha, c: f64) -> f64 {
    order.windows(2).map(|w| snowflake_distance_on_y(points[w[0]], points[w[1]], alpha, c)).sum()
}

/// Sums along the sorted order and along the order `sigma`.
pub fn permutation_sums(points: &[f64], sigma: &[usize], alpha: Alpha, c: f64) -> Result<(f64, f64)> {
    validate_points(points)?;
    let n = points.len();
    let mut seen = vec![false; n];
    if sigma.len() != n || sigma.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidArgument(format!("sigma is not a permutation of 0..{n}")));
    }
    let id: Vec<usize> = (0..n).collect();
    Ok((path_sum(points, &id, alpha, c), path_sum(points, sigma, alpha, c)))
}

/// Whether visiting the points in sorted order is no longer than visiting them in the
/// order `sigma`.
pub fn monotone_permutation_check(points: &[f64], sigma: &[usize], alpha: Alpha, c: f64) -> Result<bool> {
    let (lhs, rhs) = permutation_sums(points, sigma, alpha, c)?;
    Ok(lhs <= rhs * (1.0 + 1e-12))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSweep {
    pub exhaustive: bool,
    pub permutations: usize,
    pub all_hold: bool,
    /// Smallest `rhs / lhs` seen.
    pub min_ratio: f64,
}

/// Checks every permutation when there are at most [`EXHAUSTIVE_LIMIT`] points,
/// otherwise `samples` random permutations drawn from `seed`.
pub fn permutation_sweep(points: &[f64], alpha: Alpha, c: f64, samples: usize, seed: u64) -> Result<PermutationSweep> {
    validate_points(points)?;
    let n = points.len();
    let id: Vec<usize> = (0..n).collect();
    let lhs = path_sum(points, &id, alpha, c);
    let mut min_ratio = f64::INFINITY;
    let mut all_hold = true;
    let mut count = 0;
    let mut visit = |sigma: &[usize]| {
        let rhs = path_sum(points, sigma, alpha, c);
        all_hold &= lhs <= rhs * (1.0 + 1e-12);
        if lhs > 0.0 {
            min_ratio = min_ratio.min(rhs / lhs);
        }
        count += 1;
    };
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        for sigma in (0..n).permutations(n) {
            visit(&sigma);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sigma = id.clone();
        for _ in 0..samples {
            sigma.shuffle(&mut rng);
            visit(&sigma);
        }
    }
    Ok(PermutationSweep { exhaustive, permutations: count, all_hold, min_ratio })
}

/// Number of `eps`-balls a greedy left-to-right cover of a segment on the singular
/// line of Grushin diameter `diameter` uses. A ball of radius `eps` centred on the
/// line covers a Euclidean interval of half-length `(eps / c)^(1+alpha)`, so the
/// greedy count has a closed form.
pub fn snowflake_cover_count(alpha: Alpha, c: f64, diameter: f64, eps: f64) -> Result<f64> {
    if !(c > 0.0 && diameter > 0.0 && eps > 0.0) {
        return Err(Error::InvalidArgument("c, diameter and eps must be positive".into()));
    }
    let p = 1.0 + alpha.value();
    let length = (diameter / c).powf(p);
    let half = (eps / c).powf(p);
    Ok((length / (2.0 * half)).ceil().max(1.0))
}

/// Box-counting slope `log2(N(eps/2) / N(eps))`.
pub fn box_counting_dimension(alpha: Alpha, c: f64, diameter: f64, eps: f64) -> Result<f64> {
    let n1 = snowflake_cover_count(alpha, c, diameter, eps)?;
    let n2 = snowflake_cover_count(alpha, c, diameter, 0.5 * eps)?;
    Ok((n2 / n1).log2())
}
