//! Grid estimators for Julia sets and the completely invariant set E(G).

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::grid::TwoChartGrid;
use super::mask::{rasterize, SphereMask};
use crate::ratmap::{MapError, RationalMap};
use crate::semigroup::{derive_seed, RationalSemigroup, SemigroupError, Word, MAX_WORD_DEGREE};
use crate::sphere::SpherePoint;

/// Starting point of every backward orbit. Generic enough to avoid the
/// exceptional points of the maps used here.
pub const DEFAULT_START: SpherePoint =
    SpherePoint::Finite(num_complex::Complex64 { re: 0.5, im: 0.3 });
/// Independent backward chains per sampler; fixed so results do not depend on
/// the worker count.
pub const CHAINS: u64 = 8;
/// Minimum samples drawn for each word in the word-union estimator.
pub const MIN_WORD_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("invalid estimator parameters: {0}")]
    InvalidParams(String),
    #[error("closure still growing after {iterations} sweeps")]
    NoFixedPoint { iterations: usize },
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub max_word_len: usize,
    pub max_closure_iters: usize,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            samples: 200_000,
            burn_in: 100,
            seed: 0,
            max_word_len: 6,
            max_closure_iters: 200,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let fields = [
            ("samples", self.samples),
            ("burn_in", self.burn_in),
            ("max_word_len", self.max_word_len),
            ("max_closure_iters", self.max_closure_iters),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(EstimateError::InvalidParams(format!("{name} must be positive"))),
            None => Ok(()),
        }
    }
}

fn split(total: usize, parts: u64) -> Vec<usize> {
    let parts = parts as usize;
    (0..parts)
        .map(|k| total / parts + usize::from(k < total % parts))
        .collect()
}

/// Backward-orbit samples of `J(G)` from [`CHAINS`] independent chains, concatenated in chain order.
pub fn julia_points(
    g: &RationalSemigroup,
    params: &EstimatorParams,
) -> Result<Vec<SpherePoint>, EstimateError> {
    params.validate()?;
    let chunks: Vec<Vec<SpherePoint>> = split(params.samples, CHAINS)
        .into_par_iter()
        .enumerate()
        .filter(|(_, count)| *count > 0)
        .map(|(k, count)| {
            g.backward_orbit_sample(
                DEFAULT_START,
                count,
                params.burn_in,
                derive_seed(params.seed, k as u64),
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(chunks.concat())
}

/// Rasterized backward orbit of the single map `f`.
pub fn julia_single(
    f: &RationalMap,
    grid: &Arc<TwoChartGrid>,
    params: &EstimatorParams,
) -> Result<SphereMask, EstimateError> {
    let g = RationalSemigroup::new(vec![f.clone()])?;
    Ok(rasterize(grid, &julia_points(&g, params)?))
}

/// Words sampled by [`julia_semigroup`]: all words up to `max_word_len` whose
/// map stays within the degree cap.
pub fn sampled_words(g: &RationalSemigroup, max_word_len: usize) -> Vec<Word> {
    g.enumerate_words(max_word_len)
        .into_iter()
        .filter(|w| g.word_degree(w).is_ok_and(|d| d <= MAX_WORD_DEGREE))
        .collect()
}

/// Sample points of `J(G)`: the semigroup backward orbit together with
/// backward orbits of every sampled word.
pub fn julia_semigroup_points(
    g: &RationalSemigroup,
    params: &EstimatorParams,
) -> Result<Vec<SpherePoint>, EstimateError> {
    let mut points = julia_points(g, params)?;
    let words = sampled_words(g, params.max_word_len);
    let per_word = (params.samples / words.len().max(1)).max(MIN_WORD_SAMPLES);
    let chunks: Vec<Vec<SpherePoint>> = words
        .par_iter()
        .enumerate()
        .map(|(k, w)| {
            g.word_backward_orbit(
                w,
                DEFAULT_START,
                per_word,
                params.burn_in,
                derive_seed(params.seed, CHAINS + k as u64),
            )
        })
        .collect::<Result<_, _>>()?;
    for c in chunks {
        points.extend(c);
    }
    Ok(points)
}

pub fn julia_semigroup(
    g: &RationalSemigroup,
    grid: &Arc<TwoChartGrid>,
    params: &EstimatorParams,
) -> Result<SphereMask, EstimateError> {
    Ok(rasterize(grid, &julia_semigroup_points(g, params)?))
}

/// Result of the invariant closure.
#[derive(Clone, Debug)]
pub struct InvariantJulia {
    /// Grid image of E(G).
    pub mask: SphereMask,
    /// One point per newly set pixel, in insertion order.
    pub reps: Vec<SpherePoint>,
    /// Sweeps performed, including the final one that added nothing.
    pub iterations: usize,
    /// Pixels added by each sweep.
    pub added: Vec<usize>,
    pub fixed_point: bool,
}

impl InvariantJulia {
    /// Fails with `NoFixedPoint` when the sweep cap stopped the closure.
    pub fn require_fixed_point(self) -> Result<Self, EstimateError> {
        if self.fixed_point {
            Ok(self)
        } else {
            Err(EstimateError::NoFixedPoint {
                iterations: self.iterations,
            })
        }
    }

    /// Rasterized image of the representative points under `g`.
    pub fn forward_image(&self, g: &RationalMap) -> Result<SphereMask, EstimateError> {
        let images: Vec<SpherePoint> = self
            .reps
            .par_iter()
            .map(|&p| g.eval(p))
            .collect::<Result<_, _>>()?;
        Ok(rasterize(self.mask.grid(), &images))
    }

    /// Rasterized preimages of the representative points under `g`.
    pub fn preimage_image(&self, g: &RationalMap) -> Result<SphereMask, EstimateError> {
        let pre: Vec<Vec<(SpherePoint, usize)>> = self
            .reps
            .par_iter()
            .map(|&p| g.preimages(p))
            .collect::<Result<_, _>>()?;
        Ok(rasterize(
            self.mask.grid(),
            pre.iter().flatten().map(|(q, _)| q),
        ))
    }
}

/// Closure of a point set under every generator and every generator inverse,
/// at pixel resolution.
///
/// Each sweep maps the points added by the previous sweep forward and backward
/// through each generator; a candidate is kept when it sets a pixel not yet in
/// the mask. Candidates are computed in parallel and inserted in a fixed order.
pub fn close_invariant(
    g: &RationalSemigroup,
    grid: &Arc<TwoChartGrid>,
    seed: &[SpherePoint],
    max_sweeps: usize,
) -> Result<InvariantJulia, EstimateError> {
    let mut mask = SphereMask::empty(Arc::clone(grid));
    let mut reps = Vec::new();
    for &p in seed {
        if mask.insert_point(p) {
            reps.push(p);
        }
    }
    let mut frontier = 0..reps.len();
    let mut added = Vec::new();
    let mut iterations = 0;
    let mut fixed_point = false;
    while iterations < max_sweeps {
        iterations += 1;
        let candidates: Vec<Vec<SpherePoint>> = reps[frontier.clone()]
            .par_iter()
            .map(|&p| {
                let mut out = Vec::new();
                for f in g.generators() {
                    out.push(f.eval(p)?);
                    out.extend(f.preimages(p)?.into_iter().map(|(q, _)| q));
                }
                Ok(out)
            })
            .collect::<Result<_, MapError>>()?;
        let before = reps.len();
        let pixels_before = mask.count();
        for p in candidates.into_iter().flatten() {
            if mask.insert_point(p) {
                reps.push(p);
            }
        }
        added.push(mask.count() - pixels_before);
        if reps.len() == before {
            fixed_point = true;
            break;
        }
        frontier = before..reps.len();
    }
    Ok(InvariantJulia {
        mask,
        reps,
        iterations,
        added,
        fixed_point,
    })
}

/// Grid estimate of E(G), seeded with the Julia set of the first generator.
pub fn invariant_julia(
    g: &RationalSemigroup,
    grid: &Arc<TwoChartGrid>,
    params: &EstimatorParams,
) -> Result<InvariantJulia, EstimateError> {
    let first = RationalSemigroup::new(vec![g.generators()[0].clone()])?;
    let seed = julia_points(&first, params)?;
    close_invariant(g, grid, &seed, params.max_closure_iters)
}

/// Rasterized image of the set-pixel centres under `g`.
pub fn forward_image_mask(mask: &SphereMask, g: &RationalMap) -> Result<SphereMask, EstimateError> {
    let grid = mask.grid();
    let indices: Vec<usize> = mask.set_indices().collect();
    let images: Vec<SpherePoint> = indices
        .par_iter()
        .map(|&i| g.eval(grid.point_of(grid.pixel(i))))
        .collect::<Result<_, _>>()?;
    Ok(rasterize(grid, &images))
}

/// Pixel-level closure: `M <- M | g(M) | g^-1(M)` over every generator, with
/// both operators applied to pixel centres, until nothing changes.
///
/// Centre rounding compounds from sweep to sweep, so on most inputs this grows
/// well past the set it approximates. [`close_invariant`] is the estimator.
pub fn close_pixelwise(
    g: &RationalSemigroup,
    seed: SphereMask,
    max_sweeps: usize,
) -> Result<(SphereMask, usize, bool), EstimateError> {
    let mut mask = seed;
    for sweep in 1..=max_sweeps {
        let mut next = mask.clone();
        for f in g.generators() {
            next = next.union(&forward_image_mask(&mask, f)?);
            next = next.union(&preimage_mask(&mask, f));
        }
        if next == mask {
            return Ok((mask, sweep, true));
        }
        mask = next;
    }
    Ok((mask, max_sweeps, false))
}

/// Pixels whose centre `g` sends into a set pixel of `mask`.
pub fn preimage_mask(mask: &SphereMask, g: &RationalMap) -> SphereMask {
    let grid = Arc::clone(mask.grid());
    SphereMask::from_fn(Arc::clone(&grid), |i| {
        g.eval(grid.point_of(grid.pixel(i)))
            .is_ok_and(|q| mask.contains_point(q))
    })
}
