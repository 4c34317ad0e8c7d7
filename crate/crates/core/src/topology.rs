//! Connected components of a mask's complement, their holes, and the
//! component-count classifier.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fractal::{SphereMask, TwoChartGrid};
use crate::ratmap::MapError;
use crate::semigroup::RationalSemigroup;
use crate::sphere::SpherePoint;

/// Components smaller than this many pixels are left out of counts.
pub const MIN_COMPONENT_PIXELS: usize = 4;
/// Sample pixels pushed through each generator per component.
pub const PERMUTATION_SAMPLES: usize = 64;
/// Largest fraction of samples allowed to miss the majority label.
pub const SPLIT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("label {label} is not a component (count {count})")]
    InvalidLabel { label: usize, count: usize },
    #[error("classifier needs at least 2 resolutions, got {0}")]
    InsufficientTrace(usize),
    #[error("generator {generator} maps component {label} into the set itself")]
    ImageInSet { generator: usize, label: usize },
    #[error("generator {generator} splits component {label}: majority share {share:.3}")]
    SplitImage {
        generator: usize,
        label: usize,
        share: f64,
    },
    #[error("generator {generator} does not permute the components: {image:?}")]
    NotAPermutation { generator: usize, image: Vec<usize> },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentClass {
    Zero,
    One,
    Two,
    Many,
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ComponentClass::Zero => "Zero",
            ComponentClass::One => "One",
            ComponentClass::Two => "Two",
            ComponentClass::Many => "Many",
        };
        f.write_str(s)
    }
}

/// Labels of the complement of a mask: 0 on the mask, `1..=k` on the
/// components of the complement in decreasing size.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentLabeling {
    grid: Arc<TwoChartGrid>,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n as u32).collect())
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.0[i as usize] != i {
            let up = self.0[self.0[i as usize] as usize];
            self.0[i as usize] = up;
            i = up;
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a as u32), self.find(b as u32));
        if ra != rb {
            self.0[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

/// Components of the pixels selected by `inside`, joined through in-chart
/// adjacency and chart identification. Returns per-pixel labels (0 outside)
/// numbered by decreasing size, ties broken by smallest pixel index, and the sizes.
fn components<F>(grid: &TwoChartGrid, inside: F, eight: bool) -> (Vec<u32>, Vec<usize>)
where
    F: Fn(usize) -> bool,
{
    let len = grid.len();
    let member: Vec<bool> = (0..len).map(|i| grid.is_active(i) && inside(i)).collect();
    let mut uf = UnionFind::new(len);
    for i in 0..len {
        if !member[i] {
            continue;
        }
        if eight {
            for j in grid.neighbours8(i) {
                if j > i && member[j] {
                    uf.union(i, j);
                }
            }
        } else {
            for j in grid.neighbours4(i) {
                if j > i && member[j] {
                    uf.union(i, j);
                }
            }
        }
        for &m in grid.class_members(i) {
            if member[m as usize] {
                uf.union(i, m as usize);
            }
        }
    }
    // Roots are the smallest index of each set, so first-seen order is by minimum index.
    let mut root_slot: Vec<u32> = vec![u32::MAX; len];
    let mut sizes: Vec<usize> = Vec::new();
    let mut raw = vec![u32::MAX; len];
    for i in 0..len {
        if !member[i] {
            continue;
        }
        let r = uf.find(i as u32) as usize;
        if root_slot[r] == u32::MAX {
            root_slot[r] = sizes.len() as u32;
            sizes.push(0);
        }
        raw[i] = root_slot[r];
        sizes[root_slot[r] as usize] += 1;
    }
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut rank = vec![0u32; sizes.len()];
    for (k, &o) in order.iter().enumerate() {
        rank[o] = k as u32 + 1;
    }
    let labels = raw
        .iter()
        .map(|&r| if r == u32::MAX { 0 } else { rank[r as usize] })
        .collect();
    let sorted = order.iter().map(|&o| sizes[o]).collect();
    (labels, sorted)
}

/// Components of the complement of `mask` under 4-adjacency and chart identification.
pub fn label_components(mask: &SphereMask) -> ComponentLabeling {
    let grid = Arc::clone(mask.grid());
    let open = mask.complement();
    let (labels, sizes) = components(&grid, |i| open.get(i), false);
    ComponentLabeling {
        grid,
        labels,
        sizes,
    }
}

impl ComponentLabeling {
    pub fn grid(&self) -> &Arc<TwoChartGrid> {
        &self.grid
    }

    /// All components, including those below the counting floor.
    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    /// Components with at least `min_pixels` pixels; these carry labels `1..=k`.
    pub fn counted(&self, min_pixels: usize) -> usize {
        self.sizes.iter().take_while(|&&s| s >= min_pixels).count()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index] as usize
    }

    /// Label of the owner-chart pixel of `p`.
    pub fn label_at(&self, p: SpherePoint) -> usize {
        self.label(self.grid.owner_index(p))
    }

    fn check(&self, j: usize) -> Result<(), TopologyError> {
        if j == 0 || j > self.sizes.len() {
            Err(TopologyError::InvalidLabel {
                label: j,
                count: self.sizes.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Pixel indices of component `j`.
    pub fn members(&self, j: usize) -> Result<Vec<usize>, TopologyError> {
        self.check(j)?;
        Ok(self
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l as usize == j).then_some(i))
            .collect())
    }

    /// Components of the sphere minus component `j` other than the one of
    /// largest spherical area, as pixel sets.
    pub fn holes(&self, j: usize) -> Result<Vec<Vec<usize>>, TopologyError> {
        self.check(j)?;
        let (labels, sizes) = components(&self.grid, |i| self.labels[i] as usize != j, true);
        if sizes.len() <= 1 {
            return Ok(Vec::new());
        }
        let mut area = vec![0.0; sizes.len()];
        for (i, &l) in labels.iter().enumerate() {
            if l > 0 {
                area[l as usize - 1] += self.grid.spherical_area(i);
            }
        }
        let outer = (0..area.len())
            .max_by(|&a, &b| area[a].total_cmp(&area[b]).then(b.cmp(&a)))
            .expect("at least one complementary component");
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
        for (i, &l) in labels.iter().enumerate() {
            if l > 0 && l as usize - 1 != outer {
                out[l as usize - 1].push(i);
            }
        }
        out.remove(outer);
        Ok(out)
    }

    pub fn hole_count(&self, j: usize) -> Result<usize, TopologyError> {
        Ok(self.holes(j)?.len())
    }

    /// A component is simply connected when its complement on the sphere is connected.
    pub fn simply_connected(&self, j: usize) -> Result<bool, TopologyError> {
        Ok(self.hole_count(j)? == 0)
    }

    /// Pixels of component `j` whose in-chart 4-neighbours all share its label;
    /// all of its pixels when none qualify.
    pub fn interior(&self, j: usize) -> Result<Vec<usize>, TopologyError> {
        let all = self.members(j)?;
        let inner: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&i| {
                let k = self.grid.neighbours4(i).count();
                k == 4 && self.grid.neighbours4(i).all(|m| self.label(m) == j)
            })
            .collect();
        Ok(if inner.is_empty() { all } else { inner })
    }
}

/// Per-component summary used in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub size: usize,
    pub holes: usize,
    pub simply_connected: bool,
}

/// Summaries of the counted components, computed in parallel.
pub fn summarize(labeling: &ComponentLabeling, min_pixels: usize) -> Result<Vec<ComponentSummary>, TopologyError> {
    (1..=labeling.counted(min_pixels))
        .into_par_iter()
        .map(|j| {
            let holes = labeling.hole_count(j)?;
            Ok(ComponentSummary {
                size: labeling.sizes()[j - 1],
                holes,
                simply_connected: holes == 0,
            })
        })
        .collect()
}

/// Class from counts at increasing resolutions: a count of 0, 1 or 2 that
/// agrees at the two finest resolutions gives that class, anything else `Many`.
pub fn classify_count(trace: &[(usize, usize)]) -> Result<ComponentClass, TopologyError> {
    if trace.len() < 2 {
        return Err(TopologyError::InsufficientTrace(trace.len()));
    }
    let (a, b) = (trace[trace.len() - 2].1, trace[trace.len() - 1].1);
    Ok(match (a, b) {
        (0, 0) => ComponentClass::Zero,
        (1, 1) => ComponentClass::One,
        (2, 2) => ComponentClass::Two,
        _ => ComponentClass::Many,
    })
}

/// Evenly spaced picks from `v`.
fn spread(v: &[usize], k: usize) -> Vec<usize> {
    if v.len() <= k {
        return v.to_vec();
    }
    (0..k).map(|i| v[i * v.len() / k]).collect()
}

/// For each generator, the label each counted component is carried to. The
/// result maps generator index to `image[j - 1]` for component `j`.
pub fn check_permutation(
    g: &RationalSemigroup,
    labeling: &ComponentLabeling,
    min_pixels: usize,
) -> Result<BTreeMap<usize, Vec<usize>>, TopologyError> {
    let k = labeling.counted(min_pixels);
    let grid = labeling.grid();
    let samples: Vec<Vec<usize>> = (1..=k)
        .map(|j| Ok(spread(&labeling.interior(j)?, PERMUTATION_SAMPLES)))
        .collect::<Result<_, TopologyError>>()?;
    let mut table = BTreeMap::new();
    for (gi, f) in g.generators().iter().enumerate() {
        let mut image = Vec::with_capacity(k);
        for (j, pixels) in samples.iter().enumerate() {
            let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
            for &i in pixels {
                let q = f.eval(grid.point_of(grid.pixel(i)))?;
                let l = labeling.label_at(q);
                if l != 0 {
                    *votes.entry(l).or_default() += 1;
                }
            }
            let total: usize = votes.values().sum();
            let Some((&best, &n)) = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) else {
                return Err(TopologyError::ImageInSet {
                    generator: gi,
                    label: j + 1,
                });
            };
            let share = n as f64 / total as f64;
            if share < 1.0 - SPLIT_TOLERANCE {
                return Err(TopologyError::SplitImage {
                    generator: gi,
                    label: j + 1,
                    share,
                });
            }
            image.push(best);
        }
        let mut seen = image.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != k || image.iter().any(|&l| l > k) {
            return Err(TopologyError::NotAPermutation {
                generator: gi,
                image,
            });
        }
        table.insert(gi, image);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::reference::{sample_circle, sample_real_line};
    use crate::fractal::rasterize;
    use crate::ratmap::RationalMap;

    fn grid(n: usize) -> Arc<TwoChartGrid> {
        Arc::new(TwoChartGrid::with_default_overlap(n).unwrap())
    }

    fn annulus_complement(g: &Arc<TwoChartGrid>) -> SphereMask {
        let g2 = Arc::clone(g);
        SphereMask::from_fn(Arc::clone(g), move |i| {
            let p = g2.pixel(i);
            let r = g2.centre(p).norm();
            !(p.chart == 0 && r > 0.3 && r < 0.6)
        })
    }

    #[test]
    fn full_mask_has_no_components() {
        let g = grid(64);
        let l = label_components(&SphereMask::full(Arc::clone(&g)));
        assert_eq!(l.component_count(), 0);
        assert!(l.labels().iter().all(|&x| x == 0));
    }

    #[test]
    fn empty_mask_is_one_sphere() {
        let g = grid(64);
        let l = label_components(&SphereMask::empty(Arc::clone(&g)));
        assert_eq!(l.component_count(), 1);
        assert!(l.simply_connected(1).unwrap());
    }

    #[test]
    fn circle_splits_the_sphere() {
        let g = grid(128);
        let m = rasterize(&g, &sample_circle(0.0, 0.0, 1.0, 4000));
        let l = label_components(&m);
        assert_eq!(l.counted(MIN_COMPONENT_PIXELS), 2);
        assert!(l.simply_connected(1).unwrap());
        assert!(l.simply_connected(2).unwrap());
        assert_ne!(l.label_at(SpherePoint::real(0.0)), l.label_at(SpherePoint::Infinity));
    }

    #[test]
    fn real_line_gives_two_half_planes() {
        let g = grid(128);
        let m = rasterize(&g, &sample_real_line(8000));
        let l = label_components(&m);
        assert_eq!(l.component_count(), 2);
        let up = l.label_at(SpherePoint::new(0.0, 1.0));
        let down = l.label_at(SpherePoint::new(0.0, -1.0));
        assert_ne!(up, down);
        assert_eq!(l.label_at(SpherePoint::new(3.0, 5.0)), up);
        assert_eq!(l.label_at(SpherePoint::new(-30.0, -0.5)), down);
    }

    #[test]
    fn annulus_has_one_hole() {
        let g = grid(128);
        let l = label_components(&annulus_complement(&g));
        assert_eq!(l.component_count(), 1);
        let holes = l.holes(1).unwrap();
        assert_eq!(holes.len(), 1);
        assert!(holes[0].contains(&g.owner_index(SpherePoint::real(0.0))));
        assert!(!l.simply_connected(1).unwrap());
        // The complement of the annulus has two components.
        let inverse = label_components(&annulus_complement(&g).complement());
        assert_eq!(inverse.component_count(), 2);
    }

    #[test]
    fn labels_partition_the_complement() {
        let g = grid(128);
        let m = rasterize(&g, &sample_circle(0.3, 0.1, 0.5, 3000))
            .union(&rasterize(&g, &sample_real_line(6000)));
        let l = label_components(&m);
        assert_eq!(l.sizes().iter().sum::<usize>(), m.complement().count());
        assert!(l.sizes().windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(l.counted(MIN_COMPONENT_PIXELS), 4);
        for j in 1..=4 {
            assert!(l.simply_connected(j).unwrap());
        }
    }

    #[test]
    fn invalid_labels() {
        let g = grid(64);
        let l = label_components(&SphereMask::empty(Arc::clone(&g)));
        assert!(matches!(l.holes(0), Err(TopologyError::InvalidLabel { .. })));
        assert!(matches!(l.simply_connected(2), Err(TopologyError::InvalidLabel { .. })));
    }

    #[test]
    fn classifier_examples() {
        assert_eq!(classify_count(&[(256, 2), (512, 2)]).unwrap(), ComponentClass::Two);
        assert_eq!(classify_count(&[(256, 0), (512, 0)]).unwrap(), ComponentClass::Zero);
        assert_eq!(classify_count(&[(256, 1), (512, 1)]).unwrap(), ComponentClass::One);
        assert_eq!(classify_count(&[(256, 5), (512, 9)]).unwrap(), ComponentClass::Many);
        assert_eq!(classify_count(&[(256, 3), (512, 3)]).unwrap(), ComponentClass::Many);
        assert_eq!(classify_count(&[(128, 7), (256, 2), (512, 2)]).unwrap(), ComponentClass::Two);
        assert_eq!(classify_count(&[(256, 2)]), Err(TopologyError::InsufficientTrace(1)));
    }

    #[test]
    fn permutations_on_the_circle() {
        let g = grid(128);
        let m = rasterize(&g, &sample_circle(0.0, 0.0, 1.0, 4000));
        let l = label_components(&m);
        let sq = RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap();
        let inv = RationalMap::from_real(&[1.0], &[0.0, 0.0, 1.0]).unwrap();
        let s = RationalSemigroup::new(vec![sq, inv]).unwrap();
        let table = check_permutation(&s, &l, MIN_COMPONENT_PIXELS).unwrap();
        assert_eq!(table[&0], vec![1, 2]);
        assert_eq!(table[&1], vec![2, 1]);
    }

    #[test]
    fn half_planes_under_real_maps() {
        let g = grid(128);
        let m = rasterize(&g, &sample_real_line(8000));
        let l = label_components(&m);
        let f = RationalMap::from_real(&[-1.0, 0.0, 2.0], &[0.0, 1.0]).unwrap();
        let minus_f = RationalMap::from_real(&[1.0, 0.0, -2.0], &[0.0, 1.0]).unwrap();
        let s = RationalSemigroup::new(vec![f, minus_f]).unwrap();
        let table = check_permutation(&s, &l, MIN_COMPONENT_PIXELS).unwrap();
        assert_eq!(table[&0], vec![1, 2]);
        assert_eq!(table[&1], vec![2, 1]);
    }

    #[test]
    fn folding_map_is_rejected() {
        // z^2 sends the upper half plane over both half planes.
        let g = grid(128);
        let l = label_components(&rasterize(&g, &sample_real_line(8000)));
        let sq = RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap();
        let s = RationalSemigroup::new(vec![sq]).unwrap();
        assert!(matches!(
            check_permutation(&s, &l, MIN_COMPONENT_PIXELS),
            Err(TopologyError::SplitImage { generator: 0, .. })
        ));
    }
}
