//! Subsets of the sphere at grid resolution.

use std::sync::Arc;

use rayon::prelude::*;

use super::grid::TwoChartGrid;
use crate::sphere::SpherePoint;

/// A set of active pixels over both charts. Identified pixels of the overlap
/// annulus agree after every public mutation.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMask {
    grid: Arc<TwoChartGrid>,
    bits: Vec<bool>,
}

impl SphereMask {
    pub fn empty(grid: Arc<TwoChartGrid>) -> Self {
        let bits = vec![false; grid.len()];
        SphereMask { grid, bits }
    }

    /// Every active pixel set.
    pub fn full(grid: Arc<TwoChartGrid>) -> Self {
        let bits = (0..grid.len()).map(|i| grid.is_active(i)).collect();
        SphereMask { grid, bits }
    }

    /// Builds a mask from a per-pixel predicate, evaluated on active pixels in parallel.
    pub fn from_fn<F>(grid: Arc<TwoChartGrid>, f: F) -> Self
    where
        F: Fn(usize) -> bool + Sync,
    {
        let bits: Vec<bool> = (0..grid.len())
            .into_par_iter()
            .map(|i| grid.is_active(i) && f(i))
            .collect();
        let mut m = SphereMask { grid, bits };
        m.sync();
        m
    }

    pub fn grid(&self) -> &Arc<TwoChartGrid> {
        &self.grid
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The bits of one chart, row-major.
    pub fn chart_bits(&self, chart: usize) -> &[bool] {
        let nn = self.grid.n() * self.grid.n();
        &self.bits[chart * nn..(chart + 1) * nn]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn set_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// Whether the owner-chart pixel of `p` is set.
    pub fn contains_point(&self, p: SpherePoint) -> bool {
        self.bits[self.grid.owner_index(p)]
    }

    /// Sets the pixels covering `p` and their identified partners. Returns
    /// whether any pixel changed.
    pub fn insert_point(&mut self, p: SpherePoint) -> bool {
        let mut changed = false;
        let grid = Arc::clone(&self.grid);
        for i in grid.covering(p) {
            changed |= self.set_with_class(i);
        }
        changed
    }

    /// Sets an active pixel and its identified partners.
    pub fn insert_pixel(&mut self, index: usize) -> bool {
        if !self.grid.is_active(index) {
            return false;
        }
        self.set_with_class(index)
    }

    fn set_with_class(&mut self, i: usize) -> bool {
        let mut changed = !self.bits[i];
        self.bits[i] = true;
        let grid = Arc::clone(&self.grid);
        for &m in grid.class_members(i) {
            changed |= !self.bits[m as usize];
            self.bits[m as usize] = true;
        }
        changed
    }

    /// Makes identified pixels agree by setting a whole class when any member is set.
    pub fn sync(&mut self) {
        let grid = Arc::clone(&self.grid);
        for i in 0..self.bits.len() {
            if self.bits[i] {
                for &m in grid.class_members(i) {
                    self.bits[m as usize] = true;
                }
            }
        }
    }

    /// The active pixels outside the set. A class of identified pixels belongs
    /// to the complement only when none of its members is set.
    pub fn complement(&self) -> SphereMask {
        let grid = &self.grid;
        let bits = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                grid.is_active(i)
                    && !self.bits[i]
                    && grid.class_members(i).iter().all(|&m| !self.bits[m as usize])
            })
            .collect();
        SphereMask {
            grid: Arc::clone(grid),
            bits,
        }
    }

    /// Chebyshev dilation by `k` pixels within each chart, then sync.
    pub fn dilate(&self, k: usize) -> SphereMask {
        let n = self.grid.n();
        let nn = n * n;
        let mut bits = vec![false; self.bits.len()];
        for chart in 0..2 {
            let src = &self.bits[chart * nn..(chart + 1) * nn];
            let mut rows = vec![false; nn];
            rows.par_chunks_mut(n).enumerate().for_each(|(r, out)| {
                let line = &src[r * n..(r + 1) * n];
                for (c, o) in out.iter_mut().enumerate() {
                    let (a, b) = (c.saturating_sub(k), (c + k).min(n - 1));
                    *o = line[a..=b].iter().any(|&x| x);
                }
            });
            let dst = &mut bits[chart * nn..(chart + 1) * nn];
            dst.par_chunks_mut(n).enumerate().for_each(|(r, out)| {
                let (a, b) = (r.saturating_sub(k), (r + k).min(n - 1));
                for (c, o) in out.iter_mut().enumerate() {
                    *o = (a..=b).any(|rr| rows[rr * n + c]);
                }
            });
        }
        for (i, b) in bits.iter_mut().enumerate() {
            *b &= self.grid.is_active(i);
        }
        let mut m = SphereMask {
            grid: Arc::clone(&self.grid),
            bits,
        };
        m.sync();
        m
    }

    pub fn union(&self, other: &SphereMask) -> SphereMask {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &SphereMask) -> SphereMask {
        self.zip(other, |a, b| a && b)
    }

    /// Number of pixels set here but not in `other`.
    pub fn excess_over(&self, other: &SphereMask) -> usize {
        self.assert_same_grid(other);
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|&(&a, &b)| a && !b)
            .count()
    }

    pub fn is_subset(&self, other: &SphereMask) -> bool {
        self.excess_over(other) == 0
    }

    fn zip(&self, other: &SphereMask, f: impl Fn(bool, bool) -> bool) -> SphereMask {
        self.assert_same_grid(other);
        SphereMask {
            grid: Arc::clone(&self.grid),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn assert_same_grid(&self, other: &SphereMask) {
        assert!(
            *self.grid == *other.grid,
            "masks live on different grids"
        );
    }
}

/// Sets the pixel containing each point in every chart covering it.
pub fn rasterize<'a, I>(grid: &Arc<TwoChartGrid>, points: I) -> SphereMask
where
    I: IntoIterator<Item = &'a SpherePoint>,
{
    let mut m = SphereMask::empty(Arc::clone(grid));
    for &p in points {
        m.insert_point(p);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn grid(n: usize) -> Arc<TwoChartGrid> {
        Arc::new(TwoChartGrid::with_default_overlap(n).unwrap())
    }

    fn circle(g: &Arc<TwoChartGrid>, r: f64, k: usize) -> SphereMask {
        let pts: Vec<SpherePoint> = (0..k)
            .map(|j| SpherePoint::finite(Complex64::from_polar(r, j as f64 * std::f64::consts::TAU / k as f64)))
            .collect();
        rasterize(g, &pts)
    }

    #[test]
    fn rasterize_examples() {
        let g = grid(128);
        assert!(rasterize(&g, &[]).is_empty());
        let m = rasterize(&g, &[SpherePoint::real(0.0)]);
        assert_eq!(m.count(), 1);
        assert!(!m.chart_bits(1).iter().any(|&b| b));
        let m = rasterize(&g, &[SpherePoint::Infinity]);
        assert_eq!(m.count(), 1);
        assert!(m.chart_bits(1)[64 * 128 + 64]);
    }

    #[test]
    fn overlap_points_set_both_charts() {
        let g = grid(128);
        let m = rasterize(&g, &[SpherePoint::new(0.0, 1.0)]);
        assert!(m.chart_bits(0).iter().any(|&b| b));
        assert!(m.chart_bits(1).iter().any(|&b| b));
    }

    #[test]
    fn complement_examples() {
        let g = grid(64);
        let empty = SphereMask::empty(Arc::clone(&g));
        assert_eq!(empty.complement(), SphereMask::full(Arc::clone(&g)));
        assert!(SphereMask::full(Arc::clone(&g)).complement().is_empty());
        let m = circle(&g, 1.0, 2000);
        assert_eq!(m.complement().complement(), m);
        let m = circle(&g, 0.5, 500).union(&circle(&g, 1.02, 500));
        assert_eq!(m.complement().complement(), m);
    }

    #[test]
    fn complement_and_mask_partition_active_pixels() {
        let g = grid(64);
        let m = circle(&g, 0.98, 1000);
        let c = m.complement();
        let active = (0..g.len()).filter(|&i| g.is_active(i)).count();
        assert_eq!(m.count() + c.count(), active);
        assert!(m.intersection(&c).is_empty());
    }

    #[test]
    fn dilation_grows_by_chebyshev_ball() {
        let g = grid(64);
        let m = rasterize(&g, &[SpherePoint::new(0.3, 0.2)]);
        assert_eq!(m.dilate(1).count(), 9);
        assert_eq!(m.dilate(2).count(), 25);
        assert_eq!(m.dilate(0), m);
        assert!(m.is_subset(&m.dilate(1)));
    }

    #[test]
    fn sync_is_idempotent_and_insert_reports_change() {
        let g = grid(128);
        let mut m = circle(&g, 1.0, 700);
        let before = m.clone();
        m.sync();
        assert_eq!(m, before);
        assert!(!m.insert_point(SpherePoint::real(1.0)));
        assert!(m.insert_point(SpherePoint::real(0.1)));
    }

    #[test]
    fn from_fn_is_chart_consistent() {
        let g = grid(128);
        let m = SphereMask::from_fn(Arc::clone(&g), |i| g.centre(g.pixel(i)).im > 0.0);
        for i in m.set_indices() {
            for &j in g.class_members(i) {
                assert!(m.get(j as usize));
            }
        }
    }
}
