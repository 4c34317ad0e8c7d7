//! A two-chart raster of the Riemann sphere.
//!
//! Chart 0 uses the coordinate `z`, chart 1 uses `w = 1/z`. Each chart is an
//! `n x n` square over `[-R, R]^2` with `R = 1 + overlap`. Only pixels whose
//! centre lies in the closed disk of radius `R` are active. Pixels of the two
//! charts that cover the same part of the overlap annulus are grouped into
//! identification classes.

use num_complex::Complex64;
use thiserror::Error;

use crate::sphere::SpherePoint;

pub const DEFAULT_OVERLAP: f64 = 0.05;
/// Smallest grid for which every point has an active pixel in its owner chart.
pub const MIN_GRID: usize = 32;
const NO_CLASS: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid size {0} is below the minimum {MIN_GRID}")]
    TooSmall(usize),
    #[error("overlap {0} must lie in (0, 0.5]")]
    BadOverlap(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub chart: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub struct TwoChartGrid {
    n: usize,
    overlap: f64,
    radius: f64,
    h: f64,
    active: Vec<bool>,
    class_of: Vec<u32>,
    class_start: Vec<u32>,
    class_members: Vec<u32>,
}

impl PartialEq for TwoChartGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.overlap == other.overlap
    }
}

impl TwoChartGrid {
    pub fn new(n: usize, overlap: f64) -> Result<Self, GridError> {
        if n < MIN_GRID {
            return Err(GridError::TooSmall(n));
        }
        if !(overlap > 0.0 && overlap <= 0.5) {
            return Err(GridError::BadOverlap(overlap));
        }
        let radius = 1.0 + overlap;
        let h = 2.0 * radius / n as f64;
        let mut grid = TwoChartGrid {
            n,
            overlap,
            radius,
            h,
            active: Vec::new(),
            class_of: Vec::new(),
            class_start: Vec::new(),
            class_members: Vec::new(),
        };
        grid.active = (0..grid.len())
            .map(|i| grid.centre(grid.pixel(i)).norm() <= radius)
            .collect();
        grid.build_classes();
        Ok(grid)
    }

    pub fn with_default_overlap(n: usize) -> Result<Self, GridError> {
        Self::new(n, DEFAULT_OVERLAP)
    }

    fn build_classes(&mut self) {
        let len = self.len();
        let mut parent: Vec<u32> = (0..len as u32).collect();
        fn find(parent: &mut [u32], mut i: u32) -> u32 {
            while parent[i as usize] != i {
                let up = parent[parent[i as usize] as usize];
                parent[i as usize] = up;
                i = up;
            }
            i
        }
        let inner = 1.0 / self.radius - self.h;
        for i in 0..len {
            if !self.active[i] {
                continue;
            }
            let p = self.pixel(i);
            let c = self.centre(p);
            if c.norm() < inner {
                continue;
            }
            if let Some(q) = self.pixel_of_coord(1 - p.chart, c.inv()) {
                let j = self.index(q);
                if self.active[j] {
                    let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j as u32));
                    if a != b {
                        parent[a.max(b) as usize] = a.min(b);
                    }
                }
            }
        }
        let roots: Vec<u32> = (0..len as u32).map(|i| find(&mut parent, i)).collect();
        let mut size = vec![0u32; len];
        for &r in &roots {
            size[r as usize] += 1;
        }
        let mut class_id = vec![NO_CLASS; len];
        let mut class_of = vec![NO_CLASS; len];
        let mut counts: Vec<u32> = Vec::new();
        for i in 0..len {
            let r = roots[i] as usize;
            if size[r] < 2 {
                continue;
            }
            if class_id[r] == NO_CLASS {
                class_id[r] = counts.len() as u32;
                counts.push(0);
            }
            class_of[i] = class_id[r];
            counts[class_id[r] as usize] += 1;
        }
        let mut start = Vec::with_capacity(counts.len() + 1);
        start.push(0u32);
        for c in &counts {
            start.push(start.last().unwrap() + c);
        }
        let mut fill = start.clone();
        let mut members = vec![0u32; *start.last().unwrap() as usize];
        for (i, &k) in class_of.iter().enumerate() {
            if k != NO_CLASS {
                members[fill[k as usize] as usize] = i as u32;
                fill[k as usize] += 1;
            }
        }
        self.class_of = class_of;
        self.class_start = start;
        self.class_members = members;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    /// Half-width `R` of each chart square.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Side length of a pixel in chart coordinates.
    pub fn pixel_size(&self) -> f64 {
        self.h
    }

    /// Largest chordal diameter of a pixel side (the chart scale factor peaks at the chart centre).
    pub fn chordal_pixel_size(&self) -> f64 {
        2.0 * self.h
    }

    /// Total pixel count over both charts, active or not.
    pub fn len(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self, p: Pixel) -> usize {
        (p.chart * self.n + p.row) * self.n + p.col
    }

    pub fn pixel(&self, index: usize) -> Pixel {
        let nn = self.n * self.n;
        let chart = index / nn;
        let rest = index % nn;
        Pixel {
            chart,
            row: rest / self.n,
            col: rest % self.n,
        }
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    /// Pixel centre in its chart's coordinate.
    pub fn centre(&self, p: Pixel) -> Complex64 {
        Complex64::new(
            -self.radius + (p.col as f64 + 0.5) * self.h,
            self.radius - (p.row as f64 + 0.5) * self.h,
        )
    }

    /// Pixel centre as a point of the sphere.
    pub fn point_of(&self, p: Pixel) -> SpherePoint {
        let c = self.centre(p);
        if p.chart == 0 {
            SpherePoint::finite(c)
        } else {
            SpherePoint::Finite(c).reciprocal()
        }
    }

    /// The raster cell of chart coordinate `u`, if it lies inside the square.
    pub fn pixel_of_coord(&self, chart: usize, u: Complex64) -> Option<Pixel> {
        let col = ((u.re + self.radius) / self.h).floor();
        let row = ((self.radius - u.im) / self.h).floor();
        let n = self.n as f64;
        if col >= 0.0 && col < n && row >= 0.0 && row < n {
            Some(Pixel {
                chart,
                row: row as usize,
                col: col as usize,
            })
        } else {
            None
        }
    }

    /// The raster cell of `p` in `chart`, active or not.
    pub fn pixel_of(&self, chart: usize, p: SpherePoint) -> Option<Pixel> {
        self.pixel_of_coord(chart, chart_coordinate(chart, p)?)
    }

    /// Chart 0 for `|z| <= 1`, chart 1 otherwise.
    pub fn owner_chart(p: SpherePoint) -> usize {
        match p {
            SpherePoint::Finite(z) if z.norm() <= 1.0 => 0,
            _ => 1,
        }
    }

    /// Index of the active pixel containing `p` in its owner chart.
    pub fn owner_index(&self, p: SpherePoint) -> usize {
        let chart = Self::owner_chart(p);
        self.pixel_of(chart, p)
            .map(|q| self.index(q))
            .filter(|&i| self.active[i])
            .expect("owner chart pixel is active for grids of at least MIN_GRID")
    }

    /// Indices of the active pixels containing `p`, one per covering chart.
    pub fn covering(&self, p: SpherePoint) -> impl Iterator<Item = usize> + '_ {
        (0..2).filter_map(move |chart| {
            self.pixel_of(chart, p)
                .map(|q| self.index(q))
                .filter(|&i| self.active[i])
        })
    }

    /// Pixels identified with `index` across the charts, including itself;
    /// empty when the pixel has no partner.
    pub fn class_members(&self, index: usize) -> &[u32] {
        match self.class_of[index] {
            NO_CLASS => &[],
            k => {
                let (a, b) = (
                    self.class_start[k as usize] as usize,
                    self.class_start[k as usize + 1] as usize,
                );
                &self.class_members[a..b]
            }
        }
    }

    /// Number of identification classes with more than one member.
    pub fn class_count(&self) -> usize {
        self.class_start.len().saturating_sub(1)
    }

    /// Spherical area attributed to a pixel; only pixels whose centre lies in
    /// the closed unit disk of their chart carry area, so the charts tile the
    /// sphere once.
    pub fn spherical_area(&self, index: usize) -> f64 {
        let c = self.centre(self.pixel(index));
        let r2 = c.norm_sqr();
        if !self.active[index] || r2 > 1.0 {
            return 0.0;
        }
        4.0 * self.h * self.h / ((1.0 + r2) * (1.0 + r2))
    }

    /// In-chart 4-neighbours of an active pixel that are themselves active.
    pub fn neighbours4(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbours(index, &[(-1, 0), (1, 0), (0, -1), (0, 1)])
    }

    /// In-chart 8-neighbours of an active pixel that are themselves active.
    pub fn neighbours8(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbours(
            index,
            &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        )
    }

    fn neighbours<'a>(
        &'a self,
        index: usize,
        offsets: &'a [(isize, isize)],
    ) -> impl Iterator<Item = usize> + 'a {
        let p = self.pixel(index);
        let n = self.n as isize;
        offsets.iter().filter_map(move |&(dr, dc)| {
            let (r, c) = (p.row as isize + dr, p.col as isize + dc);
            if r < 0 || c < 0 || r >= n || c >= n {
                return None;
            }
            let j = self.index(Pixel {
                chart: p.chart,
                row: r as usize,
                col: c as usize,
            });
            self.active[j].then_some(j)
        })
    }
}

/// Coordinate of `p` in `chart`; `None` for the point the chart misses.
pub fn chart_coordinate(chart: usize, p: SpherePoint) -> Option<Complex64> {
    let q = if chart == 0 { p } else { p.reciprocal() };
    q.as_finite()
}
