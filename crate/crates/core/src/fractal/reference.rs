//! Sampled reference curves and pixel-distance comparisons against masks.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::mask::{rasterize, SphereMask};
use crate::sphere::SpherePoint;

/// `k` points of the extended real line, equally spaced in the chordal metric
/// and including infinity.
pub fn sample_real_line(k: usize) -> Vec<SpherePoint> {
    (0..k)
        .map(|j| {
            let phi = -PI + 2.0 * PI * j as f64 / k as f64;
            if j == 0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::real((phi / 2.0).tan())
            }
        })
        .collect()
}

/// `k` equally spaced points of the real segment `[a, b]`, endpoints included.
pub fn sample_segment(a: f64, b: f64, k: usize) -> Vec<SpherePoint> {
    let steps = (k.max(2) - 1) as f64;
    (0..k.max(2))
        .map(|j| SpherePoint::real(a + (b - a) * j as f64 / steps))
        .collect()
}

/// `k` equally spaced points of the circle with centre `cx + i cy` and radius `r`.
pub fn sample_circle(cx: f64, cy: f64, r: f64, k: usize) -> Vec<SpherePoint> {
    (0..k)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / k as f64;
            SpherePoint::finite(Complex64::new(cx, cy) + Complex64::from_polar(r, t))
        })
        .collect()
}

/// Fraction of `samples` whose owner pixel lies within `k` pixels of the mask.
pub fn coverage(mask: &SphereMask, samples: &[SpherePoint], k: usize) -> f64 {
    if samples.is_empty() {
        return 1.0;
    }
    let grown = mask.dilate(k);
    let hit = samples.iter().filter(|&&p| grown.contains_point(p)).count();
    hit as f64 / samples.len() as f64
}

/// Number of set pixels farther than `k` pixels from the rasterized reference.
pub fn excess_pixels(mask: &SphereMask, reference: &[SpherePoint], k: usize) -> usize {
    let near = rasterize(mask.grid(), reference).dilate(k);
    mask.excess_over(&near)
}
