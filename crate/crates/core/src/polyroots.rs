//! Complex polynomials and a simultaneous (Aberth–Ehrlich) root finder.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

/// Default root tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Sweep cap for the simultaneous iteration.
pub const MAX_SWEEPS: usize = 200;
/// Leading coefficients at or below this fraction of the largest one are dropped.
pub const TRIM_RELATIVE: f64 = 1e-14;
/// Fixed angular offset of the initial guesses (radians).
pub const DEFAULT_ANGLE_OFFSET: f64 = 0.4;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("cannot find roots of the zero polynomial")]
    ZeroPolynomial,
    #[error("root finder did not converge after {0} sweeps")]
    NoConvergence(usize),
}

/// Polynomial with complex coefficients in ascending powers.
///
/// The zero polynomial has no coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::trimmed(coeffs, TRIM_RELATIVE)
    }

    /// Drops leading coefficients with modulus `<= rel * max|c|`.
    pub fn trimmed(mut coeffs: Vec<Complex64>, rel: f64) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(c) = coeffs.last() {
            if c.norm() <= rel * max || c.norm() == 0.0 {
                coeffs.pop();
            } else {
                break;
            }
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z - root`.
    pub fn linear_factor(root: Complex64) -> Self {
        Polynomial {
            coeffs: vec![-root, ONE],
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree after trimming; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, with the zero polynomial counted as degree 0.
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn max_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Polynomial::constant(ONE);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `sum_k c_k u^(d-k)` for `d >= degree`: the polynomial read in the
    /// chart at infinity, `u^d p(1/u)`.
    pub fn eval_reversed(&self, d: usize, u: Complex64) -> Complex64 {
        let lead = horner_reversed(&self.coeffs, u);
        lead * u.powu((d - self.degree_or_zero()) as u32)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Horner evaluation.
pub fn evaluate_poly(p: &Polynomial, z: Complex64) -> Complex64 {
    p.eval(z)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// `z^d p(1/z)` evaluated at `u = 1/z`, i.e. the reversed polynomial.
fn horner_reversed(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs.iter().fold(ZERO, |acc, &c| acc * u + c)
}

/// `|p(z)|` scaled by `max(1, |z|)^-deg`, which stays finite for large `z`.
fn scaled_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    if z.norm() <= 1.0 {
        horner(coeffs, z).norm()
    } else {
        horner_reversed(coeffs, z.inv()).norm()
    }
}

/// Newton ratio `p(z) / p'(z)`, computed on the reversed polynomial away from the origin.
fn newton_ratio(coeffs: &[Complex64], deriv: &[Complex64], z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let p = horner(coeffs, z);
        let dp = horner(deriv, z);
        p / dp
    } else {
        let n = (coeffs.len() - 1) as f64;
        let u = z.inv();
        let q = horner_reversed(coeffs, u);
        // q'(u) for q(u) = sum_k c_k u^(n-k)
        let mut dq = ZERO;
        for (k, &c) in coeffs.iter().enumerate() {
            let e = coeffs.len() - 1 - k;
            if e > 0 {
                dq += c * (e as f64) * u.powu(e as u32 - 1);
            }
        }
        z * q / (q * n - u * dq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Distinct roots with multiplicities, sorted by real then imaginary part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter()
    }
}

pub fn find_roots(p: &Polynomial, tol: f64) -> Result<RootSet, RootError> {
    find_roots_with_offset(p, tol, DEFAULT_ANGLE_OFFSET)
}

/// As [`find_roots`], with the angular offset of the initial circle exposed.
pub fn find_roots_with_offset(
    p: &Polynomial,
    tol: f64,
    angle_offset: f64,
) -> Result<RootSet, RootError> {
    let Some(deg) = p.degree() else {
        return Err(RootError::ZeroPolynomial);
    };
    let coeffs = p.coeffs();
    if deg == 0 {
        return Ok(RootSet::default());
    }

    // Exact zeros at the origin are factored out.
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced: Vec<Complex64> = coeffs[zeros..].to_vec();
    let mut values: Vec<Complex64> = vec![ZERO; zeros];
    match reduced.len() - 1 {
        0 => {}
        1 => values.push(-reduced[0] / reduced[1]),
        _ => values.extend(aberth(&reduced, angle_offset)),
    }

    let max = p.max_modulus();
    let clusters = cluster(&values, tol.sqrt());
    let mut roots = Vec::with_capacity(clusters.len());
    for members in clusters {
        let value = members.iter().map(|&i| values[i]).sum::<Complex64>() / members.len() as f64;
        let value = if members.iter().any(|&i| i < zeros) {
            ZERO
        } else {
            value
        };
        let bound = tol * (1.0 + value.norm().min(1.0 / value.norm())).powi(deg as i32) * max;
        // NaN residuals fail too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(scaled_residual(coeffs, value) <= bound) {
            return Err(RootError::NoConvergence(MAX_SWEEPS));
        }
        roots.push(Root {
            value,
            multiplicity: members.len(),
        });
    }
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(RootSet { roots })
}

/// Simultaneous Newton with Aberth correction, then per-root Newton polishing.
fn aberth(coeffs: &[Complex64], angle_offset: f64) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let deriv: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect();

    let mut z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64 + angle_offset))
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_SWEEPS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(coeffs, &deriv, z[i]);
            if !ratio.re.is_finite() || !ratio.im.is_finite() {
                // p'(z) vanished or p(z) is exactly zero.
                if scaled_residual(coeffs, z[i]) == 0.0 {
                    done[i] = true;
                    continue;
                }
                let bump = Complex64::from_polar(1e-8 * (1.0 + z[i].norm()), i as f64);
                z[i] += bump;
                all_done = false;
                continue;
            }
            let mut repulsion = ZERO;
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm_sqr() > 0.0 {
                        repulsion += d.inv();
                    }
                }
            }
            let step = ratio / (ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                    done[i] = true;
                } else {
                    all_done = false;
                }
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    for zi in z.iter_mut() {
        let mut best = scaled_residual(coeffs, *zi);
        for _ in 0..3 {
            let candidate = *zi - newton_ratio(coeffs, &deriv, *zi);
            if !(candidate.re.is_finite() && candidate.im.is_finite()) {
                break;
            }
            let r = scaled_residual(coeffs, candidate);
            if r < best {
                best = r;
                *zi = candidate;
            } else {
                break;
            }
        }
    }
    z
}

/// Single-linkage clustering of points closer than `radius`; clusters are
/// returned in order of their first member.
fn cluster(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() < radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(lead: Complex64, roots: &[Complex64]) -> Polynomial {
        roots
            .iter()
            .fold(Polynomial::constant(lead), |acc, &r| &acc * &Polynomial::linear_factor(r))
    }

    #[test]
    fn evaluation_examples() {
        let p = Polynomial::from_real(&[5.0]);
        assert_eq!(evaluate_poly(&p, c(3.0, -2.0)), c(5.0, 0.0));
        let q = Polynomial::from_real(&[-1.0, 0.0, 2.0]);
        assert_eq!(evaluate_poly(&q, c(1.0, 0.0)), c(1.0, 0.0));
        let id = Polynomial::from_real(&[0.0, 1.0]);
        assert_eq!(evaluate_poly(&id, c(0.0, 1.0)), c(0.0, 1.0));
    }

    #[test]
    fn trimming_drops_negligible_leading_terms() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1e-17, 0.0)]);
        assert_eq!(p.degree(), Some(1));
        assert!(Polynomial::from_real(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn roots_of_z_squared_plus_one() {
        let roots = find_roots(&Polynomial::from_real(&[1.0, 0.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots.roots()[0].value - c(0.0, -1.0)).norm() < 1e-12);
        assert!((roots.roots()[1].value - c(0.0, 1.0)).norm() < 1e-12);
        assert!(roots.iter().all(|r| r.multiplicity == 1));
    }

    #[test]
    fn preimage_polynomial_of_cantor_map() {
        // 2w^2 - w - 1 = (w - 1)(2w + 1)
        let roots = find_roots(&Polynomial::from_real(&[-1.0, -1.0, 2.0]), DEFAULT_TOL).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots.roots()[0].value - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((roots.roots()[1].value - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn triple_root_is_merged() {
        let p = Polynomial::from_real(&[-1.0, 3.0, -3.0, 1.0]);
        let roots = find_roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(roots.len(), 1, "{roots:?}");
        assert_eq!(roots.roots()[0].multiplicity, 3);
        assert!((roots.roots()[0].value - c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn zero_roots_are_exact() {
        let roots = find_roots(&Polynomial::from_real(&[0.0, 0.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(
            roots.roots(),
            &[Root {
                value: ZERO,
                multiplicity: 2
            }]
        );
    }

    #[test]
    fn errors_and_constants() {
        assert_eq!(
            find_roots(&Polynomial::zero(), DEFAULT_TOL),
            Err(RootError::ZeroPolynomial)
        );
        assert!(find_roots(&Polynomial::from_real(&[3.0]), DEFAULT_TOL)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unreachable_roots_are_reported() {
        // A spread of 1e3 at degree 40 is beyond the sweep cap from the bounding circle.
        let roots: Vec<Complex64> = (0..40)
            .map(|k| c(0.01 * 1.2f64.powi(k) * if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let p = from_roots(c(1.0, 0.0), &roots);
        assert_eq!(
            find_roots(&p, DEFAULT_TOL),
            Err(RootError::NoConvergence(MAX_SWEEPS))
        );
    }

    #[test]
    fn badly_scaled_high_degree() {
        // Roots spread over several orders of magnitude, as in composed denominators.
        let roots: Vec<Complex64> = (0..40)
            .map(|k| c(0.01 * 1.17f64.powi(k) * if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let p = from_roots(c(1.0, 0.0), &roots);
        let found = find_roots(&p, DEFAULT_TOL).unwrap();
        assert_eq!(found.total_multiplicity(), 40);
        for r in &roots {
            let nearest = found
                .iter()
                .map(|f| (f.value - r).norm() / r.norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-6, "{r} missing");
        }
    }

    fn separated_roots() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..=8).prop_filter(
            "roots well separated",
            |rs| {
                rs.iter().enumerate().all(|(i, a)| {
                    rs.iter()
                        .skip(i + 1)
                        .all(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 0.2)
                })
            },
        )
    }

    proptest! {
        #[test]
        fn reconstruction(rs in separated_roots(), lead_re in 0.5f64..2.0, lead_im in -1.0f64..1.0) {
            let lead = c(lead_re, lead_im);
            let roots: Vec<Complex64> = rs.iter().map(|&(a, b)| c(a, b)).collect();
            let p = from_roots(lead, &roots);
            let found = find_roots(&p, DEFAULT_TOL).unwrap();
            prop_assert_eq!(found.total_multiplicity(), roots.len());
            let mut rebuilt = Polynomial::constant(lead);
            for r in found.iter() {
                for _ in 0..r.multiplicity {
                    rebuilt = &rebuilt * &Polynomial::linear_factor(r.value);
                }
            }
            let scale = p.max_modulus();
            for k in 0..=roots.len() {
                prop_assert!((rebuilt.coeff(k) - p.coeff(k)).norm() <= 1e-6 * scale);
            }
        }

        #[test]
        fn independent_of_initial_offset(rs in separated_roots(), offset in 0.0f64..6.0) {
            let roots: Vec<Complex64> = rs.iter().map(|&(a, b)| c(a, b)).collect();
            let p = from_roots(c(1.0, 0.0), &roots);
            let a = find_roots(&p, DEFAULT_TOL).unwrap();
            let b = find_roots_with_offset(&p, DEFAULT_TOL, offset).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert_eq!(x.multiplicity, y.multiplicity);
                prop_assert!((x.value - y.value).norm() < 1e-8);
            }
        }
    }
}
