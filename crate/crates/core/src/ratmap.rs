//! Rational maps of the Riemann sphere.

use num_complex::Complex64;
use thiserror::Error;

use crate::polyroots::{find_roots, Polynomial, RootError, DEFAULT_TOL};
use crate::sphere::{conjugate_map, SpherePoint, SphereRotation};

/// Relative cutoff under which a homogeneous value counts as zero in `eval`.
const EVAL_ZERO: f64 = 1e-12;
/// Relative bound for the numerical lowest-terms check.
const COMMON_ROOT: f64 = 1e-9;
/// Relative cutoff for cancelling leading coefficients (preimages, critical points).
const CANCEL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("map has degree {0}, need at least {1}")]
    DegreeTooLow(usize, usize),
    #[error("numerator and denominator share a root (residual {0:.3e})")]
    NotLowestTerms(f64),
    #[error("composition or conjugation lost lowest terms")]
    DegenerateMap,
    #[error("numerator and denominator both vanish at {0}")]
    Indeterminate(SpherePoint),
    #[error("critical multiplicities sum to {found}, expected {expected}")]
    InconsistentValency { expected: usize, found: usize },
    #[error(transparent)]
    Roots(#[from] RootError),
}

/// A ratio of polynomials in lowest terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    degree: usize,
}

impl RationalMap {
    /// Validates a user-supplied map: nonzero denominator, degree at least one,
    /// and no shared root between numerator and denominator.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, MapError> {
        let map = Self::from_polys(num, den)?;
        map.check_lowest_terms()?;
        Ok(map)
    }

    pub fn from_real(num: &[f64], den: &[f64]) -> Result<Self, MapError> {
        Self::new(Polynomial::from_real(num), Polynomial::from_real(den))
    }

    pub fn from_complex(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self, MapError> {
        Self::new(Polynomial::new(num), Polynomial::new(den))
    }

    fn from_polys(num: Polynomial, den: Polynomial) -> Result<Self, MapError> {
        if den.is_zero() {
            return Err(MapError::ZeroDenominator);
        }
        if num.is_zero() {
            return Err(MapError::DegreeTooLow(0, 1));
        }
        let degree = num.degree_or_zero().max(den.degree_or_zero());
        if degree == 0 {
            return Err(MapError::DegreeTooLow(0, 1));
        }
        Ok(RationalMap { num, den, degree })
    }

    /// Skips validation; used for Möbius maps and derivatives.
    pub(crate) fn from_parts_unchecked(num: Vec<Complex64>, den: Vec<Complex64>) -> Self {
        let num = Polynomial::new(num);
        let den = Polynomial::new(den);
        let degree = num.degree_or_zero().max(den.degree_or_zero());
        RationalMap { num, den, degree }
    }

    pub fn identity() -> Self {
        Self::from_parts_unchecked(
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
        )
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn coeff_scale(&self) -> f64 {
        self.num.max_modulus().max(self.den.max_modulus())
    }

    fn check_lowest_terms(&self) -> Result<(), MapError> {
        if self.den.degree_or_zero() == 0 {
            return Ok(());
        }
        let roots = find_roots(&self.den, DEFAULT_TOL)?;
        let dn = self.num.degree_or_zero();
        let scale = self.num.max_modulus();
        let mut worst = f64::INFINITY;
        for r in roots.iter() {
            let z = r.value;
            let ratio = if z.norm() <= 1.0 {
                self.num.eval(z).norm() / ((1.0 + z.norm()).powi(dn as i32) * scale)
            } else {
                let u = z.inv();
                self.num.eval_reversed(dn, u).norm() / ((1.0 + u.norm()).powi(dn as i32) * scale)
            };
            worst = worst.min(ratio);
        }
        if worst > COMMON_ROOT {
            Ok(())
        } else {
            Err(MapError::NotLowestTerms(worst))
        }
    }

    /// Evaluates on the sphere, reading large arguments in the chart at infinity.
    pub fn eval(&self, p: SpherePoint) -> Result<SpherePoint, MapError> {
        let d = self.degree;
        let (n, m, near) = match p {
            SpherePoint::Infinity => (self.num.coeff(d), self.den.coeff(d), 0.0),
            SpherePoint::Finite(z) if z.norm() <= 1.0 => (self.num.eval(z), self.den.eval(z), z.norm()),
            SpherePoint::Finite(z) => {
                let u = z.inv();
                (
                    self.num.eval_reversed(d, u),
                    self.den.eval_reversed(d, u),
                    u.norm(),
                )
            }
        };
        let cutoff = EVAL_ZERO * (1.0 + near).powi(d as i32) * self.coeff_scale();
        let den_small = m.norm() < cutoff;
        if den_small && n.norm() < cutoff {
            return Err(MapError::Indeterminate(p));
        }
        if den_small {
            return Ok(SpherePoint::Infinity);
        }
        Ok(SpherePoint::finite(n / m))
    }

    /// `self ∘ inner`, normalized so the largest coefficient is one.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap, MapError> {
        let d = self.degree;
        let (p, q) = (&inner.num, &inner.den);
        let p_pow: Vec<Polynomial> = (0..=d).map(|k| p.pow(k)).collect();
        let q_pow: Vec<Polynomial> = (0..=d).map(|k| q.pow(k)).collect();
        let homogenize = |f: &Polynomial| {
            (0..=d).fold(Polynomial::zero(), |acc, k| {
                let c = f.coeff(k);
                if c.norm() == 0.0 {
                    acc
                } else {
                    &acc + &(&p_pow[k] * &q_pow[d - k]).scale(c)
                }
            })
        };
        let num = homogenize(&self.num);
        let den = homogenize(&self.den);
        let out = normalized(num, den).map_err(|_| MapError::DegenerateMap)?;
        // Lowest terms is inherited from the factors, so only the degree is checked.
        if out.degree != self.degree * inner.degree {
            return Err(MapError::DegenerateMap);
        }
        Ok(out)
    }

    /// `num' den - num den'`, whose zeros are the finite critical points.
    pub fn wronskian(&self) -> Polynomial {
        let a = &self.num.derivative() * &self.den;
        let b = &self.num * &self.den.derivative();
        &a - &b
    }

    /// `(num' den - num den') / den^2`; not reduced to lowest terms.
    pub fn derivative(&self) -> RationalMap {
        let w = self.wronskian();
        let d2 = &self.den * &self.den;
        let degree = w.degree_or_zero().max(d2.degree_or_zero());
        RationalMap {
            num: w,
            den: d2,
            degree,
        }
    }

    /// Critical points with multiplicity (valency minus one).
    pub fn critical_points(&self) -> Result<Vec<(SpherePoint, usize)>, MapError> {
        let w = Polynomial::trimmed(self.wronskian().coeffs().to_vec(), CANCEL);
        let mut out: Vec<(SpherePoint, usize)> = Vec::new();
        if w.degree_or_zero() > 0 {
            for r in find_roots(&w, DEFAULT_TOL)?.iter() {
                out.push((SpherePoint::finite(r.value), r.multiplicity));
            }
        }
        // Criticality at infinity is the order of vanishing at 0 after moving
        // infinity to the origin.
        let moved = conjugate_map(self, &SphereRotation::antipodal_swap())?;
        let wm = moved.wronskian();
        let max = wm.max_modulus();
        let order = wm
            .coeffs()
            .iter()
            .take_while(|c| c.norm() <= CANCEL * max)
            .count();
        if order > 0 {
            out.push((SpherePoint::Infinity, order));
        }
        Ok(out)
    }

    /// Sum of `valency - 1` over the sphere; always `2 (degree - 1)` for a valid map.
    pub fn rh_deficiency(&self) -> Result<usize, MapError> {
        if self.degree < 2 {
            return Err(MapError::DegreeTooLow(self.degree, 2));
        }
        let found: usize = self.critical_points()?.iter().map(|(_, m)| m).sum();
        let expected = 2 * (self.degree - 1);
        if found != expected {
            return Err(MapError::InconsistentValency { expected, found });
        }
        Ok(found)
    }

    /// All `w` with `self(w) = q`, with multiplicities summing to the degree.
    pub fn preimages(&self, q: SpherePoint) -> Result<Vec<(SpherePoint, usize)>, MapError> {
        let d = self.degree;
        let poly = match q {
            SpherePoint::Infinity => self.den.clone(),
            SpherePoint::Finite(v) => {
                let (a, b, s) = if v.norm() <= 1.0 {
                    (&self.num, &self.den, v)
                } else {
                    (&self.den, &self.num, v.inv())
                };
                let coeffs = (0..=d).map(|k| a.coeff(k) - s * b.coeff(k)).collect();
                Polynomial::trimmed(coeffs, CANCEL)
            }
        };
        let mut out: Vec<(SpherePoint, usize)> = Vec::new();
        let mut at_infinity = d - poly.degree_or_zero();
        if poly.degree_or_zero() > 0 {
            for r in find_roots(&poly, DEFAULT_TOL)?.iter() {
                match SpherePoint::finite(r.value) {
                    SpherePoint::Infinity => at_infinity += r.multiplicity,
                    pt => out.push((pt, r.multiplicity)),
                }
            }
        }
        if at_infinity > 0 {
            out.push((SpherePoint::Infinity, at_infinity));
        }
        Ok(out)
    }
}

/// Divides both polynomials by the coefficient of largest modulus.
fn normalized(num: Polynomial, den: Polynomial) -> Result<RationalMap, MapError> {
    let pick = num
        .coeffs()
        .iter()
        .chain(den.coeffs())
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(MapError::ZeroDenominator)?;
    let s = pick.inv();
    RationalMap::from_polys(num.scale(s), den.scale(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::chordal_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cantor_map() -> RationalMap {
        RationalMap::from_real(&[-1.0, 0.0, 2.0], &[0.0, 1.0]).unwrap()
    }

    fn newton_map() -> RationalMap {
        RationalMap::from_real(&[-1.0, 0.0, 1.0], &[0.0, 2.0]).unwrap()
    }

    fn square() -> RationalMap {
        RationalMap::from_real(&[0.0, 0.0, 1.0], &[1.0]).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
        let r: f64 = rng.gen_range(-3.0..3.0);
        SpherePoint::finite(Complex64::from_polar(10f64.powf(r), rng.gen_range(0.0..6.3)))
    }

    fn close(a: SpherePoint, b: SpherePoint, tol: f64) -> bool {
        chordal_distance(a, b) <= tol
    }

    fn has(points: &[(SpherePoint, usize)], p: SpherePoint, m: usize) -> bool {
        points.iter().any(|&(q, k)| k == m && close(p, q, 1e-9))
    }

    #[test]
    fn constructor_rejects_bad_maps() {
        assert_eq!(
            RationalMap::from_real(&[1.0, 1.0], &[0.0]),
            Err(MapError::ZeroDenominator)
        );
        assert!(matches!(
            RationalMap::from_real(&[3.0], &[2.0]),
            Err(MapError::DegreeTooLow(0, 1))
        ));
        // (z - 1)(z + 2) / (z - 1)
        assert!(matches!(
            RationalMap::from_real(&[-2.0, 1.0, 1.0], &[-1.0, 1.0]),
            Err(MapError::NotLowestTerms(_))
        ));
    }

    #[test]
    fn eval_examples() {
        let f = cantor_map();
        assert!(close(f.eval(SpherePoint::real(1.0)).unwrap(), SpherePoint::real(1.0), 1e-15));
        assert!(f.eval(SpherePoint::real(0.0)).unwrap().is_infinity());
        assert!(f.eval(SpherePoint::Infinity).unwrap().is_infinity());
        let g = newton_map();
        let i = SpherePoint::new(0.0, 1.0);
        assert!(close(g.eval(i).unwrap(), i, 1e-15));
        let mobius = RationalMap::from_real(&[1.0, 3.0], &[2.0, 1.0]).unwrap();
        assert!(close(mobius.eval(SpherePoint::Infinity).unwrap(), SpherePoint::real(3.0), 1e-15));
        let inv = RationalMap::from_real(&[1.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(inv.eval(SpherePoint::Infinity).unwrap(), SpherePoint::real(0.0));
        // Large arguments are read in the chart at infinity without overflow.
        let big = SpherePoint::real(1e200);
        assert!(close(mobius.eval(big).unwrap(), SpherePoint::real(3.0), 1e-12));
    }

    #[test]
    fn composition_examples() {
        let f = cantor_map();
        let g = newton_map();
        let fi = f.compose(&RationalMap::identity()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let z = random_point(&mut rng);
            assert!(close(fi.eval(z).unwrap(), f.eval(z).unwrap(), 1e-12));
        }
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg.degree(), 4);
        for _ in 0..100 {
            let z = random_point(&mut rng);
            let lhs = fg.eval(z).unwrap();
            let rhs = f.eval(g.eval(z).unwrap()).unwrap();
            assert!(close(lhs, rhs, 1e-9), "{z}: {lhs} vs {rhs}");
        }
        let z4 = square().compose(&square()).unwrap();
        assert_eq!(z4.num().coeffs(), Polynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]).coeffs());
        assert_eq!(z4.den().coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn derivative_examples() {
        let d = square().derivative();
        let z = c(0.7, -0.2);
        assert!((d.eval(SpherePoint::Finite(z)).unwrap().as_finite().unwrap() - z * 2.0).norm() < 1e-14);

        // ((z^2 - 1) / 2z)' = (z^2 + 1) / (2 z^2)
        let dg = newton_map().derivative();
        for z in [c(0.3, 0.4), c(-2.0, 1.0), c(5.0, 0.0)] {
            let expected = (z * z + 1.0) / (z * z * 2.0);
            let got = dg.eval(SpherePoint::Finite(z)).unwrap().as_finite().unwrap();
            assert!((got - expected).norm() < 1e-12 * expected.norm());
        }

        let recip = RationalMap::from_real(&[1.0], &[0.0, 1.0]).unwrap().derivative();
        let z = c(0.5, 0.5);
        let got = recip.eval(SpherePoint::Finite(z)).unwrap().as_finite().unwrap();
        assert!((got + (z * z).inv()).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for f in [cantor_map(), newton_map(), cantor_map().compose(&newton_map()).unwrap()] {
            let df = f.derivative();
            for _ in 0..50 {
                let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let h = 1e-6;
                let at = |w: Complex64| f.eval(SpherePoint::Finite(w)).unwrap().as_finite().unwrap();
                let fd = (at(z + h) - at(z - h)) / (2.0 * h);
                let exact = df.eval(SpherePoint::Finite(z)).unwrap().as_finite().unwrap();
                assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0));
            }
        }
    }

    #[test]
    fn critical_point_examples() {
        let s = 0.5f64.sqrt();
        let cf = cantor_map().critical_points().unwrap();
        assert_eq!(cf.len(), 2);
        assert!(has(&cf, SpherePoint::new(0.0, s), 1) && has(&cf, SpherePoint::new(0.0, -s), 1));

        let cg = newton_map().critical_points().unwrap();
        assert_eq!(cg.len(), 2);
        assert!(has(&cg, SpherePoint::new(0.0, 1.0), 1) && has(&cg, SpherePoint::new(0.0, -1.0), 1));

        let cs = square().critical_points().unwrap();
        assert!(has(&cs, SpherePoint::real(0.0), 1) && has(&cs, SpherePoint::Infinity, 1));
    }

    #[test]
    fn deficiency_examples() {
        let (f, g) = (cantor_map(), newton_map());
        assert_eq!(f.rh_deficiency().unwrap(), 2);
        assert_eq!(f.compose(&g).unwrap().rh_deficiency().unwrap(), 6);
        assert_eq!(square().rh_deficiency().unwrap(), 2);
        let cube = RationalMap::from_real(&[0.0, 0.0, 0.0, 1.0], &[1.0]).unwrap();
        // Degenerate critical points: 0 and infinity each with multiplicity 2.
        let cp = cube.critical_points().unwrap();
        assert!(has(&cp, SpherePoint::real(0.0), 2) && has(&cp, SpherePoint::Infinity, 2));
        assert_eq!(cube.rh_deficiency().unwrap(), 4);
    }

    #[test]
    fn preimage_examples() {
        let f = cantor_map();
        let pre = f.preimages(SpherePoint::real(1.0)).unwrap();
        assert!(has(&pre, SpherePoint::real(1.0), 1) && has(&pre, SpherePoint::real(-0.5), 1));
        let pre = f.preimages(SpherePoint::Infinity).unwrap();
        assert!(has(&pre, SpherePoint::real(0.0), 1) && has(&pre, SpherePoint::Infinity, 1));
        let pre = square().preimages(SpherePoint::real(0.0)).unwrap();
        assert_eq!(pre, vec![(SpherePoint::real(0.0), 2)]);
        // Leading coefficients cancel: (z + 1)/z takes the value 1 only at infinity.
        let m = RationalMap::from_real(&[1.0, 1.0], &[0.0, 1.0]).unwrap();
        let pre = m.preimages(SpherePoint::real(1.0)).unwrap();
        assert_eq!(pre, vec![(SpherePoint::Infinity, 1)]);
    }

    #[test]
    fn preimage_count_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let maps = [
            cantor_map(),
            newton_map(),
            square(),
            cantor_map().compose(&newton_map()).unwrap(),
            RationalMap::from_real(&[0.0, 0.0, 1.0], &[-1.0, 0.0, 2.0]).unwrap(),
        ];
        for f in &maps {
            for _ in 0..100 {
                let q = random_point(&mut rng);
                let pre = f.preimages(q).unwrap();
                assert_eq!(pre.iter().map(|p| p.1).sum::<usize>(), f.degree());
                for &(w, _) in &pre {
                    assert!(close(f.eval(w).unwrap(), q, 1e-7));
                }
            }
            let pre = f.preimages(SpherePoint::Infinity).unwrap();
            assert_eq!(pre.iter().map(|p| p.1).sum::<usize>(), f.degree());
        }
    }

    fn random_map(rng: &mut ChaCha8Rng, degree: usize) -> RationalMap {
        loop {
            let mut coeffs = || -> Vec<Complex64> {
                (0..=degree)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            };
            let (n, d) = (coeffs(), coeffs());
            if let Ok(m) = RationalMap::from_complex(n, d) {
                if m.degree() == degree {
                    return m;
                }
            }
        }
    }

    #[test]
    fn conjugation_covariance_of_preimages() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let f = random_map(&mut rng, 2);
            let r = SphereRotation::new(
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
            .unwrap();
            let g = conjugate_map(&f, &r).unwrap();
            let q = random_point(&mut rng);
            let lhs = g.preimages(r.apply(q)).unwrap();
            let rhs = f.preimages(q).unwrap();
            assert_eq!(lhs.len(), rhs.len());
            for &(w, m) in &rhs {
                assert!(lhs.iter().any(|&(v, k)| k == m && close(v, r.apply(w), 1e-7)));
            }
        }
    }

    #[test]
    fn deficiency_of_random_compositions() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
            let f = random_map(&mut rng, da);
            let g = random_map(&mut rng, db);
            let fg = f.compose(&g).unwrap();
            assert_eq!(fg.rh_deficiency().unwrap(), 2 * (da * db - 1));
        }
    }
}
