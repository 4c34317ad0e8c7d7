//! Points of the Riemann sphere, the chordal metric, and rotations of the
//! sphere used to conjugate rational maps.

use num_complex::Complex64;
use std::fmt;

use crate::ratmap::{MapError, RationalMap};

/// Finite values with modulus above this are treated as the point at infinity.
pub const SNAP_MODULUS: f64 = 1e15;

/// A point of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    /// Wraps a complex value, sending overflow, NaN and huge moduli to `Infinity`.
    pub fn finite(z: Complex64) -> Self {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() > SNAP_MODULUS {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(z)
        }
    }

    pub fn new(re: f64, im: f64) -> Self {
        Self::finite(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// The image under `z -> 1/z`, with `0 <-> Infinity`.
    pub fn reciprocal(&self) -> Self {
        match *self {
            SpherePoint::Infinity => SpherePoint::Finite(Complex64::new(0.0, 0.0)),
            SpherePoint::Finite(z) if z.re == 0.0 && z.im == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::finite(z.inv()),
        }
    }

    /// Unit vector of the stereographic embedding (north pole = infinity).
    pub fn to_unit_vector(&self) -> [f64; 3] {
        match *self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let r2 = z.norm_sqr();
                let d = 1.0 + r2;
                [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
            }
        }
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let [x, y, z] = v;
        if z >= 1.0 {
            return SpherePoint::Infinity;
        }
        SpherePoint::finite(Complex64::new(x / (1.0 - z), y / (1.0 - z)))
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::finite(z)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// Chordal distance on the sphere of diameter 2, so the result lies in `[0, 2]`.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
        }
    }
}

/// A rotation of the sphere, acting as `z -> (alpha z + beta) / (-conj(beta) z + conj(alpha))`.
///
/// Stored normalized so that `|alpha|^2 + |beta|^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereRotation {
    alpha: Complex64,
    beta: Complex64,
}

impl SphereRotation {
    /// Builds a rotation from unnormalized parameters. Returns `None` if both vanish.
    pub fn new(alpha: Complex64, beta: Complex64) -> Option<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        Some(SphereRotation {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn identity() -> Self {
        SphereRotation {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    /// `z -> -1/z`, which swaps `0` and `Infinity`.
    pub fn antipodal_swap() -> Self {
        SphereRotation {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// Rotation by `angle` about the axis through `0` and `Infinity`.
    pub fn about_poles(angle: f64) -> Self {
        SphereRotation {
            alpha: Complex64::from_polar(1.0, angle / 2.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn inverse(&self) -> Self {
        SphereRotation {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
    }

    /// `self ∘ other`, renormalized.
    pub fn compose(&self, other: &SphereRotation) -> Self {
        let (a1, b1) = (self.alpha, self.beta);
        let (a2, b2) = (other.alpha, other.beta);
        SphereRotation::new(a1 * a2 - b1 * b2.conj(), a1 * b2 + b1 * a2.conj())
            .expect("product of unit quaternions is nonzero")
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        apply_rotation(self, p)
    }

    /// The rotation as a degree-one rational map.
    pub fn to_map(&self) -> RationalMap {
        RationalMap::from_parts_unchecked(
            vec![self.beta, self.alpha],
            vec![self.alpha.conj(), -self.beta.conj()],
        )
    }
}

impl Default for SphereRotation {
    fn default() -> Self {
        Self::identity()
    }
}

pub fn apply_rotation(r: &SphereRotation, p: SpherePoint) -> SpherePoint {
    let (a, b) = (r.alpha, r.beta);
    match p {
        SpherePoint::Infinity => {
            if b.norm_sqr() == 0.0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::finite(a / -b.conj())
            }
        }
        SpherePoint::Finite(z) => {
            // Divide through by z away from the origin to keep magnitudes bounded.
            let (num, den) = if z.norm_sqr() <= 1.0 {
                (a * z + b, -b.conj() * z + a.conj())
            } else {
                let u = z.inv();
                (a + b * u, -b.conj() + a.conj() * u)
            };
            if den.norm_sqr() == 0.0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::finite(num / den)
            }
        }
    }
}

/// Returns `r ∘ f ∘ r⁻¹` as a rational map with the same degree as `f`.
pub fn conjugate_map(f: &RationalMap, r: &SphereRotation) -> Result<RationalMap, MapError> {
    let inner = f.compose(&r.inverse().to_map())?;
    r.to_map().compose(&inner)
}
