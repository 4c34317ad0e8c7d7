//! Julia sets, completely invariant Julia sets and the component topology of
//! the completely invariant set of normality for finitely generated rational
//! semigroups on the Riemann sphere.

pub mod cli;
pub mod fractal;
pub mod polyroots;
pub mod ratmap;
pub mod semigroup;
pub mod sphere;
pub mod topology;

pub use polyroots::{find_roots, Polynomial, RootSet};
pub use ratmap::{MapError, RationalMap};
pub use sphere::{chordal_distance, SpherePoint, SphereRotation};
