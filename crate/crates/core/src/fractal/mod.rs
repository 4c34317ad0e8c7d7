//! Grid-based set estimators on the Riemann sphere.

pub mod estimate;
pub mod grid;
pub mod mask;
pub mod reference;

pub use estimate::{
    close_invariant, close_pixelwise, forward_image_mask, invariant_julia, julia_semigroup, julia_single, preimage_mask,
    EstimateError, EstimatorParams, InvariantJulia,
};
pub use grid::{GridError, Pixel, TwoChartGrid, DEFAULT_OVERLAP};
pub use mask::{rasterize, SphereMask};
