//! Measures on the circle, the line and the multiplicative positive reals,
//! together with convolution, image measures, Fourier transforms and the
//! Hellinger affinity used as a numerical proxy for equivalence/singularity.

mod atomic;
mod grid;
mod ops;
mod trig;

pub use atomic::AtomicMeasure;
pub use grid::{Domain, GridDensity, GridSpec};
#[allow(unused_imports)]
pub(crate) use grid::deposit;
pub use ops::{
    affinity_raw, convolve, convolve_within, hellinger_affinity, pushforward_atoms, pushforward_grid, symmetrize,
    transform_eval, MapKind, MeasureRef, TransformArg,
};
pub use trig::TrigPoly;
