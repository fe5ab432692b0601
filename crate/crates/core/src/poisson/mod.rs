//! Poisson suspension of the product flow `(s, y, z) -> (s, y, z + s t)` on
//! `R+* x R x Z`, with intensity `kappa x Lebesgue x Lebesgue(Z)` and `Z` a
//! circle of circumference `L`.

mod cylinder;
mod group;
mod kappa;
mod suspension;
mod tau;

pub use cylinder::{c1_rows, CylinderPlan, SubWindow, TrialCounts};
pub use group::{kappa_group_test, KappaGroupResult, DEFAULT_AFFINITY_THRESHOLD};
pub use kappa::{Kappa, KappaSampler};
pub use suspension::{apply_flow, q_transform, sample_poisson, Point, PointConfig, ProductFlowSpec, Window};
pub use tau::{tau_spectral, TauResult};
