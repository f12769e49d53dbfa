//! Fixtures shared by the kernel benchmarks.

use sgpc_core::coeffs::builtin_separable;
use sgpc_core::{DistributionSpec, FeOrder, FeSpace, Mesh, PolyFamily, SeparableField, SpatialProfile, ZFactor};

/// Hermite input with the logistic factor on `(0,1)` meshed with `m` P2 cells.
pub fn logistic_1d(m: usize) -> (DistributionSpec, FeSpace, SeparableField) {
    let dist = DistributionSpec::iid(PolyFamily::hermite(), 1).expect("valid law");
    let space = FeSpace::new(Mesh::interval(m).expect("valid mesh"), FeOrder::P2);
    let field = builtin_separable(ZFactor::Logistic { component: 0 }, SpatialProfile::Quadratic, &dist, 1)
        .expect("elliptic field");
    (dist, space, field)
}
