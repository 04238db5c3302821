//! Shared fixtures for the benchmarks.

use cohomflow::analysis::build_initial;
use cohomflow::{InitialMetric, ManifoldSpec, ProfileSet, TheoremParams};

pub fn grove_ziller_s4(nodes: usize) -> ProfileSet {
    build_initial(
        ManifoldSpec::s4(2.0),
        InitialMetric::GroveZiller,
        &TheoremParams {
            nodes,
            ..Default::default()
        },
    )
    .expect("default fixture builds")
}
