//! Fixed inputs shared by the benchmarks.

use uep_core::allocators::AllocationProblem;
use uep_core::scenario::{Scenario, StreamSection};
use uep_core::{LayerConfig, TransmissionPlan};

/// Three windows of 10, 50 and 100 elements, two elements per TB.
pub fn validation_case(tbs: usize) -> (LayerConfig, TransmissionPlan, Vec<f64>) {
    let layers = LayerConfig::from_cumulative(&[10, 50, 100]).expect("valid layers");
    (layers, TransmissionPlan::uniform(3, tbs, 2), vec![0.1; 3])
}

/// Stream A or B on the default 80 radial users.
pub fn allocation_case(stream_b: bool, n_rbp: usize) -> AllocationProblem {
    let scenario = Scenario {
        stream: if stream_b { StreamSection::stream_b() } else { StreamSection::stream_a() },
        ..Scenario::default()
    };
    let users = scenario.place_users().expect("users");
    scenario.problem(&users, n_rbp).expect("problem")
}
