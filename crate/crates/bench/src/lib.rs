//! Shared fixtures for the benchmarks.

use churnforge::features::{extract_churn, standard_windows, FeatureMatrix, Population, Role, Task};
use churnforge::rebalance::undersample;
use churnforge::telco::{generate, GeneratorConfig, TelcoDataset};

pub fn dataset(consumers: usize) -> TelcoDataset {
    generate(&GeneratorConfig {
        seed: 1,
        n_consumers: consumers,
        n_smes: consumers / 15,
        ..GeneratorConfig::default()
    })
    .expect("valid config")
}

/// Balanced consumer-churn training matrix.
pub fn balanced_train(data: &TelcoDataset) -> FeatureMatrix {
    let m = extract_churn(data, &standard_windows(Task::Churn, Role::Train), Population::all()).expect("covered window");
    undersample(&m, 1).expect("two classes")
}
