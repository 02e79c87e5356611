//! Data-level class rebalancing: random undersampling of the majority class
//! and repeating oversampling of the minority class. Neither sampler alters
//! feature values; output keeps the input's row order.
//!
//! When both classes have the same size, class 1 is treated as the minority.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SampleError;
use crate::features::FeatureMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Undersample,
    Oversample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub strategy: Strategy,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, SampleError> {
        match self.strategy {
            Strategy::Undersample => undersample(matrix, self.seed),
            Strategy::Oversample => oversample(matrix, self.seed),
        }
    }
}

struct Split {
    minority: Vec<usize>,
    majority: Vec<usize>,
}

fn split_classes(matrix: &FeatureMatrix) -> Result<Split, SampleError> {
    let (mut zeros, mut ones) = (Vec::new(), Vec::new());
    for (i, r) in matrix.rows().iter().enumerate() {
        match r.label {
            Some(0) => zeros.push(i),
            Some(_) => ones.push(i),
            None => return Err(SampleError::Unlabeled(r.billing_id.clone())),
        }
    }
    match (zeros.is_empty(), ones.is_empty()) {
        (true, _) => Err(SampleError::SingleClass(1)),
        (_, true) => Err(SampleError::SingleClass(0)),
        _ if ones.len() <= zeros.len() => Ok(Split {
            minority: ones,
            majority: zeros,
        }),
        _ => Ok(Split {
            minority: zeros,
            majority: ones,
        }),
    }
}

/// Indices of `pool` to favour, chosen as the first `take` entries of a
/// seeded Fisher–Yates shuffle.
fn seeded_pick(pool: &[usize], take: usize, seed: u64) -> Vec<usize> {
    let mut shuffled = pool.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    shuffled.truncate(take);
    shuffled
}

/// Keeps every minority row plus an equally sized uniform random subset of
/// the majority class, drawn without replacement.
pub fn undersample(matrix: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix, SampleError> {
    let split = split_classes(matrix)?;
    let mut keep = vec![false; matrix.len()];
    for &i in &split.minority {
        keep[i] = true;
    }
    for i in seeded_pick(&split.majority, split.minority.len(), seed) {
        keep[i] = true;
    }
    let indices: Vec<usize> = (0..matrix.len()).filter(|&i| keep[i]).collect();
    Ok(matrix.select(&indices))
}

/// Keeps every majority row once and repeats minority rows until both
/// classes are equal: each minority row appears `M / m` times and a random
/// `M % m` of them once more.
pub fn oversample(matrix: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix, SampleError> {
    let split = split_classes(matrix)?;
    let (big, small) = (split.majority.len(), split.minority.len());
    let mut copies = vec![1usize; matrix.len()];
    for &i in &split.minority {
        copies[i] = big / small;
    }
    for i in seeded_pick(&split.minority, big % small, seed) {
        copies[i] += 1;
    }
    let indices: Vec<usize> = (0..matrix.len()).flat_map(|i| std::iter::repeat_n(i, copies[i])).collect();
    Ok(matrix.select(&indices))
}
