//! Stratified k-fold assignment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::LabelSource;
use crate::error::{Error, Result};

/// Fold index of every item, aligned with the input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratify_on: LabelSource,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Shuffle each class with a seeded generator, then deal items round-robin
/// over the folds. The second class continues where the first stopped so
/// fold sizes also stay balanced.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64, stratify_on: LabelSource) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Parameter(format!("fold count k={k} must be at least 2")));
    }
    if k > labels.len() {
        return Err(Error::Parameter(format!("fold count k={k} exceeds {} items", labels.len())));
    }
    if !labels.iter().any(|&y| y) {
        return Err(Error::NoPositives);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut offset = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            assignment[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldPlan {
        k,
        seed,
        stratify_on,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn per_fold(plan: &FoldPlan, labels: &[bool], class: bool) -> Vec<usize> {
        let mut counts = vec![0; plan.k];
        for (i, &f) in plan.assignment.iter().enumerate() {
            if labels[i] == class {
                counts[f] += 1;
            }
        }
        counts
    }

    #[test]
    fn ten_positives_in_ten_folds() {
        let labels: Vec<bool> = (0..100).map(|i| i % 10 == 3).collect();
        let plan = stratified_folds(&labels, 10, 1, LabelSource::Gold).unwrap();
        assert_eq!(per_fold(&plan, &labels, true), vec![1; 10]);
        assert_eq!(per_fold(&plan, &labels, false), vec![9; 10]);
        assert_eq!(plan, stratified_folds(&labels, 10, 1, LabelSource::Gold).unwrap());
    }

    #[test]
    fn eleven_positives() {
        let labels: Vec<bool> = (0..50).map(|i| i < 11).collect();
        let plan = stratified_folds(&labels, 10, 3, LabelSource::Weak).unwrap();
        let mut pos = per_fold(&plan, &labels, true);
        pos.sort();
        assert_eq!(pos, [1, 1, 1, 1, 1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn errors() {
        assert!(stratified_folds(&[true, false], 3, 0, LabelSource::Weak).is_err());
        assert!(stratified_folds(&[true, false], 1, 0, LabelSource::Weak).is_err());
        assert!(matches!(stratified_folds(&[false; 5], 2, 0, LabelSource::Weak), Err(Error::NoPositives)));
    }

    proptest! {
        #[test]
        fn balanced_partition(labels in proptest::collection::vec(any::<bool>(), 10..200), k in 2usize..10, seed in any::<u64>()) {
            prop_assume!(labels.iter().any(|&y| y));
            let plan = stratified_folds(&labels, k, seed, LabelSource::Weak).unwrap();
            prop_assert_eq!(plan.assignment.len(), labels.len());
            let mut covered = 0;
            for f in 0..k {
                covered += plan.test_indices(f).len();
            }
            prop_assert_eq!(covered, labels.len());
            for class in [true, false] {
                let c = per_fold(&plan, &labels, class);
                prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
            }
        }
    }
}
