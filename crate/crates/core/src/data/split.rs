use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DataError;

/// Keeps the samples labelled `class_a` or `class_b` and relabels them 0 and 1.
/// Returns `(original index, binary label)` pairs in input order.
pub fn select_binary_classes(labels: &[u8], class_a: u8, class_b: u8) -> Result<Vec<(usize, u8)>, DataError> {
    if class_a == class_b {
        return Err(DataError::SameClass(class_a));
    }
    let picked: Vec<(usize, u8)> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, &y)| match y {
            y if y == class_a => Some((i, 0)),
            y if y == class_b => Some((i, 1)),
            _ => None,
        })
        .collect();
    for (class, binary) in [(class_a, 0), (class_b, 1)] {
        if !picked.iter().any(|&(_, y)| y == binary) {
            return Err(DataError::MissingClass(class));
        }
    }
    Ok(picked)
}

/// Largest-remainder apportionment of `total` over `weights`.
fn apportion(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    let mut shares: Vec<usize> = weights.iter().map(|&w| total * w / sum).collect();
    let mut left = total - shares.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..weights.len()).collect();
    by_remainder.sort_by_key(|&c| (std::cmp::Reverse(total * weights[c] % sum), c));
    for &c in by_remainder.iter().cycle() {
        if left == 0 {
            break;
        }
        shares[c] += 1;
        left -= 1;
    }
    shares
}

/// Seeded stratified split into disjoint train and test index sets whose class
/// counts follow the overall proportions to within one sample.
pub fn stratified_split(
    labels: &[u8],
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if n_train + n_test > labels.len() {
        return Err(DataError::Invalid(format!(
            "requested {n_train} + {n_test} samples from a pool of {}",
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    let counts: Vec<usize> = by_class.values().map(Vec::len).collect();
    let train_counts = apportion(n_train, &counts);
    let mut test_counts = apportion(n_test, &counts);

    // both roundings may go up for the same class; move the surplus to a class with room
    for c in 0..counts.len() {
        while train_counts[c] + test_counts[c] > counts[c] {
            let target = (0..counts.len())
                .find(|&o| train_counts[o] + test_counts[o] < counts[o])
                .expect("pool is large enough");
            test_counts[c] -= 1;
            test_counts[target] += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n_test);
    for (c, members) in by_class.values_mut().enumerate() {
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..train_counts[c]]);
        test.extend_from_slice(&members[train_counts[c]..train_counts[c] + test_counts[c]]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn select_examples() {
        assert_eq!(select_binary_classes(&[0, 1, 2, 0], 0, 1).unwrap(), vec![(0, 0), (1, 1), (3, 0)]);
        let picked = select_binary_classes(&[8, 0, 3, 8, 1], 0, 8).unwrap();
        assert_eq!(picked, vec![(0, 1), (1, 0), (3, 1)]);
        assert!(matches!(select_binary_classes(&[0, 1], 1, 1), Err(DataError::SameClass(1))));
        assert!(matches!(select_binary_classes(&[0, 1], 0, 8), Err(DataError::MissingClass(8))));
    }

    #[test]
    fn balanced_pool() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let (train, test) = stratified_split(&labels, 10, 20, 1).unwrap();
        assert_eq!(train.iter().filter(|&&i| labels[i] == 1).count(), 5);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 10);
        assert_eq!(stratified_split(&labels, 10, 20, 1).unwrap(), (train, test));
        assert!(stratified_split(&labels, 60, 41, 1).is_err());
    }

    proptest! {
        #[test]
        fn proportions_and_disjointness(
            ones in 1usize..80, zeros in 1usize..80, train_frac in 0.0f64..1.0, test_frac in 0.0f64..1.0, seed in any::<u64>()
        ) {
            let mut labels = vec![0u8; zeros];
            labels.extend(vec![1u8; ones]);
            let n = labels.len();
            let n_train = (train_frac * n as f64) as usize;
            let n_test = ((n - n_train) as f64 * test_frac) as usize;
            let (train, test) = stratified_split(&labels, n_train, n_test, seed).unwrap();
            prop_assert_eq!(train.len(), n_train);
            prop_assert_eq!(test.len(), n_test);
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), n_train + n_test);
            for (set, size) in [(&train, n_train), (&test, n_test)] {
                let got = set.iter().filter(|&&i| labels[i] == 1).count() as f64;
                let exact = size as f64 * ones as f64 / n as f64;
                prop_assert!((got - exact).abs() <= 1.0 + 1e-9, "got {} exact {}", got, exact);
            }
        }
    }
}
