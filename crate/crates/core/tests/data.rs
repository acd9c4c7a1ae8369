use lomboost::data::{
    parse_sparse_file, parse_sparse_str, split_dataset, synthetic_hierarchical, to_sparse_string,
    write_sparse_file, Dataset, Example, SplitSpec,
};
use lomboost::learner::Hyperplane;
use lomboost::objective::{objective_value, ClassDistribution, SplitStatistics};
use proptest::prelude::*;

fn example_strategy() -> impl Strategy<Value = Example> {
    (
        1u32..=9,
        proptest::collection::btree_map(1u32..=40, -1e6f64..1e6, 0..6),
    )
        .prop_map(|(label, features)| Example::new(label, features.into_iter().collect()))
}

proptest! {
    #[test]
    fn serialize_then_parse_round_trips(examples in proptest::collection::vec(example_strategy(), 1..40)) {
        let data = Dataset::new(examples).unwrap();
        let back = parse_sparse_str(&to_sparse_string(&data)).unwrap();
        prop_assert_eq!(back.examples(), data.examples());
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.svm");
    let data = synthetic_hierarchical(4, 6, 50, 0.3, 2).unwrap();
    write_sparse_file(&data, &path).unwrap();
    let back = parse_sparse_file(&path).unwrap();
    assert_eq!(back.examples(), data.examples());
    assert_eq!(back.num_classes(), 4);
    assert!(parse_sparse_file(dir.path().join("missing.svm")).is_err());
}

/// Example `j` carries the unique feature value `j`, so partitions can be
/// compared as sets.
fn tagged(n: usize, k: u32) -> Dataset {
    let examples = (0..n)
        .map(|j| Example::new((j as u32 * 7 % k) + 1, vec![(1, j as f64 + 1.0)]))
        .collect();
    Dataset::new(examples).unwrap()
}

fn tags(data: &Dataset) -> Vec<u64> {
    data.examples()
        .iter()
        .map(|e| e.features[0].1 as u64)
        .collect()
}

#[test]
fn split_is_a_disjoint_cover() {
    let data = tagged(1234, 5);
    let (train, valid, test) = split_dataset(&data, &SplitSpec::new(11)).unwrap();
    let mut all: Vec<u64> = [tags(&train), tags(&valid), tags(&test)].concat();
    all.sort_unstable();
    assert_eq!(all, (1..=1234).collect::<Vec<u64>>());
}

#[test]
fn split_preserves_class_proportions() {
    for (n, k, seed) in [(1000, 3, 1), (5000, 10, 2), (6400, 32, 1)] {
        let data = tagged(n, k);
        let global: Vec<f64> = data
            .class_counts()
            .iter()
            .map(|&c| c as f64 / n as f64)
            .collect();
        let (train, valid, test) = split_dataset(&data, &SplitSpec::new(seed)).unwrap();
        for part in [&train, &valid, &test] {
            let m = part.len() as f64;
            for (class, &c) in part.class_counts().iter().enumerate() {
                let gap = (c as f64 / m - global[class]).abs();
                assert!(gap <= 0.05, "n={n} class {class}: gap {gap}");
            }
        }
    }
}

#[test]
fn noise_free_root_admits_a_perfect_split() {
    // route the first half of the classes right with a coordinate hyperplane
    let k = 8;
    let data = synthetic_hierarchical(k, k, 800, 0.0, 3).unwrap();
    let weights: Vec<(u32, f64)> = (1..=k as u32)
        .map(|i| (i, if i as usize <= k / 2 { 1.0 } else { -1.0 }))
        .collect();
    let plane = Hyperplane::from_sparse(k, &weights, 0.0);
    let mut right = vec![0u64; k];
    for x in data.examples() {
        if plane.score(x) > 0.0 {
            right[x.class()] += 1;
        }
    }
    let counts = data.class_counts();
    let dist = ClassDistribution::from_counts(&counts).unwrap();
    let conditionals = counts
        .iter()
        .zip(&right)
        .map(|(&n, &r)| r as f64 / n as f64)
        .collect();
    let stats = SplitStatistics::from_conditionals(&dist, conditionals).unwrap();
    assert_eq!(objective_value(&dist, &stats).unwrap(), 1.0);
}
