//! Trains on the 32-class synthetic problem and prints the trace.
//!
//! ```sh
//! cargo run --release -p lomboost --example train_synthetic -- 0.5
//! ```

use lomboost::data::{split_dataset, synthetic_hierarchical, SplitSpec};
use lomboost::learner::{trace_to_csv, train_with_test, TrainConfig};

fn main() -> lomboost::Result<()> {
    let learning_rate = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("learning rate must be a number"))
        .unwrap_or(0.5);
    let data = synthetic_hierarchical(32, 64, 6400, 0.05, 1)?;
    let (train, _valid, test) = split_dataset(&data, &SplitSpec::new(1))?;
    let config = TrainConfig {
        learning_rate,
        ..TrainConfig::default()
    };
    let out = train_with_test(&train, Some(&test), &config)?;
    print!("{}", trace_to_csv(&out.trace));
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
