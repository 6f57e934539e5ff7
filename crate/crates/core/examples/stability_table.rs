use std::env;

use evifuse::stability::{stability_table_csv, StabilityConfig};

fn main() {
    let mut args = env::args().skip(1);
    let samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let classes: Vec<usize> = match args.next() {
        Some(n) => vec![n.parse().expect("class count")],
        None => (2..=7).collect(),
    };
    let results: Vec<_> = classes
        .into_iter()
        .map(|n| StabilityConfig::new(n, samples, 42).run().expect("valid configuration"))
        .collect();
    print!("{}", stability_table_csv(&results));
}
