//! Writes the synthetic two-expert sediment corpus to stdout.

use evifuse::corpus::{demo_corpus, DEMO_SEED, DEMO_TILES};

fn main() {
    print!("{}", demo_corpus(DEMO_TILES, DEMO_SEED).to_csv());
}
