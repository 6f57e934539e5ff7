//! Monte Carlo study of how often the conjunctive consensus and PCR5 pick
//! different classes for two random experts.
//!
//! Each expert is an M5-style mass on `n` exclusive classes: a mass on every
//! singleton and the remainder on `Θ`. Singleton masses are drawn uniformly
//! and the draw is rejected unless they sum to at most 1. Both fused masses
//! are decided by maximal pignistic probability over the singletons, which
//! for this focal structure agrees with every other criterion.
//!
//! Work is split into fixed chunks of [`CHUNK_PAIRS`] pairs. Chunk `k` draws
//! from ChaCha8 stream `k` of the master seed, and chunk statistics are
//! merged in chunk order, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::{decide_singletons, Criterion};
use crate::error::{Error, Result};
use crate::fusion::{combine_conjunctive, combine_pcr5};
use crate::lattice::{Frame, Model};
use crate::mass::{MassFunction, World};

pub const CHUNK_PAIRS: usize = 4096;

pub const MIN_CLASSES: usize = 2;
pub const MAX_CLASSES: usize = 7;

/// How one expert's singleton masses are drawn before rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingLaw {
    /// `m(X) ~ U[0,1]` per class, i.e. uniform on `[0,1]^n ∩ {Σ m ≤ 1}`.
    UniformMass,
    /// `m(X) = p_X·c_X` with `p_X, c_X ~ U[0,1]` independently.
    ProportionCertainty,
}

impl std::str::FromStr for SamplingLaw {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uniform-mass" => Ok(SamplingLaw::UniformMass),
            "proportion-certainty" => Ok(SamplingLaw::ProportionCertainty),
            other => Err(format!(
                "unknown sampling law `{other}` (expected uniform-mass or proportion-certainty)"
            )),
        }
    }
}

impl std::fmt::Display for SamplingLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplingLaw::UniformMass => "uniform-mass",
            SamplingLaw::ProportionCertainty => "proportion-certainty",
        })
    }
}

fn check_classes(n: usize) -> Result<()> {
    if (MIN_CLASSES..=MAX_CLASSES).contains(&n) {
        Ok(())
    } else {
        Err(Error::ClassCount(n))
    }
}

/// Shafer frame `{A, B, …}` with `n` classes.
pub fn class_frame(n: usize) -> Result<Frame> {
    check_classes(n)?;
    let labels: Vec<String> = (0..n).map(|i| char::from(b'A' + i as u8).to_string()).collect();
    Frame::new(&labels, Model::Shafer)
}

/// Singleton masses `{X: m_X}` plus `Θ: 1 − Σ m_X`.
pub fn singleton_mass(frame: &Frame, masses: &[f64]) -> Result<MassFunction> {
    let sum: f64 = masses.iter().sum();
    let mut pairs = Vec::with_capacity(masses.len() + 1);
    for (i, &m) in masses.iter().enumerate() {
        pairs.push((frame.atom(i)?, m));
    }
    pairs.push((frame.full(), (1.0 - sum).max(0.0)));
    MassFunction::new(frame, pairs, World::Closed)
}

/// M5-style mass from explicit proportions and certainties.
pub fn mass_from_draws(frame: &Frame, proportions: &[f64], certainties: &[f64]) -> Result<MassFunction> {
    let masses: Vec<f64> = proportions.iter().zip(certainties).map(|(p, c)| p * c).collect();
    let sum: f64 = masses.iter().sum();
    if sum > 1.0 + crate::mass::NORMALIZATION_TOLERANCE {
        return Err(Error::MassOverflow { sum });
    }
    singleton_mass(frame, &masses)
}

/// Draws accepted singleton masses into `out`; returns the number of
/// attempts, rejected ones included. A draw is abandoned as soon as its
/// partial sum exceeds 1, which leaves the accepted law unchanged.
pub fn sample_singleton_masses<R: Rng + ?Sized>(law: SamplingLaw, rng: &mut R, out: &mut [f64]) -> u64 {
    let mut attempts = 0;
    'attempt: loop {
        attempts += 1;
        let mut sum = 0.0;
        for slot in out.iter_mut() {
            let x = match law {
                SamplingLaw::UniformMass => rng.random::<f64>(),
                SamplingLaw::ProportionCertainty => {
                    let p = rng.random::<f64>();
                    p * rng.random::<f64>()
                }
            };
            sum += x;
            if sum > 1.0 {
                continue 'attempt;
            }
            *slot = x;
        }
        return attempts;
    }
}

/// One random expert on `frame` (Shafer, at least two classes).
pub fn sample_expert<R: Rng + ?Sized>(frame: &Frame, law: SamplingLaw, rng: &mut R) -> Result<MassFunction> {
    let mut masses = vec![0.0; frame.len()];
    sample_singleton_masses(law, rng, &mut masses);
    singleton_mass(frame, &masses)
}

/// Outcome of fusing one pair of experts both ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    /// Conjunctive `m(∅)`.
    pub conflict: f64,
    pub consensus_choice: usize,
    pub pcr5_choice: usize,
    /// Either decision was a tie.
    pub tie: bool,
}

impl PairOutcome {
    pub fn changed(&self) -> bool {
        self.consensus_choice != self.pcr5_choice
    }
}

pub fn evaluate_pair(m1: &MassFunction, m2: &MassFunction) -> Result<PairOutcome> {
    let consensus = combine_conjunctive(&[m1.clone(), m2.clone()])?;
    let pcr5 = combine_pcr5(m1, m2)?;
    let by_consensus = decide_singletons(&consensus, Criterion::Pignistic)?;
    let by_pcr5 = decide_singletons(&pcr5, Criterion::Pignistic)?;
    Ok(PairOutcome {
        conflict: consensus.conflict(),
        consensus_choice: by_consensus.chosen.atom_index().expect("singleton candidate"),
        pcr5_choice: by_pcr5.chosen.atom_index().expect("singleton candidate"),
        tie: by_consensus.tie || by_pcr5.tie,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub n_classes: usize,
    /// Accepted expert pairs.
    pub samples: usize,
    pub seed: u64,
    pub law: SamplingLaw,
    /// Fuse `(m2, m1)` instead of `(m1, m2)`.
    pub swap_experts: bool,
}

impl StabilityConfig {
    pub fn new(n_classes: usize, samples: usize, seed: u64) -> Self {
        StabilityConfig {
            n_classes,
            samples,
            seed,
            law: SamplingLaw::UniformMass,
            swap_experts: false,
        }
    }

    pub fn with_law(mut self, law: SamplingLaw) -> Self {
        self.law = law;
        self
    }

    pub fn run(&self) -> Result<StabilityResult> {
        if self.samples == 0 {
            return Err(Error::NoSamples);
        }
        Ok(run_pairs(self, 1)?.into_result(self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub n_classes: usize,
    pub law: SamplingLaw,
    pub seed: u64,
    /// Accepted pairs.
    pub samples: usize,
    /// Expert draws attempted, rejected ones included.
    pub draws: u64,
    pub changes: usize,
    pub ties: usize,
    pub change_rate: f64,
    /// 95% normal-approximation half-width of `change_rate`.
    pub ci_half_width: f64,
    pub mean_conflict: f64,
    /// `None` when no decision changed.
    pub mean_conflict_change: Option<f64>,
}

impl StabilityResult {
    pub fn standard_error(&self) -> f64 {
        (self.change_rate * (1.0 - self.change_rate) / self.samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    pairs: usize,
    changes: usize,
    ties: usize,
    draws: u64,
    conflict_sum: f64,
    conflict_change_sum: f64,
    hist_all: Vec<u64>,
    hist_change: Vec<u64>,
}

impl Tally {
    fn with_bins(bins: usize) -> Self {
        Tally {
            hist_all: vec![0; bins],
            hist_change: vec![0; bins],
            ..Tally::default()
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.pairs += other.pairs;
        self.changes += other.changes;
        self.ties += other.ties;
        self.draws += other.draws;
        self.conflict_sum += other.conflict_sum;
        self.conflict_change_sum += other.conflict_change_sum;
        for (a, b) in self.hist_all.iter_mut().zip(&other.hist_all) {
            *a += b;
        }
        for (a, b) in self.hist_change.iter_mut().zip(&other.hist_change) {
            *a += b;
        }
    }

    fn into_result(self, config: &StabilityConfig) -> StabilityResult {
        let n = self.pairs as f64;
        let rate = self.changes as f64 / n;
        StabilityResult {
            n_classes: config.n_classes,
            law: config.law,
            seed: config.seed,
            samples: self.pairs,
            draws: self.draws,
            changes: self.changes,
            ties: self.ties,
            change_rate: rate,
            ci_half_width: 1.96 * (rate * (1.0 - rate) / n).sqrt(),
            mean_conflict: self.conflict_sum / n,
            mean_conflict_change: (self.changes > 0).then(|| self.conflict_change_sum / self.changes as f64),
        }
    }
}

fn bin_of(x: f64, bins: usize) -> usize {
    ((x.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn run_chunk(config: &StabilityConfig, frame: &Frame, chunk: usize, bins: usize) -> Result<Tally> {
    let mut rng = chunk_rng(config.seed, chunk);
    let pairs = CHUNK_PAIRS.min(config.samples - chunk * CHUNK_PAIRS);
    let mut tally = Tally::with_bins(bins);
    let n = frame.len();
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..pairs {
        tally.draws += sample_singleton_masses(config.law, &mut rng, &mut a);
        tally.draws += sample_singleton_masses(config.law, &mut rng, &mut b);
        let m1 = singleton_mass(frame, &a)?;
        let m2 = singleton_mass(frame, &b)?;
        let outcome = if config.swap_experts {
            evaluate_pair(&m2, &m1)?
        } else {
            evaluate_pair(&m1, &m2)?
        };
        let bin = bin_of(outcome.conflict, bins);
        tally.pairs += 1;
        tally.conflict_sum += outcome.conflict;
        tally.hist_all[bin] += 1;
        if outcome.tie {
            tally.ties += 1;
        }
        if outcome.changed() {
            tally.changes += 1;
            tally.conflict_change_sum += outcome.conflict;
            tally.hist_change[bin] += 1;
        }
    }
    Ok(tally)
}

fn run_pairs(config: &StabilityConfig, bins: usize) -> Result<Tally> {
    let frame = class_frame(config.n_classes)?;
    let chunks = config.samples.div_ceil(CHUNK_PAIRS);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|k| run_chunk(config, &frame, k, bins))
        .collect::<Result<Vec<_>>>()?;
    let mut total = Tally::with_bins(bins);
    for t in &tallies {
        total.merge(t);
    }
    Ok(total)
}

/// Fraction of random expert pairs whose pignistic decision differs between
/// consensus and PCR5, under the uniform-mass law.
pub fn decision_change_rate(n_classes: usize, samples: usize, seed: u64) -> Result<StabilityResult> {
    StabilityConfig::new(n_classes, samples, seed).run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictSubset {
    All,
    DecisionChange,
}

/// Equal-width histogram on `[0, 1]` with frequencies summing to 1, or all
/// zero when nothing was counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub count: u64,
}

impl Histogram {
    fn from_counts(counts: &[u64]) -> Self {
        let bins = counts.len();
        let count: u64 = counts.iter().sum();
        Histogram {
            edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
            frequencies: counts
                .iter()
                .map(|&c| if count == 0 { 0.0 } else { c as f64 / count as f64 })
                .collect(),
            count,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        Some(
            self.frequencies
                .iter()
                .enumerate()
                .map(|(i, f)| f * (self.edges[i] + self.edges[i + 1]) / 2.0)
                .sum(),
        )
    }
}

/// Both conflict histograms of one run, plus its stability summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictHistograms {
    pub all: Histogram,
    pub decision_change: Histogram,
    pub summary: Option<StabilityResult>,
}

pub fn conflict_histograms(config: &StabilityConfig, bins: usize) -> Result<ConflictHistograms> {
    if bins < 10 {
        return Err(Error::TooFewBins(bins));
    }
    check_classes(config.n_classes)?;
    let tally = run_pairs(config, bins)?;
    Ok(ConflictHistograms {
        all: Histogram::from_counts(&tally.hist_all),
        decision_change: Histogram::from_counts(&tally.hist_change),
        summary: (tally.pairs > 0).then(|| tally.clone().into_result(config)),
    })
}

/// Histogram of the conjunctive conflict over sampled pairs.
pub fn conflict_density(
    n_classes: usize,
    samples: usize,
    bins: usize,
    subset: ConflictSubset,
    seed: u64,
) -> Result<Histogram> {
    let h = conflict_histograms(&StabilityConfig::new(n_classes, samples, seed), bins)?;
    Ok(match subset {
        ConflictSubset::All => h.all,
        ConflictSubset::DecisionChange => h.decision_change,
    })
}

/// Equality imposed on the two-class experts of an invariance trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvarianceConstraint {
    /// `m1(A) = m2(B)`.
    CrossExperts,
    /// `m1(A) = m1(B)`.
    WithinExpert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub m1: [f64; 2],
    pub m2: [f64; 2],
    pub consensus_choice: usize,
    pub pcr5_choice: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub constraint: InvarianceConstraint,
    pub trials: usize,
    pub ties_excluded: usize,
    pub counterexamples: Vec<Counterexample>,
}

fn uniform_below<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> f64 {
    loop {
        let x = rng.random::<f64>();
        if x <= bound {
            return x;
        }
    }
}

/// Checks that the two rules agree on constrained two-class pairs.
pub fn invariance_check(constraint: InvarianceConstraint, trials: usize, seed: u64) -> Result<InvarianceReport> {
    let frame = class_frame(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = InvarianceReport {
        constraint,
        trials,
        ties_excluded: 0,
        counterexamples: Vec::new(),
    };
    for _ in 0..trials {
        let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
        match constraint {
            InvarianceConstraint::CrossExperts => {
                sample_singleton_masses(SamplingLaw::UniformMass, &mut rng, &mut a);
                b[1] = a[0];
                b[0] = uniform_below(&mut rng, 1.0 - b[1]);
            }
            InvarianceConstraint::WithinExpert => {
                let x = uniform_below(&mut rng, 0.5);
                a = [x, x];
                sample_singleton_masses(SamplingLaw::UniformMass, &mut rng, &mut b);
            }
        }
        let outcome = evaluate_pair(&singleton_mass(&frame, &a)?, &singleton_mass(&frame, &b)?)?;
        if outcome.tie {
            report.ties_excluded += 1;
        } else if outcome.changed() {
            report.counterexamples.push(Counterexample {
                m1: a,
                m2: b,
                consensus_choice: outcome.consensus_choice,
                pcr5_choice: outcome.pcr5_choice,
            });
        }
    }
    Ok(report)
}

/// `n,samples,change_rate,ci,mean_conflict,mean_conflict_change`, one row per result.
pub fn stability_table_csv(results: &[StabilityResult]) -> String {
    let mut out = String::from("n,samples,change_rate,ci,mean_conflict,mean_conflict_change\n");
    for r in results {
        let change = r.mean_conflict_change.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n_classes, r.samples, r.change_rate, r.ci_half_width, r.mean_conflict, change
        ));
    }
    out
}

/// `n,bin_low,bin_high,freq_all,freq_change`, one row per bin and class count.
pub fn histogram_csv(rows: &[(usize, ConflictHistograms)]) -> String {
    let mut out = String::from("n,bin_low,bin_high,freq_all,freq_change\n");
    for (n, h) in rows {
        for i in 0..h.all.frequencies.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                n,
                h.all.edges[i],
                h.all.edges[i + 1],
                h.all.frequencies[i],
                h.decision_change.frequencies[i]
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CellSet;

    #[test]
    fn forced_draw() {
        let f = class_frame(2).unwrap();
        let m = mass_from_draws(&f, &[1.0, 0.0], &[0.6, 0.3]).unwrap();
        assert_eq!(m.mass(&f.atom(0).unwrap()), 0.6);
        assert!((m.mass(&f.full()) - 0.4).abs() < 1e-15);
        assert_eq!(m.len(), 2);
        assert!(mass_from_draws(&f, &[1.0, 1.0], &[0.6, 0.6]).is_err());
    }

    #[test]
    fn samples_validate() {
        let f = class_frame(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for law in [SamplingLaw::UniformMass, SamplingLaw::ProportionCertainty] {
            for _ in 0..500 {
                let m = sample_expert(&f, law, &mut rng).unwrap();
                let total: f64 = m.entries().iter().map(|(_, x)| x).sum();
                assert!((total - 1.0).abs() < 1e-9);
                assert!(m.entries().iter().all(|(c, x)| *x >= 0.0 && (c.len() == 1 || *c == f.full().cells())));
            }
        }
    }

    #[test]
    fn class_range() {
        assert_eq!(class_frame(1).unwrap_err(), Error::ClassCount(1));
        assert_eq!(class_frame(8).unwrap_err(), Error::ClassCount(8));
        assert_eq!(decision_change_rate(2, 0, 1).unwrap_err(), Error::NoSamples);
    }

    #[test]
    fn deterministic_and_chunked() {
        let cfg = StabilityConfig::new(3, CHUNK_PAIRS + 123, 9);
        let a = cfg.run().unwrap();
        let b = cfg.run().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, CHUNK_PAIRS + 123);
        assert!(a.draws >= 2 * a.samples as u64);
        assert!((0.0..=1.0).contains(&a.change_rate));
    }

    #[test]
    fn swapping_experts_keeps_rate() {
        let cfg = StabilityConfig::new(4, 5000, 17);
        let swapped = StabilityConfig {
            swap_experts: true,
            ..cfg
        };
        let (a, b) = (cfg.run().unwrap(), swapped.run().unwrap());
        assert_eq!(a.changes, b.changes);
        assert!((a.mean_conflict - b.mean_conflict).abs() < 1e-12);
    }

    #[test]
    fn empty_histogram() {
        let h = conflict_density(2, 0, 20, ConflictSubset::All, 1).unwrap();
        assert_eq!(h.count, 0);
        assert_eq!(h.frequencies.len(), 20);
        assert!(h.frequencies.iter().all(|f| *f == 0.0));
        assert_eq!(h.mean(), None);
        assert_eq!(conflict_density(2, 10, 5, ConflictSubset::All, 1).unwrap_err(), Error::TooFewBins(5));
    }

    #[test]
    fn histogram_normalized() {
        let h = conflict_density(2, 3000, 20, ConflictSubset::All, 5).unwrap();
        let total: f64 = h.frequencies.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(*h.edges.last().unwrap(), 1.0);
        // Two-class conflicts never reach 1.
        assert_eq!(h.frequencies[19], 0.0);
    }

    #[test]
    fn exact_tie_is_excluded() {
        let f = class_frame(2).unwrap();
        let m = singleton_mass(&f, &[0.3, 0.3]).unwrap();
        let outcome = evaluate_pair(&m, &m).unwrap();
        assert!(outcome.tie);
        let report = invariance_check(InvarianceConstraint::WithinExpert, 200, 4).unwrap();
        assert_eq!(report.trials, 200);
        assert!(report.counterexamples.is_empty());
    }

    #[test]
    fn instability_pair_changes() {
        let f = class_frame(2).unwrap();
        let m1 = singleton_mass(&f, &[0.3, 0.2]).unwrap();
        let m2 = singleton_mass(&f, &[0.43, 0.5]).unwrap();
        let o = evaluate_pair(&m1, &m2).unwrap();
        assert!(o.changed());
        assert_eq!((o.consensus_choice, o.pcr5_choice), (0, 1));
        assert!((o.conflict - 0.236).abs() < 1e-12);
        assert!(!f.full().cells().is_empty() && f.full().cells() != CellSet::EMPTY);
    }

    #[test]
    fn csv_layout() {
        let r = decision_change_rate(2, 100, 1).unwrap();
        let table = stability_table_csv(std::slice::from_ref(&r));
        assert!(table.starts_with("n,samples,change_rate,ci"));
        assert_eq!(table.lines().count(), 2);
        let h = conflict_histograms(&StabilityConfig::new(2, 100, 1), 10).unwrap();
        let csv = histogram_csv(&[(2, h)]);
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.lines().nth(1).unwrap().starts_with("2,0,0.1,"));
    }
}
