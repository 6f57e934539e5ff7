#![allow(dead_code)]

use std::collections::BTreeSet;

use evifuse::decision::{credibility, decide, decide_singletons, pignistic, plausibility, Criterion};
use evifuse::fusion::{combine_conjunctive, combine_pcr5, combine_pcr6};
use evifuse::{FocalElement, Frame, MassFunction, Model, World};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const EXACT: f64 = 1e-12;

pub fn frame(n: usize, model: Model) -> Frame {
    let labels: Vec<String> = (0..n).map(|i| char::from(b'A' + i as u8).to_string()).collect();
    Frame::new(&labels, model).unwrap()
}

/// Region of the Venn diagram named by the set of classes it lies in.
pub type Region = u32;

/// An element as the set of Venn regions it covers.
pub type OracleSet = BTreeSet<Region>;

fn regions(n: usize, model: Model) -> Vec<Region> {
    match model {
        Model::Shafer => (0..n).map(|i| 1 << i).collect(),
        Model::FreeDsm => (1..(1u32 << n)).collect(),
    }
}

pub fn oracle_atom(n: usize, model: Model, class: usize) -> OracleSet {
    regions(n, model).into_iter().filter(|r| r & (1 << class) != 0).collect()
}

/// Every element by brute force: all region sets that are unions of
/// intersections of classes. Such a set is exactly an upward-closed family
/// of regions.
pub fn oracle_elements(n: usize, model: Model) -> Vec<OracleSet> {
    let all = regions(n, model);
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << all.len()) {
        let set: OracleSet = all
            .iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, r)| *r)
            .collect();
        let closed = set
            .iter()
            .all(|&r| all.iter().all(|&s| s & r != r || set.contains(&s)));
        if model == Model::Shafer || closed {
            out.push(set);
        }
    }
    out
}

pub fn to_oracle(e: &FocalElement) -> OracleSet {
    let frame = e.frame();
    e.cells()
        .cells()
        .map(|c| {
            frame
                .cell_classes(c)
                .iter()
                .fold(0u32, |acc, class| acc | (1 << class))
        })
        .collect()
}

/// Compares the lattice of an `n`-class frame with the brute-force oracle.
/// Returns the number of element pairs checked.
pub fn check_lattice(n: usize, model: Model) -> Result<usize, String> {
    let f = frame(n, model);
    let elements = f.enumerate_elements(true).map_err(|e| e.to_string())?;
    let oracle = oracle_elements(n, model);
    if elements.len() != oracle.len() {
        return Err(format!("n={n} {model:?}: {} elements, oracle {}", elements.len(), oracle.len()));
    }
    let mine: BTreeSet<OracleSet> = elements.iter().map(to_oracle).collect();
    if mine != oracle.iter().cloned().collect() {
        return Err(format!("n={n} {model:?}: element sets differ from the oracle"));
    }
    for i in 0..n {
        if to_oracle(&f.atom(i).unwrap()) != oracle_atom(n, model, i) {
            return Err(format!("n={n} {model:?}: atom {i} differs"));
        }
    }
    let mut pairs = 0;
    for x in &elements {
        let ox = to_oracle(x);
        if x.dsm_cardinality() != ox.len() {
            return Err(format!("cardinality of {x}"));
        }
        let parsed = f.parse_element(&x.to_string()).map_err(|e| e.to_string())?;
        if &parsed != x {
            return Err(format!("{x} does not round-trip through text"));
        }
        for y in &elements {
            let oy = to_oracle(y);
            let meet = to_oracle(&x.meet(y).unwrap());
            let join = to_oracle(&x.join(y).unwrap());
            if meet != ox.intersection(&oy).cloned().collect::<OracleSet>() {
                return Err(format!("{x} ∩ {y}"));
            }
            if join != ox.union(&oy).cloned().collect::<OracleSet>() {
                return Err(format!("{x} ∪ {y}"));
            }
            if x.is_subset(y).unwrap() != ox.is_subset(&oy) {
                return Err(format!("{x} ⊆ {y}"));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

/// Random closed-world mass on up to `max_focal` of the given elements.
pub fn random_mass<R: Rng>(rng: &mut R, frame: &Frame, elements: &[FocalElement], max_focal: usize) -> MassFunction {
    let k = rng.random_range(1..=max_focal.min(elements.len()));
    let chosen: Vec<&FocalElement> = elements.choose_multiple(rng, k).collect();
    let weights: Vec<f64> = chosen.iter().map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    MassFunction::new(
        frame,
        chosen.into_iter().cloned().zip(weights.iter().map(|w| w / total)),
        World::Closed,
    )
    .unwrap()
}

/// Mass on singletons and `Θ` only.
pub fn random_singleton_mass<R: Rng>(rng: &mut R, frame: &Frame) -> MassFunction {
    let n = frame.len();
    let weights: Vec<f64> = (0..=n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let mut pairs: Vec<(FocalElement, f64)> = (0..n).map(|i| (frame.atom(i).unwrap(), weights[i] / total)).collect();
    pairs.push((frame.full(), weights[n] / total));
    MassFunction::new(frame, pairs, World::Closed).unwrap()
}

pub fn max_difference(a: &MassFunction, b: &MassFunction) -> f64 {
    let cells: BTreeSet<_> = a.entries().iter().chain(b.entries()).map(|(c, _)| *c).collect();
    cells
        .iter()
        .map(|c| (a.mass_of_cells(c) - b.mass_of_cells(c)).abs())
        .fold(0.0, f64::max)
}

pub fn check_normalized(m: &MassFunction) -> Result<(), String> {
    let sum: f64 = m.entries().iter().map(|(_, v)| v).sum();
    if (sum - 1.0).abs() > EXACT || m.entries().iter().any(|(_, v)| *v < 0.0) {
        return Err(format!("masses sum to {sum}"));
    }
    Ok(())
}

/// A random case for the fusion and decision properties.
pub struct Case {
    pub frame: Frame,
    pub elements: Vec<FocalElement>,
    pub sources: Vec<MassFunction>,
}

pub fn random_case<R: Rng>(rng: &mut R) -> Case {
    let (n, model) = match rng.random_range(0..5) {
        0 => (2, Model::Shafer),
        1 => (3, Model::Shafer),
        2 => (4, Model::Shafer),
        3 => (2, Model::FreeDsm),
        _ => (3, Model::FreeDsm),
    };
    let f = frame(n, model);
    let elements = f.enumerate_elements(false).unwrap();
    let count = rng.random_range(2..=4);
    let sources = (0..count).map(|_| random_mass(rng, &f, &elements, 4)).collect();
    Case {
        frame: f,
        elements,
        sources,
    }
}

pub fn check_pcr6_pair_is_pcr5(m1: &MassFunction, m2: &MassFunction) -> Result<(), String> {
    let a = combine_pcr5(m1, m2).map_err(|e| e.to_string())?;
    let b = combine_pcr6(&[m1.clone(), m2.clone()]).map_err(|e| e.to_string())?;
    let d = max_difference(&a, &b);
    if d > EXACT {
        return Err(format!("PCR5 and PCR6 differ by {d}"));
    }
    Ok(())
}

pub fn check_rules_normalized(case: &Case) -> Result<(), String> {
    let pair = &case.sources[..2];
    check_normalized(&combine_conjunctive(&case.sources).map_err(|e| e.to_string())?)?;
    check_normalized(&combine_pcr5(&pair[0], &pair[1]).map_err(|e| e.to_string())?)?;
    let pcr6 = combine_pcr6(&case.sources).map_err(|e| e.to_string())?;
    check_normalized(&pcr6)?;
    if pcr6.conflict() != 0.0 {
        return Err("PCR6 left mass on ∅".into());
    }
    Ok(())
}

/// Sources whose focal elements all include a common class, so that
/// no product is ever empty.
pub fn conflict_free_sources<R: Rng>(rng: &mut R, case: &Case) -> Vec<MassFunction> {
    let anchor = case.frame.atom(rng.random_range(0..case.frame.len())).unwrap();
    let nested: Vec<FocalElement> = case
        .elements
        .iter()
        .filter(|e| anchor.is_subset(e).unwrap())
        .cloned()
        .collect();
    (0..case.sources.len())
        .map(|_| random_mass(rng, &case.frame, &nested, 4))
        .collect()
}

pub fn check_conflict_free_equal(sources: &[MassFunction]) -> Result<(), String> {
    let conj = combine_conjunctive(sources).map_err(|e| e.to_string())?;
    if conj.conflict() != 0.0 {
        return Err(format!("expected no conflict, got {}", conj.conflict()));
    }
    let pcr6 = combine_pcr6(sources).map_err(|e| e.to_string())?;
    let pcr5 = combine_pcr5(&sources[0], &sources[1]).map_err(|e| e.to_string())?;
    let conj2 = combine_conjunctive(&sources[..2]).map_err(|e| e.to_string())?;
    let (d6, d5) = (max_difference(&conj, &pcr6), max_difference(&conj2, &pcr5));
    if d6 > EXACT || d5 > EXACT {
        return Err(format!("conflict-free PCR differs from conjunctive by {}", d6.max(d5)));
    }
    Ok(())
}

/// `X ⊆ Y` implies `bel, pl, betP` grow, and `bel ≤ betP ≤ pl` on
/// closed-world masses.
pub fn check_monotone(m: &MassFunction, elements: &[FocalElement]) -> Result<(), String> {
    let values: Vec<[f64; 3]> = elements
        .iter()
        .map(|x| {
            [
                credibility(m, x).unwrap(),
                plausibility(m, x).unwrap(),
                pignistic(m, x).unwrap(),
            ]
        })
        .collect();
    for (i, x) in elements.iter().enumerate() {
        let [bel, pl, betp] = values[i];
        if m.world() == World::Closed && !(bel <= betp + EXACT && betp <= pl + EXACT) {
            return Err(format!("bel {bel}, betP {betp}, pl {pl} out of order on {x}"));
        }
        for (j, y) in elements.iter().enumerate() {
            if x.is_subset(y).unwrap() && (0..3).any(|k| values[i][k] > values[j][k] + EXACT) {
                return Err(format!("not monotone on {x} ⊆ {y}"));
            }
        }
    }
    Ok(())
}

/// With only singletons, `Θ` and `∅` focal, every criterion picks the same
/// singleton.
pub fn check_singleton_argmax(m: &MassFunction) -> Result<(), String> {
    let choices: Vec<FocalElement> = Criterion::ALL
        .iter()
        .map(|c| decide_singletons(m, *c).unwrap().chosen)
        .collect();
    if choices.iter().any(|c| c != &choices[0]) {
        return Err(format!(
            "criteria disagree: {:?}",
            choices.iter().map(|c| c.to_string()).collect::<Vec<_>>()
        ));
    }
    Ok(())
}

/// `A∩B` is never preferred to `A` or `B` by bel, pl or betP.
pub fn check_meet_never_chosen(m: &MassFunction) -> Result<(), String> {
    let f = m.frame();
    let (a, b) = (f.atom(0).unwrap(), f.atom(1).unwrap());
    let meet = a.meet(&b).unwrap();
    for criterion in [Criterion::Credibility, Criterion::Plausibility, Criterion::Pignistic] {
        for single in [&a, &b] {
            let r = decide(m, criterion, &[meet.clone(), single.clone()]).unwrap();
            if r.chosen == meet {
                return Err(format!("{criterion} chose {meet} over {single}"));
            }
        }
    }
    Ok(())
}
