//! Combination rules.
//!
//! Every rule starts from the conjunctive consensus. PCR5 and PCR6 then
//! hand each partial conflict back to the focal elements that produced it,
//! in proportion to their masses. A pair of elements conflicts when their
//! cell sets are disjoint, so on a free-model frame nothing ever conflicts
//! and both rules reduce to the conjunctive one; see
//! [`restrict_to_exclusive`] for deciding on exclusive classes from a
//! free-model result.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CellSet, Frame, Model};
use crate::mass::{MassFunction, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Conjunctive,
    Pcr5,
    Pcr6,
}

impl Rule {
    pub fn combine(self, masses: &[MassFunction]) -> Result<MassFunction> {
        match self {
            Rule::Conjunctive => combine_conjunctive(masses),
            Rule::Pcr5 => match masses {
                [m1, m2] => combine_pcr5(m1, m2),
                _ if masses.len() < 2 => Err(Error::TooFewSources {
                    needed: 2,
                    got: masses.len(),
                }),
                _ => Err(Error::PairwiseRule(masses.len())),
            },
            Rule::Pcr6 => combine_pcr6(masses),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Conjunctive => "conjunctive",
            Rule::Pcr5 => "pcr5",
            Rule::Pcr6 => "pcr6",
        })
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "conjunctive" | "consensus" => Ok(Rule::Conjunctive),
            "pcr5" => Ok(Rule::Pcr5),
            "pcr6" => Ok(Rule::Pcr6),
            other => Err(format!("unknown rule `{other}` (expected conjunctive, pcr5 or pcr6)")),
        }
    }
}

fn common_frame<'a, I>(masses: I) -> Result<Frame>
where
    I: IntoIterator<Item = &'a MassFunction>,
{
    let mut frame: Option<&Frame> = None;
    let mut count = 0;
    for m in masses {
        count += 1;
        match frame {
            None => frame = Some(m.frame()),
            Some(f) if f != m.frame() => return Err(Error::FrameMismatch),
            Some(_) => {}
        }
        let empty = m.conflict();
        if empty > 0.0 {
            return Err(Error::EmptySetMass(empty));
        }
    }
    match frame {
        Some(f) if count >= 2 => Ok(f.clone()),
        _ => Err(Error::TooFewSources {
            needed: 2,
            got: count,
        }),
    }
}

fn conjunctive_map(masses: &[&MassFunction]) -> BTreeMap<CellSet, f64> {
    let mut acc: BTreeMap<CellSet, f64> = masses[0].entries().iter().copied().collect();
    for m in &masses[1..] {
        let mut next = BTreeMap::new();
        for (x, mx) in &acc {
            for (y, my) in m.entries() {
                *next.entry(x.intersection(y)).or_insert(0.0) += mx * my;
            }
        }
        acc = next;
    }
    acc
}

/// Conjunctive consensus. The conflict stays on `∅`, so the result is open-world.
pub fn combine_conjunctive(masses: &[MassFunction]) -> Result<MassFunction> {
    let frame = common_frame(masses)?;
    let refs: Vec<&MassFunction> = masses.iter().collect();
    Ok(MassFunction::from_accumulated(&frame, conjunctive_map(&refs), World::Open))
}

/// Two-source PCR5.
pub fn combine_pcr5(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    let frame = common_frame([m1, m2])?;
    let mut acc = conjunctive_map(&[m1, m2]);
    acc.remove(&CellSet::EMPTY);
    for (x, a) in m1.entries() {
        for (y, b) in m2.entries() {
            if x.intersects(y) {
                continue;
            }
            let denominator = a + b;
            if denominator == 0.0 {
                continue;
            }
            *acc.entry(*x).or_insert(0.0) += a * a * b / denominator;
            *acc.entry(*y).or_insert(0.0) += b * b * a / denominator;
        }
    }
    Ok(MassFunction::from_accumulated(&frame, acc, World::Closed))
}

/// PCR6 for any number of sources.
///
/// For source `i` and each of its focal elements `X`, every tuple of the
/// other sources' focal elements (taken in source order, skipping `i`)
/// whose intersection with `X` is empty sends
/// `m_i(X)² Π m_j(Y_j) / (m_i(X) + Σ m_j(Y_j))` back to `X`.
pub fn combine_pcr6(masses: &[MassFunction]) -> Result<MassFunction> {
    let frame = common_frame(masses)?;
    let refs: Vec<&MassFunction> = masses.iter().collect();
    let mut acc = conjunctive_map(&refs);
    acc.remove(&CellSet::EMPTY);

    let count = masses.len();
    for i in 0..count {
        let others: Vec<&[(CellSet, f64)]> = (0..count - 1)
            .map(|j| if j < i { j } else { j + 1 })
            .map(|j| masses[j].entries())
            .collect();
        if others.iter().any(|o| o.is_empty()) {
            continue;
        }
        for (x, mx) in masses[i].entries() {
            let mut index = vec![0usize; others.len()];
            'tuples: loop {
                let mut meet = *x;
                let mut product = 1.0;
                let mut denominator = *mx;
                for (k, other) in others.iter().enumerate() {
                    let (y, my) = &other[index[k]];
                    meet = meet.intersection(y);
                    product *= my;
                    denominator += my;
                }
                if meet.is_empty() && denominator != 0.0 {
                    *acc.entry(*x).or_insert(0.0) += mx * mx * product / denominator;
                }
                for k in (0..others.len()).rev() {
                    index[k] += 1;
                    if index[k] < others[k].len() {
                        continue 'tuples;
                    }
                    index[k] = 0;
                }
                break;
            }
        }
    }
    Ok(MassFunction::from_accumulated(&frame, acc, World::Closed))
}

/// Re-expresses a free-model mass on the Shafer frame with the same labels.
///
/// An element keeps the part of it that survives exclusivity, i.e. the
/// classes whose exclusive Venn cell it contains (`A∩B ∪ C` becomes `C`).
/// Elements with nothing left, such as `A∩B`, are shared among the classes
/// they involve in proportion to the singleton masses obtained from the
/// first step, or evenly when those are all zero. Shafer inputs are
/// returned unchanged.
pub fn restrict_to_exclusive(m: &MassFunction) -> Result<MassFunction> {
    let source = m.frame();
    if source.model() == Model::Shafer {
        return Ok(m.clone());
    }
    let target = Frame::new(source.labels(), Model::Shafer)?;
    let n = source.len();

    let mut acc: BTreeMap<CellSet, f64> = BTreeMap::new();
    let mut pending: Vec<(Vec<usize>, f64)> = Vec::new();
    for (cells, mass) in m.entries() {
        if cells.is_empty() {
            *acc.entry(CellSet::EMPTY).or_insert(0.0) += mass;
            continue;
        }
        let mut image = CellSet::EMPTY;
        for class in 0..n {
            if cells.contains((1 << class) - 1) {
                image.insert(class);
            }
        }
        if image.is_empty() {
            let mut involved = vec![false; n];
            for cell in cells.cells() {
                for class in source.cell_classes(cell) {
                    involved[class] = true;
                }
            }
            let classes = (0..n).filter(|&c| involved[c]).collect();
            pending.push((classes, *mass));
        } else {
            *acc.entry(image).or_insert(0.0) += mass;
        }
    }

    let base: Vec<f64> = (0..n)
        .map(|c| acc.get(&CellSet::single(c)).copied().unwrap_or(0.0))
        .collect();
    for (classes, mass) in pending {
        let weight: f64 = classes.iter().map(|&c| base[c]).sum();
        for &c in &classes {
            let share = if weight > 0.0 {
                base[c] / weight
            } else {
                1.0 / classes.len() as f64
            };
            if share > 0.0 {
                *acc.entry(CellSet::single(c)).or_insert(0.0) += mass * share;
            }
        }
    }
    Ok(MassFunction::from_accumulated(&target, acc, m.world()))
}
