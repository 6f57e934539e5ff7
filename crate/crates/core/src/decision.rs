//! Credibility, plausibility and pignistic probability, and the argmax
//! decision over a candidate set.
//!
//! Subset and intersection tests are cell-set tests and cardinalities are
//! cell counts, so a single implementation covers `bel`/`Bel`, `pl`/`Pl`
//! and `betP`/`GPT`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::lattice::FocalElement;
use crate::mass::MassFunction;

/// Values closer than this are a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Mass,
    Credibility,
    Plausibility,
    Pignistic,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Mass,
        Criterion::Credibility,
        Criterion::Plausibility,
        Criterion::Pignistic,
    ];

    pub fn evaluate(self, m: &MassFunction, x: &FocalElement) -> Result<f64> {
        match self {
            Criterion::Mass => {
                same_frame(m, x)?;
                Ok(m.mass(x))
            }
            Criterion::Credibility => credibility(m, x),
            Criterion::Plausibility => plausibility(m, x),
            Criterion::Pignistic => pignistic(m, x),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Mass => "mass",
            Criterion::Credibility => "credibility",
            Criterion::Plausibility => "plausibility",
            Criterion::Pignistic => "pignistic",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mass" | "m" => Ok(Criterion::Mass),
            "credibility" | "bel" => Ok(Criterion::Credibility),
            "plausibility" | "pl" => Ok(Criterion::Plausibility),
            "pignistic" | "betp" | "gpt" => Ok(Criterion::Pignistic),
            other => Err(format!(
                "unknown criterion `{other}` (expected mass, credibility, plausibility or pignistic)"
            )),
        }
    }
}

fn same_frame(m: &MassFunction, x: &FocalElement) -> Result<()> {
    if m.frame() == x.frame() {
        Ok(())
    } else {
        Err(Error::FrameMismatch)
    }
}

/// Mass of the non-empty elements included in `x`.
pub fn credibility(m: &MassFunction, x: &FocalElement) -> Result<f64> {
    same_frame(m, x)?;
    let cells = x.cells();
    Ok(m.entries()
        .iter()
        .filter(|(y, _)| !y.is_empty() && y.is_subset(&cells))
        .fold(0.0, |acc, (_, v)| acc + v))
}

/// Mass of the elements that meet `x`.
pub fn plausibility(m: &MassFunction, x: &FocalElement) -> Result<f64> {
    same_frame(m, x)?;
    let cells = x.cells();
    Ok(m.entries()
        .iter()
        .filter(|(y, _)| y.intersects(&cells))
        .fold(0.0, |acc, (_, v)| acc + v))
}

/// `Σ_{Y≠∅} C(X∩Y)/C(Y) · m(Y) / (1 − m(∅))` with `C` the cell count.
pub fn pignistic(m: &MassFunction, x: &FocalElement) -> Result<f64> {
    same_frame(m, x)?;
    if x.is_empty() {
        return Err(Error::EmptyElement);
    }
    let normalizer = 1.0 - m.conflict();
    if normalizer <= 0.0 {
        return Err(Error::TotalConflict);
    }
    let cells = x.cells();
    let sum = m
        .entries()
        .iter()
        .filter(|(y, _)| !y.is_empty())
        .fold(0.0, |acc, (y, v)| acc + y.intersection(&cells).len() as f64 / y.len() as f64 * v);
    Ok(sum / normalizer)
}

#[derive(Debug, Clone)]
pub struct DecisionReport {
    pub criterion: Criterion,
    /// Candidate values in the order the candidates were given.
    pub values: Vec<(FocalElement, f64)>,
    pub chosen: FocalElement,
    pub tie: bool,
    /// Candidates within [`TIE_TOLERANCE`] of the maximum, `chosen` first.
    pub tied: Vec<FocalElement>,
}

impl DecisionReport {
    pub fn to_json(&self) -> Value {
        let mut values = Map::new();
        for (e, v) in &self.values {
            values.insert(e.to_string(), Value::from(*v));
        }
        json!({
            "criterion": self.criterion.to_string(),
            "values": values,
            "chosen": self.chosen.to_string(),
            "tie": self.tie,
            "tied": self.tied.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Singletons rank by class index, then other elements by canonical order.
fn tie_key(e: &FocalElement) -> (usize, crate::lattice::CellSet) {
    (e.atom_index().unwrap_or(usize::MAX), e.cells())
}

/// Picks the candidate maximizing the criterion. Ties within
/// [`TIE_TOLERANCE`] go to the lowest class index.
pub fn decide(m: &MassFunction, criterion: Criterion, candidates: &[FocalElement]) -> Result<DecisionReport> {
    let mut unique: Vec<FocalElement> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if !unique.contains(c) {
            unique.push(c.clone());
        }
    }
    if unique.is_empty() {
        return Err(Error::NoCandidates);
    }
    let values = unique
        .iter()
        .map(|c| Ok((c.clone(), criterion.evaluate(m, c)?)))
        .collect::<Result<Vec<_>>>()?;
    let best = values.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<FocalElement> = values
        .iter()
        .filter(|(_, v)| best - v <= TIE_TOLERANCE)
        .map(|(e, _)| e.clone())
        .collect();
    tied.sort_by_key(tie_key);
    Ok(DecisionReport {
        criterion,
        chosen: tied[0].clone(),
        tie: tied.len() > 1,
        tied,
        values,
    })
}

/// [`decide`] over the atoms of the mass function's frame.
pub fn decide_singletons(m: &MassFunction, criterion: Criterion) -> Result<DecisionReport> {
    decide(m, criterion, &m.frame().atoms())
}
