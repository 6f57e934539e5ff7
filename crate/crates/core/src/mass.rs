//! Basic belief assignments over a frame.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::lattice::{CellSet, FocalElement, Frame, Model};

/// Allowed deviation of the total mass from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Combination results drop focal elements lighter than this.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum World {
    /// `m(∅) = 0`.
    #[serde(rename = "closed")]
    Closed,
    /// `m(∅)` may be positive; conjunctive results live here.
    #[serde(rename = "open")]
    Open,
}

/// A validated, sparse mass function. Entries are kept in canonical order
/// and never hold zero mass.
#[derive(Debug, Clone)]
pub struct MassFunction {
    frame: Frame,
    entries: Vec<(CellSet, f64)>,
    world: World,
}

impl MassFunction {
    /// Builds a mass function, summing duplicate elements.
    pub fn new<I>(frame: &Frame, pairs: I, world: World) -> Result<Self>
    where
        I: IntoIterator<Item = (FocalElement, f64)>,
    {
        let mut acc: BTreeMap<CellSet, f64> = BTreeMap::new();
        for (element, mass) in pairs {
            if element.frame() != frame {
                return Err(Error::FrameMismatch);
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidMass {
                    element: element.to_string(),
                    mass,
                });
            }
            *acc.entry(element.cells()).or_insert(0.0) += mass;
        }
        Self::validated(frame, acc, world)
    }

    /// Total ignorance: all mass on `Θ`.
    pub fn vacuous(frame: &Frame) -> Self {
        MassFunction {
            frame: frame.clone(),
            entries: vec![(frame.full_cells(), 1.0)],
            world: World::Closed,
        }
    }

    fn validated(frame: &Frame, acc: BTreeMap<CellSet, f64>, world: World) -> Result<Self> {
        let sum: f64 = acc.values().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        if world == World::Closed {
            if let Some(&m) = acc.get(&CellSet::EMPTY) {
                if m > 0.0 {
                    return Err(Error::EmptySetMass(m));
                }
            }
        }
        Ok(MassFunction {
            frame: frame.clone(),
            entries: acc.into_iter().filter(|(_, m)| *m > 0.0).collect(),
            world,
        })
    }

    /// Wraps an accumulated combination result: prunes negligible entries and
    /// renormalizes proportionally when anything was pruned.
    pub(crate) fn from_accumulated(frame: &Frame, acc: BTreeMap<CellSet, f64>, world: World) -> Self {
        let total: usize = acc.len();
        let mut entries: Vec<(CellSet, f64)> =
            acc.into_iter().filter(|(_, m)| *m >= PRUNE_THRESHOLD).collect();
        if entries.len() != total {
            let kept: f64 = entries.iter().map(|(_, m)| m).sum();
            if kept > 0.0 {
                for (_, m) in entries.iter_mut() {
                    *m /= kept;
                }
            }
        }
        MassFunction {
            frame: frame.clone(),
            entries,
            world,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn world(&self) -> World {
        self.world
    }

    /// Raw entries in canonical order.
    pub fn entries(&self) -> &[(CellSet, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass_of_cells(&self, cells: &CellSet) -> f64 {
        self.entries
            .binary_search_by(|(c, _)| c.cmp(cells))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn mass(&self, element: &FocalElement) -> f64 {
        if element.frame() != &self.frame {
            return 0.0;
        }
        self.mass_of_cells(&element.cells())
    }

    /// Mass on the empty set.
    pub fn conflict(&self) -> f64 {
        self.mass_of_cells(&CellSet::EMPTY)
    }

    pub fn focal_elements(&self) -> Vec<(FocalElement, f64)> {
        self.entries
            .iter()
            .map(|(c, m)| (self.frame.wrap(*c), *m))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let mut masses = Map::new();
        for (cells, m) in &self.entries {
            masses.insert(self.frame.render(cells), Value::from(*m));
        }
        let doc = MassDocument {
            frame: self.frame.labels().to_vec(),
            model: self.frame.model(),
            world: self.world,
            masses,
        };
        serde_json::to_value(doc).expect("mass documents always serialize")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: MassDocument =
            serde_json::from_str(text).map_err(|e| Error::MassFormat(e.to_string()))?;
        let frame = Frame::new(&doc.frame, doc.model)?;
        let mut pairs = Vec::with_capacity(doc.masses.len());
        for (key, value) in &doc.masses {
            let mass = value
                .as_f64()
                .ok_or_else(|| Error::MassFormat(format!("mass of `{key}` is not a number")))?;
            pairs.push((frame.parse_element(key)?, mass));
        }
        MassFunction::new(&frame, pairs, doc.world)
    }
}

fn closed() -> World {
    World::Closed
}

#[derive(Serialize, Deserialize)]
struct MassDocument {
    frame: Vec<String>,
    model: Model,
    #[serde(default = "closed")]
    world: World,
    masses: Map<String, Value>,
}
