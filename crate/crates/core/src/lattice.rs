//! Focal elements as sets of Venn cells.
//!
//! A frame over `n` classes owns a universe of Venn cells. Under the Shafer
//! model the classes are exclusive and the cells are the `n` singletons, so
//! elements are plain subsets of classes (the power set). Under the free
//! model every non-empty class subset `T` labels the cell of points that
//! belong to exactly the classes in `T`; an element of the hyper-power set is
//! then an upward-closed set of such cells. In both cases intersection and
//! union are cell-set intersection and union, and the DSm cardinality of an
//! element is its number of cells.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORDS: usize = 4;

/// Largest cell universe a frame may have.
pub const MAX_CELLS: usize = WORDS * 64;

/// Free-model enumeration grows like the Dedekind numbers; stop at this size.
pub const MAX_FREE_ENUMERATION_CLASSES: usize = 4;

pub const MAX_SHAFER_ENUMERATION_CLASSES: usize = 20;

const RESERVED: [char; 6] = ['∩', '∪', '|', '&', '∅', 'Θ'];

/// Fixed-width bit string over at most [`MAX_CELLS`] cells.
///
/// Ordering compares the bit string as an unsigned integer, most significant
/// word first. This is the canonical order used for every printed table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CellSet([u64; WORDS]);

impl CellSet {
    pub const EMPTY: CellSet = CellSet([0; WORDS]);

    pub fn single(cell: usize) -> Self {
        let mut set = Self::EMPTY;
        set.insert(cell);
        set
    }

    pub fn insert(&mut self, cell: usize) {
        self.0[cell / 64] |= 1 << (cell % 64);
    }

    pub fn contains(&self, cell: usize) -> bool {
        cell < MAX_CELLS && self.0[cell / 64] & (1 << (cell % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a &= *b;
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a |= *b;
        }
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).any(|(a, b)| a & b != 0)
    }

    /// Builds a set from the low 64 cells.
    pub fn from_bits(bits: u64) -> Self {
        let mut set = Self::EMPTY;
        set.0[0] = bits;
        set
    }

    /// Indices of the member cells, ascending.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + bit)
            })
        })
    }
}

impl Ord for CellSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl PartialOrd for CellSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CellSet{{")?;
        for (i, c) in self.cells().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Exclusivity model of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Exclusive classes, elements of `2^Θ`.
    #[serde(rename = "shafer")]
    Shafer,
    /// No exclusivity constraint, elements of `D^Θ`.
    #[serde(rename = "free")]
    FreeDsm,
}

#[derive(Debug)]
struct FrameData {
    labels: Vec<String>,
    model: Model,
    atoms: Vec<CellSet>,
    full: CellSet,
}

/// Ordered class labels plus an exclusivity model. Cheap to clone.
#[derive(Clone)]
pub struct Frame(Arc<FrameData>);

impl Frame {
    pub fn new<S: AsRef<str>>(labels: &[S], model: Model) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyFrame);
        }
        let mut owned: Vec<String> = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if label.trim() != label || label.contains(RESERVED) || label == "Theta" {
                return Err(Error::ReservedLabel(label.to_string()));
            }
            if owned.iter().any(|l| l == label) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            owned.push(label.to_string());
        }
        let n = owned.len();
        let cells = match model {
            Model::Shafer => n,
            Model::FreeDsm if n < usize::BITS as usize => (1usize << n) - 1,
            Model::FreeDsm => usize::MAX,
        };
        if cells > MAX_CELLS {
            return Err(Error::FrameTooLarge {
                classes: n,
                cells,
                max: MAX_CELLS,
            });
        }

        let atoms: Vec<CellSet> = (0..n)
            .map(|i| match model {
                Model::Shafer => CellSet::single(i),
                Model::FreeDsm => {
                    let mut set = CellSet::EMPTY;
                    for cell in 0..cells {
                        if (cell + 1) & (1 << i) != 0 {
                            set.insert(cell);
                        }
                    }
                    set
                }
            })
            .collect();
        let mut full = CellSet::EMPTY;
        for cell in 0..cells {
            full.insert(cell);
        }
        Ok(Frame(Arc::new(FrameData {
            labels: owned,
            model,
            atoms,
            full,
        })))
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn model(&self) -> Model {
        self.0.model
    }

    /// Number of classes.
    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.labels.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.0.full.len()
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.0
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownClass(label.to_string()))
    }

    /// Classes whose intersection is exactly this cell.
    pub fn cell_classes(&self, cell: usize) -> Vec<usize> {
        match self.model() {
            Model::Shafer => vec![cell],
            Model::FreeDsm => (0..self.len()).filter(|i| (cell + 1) & (1 << i) != 0).collect(),
        }
    }

    pub fn atom(&self, index: usize) -> Result<FocalElement> {
        let cells = *self.0.atoms.get(index).ok_or(Error::ClassIndex {
            index,
            classes: self.len(),
        })?;
        Ok(self.wrap(cells))
    }

    pub fn atoms(&self) -> Vec<FocalElement> {
        self.0.atoms.iter().map(|c| self.wrap(*c)).collect()
    }

    pub(crate) fn atom_cells(&self, index: usize) -> CellSet {
        self.0.atoms[index]
    }

    /// Index of the class this element is the atom of, if any.
    pub fn atom_index(&self, cells: &CellSet) -> Option<usize> {
        self.0.atoms.iter().position(|a| a == cells)
    }

    pub fn empty(&self) -> FocalElement {
        self.wrap(CellSet::EMPTY)
    }

    /// The whole frame, `Θ`.
    pub fn full(&self) -> FocalElement {
        self.wrap(self.0.full)
    }

    pub(crate) fn full_cells(&self) -> CellSet {
        self.0.full
    }

    /// Validates a cell set and wraps it as an element of this frame.
    pub fn element(&self, cells: CellSet) -> Result<FocalElement> {
        if !cells.is_subset(&self.0.full) || !self.is_upward_closed(&cells) {
            return Err(Error::NotUpwardClosed);
        }
        Ok(self.wrap(cells))
    }

    pub(crate) fn wrap(&self, cells: CellSet) -> FocalElement {
        FocalElement {
            frame: self.clone(),
            cells,
        }
    }

    pub fn is_upward_closed(&self, cells: &CellSet) -> bool {
        match self.model() {
            Model::Shafer => true,
            Model::FreeDsm => cells.cells().all(|cell| {
                let label = cell + 1;
                (0..self.len())
                    .filter(|i| label & (1 << i) == 0)
                    .all(|i| cells.contains((label | (1 << i)) - 1))
            }),
        }
    }

    /// Every element of `2^Θ` (Shafer) or `D^Θ` (free), in canonical order.
    ///
    /// The free-model list is generated by closing the atoms under
    /// intersection and union.
    pub fn enumerate_elements(&self, include_empty: bool) -> Result<Vec<FocalElement>> {
        let n = self.len();
        let mut found: BTreeSet<CellSet> = BTreeSet::new();
        match self.model() {
            Model::Shafer => {
                if n > MAX_SHAFER_ENUMERATION_CLASSES {
                    return Err(Error::EnumerationTooLarge {
                        classes: n,
                        max: MAX_SHAFER_ENUMERATION_CLASSES,
                    });
                }
                for bits in 0..(1u64 << n) {
                    found.insert(CellSet::from_bits(bits));
                }
            }
            Model::FreeDsm => {
                if n > MAX_FREE_ENUMERATION_CLASSES {
                    return Err(Error::EnumerationTooLarge {
                        classes: n,
                        max: MAX_FREE_ENUMERATION_CLASSES,
                    });
                }
                found.insert(CellSet::EMPTY);
                found.extend(self.0.atoms.iter().copied());
                let mut frontier: Vec<CellSet> = found.iter().copied().collect();
                while !frontier.is_empty() {
                    let known: Vec<CellSet> = found.iter().copied().collect();
                    let mut next = Vec::new();
                    for x in &frontier {
                        for y in &known {
                            for z in [x.intersection(y), x.union(y)] {
                                if found.insert(z) {
                                    next.push(z);
                                }
                            }
                        }
                    }
                    frontier = next;
                }
            }
        }
        Ok(found
            .into_iter()
            .filter(|c| include_empty || !c.is_empty())
            .map(|c| self.wrap(c))
            .collect())
    }

    /// Parses the canonical text form: `∅`, `Θ`, or intersection groups
    /// (`∩` or `&`) joined by unions (`∪` or `|`). A class list in braces,
    /// `{A,B}`, is the union of its classes.
    pub fn parse_element(&self, text: &str) -> Result<FocalElement> {
        let text = text.trim();
        match text {
            "∅" | "{}" => return Ok(self.empty()),
            "Θ" | "Theta" => return Ok(self.full()),
            _ => {}
        }
        if let Some(inner) = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            let mut acc = CellSet::EMPTY;
            for term in inner.split(',') {
                let term = term.trim();
                if term.is_empty() {
                    return Err(Error::ParseElement(text.to_string()));
                }
                acc = acc.union(&self.0.atoms[self.class_index(term)?]);
            }
            return Ok(self.wrap(acc));
        }
        let mut acc = CellSet::EMPTY;
        for group in text.split(['∪', '|']) {
            let mut meet: Option<CellSet> = None;
            for term in group.split(['∩', '&']) {
                let term = term.trim();
                if term.is_empty() {
                    return Err(Error::ParseElement(text.to_string()));
                }
                let atom = self.0.atoms[self.class_index(term)?];
                meet = Some(match meet {
                    None => atom,
                    Some(m) => m.intersection(&atom),
                });
            }
            acc = acc.union(&meet.ok_or_else(|| Error::ParseElement(text.to_string()))?);
        }
        Ok(self.wrap(acc))
    }

    /// Minimal intersection groups of an element, as sorted class-index lists.
    pub fn groups(&self, cells: &CellSet) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = match self.model() {
            Model::Shafer => cells.cells().map(|c| vec![c]).collect(),
            Model::FreeDsm => cells
                .cells()
                .filter(|&cell| {
                    let label = cell + 1;
                    (0..self.len())
                        .filter(|i| label & (1 << i) != 0 && label != 1 << i)
                        .all(|i| !cells.contains((label & !(1 << i)) - 1))
                })
                .map(|cell| self.cell_classes(cell))
                .collect(),
        };
        groups.sort();
        groups
    }

    pub fn render(&self, cells: &CellSet) -> String {
        if cells.is_empty() {
            return "∅".to_string();
        }
        if *cells == self.0.full {
            return "Θ".to_string();
        }
        self.groups(cells)
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&i| self.0.labels[i].as_str())
                    .collect::<Vec<_>>()
                    .join("∩")
            })
            .collect::<Vec<_>>()
            .join("∪")
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.model == other.0.model && self.0.labels == other.0.labels)
    }
}

impl Eq for Frame {}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("labels", &self.0.labels)
            .field("model", &self.0.model)
            .finish()
    }
}

/// An element of `2^Θ` or `D^Θ`.
#[derive(Clone)]
pub struct FocalElement {
    frame: Frame,
    cells: CellSet,
}

impl FocalElement {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn cells(&self) -> CellSet {
        self.cells
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.frame == other.frame {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.frame.wrap(self.cells.intersection(&other.cells)))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.frame.wrap(self.cells.union(&other.cells)))
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        Ok(self.cells.is_subset(&other.cells))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of Venn cells; the ordinary cardinality under the Shafer model.
    pub fn dsm_cardinality(&self) -> usize {
        self.cells.len()
    }

    pub fn atom_index(&self) -> Option<usize> {
        self.frame.atom_index(&self.cells)
    }
}

impl PartialEq for FocalElement {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells && self.frame == other.frame
    }
}

impl Eq for FocalElement {}

impl std::hash::Hash for FocalElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.cells.hash(state);
    }
}

impl Ord for FocalElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cells.cmp(&other.cells)
    }
}

impl PartialOrd for FocalElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.frame.render(&self.cells))
    }
}

impl fmt::Debug for FocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FocalElement({self})")
    }
}
