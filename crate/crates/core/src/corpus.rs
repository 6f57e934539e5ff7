//! Multi-expert tile annotations: parsing, per-tile masses, inter-expert
//! conflict matrices and decision differences between two rules.
//!
//! Annotations are CSV with the header
//! `tile_id,expert_id,class,certainty_level,proportion`, one row per
//! (tile, expert, class, level) entry.

use std::collections::BTreeMap;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::decision::{decide_singletons, Criterion};
use crate::error::{Error, Result};
use crate::expert_models::{build_generalized_m5_in, sediment_frame, CertaintyLevel, CertaintyWeights};
use crate::fusion::Rule;
use crate::lattice::{Frame, Model};
use crate::mass::{MassFunction, NORMALIZATION_TOLERANCE};
use crate::stability::{sample_singleton_masses, SamplingLaw};

pub const CSV_HEADER: [&str; 5] = ["tile_id", "expert_id", "class", "certainty_level", "proportion"];

/// Matrix entries are mean per-tile contributions times this factor.
pub const MATRIX_SCALE: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub class: String,
    pub level: CertaintyLevel,
    pub proportion: f64,
}

/// Everything one expert said about one tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileAnnotation {
    pub tile_id: String,
    pub expert_id: String,
    pub entries: Vec<AnnotationEntry>,
}

impl TileAnnotation {
    pub fn new(tile_id: impl Into<String>, expert_id: impl Into<String>) -> Self {
        TileAnnotation {
            tile_id: tile_id.into(),
            expert_id: expert_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn with_entry(mut self, class: impl Into<String>, level: CertaintyLevel, proportion: f64) -> Self {
        self.entries.push(AnnotationEntry {
            class: class.into(),
            level,
            proportion,
        });
        self
    }

    pub fn proportion_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.proportion).sum()
    }

    fn validate(&self, frame: &Frame) -> std::result::Result<(), String> {
        for e in &self.entries {
            if frame.class_index(&e.class).is_err() {
                return Err(format!("unknown class `{}`", e.class));
            }
            if !e.proportion.is_finite() || !(0.0..=1.0).contains(&e.proportion) {
                return Err(format!("proportion {} is outside [0, 1]", e.proportion));
            }
        }
        let sum = self.proportion_sum();
        if sum > 1.0 + NORMALIZATION_TOLERANCE {
            return Err(format!(
                "proportions of tile `{}` by `{}` sum to {sum}",
                self.tile_id, self.expert_id
            ));
        }
        Ok(())
    }
}

/// Validated annotations indexed by tile, then expert.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    frame: Frame,
    tiles: BTreeMap<String, BTreeMap<String, TileAnnotation>>,
}

impl Corpus {
    pub fn new(frame: &Frame) -> Self {
        Corpus {
            frame: frame.clone(),
            tiles: BTreeMap::new(),
        }
    }

    /// Merges entries of annotations sharing a (tile, expert) pair.
    pub fn from_annotations(frame: &Frame, annotations: impl IntoIterator<Item = TileAnnotation>) -> Result<Self> {
        let mut corpus = Corpus::new(frame);
        for a in annotations {
            corpus.insert(a)?;
        }
        Ok(corpus)
    }

    pub fn insert(&mut self, annotation: TileAnnotation) -> Result<()> {
        let mut merged = match self.get(&annotation.tile_id, &annotation.expert_id) {
            Some(existing) => existing.clone(),
            None => TileAnnotation::new(annotation.tile_id.clone(), annotation.expert_id.clone()),
        };
        merged.entries.extend(annotation.entries);
        merged
            .validate(&self.frame)
            .map_err(|message| Error::Annotation { line: 0, message })?;
        self.tiles
            .entry(merged.tile_id.clone())
            .or_default()
            .insert(merged.expert_id.clone(), merged);
        Ok(())
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn tile_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn tile_ids(&self) -> impl Iterator<Item = &str> {
        self.tiles.keys().map(String::as_str)
    }

    pub fn experts(&self) -> Vec<String> {
        let mut all: Vec<String> = self.tiles.values().flat_map(|e| e.keys().cloned()).collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn get(&self, tile_id: &str, expert_id: &str) -> Option<&TileAnnotation> {
        self.tiles.get(tile_id)?.get(expert_id)
    }

    /// All annotations, by tile then expert.
    pub fn annotations(&self) -> impl Iterator<Item = &TileAnnotation> {
        self.tiles.values().flat_map(|e| e.values())
    }

    /// Matching annotation pairs of two experts over the shared tile set.
    pub fn paired(&self, expert_i: &str, expert_j: &str) -> Result<Vec<(&TileAnnotation, &TileAnnotation)>> {
        let experts = self.experts();
        for e in [expert_i, expert_j] {
            if !experts.iter().any(|x| x == e) {
                return Err(Error::UnknownExpert(e.to_string()));
            }
        }
        let mut pairs = Vec::with_capacity(self.tiles.len());
        for by_expert in self.tiles.values() {
            match (by_expert.get(expert_i), by_expert.get(expert_j)) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                (None, None) => {}
                _ => return Err(Error::TileSetMismatch(expert_i.to_string(), expert_j.to_string())),
            }
        }
        Ok(pairs)
    }

    /// Back to the CSV layout accepted by [`parse_annotations`].
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for a in self.annotations() {
            for e in &a.entries {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    a.tile_id,
                    a.expert_id,
                    e.class,
                    e.level.level(),
                    e.proportion
                ));
            }
        }
        out
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    tile_id: String,
    expert_id: String,
    class: String,
    certainty_level: String,
    proportion: String,
}

/// Parses sediment annotations.
pub fn parse_annotations<R: Read>(reader: R) -> Result<Corpus> {
    parse_annotations_in(reader, &sediment_frame())
}

/// Parses annotations against any frame. Errors carry the 1-based line.
pub fn parse_annotations_in<R: Read>(reader: R, frame: &Frame) -> Result<Corpus> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header_error = |message: String| Error::Annotation { line: 1, message };
    let headers = csv.headers().map_err(|e| header_error(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(header_error(format!("expected header `{}`", CSV_HEADER.join(","))));
    }
    let mut groups: BTreeMap<(String, String), (u64, TileAnnotation)> = BTreeMap::new();
    for record in csv.records() {
        let record = record.map_err(|e| Error::Annotation {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| Error::Annotation { line, message };
        let row: Row = record.deserialize(Some(&headers)).map_err(|e| fail(e.to_string()))?;
        if row.tile_id.is_empty() || row.expert_id.is_empty() {
            return Err(fail("empty tile or expert id".into()));
        }
        frame
            .class_index(&row.class)
            .map_err(|_| fail(format!("unknown class `{}`", row.class)))?;
        let level = row
            .certainty_level
            .parse::<u8>()
            .ok()
            .and_then(CertaintyLevel::from_level)
            .ok_or_else(|| fail(format!("certainty level `{}` is not 1, 2 or 3", row.certainty_level)))?;
        let proportion: f64 = row
            .proportion
            .parse()
            .map_err(|_| fail(format!("proportion `{}` is not a number", row.proportion)))?;
        if !proportion.is_finite() || !(0.0..=1.0).contains(&proportion) {
            return Err(fail(format!("proportion {proportion} is outside [0, 1]")));
        }
        let key = (row.tile_id.clone(), row.expert_id.clone());
        let (_, group) = groups
            .entry(key)
            .or_insert_with(|| (line, TileAnnotation::new(row.tile_id, row.expert_id)));
        group.entries.push(AnnotationEntry {
            class: row.class,
            level,
            proportion,
        });
        let sum = group.proportion_sum();
        if sum > 1.0 + NORMALIZATION_TOLERANCE {
            return Err(fail(format!(
                "proportions of tile `{}` by `{}` sum to {sum}",
                group.tile_id, group.expert_id
            )));
        }
    }
    let mut corpus = Corpus::new(frame);
    for (_, (_, annotation)) in groups {
        corpus
            .tiles
            .entry(annotation.tile_id.clone())
            .or_default()
            .insert(annotation.expert_id.clone(), annotation);
    }
    Ok(corpus)
}

/// Generalized M5 mass of one annotation on the sediment frame.
pub fn tile_mass(annotation: &TileAnnotation, weights: &CertaintyWeights) -> Result<MassFunction> {
    build_generalized_m5_in(&sediment_frame(), annotation, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictMatrix {
    pub labels: Vec<String>,
    pub expert_i: String,
    pub expert_j: String,
    pub tiles: usize,
    /// `values[x][y]`: mean of `m_i(x)·m_j(y)` over tiles, times 10^4.
    pub values: Vec<Vec<f64>>,
}

impl ConflictMatrix {
    pub fn get(&self, x: &str, y: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == x)?;
        let j = self.labels.iter().position(|l| l == y)?;
        Some(self.values[i][j])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |acc, v| acc + v)
    }

    /// Largest entry as `(row, column, value)`, first in row-major order on ties.
    pub fn max_entry(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        best
    }

    pub fn transpose(&self) -> ConflictMatrix {
        let n = self.labels.len();
        ConflictMatrix {
            labels: self.labels.clone(),
            expert_i: self.expert_j.clone(),
            expert_j: self.expert_i.clone(),
            tiles: self.tiles,
            values: (0..n).map(|i| (0..n).map(|j| self.values[j][i]).collect()).collect(),
        }
    }

    /// Rows are `expert_i` classes, columns `expert_j` classes.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\\{}", self.expert_i, self.expert_j);
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Inter-expert conflict on singleton pairs, averaged over tiles.
pub fn conflict_matrix(
    corpus: &Corpus,
    expert_i: &str,
    expert_j: &str,
    weights: &CertaintyWeights,
) -> Result<ConflictMatrix> {
    let frame = corpus.frame();
    let n = frame.len();
    let pairs = corpus.paired(expert_i, expert_j)?;
    let per_tile = pairs
        .par_iter()
        .map(|(a, b)| {
            let mi = singleton_masses(&build_generalized_m5_in(frame, a, weights)?);
            let mj = singleton_masses(&build_generalized_m5_in(frame, b, weights)?);
            let mut out = vec![0.0; n * n];
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        out[x * n + y] = mi[x] * mj[y];
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![0.0; n * n];
    for tile in &per_tile {
        for (s, v) in sums.iter_mut().zip(tile) {
            *s += v;
        }
    }
    let tiles = per_tile.len();
    let scale = if tiles == 0 { 0.0 } else { MATRIX_SCALE / tiles as f64 };
    Ok(ConflictMatrix {
        labels: frame.labels().to_vec(),
        expert_i: expert_i.to_string(),
        expert_j: expert_j.to_string(),
        tiles,
        values: (0..n).map(|x| (0..n).map(|y| sums[x * n + y] * scale).collect()).collect(),
    })
}

fn singleton_masses(m: &MassFunction) -> Vec<f64> {
    let frame = m.frame();
    (0..frame.len())
        .map(|i| m.mass_of_cells(&frame.atom_cells(i)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionDifference {
    pub tiles: usize,
    pub differing: usize,
    /// Tiles left totally conflicting by either rule, so undecided and
    /// excluded from `rate`.
    pub undecidable: usize,
    pub rate: f64,
}

impl DecisionDifference {
    pub fn to_json(&self) -> Value {
        json!({
            "tiles": self.tiles,
            "differing": self.differing,
            "undecidable": self.undecidable,
            "rate": self.rate,
        })
    }
}

/// Fraction of tiles where two rules fusing the same two experts lead to
/// different pignistic decisions over the singletons.
pub fn decision_difference(
    corpus: &Corpus,
    weights: &CertaintyWeights,
    rule_a: Rule,
    rule_b: Rule,
    expert_i: &str,
    expert_j: &str,
) -> Result<DecisionDifference> {
    let frame = corpus.frame();
    let pairs = corpus.paired(expert_i, expert_j)?;
    let flips = pairs
        .par_iter()
        .map(|(a, b)| {
            let sources = [
                build_generalized_m5_in(frame, a, weights)?,
                build_generalized_m5_in(frame, b, weights)?,
            ];
            let choose = |rule: Rule| match decide_singletons(&rule.combine(&sources)?, Criterion::Pignistic) {
                Ok(report) => Ok(Some(report.chosen)),
                Err(Error::TotalConflict) => Ok(None),
                Err(e) => Err(e),
            };
            Ok(match (choose(rule_a)?, choose(rule_b)?) {
                (Some(a), Some(b)) => Some(a != b),
                _ => None,
            })
        })
        .collect::<Result<Vec<Option<bool>>>>()?;
    let differing = flips.iter().filter(|f| **f == Some(true)).count();
    let undecidable = flips.iter().filter(|f| f.is_none()).count();
    let decided = flips.len() - undecidable;
    Ok(DecisionDifference {
        tiles: flips.len(),
        differing,
        undecidable,
        rate: if decided == 0 { 0.0 } else { differing as f64 / decided as f64 },
    })
}

pub const DEMO_SEED: u64 = 20_061;
pub const DEMO_TILES: usize = 600;

fn pick<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

fn random_level<R: Rng + ?Sized>(rng: &mut R) -> CertaintyLevel {
    match pick(rng, &[0.5, 0.3, 0.2]) {
        0 => CertaintyLevel::Sure,
        1 => CertaintyLevel::ModeratelySure,
        _ => CertaintyLevel::NotSure,
    }
}

/// Synthetic two-expert sediment corpus. Sand and silt dominate, and
/// `expert2` often reads `expert1`'s sand as silt.
pub fn demo_corpus(tiles: usize, seed: u64) -> Corpus {
    let frame = sediment_frame();
    let labels = frame.labels().to_vec();
    let prevalence = [0.10, 0.05, 0.35, 0.25, 0.10, 0.10, 0.05];
    let (sand, silt) = (2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Corpus::new(&frame);
    for t in 0..tiles {
        let tile_id = format!("t{:04}", t + 1);
        let main = pick(&mut rng, &prevalence);
        let mixed = rng.random::<f64>() < 0.3;
        let secondary = (main + 1 + rng.random_range(0..labels.len() - 1)) % labels.len();
        let share = if mixed { rng.random_range(0.1..0.4) } else { 0.0 };
        for expert in ["expert1", "expert2"] {
            let mut seen = main;
            if expert == "expert2" {
                if main == sand && rng.random::<f64>() < 0.4 {
                    seen = silt;
                } else if rng.random::<f64>() < 0.05 {
                    seen = rng.random_range(0..labels.len());
                }
            }
            let mut a = TileAnnotation::new(tile_id.clone(), expert);
            if mixed && secondary != seen {
                a = a
                    .with_entry(labels[seen].clone(), random_level(&mut rng), 1.0 - share)
                    .with_entry(labels[secondary].clone(), random_level(&mut rng), share);
            } else {
                a = a.with_entry(labels[seen].clone(), random_level(&mut rng), 1.0);
            }
            corpus.insert(a).expect("generated annotations are valid");
        }
    }
    corpus
}

/// Tiles whose two experts are independent uniform-mass draws, as in the
/// stability study. Use with weights `(1, 1, 1)`, which makes each
/// proportion the class mass.
pub fn uniform_corpus(frame: &Frame, tiles: usize, seed: u64) -> Result<Corpus> {
    if frame.model() != Model::Shafer {
        return Err(Error::FrameMismatch);
    }
    let labels = frame.labels().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Corpus::new(frame);
    let mut masses = vec![0.0; labels.len()];
    for t in 0..tiles {
        for expert in ["expert1", "expert2"] {
            sample_singleton_masses(SamplingLaw::UniformMass, &mut rng, &mut masses);
            let mut a = TileAnnotation::new(format!("t{:06}", t + 1), expert);
            for (label, &m) in labels.iter().zip(&masses) {
                a = a.with_entry(label.clone(), CertaintyLevel::Sure, m);
            }
            corpus.insert(a)?;
        }
    }
    Ok(corpus)
}
