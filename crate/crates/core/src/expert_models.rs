//! Mass functions built from one expert's statement about a tile.
//!
//! The two-class models work on rock `A` and sand `B`. An expert either
//! says `A`, says `B`, or says the tile holds both in proportions `p_A`,
//! `p_B` with certainties `c_A`, `c_B`. The models differ in where the
//! heterogeneous statement and the residual ignorance are placed:
//!
//! | model | frame            | "both" goes to | ignorance  |
//! |-------|------------------|----------------|------------|
//! | M1    | `{A,B,C}` Shafer | `C`            | `A∪B∪C`    |
//! | M2    | `{A,B,C}` Shafer | `C`            | `A∪B`      |
//! | M3    | `{A′,B′,C′}` Shafer | `C′`        | `A′∪B′∪C′` |
//! | M4    | `{A,B}` free     | `A∩B`          | `A∪B`      |
//! | M5    | `{A,B}` either   | split on `A`, `B` | `A∪B`   |

use serde::{Deserialize, Serialize};

use crate::corpus::TileAnnotation;
use crate::error::{Error, Result};
use crate::lattice::{FocalElement, Frame, Model};
use crate::mass::{MassFunction, World, NORMALIZATION_TOLERANCE};

/// Class list of the sonar application, in frame order.
pub const SEDIMENT_CLASSES: [&str; 7] = ["rock", "cobble", "sand", "silt", "ripple", "shadow", "other"];

pub fn m1_frame() -> Frame {
    Frame::new(&["A", "B", "C"], Model::Shafer).expect("static frame")
}

/// Same frame as M1; only the ignorance element differs.
pub fn m2_frame() -> Frame {
    m1_frame()
}

/// `A′ = A∩Bᶜ`, `B′ = B∩Aᶜ`, `C′ = A∩B`.
pub fn m3_frame() -> Frame {
    Frame::new(&["A′", "B′", "C′"], Model::Shafer).expect("static frame")
}

pub fn m4_frame() -> Frame {
    Frame::new(&["A", "B"], Model::FreeDsm).expect("static frame")
}

pub fn m5_frame(model: Model) -> Frame {
    Frame::new(&["A", "B"], model).expect("static frame")
}

pub fn sediment_frame() -> Frame {
    Frame::new(&SEDIMENT_CLASSES, Model::Shafer).expect("static frame")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeclarationKind {
    SaysA,
    SaysB,
    SaysBoth,
}

/// One expert's statement about a two-class tile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertDeclaration {
    pub kind: DeclarationKind,
    pub p_a: f64,
    pub p_b: f64,
    pub c_a: f64,
    pub c_b: f64,
}

fn unit(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidDeclaration(format!("{name} = {x} is outside [0, 1]")))
    }
}

impl ExpertDeclaration {
    pub fn says_a(c_a: f64) -> Result<Self> {
        let d = ExpertDeclaration {
            kind: DeclarationKind::SaysA,
            p_a: 1.0,
            p_b: 0.0,
            c_a,
            c_b: 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn says_b(c_b: f64) -> Result<Self> {
        let d = ExpertDeclaration {
            kind: DeclarationKind::SaysB,
            p_a: 0.0,
            p_b: 1.0,
            c_a: 0.0,
            c_b,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn says_both(p_a: f64, c_a: f64, p_b: f64, c_b: f64) -> Result<Self> {
        let d = ExpertDeclaration {
            kind: DeclarationKind::SaysBoth,
            p_a,
            p_b,
            c_a,
            c_b,
        };
        d.validate()?;
        Ok(d)
    }

    fn check_ranges(&self) -> Result<()> {
        unit("p_A", self.p_a)?;
        unit("p_B", self.p_b)?;
        unit("c_A", self.c_a)?;
        unit("c_B", self.c_b)
    }

    /// Checks value ranges and the proportion constraint of the declared kind.
    pub fn validate(&self) -> Result<()> {
        self.check_ranges()?;
        let ok = match self.kind {
            DeclarationKind::SaysA => self.p_a == 1.0 && self.p_b == 0.0,
            DeclarationKind::SaysB => self.p_a == 0.0 && self.p_b == 1.0,
            DeclarationKind::SaysBoth => (self.p_a + self.p_b - 1.0).abs() <= NORMALIZATION_TOLERANCE,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDeclaration(format!(
                "proportions p_A = {}, p_B = {} do not fit {:?}",
                self.p_a, self.p_b, self.kind
            )))
        }
    }

    /// `p_A·c_A + p_B·c_B`, the belief committed by a joint statement.
    pub fn joint_support(&self) -> f64 {
        self.p_a * self.c_a + self.p_b * self.c_b
    }
}

/// Puts `support` on `focal` and the rest on `ignorance`.
fn simple_support(frame: &Frame, focal: FocalElement, support: f64, ignorance: FocalElement) -> Result<MassFunction> {
    MassFunction::new(frame, [(focal, support), (ignorance, (1.0 - support).max(0.0))], World::Closed)
}

fn three_element_model(
    d: &ExpertDeclaration,
    frame: &Frame,
    says_a: FocalElement,
    says_b: FocalElement,
    says_both: FocalElement,
    ignorance: FocalElement,
) -> Result<MassFunction> {
    d.validate()?;
    match d.kind {
        DeclarationKind::SaysA => simple_support(frame, says_a, d.c_a, ignorance),
        DeclarationKind::SaysB => simple_support(frame, says_b, d.c_b, ignorance),
        DeclarationKind::SaysBoth => simple_support(frame, says_both, d.joint_support(), ignorance),
    }
}

/// Heterogeneous tiles form a third exclusive class `C`; ignorance is `A∪B∪C`.
pub fn build_m1(d: &ExpertDeclaration) -> Result<MassFunction> {
    let f = m1_frame();
    three_element_model(d, &f, f.atom(0)?, f.atom(1)?, f.atom(2)?, f.full())
}

/// As M1 with the ignorance restricted to `A∪B`.
pub fn build_m2(d: &ExpertDeclaration) -> Result<MassFunction> {
    let f = m2_frame();
    let ignorance = f.atom(0)?.join(&f.atom(1)?)?;
    three_element_model(d, &f, f.atom(0)?, f.atom(1)?, f.atom(2)?, ignorance)
}

/// Exclusive refinement `{A′, B′, C′}`: saying `A` means `A′∪C′`.
pub fn build_m3(d: &ExpertDeclaration) -> Result<MassFunction> {
    let f = m3_frame();
    let c = f.atom(2)?;
    let a = f.atom(0)?.join(&c)?;
    let b = f.atom(1)?.join(&c)?;
    three_element_model(d, &f, a, b, c, f.full())
}

/// Free model on `{A, B}`: a joint statement supports `A∩B`.
pub fn build_m4(d: &ExpertDeclaration) -> Result<MassFunction> {
    let f = m4_frame();
    let (a, b) = (f.atom(0)?, f.atom(1)?);
    let both = a.meet(&b)?;
    three_element_model(d, &f, a, b, both, f.full())
}

/// `{A: p_A c_A, B: p_B c_B, A∪B: rest}` on either model. Only the value
/// ranges are checked, so any proportions with `p_A c_A + p_B c_B ≤ 1` work.
pub fn build_m5(d: &ExpertDeclaration, model: Model) -> Result<MassFunction> {
    d.check_ranges()?;
    let f = m5_frame(model);
    let sum = d.joint_support();
    if sum > 1.0 + NORMALIZATION_TOLERANCE {
        return Err(Error::MassOverflow { sum });
    }
    MassFunction::new(
        &f,
        [
            (f.atom(0)?, d.p_a * d.c_a),
            (f.atom(1)?, d.p_b * d.c_b),
            (f.full(), (1.0 - sum).max(0.0)),
        ],
        World::Closed,
    )
}

/// Self-reported certainty of an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CertaintyLevel {
    Sure,
    ModeratelySure,
    NotSure,
}

impl CertaintyLevel {
    pub fn from_level(level: u8) -> Option<Self> {
        match level {
            1 => Some(CertaintyLevel::Sure),
            2 => Some(CertaintyLevel::ModeratelySure),
            3 => Some(CertaintyLevel::NotSure),
            _ => None,
        }
    }

    pub fn level(self) -> u8 {
        match self {
            CertaintyLevel::Sure => 1,
            CertaintyLevel::ModeratelySure => 2,
            CertaintyLevel::NotSure => 3,
        }
    }
}

/// Weights `c1 ≥ c2 ≥ c3 > 0` for the three certainty levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertaintyWeights {
    sure: f64,
    moderately_sure: f64,
    not_sure: f64,
}

impl CertaintyWeights {
    pub fn new(sure: f64, moderately_sure: f64, not_sure: f64) -> Result<Self> {
        let finite = [sure, moderately_sure, not_sure].iter().all(|x| x.is_finite());
        if !finite || sure > 1.0 || sure < moderately_sure || moderately_sure < not_sure || not_sure <= 0.0 {
            return Err(Error::InvalidWeights(format!(
                "need 1 ≥ c1 ≥ c2 ≥ c3 > 0, got {sure}, {moderately_sure}, {not_sure}"
            )));
        }
        Ok(CertaintyWeights {
            sure,
            moderately_sure,
            not_sure,
        })
    }

    pub fn weight(&self, level: CertaintyLevel) -> f64 {
        match level {
            CertaintyLevel::Sure => self.sure,
            CertaintyLevel::ModeratelySure => self.moderately_sure,
            CertaintyLevel::NotSure => self.not_sure,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sure, self.moderately_sure, self.not_sure]
    }
}

impl Default for CertaintyWeights {
    /// `c1 = 2/3`, `c2 = 1/2`, `c3 = 1/3`.
    fn default() -> Self {
        CertaintyWeights {
            sure: 2.0 / 3.0,
            moderately_sure: 0.5,
            not_sure: 1.0 / 3.0,
        }
    }
}

/// Multi-class M5 on the seven sediment classes.
pub fn build_generalized_m5(tile: &TileAnnotation, weights: &CertaintyWeights) -> Result<MassFunction> {
    build_generalized_m5_in(&sediment_frame(), tile, weights)
}

/// `m(X) = Σ_k p_{X,k} c_k` per class and `m(Θ) = 1 − Σ_X m(X)` on any
/// Shafer frame.
pub fn build_generalized_m5_in(frame: &Frame, tile: &TileAnnotation, weights: &CertaintyWeights) -> Result<MassFunction> {
    let mut per_class = vec![0.0; frame.len()];
    for entry in &tile.entries {
        if !entry.proportion.is_finite() || !(0.0..=1.0).contains(&entry.proportion) {
            return Err(Error::InvalidDeclaration(format!(
                "proportion {} of `{}` is outside [0, 1]",
                entry.proportion, entry.class
            )));
        }
        let index = frame.class_index(&entry.class)?;
        per_class[index] += entry.proportion * weights.weight(entry.level);
    }
    let sum: f64 = per_class.iter().sum();
    if sum > 1.0 + NORMALIZATION_TOLERANCE {
        return Err(Error::MassOverflow { sum });
    }
    let mut pairs = Vec::with_capacity(frame.len() + 1);
    for (i, m) in per_class.into_iter().enumerate() {
        pairs.push((frame.atom(i)?, m));
    }
    pairs.push((frame.full(), (1.0 - sum).max(0.0)));
    MassFunction::new(frame, pairs, World::Closed)
}
