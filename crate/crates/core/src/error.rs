use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a frame needs at least one class")]
    EmptyFrame,
    #[error("class labels must be non-empty")]
    EmptyLabel,
    #[error("duplicate class label `{0}`")]
    DuplicateLabel(String),
    #[error("class label `{0}` contains a reserved character")]
    ReservedLabel(String),
    #[error("{classes} classes need {cells} Venn cells, more than the supported {max}")]
    FrameTooLarge {
        classes: usize,
        cells: usize,
        max: usize,
    },
    #[error("class index {index} out of range for a frame of {classes} classes")]
    ClassIndex { index: usize, classes: usize },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("operands belong to different frames")]
    FrameMismatch,
    #[error("cell set is not upward-closed, so it is not an element of the frame")]
    NotUpwardClosed,
    #[error("enumeration of the free model is limited to {max} classes, got {classes}")]
    EnumerationTooLarge { classes: usize, max: usize },
    #[error("cannot parse element `{0}`")]
    ParseElement(String),

    #[error("mass {mass} on `{element}` is not a finite non-negative number")]
    InvalidMass { element: String, mass: f64 },
    #[error("masses sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("closed-world mass puts {0} on the empty set")]
    EmptySetMass(f64),
    #[error("cannot parse mass function: {0}")]
    MassFormat(String),

    #[error("invalid expert declaration: {0}")]
    InvalidDeclaration(String),
    #[error("invalid certainty weights: {0}")]
    InvalidWeights(String),
    #[error("element masses sum to {sum}, which exceeds 1")]
    MassOverflow { sum: f64 },

    #[error("combination needs at least {needed} mass functions, got {got}")]
    TooFewSources { needed: usize, got: usize },

    #[error("PCR5 fuses exactly two sources, got {0}")]
    PairwiseRule(usize),

    #[error("pignistic probability is undefined on the empty set")]
    EmptyElement,
    #[error("total conflict: m(∅) = 1")]
    TotalConflict,
    #[error("decision needs at least one candidate")]
    NoCandidates,

    #[error("class count {0} outside the supported range 2..=7")]
    ClassCount(usize),
    #[error("the experiment needs at least one sample")]
    NoSamples,
    #[error("histograms need at least 10 bins, got {0}")]
    TooFewBins(usize),

    #[error("line {line}: {message}")]
    Annotation { line: u64, message: String },
    #[error("experts `{0}` and `{1}` annotate different tile sets")]
    TileSetMismatch(String, String),
    #[error("expert `{0}` does not appear in the corpus")]
    UnknownExpert(String),
}
