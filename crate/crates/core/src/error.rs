use thiserror::Error;

/// Errors shared across the engine modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor out of range: {0}")]
    DescriptorRange(String),

    #[error("multiplication table is not a group: {axiom} fails at {witness}")]
    TableNotAGroup { axiom: &'static str, witness: String },

    #[error("free product factors must be finite groups, got {0}")]
    InfiniteFactor(String),

    #[error("operands belong to different groups")]
    MixedGroups,

    #[error("element {0:?} is malformed for this group")]
    MalformedElement(String),

    #[error("cannot parse {text:?} as an element: {reason}")]
    ElementParse { text: String, reason: String },

    #[error("ball cap of {cap} entries exceeded at radius {radius_reached} (requested {radius})")]
    BallCapExceeded {
        cap: usize,
        radius: u32,
        radius_reached: u32,
    },

    #[error("support cap of {cap} entries exceeded (support would reach {support})")]
    SupportCapExceeded { cap: usize, support: usize },

    #[error("laziness must lie in [0, 1), got {0}")]
    LazinessRange(String),

    #[error("truncation budget must lie in [0, 1), got {0}")]
    TruncationRange(String),

    #[error("weights must be positive and sum to 1, got sum {0}")]
    BadWeights(String),

    #[error("subgroup set is not closed: {witness} escapes the listed elements")]
    SubgroupNotClosed { witness: String },

    #[error("subgroup does not contain the identity")]
    SubgroupNoIdentity,

    #[error("subgroup is not normal: conjugating {member} by {conjugator} leaves the subgroup")]
    NormalityViolation { conjugator: String, member: String },

    #[error("subgroup is not contained in the support of the step measure (missing {missing})")]
    SubgroupNotInSupport { missing: String },

    #[error("operation requires an exact measure, but the truncation deficit is {deficit}")]
    TruncatedMeasure { deficit: String },

    #[error("return probability is zero at step {n}; sample at even steps")]
    ZeroReturn { n: u64 },

    #[error("operation requires a verified-symmetric measure")]
    SymmetryRequired,

    #[error("the candidate set is empty")]
    EmptyCandidates,

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("serialization: {0}")]
    Serialization(String),
}
