use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    NotPrimePower(u32),
    BoundExceeded { order: u32, bound: u32 },
    NoInverse,
    UnknownPoint(usize),
    BadRank { requested: usize, dim: usize },
    NotAMorphism(String),
    NotSurjective,
    SearchBudgetExceeded { budget: u64 },
    EmptyFlat,
    NotSemiaffine(String),
    DegenerateImage,
    HypothesisViolated(String),
    FieldTooSmall,
    ZeroMap,
    NoSemilinearModel,
    NotAFlat,
    LinesTooShort,
    NotPartialMorphism(String),
    NotALine,
    DecompositionFailed(String),
    PoleHit(usize),
    SelectionFailed,
    NotFound,
    Precondition(String),
    DimensionMismatch,
    Disagreement(String),
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPrimePower(q) => write!(f, "{q} is not a prime power"),
            Error::BoundExceeded { order, bound } => {
                write!(
                    f,
                    "field order {order} exceeds the configured bound {bound}"
                )
            }
            Error::NoInverse => f.write_str("matrix is singular"),
            Error::UnknownPoint(p) => write!(f, "point id {p} is out of range"),
            Error::BadRank { requested, dim } => {
                write!(
                    f,
                    "truncation rank {requested} must be below the dimension {dim}"
                )
            }
            Error::NotAMorphism(why) => write!(f, "not a morphism of geometries: {why}"),
            Error::NotSurjective => f.write_str("map is not surjective"),
            Error::SearchBudgetExceeded { budget } => {
                write!(f, "search exceeded its budget of {budget} node expansions")
            }
            Error::EmptyFlat => f.write_str("flat is empty"),
            Error::NotSemiaffine(why) => write!(f, "map is not semiaffine: {why}"),
            Error::DegenerateImage => f.write_str("image is contained in a line"),
            Error::HypothesisViolated(why) => write!(f, "hypothesis violated: {why}"),
            Error::FieldTooSmall => f.write_str("field has only two elements"),
            Error::ZeroMap => f.write_str("semilinear map is zero"),
            Error::NoSemilinearModel => f.write_str("no semilinear map induces this morphism"),
            Error::NotAFlat => f.write_str("point set is not a flat"),
            Error::LinesTooShort => f.write_str("lines of the domain have fewer than three points"),
            Error::NotPartialMorphism(why) => write!(f, "not a partial morphism: {why}"),
            Error::NotALine => f.write_str("point set is not a line"),
            Error::DecompositionFailed(why) => write!(f, "fractional decomposition failed: {why}"),
            Error::PoleHit(p) => write!(f, "1 + omega(v) vanishes at point {p}"),
            Error::SelectionFailed => f.write_str("no valid selection found"),
            Error::NotFound => f.write_str("no configuration exists"),
            Error::Precondition(why) => write!(f, "precondition failed: {why}"),
            Error::DimensionMismatch => f.write_str("dimension mismatch"),
            Error::Disagreement(why) => write!(f, "equivalent criteria disagree: {why}"),
            Error::InvalidInput(why) => f.write_str(why),
        }
    }
}

impl core::error::Error for Error {}
