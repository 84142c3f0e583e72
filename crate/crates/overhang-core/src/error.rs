use alloc::string::String;

/// Everything that can go wrong while building, checking or optimizing a stack.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("blocks {first} and {second} overlap on level {level}")]
    Overlap { first: usize, second: usize, level: u32 },
    #[error("block {block} on level {level} rests on nothing")]
    Unsupported { block: usize, level: u32 },
    #[error("point weight {index} is not on the upper edge of block {block}")]
    WeightOffBlock { index: usize, block: usize },
    #[error("point weight {index} refers to missing block {block}")]
    NoSuchBlock { index: usize, block: usize },
    #[error("point weight {index} has non-positive magnitude")]
    NonPositiveWeight { index: usize },
    #[error("stack has no blocks")]
    EmptyStack,
    #[error("exact mode needs rational coordinates; block {block} only has a float position (use float mode)")]
    InexactCoordinates { block: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no finite amount of point weight balances this stack")]
    Unstabilizable,
    #[error("total weight {w} cannot pay for {k} spine blocks")]
    InsufficientWeight { w: f64, k: usize },
    #[error("conversion failed: {0}")]
    ConversionFailed(String),
    #[error("block {block} on level {level} is not well-behaved-solvable")]
    NotWellBehaved { level: usize, block: usize },
    #[error("n = {n} exceeds the enumeration limit {limit}")]
    TooManyBlocks { n: usize, limit: usize },
    #[error("structure admits no feasible placement")]
    InfeasibleStructure,
}

pub type Result<T> = core::result::Result<T, Error>;
