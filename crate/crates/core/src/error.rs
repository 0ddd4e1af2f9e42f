use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("field degrees must be positive (h = {h}, t = {t})")]
    ZeroDegree { h: u32, t: u32 },
    #[error("field of order {0} exceeds the supported table size")]
    FieldTooLarge(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {element} does not belong to the field of order {order}")]
    ForeignElement { element: u32, order: u32 },
    #[error("expected a subspace of projective dimension {expected}, got {got}")]
    WrongDimension { expected: i32, got: i32 },
    #[error("vector has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("zero vector does not define a projective point")]
    ZeroVector,
    #[error("point is not on the Klein quadric")]
    NotOnQuadric,
    #[error("set of size {size} is not a multiple of 2(q+1) = {unit}")]
    NotClSized { size: usize, unit: usize },
    #[error("lines {0} and {1} are not disjoint")]
    LinesMeet(usize, usize),
    #[error("GF(q)-span has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("linear set is not scattered ({points} points, expected {expected})")]
    NotScattered { points: usize, expected: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid document: {0}")]
    Document(String),
}
