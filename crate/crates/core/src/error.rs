use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "{sites} sites give Bell({sites}) = {count} partitions; exact lattice methods are capped at {cap} sites"
    )]
    TooManySites { sites: usize, count: u64, cap: usize },

    #[error("type space with {cardinality} types exceeds the storage cap of {cap}")]
    TypeSpaceTooLarge { cardinality: u128, cap: u128 },

    #[error("not an interval partition: {0}")]
    NotInterval(String),

    #[error("not single-crossover: partition {0} carries positive rate but is not a cut partition")]
    NotSingleCrossover(String),

    #[error(
        "non-generic rates: psi^U(1) - psi^U(B) = {gap:e} for U = {{{subset}}}, B = {partition}; \
         use the semigroup method instead"
    )]
    NonGeneric { subset: String, partition: String, gap: f64 },

    #[error("total mass drifted to {mass} at t = {t} (tolerance {tolerance:e})")]
    MassDrift { t: f64, mass: f64, tolerance: f64 },

    #[error("discrete-time dynamics need a probability-style recombination distribution")]
    RateStyle,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of numerical preconditions (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonGeneric { .. } | Error::MassDrift { .. } | Error::NotSingleCrossover(_)
        )
    }
}
