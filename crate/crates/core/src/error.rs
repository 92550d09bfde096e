use thiserror::Error;

/// Errors surfaced by constructors and operations across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size cap exceeded for {what}: {actual} > {limit}")]
    SizeCap {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("polynomial must be monic of degree >= 1")]
    BadPolynomial,
    #[error("characteristic mismatch: {0} vs {1}")]
    CharMismatch(u32, u32),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operands live over different {0}")]
    BaseMismatch(&'static str),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("map is not an epimorphism")]
    NotEpi,
    #[error("complex is not acyclic")]
    NotAcyclic,
    #[error("hom element is not a cocycle")]
    NotCocycle,
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Size caps for enumeration-heavy operations. The artifact is desk-scale
/// by design; these keep every operation finite and fast.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Maximum F_p-dimension of an algebra.
    pub max_dim: usize,
    /// Maximum prime characteristic.
    pub max_p: u32,
    /// Maximum number of points in a ringed space.
    pub max_points: usize,
    /// Maximum number of elements enumerated by brute force (p^dim).
    pub max_enumeration: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_dim: 16,
            max_p: 13,
            max_points: 12,
            max_enumeration: 1 << 16,
        }
    }
}

/// Outcome of a validation pass: empty means every check passed.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn push(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.failures.extend(other.failures);
    }

    pub fn into_result(self) -> Result<()> {
        if self.ok() {
            Ok(())
        } else {
            Err(Error::Invariant(self.failures.join("; ")))
        }
    }
}
