use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Branching sequence is empty or has an entry below 2, or the tree is too large.
    InvalidBranching,
    /// `a < b` does not hold (or a bound is not finite).
    InvalidDomain { lo: f64, hi: f64 },
    /// Path does not address a node of the tree.
    InvalidPath,
    /// A leaf was required but the path stops above the leaf level.
    NotALeaf,
    /// Sample outside `[a, b)`.
    SampleOutOfDomain { index: usize, value: f64 },
    /// Mechanisms need at least one sample.
    EmptyDataset,
    /// Number of bins below the allowed minimum.
    InvalidBins(u64),
    /// Privacy budget or noise scale not strictly positive and finite.
    InvalidEpsilon(f64),
    /// Budget vector length differs from tree height.
    BudgetMismatch { height: usize, budgets: usize },
    /// Argument outside the domain of an error formula or optimizer.
    InvalidParameter(&'static str),
    /// Refinement needs equal branching factors and equal budgets.
    NonUniformTree,
    /// Integer is not a prime power.
    NotPrimePower(u64),
    /// Integer is not prime.
    NotPrime(u64),
    /// Input above the trial-division cap.
    FactorizationLimit(u64),
    /// Noisy cumulative counts do not end at `N`, or the CDF does not end at 1.
    UnpinnedTotal { last: f64, expected: f64 },
    /// Non-finite value in a consistency problem.
    NonFinite { index: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidBranching => {
                write!(f, "branching factors must be a non-empty sequence of integers >= 2")
            }
            Error::InvalidDomain { lo, hi } => write!(f, "invalid domain [{lo}, {hi})"),
            Error::InvalidPath => write!(f, "node path is not valid for this tree"),
            Error::NotALeaf => write!(f, "node path does not address a leaf"),
            Error::SampleOutOfDomain { index, value } => {
                write!(f, "sample {index} ({value}) lies outside the domain")
            }
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::InvalidBins(k) => write!(f, "invalid number of bins: {k}"),
            Error::InvalidEpsilon(e) => write!(f, "privacy budget must be positive and finite, got {e}"),
            Error::BudgetMismatch { height, budgets } => write!(
                f,
                "tree of height {height} needs {height} budgets, got {budgets}"
            ),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NonUniformTree => {
                write!(f, "refinement requires equal branching factors and equal budgets")
            }
            Error::NotPrimePower(k) => write!(f, "{k} is not a prime power"),
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::FactorizationLimit(k) => write!(f, "{k} exceeds the trial-division limit"),
            Error::UnpinnedTotal { last, expected } => {
                write!(f, "last coordinate is {last}, expected {expected}")
            }
            Error::NonFinite { index } => write!(f, "non-finite value at index {index}"),
        }
    }
}

impl core::error::Error for Error {}
