use alloc::boxed::Box;
use alloc::string::String;

use crate::matrix::Matrix;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands live over different rings")]
    RingMismatch,
    #[error("invalid ring descriptor: {0}")]
    InvalidRing(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("exact division is not possible")]
    NotDivisible,
    #[error("cannot map element into the target ring: {0}")]
    NotRepresentable(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("form flavors differ")]
    FlavorMismatch,
    #[error("gram matrix does not have the declared flavor")]
    FlavorViolation,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("congruence fails at entry ({row}, {col})")]
    CongruenceFails { row: usize, col: usize },
    #[error("matrix is not alternating")]
    NotAlternating,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("form is not unimodular")]
    NotUnimodular,
    #[error("no unit pivot in the residual {}x{} block", .residual.rows(), .residual.cols())]
    NoUnitPivot { residual: Box<Matrix> },

    #[error("characteristic two is not supported")]
    CharacteristicTwo,
    #[error("operation needs a field")]
    NotAField,
    #[error("isotropic search exhausted at height bound {bound}")]
    SearchExhausted { bound: u64 },
    #[error("rank is odd")]
    OddRank,
    #[error("isometry cannot be decided over this ring")]
    Undecidable,

    #[error("matrix size is odd")]
    OddSize,
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("d∘d does not vanish at degree {degree}")]
    NotAComplex { degree: i64 },
    #[error("chain map fails to commute at degree {degree}")]
    NotAChainMap { degree: i64 },
    #[error("duality form check failed: {0}")]
    BadDualityForm(String),
    #[error("no matching certificate found")]
    NoMatchFound,

    #[error("pivot set is invalid")]
    BadPivot,
    #[error("sample is outside the membership locus")]
    NotInMembershipLocus,
    #[error("scale {n} exceeds the supported bound {max}")]
    UnsupportedScale { n: usize, max: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
