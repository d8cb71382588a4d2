//! System-level metrics for a device carrying several weighted clusters.

mod capacity;
mod ecc;
mod losses;

use thiserror::Error;

use crate::cluster::ClusterError;
use crate::radmatrix::RadMatrixError;

pub use capacity::{
    build_receive_matrix, ergodic_capacity, ideal_capacity, CapacityConfig, CapacityResult, ReceiveMatrix,
};
pub use ecc::{ecc, EccMatrix, ECC_ADEQUATE};
pub use losses::{check_partition, loss_decomposition, LossBreakdown};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("clusters do not partition the device ports: {0}")]
    NotPartition(String),
    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("field data implies negative ohmic loss ({0:e}); patterns and S-parameters disagree")]
    InconsistentFieldData(f64),
    #[error("antenna {index} has efficiency {efficiency:e}; correlation is undefined")]
    UndefinedCorrelation { index: usize, efficiency: f64 },
    #[error("receive matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("receive matrix is not Hermitian (max |r - rᴴ| = {0:e})")]
    NotHermitian(f64),
    #[error("receive matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("invalid capacity configuration: {0}")]
    InvalidConfig(String),
    #[error("frequency index {index} out of range ({len} points)")]
    FrequencyIndex { index: usize, len: usize },
    #[error(transparent)]
    RadMatrix(#[from] RadMatrixError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}
