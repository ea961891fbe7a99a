//! Node scores, precomputed parent-set tables and constrained score sums.

mod bge;
mod table;

pub use bge::{BgeParams, BgeScorer, DataSet};
pub use table::{entries_per_node, ScoreTable};

use crate::nodeset::NodeSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("data set has no observations")]
    NoObservations,
    #[error("data set has {found} values, expected {rows} x {cols}")]
    Shape { rows: usize, cols: usize, found: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("column {0} is constant")]
    ConstantColumn(usize),
    #[error("{observations} observations are too few for parent sets of size {max_parents}")]
    TooFewObservations { observations: usize, max_parents: usize },
    #[error("invalid BGe hyperparameters: {0}")]
    Hyperparameters(&'static str),
    #[error("posterior matrix is not positive definite for node {node} with parents {parents:?}")]
    NotPositiveDefinite { node: usize, parents: NodeSet },
    #[error("non-finite score for node {node} with parents {parents:?}")]
    NonFiniteScore { node: usize, parents: NodeSet },
    #[error("parent limit {max_parents} out of range for {n} nodes")]
    ParentLimit { max_parents: usize, n: usize },
    #[error("node {node} has {size} parents, above the table limit {max_parents}")]
    ParentSetTooLarge { node: usize, size: usize, max_parents: usize },
    #[error("table has {table} nodes but the graph has {graph}")]
    NodeCount { table: usize, graph: usize },
}
