use std::path::PathBuf;

use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("{path}:{line}: {message}")]
    MeshParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("non-manifold boundary: {0}")]
    NonManifold(String),

    #[error("coefficient check failed at ({x:.6}, {y:.6}): {message}")]
    Coefficient { x: f64, y: f64, message: String },

    #[error("boundary quadrature on panel pair ({p}, {q}) failed: {message}")]
    Quadrature { p: usize, q: usize, message: String },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("solve failed at frequency index {index} (s = {s}): {message}")]
    FrequencySolve {
        index: usize,
        s: C64,
        message: String,
    },

    #[error("observation point ({x:.6}, {y:.6}) lies within {distance:.3e} of panel {panel}, closer than its length")]
    NearField {
        x: f64,
        y: f64,
        panel: usize,
        distance: f64,
    },

    #[error("marching history capacity exceeded: {0}")]
    HistoryCapacity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
