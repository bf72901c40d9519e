use thiserror::Error;

/// Errors shared across the crate. Variant names follow the failing
/// precondition or assumption so callers can match on them directly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is not connected: vertex {0} unreachable from vertex 0")]
    DisconnectedGraph(usize),
    #[error("edge {edge} has length {length:.3e}, below the minimum {min:.3e}")]
    EdgeTooShort { edge: usize, length: f64, min: f64 },
    #[error("vertex {vertex} has degree {degree}, above the maximum {max}")]
    DegreeTooLarge { vertex: usize, degree: usize, max: usize },
    #[error("potential on edge {edge} is negative (min {min:.6e} at s={at:.6})")]
    NegativePotential { edge: usize, min: f64, at: f64 },
    #[error("grid step {h:.3e} too coarse for edge {edge} of length {length:.3e} (need h <= length/4)")]
    StepTooCoarse { edge: usize, h: f64, length: f64 },
    #[error("eigensolver did not converge: achieved residual {achieved:.3e}, tolerance {tol:.3e}")]
    ConvergenceFailure { achieved: f64, tol: f64 },
    #[error("target point unreachable from the source set")]
    Unreachable,
    #[error("interval [{a:.6}, {b:.6}] is not inside the tunneling region at energy {energy:.6}")]
    RegionNotTunneling { a: f64, b: f64, energy: f64 },
    #[error("collar interval of width {width:.6} at edge {edge}, s={s:.6} crosses a vertex")]
    CollarContainsVertex { edge: usize, s: f64, width: f64 },
    #[error("point at edge {edge}, s={s:.6} is within {dist:.6} of the region boundary (need >= {need:.6})")]
    PointTooCloseToBoundary { edge: usize, s: f64, dist: f64, need: f64 },
    #[error("no vertex-free interval of length {need:.6} separates the target region at the given shift")]
    NoSeparatingInterval { need: f64 },
    #[error("quadratic minorant is degenerate (b = 0); use a quadratic or constant piece instead")]
    DegenerateMinorant,
    #[error("supersolution verification failed: worst slack {worst:.3e} at edge {edge}, s={s:.6}")]
    SupersolutionFailure { worst: f64, edge: usize, s: f64 },
    #[error("landscape function was not verified as a supersolution")]
    UnverifiedSupersolution,
    #[error("no valid covering of the region could be assembled: {0}")]
    AssemblyInfeasible(String),
    #[error("region where the reciprocal landscape exceeds E + delta is empty")]
    EmptyRegion,
    #[error("energy shift {shift:.6} is not below the eigenvalue {energy:.6}")]
    ShiftNotBelowE { shift: f64, energy: f64 },
    #[error("subinterval of length {length:.6} is shorter than the oscillation threshold {need:.6}")]
    SubintervalTooShort { length: f64, need: f64 },
    #[error("no path found between the extremal candidates")]
    PathNotFound,
    #[error("energy {energy:.6} is not above the potential infimum {v_min:.6}")]
    EnergyBelowInf { energy: f64, v_min: f64 },
    #[error("spectral data insufficient: certified tail bound {tail:.3e} exceeds tolerance {tol:.3e}")]
    InsufficientSpectrum { tail: f64, tol: f64 },
    #[error("method {method} is not applicable: {reason}")]
    MethodInapplicable { method: String, reason: String },
    #[error("grids differ beyond interpolation tolerance: {0}")]
    GridMismatch(String),
    #[error("bad parameters for case study {name}: {reason}")]
    BadParameters { name: String, reason: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
