use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate table is empty")]
    EmptyRates,
    #[error("rate b_{species} = {rate} is not strictly positive")]
    NonPositiveRate { species: usize, rate: f64 },
    #[error("state has {got} particles but the rate table declares {expected} species")]
    LengthMismatch { expected: usize, got: usize },
    #[error("positions are not strictly increasing: {0:?}")]
    NonIncreasingPositions(Vec<i64>),
    #[error("species label {label} outside 1..={max}")]
    SpeciesOutOfRange { label: usize, max: usize },
    #[error("spectral value xi_{index} is zero")]
    ZeroSpectralValue { index: usize },
    #[error("pole on contour: |1 - b_{species} xi| = {distance:e}")]
    PoleOnContour { species: usize, distance: f64 },
    #[error("contour radius {radius} must lie in (0, {limit}) (poles at 1/b_l)")]
    ContourInvalid { radius: f64, limit: f64 },
    #[error("t / radius = {ratio} exceeds 700; exp(t/xi) would overflow")]
    OverflowRisk { ratio: f64 },
    #[error("quadrature not converged at {nodes} nodes per contour (delta {delta:e})")]
    NotConverged { nodes: usize, delta: f64 },
    #[error("invalid spectral parameters: {0}")]
    InvalidParams(String),
    #[error("N = {n} exceeds the supported maximum of {max}")]
    UnsupportedSize { n: usize, max: usize },
    #[error("window [{lo}, {hi}] does not contain the initial state in its interior")]
    WindowTooSmall { lo: i64, hi: i64 },
    #[error("negative time {0}")]
    NegativeTime(f64),
}
