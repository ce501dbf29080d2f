//! Transition probabilities from the contour-integral formula
//!
//! ```text
//! P_{(Y,nu)}(X,pi;t) = sum_{sigma in S_N} (1/2 pi i)^N \oint ... \oint
//!     e^{eps t} prod_i b_{pi(i)}^{x_i} A_sigma(pi,nu) prod_i b_{nu(i)}^{-y_i}
//!     prod_i xi_{sigma(i)}^{x_i - y_{sigma(i)} - 1}  dxi_1 ... dxi_N
//! ```
//!
//! with `eps = sum_k 1/xi_k - sum_k b_{pi(k)}`, every contour a circle of
//! radius below `1 / max_l b_l`.
//!
//! Each one-dimensional integral is replaced by the `M`-point trapezoidal
//! rule on the circle, which converges geometrically here: the amplitudes
//! are analytic out to `|xi| = 1/max b`, and the essential singularity at the
//! origin only contributes factorially small aliasing. `M` is doubled until
//! two successive values agree to `adapt_tol`.
//!
//! Two routes evaluate the same discrete sum. [`transition_probability`]
//! sums the tensor grid directly for a single target. [`transition_matrix`]
//! notices that the dependence on `X` is a plane wave in the node indices,
//! so one N-dimensional FFT per `(sigma, pi)` yields every target at once.

mod batch;
pub mod quadrature;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::{enumerate_sn, PermutationElem, SymmetricGroup};
use crate::rmatrix::{ColumnKernel, SectorMatrix, SpectralPoint};
use crate::sector::{build_sector, SectorIndex};
use crate::state::{validate_state, ParticleState, RateTable};

pub use batch::evaluate_batch;
use quadrature::{pairwise_sum, CircleRule};

/// Largest particle count evaluated without an explicit override.
pub const DEFAULT_MAX_PARTICLES: usize = 4;
/// Hard ceiling, reachable with `allow_large_n`.
pub const HARD_MAX_PARTICLES: usize = 6;
const MAX_EXP_ARGUMENT: f64 = 700.0;

/// Contour and quadrature settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParams {
    /// Common contour radius; must lie in `(0, 1 / max_l b_l)`.
    pub radius: f64,
    /// Starting number of nodes per contour (power of two, at least 4).
    pub nodes_per_dim: usize,
    /// Refinement stops once two successive levels differ by less.
    pub adapt_tol: f64,
    /// Largest node count per contour before giving up.
    pub max_nodes: usize,
    /// Permits `N` up to [`HARD_MAX_PARTICLES`].
    pub allow_large_n: bool,
}

impl SpectralParams {
    /// Defaults for `rates`: radius `0.5 / max_l b_l`, 32 starting nodes, and
    /// a node cap that shrinks with `N` since the grid has `M^N` points.
    pub fn for_rates(rates: &RateTable) -> Self {
        Self {
            radius: default_radius(rates),
            nodes_per_dim: 32,
            adapt_tol: 1e-10,
            max_nodes: default_max_nodes(rates.len()),
            allow_large_n: false,
        }
    }

    pub fn validate(&self, rates: &RateTable, t: f64) -> Result<()> {
        let limit = 1.0 / rates.max_rate();
        if !(self.radius > 0.0 && self.radius < limit) {
            return Err(Error::ContourInvalid {
                radius: self.radius,
                limit,
            });
        }
        if self.nodes_per_dim < 4 || !self.nodes_per_dim.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "nodes_per_dim = {} must be a power of two >= 4",
                self.nodes_per_dim
            )));
        }
        if self.max_nodes < self.nodes_per_dim || !self.max_nodes.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "max_nodes = {} must be a power of two >= nodes_per_dim",
                self.max_nodes
            )));
        }
        if self.adapt_tol.is_nan() || self.adapt_tol <= 0.0 {
            return Err(Error::InvalidParams("adapt_tol must be positive".into()));
        }
        let n = rates.len();
        let max = if self.allow_large_n {
            HARD_MAX_PARTICLES
        } else {
            DEFAULT_MAX_PARTICLES
        };
        if n > max {
            return Err(Error::UnsupportedSize { n, max });
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let ratio = t / self.radius;
        if ratio > MAX_EXP_ARGUMENT {
            return Err(Error::OverflowRisk { ratio });
        }
        Ok(())
    }
}

pub fn default_radius(rates: &RateTable) -> f64 {
    0.5 / rates.max_rate()
}

pub fn default_max_nodes(n: usize) -> usize {
    match n {
        0 | 1 => 4096,
        2 => 512,
        3 => 128,
        _ => 64,
    }
}

/// One computed transition probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityResult {
    /// Real part of `raw`; tiny negative values from quadrature noise are
    /// kept as computed.
    pub value: f64,
    pub raw: Complex64,
    /// Modulus of the change over the last refinement.
    pub est_error: f64,
    /// Nodes per contour at the accepted level (0 for exact zeros).
    pub nodes_used: usize,
}

impl ProbabilityResult {
    pub fn exact_zero() -> Self {
        Self {
            value: 0.0,
            raw: Complex64::new(0.0, 0.0),
            est_error: 0.0,
            nodes_used: 0,
        }
    }
}

/// `eps_{pi pi} = sum_k 1/xi_k - sum_k b_{pi(k)}`.
pub fn epsilon(word: &[usize], sp: &SpectralPoint, rates: &RateTable) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &z) in sp.as_slice().iter().enumerate() {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroSpectralValue { index: k + 1 });
        }
        acc += z.inv();
    }
    Ok(acc - rates.word_total(word))
}

/// The `sigma` term of the integrand at one spectral point, given
/// `A_sigma` on `sector`.
#[allow(clippy::too_many_arguments)]
pub fn integrand(
    sigma: &PermutationElem,
    sp: &SpectralPoint,
    from: &ParticleState,
    to: &ParticleState,
    t: f64,
    rates: &RateTable,
    sector: &SectorIndex,
    a_sigma: &SectorMatrix,
) -> Result<Complex64> {
    let (Some(row), Some(col)) = (sector.index_of(&to.species), sector.index_of(&from.species))
    else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let amp = a_sigma.get(row, col);
    if amp == Complex64::new(0.0, 0.0) {
        return Ok(amp);
    }
    let eps = epsilon(&to.species, sp, rates)?;
    let mut value = (eps * t).exp() * amp;
    for i in 0..to.len() {
        value *= rates.rate(to.species[i]).powi(to.positions[i] as i32);
        value *= rates.rate(from.species[i]).powi(-from.positions[i] as i32);
        let label = sigma.image[i];
        let e = to.positions[i] - from.positions[label - 1] - 1;
        value *= sp.get(label).powi(e as i32);
    }
    Ok(value)
}

/// Prefactor `e^{-t sum b_nu} prod b_{pi(i)}^{x_i} prod b_{nu(i)}^{-y_i}`,
/// with `r^{sum x}` folded in when `radius` is given.
pub(crate) fn log_prefactor(
    from: &ParticleState,
    to_positions: &[i64],
    to_species: &[usize],
    t: f64,
    rates: &RateTable,
    radius: f64,
) -> f64 {
    let mut log = -t * rates.word_total(&from.species);
    for i in 0..from.len() {
        log += to_positions[i] as f64 * (radius * rates.rate(to_species[i])).ln();
        log -= from.positions[i] as f64 * rates.rate(from.species[i]).ln();
    }
    log
}

/// Common input handling. `Ok(None)` means the transition is impossible
/// and the probability is exactly zero.
fn prepare(
    from: &ParticleState,
    to: &ParticleState,
    t: f64,
    rates: &RateTable,
    params: &SpectralParams,
) -> Result<bool> {
    validate_state(from, rates)?;
    validate_state(to, rates)?;
    params.validate(rates, t)?;
    Ok(is_possible(from, to))
}

/// Same species multiset and no particle left of where it started.
pub fn is_possible(from: &ParticleState, to: &ParticleState) -> bool {
    from.multiset() == to.multiset()
        && from
            .positions
            .iter()
            .zip(&to.positions)
            .all(|(y, x)| x >= y)
}

/// Direct tensor-grid sum at a fixed node count `m`, without any
/// short-circuits. Both states must have the same multiset.
pub fn evaluate_direct(
    from: &ParticleState,
    to: &ParticleState,
    t: f64,
    rates: &RateTable,
    radius: f64,
    m: usize,
) -> Result<Complex64> {
    let n = from.len();
    let sector = build_sector(&from.multiset())?;
    let group = enumerate_sn(n);
    direct_sum(&group, &sector, from, to, t, rates, radius, m)
}

#[allow(clippy::too_many_arguments)]
fn direct_sum(
    group: &SymmetricGroup,
    sector: &SectorIndex,
    from: &ParticleState,
    to: &ParticleState,
    t: f64,
    rates: &RateTable,
    radius: f64,
    m: usize,
) -> Result<Complex64> {
    let n = from.len();
    let dim = sector.len();
    let col = sector
        .index_of(&from.species)
        .expect("initial word lies in its own sector");
    let Some(row) = sector.index_of(&to.species) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let rule = CircleRule::new(radius, m);
    // node factor per label j: e^{t / xi} / M
    let exp_table: Vec<Complex64> = rule
        .nodes
        .iter()
        .map(|z| (t * z.inv()).exp() / m as f64)
        .collect();
    // pow_table[i][j][k] = xi_k^{x_i - y_j}, the weight xi_k absorbed
    let pow_table: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = to.positions[i] - from.positions[j];
                    (0..m).map(|k| rule.power(k, e)).collect()
                })
                .collect()
        })
        .collect();
    let inner = m.pow(n as u32 - 1);
    let kernel = ColumnKernel::new(group, sector, rates.len());

    let partials: Vec<Result<Complex64>> = (0..m)
        .into_par_iter()
        .map(|lead| {
            let mut ks = vec![0usize; n];
            let mut xi = vec![Complex64::new(0.0, 0.0); n];
            let mut cols = vec![Complex64::new(0.0, 0.0); group.len() * dim];
            let mut scratch = kernel.scratch();
            let mut values = Vec::with_capacity(inner);
            for rest in 0..inner {
                ks[0] = lead;
                let mut r = rest;
                for slot in (1..n).rev() {
                    ks[slot] = r % m;
                    r /= m;
                }
                let mut node = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    xi[j] = rule.nodes[ks[j]];
                    node *= exp_table[ks[j]];
                }
                kernel.columns_into(&xi, rates, col, &mut cols, &mut scratch)?;
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, sigma) in group.elems().iter().enumerate() {
                    let amp = cols[s * dim + row];
                    if amp == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut term = amp;
                    for i in 0..n {
                        let j = sigma.image[i] - 1;
                        term *= pow_table[i][j][ks[j]];
                    }
                    acc += term;
                }
                values.push(acc * node);
            }
            Ok(pairwise_sum(&values))
        })
        .collect();
    let partials = partials.into_iter().collect::<Result<Vec<_>>>()?;
    let log_c = log_prefactor(from, &to.positions, &to.species, t, rates, 1.0);
    Ok(pairwise_sum(&partials) * log_c.exp())
}

/// `P_{(Y,nu)}(X,pi;t)` for a single target, refining the node count until
/// two successive levels agree to `params.adapt_tol`.
pub fn transition_probability(
    from: &ParticleState,
    to: &ParticleState,
    t: f64,
    rates: &RateTable,
    params: &SpectralParams,
) -> Result<ProbabilityResult> {
    if !prepare(from, to, t, rates, params)? {
        return Ok(ProbabilityResult::exact_zero());
    }
    let sector = build_sector(&from.multiset())?;
    let group = enumerate_sn(from.len());
    let mut m = params.nodes_per_dim;
    let mut prev = direct_sum(&group, &sector, from, to, t, rates, params.radius, m)?;
    loop {
        let next_m = m * 2;
        if next_m > params.max_nodes {
            return Err(Error::NotConverged {
                nodes: m,
                delta: f64::NAN,
            });
        }
        let cur = direct_sum(&group, &sector, from, to, t, rates, params.radius, next_m)?;
        let delta = (cur - prev).norm();
        m = next_m;
        if delta < params.adapt_tol {
            return Ok(ProbabilityResult {
                value: cur.re,
                raw: cur,
                est_error: delta,
                nodes_used: m,
            });
        }
        if m * 2 > params.max_nodes {
            return Err(Error::NotConverged { nodes: m, delta });
        }
        prev = cur;
    }
}

/// Probabilities for many targets from one initial state. Targets outside
/// the initial sector, or with a particle left of its start, are exact
/// zeros. Refinement continues until every target has converged.
pub fn transition_matrix(
    from: &ParticleState,
    targets: &[ParticleState],
    t: f64,
    rates: &RateTable,
    params: &SpectralParams,
) -> Result<Vec<ProbabilityResult>> {
    validate_state(from, rates)?;
    params.validate(rates, t)?;
    for target in targets {
        validate_state(target, rates)?;
    }
    let live: Vec<usize> = (0..targets.len())
        .filter(|&i| is_possible(from, &targets[i]))
        .collect();
    let mut out = vec![ProbabilityResult::exact_zero(); targets.len()];
    if live.is_empty() {
        return Ok(out);
    }
    let live_targets: Vec<ParticleState> = live.iter().map(|&i| targets[i].clone()).collect();

    let mut m = params.nodes_per_dim;
    let mut prev = evaluate_batch(from, &live_targets, t, rates, params.radius, m)?;
    loop {
        let next_m = m * 2;
        if next_m > params.max_nodes {
            return Err(Error::NotConverged {
                nodes: m,
                delta: f64::NAN,
            });
        }
        let cur = evaluate_batch(from, &live_targets, t, rates, params.radius, next_m)?;
        let deltas: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).collect();
        let worst = deltas.iter().copied().fold(0.0, f64::max);
        m = next_m;
        if worst < params.adapt_tol {
            for ((&slot, value), delta) in live.iter().zip(cur).zip(deltas) {
                out[slot] = ProbabilityResult {
                    value: value.re,
                    raw: value,
                    est_error: delta,
                    nodes_used: m,
                };
            }
            return Ok(out);
        }
        if m * 2 > params.max_nodes {
            return Err(Error::NotConverged {
                nodes: m,
                delta: worst,
            });
        }
        prev = cur;
    }
}
