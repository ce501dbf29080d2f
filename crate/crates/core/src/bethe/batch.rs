//! All targets of one sector at once.
//!
//! At node tuple `k` (indexed by label) the `sigma` term, with quadrature
//! weights absorbed, is
//!
//! ```text
//! c(X, pi) * E(k) * A_sigma(pi, nu)(xi(k)) * prod_j omega^{k_j x_{sigma^-1(j)}}
//! ```
//!
//! where `E(k) = prod_j xi_j^{-y_j} e^{t / xi_j} / M` and
//! `c = e^{-t sum b_nu} prod (r b_{pi(i)})^{x_i} prod b_{nu(i)}^{-y_i}`.
//! Relabelling axes by position, `q_i = k_{sigma(i)}`, turns the phase into
//! `prod_i omega^{q_i x_i}` for every `sigma`. So the `sigma` terms are summed
//! into one grid per species word `pi`, and a single unnormalized inverse DFT
//! of that grid, read at `x_i mod M`, serves every target with word `pi`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::log_prefactor;
use super::quadrature::{CircleRule, NdFft};
use crate::error::Result;
use crate::perm::enumerate_sn;
use crate::rmatrix::ColumnKernel;
use crate::sector::build_sector;
use crate::state::{ParticleState, RateTable};

/// Complex values held in accumulator grids at once.
const GRID_BUDGET: usize = 1 << 23;
/// Complex values of node terms buffered before scattering.
const SLAB_BUDGET: usize = 1 << 22;

/// The quadrature sum at a fixed node count `m` for every target. Targets
/// must share the initial state's multiset; no other filtering is done.
pub fn evaluate_batch(
    from: &ParticleState,
    targets: &[ParticleState],
    t: f64,
    rates: &RateTable,
    radius: f64,
    m: usize,
) -> Result<Vec<Complex64>> {
    let n = from.len();
    let sector = build_sector(&from.multiset())?;
    let group = enumerate_sn(n);
    let g = group.len();
    let dim = sector.len();
    let col = sector
        .index_of(&from.species)
        .expect("initial word lies in its own sector");

    // targets grouped by species-word row
    let mut by_row: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, target) in targets.iter().enumerate() {
        let row = sector
            .index_of(&target.species)
            .expect("target outside the initial sector");
        by_row.entry(row).or_default().push(i);
    }
    let mut rows: Vec<usize> = by_row.keys().copied().collect();
    rows.sort_unstable();

    let rule = CircleRule::new(radius, m);
    // per label j: xi_k^{-y_j} e^{t / xi_k} / M
    let node_factor: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            (0..m)
                .map(|k| {
                    rule.power(k, -from.positions[j]) * (t * rule.nodes[k].inv()).exp() / m as f64
                })
                .collect()
        })
        .collect();

    let grid_len = m.pow(n as u32);
    let inner = grid_len / m;
    // strides[s][j]: flat-index stride of label j once axes follow positions
    let strides: Vec<Vec<usize>> = group
        .elems()
        .iter()
        .map(|sigma| {
            sigma
                .inverse_image()
                .iter()
                .map(|&pos| m.pow((n - pos) as u32))
                .collect()
        })
        .collect();
    let fft = NdFft::new(m, n);
    let kernel = ColumnKernel::new(&group, &sector, rates.len());
    let mut sums = vec![Complex64::new(0.0, 0.0); targets.len()];

    let rows_per_pass = (GRID_BUDGET / grid_len).clamp(1, rows.len().max(1));
    for pass in rows.chunks(rows_per_pass) {
        let width = g * pass.len();
        let mut grids = vec![vec![Complex64::new(0.0, 0.0); grid_len]; pass.len()];
        let slab = (SLAB_BUDGET / (inner * width)).clamp(1, m);

        for start in (0..m).step_by(slab) {
            let leads = start..(start + slab).min(m);
            // terms[lead][(rest * g + s) * pass.len() + r]
            let terms: Vec<Vec<Complex64>> = leads
                .clone()
                .into_par_iter()
                .map(|lead| -> Result<Vec<Complex64>> {
                    let mut ks = vec![0usize; n];
                    let mut xi = vec![Complex64::new(0.0, 0.0); n];
                    let mut cols = vec![Complex64::new(0.0, 0.0); g * dim];
                    let mut scratch = kernel.scratch();
                    let mut out = Vec::with_capacity(inner * width);
                    for rest in 0..inner {
                        split_index(lead, rest, m, &mut ks);
                        let mut weight = Complex64::new(1.0, 0.0);
                        for j in 0..n {
                            xi[j] = rule.nodes[ks[j]];
                            weight *= node_factor[j][ks[j]];
                        }
                        kernel.columns_into(&xi, rates, col, &mut cols, &mut scratch)?;
                        for s in 0..g {
                            for &row in pass {
                                out.push(weight * cols[s * dim + row]);
                            }
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;

            grids.par_iter_mut().enumerate().for_each(|(r, grid)| {
                let mut ks = vec![0usize; n];
                for (lead, block) in leads.clone().zip(&terms) {
                    for rest in 0..inner {
                        split_index(lead, rest, m, &mut ks);
                        let base = rest * width;
                        for (s, stride) in strides.iter().enumerate() {
                            let q: usize = ks.iter().zip(stride).map(|(k, st)| k * st).sum();
                            grid[q] += block[base + s * pass.len() + r];
                        }
                    }
                }
            });
        }

        grids.par_iter_mut().for_each(|grid| fft.process(grid));

        for (grid, row) in grids.iter().zip(pass) {
            for &ti in &by_row[row] {
                let flat = targets[ti]
                    .positions
                    .iter()
                    .fold(0usize, |acc, &x| acc * m + x.rem_euclid(m as i64) as usize);
                sums[ti] = grid[flat];
            }
        }
    }

    Ok(targets
        .iter()
        .zip(sums)
        .map(|(target, sum)| {
            let log_c = log_prefactor(from, &target.positions, &target.species, t, rates, radius);
            sum * log_c.exp()
        })
        .collect())
}

/// Label-indexed node tuple from the leading index and the row-major rest.
#[inline]
fn split_index(lead: usize, rest: usize, m: usize, ks: &mut [usize]) {
    ks[0] = lead;
    let mut r = rest;
    for slot in (1..ks.len()).rev() {
        ks[slot] = r % m;
        r /= m;
    }
}
