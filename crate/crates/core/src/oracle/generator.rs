use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::state::{validate_state, ParticleState, RateTable};

/// Enabled moves out of `state` on the infinite lattice, in particle order.
pub fn moves(state: &ParticleState, rates: &RateTable) -> Vec<(ParticleState, f64)> {
    let n = state.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let species = state.species[i];
        let rate = rates.rate(species);
        let adjacent = i + 1 < n && state.positions[i + 1] == state.positions[i] + 1;
        if !adjacent {
            let mut next = state.clone();
            next.positions[i] += 1;
            out.push((next, rate));
        } else if species > state.species[i + 1] {
            let mut next = state.clone();
            next.species.swap(i, i + 1);
            out.push((next, rate));
        }
    }
    out
}

/// `[lo, hi]` with `lo = min y` and room for the rightmost particle to move
/// `b_max t + 10 sqrt(b_max t) + 10` sites.
pub fn default_window(initial: &ParticleState, rates: &RateTable, t: f64) -> (i64, i64) {
    let lo = initial.positions[0];
    let mean = rates.max_rate() * t;
    let margin = (mean + 10.0 * mean.sqrt() + 10.0).ceil() as i64;
    let hi = *initial.positions.last().unwrap() + margin;
    (lo, hi)
}

/// Sparse generator on the states reachable from the initial state with
/// every position inside `[lo, hi]`. A hop past `hi` is recorded as leaked
/// mass: it appears on the diagonal but has no target state.
#[derive(Debug, Clone)]
pub struct GeneratorWindow {
    pub lo: i64,
    pub hi: i64,
    states: Vec<ParticleState>,
    index: HashMap<ParticleState, usize>,
    transitions: Vec<Vec<(usize, f64)>>,
    exit_rate: Vec<f64>,
    leak_rate: Vec<f64>,
}

impl GeneratorWindow {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ParticleState] {
        &self.states
    }

    pub fn index_of(&self, state: &ParticleState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Off-diagonal entries `Q(s, s') > 0` of row `s`.
    pub fn outgoing(&self, s: usize) -> &[(usize, f64)] {
        &self.transitions[s]
    }

    /// `Q(s, s)`.
    pub fn diagonal(&self, s: usize) -> f64 {
        -self.exit_rate[s]
    }

    pub fn leak_rate(&self, s: usize) -> f64 {
        self.leak_rate[s]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit_rate.iter().copied().fold(0.0, f64::max)
    }

    /// `sum_s' Q(s, s')`; zero except where mass leaves through `hi`.
    pub fn row_sum(&self, s: usize) -> f64 {
        self.transitions[s].iter().map(|&(_, q)| q).sum::<f64>() - self.exit_rate[s]
    }

    /// Row vector times generator, `p Q`: the right side of the forward
    /// equation.
    pub fn apply_forward(&self, p: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = p.iter().zip(&self.exit_rate).map(|(v, e)| -v * e).collect();
        for (s, row) in self.transitions.iter().enumerate() {
            for &(dst, q) in row {
                out[dst] += p[s] * q;
            }
        }
        out
    }
}

pub fn build_generator(
    initial: &ParticleState,
    rates: &RateTable,
    window: (i64, i64),
) -> Result<GeneratorWindow> {
    validate_state(initial, rates)?;
    let (lo, hi) = window;
    if initial.positions[0] < lo || *initial.positions.last().unwrap() >= hi {
        return Err(Error::WindowTooSmall { lo, hi });
    }
    let mut states = vec![initial.clone()];
    let mut index = HashMap::from([(initial.clone(), 0usize)]);
    let mut transitions = Vec::new();
    let mut exit_rate = Vec::new();
    let mut leak_rate = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    // BFS assigns indices in discovery order, so rows are filled in order
    while let Some(s) = queue.pop_front() {
        debug_assert_eq!(s, transitions.len());
        let mut row = Vec::new();
        let mut exit = 0.0;
        let mut leak = 0.0;
        for (next, rate) in moves(&states[s], rates) {
            exit += rate;
            if *next.positions.last().unwrap() > hi {
                leak += rate;
                continue;
            }
            let dst = match index.get(&next) {
                Some(&d) => d,
                None => {
                    let d = states.len();
                    index.insert(next.clone(), d);
                    states.push(next);
                    queue.push_back(d);
                    d
                }
            };
            row.push((dst, rate));
        }
        transitions.push(row);
        exit_rate.push(exit);
        leak_rate.push(leak);
    }
    Ok(GeneratorWindow {
        lo,
        hi,
        states,
        index,
        transitions,
        exit_rate,
        leak_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates() -> RateTable {
        RateTable::new(vec![1.0, 2.0]).unwrap()
    }

    fn out_rates(state: ParticleState) -> (Vec<(ParticleState, f64)>, f64) {
        let g = build_generator(&state, &rates(), (0, 10)).unwrap();
        let s = g.index_of(&state).unwrap();
        let row = g
            .outgoing(s)
            .iter()
            .map(|&(d, q)| (g.states()[d].clone(), q))
            .collect();
        (row, g.diagonal(s))
    }

    #[test]
    fn free_particles() {
        let (row, diag) = out_rates(ParticleState::new(vec![0, 2], vec![1, 2]));
        assert_eq!(
            row,
            vec![
                (ParticleState::new(vec![1, 2], vec![1, 2]), 1.0),
                (ParticleState::new(vec![0, 3], vec![1, 2]), 2.0),
            ]
        );
        assert_eq!(diag, -3.0);
    }

    #[test]
    fn higher_species_overtakes() {
        let (row, diag) = out_rates(ParticleState::new(vec![0, 1], vec![2, 1]));
        assert_eq!(
            row,
            vec![
                (ParticleState::new(vec![0, 1], vec![1, 2]), 2.0),
                (ParticleState::new(vec![0, 2], vec![2, 1]), 1.0),
            ]
        );
        assert_eq!(diag, -3.0);
    }

    #[test]
    fn lower_species_is_blocked() {
        let (row, diag) = out_rates(ParticleState::new(vec![0, 1], vec![1, 2]));
        assert_eq!(row, vec![(ParticleState::new(vec![0, 2], vec![1, 2]), 2.0)]);
        assert_eq!(diag, -2.0);
    }

    #[test]
    fn rows_conserve_mass_inside_window() {
        let rt = RateTable::new(vec![0.7, 1.3, 2.1]).unwrap();
        let init = ParticleState::new(vec![0, 1, 2], vec![3, 1, 2]);
        let g = build_generator(&init, &rt, (0, 8)).unwrap();
        for s in 0..g.len() {
            let state = &g.states()[s];
            assert_eq!(state.multiset(), vec![1, 2, 3]);
            if *state.positions.last().unwrap() < g.hi {
                assert_eq!(g.row_sum(s), 0.0);
                assert_eq!(g.leak_rate(s), 0.0);
            } else {
                assert!((g.row_sum(s) + g.leak_rate(s)).abs() < 1e-15);
            }
            for &(_, q) in g.outgoing(s) {
                assert!(q > 0.0);
            }
        }
    }

    #[test]
    fn window_must_contain_initial() {
        let init = ParticleState::new(vec![0, 5], vec![1, 2]);
        assert!(matches!(
            build_generator(&init, &rates(), (0, 5)),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(build_generator(&init, &rates(), (1, 9)).is_err());
    }

    #[test]
    fn default_window_margin() {
        let init = ParticleState::new(vec![0, 1], vec![1, 2]);
        // 2 + 10 sqrt(2) + 10 = 26.14 -> 27
        assert_eq!(default_window(&init, &rates(), 1.0), (0, 28));
    }
}
