use statrs::function::gamma::ln_gamma;

use super::generator::GeneratorWindow;
use crate::state::ParticleState;

/// Row of `e^{tQ}` for one initial state.
#[derive(Debug, Clone)]
pub struct Uniformized {
    /// Probabilities indexed like [`GeneratorWindow::states`].
    pub probs: Vec<f64>,
    /// Mass that left through the right edge of the window.
    pub leaked: f64,
    /// Poisson tail dropped by truncating the series.
    pub truncation: f64,
    pub steps: usize,
}

impl Uniformized {
    pub fn get(&self, window: &GeneratorWindow, state: &ParticleState) -> f64 {
        window.index_of(state).map_or(0.0, |i| self.probs[i])
    }
}

/// Uniformization: with `L >= max exit rate` and substochastic kernel
/// `K = I + Q / L`,
/// `e^{tQ} = sum_k Pois(k; L t) K^k`, truncated once the remaining Poisson
/// mass is below `tol`. Leaked mass is tracked as an absorbing extra state.
///
/// # Panics
///
/// Panics if `initial` is not a state of `window`.
pub fn matrix_exponential_row(
    window: &GeneratorWindow,
    initial: &ParticleState,
    t: f64,
    tol: f64,
) -> Uniformized {
    let start = window
        .index_of(initial)
        .expect("initial state is not in the window");
    let len = window.len();
    let mut probs = vec![0.0; len];
    let lambda_rate = window.max_exit_rate();
    if t == 0.0 || lambda_rate == 0.0 {
        probs[start] = 1.0;
        return Uniformized {
            probs,
            leaked: 0.0,
            truncation: 0.0,
            steps: 0,
        };
    }
    let lambda = lambda_rate * t;
    let ln_lambda = lambda.ln();
    let weight = |k: usize| (-lambda + k as f64 * ln_lambda - ln_gamma(k as f64 + 1.0)).exp();

    let mut v = vec![0.0; len];
    v[start] = 1.0;
    let mut killed = 0.0;
    let mut next = vec![0.0; len];
    let mut leaked = 0.0;
    let mut cumulative = 0.0;
    let mut k = 0usize;
    loop {
        let w = weight(k);
        cumulative += w;
        for (p, x) in probs.iter_mut().zip(&v) {
            *p += w * x;
        }
        leaked += w * killed;
        if 1.0 - cumulative < tol && k as f64 >= lambda {
            break;
        }
        // v <- v K
        for s in 0..len {
            next[s] = v[s] * (1.0 + window.diagonal(s) / lambda_rate);
        }
        for s in 0..len {
            if v[s] == 0.0 {
                continue;
            }
            for &(dst, q) in window.outgoing(s) {
                next[dst] += v[s] * q / lambda_rate;
            }
            killed += v[s] * window.leak_rate(s) / lambda_rate;
        }
        std::mem::swap(&mut v, &mut next);
        k += 1;
    }
    Uniformized {
        probs,
        leaked,
        truncation: (1.0 - cumulative).max(0.0),
        steps: k,
    }
}
