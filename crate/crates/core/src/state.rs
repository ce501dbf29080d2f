//! Rates and particle configurations.

use std::fmt;

use crate::error::{Error, Result};

/// Jump rates `b_1..b_N`, indexed by species label (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    rates: Vec<f64>,
}

impl RateTable {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyRates);
        }
        for (i, &b) in rates.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::NonPositiveRate {
                    species: i + 1,
                    rate: b,
                });
            }
        }
        Ok(Self { rates })
    }

    /// Number of species, which is also the particle count.
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Rate of species `label` (1-based).
    #[inline]
    pub fn rate(&self, label: usize) -> f64 {
        self.rates[label - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Sum of the rates carried by the particles of `word`.
    pub fn word_total(&self, word: &[usize]) -> f64 {
        word.iter().map(|&l| self.rate(l)).sum()
    }
}

/// Positions `x_1 < ... < x_N` and the species word `pi`, where `pi[i]` is
/// the species of the i-th particle from the left.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleState {
    pub positions: Vec<i64>,
    pub species: Vec<usize>,
}

impl ParticleState {
    pub fn new(positions: Vec<i64>, species: Vec<usize>) -> Self {
        Self { positions, species }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Sorted species multiset, i.e. the sector label.
    pub fn multiset(&self) -> Vec<usize> {
        let mut m = self.species.clone();
        m.sort_unstable();
        m
    }
}

impl fmt::Display for ParticleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.positions.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "; ")?;
        for (i, s) in self.species.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// Checks exclusion and species range for `state` against `rates`.
pub fn validate_state(state: &ParticleState, rates: &RateTable) -> Result<()> {
    let n = rates.len();
    if state.positions.len() != n || state.species.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: state.positions.len().max(state.species.len()),
        });
    }
    if state.positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingPositions(state.positions.clone()));
    }
    if let Some(&label) = state.species.iter().find(|&&l| l == 0 || l > n) {
        return Err(Error::SpeciesOutOfRange { label, max: n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> RateTable {
        RateTable::new(vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn valid_state_passes() {
        let s = ParticleState::new(vec![0, 1], vec![1, 2]);
        assert_eq!(validate_state(&s, &two()), Ok(()));
    }

    #[test]
    fn exclusion_violation() {
        let s = ParticleState::new(vec![1, 1], vec![1, 2]);
        assert!(matches!(
            validate_state(&s, &two()),
            Err(Error::NonIncreasingPositions(_))
        ));
    }

    #[test]
    fn species_out_of_range() {
        let s = ParticleState::new(vec![0, 5], vec![3, 1]);
        assert_eq!(
            validate_state(&s, &two()),
            Err(Error::SpeciesOutOfRange { label: 3, max: 2 })
        );
        let z = ParticleState::new(vec![0, 5], vec![0, 1]);
        assert!(validate_state(&z, &two()).is_err());
    }

    #[test]
    fn rate_table_rejects_bad_rates() {
        assert_eq!(RateTable::new(vec![]), Err(Error::EmptyRates));
        assert!(RateTable::new(vec![1.0, 0.0]).is_err());
        assert!(RateTable::new(vec![1.0, -2.0]).is_err());
        assert!(RateTable::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn length_mismatch() {
        let s = ParticleState::new(vec![0, 1, 2], vec![1, 2, 1]);
        assert!(matches!(
            validate_state(&s, &two()),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
