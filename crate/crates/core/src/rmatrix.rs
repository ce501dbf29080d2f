//! Two-particle scattering amplitudes, the R-matrix, its embedding into the
//! N-slot word space, and the Bethe amplitude matrices `A_sigma`.
//!
//! `R_{beta alpha}` acts on a pair of adjacent slots holding species `(i, j)`:
//!
//! ```text
//! (ij, ij) = S(i)   if i <= j
//! (ij, ij) = -1     if i >  j
//! (ij, ji) = T(i)   if i <  j
//! ```
//!
//! with `S(i) = -(1 - b_i xi_beta) / (1 - b_i xi_alpha)` and
//! `T(i) = b_i (xi_beta - xi_alpha) / (1 - b_i xi_alpha)`.
//!
//! Operators are never materialized as `N^N x N^N` matrices. A
//! [`SlotOperator`] has at most two nonzeros per row and is applied directly
//! to vectors and dense sector matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::perm::SymmetricGroup;
use crate::sector::WordBasis;
use crate::state::RateTable;

const POLE_THRESHOLD: f64 = 1e-13;

/// Spectral parameters `xi_1..xi_N`, addressed by 1-based label.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    xi: Vec<Complex64>,
}

impl SpectralPoint {
    pub fn new(xi: Vec<Complex64>) -> Result<Self> {
        if let Some(k) = xi.iter().position(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(Error::ZeroSpectralValue { index: k + 1 });
        }
        Ok(Self { xi })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    #[inline]
    pub fn get(&self, label: usize) -> Complex64 {
        self.xi[label - 1]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.xi
    }

    /// Checks that every `|xi_k|` lies strictly inside the circle
    /// `|xi| < 1 / max_l b_l`, where all amplitude poles sit outside.
    pub fn check_contour(&self, rates: &RateTable) -> Result<()> {
        let limit = 1.0 / rates.max_rate();
        for z in &self.xi {
            if z.norm() >= limit {
                return Err(Error::ContourInvalid {
                    radius: z.norm(),
                    limit,
                });
            }
        }
        Ok(())
    }
}

#[inline]
fn pole_denominator(species: usize, xi_alpha: Complex64, rates: &RateTable) -> Result<Complex64> {
    let b = rates.rate(species);
    let d = 1.0 - b * xi_alpha;
    let distance = d.norm();
    if distance < POLE_THRESHOLD * b.max(1.0) {
        return Err(Error::PoleOnContour { species, distance });
    }
    Ok(d)
}

/// Pass-through amplitude `S_{beta alpha}(i)`.
pub fn amplitude_s(
    species: usize,
    xi_beta: Complex64,
    xi_alpha: Complex64,
    rates: &RateTable,
) -> Result<Complex64> {
    let d = pole_denominator(species, xi_alpha, rates)?;
    Ok(-(1.0 - rates.rate(species) * xi_beta) / d)
}

/// Exchange amplitude `T_{beta alpha}(i)`.
pub fn amplitude_t(
    species: usize,
    xi_beta: Complex64,
    xi_alpha: Complex64,
    rates: &RateTable,
) -> Result<Complex64> {
    let d = pole_denominator(species, xi_alpha, rates)?;
    Ok(rates.rate(species) * (xi_beta - xi_alpha) / d)
}

/// `S` and `T` for every species, for one ordered label pair `(beta, alpha)`.
#[derive(Debug, Clone)]
pub struct PairAmplitudes {
    s: Vec<Complex64>,
    t: Vec<Complex64>,
}

impl PairAmplitudes {
    pub fn new(beta: usize, alpha: usize, sp: &SpectralPoint, rates: &RateTable) -> Result<Self> {
        Self::from_values(sp.get(beta), sp.get(alpha), rates)
    }

    pub fn from_values(xi_beta: Complex64, xi_alpha: Complex64, rates: &RateTable) -> Result<Self> {
        let n = rates.len();
        let mut s = Vec::with_capacity(n);
        let mut t = Vec::with_capacity(n);
        for species in 1..=n {
            let d = pole_denominator(species, xi_alpha, rates)?;
            let b = rates.rate(species);
            s.push(-(1.0 - b * xi_beta) / d);
            t.push(b * (xi_beta - xi_alpha) / d);
        }
        Ok(Self { s, t })
    }

    #[inline]
    pub fn s(&self, species: usize) -> Complex64 {
        self.s[species - 1]
    }

    #[inline]
    pub fn t(&self, species: usize) -> Complex64 {
        self.t[species - 1]
    }
}

/// Dense square complex matrix on a word basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl SectorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for z in &mut self.entries {
            *z *= factor;
        }
    }

    pub fn matmul(&self, rhs: &SectorMatrix) -> SectorMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = SectorMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &SectorMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `T_l(beta, alpha)`: identity on every slot except `(l, l+1)`, where
/// `R_{beta alpha}` acts.
#[derive(Debug, Clone)]
pub struct SlotOperator<'a> {
    slot: usize,
    amps: PairAmplitudes,
    basis: &'a WordBasis,
}

impl<'a> SlotOperator<'a> {
    /// `slot` is 1-based, `1 <= slot < word length`.
    pub fn new(slot: usize, amps: PairAmplitudes, basis: &'a WordBasis) -> Self {
        assert!(
            slot >= 1 && slot < basis.word_len(),
            "slot {slot} out of range for words of length {}",
            basis.word_len()
        );
        Self { slot, amps, basis }
    }

    pub fn for_labels(
        slot: usize,
        beta: usize,
        alpha: usize,
        sp: &SpectralPoint,
        rates: &RateTable,
        basis: &'a WordBasis,
    ) -> Result<Self> {
        Ok(Self::new(
            slot,
            PairAmplitudes::new(beta, alpha, sp, rates)?,
            basis,
        ))
    }

    /// The (at most two) nonzeros of row `w`: `(diagonal, Some((col, value)))`.
    #[inline]
    fn row_entries(&self, w: usize) -> (Complex64, Option<(usize, Complex64)>) {
        let word = self.basis.word(w);
        let (i, j) = (word[self.slot - 1], word[self.slot]);
        if i < j {
            let partner = self
                .basis
                .swapped(self.slot - 1, w)
                .expect("word basis is not closed under slot swaps");
            (self.amps.s(i), Some((partner, self.amps.t(i))))
        } else if i == j {
            (self.amps.s(i), None)
        } else {
            (Complex64::new(-1.0, 0.0), None)
        }
    }

    /// `out = T_l v`.
    pub fn apply_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (w, o) in out.iter_mut().enumerate() {
            let (diag, off) = self.row_entries(w);
            let mut acc = diag * v[w];
            if let Some((c, val)) = off {
                acc += val * v[c];
            }
            *o = acc;
        }
    }

    /// `T_l M`.
    pub fn apply_left(&self, m: &SectorMatrix) -> SectorMatrix {
        let n = m.dim;
        let mut out = SectorMatrix::zeros(n);
        for w in 0..n {
            let (diag, off) = self.row_entries(w);
            let dst = &mut out.entries[w * n..(w + 1) * n];
            for (d, s) in dst.iter_mut().zip(&m.entries[w * n..(w + 1) * n]) {
                *d = diag * s;
            }
            if let Some((c, val)) = off {
                for (d, s) in dst.iter_mut().zip(&m.entries[c * n..(c + 1) * n]) {
                    *d += val * s;
                }
            }
        }
        out
    }

    pub fn to_matrix(&self) -> SectorMatrix {
        let n = self.basis.len();
        let mut out = SectorMatrix::zeros(n);
        for w in 0..n {
            let (diag, off) = self.row_entries(w);
            out.set(w, w, diag);
            if let Some((c, val)) = off {
                out.set(w, c, val);
            }
        }
        out
    }
}

/// `R_{beta alpha}` restricted to a basis of two-letter words.
pub fn build_r(
    beta: usize,
    alpha: usize,
    sp: &SpectralPoint,
    rates: &RateTable,
    pair_sector: &WordBasis,
) -> Result<SectorMatrix> {
    assert_eq!(pair_sector.word_len(), 2, "R acts on two-letter words");
    embed_t(1, beta, alpha, sp, rates, pair_sector)
}

/// Dense form of `T_l(beta, alpha)` on `basis`.
pub fn embed_t(
    slot: usize,
    beta: usize,
    alpha: usize,
    sp: &SpectralPoint,
    rates: &RateTable,
    basis: &WordBasis,
) -> Result<SectorMatrix> {
    Ok(SlotOperator::for_labels(slot, beta, alpha, sp, rates, basis)?.to_matrix())
}

/// Product of slot operators along an explicit word of slots applied to the
/// identity permutation, with labels read off the running permutation: a
/// swap at slot `l` of `(.. alpha beta ..)` contributes `T_l(beta, alpha)`.
pub fn a_from_word(
    slots: &[usize],
    sp: &SpectralPoint,
    rates: &RateTable,
    basis: &WordBasis,
) -> Result<SectorMatrix> {
    let mut perm: Vec<usize> = (1..=basis.word_len()).collect();
    let mut a = SectorMatrix::identity(basis.len());
    for &slot in slots {
        let (alpha, beta) = (perm[slot - 1], perm[slot]);
        a = SlotOperator::for_labels(slot, beta, alpha, sp, rates, basis)?.apply_left(&a);
        perm.swap(slot - 1, slot);
    }
    Ok(a)
}

/// `A_sigma` for element `index` of `group`, following its canonical chain.
pub fn build_a_sigma(
    group: &SymmetricGroup,
    index: usize,
    sp: &SpectralPoint,
    rates: &RateTable,
    basis: &WordBasis,
) -> Result<SectorMatrix> {
    a_from_word(&group.reduced_word(index), sp, rates, basis)
}

/// All `A_sigma` at one spectral point, built along the breadth-first links
/// so each costs a single slot application.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    mats: Vec<SectorMatrix>,
}

impl AmplitudeTable {
    pub fn new(
        group: &SymmetricGroup,
        sp: &SpectralPoint,
        rates: &RateTable,
        basis: &WordBasis,
    ) -> Result<Self> {
        let mut mats: Vec<SectorMatrix> = Vec::with_capacity(group.len());
        mats.push(SectorMatrix::identity(basis.len()));
        for idx in 1..group.len() {
            let link = group.link(idx).expect("non-identity element has a link");
            let pred = group.elem(link.pred);
            let alpha = pred.apply(link.slot);
            let beta = pred.apply(link.slot + 1);
            let op = SlotOperator::for_labels(link.slot, beta, alpha, sp, rates, basis)?;
            let next = op.apply_left(&mats[link.pred]);
            mats.push(next);
        }
        Ok(Self { mats })
    }

    pub fn get(&self, index: usize) -> &SectorMatrix {
        &self.mats[index]
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }
}

/// Column `col` of every `A_sigma`, in group order, written into `out`
/// (`group.len() * basis.len()` entries, one contiguous column per element).
///
/// `xi` holds the spectral values by 0-based label. Convenience wrapper
/// around [`ColumnKernel`]; loops over many nodes should build the kernel
/// once.
pub fn amplitude_columns_into(
    group: &SymmetricGroup,
    xi: &[Complex64],
    rates: &RateTable,
    basis: &WordBasis,
    col: usize,
    out: &mut [Complex64],
) -> Result<()> {
    let kernel = ColumnKernel::new(group, basis, rates.len());
    let mut scratch = kernel.scratch();
    kernel.columns_into(xi, rates, col, out, &mut scratch)
}

#[derive(Debug, Clone, Copy)]
enum RowKind {
    /// `i < j`: `S(i)` on the diagonal, `T(i)` against the swapped word.
    Exchange { species: usize, partner: usize },
    /// `i == j`: `S(i)` only.
    Pass { species: usize },
    /// `i > j`: `-1`.
    Block,
}

/// The quadrature hot path: all `A_sigma` columns at one node, with the
/// sparsity pattern of every slot operator and the breadth-first links
/// precomputed. Nothing is allocated per node.
#[derive(Debug, Clone)]
pub struct ColumnKernel {
    labels: usize,
    species: usize,
    dim: usize,
    elems: usize,
    /// `plans[slot - 1][w]`
    plans: Vec<Vec<RowKind>>,
    /// `(pred, slot, beta, alpha)` per non-identity element
    links: Vec<(usize, usize, usize, usize)>,
}

impl ColumnKernel {
    pub fn new(group: &SymmetricGroup, basis: &WordBasis, species: usize) -> Self {
        let n = basis.word_len();
        let plans = (1..n)
            .map(|slot| {
                (0..basis.len())
                    .map(|w| {
                        let word = basis.word(w);
                        let (i, j) = (word[slot - 1], word[slot]);
                        if i < j {
                            let partner = basis
                                .swapped(slot - 1, w)
                                .expect("word basis is not closed under slot swaps");
                            RowKind::Exchange {
                                species: i,
                                partner,
                            }
                        } else if i == j {
                            RowKind::Pass { species: i }
                        } else {
                            RowKind::Block
                        }
                    })
                    .collect()
            })
            .collect();
        let links = (1..group.len())
            .map(|idx| {
                let link = group.link(idx).expect("non-identity element has a link");
                let pred = group.elem(link.pred);
                (
                    link.pred,
                    link.slot,
                    pred.apply(link.slot + 1),
                    pred.apply(link.slot),
                )
            })
            .collect();
        Self {
            labels: group.degree(),
            species,
            dim: basis.len(),
            elems: group.len(),
            plans,
            links,
        }
    }

    /// Buffer for the per-node `S` and `T` tables.
    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); 2 * self.labels * self.labels * self.species]
    }

    #[inline]
    fn amp_index(&self, beta: usize, alpha: usize, species: usize) -> usize {
        2 * (((beta - 1) * self.labels + alpha - 1) * self.species + species - 1)
    }

    pub fn columns_into(
        &self,
        xi: &[Complex64],
        rates: &RateTable,
        col: usize,
        out: &mut [Complex64],
        scratch: &mut [Complex64],
    ) -> Result<()> {
        let dim = self.dim;
        debug_assert_eq!(out.len(), self.elems * dim);
        for alpha in 1..=self.labels {
            for species in 1..=self.species {
                let d = pole_denominator(species, xi[alpha - 1], rates)?;
                let inv = d.inv();
                let b = rates.rate(species);
                for beta in (1..=self.labels).filter(|&beta| beta != alpha) {
                    let k = self.amp_index(beta, alpha, species);
                    scratch[k] = -(1.0 - b * xi[beta - 1]) * inv;
                    scratch[k + 1] = b * (xi[beta - 1] - xi[alpha - 1]) * inv;
                }
            }
        }
        out[..dim].fill(Complex64::new(0.0, 0.0));
        out[col] = Complex64::new(1.0, 0.0);
        for (idx, &(pred, slot, beta, alpha)) in self.links.iter().enumerate() {
            let (done, rest) = out.split_at_mut((idx + 1) * dim);
            let src = &done[pred * dim..(pred + 1) * dim];
            let dst = &mut rest[..dim];
            for (w, (o, kind)) in dst.iter_mut().zip(&self.plans[slot - 1]).enumerate() {
                *o = match *kind {
                    RowKind::Exchange { species, partner } => {
                        let k = self.amp_index(beta, alpha, species);
                        scratch[k] * src[w] + scratch[k + 1] * src[partner]
                    }
                    RowKind::Pass { species } => {
                        scratch[self.amp_index(beta, alpha, species)] * src[w]
                    }
                    RowKind::Block => -src[w],
                };
            }
        }
        Ok(())
    }
}

/// Maximum residuals of the three consistency relations over every sector.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConsistencyReport {
    /// `T_i(b,a) T_j(d,c) = T_j(d,c) T_i(b,a)` for `|i - j| >= 2`.
    pub commutation: Option<f64>,
    /// `T_i(g,b) T_j(g,a) T_i(b,a) = T_j(b,a) T_i(g,a) T_j(g,b)` for `j = i + 1`.
    pub yang_baxter: Option<f64>,
    /// `T_i(b,a) T_i(a,b) = I`.
    pub inverse: Option<f64>,
}

impl ConsistencyReport {
    pub fn max(&self) -> f64 {
        [self.commutation, self.yang_baxter, self.inverse]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Applies a product of slot operators, rightmost factor first, to the
/// identity. Factors are `(slot, beta, alpha)`.
fn product(
    factors: &[(usize, usize, usize)],
    sp: &SpectralPoint,
    rates: &RateTable,
    basis: &WordBasis,
) -> Result<SectorMatrix> {
    let mut m = SectorMatrix::identity(basis.len());
    for &(slot, beta, alpha) in factors.iter().rev() {
        m = SlotOperator::for_labels(slot, beta, alpha, sp, rates, basis)?.apply_left(&m);
    }
    Ok(m)
}

/// Evaluates both sides of each consistency relation on the given bases and
/// returns the largest entrywise deviation per relation. Labels range over
/// all admissible choices from `1..=sp.len()`.
pub fn check_consistency_on(
    sp: &SpectralPoint,
    rates: &RateTable,
    bases: &[WordBasis],
) -> Result<ConsistencyReport> {
    let labels = sp.len();
    let mut report = ConsistencyReport::default();
    let bump = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.unwrap_or(0.0).max(v));
    for basis in bases {
        let n = basis.word_len();
        let slots = 1..n;
        for i in slots.clone() {
            for a in 1..=labels {
                for b in (1..=labels).filter(|&b| b != a) {
                    let lhs = product(&[(i, b, a), (i, a, b)], sp, rates, basis)?;
                    let id = SectorMatrix::identity(basis.len());
                    bump(&mut report.inverse, lhs.max_abs_diff(&id));

                    for j in slots.clone() {
                        if i.abs_diff(j) >= 2 {
                            for c in 1..=labels {
                                for d in (1..=labels).filter(|&d| d != c) {
                                    let l = product(&[(i, b, a), (j, d, c)], sp, rates, basis)?;
                                    let r = product(&[(j, d, c), (i, b, a)], sp, rates, basis)?;
                                    bump(&mut report.commutation, l.max_abs_diff(&r));
                                }
                            }
                        }
                        // the mirrored ordering j = i - 1 is not an identity:
                        // its labels do not arise from any pair of reduced words
                        if j == i + 1 {
                            for g in (1..=labels).filter(|&g| g != a && g != b) {
                                let l =
                                    product(&[(i, g, b), (j, g, a), (i, b, a)], sp, rates, basis)?;
                                let r =
                                    product(&[(j, b, a), (i, g, a), (j, g, b)], sp, rates, basis)?;
                                bump(&mut report.yang_baxter, l.max_abs_diff(&r));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// [`check_consistency_on`] over every species sector of `{1..n}^n`.
pub fn check_consistency(
    sp: &SpectralPoint,
    rates: &RateTable,
    n: usize,
) -> Result<ConsistencyReport> {
    let bases: Vec<WordBasis> = crate::sector::all_multisets(n)
        .iter()
        .map(|m| {
            crate::sector::build_sector(m)
                .expect("multisets of 1..n are valid")
                .basis()
                .clone()
        })
        .collect();
    check_consistency_on(sp, rates, &bases)
}
