//! Trapezoidal rule on circles and the small numerical kernels shared by the
//! two evaluation routes.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// `M` equispaced nodes `r e^{2 pi i k / M}` on a circle about the origin.
/// With weight `xi_k / M` the rule approximates `(1 / 2 pi i) \oint f dxi`.
#[derive(Debug, Clone)]
pub struct CircleRule {
    pub radius: f64,
    pub nodes: Vec<Complex64>,
}

impl CircleRule {
    pub fn new(radius: f64, m: usize) -> Self {
        let nodes = (0..m)
            .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Self { radius, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `xi_k^e`, computed in polar form so large exponents stay accurate.
    #[inline]
    pub fn power(&self, k: usize, e: i64) -> Complex64 {
        let m = self.nodes.len() as i64;
        let phase = 2.0 * PI * ((k as i64 * e).rem_euclid(m)) as f64 / m as f64;
        Complex64::from_polar(self.radius.powi(e as i32), phase)
    }
}

/// Sum in a fixed binary-tree order, independent of how the slice was
/// produced.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Unnormalized N-dimensional DFT with kernel `e^{+2 pi i k n / M}` on a
/// row-major `[M; dims]` array, in place.
pub struct NdFft {
    m: usize,
    dims: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl NdFft {
    pub fn new(m: usize, dims: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(m);
        Self { m, dims, fft }
    }

    pub fn process(&self, data: &mut [Complex64]) {
        let m = self.m;
        debug_assert_eq!(data.len(), m.pow(self.dims as u32));
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..self.dims {
            let stride = m.pow((self.dims - 1 - axis) as u32);
            if stride == 1 {
                self.fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            for block in data.chunks_mut(m * stride) {
                for offset in 0..stride {
                    for (q, z) in line.iter_mut().enumerate() {
                        *z = block[offset + q * stride];
                    }
                    self.fft.process_with_scratch(&mut line, &mut scratch);
                    for (q, z) in line.iter().enumerate() {
                        block[offset + q * stride] = *z;
                    }
                }
            }
        }
    }
}
