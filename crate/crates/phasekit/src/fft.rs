use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached 2-D FFT of fixed dims (height rows × width cols), row-major buffers.
/// Forward kernel is e^{-2πi n·ω}; inverse applies the 1/(w·h) factor.
pub struct Fft2 {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.width * self.height);
        let row = if inverse { &self.row_inv } else { &self.row_fwd };
        let col = if inverse { &self.col_inv } else { &self.col_fwd };
        row.process(data);
        // Columns: transpose, transform rows, transpose back.
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                t[c * self.height + r] = data[r * self.width + c];
            }
        }
        col.process(&mut t);
        for c in 0..self.width {
            for r in 0..self.height {
                data[r * self.width + c] = t[c * self.height + r];
            }
        }
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform including the 1/(w·h) factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let s = 1.0 / (self.width * self.height) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}
