use num_complex::Complex64;

use crate::error::{PhaseError, Result};

/// Rectangular complex-valued grid, row-major. Holds objects, masks, frames,
/// composites — anything living on a 2-D pixel lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn new(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(PhaseError::DimensionMismatch(format!(
                "{}x{} grid needs {} entries, got {}",
                height,
                width,
                width * height,
                data.len()
            )));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PhaseError::InvalidParameter(
                "grid entries must be finite".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            width,
            height,
            data: vec![Complex64::new(0.0, 0.0); width * height],
        }
    }

    /// Build from a function of (row, col).
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.width + col] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|c| c * s)
    }

    /// Pointwise (Hadamard) product; dims must agree.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.width != other.width || self.height != other.height {
            return Err(PhaseError::DimensionMismatch(
                "hadamard product needs equal dims".into(),
            ));
        }
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| a * b)
                .collect(),
        })
    }

    /// Circular translation: out(r, c) = in((r - dr) mod h, (c - dc) mod w).
    pub fn translate(&self, dr: i64, dc: i64) -> Self {
        let h = self.height as i64;
        let w = self.width as i64;
        Self::from_fn(self.height, self.width, |r, c| {
            let sr = (r as i64 - dr).rem_euclid(h) as usize;
            let sc = (c as i64 - dc).rem_euclid(w) as usize;
            self.get(sr, sc)
        })
    }

    /// Twin image: out(n) = conj(in(-n mod dims)).
    pub fn conj_invert(&self) -> Self {
        let h = self.height as i64;
        let w = self.width as i64;
        Self::from_fn(self.height, self.width, |r, c| {
            let sr = (-(r as i64)).rem_euclid(h) as usize;
            let sc = (-(c as i64)).rem_euclid(w) as usize;
            self.get(sr, sc).conj()
        })
    }

    /// Coordinate reversal without conjugation: out(n) = in(-n mod dims).
    pub fn invert(&self) -> Self {
        let h = self.height as i64;
        let w = self.width as i64;
        Self::from_fn(self.height, self.width, |r, c| {
            let sr = (-(r as i64)).rem_euclid(h) as usize;
            let sc = (-(c as i64)).rem_euclid(w) as usize;
            self.get(sr, sc)
        })
    }
}

/// Transform-domain vector u ∈ ℂ^N.
pub type MeasurementVector = Vec<Complex64>;

/// Nonnegative amplitude data b = |Ax|, possibly noisy, with provenance tags.
#[derive(Debug, Clone)]
pub struct AmplitudeData {
    pub values: Vec<f64>,
    pub scheme_id: String,
    pub nsr: Option<f64>,
}

impl AmplitudeData {
    pub fn new(values: Vec<f64>, scheme_id: impl Into<String>) -> Result<Self> {
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(PhaseError::InvalidParameter(
                "amplitude data must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            values,
            scheme_id: scheme_id.into(),
            nsr: None,
        })
    }

    pub fn from_field(u: &[Complex64], scheme_id: impl Into<String>) -> Self {
        Self {
            values: u.iter().map(|c| c.norm()).collect(),
            scheme_id: scheme_id.into(),
            nsr: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
