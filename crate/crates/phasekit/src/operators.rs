use num_complex::Complex64;

use crate::error::{PhaseError, Result};
use crate::fft::Fft2;
use crate::grid::ComplexImage;
use crate::metrics::sgn1;

/// Linear measurement map x ↦ Ax with adjoint and pseudo-inverse access.
/// Object vectors are row-major flattenings of the underlying grid.
pub trait MeasurementOperator: Sync {
    fn object_len(&self) -> usize;
    fn data_len(&self) -> usize;
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn adjoint(&self, u: &[Complex64]) -> Vec<Complex64>;
    /// A⁺u. Defaults to the adjoint, which is exact for isometric operators.
    fn pseudo_inverse(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.adjoint(u)
    }
    fn is_isometric(&self) -> bool {
        true
    }
    /// Σ_k ‖a_k‖² = tr(A*A). Equals the object length for isometries.
    fn frobenius_norm_sqr(&self) -> f64 {
        self.object_len() as f64
    }
}

/// P_X u = A A⁺ u, the orthogonal projection onto range(A).
pub fn project_range<Op: MeasurementOperator + ?Sized>(op: &Op, u: &[Complex64]) -> Vec<Complex64> {
    op.forward(&op.pseudo_inverse(u))
}

/// P_Y u = b ⊙ sgn(u), the nearest point on the magnitude torus.
pub fn project_data(b: &[f64], u: &[Complex64]) -> Vec<Complex64> {
    b.iter().zip(u.iter()).map(|(&bv, &c)| bv * sgn1(c)).collect()
}

/// R_X u = 2 P_X u − u.
pub fn reflect_range<Op: MeasurementOperator + ?Sized>(op: &Op, u: &[Complex64]) -> Vec<Complex64> {
    let p = project_range(op, u);
    p.iter().zip(u.iter()).map(|(&pv, &uv)| 2.0 * pv - uv).collect()
}

/// R_Y u = 2 P_Y u − u.
pub fn reflect_data(b: &[f64], u: &[Complex64]) -> Vec<Complex64> {
    b.iter()
        .zip(u.iter())
        .map(|(&bv, &c)| 2.0 * bv * sgn1(c) - c)
        .collect()
}

/// Oversampled DFT: samples Σ_n f(n) e^{-2πi n·ω} on the (2M₁+1)×(2M₂+1)
/// frequency grid (zero-padded FFT), row-major, unnormalized.
pub fn oversampled_dft(f: &ComplexImage) -> Vec<Complex64> {
    let (gh, gw) = (2 * f.height() - 1, 2 * f.width() - 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); gh * gw];
    for r in 0..f.height() {
        for c in 0..f.width() {
            buf[r * gw + c] = f.get(r, c);
        }
    }
    Fft2::new(gh, gw).forward(&mut buf);
    buf
}

/// Isometric variant: oversampled_dft scaled by 1/√((2M₁+1)(2M₂+1)).
pub fn oversampled_dft_normalized(f: &ComplexImage) -> Vec<Complex64> {
    let s = 1.0 / (((2 * f.height() - 1) * (2 * f.width() - 1)) as f64).sqrt();
    oversampled_dft(f).into_iter().map(|c| c * s).collect()
}

/// Stacked coded diffraction patterns: A = c · [Φ diag(μ₁); …; Φ diag(μ_L)]
/// with Φ either the oversampled DFT on the (2M+1) grid or the plain
/// object-sized DFT ("standard" patterns). c makes A an isometry.
pub struct CodedDiffractionOperator {
    height: usize,
    width: usize,
    masks: Vec<ComplexImage>,
    oversampled: bool,
    frame_h: usize,
    frame_w: usize,
    normalization: f64,
    fft: Fft2,
}

impl CodedDiffractionOperator {
    pub fn new(masks: Vec<ComplexImage>, oversampled: bool) -> Result<Self> {
        if masks.is_empty() {
            return Err(PhaseError::InvalidParameter("need at least one mask".into()));
        }
        let (h, w) = (masks[0].height(), masks[0].width());
        if masks.iter().any(|m| m.height() != h || m.width() != w) {
            return Err(PhaseError::DimensionMismatch("masks must share dims".into()));
        }
        let (fh, fw) = if oversampled { (2 * h - 1, 2 * w - 1) } else { (h, w) };
        let normalization = 1.0 / ((masks.len() * fh * fw) as f64).sqrt();
        let op = Self {
            height: h,
            width: w,
            masks,
            oversampled,
            frame_h: fh,
            frame_w: fw,
            normalization,
            fft: Fft2::new(fh, fw),
        };
        op.verify_isometry()?;
        Ok(op)
    }

    /// A*A = I check on a deterministic probe vector, run at construction.
    fn verify_isometry(&self) -> Result<()> {
        let n = self.object_len();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
        let rt = self.adjoint(&self.forward(&x));
        let err: f64 = rt
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let nx = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if err > 1e-10 * nx.max(1.0) {
            return Err(PhaseError::InvalidParameter(format!(
                "operator is not isometric (‖A*Ax − x‖ = {:.3e}); masks must be unit-modulus — \
                 use substitute_modulus for non-uniform masks",
                err
            )));
        }
        Ok(())
    }

    pub fn masks(&self) -> &[ComplexImage] {
        &self.masks
    }

    pub fn mask_count(&self) -> usize {
        self.masks.len()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_h * self.frame_w
    }

    pub fn object_dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn is_oversampled(&self) -> bool {
        self.oversampled
    }
}

impl MeasurementOperator for CodedDiffractionOperator {
    fn object_len(&self) -> usize {
        self.height * self.width
    }

    fn data_len(&self) -> usize {
        self.masks.len() * self.frame_len()
    }

    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.object_len());
        let mut out = Vec::with_capacity(self.data_len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.frame_len()];
        for mask in &self.masks {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for r in 0..self.height {
                for c in 0..self.width {
                    buf[r * self.frame_w + c] = mask.get(r, c) * x[r * self.width + c];
                }
            }
            self.fft.forward(&mut buf);
            out.extend(buf.iter().map(|&v| v * self.normalization));
        }
        out
    }

    fn adjoint(&self, u: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.data_len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.object_len()];
        let fl = self.frame_len();
        for (l, mask) in self.masks.iter().enumerate() {
            let mut buf = u[l * fl..(l + 1) * fl].to_vec();
            // Φ* = (frame size) × inverse FFT, restricted to the object support.
            self.fft.inverse(&mut buf);
            let scale = fl as f64 * self.normalization;
            for r in 0..self.height {
                for c in 0..self.width {
                    out[r * self.width + c] +=
                        mask.get(r, c).conj() * buf[r * self.frame_w + c] * scale;
                }
            }
        }
        out
    }
}

/// Non-uniform mask preprocessing: splits μ into a unit-modulus phase mask and
/// folds |μ| into the object, so the isometric operator applies to |μ|⊙x.
pub fn substitute_modulus(mask: &ComplexImage, x: &ComplexImage) -> Result<(ComplexImage, ComplexImage)> {
    let phase = mask.map(sgn1);
    let weighted = mask.map(|c| Complex64::new(c.norm(), 0.0)).hadamard(x)?;
    Ok((phase, weighted))
}

/// Shared frame geometry of the bilinear ptychographic map 𝓕(ν, x):
/// per shift t, the frame is the isometric oversampled m-DFT of ν ⊙ x^t,
/// with x^t the periodically wrapped t-shifted object patch. Frames are
/// stored frame-major in shift order, frequencies row-major within a frame.
#[derive(Clone)]
pub struct PtychoGeometry {
    pub n: usize,
    pub m: usize,
    pub shifts: Vec<(i64, i64)>,
}

impl PtychoGeometry {
    pub fn new(n: usize, m: usize, shifts: Vec<(i64, i64)>) -> Result<Self> {
        if m > n {
            return Err(PhaseError::InvalidParameter(format!(
                "mask size {} exceeds object size {}",
                m, n
            )));
        }
        if shifts.is_empty() {
            return Err(PhaseError::InvalidParameter("empty shift set".into()));
        }
        Ok(Self { n, m, shifts })
    }

    pub fn frame_side(&self) -> usize {
        2 * self.m - 1
    }

    pub fn frame_len(&self) -> usize {
        self.frame_side() * self.frame_side()
    }

    pub fn data_len(&self) -> usize {
        self.shifts.len() * self.frame_len()
    }

    /// Geometric normalization n/(m√L): an isometry for unit-modulus masks on
    /// full-coverage raster scans, and symmetric between object and mask side
    /// so the bilinear consistency A_ν x = B_x ν holds exactly.
    pub fn normalization(&self) -> f64 {
        self.n as f64 / (self.m as f64 * (self.shifts.len() as f64).sqrt())
    }

    fn scale(&self) -> f64 {
        self.normalization() / self.frame_side() as f64
    }

    /// 𝓕(ν, x): stacked frames of the bilinear transformation.
    pub fn frames(&self, mask: &ComplexImage, x: &ComplexImage, fft: &Fft2) -> Vec<Complex64> {
        let (n, m, fs) = (self.n, self.m, self.frame_side());
        let scale = self.scale();
        let mut out = Vec::with_capacity(self.data_len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.frame_len()];
        for &(t1, t2) in &self.shifts {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for s1 in 0..m {
                for s2 in 0..m {
                    let r = (s1 as i64 + t1).rem_euclid(n as i64) as usize;
                    let c = (s2 as i64 + t2).rem_euclid(n as i64) as usize;
                    buf[s1 * fs + s2] = mask.get(s1, s2) * x.get(r, c);
                }
            }
            fft.forward(&mut buf);
            out.extend(buf.iter().map(|&v| v * scale));
        }
        out
    }

    /// Per-frame Φ* then ν̄-weighted accumulation onto the object grid.
    fn adjoint_object(&self, mask: &ComplexImage, u: &[Complex64], fft: &Fft2) -> Vec<Complex64> {
        let (n, m, fs, fl) = (self.n, self.m, self.frame_side(), self.frame_len());
        let scale = self.scale() * fl as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (k, &(t1, t2)) in self.shifts.iter().enumerate() {
            let mut buf = u[k * fl..(k + 1) * fl].to_vec();
            fft.inverse(&mut buf);
            for s1 in 0..m {
                for s2 in 0..m {
                    let r = (s1 as i64 + t1).rem_euclid(n as i64) as usize;
                    let c = (s2 as i64 + t2).rem_euclid(n as i64) as usize;
                    out[r * n + c] += mask.get(s1, s2).conj() * buf[s1 * fs + s2] * scale;
                }
            }
        }
        out
    }

    /// Per-frame Φ* then x̄-weighted accumulation onto the mask grid.
    fn adjoint_mask(&self, x: &ComplexImage, u: &[Complex64], fft: &Fft2) -> Vec<Complex64> {
        let (n, m, fs, fl) = (self.n, self.m, self.frame_side(), self.frame_len());
        let scale = self.scale() * fl as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for (k, &(t1, t2)) in self.shifts.iter().enumerate() {
            let mut buf = u[k * fl..(k + 1) * fl].to_vec();
            fft.inverse(&mut buf);
            for s1 in 0..m {
                for s2 in 0..m {
                    let r = (s1 as i64 + t1).rem_euclid(n as i64) as usize;
                    let c = (s2 as i64 + t2).rem_euclid(n as i64) as usize;
                    out[s1 * m + s2] += x.get(r, c).conj() * buf[s1 * fs + s2] * scale;
                }
            }
        }
        out
    }

    /// Diagonal of A_ν*A_ν over object pixels (includes normalization²).
    pub fn object_weights(&self, mask: &ComplexImage) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let c2 = self.normalization() * self.normalization();
        let mut w = vec![0.0; n * n];
        for &(t1, t2) in &self.shifts {
            for s1 in 0..m {
                for s2 in 0..m {
                    let r = (s1 as i64 + t1).rem_euclid(n as i64) as usize;
                    let c = (s2 as i64 + t2).rem_euclid(n as i64) as usize;
                    w[r * n + c] += c2 * mask.get(s1, s2).norm_sqr();
                }
            }
        }
        w
    }

    /// Diagonal of B_x*B_x over mask pixels (includes normalization²).
    pub fn mask_weights(&self, x: &ComplexImage) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let c2 = self.normalization() * self.normalization();
        let mut w = vec![0.0; m * m];
        for &(t1, t2) in &self.shifts {
            for s1 in 0..m {
                for s2 in 0..m {
                    let r = (s1 as i64 + t1).rem_euclid(n as i64) as usize;
                    let c = (s2 as i64 + t2).rem_euclid(n as i64) as usize;
                    w[s1 * m + s2] += c2 * x.get(r, c).norm_sqr();
                }
            }
        }
        w
    }
}

const WEIGHT_TOL: f64 = 1e-12;

fn diagonal_solve(num: Vec<Complex64>, w: &[f64]) -> Vec<Complex64> {
    num.into_iter()
        .zip(w.iter())
        .map(|(v, &wi)| if wi > WEIGHT_TOL { v / wi } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// A_ν: object → stacked frames, for a fixed mask ν.
pub struct PtychographicOperator {
    geo: PtychoGeometry,
    mask: ComplexImage,
    weights: Vec<f64>,
    fft: Fft2,
}

impl PtychographicOperator {
    pub fn new(mask: ComplexImage, n: usize, shifts: Vec<(i64, i64)>) -> Result<Self> {
        if mask.width() != mask.height() {
            return Err(PhaseError::InvalidParameter("mask must be square".into()));
        }
        let geo = PtychoGeometry::new(n, mask.width(), shifts)?;
        let fft = Fft2::new(geo.frame_side(), geo.frame_side());
        let weights = geo.object_weights(&mask);
        Ok(Self { geo, mask, weights, fft })
    }

    pub fn geometry(&self) -> &PtychoGeometry {
        &self.geo
    }

    pub fn mask(&self) -> &ComplexImage {
        &self.mask
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn image(&self, x: &[Complex64]) -> ComplexImage {
        ComplexImage::new(self.geo.n, self.geo.n, x.to_vec()).expect("object length")
    }
}

impl MeasurementOperator for PtychographicOperator {
    fn object_len(&self) -> usize {
        self.geo.n * self.geo.n
    }

    fn data_len(&self) -> usize {
        self.geo.data_len()
    }

    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.object_len());
        self.geo.frames(&self.mask, &self.image(x), &self.fft)
    }

    fn adjoint(&self, u: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.data_len());
        self.geo.adjoint_object(&self.mask, u, &self.fft)
    }

    fn pseudo_inverse(&self, u: &[Complex64]) -> Vec<Complex64> {
        diagonal_solve(self.adjoint(u), &self.weights)
    }

    fn is_isometric(&self) -> bool {
        self.weights
            .iter()
            .all(|&w| (w - 1.0).abs() < 1e-10)
    }

    fn frobenius_norm_sqr(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// B_x: mask → stacked frames, for a fixed object x. Shares the exact frame
/// layout of A_ν so that A_ν x = B_x ν bit-for-bit on matching pairs.
pub struct MaskSideOperator {
    geo: PtychoGeometry,
    object: ComplexImage,
    weights: Vec<f64>,
    fft: Fft2,
}

impl MaskSideOperator {
    pub fn new(object: ComplexImage, m: usize, shifts: Vec<(i64, i64)>) -> Result<Self> {
        if object.width() != object.height() {
            return Err(PhaseError::InvalidParameter("object must be square".into()));
        }
        let geo = PtychoGeometry::new(object.width(), m, shifts)?;
        let fft = Fft2::new(geo.frame_side(), geo.frame_side());
        let weights = geo.mask_weights(&object);
        Ok(Self { geo, object, weights, fft })
    }

    pub fn geometry(&self) -> &PtychoGeometry {
        &self.geo
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn image(&self, v: &[Complex64]) -> ComplexImage {
        ComplexImage::new(self.geo.m, self.geo.m, v.to_vec()).expect("mask length")
    }
}

impl MeasurementOperator for MaskSideOperator {
    fn object_len(&self) -> usize {
        self.geo.m * self.geo.m
    }

    fn data_len(&self) -> usize {
        self.geo.data_len()
    }

    fn forward(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.object_len());
        self.geo.frames(&self.image(v), &self.object, &self.fft)
    }

    fn adjoint(&self, u: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.data_len());
        self.geo.adjoint_mask(&self.object, u, &self.fft)
    }

    fn pseudo_inverse(&self, u: &[Complex64]) -> Vec<Complex64> {
        diagonal_solve(self.adjoint(u), &self.weights)
    }

    fn is_isometric(&self) -> bool {
        false
    }

    fn frobenius_norm_sqr(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Dense sensing model: rows a_k*, i.e. (Ax)_k = ⟨a_k, x⟩ = a_k* x.
/// Used for Gaussian measurement experiments (spectral methods, Wirtinger
/// flow, convex relaxations). Not isometric in general.
pub struct DenseOperator {
    n: usize,
    /// Sensing vectors a_k, row-major (N × n).
    rows: Vec<Complex64>,
    count: usize,
}

impl DenseOperator {
    pub fn new(rows: Vec<Complex64>, n: usize) -> Result<Self> {
        if n == 0 || rows.len() % n != 0 {
            return Err(PhaseError::DimensionMismatch(
                "dense operator rows must be a multiple of n".into(),
            ));
        }
        let count = rows.len() / n;
        Ok(Self { n, rows, count })
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.rows[k * self.n..(k + 1) * self.n]
    }

    pub fn rows_flat(&self) -> &[Complex64] {
        &self.rows
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl MeasurementOperator for DenseOperator {
    fn object_len(&self) -> usize {
        self.n
    }

    fn data_len(&self) -> usize {
        self.count
    }

    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.count)
            .map(|k| {
                self.row(k)
                    .iter()
                    .zip(x.iter())
                    .map(|(&a, &v)| a.conj() * v)
                    .sum()
            })
            .collect()
    }

    fn adjoint(&self, u: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.count);
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (k, &uk) in u.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(k).iter()) {
                *o += a * uk;
            }
        }
        out
    }

    fn is_isometric(&self) -> bool {
        false
    }

    fn frobenius_norm_sqr(&self) -> f64 {
        self.rows.iter().map(|c| c.norm_sqr()).sum()
    }
}
