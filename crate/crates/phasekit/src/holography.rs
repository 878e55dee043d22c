//! Holographic coherent diffraction imaging: reference composition,
//! autocorrelation extraction from oversampled Fourier magnitudes, and exact
//! recovery by triangular deconvolution against a known reference.
//!
//! The composite specimen [x, r] (or the 2×2 dual layout) is measured through
//! squared Fourier magnitudes on an oversampled grid. The inverse transform of
//! those magnitudes is the composite autocorrelation; a fixed window of it is
//! the cross-correlation of the specimen with the known reference, which turns
//! recovery into a linear, causal deconvolution solvable by forward
//! substitution.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{PhaseError, Result};
use crate::fft::Fft2;
use crate::grid::ComplexImage;
use crate::loss_noise::apply_poisson_noise;

/// Largest specimen side handled by the dense routines.
pub const HOLO_DESK_LIMIT: usize = 64;
/// Largest specimen side for the dual-reference stacked solve (dense
/// normal-equation system of side n²).
pub const DUAL_DESK_LIMIT: usize = 32;

/// Reference layout placed next to (or around) the specimen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Single lit pixel in the corner of the reference square nearest the
    /// specimen boundary.
    Pinhole,
    /// Lit column along the far edge of the reference square.
    Slit,
    /// Fully lit reference square.
    Block,
    /// Two portions: a pinhole square to the right of the specimen and a
    /// block square below it.
    Dual,
}

/// A reference scheme at a fixed specimen side n (references are n×n).
#[derive(Clone, Copy, Debug)]
pub struct ReferenceScheme {
    kind: ReferenceKind,
    n: usize,
}

impl ReferenceScheme {
    pub fn new(kind: ReferenceKind, n: usize) -> Result<Self> {
        if n == 0 || n > HOLO_DESK_LIMIT {
            return Err(PhaseError::InvalidParameter(format!(
                "reference scheme needs 1 ≤ n ≤ {HOLO_DESK_LIMIT}, got {n}"
            )));
        }
        Ok(Self { kind, n })
    }

    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The n×n reference image of a single-reference scheme.
    pub fn reference(&self) -> Result<ComplexImage> {
        let n = self.n;
        match self.kind {
            ReferenceKind::Pinhole => Ok(pinhole_reference(n)),
            ReferenceKind::Slit => Ok(ComplexImage::from_fn(n, n, |_, c| {
                if c == n - 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })),
            ReferenceKind::Block => {
                Ok(ComplexImage::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0)))
            }
            ReferenceKind::Dual => Err(PhaseError::InvalidParameter(
                "dual scheme has two reference portions; use dual_portions()".into(),
            )),
        }
    }

    /// The (pinhole, block) portions of the dual scheme.
    pub fn dual_portions(&self) -> Result<(ComplexImage, ComplexImage)> {
        if self.kind != ReferenceKind::Dual {
            return Err(PhaseError::InvalidParameter(
                "dual_portions() applies to the dual scheme only".into(),
            ));
        }
        let n = self.n;
        let block = ComplexImage::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0));
        Ok((pinhole_reference(n), block))
    }
}

fn pinhole_reference(n: usize) -> ComplexImage {
    ComplexImage::from_fn(n, n, |r, c| {
        if r == n - 1 && c == n - 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Places the reference next to the n×n specimen: [x, r] (height n, width 2n)
/// for single references, or the 2n×2n layout [x r_p; r_b 0] for the dual
/// scheme.
pub fn compose(x: &ComplexImage, scheme: &ReferenceScheme) -> Result<ComplexImage> {
    let n = scheme.n();
    if x.height() != n || x.width() != n {
        return Err(PhaseError::DimensionMismatch(format!(
            "specimen must be {n}×{n}, got {}×{}",
            x.height(),
            x.width()
        )));
    }
    match scheme.kind() {
        ReferenceKind::Dual => {
            let (rp, rb) = scheme.dual_portions()?;
            Ok(ComplexImage::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                (true, true) => x.get(i, j),
                (true, false) => rp.get(i, j - n),
                (false, true) => rb.get(i - n, j),
                (false, false) => Complex64::new(0.0, 0.0),
            }))
        }
        _ => {
            let r = scheme.reference()?;
            Ok(ComplexImage::from_fn(n, 2 * n, |i, j| {
                if j < n {
                    x.get(i, j)
                } else {
                    r.get(i, j - n)
                }
            }))
        }
    }
}

/// Squared Fourier magnitudes of a composite on an oversampled grid.
#[derive(Clone, Debug)]
pub struct HoloMeasurement {
    grid: Vec<f64>,
    over_h: usize,
    over_w: usize,
    comp_h: usize,
    comp_w: usize,
}

impl HoloMeasurement {
    /// Wraps raw magnitude-squared data. The oversampled grid must be at
    /// least twice the composite extent per axis (so the periodized
    /// autocorrelation does not alias) and all values must be nonnegative.
    pub fn new(
        grid: Vec<f64>,
        over_h: usize,
        over_w: usize,
        comp_h: usize,
        comp_w: usize,
    ) -> Result<Self> {
        if grid.len() != over_h * over_w {
            return Err(PhaseError::DimensionMismatch(format!(
                "{over_h}×{over_w} grid needs {} values, got {}",
                over_h * over_w,
                grid.len()
            )));
        }
        if comp_h == 0 || comp_w == 0 {
            return Err(PhaseError::InvalidParameter("empty composite".into()));
        }
        if over_h < 2 * comp_h || over_w < 2 * comp_w {
            return Err(PhaseError::Aliased(format!(
                "oversampled grid {over_h}×{over_w} is below twice the composite extent {comp_h}×{comp_w}"
            )));
        }
        if grid.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(PhaseError::InvalidParameter(
                "magnitude-squared data must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { grid, over_h, over_w, comp_h, comp_w })
    }

    /// Simulates the measurement of a composite on the given oversampled
    /// grid: zero-pad, transform, take squared magnitudes.
    pub fn simulate(composite: &ComplexImage, over_h: usize, over_w: usize) -> Result<Self> {
        let (comp_h, comp_w) = (composite.height(), composite.width());
        if over_h < 2 * comp_h || over_w < 2 * comp_w {
            return Err(PhaseError::Aliased(format!(
                "oversampled grid {over_h}×{over_w} is below twice the composite extent {comp_h}×{comp_w}"
            )));
        }
        let mut padded = vec![Complex64::new(0.0, 0.0); over_h * over_w];
        for i in 0..comp_h {
            for j in 0..comp_w {
                padded[i * over_w + j] = composite.get(i, j);
            }
        }
        Fft2::new(over_h, over_w).forward(&mut padded);
        let grid = padded.iter().map(|c| c.norm_sqr()).collect();
        Self::new(grid, over_h, over_w, comp_h, comp_w)
    }

    /// Simulates on the default oversampled grid: 8× the specimen side per
    /// axis (the specimen side is the composite height for the single
    /// layout and half the composite height for the dual layout).
    pub fn simulate_default(composite: &ComplexImage, specimen_n: usize) -> Result<Self> {
        Self::simulate(composite, 8 * specimen_n, 8 * specimen_n)
    }

    /// Poisson shot noise at a photon scale: each cell is resampled as
    /// Poisson(scale · value)/scale.
    pub fn with_poisson_noise(&self, scale: f64, seed: u64) -> Result<Self> {
        let noisy = apply_poisson_noise(&self.grid, scale, seed)?;
        // apply_poisson_noise returns amplitudes; square back to intensities.
        let grid = noisy.values.iter().map(|&a| a * a).collect();
        Self::new(grid, self.over_h, self.over_w, self.comp_h, self.comp_w)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn over_dims(&self) -> (usize, usize) {
        (self.over_h, self.over_w)
    }

    pub fn composite_dims(&self) -> (usize, usize) {
        (self.comp_h, self.comp_w)
    }
}

/// Composite autocorrelation on the oversampled (periodized) grid, indexed by
/// integer shifts.
#[derive(Clone, Debug)]
pub struct Autocorrelation {
    grid: Vec<Complex64>,
    over_h: usize,
    over_w: usize,
    comp_h: usize,
    comp_w: usize,
}

impl Autocorrelation {
    /// Value at shift (s₁, s₂): the wrapped read grid[(s₁ mod H, s₂ mod W)].
    /// Valid shifts satisfy |s₁| < composite height, |s₂| < composite width;
    /// everything else lives in the guard band and is ~0.
    pub fn get_shift(&self, s1: i64, s2: i64) -> Complex64 {
        let i = s1.rem_euclid(self.over_h as i64) as usize;
        let j = s2.rem_euclid(self.over_w as i64) as usize;
        self.grid[i * self.over_w + j]
    }

    pub fn over_dims(&self) -> (usize, usize) {
        (self.over_h, self.over_w)
    }

    pub fn composite_dims(&self) -> (usize, usize) {
        (self.comp_h, self.comp_w)
    }
}

/// Inverse-transforms squared Fourier magnitudes into the composite
/// autocorrelation. The guard band — shifts beyond the composite extent,
/// which must carry no energy when the oversampling assumption holds — is
/// checked against `wrap_tol` (relative to total energy); pass a large
/// tolerance for noisy data where the band carries noise energy.
pub fn autocorr_from_magnitudes(meas: &HoloMeasurement, wrap_tol: f64) -> Result<Autocorrelation> {
    let (over_h, over_w) = (meas.over_h, meas.over_w);
    let mut grid: Vec<Complex64> = meas
        .grid
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    Fft2::new(over_h, over_w).inverse(&mut grid);
    let total: f64 = grid.iter().map(|c| c.norm_sqr()).sum();
    if total > 0.0 && wrap_tol.is_finite() {
        let dead_row = |i: usize| i >= meas.comp_h && i <= over_h - meas.comp_h;
        let dead_col = |j: usize| j >= meas.comp_w && j <= over_w - meas.comp_w;
        let mut band = 0.0f64;
        for i in 0..over_h {
            for j in 0..over_w {
                if dead_row(i) || dead_col(j) {
                    band += grid[i * over_w + j].norm_sqr();
                }
            }
        }
        if band > wrap_tol * wrap_tol * total {
            return Err(PhaseError::Aliased(format!(
                "wrap energy {:.3e} of total in the guard band exceeds tolerance {:.1e}",
                (band / total).sqrt(),
                wrap_tol
            )));
        }
    }
    Ok(Autocorrelation {
        grid,
        over_h,
        over_w,
        comp_h: meas.comp_h,
        comp_w: meas.comp_w,
    })
}

/// Reads the specimen/reference cross-correlation window out of the composite
/// autocorrelation for a reference placed to the right of the specimen.
///
/// Index bijection: the cross-correlation is defined on shifts
/// (s₁, s₂) ∈ {−(n−1), …, 0}², where it equals the autocorrelation at
/// (s₁, s₂ − n). The returned n×n image stores entry (u₁, u₂) = the
/// cross-correlation at (u₁ − n + 1, u₂ − n + 1), i.e. row-major reads of
/// the autocorrelation at wrapped shifts (u₁ − n + 1, u₂ − 2n + 1). With a
/// pinhole reference the window is the specimen itself.
pub fn extract_crosscorr(ac: &Autocorrelation, n: usize) -> Result<ComplexImage> {
    if n == 0 || n > ac.comp_h || 2 * n > ac.comp_w {
        return Err(PhaseError::DimensionMismatch(format!(
            "cross-correlation window n = {n} out of range for a {}×{} composite",
            ac.comp_h, ac.comp_w
        )));
    }
    Ok(ComplexImage::from_fn(n, n, |u1, u2| {
        ac.get_shift(u1 as i64 - n as i64 + 1, u2 as i64 - 2 * n as i64 + 1)
    }))
}

/// Reads the cross-correlation window for a reference placed below the
/// specimen (the block portion of the dual layout): entries are wrapped
/// autocorrelation reads at shifts (u₁ − 2n + 1, u₂ − n + 1).
pub fn extract_crosscorr_lower(ac: &Autocorrelation, n: usize) -> Result<ComplexImage> {
    if n == 0 || 2 * n > ac.comp_h || n > ac.comp_w {
        return Err(PhaseError::DimensionMismatch(format!(
            "lower cross-correlation window n = {n} out of range for a {}×{} composite",
            ac.comp_h, ac.comp_w
        )));
    }
    Ok(ComplexImage::from_fn(n, n, |u1, u2| {
        ac.get_shift(u1 as i64 - 2 * n as i64 + 1, u2 as i64 - n as i64 + 1)
    }))
}

/// Causal deconvolution kernel of a reference: w(d₁, d₂) = conj(r(n−1−d₁,
/// n−1−d₂)). The cross-correlation window equals the causal convolution of
/// the specimen with w, so w(0,0) = conj(r(n−1, n−1)) sits on the diagonal of
/// the triangular system.
fn causal_kernel(r: &ComplexImage) -> Vec<Complex64> {
    let n = r.height();
    let mut w = vec![Complex64::new(0.0, 0.0); n * n];
    for d1 in 0..n {
        for d2 in 0..n {
            w[d1 * n + d2] = r.get(n - 1 - d1, n - 1 - d2).conj();
        }
    }
    w
}

fn check_square_pair(y: &ComplexImage, r: &ComplexImage, what: &str) -> Result<usize> {
    let n = r.height();
    if r.width() != n || n == 0 {
        return Err(PhaseError::DimensionMismatch(format!(
            "{what}: reference must be square and nonempty"
        )));
    }
    if y.height() != n || y.width() != n {
        return Err(PhaseError::DimensionMismatch(format!(
            "{what}: window {}×{} vs reference {n}×{n}",
            y.height(),
            y.width()
        )));
    }
    if n > HOLO_DESK_LIMIT {
        return Err(PhaseError::InvalidParameter(format!(
            "{what}: n ≤ {HOLO_DESK_LIMIT} supported, got {n}"
        )));
    }
    Ok(n)
}

/// Recovers the specimen from its cross-correlation window with a known
/// reference by forward substitution on the causal convolution
/// y(u) = Σ_d w(d) x(u − d): row-major over u, each unknown divides by the
/// diagonal coefficient w(0,0) = conj(r(n−1, n−1)). The n²×n² triangular
/// system is never materialized. Requires the separation condition
/// r(n−1, n−1) ≠ 0; exact on noiseless data.
pub fn referenced_deconvolve(y_block: &ComplexImage, r: &ComplexImage) -> Result<ComplexImage> {
    let n = check_square_pair(y_block, r, "referenced_deconvolve")?;
    let w = causal_kernel(r);
    let rmax = r.as_slice().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if w[0].norm() <= 1e-12 * rmax.max(1.0) {
        return Err(PhaseError::SeparationViolated(
            "reference corner entry r(n−1, n−1) vanishes; the triangular system is singular".into(),
        ));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n * n];
    for u1 in 0..n {
        for u2 in 0..n {
            let mut acc = y_block.get(u1, u2);
            for d1 in 0..=u1 {
                for d2 in 0..=u2 {
                    if d1 == 0 && d2 == 0 {
                        continue;
                    }
                    acc -= w[d1 * n + d2] * x[(u1 - d1) * n + (u2 - d2)];
                }
            }
            x[u1 * n + u2] = acc / w[0];
        }
    }
    ComplexImage::new(n, n, x)
}

/// Dense n²×n² matrix of the causal convolution with a reference kernel
/// (lower-triangular block-Toeplitz with Toeplitz blocks), row-major in both
/// the shift index u and the specimen index k.
fn causal_matrix(r: &ComplexImage) -> DMatrix<Complex64> {
    let n = r.height();
    let w = causal_kernel(r);
    DMatrix::from_fn(n * n, n * n, |row, col| {
        let (u1, u2) = (row / n, row % n);
        let (k1, k2) = (col / n, col % n);
        if k1 <= u1 && k2 <= u2 {
            w[(u1 - k1) * n + (u2 - k2)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Recovers the specimen from a dual-layout measurement: extracts the
/// cross-correlation windows against the right-hand portion r_p and the
/// lower portion r_b and solves the stacked linear system in the
/// least-squares sense (normal equations + Cholesky). With r_b = 0 and a
/// pinhole r_p this reduces to the single pinhole path. The guard-band
/// aliasing check is skipped: noisy data legitimately carries band energy.
pub fn dual_reference_deconvolve(
    meas: &HoloMeasurement,
    r_p: &ComplexImage,
    r_b: &ComplexImage,
) -> Result<ComplexImage> {
    let n = r_p.height();
    if r_p.width() != n || r_b.height() != n || r_b.width() != n || n == 0 {
        return Err(PhaseError::DimensionMismatch(
            "dual_reference_deconvolve: reference portions must be equal squares".into(),
        ));
    }
    if n > DUAL_DESK_LIMIT {
        return Err(PhaseError::InvalidParameter(format!(
            "dual_reference_deconvolve: n ≤ {DUAL_DESK_LIMIT} supported, got {n}"
        )));
    }
    if meas.comp_h != 2 * n || meas.comp_w != 2 * n {
        return Err(PhaseError::DimensionMismatch(format!(
            "dual layout needs a {0}×{0} composite, got {1}×{2}",
            2 * n,
            meas.comp_h,
            meas.comp_w
        )));
    }
    let scale = r_p
        .as_slice()
        .iter()
        .chain(r_b.as_slice().iter())
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    if r_p.get(n - 1, n - 1).norm() <= 1e-12 * scale.max(1.0)
        && r_b.get(n - 1, n - 1).norm() <= 1e-12 * scale.max(1.0)
    {
        return Err(PhaseError::SeparationViolated(
            "both reference portions vanish at the corner (n−1, n−1); the stacked system is degenerate"
                .into(),
        ));
    }
    let ac = autocorr_from_magnitudes(meas, f64::INFINITY)?;
    let y_p = extract_crosscorr(&ac, n)?;
    let y_b = extract_crosscorr_lower(&ac, n)?;
    let t_p = causal_matrix(r_p);
    let t_b = causal_matrix(r_b);
    let m = n * n;
    let yp = DVector::from_fn(m, |i, _| y_p.as_slice()[i]);
    let yb = DVector::from_fn(m, |i, _| y_b.as_slice()[i]);
    let mut normal = t_p.adjoint() * &t_p + t_b.adjoint() * &t_b;
    let rhs = t_p.adjoint() * yp + t_b.adjoint() * yb;
    let diag_max = (0..m).map(|i| normal[(i, i)].re).fold(0.0f64, f64::max).max(1.0);
    for i in 0..m {
        normal[(i, i)] += Complex64::new(1e-14 * diag_max, 0.0);
    }
    let sol = Cholesky::new(normal)
        .ok_or_else(|| {
            PhaseError::SeparationViolated(
                "degenerate reference portions: stacked normal system is not positive definite"
                    .into(),
            )
        })?
        .solve(&rhs);
    ComplexImage::new(n, n, sol.as_slice().to_vec())
}
