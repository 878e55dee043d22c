use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PhaseError, Result};
use crate::operators::{DenseOperator, MeasurementOperator};

/// Result of an initialization strategy.
#[derive(Debug, Clone)]
pub struct InitReport {
    pub estimate: Vec<Complex64>,
    pub method: String,
    pub iterations: usize,
    /// |⟨x̂, x⟩| / (‖x̂‖‖x‖) when the truth is known.
    pub correlation: Option<f64>,
}

impl InitReport {
    pub fn with_correlation(mut self, truth: &[Complex64]) -> Self {
        let ip: Complex64 = self
            .estimate
            .iter()
            .zip(truth.iter())
            .map(|(&a, &b)| a.conj() * b)
            .sum();
        let ne = self.estimate.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nt = truth.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if ne > 0.0 && nt > 0.0 {
            self.correlation = Some(ip.norm() / (ne * nt));
        }
        self
    }

    /// CSV row: method, correlation (empty if unknown), iterations.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{}",
            self.method,
            self.correlation.map(|c| c.to_string()).unwrap_or_default(),
            self.iterations
        )
    }
}

/// Power method for a self-adjoint PSD (or shifted-PSD) map. Returns the
/// leading eigenpair once ‖Mv − λv‖ ≤ tol·|λ|.
pub fn power_method(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(Vec<Complex64>, f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= nv);
    let mut last_residual = f64::INFINITY;
    for it in 1..=max_iter {
        let mv = apply(&v);
        let lambda: f64 = v
            .iter()
            .zip(mv.iter())
            .map(|(&a, &b)| (a.conj() * b).re)
            .sum();
        last_residual = mv
            .iter()
            .zip(v.iter())
            .map(|(&m, &vv)| (m - lambda * vv).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let nm = mv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nm == 0.0 {
            return Err(PhaseError::ZeroNorm("power_method: map annihilated iterate".into()));
        }
        v = mv.into_iter().map(|c| c / nm).collect();
        if last_residual <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok((v, lambda, it));
        }
    }
    Err(PhaseError::NonConvergence { iters: max_iter, residual: last_residual })
}

/// Leading eigenvector of Y = (1/N) Σ y_k a_k a_k*, applied matrix-free as
/// Yz = (1/N) A*(y ⊙ Az), scaled so ‖z₀‖² = n·Σy / Σ‖a_k‖².
pub fn spectral_init<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    y: &[f64],
    frobenius_sqr: f64,
    seed: u64,
) -> Result<InitReport> {
    let n = op.object_len();
    let count = op.data_len() as f64;
    let sum_y: f64 = y.iter().sum();
    if sum_y <= 0.0 {
        return Err(PhaseError::ZeroNorm("spectral_init: all-zero intensities".into()));
    }
    let apply = |z: &[Complex64]| -> Vec<Complex64> {
        let az = op.forward(z);
        let weighted: Vec<Complex64> = az
            .iter()
            .zip(y.iter())
            .map(|(&c, &yv)| c * (yv / count))
            .collect();
        op.adjoint(&weighted)
    };
    let (v, _lam, iters) = power_method(apply, n, 1e-8, 5000, seed)?;
    let scale = (n as f64 * sum_y / frobenius_sqr).sqrt();
    Ok(InitReport {
        estimate: v.into_iter().map(|c| c * scale).collect(),
        method: "spectral".into(),
        iterations: iters,
        correlation: None,
    })
}

/// Geometric-mean rule for the weak-signal index count: ⌈√(nN)⌉.
pub fn null_default_subset_size(n: usize, count: usize) -> usize {
    ((n as f64 * count as f64).sqrt()).ceil() as usize
}

/// Indices of the `size` smallest data entries, ties broken by smaller index.
fn weak_indices(b: &[f64], size: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..b.len()).collect();
    idx.sort_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap().then(i.cmp(&j)));
    let mut mask = vec![false; b.len()];
    for &i in idx.iter().take(size) {
        mask[i] = true;
    }
    mask
}

/// Null-vector initializer: maximizes ‖A_{I_c} x‖ over ‖x‖ = ‖b‖ where I
/// holds the |I| smallest entries of b. Power method on A_{I_c}* A_{I_c}.
pub fn null_init<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    subset_size: usize,
    seed: u64,
) -> Result<InitReport> {
    let n = op.object_len();
    if subset_size >= op.data_len() {
        return Err(PhaseError::InvalidParameter("null_init: |I| ≥ N".into()));
    }
    if subset_size <= n {
        return Err(PhaseError::InvalidParameter("null_init: need |I| > n".into()));
    }
    let weak = weak_indices(b, subset_size);
    let apply = |z: &[Complex64]| -> Vec<Complex64> {
        let mut az = op.forward(z);
        for (c, &w) in az.iter_mut().zip(weak.iter()) {
            if w {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        op.adjoint(&az)
    };
    // A loose eigen-residual suffices: the start is only statistically
    // correlated with the truth, and large instances have near-degenerate
    // leading eigenvalues that make tight power-method tolerances unreachable.
    let (v, _lam, iters) = power_method(apply, n, 1e-4, 10000, seed)?;
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(InitReport {
        estimate: v.into_iter().map(|c| c * nb).collect(),
        method: "null".into(),
        iterations: iters,
        correlation: None,
    })
}

/// QR-weighted null vector: maximizes ‖A_{I_c} x‖ over ‖Rx‖ = ‖b‖ with
/// A = QR. Reduces to `null_init` when A is isometric (R = I).
pub fn null_init_qr(op: &DenseOperator, b: &[f64], subset_size: usize, seed: u64) -> Result<InitReport> {
    let n = op.object_len();
    let count = op.data_len();
    if subset_size >= count {
        return Err(PhaseError::InvalidParameter("null_init_qr: |I| ≥ N".into()));
    }
    // Measurement matrix with rows a_k* (so that (Ax)_k = ⟨a_k, x⟩).
    let a = nalgebra::DMatrix::from_fn(count, n, |i, j| op.row(i)[j].conj());
    let qr = a.qr();
    let r = qr.r();
    for i in 0..n {
        if r[(i, i)].norm() < 1e-12 {
            return Err(PhaseError::InvalidParameter("null_init_qr: rank-deficient A".into()));
        }
    }
    let q = qr.q();
    let weak = weak_indices(b, subset_size);
    // Maximize ‖Q_{I_c} w‖ over ‖w‖ = ‖b‖, then x = R⁻¹ w.
    let apply = |z: &[Complex64]| -> Vec<Complex64> {
        let zv = nalgebra::DVector::from_column_slice(z);
        let mut qz = &q * zv;
        for (i, &w) in weak.iter().enumerate() {
            if w {
                qz[i] = Complex64::new(0.0, 0.0);
            }
        }
        let back = q.adjoint() * qz;
        back.iter().cloned().collect()
    };
    let (w, _lam, iters) = power_method(apply, n, 1e-9, 10000, seed)?;
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let wv = nalgebra::DVector::from_iterator(n, w.into_iter().map(|c| c * nb));
    let x = r
        .solve_upper_triangular(&wv)
        .ok_or_else(|| PhaseError::InvalidParameter("null_init_qr: singular R".into()))?;
    Ok(InitReport {
        estimate: x.iter().cloned().collect(),
        method: "null-qr".into(),
        iterations: iters,
        correlation: None,
    })
}

/// Optimal spectral preprocessing T(y, δ) = (y₊ − 1)/(y₊ + √δ − 1) for
/// normalized intensities.
pub fn t_optimal(y: f64, delta: f64) -> f64 {
    let yp = y.max(0.0);
    (yp - 1.0) / (yp + delta.sqrt() - 1.0)
}

/// Preprocessed spectral initializer: leading eigenvector of A* T A with
/// T = diag(T(y_j, δ)), computed by the power method on the PSD shift
/// A*TA + cI with c = 1 + max|T|. Intensities are normalized to unit mean
/// before preprocessing.
pub fn optimal_preprocessing_init<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    y: &[f64],
    delta: f64,
    seed: u64,
) -> Result<InitReport> {
    if delta <= 0.0 {
        return Err(PhaseError::InvalidParameter("optimal init: δ ≤ 0".into()));
    }
    let n = op.object_len();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if mean <= 0.0 {
        return Err(PhaseError::ZeroNorm("optimal init: zero intensities".into()));
    }
    let t: Vec<f64> = y.iter().map(|&v| t_optimal(v / mean, delta)).collect();
    let count = op.data_len() as f64;
    // PSD shift: the preprocessed matrix (1/N)A*TA has spectrum within
    // max|T|·‖(1/N)A*A‖ of zero; estimate that operator norm by a short
    // power method so the shifted map is PSD with its top eigenvector intact.
    let gram = |z: &[Complex64]| -> Vec<Complex64> {
        op.adjoint(&op.forward(z)).into_iter().map(|c| c / count).collect()
    };
    let gram_norm = power_method(gram, n, 1e-3, 200, seed ^ 0x5ca1ab1e)
        .map(|(_, lam, _)| lam)
        .unwrap_or(op.frobenius_norm_sqr() / count);
    let tmax = t.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let shift = 1e-6 + 1.05 * tmax * gram_norm;
    let apply = |z: &[Complex64]| -> Vec<Complex64> {
        let az = op.forward(z);
        let weighted: Vec<Complex64> = az
            .iter()
            .zip(t.iter())
            .map(|(&c, &tv)| c * (tv / count))
            .collect();
        let mut out = op.adjoint(&weighted);
        for (o, &zv) in out.iter_mut().zip(z.iter()) {
            *o += shift * zv;
        }
        out
    };
    let (v, _lam, iters) = power_method(apply, n, 1e-9, 10000, seed)?;
    let nb = y.iter().map(|&v| v.max(0.0)).sum::<f64>().sqrt();
    Ok(InitReport {
        estimate: v.into_iter().map(|c| c * nb).collect(),
        method: "optimal".into(),
        iterations: iters,
        correlation: None,
    })
}

/// Random initializer: i.i.d. complex Gaussian entries scaled to `norm`.
pub fn random_init(n: usize, norm: f64, seed: u64) -> Result<InitReport> {
    if norm <= 0.0 {
        return Err(PhaseError::InvalidParameter("random_init: norm ≤ 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    use rand_distr::Distribution;
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c *= norm / nv);
    Ok(InitReport {
        estimate: v,
        method: "random".into(),
        iterations: 0,
        correlation: None,
    })
}
