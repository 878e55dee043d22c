use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{PhaseError, Result};
use crate::grid::AmplitudeData;
use crate::metrics::sgn1;
use crate::operators::{project_data, MeasurementOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    Poisson,
    GaussianAmplitude,
    GaussianIntensity,
    /// ½‖√(|u|²+ε) − √(b²+ε)‖², smooth for ε > 0.
    GaussianSmoothed(f64),
}

/// Data-fidelity loss evaluated in the transform domain.
/// Poisson returns +∞ where |u_j| = 0 with b_j > 0 (log divergence is
/// reported, never clamped).
pub fn loss(kind: LossKind, u: &[Complex64], b: &[f64]) -> Result<f64> {
    if u.len() != b.len() {
        return Err(PhaseError::DimensionMismatch("loss: lengths differ".into()));
    }
    if let LossKind::GaussianSmoothed(eps) = kind {
        if eps <= 0.0 {
            return Err(PhaseError::InvalidParameter("smoothing ε must be > 0".into()));
        }
    }
    let mut acc = 0.0;
    for (&c, &bv) in u.iter().zip(b.iter()) {
        let m2 = c.norm_sqr();
        match kind {
            LossKind::Poisson => {
                if m2 == 0.0 {
                    if bv > 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    // 0·ln 0 = 0 branch: intensity term is 0 as well.
                } else {
                    acc += m2 - bv * bv * m2.ln();
                }
            }
            LossKind::GaussianAmplitude => {
                let d = m2.sqrt() - bv;
                acc += 0.5 * d * d;
            }
            LossKind::GaussianIntensity => {
                let d = m2 - bv * bv;
                acc += 0.5 * d * d;
            }
            LossKind::GaussianSmoothed(eps) => {
                let d = (m2 + eps).sqrt() - (bv * bv + eps).sqrt();
                acc += 0.5 * d * d;
            }
        }
    }
    Ok(acc)
}

/// Object-domain subgradient of the amplitude-Gaussian loss, in the
/// 2∇L convention: x − A*[b ⊙ sgn(Ax)].
pub fn gaussian_subgradient<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    x: &[Complex64],
    b: &[f64],
) -> Vec<Complex64> {
    let ax = op.forward(x);
    let back = op.adjoint(&project_data(b, &ax));
    x.iter().zip(back.iter()).map(|(&xv, &bv)| xv - bv).collect()
}

/// prox of the amplitude-Gaussian loss scaled by 1/ρ:
/// (1/(ρ+1))(b + ρ|u|) ⊙ sgn(u).
pub fn prox_gaussian(u: &[Complex64], b: &[f64], rho: f64) -> Result<Vec<Complex64>> {
    if rho < 0.0 {
        return Err(PhaseError::InvalidParameter("prox_gaussian: ρ < 0".into()));
    }
    Ok(u.iter()
        .zip(b.iter())
        .map(|(&c, &bv)| (bv + rho * c.norm()) / (rho + 1.0) * sgn1(c))
        .collect())
}

/// Wirtinger gradient of the intensity loss under the Gaussian model:
/// (1/N) Σ_k (|⟨a_k,z⟩|² − y_k) ⟨a_k,z⟩ a_k.
pub fn intensity_gradient(
    rows: &[Complex64],
    n: usize,
    z: &[Complex64],
    y: &[f64],
) -> Vec<Complex64> {
    let count = rows.len() / n;
    assert_eq!(y.len(), count);
    assert_eq!(z.len(), n);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..count {
        let a = &rows[k * n..(k + 1) * n];
        let inner: Complex64 = a.iter().zip(z.iter()).map(|(&av, &zv)| av.conj() * zv).sum();
        let w = (inner.norm_sqr() - y[k]) * inner / count as f64;
        for (o, &av) in out.iter_mut().zip(a.iter()) {
            *o += w * av;
        }
    }
    out
}

/// Poisson shot noise at a photon budget: intensities are drawn as
/// Poisson(scale·I)/scale and amplitudes are their square roots.
pub fn apply_poisson_noise(intensities: &[f64], scale: f64, seed: u64) -> Result<AmplitudeData> {
    if scale <= 0.0 {
        return Err(PhaseError::InvalidParameter("photon scale must be > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = intensities
        .iter()
        .map(|&i| {
            let lambda = scale * i;
            if lambda <= 0.0 {
                0.0
            } else {
                let draw = Poisson::new(lambda).expect("positive λ").sample(&mut rng);
                (draw / scale).sqrt()
            }
        })
        .collect();
    let mut data = AmplitudeData::new(values, "poisson")?;
    let clean: Vec<f64> = intensities.iter().map(|&i| i.sqrt()).collect();
    data.nsr = crate::metrics::nsr(&data.values, &clean).ok();
    Ok(data)
}

/// Photon scale s such that Poisson noise at b = √(P(s·b²)/s) has expected
/// NSR ≈ target (delta-method variance 1/(4s) per entry).
pub fn photon_scale_for_nsr(clean: &[f64], target_nsr: f64) -> Result<f64> {
    if target_nsr <= 0.0 {
        return Err(PhaseError::InvalidParameter("target NSR must be > 0".into()));
    }
    let energy: f64 = clean.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(PhaseError::ZeroNorm("photon_scale_for_nsr: zero signal".into()));
    }
    Ok(clean.len() as f64 / (4.0 * target_nsr * target_nsr * energy))
}

/// Rayleigh-type noise: b = |Ax + η| with η complex circular Gaussian of
/// per-entry variance σ².
pub fn apply_rayleigh_noise<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    x: &[Complex64],
    sigma: f64,
    seed: u64,
) -> Result<AmplitudeData> {
    if sigma < 0.0 {
        return Err(PhaseError::InvalidParameter("σ must be ≥ 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (sigma * sigma / 2.0).sqrt().max(f64::MIN_POSITIVE)).unwrap();
    let field = op.forward(x);
    let values: Vec<f64> = field
        .iter()
        .map(|&c| {
            if sigma == 0.0 {
                c.norm()
            } else {
                (c + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))).norm()
            }
        })
        .collect();
    let clean: Vec<f64> = field.iter().map(|c| c.norm()).collect();
    let mut data = AmplitudeData::new(values, "rayleigh")?;
    data.nsr = crate::metrics::nsr(&data.values, &clean).ok();
    Ok(data)
}

/// Thermal noise: b² = clean² + η with real Gaussian η ~ N(0, σ²);
/// negative intensities are clamped to 0 before the square root.
pub fn apply_thermal_noise(clean: &[f64], sigma: f64, seed: u64) -> Result<AmplitudeData> {
    if sigma < 0.0 {
        return Err(PhaseError::InvalidParameter("σ must be ≥ 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let values: Vec<f64> = clean
        .iter()
        .map(|&c| {
            let noisy = if sigma == 0.0 { c * c } else { c * c + normal.sample(&mut rng) };
            noisy.max(0.0).sqrt()
        })
        .collect();
    let mut data = AmplitudeData::new(values, "thermal")?;
    data.nsr = crate::metrics::nsr(&data.values, clean).ok();
    Ok(data)
}
