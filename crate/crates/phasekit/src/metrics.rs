use num_complex::Complex64;

use crate::error::{PhaseError, Result};
use crate::fft::Fft2;
use crate::grid::ComplexImage;

/// Unit-modulus phase of a complex number; zero maps to 1.
#[inline]
pub fn sgn1(c: Complex64) -> Complex64 {
    let m = c.norm();
    if m == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        c / m
    }
}

/// Elementwise phase vector; zero entries map to 1.
pub fn sgn(u: &[Complex64]) -> Vec<Complex64> {
    u.iter().map(|&c| sgn1(c)).collect()
}

/// Distance up to a global phase: min over φ of ‖z − e^{iφ}x‖. The optimal
/// phase is θ* = ∠⟨x,z⟩ in closed form; the norm is then evaluated directly,
/// which stays accurate near zero where the expanded quadratic form cancels.
pub fn dist(z: &[Complex64], x: &[Complex64]) -> Result<f64> {
    if z.len() != x.len() {
        return Err(PhaseError::DimensionMismatch(format!(
            "dist: {} vs {}",
            z.len(),
            x.len()
        )));
    }
    let inner: Complex64 = x.iter().zip(z.iter()).map(|(&a, &b)| a.conj() * b).sum();
    let rot = sgn1(inner);
    Ok(z
        .iter()
        .zip(x.iter())
        .map(|(&zv, &xv)| (zv - rot * xv).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Optimal alignment phase θ* = ∠⟨x,z⟩ realizing `dist`.
pub fn alignment_phase(z: &[Complex64], x: &[Complex64]) -> f64 {
    let inner: Complex64 = x.iter().zip(z.iter()).map(|(&a, &b)| a.conj() * b).sum();
    inner.arg()
}

/// Relative residual ‖b − |u|‖ / ‖b‖.
pub fn relative_residual(b: &[f64], u: &[Complex64]) -> Result<f64> {
    if b.len() != u.len() {
        return Err(PhaseError::DimensionMismatch(format!(
            "relative_residual: {} vs {}",
            b.len(),
            u.len()
        )));
    }
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        return Err(PhaseError::ZeroNorm("relative_residual: ‖b‖ = 0".into()));
    }
    let num: f64 = b
        .iter()
        .zip(u.iter())
        .map(|(&bv, c)| {
            let d = bv - c.norm();
            d * d
        })
        .sum::<f64>()
        .sqrt();
    Ok(num / nb)
}

/// Noise-to-signal ratio ‖b − clean‖ / ‖clean‖.
pub fn nsr(b: &[f64], clean: &[f64]) -> Result<f64> {
    if b.len() != clean.len() {
        return Err(PhaseError::DimensionMismatch(format!(
            "nsr: {} vs {}",
            b.len(),
            clean.len()
        )));
    }
    let nc: f64 = clean.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nc == 0.0 {
        return Err(PhaseError::ZeroNorm("nsr: clean signal is zero".into()));
    }
    let num: f64 = b
        .iter()
        .zip(clean.iter())
        .map(|(&a, &c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    Ok(num / nc)
}

/// 2-D pattern search (8 compass directions, halving steps): robust against
/// the diagonal ridges of the ramp-correlation surface where per-axis
/// golden-section descent zigzags.
fn pattern_search_max(
    mut p: (f64, f64),
    mut step: f64,
    f: impl Fn(f64, f64) -> f64,
    min_step: f64,
) -> (f64, f64) {
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
        (-1.0, -1.0),
    ];
    let mut best = f(p.0, p.1);
    while step > min_step {
        let mut moved = false;
        for &(d1, d2) in &DIRS {
            let cand = (p.0 + step * d1, p.1 + step * d2);
            let v = f(cand.0, cand.1);
            if v > best {
                best = v;
                p = cand;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    p
}

/// Relative error waiving the affine phase ambiguity: min over complex scale α
/// and linear ramp r ∈ [0,1)² (cycles per pixel) of
/// ‖x − α e^{-i2πn·r} x_hat‖ / ‖x‖. Coarse 4×-oversampled grid over r, then
/// golden-section refinement per axis; α is solved in closed form for each r.
pub fn affine_phase_error(x_hat: &ComplexImage, x: &ComplexImage) -> Result<f64> {
    if x_hat.width() != x.width() || x_hat.height() != x.height() {
        return Err(PhaseError::DimensionMismatch(
            "affine_phase_error: grids differ".into(),
        ));
    }
    let nx2 = x.norm_sqr();
    if nx2 == 0.0 {
        return Err(PhaseError::ZeroNorm("affine_phase_error: x = 0".into()));
    }
    let nh2 = x_hat.norm_sqr();
    if nh2 == 0.0 {
        return Ok(1.0);
    }
    let h = x.height();
    let w = x.width();
    let (gh, gw) = (4 * h, 4 * w);
    // Grid stage: correlations at all r = (j/gh, k/gw) via one zero-padded FFT
    // of conj(x_hat)⊙x (forward kernel of the conjugate gives the e^{+i·} sum).
    let mut buf = vec![Complex64::new(0.0, 0.0); gh * gw];
    for row in 0..h {
        for col in 0..w {
            buf[row * gw + col] = (x_hat.get(row, col).conj() * x.get(row, col)).conj();
        }
    }
    Fft2::new(gh, gw).forward(&mut buf);
    let mut best = (0usize, 0usize, -1.0f64);
    for j in 0..gh {
        for k in 0..gw {
            let v = buf[j * gw + k].norm();
            if v > best.2 {
                best = (j, k, v);
            }
        }
    }
    let r0 = (best.0 as f64 / gh as f64, best.1 as f64 / gw as f64);
    // Evaluate the residual directly with the closed-form α; the expanded
    // form √(‖x‖² − |C|²/‖x̂‖²) cancels catastrophically near 0.
    let eval = |r1: f64, r2: f64| -> f64 {
        let mut c = Complex64::new(0.0, 0.0);
        for row in 0..h {
            for col in 0..w {
                let phase = 2.0 * std::f64::consts::PI * (row as f64 * r1 + col as f64 * r2);
                c += x_hat.get(row, col).conj() * x.get(row, col) * Complex64::from_polar(1.0, phase);
            }
        }
        let alpha = c / nh2;
        let mut resid = 0.0;
        for row in 0..h {
            for col in 0..w {
                let phase = -2.0 * std::f64::consts::PI * (row as f64 * r1 + col as f64 * r2);
                let g = alpha * Complex64::from_polar(1.0, phase) * x_hat.get(row, col);
                resid += (x.get(row, col) - g).norm_sqr();
            }
        }
        resid.sqrt() / nx2.sqrt()
    };
    // Local refinement within one coarse-grid cell of the best sample,
    // minimizing the residual itself (linear in the ramp offset near the
    // optimum, unlike the correlation which is quadratically flat there).
    let (r1, r2) = pattern_search_max(
        r0,
        1.0 / gh.max(gw) as f64,
        |a, b| -eval(a, b),
        1e-14,
    );
    Ok(eval(r1, r2).min(eval(r0.0, r0.1)))
}

/// Minimum of `dist` over the trivial-ambiguity group: all circular
/// translations combined with optional conjugate inversion and global phase.
/// Cross-correlations over all shifts are evaluated with FFTs.
pub fn trivial_ambiguity_distance(x_hat: &ComplexImage, x: &ComplexImage) -> Result<f64> {
    if x_hat.width() != x.width() || x_hat.height() != x.height() {
        return Err(PhaseError::DimensionMismatch(
            "trivial_ambiguity_distance: grids differ".into(),
        ));
    }
    let h = x.height();
    let w = x.width();
    let fft = Fft2::new(h, w);
    let mut fx = x.as_slice().to_vec();
    fft.forward(&mut fx);
    let argmax_corr = |cand: &ComplexImage| -> (f64, usize) {
        // y(d) = Σ_k cand(k) conj(x(k+d)); all shifts at once via FFT.
        let mut fc = cand.as_slice().to_vec();
        fft.forward(&mut fc);
        for (a, b) in fc.iter_mut().zip(fx.iter()) {
            *a *= b.conj();
        }
        fft.inverse(&mut fc);
        fc.iter()
            .enumerate()
            .map(|(i, c)| (c.norm(), i))
            .fold((-1.0, 0), |acc, v| if v.0 > acc.0 { v } else { acc })
    };
    let twin = x_hat.conj_invert();
    let (c_id, i_id) = argmax_corr(x_hat);
    let (c_twin, i_twin) = argmax_corr(&twin);
    // The inverse-FFT bin m holds the correlation for shift d = −m.
    // Re-evaluate the winner with the exact phase-quotient distance to avoid
    // the cancellation error of the expanded quadratic form.
    let (base, idx) = if c_id >= c_twin { (x_hat, i_id) } else { (&twin, i_twin) };
    let cand = base.translate(-((idx / w) as i64), -((idx % w) as i64));
    dist(cand.as_slice(), x.as_slice())
}
