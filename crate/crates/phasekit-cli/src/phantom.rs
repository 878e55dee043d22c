//! Test objects: a Shepp–Logan-style nonnegative head phantom, a smooth
//! blob phantom for holography, and the random-phase construction that puts
//! i.i.d. uniform phases on a nonnegative modulus.

use num_complex::Complex64;
use phasekit::{ComplexImage, PhaseError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One ellipse: additive intensity, semi-axes, center, rotation (radians).
/// Coordinates live in [−1, 1]².
struct Ellipse {
    value: f64,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    phi: f64,
}

/// Shepp–Logan-style head phantom: nested ellipses with additive intensities,
/// clamped to [0, 1]. Nonnegative and piecewise constant.
pub fn head_phantom(n: usize) -> ComplexImage {
    let ellipses = [
        Ellipse { value: 1.0, a: 0.69, b: 0.92, x0: 0.0, y0: 0.0, phi: 0.0 },
        Ellipse { value: -0.8, a: 0.6624, b: 0.874, x0: 0.0, y0: -0.0184, phi: 0.0 },
        Ellipse { value: -0.2, a: 0.11, b: 0.31, x0: 0.22, y0: 0.0, phi: -0.314 },
        Ellipse { value: -0.2, a: 0.16, b: 0.41, x0: -0.22, y0: 0.0, phi: 0.314 },
        Ellipse { value: 0.1, a: 0.21, b: 0.25, x0: 0.0, y0: 0.35, phi: 0.0 },
        Ellipse { value: 0.1, a: 0.046, b: 0.046, x0: 0.0, y0: 0.1, phi: 0.0 },
        Ellipse { value: 0.1, a: 0.046, b: 0.046, x0: 0.0, y0: -0.1, phi: 0.0 },
        Ellipse { value: 0.1, a: 0.046, b: 0.023, x0: -0.08, y0: -0.605, phi: 0.0 },
        Ellipse { value: 0.1, a: 0.023, b: 0.023, x0: 0.0, y0: -0.606, phi: 0.0 },
        Ellipse { value: 0.1, a: 0.023, b: 0.046, x0: 0.06, y0: -0.605, phi: 0.0 },
    ];
    ComplexImage::from_fn(n, n, |row, col| {
        // Map pixel centers to [−1, 1]²; rows grow downward.
        let x = 2.0 * (col as f64 + 0.5) / n as f64 - 1.0;
        let y = 1.0 - 2.0 * (row as f64 + 0.5) / n as f64;
        let mut v = 0.0;
        for e in &ellipses {
            let (s, c) = e.phi.sin_cos();
            let xr = c * (x - e.x0) + s * (y - e.y0);
            let yr = -s * (x - e.x0) + c * (y - e.y0);
            if (xr / e.a).powi(2) + (yr / e.b).powi(2) <= 1.0 {
                v += e.value;
            }
        }
        Complex64::new(v.clamp(0.0, 1.0), 0.0)
    })
}

/// Smooth nonnegative phantom in [0, 1]: a few broad Gaussian bumps whose
/// spectrum concentrates at low frequencies.
pub fn smooth_phantom(n: usize, seed: u64) -> ComplexImage {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                r.gen_range(0.2..0.8) * n as f64,
                r.gen_range(0.2..0.8) * n as f64,
                r.gen_range(0.15..0.35) * n as f64,
                r.gen_range(0.3..1.0),
            )
        })
        .collect();
    let mut img = ComplexImage::from_fn(n, n, |i, j| {
        let mut v = 0.0;
        for &(ci, cj, sigma, amp) in &bumps {
            let d2 = (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
            v += amp * (-d2 / (2.0 * sigma * sigma)).exp();
        }
        Complex64::new(v, 0.0)
    });
    let peak = img.as_slice().iter().map(|c| c.re).fold(0.0f64, f64::max);
    if peak > 0.0 {
        img = img.map(|c| c / peak);
    }
    img
}

/// Random-phase object: keeps the supplied nonnegative modulus and draws
/// i.i.d. phases uniformly from [phase_min, phase_max].
pub fn random_phase_object(
    modulus: &ComplexImage,
    phase_min: f64,
    phase_max: f64,
    seed: u64,
) -> Result<ComplexImage> {
    if phase_max < phase_min {
        return Err(PhaseError::InvalidParameter(format!(
            "phase range [{phase_min}, {phase_max}] is empty"
        )));
    }
    if modulus
        .as_slice()
        .iter()
        .any(|c| c.im != 0.0 || c.re < 0.0 || !c.re.is_finite())
    {
        return Err(PhaseError::InvalidParameter(
            "modulus image must be real and nonnegative".into(),
        ));
    }
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Ok(ComplexImage::from_fn(modulus.height(), modulus.width(), |i, j| {
        let phase = if phase_max > phase_min {
            r.gen_range(phase_min..phase_max)
        } else {
            phase_min
        };
        Complex64::from_polar(modulus.get(i, j).re, phase)
    }))
}
