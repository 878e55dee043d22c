mod common;

use common::{random_image, rng};
use num_complex::Complex64;
use rand::Rng;

use phasekit::blind::{
    blind_residual, dm_epoch, egaussian_drs_step, epie_epoch, eraar_step, fresnel_twin_sigma,
    make_affine_phase_pair, make_raster_ambiguity, mpc_mask_init, one_loop, run_blind,
    two_loop_drsam, BlindData, BlindMethod, BlindState, DrsamKind, InnerKind, MpcConfig,
    RasterAmbiguity,
};
use phasekit::fft::Fft2;
use phasekit::masks_scans::{fresnel_mask, perturbed_fullrank, random_phase_mask, raster_scan};
use phasekit::metrics::{affine_phase_error, dist, sgn1};
use phasekit::operators::{MeasurementOperator, PtychoGeometry, PtychographicOperator};
use phasekit::solvers::{aar_then_ap, gaussian_drs_step, raar_step};
use phasekit::ComplexImage;

fn setup(
    n: usize,
    m: usize,
    shifts: Vec<(i64, i64)>,
    seed: u64,
) -> (ComplexImage, ComplexImage, BlindData) {
    let x = random_image(n, n, seed);
    let mu = random_phase_mask(m, seed ^ 0xabcd).unwrap();
    let geo = PtychoGeometry::new(n, m, shifts).unwrap();
    let data = BlindData::simulate(geo, &mu, &x).unwrap();
    (x, mu, data)
}

fn image_err(a: &ComplexImage, b: &ComplexImage) -> f64 {
    dist(a.as_slice(), b.as_slice()).unwrap() / b.norm().max(1e-300)
}

// ---------------------------------------------------------------------------
// Fixed points at the truth.
// ---------------------------------------------------------------------------

#[test]
fn truth_is_fixed_point_of_every_epoch_map() {
    let scan = raster_scan(9, 3).unwrap();
    let (x, mu, data) = setup(9, 6, scan.shifts.clone(), 11);
    let state = BlindState::new(x.clone(), mu.clone(), &data).unwrap();
    assert!(blind_residual(&state, &data).unwrap() < 1e-12);

    let steps: Vec<(&str, BlindState)> = vec![
        ("epie", epie_epoch(&state, &data, 3).unwrap()),
        ("dm", dm_epoch(&state, &data).unwrap()),
        ("eraar", eraar_step(&state, &data, 0.7).unwrap()),
        ("egdrs", egaussian_drs_step(&state, &data, 0.5).unwrap()),
        (
            "one-loop",
            one_loop(&state, &data, InnerKind::Raar { beta: 0.8 }, 3).unwrap(),
        ),
        (
            "two-loop-g",
            two_loop_drsam(&state, &data, DrsamKind::Gaussian, 2, 2).unwrap(),
        ),
        (
            "two-loop-p",
            two_loop_drsam(&state, &data, DrsamKind::Poisson, 2, 2).unwrap(),
        ),
    ];
    for (name, next) in steps {
        assert!(
            image_err(&next.object, &x) < 1e-9,
            "{name}: object moved off the truth ({})",
            image_err(&next.object, &x)
        );
        assert!(
            image_err(&next.mask, &mu) < 1e-9,
            "{name}: mask moved off the truth ({})",
            image_err(&next.mask, &mu)
        );
        assert_eq!(next.epoch, 1);
    }
}

// ---------------------------------------------------------------------------
// Known-mask degenerations: the transform-domain updates with the mask held
// at the truth coincide with the non-blind relaxed reflection steps.
// ---------------------------------------------------------------------------

#[test]
fn extended_steps_match_fixed_mask_solvers_for_one_step() {
    let scan = raster_scan(8, 2).unwrap();
    let (x, mu, data) = setup(8, 6, scan.shifts.clone(), 23);
    let op = PtychographicOperator::new(mu.clone(), 8, scan.shifts.clone()).unwrap();
    // Start from a perturbed transform-domain iterate above the truth.
    let mut state = BlindState::new(x.clone(), mu.clone(), &data).unwrap();
    let noise = random_image(1, state.u.len(), 99);
    for (u, d) in state.u.iter_mut().zip(noise.as_slice()) {
        *u += 0.3 * d;
    }

    let beta = 0.8;
    let expected = raar_step(&op, &data.b, &state.u, beta);
    let got = eraar_step(&state, &data, beta).unwrap();
    let err: f64 = expected
        .iter()
        .zip(got.u.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-10, "eraar u-update differs from raar: {err}");

    let rho = 0.6;
    let expected = gaussian_drs_step(&op, &data.b, &state.u, rho);
    let got = egaussian_drs_step(&state, &data, rho).unwrap();
    let err: f64 = expected
        .iter()
        .zip(got.u.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-10, "egdrs u-update differs from gdrs: {err}");
}

#[test]
fn one_loop_with_single_inner_step_reduces_to_the_plain_steps() {
    let scan = raster_scan(8, 2).unwrap();
    let (x, mu, data) = setup(8, 6, scan.shifts.clone(), 31);
    let mut state = BlindState::new(x, mu, &data).unwrap();
    let noise = random_image(1, state.u.len(), 7);
    for (u, d) in state.u.iter_mut().zip(noise.as_slice()) {
        *u += 0.2 * d;
    }
    let a = one_loop(&state, &data, InnerKind::Raar { beta: 0.75 }, 1).unwrap();
    let b = eraar_step(&state, &data, 0.75).unwrap();
    assert!(image_err(&a.object, &b.object) < 1e-14);
    assert!(image_err(&a.mask, &b.mask) < 1e-14);
    let c = one_loop(&state, &data, InnerKind::GaussianDrs { rho: 0.4 }, 1).unwrap();
    let d = egaussian_drs_step(&state, &data, 0.4).unwrap();
    assert!(image_err(&c.object, &d.object) < 1e-14);
    assert!(image_err(&c.mask, &d.mask) < 1e-14);
}

// ---------------------------------------------------------------------------
// Quotient oracle: the parallel epoch's object refresh solves the pixelwise
// least-squares problem min Σ_k ‖μ ⊙ x^t_k − ψ̃^k‖², computed independently
// here with explicit loops.
// ---------------------------------------------------------------------------

#[test]
fn dm_epoch_object_matches_explicit_least_squares_quotient() {
    let n = 6;
    let m = 4;
    let scan = raster_scan(n, 3).unwrap();
    let (x, mu, data) = setup(n, m, scan.shifts.clone(), 41);
    // Exit waves of a *different* pair so the quotient is non-trivial.
    let x2 = random_image(n, n, 43);
    let geo = data.geo.clone();
    let fft = Fft2::new(geo.frame_side(), geo.frame_side());
    let u = geo.frames(&mu, &x2, &fft);
    let state = BlindState {
        object: x.clone(),
        mask: mu.clone(),
        u: u.clone(),
        v: None,
        epoch: 0,
    };
    let next = dm_epoch(&state, &data).unwrap();
    // Independent quotient: patches are exactly μ ⊙ x2^t by construction.
    let mut num = vec![Complex64::new(0.0, 0.0); n * n];
    let mut den = vec![0.0f64; n * n];
    for &(t1, t2) in &geo.shifts {
        for s1 in 0..m {
            for s2 in 0..m {
                let r = ((s1 as i64 + t1).rem_euclid(n as i64)) as usize;
                let c = ((s2 as i64 + t2).rem_euclid(n as i64)) as usize;
                let psi = mu.get(s1, s2) * x2.get(r, c);
                num[r * n + c] += mu.get(s1, s2).conj() * psi;
                den[r * n + c] += mu.get(s1, s2).norm_sqr();
            }
        }
    }
    for r in 0..n {
        for c in 0..n {
            let expected = num[r * n + c] / den[r * n + c];
            assert!(
                (next.object.get(r, c) - expected).norm() < 1e-10,
                "quotient mismatch at ({r},{c})"
            );
        }
    }
    // The least-squares quotient of consistent exit waves recovers x2 exactly.
    assert!(image_err(&next.object, &x2) < 1e-10);
}

// ---------------------------------------------------------------------------
// Sequential sweep oracle on a single frame, replicated with a naive DFT.
// ---------------------------------------------------------------------------

#[test]
fn epie_update_matches_naive_dft_oracle_on_one_frame() {
    let n = 4;
    let m = 4; // full-size mask, single shift: patch = whole object
    let shifts = vec![(0i64, 0i64)];
    let x = random_image(n, n, 57);
    let mu = random_phase_mask(m, 58).unwrap();
    let geo = PtychoGeometry::new(n, m, shifts).unwrap();
    let fs = geo.frame_side();
    let scale = geo.normalization() / fs as f64;
    // Data from a different truth object so the residual is nonzero.
    let xt = random_image(n, n, 59);
    let data = BlindData::simulate(geo.clone(), &mu, &xt).unwrap();

    let state = BlindState::new(x.clone(), mu.clone(), &data).unwrap();
    let next = epie_epoch(&state, &data, 0).unwrap();

    // Naive oracle: frame value F(w) = scale · Σ_s μ(s)x(s) e^{-2πi s·w/fs}.
    let tau = 2.0 * std::f64::consts::PI;
    let mut frame = vec![Complex64::new(0.0, 0.0); fs * fs];
    for w1 in 0..fs {
        for w2 in 0..fs {
            let mut acc = Complex64::new(0.0, 0.0);
            for s1 in 0..m {
                for s2 in 0..m {
                    let ph = -tau * (s1 * w1 + s2 * w2) as f64 / fs as f64;
                    acc += mu.get(s1, s2) * x.get(s1, s2) * Complex64::from_polar(1.0, ph);
                }
            }
            frame[w1 * fs + w2] = acc * scale;
        }
    }
    // Magnitude-matched exit wave back on the patch support.
    let mut psi = vec![Complex64::new(0.0, 0.0); m * m];
    for s1 in 0..m {
        for s2 in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for w1 in 0..fs {
                for w2 in 0..fs {
                    let ph = tau * (s1 * w1 + s2 * w2) as f64 / fs as f64;
                    let matched = data.b[w1 * fs + w2] * sgn1(frame[w1 * fs + w2]);
                    acc += matched * Complex64::from_polar(1.0, ph);
                }
            }
            psi[s1 * m + s2] = acc / (fs * fs) as f64 / scale;
        }
    }
    let max_mu = mu
        .as_slice()
        .iter()
        .map(|c| c.norm_sqr())
        .fold(0.0f64, f64::max);
    let max_x = x
        .as_slice()
        .iter()
        .map(|c| c.norm_sqr())
        .fold(0.0f64, f64::max);
    for s1 in 0..m {
        for s2 in 0..m {
            let resid = psi[s1 * m + s2] - mu.get(s1, s2) * x.get(s1, s2);
            let x_expect = x.get(s1, s2) + mu.get(s1, s2).conj() / max_mu * resid;
            let mu_expect = mu.get(s1, s2) + x.get(s1, s2).conj() / max_x * resid;
            assert!(
                (next.object.get(s1, s2) - x_expect).norm() < 1e-10,
                "object update mismatch at ({s1},{s2})"
            );
            assert!(
                (next.mask.get(s1, s2) - mu_expect).norm() < 1e-10,
                "mask update mismatch at ({s1},{s2})"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Mask initialization.
// ---------------------------------------------------------------------------

#[test]
fn mask_init_ramp_phase_bound_and_expected_error_at_max_uncertainty() {
    let m = 64;
    let n = 128;
    let mu0 = random_phase_mask(m, 3).unwrap();
    // δ = 0 with a ramp: exactly the ramped mask.
    let cfg = MpcConfig { delta: 0.0, ramp: (1, 2), seed: 5 };
    let ramped = mpc_mask_init(&mu0, n, &cfg).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    for r in 0..m {
        for c in 0..m {
            let expect = mu0.get(r, c)
                * Complex64::from_polar(1.0, tau * (r as f64 + 2.0 * c as f64) / n as f64);
            assert!((ramped.get(r, c) - expect).norm() < 1e-12);
        }
    }
    // δ > 0: every pixel's phase deviation from the ramped mask is < πδ.
    let delta = 0.3;
    let cfg = MpcConfig { delta, ramp: (1, 2), seed: 5 };
    let mu1 = mpc_mask_init(&mu0, n, &cfg).unwrap();
    for r in 0..m {
        for c in 0..m {
            let dev = (mu1.get(r, c) / ramped.get(r, c)).arg().abs();
            assert!(dev < std::f64::consts::PI * delta + 1e-12);
        }
    }
    // δ = ½, no ramp: relative error concentrates near √(2(1 − 2/π)) ≈ 0.8525.
    let cfg = MpcConfig { delta: 0.5, ramp: (0, 0), seed: 7 };
    let mu_half = mpc_mask_init(&mu0, n, &cfg).unwrap();
    let rel = image_err(&mu_half, &mu0);
    // dist() waives a global phase, which only tightens the value slightly.
    let expected = (2.0 * (1.0 - 2.0 / std::f64::consts::PI)).sqrt();
    assert!(
        (rel - expected).abs() < 0.03,
        "relative error {rel} vs expected {expected}"
    );
    // Determinism and parameter validation.
    let again = mpc_mask_init(&mu0, n, &cfg).unwrap();
    assert_eq!(mu_half.as_slice(), again.as_slice());
    assert!(mpc_mask_init(&mu0, n, &MpcConfig { delta: 0.6, ramp: (0, 0), seed: 1 }).is_err());
    assert!(mpc_mask_init(&mu0, n, &MpcConfig { delta: -0.1, ramp: (0, 0), seed: 1 }).is_err());
}

// ---------------------------------------------------------------------------
// Ambiguity constructors: every pair reproduces the data exactly.
// ---------------------------------------------------------------------------

fn assert_same_data(
    x: &ComplexImage,
    mu: &ComplexImage,
    x2: &ComplexImage,
    mu2: &ComplexImage,
    n: usize,
    m: usize,
    shifts: &[(i64, i64)],
    tol: f64,
) {
    let geo = PtychoGeometry::new(n, m, shifts.to_vec()).unwrap();
    let fft = Fft2::new(geo.frame_side(), geo.frame_side());
    let a = geo.frames(mu, x, &fft);
    let b = geo.frames(mu2, x2, &fft);
    let scale: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let err: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(p, q)| {
            let d = p.norm() - q.norm();
            d * d
        })
        .sum::<f64>()
        .sqrt();
    assert!(err < tol * scale, "data differ: {} vs tol {}", err / scale, tol);
}

#[test]
fn affine_phase_pair_and_inverse_scaling_preserve_data() {
    let n = 9;
    let m = 6;
    let scan = perturbed_fullrank(n, 3, 1, 5).unwrap();
    let x = random_image(n, n, 61);
    let mu = random_phase_mask(m, 62).unwrap();
    let (x_hat, nu) = make_affine_phase_pair(&x, &mu, 0.4, -1.1, (2, -1));
    assert_same_data(&x, &mu, &x_hat, &nu, n, m, &scan.shifts, 1e-10);
    // The pair is genuinely different pointwise but affine-equivalent.
    assert!(image_err(&x_hat, &x) > 0.1);
    assert!(affine_phase_error(&x_hat, &x).unwrap() < 1e-6);
    // Inverse scaling (λx, μ/λ) leaves the data unchanged too.
    let lam = Complex64::new(1.7, -0.4);
    let xs = x.scale(lam);
    let mus = mu.scale(Complex64::new(1.0, 0.0) / lam);
    assert_same_data(&x, &mu, &xs, &mus, n, m, &scan.shifts, 1e-10);
}

#[test]
fn block_phase_ambiguity_is_exact_for_half_mask_raster() {
    let tau = 3;
    let n = 3 * tau;
    let m = 2 * tau;
    let scan = raster_scan(n, 3).unwrap();
    let x = random_image(n, n, 71);
    let mu = random_phase_mask(m, 72).unwrap();
    let (x_hat, mu_hat) =
        make_raster_ambiguity(&x, &mu, &scan, &RasterAmbiguity::BlockPhase).unwrap();
    assert_same_data(&x, &mu, &x_hat, &mu_hat, n, m, &scan.shifts, 1e-10);
    assert!(image_err(&x_hat, &x) > 0.1);
    // Wrong geometry is rejected.
    let bad = raster_scan(n, 9).unwrap();
    assert!(make_raster_ambiguity(&x, &mu, &bad, &RasterAmbiguity::BlockPhase).is_err());
}

#[test]
fn grid_pathology_is_exact_and_not_affine_equivalent() {
    let tau = 4;
    let n = 12;
    let m = 8;
    let scan = raster_scan(n, 3).unwrap();
    assert_eq!(scan.tau, tau);
    let x = random_image(n, n, 81);
    let mu = random_phase_mask(m, 82).unwrap();
    let mut r = rng(83);
    let psi: Vec<Complex64> = (0..tau * tau)
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-0.3..0.3)))
        .collect();
    let (x_hat, mu_hat) = make_raster_ambiguity(
        &x,
        &mu,
        &scan,
        &RasterAmbiguity::GridPathology { psi: psi.clone() },
    )
    .unwrap();
    assert_same_data(&x, &mu, &x_hat, &mu_hat, n, m, &scan.shifts, 1e-10);
    // The corrupted object is far from the truth even after waiving the
    // affine ambiguity — the τ-periodic field is not a linear ramp.
    assert!(affine_phase_error(&x_hat, &x).unwrap() > 0.1);
    assert!(make_raster_ambiguity(
        &x,
        &mu,
        &scan,
        &RasterAmbiguity::GridPathology { psi: psi[..3].to_vec() }
    )
    .is_err());
}

#[test]
fn quadratic_phase_twin_reproduces_data_and_quadrant_symmetry() {
    let n = 8;
    let f = 2i64;
    let scan = raster_scan(n, 2).unwrap();
    let x = random_image(n, n, 91);
    let mu = fresnel_mask(n, f as f64);
    let (x_hat, mu_hat) =
        make_raster_ambiguity(&x, &mu, &scan, &RasterAmbiguity::FresnelTwin { f }).unwrap();
    assert_eq!(mu_hat.as_slice(), mu.as_slice());
    assert_same_data(&x, &mu, &x_hat, &mu_hat, n, n, &scan.shifts, 1e-8);
    assert!(image_err(&x_hat, &x) > 0.1);

    // h = conj(μ̌) ⊙ μ has blockwise-equal quadrants with signs 1, σ, σ, 1:
    // h₁ = h₄ and h₂ = h₃ = σh₁ as τ×τ blocks.
    let check = ComplexImage::from_fn(n, n, |r, c| mu.get(n - 1 - r, n - 1 - c).conj());
    let h = ComplexImage::from_fn(n, n, |r, c| check.get(r, c).conj() * mu.get(r, c));
    let t = n / 2;
    let sigma = fresnel_twin_sigma(f, n);
    for r in 0..t {
        for c in 0..t {
            let h1 = h.get(r, c);
            assert!((h.get(r + t, c + t) - h1).norm() < 1e-10, "h4 ≠ h1 at ({r},{c})");
            assert!((h.get(r, c + t) - sigma * h1).norm() < 1e-10, "h2 ≠ σh1 at ({r},{c})");
            assert!((h.get(r + t, c) - sigma * h1).norm() < 1e-10, "h3 ≠ σh1 at ({r},{c})");
        }
    }
    assert!(make_raster_ambiguity(&x, &mu, &raster_scan(n, 4).unwrap(),
        &RasterAmbiguity::FresnelTwin { f }).is_err());
}

// ---------------------------------------------------------------------------
// Twin trap for non-blind solvers: quadratic-phase mask at integer f on a
// half-mask raster converges in residual while staying far from the truth.
// ---------------------------------------------------------------------------

#[test]
fn integer_quadratic_phase_raster_converges_in_residual_but_not_in_error() {
    let n = 16;
    let scan = raster_scan(n, 2).unwrap();
    let mu = fresnel_mask(n, 2.0);
    let x = random_image(n, n, 101);
    let op = PtychographicOperator::new(mu, n, scan.shifts).unwrap();
    let b: Vec<f64> = op.forward(x.as_slice()).iter().map(|c| c.norm()).collect();
    let mut spikes = 0;
    for seed in 0..5u64 {
        let x0 = random_image(n, n, 200 + seed);
        let res = aar_then_ap(&op, &b, x0.as_slice(), 400, 200, Some(x.as_slice())).unwrap();
        let last = res.trace.records.last().unwrap();
        let re = dist(&res.object, x.as_slice()).unwrap() / x.norm();
        if last.rr < 1e-3 && re / last.rr.max(1e-300) > 10.0 {
            spikes += 1;
        }
    }
    assert!(
        spikes >= 3,
        "expected the residual/error gap on most starts, got {spikes}/5"
    );
}

// ---------------------------------------------------------------------------
// Recovery comparisons.
// ---------------------------------------------------------------------------

fn blind_problem(
    n: usize,
    m: usize,
    q: usize,
    seed: u64,
) -> (ComplexImage, ComplexImage, BlindData, BlindState) {
    let scan = perturbed_fullrank(n, q, 1, seed ^ 0x77).unwrap();
    let x = random_image(n, n, seed);
    let mu = random_phase_mask(m, seed ^ 0x1234).unwrap();
    let geo = PtychoGeometry::new(n, m, scan.shifts).unwrap();
    let data = BlindData::simulate(geo, &mu, &x).unwrap();
    let cfg = MpcConfig { delta: 0.4, ramp: (0, 0), seed: seed ^ 0x9 };
    let mu1 = mpc_mask_init(&mu, n, &cfg).unwrap();
    // Object start: least-squares backcast of the measured magnitudes
    // through the initial mask guess.
    let a1 = PtychographicOperator::new(mu1.clone(), n, data.geo.shifts.clone()).unwrap();
    let x1v = a1.pseudo_inverse(
        &data
            .b
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect::<Vec<_>>(),
    );
    let x1 = ComplexImage::new(n, n, x1v).unwrap();
    let state = BlindState::new(x1, mu1, &data).unwrap();
    (x, mu, data, state)
}

#[test]
fn two_loop_gaussian_recovers_object_and_mask_geometrically() {
    let mut successes = 0;
    for seed in 0..3u64 {
        let (x, mu, data, state) = blind_problem(12, 6, 4, 300 + seed);
        let (fin, trace) = run_blind(
            state,
            &data,
            BlindMethod::TwoLoop { kind: DrsamKind::Gaussian, ell_obj: 2, ell_mask: 2 },
            400,
            1e-9,
            17,
            Some((&x, &mu)),
        )
        .unwrap();
        let re = affine_phase_error(&fin.object, &x).unwrap();
        let rem = affine_phase_error(&fin.mask, &mu).unwrap();
        let rr = trace.records.last().unwrap().rr;
        if re < 1e-4 && rem < 1e-4 && rr < 1e-6 {
            // Residual decay is geometric: the tail shrinks by orders of
            // magnitude relative to the start.
            let first = trace.records[0].rr;
            assert!(rr < 1e-4 * first);
            successes += 1;
        }
    }
    assert!(successes >= 2, "two-loop recovered only {successes}/3 runs");
}

#[test]
fn small_rho_reflection_split_beats_large_beta_relaxation() {
    let mut wins = 0;
    let trials = 10u64;
    for seed in 0..trials {
        let (x, mu, data, state) = blind_problem(10, 5, 5, 500 + seed);
        let epochs = 60;
        let (_, tg) = run_blind(
            state.clone(),
            &data,
            BlindMethod::EGaussianDrs { rho: 1.0 / 3.0 },
            epochs,
            0.0,
            1,
            Some((&x, &mu)),
        )
        .unwrap();
        let (_, tr) = run_blind(
            state,
            &data,
            BlindMethod::Eraar { beta: 0.8 },
            epochs,
            0.0,
            1,
            Some((&x, &mu)),
        )
        .unwrap();
        let last = |t: &phasekit::blind::BlindTrace| t.records.last().unwrap().rr;
        if last(&tg) < last(&tr) {
            wins += 1;
        }
    }
    assert!(
        wins >= 7,
        "ρ=1/3 split won only {wins}/{trials} head-to-heads"
    );
}

// ---------------------------------------------------------------------------
// Driver contract.
// ---------------------------------------------------------------------------

#[test]
fn run_blind_trace_schema_early_stop_and_method_names() {
    let scan = raster_scan(9, 3).unwrap();
    let (x, mu, data) = setup(9, 6, scan.shifts.clone(), 111);
    // Start at the truth: residual is already below tolerance → one record.
    let state = BlindState::new(x.clone(), mu.clone(), &data).unwrap();
    let (_, trace) = run_blind(
        state.clone(),
        &data,
        BlindMethod::Dm,
        50,
        1e-8,
        0,
        Some((&x, &mu)),
    )
    .unwrap();
    assert_eq!(trace.records.len(), 1);
    let csv = trace.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iter,re,rr,norm_u,ms,re_obj,re_mask");
    assert_eq!(lines.next().unwrap().split(',').count(), 7);

    // Fixed epoch budget without tolerance: epochs + 1 records, epoch column
    // increments, and without the truth the error columns are empty.
    let mut jittered = state.clone();
    let noise = random_image(1, jittered.u.len(), 5);
    for (u, d) in jittered.u.iter_mut().zip(noise.as_slice()) {
        *u += 0.1 * d;
    }
    let (_, trace) = run_blind(jittered, &data, BlindMethod::Eraar { beta: 0.7 }, 5, 0.0, 0, None).unwrap();
    assert_eq!(trace.records.len(), 6);
    for (i, rec) in trace.records.iter().enumerate() {
        assert_eq!(rec.epoch, i);
        assert!(rec.re_obj.is_none() && rec.re_mask.is_none());
        assert!(rec.rr.is_finite() && rec.norm_u > 0.0);
    }
    let csv = trace.to_csv();
    let row = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert!(fields[1].is_empty() && fields[5].is_empty() && fields[6].is_empty());

    assert_eq!(BlindMethod::Epie.name(), "epie");
    assert_eq!(BlindMethod::Dm.name(), "dm");
    assert_eq!(BlindMethod::Eraar { beta: 0.8 }.name(), "eraar");
    assert_eq!(BlindMethod::EGaussianDrs { rho: 1.0 }.name(), "egaussian-drs");
    assert_eq!(
        BlindMethod::OneLoop { kind: InnerKind::Raar { beta: 0.8 }, ell: 2 }.name(),
        "one-loop"
    );
    assert_eq!(
        BlindMethod::TwoLoop { kind: DrsamKind::Poisson, ell_obj: 1, ell_mask: 1 }.name(),
        "two-loop-drsam"
    );
}

#[test]
fn parameter_and_dimension_validation() {
    let scan = raster_scan(9, 3).unwrap();
    let (x, mu, data) = setup(9, 6, scan.shifts.clone(), 121);
    let state = BlindState::new(x.clone(), mu.clone(), &data).unwrap();
    assert!(eraar_step(&state, &data, 0.4).is_err());
    assert!(eraar_step(&state, &data, 1.0).is_err());
    assert!(egaussian_drs_step(&state, &data, -0.1).is_err());
    assert!(one_loop(&state, &data, InnerKind::Raar { beta: 0.8 }, 0).is_err());
    assert!(two_loop_drsam(&state, &data, DrsamKind::Gaussian, 0, 1).is_err());
    // Mismatched data length and grids are rejected.
    let geo = data.geo.clone();
    assert!(BlindData::new(geo.clone(), vec![1.0; 3]).is_err());
    assert!(BlindState::new(random_image(8, 8, 1), mu.clone(), &data).is_err());
    assert!(BlindState::new(x, random_image(5, 5, 2), &data).is_err());
}
