mod common;

use common::{norm, random_vec, rng, vec_dist};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use phasekit::convex::{
    dual_phase_check, lift_adjoint, lift_apply, lifted_dual_certificate, phaselamp,
    phaselift_solve, phasemax_solve, LiftedMatrix,
};
use phasekit::metrics::dist;
use phasekit::operators::{DenseOperator, MeasurementOperator};

fn gaussian_rows(count: usize, n: usize, seed: u64) -> DenseOperator {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let rows: Vec<Complex64> = (0..count * n)
        .map(|_| Complex64::new(normal.sample(&mut r), normal.sample(&mut r)))
        .collect();
    DenseOperator::new(rows, n).unwrap()
}

fn intensities(op: &DenseOperator, x: &[Complex64]) -> Vec<f64> {
    op.forward(x).iter().map(|c| c.norm_sqr()).collect()
}

fn amplitudes(op: &DenseOperator, x: &[Complex64]) -> Vec<f64> {
    op.forward(x).iter().map(|c| c.norm()).collect()
}

// ---------------------------------------------------------------------------
// Lifted map and adjoint.
// ---------------------------------------------------------------------------

#[test]
fn lifted_matrix_validation_and_rank_one_identity() {
    let n = 5;
    let x = random_vec(n, 3);
    let lifted = LiftedMatrix::from_outer(&x);
    assert!((lifted.trace() - x.iter().map(|c| c.norm_sqr()).sum::<f64>()).abs() < 1e-12);
    // Construction validates Hermitian symmetry.
    assert!(LiftedMatrix::new(n, lifted.as_slice().to_vec()).is_ok());
    let mut broken = lifted.as_slice().to_vec();
    broken[1] += Complex64::new(0.0, 1e-6);
    assert!(LiftedMatrix::new(n, broken).is_err());
    assert!(LiftedMatrix::new(n, vec![Complex64::new(0.0, 0.0); 7]).is_err());
    // 𝒜(xx*)_k = |⟨a_k, x⟩|².
    let op = gaussian_rows(4 * n, n, 4);
    let applied = lift_apply(&op, &lifted).unwrap();
    let direct = intensities(&op, &x);
    for (a, d) in applied.iter().zip(direct.iter()) {
        assert!((a - d).abs() < 1e-10 * d.max(1.0));
    }
}

#[test]
fn adjoint_identity_and_realness_on_hermitian_inputs() {
    let n = 6;
    let count = 20;
    let op = gaussian_rows(count, n, 9);
    // Random Hermitian X = G + G*.
    let g = random_vec(n * n, 10);
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = g[i * n + j] + g[j * n + i].conj();
        }
    }
    let x = LiftedMatrix::new(n, h.clone()).unwrap();
    let mut r = rng(11);
    let z: Vec<f64> = (0..count).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect();
    let ax = lift_apply(&op, &x).unwrap();
    let az = lift_adjoint(&op, &z).unwrap();
    // ⟨𝒜(X), z⟩ = ⟨X, 𝒜*(z)⟩_HS.
    let lhs: f64 = ax.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
    let rhs: Complex64 = x
        .as_slice()
        .iter()
        .zip(az.as_slice().iter())
        .map(|(&a, &b)| b.conj() * a)
        .sum();
    assert!(rhs.im.abs() < 1e-9);
    assert!((lhs - rhs.re).abs() < 1e-9 * lhs.abs().max(1.0));
    // Realness of the quadratic form on Hermitian inputs, checked directly.
    for k in 0..count {
        let a = op.row(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += a[i].conj() * h[i * n + j] * a[j];
            }
        }
        assert!(acc.im.abs() < 1e-9 * acc.re.abs().max(1.0));
    }
    assert!(lift_adjoint(&op, &z[..3]).is_err());
}

#[test]
fn lift_adjoint_matches_spectral_initializer_matrix() {
    // 𝒜*(y)/N applied to a vector equals the spectral-method matrix action
    // (1/N) A*(y ⊙ Az).
    let n = 5;
    let count = 18;
    let op = gaussian_rows(count, n, 15);
    let x = random_vec(n, 16);
    let y = intensities(&op, &x);
    let m = lift_adjoint(&op, &y).unwrap();
    let z = random_vec(n, 17);
    let mut via_matrix = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            via_matrix[i] += m.get(i, j) * z[j] / count as f64;
        }
    }
    let weighted: Vec<Complex64> = op
        .forward(&z)
        .iter()
        .zip(y.iter())
        .map(|(&c, &w)| w * c / count as f64)
        .collect();
    let via_operator = op.adjoint(&weighted);
    assert!(vec_dist(&via_matrix, &via_operator) < 1e-10 * norm(&via_operator).max(1.0));
}

// ---------------------------------------------------------------------------
// Lifted trace-minimization splitting.
// ---------------------------------------------------------------------------

#[test]
fn lifted_splitting_recovers_rank_one_truth() {
    let n = 8;
    let count = 8 * n;
    let mut hits = 0;
    for seed in 0..3u64 {
        let op = gaussian_rows(count, n, 20 + seed);
        let x = random_vec(n, 40 + seed);
        let y = intensities(&op, &x);
        let res = phaselift_solve(&op, &y, 0.0, 400).unwrap();
        let target = LiftedMatrix::from_outer(&x);
        let err: f64 = res
            .matrix
            .as_slice()
            .iter()
            .zip(target.as_slice().iter())
            .map(|(&a, &b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / x.iter().map(|c| c.norm_sqr()).sum::<f64>();
        // Output stays in the positive cone and extraction keeps its energy.
        let (vals, _) = res.matrix.eig();
        assert!(vals.iter().all(|&l| l >= -1e-10));
        let nx2: f64 = res.x_hat.iter().map(|c| c.norm_sqr()).sum();
        assert!(nx2 <= res.matrix.trace() + 1e-8);
        if err < 1e-3 {
            assert!(dist(&res.x_hat, &x).unwrap() < 1e-2 * norm(&x));
            hits += 1;
        }
    }
    assert!(hits >= 2, "rank-one recovery succeeded only {hits}/3 times");
}

#[test]
fn feasible_rank_one_point_is_a_fixed_point_of_the_splitting() {
    let n = 6;
    let op = gaussian_rows(6 * n, n, 33);
    let x = random_vec(n, 34);
    let y = intensities(&op, &x);
    // The affine correction at xx* is zero (it is feasible), and the cone
    // projection with zero shrinkage leaves a PSD matrix unchanged, so the
    // solve driven by consistent data keeps a vanishing residual.
    let lifted = LiftedMatrix::from_outer(&x);
    let applied = lift_apply(&op, &lifted).unwrap();
    let resid: f64 = applied
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(resid < 1e-9 * y.iter().map(|v| v * v).sum::<f64>().sqrt());
    let res = phaselift_solve(&op, &y, 0.0, 300).unwrap();
    assert!(res.residual < 1e-6);
}

#[test]
fn lifted_solver_rejects_bad_inputs() {
    let n = 4;
    let op = gaussian_rows(4 * n, n, 50);
    let x = random_vec(n, 51);
    let y = intensities(&op, &x);
    assert!(phaselift_solve(&op, &y[..3], 0.0, 10).is_err());
    assert!(phaselift_solve(&op, &y, -0.5, 10).is_err());
    assert!(phaselift_solve(&op, &vec![0.0; y.len()], 0.0, 10).is_err());
    let big = gaussian_rows(80, 65, 52);
    assert!(phaselift_solve(&big, &vec![1.0; 80], 0.0, 10).is_err());
}

#[test]
fn dual_certificate_probe_on_a_well_posed_instance() {
    let n = 5;
    let op = gaussian_rows(10 * n, n, 60);
    let x = random_vec(n, 61);
    let (t_err, perp_top) = lifted_dual_certificate(&op, &x).unwrap();
    let nx2: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    assert!(t_err < 1e-6 * nx2, "tangent fit failed: {t_err}");
    assert!(perp_top < 1.0, "no strict certificate: λ_max = {perp_top}");
    assert!(lifted_dual_certificate(&op, &vec![Complex64::new(0.0, 0.0); n]).is_err());
}

// ---------------------------------------------------------------------------
// Anchored slab maximization.
// ---------------------------------------------------------------------------

fn anchored_instance(
    n: usize,
    count: usize,
    offset: f64,
    seed: u64,
) -> (DenseOperator, Vec<Complex64>, Vec<f64>, Vec<Complex64>) {
    let op = gaussian_rows(count, n, seed);
    let x = random_vec(n, seed ^ 0xfeed);
    let b = amplitudes(&op, &x);
    let noise = random_vec(n, seed ^ 0xbeef);
    let scale = offset * norm(&x) / norm(&noise);
    let u: Vec<Complex64> = x
        .iter()
        .zip(noise.iter())
        .map(|(&xv, &nv)| xv + scale * nv)
        .collect();
    (op, x, b, u)
}

#[test]
fn anchored_maximization_recovers_from_close_anchors() {
    let n = 16;
    let count = 8 * n;
    let mut hits = 0;
    for seed in 0..5u64 {
        let (op, x, b, u) = anchored_instance(n, count, 0.5, 70 + seed);
        let xh = phasemax_solve(&op, &b, &u, 400).unwrap();
        // Output is always feasible.
        let viol = op
            .forward(&xh)
            .iter()
            .zip(b.iter())
            .map(|(c, &bv)| c.norm() - bv)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(viol <= 1e-6, "infeasible output: {viol}");
        if dist(&xh, &x).unwrap() < 1e-2 * norm(&x) {
            hits += 1;
        }
    }
    assert!(hits >= 4, "anchored recovery succeeded only {hits}/5 times");
}

#[test]
fn truth_anchor_is_recovered_and_zero_anchor_rejected() {
    let n = 12;
    let (op, x, b, _) = anchored_instance(n, 8 * n, 0.0, 90);
    let xh = phasemax_solve(&op, &b, &x, 300).unwrap();
    assert!(dist(&xh, &x).unwrap() < 1e-3 * norm(&x));
    assert!(phasemax_solve(&op, &b, &vec![Complex64::new(0.0, 0.0); n], 10).is_err());
    assert!(phasemax_solve(&op, &b[..5], &x, 10).is_err());
}

#[test]
fn iterated_anchoring_matches_single_round_and_fixes_the_truth() {
    let n = 10;
    let (op, x, b, u) = anchored_instance(n, 8 * n, 0.5, 95);
    let single = phasemax_solve(&op, &b, &u, 200).unwrap();
    let one_round = phaselamp(&op, &b, &u, 1, 200).unwrap();
    assert!(vec_dist(&single, &one_round) < 1e-12);
    // Truth anchor: the first round already lands on the truth, iteration
    // stays there.
    let fixed = phaselamp(&op, &b, &x, 4, 200).unwrap();
    assert!(dist(&fixed, &x).unwrap() < 1e-3 * norm(&x));
    assert!(phaselamp(&op, &b, &u, 0, 10).is_err());
}

#[test]
fn iterated_anchoring_succeeds_at_least_as_often_as_one_round() {
    let n = 10;
    let count = 5 * n;
    let trials = 20u64;
    let mut single_ok = 0;
    let mut lamp_ok = 0;
    for seed in 0..trials {
        let (op, x, b, u) = anchored_instance(n, count, 0.7, 400 + seed);
        let tol = 1e-2 * norm(&x);
        if let Ok(xh) = phasemax_solve(&op, &b, &u, 200) {
            if dist(&xh, &x).unwrap() < tol {
                single_ok += 1;
            }
        }
        if let Ok(xh) = phaselamp(&op, &b, &u, 6, 200) {
            if dist(&xh, &x).unwrap() < tol {
                lamp_ok += 1;
            }
        }
    }
    assert!(
        lamp_ok >= single_ok,
        "iterated anchoring won {lamp_ok}/{trials} vs single {single_ok}/{trials}"
    );
}

// ---------------------------------------------------------------------------
// Dual phase check.
// ---------------------------------------------------------------------------

#[test]
fn dual_multipliers_carry_the_lost_phases() {
    let n = 10;
    let (op, x, b, u) = anchored_instance(n, 8 * n, 0.4, 130);
    // On an exact-recovery instance all slabs are active at the truth and
    // the recovered multipliers reproduce the measurement phases.
    let dev = dual_phase_check(&op, &b, &u, &x).unwrap();
    let bmax = b.iter().fold(0.0f64, |m, &v| m.max(v));
    assert!(dev < 1e-4 * bmax.max(1.0), "phase deviation {dev}");
    // All-zero data is vacuous.
    let zeros = vec![Complex64::new(0.0, 0.0); n];
    let z = dual_phase_check(&op, &vec![0.0; b.len()], &u, &zeros).unwrap();
    assert_eq!(z, 0.0);
    // No active slabs: inflate b so every constraint is slack.
    let slack: Vec<f64> = b.iter().map(|v| v * 2.0).collect();
    assert!(dual_phase_check(&op, &slack, &u, &x).is_err());
    assert!(dual_phase_check(&op, &b[..4], &u, &x).is_err());
}

#[test]
fn dual_deviation_grows_with_data_perturbation() {
    let n = 10;
    let (op, x, b, u) = anchored_instance(n, 8 * n, 0.4, 140);
    let mut r = rng(141);
    let bump: Vec<f64> = b
        .iter()
        .map(|&v| v * rand::Rng::gen_range(&mut r, 0.5..1.0))
        .collect();
    let mut prev = dual_phase_check(&op, &b, &u, &x).unwrap();
    for level in [1e-6, 1e-5, 1e-4] {
        let perturbed: Vec<f64> = b
            .iter()
            .zip(bump.iter())
            .map(|(&v, &d)| v + level * d)
            .collect();
        let dev = dual_phase_check(&op, &perturbed, &u, &x).unwrap();
        assert!(
            dev >= prev,
            "deviation should grow with perturbation: {dev} < {prev} at {level}"
        );
        prev = dev;
    }
}
