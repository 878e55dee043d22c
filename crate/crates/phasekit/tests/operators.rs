mod common;

use common::*;
use num_complex::Complex64;
use phasekit::fft::Fft2;
use phasekit::masks_scans::{random_phase_mask, raster_scan};
use phasekit::metrics::sgn;
use phasekit::operators::{
    oversampled_dft, oversampled_dft_normalized, project_data, project_range, reflect_data,
    reflect_range, substitute_modulus, CodedDiffractionOperator, MaskSideOperator,
    MeasurementOperator, PtychographicOperator,
};
use phasekit::ComplexImage;
use rand::Rng;

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(&x, &y)| x.conj() * y).sum()
}

#[test]
fn oversampled_dft_of_delta_is_ones() {
    let mut f = ComplexImage::zeros(4, 4);
    f.set(0, 0, Complex64::new(1.0, 0.0));
    for v in oversampled_dft(&f) {
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn oversampled_magnitudes_match_autocorrelation_dft() {
    // |Φf|² equals the DFT of the (Dirichlet) autocorrelation R on the 2M+1 grid.
    for n in [3usize, 5, 8] {
        let f = random_image(n, n, 40 + n as u64);
        let spec = oversampled_dft(&f);
        let (g, _gw) = (2 * n - 1, 2 * n - 1);
        // Brute-force autocorrelation R(d) = Σ_k f(k+d) conj(f(k)), zero outside.
        let mut r = vec![Complex64::new(0.0, 0.0); g * g];
        for d1 in -(n as i64 - 1)..n as i64 {
            for d2 in -(n as i64 - 1)..n as i64 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k1 in 0..n as i64 {
                    for k2 in 0..n as i64 {
                        let (p1, p2) = (k1 + d1, k2 + d2);
                        if p1 >= 0 && p1 < n as i64 && p2 >= 0 && p2 < n as i64 {
                            acc += f.get(p1 as usize, p2 as usize)
                                * f.get(k1 as usize, k2 as usize).conj();
                        }
                    }
                }
                let (i1, i2) = (d1.rem_euclid(g as i64) as usize, d2.rem_euclid(g as i64) as usize);
                r[i1 * g + i2] = acc;
            }
        }
        Fft2::new(g, g).forward(&mut r);
        for (s, rv) in spec.iter().zip(r.iter()) {
            assert!(
                (s.norm_sqr() - rv.re).abs() < 1e-10 * (1.0 + rv.re.abs()),
                "autocorrelation mismatch at n={n}"
            );
            assert!(rv.im.abs() < 1e-9);
        }
    }
}

#[test]
fn normalized_dft_is_isometric() {
    let f = random_image(6, 6, 3);
    let spec = oversampled_dft_normalized(&f);
    assert!((norm(&spec) - f.norm()).abs() < 1e-10);
}

fn cdp(n: usize, masks: usize, oversampled: bool, seed: u64) -> CodedDiffractionOperator {
    let ms: Vec<ComplexImage> = (0..masks)
        .map(|l| random_phase_mask(n, seed + l as u64).unwrap())
        .collect();
    CodedDiffractionOperator::new(ms, oversampled).unwrap()
}

#[test]
fn cdp_isometry_and_adjoint() {
    for &(n, masks, oversampled) in &[(6usize, 1usize, true), (6, 2, true), (8, 4, false)] {
        let a = cdp(n, masks, oversampled, 9);
        let x = random_vec(n * n, 17);
        let ax = a.forward(&x);
        assert!((norm(&ax) - norm(&x)).abs() < 1e-10, "isometry");
        let back = a.adjoint(&ax);
        assert!(vec_dist(&back, &x) < 1e-10, "A*A = I");
        // Adjoint identity ⟨Ax, u⟩ = ⟨x, A*u⟩.
        let u = random_vec(a.data_len(), 19);
        let lhs = inner(&ax, &u);
        let rhs = inner(&x, &a.adjoint(&u));
        assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }
}

#[test]
fn two_mask_operator_stacks_per_mask_blocks() {
    let n = 5;
    let m1 = random_phase_mask(n, 1).unwrap();
    let m2 = random_phase_mask(n, 2).unwrap();
    let a12 = CodedDiffractionOperator::new(vec![m1.clone(), m2.clone()], true).unwrap();
    let a1 = CodedDiffractionOperator::new(vec![m1], true).unwrap();
    let a2 = CodedDiffractionOperator::new(vec![m2], true).unwrap();
    assert_eq!(a12.data_len(), 2 * (2 * n - 1) * (2 * n - 1));
    let x = random_vec(n * n, 3);
    let y = a12.forward(&x);
    let y1 = a1.forward(&x);
    let y2 = a2.forward(&x);
    // Blocks equal per-mask forwards up to the stacked normalization √2.
    let s = (2.0f64).sqrt();
    for k in 0..y1.len() {
        assert!((y[k] * s - y1[k]).norm() < 1e-12);
        assert!((y[y1.len() + k] * s - y2[k]).norm() < 1e-12);
    }
}

#[test]
fn range_projection_properties() {
    let a = cdp(6, 2, true, 5);
    let u = random_vec(a.data_len(), 23);
    let p = project_range(&a, &u);
    let pp = project_range(&a, &p);
    assert!(vec_dist(&p, &pp) < 1e-10, "idempotent");
    let x = random_vec(a.object_len(), 29);
    let ax = a.forward(&x);
    assert!(vec_dist(&project_range(&a, &ax), &ax) < 1e-10, "fixes range");
    let mut r = rng(31);
    for _ in 0..100 {
        let v: Vec<Complex64> = (0..a.data_len()).map(|_| random_complex(&mut r)).collect();
        assert!(norm(&project_range(&a, &v)) <= norm(&v) + 1e-10);
    }
}

#[test]
fn data_projection_properties() {
    let b: Vec<f64> = rng(1).sample_iter(rand::distributions::Uniform::new(0.1, 2.0)).take(40).collect();
    let u = random_vec(40, 2);
    let p = project_data(&b, &u);
    for (pv, bv) in p.iter().zip(b.iter()) {
        assert!((pv.norm() - bv).abs() < 1e-12);
    }
    // |u| = b fixed.
    let on_torus: Vec<Complex64> = b
        .iter()
        .zip(sgn(&u).iter())
        .map(|(&bv, &s)| bv * s)
        .collect();
    assert!(vec_dist(&project_data(&b, &on_torus), &on_torus) < 1e-12);
    // u = 0 → b under the sgn(0)=1 convention.
    let zeros = vec![Complex64::new(0.0, 0.0); 40];
    let pz = project_data(&b, &zeros);
    for (pv, bv) in pz.iter().zip(b.iter()) {
        assert!((pv - Complex64::new(*bv, 0.0)).norm() < 1e-15);
    }
    // Nearest point on the torus among sampled competitors.
    let du = vec_dist(&u, &p);
    let mut r = rng(3);
    for _ in 0..1000 {
        let y: Vec<Complex64> = b
            .iter()
            .map(|&bv| Complex64::from_polar(bv, r.gen_range(-3.14..3.14)))
            .collect();
        assert!(du <= vec_dist(&u, &y) + 1e-12);
    }
}

#[test]
fn reflections() {
    let a = cdp(6, 1, true, 8);
    let u = random_vec(a.data_len(), 41);
    let r1 = reflect_range(&a, &u);
    let r2 = reflect_range(&a, &r1);
    assert!(vec_dist(&r2, &u) < 1e-10, "involution");
    assert!((norm(&r1) - norm(&u)).abs() < 1e-10, "isometric reflection");
    let b: Vec<f64> = u.iter().map(|c| c.norm()).collect();
    assert!(vec_dist(&reflect_data(&b, &u), &u) < 1e-12, "R_Y fixes torus");
}

#[test]
fn ptycho_bilinear_consistency() {
    let n = 12;
    let m = 6;
    let scan = raster_scan(n, 4).unwrap(); // τ = 3, overlap m − τ = 3
    let mask = random_phase_mask(m, 50).unwrap();
    let x = random_image(n, n, 51);
    let a = PtychographicOperator::new(mask.clone(), n, scan.shifts.clone()).unwrap();
    let bx = MaskSideOperator::new(x.clone(), m, scan.shifts.clone()).unwrap();
    let lhs = a.forward(x.as_slice());
    let rhs = bx.forward(mask.as_slice());
    assert!(vec_dist(&lhs, &rhs) < 1e-10, "A_ν x = B_x ν");
    // Unit-modulus mask on a full raster → isometric.
    assert!(a.is_isometric());
    assert!((norm(&lhs) - x.norm()).abs() < 1e-10);
    // Adjoint identities for both factors.
    let u = random_vec(a.data_len(), 52);
    let lhs_i = inner(&a.forward(x.as_slice()), &u);
    let rhs_i = inner(x.as_slice(), &a.adjoint(&u));
    assert!((lhs_i - rhs_i).norm() < 1e-10 * (1.0 + lhs_i.norm()));
    let lhs_m = inner(&bx.forward(mask.as_slice()), &u);
    let rhs_m = inner(mask.as_slice(), &bx.adjoint(&u));
    assert!((lhs_m - rhs_m).norm() < 1e-10 * (1.0 + lhs_m.norm()));
    // Pseudo-inverse recovers on the range: A⁺(Ax) = x.
    assert!(vec_dist(&a.pseudo_inverse(&lhs), x.as_slice()) < 1e-10);
    assert!(vec_dist(&bx.pseudo_inverse(&rhs), mask.as_slice()) < 1e-10);
}

#[test]
fn degenerate_ptychography_is_plain_dft() {
    let n = 5;
    let ones = ComplexImage::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0));
    let a = PtychographicOperator::new(ones, n, vec![(0, 0)]).unwrap();
    let x = random_image(n, n, 60);
    let lhs = a.forward(x.as_slice());
    let rhs = oversampled_dft_normalized(&x);
    assert!(vec_dist(&lhs, &rhs) < 1e-10);
}

#[test]
fn ptycho_rejects_bad_geometry() {
    let mask = random_phase_mask(8, 1).unwrap();
    assert!(PtychographicOperator::new(mask.clone(), 6, vec![(0, 0)]).is_err(), "m > n");
    assert!(PtychographicOperator::new(mask, 16, vec![]).is_err(), "empty shifts");
}

#[test]
fn non_unit_mask_rejected_and_substitution_equivalent() {
    let n = 5;
    let mask = ComplexImage::from_fn(n, n, |r, c| {
        Complex64::from_polar(0.5 + 0.1 * (r + c) as f64, 0.3 * r as f64 - 0.7 * c as f64)
    });
    assert!(CodedDiffractionOperator::new(vec![mask.clone()], true).is_err());
    let x = random_image(n, n, 61);
    let (phase_mask, weighted) = substitute_modulus(&mask, &x).unwrap();
    let a_phase = CodedDiffractionOperator::new(vec![phase_mask], true).unwrap();
    // c·Φ diag(μ) x = c·Φ diag(μ/|μ|) (|μ|⊙x): compare against a direct
    // unnormalized transform of μ⊙x.
    let direct = oversampled_dft(&mask.hadamard(&x).unwrap());
    let via_sub = a_phase.forward(weighted.as_slice());
    let c = a_phase.normalization();
    for (d, v) in direct.iter().zip(via_sub.iter()) {
        assert!((d * c - v).norm() < 1e-12);
    }
}

#[test]
fn generalized_solution_characterization() {
    // u = Ax + z with P_X z = 0 satisfies |P_X u| = b.
    let a = cdp(6, 2, true, 70);
    let x = random_vec(a.object_len(), 71);
    let ax = a.forward(&x);
    let b: Vec<f64> = ax.iter().map(|c| c.norm()).collect();
    let w = random_vec(a.data_len(), 72);
    let pw = project_range(&a, &w);
    let z: Vec<Complex64> = w.iter().zip(pw.iter()).map(|(a, b)| a - b).collect();
    let u: Vec<Complex64> = ax.iter().zip(z.iter()).map(|(a, b)| a + b).collect();
    let pu = project_range(&a, &u);
    for (p, bv) in pu.iter().zip(b.iter()) {
        assert!((p.norm() - bv).abs() < 1e-10);
    }
}
