#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasekit::ComplexImage;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vec(len: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    (0..len).map(|_| random_complex(&mut r)).collect()
}

pub fn random_image(h: usize, w: usize, seed: u64) -> ComplexImage {
    ComplexImage::new(h, w, random_vec(h * w, seed)).unwrap()
}

#[allow(dead_code)]
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[allow(dead_code)]
pub fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
