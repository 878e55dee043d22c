use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PhaseError, Result};
use crate::grid::ComplexImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Raster,
    PerturbedRank1,
    PerturbedFullRank,
}

/// Ordered list of mask shifts t_kl on the object lattice.
#[derive(Debug, Clone)]
pub struct ScanPattern {
    pub shifts: Vec<(i64, i64)>,
    pub tau: usize,
    pub q: usize,
    pub kind: ScanKind,
}

impl ScanPattern {
    /// CSV rows (k, l, shift1, shift2) with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,l,shift1,shift2\n");
        for (idx, &(s1, s2)) in self.shifts.iter().enumerate() {
            let (k, l) = (idx / self.q, idx % self.q);
            out.push_str(&format!("{},{},{},{}\n", k, l, s1, s2));
        }
        out
    }
}

/// i.i.d. uniform phase mask: entries e^{iφ}, φ ~ U(−π, π].
pub fn random_phase_mask(m: usize, seed: u64) -> Result<ComplexImage> {
    if m == 0 {
        return Err(PhaseError::InvalidParameter("mask size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ComplexImage::from_fn(m, m, |_, _| {
        let phi: f64 = rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI);
        Complex64::from_polar(1.0, phi)
    }))
}

/// Fresnel mask μ⁰(k₁,k₂) = exp{iπ f (k₁²+k₂²)/m} with k₁,k₂ ∈ {1..m}.
pub fn fresnel_mask(m: usize, f: f64) -> ComplexImage {
    ComplexImage::from_fn(m, m, |r, c| {
        let k1 = (r + 1) as f64;
        let k2 = (c + 1) as f64;
        Complex64::from_polar(1.0, std::f64::consts::PI * f * (k1 * k1 + k2 * k2) / m as f64)
    })
}

fn check_raster(n: usize, q: usize) -> Result<usize> {
    if q == 0 || n % q != 0 {
        return Err(PhaseError::InvalidParameter(format!(
            "raster scan needs q | n, got n={}, q={}",
            n, q
        )));
    }
    Ok(n / q)
}

/// Square raster scan t_kl = τ(k, l), τ = n/q, row-major over (k, l).
pub fn raster_scan(n: usize, q: usize) -> Result<ScanPattern> {
    let tau = check_raster(n, q)?;
    let mut shifts = Vec::with_capacity(q * q);
    for k in 0..q {
        for l in 0..q {
            shifts.push(((tau * k) as i64, (tau * l) as i64));
        }
    }
    Ok(ScanPattern { shifts, tau, q, kind: ScanKind::Raster })
}

fn distinct(shifts: &[(i64, i64)], n: usize) -> bool {
    let mut seen = std::collections::HashSet::new();
    shifts
        .iter()
        .all(|&(a, b)| seen.insert((a.rem_euclid(n as i64), b.rem_euclid(n as i64))))
}

fn perturbed(n: usize, q: usize, jitter: i64, seed: u64, rank1: bool) -> Result<ScanPattern> {
    let tau = check_raster(n, q)?;
    if jitter < 0 {
        return Err(PhaseError::InvalidParameter("jitter range must be ≥ 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Collisions of wrapped shifts would break the distinctness contract;
    // redraw with the same stream until a collision-free pattern appears.
    for _ in 0..1000 {
        let shifts = if rank1 {
            let d1: Vec<i64> = (0..q).map(|_| rng.gen_range(-jitter..=jitter)).collect();
            let d2: Vec<i64> = (0..q).map(|_| rng.gen_range(-jitter..=jitter)).collect();
            let mut s = Vec::with_capacity(q * q);
            for k in 0..q {
                for l in 0..q {
                    s.push(((tau * k) as i64 + d1[k], (tau * l) as i64 + d2[l]));
                }
            }
            s
        } else {
            let mut s = Vec::with_capacity(q * q);
            for k in 0..q {
                for l in 0..q {
                    s.push((
                        (tau * k) as i64 + rng.gen_range(-jitter..=jitter),
                        (tau * l) as i64 + rng.gen_range(-jitter..=jitter),
                    ));
                }
            }
            s
        };
        if distinct(&shifts, n) {
            return Ok(ScanPattern {
                shifts,
                tau,
                q,
                kind: if rank1 { ScanKind::PerturbedRank1 } else { ScanKind::PerturbedFullRank },
            });
        }
    }
    Err(PhaseError::InvalidParameter(
        "could not draw a collision-free perturbed scan; reduce jitter".into(),
    ))
}

/// Perturbed raster scan with rank-1 jitter: δ¹ depends only on k, δ² only on l.
pub fn perturbed_rank1(n: usize, q: usize, jitter: i64, seed: u64) -> Result<ScanPattern> {
    perturbed(n, q, jitter, seed, true)
}

/// Perturbed raster scan with i.i.d. jitter per shift and axis.
pub fn perturbed_fullrank(n: usize, q: usize, jitter: i64, seed: u64) -> Result<ScanPattern> {
    perturbed(n, q, jitter, seed, false)
}

/// Largest s such that the graph on shifts, with an edge whenever
/// |𝓜^t ∩ 𝓜^{t'} ∩ supp| ≥ s, stays connected; also whether any positive
/// threshold connects it. Bottleneck of the maximum spanning tree.
pub fn s_connectivity(
    pattern: &ScanPattern,
    m: usize,
    n: usize,
    support: &[bool],
) -> Result<(usize, bool)> {
    if pattern.shifts.is_empty() {
        return Err(PhaseError::InvalidParameter("empty scan pattern".into()));
    }
    if support.len() != n * n {
        return Err(PhaseError::DimensionMismatch("support must be n×n".into()));
    }
    let t = pattern.shifts.len();
    if t == 1 {
        return Ok((usize::MAX, true));
    }
    // Pixel cover sets per shift.
    let covers: Vec<Vec<bool>> = pattern
        .shifts
        .iter()
        .map(|&(t1, t2)| {
            let mut c = vec![false; n * n];
            for s1 in 0..m {
                for s2 in 0..m {
                    let r = (s1 as i64 + t1).rem_euclid(n as i64) as usize;
                    let cc = (s2 as i64 + t2).rem_euclid(n as i64) as usize;
                    let p = r * n + cc;
                    if support[p] {
                        c[p] = true;
                    }
                }
            }
            c
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..t {
        for j in i + 1..t {
            let w = covers[i]
                .iter()
                .zip(covers[j].iter())
                .filter(|(&a, &b)| a && b)
                .count();
            if w > 0 {
                edges.push((w, i, j));
            }
        }
    }
    edges.sort_by(|a, b| b.0.cmp(&a.0));
    let mut parent: Vec<usize> = (0..t).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut components = t;
    let mut bottleneck = usize::MAX;
    for (w, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            components -= 1;
            bottleneck = bottleneck.min(w);
            if components == 1 {
                return Ok((bottleneck, true));
            }
        }
    }
    Ok((0, false))
}

/// Lower bound 1 − n²·((α+β)/2)^⌊S/2⌋ on the irreducibility probability.
pub fn uniqueness_probability_bound(n: usize, s: usize, alpha: f64, beta: f64) -> Result<f64> {
    let ab = alpha + beta;
    if !(ab > 0.0 && ab < 2.0) {
        return Err(PhaseError::InvalidParameter(format!(
            "need α+β ∈ (0,2), got {}",
            ab
        )));
    }
    Ok(1.0 - (n * n) as f64 * (ab / 2.0).abs().powi((s / 2) as i32))
}
