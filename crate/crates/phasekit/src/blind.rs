use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PhaseError, Result};
use crate::fft::Fft2;
use crate::grid::ComplexImage;
use crate::masks_scans::{fresnel_mask, ScanPattern};
use crate::metrics::{affine_phase_error, sgn1};
use crate::operators::{
    project_data, project_range, reflect_data, reflect_range, MaskSideOperator,
    MeasurementOperator, PtychoGeometry, PtychographicOperator,
};

/// Measured amplitudes plus the scan geometry they were taken on.
#[derive(Clone)]
pub struct BlindData {
    pub geo: PtychoGeometry,
    pub b: Vec<f64>,
}

impl BlindData {
    pub fn new(geo: PtychoGeometry, b: Vec<f64>) -> Result<Self> {
        if b.len() != geo.data_len() {
            return Err(PhaseError::DimensionMismatch(format!(
                "data length {} vs geometry {}",
                b.len(),
                geo.data_len()
            )));
        }
        Ok(Self { geo, b })
    }

    /// Simulate amplitudes |𝓕(μ, x)| for a ground-truth pair.
    pub fn simulate(geo: PtychoGeometry, mask: &ComplexImage, x: &ComplexImage) -> Result<Self> {
        let fft = Fft2::new(geo.frame_side(), geo.frame_side());
        let frames = geo.frames(mask, x, &fft);
        let b = frames.iter().map(|c| c.norm()).collect();
        Self::new(geo, b)
    }
}

/// Paired object/mask estimates and the transform-domain iterates carried
/// between epochs (u: object loop, v: mask loop, both warm-started).
#[derive(Clone)]
pub struct BlindState {
    pub object: ComplexImage,
    pub mask: ComplexImage,
    pub u: Vec<Complex64>,
    pub v: Option<Vec<Complex64>>,
    pub epoch: usize,
}

impl BlindState {
    pub fn new(object: ComplexImage, mask: ComplexImage, data: &BlindData) -> Result<Self> {
        let geo = &data.geo;
        if object.height() != geo.n || object.width() != geo.n {
            return Err(PhaseError::DimensionMismatch("object grid vs scan".into()));
        }
        if mask.height() != geo.m || mask.width() != geo.m {
            return Err(PhaseError::DimensionMismatch("mask grid vs scan".into()));
        }
        let fft = Fft2::new(geo.frame_side(), geo.frame_side());
        let u = geo.frames(&mask, &object, &fft);
        Ok(Self {
            object,
            mask,
            u,
            v: None,
            epoch: 0,
        })
    }
}

/// Mask-initialization parameters: phase-uncertainty δ ∈ [0, ½], an integer
/// linear ramp k (cycles over the object period n), and the draw seed.
#[derive(Clone, Copy, Debug)]
pub struct MpcConfig {
    pub delta: f64,
    pub ramp: (i64, i64),
    pub seed: u64,
}

/// Phase-perturbed mask start μ₁(s) = μ⁰(s)·e^{i2π k·s/n}·e^{iφ(s)} with
/// φ i.i.d. uniform on (−πδ, πδ). Every pixel phase then deviates from the
/// ramped truth by less than πδ. δ = 0 returns the exact ramped mask.
pub fn mpc_mask_init(mu0: &ComplexImage, n: usize, cfg: &MpcConfig) -> Result<ComplexImage> {
    if !(0.0..=0.5).contains(&cfg.delta) {
        return Err(PhaseError::InvalidParameter(format!(
            "mask phase uncertainty δ = {} outside [0, ½]",
            cfg.delta
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tau = 2.0 * std::f64::consts::PI;
    Ok(ComplexImage::from_fn(mu0.height(), mu0.width(), |r, c| {
        let ramp = tau * (cfg.ramp.0 as f64 * r as f64 + cfg.ramp.1 as f64 * c as f64) / n as f64;
        let phi = if cfg.delta > 0.0 {
            rng.gen_range(-std::f64::consts::PI * cfg.delta..std::f64::consts::PI * cfg.delta)
        } else {
            0.0
        };
        mu0.get(r, c) * Complex64::from_polar(1.0, ramp + phi)
    }))
}

// ---------------------------------------------------------------------------
// Shared per-frame plumbing.
// ---------------------------------------------------------------------------

struct FrameCtx {
    fft: Fft2,
    fs: usize,
    fl: usize,
    scale: f64, // c/fs applied on the forward transform
}

impl FrameCtx {
    fn new(geo: &PtychoGeometry) -> Self {
        let fs = geo.frame_side();
        Self {
            fft: Fft2::new(fs, fs),
            fs,
            fl: fs * fs,
            scale: geo.normalization() / fs as f64,
        }
    }

    /// Frame of one m×m patch (zero-padded, scaled like the stacked map).
    fn forward_patch(&self, patch: &[Complex64], m: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fl];
        for s1 in 0..m {
            for s2 in 0..m {
                buf[s1 * self.fs + s2] = patch[s1 * m + s2];
            }
        }
        self.fft.forward(&mut buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        buf
    }

    /// Inverse of `forward_patch` onto the full (2m−1)² support.
    fn inverse_frame(&self, frame: &[Complex64]) -> Vec<Complex64> {
        let mut buf = frame.to_vec();
        self.fft.inverse(&mut buf);
        let s = 1.0 / self.scale;
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    }
}

fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

// ---------------------------------------------------------------------------
// ePIE.
// ---------------------------------------------------------------------------

/// One sequential mini-batch sweep: frames visited in a seeded random order;
/// for each frame the exit wave ψ̃ = Φ*[b⊙sgn(Φ(ν⊙x))] drives gradient
/// updates of the object patch (step 1/(2·max|ν|²) on the squared misfit,
/// i.e. x ← x + conj(ν)/max|ν|²·(ψ̃ − ν⊙x)) and, mirrored, of the mask.
/// Frames whose mask or object patch is entirely zero are skipped.
pub fn epie_epoch(state: &BlindState, data: &BlindData, order_seed: u64) -> Result<BlindState> {
    let geo = &data.geo;
    let (n, m) = (geo.n, geo.m);
    let ctx = FrameCtx::new(geo);
    let mut object = state.object.clone();
    let mut mask = state.mask.clone();
    let mut order: Vec<usize> = (0..geo.shifts.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for &k in &order {
        let (t1, t2) = geo.shifts[k];
        let mut patch_obj = vec![Complex64::new(0.0, 0.0); m * m];
        for s1 in 0..m {
            for s2 in 0..m {
                patch_obj[s1 * m + s2] = object.get(
                    wrap(s1 as i64 + t1, n),
                    wrap(s2 as i64 + t2, n),
                );
            }
        }
        let exit: Vec<Complex64> = (0..m * m)
            .map(|i| mask.as_slice()[i] * patch_obj[i])
            .collect();
        let max_mask = mask.as_slice().iter().map(|c| c.norm_sqr()).fold(0.0f64, f64::max);
        let max_obj = patch_obj.iter().map(|c| c.norm_sqr()).fold(0.0f64, f64::max);
        if max_mask <= 1e-30 || max_obj <= 1e-30 {
            continue; // step size undefined on an all-zero patch
        }
        let frame = ctx.forward_patch(&exit, m);
        let bk = &data.b[k * ctx.fl..(k + 1) * ctx.fl];
        let matched: Vec<Complex64> = frame
            .iter()
            .zip(bk.iter())
            .map(|(&f, &bv)| bv * sgn1(f))
            .collect();
        let psi_full = ctx.inverse_frame(&matched);
        for s1 in 0..m {
            for s2 in 0..m {
                let psi = psi_full[s1 * ctx.fs + s2];
                let nu = mask.get(s1, s2);
                let xo = patch_obj[s1 * m + s2];
                let resid = psi - nu * xo;
                let (r, c) = (wrap(s1 as i64 + t1, n), wrap(s2 as i64 + t2, n));
                object.set(r, c, object.get(r, c) + nu.conj() / max_mask * resid);
                mask.set(s1, s2, nu + xo.conj() / max_obj * resid);
            }
        }
    }
    let fft = Fft2::new(geo.frame_side(), geo.frame_side());
    let u = geo.frames(&mask, &object, &fft);
    Ok(BlindState {
        object,
        mask,
        u,
        v: state.v.clone(),
        epoch: state.epoch + 1,
    })
}

// ---------------------------------------------------------------------------
// Difference-map style parallel update.
// ---------------------------------------------------------------------------

/// Normal-equation quotient for the object: x(r) = Σ_k conj(μ^k)ψ̃^k / Σ_k|μ^k|²
/// over the frames covering pixel r; zero-denominator pixels keep their old value.
fn object_quotient(
    geo: &PtychoGeometry,
    mask: &ComplexImage,
    patches: &[Vec<Complex64>],
    old: &ComplexImage,
) -> ComplexImage {
    let (n, m) = (geo.n, geo.m);
    let mut num = vec![Complex64::new(0.0, 0.0); n * n];
    let mut den = vec![0.0f64; n * n];
    for (k, &(t1, t2)) in geo.shifts.iter().enumerate() {
        for s1 in 0..m {
            for s2 in 0..m {
                let idx = wrap(s1 as i64 + t1, n) * n + wrap(s2 as i64 + t2, n);
                let mu = mask.get(s1, s2);
                num[idx] += mu.conj() * patches[k][s1 * m + s2];
                den[idx] += mu.norm_sqr();
            }
        }
    }
    ComplexImage::from_fn(n, n, |r, c| {
        let idx = r * n + c;
        if den[idx] > 1e-12 {
            num[idx] / den[idx]
        } else {
            old.get(r, c)
        }
    })
}

/// Mirrored quotient for the mask: μ(s) = Σ_k conj(x^t_k)ψ̃^k / Σ_k|x^t_k|².
fn mask_quotient(
    geo: &PtychoGeometry,
    object: &ComplexImage,
    patches: &[Vec<Complex64>],
    old: &ComplexImage,
) -> ComplexImage {
    let (n, m) = (geo.n, geo.m);
    let mut num = vec![Complex64::new(0.0, 0.0); m * m];
    let mut den = vec![0.0f64; m * m];
    for (k, &(t1, t2)) in geo.shifts.iter().enumerate() {
        for s1 in 0..m {
            for s2 in 0..m {
                let xo = object.get(wrap(s1 as i64 + t1, n), wrap(s2 as i64 + t2, n));
                num[s1 * m + s2] += xo.conj() * patches[k][s1 * m + s2];
                den[s1 * m + s2] += xo.norm_sqr();
            }
        }
    }
    ComplexImage::from_fn(m, m, |r, c| {
        let idx = r * m + c;
        if den[idx] > 1e-12 {
            num[idx] / den[idx]
        } else {
            old.get(r, c)
        }
    })
}

fn frame_patches(geo: &PtychoGeometry, ctx: &FrameCtx, u: &[Complex64]) -> Vec<Vec<Complex64>> {
    let m = geo.m;
    (0..geo.shifts.len())
        .map(|k| {
            let full = ctx.inverse_frame(&u[k * ctx.fl..(k + 1) * ctx.fl]);
            let mut p = vec![Complex64::new(0.0, 0.0); m * m];
            for s1 in 0..m {
                for s2 in 0..m {
                    p[s1 * m + s2] = full[s1 * ctx.fs + s2];
                }
            }
            p
        })
        .collect()
}

/// Parallel exit-wave epoch: the stacked exit waves take one averaged
/// reflection sweep u' = ½u + ½R_Y R_X u, where the consistency projection
/// R_X rebuilds the frames from the quotient-solved object and mask; the
/// state estimates are refreshed from the same quotients once per epoch.
pub fn dm_epoch(state: &BlindState, data: &BlindData) -> Result<BlindState> {
    let geo = &data.geo;
    let ctx = FrameCtx::new(geo);
    let fft = Fft2::new(geo.frame_side(), geo.frame_side());
    let u = &state.u;
    // Consistency projection via alternated normal-equation quotients.
    let patches = frame_patches(geo, &ctx, u);
    let object = object_quotient(geo, &state.mask, &patches, &state.object);
    let mask = mask_quotient(geo, &object, &patches, &state.mask);
    let px = geo.frames(&mask, &object, &fft);
    let rx: Vec<Complex64> = px
        .iter()
        .zip(u.iter())
        .map(|(&p, &uv)| 2.0 * p - uv)
        .collect();
    let ry_rx = reflect_data(&data.b, &rx);
    let new_u: Vec<Complex64> = u
        .iter()
        .zip(ry_rx.iter())
        .map(|(&uv, &rv)| 0.5 * uv + 0.5 * rv)
        .collect();
    Ok(BlindState {
        object,
        mask,
        u: new_u,
        v: state.v.clone(),
        epoch: state.epoch + 1,
    })
}

// ---------------------------------------------------------------------------
// Extended RAAR / Gaussian-DRS single steps.
// ---------------------------------------------------------------------------

fn object_operator(state: &BlindState, geo: &PtychoGeometry) -> Result<PtychographicOperator> {
    PtychographicOperator::new(state.mask.clone(), geo.n, geo.shifts.clone())
}

fn image_from(v: Vec<Complex64>, side: usize) -> ComplexImage {
    ComplexImage::new(side, side, v).expect("square image")
}

/// u' = βu + (1−2β)P_Y u + βP_k R_Y u;  x' = A_k⁺R_Y u;
/// μ' = B_{x'}⁺(u' + P_Y u − u).  A_k carries the current mask estimate.
pub fn eraar_step(state: &BlindState, data: &BlindData, beta: f64) -> Result<BlindState> {
    if !(0.5..1.0).contains(&beta) {
        return Err(PhaseError::InvalidParameter(format!(
            "eRAAR relaxation β = {} outside [½, 1)",
            beta
        )));
    }
    let geo = &data.geo;
    let a_op = object_operator(state, geo)?;
    let u = &state.u;
    let pyu = project_data(&data.b, u);
    let ryu: Vec<Complex64> = pyu.iter().zip(u.iter()).map(|(&p, &v)| 2.0 * p - v).collect();
    let pk_ryu = project_range(&a_op, &ryu);
    let new_u: Vec<Complex64> = (0..u.len())
        .map(|i| beta * u[i] + (1.0 - 2.0 * beta) * pyu[i] + beta * pk_ryu[i])
        .collect();
    let object = image_from(a_op.pseudo_inverse(&ryu), geo.n);
    let b_op = MaskSideOperator::new(object.clone(), geo.m, geo.shifts.clone())?;
    let y: Vec<Complex64> = (0..u.len()).map(|i| new_u[i] + pyu[i] - u[i]).collect();
    let mask = image_from(b_op.pseudo_inverse(&y), geo.m);
    Ok(BlindState {
        object,
        mask,
        u: new_u,
        v: state.v.clone(),
        epoch: state.epoch + 1,
    })
}

/// u' = u/(ρ+1) + ((ρ−1)/(ρ+1))P_k u + (1/(ρ+1))P_Y(2P_k u − u);
/// μ' = B_{x_k}⁺ u';  x' = A_{μ'}⁺ u'.
/// The mask solve must target the updated iterate u': aiming it at P_k u
/// instead returns B⁺B μ = μ identically (x_k spans the same range), so the
/// mask would never move.
pub fn egaussian_drs_step(state: &BlindState, data: &BlindData, rho: f64) -> Result<BlindState> {
    if rho < 0.0 {
        return Err(PhaseError::InvalidParameter("eGaussian-DRS: ρ < 0".into()));
    }
    let geo = &data.geo;
    let a_op = object_operator(state, geo)?;
    let u = &state.u;
    let pku = project_range(&a_op, u);
    let rku: Vec<Complex64> = pku.iter().zip(u.iter()).map(|(&p, &v)| 2.0 * p - v).collect();
    let py = project_data(&data.b, &rku);
    let c0 = 1.0 / (rho + 1.0);
    let c1 = (rho - 1.0) / (rho + 1.0);
    let new_u: Vec<Complex64> = (0..u.len())
        .map(|i| c0 * u[i] + c1 * pku[i] + c0 * py[i])
        .collect();
    let b_op = MaskSideOperator::new(state.object.clone(), geo.m, geo.shifts.clone())?;
    let mask = image_from(b_op.pseudo_inverse(&new_u), geo.m);
    let a_next = PtychographicOperator::new(mask.clone(), geo.n, geo.shifts.clone())?;
    let object = image_from(a_next.pseudo_inverse(&new_u), geo.n);
    Ok(BlindState {
        object,
        mask,
        u: new_u,
        v: state.v.clone(),
        epoch: state.epoch + 1,
    })
}

/// Transform-domain inner map selector for the loop drivers.
#[derive(Clone, Copy, Debug)]
pub enum InnerKind {
    Raar { beta: f64 },
    GaussianDrs { rho: f64 },
}

fn inner_map<Op: MeasurementOperator + ?Sized>(
    kind: InnerKind,
    op: &Op,
    b: &[f64],
    u: &[Complex64],
) -> Vec<Complex64> {
    match kind {
        InnerKind::Raar { beta } => {
            let pyu = project_data(b, u);
            let ryu: Vec<Complex64> =
                pyu.iter().zip(u.iter()).map(|(&p, &v)| 2.0 * p - v).collect();
            let pk = project_range(op, &ryu);
            (0..u.len())
                .map(|i| beta * u[i] + (1.0 - 2.0 * beta) * pyu[i] + beta * pk[i])
                .collect()
        }
        InnerKind::GaussianDrs { rho } => {
            let pku = project_range(op, u);
            let rku: Vec<Complex64> =
                pku.iter().zip(u.iter()).map(|(&p, &v)| 2.0 * p - v).collect();
            let py = project_data(b, &rku);
            let c0 = 1.0 / (rho + 1.0);
            let c1 = (rho - 1.0) / (rho + 1.0);
            (0..u.len())
                .map(|i| c0 * u[i] + c1 * pku[i] + c0 * py[i])
                .collect()
        }
    }
}

/// One epoch of the one-loop method: ℓ−1 inner sweeps, then the coupled
/// object/mask extraction of the corresponding extended single step.
/// ℓ = 1 reduces exactly to `eraar_step` / `egaussian_drs_step`.
pub fn one_loop(state: &BlindState, data: &BlindData, kind: InnerKind, ell: usize) -> Result<BlindState> {
    if ell < 1 {
        return Err(PhaseError::InvalidParameter("one_loop: ℓ < 1".into()));
    }
    match kind {
        InnerKind::Raar { beta } if !(0.5..1.0).contains(&beta) => {
            return Err(PhaseError::InvalidParameter("one_loop: β outside [½, 1)".into()))
        }
        InnerKind::GaussianDrs { rho } if rho < 0.0 => {
            return Err(PhaseError::InvalidParameter("one_loop: ρ < 0".into()))
        }
        _ => {}
    }
    let geo = &data.geo;
    let a_op = object_operator(state, geo)?;
    let mut w = state.u.clone();
    for _ in 0..ell - 1 {
        w = inner_map(kind, &a_op, &data.b, &w);
    }
    let warmed = BlindState {
        object: state.object.clone(),
        mask: state.mask.clone(),
        u: w,
        v: state.v.clone(),
        epoch: state.epoch,
    };
    match kind {
        InnerKind::Raar { beta } => eraar_step(&warmed, data, beta),
        InnerKind::GaussianDrs { rho } => egaussian_drs_step(&warmed, data, rho),
    }
}

/// Inner-map family for the alternating-minimization two-loop driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrsamKind {
    Gaussian,
    Poisson,
}

fn drsam_inner<Op: MeasurementOperator + ?Sized>(
    kind: DrsamKind,
    op: &Op,
    b: &[f64],
    w: &[Complex64],
) -> Vec<Complex64> {
    let r = reflect_range(op, w);
    match kind {
        // ½w + ½b⊙sgn(R w)
        DrsamKind::Gaussian => w
            .iter()
            .zip(r.iter().zip(b.iter()))
            .map(|(&wv, (&rv, &bv))| 0.5 * wv + 0.5 * bv * sgn1(rv))
            .collect(),
        // ½w − ⅓R w + ⅙sgn(R w)⊙√(|R w|² + 24b²)   (ρ = 1 constants)
        DrsamKind::Poisson => w
            .iter()
            .zip(r.iter().zip(b.iter()))
            .map(|(&wv, (&rv, &bv))| {
                let mag = (rv.norm_sqr() + 24.0 * bv * bv).sqrt();
                0.5 * wv - rv / 3.0 + mag / 6.0 * sgn1(rv)
            })
            .collect(),
    }
}

/// One epoch of the two-loop alternating minimization: ℓ_obj inner sweeps on
/// the object-side iterate u (reflector from A_k = A_{μ_k}), object refresh
/// x' = A_k⁺u; then ℓ_mask sweeps on the mask-side iterate v (reflector from
/// B = B_{x'}), mask refresh μ' = B⁺v. Both iterates warm-start from the
/// previous epoch.
pub fn two_loop_drsam(
    state: &BlindState,
    data: &BlindData,
    kind: DrsamKind,
    ell_obj: usize,
    ell_mask: usize,
) -> Result<BlindState> {
    if ell_obj < 1 || ell_mask < 1 {
        return Err(PhaseError::InvalidParameter("two_loop: ℓ < 1".into()));
    }
    let geo = &data.geo;
    let a_op = object_operator(state, geo)?;
    let mut u = state.u.clone();
    for _ in 0..ell_obj {
        u = drsam_inner(kind, &a_op, &data.b, &u);
    }
    let object = image_from(a_op.pseudo_inverse(&u), geo.n);
    let b_op = MaskSideOperator::new(object.clone(), geo.m, geo.shifts.clone())?;
    let mut v = match &state.v {
        Some(v) => v.clone(),
        None => b_op.forward(state.mask.as_slice()),
    };
    for _ in 0..ell_mask {
        v = drsam_inner(kind, &b_op, &data.b, &v);
    }
    let mask = image_from(b_op.pseudo_inverse(&v), geo.m);
    Ok(BlindState {
        object,
        mask,
        u,
        v: Some(v),
        epoch: state.epoch + 1,
    })
}

// ---------------------------------------------------------------------------
// Epoch driver with tracing.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub enum BlindMethod {
    Epie,
    Dm,
    Eraar { beta: f64 },
    EGaussianDrs { rho: f64 },
    OneLoop { kind: InnerKind, ell: usize },
    TwoLoop { kind: DrsamKind, ell_obj: usize, ell_mask: usize },
}

impl BlindMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BlindMethod::Epie => "epie",
            BlindMethod::Dm => "dm",
            BlindMethod::Eraar { .. } => "eraar",
            BlindMethod::EGaussianDrs { .. } => "egaussian-drs",
            BlindMethod::OneLoop { .. } => "one-loop",
            BlindMethod::TwoLoop { .. } => "two-loop-drsam",
        }
    }
}

/// Per-epoch record: residual, iterate norm, and affine-waived errors when
/// the truth is supplied.
#[derive(Clone, Copy, Debug)]
pub struct BlindRecord {
    pub epoch: usize,
    pub rr: f64,
    pub norm_u: f64,
    pub ms: f64,
    pub re_obj: Option<f64>,
    pub re_mask: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct BlindTrace {
    pub records: Vec<BlindRecord>,
}

impl BlindTrace {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::from("iter,re,rr,norm_u,ms,re_obj,re_mask\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.epoch,
                opt(r.re_obj),
                r.rr,
                r.norm_u,
                r.ms,
                opt(r.re_obj),
                opt(r.re_mask)
            ));
        }
        s
    }
}

/// Relative residual of the current estimates: ‖b − |A_k x_k|‖/‖b‖.
pub fn blind_residual(state: &BlindState, data: &BlindData) -> Result<f64> {
    let geo = &data.geo;
    let fft = Fft2::new(geo.frame_side(), geo.frame_side());
    let frames = geo.frames(&state.mask, &state.object, &fft);
    let nb: f64 = data.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        return Err(PhaseError::ZeroNorm("blind_residual: ‖b‖ = 0".into()));
    }
    let num: f64 = data
        .b
        .iter()
        .zip(frames.iter())
        .map(|(&bv, c)| {
            let d = bv - c.norm();
            d * d
        })
        .sum::<f64>()
        .sqrt();
    Ok(num / nb)
}

/// Run `epochs` epochs of the chosen method, stopping early when the
/// residual drops below `tol` or stagnates (relative change < 1e−10 over
/// 20 epochs). `truth` enables the affine-waived error columns.
pub fn run_blind(
    mut state: BlindState,
    data: &BlindData,
    method: BlindMethod,
    epochs: usize,
    tol: f64,
    seed: u64,
    truth: Option<(&ComplexImage, &ComplexImage)>,
) -> Result<(BlindState, BlindTrace)> {
    let start = Instant::now();
    let mut trace = BlindTrace::default();
    let mut rr_hist: Vec<f64> = Vec::new();
    let record = |state: &BlindState, trace: &mut BlindTrace| -> Result<f64> {
        let rr = blind_residual(state, data)?;
        let (re_obj, re_mask) = match truth {
            Some((x, mu)) => (
                Some(affine_phase_error(&state.object, x)?),
                Some(affine_phase_error(&state.mask, mu)?),
            ),
            None => (None, None),
        };
        trace.records.push(BlindRecord {
            epoch: state.epoch,
            rr,
            norm_u: state.u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            ms: start.elapsed().as_secs_f64() * 1e3,
            re_obj,
            re_mask,
        });
        Ok(rr)
    };
    let mut rr = record(&state, &mut trace)?;
    rr_hist.push(rr);
    for ep in 0..epochs {
        if rr < tol {
            break;
        }
        state = match method {
            BlindMethod::Epie => epie_epoch(&state, data, seed.wrapping_add(ep as u64))?,
            BlindMethod::Dm => dm_epoch(&state, data)?,
            BlindMethod::Eraar { beta } => eraar_step(&state, data, beta)?,
            BlindMethod::EGaussianDrs { rho } => egaussian_drs_step(&state, data, rho)?,
            BlindMethod::OneLoop { kind, ell } => one_loop(&state, data, kind, ell)?,
            BlindMethod::TwoLoop { kind, ell_obj, ell_mask } => {
                two_loop_drsam(&state, data, kind, ell_obj, ell_mask)?
            }
        };
        rr = record(&state, &mut trace)?;
        rr_hist.push(rr);
        if rr_hist.len() > 20 {
            let past = rr_hist[rr_hist.len() - 21];
            if (past - rr).abs() <= 1e-10 * past.max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    Ok((state, trace))
}

// ---------------------------------------------------------------------------
// Ambiguity constructors (test generators).
// ---------------------------------------------------------------------------

/// Affine-phase pair: ν(s) = μ(s)e^{−i(a + 2πk·s/n)}, x̂(r) = x(r)e^{i(b + 2πk·r/n)}.
/// Integer ramps k keep the construction exact under the periodic wrap of
/// the scan; each frame then differs by the constant phase e^{i(b−a)}e^{i2πk·t/n}.
pub fn make_affine_phase_pair(
    x: &ComplexImage,
    mu: &ComplexImage,
    a: f64,
    b: f64,
    k: (i64, i64),
) -> (ComplexImage, ComplexImage) {
    let n = x.height();
    let tau = 2.0 * std::f64::consts::PI;
    let ramp = |r: usize, c: usize| tau * (k.0 as f64 * r as f64 + k.1 as f64 * c as f64) / n as f64;
    let x_hat = ComplexImage::from_fn(x.height(), x.width(), |r, c| {
        x.get(r, c) * Complex64::from_polar(1.0, b + ramp(r, c))
    });
    let nu = ComplexImage::from_fn(mu.height(), mu.width(), |r, c| {
        mu.get(r, c) * Complex64::from_polar(1.0, -(a + ramp(r, c)))
    });
    (x_hat, nu)
}

/// Raster-scan ambiguity families for test generation.
pub enum RasterAmbiguity {
    /// τ×τ-block phase factors e^{i2π(i+j)/3} on the object and the opposite
    /// factors on the mask quadrants; exact for raster step τ = m/2, n = 3τ.
    BlockPhase,
    /// x̂ = e^{−iψ(r mod τ)}⊙x, μ̂ = e^{iψ(s mod τ)}⊙μ for an arbitrary
    /// complex τ×τ field ψ; exact for any raster with step τ.
    GridPathology { psi: Vec<Complex64> },
    /// Conjugate-inversion partner of the integer-f quadratic-phase mask at
    /// raster step τ = n/2 with a full-size mask (m = n).
    FresnelTwin { f: i64 },
}

/// Builds a (x̂, μ̂) pair producing the same raster-scan data as (x, μ).
pub fn make_raster_ambiguity(
    x: &ComplexImage,
    mu: &ComplexImage,
    scan: &ScanPattern,
    kind: &RasterAmbiguity,
) -> Result<(ComplexImage, ComplexImage)> {
    let n = x.height();
    let m = mu.height();
    let tau = scan.tau;
    match kind {
        RasterAmbiguity::BlockPhase => {
            if scan.q != 3 || m != 2 * tau || n != 3 * tau {
                return Err(PhaseError::InvalidParameter(
                    "block-phase ambiguity needs q = 3, m = 2τ, n = 3τ".into(),
                ));
            }
            let w = 2.0 * std::f64::consts::PI / 3.0;
            let x_hat = ComplexImage::from_fn(n, n, |r, c| {
                let phase = w * ((r / tau + c / tau) as f64);
                x.get(r, c) * Complex64::from_polar(1.0, phase)
            });
            let mu_hat = ComplexImage::from_fn(m, m, |r, c| {
                let phase = -w * ((r / tau + c / tau) as f64);
                mu.get(r, c) * Complex64::from_polar(1.0, phase)
            });
            Ok((x_hat, mu_hat))
        }
        RasterAmbiguity::GridPathology { psi } => {
            if psi.len() != tau * tau {
                return Err(PhaseError::DimensionMismatch("ψ must be τ×τ".into()));
            }
            if n % tau != 0 || m % tau != 0 {
                return Err(PhaseError::InvalidParameter(
                    "grid pathology needs τ | n and τ | m".into(),
                ));
            }
            let e = |v: Complex64| (Complex64::new(0.0, 1.0) * v).exp();
            let x_hat = ComplexImage::from_fn(n, n, |r, c| {
                x.get(r, c) / e(psi[(r % tau) * tau + c % tau])
            });
            let mu_hat = ComplexImage::from_fn(m, m, |r, c| {
                mu.get(r, c) * e(psi[(r % tau) * tau + c % tau])
            });
            Ok((x_hat, mu_hat))
        }
        RasterAmbiguity::FresnelTwin { f } => {
            if m != n || n % 2 != 0 || tau != n / 2 || scan.q != 2 {
                return Err(PhaseError::InvalidParameter(
                    "twin ambiguity needs m = n even, τ = n/2, q = 2".into(),
                ));
            }
            let mask = fresnel_mask(m, *f as f64);
            // Conjugate inversion ξ̌(i,j) = conj(ξ(n−1−i, n−1−j)).
            let check = |img: &ComplexImage| {
                ComplexImage::from_fn(n, n, |r, c| img.get(n - 1 - r, n - 1 - c).conj())
            };
            let h = {
                let mc = check(&mask);
                ComplexImage::from_fn(n, n, |r, c| mc.get(r, c).conj() * mask.get(r, c))
            };
            let xc = check(x);
            let x_hat = ComplexImage::from_fn(n, n, |r, c| xc.get(r, c) * h.get(r, c).conj());
            Ok((x_hat, mask))
        }
    }
}

/// Quadrant symmetry factor σ = (−1)^{f(1+m/2)} of h = conj(μ̌)⊙μ for the
/// integer-f quadratic-phase mask.
pub fn fresnel_twin_sigma(f: i64, m: usize) -> f64 {
    if (f * (1 + m as i64 / 2)) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
