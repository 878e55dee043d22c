//! Subcommand implementations. Each command resolves its parameters from the
//! experiment config (with documented defaults), runs deterministically from
//! the seed, and writes its outputs plus a manifest into the output directory.
//!
//! Trace CSVs written here carry only seed-determined columns (no wall-clock
//! timings), so re-running a command with the same config and seed reproduces
//! the files byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use phasekit::blind::{
    mpc_mask_init, run_blind, BlindData, BlindMethod, BlindState, BlindTrace, DrsamKind,
    InnerKind, MpcConfig,
};
use phasekit::holography::{
    autocorr_from_magnitudes, compose, dual_reference_deconvolve, extract_crosscorr,
    referenced_deconvolve, HoloMeasurement, ReferenceKind, ReferenceScheme,
};
use phasekit::init::{
    null_default_subset_size, null_init, optimal_preprocessing_init, random_init, spectral_init,
    InitReport,
};
use phasekit::loss_noise::{apply_poisson_noise, apply_thermal_noise, photon_scale_for_nsr};
use phasekit::masks_scans::{perturbed_fullrank, random_phase_mask};
use phasekit::operators::{CodedDiffractionOperator, MeasurementOperator, PtychographicOperator};
use phasekit::solvers::{
    aar_then_ap, optimal_rho, run, spectral_gap_lambda2, Algorithm, IterationTrace, RunResult,
    RunStatus, SolverConfig,
};
use phasekit::{ComplexImage, PhaseError, Result};

use crate::config::ExperimentConfig;
use crate::imageio::{read_image, write_image};
use crate::phantom::{head_phantom, random_phase_object, smooth_phantom};

/// Resolved run environment: configuration, output directory, seed, jobs.
pub struct RunContext {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
}

impl RunContext {
    /// Builds the context from an optional config file and command-line
    /// overrides. Overrides are folded into the config so the manifest's
    /// resolved configuration reflects what actually ran.
    pub fn new(
        config: Option<&Path>,
        seed: Option<u64>,
        out: Option<&Path>,
        jobs: Option<usize>,
    ) -> Result<Self> {
        let mut cfg = match config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = seed {
            cfg.set("run.seed", s.to_string());
        }
        if let Some(o) = out {
            cfg.set("run.out", o.display().to_string());
        }
        if let Some(j) = jobs {
            cfg.set("run.jobs", j.to_string());
        }
        let seed = cfg.get_u64("run.seed", 0)?;
        let jobs = cfg.get_usize("run.jobs", 1)?;
        if jobs == 0 {
            return Err(PhaseError::InvalidParameter("run.jobs must be ≥ 1".into()));
        }
        let out = PathBuf::from(cfg.get_str("run.out", "phasekit-out"));
        std::fs::create_dir_all(&out)?;
        Ok(Self { cfg, out, seed, jobs })
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.out.join(name), text)?;
        Ok(())
    }

    pub fn write_image(&self, name: &str, img: &ComplexImage) -> Result<()> {
        write_image(&self.out.join(name), img)
    }

    /// Writes `manifest.txt`: tool version, command, seed, jobs, output
    /// directory, and the full resolved configuration.
    pub fn write_manifest(&self, command: &str) -> Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "tool = phasekit {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "command = {command}");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "# resolved configuration");
        s.push_str(&self.cfg.resolved());
        self.write_text("manifest.txt", &s)
    }
}

// ---------------------------------------------------------------------------
// Shared builders.
// ---------------------------------------------------------------------------

const PI: f64 = std::f64::consts::PI;

/// Builds the test object from the `[object]` section.
/// Kinds: `rpp` (default; head-phantom modulus with random phases drawn
/// uniformly from [object.phase_min, object.phase_max]), `phantom`
/// (nonnegative head phantom), `smooth` (smooth blob phantom), `file`
/// (binary image at object.path).
pub fn build_object(cfg: &ExperimentConfig, seed: u64) -> Result<ComplexImage> {
    let kind = cfg.get_str("object.kind", "rpp");
    let n = cfg.get_usize("object.n", 32)?;
    if n == 0 {
        return Err(PhaseError::InvalidParameter("object.n must be ≥ 1".into()));
    }
    match kind.as_str() {
        "phantom" => Ok(head_phantom(n)),
        "smooth" => Ok(smooth_phantom(n, seed ^ 0x0b10b)),
        "rpp" => {
            let lo = cfg.get_f64("object.phase_min", -PI)?;
            let hi = cfg.get_f64("object.phase_max", PI)?;
            random_phase_object(&head_phantom(n), lo, hi, seed ^ 0x0b9ec7)
        }
        "file" => read_image(Path::new(cfg.require("object.path")?)),
        other => Err(PhaseError::InvalidParameter(format!(
            "object.kind `{other}` not recognized (rpp, phantom, smooth, file)"
        ))),
    }
}

/// Builds the coded-diffraction measurement operator from `[measurement]`:
/// `masks` random phase masks (default 4), `oversampled` true/false
/// (default false), masks drawn from `mask_seed` (default derived from the
/// run seed).
pub fn build_operator(
    cfg: &ExperimentConfig,
    object: &ComplexImage,
    seed: u64,
) -> Result<CodedDiffractionOperator> {
    let scheme = cfg.get_str("measurement.scheme", "coded");
    if scheme != "coded" {
        return Err(PhaseError::InvalidParameter(format!(
            "measurement.scheme `{scheme}` not recognized (coded)"
        )));
    }
    if object.width() != object.height() {
        return Err(PhaseError::InvalidParameter(
            "coded diffraction needs a square object".into(),
        ));
    }
    let count = cfg.get_usize("measurement.masks", 4)?;
    if count == 0 {
        return Err(PhaseError::InvalidParameter("measurement.masks must be ≥ 1".into()));
    }
    let oversampled = cfg.get_bool("measurement.oversampled", false)?;
    let mask_seed = cfg.get_u64("measurement.mask_seed", seed ^ 0x5eed)?;
    let masks: Result<Vec<ComplexImage>> = (0..count)
        .map(|k| random_phase_mask(object.height(), mask_seed.wrapping_add(k as u64)))
        .collect();
    CodedDiffractionOperator::new(masks?, oversampled)
}

/// Applies the `[noise]` section to clean amplitudes: `none` (default),
/// `poisson` with target `nsr`, or `thermal` with deviation `sigma`.
fn apply_noise(cfg: &ExperimentConfig, clean: &[f64], seed: u64) -> Result<Vec<f64>> {
    match cfg.get_str("noise.kind", "none").as_str() {
        "none" => Ok(clean.to_vec()),
        "poisson" => {
            let nsr = cfg.get_f64("noise.nsr", 0.1)?;
            let scale = photon_scale_for_nsr(clean, nsr)?;
            let intens: Vec<f64> = clean.iter().map(|&a| a * a).collect();
            Ok(apply_poisson_noise(&intens, scale, seed ^ 0x6e01)?.values)
        }
        "thermal" => {
            let sigma = cfg.get_f64("noise.sigma", 0.01)?;
            Ok(apply_thermal_noise(clean, sigma, seed ^ 0x6e02)?.values)
        }
        other => Err(PhaseError::InvalidParameter(format!(
            "noise.kind `{other}` not recognized (none, poisson, thermal)"
        ))),
    }
}

/// Runs the `[init]` strategy: `spectral` (default), `null`, `optimal`,
/// or `random`.
fn run_init(
    cfg: &ExperimentConfig,
    method: &str,
    op: &CodedDiffractionOperator,
    b: &[f64],
    seed: u64,
) -> Result<InitReport> {
    let y: Vec<f64> = b.iter().map(|&v| v * v).collect();
    match method {
        "spectral" => spectral_init(op, &y, op.frobenius_norm_sqr(), seed),
        "null" => {
            let default = null_default_subset_size(op.object_len(), op.data_len());
            let subset = cfg.get_usize("init.subset", default)?;
            null_init(op, b, subset, seed)
        }
        "optimal" => {
            let default = op.data_len() as f64 / op.object_len() as f64;
            let delta = cfg.get_f64("init.delta", default)?;
            optimal_preprocessing_init(op, &y, delta, seed)
        }
        "random" => {
            let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            random_init(op.object_len(), nb, seed)
        }
        other => Err(PhaseError::InvalidParameter(format!(
            "init.method `{other}` not recognized (spectral, null, optimal, random)"
        ))),
    }
}

fn parse_algorithm(name: &str) -> Result<Algorithm> {
    Ok(match name {
        "ap" => Algorithm::Ap,
        "aar" => Algorithm::Aar,
        "aar-swapped" => Algorithm::AarSwapped,
        "hio" => Algorithm::Hio,
        "raar" => Algorithm::Raar,
        "gaussian-drs" => Algorithm::GaussianDrs,
        "poisson-drs" => Algorithm::PoissonDrs,
        other => {
            return Err(PhaseError::InvalidParameter(format!(
                "solver.algorithm `{other}` not recognized \
                 (ap, aar, aar-swapped, hio, raar, gaussian-drs, poisson-drs, aar+ap)"
            )))
        }
    })
}

/// Stable trace CSV: the seed-determined columns only, so identical runs
/// produce identical bytes.
fn trace_csv(trace: &IterationTrace) -> String {
    let mut s = String::from("iter,re,rr,norm_u\n");
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.iter,
            r.re.map(|v| v.to_string()).unwrap_or_default(),
            r.rr,
            r.norm_u
        );
    }
    s
}

fn blind_trace_csv(trace: &BlindTrace) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from("iter,re_obj,re_mask,rr,norm_u\n");
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.epoch,
            opt(r.re_obj),
            opt(r.re_mask),
            r.rr,
            r.norm_u
        );
    }
    s
}

fn status_name(status: RunStatus) -> &'static str {
    match status {
        RunStatus::Converged => "converged",
        RunStatus::MaxIters => "max-iters",
        RunStatus::Stagnated => "stagnated",
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Simulates coded diffraction data: writes `object.pkim`, `mask_<k>.pkim`,
/// and `data.csv` (amplitudes, possibly noisy).
pub fn cmd_simulate(ctx: &RunContext) -> Result<()> {
    let object = build_object(&ctx.cfg, ctx.seed)?;
    ctx.write_image("object.pkim", &object)?;
    let op = build_operator(&ctx.cfg, &object, ctx.seed)?;
    for (k, mask) in op.masks().iter().enumerate() {
        ctx.write_image(&format!("mask_{k}.pkim"), mask)?;
    }
    let clean: Vec<f64> = op.forward(object.as_slice()).iter().map(|c| c.norm()).collect();
    let b = apply_noise(&ctx.cfg, &clean, ctx.seed)?;
    let mut csv = String::from("index,amplitude\n");
    for (i, v) in b.iter().enumerate() {
        let _ = writeln!(csv, "{i},{v}");
    }
    ctx.write_text("data.csv", &csv)?;
    ctx.write_manifest("simulate")
}

fn read_amplitudes(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PhaseError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            continue; // header
        }
        let field = line.split(',').nth(1).ok_or_else(|| {
            PhaseError::Parse(format!("{}: line {}: expected index,amplitude", path.display(), idx + 1))
        })?;
        let v: f64 = field.trim().parse().map_err(|_| {
            PhaseError::Parse(format!("{}: line {}: bad amplitude `{field}`", path.display(), idx + 1))
        })?;
        out.push(v);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

/// Reconstructs from previously simulated data in `run.data` (defaults to
/// the output directory): rebuilds the operator from the stored masks, runs
/// the configured initializer and solver, and writes `trace.csv`,
/// `estimate.pkim`, and `result.csv`.
pub fn cmd_reconstruct(ctx: &RunContext) -> Result<()> {
    let data_dir = PathBuf::from(ctx.cfg.get_str("run.data", &ctx.out.display().to_string()));
    let truth = read_image(&data_dir.join("object.pkim"))?;
    let count = ctx.cfg.get_usize("measurement.masks", 4)?;
    let oversampled = ctx.cfg.get_bool("measurement.oversampled", false)?;
    let masks: Result<Vec<ComplexImage>> = (0..count)
        .map(|k| read_image(&data_dir.join(format!("mask_{k}.pkim"))))
        .collect();
    let op = CodedDiffractionOperator::new(masks?, oversampled)?;
    let b = read_amplitudes(&data_dir.join("data.csv"))?;
    if b.len() != op.data_len() {
        return Err(PhaseError::DimensionMismatch(format!(
            "data.csv holds {} amplitudes, operator expects {}",
            b.len(),
            op.data_len()
        )));
    }

    let method = ctx.cfg.get_str("init.method", "spectral");
    let report = run_init(&ctx.cfg, &method, &op, &b, ctx.seed ^ 0x1217)?;
    let x0 = report.estimate;

    let algo = ctx.cfg.get_str("solver.algorithm", "aar+ap");
    let result: RunResult = if algo == "aar+ap" {
        let aar_iters = ctx.cfg.get_usize("solver.aar_iters", 300)?;
        let ap_iters = ctx.cfg.get_usize("solver.ap_iters", 100)?;
        aar_then_ap(&op, &b, &x0, aar_iters, ap_iters, Some(truth.as_slice()))?
    } else {
        let sc = SolverConfig::new(parse_algorithm(&algo)?)
            .with_beta(ctx.cfg.get_f64("solver.beta", 0.8)?)
            .with_rho(ctx.cfg.get_f64("solver.rho", 1.0)?)
            .with_iters(ctx.cfg.get_usize("solver.iters", 500)?)
            .with_tolerance(ctx.cfg.get_f64("solver.tol", 1e-12)?);
        run(&sc, &op, &b, &x0, Some(truth.as_slice()))?
    };

    ctx.write_text("trace.csv", &trace_csv(&result.trace))?;
    let estimate = ComplexImage::new(truth.height(), truth.width(), result.object)?;
    ctx.write_image("estimate.pkim", &estimate)?;
    let last = result.trace.records.last().expect("trace has at least the starting record");
    let mut summary = String::from("status,final_rr,final_re\n");
    let _ = writeln!(
        summary,
        "{},{},{}",
        status_name(result.status),
        last.rr,
        last.re.map(|v| v.to_string()).unwrap_or_default()
    );
    ctx.write_text("result.csv", &summary)?;
    ctx.write_manifest("reconstruct")
}

// ---------------------------------------------------------------------------
// blind
// ---------------------------------------------------------------------------

fn parse_blind_method(cfg: &ExperimentConfig) -> Result<BlindMethod> {
    let name = cfg.get_str("blind.method", "twoloop-gaussian");
    let beta = cfg.get_f64("blind.beta", 0.8)?;
    let rho = cfg.get_f64("blind.rho", 1.0)?;
    let ell = cfg.get_usize("blind.ell", 5)?;
    let ell_obj = cfg.get_usize("blind.ell_obj", 5)?;
    let ell_mask = cfg.get_usize("blind.ell_mask", 5)?;
    Ok(match name.as_str() {
        "epie" => BlindMethod::Epie,
        "dm" => BlindMethod::Dm,
        "eraar" => BlindMethod::Eraar { beta },
        "egaussian-drs" => BlindMethod::EGaussianDrs { rho },
        "oneloop-raar" => BlindMethod::OneLoop { kind: InnerKind::Raar { beta }, ell },
        "oneloop-gdrs" => BlindMethod::OneLoop { kind: InnerKind::GaussianDrs { rho }, ell },
        "twoloop-gaussian" => {
            BlindMethod::TwoLoop { kind: DrsamKind::Gaussian, ell_obj, ell_mask }
        }
        "twoloop-poisson" => BlindMethod::TwoLoop { kind: DrsamKind::Poisson, ell_obj, ell_mask },
        other => {
            return Err(PhaseError::InvalidParameter(format!(
                "blind.method `{other}` not recognized (epie, dm, eraar, egaussian-drs, \
                 oneloop-raar, oneloop-gdrs, twoloop-gaussian, twoloop-poisson)"
            )))
        }
    })
}

/// Blind ptychography: simulates frames from a random-phase mask and the
/// configured object over a perturbed raster scan, starts the mask from a
/// phase-perturbed copy of the truth, and runs the chosen epoch method.
/// Writes truth and estimate images plus `blind_trace.csv`.
pub fn cmd_blind(ctx: &RunContext) -> Result<()> {
    let cfg = &ctx.cfg;
    let object = build_object(cfg, ctx.seed)?;
    let n = object.height();
    if object.width() != n {
        return Err(PhaseError::InvalidParameter("blind needs a square object".into()));
    }
    let m = cfg.get_usize("blind.mask", 16)?;
    let tau = cfg.get_usize("blind.tau", m / 2)?;
    if tau == 0 || n % tau != 0 {
        return Err(PhaseError::InvalidParameter(format!(
            "blind.tau = {tau} must divide the object side {n}"
        )));
    }
    let jitter = cfg.get_i64("blind.jitter", 1)?;
    let scan = perturbed_fullrank(n, n / tau, jitter, ctx.seed ^ 0x5ca0)?;
    let mask_truth = random_phase_mask(m, ctx.seed ^ 0x3a5f)?;
    let geo = phasekit::operators::PtychoGeometry::new(n, m, scan.shifts.clone())?;
    let data = BlindData::simulate(geo, &mask_truth, &object)?;

    let mpc = MpcConfig {
        delta: cfg.get_f64("blind.delta", 0.5)?,
        ramp: (cfg.get_i64("blind.ramp1", 0)?, cfg.get_i64("blind.ramp2", 0)?),
        seed: ctx.seed ^ 0x311,
    };
    let mask0 = mpc_mask_init(&mask_truth, n, &mpc)?;
    // Object start: backproject the data through the initial mask.
    let op0 = PtychographicOperator::new(mask0.clone(), n, scan.shifts.clone())?;
    let bc: Vec<Complex64> = data.b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let object0 = ComplexImage::new(n, n, op0.pseudo_inverse(&bc))?;
    let state = BlindState::new(object0, mask0, &data)?;

    let method = parse_blind_method(cfg)?;
    let epochs = cfg.get_usize("blind.epochs", 150)?;
    let tol = cfg.get_f64("blind.tol", 1e-10)?;
    let (state, trace) = run_blind(
        state,
        &data,
        method,
        epochs,
        tol,
        ctx.seed ^ 0x77,
        Some((&object, &mask_truth)),
    )?;

    ctx.write_image("object.pkim", &object)?;
    ctx.write_image("mask.pkim", &mask_truth)?;
    ctx.write_image("object_estimate.pkim", &state.object)?;
    ctx.write_image("mask_estimate.pkim", &state.mask)?;
    ctx.write_text("scan.csv", &scan.to_csv())?;
    ctx.write_text("blind_trace.csv", &blind_trace_csv(&trace))?;
    ctx.write_manifest("blind")
}

// ---------------------------------------------------------------------------
// holo
// ---------------------------------------------------------------------------

fn parse_reference_kind(name: &str) -> Result<ReferenceKind> {
    Ok(match name {
        "pinhole" => ReferenceKind::Pinhole,
        "slit" => ReferenceKind::Slit,
        "block" => ReferenceKind::Block,
        "dual" => ReferenceKind::Dual,
        other => {
            return Err(PhaseError::InvalidParameter(format!(
                "holo.schemes entry `{other}` not recognized (pinhole, slit, block, dual)"
            )))
        }
    })
}

/// Referenced holography: composes the specimen with each configured
/// reference scheme, simulates the oversampled magnitude grid (optionally
/// under a Poisson photon budget), recovers by deconvolution, and writes
/// `errors.csv` with one row per (scheme, budget) plus the recovered images.
pub fn cmd_holo(ctx: &RunContext) -> Result<()> {
    let cfg = &ctx.cfg;
    let n = cfg.get_usize("holo.n", 16)?;
    let specimen = match cfg.get_str("object.kind", "smooth").as_str() {
        "smooth" => smooth_phantom(n, ctx.seed ^ 0x401),
        "phantom" => head_phantom(n),
        "file" => read_image(Path::new(cfg.require("object.path")?))?,
        other => {
            return Err(PhaseError::InvalidParameter(format!(
                "object.kind `{other}` not supported for holo (smooth, phantom, file)"
            )))
        }
    };
    if specimen.height() != n || specimen.width() != n {
        return Err(PhaseError::DimensionMismatch(format!(
            "holo specimen must be {n}×{n}"
        )));
    }
    let nx = specimen.as_slice().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nx == 0.0 {
        return Err(PhaseError::ZeroNorm("holo specimen is identically zero".into()));
    }
    let factor = cfg.get_usize("holo.oversample", 8)?;
    let schemes = cfg.get_list("holo.schemes", &["pinhole", "slit", "block", "dual"]);
    let budget_specs = cfg.get_list("holo.budgets", &["inf"]);
    let budgets: Result<Vec<Option<f64>>> = budget_specs
        .iter()
        .map(|s| match s.as_str() {
            "inf" | "none" => Ok(None),
            raw => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| PhaseError::Parse(format!("holo.budgets: bad value `{raw}`"))),
        })
        .collect();
    let budgets = budgets?;

    let mut csv = String::from("scheme,photon_budget,rel_error\n");
    for (si, name) in schemes.iter().enumerate() {
        let kind = parse_reference_kind(name)?;
        let scheme = ReferenceScheme::new(kind, n)?;
        let comp = compose(&specimen, &scheme)?;
        let meas = HoloMeasurement::simulate(&comp, factor * n, factor * n)?;
        let total: f64 = meas.grid().iter().sum();
        let mut last_recovered = None;
        for (bi, budget) in budgets.iter().enumerate() {
            let noisy;
            let (m, wrap_tol) = match budget {
                Some(photons) => {
                    let noise_seed = ctx.seed ^ 0x0407 ^ ((si as u64) << 32) ^ (bi as u64);
                    noisy = meas.with_poisson_noise(photons / total, noise_seed)?;
                    (&noisy, f64::INFINITY)
                }
                None => (&meas, 1e-6),
            };
            let recovered = match kind {
                ReferenceKind::Dual => {
                    let (rp, rb) = scheme.dual_portions()?;
                    dual_reference_deconvolve(m, &rp, &rb)?
                }
                _ => {
                    let ac = autocorr_from_magnitudes(m, wrap_tol)?;
                    let window = extract_crosscorr(&ac, n)?;
                    referenced_deconvolve(&window, &scheme.reference()?)?
                }
            };
            let err = recovered
                .as_slice()
                .iter()
                .zip(specimen.as_slice())
                .map(|(&a, &b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / nx;
            let label = budget.map(|p| p.to_string()).unwrap_or_else(|| "inf".into());
            let _ = writeln!(csv, "{name},{label},{err}");
            last_recovered = Some(recovered);
        }
        if let Some(img) = last_recovered {
            ctx.write_image(&format!("recovery_{name}.pkim"), &img)?;
        }
    }
    ctx.write_image("specimen.pkim", &specimen)?;
    ctx.write_text("errors.csv", &csv)?;
    ctx.write_manifest("holo")
}

// ---------------------------------------------------------------------------
// init-compare
// ---------------------------------------------------------------------------

/// Compares initializers over repeated trials: fresh object and masks per
/// trial seed, one CSV row per (method, seed) with the truth correlation.
pub fn cmd_init_compare(ctx: &RunContext) -> Result<()> {
    let cfg = &ctx.cfg;
    let trials = cfg.get_usize("init.trials", 10)?;
    let methods = cfg.get_list("init.methods", &["spectral", "null", "optimal", "random"]);
    let mut csv = String::from("method,seed,correlation,iterations\n");
    for t in 0..trials as u64 {
        let trial_seed = ctx.seed.wrapping_add(t);
        let object = build_object(cfg, trial_seed)?;
        let op = build_operator(cfg, &object, trial_seed)?;
        let b: Vec<f64> = op.forward(object.as_slice()).iter().map(|c| c.norm()).collect();
        let b = apply_noise(cfg, &b, trial_seed)?;
        for method in &methods {
            let report =
                run_init(cfg, method, &op, &b, trial_seed ^ 0x1217)?.with_correlation(object.as_slice());
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                report.method,
                trial_seed,
                report.correlation.map(|c| c.to_string()).unwrap_or_default(),
                report.iterations
            );
        }
    }
    ctx.write_text("init_compare.csv", &csv)?;
    ctx.write_manifest("init-compare")
}

// ---------------------------------------------------------------------------
// spectral-gap
// ---------------------------------------------------------------------------

/// Spectral-gap diagnostic at the configured object: reports λ₂, the
/// penalty ρ* = 2λ₂√(1−λ₂²) minimizing the splitting rate, and the
/// predicted contraction factors λ₂² (projections) and λ₂ (reflections).
pub fn cmd_spectral_gap(ctx: &RunContext) -> Result<()> {
    let object = build_object(&ctx.cfg, ctx.seed)?;
    let op = build_operator(&ctx.cfg, &object, ctx.seed)?;
    let lam2 = spectral_gap_lambda2(&op, object.as_slice())?;
    let rho = optimal_rho(lam2)?;
    let mut csv = String::from("lambda2,optimal_rho,rate_ap,rate_aar\n");
    let _ = writeln!(csv, "{lam2},{rho},{},{lam2}", lam2 * lam2);
    ctx.write_text("gap.csv", &csv)?;
    ctx.write_manifest("spectral-gap")
}
