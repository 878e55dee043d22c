use std::time::Instant;

use num_complex::Complex64;

use crate::error::{PhaseError, Result};
use crate::loss_noise::intensity_gradient;
use crate::metrics::{dist, relative_residual, sgn1};
use crate::operators::{project_data, project_range, reflect_data, reflect_range, MeasurementOperator};

/// Fixed-point iteration family selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Alternating projections (error reduction), object domain.
    Ap,
    /// Averaged alternating reflections, ½I + ½R_Y R_X.
    Aar,
    /// AAR with the reflections applied in the opposite order, ½I + ½R_X R_Y.
    AarSwapped,
    /// Hybrid input-output with relaxation β.
    Hio,
    /// Relaxed AAR with relaxation β.
    Raar,
    /// Douglas–Rachford splitting of the amplitude loss with penalty ρ.
    GaussianDrs,
    /// Douglas–Rachford splitting of the Poisson loss with penalty ρ.
    PoissonDrs,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ap => "ap",
            Algorithm::Aar => "aar",
            Algorithm::AarSwapped => "aar-swapped",
            Algorithm::Hio => "hio",
            Algorithm::Raar => "raar",
            Algorithm::GaussianDrs => "gaussian-drs",
            Algorithm::PoissonDrs => "poisson-drs",
        }
    }

    /// Iterates live in the transform domain (true) or object domain (false).
    pub fn transform_domain(self) -> bool {
        !matches!(self, Algorithm::Ap)
    }
}

/// Run parameters. β applies to HIO/RAAR, ρ to the DRS family, τ to
/// Wirtinger flow; the others ignore them.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub beta: f64,
    pub rho: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub tol_rr: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            beta: 0.8,
            rho: 1.0,
            tau: 0.2,
            max_iters: 500,
            tol_rr: 1e-12,
            seed: 0,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_rr = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        match self.algorithm {
            Algorithm::Hio | Algorithm::Raar => {
                if !(0.0..=1.0).contains(&self.beta) {
                    return Err(PhaseError::InvalidParameter(format!(
                        "β = {} outside [0, 1]",
                        self.beta
                    )));
                }
            }
            Algorithm::GaussianDrs => {
                if self.rho < 0.0 {
                    return Err(PhaseError::InvalidParameter("ρ < 0".into()));
                }
            }
            Algorithm::PoissonDrs => {
                if self.rho <= 0.0 {
                    return Err(PhaseError::InvalidParameter(
                        "Poisson splitting needs ρ > 0".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// One per-iteration record. `re` is filled only when the truth is supplied.
#[derive(Clone, Copy, Debug)]
pub struct TraceRecord {
    pub iter: usize,
    pub re: Option<f64>,
    pub rr: f64,
    pub norm_u: f64,
    pub ms: f64,
}

/// Per-run iteration history.
#[derive(Clone, Debug, Default)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn push(&mut self, rec: TraceRecord) {
        debug_assert!(self
            .records
            .last()
            .map(|r| r.iter < rec.iter)
            .unwrap_or(true));
        self.records.push(rec);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,re,rr,norm_u,ms\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iter,
                r.re.map(|v| v.to_string()).unwrap_or_default(),
                r.rr,
                r.norm_u,
                r.ms
            ));
        }
        s
    }

    /// Standard trace file name `<algo>_<seed>.csv`.
    pub fn file_name(algorithm: Algorithm, seed: u64) -> String {
        format!("{}_{}.csv", algorithm.name(), seed)
    }

    /// Asymptotic geometric contraction factor: exp of the least-squares
    /// slope of log RE over the last `window` records, taken only after the
    /// error has entered the asymptotic regime (RE < `threshold`).
    pub fn fitted_rate(&self, window: usize, threshold: f64) -> Option<f64> {
        let entered = self
            .records
            .iter()
            .position(|r| r.re.map(|v| v < threshold).unwrap_or(false))?;
        let usable: Vec<(f64, f64)> = self.records[entered..]
            .iter()
            .filter_map(|r| {
                let re = r.re?;
                (re.is_finite() && re > 0.0).then(|| (r.iter as f64, re.ln()))
            })
            .collect();
        if usable.len() < 2 {
            return None;
        }
        let tail = &usable[usable.len().saturating_sub(window)..];
        let n = tail.len() as f64;
        let sx: f64 = tail.iter().map(|p| p.0).sum();
        let sy: f64 = tail.iter().map(|p| p.1).sum();
        let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-30 {
            return None;
        }
        Some(((n * sxy - sx * sy) / denom).exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Stagnated,
}

/// Outcome of a solver run: object estimate, raw final iterate, history.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub object: Vec<Complex64>,
    pub final_iterate: Vec<Complex64>,
    pub trace: IterationTrace,
    pub status: RunStatus,
}

// ---------------------------------------------------------------------------
// Step maps. Generic forms take projection closures so the same update rules
// apply to arbitrary constraint pairs (used by the divergence diagnostics);
// the public forms specialize to (range(A), amplitude torus).
// ---------------------------------------------------------------------------

fn reflect(p: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
    p.iter().zip(u.iter()).map(|(&pv, &uv)| 2.0 * pv - uv).collect()
}

/// ½u + ½R_Y R_X u for arbitrary projections.
pub fn aar_step_with(
    px: impl Fn(&[Complex64]) -> Vec<Complex64>,
    py: impl Fn(&[Complex64]) -> Vec<Complex64>,
    u: &[Complex64],
) -> Vec<Complex64> {
    let rx = reflect(&px(u), u);
    let ryrx = reflect(&py(&rx), &rx);
    u.iter()
        .zip(ryrx.iter())
        .map(|(&uv, &rv)| 0.5 * uv + 0.5 * rv)
        .collect()
}

/// ½[R_X(R_Y + (β−1)P_Y) + I + (1−β)P_Y] v for arbitrary projections.
pub fn hio_step_with(
    px: impl Fn(&[Complex64]) -> Vec<Complex64>,
    py: impl Fn(&[Complex64]) -> Vec<Complex64>,
    v: &[Complex64],
    beta: f64,
) -> Vec<Complex64> {
    let pyv = py(v);
    let inner: Vec<Complex64> = pyv
        .iter()
        .zip(v.iter())
        .map(|(&p, &uv)| (2.0 * p - uv) + (beta - 1.0) * p)
        .collect();
    let rx = reflect(&px(&inner), &inner);
    rx.iter()
        .zip(v.iter())
        .zip(pyv.iter())
        .map(|((&r, &uv), &p)| 0.5 * (r + uv + (1.0 - beta) * p))
        .collect()
}

/// β(½I + ½R_X R_Y)u + (1−β)P_Y u for arbitrary projections.
pub fn raar_step_with(
    px: impl Fn(&[Complex64]) -> Vec<Complex64>,
    py: impl Fn(&[Complex64]) -> Vec<Complex64>,
    u: &[Complex64],
    beta: f64,
) -> Vec<Complex64> {
    let pyu = py(u);
    let ry = reflect(&pyu, u);
    let rxry = reflect(&px(&ry), &ry);
    u.iter()
        .zip(rxry.iter())
        .zip(pyu.iter())
        .map(|((&uv, &r), &p)| beta * (0.5 * uv + 0.5 * r) + (1.0 - beta) * p)
        .collect()
}

/// Object-domain alternating projections: x' = A*[b⊙sgn(Ax)].
pub fn ap_step<Op: MeasurementOperator + ?Sized>(op: &Op, b: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    op.adjoint(&project_data(b, &op.forward(x)))
}

/// Transform-domain AAR: u' = ½u + ½R_Y R_X u.
pub fn aar_step<Op: MeasurementOperator + ?Sized>(op: &Op, b: &[f64], u: &[Complex64]) -> Vec<Complex64> {
    aar_step_with(|v| project_range(op, v), |v| project_data(b, v), u)
}

/// AAR with the opposite reflection order: u' = ½u + ½R_X R_Y u.
pub fn aar_step_swapped<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    u: &[Complex64],
) -> Vec<Complex64> {
    let ry = reflect_data(b, u);
    let rxry = reflect_range(op, &ry);
    u.iter()
        .zip(rxry.iter())
        .map(|(&uv, &rv)| 0.5 * uv + 0.5 * rv)
        .collect()
}

/// Three-term rewriting of the AAR map: u + P_Y R_X u − P_X u. Algebraically
/// identical to `aar_step`; exposed for regression checks.
pub fn aar_step_three_term<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    u: &[Complex64],
) -> Vec<Complex64> {
    let pxu = project_range(op, u);
    let rx: Vec<Complex64> = pxu
        .iter()
        .zip(u.iter())
        .map(|(&p, &uv)| 2.0 * p - uv)
        .collect();
    let pyrx = project_data(b, &rx);
    u.iter()
        .zip(pyrx.iter())
        .zip(pxu.iter())
        .map(|((&uv, &py), &px)| uv + py - px)
        .collect()
}

/// Documented negative-control mode: the object-domain version of AAR,
/// z' = A⁺[(½I + ½R_Y R_X)(Az)]. Known to underperform the transform-domain
/// iteration; kept for comparison runs only.
pub fn aar_object_domain_step<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    z: &[Complex64],
) -> Vec<Complex64> {
    op.pseudo_inverse(&aar_step(op, b, &op.forward(z)))
}

/// HIO: v' = ½[R_X(R_Y + (β−1)P_Y) + I + (1−β)P_Y] v.
pub fn hio_step<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    v: &[Complex64],
    beta: f64,
) -> Vec<Complex64> {
    hio_step_with(|w| project_range(op, w), |w| project_data(b, w), v, beta)
}

/// RAAR: u' = β(½I + ½R_X R_Y)u + (1−β)P_Y u.
pub fn raar_step<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    u: &[Complex64],
    beta: f64,
) -> Vec<Complex64> {
    raar_step_with(|w| project_range(op, w), |w| project_data(b, w), u, beta)
}

/// Amplitude-loss Douglas–Rachford:
/// u' = u/(ρ+1) + ((ρ−1)/(ρ+1))P_X u + (1/(ρ+1))·b⊙sgn(R_X u).
pub fn gaussian_drs_step<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    u: &[Complex64],
    rho: f64,
) -> Vec<Complex64> {
    let px = project_range(op, u);
    let rx: Vec<Complex64> = px
        .iter()
        .zip(u.iter())
        .map(|(&p, &uv)| 2.0 * p - uv)
        .collect();
    let c0 = 1.0 / (rho + 1.0);
    let c1 = (rho - 1.0) / (rho + 1.0);
    u.iter()
        .zip(px.iter())
        .zip(rx.iter().zip(b.iter()))
        .map(|((&uv, &p), (&r, &bv))| c0 * uv + c1 * p + c0 * bv * sgn1(r))
        .collect()
}

/// Poisson-loss Douglas–Rachford:
/// u' = ½u − (1/(ρ+2))R_X u + (ρ/(2(ρ+2)))·√(|R_X u|² + 8(2+ρ)b²/ρ²)⊙sgn(R_X u).
pub fn poisson_drs_step<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    u: &[Complex64],
    rho: f64,
) -> Result<Vec<Complex64>> {
    if rho <= 0.0 {
        return Err(PhaseError::InvalidParameter(
            "Poisson splitting needs ρ > 0".into(),
        ));
    }
    let rx = reflect_range(op, u);
    let c1 = 1.0 / (rho + 2.0);
    let c2 = rho / (2.0 * (rho + 2.0));
    let bscale = 8.0 * (2.0 + rho) / (rho * rho);
    Ok(u
        .iter()
        .zip(rx.iter())
        .zip(b.iter())
        .map(|((&uv, &r), &bv)| {
            let mag = (r.norm_sqr() + bscale * bv * bv).sqrt();
            0.5 * uv - c1 * r + c2 * mag * sgn1(r)
        })
        .collect())
}

/// Constant-step intensity-loss gradient descent:
/// z_{j+1} = z_j − (τ/‖z₀‖²)·∇L(z_j). Records the trace against the truth
/// when supplied; `rows` are the sensing vectors a_k (row-major), y = b².
pub fn wirtinger_flow(
    rows: &[Complex64],
    n: usize,
    z0: &[Complex64],
    y: &[f64],
    tau: f64,
    iters: usize,
    truth: Option<&[Complex64]>,
) -> Result<(Vec<Complex64>, IterationTrace)> {
    let nz0: f64 = z0.iter().map(|c| c.norm_sqr()).sum();
    if nz0 == 0.0 {
        return Err(PhaseError::ZeroNorm("wirtinger_flow: ‖z₀‖ = 0".into()));
    }
    let step = tau / nz0;
    let b: Vec<f64> = y.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let start = Instant::now();
    let mut z = z0.to_vec();
    let mut trace = IterationTrace::default();
    let record = |z: &[Complex64], it: usize, trace: &mut IterationTrace, start: &Instant| {
        let au: Vec<Complex64> = (0..y.len())
            .map(|k| {
                rows[k * n..(k + 1) * n]
                    .iter()
                    .zip(z.iter())
                    .map(|(&a, &v)| a.conj() * v)
                    .sum()
            })
            .collect();
        let rr = relative_residual(&b, &au).unwrap_or(f64::NAN);
        let re = truth.map(|x| {
            let nx: f64 = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            dist(z, x).map(|d| d / nx).unwrap_or(f64::NAN)
        });
        trace.push(TraceRecord {
            iter: it,
            re,
            rr,
            norm_u: z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
    };
    record(&z, 0, &mut trace, &start);
    for it in 1..=iters {
        let g = intensity_gradient(rows, n, &z, y);
        for (zv, gv) in z.iter_mut().zip(g.iter()) {
            *zv -= step * gv;
        }
        record(&z, it, &mut trace, &start);
    }
    Ok((z, trace))
}

const STAGNATION_WINDOW: usize = 50;
const STAGNATION_TOL: f64 = 1e-12;

/// Generic driver: iterates the configured step from an object-domain start
/// `x0`, recording RR (and RE against `truth` when given) per iteration.
/// Transform-domain methods iterate u with u₀ = A x₀ and report A⁺u as the
/// object estimate; AP iterates the object directly.
pub fn run<Op: MeasurementOperator + ?Sized>(
    config: &SolverConfig,
    op: &Op,
    b: &[f64],
    x0: &[Complex64],
    truth: Option<&[Complex64]>,
) -> Result<RunResult> {
    config.validate()?;
    if b.len() != op.data_len() || x0.len() != op.object_len() {
        return Err(PhaseError::DimensionMismatch("run: shape mismatch".into()));
    }
    let transform = config.algorithm.transform_domain();
    let mut u = if transform { op.forward(x0) } else { x0.to_vec() };
    let start = Instant::now();
    let mut trace = IterationTrace::default();
    let mut rr_history: Vec<f64> = Vec::new();
    let truth_norm = truth.map(|x| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());

    let record = |u: &[Complex64], it: usize, trace: &mut IterationTrace| -> Result<(f64, Vec<Complex64>)> {
        let object = if transform { op.pseudo_inverse(u) } else { u.to_vec() };
        let field = op.forward(&object);
        let rr = relative_residual(b, &field)?;
        let re = truth.map(|x| dist(&object, x).map(|d| d / truth_norm.unwrap()).unwrap_or(f64::NAN));
        trace.push(TraceRecord {
            iter: it,
            re,
            rr,
            norm_u: u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        Ok((rr, object))
    };

    let (mut rr, mut object) = record(&u, 0, &mut trace)?;
    rr_history.push(rr);
    let mut status = RunStatus::MaxIters;
    if rr < config.tol_rr {
        status = RunStatus::Converged;
    } else {
        for it in 1..=config.max_iters {
            u = match config.algorithm {
                Algorithm::Ap => ap_step(op, b, &u),
                Algorithm::Aar => aar_step(op, b, &u),
                Algorithm::AarSwapped => aar_step_swapped(op, b, &u),
                Algorithm::Hio => hio_step(op, b, &u, config.beta),
                Algorithm::Raar => raar_step(op, b, &u, config.beta),
                Algorithm::GaussianDrs => gaussian_drs_step(op, b, &u, config.rho),
                Algorithm::PoissonDrs => poisson_drs_step(op, b, &u, config.rho)?,
            };
            let (r, o) = record(&u, it, &mut trace)?;
            rr = r;
            object = o;
            rr_history.push(rr);
            if rr < config.tol_rr {
                status = RunStatus::Converged;
                break;
            }
            if rr_history.len() > STAGNATION_WINDOW {
                let past = rr_history[rr_history.len() - 1 - STAGNATION_WINDOW];
                if (past - rr).abs() <= STAGNATION_TOL * past.max(f64::MIN_POSITIVE) {
                    status = RunStatus::Stagnated;
                    break;
                }
            }
        }
    }
    Ok(RunResult {
        object,
        final_iterate: u,
        trace,
        status,
    })
}

/// Two-phase preset: a reflection-dominant warm-up followed by alternating
/// projections (the "apply P_X at the right timing" handoff). Returns the
/// concatenated trace with a monotone iteration index.
pub fn aar_then_ap<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    x0: &[Complex64],
    aar_iters: usize,
    ap_iters: usize,
    truth: Option<&[Complex64]>,
) -> Result<RunResult> {
    let aar_cfg = SolverConfig::new(Algorithm::Aar)
        .with_iters(aar_iters)
        .with_tolerance(0.0);
    let first = run(&aar_cfg, op, b, x0, truth)?;
    let ap_cfg = SolverConfig::new(Algorithm::Ap)
        .with_iters(ap_iters)
        .with_tolerance(0.0);
    // Hand the AAR output to AP through the range projection.
    let handoff = op.pseudo_inverse(&first.final_iterate);
    let mut second = run(&ap_cfg, op, b, &handoff, truth)?;
    let mut trace = first.trace;
    let offset = trace.records.last().map(|r| r.iter).unwrap_or(0);
    for rec in second.trace.records.drain(1..) {
        trace.push(TraceRecord {
            iter: rec.iter + offset,
            ..rec
        });
    }
    Ok(RunResult {
        object: second.object,
        final_iterate: second.final_iterate,
        trace,
        status: second.status,
    })
}

// ---------------------------------------------------------------------------
// Spectral-gap diagnostics.
// ---------------------------------------------------------------------------

/// Real embedding V(x) = (Re x; Im x).
pub fn real_embed(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|c| c.re).chain(x.iter().map(|c| c.im)).collect()
}

/// Second-largest singular value of 𝓑 = [−Re(B) Im(B)] with
/// B = diag[sgn(conj(Ax))]·A. Matrix-free power method on 𝓑ᵀ𝓑 with the
/// known leading singular vector V(x) (singular value 1) deflated.
pub fn spectral_gap_lambda2<Op: MeasurementOperator + ?Sized>(
    op: &Op,
    x: &[Complex64],
) -> Result<f64> {
    let ax = op.forward(x);
    if ax.iter().any(|c| c.norm() < 1e-14) {
        return Err(PhaseError::InvalidParameter(
            "spectral gap undefined: Ax has vanishing components".into(),
        ));
    }
    let d: Vec<Complex64> = ax.iter().map(|&c| sgn1(c.conj())).collect();
    let n = op.object_len();
    // Leading singular pair of 𝓑 in the real picture.
    let mut lead = real_embed(x);
    let ln: f64 = lead.iter().map(|v| v * v).sum::<f64>().sqrt();
    lead.iter_mut().for_each(|v| *v /= ln);
    // 𝓑ᵀ𝓑 w for w = (p, q) ↔ c = p + iq:
    //   𝓑w  = −Re(d ⊙ A c)
    //   𝓑ᵀr = −V(A*(conj(d) ⊙ r))  for real r,
    // so 𝓑ᵀ𝓑 w = V(A*(conj(d) ⊙ Re(d ⊙ A c))).
    let apply = |w: &[f64]| -> Vec<f64> {
        let c: Vec<Complex64> = (0..n).map(|i| Complex64::new(w[i], w[i + n])).collect();
        let ac = op.forward(&c);
        let r: Vec<Complex64> = ac
            .iter()
            .zip(d.iter())
            .map(|(&a, &dv)| Complex64::new((dv * a).re, 0.0) * dv.conj())
            .collect();
        real_embed(&op.adjoint(&r))
    };
    let deflate = |w: &mut Vec<f64>| {
        let ip: f64 = w.iter().zip(lead.iter()).map(|(a, b)| a * b).sum();
        for (wv, &lv) in w.iter_mut().zip(lead.iter()) {
            *wv -= ip * lv;
        }
    };
    // Deterministic start.
    let mut state = 0x2545f4914f6cdd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut w: Vec<f64> = (0..2 * n).map(|_| next()).collect();
    deflate(&mut w);
    let nw: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= nw);
    let mut lambda_sq = 0.0;
    for _ in 0..20000 {
        let mut mw = apply(&w);
        deflate(&mut mw);
        let new_lambda: f64 = w.iter().zip(mw.iter()).map(|(a, b)| a * b).sum();
        let nm: f64 = mw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nm == 0.0 {
            return Ok(0.0);
        }
        let resid: f64 = mw
            .iter()
            .zip(w.iter())
            .map(|(&m, &v)| (m - new_lambda * v) * (m - new_lambda * v))
            .sum::<f64>()
            .sqrt();
        w = mw.into_iter().map(|v| v / nm).collect();
        lambda_sq = new_lambda;
        if resid <= 1e-12 * new_lambda.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(lambda_sq.max(0.0).sqrt())
}

/// Splitting penalty minimizing the local DRS contraction: ρ* = 2λ₂√(1−λ₂²).
pub fn optimal_rho(lambda2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda2) {
        return Err(PhaseError::InvalidParameter(format!(
            "λ₂ = {} outside [0, 1]",
            lambda2
        )));
    }
    Ok(2.0 * lambda2 * (1.0 - lambda2 * lambda2).sqrt())
}

/// Relaxation ↔ penalty correspondence ρ = (1−β)/(2β−1), defined for β > ½.
pub fn beta_to_rho(beta: f64) -> Result<f64> {
    if beta <= 0.5 {
        return Err(PhaseError::InvalidParameter(format!(
            "β = {} must exceed ½",
            beta
        )));
    }
    Ok((1.0 - beta) / (2.0 * beta - 1.0))
}
