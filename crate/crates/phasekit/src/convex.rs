use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::error::{PhaseError, Result};
use crate::linalg::hermitian_eig;
use crate::metrics::sgn1;
use crate::operators::{DenseOperator, MeasurementOperator};

const DESK_LIMIT: usize = 64;

/// Hermitian n×n matrix standing in for the lifted unknown xx*.
#[derive(Clone, Debug)]
pub struct LiftedMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl LiftedMatrix {
    /// Validates Hermitian symmetry to 1e−12 (relative to the largest entry).
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(PhaseError::DimensionMismatch(format!(
                "lifted matrix needs {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        let scale = data.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
        for i in 0..n {
            for j in 0..=i {
                if (data[i * n + j] - data[j * n + i].conj()).norm() > 1e-12 * scale {
                    return Err(PhaseError::InvalidParameter(
                        "lifted matrix is not Hermitian".into(),
                    ));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    /// Rank-one lift xx*.
    pub fn from_outer(x: &[Complex64]) -> Self {
        let n = x.len();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(x[i] * x[j].conj());
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigenvalues (ascending) and eigenvectors.
    pub fn eig(&self) -> (Vec<f64>, Vec<Vec<Complex64>>) {
        hermitian_eig(&self.data, self.n)
    }
}

fn check_rows(op: &DenseOperator, len: usize, what: &str) -> Result<()> {
    if len != op.count() {
        return Err(PhaseError::DimensionMismatch(format!(
            "{what}: {} values vs {} sensing vectors",
            len,
            op.count()
        )));
    }
    Ok(())
}

/// 𝒜(X)_k = Tr(a_k a_k* X) = a_k* X a_k — real on Hermitian inputs.
pub fn lift_apply(op: &DenseOperator, x: &LiftedMatrix) -> Result<Vec<f64>> {
    if x.n() != op.n() {
        return Err(PhaseError::DimensionMismatch(
            "lift_apply: matrix side vs sensing dimension".into(),
        ));
    }
    let n = op.n();
    Ok((0..op.count())
        .map(|k| {
            let a = op.row(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += a[i].conj() * x.get(i, j) * a[j];
                }
            }
            acc.re
        })
        .collect())
}

/// 𝒜*(z) = Σ_k z_k a_k a_k*.
pub fn lift_adjoint(op: &DenseOperator, z: &[f64]) -> Result<LiftedMatrix> {
    check_rows(op, z.len(), "lift_adjoint")?;
    let n = op.n();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &zk) in z.iter().enumerate() {
        let a = op.row(k);
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += zk * a[i] * a[j].conj();
            }
        }
    }
    Ok(LiftedMatrix { n, data })
}

/// Result of the lifted trace-minimization splitting.
pub struct PhaseLiftResult {
    pub matrix: LiftedMatrix,
    pub x_hat: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Lifted recovery by alternating splitting: exact least-squares projection
/// onto the affine set {𝒜(X) = y} (via the precomputed Gram Cholesky
/// factor), then projection onto the positive cone with soft trace shrinkage
/// λ_trace on the eigenvalues. The rank-one extraction takes the top
/// eigenvector scaled to the leading eigenvalue and debiases it so the
/// squared norm matches the full recovered trace, compensating for energy
/// spread over residual eigendirections.
pub fn phaselift_solve(
    op: &DenseOperator,
    y: &[f64],
    lambda_trace: f64,
    iters: usize,
) -> Result<PhaseLiftResult> {
    check_rows(op, y.len(), "phaselift_solve")?;
    let n = op.n();
    if n > DESK_LIMIT {
        return Err(PhaseError::InvalidParameter(format!(
            "phaselift_solve handles n ≤ {DESK_LIMIT}, got {n}"
        )));
    }
    if lambda_trace < 0.0 {
        return Err(PhaseError::InvalidParameter("negative trace weight".into()));
    }
    let count = op.count();
    // Gram matrix G_kl = ⟨a_k a_k*, a_l a_l*⟩_HS = |⟨a_k, a_l⟩|².
    let gram = DMatrix::<f64>::from_fn(count, count, |k, l| {
        let inner: Complex64 = op
            .row(k)
            .iter()
            .zip(op.row(l).iter())
            .map(|(&ak, &al)| ak.conj() * al)
            .sum();
        inner.norm_sqr()
    });
    let chol = Cholesky::new(gram).ok_or_else(|| {
        PhaseError::InvalidParameter(
            "degenerate sensing set: lifted Gram matrix is singular".into(),
        )
    })?;
    let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ny == 0.0 {
        return Err(PhaseError::ZeroNorm("phaselift_solve: y = 0".into()));
    }
    let affine_project = |x: &LiftedMatrix| -> Result<(LiftedMatrix, f64)> {
        let ax = lift_apply(op, x)?;
        let resid: Vec<f64> = y.iter().zip(ax.iter()).map(|(a, b)| a - b).collect();
        let rr = resid.iter().map(|v| v * v).sum::<f64>().sqrt() / ny;
        let w = chol.solve(&DMatrix::from_column_slice(count, 1, &resid));
        let corr = lift_adjoint(op, w.as_slice())?;
        let mut data = x.data.clone();
        for (d, c) in data.iter_mut().zip(corr.data.iter()) {
            *d += c;
        }
        Ok((LiftedMatrix { n, data }, rr))
    };
    let cone_project = |x: &LiftedMatrix| -> LiftedMatrix {
        let (vals, vecs) = x.eig();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (lam, v) in vals.iter().zip(vecs.iter()) {
            let clipped = (lam - lambda_trace).max(0.0);
            if clipped > 0.0 {
                for i in 0..n {
                    for j in 0..n {
                        data[i * n + j] += clipped * v[i] * v[j].conj();
                    }
                }
            }
        }
        LiftedMatrix { n, data }
    };
    // Spectral start.
    let mut x = lift_adjoint(op, &y.iter().map(|&v| v / count as f64).collect::<Vec<_>>())?;
    x = cone_project(&x);
    let mut best_rr = f64::INFINITY;
    let mut stalls = 0usize;
    let mut done = 0usize;
    for _ in 0..iters {
        let (proj, rr) = affine_project(&x)?;
        if !rr.is_finite() || rr > 10.0 * best_rr.max(1.0) {
            return Err(PhaseError::Infeasible(format!(
                "phaselift splitting diverged (residual {rr:.3e})"
            )));
        }
        if rr < best_rr - 1e-14 {
            best_rr = rr;
            stalls = 0;
        } else {
            stalls += 1;
        }
        x = cone_project(&proj);
        done += 1;
        if best_rr < 1e-14 || stalls > 50 {
            break;
        }
    }
    let residual = lift_apply(op, &x)?
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / ny;
    // Rank-one extraction with debiasing.
    let (vals, vecs) = x.eig();
    let top = vals.len() - 1;
    let lam = vals[top].max(0.0);
    let mut x_hat: Vec<Complex64> = vecs[top].iter().map(|&v| v * lam.sqrt()).collect();
    let total: f64 = vals.iter().map(|&l| l.max(0.0)).sum();
    let nx: f64 = x_hat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nx > 0.0 && total > 0.0 {
        let s = total.sqrt() / nx;
        x_hat.iter_mut().for_each(|v| *v *= s);
    }
    Ok(PhaseLiftResult { matrix: x, x_hat, residual, iterations: done })
}

fn slab_violation(op: &DenseOperator, b: &[f64], x: &[Complex64]) -> f64 {
    op.forward(x)
        .iter()
        .zip(b.iter())
        .map(|(c, &bv)| c.norm() - bv)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// One cyclic sweep of exact projections onto the slabs |⟨a_k, x⟩| ≤ b_k.
fn slab_sweep(op: &DenseOperator, b: &[f64], x: &mut [Complex64]) {
    let n = op.n();
    for k in 0..op.count() {
        let a = op.row(k);
        let inner: Complex64 = a.iter().zip(x.iter()).map(|(&av, &xv)| av.conj() * xv).sum();
        let mag = inner.norm();
        if mag > b[k] {
            let na: f64 = a.iter().map(|c| c.norm_sqr()).sum();
            if na == 0.0 {
                continue;
            }
            let coeff = (inner - b[k] * sgn1(inner)) / na;
            for i in 0..n {
                x[i] -= coeff * a[i];
            }
        }
    }
}

const FEAS_TOL: f64 = 1e-6;

/// Anchored linear maximization over the slab intersection, solved by a
/// primal–dual (Chambolle–Pock) iteration: max Re⟨u, x⟩ subject to
/// |⟨a_k, x⟩| ≤ b_k. The dual update is the Moreau shift of the per-row disk
/// projection, the primal update absorbs the (linear) anchor gradient. The
/// final iterate is polished to feasibility by cyclic exact slab
/// projections; the best feasible iterate by objective Re⟨x, u⟩ is returned.
pub fn phasemax_solve(
    op: &DenseOperator,
    b: &[f64],
    u_anchor: &[Complex64],
    iters: usize,
) -> Result<Vec<Complex64>> {
    check_rows(op, b.len(), "phasemax_solve")?;
    if u_anchor.len() != op.n() {
        return Err(PhaseError::DimensionMismatch(
            "phasemax_solve: anchor length".into(),
        ));
    }
    let n = op.n();
    let count = op.count();
    let nu: f64 = u_anchor.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nu == 0.0 {
        return Err(PhaseError::ZeroNorm("phasemax_solve: anchor is zero".into()));
    }
    let objective = |x: &[Complex64]| -> f64 {
        x.iter()
            .zip(u_anchor.iter())
            .map(|(&xv, &uv)| (uv.conj() * xv).re)
            .sum()
    };
    // Operator norm of the sensing matrix by power iteration, for the
    // primal–dual step sizes στ‖A‖² < 1.
    let mut pv: Vec<Complex64> = u_anchor.iter().map(|&c| c / nu).collect();
    let mut a_norm2 = 0.0f64;
    for _ in 0..30 {
        let w = op.adjoint(&op.forward(&pv));
        let nw: f64 = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nw == 0.0 {
            break;
        }
        a_norm2 = nw;
        pv = w.iter().map(|&c| c / nw).collect();
    }
    if a_norm2 == 0.0 {
        return Err(PhaseError::ZeroNorm("phasemax_solve: zero sensing matrix".into()));
    }
    let sigma = 0.99 / a_norm2.sqrt();
    let tau = 0.99 / a_norm2.sqrt();

    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let consider = |x: &[Complex64], best: &mut Option<(f64, Vec<Complex64>)>| {
        if slab_violation(op, b, x) <= FEAS_TOL {
            let val = objective(x);
            if best.as_ref().map_or(true, |(v, _)| val > *v) {
                *best = Some((val, x.to_vec()));
            }
        }
    };

    let mut x: Vec<Complex64> = u_anchor.to_vec();
    let mut x_bar = x.clone();
    let mut dual = vec![Complex64::new(0.0, 0.0); count];
    for t in 0..iters {
        // Dual: y ← y + σ A x̄, then subtract σ · (disk projection of y/σ).
        let ax = op.forward(&x_bar);
        for k in 0..count {
            let z = dual[k] + sigma * ax[k];
            let w = z / sigma;
            let proj = if w.norm() <= b[k] { w } else { b[k] * sgn1(w) };
            dual[k] = z - sigma * proj;
        }
        // Primal: x ← x − τ A*y + τ u (gradient of the linear objective).
        let aty = op.adjoint(&dual);
        let mut x_next = x.clone();
        for i in 0..n {
            x_next[i] = x[i] - tau * aty[i] + tau * u_anchor[i];
        }
        for i in 0..n {
            x_bar[i] = 2.0 * x_next[i] - x[i];
        }
        x = x_next;
        // Track feasible iterates periodically (the running iterate is only
        // asymptotically feasible).
        if t % 25 == 24 {
            let mut cand = x.clone();
            for _ in 0..50 {
                if slab_violation(op, b, &cand) <= FEAS_TOL * 1e-3 {
                    break;
                }
                slab_sweep(op, b, &mut cand);
            }
            consider(&cand, &mut best);
        }
    }
    // Feasibility polish on the final iterate.
    for _ in 0..200 {
        if slab_violation(op, b, &x) <= FEAS_TOL * 1e-3 {
            break;
        }
        slab_sweep(op, b, &mut x);
    }
    consider(&x, &mut best);
    best.map(|(_, x)| x).ok_or_else(|| {
        PhaseError::Infeasible("phasemax_solve: no feasible iterate found".into())
    })
}

/// Successive anchored maximizations: each round's output (normalized)
/// becomes the next round's anchor; stops early when the anchor stagnates.
pub fn phaselamp(
    op: &DenseOperator,
    b: &[f64],
    u0: &[Complex64],
    rounds: usize,
    iters_per_round: usize,
) -> Result<Vec<Complex64>> {
    if rounds == 0 {
        return Err(PhaseError::InvalidParameter("phaselamp: rounds = 0".into()));
    }
    let mut anchor = u0.to_vec();
    let mut x = u0.to_vec();
    for _ in 0..rounds {
        let next = phasemax_solve(op, b, &anchor, iters_per_round)?;
        let diff: f64 = next
            .iter()
            .zip(x.iter())
            .map(|(a, c)| (a - c).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let nn: f64 = next.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        x = next;
        if diff <= 1e-7 * nn.max(1.0) {
            break;
        }
        if nn == 0.0 {
            break;
        }
        anchor = x.iter().map(|&c| c / nn).collect();
    }
    Ok(x)
}

/// Post-hoc dual extraction for a successful anchored maximization.
/// Stationarity pins the dual to u = Σ_k λ_k a_k·sgn(⟨a_k, x⟩) with real
/// multipliers λ_k ≥ 0 supported on active slabs (|⟨a_k, x⟩| ≈ b_k); the
/// dual vector is z_k = λ_k b_k sgn(⟨a_k, x⟩) and must carry exactly the
/// lost phases, sgn(z_k)·b_k ≈ ⟨a_k, x⟩. The multipliers are fit by
/// nonnegative least squares (normal-equation solve plus projected-gradient
/// polish); the maximum deviation over the recovered support is returned.
/// All-zero data is vacuous and returns 0.
pub fn dual_phase_check(
    op: &DenseOperator,
    b: &[f64],
    u: &[Complex64],
    x: &[Complex64],
) -> Result<f64> {
    check_rows(op, b.len(), "dual_phase_check")?;
    if u.len() != op.n() || x.len() != op.n() {
        return Err(PhaseError::DimensionMismatch("dual_phase_check: lengths".into()));
    }
    let bmax = b.iter().fold(0.0f64, |m, &v| m.max(v));
    if bmax == 0.0 {
        return Ok(0.0);
    }
    let ax = op.forward(x);
    // Active slabs: |⟨a_k, x⟩| ≈ b_k. Slack slabs carry zero multipliers and
    // are excluded up front (complementary slackness).
    let active: Vec<usize> = (0..op.count())
        .filter(|&k| b[k] > 1e-12 * bmax && (b[k] - ax[k].norm()).abs() <= 1e-4 * bmax)
        .collect();
    if active.is_empty() {
        return Err(PhaseError::Infeasible(
            "dual not recoverable: no active slab constraints".into(),
        ));
    }
    let n = op.n();
    let m = active.len();
    // Direction vectors d_k = a_k·sgn(⟨a_k, x⟩).
    let dirs: Vec<Vec<Complex64>> = active
        .iter()
        .map(|&k| op.row(k).iter().map(|&a| a * sgn1(ax[k])).collect())
        .collect();
    // Real-coefficient normal equations: G λ = h over Re⟨d_p, d_q⟩.
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, 1);
    for p in 0..m {
        for q in 0..m {
            gram[(p, q)] = dirs[p]
                .iter()
                .zip(dirs[q].iter())
                .map(|(&a, &c)| (a.conj() * c).re)
                .sum();
        }
        rhs[(p, 0)] = dirs[p]
            .iter()
            .zip(u.iter())
            .map(|(&a, &uv)| (a.conj() * uv).re)
            .sum();
    }
    let gmax = (0..m).map(|p| gram[(p, p)]).fold(0.0f64, f64::max).max(1.0);
    let mut reg = gram.clone();
    for p in 0..m {
        reg[(p, p)] += 1e-10 * gmax;
    }
    let mut lam: Vec<f64> = match reg.lu().solve(&rhs) {
        Some(sol) => sol.as_slice().iter().map(|&v| v.max(0.0)).collect(),
        None => vec![0.0; m],
    };
    // Projected-gradient polish enforcing λ ≥ 0.
    let step = 1.0 / (m as f64 * gmax);
    for _ in 0..500 {
        let mut grad = vec![0.0f64; m];
        for p in 0..m {
            let mut g = -rhs[(p, 0)];
            for q in 0..m {
                g += gram[(p, q)] * lam[q];
            }
            grad[p] = g;
        }
        for p in 0..m {
            lam[p] = (lam[p] - step * grad[p]).max(0.0);
        }
    }
    // The recovered cone combination must actually explain the anchor.
    let mut recon = vec![Complex64::new(0.0, 0.0); n];
    for p in 0..m {
        for i in 0..n {
            recon[i] += lam[p] * dirs[p][i];
        }
    }
    let nu: f64 = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let fit: f64 = recon
        .iter()
        .zip(u.iter())
        .map(|(a, c)| (a - c).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if nu > 0.0 && fit > 0.1 * nu {
        return Err(PhaseError::Infeasible(format!(
            "dual not recoverable: active slabs explain the anchor poorly ({:.2e})",
            fit / nu
        )));
    }
    // z_k = λ_k b_k sgn(⟨a_k, x⟩); deviation of sgn(z_k)·b_k from ⟨a_k, x⟩
    // over the recovered support.
    let lmax = lam.iter().fold(0.0f64, |a, &v| a.max(v));
    let mut dev = 0.0f64;
    for (p, &k) in active.iter().enumerate() {
        if lam[p] <= 1e-8 * lmax {
            continue;
        }
        let zk = lam[p] * b[k] * sgn1(ax[k]);
        dev = dev.max((sgn1(zk) * b[k] - ax[k]).norm());
    }
    Ok(dev)
}

/// Numerical dual-certificate probe for the lifted program at a candidate
/// truth x: finds z minimizing ‖𝒜*z − xx*‖_F over all real z, then splits
/// Z = 𝒜*z against the tangent space T = {xw* + wx*} of the rank-one point
/// and reports (‖Z_T − xx*‖_F, λ_max(Z_{T⊥})). A certificate exists when the
/// first is ~0 and the second is < 1.
pub fn lifted_dual_certificate(op: &DenseOperator, x: &[Complex64]) -> Result<(f64, f64)> {
    if x.len() != op.n() {
        return Err(PhaseError::DimensionMismatch(
            "lifted_dual_certificate: x length".into(),
        ));
    }
    let n = op.n();
    let nx2: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    if nx2 == 0.0 {
        return Err(PhaseError::ZeroNorm("lifted_dual_certificate: x = 0".into()));
    }
    let count = op.count();
    // Projection of a Hermitian M onto T: P_T M = P M + M P − P M P with
    // P = xx*/‖x‖² the rank-one projector.
    let project_t = |m: &[Complex64]| -> Vec<Complex64> {
        let mut px_m = vec![Complex64::new(0.0, 0.0); n * n]; // P M
        let mut m_px = vec![Complex64::new(0.0, 0.0); n * n]; // M P
        for i in 0..n {
            for j in 0..n {
                let mut a = Complex64::new(0.0, 0.0);
                let mut c = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    a += x[i] * x[l].conj() * m[l * n + j];
                    c += m[i * n + l] * x[l] * x[j].conj();
                }
                px_m[i * n + j] = a / nx2;
                m_px[i * n + j] = c / nx2;
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut pmp = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    pmp += px_m[i * n + l] * x[l] * x[j].conj();
                }
                out[i * n + j] = px_m[i * n + j] + m_px[i * n + j] - pmp / nx2;
            }
        }
        out
    };
    // Least squares over z for min ‖Σ_k z_k a_k a_k* − xx*‖_F. Frobenius
    // inner products of rank-one Hermitians collapse to squared row inner
    // products: ⟨a_p a_p*, a_q a_q*⟩_F = |⟨a_p, a_q⟩|² and
    // ⟨a_p a_p*, xx*⟩_F = |⟨a_p, x⟩|².
    let lifted_rows: Vec<Vec<Complex64>> = (0..count)
        .map(|k| {
            let a = op.row(k);
            let mut m = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] = a[i] * a[j].conj();
                }
            }
            m
        })
        .collect();
    let target = LiftedMatrix::from_outer(x);
    let mut gram = DMatrix::<f64>::zeros(count, count);
    let mut rhs = DMatrix::<f64>::zeros(count, 1);
    for p in 0..count {
        let ap = op.row(p);
        for q in 0..count {
            let aq = op.row(q);
            let ip: Complex64 = ap
                .iter()
                .zip(aq.iter())
                .map(|(&a, &c)| a.conj() * c)
                .sum();
            gram[(p, q)] = ip.norm_sqr();
        }
        let ipx: Complex64 = ap.iter().zip(x.iter()).map(|(&a, &c)| a.conj() * c).sum();
        rhs[(p, 0)] = ipx.norm_sqr();
    }
    let ridge = 1e-10 * (0..count).map(|p| gram[(p, p)]).fold(0.0f64, f64::max).max(1.0);
    for p in 0..count {
        gram[(p, p)] += ridge;
    }
    let z = gram.lu().solve(&rhs).ok_or_else(|| {
        PhaseError::InvalidParameter("certificate system singular".into())
    })?;
    let mut zmat = vec![Complex64::new(0.0, 0.0); n * n];
    for p in 0..count {
        for (o, &m) in zmat.iter_mut().zip(lifted_rows[p].iter()) {
            *o += z[(p, 0)] * m;
        }
    }
    let zt = project_t(&zmat);
    let t_err: f64 = zt
        .iter()
        .zip(target.as_slice().iter())
        .map(|(&a, &c)| (a - c).norm_sqr())
        .sum::<f64>()
        .sqrt();
    // Z_{T⊥} = Z − Z_T; its top eigenvalue must stay below 1.
    let zperp: Vec<Complex64> = zmat.iter().zip(zt.iter()).map(|(&a, &c)| a - c).collect();
    let (vals, _) = hermitian_eig(&zperp, n);
    Ok((t_err, *vals.last().unwrap_or(&0.0)))
}
