use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Real symmetric embedding of a Hermitian matrix H = A + iB:
/// S = [[A, −B], [B, A]]. Eigenvalues of S are those of H, doubled;
/// a real eigenvector (p, q) of S maps to the complex eigenvector p + iq.
pub fn hermitian_embed(h: &[Complex64], n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[i * n + j];
            s[(i, j)] = v.re;
            s[(i, j + n)] = -v.im;
            s[(i + n, j)] = v.im;
            s[(i + n, j + n)] = v.re;
        }
    }
    s
}

/// Full eigendecomposition of a Hermitian matrix via the real embedding.
/// Returns eigenvalues ascending with matching complex eigenvectors
/// (duplicates from the embedding removed).
pub fn hermitian_eig(h: &[Complex64], n: usize) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let s = hermitian_embed(h, n);
    let eig = s.symmetric_eigen();
    let mut pairs: Vec<(f64, DVector<f64>)> = eig
        .eigenvalues
        .iter()
        .cloned()
        .zip(eig.eigenvectors.column_iter().map(|c| c.into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Each eigenvalue of H appears twice in S (the real images of z and iz
    // span a 2-dimensional real eigenspace), and within a degenerate cluster
    // nalgebra returns an arbitrary real orthonormal basis whose complex
    // images overlap. Keep one complex representative per doubled pair by
    // Gram–Schmidt: orthogonalize each candidate against everything kept so
    // far (vectors of distinct eigenvalues are already orthogonal, so this
    // only prunes within clusters) and keep it when a genuine residual
    // direction remains. Walking the sorted pairs in reverse keeps the
    // representatives of the largest eigenvalues numerically cleanest.
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (lam, v) in pairs.into_iter().rev() {
        if values.len() == n {
            break;
        }
        let mut z: Vec<Complex64> = (0..n).map(|i| Complex64::new(v[i], v[i + n])).collect();
        // Two orthogonalization passes for numerical stability.
        for _ in 0..2 {
            for kept in &vectors {
                let ip: Complex64 = kept
                    .iter()
                    .zip(z.iter())
                    .map(|(&a, &b)| a.conj() * b)
                    .sum();
                for (zi, &ki) in z.iter_mut().zip(kept.iter()) {
                    *zi -= ip * ki;
                }
            }
        }
        let znorm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if znorm < 1e-6 {
            continue;
        }
        values.push(lam);
        vectors.push(z.iter().map(|&c| c / znorm).collect());
    }
    values.reverse();
    vectors.reverse();
    (values, vectors)
}

/// Eigenvalue transform of a Hermitian matrix through the real embedding:
/// applies `f` to each eigenvalue and reconstructs. The embedding algebra is
/// closed under spectral functions, so the result maps back to a Hermitian
/// complex matrix exactly.
pub fn hermitian_spectral_map(h: &[Complex64], n: usize, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let s = hermitian_embed(h, n);
    let eig = s.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(&f));
    let rebuilt = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            // Average the two embedded copies for symmetry.
            let re = 0.5 * (rebuilt[(i, j)] + rebuilt[(i + n, j + n)]);
            let im = 0.5 * (rebuilt[(i + n, j)] - rebuilt[(i, j + n)]);
            out[i * n + j] = Complex64::new(re, im);
        }
    }
    out
}

/// Dense complex matrix (row-major flat) → nalgebra.
pub fn to_nalgebra(rows: &[Complex64], nrows: usize, ncols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(nrows, ncols, |i, j| rows[i * ncols + j])
}
