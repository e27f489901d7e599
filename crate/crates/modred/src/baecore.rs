//! Approximation-error modeling: drawing error samples from paired forward
//! models, empirical mean/low-rank covariance statistics, the eigen (KL)
//! expansion of the error, low-rank whitening through the
//! Sherman–Morrison–Woodbury identity, and the weighted least-squares solves
//! built on it.

use crate::numkit::{
    atomic_write, dot, lean_svd, norm, read_mrd1, write_mrd1, DenseMatrix, FnOperator,
    LinearOperator, SparseMatrix, StopReason,
};
use crate::{Error, Result};
use rayon::prelude::*;
use std::path::Path;

/// A sample of approximation-error draws `m⁽ʲ⁾ = f*(x⁽ʲ⁾) − f(z⁽ʲ⁾)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    draws: Vec<Vec<f64>>,
    m: usize,
}

impl ErrorSample {
    pub fn new(draws: Vec<Vec<f64>>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidArgument("need at least one draw".into()));
        }
        let m = draws[0].len();
        if draws.iter().any(|d| d.len() != m) {
            return Err(Error::Dimension("draws of unequal length".into()));
        }
        Ok(Self { draws, m })
    }

    /// Data-space dimension of each draw.
    pub fn data_dim(&self) -> usize {
        self.m
    }

    /// Number of draws L.
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires >= 1 draw
    }

    pub fn draws(&self) -> &[Vec<f64>] {
        &self.draws
    }

    /// Persists the sample as an MRD1 matrix (columns = draws) plus a small
    /// text header describing its provenance.
    pub fn save(&self, matrix_path: &Path, header_path: &Path, description: &str) -> Result<()> {
        let m = DenseMatrix::from_columns(&self.draws)?;
        write_mrd1(matrix_path, &m)?;
        let header = format!(
            "draws={}\ndata_dim={}\ndescription={}\n",
            self.len(),
            self.data_dim(),
            description
        );
        atomic_write(header_path, header.as_bytes())
    }

    pub fn load(matrix_path: &Path) -> Result<Self> {
        let m = read_mrd1(matrix_path)?;
        let draws: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.column(j)).collect();
        Self::new(draws)
    }
}

/// Empirical error statistics: mean μ, centered low-rank factor S with
/// `C = S Sᵀ`, and the observation-noise std σ.
#[derive(Debug, Clone)]
pub struct ErrorModel {
    pub mu: Vec<f64>,
    pub s: DenseMatrix,
    pub sigma: f64,
}

impl ErrorModel {
    /// Trivial model (zero mean, zero covariance) for a given data dimension.
    pub fn noise_only(m: usize, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        Ok(Self {
            mu: vec![0.0; m],
            s: DenseMatrix::zeros(m, 1),
            sigma,
        })
    }

    pub fn data_dim(&self) -> usize {
        self.mu.len()
    }
}

/// Eigen expansion of the empirical error covariance: `C = Σ λⱼ uⱼuⱼᵀ`.
#[derive(Debug, Clone)]
pub struct KLExpansion {
    pub mu: Vec<f64>,
    /// Eigenvalues of `C`, nonincreasing.
    pub lambdas: Vec<f64>,
    /// Orthonormal eigenvectors, one column per retained eigenvalue.
    pub u: DenseMatrix,
}

/// Generates an approximation-error sample by evaluating the accurate and
/// surrogate forward maps on joint prior draws. Draw `j` uses derived seed
/// `seed + j`; draws are evaluated in parallel but returned index-ordered.
pub fn sample_error<FS, F, J>(
    f_star: FS,
    f: F,
    joint_sampler: J,
    l: usize,
    seed: u64,
) -> Result<ErrorSample>
where
    FS: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    J: Fn(u64) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    if l == 0 {
        return Err(Error::InvalidArgument("need at least one draw".into()));
    }
    let draws: Result<Vec<Vec<f64>>> = (0..l)
        .into_par_iter()
        .map(|j| {
            let with_index = |e: Error| Error::Draw {
                draw: j,
                reason: e.to_string(),
            };
            let (x, z) = joint_sampler(seed.wrapping_add(j as u64)).map_err(with_index)?;
            let accurate = f_star(&x).map_err(with_index)?;
            let surrogate = f(&z).map_err(with_index)?;
            if accurate.len() != surrogate.len() {
                return Err(Error::Draw {
                    draw: j,
                    reason: format!(
                        "model outputs of different lengths ({} vs {})",
                        accurate.len(),
                        surrogate.len()
                    ),
                });
            }
            Ok(accurate
                .iter()
                .zip(&surrogate)
                .map(|(a, s)| a - s)
                .collect())
        })
        .collect();
    ErrorSample::new(draws?)
}

/// Empirical mean and centered factor: `μ = (1/L) Σ m⁽ʲ⁾` and
/// `S` with column j `(m⁽ʲ⁾ − μ)/√L`, so `S Sᵀ` is the empirical covariance.
pub fn error_statistics(sample: &ErrorSample, sigma: f64) -> Result<ErrorModel> {
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let m = sample.data_dim();
    let l = sample.len();
    let mut mu = vec![0.0; m];
    for d in sample.draws() {
        for (a, b) in mu.iter_mut().zip(d) {
            *a += b / l as f64;
        }
    }
    let scale = 1.0 / (l as f64).sqrt();
    let cols: Vec<Vec<f64>> = sample
        .draws()
        .iter()
        .map(|d| d.iter().zip(&mu).map(|(a, b)| (a - b) * scale).collect())
        .collect();
    Ok(ErrorModel {
        mu,
        s: DenseMatrix::from_columns(&cols)?,
        sigma,
    })
}

/// Eigen expansion of `C = S Sᵀ` through the singular values of S
/// (λⱼ = dⱼ², U = left singular vectors; zero modes dropped).
pub fn kl_expand(model: &ErrorModel) -> Result<KLExpansion> {
    let svd = lean_svd(&model.s)?;
    let dmax = svd.d.first().copied().unwrap_or(0.0);
    let r = svd
        .d
        .iter()
        .take_while(|&&d| d > 1e-14 * dmax && d > 0.0)
        .count();
    let lambdas: Vec<f64> = svd.d[..r].iter().map(|d| d * d).collect();
    let u = DenseMatrix::from_fn(model.s.rows(), r, |i, j| svd.u.get(i, j));
    Ok(KLExpansion {
        mu: model.mu.clone(),
        lambdas,
        u,
    })
}

/// Whitening factor K of the Sherman–Morrison–Woodbury identity
/// `(S Sᵀ + σ²I)⁻¹ = σ⁻²(I − K Kᵀ)`, with `K = S Rᵀ` and
/// `RᵀR = (σ²Iₖ + SᵀS)⁻¹` from a k×k Cholesky factorization.
pub fn smw_whitener(model: &ErrorModel) -> Result<DenseMatrix> {
    let s = &model.s;
    let sigma2 = model.sigma * model.sigma;
    let k = s.cols();
    if k == 0 {
        return Ok(DenseMatrix::zeros(s.rows(), 0));
    }
    // G = σ²I + SᵀS (k×k)
    let mut g = s.transpose().matmul(s);
    for i in 0..k {
        g.set(i, i, g.get(i, i) + sigma2);
    }
    let chol = g
        .to_dmatrix()
        .cholesky()
        .ok_or_else(|| Error::Factorization("Cholesky of σ²I + SᵀS broke down".into()))?;
    // RᵀR = G⁻¹ with R = (Lᵀ)⁻¹ where G = LLᵀ; K = S Rᵀ = S L⁻ᵀ.
    // Compute K column-wise: K = S · (L⁻ᵀ), i.e. solve Lᵀ Y = I and K = S Y.
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Factorization("triangular inverse failed".into()))?;
    // Y = L⁻ᵀ = (L⁻¹)ᵀ
    let y = DenseMatrix::from_dmatrix(&linv.transpose());
    Ok(s.matmul(&y))
}

/// Result of the iteratively solved weighted least-squares problems.
pub struct BaeSolveResult {
    pub x: Vec<f64>,
    /// Weighted discrepancy ‖(C + σ²I)^{-1/2}(b − μ − Ax)‖ of the returned
    /// iterate; its expected value under the error model is √m, so the
    /// Morozov target is τ√m.
    pub discrepancy: f64,
    pub iters: usize,
    pub stop: StopReason,
    pub discrepancy_history: Vec<f64>,
}

/// Minimizes `(b − μ − Ax)ᵀ (C + σ²I)⁻¹ (b − μ − Ax)` matrix-free:
/// conjugate gradients on the whitened normal equations
/// `Aᵀ(I − KKᵀ)A x = Aᵀ(I − KKᵀ)(b − μ)`, with Morozov-style stopping on
/// the weighted discrepancy `σ⁻¹√(‖r‖² − ‖Kᵀr‖²) ≤ discrepancy_target`
/// where `r = b − μ − Ax` (target 0 runs to numerical convergence).
pub fn bae_normal_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    model: &ErrorModel,
    discrepancy_target: f64,
    max_iter: usize,
) -> Result<BaeSolveResult> {
    let m = a.range_dim();
    if b.len() != m || model.data_dim() != m {
        return Err(Error::Dimension("bae_normal_solve dimension mismatch".into()));
    }
    let k = smw_whitener(model)?;
    let whiten = |v: &[f64]| -> Vec<f64> {
        // v − K(Kᵀv)
        if k.cols() == 0 {
            return v.to_vec();
        }
        let kt_v = k.tr_matvec(v);
        let kk = k.matvec(&kt_v);
        v.iter().zip(&kk).map(|(x, y)| x - y).collect()
    };
    let b_centered: Vec<f64> = b.iter().zip(&model.mu).map(|(x, y)| x - y).collect();
    let rhs = a.apply_adjoint(&whiten(&b_centered));
    let weighted_disc = |r: &[f64]| -> f64 {
        let mut sq = dot(r, r);
        if k.cols() > 0 {
            let ktr = k.tr_matvec(r);
            sq -= dot(&ktr, &ktr);
        }
        sq.max(0.0).sqrt() / model.sigma
    };

    // Normal-equation operator x ↦ Aᵀ(I − KKᵀ)Ax
    let normal_op = FnOperator::new(
        a.domain_dim(),
        a.domain_dim(),
        |v: &[f64]| a.apply_adjoint(&whiten(&a.apply(v))),
        |v: &[f64]| a.apply_adjoint(&whiten(&a.apply(v))),
    );

    // Hand-rolled CG loop so the discrepancy can be monitored per iterate.
    let n = a.domain_dim();
    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let rhs_norm = norm(&rhs);
    let mut history = vec![weighted_disc(&b_centered)];
    let mut stop = StopReason::MaxIter;
    let mut iters = 0;
    if history[0] <= discrepancy_target {
        stop = StopReason::Discrepancy;
    } else {
        for it in 1..=max_iter {
            let mp = normal_op.apply(&p);
            let pmp = dot(&p, &mp);
            if pmp <= 0.0 {
                stop = StopReason::Converged;
                break;
            }
            let alpha = rs / pmp;
            for (xi, pi) in x.iter_mut().zip(&p) {
                *xi += alpha * pi;
            }
            for (ri, mi) in r.iter_mut().zip(&mp) {
                *ri -= alpha * mi;
            }
            iters = it;
            let ax = a.apply(&x);
            let r_data: Vec<f64> = b_centered
                .iter()
                .zip(&ax)
                .map(|(bi, ai)| bi - ai)
                .collect();
            let disc = weighted_disc(&r_data);
            history.push(disc);
            if discrepancy_target > 0.0 && disc <= discrepancy_target {
                stop = StopReason::Discrepancy;
                break;
            }
            let rs_new = dot(&r, &r);
            if rs_new.sqrt() <= 1e-12 * rhs_norm {
                stop = StopReason::Converged;
                break;
            }
            let beta = rs_new / rs;
            rs = rs_new;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
        }
    }
    let discrepancy = *history.last().unwrap();
    Ok(BaeSolveResult {
        x,
        discrepancy,
        iters,
        stop,
        discrepancy_history: history,
    })
}

/// Linear-Gaussian MAP estimate with the enhanced error model: minimizer of
/// `(b − μ − Fz)ᵀ(C + σ²I)⁻¹(b − μ − Fz) + zᵀ C_Z⁻¹ z`, computed densely
/// (oracle-grade; materializes F column by column).
pub fn gaussian_map_estimate(
    f: &dyn LinearOperator,
    b: &[f64],
    model: &ErrorModel,
    prior_precision: &SparseMatrix,
) -> Result<Vec<f64>> {
    let m = f.range_dim();
    let n = f.domain_dim();
    if b.len() != m || model.data_dim() != m {
        return Err(Error::Dimension("gaussian_map_estimate rhs mismatch".into()));
    }
    if prior_precision.rows() != n || prior_precision.cols() != n {
        return Err(Error::Dimension("prior precision must be n×n".into()));
    }
    // materialize F
    let mut fd = DenseMatrix::zeros(m, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = f.apply(&e);
        for i in 0..m {
            fd.set(i, j, col[i]);
        }
    }
    // W = (SSᵀ + σ²I)⁻¹ via SMW
    let k = smw_whitener(model)?;
    let sigma2 = model.sigma * model.sigma;
    let whiten_mat = |mat: &DenseMatrix| -> DenseMatrix {
        let mut out = mat.clone();
        if k.cols() > 0 {
            let ktm = k.transpose().matmul(mat);
            out = out.sub(&k.matmul(&ktm));
        }
        out.scaled(1.0 / sigma2)
    };
    let wf = whiten_mat(&fd); // (C+σ²I)⁻¹ F
    let mut lhs = fd.transpose().matmul(&wf);
    lhs = lhs.add(&prior_precision.to_dense());
    let b_centered: Vec<f64> = b.iter().zip(&model.mu).map(|(x, y)| x - y).collect();
    let rhs = wf.tr_matvec(&b_centered);
    let lu = lhs.to_dmatrix().lu();
    let sol = lu
        .solve(&nalgebra::DVector::from_vec(rhs))
        .ok_or_else(|| Error::Solver("singular MAP system".into()))?;
    Ok(sol.iter().copied().collect())
}
