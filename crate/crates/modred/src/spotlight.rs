//! Clutter projectors and projected solves.
//!
//! The clutter subspace is estimated either by sketching the clutter
//! operator with draws from the nuisance prior (priorsketching) or from the
//! left singular vectors of a centered approximation-error sample; the data
//! are then projected onto its orthogonal complement before solving.

use crate::baecore::ErrorSample;
use crate::numkit::{
    lean_svd, lsqr_morozov, FnOperator, LinearOperator, LsqrResult,
};
use crate::numkit::DenseMatrix;
use crate::{Error, Result};

/// Orthogonal projector pair defined by an orthonormal basis U of the
/// clutter subspace: `P v = U(Uᵀv)` and `P⊥ v = v − U(Uᵀv)`.
#[derive(Debug, Clone)]
pub struct Projector {
    u: DenseMatrix,
}

impl Projector {
    /// Rank-0 projector (P = 0, P⊥ = I) on an m-dimensional data space.
    pub fn zero(m: usize) -> Self {
        Self {
            u: DenseMatrix::zeros(m, 0),
        }
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn data_dim(&self) -> usize {
        self.u.rows()
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// v ↦ U Uᵀ v
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        if self.rank() == 0 {
            return vec![0.0; v.len()];
        }
        self.u.matvec(&self.u.tr_matvec(v))
    }

    /// v ↦ v − U Uᵀ v
    pub fn apply_complement(&self, v: &[f64]) -> Vec<f64> {
        let p = self.apply(v);
        v.iter().zip(&p).map(|(a, b)| a - b).collect()
    }
}

/// Spectrum bookkeeping for choosing the truncation index k.
#[derive(Debug, Clone)]
pub struct ClutterDiagnostics {
    /// Estimated clutter covariance spectrum, nonincreasing.
    pub lambdas: Vec<f64>,
    /// `tail[k] = Σ_{j>k} λⱼ` for k = 0..=rank.
    pub tail: Vec<f64>,
    /// Smallest k with `√tail(k)` at or below the noise norm, when one was
    /// supplied at construction; rank otherwise.
    pub suggested_k: usize,
    /// Set when a requested rank exceeded the numerical rank.
    pub truncated: bool,
}

impl ClutterDiagnostics {
    fn from_spectrum(lambdas: Vec<f64>, noise_norm: Option<f64>) -> Self {
        let r = lambdas.len();
        let mut tail = vec![0.0; r + 1];
        for k in (0..r).rev() {
            tail[k] = tail[k + 1] + lambdas[k];
        }
        let suggested_k = match noise_norm {
            Some(nn) => (0..=r).find(|&k| tail[k].sqrt() <= nn).unwrap_or(r),
            None => r,
        };
        Self {
            lambdas,
            tail,
            suggested_k,
            truncated: false,
        }
    }
}

const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Wraps an orthonormal basis as a projector; rejects non-orthonormal input.
pub fn projector_from_basis(u: DenseMatrix) -> Result<Projector> {
    let r = u.cols();
    let mut worst: f64 = 0.0;
    for i in 0..r {
        let ci = u.column(i);
        for j in i..r {
            let d = crate::numkit::dot(&ci, &u.column(j)) - if i == j { 1.0 } else { 0.0 };
            worst = worst.max(d.abs());
        }
    }
    if worst > ORTHONORMALITY_TOL {
        return Err(Error::NotOrthonormal {
            deviation: worst,
            tol: ORTHONORMALITY_TOL,
        });
    }
    Ok(Projector { u })
}

/// Priorsketching: sketches the clutter operator with `k` prior draws,
/// `Ω = (1/√k)[x₂⁽¹⁾ … x₂⁽ᵏ⁾]`, and extracts an orthonormal basis of
/// `A₂Ω` from its thin SVD. Diagnostics carry the squared singular values
/// of the sketch as the estimated clutter spectrum.
pub fn priorsketch<S>(
    a2: &dyn LinearOperator,
    x2_sampler: S,
    k: usize,
    seed: u64,
    noise_norm: Option<f64>,
) -> Result<(Projector, ClutterDiagnostics)>
where
    S: Fn(u64) -> Result<Vec<f64>>,
{
    if k == 0 {
        return Err(Error::InvalidArgument("sketch size k must be >= 1".into()));
    }
    let scale = 1.0 / (k as f64).sqrt();
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let x2 = x2_sampler(seed.wrapping_add(j as u64)).map_err(|e| Error::Draw {
            draw: j,
            reason: e.to_string(),
        })?;
        if x2.len() != a2.domain_dim() {
            return Err(Error::Draw {
                draw: j,
                reason: format!(
                    "sampler returned length {} but operator domain is {}",
                    x2.len(),
                    a2.domain_dim()
                ),
            });
        }
        let mut col = a2.apply(&x2);
        for v in &mut col {
            *v *= scale;
        }
        cols.push(col);
    }
    let sketch = DenseMatrix::from_columns(&cols)?;
    basis_from_factor(&sketch, noise_norm)
}

/// Clutter basis from an approximation-error sample: first `k` left singular
/// vectors of the centered draw matrix `(1/√L)[m⁽ʲ⁾ − μ]`. Requesting more
/// vectors than the numerical rank truncates and flags the diagnostics.
pub fn projector_from_error_sample(
    sample: &ErrorSample,
    k: usize,
) -> Result<(Projector, ClutterDiagnostics)> {
    let l = sample.len();
    if k == 0 || k > l {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= L (k = {k}, L = {l})"
        )));
    }
    let m = sample.data_dim();
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
    let centered = DenseMatrix::from_columns(&cols)?;
    let (proj, mut diag) = basis_from_factor(&centered, None)?;
    if k < proj.rank() {
        let u = DenseMatrix::from_fn(m, k, |i, j| proj.basis().get(i, j));
        return Ok((Projector { u }, diag));
    }
    if k > proj.rank() {
        diag.truncated = true;
    }
    Ok((proj, diag))
}

fn basis_from_factor(
    factor: &DenseMatrix,
    noise_norm: Option<f64>,
) -> Result<(Projector, ClutterDiagnostics)> {
    let m = factor.rows();
    if factor.frobenius_norm() == 0.0 {
        // degenerate sketch: all draws zero
        return Ok((
            Projector::zero(m),
            ClutterDiagnostics::from_spectrum(Vec::new(), noise_norm),
        ));
    }
    let svd = lean_svd(factor)?;
    let dmax = svd.d[0];
    let r = svd
        .d
        .iter()
        .take_while(|&&d| d > 1e-12 * dmax && d > 0.0)
        .count();
    let u = DenseMatrix::from_fn(m, r, |i, j| svd.u.get(i, j));
    let lambdas: Vec<f64> = svd.d[..r].iter().map(|d| d * d).collect();
    Ok((
        Projector { u },
        ClutterDiagnostics::from_spectrum(lambdas, noise_norm),
    ))
}

/// Projected system: operator `v ↦ P⊥(Av)` (adjoint `w ↦ Aᵀ(P⊥w)`) and
/// right-hand side `P⊥(b − μ)`.
pub fn project_system<'a>(
    proj: &'a Projector,
    a: &'a dyn LinearOperator,
    b: &[f64],
    mu: &[f64],
) -> Result<(impl LinearOperator + 'a, Vec<f64>)> {
    let m = a.range_dim();
    if b.len() != m || mu.len() != m || proj.data_dim() != m {
        return Err(Error::Dimension("project_system dimension mismatch".into()));
    }
    let centered: Vec<f64> = b.iter().zip(mu).map(|(x, y)| x - y).collect();
    let rhs = proj.apply_complement(&centered);
    let op = FnOperator::new(
        a.domain_dim(),
        m,
        move |v: &[f64]| proj.apply_complement(&a.apply(v)),
        move |w: &[f64]| a.apply_adjoint(&proj.apply_complement(w)),
    );
    Ok((op, rhs))
}

/// Solves the projected least-squares problem
/// `min ‖P⊥(b − μ) − P⊥(Ax)‖` by LSQR with Morozov stopping.
pub fn spotlight_solve(
    proj: &Projector,
    a: &dyn LinearOperator,
    b: &[f64],
    mu: &[f64],
    noise_norm: f64,
    tau: f64,
    max_iter: usize,
) -> Result<LsqrResult> {
    let (op, rhs) = project_system(proj, a, b, mu)?;
    lsqr_morozov(&op, &rhs, noise_norm, tau, max_iter)
}

/// Closed-form Gaussian-clutter MAP estimate (dense, oracle-grade):
/// `x̂₁ = (A₁ᵀ W A₁ + C₁₁⁻¹)⁻¹ A₁ᵀ W b` with `W = (A₂C₂₂A₂ᵀ + Cₑ)⁻¹`.
pub fn gaussian_clutter_map(
    a1: &DenseMatrix,
    a2: &DenseMatrix,
    c11: &DenseMatrix,
    c22: &DenseMatrix,
    ce: &DenseMatrix,
    b: &[f64],
) -> Result<Vec<f64>> {
    let m = a1.rows();
    if a2.rows() != m || ce.rows() != m || b.len() != m {
        return Err(Error::Dimension("gaussian_clutter_map data-space mismatch".into()));
    }
    if c11.rows() != a1.cols() || c22.rows() != a2.cols() {
        return Err(Error::Dimension("gaussian_clutter_map prior mismatch".into()));
    }
    let noise = a2
        .matmul(&c22.matmul(&a2.transpose()))
        .add(ce)
        .to_dmatrix();
    let w = noise
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular clutter-plus-noise covariance".into()))?;
    let c11_inv = c11
        .to_dmatrix()
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular prior covariance C11".into()))?;
    let a1d = a1.to_dmatrix();
    let lhs = a1d.transpose() * &w * &a1d + c11_inv;
    let rhs = a1d.transpose() * &w * nalgebra::DVector::from_vec(b.to_vec());
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("singular MAP system".into()))?;
    Ok(sol.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baecore::{error_statistics, ErrorModel};
    use crate::numkit::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() - 0.5)
    }

    fn random_orthonormal(m: usize, k: usize, seed: u64) -> DenseMatrix {
        crate::numkit::orthonormal_basis(
            &random_matrix(m, k, seed),
            crate::numkit::BasisMethod::Qr,
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn empty_projector_is_identity_complement() {
        let p = Projector::zero(4);
        let v = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(p.apply(&v), vec![0.0; 4]);
        assert_eq!(p.apply_complement(&v), v.to_vec());
    }

    #[test]
    fn axis_projector() {
        let u = DenseMatrix::from_vec(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let p = projector_from_basis(u).unwrap();
        let v = [2.0, 3.0, 4.0];
        assert_eq!(p.apply(&v), vec![2.0, 0.0, 0.0]);
        assert_eq!(p.apply_complement(&v), vec![0.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let u = DenseMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            projector_from_basis(u),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn projector_probe_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_orthonormal(10, 3, 2);
        let p = projector_from_basis(u).unwrap();
        for _ in 0..10 {
            let v: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() - 0.5).collect();
            let pv = p.apply(&v);
            let ppv = p.apply(&pv);
            let cv = p.apply_complement(&v);
            let ccv = p.apply_complement(&cv);
            for i in 0..10 {
                assert!((ppv[i] - pv[i]).abs() <= 1e-12);
                assert!((ccv[i] - cv[i]).abs() <= 1e-12);
                assert!((pv[i] + cv[i] - v[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn priorsketch_low_dimensional_prior_caps_rank() {
        // x2 supported on a 1-dimensional subspace → rank ≤ 1 for any k
        let a2 = random_matrix(8, 5, 3);
        let dir: Vec<f64> = vec![1.0, -1.0, 0.5, 2.0, 0.0];
        let sampler = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let t: f64 = rng.gen::<f64>() - 0.5;
            Ok(dir.iter().map(|d| d * t).collect())
        };
        let (proj, diag) = priorsketch(&a2, sampler, 6, 42, None).unwrap();
        assert!(proj.rank() <= 1);
        assert_eq!(diag.lambdas.len(), proj.rank());
    }

    #[test]
    fn priorsketch_zero_sampler_gives_rank_zero() {
        let a2 = random_matrix(6, 4, 4);
        let sampler = |_s: u64| Ok(vec![0.0; 4]);
        let (proj, diag) = priorsketch(&a2, sampler, 3, 0, None).unwrap();
        assert_eq!(proj.rank(), 0);
        assert!(diag.lambdas.is_empty());
    }

    /// Principal-angle oracle: a Gaussian prior with covariance C22 makes the
    /// sketch statistically identical to normal column sketching of
    /// A2·C22^{1/2}; with k well above the exact subspace dimension both
    /// recover the same subspace.
    #[test]
    fn priorsketch_gaussian_matches_normal_sketch_subspace() {
        // A2 C22^{1/2} with C22 of exact rank 2 → both sketches span the same
        // 2-dimensional subspace; compare principal angles.
        let a2 = random_matrix(10, 6, 5);
        let root = {
            // rank-2 covariance root: 6×2
            random_matrix(6, 2, 6)
        };
        let sampler = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let xi: Vec<f64> = (0..2)
                .map(|_| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng))
                .collect();
            Ok(root.matvec(&xi))
        };
        let (proj, _) = priorsketch(&a2, sampler, 8, 9, None).unwrap();
        assert_eq!(proj.rank(), 2);

        // reference subspace: orthonormal basis of A2 · root
        let target = crate::numkit::orthonormal_basis(
            &a2.matmul(&root),
            crate::numkit::BasisMethod::Svd,
            1e-12,
        )
        .unwrap();
        // principal angles: singular values of Uᵀ T must all be 1
        let inner = proj.basis().transpose().matmul(&target);
        let svd = crate::numkit::lean_svd(&inner).unwrap();
        for d in svd.d {
            assert!((d - 1.0).abs() < 1e-10, "principal angle cosine {d}");
        }
    }

    #[test]
    fn error_sample_projector_spans_centered_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let draws: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..9).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let sample = ErrorSample::new(draws.clone()).unwrap();
        let (proj, diag) = projector_from_error_sample(&sample, 4).unwrap();
        let mu: Vec<f64> = (0..9)
            .map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / 4.0)
            .collect();
        for d in &draws {
            let centered: Vec<f64> = d.iter().zip(&mu).map(|(a, b)| a - b).collect();
            let left = norm(&proj.apply_complement(&centered));
            assert!(left <= 1e-10 * norm(&centered).max(1e-300));
        }
        // tail strictly decreasing until rank
        for k in 0..diag.lambdas.len() {
            assert!(diag.tail[k] > diag.tail[k + 1]);
        }
        assert!(diag.tail[diag.lambdas.len()] == 0.0);
    }

    #[test]
    fn error_sample_projector_truncates_past_rank() {
        // 3 identical draws → centered matrix is zero → rank 0, flagged
        let sample = ErrorSample::new(vec![vec![1.0, 2.0]; 3]).unwrap();
        let (proj, diag) = projector_from_error_sample(&sample, 2).unwrap();
        assert_eq!(proj.rank(), 0);
        assert!(diag.truncated);
    }

    #[test]
    fn project_system_rank0_is_passthrough() {
        let a = random_matrix(6, 3, 11);
        let b: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let mu = vec![1.0; 6];
        let proj = Projector::zero(6);
        let (op, rhs) = project_system(&proj, &a, &b, &mu).unwrap();
        for (r, (bi, mi)) in rhs.iter().zip(b.iter().zip(&mu)) {
            assert_eq!(*r, bi - mi);
        }
        let v = [1.0, 2.0, 3.0];
        assert_eq!(op.apply(&v), a.matvec(&v));
    }

    /// Exact-rank clutter elimination.
    #[test]
    fn exact_projector_eliminates_clutter() {
        let a2 = random_matrix(12, 4, 13);
        let sampler = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            Ok((0..4).map(|_| rng.gen::<f64>() - 0.5).collect())
        };
        let (proj, _) = priorsketch(&a2, sampler, 10, 17, None).unwrap();
        assert_eq!(proj.rank(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let x2: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() - 0.5).collect();
            let clutter = a2.matvec(&x2);
            let res = norm(&proj.apply_complement(&clutter));
            assert!(res <= 1e-10 * norm(&clutter));
        }
    }

    #[test]
    fn spotlight_zero_clutter_matches_plain_lsqr() {
        let a = random_matrix(14, 5, 19);
        let b: Vec<f64> = (0..14).map(|i| (i as f64).sin()).collect();
        let mu = vec![0.0; 14];
        let proj = Projector::zero(14);
        let spot = spotlight_solve(&proj, &a, &b, &mu, 0.0, 1.0, 300).unwrap();
        let plain = lsqr_morozov(&a, &b, 0.0, 1.0, 300).unwrap();
        for (u, v) in spot.x.iter().zip(&plain.x) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_clutter_map_scalar_case() {
        // A1=A2=1, C11=C22=Ce=1, b=3 → W = 1/2, x = (1/2+1)^{-1}·(3/2) = 1
        let one = DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap();
        let x = gaussian_clutter_map(&one, &one, &one, &one, &one, &[3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_clutter_map_zero_clutter_reduces_to_tikhonov() {
        let a1 = random_matrix(8, 3, 23);
        let a2 = random_matrix(8, 2, 24);
        let c22 = DenseMatrix::zeros(2, 2);
        let c11 = DenseMatrix::identity(3);
        let ce = DenseMatrix::identity(8);
        let b: Vec<f64> = (0..8).map(|i| i as f64 * 0.3).collect();
        let x = gaussian_clutter_map(&a1, &a2, &c11, &c22, &ce, &b).unwrap();
        // oracle: (A1ᵀA1 + I)⁻¹ A1ᵀ b
        let ad = a1.to_dmatrix();
        let lhs = ad.transpose() * &ad + nalgebra::DMatrix::identity(3, 3);
        let rhs = ad.transpose() * nalgebra::DVector::from_vec(b);
        let oracle = lhs.lu().solve(&rhs).unwrap();
        for i in 0..3 {
            assert!((x[i] - oracle[i]).abs() < 1e-10);
        }
    }

    /// Dense quadratic-minimization oracle via gradient stationarity on a
    /// random instance.
    #[test]
    fn gaussian_clutter_map_minimizes_quadratic() {
        let a1 = random_matrix(10, 4, 31);
        let a2 = random_matrix(10, 3, 32);
        let g1 = random_matrix(4, 4, 33);
        let mut c11 = g1.transpose().matmul(&g1);
        for i in 0..4 {
            c11.set(i, i, c11.get(i, i) + 1.0);
        }
        let g2 = random_matrix(3, 3, 34);
        let mut c22 = g2.transpose().matmul(&g2);
        for i in 0..3 {
            c22.set(i, i, c22.get(i, i) + 0.5);
        }
        let ce = DenseMatrix::identity(10).scaled(0.2);
        let b: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).cos()).collect();
        let x = gaussian_clutter_map(&a1, &a2, &c11, &c22, &ce, &b).unwrap();

        // numeric minimizer of E(x1) via its normal equations, assembled
        // independently with explicit inverses
        let w = a2
            .matmul(&c22.matmul(&a2.transpose()))
            .add(&ce)
            .to_dmatrix()
            .try_inverse()
            .unwrap();
        let a1d = a1.to_dmatrix();
        let lhs = a1d.transpose() * &w * &a1d + c11.to_dmatrix().try_inverse().unwrap();
        let rhs = a1d.transpose() * &w * nalgebra::DVector::from_vec(b.clone());
        let oracle = lhs.clone().lu().solve(&rhs).unwrap();
        let rel: f64 = x
            .iter()
            .zip(oracle.iter())
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            .sqrt()
            / oracle.norm();
        assert!(rel < 1e-8);
    }

    /// BAE weighted misfit in the eigenbasis equals the explicit
    /// eigen-weighted sum plus the complement term.
    #[test]
    fn gibbs_weight_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let draws: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..8).map(|_| rng.gen::<f64>() * 2.0).collect())
            .collect();
        let sample = ErrorSample::new(draws).unwrap();
        let sigma = 0.8;
        let model = error_statistics(&sample, sigma).unwrap();
        let kl = crate::baecore::kl_expand(&model).unwrap();
        let r: Vec<f64> = (0..8).map(|_| rng.gen::<f64>() - 0.5).collect();

        // direct quadratic form rᵀ (C+σ²I)⁻¹ r
        let mut c = model.s.matmul(&model.s.transpose());
        for i in 0..8 {
            c.set(i, i, c.get(i, i) + sigma * sigma);
        }
        let w = c.to_dmatrix().try_inverse().unwrap();
        let rv = nalgebra::DVector::from_vec(r.clone());
        let direct = (rv.transpose() * &w * &rv)[(0, 0)];

        // eigen-decomposed form Σ (λⱼ+σ²)⁻¹ (uⱼᵀr)² + σ⁻²‖(I−UUᵀ)r‖²
        let mut eig_sum = 0.0;
        for j in 0..kl.lambdas.len() {
            let uj = kl.u.column(j);
            eig_sum += crate::numkit::dot(&uj, &r).powi(2) / (kl.lambdas[j] + sigma * sigma);
        }
        let proj = projector_from_basis(kl.u.clone()).unwrap();
        let rem = norm(&proj.apply_complement(&r)).powi(2) / (sigma * sigma);
        assert!((direct - eig_sum - rem).abs() <= 1e-10 * direct.abs());
    }

    /// Bridge property: the Gaussian-BAE estimate with error covariance tC
    /// converges to the spotlight estimate as t grows.
    #[test]
    fn bae_limit_is_spotlight() {
        let a1 = random_matrix(20, 5, 50);
        let u = random_orthonormal(20, 3, 51);
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let lambdas = [2.0, 1.0, 0.5];
        let b: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() - 0.5).collect();
        let sigma = 1.0;

        // spotlight solution: least-squares on the projected system
        let proj = projector_from_basis(u.clone()).unwrap();
        let spot = spotlight_solve(&proj, &a1, &b, &vec![0.0; 20], 0.0, 1.0, 1000)
            .unwrap()
            .x;

        let mut prev_diff = f64::INFINITY;
        for &t in &[1e2, 1e4, 1e6] {
            // W_t = (t·C + σ²I)⁻¹ with C = U diag(λ) Uᵀ
            let mut c = DenseMatrix::zeros(20, 20);
            for j in 0..3 {
                let uj = u.column(j);
                for a in 0..20 {
                    for bb in 0..20 {
                        c.set(a, bb, c.get(a, bb) + t * lambdas[j] * uj[a] * uj[bb]);
                    }
                }
            }
            for i in 0..20 {
                c.set(i, i, c.get(i, i) + sigma * sigma);
            }
            let w = c.to_dmatrix().try_inverse().unwrap();
            let a1d = a1.to_dmatrix();
            let lhs = a1d.transpose() * &w * &a1d;
            let rhs = a1d.transpose() * &w * nalgebra::DVector::from_vec(b.clone());
            let x_t = lhs.lu().solve(&rhs).unwrap();
            let diff: f64 = x_t
                .iter()
                .zip(&spot)
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt()
                / norm(&spot);
            assert!(diff < prev_diff, "t = {t}: {diff} !< {prev_diff}");
            prev_diff = diff;
            if t == 1e6 {
                assert!(diff <= 1e-3, "t = 1e6: relative difference {diff}");
            }
        }
    }

    #[test]
    fn bae_scaled_covariance_converges_to_spotlight_via_solver() {
        // same bridge, but exercising bae_normal_solve instead of the dense
        // formula
        let a1 = random_matrix(16, 4, 60);
        let u = random_orthonormal(16, 2, 61);
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let b: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() - 0.5).collect();
        let proj = projector_from_basis(u.clone()).unwrap();
        let spot = spotlight_solve(&proj, &a1, &b, &vec![0.0; 16], 0.0, 1.0, 1000)
            .unwrap()
            .x;
        let t = 1e8_f64;
        // S = √t · U diag(√λ)
        let s = DenseMatrix::from_fn(16, 2, |i, j| t.sqrt() * u.get(i, j) * [1.5f64, 0.7][j].sqrt());
        let model = ErrorModel {
            mu: vec![0.0; 16],
            s,
            sigma: 1.0,
        };
        let res = crate::baecore::bae_normal_solve(&a1, &b, &model, 0.0, 2000).unwrap();
        let rel = res
            .x
            .iter()
            .zip(&spot)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt()
            / norm(&spot);
        assert!(rel <= 1e-3, "relative difference {rel}");
    }
}
