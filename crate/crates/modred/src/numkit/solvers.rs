use super::{axpy, dot, norm, LinearOperator, SparseMatrix};
use crate::{Error, Result};

/// Why an iterative solver returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Residual reached the discrepancy / target level.
    Discrepancy,
    /// Numerical convergence (residual or normal-equation residual exhausted).
    Converged,
    /// Iteration budget exhausted before any stopping test fired.
    MaxIter,
}

/// Result of [`lsqr_morozov`].
pub struct LsqrResult {
    pub x: Vec<f64>,
    /// ‖Ax − b‖ of the returned iterate.
    pub residual_norm: f64,
    pub iters: usize,
    pub stop: StopReason,
    /// Residual norm after every iteration (starting with ‖b‖ at iterate 0).
    pub residual_history: Vec<f64>,
}

/// LSQR (Paige–Saunders) for `min ‖Ax − b‖`, stopped by the Morozov
/// discrepancy principle: iterations halt at the first iterate with
/// `‖Ax − b‖ ≤ tau · noise_norm`. With `noise_norm = 0` the iteration runs
/// to numerical convergence.
pub fn lsqr_morozov(
    a: &dyn LinearOperator,
    b: &[f64],
    noise_norm: f64,
    tau: f64,
    max_iter: usize,
) -> Result<LsqrResult> {
    if b.len() != a.range_dim() {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match range dim {}",
            b.len(),
            a.range_dim()
        )));
    }
    if !(noise_norm >= 0.0) || !(tau >= 1.0) {
        return Err(Error::InvalidArgument(
            "require noise_norm >= 0 and tau >= 1".into(),
        ));
    }
    let n = a.domain_dim();
    let target = tau * noise_norm;

    let beta0 = norm(b);
    let mut x = vec![0.0; n];
    let mut history = vec![beta0];
    if beta0 == 0.0 || beta0 <= target {
        let stop = if beta0 == 0.0 {
            StopReason::Converged
        } else {
            StopReason::Discrepancy
        };
        return Ok(LsqrResult {
            x,
            residual_norm: beta0,
            iters: 0,
            stop,
            residual_history: history,
        });
    }

    let mut u: Vec<f64> = b.iter().map(|&v| v / beta0).collect();
    let mut v = a.apply_adjoint(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        // b orthogonal to range(A); x = 0 is the LS solution.
        return Ok(LsqrResult {
            x,
            residual_norm: beta0,
            iters: 0,
            stop: StopReason::Converged,
            residual_history: history,
        });
    }
    for vi in &mut v {
        *vi /= alpha;
    }
    let mut w = v.clone();
    let mut phi_bar = beta0;
    let mut rho_bar = alpha;
    let mut anorm2 = alpha * alpha;

    let mut stop = StopReason::MaxIter;
    let mut iters = 0;
    for it in 1..=max_iter {
        // bidiagonalization step
        let av = a.apply(&v);
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        let beta = norm(&u);
        if beta > 0.0 {
            for ui in &mut u {
                *ui /= beta;
            }
        }
        let atu = a.apply_adjoint(&u);
        for (vi, ati) in v.iter_mut().zip(&atu) {
            *vi = ati - beta * *vi;
        }
        alpha = norm(&v);
        if alpha > 0.0 {
            for vi in &mut v {
                *vi /= alpha;
            }
        }
        anorm2 += alpha * alpha + beta * beta;

        // plane rotation
        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rho_bar = -c * alpha;
        let phi = c * phi_bar;
        phi_bar *= s;

        axpy(phi / rho, &w, &mut x);
        let scale = theta / rho;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = vi - scale * *wi;
        }

        iters = it;
        history.push(phi_bar);

        if phi_bar <= target && noise_norm > 0.0 {
            stop = StopReason::Discrepancy;
            break;
        }
        // ‖Aᵀr‖ = phi_bar·alpha·|c|; converged when it is negligible.
        let atr_norm = phi_bar * alpha * c.abs();
        if atr_norm <= 1e-14 * anorm2.sqrt() * phi_bar || phi_bar <= 1e-15 * beta0 {
            stop = StopReason::Converged;
            break;
        }
    }

    let mut r = a.apply(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let residual_norm = norm(&r);
    Ok(LsqrResult {
        x,
        residual_norm,
        iters,
        stop,
        residual_history: history,
    })
}

/// Result of [`cg_spd`].
pub struct CgResult {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iters: usize,
    pub stop: StopReason,
}

/// Conjugate gradients for `M x = rhs` with symmetric positive semidefinite
/// `M`. Symmetry is probe-tested before iterating.
pub fn cg_spd(
    m: &dyn LinearOperator,
    rhs: &[f64],
    target_residual: f64,
    max_iter: usize,
) -> Result<CgResult> {
    if m.domain_dim() != m.range_dim() {
        return Err(Error::Dimension("cg_spd requires a square operator".into()));
    }
    if rhs.len() != m.domain_dim() {
        return Err(Error::Dimension("cg_spd rhs length mismatch".into()));
    }
    // self-adjointness probe: ⟨Mv,w⟩ = ⟨v,Mw⟩ with the forward action only
    let dev = symmetry_defect(m, 3, 0x5ead);
    if dev > 1e-8 {
        return Err(Error::NotSymmetric(dev));
    }
    cg_unchecked(m, rhs, target_residual, max_iter)
}

fn symmetry_defect(m: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = m.domain_dim();
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let mv = m.apply(&v);
        let mw = m.apply(&w);
        let scale = norm(&v) * norm(&w) * (norm(&mv) / norm(&v).max(1e-300)).max(1e-300);
        worst = worst.max((dot(&mv, &w) - dot(&v, &mw)).abs() / scale.max(1e-300));
    }
    worst
}

fn cg_unchecked(
    m: &dyn LinearOperator,
    rhs: &[f64],
    target_residual: f64,
    max_iter: usize,
) -> Result<CgResult> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let mut iters = 0;
    let mut stop = StopReason::MaxIter;
    if rs.sqrt() <= target_residual {
        stop = StopReason::Discrepancy;
    } else {
        for it in 1..=max_iter {
            let mp = m.apply(&p);
            let pmp = dot(&p, &mp);
            if pmp <= 0.0 {
                if pmp < -1e-12 * dot(&p, &p) {
                    return Err(Error::Solver(format!(
                        "CG breakdown: indefinite curvature {pmp:.3e}"
                    )));
                }
                // semidefinite direction exhausted
                stop = StopReason::Converged;
                iters = it - 1;
                break;
            }
            let alpha = rs / pmp;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &mp, &mut r);
            let rs_new = dot(&r, &r);
            iters = it;
            if rs_new.sqrt() <= target_residual {
                stop = StopReason::Discrepancy;
                break;
            }
            if rs_new.sqrt() <= 1e-15 * norm(rhs) {
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
    let residual_norm = {
        let mut res = m.apply(&x);
        for (a, b) in res.iter_mut().zip(rhs) {
            *a = b - *a;
        }
        norm(&res)
    };
    Ok(CgResult {
        x,
        residual_norm,
        iters,
        stop,
    })
}

/// Solves `M x = rhs` for a sparse SPD matrix, with relative residual
/// tolerance `tol`.
pub fn sparse_spd_solve(m: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension("sparse_spd_solve requires square M".into()));
    }
    let target = tol * norm(rhs);
    let res = cg_unchecked(m, rhs, target, 10 * m.rows().max(100))?;
    if res.residual_norm > target.max(1e-14) {
        return Err(Error::Solver(format!(
            "sparse SPD solve stalled at residual {:.3e} (target {:.3e})",
            res.residual_norm, target
        )));
    }
    Ok(res.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lsqr_identity_recovers_rhs() {
        let a = DenseMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, -0.25];
        let res = lsqr_morozov(&a, &b, 0.0, 1.0, 100).unwrap();
        for (xi, bi) in res.x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-10);
        }
    }

    /// Dense normal-equations oracle for a consistent overdetermined system.
    #[test]
    fn lsqr_matches_dense_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DenseMatrix::from_fn(20, 10, |i, j| {
            (if i == j { 2.0 } else { 0.0 }) + 0.3 * (rng.gen::<f64>() - 0.5)
        });
        let b: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() - 0.5).collect();
        let res = lsqr_morozov(&a, &b, 0.0, 1.0, 500).unwrap();

        // oracle: solve AᵀA x = Aᵀ b densely
        let ata = a.transpose().matmul(&a).to_dmatrix();
        let atb = nalgebra::DVector::from_vec(a.tr_matvec(&b));
        let x_oracle = ata.cholesky().unwrap().solve(&atb);
        for i in 0..10 {
            assert!((res.x[i] - x_oracle[i]).abs() < 1e-8, "component {i}");
        }
    }

    #[test]
    fn lsqr_discrepancy_stopping_brackets_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::from_fn(40, 15, |_, _| rng.gen::<f64>() - 0.5);
        let x_true: Vec<f64> = (0..15).map(|_| rng.gen::<f64>()).collect();
        let noise: Vec<f64> = (0..40).map(|_| 0.05 * (rng.gen::<f64>() - 0.5)).collect();
        let noise_norm = crate::numkit::norm(&noise);
        let mut b = a.matvec(&x_true);
        for (bi, ei) in b.iter_mut().zip(&noise) {
            *bi += ei;
        }
        let tau = 1.0;
        let res = lsqr_morozov(&a, &b, noise_norm, tau, 1000).unwrap();
        assert_eq!(res.stop, StopReason::Discrepancy);
        assert!(res.residual_norm <= tau * noise_norm + 1e-12);
        // previous iterate was still above the target
        let prev = res.residual_history[res.iters - 1];
        assert!(prev > tau * noise_norm);
        // residual history nonincreasing
        for w in res.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn lsqr_flags_max_iter() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let b = vec![1.0; 6];
        let res = lsqr_morozov(&a, &b, 1e-300, 1.0, 2).unwrap();
        assert_eq!(res.stop, StopReason::MaxIter);
    }

    #[test]
    fn cg_identity_converges_in_one_step() {
        let m = DenseMatrix::identity(4);
        let rhs = vec![1.0, 2.0, 3.0, 4.0];
        let res = cg_spd(&m, &rhs, 1e-12, 10).unwrap();
        assert_eq!(res.iters, 1);
        for (a, b) in res.x.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    /// Dense Cholesky oracle on a 5x5 SPD matrix.
    #[test]
    fn cg_matches_dense_cholesky() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = DenseMatrix::from_fn(5, 5, |_, _| rng.gen::<f64>() - 0.5);
        let mut m = g.transpose().matmul(&g);
        for i in 0..5 {
            m.set(i, i, m.get(i, i) + 1.0);
        }
        let rhs = vec![1.0, -1.0, 0.5, 2.0, 0.0];
        let res = cg_spd(&m, &rhs, 1e-12, 100).unwrap();
        let x_oracle = m
            .to_dmatrix()
            .cholesky()
            .unwrap()
            .solve(&nalgebra::DVector::from_vec(rhs.clone()));
        for i in 0..5 {
            assert!((res.x[i] - x_oracle[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn cg_rejects_nonsymmetric_operator() {
        let m = DenseMatrix::from_vec(2, 2, vec![1.0, 5.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            cg_spd(&m, &[1.0, 1.0], 1e-10, 10),
            Err(crate::Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn cg_handles_singular_consistent_system() {
        // M = diag(1, 1, 0), rhs in range
        let m = DenseMatrix::from_vec(3, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 0.]).unwrap();
        let rhs = vec![1.0, 2.0, 0.0];
        let res = cg_spd(&m, &rhs, 1e-12, 50).unwrap();
        assert!(res.residual_norm < 1e-10);
    }

    #[test]
    fn sparse_solve_scaled_identity() {
        let m = SparseMatrix::identity(4).shifted(1.0).unwrap(); // 2I
        let x = sparse_spd_solve(&m, &[2.0, 2.0, 2.0, 2.0], 1e-12).unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-10);
        }
    }

    /// 1D Laplacian + shift, against dense solve.
    #[test]
    fn sparse_solve_matches_dense_oracle() {
        let n = 12;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let m = SparseMatrix::from_triplets(n, n, &t).unwrap().shifted(0.04).unwrap();
        let mut rhs = vec![0.0; n];
        rhs[0] = 1.0;
        let x = sparse_spd_solve(&m, &rhs, 1e-12).unwrap();
        let x_oracle = m
            .to_dense()
            .to_dmatrix()
            .cholesky()
            .unwrap()
            .solve(&nalgebra::DVector::from_vec(rhs));
        for i in 0..n {
            assert!((x[i] - x_oracle[i]).abs() < 1e-8);
        }
    }
}
