use super::DenseMatrix;
use crate::{Error, Result};

/// Thin singular value decomposition `A = U diag(d) Vᵀ` with
/// `r = min(rows, cols)` columns kept and singular values sorted descending.
pub struct LeanSvd {
    pub u: DenseMatrix,
    pub d: Vec<f64>,
    pub v: DenseMatrix,
}

/// Computes the thin SVD of a dense matrix.
///
/// Uses one-sided Jacobi rotations, which stay accurate on rank-deficient
/// inputs. Columns of `u` paired with zero singular values are zero vectors.
pub fn lean_svd(a: &DenseMatrix) -> Result<LeanSvd> {
    let m = a.rows();
    let k = a.cols();
    if m == 0 || k == 0 {
        return Err(Error::Dimension("lean_svd of an empty matrix".into()));
    }
    if m < k {
        // work on the transpose and swap the factors back
        let t = lean_svd(&a.transpose())?;
        return Ok(LeanSvd {
            u: t.v,
            d: t.d,
            v: t.u,
        });
    }

    // column-major working copies of A and V
    let mut b: Vec<Vec<f64>> = (0..k).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();

    let max_sweeps = 60;
    let tol = 1e-15;
    for sweep in 0..=max_sweeps {
        if sweep == max_sweeps {
            return Err(Error::Factorization("SVD did not converge".into()));
        }
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = crate::numkit::dot(&b[p], &b[p]);
                let beta = crate::numkit::dot(&b[q], &b[q]);
                let gamma = crate::numkit::dot(&b[p], &b[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let bp = b[p][i];
                    let bq = b[q][i];
                    b[p][i] = c * bp - s * bq;
                    b[q][i] = s * bp + c * bq;
                }
                for i in 0..k {
                    let vp = v[p][i];
                    let vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = b.iter().map(|col| crate::numkit::norm(col)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let d: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u_sorted = DenseMatrix::from_fn(m, k, |i, j| {
        let c = order[j];
        if norms[c] > 0.0 {
            b[c][i] / norms[c]
        } else {
            0.0
        }
    });
    let v_sorted = DenseMatrix::from_fn(k, k, |i, j| v[order[j]][i]);
    Ok(LeanSvd {
        u: u_sorted,
        d,
        v: v_sorted,
    })
}

/// How to extract an orthonormal basis of the numerical column span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMethod {
    Svd,
    Qr,
}

/// Orthonormal basis of the numerical column span of `a`.
///
/// Columns associated with singular values (or pivoted-QR diagonal entries)
/// at or below `tol` times the largest one are discarded; an all-zero input
/// yields an empty `rows x 0` basis.
pub fn orthonormal_basis(a: &DenseMatrix, method: BasisMethod, tol: f64) -> Result<DenseMatrix> {
    let m = a.rows();
    if m == 0 || a.cols() == 0 {
        return Err(Error::Dimension("basis of an empty matrix".into()));
    }
    match method {
        BasisMethod::Svd => {
            let svd = lean_svd(a)?;
            let dmax = svd.d.first().copied().unwrap_or(0.0);
            let r = svd.d.iter().take_while(|&&s| s > tol * dmax && s > 0.0).count();
            Ok(DenseMatrix::from_fn(m, r, |i, j| svd.u.get(i, j)))
        }
        BasisMethod::Qr => {
            let qr = a.to_dmatrix().col_piv_qr();
            let q = qr.q();
            let rmat = qr.r();
            let p = rmat.nrows().min(rmat.ncols());
            let rmax = (0..p).map(|i| rmat[(i, i)].abs()).fold(0.0, f64::max);
            let r = (0..p)
                .take_while(|&i| rmat[(i, i)].abs() > tol * rmax && rmat[(i, i)] != 0.0)
                .count();
            Ok(DenseMatrix::from_fn(m, r, |i, j| q[(i, j)]))
        }
    }
}

/// Default relative rank cutoff used when callers do not override it.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_defect(u: &DenseMatrix) -> f64 {
        let r = u.cols();
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let d = crate::numkit::dot(&u.column(i), &u.column(j))
                    - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    #[test]
    fn basis_of_identity_is_identity_span() {
        let a = DenseMatrix::identity(3);
        let u = orthonormal_basis(&a, BasisMethod::Svd, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(u.cols(), 3);
        assert!(orthonormality_defect(&u) < 1e-12);
        // span check: each e_i is reproduced by U Uᵀ e_i
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let p = u.matvec(&u.tr_matvec(&e));
            for j in 0..3 {
                assert!((p[j] - e[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_of_scaled_axes_has_rank_two() {
        // A = [2e1, e2] in R^3; Gram-Schmidt by hand gives span{e1, e2}
        let a = DenseMatrix::from_vec(3, 2, vec![2.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        for method in [BasisMethod::Svd, BasisMethod::Qr] {
            let u = orthonormal_basis(&a, method, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(u.cols(), 2);
            assert!(orthonormality_defect(&u) < 1e-12);
            for v in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] {
                let p = u.matvec(&u.tr_matvec(&v));
                for j in 0..3 {
                    assert!((p[j] - v[j]).abs() < 1e-12);
                }
            }
            // e3 is orthogonal to the span
            let p = u.matvec(&u.tr_matvec(&[0.0, 0.0, 1.0]));
            assert!(crate::numkit::norm(&p) < 1e-12);
        }
    }

    #[test]
    fn proportional_columns_give_rank_one() {
        let a = DenseMatrix::from_vec(3, 2, vec![1.0, 2.0, 2.0, 4.0, -1.0, -2.0]).unwrap();
        for method in [BasisMethod::Svd, BasisMethod::Qr] {
            let u = orthonormal_basis(&a, method, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(u.cols(), 1, "{method:?}");
        }
    }

    #[test]
    fn zero_matrix_gives_empty_basis() {
        let a = DenseMatrix::zeros(4, 3);
        for method in [BasisMethod::Svd, BasisMethod::Qr] {
            let u = orthonormal_basis(&a, method, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(u.cols(), 0);
        }
    }

    #[test]
    fn svd_of_diagonal() {
        let a = DenseMatrix::from_vec(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let svd = lean_svd(&a).unwrap();
        assert!((svd.d[0] - 3.0).abs() < 1e-12);
        assert!((svd.d[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_of_rank_one_outer_product() {
        // u = 2*e1-ish with norm 2, v with norm 1 → d1 = 2
        let u = [2.0 / 3.0_f64.sqrt(); 3]; // norm 2... actually each 2/sqrt3, norm = 2
        let v = [1.0 / 2.0_f64.sqrt(), -1.0 / 2.0_f64.sqrt()];
        let a = DenseMatrix::from_fn(3, 2, |i, j| u[i] * v[j]);
        let svd = lean_svd(&a).unwrap();
        assert!((svd.d[0] - 2.0).abs() < 1e-10);
        assert!(svd.d[1].abs() < 1e-10);
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = DenseMatrix::from_fn(10, 4, |_, _| rng.gen::<f64>() - 0.5);
        let svd = lean_svd(&a).unwrap();
        // U diag(d) Vᵀ
        let mut rec = DenseMatrix::zeros(10, 4);
        for i in 0..10 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..svd.d.len() {
                    s += svd.u.get(i, k) * svd.d[k] * svd.v.get(j, k);
                }
                rec.set(i, j, s);
            }
        }
        let err = rec.sub(&a).frobenius_norm();
        assert!(err <= 1e-10 * a.frobenius_norm());
        assert!(orthonormality_defect(&svd.u) < 1e-12);
        assert!(orthonormality_defect(&svd.v) < 1e-12);
        for w in svd.d.windows(2) {
            assert!(w[0] >= w[1]);
            assert!(w[1] >= 0.0);
        }
    }
}
