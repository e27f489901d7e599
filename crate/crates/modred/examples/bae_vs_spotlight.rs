//! The bridge between the two clutter strategies: statistical compensation
//! with covariance `tC` converges to the orthogonal-projection (spotlight)
//! solution as `t → ∞`.
//!
//! A small synthetic problem with three clutter directions makes the limit
//! visible: the BAE solve with inflated covariance walks onto the projected
//! least-squares solution.

use modred::baecore::{bae_normal_solve, ErrorModel};
use modred::numkit::{lsqr_morozov, norm, DenseMatrix};
use modred::spotlight::{project_system, projector_from_basis};
use modred::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let (m, n, k) = (20, 5, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = DenseMatrix::from_fn(m, n, |_, _| rng.gen::<f64>() - 0.5);
    let s = DenseMatrix::from_fn(m, k, |_, _| rng.gen::<f64>() - 0.5);
    let x_true: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();

    // data = signal + a draw from the clutter span + small noise
    let mut b = a.matvec(&x_true);
    let c: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() - 0.5).collect();
    for (bi, si) in b.iter_mut().zip(s.matvec(&c)) {
        *bi += si;
    }
    for bi in b.iter_mut() {
        *bi += 1e-3 * (rng.gen::<f64>() - 0.5);
    }

    // spotlight reference: annihilate the clutter span, then least squares
    let basis = modred::numkit::orthonormal_basis(
        &s,
        modred::numkit::BasisMethod::Svd,
        modred::numkit::DEFAULT_RANK_TOL,
    )?;
    let proj = projector_from_basis(basis)?;
    let (op, rhs) = project_system(&proj, &a, &b, &vec![0.0; m])?;
    let x_spot = lsqr_morozov(&op, &rhs, 0.0, 1.0, 200)?.x;

    println!("t          ‖x_bae(t) − x_spot‖ / ‖x_spot‖");
    for t in [1e0f64, 1e2, 1e4, 1e6] {
        let model = ErrorModel {
            mu: vec![0.0; m],
            s: s.scaled(t.sqrt()),
            sigma: 1e-3,
        };
        let x_bae = bae_normal_solve(&a, &b, &model, 0.0, 500)?.x;
        let gap: Vec<f64> = x_bae.iter().zip(&x_spot).map(|(a, b)| a - b).collect();
        println!("{t:<10.0e} {:.3e}", norm(&gap) / norm(&x_spot));
    }
    Ok(())
}
