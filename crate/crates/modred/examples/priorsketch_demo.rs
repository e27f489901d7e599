//! Priorsketching: building the clutter projector without error samples.
//!
//! When the clutter enters linearly as `A₂x₂`, sketching `A₂` with prior
//! draws of `x₂` spans the clutter subspace directly. With enough sketches
//! the projector annihilates every clutter realization exactly, and the
//! projected estimate matches the dense Gaussian MAP oracle in the
//! low-noise limit.

use modred::numkit::{lsqr_morozov, norm, DenseMatrix};
use modred::spotlight::{gaussian_clutter_map, priorsketch, project_system};
use modred::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let (m, n1, n2) = (30, 4, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a1 = DenseMatrix::from_fn(m, n1, |_, _| rng.gen::<f64>() - 0.5);
    let a2 = DenseMatrix::from_fn(m, n2, |_, _| rng.gen::<f64>() - 0.5);

    // x₂ ~ N(0, I) draws are all the sketch needs
    let sampler = |seed: u64| -> Result<Vec<f64>> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n2)
            .map(|_| {
                use rand_distr::Distribution;
                rand_distr::StandardNormal.sample(&mut r)
            })
            .collect())
    };
    let k = 12;
    let (proj, diag) = priorsketch(&a2, sampler, k, 99, None)?;
    println!(
        "sketched {k} draws, projector rank {} (clutter dim {n2})",
        proj.rank()
    );
    println!("sketch spectrum: {:?}", &diag.lambdas[..proj.rank().min(8)]);

    // worst-case elimination over fresh clutter realizations
    let mut worst: f64 = 0.0;
    for s in 0..100 {
        let x2 = sampler(10_000 + s)?;
        let v = a2.matvec(&x2);
        worst = worst.max(norm(&proj.apply_complement(&v)) / norm(&v));
    }
    println!("worst ‖P⊥A₂x₂‖/‖A₂x₂‖ over 100 fresh draws: {worst:.3e}");

    // projected solve vs the dense joint MAP oracle
    let x1_true: Vec<f64> = (0..n1).map(|_| rng.gen::<f64>()).collect();
    let x2_true = sampler(424242)?;
    let mut b = a1.matvec(&x1_true);
    for (bi, ci) in b.iter_mut().zip(a2.matvec(&x2_true)) {
        *bi += ci;
    }
    let (op, rhs) = project_system(&proj, &a1, &b, &vec![0.0; m])?;
    let x_proj = lsqr_morozov(&op, &rhs, 0.0, 1.0, 200)?.x;

    let big = 1e8; // flat prior on x₁, tiny noise: MAP → projected LS
    let x_map = gaussian_clutter_map(
        &a1,
        &a2,
        &DenseMatrix::identity(n1).scaled(big),
        &DenseMatrix::identity(n2),
        &DenseMatrix::identity(m).scaled(1e-12),
        &b,
    )?;
    let gap: Vec<f64> = x_proj.iter().zip(&x_map).map(|(a, b)| a - b).collect();
    println!(
        "projected LS vs dense MAP oracle: relative gap {:.3e}",
        norm(&gap) / norm(&x_map)
    );
    Ok(())
}
