//! End-to-end coarsened fanbeam tomography: simulate noisy data from a fine
//! phantom, reconstruct on the reduced (spotlight-coarsened) grid with and
//! without clutter handling, and compare region errors.
//!
//! Writes PGM renderings of the phantom and each reconstruction to a
//! temporary directory.

use modred::baecore::error_statistics;
use modred::priors::{build_grid_laplacian, GaussianFieldPrior, SigmoidFieldPrior};
use modred::spotlight::projector_from_error_sample;
use modred::tomo::*;
use modred::Result;

fn main() -> Result<()> {
    let grid = PixelGrid::new(64)?;
    let geom = FanBeamGeometry::new(60, 95, 2.0)?;
    let region = SpotlightRegion::centered(&grid, 32)?;
    let map = build_coarsening(&grid, &region, 16)?;
    println!(
        "fine grid {n}×{n}, coarse unknowns {c}, measurements {m}",
        n = grid.n_side(),
        c = map.n(),
        m = geom.n_measurements()
    );

    // smooth blobby prior used both for the ground truth and the error sample
    let lap = build_grid_laplacian(64, 64)?;
    let prior = SigmoidFieldPrior::new(GaussianFieldPrior::new(lap, 16.0)?, 0.0, 3.0, 1.8)?;

    let truth = spotlight_phantom(&grid, &region, &prior, 555000)?;
    let sino = simulate_sinogram(&grid, &geom, &truth, 0.02, 42)?;
    println!("simulated sinogram at 2% noise (std {:.3e})", sino.noise_std);

    let a_fine = build_fanbeam_matrix(&grid, &geom)?;
    let a_coarse = coarse_matrix(&a_fine, &map)?;

    // approximation-error sample: fine-model minus coarse-model predictions
    // over 100 prior draws
    let sample = tomo_error_sample(&a_fine, &a_coarse, &map, &prior, 100, 123)?;
    let model = error_statistics(&sample, sino.noise_std)?;
    let (proj, diag) = projector_from_error_sample(&sample, 100)?;
    println!(
        "error sample: {} draws, projector rank {}, suggested truncation {}",
        sample.len(),
        proj.rank(),
        diag.suggested_k
    );

    let noise_norm = sino.noise_std * (geom.n_measurements() as f64).sqrt();
    let out = std::env::temp_dir().join("modred-tomo-pipeline");
    std::fs::create_dir_all(&out)?;
    write_pgm(&out.join("truth.pgm"), 64, 64, &truth)?;

    for (name, method, model, proj) in [
        ("naive", TomoMethod::Naive, None, None),
        ("bae", TomoMethod::Bae, Some(&model), None),
        ("spotlight", TomoMethod::Spotlight, Some(&model), Some(&proj)),
    ] {
        let solve = tomo_reconstruct(
            method,
            &a_coarse,
            sino.stacked(),
            noise_norm,
            1.0,
            20,
            model,
            proj,
        )?;
        let x_fine = prolong_image(&map, &solve.x)?;
        let err = region_relative_error(&grid, &region, &x_fine, &truth)?;
        write_pgm(&out.join(format!("{name}.pgm")), 64, 64, &x_fine)?;
        println!(
            "{name:>9}: {:?} after {} iters, region relative error {err:.3}",
            solve.stop, solve.iters
        );
    }
    println!("images written to {}", out.display());
    Ok(())
}
