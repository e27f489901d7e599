//! Draws from the blob prior: a Whittle–Matérn Gaussian field pushed
//! through a sigmoid, producing random two-valued inclusions with smooth
//! edges. Writes a strip of draws as PGM images.

use modred::priors::{build_grid_laplacian, draw_sigmoid_prior, GaussianFieldPrior, SigmoidFieldPrior};
use modred::tomo::write_pgm;
use modred::Result;

fn main() -> Result<()> {
    let n = 64;
    let lap = build_grid_laplacian(n, n)?;
    let out = std::env::temp_dir().join("modred-prior-draws");
    std::fs::create_dir_all(&out)?;

    // lambda controls correlation length, gamma the inclusion contrast
    for (lambda, gamma) in [(8.0, 1.8), (16.0, 1.8), (16.0, 3.0)] {
        let field = GaussianFieldPrior::new(lap.clone(), lambda)?;
        let prior = SigmoidFieldPrior::new(field, 0.0, 3.0, gamma)?;
        let draws = draw_sigmoid_prior(&prior, 4, 2024)?;
        for j in 0..draws.cols() {
            let img = draws.column(j);
            let path = out.join(format!("lambda{lambda}_gamma{gamma}_{j}.pgm"));
            let (lo, hi) = write_pgm(&path, n, n, &img)?;
            println!(
                "{}: values in [{lo:.3}, {hi:.3}]",
                path.file_name().unwrap().to_string_lossy()
            );
        }
    }
    println!("images written to {}", out.display());
    Ok(())
}
