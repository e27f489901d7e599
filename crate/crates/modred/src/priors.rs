//! Physics-informed priors: Whittle–Matérn-type Gaussian fields obtained by
//! solving `(−Δ + λ⁻²I) ξ = w` against white noise `w`, optionally pushed
//! through a component-wise sigmoid to produce positive, bounded draws.

use crate::numkit::{sparse_spd_solve, DenseMatrix, SparseMatrix};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Gaussian field prior with precision operator `(−Δ + λ⁻²I)²` realized
/// through draws `ξ = (−Δ + λ⁻²I)⁻¹ w`, `w ~ N(0, I)`.
#[derive(Debug, Clone)]
pub struct GaussianFieldPrior {
    /// The shifted Laplacian `−Δ + λ⁻²I` (SPD).
    system: SparseMatrix,
    lambda: f64,
}

impl GaussianFieldPrior {
    /// `laplacian` is a positive-semidefinite discrete Laplacian (grid or
    /// graph); the `λ⁻²` shift applied here makes the system SPD.
    pub fn new(laplacian: SparseMatrix, lambda: f64) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::InvalidArgument(
                "correlation length must be positive".into(),
            ));
        }
        if laplacian.rows() != laplacian.cols() {
            return Err(Error::Dimension("Laplacian must be square".into()));
        }
        let system = laplacian.shifted(lambda.powi(-2))?;
        Ok(Self { system, lambda })
    }

    pub fn dim(&self) -> usize {
        self.system.rows()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn system(&self) -> &SparseMatrix {
        &self.system
    }
}

/// Sigmoid-transformed field prior: `X = γ Σ(Ξ)` component-wise.
#[derive(Debug, Clone)]
pub struct SigmoidFieldPrior {
    pub field: GaussianFieldPrior,
    /// Sigmoid midpoint.
    pub xi0: f64,
    /// Contrast / slope parameter (> 0).
    pub alpha: f64,
    /// Dynamic-range scale (> 0).
    pub gamma: f64,
}

impl SigmoidFieldPrior {
    pub fn new(field: GaussianFieldPrior, xi0: f64, alpha: f64, gamma: f64) -> Result<Self> {
        if alpha <= 0.0 || gamma <= 0.0 {
            return Err(Error::InvalidArgument("require alpha > 0, gamma > 0".into()));
        }
        Ok(Self {
            field,
            xi0,
            alpha,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

/// 5-point stencil Laplacian on an nx×ny grid with zero-flux boundary:
/// symmetric, row sums zero, constants in the null space.
pub fn build_grid_laplacian(nx: usize, ny: usize) -> Result<SparseMatrix> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument("grid must be at least 2x2".into()));
    }
    let idx = |i: usize, j: usize| i * ny + j;
    let mut triplets = Vec::with_capacity(5 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let me = idx(i, j);
            let mut degree = 0.0;
            let mut push = |other: usize| {
                triplets.push((me, other, -1.0));
            };
            if i > 0 {
                push(idx(i - 1, j));
                degree += 1.0;
            }
            if i + 1 < nx {
                push(idx(i + 1, j));
                degree += 1.0;
            }
            if j > 0 {
                push(idx(i, j - 1));
                degree += 1.0;
            }
            if j + 1 < ny {
                push(idx(i, j + 1));
                degree += 1.0;
            }
            triplets.push((me, me, degree));
        }
    }
    SparseMatrix::from_triplets(nx * ny, nx * ny, &triplets)
}

/// Graph Laplacian from an undirected edge list over `n` vertices
/// (degree on the diagonal, −1 per shared edge).
pub fn build_graph_laplacian(n: usize, edges: &[(usize, usize)]) -> Result<SparseMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("empty graph".into()));
    }
    let mut triplets = Vec::with_capacity(4 * edges.len());
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::Dimension(format!("edge ({a},{b}) outside 0..{n}")));
        }
        if a == b {
            continue;
        }
        triplets.push((a, b, -1.0));
        triplets.push((b, a, -1.0));
        triplets.push((a, a, 1.0));
        triplets.push((b, b, 1.0));
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

fn standard_normal_vec(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Draws `n_draws` columns ξ with `(−Δ + λ⁻²I) ξ = w`, `w ~ N(0,I)`.
/// Column `j` uses derived seed `seed + j`, so generation is
/// order-independent and reproducible.
pub fn draw_gaussian_field(
    prior: &GaussianFieldPrior,
    n_draws: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    if n_draws == 0 {
        return Err(Error::InvalidArgument("n_draws must be >= 1".into()));
    }
    let dim = prior.dim();
    let columns: Result<Vec<Vec<f64>>> = (0..n_draws)
        .into_par_iter()
        .map(|j| {
            let w = standard_normal_vec(dim, seed.wrapping_add(j as u64));
            sparse_spd_solve(prior.system(), &w, 1e-10)
        })
        .collect();
    DenseMatrix::from_columns(&columns?)
}

/// Component-wise `γ / (1 + exp(α(ξ0 − ξ_j)))`, overflow-safe.
pub fn sigmoid_transform(xi: &[f64], xi0: f64, alpha: f64, gamma: f64) -> Vec<f64> {
    xi.iter()
        .map(|&x| {
            let u = alpha * (x - xi0);
            let s = if u >= 0.0 {
                1.0 / (1.0 + (-u).exp())
            } else {
                let e = u.exp();
                e / (1.0 + e)
            };
            gamma * s
        })
        .collect()
}

/// Draws from the sigmoid-transformed field prior; determinism as in
/// [`draw_gaussian_field`].
pub fn draw_sigmoid_prior(
    prior: &SigmoidFieldPrior,
    n_draws: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    let gauss = draw_gaussian_field(&prior.field, n_draws, seed)?;
    let cols: Vec<Vec<f64>> = (0..n_draws)
        .map(|j| sigmoid_transform(&gauss.column(j), prior.xi0, prior.alpha, prior.gamma))
        .collect();
    DenseMatrix::from_columns(&cols)
}
