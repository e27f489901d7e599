//! Fanbeam tomography: pixel grids, ray-traced system matrices, fine-to-coarse
//! model reduction, synthetic phantoms, and the reconstruction pipelines
//! (fine, naive coarse, BAE-compensated, spotlight-projected).

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::baecore::{bae_normal_solve, sample_error, ErrorModel, ErrorSample};
use crate::numkit::{atomic_write, write_mrd1_to, DenseMatrix, SparseMatrix, StopReason};
use crate::priors::{draw_sigmoid_prior, SigmoidFieldPrior};
use crate::spotlight::{spotlight_solve, Projector};
use crate::{Error, Result};

/// Square pixelization of the unit square `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelGrid {
    n_side: usize,
}

impl PixelGrid {
    pub fn new(n_side: usize) -> Result<Self> {
        if n_side < 2 {
            return Err(Error::InvalidArgument("grid needs n_side >= 2".into()));
        }
        Ok(PixelGrid { n_side })
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    /// Total number of fine pixels `N = n_side²`.
    pub fn n_pixels(&self) -> usize {
        self.n_side * self.n_side
    }

    pub fn pixel_size(&self) -> f64 {
        1.0 / self.n_side as f64
    }

    /// Row-major pixel index; row 0 is the bottom of the square.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_side + col
    }
}

/// Rectangle of fine-pixel indices kept at full resolution.
/// Row/column ranges are half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpotlightRegion {
    pub row0: usize,
    pub row1: usize,
    pub col0: usize,
    pub col1: usize,
}

impl SpotlightRegion {
    pub fn new(row0: usize, row1: usize, col0: usize, col1: usize) -> Result<Self> {
        if row0 >= row1 || col0 >= col1 {
            return Err(Error::InvalidArgument("empty spotlight region".into()));
        }
        Ok(SpotlightRegion {
            row0,
            row1,
            col0,
            col1,
        })
    }

    /// Square region of side `side` centered in the grid.
    pub fn centered(grid: &PixelGrid, side: usize) -> Result<Self> {
        let n = grid.n_side();
        if side == 0 || side > n || (n - side) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot center a {side}-pixel region in a {n}-pixel grid"
            )));
        }
        let lo = (n - side) / 2;
        SpotlightRegion::new(lo, lo + side, lo, lo + side)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row0 && row < self.row1 && col >= self.col0 && col < self.col1
    }

    /// Number of fine pixels inside the region.
    pub fn len(&self) -> usize {
        (self.row1 - self.row0) * (self.col1 - self.col0)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Aggregation map between fine and coarse pixel images: `P` is the 0/1
/// matrix whose rows partition the fine pixels, `W = diag(row sums of P)`.
#[derive(Debug, Clone)]
pub struct CoarseMap {
    p: SparseMatrix,
    w: Vec<f64>,
    fine_to_coarse: Vec<usize>,
}

impl CoarseMap {
    pub fn p(&self) -> &SparseMatrix {
        &self.p
    }

    /// Diagonal of `W` (constituent counts per coarse pixel).
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// Coarse dimension n.
    pub fn n(&self) -> usize {
        self.p.rows()
    }

    /// Fine dimension N.
    pub fn n_fine(&self) -> usize {
        self.p.cols()
    }

    /// Coarse pixel owning each fine pixel.
    pub fn fine_to_coarse(&self) -> &[usize] {
        &self.fine_to_coarse
    }
}

/// Builds the coarsening map: region pixels stay singletons (listed first,
/// row-major), everything outside aggregates into `block × block` squares
/// (row-major block order).
pub fn build_coarsening(
    grid: &PixelGrid,
    region: &SpotlightRegion,
    block: usize,
) -> Result<CoarseMap> {
    let n_side = grid.n_side();
    if block == 0 || n_side % block != 0 {
        return Err(Error::InvalidArgument(format!(
            "block {block} does not divide grid side {n_side}"
        )));
    }
    if region.row1 > n_side || region.col1 > n_side {
        return Err(Error::InvalidArgument("region exceeds the grid".into()));
    }
    for bound in [region.row0, region.row1, region.col0, region.col1] {
        if bound % block != 0 {
            return Err(Error::InvalidArgument(format!(
                "region boundary {bound} is not a multiple of block {block}"
            )));
        }
    }

    let big = grid.n_pixels(); // sentinel for "unassigned"
    let mut fine_to_coarse = vec![big; grid.n_pixels()];
    let mut next = 0usize;
    for r in region.row0..region.row1 {
        for c in region.col0..region.col1 {
            fine_to_coarse[grid.index(r, c)] = next;
            next += 1;
        }
    }
    let blocks_per_side = n_side / block;
    for br in 0..blocks_per_side {
        for bc in 0..blocks_per_side {
            let (r0, c0) = (br * block, bc * block);
            if region.contains(r0, c0) {
                continue; // alignment makes this all-or-nothing
            }
            for r in r0..r0 + block {
                for c in c0..c0 + block {
                    fine_to_coarse[grid.index(r, c)] = next;
                }
            }
            next += 1;
        }
    }

    let triplets: Vec<(usize, usize, f64)> = fine_to_coarse
        .iter()
        .enumerate()
        .map(|(fine, &coarse)| (coarse, fine, 1.0))
        .collect();
    let p = SparseMatrix::from_triplets(next, grid.n_pixels(), &triplets)?;
    let mut w = vec![0.0; next];
    for &coarse in &fine_to_coarse {
        w[coarse] += 1.0;
    }
    Ok(CoarseMap {
        p,
        w,
        fine_to_coarse,
    })
}

/// Fine-to-coarse restriction `x^n = W⁻¹ P x^N` (block means; spotlight
/// pixels pass through unchanged).
pub fn restrict_image(map: &CoarseMap, x_fine: &[f64]) -> Result<Vec<f64>> {
    if x_fine.len() != map.n_fine() {
        return Err(Error::Dimension(format!(
            "image length {} does not match fine dimension {}",
            x_fine.len(),
            map.n_fine()
        )));
    }
    let mut out = map.p.matvec(x_fine);
    for (v, w) in out.iter_mut().zip(&map.w) {
        *v /= w;
    }
    Ok(out)
}

/// Coarse-to-fine injection `x^N = Pᵀ x^n` (piecewise-constant prolongation).
pub fn prolong_image(map: &CoarseMap, x_coarse: &[f64]) -> Result<Vec<f64>> {
    if x_coarse.len() != map.n() {
        return Err(Error::Dimension(format!(
            "image length {} does not match coarse dimension {}",
            x_coarse.len(),
            map.n()
        )));
    }
    Ok(map
        .fine_to_coarse
        .iter()
        .map(|&c| x_coarse[c])
        .collect())
}

/// Fanbeam acquisition geometry: a point source on a circle of radius
/// `source_radius` around the square's center, `n_angles` uniform source
/// positions on `[0, 2π)`, `n_rays` equiangular rays per position.
#[derive(Debug, Clone, Copy)]
pub struct FanBeamGeometry {
    pub n_angles: usize,
    pub n_rays: usize,
    pub source_radius: f64,
    /// Half opening angle of the fan.
    pub half_fan: f64,
}

impl FanBeamGeometry {
    /// Fan opening chosen so the beam covers a disk of radius 0.85 around the
    /// center: the whole square is illuminated and the outermost rays miss it
    /// entirely (air rays used for noise estimation).
    pub fn new(n_angles: usize, n_rays: usize, source_radius: f64) -> Result<Self> {
        if n_angles == 0 || n_rays == 0 {
            return Err(Error::InvalidArgument("need angles and rays >= 1".into()));
        }
        if source_radius <= std::f64::consts::FRAC_1_SQRT_2 {
            return Err(Error::InvalidArgument(
                "source must sit outside the square's circumscribed circle".into(),
            ));
        }
        let coverage = 0.85f64.min(0.99 * source_radius);
        Ok(FanBeamGeometry {
            n_angles,
            n_rays,
            source_radius,
            half_fan: (coverage / source_radius).asin(),
        })
    }

    /// Total ray count `m = n_angles × n_rays`.
    pub fn n_measurements(&self) -> usize {
        self.n_angles * self.n_rays
    }

    /// Source point and unit direction of ray `ray` at source position `angle`.
    pub fn ray(&self, angle: usize, ray: usize) -> ((f64, f64), (f64, f64)) {
        let phi = 2.0 * std::f64::consts::PI * angle as f64 / self.n_angles as f64;
        let src = (
            0.5 + self.source_radius * phi.cos(),
            0.5 + self.source_radius * phi.sin(),
        );
        let eta = -self.half_fan
            + (ray as f64 + 0.5) * (2.0 * self.half_fan / self.n_rays as f64);
        let psi = phi + std::f64::consts::PI + eta;
        (src, (psi.cos(), psi.sin()))
    }
}

/// Stack of fanbeam measurements, one row per source position.
#[derive(Debug, Clone)]
pub struct Sinogram {
    pub data: DenseMatrix,
    /// Per-measurement noise standard deviation (0 when unknown/noiseless).
    pub noise_std: f64,
}

impl Sinogram {
    /// The measurements as one stacked vector b (angle-major).
    pub fn stacked(&self) -> &[f64] {
        self.data.data()
    }
}

/// Intersection lengths of one ray with the grid pixels, by incremental
/// parametric traversal. The direction need not be normalized.
pub fn trace_ray(
    grid: &PixelGrid,
    point: (f64, f64),
    dir: (f64, f64),
) -> Vec<(usize, f64)> {
    let n = grid.n_side();
    let h = grid.pixel_size();
    let len = (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
    if len == 0.0 {
        return Vec::new();
    }
    let d = (dir.0 / len, dir.1 / len);
    let p = point;

    // clip the ray to the unit square
    let mut tmin = f64::NEG_INFINITY;
    let mut tmax = f64::INFINITY;
    for (pc, dc) in [(p.0, d.0), (p.1, d.1)] {
        if dc.abs() < 1e-300 {
            if !(0.0..=1.0).contains(&pc) {
                return Vec::new();
            }
        } else {
            let (t0, t1) = ((0.0 - pc) / dc, (1.0 - pc) / dc);
            tmin = tmin.max(t0.min(t1));
            tmax = tmax.min(t0.max(t1));
        }
    }
    if tmax <= tmin {
        return Vec::new();
    }

    let entry = (p.0 + tmin * d.0, p.1 + tmin * d.1);
    let clampi = |v: f64| -> usize { (v.floor() as i64).clamp(0, n as i64 - 1) as usize };
    // nudge inward so the starting cell is unambiguous on grid lines
    let eps = 1e-12;
    let mut ix = clampi((entry.0 + eps * d.0) / h) as i64;
    let mut iy = clampi((entry.1 + eps * d.1) / h) as i64;

    let step = |dc: f64| if dc > 0.0 { 1i64 } else { -1 };
    let next_crossing = |i: i64, pc: f64, dc: f64| -> f64 {
        if dc.abs() < 1e-300 {
            f64::INFINITY
        } else {
            let boundary = (i + if dc > 0.0 { 1 } else { 0 }) as f64 * h;
            (boundary - pc) / dc
        }
    };
    let mut tx = next_crossing(ix, p.0, d.0);
    let mut ty = next_crossing(iy, p.1, d.1);
    let dtx = if d.0.abs() < 1e-300 { f64::INFINITY } else { h / d.0.abs() };
    let dty = if d.1.abs() < 1e-300 { f64::INFINITY } else { h / d.1.abs() };

    let mut out = Vec::new();
    let mut t = tmin;
    while t < tmax - 1e-14 {
        let t_exit = tx.min(ty).min(tmax);
        let seg = t_exit - t;
        if seg > 0.0 && (0..n as i64).contains(&ix) && (0..n as i64).contains(&iy) {
            out.push((grid.index(iy as usize, ix as usize), seg));
        }
        if t_exit >= tmax - 1e-14 {
            break;
        }
        if tx <= ty {
            ix += step(d.0);
            tx += dtx;
        } else {
            iy += step(d.1);
            ty += dty;
        }
        t = t_exit;
    }
    out
}

/// Assembles the fanbeam system matrix `A^N` (one row per ray, entry
/// `(ℓ, j)` the intersection length of ray ℓ with pixel j). Rows are
/// traced in parallel.
pub fn build_fanbeam_matrix(grid: &PixelGrid, geom: &FanBeamGeometry) -> Result<SparseMatrix> {
    let m = geom.n_measurements();
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .into_par_iter()
        .map(|ell| {
            let (src, dir) = geom.ray(ell / geom.n_rays, ell % geom.n_rays);
            trace_ray(grid, src, dir)
        })
        .collect();
    let mut triplets = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    for (ell, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            triplets.push((ell, j, v));
        }
    }
    SparseMatrix::from_triplets(m, grid.n_pixels(), &triplets)
}

/// Coarse system matrix `A^n = A^N Pᵀ`: fine columns summed per coarse pixel.
pub fn coarse_matrix(a_fine: &SparseMatrix, map: &CoarseMap) -> Result<SparseMatrix> {
    if a_fine.cols() != map.n_fine() {
        return Err(Error::Dimension(format!(
            "matrix has {} columns but map aggregates {} fine pixels",
            a_fine.cols(),
            map.n_fine()
        )));
    }
    let n = map.n();
    let mut triplets = Vec::new();
    let mut acc = vec![0.0; n];
    let mut touched = Vec::new();
    for i in 0..a_fine.rows() {
        for (j, v) in a_fine.row_entries(i) {
            let c = map.fine_to_coarse[j];
            if acc[c] == 0.0 {
                touched.push(c);
            }
            acc[c] += v;
        }
        for &c in &touched {
            triplets.push((i, c, acc[c]));
            acc[c] = 0.0;
        }
        touched.clear();
    }
    SparseMatrix::from_triplets(a_fine.rows(), n, &triplets)
}

/// Piecewise-constant lotus-root-like phantom: rind annulus, flesh disk,
/// dense core, a ring of low-attenuation channels inside the center region
/// and a ring of dense seeds farther out.
pub fn lotus_phantom(grid: &PixelGrid) -> Vec<f64> {
    let n = grid.n_side();
    let h = grid.pixel_size();
    let mut img = vec![0.0; grid.n_pixels()];
    for r in 0..n {
        for c in 0..n {
            let x = (c as f64 + 0.5) * h - 0.5;
            let y = (r as f64 + 0.5) * h - 0.5;
            let rad = (x * x + y * y).sqrt();
            let mut v = 0.0;
            if rad <= 0.42 {
                v = if rad > 0.36 { 1.4 } else { 1.0 };
                if rad <= 0.36 {
                    let theta = y.atan2(x);
                    for s in 0..8 {
                        let ang = std::f64::consts::FRAC_PI_4 * s as f64;
                        // air channels (inside the spotlight region)
                        let (cx, cy) = (0.16 * ang.cos(), 0.16 * ang.sin());
                        if ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() <= 0.045 {
                            v = 0.3;
                        }
                        // seeds (outer flesh)
                        let ang2 = ang + std::f64::consts::FRAC_PI_8;
                        let (sx, sy) = (0.28 * ang2.cos(), 0.28 * ang2.sin());
                        if ((x - sx).powi(2) + (y - sy).powi(2)).sqrt() <= 0.04 {
                            v = 1.7;
                        }
                    }
                    let _ = theta;
                    if rad <= 0.06 {
                        v = 1.8;
                    }
                }
            }
            img[grid.index(r, c)] = v;
        }
    }
    img
}

/// Generative benchmark phantom: a lotus-like piecewise-constant structure
/// (rind, flesh, air channels, core) filling the spotlight region, on a
/// background drawn from the given prior — so the nuisance content outside
/// the region is statistically matched to the error-sampling prior.
pub fn spotlight_phantom(
    grid: &PixelGrid,
    region: &SpotlightRegion,
    prior: &SigmoidFieldPrior,
    seed: u64,
) -> Result<Vec<f64>> {
    if prior.dim() != grid.n_pixels() {
        return Err(Error::Dimension("prior does not match the grid".into()));
    }
    let bg = draw_sigmoid_prior(prior, 1, seed)?;
    let mut img = bg.column(0);
    let h = grid.pixel_size();
    let w = (region.row1 - region.row0).min(region.col1 - region.col0) as f64 * h / 2.0;
    let cx = (region.col0 + region.col1) as f64 * h / 2.0;
    let cy = (region.row0 + region.row1) as f64 * h / 2.0;
    for r in region.row0..region.row1 {
        for c in region.col0..region.col1 {
            let x = (c as f64 + 0.5) * h - cx;
            let y = (r as f64 + 0.5) * h - cy;
            let rad = (x * x + y * y).sqrt();
            let mut v = 0.2;
            if rad <= 0.8 * w {
                v = if rad > 0.64 * w { 1.4 } else { 1.0 };
                for s in 0..6 {
                    let ang = std::f64::consts::PI / 3.0 * s as f64;
                    let (px, py) = (0.36 * w * ang.cos(), 0.36 * w * ang.sin());
                    if ((x - px).powi(2) + (y - py).powi(2)).sqrt() <= 0.12 * w {
                        v = 0.3;
                    }
                }
                if rad <= 0.14 * w {
                    v = 1.8;
                }
            }
            img[grid.index(r, c)] = v;
        }
    }
    Ok(img)
}

/// Simulates a noisy sinogram `b = A^N x + e` with e i.i.d. Gaussian of
/// standard deviation `noise_rel × max|A^N x|`. Deterministic per seed.
pub fn simulate_sinogram(
    grid: &PixelGrid,
    geom: &FanBeamGeometry,
    image: &[f64],
    noise_rel: f64,
    seed: u64,
) -> Result<Sinogram> {
    if image.len() != grid.n_pixels() {
        return Err(Error::Dimension(format!(
            "image length {} does not match grid ({} pixels)",
            image.len(),
            grid.n_pixels()
        )));
    }
    if !(noise_rel >= 0.0) {
        return Err(Error::InvalidArgument("noise_rel must be >= 0".into()));
    }
    let a = build_fanbeam_matrix(grid, geom)?;
    let mut y = a.matvec(image);
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let std = noise_rel * peak;
    if std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut y {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += std * e;
        }
    }
    Ok(Sinogram {
        data: DenseMatrix::from_vec(geom.n_angles, geom.n_rays, y)?,
        noise_std: std,
    })
}

/// Estimates the measurement noise level from rays that miss the target
/// entirely (zero system-matrix rows): sample standard deviation of those
/// sinogram entries.
pub fn estimate_noise_from_air(sino: &Sinogram, a_fine: &SparseMatrix) -> Result<f64> {
    let b = sino.stacked();
    if b.len() != a_fine.rows() {
        return Err(Error::Dimension(
            "sinogram size does not match the system matrix".into(),
        ));
    }
    let air: Vec<f64> = (0..a_fine.rows())
        .filter(|&i| a_fine.row_entries(i).next().is_none())
        .map(|i| b[i])
        .collect();
    if air.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "only {} air rays; need at least 10",
            air.len()
        )));
    }
    let k = air.len() as f64;
    let mean = air.iter().sum::<f64>() / k;
    let var = air.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(var.sqrt())
}

/// Approximation-error sample for the coarsened tomography model:
/// `M^j = A^N x^j − A^n (W⁻¹ P x^j)` over sigmoid-prior draws `x^j`.
pub fn tomo_error_sample(
    a_fine: &SparseMatrix,
    a_coarse: &SparseMatrix,
    map: &CoarseMap,
    prior: &SigmoidFieldPrior,
    l_draws: usize,
    seed: u64,
) -> Result<ErrorSample> {
    if a_fine.cols() != map.n_fine() || prior.dim() != map.n_fine() {
        return Err(Error::Dimension(
            "fine matrix / prior do not match the coarsening map".into(),
        ));
    }
    if a_coarse.cols() != map.n() {
        return Err(Error::Dimension(
            "coarse matrix does not match the coarsening map".into(),
        ));
    }
    sample_error(
        |x| Ok(a_fine.matvec(x)),
        |z| Ok(a_coarse.matvec(z)),
        |s| {
            let draw = draw_sigmoid_prior(prior, 1, s)?;
            let x = draw.column(0);
            let z = restrict_image(map, &x)?;
            Ok((x, z))
        },
        l_draws,
        seed,
    )
}

/// Which reconstruction pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomoMethod {
    /// LSQR on the fine system.
    Fine,
    /// LSQR on the coarse system, approximation error ignored.
    Naive,
    /// CG on the SMW-whitened normal equations of the coarse system.
    Bae,
    /// LSQR on the clutter-projected coarse system.
    Spotlight,
}

/// Outcome of one reconstruction.
#[derive(Debug, Clone)]
pub struct TomoSolve {
    pub x: Vec<f64>,
    /// Final (unweighted) data discrepancy.
    pub discrepancy: f64,
    pub iters: usize,
    pub stop: StopReason,
    /// Discrepancy after every iteration.
    pub history: Vec<f64>,
}

/// Runs one reconstruction pipeline. `model` is required for `Bae` and
/// supplies the centering mean for `Spotlight` (when present); `proj` is
/// required for `Spotlight`.
pub fn tomo_reconstruct(
    method: TomoMethod,
    a: &SparseMatrix,
    b: &[f64],
    noise_norm: f64,
    tau: f64,
    max_iter: usize,
    model: Option<&ErrorModel>,
    proj: Option<&Projector>,
) -> Result<TomoSolve> {
    match method {
        TomoMethod::Fine | TomoMethod::Naive => {
            let r = crate::numkit::lsqr_morozov(a, b, noise_norm, tau, max_iter)?;
            Ok(TomoSolve {
                x: r.x,
                discrepancy: r.residual_norm,
                iters: r.iters,
                stop: r.stop,
                history: r.residual_history,
            })
        }
        TomoMethod::Bae => {
            let model = model.ok_or_else(|| {
                Error::InvalidArgument("bae reconstruction needs an error model".into())
            })?;
            // weighted metric: ‖e‖ = σ√m maps to a whitened noise norm of √m
            let r = bae_normal_solve(a, b, model, tau * noise_norm / model.sigma, max_iter)?;
            Ok(TomoSolve {
                x: r.x,
                discrepancy: r.discrepancy,
                iters: r.iters,
                stop: r.stop,
                history: r.discrepancy_history,
            })
        }
        TomoMethod::Spotlight => {
            let proj = proj.ok_or_else(|| {
                Error::InvalidArgument("spotlight reconstruction needs a projector".into())
            })?;
            let zero = vec![0.0; b.len()];
            let mu = model.map(|m| m.mu.as_slice()).unwrap_or(&zero);
            let r = spotlight_solve(proj, a, b, mu, noise_norm, tau, max_iter)?;
            Ok(TomoSolve {
                x: r.x,
                discrepancy: r.residual_norm,
                iters: r.iters,
                stop: r.stop,
                history: r.residual_history,
            })
        }
    }
}

/// Relative L2 error of `x` against `x_ref` over the spotlight region,
/// both given as fine-grid images.
pub fn region_relative_error(
    grid: &PixelGrid,
    region: &SpotlightRegion,
    x: &[f64],
    x_ref: &[f64],
) -> Result<f64> {
    let n = grid.n_pixels();
    if x.len() != n || x_ref.len() != n {
        return Err(Error::Dimension("images do not match the grid".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for r in region.row0..region.row1 {
        for c in region.col0..region.col1 {
            let j = grid.index(r, c);
            num += (x[j] - x_ref[j]).powi(2);
            den += x_ref[j].powi(2);
        }
    }
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "reference vanishes on the region".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Writes a sinogram: text header lines, a `DATA` marker, then the matrix
/// in MRD1 form. Atomic.
pub fn save_sinogram(path: &Path, sino: &Sinogram) -> Result<()> {
    let mut bytes = Vec::new();
    use std::io::Write;
    writeln!(bytes, "SINO1")?;
    writeln!(bytes, "n_angles={}", sino.data.rows())?;
    writeln!(bytes, "n_rays={}", sino.data.cols())?;
    writeln!(bytes, "noise_std={:.17e}", sino.noise_std)?;
    writeln!(bytes, "DATA")?;
    write_mrd1_to(&mut bytes, &sino.data)?;
    atomic_write(path, &bytes)
}

/// Reads a sinogram written by [`save_sinogram`].
pub fn load_sinogram(path: &Path) -> Result<Sinogram> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0usize;
    let mut noise_std = 0.0;
    let mut seen_magic = false;
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse("missing DATA marker".into()))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| Error::Parse("non-text sinogram header".into()))?
            .trim();
        pos += end + 1;
        if line == "SINO1" {
            seen_magic = true;
            continue;
        }
        if line == "DATA" {
            break;
        }
        if let Some(v) = line.strip_prefix("noise_std=") {
            noise_std = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad noise_std: {v}")))?;
        }
        // n_angles / n_rays are redundant with the payload dims
    }
    if !seen_magic {
        return Err(Error::Format("not a SINO1 file".into()));
    }
    let mut cursor = &bytes[pos..];
    let data = crate::numkit::read_mrd1_from(&mut cursor)?;
    Ok(Sinogram { data, noise_std })
}

/// Exports an image as 8-bit binary PGM (`P5`) with linear min–max scaling;
/// returns the `(min, max)` used so the scaling can be recorded. Row 0 of
/// the image is written as the top scanline.
pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[f64]) -> Result<(f64, f64)> {
    if data.len() != width * height {
        return Err(Error::Dimension("pgm data does not match dimensions".into()));
    }
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    for row in (0..height).rev() {
        for col in 0..width {
            let v = data[row * width + col];
            let g = if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0)
            } else {
                0.0
            };
            bytes.push(g as u8);
        }
    }
    atomic_write(path, &bytes)?;
    Ok((lo, hi))
}
