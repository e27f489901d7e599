//! Command-line front end: INI configuration, pipeline orchestration, and
//! artifact persistence with machine-readable run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::baecore::{error_statistics, kl_expand, smw_whitener, ErrorModel, ErrorSample};
use crate::eit::{
    cem_forward, deform_mesh, draw_random_shape, eit_error_sample, gauss_newton_eit,
    interior_elements, load_voltages, place_electrodes, save_mesh, save_voltages, unit_disk_mesh,
    CurrentFrame, ShapeParams, DEFAULT_CONTACT_IMPEDANCE, DEFAULT_COVERAGE, GN_DEFAULT_ITERS,
    KNOWN_ANNULUS_RADIUS,
};
use crate::numkit::{write_mrd1, DenseMatrix};
use crate::priors::{
    build_graph_laplacian, build_grid_laplacian, GaussianFieldPrior, SigmoidFieldPrior,
};
use crate::spotlight::{projector_from_error_sample, Projector};
use crate::tomo::{
    build_coarsening, build_fanbeam_matrix, coarse_matrix, estimate_noise_from_air, load_sinogram,
    lotus_phantom, prolong_image, region_relative_error, save_sinogram,
    simulate_sinogram, spotlight_phantom, tomo_error_sample, tomo_reconstruct, write_pgm,
    FanBeamGeometry, PixelGrid, Sinogram, SpotlightRegion, TomoMethod,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Effective run configuration; defaults overridden by an INI file, which is
/// in turn overridden by command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [tomo]
    pub n_side: usize,
    pub n_angles: usize,
    pub n_rays: usize,
    pub source_radius: f64,
    pub region_side: usize,
    pub block: usize,
    pub tomo_noise_rel: f64,
    // [eit]
    pub refinement: usize,
    pub electrodes: usize,
    pub coverage: f64,
    pub contact_impedance: f64,
    pub eit_noise_rel: f64,
    pub inclusion_x: f64,
    pub inclusion_y: f64,
    pub inclusion_radius: f64,
    pub inclusion_sigma: f64,
    // [prior] (None = pipeline-specific default)
    pub prior_lambda: Option<f64>,
    pub prior_alpha: Option<f64>,
    pub prior_gamma: Option<f64>,
    pub prior_xi0: Option<f64>,
    // [solver]
    pub tau: f64,
    pub max_iter: usize,
    pub reg_lambda: f64,
    pub delta: f64,
    pub gn_iters: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_side: 64,
            n_angles: 60,
            n_rays: 95,
            source_radius: 3.0,
            region_side: 32,
            block: 8,
            tomo_noise_rel: 0.02,
            refinement: 3,
            electrodes: 32,
            coverage: DEFAULT_COVERAGE,
            contact_impedance: DEFAULT_CONTACT_IMPEDANCE,
            eit_noise_rel: 1e-3,
            inclusion_x: 0.35,
            inclusion_y: 0.2,
            inclusion_radius: 0.25,
            inclusion_sigma: 3.0,
            prior_lambda: None,
            prior_alpha: None,
            prior_gamma: None,
            prior_xi0: None,
            tau: 1.0,
            max_iter: 200,
            reg_lambda: 5.0,
            delta: 1e-3,
            gn_iters: GN_DEFAULT_ITERS,
        }
    }
}

/// Which pipeline a prior is drawn for; selects the default hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    Tomo,
    Eit,
}

impl RunConfig {
    /// Effective prior hyperparameters `(lambda, alpha, gamma, xi0)`.
    pub fn prior_params(&self, kind: PriorKind) -> (f64, f64, f64, f64) {
        let (dl, dg) = match kind {
            PriorKind::Tomo => (16.0, 1.8),
            PriorKind::Eit => (5.0, 2.0),
        };
        (
            self.prior_lambda.unwrap_or(dl),
            self.prior_alpha.unwrap_or(3.0),
            self.prior_gamma.unwrap_or(dg),
            self.prior_xi0.unwrap_or(0.0),
        )
    }

    /// Serializes the effective configuration as INI text; parsing it back
    /// reproduces the configuration exactly.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[tomo]");
        let _ = writeln!(s, "n_side={}", self.n_side);
        let _ = writeln!(s, "n_angles={}", self.n_angles);
        let _ = writeln!(s, "n_rays={}", self.n_rays);
        let _ = writeln!(s, "source_radius={}", self.source_radius);
        let _ = writeln!(s, "region_side={}", self.region_side);
        let _ = writeln!(s, "block={}", self.block);
        let _ = writeln!(s, "noise_rel={}", self.tomo_noise_rel);
        let _ = writeln!(s, "[eit]");
        let _ = writeln!(s, "refinement={}", self.refinement);
        let _ = writeln!(s, "electrodes={}", self.electrodes);
        let _ = writeln!(s, "coverage={}", self.coverage);
        let _ = writeln!(s, "contact_impedance={}", self.contact_impedance);
        let _ = writeln!(s, "noise_rel={}", self.eit_noise_rel);
        let _ = writeln!(s, "inclusion_x={}", self.inclusion_x);
        let _ = writeln!(s, "inclusion_y={}", self.inclusion_y);
        let _ = writeln!(s, "inclusion_radius={}", self.inclusion_radius);
        let _ = writeln!(s, "inclusion_sigma={}", self.inclusion_sigma);
        let _ = writeln!(s, "[prior]");
        if let Some(v) = self.prior_lambda {
            let _ = writeln!(s, "lambda={v}");
        }
        if let Some(v) = self.prior_alpha {
            let _ = writeln!(s, "alpha={v}");
        }
        if let Some(v) = self.prior_gamma {
            let _ = writeln!(s, "gamma={v}");
        }
        if let Some(v) = self.prior_xi0 {
            let _ = writeln!(s, "xi0={v}");
        }
        let _ = writeln!(s, "[solver]");
        let _ = writeln!(s, "tau={}", self.tau);
        let _ = writeln!(s, "max_iter={}", self.max_iter);
        let _ = writeln!(s, "reg_lambda={}", self.reg_lambda);
        let _ = writeln!(s, "delta={}", self.delta);
        let _ = writeln!(s, "gn_iters={}", self.gn_iters);
        s
    }

    /// Applies `key=value` lines from INI text over the current values.
    /// Unknown sections or keys are reported as errors.
    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad_key =
                || Error::Parse(format!("config line {}: unknown key [{section}] {key}", lineno + 1));
            let parse_f = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("config line {}: bad number {v}", lineno + 1)))
            };
            let parse_u = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("config line {}: bad count {v}", lineno + 1)))
            };
            match section.as_str() {
                "tomo" => match key {
                    "n_side" => self.n_side = parse_u(value)?,
                    "n_angles" => self.n_angles = parse_u(value)?,
                    "n_rays" => self.n_rays = parse_u(value)?,
                    "source_radius" => self.source_radius = parse_f(value)?,
                    "region_side" => self.region_side = parse_u(value)?,
                    "block" => self.block = parse_u(value)?,
                    "noise_rel" => self.tomo_noise_rel = parse_f(value)?,
                    _ => return Err(bad_key()),
                },
                "eit" => match key {
                    "refinement" => self.refinement = parse_u(value)?,
                    "electrodes" => self.electrodes = parse_u(value)?,
                    "coverage" => self.coverage = parse_f(value)?,
                    "contact_impedance" => self.contact_impedance = parse_f(value)?,
                    "noise_rel" => self.eit_noise_rel = parse_f(value)?,
                    "inclusion_x" => self.inclusion_x = parse_f(value)?,
                    "inclusion_y" => self.inclusion_y = parse_f(value)?,
                    "inclusion_radius" => self.inclusion_radius = parse_f(value)?,
                    "inclusion_sigma" => self.inclusion_sigma = parse_f(value)?,
                    _ => return Err(bad_key()),
                },
                "prior" => match key {
                    "lambda" => self.prior_lambda = Some(parse_f(value)?),
                    "alpha" => self.prior_alpha = Some(parse_f(value)?),
                    "gamma" => self.prior_gamma = Some(parse_f(value)?),
                    "xi0" => self.prior_xi0 = Some(parse_f(value)?),
                    _ => return Err(bad_key()),
                },
                "solver" => match key {
                    "tau" => self.tau = parse_f(value)?,
                    "max_iter" => self.max_iter = parse_u(value)?,
                    "reg_lambda" => self.reg_lambda = parse_f(value)?,
                    "delta" => self.delta = parse_f(value)?,
                    "gn_iters" => self.gn_iters = parse_u(value)?,
                    _ => return Err(bad_key()),
                },
                _ => {
                    return Err(Error::Parse(format!(
                        "config line {}: unknown section [{section}]",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }

    /// Loads the configuration from defaults plus an optional INI file.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            cfg.apply_ini(&text)?;
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// manifest
// ---------------------------------------------------------------------------

/// Ordered `key=value` run manifest, written atomically.
#[derive(Debug, Default)]
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    /// Records a numeric series as a comma-separated value.
    pub fn push_series(&mut self, key: &str, values: &[f64]) {
        let joined = values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        self.push(key, joined);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(text, "{k}={v}");
        }
        crate::numkit::atomic_write(path, text.as_bytes())
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_os_string();
    os.push(".manifest");
    PathBuf::from(os)
}

// ---------------------------------------------------------------------------
// argument surface
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(name = "modred", version, about = "Reduced-model inversion pipelines")]
struct Cli {
    /// INI configuration file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap (falls back to MODRED_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a noisy fan-beam sinogram of a phantom
    TomoSimulate(TomoSimulateArgs),
    /// Reconstruct an image from a sinogram
    TomoReconstruct(TomoReconstructArgs),
    /// Simulate complete-electrode-model voltages on a deformed domain
    EitSimulate(EitSimulateArgs),
    /// Reconstruct a conductivity from electrode voltages
    EitReconstruct(EitReconstructArgs),
    /// Draw an approximation-error sample
    BaeSample(BaeSampleArgs),
    /// Extract an orthonormal clutter basis from an error sample
    SpotlightBasis(SpotlightBasisArgs),
    /// Run the built-in invariant suite
    Check,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PhantomKind {
    Lotus,
    Generative,
}

#[derive(Args, Debug)]
struct TomoSimulateArgs {
    /// Output sinogram file
    #[arg(long)]
    out: PathBuf,
    /// Also write the phantom image (MRD1)
    #[arg(long)]
    phantom_out: Option<PathBuf>,
    /// Also write the phantom as a PGM image
    #[arg(long)]
    pgm_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lotus")]
    phantom: PhantomKind,
    /// Seed for the generative phantom background
    #[arg(long, default_value_t = 555000)]
    phantom_seed: u64,
    /// Measurement-noise seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Relative noise level (overrides config)
    #[arg(long)]
    noise_rel: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TomoMethodArg {
    Fine,
    Naive,
    Bae,
    Spotlight,
}

#[derive(Args, Debug)]
struct TomoReconstructArgs {
    /// Input sinogram file
    #[arg(long)]
    sino: PathBuf,
    #[arg(long, value_enum)]
    method: TomoMethodArg,
    /// Approximation-error sample (MRD1, one draw per column); required for
    /// bae and spotlight
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Clutter basis size (default: sample size)
    #[arg(long)]
    k: Option<usize>,
    /// Output image (MRD1, n_side x n_side)
    #[arg(long)]
    out: PathBuf,
    /// Also write the image as PGM
    #[arg(long)]
    pgm_out: Option<PathBuf>,
    /// Reference image (MRD1) to record errors against
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Morozov safety factor (overrides config)
    #[arg(long)]
    tau: Option<f64>,
    /// Iteration cap (overrides config)
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ShapeKind {
    Standard,
    Random,
}

#[derive(Args, Debug)]
struct EitSimulateArgs {
    /// Output voltage file
    #[arg(long)]
    out: PathBuf,
    /// Also write the (reference-shape) mesh with electrodes
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Also write the generative element conductivity (MRD1)
    #[arg(long)]
    sigma_out: Option<PathBuf>,
    /// Domain shape of the generative model
    #[arg(long, value_enum, default_value = "random")]
    shape: ShapeKind,
    /// Seed of the random domain shape
    #[arg(long, default_value_t = 9001)]
    shape_seed: u64,
    /// Measurement-noise seed
    #[arg(long, default_value_t = 41)]
    seed: u64,
    /// Relative noise level (overrides config)
    #[arg(long)]
    noise_rel: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EitMethodArg {
    Plain,
    Spotlight,
}

#[derive(Args, Debug)]
struct EitReconstructArgs {
    /// Input voltage file
    #[arg(long)]
    volt: PathBuf,
    #[arg(long, value_enum)]
    method: EitMethodArg,
    /// Approximation-error sample (MRD1); required for spotlight
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Clutter basis size (default: sample size)
    #[arg(long)]
    k: Option<usize>,
    /// Output element conductivity (MRD1, n_elements x 1)
    #[arg(long)]
    out: PathBuf,
    /// Reference element conductivity (MRD1) to record errors against
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Tikhonov weight (overrides config)
    #[arg(long)]
    delta: Option<f64>,
    /// Gauss-Newton iterations (overrides config)
    #[arg(long)]
    gn_iters: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SampleKind {
    Tomo,
    Eit,
}

#[derive(Args, Debug)]
struct BaeSampleArgs {
    #[arg(long, value_enum)]
    kind: SampleKind,
    /// Number of draws (desk-scale defaults: 100 for tomo, 5 for eit)
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long, default_value_t = 123)]
    seed: u64,
    /// Output sample matrix (MRD1, one draw per column); a text header is
    /// written alongside as <out>.txt
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SpotlightBasisArgs {
    /// Input error sample (MRD1, one draw per column)
    #[arg(long)]
    sample: PathBuf,
    /// Basis size (default: sample size)
    #[arg(long)]
    k: Option<usize>,
    /// Output basis matrix (MRD1, orthonormal columns)
    #[arg(long)]
    out: PathBuf,
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

/// Parses `argv` and runs the requested pipeline. Returns the process exit
/// code: 0 on success, 1 on runtime failure, 2 on usage errors.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    init_threads(cli.threads);
    let run = || -> Result<()> {
        let cfg = RunConfig::load(cli.config.as_deref())?;
        match &cli.cmd {
            Command::TomoSimulate(a) => cmd_tomo_simulate(&cfg, a),
            Command::TomoReconstruct(a) => cmd_tomo_reconstruct(&cfg, a),
            Command::EitSimulate(a) => cmd_eit_simulate(&cfg, a),
            Command::EitReconstruct(a) => cmd_eit_reconstruct(&cfg, a),
            Command::BaeSample(a) => cmd_bae_sample(&cfg, a),
            Command::SpotlightBasis(a) => cmd_spotlight_basis(&cfg, a),
            Command::Check => cmd_check(),
        }
    };
    match run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("MODRED_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // a no-op if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

// ---------------------------------------------------------------------------
// shared pipeline pieces
// ---------------------------------------------------------------------------

fn tomo_prior(cfg: &RunConfig, grid: &PixelGrid) -> Result<SigmoidFieldPrior> {
    let (lambda, alpha, gamma, xi0) = cfg.prior_params(PriorKind::Tomo);
    let lap = build_grid_laplacian(grid.n_side(), grid.n_side())?;
    SigmoidFieldPrior::new(GaussianFieldPrior::new(lap, lambda)?, xi0, alpha, gamma)
}

fn eit_setup(
    cfg: &RunConfig,
) -> Result<(
    crate::eit::DiskMesh,
    Vec<usize>,
    crate::eit::Electrodes,
    CurrentFrame,
)> {
    let mesh0 = unit_disk_mesh(cfg.refinement)?;
    let interior = interior_elements(&mesh0, KNOWN_ANNULUS_RADIUS);
    let electrodes =
        place_electrodes(&mesh0, cfg.electrodes, cfg.coverage, cfg.contact_impedance)?;
    let frame = CurrentFrame::pairwise(cfg.electrodes)?;
    Ok((mesh0, interior, electrodes, frame))
}

fn eit_prior(cfg: &RunConfig, mesh0: &crate::eit::DiskMesh, interior: &[usize]) -> Result<SigmoidFieldPrior> {
    let (lambda, alpha, gamma, xi0) = cfg.prior_params(PriorKind::Eit);
    let lap = build_graph_laplacian(interior.len(), &crate::eit::element_adjacency(mesh0, interior))?;
    SigmoidFieldPrior::new(GaussianFieldPrior::new(lap, lambda)?, xi0, alpha, gamma)
}

fn load_sample(path: &Path) -> Result<ErrorSample> {
    ErrorSample::load(path)
}

fn vector_as_mrd1(path: &Path, v: &[f64]) -> Result<()> {
    let m = DenseMatrix::from_vec(v.len(), 1, v.to_vec())?;
    write_mrd1(path, &m)
}

fn relative_error(x: &[f64], x_ref: &[f64]) -> Result<f64> {
    if x.len() != x_ref.len() {
        return Err(Error::Dimension(format!(
            "reference length {} does not match result length {}",
            x_ref.len(),
            x.len()
        )));
    }
    let diff: Vec<f64> = x.iter().zip(x_ref).map(|(a, b)| a - b).collect();
    Ok(crate::numkit::norm(&diff) / crate::numkit::norm(x_ref))
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_tomo_simulate(cfg: &RunConfig, args: &TomoSimulateArgs) -> Result<()> {
    let grid = PixelGrid::new(cfg.n_side)?;
    let geom = FanBeamGeometry::new(cfg.n_angles, cfg.n_rays, cfg.source_radius)?;
    let region = SpotlightRegion::centered(&grid, cfg.region_side)?;
    let noise_rel = args.noise_rel.unwrap_or(cfg.tomo_noise_rel);

    let image = match args.phantom {
        PhantomKind::Lotus => lotus_phantom(&grid),
        PhantomKind::Generative => {
            let prior = tomo_prior(cfg, &grid)?;
            spotlight_phantom(&grid, &region, &prior, args.phantom_seed)?
        }
    };
    let sino = simulate_sinogram(&grid, &geom, &image, noise_rel, args.seed)?;
    save_sinogram(&args.out, &sino)?;

    let mut man = Manifest::new("tomo-simulate");
    man.push("phantom", format!("{:?}", args.phantom).to_lowercase());
    man.push("phantom_seed", args.phantom_seed);
    man.push("seed", args.seed);
    man.push("n_side", cfg.n_side);
    man.push("n_angles", cfg.n_angles);
    man.push("n_rays", cfg.n_rays);
    man.push("source_radius", cfg.source_radius);
    man.push("noise_rel", noise_rel);
    man.push("noise_std", sino.noise_std);
    if let Some(p) = &args.phantom_out {
        let m = DenseMatrix::from_vec(cfg.n_side, cfg.n_side, image.clone())?;
        write_mrd1(p, &m)?;
        man.push("phantom_out", p.display());
    }
    if let Some(p) = &args.pgm_out {
        let (lo, hi) = write_pgm(p, cfg.n_side, cfg.n_side, &image)?;
        man.push("pgm_min", lo);
        man.push("pgm_max", hi);
    }
    man.write(&manifest_path(&args.out))
}

fn cmd_tomo_reconstruct(cfg: &RunConfig, args: &TomoReconstructArgs) -> Result<()> {
    let grid = PixelGrid::new(cfg.n_side)?;
    let geom = FanBeamGeometry::new(cfg.n_angles, cfg.n_rays, cfg.source_radius)?;
    let sino: Sinogram = load_sinogram(&args.sino)?;
    if sino.data.rows() != cfg.n_angles || sino.data.cols() != cfg.n_rays {
        return Err(Error::Dimension(format!(
            "sinogram is {}x{} but the configuration says {}x{}",
            sino.data.rows(),
            sino.data.cols(),
            cfg.n_angles,
            cfg.n_rays
        )));
    }
    let a_fine = build_fanbeam_matrix(&grid, &geom)?;
    let m = geom.n_measurements();
    let sigma = if sino.noise_std > 0.0 {
        sino.noise_std
    } else {
        estimate_noise_from_air(&sino, &a_fine)?
    };
    let noise_norm = sigma * (m as f64).sqrt();
    let tau = args.tau.unwrap_or(cfg.tau);
    let max_iter = args.max_iter.unwrap_or(cfg.max_iter);
    let b = sino.stacked();

    let method = match args.method {
        TomoMethodArg::Fine => TomoMethod::Fine,
        TomoMethodArg::Naive => TomoMethod::Naive,
        TomoMethodArg::Bae => TomoMethod::Bae,
        TomoMethodArg::Spotlight => TomoMethod::Spotlight,
    };
    let mut man = Manifest::new("tomo-reconstruct");
    man.push("method", format!("{:?}", args.method).to_lowercase());
    man.push("tau", tau);
    man.push("max_iter", max_iter);
    man.push("noise_std", sigma);
    man.push("noise_norm", noise_norm);

    let (image, solve) = match method {
        TomoMethod::Fine => {
            let solve = tomo_reconstruct(method, &a_fine, b, noise_norm, tau, max_iter, None, None)?;
            (solve.x.clone(), solve)
        }
        _ => {
            let region = SpotlightRegion::centered(&grid, cfg.region_side)?;
            let map = build_coarsening(&grid, &region, cfg.block)?;
            let a_coarse = coarse_matrix(&a_fine, &map)?;
            let (model, proj): (Option<ErrorModel>, Option<Projector>) = match method {
                TomoMethod::Naive => (None, None),
                _ => {
                    let path = args.sample.as_ref().ok_or_else(|| {
                        Error::InvalidArgument(
                            "--sample is required for bae and spotlight".into(),
                        )
                    })?;
                    let sample = load_sample(path)?;
                    if sample.data_dim() != m {
                        return Err(Error::Dimension(format!(
                            "sample dimension {} does not match {m} measurements",
                            sample.data_dim()
                        )));
                    }
                    let model = error_statistics(&sample, sigma)?;
                    let proj = if method == TomoMethod::Spotlight {
                        let k = args.k.unwrap_or(sample.len());
                        let (p, diag) = projector_from_error_sample(&sample, k)?;
                        man.push("basis_rank", p.rank());
                        man.push("basis_truncated", diag.truncated);
                        Some(p)
                    } else {
                        None
                    };
                    (Some(model), proj)
                }
            };
            man.push("sample_draws", model.as_ref().map_or(0, |mo| mo.s.cols()));
            let solve = tomo_reconstruct(
                method,
                &a_coarse,
                b,
                noise_norm,
                tau,
                max_iter,
                model.as_ref(),
                proj.as_ref(),
            )?;
            (prolong_image(&map, &solve.x)?, solve)
        }
    };

    let img = DenseMatrix::from_vec(cfg.n_side, cfg.n_side, image.clone())?;
    write_mrd1(&args.out, &img)?;
    man.push("iters", solve.iters);
    man.push("stop", format!("{:?}", solve.stop).to_lowercase());
    man.push("discrepancy", solve.discrepancy);
    man.push_series("discrepancy_history", &solve.history);
    if let Some(p) = &args.pgm_out {
        let (lo, hi) = write_pgm(p, cfg.n_side, cfg.n_side, &image)?;
        man.push("pgm_min", lo);
        man.push("pgm_max", hi);
    }
    if let Some(p) = &args.reference {
        let reference = crate::numkit::read_mrd1(p)?;
        let x_ref: Vec<f64> = (0..reference.rows())
            .flat_map(|i| (0..reference.cols()).map(move |j| (i, j)))
            .map(|(i, j)| reference.get(i, j))
            .collect();
        man.push("relative_error", relative_error(&image, &x_ref)?);
        let region = SpotlightRegion::centered(&grid, cfg.region_side)?;
        man.push(
            "region_relative_error",
            region_relative_error(&grid, &region, &image, &x_ref)?,
        );
    }
    man.write(&manifest_path(&args.out))
}

fn cmd_eit_simulate(cfg: &RunConfig, args: &EitSimulateArgs) -> Result<()> {
    let (mesh0, _interior, electrodes, frame) = eit_setup(cfg)?;
    let shape = match args.shape {
        ShapeKind::Standard => ShapeParams::standard(),
        ShapeKind::Random => draw_random_shape(args.shape_seed),
    };
    let true_mesh = deform_mesh(&mesh0, &shape)?;
    let mut sigma = vec![1.0; mesh0.n_elements()];
    for e in 0..mesh0.n_elements() {
        let (x, y) = mesh0.centroid(e);
        let d = ((x - cfg.inclusion_x).powi(2) + (y - cfg.inclusion_y).powi(2)).sqrt();
        if d < cfg.inclusion_radius {
            sigma[e] = cfg.inclusion_sigma;
        }
    }
    let clean = cem_forward(&true_mesh, &sigma, &electrodes, &frame)?;
    let stacked = clean.stacked();
    let range = stacked.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - stacked.iter().cloned().fold(f64::INFINITY, f64::min);
    let noise_rel = args.noise_rel.unwrap_or(cfg.eit_noise_rel);
    let std = noise_rel * range;
    let mut v = clean.v.clone();
    if std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for k in 0..v.cols() {
            for i in 0..v.rows() {
                let e: f64 = StandardNormal.sample(&mut rng);
                v.set(i, k, v.get(i, k) + std * e);
            }
        }
    }
    save_voltages(&args.out, &v, std)?;

    let mut man = Manifest::new("eit-simulate");
    man.push("shape", format!("{:?}", args.shape).to_lowercase());
    man.push("shape_seed", args.shape_seed);
    man.push("shape_a_c", shape.a_c);
    man.push("shape_a_s", shape.a_s);
    man.push("shape_x_scale", shape.x_scale);
    man.push("seed", args.seed);
    man.push("refinement", cfg.refinement);
    man.push("electrodes", cfg.electrodes);
    man.push("noise_rel", noise_rel);
    man.push("noise_std", std);
    man.push("inclusion_x", cfg.inclusion_x);
    man.push("inclusion_y", cfg.inclusion_y);
    man.push("inclusion_radius", cfg.inclusion_radius);
    man.push("inclusion_sigma", cfg.inclusion_sigma);
    if let Some(p) = &args.mesh_out {
        let ref_mesh = deform_mesh(&mesh0, &ShapeParams::standard())?;
        save_mesh(p, &ref_mesh, Some(&electrodes))?;
        man.push("mesh_out", p.display());
    }
    if let Some(p) = &args.sigma_out {
        vector_as_mrd1(p, &sigma)?;
        man.push("sigma_out", p.display());
    }
    man.write(&manifest_path(&args.out))
}

fn cmd_eit_reconstruct(cfg: &RunConfig, args: &EitReconstructArgs) -> Result<()> {
    let (mesh0, interior, electrodes, frame) = eit_setup(cfg)?;
    let ref_mesh = deform_mesh(&mesh0, &ShapeParams::standard())?;
    let (vmat, noise_std) = load_voltages(&args.volt)?;
    let m = frame.n_measurements();
    if vmat.rows() * vmat.cols() != m {
        return Err(Error::Dimension(format!(
            "voltage file holds {} values but the frame has {m} measurements",
            vmat.rows() * vmat.cols()
        )));
    }
    let mut v_data = Vec::with_capacity(m);
    for k in 0..vmat.cols() {
        for i in 0..vmat.rows() {
            v_data.push(vmat.get(i, k));
        }
    }

    let delta = args.delta.unwrap_or(cfg.delta);
    let gn_iters = args.gn_iters.unwrap_or(cfg.gn_iters);
    let mut man = Manifest::new("eit-reconstruct");
    man.push("method", format!("{:?}", args.method).to_lowercase());
    man.push("refinement", cfg.refinement);
    man.push("electrodes", cfg.electrodes);
    man.push("reg_lambda", cfg.reg_lambda);
    man.push("delta", delta);
    man.push("gn_iters", gn_iters);
    man.push("noise_std", noise_std);

    let (proj, mu) = match args.method {
        EitMethodArg::Plain => (Projector::zero(m), vec![0.0; m]),
        EitMethodArg::Spotlight => {
            let path = args.sample.as_ref().ok_or_else(|| {
                Error::InvalidArgument("--sample is required for spotlight".into())
            })?;
            let sample = load_sample(path)?;
            if sample.data_dim() != m {
                return Err(Error::Dimension(format!(
                    "sample dimension {} does not match {m} measurements",
                    sample.data_dim()
                )));
            }
            let k = args.k.unwrap_or(sample.len());
            let (proj, _diag) = projector_from_error_sample(&sample, k)?;
            man.push("sample_draws", sample.len());
            man.push("basis_rank", proj.rank());
            let model = error_statistics(&sample, 1.0)?;
            (proj, model.mu)
        }
    };

    let (x, diag) = gauss_newton_eit(
        &v_data,
        &proj,
        &mu,
        &ref_mesh,
        &interior,
        &electrodes,
        &frame,
        cfg.reg_lambda,
        delta,
        gn_iters,
    )?;
    let mut sigma = vec![1.0; mesh0.n_elements()];
    for (i, &e) in interior.iter().enumerate() {
        sigma[e] = x[i].exp();
    }
    vector_as_mrd1(&args.out, &sigma)?;
    man.push_series("residual_history", &diag.residuals);
    if let Some(p) = &args.reference {
        let reference = crate::numkit::read_mrd1(p)?;
        if reference.cols() != 1 {
            return Err(Error::Dimension("reference must be a column vector".into()));
        }
        let x_ref: Vec<f64> = (0..reference.rows()).map(|i| reference.get(i, 0)).collect();
        let sig_int: Vec<f64> = interior.iter().map(|&e| sigma[e]).collect();
        let ref_int: Vec<f64> = interior
            .iter()
            .map(|&e| {
                x_ref
                    .get(e)
                    .copied()
                    .ok_or_else(|| Error::Dimension("reference shorter than the mesh".into()))
            })
            .collect::<Result<_>>()?;
        man.push("relative_error", relative_error(&sig_int, &ref_int)?);
    }
    man.write(&manifest_path(&args.out))
}

fn cmd_bae_sample(cfg: &RunConfig, args: &BaeSampleArgs) -> Result<()> {
    let (sample, description, draws) = match args.kind {
        SampleKind::Tomo => {
            let draws = args.draws.unwrap_or(100);
            let grid = PixelGrid::new(cfg.n_side)?;
            let geom = FanBeamGeometry::new(cfg.n_angles, cfg.n_rays, cfg.source_radius)?;
            let region = SpotlightRegion::centered(&grid, cfg.region_side)?;
            let map = build_coarsening(&grid, &region, cfg.block)?;
            let a_fine = build_fanbeam_matrix(&grid, &geom)?;
            let a_coarse = coarse_matrix(&a_fine, &map)?;
            let prior = tomo_prior(cfg, &grid)?;
            let sample = tomo_error_sample(&a_fine, &a_coarse, &map, &prior, draws, args.seed)?;
            (
                sample,
                format!(
                    "tomography coarsening error, {}x{} grid, block {}, region {}",
                    cfg.n_side, cfg.n_side, cfg.block, cfg.region_side
                ),
                draws,
            )
        }
        SampleKind::Eit => {
            let draws = args.draws.unwrap_or(5);
            let (mesh0, interior, electrodes, frame) = eit_setup(cfg)?;
            let prior = eit_prior(cfg, &mesh0, &interior)?;
            let sample = eit_error_sample(
                &mesh0,
                draws,
                args.seed,
                &prior,
                &electrodes,
                &frame,
                &ShapeParams::standard(),
                draw_random_shape,
            )?;
            (
                sample,
                format!(
                    "eit boundary-shape error, refinement {}, {} electrodes",
                    cfg.refinement, cfg.electrodes
                ),
                draws,
            )
        }
    };
    let header = {
        let mut os = args.out.as_os_str().to_os_string();
        os.push(".txt");
        PathBuf::from(os)
    };
    sample.save(&args.out, &header, &description)?;

    let mut man = Manifest::new("bae-sample");
    man.push("kind", format!("{:?}", args.kind).to_lowercase());
    man.push("draws", draws);
    man.push("seed", args.seed);
    man.push("data_dim", sample.data_dim());
    man.write(&manifest_path(&args.out))
}

fn cmd_spotlight_basis(_cfg: &RunConfig, args: &SpotlightBasisArgs) -> Result<()> {
    let sample = load_sample(&args.sample)?;
    let k = args.k.unwrap_or(sample.len());
    let (proj, diag) = projector_from_error_sample(&sample, k)?;
    write_mrd1(&args.out, proj.basis())?;

    let mut man = Manifest::new("spotlight-basis");
    man.push("sample_draws", sample.len());
    man.push("data_dim", sample.data_dim());
    man.push("k", k);
    man.push("basis_rank", proj.rank());
    man.push("basis_truncated", diag.truncated);
    man.push_series("clutter_spectrum", &diag.lambdas);
    man.write(&manifest_path(&args.out))
}

fn cmd_check() -> Result<()> {
    use rand::Rng;
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // projector algebra: P^2 = P and P + P_perp = I on a random basis
    {
        let a = DenseMatrix::from_fn(30, 4, |_, _| rng.gen::<f64>() - 0.5);
        let u = crate::numkit::orthonormal_basis(
            &a,
            crate::numkit::BasisMethod::Svd,
            crate::numkit::DEFAULT_RANK_TOL,
        )?;
        let p = crate::spotlight::projector_from_basis(u)?;
        let v: Vec<f64> = (0..30).map(|_| rng.gen::<f64>() - 0.5).collect();
        let pv = p.apply(&v);
        let ppv = p.apply(&pv);
        let idem: Vec<f64> = ppv.iter().zip(&pv).map(|(a, b)| a - b).collect();
        let total: Vec<f64> = p
            .apply(&v)
            .iter()
            .zip(p.apply_complement(&v))
            .zip(&v)
            .map(|((a, b), c)| a + b - c)
            .collect();
        check(
            "projector idempotent and complementary",
            crate::numkit::norm(&idem) <= 1e-12 * crate::numkit::norm(&v)
                && crate::numkit::norm(&total) <= 1e-12 * crate::numkit::norm(&v),
        );
    }

    // SMW whitener: (S S^T + sigma^2 I) sigma^-2 (I - K K^T) = I
    {
        let s = DenseMatrix::from_fn(20, 3, |_, _| rng.gen::<f64>() - 0.5);
        let model = ErrorModel {
            mu: vec![0.0; 20],
            s: s.clone(),
            sigma: 0.3,
        };
        let k = smw_whitener(&model)?;
        let mut worst: f64 = 0.0;
        for trial in 0..20 {
            let v: Vec<f64> = (0..20)
                .map(|i| ((trial * 20 + i) as f64 * 0.37).sin())
                .collect();
            // w = sigma^-2 (v - K K^T v)
            let ktv = k.tr_matvec(&v);
            let kk = k.matvec(&ktv);
            let w: Vec<f64> = v
                .iter()
                .zip(&kk)
                .map(|(a, b)| (a - b) / (0.3f64 * 0.3))
                .collect();
            // back through C + sigma^2 I
            let stw = s.tr_matvec(&w);
            let sw = s.matvec(&stw);
            let back: Vec<f64> = sw.iter().zip(&w).map(|(a, b)| a + 0.3f64 * 0.3 * b).collect();
            let diff: Vec<f64> = back.iter().zip(&v).map(|(a, b)| a - b).collect();
            worst = worst.max(crate::numkit::norm(&diff) / crate::numkit::norm(&v));
        }
        check("smw whitener inverts the error covariance", worst <= 1e-8);
    }

    // KL expansion reproduces the covariance trace
    {
        let draws: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..15).map(|_| rng.gen::<f64>() - 0.5).collect())
            .collect();
        let sample = ErrorSample::new(draws)?;
        let model = error_statistics(&sample, 1.0)?;
        let kl = kl_expand(&model)?;
        let trace: f64 = (0..model.s.rows())
            .map(|i| {
                (0..model.s.cols())
                    .map(|j| model.s.get(i, j).powi(2))
                    .sum::<f64>()
            })
            .sum();
        let lsum: f64 = kl.lambdas.iter().sum();
        check(
            "kl eigenvalues sum to the covariance trace",
            (lsum - trace).abs() <= 1e-10 * trace.max(1.0),
        );
    }

    // fan-beam system matrix adjoint consistency
    {
        let grid = PixelGrid::new(16)?;
        let geom = FanBeamGeometry::new(8, 11, 3.0)?;
        let a = build_fanbeam_matrix(&grid, &geom)?;
        let x: Vec<f64> = (0..a.cols()).map(|i| (i as f64 * 0.13).cos()).collect();
        let y: Vec<f64> = (0..a.rows()).map(|i| (i as f64 * 0.29).sin()).collect();
        let lhs = crate::numkit::dot(&a.matvec(&x), &y);
        let rhs = crate::numkit::dot(&x, &a.tr_matvec(&y));
        check(
            "fan-beam matrix adjoint consistency",
            (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0),
        );
    }

    // CEM gauge: per-pattern electrode voltages sum to zero
    {
        let mesh = unit_disk_mesh(1)?;
        let electrodes = place_electrodes(&mesh, 8, 0.5, 0.01)?;
        let frame = CurrentFrame::pairwise(8)?;
        let sol = cem_forward(&mesh, &vec![1.0; mesh.n_elements()], &electrodes, &frame)?;
        let worst = (0..sol.v.cols())
            .map(|k| (0..sol.v.rows()).map(|i| sol.v.get(i, k)).sum::<f64>().abs())
            .fold(0.0f64, f64::max);
        check("cem voltage gauge", worst <= 1e-10);
    }

    if failures > 0 {
        return Err(Error::InvalidArgument(format!(
            "{failures} invariant check(s) failed"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        run_command(std::iter::once("modred").chain(args.iter().copied()))
    }

    #[test]
    fn config_round_trips_through_ini() {
        let mut cfg = RunConfig::default();
        cfg.n_side = 32;
        cfg.tomo_noise_rel = 0.05;
        cfg.prior_gamma = Some(1.8);
        cfg.refinement = 2;
        cfg.delta = 1e-4;
        let mut back = RunConfig::default();
        back.apply_ini(&cfg.to_ini()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_ini("[tomo]\nbogus=1\n").is_err());
        assert!(cfg.apply_ini("[nope]\nn_side=1\n").is_err());
        assert!(cfg.apply_ini("[tomo]\nn_side\n").is_err());
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let mut cfg = RunConfig::default();
        cfg.apply_ini("# comment\n; other\n\n[tomo]\nn_side=16\n").unwrap();
        assert_eq!(cfg.n_side, 16);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["no-such-command"]), 2);
        assert_eq!(run(&["tomo-simulate"]), 2); // missing --out
        assert_eq!(run(&["--help"]), 0);
    }

    #[test]
    fn tomo_pipeline_smoke_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.ini");
        std::fs::write(
            &conf,
            "[tomo]\nn_side=32\nn_angles=20\nn_rays=31\nregion_side=16\nblock=8\n[solver]\nmax_iter=30\n",
        )
        .unwrap();
        let conf = conf.to_str().unwrap().to_string();
        let sino = dir.path().join("d.sino");
        let sino_s = sino.to_str().unwrap().to_string();
        let phantom = dir.path().join("phantom.mrd1");

        assert_eq!(
            run(&[
                "--config", &conf, "tomo-simulate", "--out", &sino_s,
                "--phantom-out", phantom.to_str().unwrap(),
            ]),
            0
        );
        // determinism: identical invocation, byte-identical artifact
        let sino2 = dir.path().join("d2.sino");
        assert_eq!(
            run(&["--config", &conf, "tomo-simulate", "--out", sino2.to_str().unwrap()]),
            0
        );
        assert_eq!(std::fs::read(&sino).unwrap(), std::fs::read(&sino2).unwrap());

        let sample = dir.path().join("errs.mrd1");
        assert_eq!(
            run(&[
                "--config", &conf, "bae-sample", "--kind", "tomo", "--draws", "8",
                "--out", sample.to_str().unwrap(),
            ]),
            0
        );

        for method in ["naive", "bae", "spotlight"] {
            let out = dir.path().join(format!("{method}.mrd1"));
            let pgm = dir.path().join(format!("{method}.pgm"));
            assert_eq!(
                run(&[
                    "--config", &conf, "tomo-reconstruct", "--sino", &sino_s,
                    "--method", method, "--sample", sample.to_str().unwrap(),
                    "--out", out.to_str().unwrap(), "--pgm-out", pgm.to_str().unwrap(),
                    "--reference", phantom.to_str().unwrap(),
                ]),
                0
            );
            let man = std::fs::read_to_string(manifest_path(&out)).unwrap();
            assert!(man.contains("discrepancy_history="), "{method}: {man}");
            assert!(man.contains("region_relative_error="), "{method}: {man}");
            assert!(man.contains("pgm_min="), "{method}: {man}");
            let img = crate::numkit::read_mrd1(&out).unwrap();
            assert_eq!((img.rows(), img.cols()), (32, 32));
        }

        // runtime failure (missing sample) exits 1
        let out = dir.path().join("x.mrd1");
        assert_eq!(
            run(&[
                "--config", &conf, "tomo-reconstruct", "--sino", &sino_s,
                "--method", "bae", "--out", out.to_str().unwrap(),
            ]),
            1
        );
    }

    #[test]
    fn eit_pipeline_smoke() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.ini");
        std::fs::write(&conf, "[eit]\nrefinement=1\nelectrodes=8\n").unwrap();
        let conf = conf.to_str().unwrap().to_string();
        let volt = dir.path().join("d.volt");
        let volt_s = volt.to_str().unwrap().to_string();
        let sigma = dir.path().join("sigma.mrd1");

        assert_eq!(
            run(&[
                "--config", &conf, "eit-simulate", "--out", &volt_s,
                "--mesh-out", dir.path().join("ref.mesh").to_str().unwrap(),
                "--sigma-out", sigma.to_str().unwrap(),
            ]),
            0
        );
        let sample = dir.path().join("errs.mrd1");
        assert_eq!(
            run(&[
                "--config", &conf, "bae-sample", "--kind", "eit", "--draws", "3",
                "--out", sample.to_str().unwrap(),
            ]),
            0
        );
        for method in ["plain", "spotlight"] {
            let out = dir.path().join(format!("{method}.mrd1"));
            assert_eq!(
                run(&[
                    "--config", &conf, "eit-reconstruct", "--volt", &volt_s,
                    "--method", method, "--sample", sample.to_str().unwrap(),
                    "--out", out.to_str().unwrap(),
                    "--reference", sigma.to_str().unwrap(),
                ]),
                0
            );
            let man = std::fs::read_to_string(manifest_path(&out)).unwrap();
            assert!(man.contains("residual_history="), "{method}: {man}");
            assert!(man.contains("relative_error="), "{method}: {man}");
        }
    }

    #[test]
    fn spotlight_basis_is_orthonormal() {
        let dir = tempfile::tempdir().unwrap();
        let draws: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..12).map(|i| ((i * 7 + j * 3) as f64 * 0.31).sin()).collect())
            .collect();
        let sample = ErrorSample::new(draws).unwrap();
        let spath = dir.path().join("s.mrd1");
        sample
            .save(&spath, &dir.path().join("s.txt"), "test sample")
            .unwrap();
        let out = dir.path().join("basis.mrd1");
        assert_eq!(
            run(&[
                "spotlight-basis", "--sample", spath.to_str().unwrap(),
                "--out", out.to_str().unwrap(),
            ]),
            0
        );
        let u = crate::numkit::read_mrd1(&out).unwrap();
        for i in 0..u.cols() {
            for j in 0..u.cols() {
                let d = crate::numkit::dot(&u.column(i), &u.column(j))
                    - if i == j { 1.0 } else { 0.0 };
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn check_command_passes() {
        assert_eq!(run(&["check"]), 0);
    }
}
