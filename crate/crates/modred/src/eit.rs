//! Electrical impedance tomography: complete-electrode-model (CEM) FEM on
//! deformable disk meshes, boundary-shape error sampling, and projected
//! Gauss–Newton reconstruction.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baecore::{sample_error, ErrorSample};
use crate::numkit::{atomic_write, read_mrd1_from, write_mrd1_to, DenseMatrix};
use crate::priors::{build_graph_laplacian, draw_sigmoid_prior, SigmoidFieldPrior};
use crate::spotlight::Projector;
use crate::{Error, Result};

/// Triangulated disk-like domain. Nodes of the outermost ring are the
/// boundary; boundary edges run counterclockwise.
#[derive(Debug, Clone)]
pub struct DiskMesh {
    nodes: Vec<(f64, f64)>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<(usize, usize)>,
}

impl DiskMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }

    pub fn signed_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangles[e];
        let (xa, ya) = self.nodes[a];
        let (xb, yb) = self.nodes[b];
        let (xc, yc) = self.nodes[c];
        0.5 * ((xb - xa) * (yc - ya) - (xc - xa) * (yb - ya))
    }

    pub fn centroid(&self, e: usize) -> (f64, f64) {
        let [a, b, c] = self.triangles[e];
        let (xa, ya) = self.nodes[a];
        let (xb, yb) = self.nodes[b];
        let (xc, yc) = self.nodes[c];
        ((xa + xb + xc) / 3.0, (ya + yb + yc) / 3.0)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.signed_area(e)).sum()
    }
}

/// Quasi-uniform ring mesh of the unit disk: `n_r = 2^(refinement+1)` rings,
/// ring i carrying 6i nodes, so node counts grow roughly 4× per level.
pub fn unit_disk_mesh(refinement: usize) -> Result<DiskMesh> {
    if refinement == 0 {
        return Err(Error::InvalidArgument("refinement must be >= 1".into()));
    }
    let n_r = 1usize << (refinement + 1);
    let mut nodes = vec![(0.0, 0.0)];
    let mut ring_start = vec![0usize]; // start index of each ring, ring 0 = center
    for i in 1..=n_r {
        ring_start.push(nodes.len());
        let r = i as f64 / n_r as f64;
        for k in 0..6 * i {
            let th = 2.0 * std::f64::consts::PI * k as f64 / (6 * i) as f64;
            nodes.push((r * th.cos(), r * th.sin()));
        }
    }

    let mut triangles = Vec::with_capacity(6 * n_r * n_r);
    for i in 1..=n_r {
        // merge inner ring (a nodes) and outer ring (b nodes) by angle
        let (a, b) = (if i == 1 { 1 } else { 6 * (i - 1) }, 6 * i);
        let inner = ring_start[i - 1];
        let outer = ring_start[i];
        let ang = |count: usize, k: usize| 2.0 * std::f64::consts::PI * k as f64 / count as f64;
        let inner_steps = if a > 1 { a } else { 0 }; // the center node never advances
        let (mut ji, mut jo) = (0usize, 0usize);
        while ji < inner_steps || jo < b {
            let next_in = if ji < inner_steps {
                ang(a, ji + 1)
            } else {
                f64::INFINITY
            };
            let next_out = if jo < b {
                ang(b, jo + 1)
            } else {
                f64::INFINITY
            };
            let tri = if next_in <= next_out {
                let t = [inner + ji, outer + jo % b, inner + (ji + 1) % a];
                ji += 1;
                t
            } else {
                let t = [inner + ji % a, outer + jo, outer + (jo + 1) % b];
                jo += 1;
                t
            };
            triangles.push(tri);
        }
    }

    let boundary_start = ring_start[n_r];
    let boundary_edges = (0..6 * n_r)
        .map(|k| (boundary_start + k, boundary_start + (k + 1) % (6 * n_r)))
        .collect();

    let mut mesh = DiskMesh {
        nodes,
        triangles,
        boundary_edges,
    };
    // enforce positive orientation
    for e in 0..mesh.n_elements() {
        if mesh.signed_area(e) < 0.0 {
            mesh.triangles[e].swap(1, 2);
        }
        if mesh.signed_area(e) <= 0.0 {
            return Err(Error::Mesh(format!("degenerate element {e}")));
        }
    }
    Ok(mesh)
}

/// Radial shape deformation `ρ(r,θ) = r(1 + a_c cos3θ + a_s sin3θ)` followed
/// by scaling of the x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    pub a_c: f64,
    pub a_s: f64,
    pub x_scale: f64,
}

impl ShapeParams {
    pub fn new(a_c: f64, a_s: f64, x_scale: f64) -> Result<Self> {
        if !(a_c.abs() + a_s.abs() < 1.0) {
            return Err(Error::InvalidArgument(
                "|a_c| + |a_s| must be < 1 to keep the boundary simple".into(),
            ));
        }
        if !(x_scale > 0.0) {
            return Err(Error::InvalidArgument("x_scale must be positive".into()));
        }
        Ok(ShapeParams { a_c, a_s, x_scale })
    }

    /// The fixed reference shape: `ρ = r(1 + 0.05 cos3θ)` with x stretched
    /// by 1.1.
    pub fn standard() -> Self {
        ShapeParams {
            a_c: 0.05,
            a_s: 0.0,
            x_scale: 1.1,
        }
    }

    pub fn identity() -> Self {
        ShapeParams {
            a_c: 0.0,
            a_s: 0.0,
            x_scale: 1.0,
        }
    }
}

/// Random boundary shape: `a_c = 0.1ξ`, `a_s = 0.1(ν − 1/2)` with
/// ξ, ν ~ Uniform([0,1]); the x-scaling of the standard shape is inherited.
pub fn draw_random_shape(seed: u64) -> ShapeParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi: f64 = rng.gen();
    let nu: f64 = rng.gen();
    ShapeParams {
        a_c: 0.1 * xi,
        a_s: 0.1 * (nu - 0.5),
        x_scale: 1.1,
    }
}

/// Applies the radial map node-wise; connectivity is unchanged. Fails if any
/// element inverts.
pub fn deform_mesh(mesh: &DiskMesh, shape: &ShapeParams) -> Result<DiskMesh> {
    let nodes = mesh
        .nodes
        .iter()
        .map(|&(x, y)| {
            let r = (x * x + y * y).sqrt();
            let th = y.atan2(x);
            let rho = r * (1.0 + shape.a_c * (3.0 * th).cos() + shape.a_s * (3.0 * th).sin());
            (shape.x_scale * rho * th.cos(), rho * th.sin())
        })
        .collect();
    let out = DiskMesh {
        nodes,
        triangles: mesh.triangles.clone(),
        boundary_edges: mesh.boundary_edges.clone(),
    };
    for e in 0..out.n_elements() {
        if out.signed_area(e) <= 0.0 {
            return Err(Error::Mesh(format!(
                "element {e} inverted under the shape map"
            )));
        }
    }
    Ok(out)
}

/// Electrode configuration: `L` equal arcs on the boundary circle plus the
/// boundary edges realizing each arc (whole edges whose midpoint angle falls
/// inside the arc).
#[derive(Debug, Clone)]
pub struct Electrodes {
    /// Angular intervals (center ± half-width) on the reference circle.
    pub arcs: Vec<(f64, f64)>,
    /// Contact impedances, one per electrode.
    pub z: Vec<f64>,
    edges: Vec<Vec<(usize, usize)>>,
}

impl Electrodes {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Boundary edges (node index pairs) belonging to electrode `l`.
    pub fn edges(&self, l: usize) -> &[(usize, usize)] {
        &self.edges[l]
    }
}

/// Default contact impedance.
pub const DEFAULT_CONTACT_IMPEDANCE: f64 = 0.01;

/// Default boundary fraction covered by the electrodes.
pub const DEFAULT_COVERAGE: f64 = 0.5;

/// Places `l` equally spaced electrodes of equal angular width
/// (`coverage` fraction of the boundary in total) on a unit-disk mesh.
/// Edge sets are assigned by midpoint angle, so the discrete electrode
/// widths resolve to whole boundary edges.
pub fn place_electrodes(
    mesh: &DiskMesh,
    l: usize,
    coverage: f64,
    z: f64,
) -> Result<Electrodes> {
    if l < 2 {
        return Err(Error::InvalidArgument("need at least two electrodes".into()));
    }
    if !(coverage > 0.0 && coverage < 1.0) || !(z > 0.0) {
        return Err(Error::InvalidArgument(
            "need 0 < coverage < 1 and z > 0".into(),
        ));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let half = coverage * two_pi / (2.0 * l as f64);
    let mut arcs = Vec::with_capacity(l);
    let mut edges = vec![Vec::new(); l];
    for k in 0..l {
        let center = two_pi * k as f64 / l as f64;
        arcs.push((center - half, center + half));
    }
    for &(a, b) in &mesh.boundary_edges {
        let (xa, ya) = mesh.nodes[a];
        let (xb, yb) = mesh.nodes[b];
        let mid = (ya + yb).atan2(xa + xb);
        for k in 0..l {
            // angular distance to the electrode center, wrapped to (−π, π]
            let center = two_pi * k as f64 / l as f64;
            let mut d = mid - center;
            while d > std::f64::consts::PI {
                d -= two_pi;
            }
            while d <= -std::f64::consts::PI {
                d += two_pi;
            }
            if d.abs() < half {
                edges[k].push((a, b));
            }
        }
    }
    if edges.iter().any(Vec::is_empty) {
        return Err(Error::Mesh(
            "mesh boundary too coarse: an electrode received no edges".into(),
        ));
    }
    Ok(Electrodes {
        arcs,
        z: vec![z; l],
        edges,
    })
}

/// A complete frame of L−1 linearly independent, Kirchhoff-satisfying
/// current patterns (columns).
#[derive(Debug, Clone)]
pub struct CurrentFrame {
    patterns: DenseMatrix,
}

impl CurrentFrame {
    pub fn new(patterns: DenseMatrix) -> Result<Self> {
        let l = patterns.rows();
        if patterns.cols() != l - 1 {
            return Err(Error::Dimension(format!(
                "a frame for {l} electrodes needs {} patterns",
                l - 1
            )));
        }
        for k in 0..patterns.cols() {
            let s: f64 = patterns.column(k).iter().sum();
            if s.abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "pattern {k} violates Kirchhoff's law (sum {s:e})"
                )));
            }
        }
        Ok(CurrentFrame { patterns })
    }

    /// Pairwise frame `I^k = e_k − e_L`, k = 1…L−1.
    pub fn pairwise(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidArgument("need at least two electrodes".into()));
        }
        let p = DenseMatrix::from_fn(l, l - 1, |i, k| {
            if i == k {
                1.0
            } else if i == l - 1 {
                -1.0
            } else {
                0.0
            }
        });
        CurrentFrame::new(p)
    }

    pub fn n_electrodes(&self) -> usize {
        self.patterns.rows()
    }

    pub fn n_patterns(&self) -> usize {
        self.patterns.cols()
    }

    pub fn patterns(&self) -> &DenseMatrix {
        &self.patterns
    }

    /// Measurement count `m = L(L−1)`.
    pub fn n_measurements(&self) -> usize {
        self.n_electrodes() * self.n_patterns()
    }
}

/// CEM forward solution for a current frame.
#[derive(Debug, Clone)]
pub struct CEMSolution {
    /// Nodal potentials, one column per pattern.
    pub u: DenseMatrix,
    /// Electrode voltages (L rows), one column per pattern; each column sums
    /// to zero (grounding).
    pub v: DenseMatrix,
}

impl CEMSolution {
    /// Voltages stacked pattern-major into one vector of length L(L−1).
    pub fn stacked(&self) -> Vec<f64> {
        let (l, p) = (self.v.rows(), self.v.cols());
        let mut out = Vec::with_capacity(l * p);
        for k in 0..p {
            for i in 0..l {
                out.push(self.v.get(i, k));
            }
        }
        out
    }
}

/// Potentials and voltages for the L "point" patterns
/// `ĩ_ℓ = e_ℓ − (1/L)1`; any Kirchhoff pattern I is the combination
/// `u(I) = Σ I_ℓ ũ_ℓ`, and per-element gradients of the point potentials
/// are kept for sensitivity computations.
struct PointSolutions {
    u: DenseMatrix,        // n_nodes × L
    v: DenseMatrix,        // L × L
    grad_x: DenseMatrix,   // n_elements × L
    grad_y: DenseMatrix,   // n_elements × L
}

/// P1 gradients of the three vertex basis functions on element `e`.
fn element_gradients(mesh: &DiskMesh, e: usize) -> ([f64; 3], [f64; 3], f64) {
    let [a, b, c] = mesh.triangles[e];
    let (xa, ya) = mesh.nodes[a];
    let (xb, yb) = mesh.nodes[b];
    let (xc, yc) = mesh.nodes[c];
    let area = mesh.signed_area(e);
    let gx = [
        (yb - yc) / (2.0 * area),
        (yc - ya) / (2.0 * area),
        (ya - yb) / (2.0 * area),
    ];
    let gy = [
        (xc - xb) / (2.0 * area),
        (xa - xc) / (2.0 * area),
        (xb - xa) / (2.0 * area),
    ];
    (gx, gy, area)
}

fn solve_points(
    mesh: &DiskMesh,
    sigma: &[f64],
    electrodes: &Electrodes,
) -> Result<PointSolutions> {
    let n = mesh.n_nodes();
    let l = electrodes.len();
    if sigma.len() != mesh.n_elements() {
        return Err(Error::Dimension(format!(
            "sigma has {} entries for {} elements",
            sigma.len(),
            mesh.n_elements()
        )));
    }
    if sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(
            "conductivity must be positive".into(),
        ));
    }

    // bilinear form: ∫σ∇u·∇v + Σ_ℓ z_ℓ⁻¹ ∫_{e_ℓ}(u − V_ℓ)(v − W_ℓ);
    // V is restricted to the sum-zero gauge via V = N β, N[:,k] = e_k − (1/L)1.
    let dim = n + l - 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for e in 0..mesh.n_elements() {
        let (gx, gy, area) = element_gradients(mesh, e);
        let tri = mesh.triangles[e];
        for i in 0..3 {
            for j in 0..3 {
                m[(tri[i], tri[j])] += sigma[e] * area * (gx[i] * gx[j] + gy[i] * gy[j]);
            }
        }
    }
    // electrode couplings, assembled against the gauge basis N
    let nmat = |j: usize, k: usize| -> f64 {
        (if j == k { 1.0 } else { 0.0 }) - 1.0 / l as f64
    };
    for ell in 0..l {
        let zi = 1.0 / electrodes.z[ell];
        for &(a, b) in electrodes.edges(ell) {
            let (xa, ya) = mesh.nodes[a];
            let (xb, yb) = mesh.nodes[b];
            let s = ((xb - xa).powi(2) + (yb - ya).powi(2)).sqrt();
            m[(a, a)] += zi * s / 3.0;
            m[(b, b)] += zi * s / 3.0;
            m[(a, b)] += zi * s / 6.0;
            m[(b, a)] += zi * s / 6.0;
            for k in 0..l - 1 {
                let c = -zi * s / 2.0 * nmat(ell, k);
                m[(a, n + k)] += c;
                m[(n + k, a)] += c;
                m[(b, n + k)] += c;
                m[(n + k, b)] += c;
            }
            for k1 in 0..l - 1 {
                for k2 in 0..l - 1 {
                    m[(n + k1, n + k2)] += zi * s * nmat(ell, k1) * nmat(ell, k2);
                }
            }
        }
    }

    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Factorization("CEM system is not positive definite".into()))?;

    // right-hand sides for the point patterns: Nᵀ ĩ_ℓ = Nᵀ e_ℓ
    let mut rhs = DMatrix::<f64>::zeros(dim, l);
    for ell in 0..l {
        for k in 0..l - 1 {
            rhs[(n + k, ell)] = nmat(ell, k);
        }
    }
    let sol = chol.solve(&rhs);

    let u = DenseMatrix::from_fn(n, l, |i, j| sol[(i, j)]);
    let v = DenseMatrix::from_fn(l, l, |i, j| {
        (0..l - 1).map(|k| nmat(i, k) * sol[(n + k, j)]).sum()
    });
    let ne = mesh.n_elements();
    let mut grad_x = DenseMatrix::zeros(ne, l);
    let mut grad_y = DenseMatrix::zeros(ne, l);
    for e in 0..ne {
        let (gx, gy, _) = element_gradients(mesh, e);
        let tri = mesh.triangles[e];
        for j in 0..l {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for i in 0..3 {
                sx += u.get(tri[i], j) * gx[i];
                sy += u.get(tri[i], j) * gy[i];
            }
            grad_x.set(e, j, sx);
            grad_y.set(e, j, sy);
        }
    }
    Ok(PointSolutions {
        u,
        v,
        grad_x,
        grad_y,
    })
}

/// Piecewise-linear FEM solution of the complete electrode model for every
/// pattern of the frame, in the zero-mean voltage gauge.
pub fn cem_forward(
    mesh: &DiskMesh,
    sigma: &[f64],
    electrodes: &Electrodes,
    frame: &CurrentFrame,
) -> Result<CEMSolution> {
    if frame.n_electrodes() != electrodes.len() {
        return Err(Error::Dimension(
            "frame and electrode counts disagree".into(),
        ));
    }
    let pts = solve_points(mesh, sigma, electrodes)?;
    let u = pts.u.matmul(frame.patterns());
    let v = pts.v.matmul(frame.patterns());
    Ok(CEMSolution { u, v })
}

/// Derivative of the stacked voltages with respect to the log-conductivity
/// `x` (σ_e = σ_e⁰ e^{x_e} evaluated at the supplied σ): entry for row
/// (pattern k, electrode ℓ) and column e is `−σ_e ∫_{T_e} ∇u^{(k)}·∇ũ^{(ℓ)}`
/// with ũ^{(ℓ)} the adjoint (point-pattern) field of the measurement.
pub fn cem_jacobian(
    mesh: &DiskMesh,
    sigma: &[f64],
    electrodes: &Electrodes,
    frame: &CurrentFrame,
) -> Result<DenseMatrix> {
    if frame.n_electrodes() != electrodes.len() {
        return Err(Error::Dimension(
            "frame and electrode counts disagree".into(),
        ));
    }
    let pts = solve_points(mesh, sigma, electrodes)?;
    let l = electrodes.len();
    let p = frame.n_patterns();
    let ne = mesh.n_elements();
    // frame-pattern gradients
    let fx = pts.grad_x.matmul(frame.patterns());
    let fy = pts.grad_y.matmul(frame.patterns());
    let mut jac = DenseMatrix::zeros(l * p, ne);
    for e in 0..ne {
        let area = mesh.signed_area(e);
        for k in 0..p {
            for ell in 0..l {
                let dot = fx.get(e, k) * pts.grad_x.get(e, ell)
                    + fy.get(e, k) * pts.grad_y.get(e, ell);
                jac.set(k * l + ell, e, -sigma[e] * area * dot);
            }
        }
    }
    Ok(jac)
}

/// Elements whose centroid lies strictly inside the disk of the given radius
/// (on the undeformed unit-disk mesh these carry the unknown conductivity).
pub fn interior_elements(mesh: &DiskMesh, radius: f64) -> Vec<usize> {
    (0..mesh.n_elements())
        .filter(|&e| {
            let (x, y) = mesh.centroid(e);
            (x * x + y * y).sqrt() < radius
        })
        .collect()
}

/// Edge-adjacency pairs between the listed elements, in local (list) indices.
pub fn element_adjacency(mesh: &DiskMesh, elements: &[usize]) -> Vec<(usize, usize)> {
    use std::collections::HashMap;
    let local: HashMap<usize, usize> = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (&e, &i) in &local {
        let tri = mesh.triangles[e];
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut out = Vec::new();
    for owners in by_edge.values() {
        if owners.len() == 2 {
            out.push((owners[0].min(owners[1]), owners[0].max(owners[1])));
        }
    }
    out.sort_unstable();
    out
}

/// Radius of the fixed-conductivity annulus: σ = 1 outside this radius on the
/// unit disk.
pub const KNOWN_ANNULUS_RADIUS: f64 = 0.9;

/// Boundary-shape approximation-error sample. Per draw j (derived seed
/// `seed + j`): draw a shape ω_j with `shape_sampler`, draw a conductivity
/// on the unit-disk mesh (σ = 1 outside radius 0.9, sigmoid prior over the
/// interior elements), and form
/// `M^j = F_{ω_j}(T_#σ^{(j)}) − F_0(σ^{(j)})` — the push-forward is the
/// identity on element values since the deformed mesh is the node-mapped
/// image of the reference mesh.
#[allow(clippy::too_many_arguments)]
pub fn eit_error_sample<S>(
    mesh0: &DiskMesh,
    l_draws: usize,
    seed: u64,
    prior: &SigmoidFieldPrior,
    electrodes: &Electrodes,
    frame: &CurrentFrame,
    ref_shape: &ShapeParams,
    shape_sampler: S,
) -> Result<ErrorSample>
where
    S: Fn(u64) -> ShapeParams + Sync,
{
    let interior = interior_elements(mesh0, KNOWN_ANNULUS_RADIUS);
    if prior.dim() != interior.len() {
        return Err(Error::Dimension(format!(
            "prior dimension {} does not match {} interior elements",
            prior.dim(),
            interior.len()
        )));
    }
    let ref_mesh = deform_mesh(mesh0, ref_shape)?;
    sample_error(
        // accurate map: random-shape domain, push-forward conductivity
        |packed: &[f64]| {
            let shape_seed = packed[0].to_bits();
            let sigma = &packed[1..];
            let mesh_w = deform_mesh(mesh0, &shape_sampler(shape_seed))?;
            Ok(cem_forward(&mesh_w, sigma, electrodes, frame)?.stacked())
        },
        // surrogate map: reference domain
        |packed: &[f64]| {
            let sigma = &packed[1..];
            Ok(cem_forward(&ref_mesh, sigma, electrodes, frame)?.stacked())
        },
        |s| {
            let draw = draw_sigmoid_prior(prior, 1, s)?;
            let mut sigma = vec![1.0; mesh0.n_elements()];
            for (i, &e) in interior.iter().enumerate() {
                sigma[e] = draw.get(i, 0);
            }
            // both maps receive the same conductivity; the shape seed rides
            // along in the first slot
            let mut packed = vec![f64::from_bits(s)];
            packed.extend_from_slice(&sigma);
            Ok((packed.clone(), packed))
        },
        l_draws,
        seed,
    )
}

/// Default Gauss–Newton iteration count.
pub const GN_DEFAULT_ITERS: usize = 3;

/// One Gauss–Newton step history entry.
#[derive(Debug, Clone)]
pub struct GnDiagnostics {
    /// ‖P⊥(V − μ) − P⊥G(x)‖ before each iteration and after the last.
    pub residuals: Vec<f64>,
}

/// Projected, Tikhonov-regularized Gauss–Newton for the reference-domain
/// model: iterates `x ← x + δx` with
/// `(AᵀA + δ LᵀL) δx = Aᵀr − δ LᵀL x`, `A = P⊥ DG(x)` (interior columns),
/// `r = P⊥(V − μ) − P⊥ G(x)`, and `L` the Whittle–Matérn penalty
/// (element-adjacency Laplacian + λ⁻² I). Returns the log-conductivity over
/// the interior elements.
#[allow(clippy::too_many_arguments)]
pub fn gauss_newton_eit(
    v_data: &[f64],
    proj: &Projector,
    mu: &[f64],
    ref_mesh: &DiskMesh,
    interior: &[usize],
    electrodes: &Electrodes,
    frame: &CurrentFrame,
    reg_lambda: f64,
    delta: f64,
    n_iter: usize,
) -> Result<(Vec<f64>, GnDiagnostics)> {
    let m = frame.n_measurements();
    if v_data.len() != m || mu.len() != m || proj.data_dim() != m {
        return Err(Error::Dimension("gauss_newton_eit data mismatch".into()));
    }
    if n_iter == 0 {
        return Err(Error::InvalidArgument("n_iter must be >= 1".into()));
    }
    let n = interior.len();
    let lap = build_graph_laplacian(n, &element_adjacency(ref_mesh, interior))?;
    let reg = lap.shifted(reg_lambda.powi(-2))?.to_dense();

    let forward = |x: &[f64]| -> Result<Vec<f64>> {
        let mut sigma = vec![1.0; ref_mesh.n_elements()];
        for (i, &e) in interior.iter().enumerate() {
            sigma[e] = x[i].exp();
        }
        Ok(cem_forward(ref_mesh, &sigma, electrodes, frame)?.stacked())
    };
    let jacobian = |x: &[f64]| -> Result<DenseMatrix> {
        let mut sigma = vec![1.0; ref_mesh.n_elements()];
        for (i, &e) in interior.iter().enumerate() {
            sigma[e] = x[i].exp();
        }
        let full = cem_jacobian(ref_mesh, &sigma, electrodes, frame)?;
        Ok(DenseMatrix::from_fn(m, n, |r, i| full.get(r, interior[i])))
    };
    gauss_newton_core(v_data, proj, mu, forward, jacobian, &reg, delta, n, n_iter)
}

/// Generic projected Gauss–Newton loop; split out so linear surrogate models
/// can exercise the update exactly.
#[allow(clippy::too_many_arguments)]
pub fn gauss_newton_core<F, J>(
    v_data: &[f64],
    proj: &Projector,
    mu: &[f64],
    forward: F,
    jacobian: J,
    reg: &DenseMatrix,
    delta: f64,
    n: usize,
    n_iter: usize,
) -> Result<(Vec<f64>, GnDiagnostics)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    J: Fn(&[f64]) -> Result<DenseMatrix>,
{
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument("delta must be >= 0".into()));
    }
    let data_proj: Vec<f64> = {
        let centered: Vec<f64> = v_data.iter().zip(mu).map(|(a, b)| a - b).collect();
        proj.apply_complement(&centered)
    };
    let mut x = vec![0.0; n];
    let mut residuals = Vec::with_capacity(n_iter + 1);
    for _ in 0..n_iter {
        let g = proj.apply_complement(&forward(&x)?);
        let r: Vec<f64> = data_proj.iter().zip(&g).map(|(a, b)| a - b).collect();
        residuals.push(crate::numkit::norm(&r));

        let jx = jacobian(&x)?;
        let a = DenseMatrix::from_columns(
            &(0..n)
                .map(|j| proj.apply_complement(&jx.column(j)))
                .collect::<Vec<_>>(),
        )?;
        // normal equations (AᵀA + δ LᵀL) δx = Aᵀr − δ LᵀL x
        let mut lhs = a.transpose().matmul(&a);
        let ltl = reg.transpose().matmul(reg);
        let mut rhs = a.tr_matvec(&r);
        let ltlx = ltl.matvec(&x);
        for i in 0..n {
            rhs[i] -= delta * ltlx[i];
            for j in 0..n {
                lhs.set(i, j, lhs.get(i, j) + delta * ltl.get(i, j));
            }
        }
        let chol = lhs
            .to_dmatrix()
            .cholesky()
            .ok_or_else(|| Error::Factorization("singular Gauss-Newton system".into()))?;
        let dx = chol.solve(&nalgebra::DVector::from_vec(rhs));
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
    }
    let g = proj.apply_complement(&forward(&x)?);
    let r: Vec<f64> = data_proj.iter().zip(&g).map(|(a, b)| a - b).collect();
    residuals.push(crate::numkit::norm(&r));
    Ok((x, GnDiagnostics { residuals }))
}

/// Writes a mesh as text with NODES / ELEMENTS / ELECTRODES sections.
pub fn save_mesh(path: &Path, mesh: &DiskMesh, electrodes: Option<&Electrodes>) -> Result<()> {
    use std::io::Write;
    let mut out = Vec::new();
    writeln!(out, "NODES {}", mesh.n_nodes())?;
    for (i, &(x, y)) in mesh.nodes.iter().enumerate() {
        writeln!(out, "{i} {x:.17e} {y:.17e}")?;
    }
    writeln!(out, "ELEMENTS {}", mesh.n_elements())?;
    for (i, t) in mesh.triangles.iter().enumerate() {
        writeln!(out, "{i} {} {} {}", t[0], t[1], t[2])?;
    }
    if let Some(el) = electrodes {
        writeln!(out, "ELECTRODES {}", el.len())?;
        for k in 0..el.len() {
            let pairs: Vec<String> = el
                .edges(k)
                .iter()
                .map(|(a, b)| format!("{a}-{b}"))
                .collect();
            writeln!(out, "{k} {}", pairs.join(" "))?;
        }
    }
    atomic_write(path, &out)
}

/// Reads a mesh written by [`save_mesh`]. Boundary edges are taken from the
/// electrode section when present, otherwise reconstructed as the edges
/// belonging to exactly one triangle.
pub fn load_mesh(path: &Path) -> Result<(DiskMesh, Option<Electrodes>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let bad = |what: &str| Error::Parse(format!("mesh file: bad {what}"));

    let header = lines.next().ok_or_else(|| bad("NODES header"))?;
    let n: usize = header
        .strip_prefix("NODES ")
        .ok_or_else(|| bad("NODES header"))?
        .trim()
        .parse()
        .map_err(|_| bad("node count"))?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let parts: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("node line"))?
            .split_whitespace()
            .collect();
        if parts.len() != 3 {
            return Err(bad("node line"));
        }
        let x: f64 = parts[1].parse().map_err(|_| bad("node x"))?;
        let y: f64 = parts[2].parse().map_err(|_| bad("node y"))?;
        nodes.push((x, y));
    }
    let header = lines.next().ok_or_else(|| bad("ELEMENTS header"))?;
    let ne: usize = header
        .strip_prefix("ELEMENTS ")
        .ok_or_else(|| bad("ELEMENTS header"))?
        .trim()
        .parse()
        .map_err(|_| bad("element count"))?;
    let mut triangles = Vec::with_capacity(ne);
    for _ in 0..ne {
        let parts: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("element line"))?
            .split_whitespace()
            .collect();
        if parts.len() != 4 {
            return Err(bad("element line"));
        }
        let mut t = [0usize; 3];
        for k in 0..3 {
            t[k] = parts[k + 1].parse().map_err(|_| bad("element node"))?;
        }
        triangles.push(t);
    }

    // boundary = edges owned by exactly one triangle
    use std::collections::HashMap;
    let mut owners: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let oriented = (t[k], t[(k + 1) % 3]);
            let key = (oriented.0.min(oriented.1), oriented.0.max(oriented.1));
            let e = owners.entry(key).or_insert((0, oriented));
            e.0 += 1;
        }
    }
    let mut boundary_edges: Vec<(usize, usize)> = owners
        .values()
        .filter(|&&(c, _)| c == 1)
        .map(|&(_, oriented)| oriented)
        .collect();
    boundary_edges.sort_unstable();
    let mesh = DiskMesh {
        nodes,
        triangles,
        boundary_edges,
    };

    let electrodes = match lines.next() {
        Some(header) if header.starts_with("ELECTRODES ") => {
            let l: usize = header[11..].trim().parse().map_err(|_| bad("electrode count"))?;
            let mut edges = Vec::with_capacity(l);
            for _ in 0..l {
                let line = lines.next().ok_or_else(|| bad("electrode line"))?;
                let mut parts = line.split_whitespace();
                parts.next(); // index
                let mut set = Vec::new();
                for pair in parts {
                    let (a, b) = pair
                        .split_once('-')
                        .ok_or_else(|| bad("electrode edge"))?;
                    set.push((
                        a.parse().map_err(|_| bad("electrode edge"))?,
                        b.parse().map_err(|_| bad("electrode edge"))?,
                    ));
                }
                edges.push(set);
            }
            Some(Electrodes {
                arcs: vec![(0.0, 0.0); l],
                z: vec![DEFAULT_CONTACT_IMPEDANCE; l],
                edges,
            })
        }
        _ => None,
    };
    Ok((mesh, electrodes))
}

/// Writes stacked voltages as an L×(L−1) matrix with a small text header.
pub fn save_voltages(path: &Path, v: &DenseMatrix, noise_std: f64) -> Result<()> {
    use std::io::Write;
    let mut out = Vec::new();
    writeln!(out, "VOLT1")?;
    writeln!(out, "l={}", v.rows())?;
    writeln!(out, "frame=pairwise")?;
    writeln!(out, "noise_std={noise_std:.17e}")?;
    writeln!(out, "DATA")?;
    write_mrd1_to(&mut out, v)?;
    atomic_write(path, &out)
}

/// Reads voltages written by [`save_voltages`].
pub fn load_voltages(path: &Path) -> Result<(DenseMatrix, f64)> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0usize;
    let mut noise_std = 0.0;
    let mut seen = false;
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse("missing DATA marker".into()))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| Error::Parse("non-text voltage header".into()))?
            .trim();
        pos += end + 1;
        match line {
            "VOLT1" => seen = true,
            "DATA" => break,
            _ => {
                if let Some(v) = line.strip_prefix("noise_std=") {
                    noise_std = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad noise_std: {v}")))?;
                }
            }
        }
    }
    if !seen {
        return Err(Error::Format("not a VOLT1 file".into()));
    }
    let mut cursor = &bytes[pos..];
    Ok((read_mrd1_from(&mut cursor)?, noise_std))
}
