use super::{dot, norm, DenseMatrix, SparseMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A linear map given by its forward and adjoint actions.
///
/// Implementations must satisfy adjoint consistency:
/// `⟨Av, w⟩ = ⟨v, Aᵀw⟩` up to roundoff, see [`adjoint_consistency`].
pub trait LinearOperator: Sync {
    /// Domain dimension n (length of the input of `apply`).
    fn domain_dim(&self) -> usize;
    /// Range dimension m (length of the output of `apply`).
    fn range_dim(&self) -> usize;
    /// v ↦ A v
    fn apply(&self, v: &[f64]) -> Vec<f64>;
    /// w ↦ Aᵀ w
    fn apply_adjoint(&self, w: &[f64]) -> Vec<f64>;
}

impl LinearOperator for DenseMatrix {
    fn domain_dim(&self) -> usize {
        self.cols()
    }
    fn range_dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matvec(v)
    }
    fn apply_adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.tr_matvec(w)
    }
}

impl LinearOperator for SparseMatrix {
    fn domain_dim(&self) -> usize {
        self.cols()
    }
    fn range_dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matvec(v)
    }
    fn apply_adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.tr_matvec(w)
    }
}

/// Matrix-free operator built from two closures.
pub struct FnOperator<F, G>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    domain: usize,
    range: usize,
    forward: F,
    adjoint: G,
}

impl<F, G> FnOperator<F, G>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(domain: usize, range: usize, forward: F, adjoint: G) -> Self {
        Self {
            domain,
            range,
            forward,
            adjoint,
        }
    }
}

impl<F, G> LinearOperator for FnOperator<F, G>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn domain_dim(&self) -> usize {
        self.domain
    }
    fn range_dim(&self) -> usize {
        self.range
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (self.forward)(v)
    }
    fn apply_adjoint(&self, w: &[f64]) -> Vec<f64> {
        (self.adjoint)(w)
    }
}

/// B ∘ A (first A, then B).
pub struct ComposedOperator<'a> {
    pub outer: &'a dyn LinearOperator,
    pub inner: &'a dyn LinearOperator,
}

impl LinearOperator for ComposedOperator<'_> {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }
    fn range_dim(&self) -> usize {
        self.outer.range_dim()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.outer.apply(&self.inner.apply(v))
    }
    fn apply_adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.inner.apply_adjoint(&self.outer.apply_adjoint(w))
    }
}

/// alpha · A
pub struct ScaledOperator<'a> {
    pub alpha: f64,
    pub op: &'a dyn LinearOperator,
}

impl LinearOperator for ScaledOperator<'_> {
    fn domain_dim(&self) -> usize {
        self.op.domain_dim()
    }
    fn range_dim(&self) -> usize {
        self.op.range_dim()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.op.apply(v);
        for x in &mut out {
            *x *= self.alpha;
        }
        out
    }
    fn apply_adjoint(&self, w: &[f64]) -> Vec<f64> {
        let mut out = self.op.apply_adjoint(w);
        for x in &mut out {
            *x *= self.alpha;
        }
        out
    }
}

/// Largest relative deviation |⟨Av,w⟩ − ⟨v,Aᵀw⟩| / (‖v‖‖w‖‖A‖_est)
/// over `probes` random probe pairs.
pub fn adjoint_consistency(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let v: Vec<f64> = (0..op.domain_dim()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let w: Vec<f64> = (0..op.range_dim()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let av = op.apply(&v);
        let atw = op.apply_adjoint(&w);
        let op_norm_est = (norm(&av) / norm(&v).max(1e-300)).max(1e-300);
        let scale = norm(&v) * norm(&w) * op_norm_est;
        let dev = (dot(&av, &w) - dot(&v, &atw)).abs() / scale.max(1e-300);
        worst = worst.max(dev);
    }
    worst
}
