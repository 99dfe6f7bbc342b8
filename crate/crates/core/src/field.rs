//! Dimension-tagged scalar and vector fields over points of N-space, the
//! concrete fields of the counterexample construction (H, phi, sigma, the
//! flux phi^2 grad sigma), lifted one-dimensional solutions, and
//! finite-difference residual operators.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::profile::Profile;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type AxisFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Certified separable decomposition of a field on `R^{N-1} x R`:
/// `f(y, t) = T(y) * a(t)` with the transverse integral of `T` known in
/// closed form. Slab integration relies on this certificate.
#[derive(Clone)]
pub struct Separable {
    /// Closed-form value of the transverse integral of `T` over `R^{N-1}`.
    pub transverse_integral: f64,
    /// The one-dimensional axial factor `a(t)`.
    pub axial: Arc<AxisFn>,
}

/// Marker for fields that depend on the last coordinate only:
/// `f(x) = value(x_N)` with `slope = d value / d x_N`.
#[derive(Clone)]
pub struct AxialProfile {
    pub value: Arc<AxisFn>,
    pub slope: Arc<AxisFn>,
}

/// A pure evaluator over points of `R^dim`, with optional analytic gradient
/// and optional structure certificates used by the quadrature module.
///
/// Evaluators are immutable after construction and safe to call from any
/// number of threads.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
    separable: Option<Separable>,
    axial: Option<AxialProfile>,
}

impl ScalarField {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            eval: Arc::new(eval),
            grad: None,
            separable: None,
            axial: None,
        }
    }

    pub fn with_gradient(
        mut self,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_separable(mut self, separable: Separable) -> Self {
        self.separable = Some(separable);
        self
    }

    pub fn with_axial(mut self, axial: AxialProfile) -> Self {
        self.axial = Some(axial);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    /// Analytic gradient, if one was attached.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => Err(Error::MissingGradient),
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn separable(&self) -> Option<&Separable> {
        self.separable.as_ref()
    }

    pub fn axial(&self) -> Option<&AxialProfile> {
        self.axial.as_ref()
    }

    /// Constant field `c` on `R^dim` (axial with zero slope).
    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, move |_| c)
            .with_gradient(move |x: &[f64]| vec![0.0; x.len()])
            .with_axial(AxialProfile {
                value: Arc::new(move |_| c),
                slope: Arc::new(|_| 0.0),
            })
    }
}

/// A vector-valued evaluator over points of `R^dim`.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    eval: Arc<GradFn>,
}

impl VectorField {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        VectorField {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }
}

/// Normalized transverse Gaussian on `R^{N-1}`:
/// `H(y) = pi^{-(N-1)/4} exp(-|y|^2/2)`, so that the integral of `H^2` over
/// `R^{N-1}` equals 1 exactly. For `N = 1` there are no transverse variables
/// and `H` is the constant 1 (a field of dimension zero).
pub fn gaussian_h(n: usize) -> ScalarField {
    assert!(n >= 1, "dimension must be positive");
    let d = n - 1;
    let norm = PI.powf(-(d as f64) / 4.0);
    ScalarField::new(d, move |y: &[f64]| {
        let q: f64 = y.iter().map(|v| v * v).sum();
        norm * (-0.5 * q).exp()
    })
}

/// The pair (phi, sigma) realizing a nonconstant solution of
/// `div(phi^2 grad sigma) = 0` with energy growth of order `R^k`:
/// `phi(x) = H(x_1..x_{N-1}) / sqrt(g'(x_N))` and `sigma(x) = g(x_N)`.
pub struct Counterexample {
    dim: usize,
    profile: Profile,
    pub phi: ScalarField,
    pub sigma: ScalarField,
}

impl Counterexample {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }
}

/// Builds phi and sigma in dimension `n` from a solved profile. The gradient
/// of sigma is attached analytically: `grad sigma = (0, ..., 0, g'(x_N))`.
pub fn counterexample(n: usize, profile: &Profile) -> Counterexample {
    assert!(n >= 1, "dimension must be positive");
    let d = n - 1;
    let norm = PI.powf(-(d as f64) / 4.0);

    let p = profile.clone();
    let phi = ScalarField::new(n, move |x: &[f64]| {
        let q: f64 = x[..d].iter().map(|v| v * v).sum();
        norm * (-0.5 * q).exp() / p.g_prime(x[d]).sqrt()
    });

    let p = profile.clone();
    let pv = profile.clone();
    let ps = profile.clone();
    let pg = profile.clone();
    let sigma = ScalarField::new(n, move |x: &[f64]| p.g(x[n - 1]))
        .with_gradient(move |x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            g[x.len() - 1] = pg.g_prime(x[x.len() - 1]);
            g
        })
        .with_axial(AxialProfile {
            value: Arc::new(move |t| pv.g(t)),
            slope: Arc::new(move |t| ps.g_prime(t)),
        });

    Counterexample {
        dim: n,
        profile: profile.clone(),
        phi,
        sigma,
    }
}

/// The flux field `phi^2 grad sigma`, formed as a pointwise product of the
/// evaluators. Requires an analytic gradient on sigma.
pub fn flux(phi: &ScalarField, sigma: &ScalarField) -> Result<VectorField> {
    if phi.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            field: phi.dim(),
            region: sigma.dim(),
        });
    }
    if !sigma.has_gradient() {
        return Err(Error::MissingGradient);
    }
    let phi = phi.clone();
    let sigma = sigma.clone();
    Ok(VectorField::new(phi.dim(), move |x: &[f64]| {
        let p2 = phi.value(x).powi(2);
        let mut g = sigma.gradient(x).expect("gradient checked at construction");
        for gi in g.iter_mut() {
            *gi *= p2;
        }
        g
    }))
}

/// Hard-mode flux: `grad sigma` is recomputed by central differences of the
/// sigma evaluator with step `inner_step`, so the divergence test cannot
/// silently exploit the analytic simplification of the product.
pub fn flux_nested(phi: &ScalarField, sigma: &ScalarField, inner_step: f64) -> VectorField {
    let phi = phi.clone();
    let sigma = sigma.clone();
    VectorField::new(phi.dim(), move |x: &[f64]| {
        let p2 = phi.value(x).powi(2);
        let mut buf = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            buf[i] = x[i] + inner_step;
            let fp = sigma.value(&buf);
            buf[i] = x[i] - inner_step;
            let fm = sigma.value(&buf);
            buf[i] = x[i];
            g[i] = p2 * (fp - fm) / (2.0 * inner_step);
        }
        g
    })
}

/// Central-difference divergence `sum_i (F_i(p + h e_i) - F_i(p - h e_i)) / 2h`.
/// For an exactly solenoidal field the returned value is pure
/// discretization and roundoff error.
pub fn divergence_residual(f: &VectorField, p: &[f64], h: f64) -> f64 {
    debug_assert!(h > 0.0);
    let mut buf = p.to_vec();
    let mut acc = 0.0;
    for i in 0..p.len() {
        buf[i] = p[i] + h;
        let fp = f.value(&buf)[i];
        buf[i] = p[i] - h;
        let fm = f.value(&buf)[i];
        buf[i] = p[i];
        acc += (fp - fm) / (2.0 * h);
    }
    acc
}

/// Central-difference gradient of a scalar evaluator.
pub fn gradient_fd(f: &ScalarField, p: &[f64], h: f64) -> Vec<f64> {
    let mut buf = p.to_vec();
    let mut g = vec![0.0; p.len()];
    for i in 0..p.len() {
        buf[i] = p[i] + h;
        let fp = f.value(&buf);
        buf[i] = p[i] - h;
        let fm = f.value(&buf);
        buf[i] = p[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Fourth-order finite-difference Laplacian (five-point stencil per axis).
pub fn laplacian_fd(f: &ScalarField, p: &[f64], h: f64) -> f64 {
    let mut buf = p.to_vec();
    let f0 = f.value(p);
    let mut acc = 0.0;
    for i in 0..p.len() {
        let mut probe = |d: f64| {
            buf[i] = p[i] + d;
            let v = f.value(&buf);
            buf[i] = p[i];
            v
        };
        let f1p = probe(h);
        let f1m = probe(-h);
        let f2p = probe(2.0 * h);
        let f2m = probe(-2.0 * h);
        acc += (-f2p + 16.0 * f1p - 30.0 * f0 + 16.0 * f1m - f2m) / (12.0 * h * h);
    }
    acc
}

/// Step size for finite differences at a point: `base * max(1, |p|_inf)`.
pub fn fd_step(p: &[f64], base: f64) -> f64 {
    let inf = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    base * inf.max(1.0)
}

/// Observed convergence order from errors at steps h and h/2.
pub fn observed_order(err_h: f64, err_half: f64) -> f64 {
    (err_h.abs() / err_half.abs()).log2()
}

/// Lifts a one-dimensional solution to `R^n`: `U(x) = u(x_N)` with
/// `grad U = (0, ..., 0, u'(x_N))`. If `u'' = G'(u)` then `U` solves
/// `Lap U = G'(U)`.
pub fn lift_1d(
    u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    du: impl Fn(f64) -> f64 + Send + Sync + 'static,
    n: usize,
) -> ScalarField {
    assert!(n >= 1, "dimension must be positive");
    let u = Arc::new(u);
    let du = Arc::new(du);
    let uv = u.clone();
    let dv = du.clone();
    let ug = u.clone();
    let dg = du.clone();
    ScalarField::new(n, move |x: &[f64]| ug(x[n - 1]))
        .with_gradient(move |x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            g[x.len() - 1] = dg(x[x.len() - 1]);
            g
        })
        .with_axial(AxialProfile {
            value: Arc::new(move |t| uv(t)),
            slope: Arc::new(move |t| dv(t)),
        })
}
