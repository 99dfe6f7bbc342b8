//! Deterministic numerical integration over intervals, balls, annuli and
//! slabs in dimensions 1-3, with error estimation by order doubling.
//!
//! Balls and annuli use a spherical decomposition: adaptive Gauss-Legendre
//! panels in radius against the weight r^{N-1}, trapezoid nodes in angle for
//! N = 2 and a product Gauss-Legendre rule in (polar, azimuth) for N = 3,
//! with the polar direction refined adaptively. Slabs require a certified
//! separable integrand and reduce to a closed-form transverse factor times
//! an adaptive one-dimensional integral.
//!
//! All panel decisions depend only on the integrand values, the region and
//! the spec, and accumulation uses fixed-order pairwise summation, so
//! identical inputs produce bit-identical results.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Controls node counts, subdivision limits and the target tolerance for
/// every integral in the crate. The tolerance is relative to the integral
/// of |f| over the region.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Gauss-Legendre node count per radial (or interval) panel.
    pub radial_order: usize,
    /// Angular node count: trapezoid nodes in 2D, azimuth nodes in 3D.
    pub angular_order: usize,
    /// Maximum bisection depth per panel.
    pub max_subdivisions: u32,
    /// Relative target tolerance.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_order: 16,
            angular_order: 64,
            max_subdivisions: 48,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_order < 2 || self.angular_order < 2 {
            return Err(Error::invalid("quadrature orders must be at least 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// An integration region. Balls and annuli are centred at the origin; the
/// slab is `R^{N-1} x (-R, R)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Interval { a: f64, b: f64 },
    Ball { radius: f64, dim: usize },
    Annulus { inner: f64, outer: f64, dim: usize },
    Slab { half_width: f64, dim: usize },
}

impl Region {
    pub fn interval(a: f64, b: f64) -> Result<Region> {
        if !(a < b) {
            return Err(Error::invalid(format!("interval requires a < b, got [{a}, {b}]")));
        }
        Ok(Region::Interval { a, b })
    }

    pub fn ball(radius: f64, dim: usize) -> Result<Region> {
        if !(radius > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        if dim == 0 {
            return Err(Error::invalid("region dimension must be positive"));
        }
        Ok(Region::Ball { radius, dim })
    }

    pub fn annulus(inner: f64, outer: f64, dim: usize) -> Result<Region> {
        if !(inner > 0.0 && inner < outer) {
            return Err(Error::invalid("annulus requires 0 < inner < outer"));
        }
        if dim == 0 {
            return Err(Error::invalid("region dimension must be positive"));
        }
        Ok(Region::Annulus { inner, outer, dim })
    }

    pub fn slab(half_width: f64, dim: usize) -> Result<Region> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("slab half-width must be positive"));
        }
        if dim == 0 {
            return Err(Error::invalid("region dimension must be positive"));
        }
        Ok(Region::Slab { half_width, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Ball { dim, .. } | Region::Annulus { dim, .. } | Region::Slab { dim, .. } => {
                *dim
            }
        }
    }
}

/// Volume of the unit ball in `R^n` for n = 1, 2, 3.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unit ball volume implemented for n <= 3"),
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

pub(crate) struct GlRule {
    /// Nodes on [-1, 1], ascending.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    fn build(n: usize) -> GlRule {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..60 {
                let (p, d) = legendre_p_dp(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    let (p, d) = legendre_p_dp(n, x);
                    dp = d;
                    x -= p / d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // The guess enumerates roots from the positive end.
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_p_dp(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        GlRule { nodes, weights }
    }
}

fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

static GL_CACHE: LazyLock<Mutex<HashMap<usize, Arc<GlRule>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

pub(crate) fn gl_rule(n: usize) -> Arc<GlRule> {
    let mut cache = GL_CACHE.lock().unwrap();
    cache.entry(n).or_insert_with(|| Arc::new(GlRule::build(n))).clone()
}

/// Pairwise summation in a fixed reduction order.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

// ---------------------------------------------------------------------------
// Adaptive panel engine
// ---------------------------------------------------------------------------

/// A rule that evaluates one panel [a, b] at a low and a high order and
/// reports (high value, sum of |contributions|, error estimate).
trait PanelRule {
    fn eval(&self, a: f64, b: f64) -> PanelEval;
}

struct PanelEval {
    value: f64,
    abs: f64,
    est: f64,
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    value: f64,
    abs: f64,
    est: f64,
    /// Subdividing stopped reducing the estimate: the panel is dominated by
    /// roundoff (e.g. an integrand that cancels to machine noise) and
    /// further splitting cannot help.
    stalled: bool,
}

/// Depth below which stall detection stays off, so coarse panels that have
/// not yet resolved a feature are not misclassified.
const STALL_MIN_DEPTH: u32 = 6;
/// Hard cap on the panel population of one integral.
const MAX_PANELS: usize = 20_000;

/// Bisects panels until every panel's order-doubling estimate is below its
/// share of the relative tolerance. The scale used for the relative test is
/// the running sum of |panel values|, re-evaluated each round, so hidden
/// mass discovered by refinement tightens earlier acceptances. Panels whose
/// estimate no longer shrinks under subdivision are accepted as
/// roundoff-limited; their estimates still flow into the reported error.
fn adapt_panels(
    rule: &dyn PanelRule,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64, Vec<Panel>)> {
    let total_len = breaks[breaks.len() - 1] - breaks[0];
    let mut panels: Vec<Panel> = Vec::new();
    for w in breaks.windows(2) {
        let e = rule.eval(w[0], w[1]);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            depth: 0,
            value: e.value,
            abs: e.abs,
            est: e.est,
            stalled: false,
        });
    }

    for _round in 0..(spec.max_subdivisions + 2) {
        let scale: f64 = panels.iter().map(|p| p.abs).sum::<f64>().max(1e-300);
        let mut next: Vec<Panel> = Vec::with_capacity(panels.len());
        let mut split_any = false;
        let room = panels.len() < MAX_PANELS;
        for p in panels {
            let share = spec.tolerance * scale * ((p.b - p.a) / total_len) * 0.5 + 1e-305;
            if !p.stalled && room && p.est > share && p.depth < spec.max_subdivisions {
                let mid = 0.5 * (p.a + p.b);
                let left = rule.eval(p.a, mid);
                let right = rule.eval(mid, p.b);
                let stalled =
                    p.depth >= STALL_MIN_DEPTH && left.est + right.est >= 0.9 * p.est;
                for (a, b, e) in [(p.a, mid, left), (mid, p.b, right)] {
                    next.push(Panel {
                        a,
                        b,
                        depth: p.depth + 1,
                        value: e.value,
                        abs: e.abs,
                        est: e.est,
                        stalled,
                    });
                }
                split_any = true;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split_any {
            break;
        }
    }

    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let total = pairwise_sum(&values);
    let scale: f64 = panels.iter().map(|p| p.abs).sum::<f64>().max(1e-300);
    let err: f64 = panels.iter().map(|p| p.est).sum::<f64>().max(1e-16 * total.abs());
    // Only panels that are neither converged nor roundoff-limited count as
    // tolerance failures.
    let active_err: f64 = panels
        .iter()
        .filter(|p| {
            !p.stalled
                && p.est
                    > spec.tolerance * scale * ((p.b - p.a) / total_len) * 0.5 + 1e-305
        })
        .map(|p| p.est)
        .sum();
    if active_err > 10.0 * spec.tolerance * scale {
        return Err(Error::ToleranceNotMet {
            requested: spec.tolerance,
            achieved: active_err / scale,
        });
    }
    Ok((total, err, panels))
}

// ---------------------------------------------------------------------------
// 1D rule
// ---------------------------------------------------------------------------

struct IntervalRule<'f> {
    f: &'f dyn Fn(f64) -> f64,
    low: Arc<GlRule>,
    high: Arc<GlRule>,
}

impl IntervalRule<'_> {
    fn apply(&self, rule: &GlRule, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let term = w * h * (self.f)(c + h * x);
            sum += term;
            abs += term.abs();
        }
        (sum, abs)
    }
}

impl PanelRule for IntervalRule<'_> {
    fn eval(&self, a: f64, b: f64) -> PanelEval {
        let (lo, _) = self.apply(&self.low, a, b);
        let (hi, abs) = self.apply(&self.high, a, b);
        PanelEval {
            value: hi,
            abs,
            est: (hi - lo).abs().max(1e-16 * hi.abs()),
        }
    }
}

/// Adaptive Gauss-Legendre on `[a, b]`, with the error estimate obtained
/// from node doubling on each panel. Returns `(value, error_estimate)`.
pub fn integrate_interval(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let (v, e, _) = interval_adapt(&f, &[a, b], spec)?;
    Ok((v, e))
}

/// As `integrate_interval`, but with interior breakpoints seeded as initial
/// panel boundaries (for integrands with known kinks).
pub fn integrate_interval_with_breaks(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let (v, e, _) = interval_adapt(&f, breaks, spec)?;
    Ok((v, e))
}

fn interval_adapt(
    f: &dyn Fn(f64) -> f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64, Vec<Panel>)> {
    spec.validate()?;
    if breaks.len() < 2 {
        return Err(Error::invalid("integration interval needs two endpoints"));
    }
    for w in breaks.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "interval breakpoints must be ascending, got {} >= {}",
                w[0], w[1]
            )));
        }
    }
    let n = spec.radial_order.max(2);
    let rule = IntervalRule {
        f,
        low: gl_rule(n),
        high: gl_rule(2 * n),
    };
    adapt_panels(&rule, breaks, spec)
}

/// Adaptive 1D integration that also returns the final node/weight list
/// (high-order nodes of every accepted panel, in position order), so
/// several integrands can share the same quadrature nodes.
pub(crate) fn interval_nodes(
    f: &dyn Fn(f64) -> f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let (value, err, panels) = interval_adapt(f, breaks, spec)?;
    let n = spec.radial_order.max(2);
    let high = gl_rule(2 * n);
    let mut nodes = Vec::with_capacity(panels.len() * 2 * n);
    for p in &panels {
        let c = 0.5 * (p.a + p.b);
        let h = 0.5 * (p.b - p.a);
        for (x, w) in high.nodes.iter().zip(&high.weights) {
            nodes.push((c + h * x, w * h));
        }
    }
    Ok((value, err, nodes))
}

// ---------------------------------------------------------------------------
// 2D polar rule
// ---------------------------------------------------------------------------

struct PolarRule2<'f> {
    f: &'f ScalarField,
    n_low: usize,
    angular_floor: usize,
}

impl PolarRule2<'_> {
    fn apply(&self, n_r: usize, m: usize, a: f64, b: f64) -> (f64, f64) {
        let radial = gl_rule(n_r);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let dtheta = 2.0 * PI / m as f64;
        let mut sum = 0.0;
        let mut abs = 0.0;
        let mut pt = [0.0f64; 2];
        for (x, w) in radial.nodes.iter().zip(&radial.weights) {
            let r = c + h * x;
            let mut ring = 0.0;
            let mut ring_abs = 0.0;
            for j in 0..m {
                let th = dtheta * j as f64;
                pt[0] = r * th.cos();
                pt[1] = r * th.sin();
                let v = self.f.value(&pt);
                ring += v;
                ring_abs += v.abs();
            }
            let jac = w * h * r * dtheta;
            sum += jac * ring;
            abs += jac.abs() * ring_abs;
        }
        (sum, abs)
    }

    /// Angular resolution grows with the outer radius of the panel so the
    /// trapezoid rule resolves features of angular width ~ 1/r.
    fn angular_nodes(&self, b: f64) -> usize {
        self.angular_floor.max(16 * (b.ceil() as usize).max(1))
    }
}

impl PanelRule for PolarRule2<'_> {
    fn eval(&self, a: f64, b: f64) -> PanelEval {
        let m = self.angular_nodes(b);
        let (lo, _) = self.apply(self.n_low, m, a, b);
        let (hi, abs) = self.apply(2 * self.n_low, 2 * m, a, b);
        PanelEval {
            value: hi,
            abs,
            est: (hi - lo).abs().max(1e-16 * hi.abs()),
        }
    }
}

// ---------------------------------------------------------------------------
// 3D spherical rule
// ---------------------------------------------------------------------------

/// Integral over the sphere of radius r (surface measure) with a composite
/// rule: Gauss-Legendre panels over u = cos(polar angle), as listed in
/// `breaks`, times a Gauss-Legendre azimuth rule.
fn sphere_composite(
    f: &ScalarField,
    r: f64,
    breaks: &[f64],
    n_u: usize,
    m_azimuth: usize,
) -> (f64, f64) {
    let urule = gl_rule(n_u);
    let arule = gl_rule(m_azimuth);
    let mut sum = 0.0;
    let mut abs = 0.0;
    let mut pt = [0.0f64; 3];
    for w in breaks.windows(2) {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        for (x, uw) in urule.nodes.iter().zip(&urule.weights) {
            let u = c + h * x;
            let rho = r * (1.0 - u * u).max(0.0).sqrt();
            pt[2] = r * u;
            let mut band = 0.0;
            let mut band_abs = 0.0;
            // Azimuth on [0, 2pi] via Gauss-Legendre.
            for (y, v) in arule.nodes.iter().zip(&arule.weights) {
                let phi = PI * (y + 1.0);
                pt[0] = rho * phi.cos();
                pt[1] = rho * phi.sin();
                let val = f.value(&pt);
                band += v * PI * val;
                band_abs += (v * PI * val).abs();
            }
            let jac = uw * h * r * r;
            sum += jac * band;
            abs += jac.abs() * band_abs;
        }
    }
    (sum, abs)
}

struct SphericalRule3<'f> {
    f: &'f ScalarField,
    n_low: usize,
    n_u: usize,
    m_azimuth: usize,
    build_tol: f64,
    max_depth: u32,
}

impl SphericalRule3<'_> {
    /// Builds the polar panel decomposition at one probe radius by adaptive
    /// bisection. The decomposition is then reused as a fixed composite
    /// rule across the radial panel: polar features (transverse
    /// concentration near the poles, interface bands) only sharpen with
    /// radius, so probing at the panel's outer edge is the conservative
    /// choice, and the order-doubling estimate still covers the reuse.
    fn u_breaks(&self, r: f64) -> Vec<f64> {
        // Panel: (a, b, depth, value, abs, est, stalled).
        let eval = |a: f64, b: f64| {
            let (lo, _) = sphere_composite(self.f, r, &[a, b], self.n_u, self.m_azimuth);
            let (hi, abs) =
                sphere_composite(self.f, r, &[a, b], 2 * self.n_u, 2 * self.m_azimuth);
            (hi, abs, (hi - lo).abs().max(1e-16 * hi.abs()))
        };
        let mut panels: Vec<(f64, f64, u32, f64, f64, f64, bool)> = Vec::new();
        let (v, abs, est) = eval(-1.0, 1.0);
        panels.push((-1.0, 1.0, 0, v, abs, est, false));
        for _round in 0..(self.max_depth + 2) {
            let scale: f64 = panels.iter().map(|p| p.4).sum::<f64>().max(1e-300);
            let mut next = Vec::with_capacity(panels.len());
            let mut split_any = false;
            let room = panels.len() < 512;
            for p in panels {
                let share = self.build_tol * scale * ((p.1 - p.0) / 2.0) * 0.5 + 1e-305;
                if !p.6 && room && p.5 > share && p.2 < self.max_depth {
                    let mid = 0.5 * (p.0 + p.1);
                    let left = eval(p.0, mid);
                    let right = eval(mid, p.1);
                    let stalled = p.2 >= STALL_MIN_DEPTH && left.2 + right.2 >= 0.9 * p.5;
                    next.push((p.0, mid, p.2 + 1, left.0, left.1, left.2, stalled));
                    next.push((mid, p.1, p.2 + 1, right.0, right.1, right.2, stalled));
                    split_any = true;
                } else {
                    next.push(p);
                }
            }
            panels = next;
            if !split_any {
                break;
            }
        }
        let mut breaks: Vec<f64> = panels.iter().map(|p| p.0).collect();
        breaks.push(1.0);
        breaks
    }

    fn apply(&self, n_r: usize, n_u: usize, m: usize, breaks: &[f64], a: f64, b: f64) -> (f64, f64) {
        let radial = gl_rule(n_r);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (x, w) in radial.nodes.iter().zip(&radial.weights) {
            let r = c + h * x;
            let (s, s_abs) = sphere_composite(self.f, r, breaks, n_u, m);
            sum += w * h * s;
            abs += (w * h).abs() * s_abs;
        }
        (sum, abs)
    }
}

impl PanelRule for SphericalRule3<'_> {
    fn eval(&self, a: f64, b: f64) -> PanelEval {
        let breaks = self.u_breaks(b);
        let (lo, _) = self.apply(self.n_low, self.n_u, self.m_azimuth, &breaks, a, b);
        let (hi, abs) = self.apply(
            2 * self.n_low,
            2 * self.n_u,
            2 * self.m_azimuth,
            &breaks,
            a,
            b,
        );
        PanelEval {
            value: hi,
            abs,
            est: (hi - lo).abs().max(1e-16 * hi.abs()),
        }
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Integrates a scalar field over a region. Ball and annulus regions are
/// supported in dimensions 1-3; slab regions require a certified separable
/// integrand. Returns `(value, error_estimate)`.
pub fn integrate(f: &ScalarField, region: &Region, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    if f.dim() != region.dim() {
        return Err(Error::DimensionMismatch {
            field: f.dim(),
            region: region.dim(),
        });
    }
    match *region {
        Region::Interval { a, b } => integrate_interval(|t| f.value(&[t]), a, b, spec),
        Region::Ball { radius, dim } => integrate_shell(f, 0.0, radius, dim, spec),
        Region::Annulus { inner, outer, dim } => integrate_shell(f, inner, outer, dim, spec),
        Region::Slab { half_width, .. } => {
            let sep = f.separable().ok_or(Error::NonSeparableIntegrand)?;
            let axial = sep.axial.clone();
            let (v, e) = integrate_interval(move |t| axial(t), -half_width, half_width, spec)?;
            Ok((sep.transverse_integral * v, sep.transverse_integral.abs() * e))
        }
    }
}

fn integrate_shell(
    f: &ScalarField,
    r0: f64,
    r1: f64,
    dim: usize,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    match dim {
        1 => {
            if r0 == 0.0 {
                integrate_interval(|t| f.value(&[t]), -r1, r1, spec)
            } else {
                let (va, ea) = integrate_interval(|t| f.value(&[t]), -r1, -r0, spec)?;
                let (vb, eb) = integrate_interval(|t| f.value(&[t]), r0, r1, spec)?;
                Ok((va + vb, ea + eb))
            }
        }
        2 => {
            let rule = PolarRule2 {
                f,
                n_low: spec.radial_order.max(2),
                angular_floor: spec.angular_order.max(4),
            };
            let (v, e, _) = adapt_panels(&rule, &[r0, r1], spec)?;
            Ok((v, e))
        }
        3 => {
            let rule = SphericalRule3 {
                f,
                n_low: spec.radial_order.max(2).min(8),
                n_u: 8,
                m_azimuth: spec.angular_order.max(4).min(16),
                build_tol: spec.tolerance,
                max_depth: spec.max_subdivisions,
            };
            let (v, e, _) = adapt_panels(&rule, &[r0, r1], spec)?;
            Ok((v, e))
        }
        d => Err(Error::UnsupportedDimension { dim: d }),
    }
}

/// The L^p norm `(int_region |f|^p)^{1/p}`.
pub fn norm_p(f: &ScalarField, region: &Region, p: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid("norm exponent must be positive"));
    }
    let inner = f.clone();
    let g = if p == 1.0 {
        ScalarField::new(f.dim(), move |x| inner.value(x).abs())
    } else {
        ScalarField::new(f.dim(), move |x| inner.value(x).abs().powf(p))
    };
    let (v, _) = integrate(&g, region, spec)?;
    Ok(v.max(0.0).powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Axial reductions (fields that depend on the last coordinate only)
// ---------------------------------------------------------------------------

/// Cross-section volume of a ball of radius `rho` in dimension `n - 1`.
fn cross_section(n: usize, rho2: f64) -> f64 {
    let rho2 = rho2.max(0.0);
    match n {
        1 => 1.0,
        2 => 2.0 * rho2.sqrt(),
        3 => PI * rho2,
        _ => panic!("cross sections implemented for n <= 3"),
    }
}

fn axial_weight(region: &Region, t: f64) -> f64 {
    match *region {
        Region::Interval { .. } => 1.0,
        Region::Ball { radius, dim } => cross_section(dim, radius * radius - t * t),
        Region::Annulus { inner, outer, dim } => {
            cross_section(dim, outer * outer - t * t) - cross_section(dim, inner * inner - t * t)
        }
        Region::Slab { .. } => panic!("axial reduction does not apply to slabs"),
    }
}

fn axial_breaks(region: &Region) -> Result<Vec<f64>> {
    match *region {
        Region::Interval { a, b } => Ok(vec![a, b]),
        Region::Ball { radius, dim } => {
            if dim > 3 {
                return Err(Error::UnsupportedDimension { dim });
            }
            Ok(vec![-radius, radius])
        }
        Region::Annulus { inner, outer, dim } => {
            if dim > 3 {
                return Err(Error::UnsupportedDimension { dim });
            }
            // The cross-section weight has kinks at |t| = inner.
            Ok(vec![-outer, -inner, inner, outer])
        }
        Region::Slab { .. } => Err(Error::invalid("axial reduction does not apply to slabs")),
    }
}

/// Integrates `q(x_N)` over a ball or annulus by reduction to a weighted
/// one-dimensional integral against the cross-section volume.
pub(crate) fn integrate_axial(
    q: impl Fn(f64) -> f64,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let breaks = axial_breaks(region)?;
    let g = |t: f64| q(t) * axial_weight(region, t);
    let (v, e, _) = interval_adapt(&g, &breaks, spec)?;
    Ok((v, e))
}

/// As `integrate_axial`, but also returns the node list `(t_i, w_i)` with
/// the cross-section weight folded into `w_i`, so several axial integrands
/// can be evaluated on the same nodes.
pub(crate) fn integrate_axial_nodes(
    q: impl Fn(f64) -> f64,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let breaks = axial_breaks(region)?;
    let g = |t: f64| q(t) * axial_weight(region, t);
    let (v, e, raw) = interval_nodes(&g, &breaks, spec)?;
    let nodes = raw
        .into_iter()
        .map(|(t, w)| (t, w * axial_weight(region, t)))
        .collect();
    Ok((v, e, nodes))
}

/// Applies a shared node list to an axial integrand with pairwise summation.
pub(crate) fn apply_axial_nodes(nodes: &[(f64, f64)], q: impl Fn(f64) -> f64) -> f64 {
    let terms: Vec<f64> = nodes.iter().map(|&(t, w)| w * q(t)).collect();
    pairwise_sum(&terms)
}
