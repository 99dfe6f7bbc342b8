//! One-dimensional machinery: the smooth odd profile g with prescribed
//! power tail, the Allen-Cahn potential, the 1D kink solution, and the
//! uniform-concavity constant extractor.
//!
//! The profile satisfies g(t) = 2 - t^{2-k} for t >= 1 exactly, and on the
//! bridge (-1, 1) its derivative is realized as
//! `g'(t) = (k - 2) (t^2 + A bump(t))^{(1-k)/2}`,
//! which is even, smooth and strictly positive, and coincides with the tail
//! derivative (k-2)|t|^{1-k} for |t| >= 1 because the bump vanishes to all
//! orders at t = +-1. The amplitude A is solved so that the bridge meets
//! the tail: int_0^1 g' = 1, i.e. g(1) = 1.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{gl_rule, integrate_interval, QuadratureSpec};

/// Smallest admissible exponent: the bound constant 8/(k(k-2)) degenerates
/// as k -> 2+, so k must stay above this floor.
pub const EXPONENT_FLOOR: f64 = 2.0 + 1e-3;

/// The standard mollifier `exp(-1/(1-t^2))` for |t| < 1, zero outside.
/// Even, smooth, and flat to all orders at t = +-1.
#[inline]
pub fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

#[inline]
fn bump_prime(t: f64) -> f64 {
    if t.abs() < 1.0 {
        let d = 1.0 - t * t;
        bump(t) * (-2.0 * t) / (d * d)
    } else {
        0.0
    }
}

#[inline]
fn modulus(t: f64, amplitude: f64) -> f64 {
    t * t + amplitude * bump(t)
}

#[inline]
fn g_prime_unchecked(t: f64, k: f64, amplitude: f64) -> f64 {
    (k - 2.0) * modulus(t, amplitude).powf(0.5 * (1.0 - k))
}

#[inline]
fn g_second_unchecked(t: f64, k: f64, amplitude: f64) -> f64 {
    let m = modulus(t, amplitude);
    let mp = 2.0 * t + amplitude * bump_prime(t);
    (k - 2.0) * 0.5 * (1.0 - k) * m.powf(-0.5 * (1.0 + k)) * mp
}

fn check_exponent(k: f64) -> Result<()> {
    if !(k >= EXPONENT_FLOOR) {
        return Err(Error::InvalidExponent {
            k,
            floor: EXPONENT_FLOOR,
        });
    }
    Ok(())
}

/// The bridge derivative `(k-2) (t^2 + A bump(t))^{(1-k)/2}`. Even and
/// strictly positive; equals `(k-2)|t|^{1-k}` for |t| >= 1.
pub fn g_prime(t: f64, k: f64, amplitude: f64) -> Result<f64> {
    check_exponent(k)?;
    if !(amplitude > 0.0) {
        return Err(Error::invalid("bridge amplitude must be positive"));
    }
    Ok(g_prime_unchecked(t, k, amplitude))
}

fn bridge_integral(k: f64, amplitude: f64, quad_tol: f64) -> Result<f64> {
    let spec = QuadratureSpec {
        max_subdivisions: 60,
        ..QuadratureSpec::default().with_tolerance(quad_tol)
    };
    let (v, _) = integrate_interval(|t| g_prime_unchecked(t, k, amplitude), 0.0, 1.0, &spec)?;
    Ok(v)
}

/// Solves for the amplitude A such that `|int_0^1 g'(t; k, A) dt - 1| <= tol`.
///
/// The map A -> int_0^1 g' is strictly decreasing, diverges as A -> 0+ and
/// vanishes as A -> infinity, so the solution exists and is unique.
/// Bisection runs on log A with the stopping test on the integral residual.
pub fn solve_bridge_amplitude(k: f64, tol: f64) -> Result<f64> {
    check_exponent(k)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("bridge tolerance must be positive"));
    }
    let quad_tol = tol / 20.0;
    let target = 0.5 * tol;

    let mut lo = 1e-6;
    let mut hi = 1e6;
    let mut f_lo = bridge_integral(k, lo, quad_tol)?;
    let mut f_hi = bridge_integral(k, hi, quad_tol)?;
    let mut expand = 0;
    while f_lo < 1.0 && expand < 3 {
        lo /= 100.0;
        f_lo = bridge_integral(k, lo, quad_tol)?;
        expand += 1;
    }
    let mut expand = 0;
    while f_hi > 1.0 && expand < 3 {
        hi *= 100.0;
        f_hi = bridge_integral(k, hi, quad_tol)?;
        expand += 1;
    }
    if f_lo < 1.0 || f_hi > 1.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }

    for _ in 0..256 {
        let mid = (lo * hi).sqrt();
        let f_mid = bridge_integral(k, mid, quad_tol)?;
        if (f_mid - 1.0).abs() <= target {
            return Ok(mid);
        }
        if f_mid > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * lo {
            break;
        }
    }
    let best = (lo * hi).sqrt();
    let residual = (bridge_integral(k, best, quad_tol)? - 1.0).abs();
    if residual <= tol {
        Ok(best)
    } else {
        Err(Error::ToleranceNotMet {
            requested: tol,
            achieved: residual,
        })
    }
}

/// Quintic Hermite interpolant of the bridge primitive on [0, 1], built from
/// per-cell Gauss-Legendre integrals of g' with exact first and second
/// derivatives at the nodes. The interpolant is rescaled so the cached
/// g(1) is exactly 1, matching the tail branch with no jump. g is evaluated
/// millions of times inside N-dimensional quadrature; per-call adaptive
/// integration would be wasteful.
struct BridgeCache {
    cells: usize,
    values: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl BridgeCache {
    fn build(k: f64, amplitude: f64, cells: usize) -> BridgeCache {
        let rule = gl_rule(16);
        let h = 1.0 / cells as f64;
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..cells {
            let a = j as f64 * h;
            let c = a + 0.5 * h;
            let hw = 0.5 * h;
            let mut cell = 0.0;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                cell += w * hw * g_prime_unchecked(c + hw * x, k, amplitude);
            }
            acc += cell;
            cumulative.push(acc);
        }
        let total = acc;
        let values: Vec<f64> = cumulative.iter().map(|v| v / total).collect();
        let d1: Vec<f64> = (0..=cells)
            .map(|j| g_prime_unchecked(j as f64 * h, k, amplitude) / total)
            .collect();
        let d2: Vec<f64> = (0..=cells)
            .map(|j| g_second_unchecked(j as f64 * h, k, amplitude) / total)
            .collect();
        BridgeCache {
            cells,
            values,
            d1,
            d2,
        }
    }

    /// Evaluates the primitive at t in [0, 1].
    fn eval(&self, t: f64) -> f64 {
        let h = 1.0 / self.cells as f64;
        let j = ((t * self.cells as f64) as usize).min(self.cells - 1);
        let s = (t - j as f64 * h) / h;
        let (f0, f1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.d1[j] * h, self.d1[j + 1] * h);
        let (c0, c1) = (self.d2[j] * h * h, self.d2[j + 1] * h * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h20 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h21 = 0.5 * (s3 - 2.0 * s4 + s5);
        f0 * h00 + f1 * h01 + d0 * h10 + d1 * h11 + c0 * h20 + c1 * h21
    }
}

/// The solved odd profile: exponent k, bridge amplitude, and cached bridge
/// primitive. All evaluators are pure after construction.
#[derive(Clone)]
pub struct Profile {
    k: f64,
    amplitude: f64,
    bridge_residual: f64,
    inverse_slope_bridge: f64,
    cache: Arc<BridgeCache>,
}

impl Profile {
    /// Solves the bridge amplitude for the given exponent and builds the
    /// evaluation cache. `tol` is the tolerance on the bridge residual
    /// `|int_0^1 g' - 1|`.
    pub fn solve(k: f64, tol: f64) -> Result<Profile> {
        let amplitude = solve_bridge_amplitude(k, tol)?;
        let cache = BridgeCache::build(k, amplitude, 2048);
        // The cache's cumulative total is the sharpest estimate of the
        // bridge integral available here.
        let rule = gl_rule(16);
        let cells = 2048usize;
        let h = 1.0 / cells as f64;
        let mut total = 0.0;
        for j in 0..cells {
            let c = j as f64 * h + 0.5 * h;
            let hw = 0.5 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                total += w * hw * g_prime_unchecked(c + hw * x, k, amplitude);
            }
        }
        let bridge_residual = (total - 1.0).abs();

        let spec = QuadratureSpec {
            max_subdivisions: 60,
            ..QuadratureSpec::default().with_tolerance(1e-12)
        };
        let (inverse_slope_bridge, _) = integrate_interval(
            |t| 1.0 / g_prime_unchecked(t, k, amplitude),
            0.0,
            1.0,
            &spec,
        )?;

        Ok(Profile {
            k,
            amplitude,
            bridge_residual,
            inverse_slope_bridge,
            cache: Arc::new(cache),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `|int_0^1 g' - 1|` for the solved amplitude.
    pub fn bridge_residual(&self) -> f64 {
        self.bridge_residual
    }

    /// `int_0^1 dt / g'(t)`.
    pub fn inverse_slope_bridge_integral(&self) -> f64 {
        self.inverse_slope_bridge
    }

    /// Leading growth constant `C1 = 8 / (k (k - 2))`.
    pub fn c1(&self) -> f64 {
        8.0 / (self.k * (self.k - 2.0))
    }

    /// Offset constant `C2 = 8 int_0^1 dt/g' - C1`, so that the slab bound
    /// `8 int_0^R dt/g'` equals `C1 R^k + C2` for R >= 1.
    pub fn c2(&self) -> f64 {
        8.0 * self.inverse_slope_bridge - self.c1()
    }

    /// The odd profile. For |t| >= 1 the exact tail formula
    /// `sign(t) (2 - |t|^{2-k})`; on the bridge the cached primitive.
    pub fn g(&self, t: f64) -> f64 {
        let a = t.abs();
        let v = if a >= 1.0 {
            2.0 - a.powf(2.0 - self.k)
        } else {
            self.cache.eval(a)
        };
        if t < 0.0 {
            -v
        } else {
            v
        }
    }

    /// The derivative `(k-2) (t^2 + A bump(t))^{(1-k)/2}`; even, positive,
    /// equal to `(k-2)|t|^{1-k}` for |t| >= 1.
    pub fn g_prime(&self, t: f64) -> f64 {
        g_prime_unchecked(t, self.k, self.amplitude)
    }

    pub fn g_second(&self, t: f64) -> f64 {
        g_second_unchecked(t, self.k, self.amplitude)
    }
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A C^2 nonnegative potential with its first two derivatives and the
/// second derivative of its square root, valid on an admissible interval
/// where G > 0.
#[derive(Clone)]
pub struct Potential {
    value: Arc<RealFn>,
    first: Arc<RealFn>,
    second: Arc<RealFn>,
    sqrt_second: Arc<RealFn>,
    admissible: (f64, f64),
}

impl Potential {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sqrt_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        admissible: (f64, f64),
    ) -> Potential {
        Potential {
            value: Arc::new(value),
            first: Arc::new(first),
            second: Arc::new(second),
            sqrt_second: Arc::new(sqrt_second),
            admissible,
        }
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    #[inline]
    pub fn first(&self, s: f64) -> f64 {
        (self.first)(s)
    }

    #[inline]
    pub fn second(&self, s: f64) -> f64 {
        (self.second)(s)
    }

    /// `(sqrt G)''(s)`; rejects evaluation outside the admissible interval,
    /// where sqrt G need not be C^2.
    pub fn sqrt_second(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.admissible;
        if !(s > lo && s < hi) {
            return Err(Error::OutsideAdmissible { value: s, lo, hi });
        }
        Ok((self.sqrt_second)(s))
    }

    #[inline]
    pub(crate) fn sqrt_second_unchecked(&self, s: f64) -> f64 {
        (self.sqrt_second)(s)
    }

    pub fn admissible(&self) -> (f64, f64) {
        self.admissible
    }

    pub fn contains(&self, s: f64) -> bool {
        s > self.admissible.0 && s < self.admissible.1
    }
}

/// The Allen-Cahn potential `G(s) = (1 - s^2)^2 / 4` with
/// `G'(s) = -s(1 - s^2)`, `G''(s) = 3s^2 - 1` and `(sqrt G)'' = -1` on the
/// admissible interval (-1, 1).
pub fn allen_cahn() -> Potential {
    Potential::new(
        |s| {
            let d = 1.0 - s * s;
            0.25 * d * d
        },
        |s| -s * (1.0 - s * s),
        |s| 3.0 * s * s - 1.0,
        |_| -1.0,
        (-1.0, 1.0),
    )
}

/// The uniform-concavity constant of a potential over an interval:
/// `K = min -(sqrt G)''(s)` over a uniform sample grid.
#[derive(Debug, Clone, Copy)]
pub struct ConcavityConstant {
    /// The extracted constant K > 0.
    pub value: f64,
    /// The sampled sub-interval of the solution's range.
    pub interval: (f64, f64),
}

/// Outcome of the concavity-hypothesis check: either a positive constant K
/// with `-(sqrt G)'' >= K` at every sample, or the offending minimum.
#[derive(Debug, Clone, Copy)]
pub enum ConcavityCheck {
    Holds(ConcavityConstant),
    Fails { min: f64, at: f64 },
}

/// Extracts K = min over a uniform grid of `-(sqrt G)''`. A nonpositive
/// minimum is a failure value, not an error: it signals the hypothesis does
/// not hold on the interval.
pub fn concavity_constant(
    g: &Potential,
    interval: (f64, f64),
    samples: usize,
) -> Result<ConcavityCheck> {
    let (a, b) = interval;
    if !(a <= b) {
        return Err(Error::invalid("interval endpoints out of order"));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let grid: Vec<f64> = if samples == 1 {
        vec![0.5 * (a + b)]
    } else {
        (0..samples)
            .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
            .collect()
    };
    let mut min = f64::INFINITY;
    let mut at = grid[0];
    for s in grid {
        let v = -g.sqrt_second(s)?;
        if v < min {
            min = v;
            at = s;
        }
    }
    if min > 0.0 {
        Ok(ConcavityCheck::Holds(ConcavityConstant {
            value: min,
            interval,
        }))
    } else {
        Ok(ConcavityCheck::Fails { min, at })
    }
}

// ---------------------------------------------------------------------------
// The 1D kink
// ---------------------------------------------------------------------------

/// The heteroclinic kink `u(x) = tanh(x / sqrt 2)`, the one-dimensional
/// entire solution of `u'' = G'(u)` for the Allen-Cahn potential.
#[inline]
pub fn kink_u(x: f64) -> f64 {
    (x / SQRT_2).tanh()
}

/// `u'(x) = (1 - u(x)^2) / sqrt 2`; satisfies the equipartition identity
/// `u'^2 / 2 = G(u)` exactly.
#[inline]
pub fn kink_du(x: f64) -> f64 {
    let u = kink_u(x);
    (1.0 - u * u) / SQRT_2
}
