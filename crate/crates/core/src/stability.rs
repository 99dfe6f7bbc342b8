//! The stability quadratic form, the square-root substitution identity and
//! its inequality form, the radial cutoff of the deficit-bound proof, and a
//! seeded corpus of compactly supported test functions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::energy_ledger;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::profile::Potential;
use crate::quad::{integrate, integrate_axial, unit_ball_volume, QuadratureSpec, Region};

/// Slack allowed on exact-zero inequalities, accounting for quadrature
/// noise.
pub const NEGATIVE_SLACK: f64 = -1e-8;

/// A compactly supported C^1 (or Lipschitz) test function: a scalar field
/// that vanishes outside the stated support radius.
#[derive(Clone)]
pub struct TestFunction {
    pub field: ScalarField,
    pub support_radius: f64,
}

impl TestFunction {
    /// The test function scaled by a constant.
    pub fn scaled(&self, c: f64) -> TestFunction {
        let f = self.field.clone();
        let g = self.field.clone();
        TestFunction {
            field: ScalarField::new(self.field.dim(), move |x| c * f.value(x)).with_gradient(
                move |x| {
                    let mut grad = g.gradient(x).expect("scaled test function needs gradient");
                    for v in grad.iter_mut() {
                        *v *= c;
                    }
                    grad
                },
            ),
            support_radius: self.support_radius,
        }
    }
}

/// The Lipschitz radial cutoff used in the deficit-bound proof:
/// 1 on the ball of radius R, `2 - |x|/R` on the annulus up to 2R, then 0.
/// Its gradient has modulus 1/R on the open annulus.
pub fn radial_cutoff(r: f64, dim: usize) -> TestFunction {
    assert!(r > 0.0 && dim >= 1);
    let value = move |x: &[f64]| {
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho <= r {
            1.0
        } else if rho <= 2.0 * r {
            2.0 - rho / r
        } else {
            0.0
        }
    };
    let grad = move |x: &[f64]| {
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho <= r || rho >= 2.0 * r {
            vec![0.0; x.len()]
        } else {
            x.iter().map(|v| -v / (r * rho)).collect()
        }
    };
    TestFunction {
        field: ScalarField::new(dim, value).with_gradient(grad),
        support_radius: 2.0 * r,
    }
}

/// A seeded family of compactly supported test functions: the radial cutoff
/// multiplied by a low-degree trigonometric factor and an off-centre
/// Gaussian bump, supports within the ball of radius 8.
pub fn corpus(count: usize, dim: usize, seed: u64) -> Vec<TestFunction> {
    assert!(dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let rc: f64 = rng.gen_range(1.0..4.0);
        let amp_t: f64 = rng.gen_range(-0.35..0.35);
        let freq: f64 = rng.gen_range(0.4..1.6);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let axis: usize = rng.gen_range(0..dim);
        let amp_b: f64 = rng.gen_range(-0.5..0.9);
        let width: f64 = rng.gen_range(0.4..1.5);
        let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.7 * rc..0.7 * rc)).collect();

        let c1 = center.clone();
        let value = move |x: &[f64]| {
            let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cut = if rho <= rc {
                1.0
            } else if rho <= 2.0 * rc {
                2.0 - rho / rc
            } else {
                return 0.0;
            };
            let trig = 1.0 + amp_t * (freq * x[axis] + phase).cos();
            let d2: f64 = x.iter().zip(&c1).map(|(v, c)| (v - c) * (v - c)).sum();
            let bump = 1.0 + amp_b * (-d2 / (2.0 * width * width)).exp();
            cut * trig * bump
        };

        let c2 = center.clone();
        let grad = move |x: &[f64]| {
            let n = x.len();
            let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rho >= 2.0 * rc {
                return vec![0.0; n];
            }
            let (cut, dcut): (f64, Vec<f64>) = if rho <= rc || rho == 0.0 {
                (1.0, vec![0.0; n])
            } else {
                (
                    2.0 - rho / rc,
                    x.iter().map(|v| -v / (rc * rho)).collect(),
                )
            };
            let trig = 1.0 + amp_t * (freq * x[axis] + phase).cos();
            let mut dtrig = vec![0.0; n];
            dtrig[axis] = -amp_t * freq * (freq * x[axis] + phase).sin();
            let d2: f64 = x.iter().zip(&c2).map(|(v, c)| (v - c) * (v - c)).sum();
            let e = (-d2 / (2.0 * width * width)).exp();
            let bump = 1.0 + amp_b * e;
            let mut g = vec![0.0; n];
            for i in 0..n {
                let dbump = amp_b * e * (-(x[i] - c2[i]) / (width * width));
                g[i] = dcut[i] * trig * bump + cut * dtrig[i] * bump + cut * trig * dbump;
            }
            g
        };

        out.push(TestFunction {
            field: ScalarField::new(dim, value).with_gradient(grad),
            support_radius: 2.0 * rc,
        });
    }
    out
}

/// Deterministic grid over the ball of the given radius, for range
/// prechecks and suprema.
fn probe_grid(dim: usize, radius: f64) -> Vec<Vec<f64>> {
    let per_axis = match dim {
        1 => 2001,
        2 => 81,
        _ => 27,
    };
    let mut points = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = idx
            .iter()
            .map(|&i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
            .collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            points.push(p);
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == dim {
                return points;
            }
        }
    }
}

fn check_range(u: &ScalarField, g: &Potential, radius: f64) -> Result<()> {
    let (lo, hi) = g.admissible();
    for p in probe_grid(u.dim(), radius) {
        let v = u.value(&p);
        if !(v > lo && v < hi) {
            return Err(Error::OutsideAdmissible { value: v, lo, hi });
        }
    }
    Ok(())
}

/// The second variation `Q(v) = int (|grad v|^2 + G''(u) v^2)` over the
/// support ball of v.
pub fn quadratic_form_q(
    u: &ScalarField,
    g: &Potential,
    v: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = u.dim();
    if v.field.dim() != n {
        return Err(Error::DimensionMismatch {
            field: v.field.dim(),
            region: n,
        });
    }
    if !v.field.has_gradient() {
        return Err(Error::MissingGradient);
    }
    let uc = u.clone();
    let gv = g.clone();
    let vf = v.field.clone();
    let integrand = ScalarField::new(n, move |x: &[f64]| {
        let grad = vf.gradient(x).expect("gradient checked above");
        let val = vf.value(x);
        grad.iter().map(|t| t * t).sum::<f64>() + gv.second(uc.value(x)) * val * val
    });
    let (q, _) = integrate(&integrand, &Region::ball(v.support_radius, n)?, spec)?;
    Ok(q)
}

/// Which right-hand side to evaluate in the identity check. The mutated
/// variant drops the deficit term and exists to prove the check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsVariant {
    Full,
    DropDeficitTerm,
}

/// Relative gap between `Q(sqrt(G(u)) mu)` and the substituted form
/// `int (G(u) |grad mu|^2 + 2 (G(u) - |grad u|^2/2) (sqrt G)''(u) sqrt(G(u)) mu^2)`.
///
/// The identity holds exactly for entire solutions of `Lap u = G'(u)` whose
/// range stays inside the admissible interval of G, so the returned gap is
/// pure quadrature noise.
pub fn lemma_identity_gap(
    u: &ScalarField,
    g: &Potential,
    mu: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<f64> {
    lemma_identity_gap_variant(u, g, mu, spec, RhsVariant::Full)
}

pub fn lemma_identity_gap_variant(
    u: &ScalarField,
    g: &Potential,
    mu: &TestFunction,
    spec: &QuadratureSpec,
    variant: RhsVariant,
) -> Result<f64> {
    let n = u.dim();
    if !u.has_gradient() || !mu.field.has_gradient() {
        return Err(Error::MissingGradient);
    }
    check_range(u, g, mu.support_radius)?;

    // Left side: Q applied to w = sqrt(G(u)) mu, with grad w assembled by
    // the product rule from analytic pieces: (sqrt G)'(u) = G'(u)/(2 sqrt G).
    let uc = u.clone();
    let gv = g.clone();
    let mf = mu.field.clone();
    let w = ScalarField::new(n, move |x: &[f64]| {
        gv.value(uc.value(x)).max(0.0).sqrt() * mf.value(x)
    })
    .with_gradient({
        let uc = u.clone();
        let gv = g.clone();
        let mf = mu.field.clone();
        move |x: &[f64]| {
            let uv = uc.value(x);
            let sq = gv.value(uv).max(0.0).sqrt();
            let dsq = gv.first(uv) / (2.0 * sq);
            let du = uc.gradient(x).expect("gradient checked above");
            let dmu = mf.gradient(x).expect("gradient checked above");
            let m = mf.value(x);
            du.iter()
                .zip(&dmu)
                .map(|(a, b)| dsq * a * m + sq * b)
                .collect()
        }
    });
    let w = TestFunction {
        field: w,
        support_radius: mu.support_radius,
    };
    let lhs = quadratic_form_q(u, g, &w, spec)?;

    // Right side: the substituted integral.
    let uc = u.clone();
    let gv = g.clone();
    let mf = mu.field.clone();
    let rhs_integrand = ScalarField::new(n, move |x: &[f64]| {
        let uv = uc.value(x);
        let gu = gv.value(uv);
        let dmu = mf.gradient(x).expect("gradient checked above");
        let first = gu * dmu.iter().map(|t| t * t).sum::<f64>();
        let second = if variant == RhsVariant::DropDeficitTerm {
            0.0
        } else {
            let du = uc.gradient(x).expect("gradient checked above");
            let deficit = gu - 0.5 * du.iter().map(|t| t * t).sum::<f64>();
            let m = mf.value(x);
            2.0 * deficit * gv.sqrt_second_unchecked(uv) * gu.max(0.0).sqrt() * m * m
        };
        first + second
    });
    let (rhs, _) = integrate(
        &rhs_integrand,
        &Region::ball(mu.support_radius, n)?,
        spec,
    )?;

    Ok((lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0))
}

/// Per-test-function slack of the stability inequality
/// `int G(u) |grad mu|^2 >= int (G(u) - |grad u|^2/2) (-2 (sqrt G)''(u)) sqrt(G(u)) mu^2`.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    pub all_hold: bool,
}

pub fn stability_equivalence_check(
    u: &ScalarField,
    g: &Potential,
    mus: &[TestFunction],
    spec: &QuadratureSpec,
) -> Result<EquivalenceReport> {
    let mut slacks = Vec::with_capacity(mus.len());
    for mu in mus {
        let (lhs, rhs) = equivalence_sides(u, g, mu, spec)?;
        slacks.push(lhs - rhs);
    }
    let min_slack = slacks.iter().fold(f64::INFINITY, |m, s| m.min(*s));
    Ok(EquivalenceReport {
        min_slack,
        all_hold: min_slack >= NEGATIVE_SLACK,
        slacks,
    })
}

/// The two sides of the stability inequality for one test function.
pub fn equivalence_sides(
    u: &ScalarField,
    g: &Potential,
    mu: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let n = u.dim();
    if !u.has_gradient() || !mu.field.has_gradient() {
        return Err(Error::MissingGradient);
    }
    check_range(u, g, mu.support_radius)?;
    let region = Region::ball(mu.support_radius, n)?;

    let uc = u.clone();
    let gv = g.clone();
    let mf = mu.field.clone();
    let lhs_field = ScalarField::new(n, move |x: &[f64]| {
        let dmu = mf.gradient(x).expect("gradient checked above");
        gv.value(uc.value(x)) * dmu.iter().map(|t| t * t).sum::<f64>()
    });
    let (lhs, _) = integrate(&lhs_field, &region, spec)?;

    let uc = u.clone();
    let gv = g.clone();
    let mf = mu.field.clone();
    let rhs_field = ScalarField::new(n, move |x: &[f64]| {
        let uv = uc.value(x);
        let gu = gv.value(uv);
        let du = uc.gradient(x).expect("gradient checked above");
        let deficit = gu - 0.5 * du.iter().map(|t| t * t).sum::<f64>();
        let m = mf.value(x);
        deficit * (-2.0 * gv.sqrt_second_unchecked(uv)) * gu.max(0.0).sqrt() * m * m
    });
    let (rhs, _) = integrate(&rhs_field, &region, spec)?;
    Ok((lhs, rhs))
}

/// Both sides of the proof's cutoff estimate at radius R, plus the chained
/// lower bound.
#[derive(Debug, Clone, Copy)]
pub struct CutoffBound {
    /// `int_{annulus(R, 2R)} G(u) / R^2`.
    pub lhs: f64,
    /// `M (2^N - 1) |B_1| R^{N-2}` with `M = sup G(u)`.
    pub rhs: f64,
    /// `2 K int_{B_R} (G(u) - |grad u|^2/2) sqrt(G(u))`.
    pub chained_lower: f64,
    /// The supremum of G(u) used for the right side.
    pub sup_g: f64,
}

/// Replays the cutoff estimate: the gradient of the radial cutoff has
/// modulus 1/R on the annulus, so the inequality contract is `lhs <= rhs`,
/// and for stable solutions the chained lower bound sits below `lhs`.
pub fn cutoff_bound_replay(
    u: &ScalarField,
    g: &Potential,
    radius: f64,
    concavity: f64,
    sup_g: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<CutoffBound> {
    let n = u.dim();
    if n > 3 {
        return Err(Error::UnsupportedDimension { dim: n });
    }
    if !(concavity > 0.0) {
        return Err(Error::invalid("concavity constant must be positive"));
    }
    let m = match sup_g {
        Some(m) => m,
        None => match u.axial() {
            Some(ax) => {
                let mut m = 0.0f64;
                for i in 0..=4000 {
                    let t = -2.0 * radius + 4.0 * radius * i as f64 / 4000.0;
                    m = m.max(g.value((ax.value)(t)));
                }
                m
            }
            None => {
                let mut m = 0.0f64;
                for p in probe_grid(n, 2.0 * radius) {
                    m = m.max(g.value(u.value(&p)));
                }
                m
            }
        },
    };

    let annulus = Region::annulus(radius, 2.0 * radius, n)?;
    let lhs = match u.axial() {
        Some(ax) => {
            let value = ax.value.clone();
            let gv = g.clone();
            let r2 = radius * radius;
            let (v, _) = integrate_axial(move |t| gv.value(value(t)) / r2, &annulus, spec)?;
            v
        }
        None => {
            let uc = u.clone();
            let gv = g.clone();
            let r2 = radius * radius;
            let f = ScalarField::new(n, move |x: &[f64]| gv.value(uc.value(x)) / r2);
            let (v, _) = integrate(&f, &annulus, spec)?;
            v
        }
    };
    let rhs = m * (2.0f64.powi(n as i32) - 1.0) * unit_ball_volume(n) * radius.powf(n as f64 - 2.0);
    let ledger = energy_ledger(u, g, radius, spec)?;
    Ok(CutoffBound {
        lhs,
        rhs,
        chained_lower: 2.0 * concavity * ledger.weighted_deficit,
        sup_g: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lift_1d;
    use crate::profile::{allen_cahn, kink_du, kink_u};
    use approx::assert_abs_diff_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn kink(n: usize) -> ScalarField {
        lift_1d(kink_u, kink_du, n)
    }

    #[test]
    fn cutoff_branch_values() {
        let r = 4.0;
        let mu = radial_cutoff(r, 2);
        assert_eq!(mu.field.value(&[0.0, 0.0]), 1.0);
        assert_abs_diff_eq!(mu.field.value(&[1.5 * r, 0.0]), 0.5, epsilon = 1e-15);
        assert_eq!(mu.field.value(&[2.0 * r, 0.0]), 0.0);
        assert_eq!(mu.field.value(&[3.0 * r, 0.0]), 0.0);
        assert_eq!(mu.support_radius, 2.0 * r);
    }

    #[test]
    fn cutoff_is_continuous_at_breakpoints() {
        let r = 3.0;
        let mu = radial_cutoff(r, 2);
        for rho in [r, 2.0 * r] {
            let eps = 1e-6;
            let inner = mu.field.value(&[rho - eps, 0.0]);
            let outer = mu.field.value(&[rho + eps, 0.0]);
            assert!((inner - outer).abs() <= 2.0 * eps, "jump at rho = {rho}");
        }
    }

    #[test]
    fn cutoff_gradient_has_modulus_one_over_r() {
        let r = 5.0;
        let mu = radial_cutoff(r, 2);
        let p = [1.3 * r, 0.4 * r];
        let g = mu.field.gradient(&p).unwrap();
        let modulus = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_abs_diff_eq!(modulus, 1.0 / r, epsilon = 1e-12);
        // Finite differences agree away from the breakpoints.
        let fd = crate::field::gradient_fd(&mu.field, &p, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn q_of_zero_function_is_zero() {
        let g = allen_cahn();
        let zero = TestFunction {
            field: ScalarField::new(2, |_| 0.0).with_gradient(|x: &[f64]| vec![0.0; x.len()]),
            support_radius: 3.0,
        };
        let q = quadratic_form_q(&kink(2), &g, &zero, &spec()).unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn q_scales_quadratically() {
        let g = allen_cahn();
        let u = kink(2);
        let mu = &corpus(3, 2, 11)[2];
        let q1 = quadratic_form_q(&u, &g, mu, &spec()).unwrap();
        for c in [2.0, 10.0] {
            let qc = quadratic_form_q(&u, &g, &mu.scaled(c), &spec()).unwrap();
            assert!(
                (qc - c * c * q1).abs() <= 1e-12 * qc.abs().max(1.0),
                "c = {c}: {qc} vs {}",
                c * c * q1
            );
        }
    }

    #[test]
    fn kink_is_stable_on_a_small_corpus() {
        let g = allen_cahn();
        for n in [1usize, 2] {
            let u = kink(n);
            for (i, mu) in corpus(10, n, 4242).iter().enumerate() {
                let q = quadratic_form_q(&u, &g, mu, &spec()).unwrap();
                assert!(q >= NEGATIVE_SLACK, "n = {n}, mu {i}: Q = {q}");
            }
        }
    }

    #[test]
    fn unstable_constant_has_negative_q_for_a_wide_bump() {
        // u == 0 gives G''(0) = -1: a wide bump makes the mass term win.
        let g = allen_cahn();
        for n in [1usize, 2] {
            let u = ScalarField::constant(n, 0.0);
            let wide = radial_cutoff(10.0, n);
            let q = quadratic_form_q(&u, &g, &wide, &spec()).unwrap();
            assert!(q < 0.0, "n = {n}: Q = {q}");
        }
    }

    #[test]
    fn identity_gap_is_quadrature_noise_for_the_kink() {
        let g = allen_cahn();
        for n in [1usize, 2] {
            let u = kink(n);
            for (i, mu) in corpus(5, n, 7).iter().enumerate() {
                let gap = lemma_identity_gap(&u, &g, mu, &spec()).unwrap();
                assert!(gap <= 1e-6, "n = {n}, mu {i}: gap {gap:e}");
            }
        }
    }

    #[test]
    fn identity_gap_of_zero_test_function_is_zero() {
        let g = allen_cahn();
        let zero = TestFunction {
            field: ScalarField::new(1, |_| 0.0).with_gradient(|x: &[f64]| vec![0.0; x.len()]),
            support_radius: 2.0,
        };
        let gap = lemma_identity_gap(&kink(1), &g, &zero, &spec()).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn dropped_deficit_term_is_detected_on_the_constant_solution() {
        // u == 0 solves the equation with G(0) = 1/4 and zero gradient, so
        // the deficit term is genuinely nonzero and dropping it breaks the
        // identity by a visible margin.
        let g = allen_cahn();
        let u = ScalarField::constant(1, 0.0);
        let mu = &corpus(3, 1, 99)[0];
        let full = lemma_identity_gap_variant(&u, &g, mu, &spec(), RhsVariant::Full).unwrap();
        let broken =
            lemma_identity_gap_variant(&u, &g, mu, &spec(), RhsVariant::DropDeficitTerm).unwrap();
        assert!(full <= 1e-8, "full identity gap {full:e}");
        assert!(broken >= 1e-2, "mutation went unnoticed: {broken:e}");
    }

    #[test]
    fn dropped_deficit_term_is_invisible_on_the_kink() {
        // The kink satisfies the pointwise equipartition identity, so its
        // deficit term vanishes identically and the mutation cannot show up
        // there; the detection path above uses the constant solution.
        let g = allen_cahn();
        let u = kink(1);
        let mu = &corpus(3, 1, 99)[0];
        let broken =
            lemma_identity_gap_variant(&u, &g, mu, &spec(), RhsVariant::DropDeficitTerm).unwrap();
        assert!(broken <= 1e-6, "unexpected kink sensitivity: {broken:e}");
    }

    #[test]
    fn stability_inequality_holds_on_the_corpus() {
        let g = allen_cahn();
        let u = kink(2);
        let mus = corpus(8, 2, 31);
        let report = stability_equivalence_check(&u, &g, &mus, &spec()).unwrap();
        assert!(report.all_hold, "min slack {}", report.min_slack);
        // For the kink both sides of the concavity form vanish: with K = 1
        // the right side equals 2K times the weighted deficit, which is 0.
        let (_, rhs) = equivalence_sides(&u, &g, &mus[0], &spec()).unwrap();
        assert!(rhs.abs() <= 1e-9, "rhs {rhs:e}");
    }

    #[test]
    fn cutoff_bound_is_saturated_by_constants() {
        let g = allen_cahn();
        let u = ScalarField::constant(2, 0.0);
        let b = cutoff_bound_replay(&u, &g, 6.0, 1.0, None, &spec()).unwrap();
        assert_abs_diff_eq!(b.sup_g, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lhs, b.rhs, epsilon = 1e-8 * b.rhs);
    }

    #[test]
    fn cutoff_bound_is_strict_for_the_kink() {
        let g = allen_cahn();
        let u = kink(2);
        let b = cutoff_bound_replay(&u, &g, 10.0, 1.0, None, &spec()).unwrap();
        assert!(b.lhs < b.rhs, "lhs {} rhs {}", b.lhs, b.rhs);
        assert!(b.chained_lower.abs() <= 1e-9);
        assert!(b.lhs >= b.chained_lower);
    }
}
