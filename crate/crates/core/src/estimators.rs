//! Bayesian and plug-in tail estimators, their gap `D(a)`, and the
//! third-order Taylor decomposition of the gap.
//!
//! Both estimators are carried in log space as well, since deep-tail
//! probabilities and their difference can fall below `f64` resolution while
//! the sign of `ln P_B - ln P_F` is still exact.

use crate::error::{domain, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::family::{Family, FamilyKind, ParamVector};
use crate::posterior::{moments, MomentMethod, PosteriorMoments, PosteriorSpec, Prior};
use crate::quadrature::QuadratureConfig;
use crate::special::ln_lower_incomplete_gamma;

/// Posterior expectation of the tail, `P_B(X > a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesTail {
    pub p: f64,
    pub ln_p: f64,
    pub method: MomentMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorDiagnostics {
    /// Point where the third derivative was evaluated (θ̂).
    pub remainder_eval_point: ParamVector,
    /// `max |D³F · m3| / 6` over a ±4√m2 box around θ̂.
    pub remainder_magnitude_bound: f64,
}

/// `D(a) ≈ term1 + term2 + term3` with
/// `term1 = -∇F·m1`, `term2 = -½ H:m2`, `term3 = -(1/6) D³F:m3`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTerms {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub d_taylor: f64,
    /// The third derivative came from finite differences.
    pub third_order_approximate: bool,
    pub diagnostics: TaylorDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailComparison {
    pub a: f64,
    pub p_bayes: f64,
    pub p_freq: f64,
    pub ln_p_bayes: f64,
    pub ln_p_freq: f64,
    /// `p_bayes - p_freq`.
    pub d_exact: f64,
    /// Sign of `D(a)` decided in log space.
    pub bayes_dominates: bool,
    pub method_bayes: MomentMethod,
    pub taylor: Option<TaylorTerms>,
}

impl TailComparison {
    pub fn d_taylor(&self) -> Option<f64> {
        self.taylor.as_ref().map(|t| t.d_taylor)
    }

    /// `ln P_B - ln P_F`.
    pub fn log_ratio(&self) -> f64 {
        self.ln_p_bayes - self.ln_p_freq
    }
}

/// Plug-in estimate `1 - F(a|θ̂)`.
pub fn p_frequentist(spec: &PosteriorSpec, a: f64) -> Result<f64> {
    spec.family().tail(spec.theta_hat(), a)
}

pub fn ln_p_frequentist(spec: &PosteriorSpec, a: f64) -> Result<f64> {
    spec.family().ln_tail(spec.theta_hat(), a)
}

/// `P_B(X > a)`.
pub fn p_bayes(spec: &PosteriorSpec, a: f64) -> Result<f64> {
    bayes_tail(spec, a).map(|b| b.p)
}

/// `P_B(X > a)` with its logarithm; closed form under the Jeffreys priors
/// for Exponential and Pareto, quadrature otherwise.
pub fn bayes_tail(spec: &PosteriorSpec, a: f64) -> Result<BayesTail> {
    if !a.is_finite() {
        return domain(format!("threshold must be finite, got {a}"));
    }
    let sample = spec.sample();
    let n = sample.n() as f64;
    let ln_p = match spec.prior() {
        // ∫ e^{-a/λ} π(λ|x) dλ = (S / (S + a))^n
        Prior::JeffreysExponential => {
            if a <= 0.0 {
                0.0
            } else {
                -n * (a / sample.sum()).ln_1p()
            }
        }
        // L^n γ(n, M) / (M^n γ(n, L)), M = L + ln b
        Prior::JeffreysPareto => {
            if a <= 1.0 {
                0.0
            } else {
                let l = sample.sum_ln();
                let m = l + a.ln();
                n * (l.ln() - m.ln()) + ln_lower_incomplete_gamma(n, m)?
                    - ln_lower_incomplete_gamma(n, l)?
            }
        }
        _ => {
            let p = p_bayes_quadrature(spec, a)?;
            return Ok(BayesTail {
                p,
                ln_p: p.ln(),
                method: MomentMethod::Quadrature,
            });
        }
    };
    Ok(BayesTail {
        p: ln_p.exp(),
        ln_p,
        method: MomentMethod::ClosedForm,
    })
}

/// `∫ (1 - F(a|θ)) π(θ|x) dθ` by adaptive quadrature (relative tolerance
/// 1e-10), whatever the prior.
pub fn p_bayes_quadrature(spec: &PosteriorSpec, a: f64) -> Result<f64> {
    if !a.is_finite() {
        return domain(format!("threshold must be finite, got {a}"));
    }
    if a <= spec.family().support_lower() {
        return Ok(1.0);
    }
    let family = spec.family();
    let q = spec.expectation(
        |t| {
            family
                .tail(&ParamVector::new(t.to_vec()), a)
                .unwrap_or(f64::NAN)
        },
        &QuadratureConfig::with_rel_tol(1e-10),
    )?;
    Ok(q.value.clamp(0.0, 1.0))
}

/// Both estimators and their exact difference.
pub fn difference_exact(spec: &PosteriorSpec, a: f64) -> Result<TailComparison> {
    let bayes = bayes_tail(spec, a)?;
    let ln_p_freq = ln_p_frequentist(spec, a)?;
    let p_freq = p_frequentist(spec, a)?;
    Ok(TailComparison {
        a,
        p_bayes: bayes.p,
        p_freq,
        ln_p_bayes: bayes.ln_p,
        ln_p_freq,
        d_exact: bayes.p - p_freq,
        bayes_dominates: bayes.ln_p > ln_p_freq,
        method_bayes: bayes.method,
        taylor: None,
    })
}

/// [`difference_exact`] plus the Taylor decomposition, using closed-form
/// posterior moments where they exist.
pub fn difference_taylor(spec: &PosteriorSpec, a: f64) -> Result<TailComparison> {
    let m = moments(spec)?;
    difference_with_moments(spec, a, &m)
}

fn difference_with_moments(
    spec: &PosteriorSpec,
    a: f64,
    m: &PosteriorMoments,
) -> Result<TailComparison> {
    let mut cmp = difference_exact(spec, a)?;
    cmp.taylor = Some(taylor_expansion(spec.family(), spec.theta_hat(), a, m)?);
    Ok(cmp)
}

/// Third-order expansion of `D(a)` about `theta_hat`.
///
/// The Lagrange point of the remainder is unknown, so the third derivative
/// is taken at `theta_hat` and a magnitude bound over a ±4√m2 box is
/// reported next to it.
pub fn taylor_expansion(
    family: &Family,
    theta_hat: &ParamVector,
    a: f64,
    m: &PosteriorMoments,
) -> Result<TaylorTerms> {
    let d = family.param_dim();
    if m.dim != d {
        return domain(format!("moments have dimension {}, family has {d}", m.dim));
    }
    let (Some(m2), Some(m3)) = (&m.m2, &m.m3) else {
        return domain("Taylor expansion needs second and third posterior moments");
    };
    let bundle = family.derivatives(theta_hat, a, 3)?;
    let h = bundle
        .hessian
        .as_ref()
        .expect("order-3 bundle carries a Hessian");
    let t = bundle
        .third
        .as_ref()
        .expect("order-3 bundle carries third derivatives");

    let term1 = -dot(&bundle.gradient, &m.m1);
    let term2 = -0.5 * dot(h, m2);
    let term3 = -dot(t, m3) / 6.0;

    let bound = remainder_bound(family, theta_hat, a, m2, m3)?;
    Ok(TaylorTerms {
        term1,
        term2,
        term3,
        d_taylor: term1 + term2 + term3,
        third_order_approximate: bundle.approximate,
        diagnostics: TaylorDiagnostics {
            remainder_eval_point: theta_hat.clone(),
            remainder_magnitude_bound: bound,
        },
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn remainder_bound(
    family: &Family,
    theta_hat: &ParamVector,
    a: f64,
    m2: &[f64],
    m3: &[f64],
) -> Result<f64> {
    if m3.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let d = family.param_dim();
    let domain = family.param_domain();
    let points_per_axis = if d == 1 { 41 } else { 11 };
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let c = theta_hat.get(i);
            let r = 4.0 * m2[i * d + i].max(0.0).sqrt();
            (0..points_per_axis)
                .map(|k| c - r + 2.0 * r * k as f64 / (points_per_axis - 1) as f64)
                .filter(|&x| domain[i].contains(x) || x == c)
                .collect()
        })
        .collect();
    let mut best = 0.0f64;
    let mut visit = |theta: ParamVector| -> Result<()> {
        let b = family.derivatives(&theta, a, 3)?;
        let v = dot(b.third.as_ref().expect("order-3 bundle"), m3).abs();
        best = best.max(v);
        Ok(())
    };
    if d == 1 {
        for &x in &axes[0] {
            visit(ParamVector::scalar(x))?;
        }
    } else {
        for &x in &axes[0] {
            for &y in &axes[1] {
                visit(ParamVector::new(vec![x, y]))?;
            }
        }
    }
    Ok(best / 6.0)
}

/// One comparison per threshold; failures are kept per point. The grid must
/// be sorted ascending. The Taylor terms are filled in when posterior
/// moments exist.
pub fn gap_curve(
    spec: &PosteriorSpec,
    grid: &[f64],
    exec: Execution,
) -> Result<Vec<Result<TailComparison>>> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidConfig(
            "threshold grid must be sorted ascending".into(),
        ));
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let m = match spec.family().kind() {
        FamilyKind::Generic => None,
        _ => moments(spec).ok(),
    };
    Ok(map_indexed(grid.len(), exec, |i| match &m {
        Some(m) => difference_with_moments(spec, grid[i], m),
        None => difference_exact(spec, grid[i]),
    }))
}
