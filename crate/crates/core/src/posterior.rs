//! Posterior distributions for the tail-estimation families.
//!
//! Jeffreys priors give closed-form marginals for the Exponential
//! (`π(λ) ∝ 1/λ`) and Pareto (`π(α) ∝ 1/α` on (0, 1)) models; the Normal
//! model uses the reference prior `π(μ, σ) ∝ 1/σ²`. A user-supplied prior
//! density can be paired with any family that has a density, in which case
//! the normalizer comes from quadrature.
//!
//! The posterior conditions on the whole observed sample. Conditioning on
//! the threshold alone is the special case of a one-point sample `{a}`.
//!
//! Moments are central moments about the MLE θ̂, not about the posterior
//! mean: `m_k = E[(θ - θ̂)^k]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::family::{Family, FamilyKind, MleEstimate, OpenInterval, ParamVector, Sample};
use crate::quadrature::{integrate_nested, integrate_range, Quadrature, QuadratureConfig, Range};
use crate::special::{ln_gamma_unchecked, ln_lower_incomplete_gamma};

pub type PriorDensity = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Prior {
    /// `π(λ) ∝ 1/λ`.
    JeffreysExponential,
    /// `π(α) ∝ 1/α` on (0, 1).
    JeffreysPareto,
    /// `π(μ, σ) ∝ 1/σ²`.
    NormalReference,
    /// Unnormalized prior density over the family's parameter space.
    Custom(PriorDensity),
}

impl Prior {
    pub fn custom(density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Prior::Custom(Arc::new(density))
    }

    /// The default prior for a built-in family.
    pub fn default_for(family: &Family) -> Result<Self> {
        match family.kind() {
            FamilyKind::Exponential => Ok(Prior::JeffreysExponential),
            FamilyKind::Pareto => Ok(Prior::JeffreysPareto),
            FamilyKind::Normal => Ok(Prior::NormalReference),
            FamilyKind::Generic => Err(Error::Unsupported(
                "generic families need an explicit custom prior".into(),
            )),
        }
    }

    fn ln_density(&self, t: &[f64]) -> f64 {
        match self {
            Prior::JeffreysExponential | Prior::JeffreysPareto => -t[0].ln(),
            Prior::NormalReference => -2.0 * t[1].ln(),
            Prior::Custom(f) => f(t).ln(),
        }
    }
}

impl fmt::Debug for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::JeffreysExponential => f.write_str("JeffreysExponential"),
            Prior::JeffreysPareto => f.write_str("JeffreysPareto"),
            Prior::NormalReference => f.write_str("NormalReference"),
            Prior::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Sufficient statistics cached at construction.
#[derive(Debug, Clone, Copy)]
struct Stats {
    n: f64,
    sum: f64,
    sum_ln: f64,
    mean: f64,
    /// Σ(xᵢ - x̄)² / n
    var_mle: f64,
}

/// Family, observed sample and prior, with the MLE and the log marginal
/// likelihood precomputed.
#[derive(Debug, Clone)]
pub struct PosteriorSpec {
    family: Family,
    sample: Sample,
    prior: Prior,
    mle: MleEstimate,
    stats: Stats,
    ln_marginal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
}

/// Posterior central moments about θ̂.
///
/// `m2` is a row-major `d×d` matrix and `m3` a `d×d×d` array; either may be
/// absent when it was not requested or does not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMoments {
    pub dim: usize,
    pub m1: Vec<f64>,
    pub m2: Option<Vec<f64>>,
    pub m3: Option<Vec<f64>>,
    pub method: MomentMethod,
}

impl PosteriorMoments {
    pub fn new(
        dim: usize,
        m1: Vec<f64>,
        m2: Option<Vec<f64>>,
        m3: Option<Vec<f64>>,
        method: MomentMethod,
    ) -> Result<Self> {
        if m1.len() != dim
            || m2.as_ref().is_some_and(|m| m.len() != dim * dim)
            || m3.as_ref().is_some_and(|m| m.len() != dim * dim * dim)
        {
            return domain("moment tensor shapes do not match the parameter dimension");
        }
        if let Some(m) = &m2 {
            if (0..dim).any(|i| m[i * dim + i] < 0.0 || m[i * dim + i].is_nan()) {
                return domain("second moments must be non-negative");
            }
        }
        Ok(Self {
            dim,
            m1,
            m2,
            m3,
            method,
        })
    }

    /// One-dimensional moments.
    pub fn scalar(m1: f64, m2: f64, m3: f64, method: MomentMethod) -> Result<Self> {
        Self::new(1, vec![m1], Some(vec![m2]), Some(vec![m3]), method)
    }

    /// All moments zero: a posterior concentrated at θ̂.
    pub fn point_mass(dim: usize) -> Self {
        Self {
            dim,
            m1: vec![0.0; dim],
            m2: Some(vec![0.0; dim * dim]),
            m3: Some(vec![0.0; dim * dim * dim]),
            method: MomentMethod::ClosedForm,
        }
    }

    pub fn m2_scalar(&self) -> Option<f64> {
        self.m2.as_ref().map(|m| m[0])
    }

    pub fn m3_scalar(&self) -> Option<f64> {
        self.m3.as_ref().map(|m| m[0])
    }
}

impl PosteriorSpec {
    pub fn new(family: Family, sample: Sample, prior: Prior) -> Result<Self> {
        sample.validate_for(&family)?;
        let compatible = matches!(
            (&prior, family.kind()),
            (Prior::JeffreysExponential, FamilyKind::Exponential)
                | (Prior::JeffreysPareto, FamilyKind::Pareto)
                | (Prior::NormalReference, FamilyKind::Normal)
                | (Prior::Custom(_), _)
        );
        if !compatible {
            return Err(Error::InvalidConfig(format!(
                "prior {prior:?} does not apply to the {} family",
                family.name()
            )));
        }
        let mle = family.mle(&sample)?;
        let n = sample.n() as f64;
        let mean = sample.mean();
        let stats = Stats {
            n,
            sum: sample.sum(),
            sum_ln: if family.kind() == FamilyKind::Pareto {
                sample.sum_ln()
            } else {
                f64::NAN
            },
            mean,
            var_mle: sample
                .values()
                .iter()
                .map(|x| (x - mean).powi(2))
                .sum::<f64>()
                / n,
        };
        let mut spec = Self {
            family,
            sample,
            prior,
            mle,
            stats,
            ln_marginal: f64::NAN,
        };
        spec.ln_marginal = spec.compute_ln_marginal()?;
        if !spec.ln_marginal.is_finite() {
            return Err(Error::Underflow(format!(
                "posterior normalizer is not finite (ln m = {})",
                spec.ln_marginal
            )));
        }
        Ok(spec)
    }

    /// Spec with the family's default prior.
    pub fn with_default_prior(family: Family, sample: Sample) -> Result<Self> {
        let prior = Prior::default_for(&family)?;
        Self::new(family, sample, prior)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn mle(&self) -> &MleEstimate {
        &self.mle
    }

    pub fn theta_hat(&self) -> &ParamVector {
        &self.mle.theta
    }

    pub fn dim(&self) -> usize {
        self.family.param_dim()
    }

    pub(crate) fn has_closed_form(&self) -> bool {
        matches!(
            self.prior,
            Prior::JeffreysExponential | Prior::JeffreysPareto
        )
    }

    fn ln_likelihood(&self, t: &[f64]) -> f64 {
        let s = &self.stats;
        match (&self.family, &self.prior) {
            (Family::Exponential, _) => -s.n * t[0].ln() - s.sum / t[0],
            (Family::Pareto, _) => s.n * t[0].ln() - (t[0] + 1.0) * s.sum_ln,
            (Family::Normal, _) => {
                let ss = s.n * (s.var_mle + (t[0] - s.mean).powi(2));
                -0.5 * s.n * (2.0 * std::f64::consts::PI).ln()
                    - s.n * t[1].ln()
                    - ss / (2.0 * t[1] * t[1])
            }
            (fam, _) => {
                let theta = ParamVector::new(t.to_vec());
                self.sample
                    .values()
                    .iter()
                    .map(|&x| fam.ln_pdf(&theta, x).unwrap_or(f64::NAN))
                    .sum()
            }
        }
    }

    fn ln_unnormalized(&self, t: &[f64]) -> f64 {
        self.ln_likelihood(t) + self.prior.ln_density(t)
    }

    fn compute_ln_marginal(&self) -> Result<f64> {
        let s = &self.stats;
        match &self.prior {
            // ∫ λ^{-n-1} e^{-S/λ} dλ = Γ(n) S^{-n}
            Prior::JeffreysExponential => Ok(ln_gamma_unchecked(s.n) - s.n * s.sum.ln()),
            // ∫_0^1 α^{n-1} e^{-αL} dα / ∏x = γ(n, L) / (∏x · L^n)
            Prior::JeffreysPareto => {
                Ok(ln_lower_incomplete_gamma(s.n, s.sum_ln)? - s.sum_ln - s.n * s.sum_ln.ln())
            }
            Prior::NormalReference => {
                let beta = 0.5 * s.n * s.var_mle;
                let ln_2pi = (2.0 * std::f64::consts::PI).ln();
                Ok(
                    -0.5 * (s.n - 1.0) * ln_2pi - 0.5 * s.n.ln() - std::f64::consts::LN_2
                        + ln_gamma_unchecked(0.5 * s.n)
                        - 0.5 * s.n * beta.ln(),
                )
            }
            Prior::Custom(_) => {
                // shift by the log-likelihood peak so the integrand stays in range
                let shift = self.ln_likelihood(self.mle.theta.coords());
                if !shift.is_finite() {
                    return Err(Error::Underflow(
                        "log-likelihood at the MLE is not finite".into(),
                    ));
                }
                let q = self.integrate(
                    |t| (self.ln_unnormalized(t) - shift).exp(),
                    &QuadratureConfig::with_rel_tol(1e-11),
                )?;
                if !(q.value > 0.0) {
                    return Err(Error::Underflow(
                        "custom prior gives zero posterior mass".into(),
                    ));
                }
                Ok(q.value.ln() + shift)
            }
        }
    }

    /// `ln π(θ|x)`; `-inf` outside the parameter space.
    pub fn ln_posterior_density(&self, theta: &ParamVector) -> Result<f64> {
        self.check_support(theta)?;
        Ok(self.ln_unnormalized(theta.coords()) - self.ln_marginal)
    }

    fn check_support(&self, theta: &ParamVector) -> Result<()> {
        self.family.check_model_theta(theta)
    }

    fn density_unchecked(&self, t: &[f64]) -> f64 {
        let v = (self.ln_unnormalized(t) - self.ln_marginal).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }

    // Spread of the posterior along each axis, used to place quadrature
    // breakpoints. Normal-approximation widths are enough here.
    fn spreads(&self) -> Vec<f64> {
        let n = self.stats.n;
        let t = self.mle.theta.coords();
        match self.family {
            Family::Normal => vec![t[1] / n.sqrt(), t[1] / (2.0 * n).sqrt()],
            _ => t.iter().map(|x| x.abs().max(1e-3) / n.sqrt()).collect(),
        }
    }

    fn axis_ranges(&self, axis: usize) -> Vec<Range> {
        let iv: OpenInterval = self.family.param_domain()[axis];
        let spread = self.spreads()[axis];
        let center = self.mle.theta.get(axis);
        axis_pieces(iv, center, spread)
    }

    /// `∫ g(θ) π(θ|x) dθ` over the parameter space.
    pub fn expectation<G>(&self, g: G, cfg: &QuadratureConfig) -> Result<Quadrature>
    where
        G: Fn(&[f64]) -> f64,
    {
        self.integrate(|t| g(t) * self.density_unchecked(t), cfg)
    }

    fn integrate<H>(&self, h: H, cfg: &QuadratureConfig) -> Result<Quadrature>
    where
        H: Fn(&[f64]) -> f64,
    {
        let mut total = Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            subintervals: 0,
        };
        let mut add = |q: Quadrature| {
            total.value += q.value;
            total.abs_error += q.abs_error;
            total.evaluations += q.evaluations;
            total.subintervals += q.subintervals;
        };
        match self.dim() {
            1 => {
                for r in self.axis_ranges(0) {
                    add(integrate_range(|x| h(&[x]), &r, cfg)?);
                }
            }
            2 => {
                let inner = self.axis_ranges(1);
                for outer in self.axis_ranges(0) {
                    for r in &inner {
                        add(integrate_nested(|x, y| h(&[x, y]), &outer, |_| *r, cfg)?);
                    }
                }
            }
            d => {
                return Err(Error::Unsupported(format!(
                    "posterior quadrature supports 1 or 2 parameters, got {d}"
                )))
            }
        }
        Ok(total)
    }
}

/// Breaks an axis into a core window of ±10 spreads around the centre and
/// whatever remains on either side.
fn axis_pieces(iv: OpenInterval, center: f64, spread: f64) -> Vec<Range> {
    let center = if iv.contains(center) {
        center
    } else if center >= iv.hi {
        iv.hi - spread.min(0.5 * (iv.hi - iv.lo)).min(1.0) * 1e-3
    } else {
        iv.lo + spread.min(0.5 * (iv.hi - iv.lo)).min(1.0) * 1e-3
    };
    let core_lo = iv.lo.max(center - 10.0 * spread);
    let core_hi = iv.hi.min(center + 10.0 * spread);
    let mut pieces = Vec::with_capacity(3);
    if core_lo > iv.lo {
        let scale = if iv.lo.is_finite() {
            core_lo - iv.lo
        } else {
            spread
        };
        pieces.push(Range::new(iv.lo, core_lo, core_lo, scale));
    }
    pieces.push(Range::finite(core_lo, core_hi));
    if core_hi < iv.hi {
        let scale = if iv.lo.is_finite() {
            (core_hi - iv.lo).max(spread)
        } else {
            spread.max(core_hi - center)
        };
        pieces.push(Range::new(core_hi, iv.hi, core_hi, scale));
    }
    pieces
}

/// Posterior density `π(θ|x)`.
pub fn posterior_density(spec: &PosteriorSpec, theta: &ParamVector) -> Result<f64> {
    spec.ln_posterior_density(theta).map(f64::exp)
}

/// `ln m(x)`.
pub fn ln_marginal_likelihood(spec: &PosteriorSpec) -> f64 {
    spec.ln_marginal
}

/// Marginal likelihood `m(x) = ∫ f(x|θ) π(θ) dθ`; errors when it leaves the
/// `f64` range (use [`ln_marginal_likelihood`] then).
pub fn marginal_likelihood(spec: &PosteriorSpec) -> Result<f64> {
    let m = spec.ln_marginal.exp();
    if m == 0.0 || !m.is_finite() {
        return Err(Error::Underflow(format!(
            "marginal likelihood exp({}) is outside the f64 range",
            spec.ln_marginal
        )));
    }
    Ok(m)
}

/// One closed-form central moment `E[(θ - θ̂)^k]`, `k ∈ {1, 2, 3}`.
pub fn closed_central_moment(spec: &PosteriorSpec, k: usize) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return domain(format!(
            "closed-form moments are available for k = 1, 2, 3; got {k}"
        ));
    }
    let s = &spec.stats;
    let n = s.n;
    match spec.prior {
        Prior::JeffreysExponential => {
            let needed = k + 1;
            if spec.sample.n() < needed {
                return Err(Error::InsufficientSampleSize {
                    order: k,
                    n: spec.sample.n(),
                    required: needed,
                });
            }
            let xbar = s.mean;
            Ok(match k {
                1 => xbar / (n - 1.0),
                2 => xbar * xbar * (n + 2.0) / ((n - 1.0) * (n - 2.0)),
                _ => xbar.powi(3) * (7.0 * n + 6.0) / ((n - 1.0) * (n - 2.0) * (n - 3.0)),
            })
        }
        Prior::JeffreysPareto => {
            let l = s.sum_ln;
            // e^{-L} / γ(n, L), i.e. 1 / (∏x · [Γ(n,0) - Γ(n,L)])
            let ln_g = -l - ln_lower_incomplete_gamma(n, l)?;
            let lnl = l.ln();
            Ok(match k {
                1 => -((n - 1.0) * lnl + ln_g).exp(),
                2 => n / (l * l) + ((n - 2.0) * lnl + ln_g).exp() * ((n - 1.0) - l),
                _ => {
                    2.0 * n / l.powi(3)
                        - ((n - 3.0) * lnl + ln_g).exp()
                            * (n * n + 2.0 + (2.0 - 2.0 * n) * l + l * l)
                }
            })
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form posterior moments for prior {:?}",
            spec.prior
        ))),
    }
}

/// Closed-form `m1, m2, m3` (Exponential and Pareto under Jeffreys priors).
pub fn moments_closed(spec: &PosteriorSpec) -> Result<PosteriorMoments> {
    PosteriorMoments::scalar(
        closed_central_moment(spec, 1)?,
        closed_central_moment(spec, 2)?,
        closed_central_moment(spec, 3)?,
        MomentMethod::ClosedForm,
    )
}

/// `E[∏ᵢ (θ_{idx[i]} - θ̂_{idx[i]})]` by quadrature. An empty index list
/// gives the posterior mass.
pub fn central_moment_quadrature(spec: &PosteriorSpec, idx: &[usize], rel_tol: f64) -> Result<f64> {
    let hat = spec.theta_hat().coords().to_vec();
    let spreads = spec.spreads();
    let scale: f64 = idx.iter().map(|&i| spreads[i]).product();
    let cfg = QuadratureConfig {
        rel_tol,
        abs_tol: 1e-3 * rel_tol * scale,
        ..QuadratureConfig::default()
    };
    let q = spec.expectation(|t| idx.iter().map(|&i| t[i] - hat[i]).product(), &cfg)?;
    Ok(q.value)
}

/// Central moments up to order `k_max` by adaptive quadrature
/// (relative tolerance 1e-10).
pub fn moments_quadrature(spec: &PosteriorSpec, k_max: usize) -> Result<PosteriorMoments> {
    if !(1..=3).contains(&k_max) {
        return domain(format!("k_max must be 1, 2 or 3, got {k_max}"));
    }
    const TOL: f64 = 1e-10;
    let d = spec.dim();
    let m1 = (0..d)
        .map(|i| central_moment_quadrature(spec, &[i], TOL))
        .collect::<Result<Vec<_>>>()?;
    let m2 = if k_max >= 2 {
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = central_moment_quadrature(spec, &[i, j], TOL)?;
                m[i * d + j] = v;
                m[j * d + i] = v;
            }
        }
        Some(m)
    } else {
        None
    };
    let m3 = if k_max >= 3 {
        let mut m = vec![0.0; d * d * d];
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    let v = central_moment_quadrature(spec, &[i, j, k], TOL)?;
                    for (a, b, c) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        m[(a * d + b) * d + c] = v;
                    }
                }
            }
        }
        Some(m)
    } else {
        None
    };
    PosteriorMoments::new(d, m1, m2, m3, MomentMethod::Quadrature)
}

/// Closed-form moments where they exist, quadrature otherwise.
pub fn moments(spec: &PosteriorSpec) -> Result<PosteriorMoments> {
    if spec.has_closed_form() {
        moments_closed(spec)
    } else {
        moments_quadrature(spec, 3)
    }
}

/// Posterior mean `E[θ] = θ̂ + m1`, with `m1` in closed form when available.
pub fn posterior_mean(spec: &PosteriorSpec) -> Result<ParamVector> {
    let hat = spec.theta_hat().coords().to_vec();
    let m1 = if spec.has_closed_form() {
        vec![closed_central_moment(spec, 1)?]
    } else {
        (0..spec.dim())
            .map(|i| central_moment_quadrature(spec, &[i], 1e-10))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(ParamVector::new(
        hat.iter().zip(m1).map(|(h, m)| h + m).collect(),
    ))
}
