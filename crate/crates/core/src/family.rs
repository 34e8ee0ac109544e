//! Parametric families: distribution functions, parameter derivatives of
//! `F(a|θ)` up to third order, maximum likelihood fits and quantiles.
//!
//! Derivatives are always those of `F`, not of the tail `1 - F`; callers
//! negate. Exponential and Pareto derivatives are analytic to third order,
//! the Normal Hessian is analytic and its third derivatives come from
//! central differences of that Hessian. Generic families are differentiated
//! entirely by finite differences of their distribution function.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::special::{erfc, ln_erfc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Exponential,
    Pareto,
    Normal,
    Generic,
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const POSITIVE: Self = Self::new(0.0, f64::INFINITY);
    pub const REAL: Self = Self::new(f64::NEG_INFINITY, f64::INFINITY);

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// Parameter vector θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Self(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub(crate) fn with(&self, i: usize, value: f64) -> Self {
        let mut c = self.0.clone();
        c[i] = value;
        Self(c)
    }
}

impl From<f64> for ParamVector {
    fn from(x: f64) -> Self {
        Self::scalar(x)
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// An i.i.d. sample `x₁, …, xₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateSample("sample is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return domain(format!("sample value {v} is not finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `S = Σ xᵢ`.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.n() as f64
    }

    /// `L = Σ ln xᵢ`.
    pub fn sum_ln(&self) -> f64 {
        self.values.iter().map(|x| x.ln()).sum()
    }

    pub fn validate_for(&self, family: &Family) -> Result<()> {
        let lower = family.support_lower();
        match self.values.iter().find(|&&v| v < lower) {
            Some(v) => domain(format!(
                "sample value {v} lies below the {} support lower bound {lower}",
                family.name()
            )),
            None => Ok(()),
        }
    }
}

pub type DistributionFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
pub type MleFn = Arc<dyn Fn(&Sample) -> Result<ParamVector> + Send + Sync>;

/// A user-supplied family. Only the distribution function is required;
/// derivatives are taken numerically.
#[derive(Clone)]
pub struct GenericFamily {
    name: String,
    param_domain: Vec<OpenInterval>,
    support_lower: f64,
    cdf: DistributionFn,
    tail: Option<DistributionFn>,
    pdf: Option<DistributionFn>,
    mle: Option<MleFn>,
}

impl GenericFamily {
    pub fn new(
        name: impl Into<String>,
        param_domain: Vec<OpenInterval>,
        support_lower: f64,
        cdf: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if param_domain.is_empty() || param_domain.len() > 2 {
            return Err(Error::Unsupported(format!(
                "generic families support 1 or 2 parameters, got {}",
                param_domain.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            param_domain,
            support_lower,
            cdf: Arc::new(cdf),
            tail: None,
            pdf: None,
            mle: None,
        })
    }

    /// Closed-form tail, used instead of `1 - cdf` deep in the tail.
    pub fn with_tail(mut self, tail: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.tail = Some(Arc::new(tail));
        self
    }

    /// Density, needed to build a likelihood for posterior computations.
    pub fn with_pdf(mut self, pdf: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.pdf = Some(Arc::new(pdf));
        self
    }

    pub fn with_mle(
        mut self,
        mle: impl Fn(&Sample) -> Result<ParamVector> + Send + Sync + 'static,
    ) -> Self {
        self.mle = Some(Arc::new(mle));
        self
    }
}

impl fmt::Debug for GenericFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericFamily")
            .field("name", &self.name)
            .field("param_domain", &self.param_domain)
            .field("support_lower", &self.support_lower)
            .field("has_tail", &self.tail.is_some())
            .field("has_pdf", &self.pdf.is_some())
            .field("has_mle", &self.mle.is_some())
            .finish()
    }
}

/// A parametric family `F(·|θ)`.
///
/// * Exponential with mean λ > 0, support `[0, ∞)`.
/// * Pareto with scale 1 and shape α, support `[1, ∞)`. The model restricts
///   α to (0, 1); the distribution functions accept any α > 0 so that
///   out-of-model estimates can still be evaluated.
/// * Normal with θ = (μ, σ), σ > 0.
#[derive(Debug, Clone)]
pub enum Family {
    Exponential,
    Pareto,
    Normal,
    Generic(GenericFamily),
}

/// Parameter derivatives of `F(a|θ)`.
///
/// Matrices are stored row-major: `hessian[i * d + j]`,
/// `third[(i * d + j) * d + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub dim: usize,
    pub gradient: Vec<f64>,
    pub hessian: Option<Vec<f64>>,
    pub third: Option<Vec<f64>>,
    /// True when any returned entry came from finite differences.
    pub approximate: bool,
}

impl DerivativeBundle {
    pub fn hessian_entry(&self, i: usize, j: usize) -> Option<f64> {
        self.hessian.as_ref().map(|h| h[i * self.dim + j])
    }

    pub fn third_entry(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        self.third
            .as_ref()
            .map(|t| t[(i * self.dim + j) * self.dim + k])
    }
}

/// Output of [`Family::mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct MleEstimate {
    pub theta: ParamVector,
    /// Set when the estimate falls outside the model's parameter space
    /// (Pareto with α̂ ≥ 1).
    pub out_of_model: bool,
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Exponential => FamilyKind::Exponential,
            Family::Pareto => FamilyKind::Pareto,
            Family::Normal => FamilyKind::Normal,
            Family::Generic(_) => FamilyKind::Generic,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Family::Exponential => "exponential",
            Family::Pareto => "pareto",
            Family::Normal => "normal",
            Family::Generic(g) => &g.name,
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            Family::Exponential | Family::Pareto => 1,
            Family::Normal => 2,
            Family::Generic(g) => g.param_domain.len(),
        }
    }

    pub fn support_lower(&self) -> f64 {
        match self {
            Family::Exponential => 0.0,
            Family::Pareto => 1.0,
            Family::Normal => f64::NEG_INFINITY,
            Family::Generic(g) => g.support_lower,
        }
    }

    /// Model parameter space; this is also the posterior's support.
    pub fn param_domain(&self) -> Vec<OpenInterval> {
        match self {
            Family::Exponential => vec![OpenInterval::POSITIVE],
            Family::Pareto => vec![OpenInterval::new(0.0, 1.0)],
            Family::Normal => vec![OpenInterval::REAL, OpenInterval::POSITIVE],
            Family::Generic(g) => g.param_domain.clone(),
        }
    }

    /// Region where the distribution functions are defined. Wider than
    /// [`param_domain`](Self::param_domain) only for Pareto.
    pub(crate) fn eval_domain(&self) -> Vec<OpenInterval> {
        match self {
            Family::Pareto => vec![OpenInterval::POSITIVE],
            _ => self.param_domain(),
        }
    }

    pub fn check_theta(&self, theta: &ParamVector) -> Result<()> {
        let dom = self.eval_domain();
        if theta.dim() != dom.len() {
            return domain(format!(
                "{} expects {} parameter(s), got {}",
                self.name(),
                dom.len(),
                theta.dim()
            ));
        }
        for (i, (x, iv)) in theta.coords().iter().zip(&dom).enumerate() {
            if !iv.contains(*x) {
                return domain(format!(
                    "{} parameter {i} = {x} outside ({}, {})",
                    self.name(),
                    iv.lo,
                    iv.hi
                ));
            }
        }
        Ok(())
    }

    fn check_point(a: f64) -> Result<()> {
        if a.is_nan() {
            return domain("evaluation point is NaN");
        }
        Ok(())
    }

    pub fn cdf(&self, theta: &ParamVector, a: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Self::check_point(a)?;
        let t = theta.coords();
        Ok(match self {
            Family::Exponential => {
                if a <= 0.0 {
                    0.0
                } else {
                    -(-a / t[0]).exp_m1()
                }
            }
            Family::Pareto => {
                if a <= 1.0 {
                    0.0
                } else {
                    -(-t[0] * a.ln()).exp_m1()
                }
            }
            Family::Normal => 0.5 * erfc(-(a - t[0]) / t[1] * FRAC_1_SQRT_2),
            Family::Generic(g) => (g.cdf)(t, a),
        })
    }

    /// `1 - F(a|θ)`, evaluated in closed form where one exists.
    pub fn tail(&self, theta: &ParamVector, a: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Self::check_point(a)?;
        let t = theta.coords();
        Ok(match self {
            Family::Exponential | Family::Pareto => self.ln_tail_unchecked(t, a).exp(),
            Family::Normal => 0.5 * erfc((a - t[0]) / t[1] * FRAC_1_SQRT_2),
            Family::Generic(g) => match &g.tail {
                Some(tail) => tail(t, a),
                None => 1.0 - (g.cdf)(t, a),
            },
        })
    }

    /// `ln(1 - F(a|θ))`, finite long after the tail underflows.
    pub fn ln_tail(&self, theta: &ParamVector, a: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Self::check_point(a)?;
        Ok(self.ln_tail_unchecked(theta.coords(), a))
    }

    fn ln_tail_unchecked(&self, t: &[f64], a: f64) -> f64 {
        match self {
            Family::Exponential => {
                if a <= 0.0 {
                    0.0
                } else {
                    -a / t[0]
                }
            }
            Family::Pareto => {
                if a <= 1.0 {
                    0.0
                } else {
                    -t[0] * a.ln()
                }
            }
            Family::Normal => -LN_2 + ln_erfc((a - t[0]) / t[1] * FRAC_1_SQRT_2),
            Family::Generic(g) => match &g.tail {
                Some(tail) => tail(t, a).ln(),
                None => (-(g.cdf)(t, a)).ln_1p(),
            },
        }
    }

    /// `ln f(x|θ)`; `-inf` outside the support.
    pub fn ln_pdf(&self, theta: &ParamVector, x: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let t = theta.coords();
        Ok(match self {
            Family::Exponential => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -t[0].ln() - x / t[0]
                }
            }
            Family::Pareto => {
                if x < 1.0 {
                    f64::NEG_INFINITY
                } else {
                    t[0].ln() - (t[0] + 1.0) * x.ln()
                }
            }
            Family::Normal => {
                let z = (x - t[0]) / t[1];
                -0.5 * z * z - t[1].ln() - 0.5 * (2.0 * PI).ln()
            }
            Family::Generic(g) => match &g.pdf {
                Some(pdf) => pdf(t, x).ln(),
                None => {
                    return Err(Error::Unsupported(format!(
                        "family {} has no density",
                        g.name
                    )))
                }
            },
        })
    }

    pub fn pdf(&self, theta: &ParamVector, x: f64) -> Result<f64> {
        self.ln_pdf(theta, x).map(f64::exp)
    }

    /// Parameter derivatives of `F(a|θ)` up to `order` (1, 2 or 3).
    pub fn derivatives(
        &self,
        theta: &ParamVector,
        a: f64,
        order: usize,
    ) -> Result<DerivativeBundle> {
        if !(1..=3).contains(&order) {
            return domain(format!("derivative order must be 1, 2 or 3, got {order}"));
        }
        self.check_theta(theta)?;
        Self::check_point(a)?;
        let t = theta.coords();
        match self {
            Family::Exponential => {
                let lam = t[0];
                let (d1, d2, d3) = if a <= 0.0 {
                    (0.0, 0.0, 0.0)
                } else {
                    let r = a / lam;
                    let e = (-r).exp();
                    (
                        -(a / (lam * lam)) * e,
                        (2.0 - r) * (a / lam.powi(3)) * e,
                        -(6.0 * a / lam.powi(4) - 6.0 * a * a / lam.powi(5)
                            + a.powi(3) / lam.powi(6))
                            * e,
                    )
                };
                Ok(scalar_bundle(order, d1, d2, d3))
            }
            Family::Pareto => {
                let (d1, d2, d3) = if a <= 1.0 {
                    (0.0, 0.0, 0.0)
                } else {
                    let lb = a.ln();
                    let e = (-t[0] * lb).exp();
                    (e * lb, -e * lb * lb, e * lb.powi(3))
                };
                Ok(scalar_bundle(order, d1, d2, d3))
            }
            Family::Normal => {
                let gradient = normal_gradient(t, a);
                let hessian = (order >= 2).then(|| normal_hessian(t, a).to_vec());
                let third = if order == 3 {
                    Some(self.fd_third_from_hessian(theta, a)?)
                } else {
                    None
                };
                Ok(DerivativeBundle {
                    dim: 2,
                    gradient,
                    hessian,
                    third,
                    approximate: order == 3,
                })
            }
            Family::Generic(_) => self.fd_bundle(theta, a, order),
        }
    }

    /// Symmetric `H_θ F(a|θ)`, row-major.
    pub fn hessian(&self, theta: &ParamVector, a: f64) -> Result<Vec<f64>> {
        Ok(self
            .derivatives(theta, a, 2)?
            .hessian
            .expect("order-2 bundle carries a Hessian"))
    }

    // Step clipped so that θᵢ ± k·h stays inside the evaluation domain.
    fn fd_step(&self, theta: &ParamVector, i: usize, base: f64, reach: f64) -> Result<f64> {
        let x = theta.get(i);
        let iv = self.eval_domain()[i];
        let nominal = base * x.abs().max(1.0);
        let room = (x - iv.lo).min(iv.hi - x) / reach;
        let h = nominal.min(0.5 * room);
        if !(h > nominal * 1e-3) {
            return Err(Error::Domain(format!(
                "finite-difference step for parameter {i} collapses near the domain boundary (θ = {x})"
            )));
        }
        // exactly representable offsets
        Ok((x + h) - x)
    }

    fn fd_third_from_hessian(&self, theta: &ParamVector, a: f64) -> Result<Vec<f64>> {
        let d = theta.dim();
        let mut t = vec![0.0; d * d * d];
        for k in 0..d {
            let h = self.fd_step(theta, k, f64::EPSILON.cbrt(), 1.0)?;
            let hp = self.hessian(&theta.with(k, theta.get(k) + h), a)?;
            let hm = self.hessian(&theta.with(k, theta.get(k) - h), a)?;
            for i in 0..d {
                for j in 0..d {
                    t[(i * d + j) * d + k] = (hp[i * d + j] - hm[i * d + j]) / (2.0 * h);
                }
            }
        }
        Ok(symmetrize3(&t, d))
    }

    fn fd_gradient(&self, theta: &ParamVector, a: f64, base: f64) -> Result<Vec<f64>> {
        (0..theta.dim())
            .map(|i| {
                let h = self.fd_step(theta, i, base, 1.0)?;
                let fp = self.cdf(&theta.with(i, theta.get(i) + h), a)?;
                let fm = self.cdf(&theta.with(i, theta.get(i) - h), a)?;
                Ok((fp - fm) / (2.0 * h))
            })
            .collect()
    }

    fn fd_hessian(&self, theta: &ParamVector, a: f64, base: f64) -> Result<Vec<f64>> {
        let d = theta.dim();
        let steps: Vec<f64> = (0..d)
            .map(|i| self.fd_step(theta, i, base, 1.0))
            .collect::<Result<_>>()?;
        let f0 = self.cdf(theta, a)?;
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            let hi = steps[i];
            let fp = self.cdf(&theta.with(i, theta.get(i) + hi), a)?;
            let fm = self.cdf(&theta.with(i, theta.get(i) - hi), a)?;
            h[i * d + i] = (fp - 2.0 * f0 + fm) / (hi * hi);
            for j in (i + 1)..d {
                let hj = steps[j];
                let shift = |si: f64, sj: f64| {
                    let p = theta.with(i, theta.get(i) + si * hi);
                    let p = p.with(j, p.get(j) + sj * hj);
                    self.cdf(&p, a)
                };
                let v = (shift(1.0, 1.0)? - shift(1.0, -1.0)? - shift(-1.0, 1.0)?
                    + shift(-1.0, -1.0)?)
                    / (4.0 * hi * hj);
                h[i * d + j] = v;
                h[j * d + i] = v;
            }
        }
        Ok(h)
    }

    fn fd_bundle(&self, theta: &ParamVector, a: f64, order: usize) -> Result<DerivativeBundle> {
        let d = theta.dim();
        let gradient = self.fd_gradient(theta, a, f64::EPSILON.cbrt())?;
        let hessian = if order >= 2 {
            Some(self.fd_hessian(theta, a, f64::EPSILON.powf(0.25))?)
        } else {
            None
        };
        let third = if order == 3 {
            let base = f64::EPSILON.powf(0.2);
            let mut t = vec![0.0; d * d * d];
            for k in 0..d {
                let h = self.fd_step(theta, k, base, 2.0)?;
                let hp = self.fd_hessian(&theta.with(k, theta.get(k) + h), a, base)?;
                let hm = self.fd_hessian(&theta.with(k, theta.get(k) - h), a, base)?;
                for ij in 0..d * d {
                    t[ij * d + k] = (hp[ij] - hm[ij]) / (2.0 * h);
                }
            }
            Some(symmetrize3(&t, d))
        } else {
            None
        };
        Ok(DerivativeBundle {
            dim: d,
            gradient,
            hessian,
            third,
            approximate: true,
        })
    }

    /// Maximum likelihood estimate of θ.
    pub fn mle(&self, sample: &Sample) -> Result<MleEstimate> {
        sample.validate_for(self)?;
        let n = sample.n() as f64;
        match self {
            Family::Exponential => {
                let m = sample.mean();
                if !(m > 0.0) {
                    return Err(Error::DegenerateSample(
                        "exponential sample with zero mean".into(),
                    ));
                }
                Ok(MleEstimate {
                    theta: ParamVector::scalar(m),
                    out_of_model: false,
                })
            }
            Family::Pareto => {
                let l = sample.sum_ln();
                if !(l > 0.0) {
                    return Err(Error::DegenerateSample(
                        "all Pareto observations equal 1, shape estimate is infinite".into(),
                    ));
                }
                let alpha = n / l;
                Ok(MleEstimate {
                    theta: ParamVector::scalar(alpha),
                    out_of_model: alpha >= 1.0,
                })
            }
            Family::Normal => {
                let mu = sample.mean();
                let var = sample
                    .values()
                    .iter()
                    .map(|x| (x - mu).powi(2))
                    .sum::<f64>()
                    / n;
                if sample.n() < 2 || !(var > 0.0) {
                    return Err(Error::DegenerateSample(
                        "normal sample needs at least two distinct values".into(),
                    ));
                }
                Ok(MleEstimate {
                    theta: ParamVector::new(vec![mu, var.sqrt()]),
                    out_of_model: false,
                })
            }
            Family::Generic(g) => match &g.mle {
                Some(fit) => {
                    let theta = fit(sample)?;
                    let out_of_model = self.check_model_theta(&theta).is_err();
                    Ok(MleEstimate {
                        theta,
                        out_of_model,
                    })
                }
                None => Err(Error::Unsupported(format!(
                    "family {} has no maximum likelihood estimator",
                    g.name
                ))),
            },
        }
    }

    pub(crate) fn check_model_theta(&self, theta: &ParamVector) -> Result<()> {
        self.check_theta(theta)?;
        for (x, iv) in theta.coords().iter().zip(self.param_domain()) {
            if !iv.contains(*x) {
                return domain(format!(
                    "{} parameter {x} outside the model space ({}, {})",
                    self.name(),
                    iv.lo,
                    iv.hi
                ));
            }
        }
        Ok(())
    }

    /// Inverse distribution function.
    pub fn quantile(&self, theta: &ParamVector, p: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile probability must lie in (0, 1), got {p}"));
        }
        let t = theta.coords();
        match self {
            Family::Exponential => Ok(-t[0] * (-p).ln_1p()),
            Family::Pareto => Ok((-(-p).ln_1p() / t[0]).exp()),
            Family::Normal => Ok(t[0] + t[1] * standard_normal_quantile(p)),
            Family::Generic(_) => self.quantile_by_bisection(theta, p),
        }
    }

    fn quantile_by_bisection(&self, theta: &ParamVector, p: f64) -> Result<f64> {
        let mut lo = if self.support_lower().is_finite() {
            self.support_lower()
        } else {
            -1.0
        };
        while self.cdf(theta, lo)? > p {
            lo = 2.0 * lo - 1.0;
            if lo < -1e300 {
                return Err(Error::NonConvergence {
                    what: "quantile bracket",
                    achieved: lo,
                    requested: p,
                });
            }
        }
        let mut hi = lo.abs().max(1.0);
        while self.cdf(theta, hi)? < p {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::NonConvergence {
                    what: "quantile bracket",
                    achieved: hi,
                    requested: p,
                });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(theta, mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn scalar_bundle(order: usize, d1: f64, d2: f64, d3: f64) -> DerivativeBundle {
    DerivativeBundle {
        dim: 1,
        gradient: vec![d1],
        hessian: (order >= 2).then(|| vec![d2]),
        third: (order >= 3).then(|| vec![d3]),
        approximate: false,
    }
}

fn normal_gradient(t: &[f64], a: f64) -> Vec<f64> {
    let (mu, sigma) = (t[0], t[1]);
    let z = (a - mu) / sigma;
    let phi = std_normal_pdf(z);
    vec![-phi / sigma, -z * phi / sigma]
}

/// `H = -φ(z)/σ² · [[z, z²-1], [z²-1, z(z²-2)]]` with `z = (a-μ)/σ`.
fn normal_hessian(t: &[f64], a: f64) -> [f64; 4] {
    let (mu, sigma) = (t[0], t[1]);
    let z = (a - mu) / sigma;
    let c = -std_normal_pdf(z) / (sigma * sigma);
    let off = c * (z * z - 1.0);
    [c * z, off, off, c * z * (z * z - 2.0)]
}

fn symmetrize3(t: &[f64], d: usize) -> Vec<f64> {
    let idx = |i: usize, j: usize, k: usize| (i * d + j) * d + k;
    let mut out = vec![0.0; t.len()];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[idx(i, j, k)] = (t[idx(i, j, k)]
                    + t[idx(i, k, j)]
                    + t[idx(j, i, k)]
                    + t[idx(j, k, i)]
                    + t[idx(k, i, j)]
                    + t[idx(k, j, i)])
                    / 6.0;
            }
        }
    }
    out
}

/// Standard normal quantile: rational initial guess refined by Halley steps
/// against the complementary error function.
pub fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail_guess = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    let mut x = if p < P_LOW {
        tail_guess(p)
    } else if p > 1.0 - P_LOW {
        -tail_guess(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = 0.5 * erfc(-x * FRAC_1_SQRT_2) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}
