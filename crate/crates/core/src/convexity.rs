//! Convexity of the tail `φ(θ) = 1 - F(a|θ)` in the parameter, i.e.
//! negative definiteness of `H_θ F(a|θ)`, plus a numerical Jensen check.

use crate::error::{domain, Result};
use crate::estimators::bayes_tail;
use crate::exec::{map_indexed, Execution};
use crate::family::{Family, ParamVector};
use crate::posterior::{moments_closed, moments_quadrature, posterior_mean, PosteriorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Every eigenvalue of `H_θ F` is below `-tol`.
    ConvexTail,
    Indefinite,
    /// Every eigenvalue of `H_θ F` is above `tol`.
    ConcaveTail,
}

impl Verdict {
    /// Numeric code used in tabular output: 1, 0, -1.
    pub fn code(self) -> i8 {
        match self {
            Verdict::ConvexTail => 1,
            Verdict::Indefinite => 0,
            Verdict::ConcaveTail => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub a: f64,
    pub theta: ParamVector,
    /// Row-major, symmetric.
    pub hessian: Vec<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub max_eigenvalue: f64,
    pub verdict: Verdict,
    pub tol: f64,
}

/// Eigenvalues of a symmetric 1×1 or 2×2 matrix, ascending.
pub fn symmetric_eigenvalues(h: &[f64]) -> Result<Vec<f64>> {
    match h.len() {
        1 => Ok(vec![h[0]]),
        4 => {
            let (p, q, r) = (h[0], 0.5 * (h[1] + h[2]), h[3]);
            let mid = 0.5 * (p + r);
            let rad = (0.5 * (p - r)).hypot(q);
            Ok(vec![mid - rad, mid + rad])
        }
        len => domain(format!("expected a 1×1 or 2×2 matrix, got {len} entries")),
    }
}

/// Eigen-decomposition of `H_θ F(a|θ)` and the resulting verdict. With no
/// `tol`, `1e-12·‖H‖_F` is used.
pub fn convexity_at(
    family: &Family,
    theta: &ParamVector,
    a: f64,
    tol: Option<f64>,
) -> Result<ConvexityReport> {
    let hessian = family.hessian(theta, a)?;
    let eigenvalues = symmetric_eigenvalues(&hessian)?;
    let tol = match tol {
        Some(t) if t >= 0.0 => t,
        Some(t) => return domain(format!("tolerance must be non-negative, got {t}")),
        None => 1e-12 * hessian.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    let (lo, hi) = (eigenvalues[0], *eigenvalues.last().expect("non-empty"));
    let verdict = if hi < -tol {
        Verdict::ConvexTail
    } else if lo > tol {
        Verdict::ConcaveTail
    } else {
        Verdict::Indefinite
    };
    Ok(ConvexityReport {
        a,
        theta: theta.clone(),
        hessian,
        eigenvalues,
        max_eigenvalue: hi,
        verdict,
        tol,
    })
}

/// `vᵀ H_θ F(a|θ) v`.
pub fn quadratic_form(family: &Family, theta: &ParamVector, a: f64, v: &[f64]) -> Result<f64> {
    let d = family.param_dim();
    if v.len() != d {
        return domain(format!(
            "direction has {} entries, parameter has {d}",
            v.len()
        ));
    }
    if v.iter().all(|&x| x == 0.0) {
        return domain("direction must be non-zero");
    }
    let h = family.hessian(theta, a)?;
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += v[i] * h[i * d + j] * v[j];
        }
    }
    Ok(s)
}

fn is_convex(family: &Family, theta: &ParamVector, a: f64) -> bool {
    convexity_at(family, theta, a, None).is_ok_and(|r| r.verdict == Verdict::ConvexTail)
}

/// Smallest `a*` in `[lo, hi]` such that the verdict is `ConvexTail` at
/// every scanned `a ≥ a*`, refined by bisection to about 1e-12 relative.
/// `None` when the tail is not convex at the top of the range.
pub fn convexity_threshold(
    family: &Family,
    theta: &ParamVector,
    range: (f64, f64),
    grid_size: usize,
    exec: Execution,
) -> Result<Option<f64>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return domain(format!("invalid threshold range ({lo}, {hi})"));
    }
    if lo < family.support_lower() {
        return domain(format!(
            "range starts at {lo}, below the support edge {}",
            family.support_lower()
        ));
    }
    if grid_size < 2 {
        return domain("grid_size must be at least 2");
    }
    family.check_theta(theta)?;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| lo + (hi - lo) * i as f64 / (grid_size - 1) as f64)
        .collect();
    let convex = map_indexed(grid_size, exec, |i| is_convex(family, theta, grid[i]));
    let Some(first) = (0..grid_size).rev().take_while(|&i| convex[i]).last() else {
        return Ok(None);
    };
    if first == 0 {
        return Ok(Some(lo));
    }
    let (mut left, mut right) = (grid[first - 1], grid[first]);
    while right - left > 1e-12 * right.abs().max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (left + right);
        if mid <= left || mid >= right {
            break;
        }
        if is_convex(family, theta, mid) {
            right = mid;
        } else {
            left = mid;
        }
    }
    Ok(Some(right))
}

/// Numerical check of `φ(E[θ]) ≤ E[φ(θ)]` and `φ(θ̂) ≤ E[φ(θ)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenCheck {
    pub a: f64,
    /// `E[φ(θ)] = P_B(X > a)`.
    pub e_phi: f64,
    pub phi_of_mean: f64,
    pub phi_of_mle: f64,
    pub posterior_mean: ParamVector,
    /// `ConvexTail` at every scanned point of the ±6√m2 box around θ̂.
    pub convex_over_support: bool,
    /// `e_phi - phi_of_mean ≥ -1e-12`, reported only when
    /// `convex_over_support` holds.
    pub jensen_holds: Option<bool>,
}

impl JensenCheck {
    pub fn gap_to_mle(&self) -> f64 {
        self.e_phi - self.phi_of_mle
    }
}

pub fn jensen_check(spec: &PosteriorSpec, a: f64) -> Result<JensenCheck> {
    let family = spec.family();
    let e_phi = bayes_tail(spec, a)?.p;
    let mean = posterior_mean(spec)?;
    let phi_of_mean = family.tail(&mean, a)?;
    let phi_of_mle = family.tail(spec.theta_hat(), a)?;
    let convex_over_support = convex_over_posterior(spec, a)?;
    Ok(JensenCheck {
        a,
        e_phi,
        phi_of_mean,
        phi_of_mle,
        posterior_mean: mean,
        convex_over_support,
        jensen_holds: convex_over_support.then_some(e_phi - phi_of_mean >= -1e-12),
    })
}

fn convex_over_posterior(spec: &PosteriorSpec, a: f64) -> Result<bool> {
    let family = spec.family();
    let d = spec.dim();
    let m2 = match moments_closed(spec) {
        Ok(m) => m.m2,
        Err(_) => moments_quadrature(spec, 2)?.m2,
    }
    .expect("second moments requested");
    let support = family.param_domain();
    let hat = spec.theta_hat();
    let points = if d == 1 { 61 } else { 13 };
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let r = 6.0 * m2[i * d + i].sqrt();
            (0..points)
                .map(|k| hat.get(i) - r + 2.0 * r * k as f64 / (points - 1) as f64)
                .filter(|&x| support[i].contains(x))
                .collect()
        })
        .collect();
    let ok = if d == 1 {
        axes[0]
            .iter()
            .all(|&x| is_convex(family, &ParamVector::scalar(x), a))
    } else {
        axes[0].iter().all(|&x| {
            axes[1]
                .iter()
                .all(|&y| is_convex(family, &ParamVector::new(vec![x, y]), a))
        })
    };
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Sample;
    use approx::assert_relative_eq;

    #[test]
    fn one_dimensional_verdicts() {
        for alpha in [0.05, 0.3, 0.5, 0.99] {
            let r = convexity_at(&Family::Pareto, &ParamVector::scalar(alpha), 10.0, None).unwrap();
            assert_eq!(r.verdict, Verdict::ConvexTail);
            assert_relative_eq!(
                r.max_eigenvalue,
                -(10f64.powf(-alpha)) * 10f64.ln().powi(2),
                max_relative = 1e-14
            );
        }
        let one = ParamVector::scalar(1.0);
        assert_eq!(
            convexity_at(&Family::Exponential, &one, 1.0, None)
                .unwrap()
                .verdict,
            Verdict::ConcaveTail
        );
        let edge = convexity_at(&Family::Exponential, &one, 2.0, None).unwrap();
        assert_eq!(edge.max_eigenvalue, 0.0);
        assert_eq!(edge.verdict, Verdict::Indefinite);
        assert_eq!(
            convexity_at(&Family::Exponential, &one, 3.0, None)
                .unwrap()
                .verdict,
            Verdict::ConvexTail
        );
    }

    #[test]
    fn normal_is_never_negative_definite() {
        let theta = ParamVector::new(vec![0.0, 1.0]);
        for a in [0.5, 1.0, 2.0, 3.0, 5.0, 8.0] {
            let r = convexity_at(&Family::Normal, &theta, a, None).unwrap();
            assert_eq!(r.verdict, Verdict::Indefinite, "a = {a}");
            assert!(r.eigenvalues[0] < 0.0 && r.eigenvalues[1] > 0.0);
        }
        let got = convexity_threshold(
            &Family::Normal,
            &theta,
            (0.0, 10.0),
            200,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(got, None);
    }

    #[test]
    fn normal_quadratic_form_example() {
        let theta = ParamVector::new(vec![0.0, 1.0]);
        let q = quadratic_form(&Family::Normal, &theta, 5.0, &[0.0, 1.0]).unwrap();
        let expected = -(-12.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt() * 115.0;
        assert_relative_eq!(q, expected, max_relative = 1e-12);
        let q3 = quadratic_form(&Family::Normal, &theta, 5.0, &[0.0, 3.0]).unwrap();
        assert_relative_eq!(q3, 9.0 * q, max_relative = 1e-14);
        assert!(quadratic_form(&Family::Normal, &theta, 5.0, &[0.0, 0.0]).is_err());
        let h = Family::Exponential
            .hessian(&ParamVector::scalar(2.0), 7.0)
            .unwrap()[0];
        let q = quadratic_form(
            &Family::Exponential,
            &ParamVector::scalar(2.0),
            7.0,
            &[-1.5],
        )
        .unwrap();
        assert_relative_eq!(q, 2.25 * h, max_relative = 1e-15);
    }

    #[test]
    fn thresholds() {
        let one = ParamVector::scalar(1.0);
        for grid in [50, 100] {
            let a = convexity_threshold(
                &Family::Exponential,
                &one,
                (0.0, 10.0),
                grid,
                Execution::Parallel,
            )
            .unwrap()
            .unwrap();
            assert!((a - 2.0).abs() < 1e-9, "{a}");
        }
        let lam = ParamVector::scalar(3.5);
        let a = convexity_threshold(
            &Family::Exponential,
            &lam,
            (0.5, 40.0),
            37,
            Execution::Sequential,
        )
        .unwrap()
        .unwrap();
        assert_relative_eq!(a, 7.0, max_relative = 1e-9);

        let a = convexity_threshold(
            &Family::Pareto,
            &ParamVector::scalar(0.5),
            (1.001, 100.0),
            50,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(a, Some(1.001));
        assert!(convexity_threshold(
            &Family::Pareto,
            &ParamVector::scalar(0.5),
            (0.5, 100.0),
            50,
            Execution::Sequential
        )
        .is_err());
        assert_eq!(
            convexity_threshold(
                &Family::Exponential,
                &one,
                (0.1, 1.5),
                20,
                Execution::Sequential
            )
            .unwrap(),
            None
        );
    }

    #[test]
    fn jensen_convex_regime() {
        let spec = PosteriorSpec::with_default_prior(
            Family::Exponential,
            Sample::new(vec![1.0; 10]).unwrap(),
        )
        .unwrap();
        let j = jensen_check(&spec, 5.0).unwrap();
        assert!(j.e_phi >= j.phi_of_mean && j.e_phi >= j.phi_of_mle);
        assert_relative_eq!(j.posterior_mean.get(0), 10.0 / 9.0, max_relative = 1e-9);

        let j = jensen_check(&spec, 0.5).unwrap();
        assert!(!j.convex_over_support);
        assert_eq!(j.jensen_holds, None);
    }

    #[test]
    fn jensen_near_point_mass() {
        let spec = PosteriorSpec::with_default_prior(
            Family::Exponential,
            Sample::new(vec![1.0; 1_000_000]).unwrap(),
        )
        .unwrap();
        let j = jensen_check(&spec, 3.0).unwrap();
        assert_relative_eq!(j.e_phi, j.phi_of_mle, max_relative = 1e-5);
        assert_relative_eq!(j.phi_of_mean, j.phi_of_mle, max_relative = 1e-5);
    }
}
