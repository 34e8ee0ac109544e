//! Adaptive Gauss–Kronrod (7/15) quadrature with interval mappings for
//! semi-infinite and infinite ranges, plus a nested driver for
//! two-parameter posteriors.
//!
//! Subdivision always bisects the interval with the largest error estimate
//! (lowest index on ties) and results are summed in interval order, so the
//! output is a deterministic function of the integrand.

use std::cell::RefCell;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Absolute error floor; below this every integral counts as converged.
pub const ABS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_subintervals: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs()).max(ABS_FLOOR)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subintervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::Underflow(format!(
            "integrand not finite on [{lo}, {hi}]"
        )));
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    Ok(Segment {
        lo,
        hi,
        value: res_k * half,
        error: rescale_error(err, res_abs, res_asc),
    })
}

/// Integrate `f` over the finite interval `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "finite integration bounds required, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            subintervals: 0,
        });
    }
    let mut segments = vec![kronrod15(&f, lo, hi)?];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= cfg.target(value) {
            return Ok(Quadrature {
                value,
                abs_error: error,
                evaluations,
                subintervals: segments.len(),
            });
        }
        let worst = segments.iter().enumerate().fold(0, |best, (i, s)| {
            if s.error > segments[best].error {
                i
            } else {
                best
            }
        });
        let seg = segments[worst];
        let mid = 0.5 * (seg.lo + seg.hi);
        if segments.len() >= cfg.max_subintervals || mid <= seg.lo || mid >= seg.hi {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                achieved: error / value.abs().max(ABS_FLOOR),
                requested: cfg.rel_tol,
            });
        }
        let left = kronrod15(&f, seg.lo, mid)?;
        let right = kronrod15(&f, mid, seg.hi)?;
        evaluations += 30;
        segments[worst] = left;
        segments.insert(worst + 1, right);
    }
}

/// An integration range, possibly unbounded, with a location and scale hint
/// used to place the mapped variable's mass near the middle of its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub scale: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64, center: f64, scale: f64) -> Self {
        Self {
            lo,
            hi,
            center,
            scale,
        }
    }

    pub fn finite(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, 0.5 * (lo + hi), hi - lo)
    }
}

/// Integrate over a possibly unbounded range. Semi-infinite ranges use
/// `x = lo + s·t/(1-t)`, the full line uses `x = c + s·t/(1-t²)`.
pub fn integrate_range<F: Fn(f64) -> f64>(
    f: F,
    range: &Range,
    cfg: &QuadratureConfig,
) -> Result<Quadrature> {
    let Range {
        lo,
        hi,
        center,
        scale,
    } = *range;
    let scale = if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => integrate(f, lo, hi, cfg),
        (true, false) => integrate(
            |t: f64| {
                let w = 1.0 - t;
                if w <= 0.0 {
                    return 0.0;
                }
                let v = f(lo + scale * t / w);
                if v == 0.0 {
                    0.0
                } else {
                    v * scale / (w * w)
                }
            },
            0.0,
            1.0,
            cfg,
        ),
        (false, true) => integrate(
            |t: f64| {
                let w = 1.0 - t;
                if w <= 0.0 {
                    return 0.0;
                }
                let v = f(hi - scale * t / w);
                if v == 0.0 {
                    0.0
                } else {
                    v * scale / (w * w)
                }
            },
            0.0,
            1.0,
            cfg,
        ),
        (false, false) => integrate(
            |t: f64| {
                let w = 1.0 - t * t;
                if w <= 0.0 {
                    return 0.0;
                }
                let v = f(center + scale * t / w);
                if v == 0.0 {
                    0.0
                } else {
                    v * scale * (1.0 + t * t) / (w * w)
                }
            },
            -1.0,
            1.0,
            cfg,
        ),
    }
}

/// Iterated integral `∫ ∫ f(x, y) dy dx` with the inner range depending on `x`.
pub fn integrate_nested<F, R>(
    f: F,
    outer: &Range,
    inner: R,
    cfg: &QuadratureConfig,
) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> f64,
    R: Fn(f64) -> Range,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evaluations = RefCell::new(0usize);
    let inner_cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol * 0.1,
        ..*cfg
    };
    let outer_result = integrate_range(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match integrate_range(|y| f(x, y), &inner(x), &inner_cfg) {
                Ok(q) => {
                    *evaluations.borrow_mut() += q.evaluations;
                    q.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        outer,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    outer_result.map(|q| Quadrature {
        evaluations: evaluations.into_inner(),
        ..q
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(
            |x| x.powi(5) - 2.0 * x,
            0.0,
            2.0,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(q.value, 64.0 / 6.0 - 4.0, max_relative = 1e-14);
        assert_eq!(q.subintervals, 1);
    }

    #[test]
    fn semi_infinite_and_full_line() {
        let cfg = QuadratureConfig::default();
        let q = integrate_range(
            |x| (-x).exp(),
            &Range::new(0.0, f64::INFINITY, 1.0, 1.0),
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-10);
        let q = integrate_range(
            |x| (-x * x).exp(),
            &Range::new(f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0),
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(q.value, PI.sqrt(), max_relative = 1e-10);
        let q = integrate_range(
            |x| x.exp(),
            &Range::new(f64::NEG_INFINITY, 0.0, -1.0, 1.0),
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn peaked_integrand_converges() {
        let cfg = QuadratureConfig::with_rel_tol(1e-11);
        let q = integrate(|x| 1.0 / (1e-4 + (x - 0.3).powi(2)), 0.0, 1.0, &cfg).unwrap();
        let exact = ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan()) / 1e-2;
        assert_relative_eq!(q.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn nested_gaussian() {
        let cfg = QuadratureConfig::with_rel_tol(1e-9);
        let full = Range::new(f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0);
        let q =
            integrate_nested(|x, y| (-(x * x + y * y) / 2.0).exp(), &full, |_| full, &cfg).unwrap();
        assert_relative_eq!(q.value, 2.0 * PI, max_relative = 1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = QuadratureConfig {
            max_subintervals: 4,
            ..QuadratureConfig::default()
        };
        let err = integrate(|x| (1.0 / x).sin() / x, 1e-6, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn bit_identical_reruns() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| (x * 3.0).sin().abs() * (-x).exp();
        let a = integrate(f, 0.0, 10.0, &cfg).unwrap();
        let b = integrate(f, 0.0, 10.0, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
