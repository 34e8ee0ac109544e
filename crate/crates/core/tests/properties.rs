use proptest::prelude::*;
use tailgap::convexity::{convexity_at, convexity_threshold, quadratic_form, Verdict};
use tailgap::estimators::{difference_exact, difference_taylor};
use tailgap::posterior::central_moment_quadrature;
use tailgap::special::{erf, erfc, regularized_lower_gamma, regularized_upper_gamma};
use tailgap::{Execution, Family, ParamVector, PosteriorSpec, Sample};

fn positive_sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..20.0, 1..max_len)
}

proptest! {
    #[test]
    fn erf_is_odd_and_complements(x in -30.0f64..30.0) {
        prop_assert_eq!(erf(-x), -erf(x));
        prop_assert!(erf(x).abs() <= 1.0);
        prop_assert!((erf(x) + erfc(x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regularized_gammas_sum_to_one(s in 0.05f64..200.0, x in 0.0f64..400.0) {
        let p = regularized_lower_gamma(s, x).unwrap();
        let q = regularized_upper_gamma(s, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() < 1e-13);
    }

    #[test]
    fn normal_form_matches_bracket(
        mu in -10.0f64..10.0,
        sigma in 0.1f64..5.0,
        z in 0.001f64..8.0,
        v1 in -2.0f64..2.0,
        v2 in -2.0f64..2.0,
        c in 0.1f64..10.0,
    ) {
        prop_assume!(v1.abs() + v2.abs() > 1e-3);
        let theta = ParamVector::new(vec![mu, sigma]);
        let a = mu + z * sigma;
        let q = quadratic_form(&Family::Normal, &theta, a, &[v1, v2]).unwrap();
        let bracket = (v1 * v1 - 2.0 * v2 * v2) * z + 2.0 * v1 * v2 * z * z + v2 * v2 * z.powi(3) - 2.0 * v1 * v2;
        let expected = -(-z * z / 2.0).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma * sigma) * bracket;
        let scale = (-z * z / 2.0).exp() / (sigma * sigma)
            * (v1 * v1 * z + 2.0 * (v1 * v2).abs() * (z * z + 1.0) + v2 * v2 * (z.powi(3) + 2.0 * z));
        prop_assert!((q - expected).abs() <= 1e-12 * scale);
        let scaled = quadratic_form(&Family::Normal, &theta, a, &[c * v1, c * v2]).unwrap();
        prop_assert!((scaled - c * c * q).abs() <= 1e-12 * c * c * scale);
        // never negative definite: the Hessian has eigenvalues of both signs
        let r = convexity_at(&Family::Normal, &theta, a, None).unwrap();
        prop_assert!(r.verdict != Verdict::ConvexTail);
    }

    #[test]
    fn one_dimensional_verdicts_follow_second_derivative(lam in 0.05f64..10.0, ratio in 0.01f64..10.0, alpha in 0.01f64..0.999, b in 1.0001f64..1e8) {
        let a = ratio * lam;
        let r = convexity_at(&Family::Exponential, &ParamVector::scalar(lam), a, None).unwrap();
        let expected = if ratio > 2.0 { Verdict::ConvexTail } else if ratio < 2.0 { Verdict::ConcaveTail } else { Verdict::Indefinite };
        prop_assert_eq!(r.verdict, expected);
        let r = convexity_at(&Family::Pareto, &ParamVector::scalar(alpha), b, None).unwrap();
        prop_assert_eq!(r.verdict, Verdict::ConvexTail);
    }

    #[test]
    fn exponential_threshold_is_twice_lambda(lam in 0.1f64..50.0, grid in 10usize..80) {
        let theta = ParamVector::scalar(lam);
        let coarse = convexity_threshold(&Family::Exponential, &theta, (0.0, 10.0 * lam), grid, Execution::Sequential).unwrap().unwrap();
        let fine = convexity_threshold(&Family::Exponential, &theta, (0.0, 10.0 * lam), 2 * grid, Execution::Parallel).unwrap().unwrap();
        prop_assert!(((coarse - 2.0 * lam) / (2.0 * lam)).abs() < 1e-9);
        prop_assert!(((coarse - fine) / fine).abs() < 1e-6);
    }

    #[test]
    fn exponential_estimators_are_ordered_and_monotone(values in positive_sample(60), a1 in 0.01f64..50.0, da in 0.0f64..50.0) {
        let spec = PosteriorSpec::with_default_prior(Family::Exponential, Sample::new(values).unwrap()).unwrap();
        let c1 = difference_exact(&spec, a1).unwrap();
        let c2 = difference_exact(&spec, a1 + da).unwrap();
        prop_assert!(c1.bayes_dominates);
        prop_assert_eq!(c1.d_exact, c1.p_bayes - c1.p_freq);
        prop_assert!((0.0..=1.0).contains(&c1.p_bayes) && (0.0..=1.0).contains(&c1.p_freq));
        prop_assert!(c2.p_bayes <= c1.p_bayes && c2.p_freq <= c1.p_freq);
    }

    #[test]
    fn pareto_bayes_dominates_inside_the_model(values in prop::collection::vec(1.0f64..1e4, 2..40), b in 1.001f64..1e9) {
        let spec = PosteriorSpec::with_default_prior(Family::Pareto, Sample::new(values).unwrap());
        prop_assume!(spec.is_ok());
        let spec = spec.unwrap();
        prop_assume!(!spec.mle().out_of_model);
        prop_assert!(difference_exact(&spec, b).unwrap().bayes_dominates);
    }

    #[test]
    fn taylor_terms_sum(values in prop::collection::vec(0.1f64..5.0, 4..40), a in 0.5f64..30.0) {
        let spec = PosteriorSpec::with_default_prior(Family::Exponential, Sample::new(values).unwrap()).unwrap();
        let t = difference_taylor(&spec, a).unwrap().taylor.unwrap();
        prop_assert_eq!(t.d_taylor, t.term1 + t.term2 + t.term3);
        prop_assert!(t.diagnostics.remainder_magnitude_bound >= t.term3.abs() * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponential_posterior_normalizes(values in positive_sample(100)) {
        let spec = PosteriorSpec::with_default_prior(Family::Exponential, Sample::new(values).unwrap()).unwrap();
        let mass = central_moment_quadrature(&spec, &[], 1e-10).unwrap();
        prop_assert!((mass - 1.0).abs() < 1e-8);
    }
}
