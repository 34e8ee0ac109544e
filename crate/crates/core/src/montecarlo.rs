//! Seeded repeated-sampling experiments comparing the two estimators.
//!
//! Replication `r` draws from a ChaCha8 stream keyed by `(seed, r)`, so a
//! replication's sample does not depend on which thread runs it or in what
//! order. Aggregation runs in replication order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::difference_exact;
use crate::exec::{map_indexed, Execution};
use crate::family::{Family, ParamVector, Sample};
use crate::posterior::PosteriorSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum ARule {
    /// Thresholds given directly.
    FixedList(Vec<f64>),
    /// Thresholds at these quantiles of the true distribution.
    QuantileOfTruth(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: Family,
    pub true_theta: ParamVector,
    pub n: usize,
    pub reps: usize,
    pub a_rule: ARule,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.n == 0 {
            return bad("sample size must be at least 1".into());
        }
        self.family
            .check_theta(&self.true_theta)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        match &self.a_rule {
            ARule::FixedList(a) if a.iter().any(|x| !x.is_finite()) => {
                bad("thresholds must be finite".into())
            }
            ARule::QuantileOfTruth(p) if p.iter().any(|&p| !(p > 0.0 && p < 1.0)) => {
                bad("quantile probabilities must lie in (0, 1)".into())
            }
            _ => Ok(()),
        }
    }

    /// The threshold list the rule resolves to.
    pub fn thresholds(&self) -> Result<Vec<f64>> {
        match &self.a_rule {
            ARule::FixedList(a) => Ok(a.clone()),
            ARule::QuantileOfTruth(ps) => ps
                .iter()
                .map(|&p| self.family.quantile(&self.true_theta, p))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSummary {
    pub a: f64,
    /// Fraction of replications with `P_B > P_F` (decided in log space).
    pub frac_bayes_higher: f64,
    pub mean_d: f64,
    /// Mean of `ln P_B - ln P_F`.
    pub mean_log_ratio: f64,
    pub true_tail: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub per_a: Vec<ThresholdSummary>,
    /// Replications excluded: degenerate or out-of-model MLE, or a numeric
    /// failure in either estimator.
    pub rep_failures: usize,
    pub reps_used: usize,
}

/// Random stream for one replication.
pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// `n` i.i.d. draws: inverse CDF for Exponential, Pareto and generic
/// families, a standard normal generator for Normal.
pub fn sample_family<R: Rng + ?Sized>(
    family: &Family,
    theta: &ParamVector,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    family.check_theta(theta)?;
    let t = theta.coords();
    let values: Vec<f64> = match family {
        Family::Exponential => (0..n)
            .map(|_| -t[0] * (1.0 - rng.random::<f64>()).ln())
            .collect(),
        Family::Pareto => (0..n)
            .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / t[0]))
            .collect(),
        Family::Normal => (0..n)
            .map(|_| t[0] + t[1] * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        Family::Generic(_) => {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let u: f64 = rng.random();
                out.push(family.quantile(theta, u.max(f64::MIN_POSITIVE))?);
            }
            out
        }
    };
    Sample::new(values)
}

struct RepOutcome {
    d: Vec<f64>,
    log_ratio: Vec<f64>,
    higher: Vec<bool>,
}

fn run_rep(config: &ExperimentConfig, thresholds: &[f64], rep: usize) -> Result<RepOutcome> {
    let mut rng = rep_rng(config.seed, rep as u64);
    let sample = sample_family(&config.family, &config.true_theta, config.n, &mut rng)?;
    let spec = PosteriorSpec::with_default_prior(config.family.clone(), sample)?;
    if spec.mle().out_of_model {
        return Err(Error::Domain(
            "MLE outside the model parameter space".into(),
        ));
    }
    let mut out = RepOutcome {
        d: Vec::with_capacity(thresholds.len()),
        log_ratio: Vec::with_capacity(thresholds.len()),
        higher: Vec::with_capacity(thresholds.len()),
    };
    for &a in thresholds {
        let c = difference_exact(&spec, a)?;
        out.d.push(c.d_exact);
        out.log_ratio.push(c.log_ratio());
        out.higher.push(c.bayes_dominates);
    }
    Ok(out)
}

pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentSummary> {
    config.validate()?;
    let thresholds = config.thresholds()?;
    let outcomes = map_indexed(config.reps, exec, |r| run_rep(config, &thresholds, r));

    let k = thresholds.len();
    let mut higher = vec![0usize; k];
    let mut sum_d = vec![0.0; k];
    let mut sum_lr = vec![0.0; k];
    let mut used = 0usize;
    for o in outcomes.iter().flatten() {
        used += 1;
        for j in 0..k {
            higher[j] += usize::from(o.higher[j]);
            sum_d[j] += o.d[j];
            sum_lr[j] += o.log_ratio[j];
        }
    }
    if used == 0 {
        return Err(Error::InvalidConfig(format!(
            "all {} replications failed; first error: {}",
            config.reps,
            outcomes
                .iter()
                .find_map(|o| o.as_ref().err())
                .map_or_else(String::new, ToString::to_string)
        )));
    }
    let per_a = thresholds
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            Ok(ThresholdSummary {
                a,
                frac_bayes_higher: higher[j] as f64 / used as f64,
                mean_d: sum_d[j] / used as f64,
                mean_log_ratio: sum_lr[j] / used as f64,
                true_tail: config.family.tail(&config.true_theta, a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSummary {
        per_a,
        rep_failures: config.reps - used,
        reps_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{p_bayes, p_frequentist};

    fn exp_config(reps: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            family: Family::Exponential,
            true_theta: ParamVector::scalar(1.0),
            n: 20,
            reps,
            a_rule: ARule::QuantileOfTruth(vec![0.9, 0.99, 0.999, 0.9999]),
            seed,
        }
    }

    #[test]
    fn exponential_draws_have_the_right_mean() {
        let mut rng = rep_rng(7, 0);
        let s = sample_family(
            &Family::Exponential,
            &ParamVector::scalar(1.0),
            100_000,
            &mut rng,
        )
        .unwrap();
        assert!((s.mean() - 1.0).abs() < 3.0 / (100_000f64).sqrt());
    }

    #[test]
    fn pareto_draws_respect_support() {
        let mut rng = rep_rng(7, 1);
        let s =
            sample_family(&Family::Pareto, &ParamVector::scalar(0.5), 10_000, &mut rng).unwrap();
        assert!(s.values().iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn normal_draws_moments() {
        let mut rng = rep_rng(3, 0);
        let s = sample_family(
            &Family::Normal,
            &ParamVector::new(vec![2.0, 0.5]),
            50_000,
            &mut rng,
        )
        .unwrap();
        assert!((s.mean() - 2.0).abs() < 3.0 * 0.5 / (50_000f64).sqrt());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, rep| {
            let mut rng = rep_rng(seed, rep);
            sample_family(&Family::Exponential, &ParamVector::scalar(1.0), 5, &mut rng).unwrap()
        };
        assert_eq!(draw(11, 4), draw(11, 4));
        assert_ne!(draw(11, 4), draw(11, 5));
        assert_ne!(draw(11, 4), draw(12, 4));
    }

    #[test]
    fn single_rep_matches_direct_calls() {
        let cfg = ExperimentConfig {
            a_rule: ARule::FixedList(vec![2.0, 6.0]),
            reps: 1,
            ..exp_config(1, 99)
        };
        let summary = run_experiment(&cfg, Execution::Sequential).unwrap();
        let sample =
            sample_family(&cfg.family, &cfg.true_theta, cfg.n, &mut rep_rng(99, 0)).unwrap();
        let spec = PosteriorSpec::with_default_prior(Family::Exponential, sample).unwrap();
        for s in &summary.per_a {
            let d = p_bayes(&spec, s.a).unwrap() - p_frequentist(&spec, s.a).unwrap();
            assert_eq!(s.mean_d, d);
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let cfg = exp_config(300, 5);
        let a = run_experiment(&cfg, Execution::Sequential).unwrap();
        let b = run_experiment(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pareto_out_of_model_reps_are_excluded() {
        let cfg = ExperimentConfig {
            family: Family::Pareto,
            true_theta: ParamVector::scalar(0.95),
            n: 5,
            reps: 200,
            a_rule: ARule::QuantileOfTruth(vec![0.99]),
            seed: 1,
        };
        let s = run_experiment(&cfg, Execution::Parallel).unwrap();
        assert!(s.rep_failures > 0);
        assert_eq!(s.rep_failures + s.reps_used, 200);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = exp_config(0, 1);
        assert!(matches!(
            run_experiment(&cfg, Execution::Sequential),
            Err(Error::InvalidConfig(_))
        ));
        cfg.reps = 5;
        cfg.a_rule = ARule::QuantileOfTruth(vec![1.0]);
        assert!(matches!(
            run_experiment(&cfg, Execution::Sequential),
            Err(Error::InvalidConfig(_))
        ));
        // α̂ = 1/ln(x) ≥ 1 in every replication
        let cfg = ExperimentConfig {
            family: Family::Pareto,
            true_theta: ParamVector::scalar(50.0),
            n: 3,
            reps: 10,
            a_rule: ARule::FixedList(vec![2.0]),
            seed: 0,
        };
        assert!(matches!(
            run_experiment(&cfg, Execution::Sequential),
            Err(Error::InvalidConfig(_))
        ));
    }
}
