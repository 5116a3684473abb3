//! Experiment harness: the score metric, the exact dynamic-programming
//! oracle for discrete scenarios, named assessment settings, seeded
//! replications and bucketed score curves written as CSV.

use crate::agent::{random_policy_baseline, train, ScoreLog, TrainConfig, TrainError};
use crate::environment::DiscreteTransition;
use crate::scenario::{AssessmentSpec, KnowledgeState, Scenario, StateMode};
use crate::seeding::{hash_label, substream};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

/// Evaluation metric: 100 * w' s(T) over the TRUE terminal state.
pub fn score(weights: &[f64], terminal_state: &KnowledgeState) -> f64 {
    assert_eq!(weights.len(), terminal_state.len());
    100.0
        * weights
            .iter()
            .zip(terminal_state.values().iter())
            .map(|(w, s)| w * s)
            .sum::<f64>()
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown setting '{0}' (expected Random, Default, NO_DINA, NO_IRT, DINA_<J> or IRT_<J>)")]
    UnknownSetting(String),
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error("{0}")]
    Oracle(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// DP oracle
// ---------------------------------------------------------------------------

/// Exact finite-horizon solution of a discrete scenario: backward induction
/// over (admissible state, time) maximizing the expected terminal score.
/// Serves as the optimality yardstick for training runs.
#[derive(Clone, Debug)]
pub struct DpOracle {
    horizon: usize,
    initial_index: usize,
    /// values[t][s], t in 0..=T.
    values: Vec<Vec<f64>>,
    /// policy[t][s], t in 0..T; ties break toward the lowest action id.
    policy: Vec<Vec<usize>>,
}

impl DpOracle {
    pub fn solve(scenario: &Scenario) -> Result<DpOracle, HarnessError> {
        if scenario.mode() != StateMode::Discrete {
            return Err(HarnessError::Oracle("oracle requires a discrete scenario".into()));
        }
        let transition = DiscreteTransition::from_scenario(scenario).map_err(HarnessError::Oracle)?;
        let n = transition.state_count();
        let t_end = scenario.horizon;
        let terminal: Vec<f64> = (0..n)
            .map(|s| score(&scenario.eval_weights, &transition.knowledge_state(s)))
            .collect();
        let mut values = vec![terminal; t_end + 1];
        let mut policy = vec![vec![0usize; n]; t_end];
        for t in (0..t_end).rev() {
            for s in 0..n {
                let mut best = f64::NEG_INFINITY;
                let mut best_action = 0;
                for a in 0..scenario.action_count() {
                    let expect: f64 = transition
                        .row(a, s)
                        .iter()
                        .zip(values[t + 1].iter())
                        .map(|(p, v)| p * v)
                        .sum();
                    if expect > best {
                        best = expect;
                        best_action = a;
                    }
                }
                values[t][s] = best;
                policy[t][s] = best_action;
            }
        }
        let initial_index = transition
            .index_of(scenario.initial_state.to_mask())
            .ok_or_else(|| HarnessError::Oracle("initial state not admissible".into()))?;
        Ok(DpOracle { horizon: t_end, initial_index, values, policy })
    }

    /// Optimal expected score starting from the scenario's initial state.
    pub fn optimal_value(&self) -> f64 {
        self.values[0][self.initial_index]
    }

    pub fn value_at(&self, state_index: usize, t: usize) -> f64 {
        self.values[t][state_index]
    }

    pub fn optimal_action(&self, state_index: usize, t: usize) -> usize {
        self.policy[t][state_index]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_count(&self) -> usize {
        self.values[0].len()
    }
}

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

/// A named simulation setting: the random baseline or curiosity-driven
/// training under some assessment model.
#[derive(Clone, Debug, PartialEq)]
pub enum Setting {
    Random,
    Curiosity(AssessmentSpec),
}

/// Parses the setting names used across the experiments: `Random`,
/// `Default` (the scenario's own assessment), `NO_DINA`, `NO_IRT`,
/// `DINA_<J>` and `IRT_<J>`.
pub fn parse_setting(name: &str, scenario: &Scenario) -> Result<Setting, HarnessError> {
    let upper = name.to_ascii_uppercase();
    if upper == "RANDOM" {
        return Ok(Setting::Random);
    }
    if upper == "DEFAULT" {
        return Ok(Setting::Curiosity(scenario.assessment.clone()));
    }
    if upper == "NO_DINA" || upper == "NO_IRT" {
        return Ok(Setting::Curiosity(AssessmentSpec::None));
    }
    if let Some(j) = upper.strip_prefix("DINA_") {
        let items: usize =
            j.parse().map_err(|_| HarnessError::UnknownSetting(name.to_string()))?;
        let slip_guess_range = match &scenario.assessment {
            AssessmentSpec::Dina { slip_guess_range, .. } => *slip_guess_range,
            _ => [0.1, 0.3],
        };
        return Ok(Setting::Curiosity(AssessmentSpec::Dina { items, slip_guess_range }));
    }
    if let Some(j) = upper.strip_prefix("IRT_").or_else(|| upper.strip_prefix("M3PL_")) {
        let items: usize =
            j.parse().map_err(|_| HarnessError::UnknownSetting(name.to_string()))?;
        return Ok(Setting::Curiosity(AssessmentSpec::M3pl { items }));
    }
    Err(HarnessError::UnknownSetting(name.to_string()))
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// A batch of independent replications per setting with bucketed curves.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub scenario: Scenario,
    pub settings: Vec<String>,
    pub episodes: usize,
    pub replications: usize,
    /// Episodes averaged per curve point.
    pub bucket_size: usize,
    /// Workers per training run; replications already run in parallel.
    pub workers: usize,
    pub base_seed: u64,
    /// When set, one CSV per setting plus a combined summary land here.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn new(scenario: Scenario, settings: Vec<String>, episodes: usize) -> Self {
        ExperimentPlan {
            scenario,
            settings,
            episodes,
            replications: 10,
            bucket_size: 100,
            workers: 1,
            base_seed: 1,
            out_dir: None,
        }
    }
}

/// Replication-averaged score curve for one setting.
#[derive(Clone, Debug)]
pub struct ScoreCurve {
    pub setting: String,
    pub bucket_size: usize,
    pub replications: usize,
    /// Mean score per bucket, averaged over replications.
    pub mean_scores: Vec<f64>,
    /// Standard error of the per-replication bucket means.
    pub stderr_scores: Vec<f64>,
    /// Mean curiosity reward per bucket.
    pub mean_rewards: Vec<f64>,
}

impl ScoreCurve {
    pub fn buckets(&self) -> usize {
        self.mean_scores.len()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean_scores.last().expect("curve has buckets")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr_scores.last().expect("curve has buckets")
    }

    /// Mean of the first `fraction` of buckets.
    pub fn head_mean(&self, fraction: f64) -> f64 {
        let n = ((self.buckets() as f64 * fraction).round() as usize).clamp(1, self.buckets());
        self.mean_scores[..n].iter().sum::<f64>() / n as f64
    }

    /// Mean of the last `fraction` of buckets.
    pub fn tail_mean(&self, fraction: f64) -> f64 {
        let n = ((self.buckets() as f64 * fraction).round() as usize).clamp(1, self.buckets());
        self.mean_scores[self.buckets() - n..].iter().sum::<f64>() / n as f64
    }
}

/// The seed for one (setting, replication) pair; independent of any other
/// settings in the plan.
pub fn replication_seed(base_seed: u64, setting: &str, replication: usize) -> u64 {
    substream(base_seed ^ hash_label(setting), replication as u64)
}

fn bucket_means(series: &[f64], bucket: usize) -> Vec<f64> {
    series
        .chunks_exact(bucket)
        .map(|c| c.iter().sum::<f64>() / bucket as f64)
        .collect()
}

/// Runs one setting for one replication and returns its episode log.
pub fn run_single(
    scenario: &Scenario,
    setting: &Setting,
    episodes: usize,
    workers: usize,
    seed: u64,
) -> Result<ScoreLog, TrainError> {
    match setting {
        Setting::Random => random_policy_baseline(scenario, episodes, seed),
        Setting::Curiosity(assessment) => {
            let mut config = TrainConfig::new(episodes, seed);
            config.workers = workers;
            config.assessment_override = Some(assessment.clone());
            train(scenario, &config).map(|r| r.log)
        }
    }
}

/// Runs every setting for every replication (replications in parallel),
/// aggregates bucketed curves and, when an output directory is set, writes
/// one CSV per setting plus a combined summary.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<ScoreCurve>, HarnessError> {
    if plan.replications == 0 {
        return Err(HarnessError::InvalidPlan("replications must be at least 1".into()));
    }
    if plan.bucket_size == 0 {
        return Err(HarnessError::InvalidPlan("bucket size must be at least 1".into()));
    }
    let report = plan.scenario.validate();
    if !report.is_valid() {
        return Err(HarnessError::InvalidPlan(report.to_string()));
    }

    let mut curves = Vec::with_capacity(plan.settings.len());
    for name in &plan.settings {
        let setting = parse_setting(name, &plan.scenario)?;
        let per_rep: Vec<(Vec<f64>, Vec<f64>)> = (0..plan.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = replication_seed(plan.base_seed, name, rep);
                let log =
                    run_single(&plan.scenario, &setting, plan.episodes, plan.workers, seed)?;
                Ok((
                    bucket_means(&log.scores, plan.bucket_size),
                    bucket_means(&log.mean_rewards, plan.bucket_size),
                ))
            })
            .collect::<Result<_, TrainError>>()?;

        let buckets = per_rep.first().map_or(0, |(s, _)| s.len());
        let r = plan.replications as f64;
        let mut mean_scores = vec![0.0; buckets];
        let mut stderr_scores = vec![0.0; buckets];
        let mut mean_rewards = vec![0.0; buckets];
        for b in 0..buckets {
            let mean = per_rep.iter().map(|(s, _)| s[b]).sum::<f64>() / r;
            mean_scores[b] = mean;
            mean_rewards[b] = per_rep.iter().map(|(_, rw)| rw[b]).sum::<f64>() / r;
            if plan.replications > 1 {
                let var = per_rep.iter().map(|(s, _)| (s[b] - mean).powi(2)).sum::<f64>()
                    / (r - 1.0);
                stderr_scores[b] = (var / r).sqrt();
            }
        }
        curves.push(ScoreCurve {
            setting: name.clone(),
            bucket_size: plan.bucket_size,
            replications: plan.replications,
            mean_scores,
            stderr_scores,
            mean_rewards,
        });
    }

    if let Some(dir) = &plan.out_dir {
        std::fs::create_dir_all(dir)?;
        for curve in &curves {
            write_curve_csv(dir, curve)?;
        }
        write_summary_csv(dir, &curves)?;
    }
    Ok(curves)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

/// CSV schema: `bucket,episode_end,mean_score,stderr_score,mean_reward`.
pub fn write_curve_csv(dir: &Path, curve: &ScoreCurve) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{}.csv", sanitize(&curve.setting)));
    let mut text = String::from("bucket,episode_end,mean_score,stderr_score,mean_reward\n");
    for b in 0..curve.buckets() {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            b + 1,
            (b + 1) * curve.bucket_size,
            curve.mean_scores[b],
            curve.stderr_scores[b],
            curve.mean_rewards[b],
        ));
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_summary_csv(dir: &Path, curves: &[ScoreCurve]) -> std::io::Result<()> {
    let mut text = String::from(
        "setting,replications,buckets,final_episode,final_mean_score,final_stderr_score,final_mean_reward\n",
    );
    for c in curves {
        if c.buckets() == 0 {
            continue;
        }
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.setting,
            c.replications,
            c.buckets(),
            c.buckets() * c.bucket_size,
            c.final_mean(),
            c.final_stderr(),
            c.mean_rewards.last().unwrap(),
        ));
    }
    std::fs::write(dir.join("summary.csv"), text)
}
