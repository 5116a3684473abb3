//! Actor-critic policy learner. The policy network maps the state estimate
//! to action probabilities, the value network supplies the baseline, and
//! episodes end in one joint update: undiscounted returns by backward
//! recursion, least-squares critic gradient, log-probability-weighted
//! policy gradient. Training distributes episodes over workers that
//! snapshot the global parameters, roll a trajectory with per-step
//! curiosity rewards and predictor updates, and apply their gradients back
//! to the globals as whole Adam steps.

use crate::assessment::assessor_for;
use crate::curiosity::{curiosity_reward, Predictor, ReplayMemory, Transition, TransitionBatch};
use crate::environment::{run_episode, EpisodeRng, Policy, Rewarder, Simulator, ZeroReward};
use crate::harness::score;
use crate::neuralnet::{adam_step, adam_step_scaled, AdamState, Head, Mlp, Trace};
use crate::scenario::{AssessmentSpec, KnowledgeState, Scenario, StateMode};
use crate::seeding::substream;
use rand::{Rng, SeedableRng};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Actor and critic learning rate in the discrete case.
pub const DISCRETE_ACTOR_CRITIC_LR: f64 = 0.0006;
/// Actor and critic learning rate in the continuous cases.
pub const CONTINUOUS_ACTOR_CRITIC_LR: f64 = 0.0005;
/// Predictor learning rate in the discrete case.
pub const DISCRETE_PREDICTOR_LR: f64 = 0.006;
/// Predictor learning rate in the continuous cases.
pub const CONTINUOUS_PREDICTOR_LR: f64 = 0.002;

/// Softmax policy over the action space: three ReLU hidden layers.
#[derive(Clone, Debug)]
pub struct PolicyNet {
    net: Mlp,
    adam: AdamState,
}

impl PolicyNet {
    pub fn new(k: usize, actions: usize, width: usize, lr: f64, rng: &mut EpisodeRng) -> Self {
        let net = Mlp::new(&[k, width, width, width, actions], Head::Softmax, rng);
        let adam = AdamState::new(lr, net.param_count());
        PolicyNet { net, adam }
    }

    /// Wraps an existing softmax network (checkpoints, tests).
    pub fn with_net(net: Mlp, lr: f64) -> Self {
        assert_eq!(net.head(), Head::Softmax, "policy net needs a softmax head");
        let adam = AdamState::new(lr, net.param_count());
        PolicyNet { net, adam }
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn action_count(&self) -> usize {
        self.net.output_dim()
    }

    pub fn probs(&self, estimate: &[f64]) -> Vec<f64> {
        self.net.forward(estimate)
    }

    /// Forward pass into a caller-owned trace; avoids allocation in loops.
    pub fn probs_with<'t>(&self, estimate: &[f64], trace: &'t mut Trace) -> &'t [f64] {
        self.net.forward_trace(estimate, trace);
        trace.output()
    }

    /// One Adam step in the ASCENT direction of the supplied gradient.
    pub fn apply_ascent(&mut self, ascent_grads: &[f64]) {
        adam_step_scaled(self.net.params_mut(), ascent_grads, -1.0, &mut self.adam);
    }

    /// Syncs parameters and optimizer state from the global set.
    pub fn sync_from(&mut self, other: &PolicyNet) {
        self.net.copy_params_from(&other.net);
        self.adam.sync_from(&other.adam);
    }
}

/// Scalar state-value approximation: three ReLU hidden layers.
#[derive(Clone, Debug)]
pub struct ValueNet {
    net: Mlp,
    adam: AdamState,
}

impl ValueNet {
    pub fn new(k: usize, width: usize, lr: f64, rng: &mut EpisodeRng) -> Self {
        let net = Mlp::new(&[k, width, width, width, 1], Head::Identity, rng);
        let adam = AdamState::new(lr, net.param_count());
        ValueNet { net, adam }
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn value(&self, estimate: &[f64]) -> f64 {
        self.net.forward(estimate)[0]
    }

    /// Forward pass into a caller-owned trace; avoids allocation in loops.
    pub fn value_with(&self, estimate: &[f64], trace: &mut Trace) -> f64 {
        self.net.forward_trace(estimate, trace);
        trace.output()[0]
    }

    /// One Adam step minimizing along the supplied loss gradient.
    pub fn apply_gradient(&mut self, grads: &[f64]) {
        adam_step(self.net.params_mut(), grads, &mut self.adam);
    }

    /// Syncs parameters and optimizer state from the global set.
    pub fn sync_from(&mut self, other: &ValueNet) {
        self.net.copy_params_from(&other.net);
        self.adam.sync_from(&other.adam);
    }
}

/// Draws an action from the policy's softmax distribution.
pub fn sample_action(policy: &PolicyNet, estimate: &KnowledgeState, rng: &mut EpisodeRng) -> usize {
    let probs = policy.probs(estimate.values());
    let mut u: f64 = rng.random();
    for (a, &p) in probs.iter().enumerate() {
        if u < p {
            return a;
        }
        u -= p;
    }
    probs.len() - 1
}

/// Undiscounted returns by backward recursion: r(i) = R(i) + r(i+1),
/// seeded with 0 at a true terminal state or the bootstrap value.
pub fn compute_returns(rewards: &[f64], terminal_value: f64) -> Vec<f64> {
    assert!(!rewards.is_empty(), "returns need at least one reward");
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = terminal_value;
    for (i, &r) in rewards.iter().enumerate().rev() {
        acc += r;
        returns[i] = acc;
    }
    returns
}

/// Multi-step advantage: achieved return minus the critic's estimate.
/// Positive means the action earned more than expected and should be
/// reinforced.
pub fn advantage(r_return: f64, value_estimate: f64) -> f64 {
    r_return - value_estimate
}

/// Exact gradient of sum_i (returns[i] - V(states[i]))^2 with respect to
/// the value parameters.
pub fn critic_loss_grad(
    valuenet: &ValueNet,
    states: &[KnowledgeState],
    returns: &[f64],
) -> Vec<f64> {
    let mut grads = valuenet.net.zero_grads();
    let mut trace = Trace::new(&valuenet.net);
    critic_loss_grad_into(valuenet, states, returns, &mut grads, &mut trace);
    grads
}

/// Buffer-reusing form of `critic_loss_grad`; zeroes `grads` first.
pub fn critic_loss_grad_into(
    valuenet: &ValueNet,
    states: &[KnowledgeState],
    returns: &[f64],
    grads: &mut [f64],
    trace: &mut Trace,
) {
    assert_eq!(states.len(), returns.len());
    grads.iter_mut().for_each(|g| *g = 0.0);
    for (s, &target) in states.iter().zip(returns.iter()) {
        valuenet.net.forward_trace(s.values(), trace);
        let v = trace.output()[0];
        valuenet.net.backward(trace, &[2.0 * (v - target)], grads);
    }
}

/// Gradient of sum_i log pi(actions[i] | states[i]) * advantages[i] in
/// ASCENT orientation; advantages are treated as constants.
pub fn actor_loss_grad(
    policy: &PolicyNet,
    states: &[KnowledgeState],
    actions: &[usize],
    advantages: &[f64],
) -> Vec<f64> {
    let mut grads = policy.net.zero_grads();
    let mut trace = Trace::new(&policy.net);
    actor_loss_grad_into(policy, states, actions, advantages, &mut grads, &mut trace);
    grads
}

/// Buffer-reusing form of `actor_loss_grad`; zeroes `grads` first.
pub fn actor_loss_grad_into(
    policy: &PolicyNet,
    states: &[KnowledgeState],
    actions: &[usize],
    advantages: &[f64],
    grads: &mut [f64],
    trace: &mut Trace,
) {
    assert_eq!(states.len(), actions.len());
    assert_eq!(states.len(), advantages.len());
    grads.iter_mut().for_each(|g| *g = 0.0);
    let mut dlogits = vec![0.0; policy.net.output_dim()];
    for i in 0..states.len() {
        policy.net.forward_trace(states[i].values(), trace);
        let probs = trace.output();
        // d log pi(a) / d logits = e_a - p, scaled by the advantage.
        for (j, d) in dlogits.iter_mut().enumerate() {
            *d = advantages[i] * (if j == actions[i] { 1.0 } else { 0.0 } - probs[j]);
        }
        policy.net.backward_logits(trace, &dlogits, grads);
    }
}

/// Training configuration. Learning rates default to the per-mode values
/// above when left unset.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub episodes: usize,
    pub workers: usize,
    pub seed: u64,
    pub hidden_width: usize,
    pub actor_critic_lr: Option<f64>,
    pub predictor_lr: Option<f64>,
    pub batch_size: usize,
    pub memory_capacity: usize,
    /// Replaces the scenario's assessment model for this run (the
    /// NO_DINA / DINA_J / IRT_J settings).
    pub assessment_override: Option<AssessmentSpec>,
}

impl TrainConfig {
    pub fn new(episodes: usize, seed: u64) -> Self {
        TrainConfig {
            episodes,
            workers: 1,
            seed,
            hidden_width: 64,
            actor_critic_lr: None,
            predictor_lr: None,
            batch_size: crate::curiosity::DEFAULT_BATCH_SIZE,
            memory_capacity: crate::curiosity::DEFAULT_MEMORY_CAPACITY,
            assessment_override: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("scenario unsuitable for training: {0}")]
    Scenario(String),
}

/// Per-episode evaluation traces of one run.
#[derive(Clone, Debug)]
pub struct ScoreLog {
    /// 100 * w' s_true(end), one entry per episode in episode order.
    pub scores: Vec<f64>,
    /// Mean curiosity reward per episode (0 for reward-free baselines).
    pub mean_rewards: Vec<f64>,
}

/// Final global networks plus the per-episode logs.
pub struct TrainResult {
    pub log: ScoreLog,
    pub policy: Mlp,
    pub value: Mlp,
    pub predictor: Mlp,
}

struct Globals {
    policy: PolicyNet,
    value: ValueNet,
    predictor: Predictor,
    memory: ReplayMemory,
}

struct SoftmaxPolicy<'a> {
    net: &'a PolicyNet,
    trace: &'a mut Trace,
}

impl Policy for SoftmaxPolicy<'_> {
    fn choose_action(&mut self, estimate: &KnowledgeState, rng: &mut EpisodeRng) -> usize {
        let probs = self.net.probs_with(estimate.values(), self.trace);
        let mut u: f64 = rng.random();
        for (a, &p) in probs.iter().enumerate() {
            if u < p {
                return a;
            }
            u -= p;
        }
        probs.len() - 1
    }
}

/// Uniform action choice; the Random baseline.
pub struct UniformRandomPolicy {
    pub action_count: usize,
}

impl Policy for UniformRandomPolicy {
    fn choose_action(&mut self, _: &KnowledgeState, rng: &mut EpisodeRng) -> usize {
        rng.random_range(0..self.action_count)
    }
}

/// Per-step curiosity under the asynchronous contract: the reward and the
/// loss gradient come from the worker's snapshot predictor, the transition
/// goes to the shared memory, and the same gradient is applied to both the
/// local and the global predictor as one Adam step each.
struct SharedCuriosity<'a> {
    local: &'a mut Predictor,
    globals: &'a Mutex<Globals>,
    batch_size: usize,
    batch: &'a mut TransitionBatch,
}

impl Rewarder for SharedCuriosity<'_> {
    fn reward(
        &mut self,
        estimate: &KnowledgeState,
        action: usize,
        next_estimate: &KnowledgeState,
        rng: &mut EpisodeRng,
    ) -> f64 {
        let predicted = self.local.predict_next(estimate.values(), action);
        let reward = curiosity_reward(next_estimate.values(), &predicted);
        let warm = {
            let mut g = self.globals.lock().unwrap();
            g.memory.push(Transition {
                state: estimate.clone(),
                action,
                next_state: next_estimate.clone(),
            });
            if g.memory.len() >= self.batch_size {
                self.batch.sample_with_replacement(&g.memory, self.batch_size, rng);
                true
            } else {
                false
            }
        };
        if warm {
            let grads = self.local.train_on_batch(self.batch);
            self.globals.lock().unwrap().predictor.apply_gradient(grads);
        }
        reward
    }
}

/// Runs M episodes of curiosity-driven actor-critic training distributed
/// over W workers and returns the trained networks with per-episode logs.
/// Single-worker runs are bitwise reproducible for a fixed seed.
pub fn train(scenario: &Scenario, config: &TrainConfig) -> Result<TrainResult, TrainError> {
    if config.episodes == 0 {
        return Err(TrainError::InvalidConfig("episodes must be at least 1".into()));
    }
    if config.workers == 0 {
        return Err(TrainError::InvalidConfig("workers must be at least 1".into()));
    }
    if config.batch_size == 0 {
        return Err(TrainError::InvalidConfig("batch_size must be at least 1".into()));
    }
    let report = scenario.validate();
    if !report.is_valid() {
        return Err(TrainError::Scenario(report.to_string()));
    }
    let sim = Simulator::new(scenario).map_err(TrainError::Scenario)?;
    let assessment =
        config.assessment_override.clone().unwrap_or_else(|| scenario.assessment.clone());
    // The override must still fit the scenario mode.
    assessor_for(&assessment, scenario).map_err(TrainError::Scenario)?;

    let (ac_lr, pred_lr) = match scenario.mode() {
        StateMode::Discrete => (DISCRETE_ACTOR_CRITIC_LR, DISCRETE_PREDICTOR_LR),
        StateMode::Continuous => (CONTINUOUS_ACTOR_CRITIC_LR, CONTINUOUS_PREDICTOR_LR),
    };
    let ac_lr = config.actor_critic_lr.unwrap_or(ac_lr);
    let pred_lr = config.predictor_lr.unwrap_or(pred_lr);

    let mut init_rng = EpisodeRng::seed_from_u64(substream(config.seed, 0));
    let globals = Mutex::new(Globals {
        policy: PolicyNet::new(
            scenario.k,
            scenario.action_count(),
            config.hidden_width,
            ac_lr,
            &mut init_rng,
        ),
        value: ValueNet::new(scenario.k, config.hidden_width, ac_lr, &mut init_rng),
        predictor: Predictor::new(
            scenario.k,
            scenario.action_count(),
            Predictor::hidden_depth(scenario.mode()),
            config.hidden_width,
            pred_lr,
            &mut init_rng,
        ),
        memory: ReplayMemory::new(config.memory_capacity),
    });

    let next_episode = AtomicUsize::new(0);
    let scores = Mutex::new(vec![0.0; config.episodes]);
    let mean_rewards = Mutex::new(vec![0.0; config.episodes]);

    std::thread::scope(|scope| {
        for _ in 0..config.workers {
            scope.spawn(|| {
                let mut assessor =
                    assessor_for(&assessment, scenario).expect("assessment checked above");
                // Worker-persistent copies and buffers; synced per episode.
                let (mut policy, mut value, mut predictor) = {
                    let g = globals.lock().unwrap();
                    (g.policy.clone(), g.value.clone(), g.predictor.clone())
                };
                let mut policy_trace = Trace::new(&policy.net);
                let mut value_trace = Trace::new(&value.net);
                let mut actor_grads = policy.net.zero_grads();
                let mut critic_grads = value.net.zero_grads();
                let mut batch = TransitionBatch::new(scenario.k);
                loop {
                    let ep = next_episode.fetch_add(1, Ordering::Relaxed);
                    if ep >= config.episodes {
                        break;
                    }
                    let mut rng =
                        EpisodeRng::seed_from_u64(substream(config.seed, 1 + ep as u64));
                    {
                        let g = globals.lock().unwrap();
                        policy.sync_from(&g.policy);
                        value.sync_from(&g.value);
                        predictor.sync_from(&g.predictor);
                    }
                    let mut chooser = SoftmaxPolicy { net: &policy, trace: &mut policy_trace };
                    let mut rewarder = SharedCuriosity {
                        local: &mut predictor,
                        globals: &globals,
                        batch_size: config.batch_size,
                        batch: &mut batch,
                    };
                    let traj =
                        run_episode(&sim, &mut chooser, &mut *assessor, &mut rewarder, &mut rng);

                    let episode_score = score(&scenario.eval_weights, &traj.final_true_state);
                    let mean_reward = if traj.is_empty() {
                        0.0
                    } else {
                        traj.steps.iter().map(|s| s.reward).sum::<f64>() / traj.len() as f64
                    };

                    if !traj.is_empty() {
                        let rewards: Vec<f64> = traj.steps.iter().map(|s| s.reward).collect();
                        let seed_value = if traj.terminal {
                            0.0
                        } else {
                            value.value_with(traj.final_estimate.values(), &mut value_trace)
                        };
                        let returns = compute_returns(&rewards, seed_value);
                        let states: Vec<KnowledgeState> =
                            traj.steps.iter().map(|s| s.estimate.clone()).collect();
                        let actions: Vec<usize> = traj.steps.iter().map(|s| s.action).collect();
                        let advantages: Vec<f64> = states
                            .iter()
                            .zip(returns.iter())
                            .map(|(s, &r)| {
                                advantage(r, value.value_with(s.values(), &mut value_trace))
                            })
                            .collect();
                        critic_loss_grad_into(
                            &value,
                            &states,
                            &returns,
                            &mut critic_grads,
                            &mut value_trace,
                        );
                        actor_loss_grad_into(
                            &policy,
                            &states,
                            &actions,
                            &advantages,
                            &mut actor_grads,
                            &mut policy_trace,
                        );
                        let mut g = globals.lock().unwrap();
                        g.value.apply_gradient(&critic_grads);
                        g.policy.apply_ascent(&actor_grads);
                    }
                    scores.lock().unwrap()[ep] = episode_score;
                    mean_rewards.lock().unwrap()[ep] = mean_reward;
                }
            });
        }
    });

    let globals = globals.into_inner().unwrap();
    Ok(TrainResult {
        log: ScoreLog {
            scores: scores.into_inner().unwrap(),
            mean_rewards: mean_rewards.into_inner().unwrap(),
        },
        policy: globals.policy.net.clone(),
        value: globals.value.net.clone(),
        predictor: globals.predictor.net().clone(),
    })
}

/// Scores episodes under uniformly random actions; no learning anywhere.
pub fn random_policy_baseline(
    scenario: &Scenario,
    episodes: usize,
    seed: u64,
) -> Result<ScoreLog, TrainError> {
    if episodes == 0 {
        return Err(TrainError::InvalidConfig("episodes must be at least 1".into()));
    }
    let sim = Simulator::new(scenario).map_err(TrainError::Scenario)?;
    let mut policy = UniformRandomPolicy { action_count: scenario.action_count() };
    let mut assessor = crate::assessment::ExactAssessor;
    let mut scores = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let mut rng = EpisodeRng::seed_from_u64(substream(seed, 1 + ep as u64));
        let traj = run_episode(&sim, &mut policy, &mut assessor, &mut ZeroReward, &mut rng);
        scores.push(score(&scenario.eval_weights, &traj.final_true_state));
    }
    Ok(ScoreLog { mean_rewards: vec![0.0; scores.len()], scores })
}
