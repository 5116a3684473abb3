//! Ground-truth learner simulation. The transition model is part of the
//! world and hidden from the agent, which observes it only through the
//! assessment layer: per-action stochastic matrices over the admissible
//! states in discrete mode, a saturating exponential gain with shared
//! chi-square noise in continuous mode.

use crate::scenario::{
    KnowledgeState, LearningMaterial, PrerequisiteGraph, Scenario, StateMode, TransitionSpec,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Continuous mastery this high counts as complete; exact 1.0 has measure
/// zero under the transition law.
pub const CONTINUOUS_MASTERY_THRESHOLD: f64 = 0.999;

/// The seeded random stream threaded through every stochastic operation.
pub type EpisodeRng = ChaCha8Rng;

/// Chooses the next action from the current state estimate.
pub trait Policy {
    fn choose_action(&mut self, estimate: &KnowledgeState, rng: &mut EpisodeRng) -> usize;
}

/// Produces the state estimate after an action has been executed.
pub trait Assessor {
    fn assess(
        &mut self,
        true_state: &KnowledgeState,
        prior: &KnowledgeState,
        action: usize,
        rng: &mut EpisodeRng,
    ) -> KnowledgeState;
}

/// Supplies the per-step reward given the observed transition. The
/// curiosity subsystem implements this; baselines use `ZeroReward`.
pub trait Rewarder {
    fn reward(
        &mut self,
        estimate: &KnowledgeState,
        action: usize,
        next_estimate: &KnowledgeState,
        rng: &mut EpisodeRng,
    ) -> f64;
}

/// No reward signal at all.
pub struct ZeroReward;

impl Rewarder for ZeroReward {
    fn reward(&mut self, _: &KnowledgeState, _: usize, _: &KnowledgeState, _: &mut EpisodeRng) -> f64 {
        0.0
    }
}

/// Maps a knowledge state to the K-dimensional zero-one learnability
/// vector: entry k is 1 iff every prerequisite edge into k is satisfied
/// (AND semantics); points without parents are always learnable.
pub fn gate(state: &KnowledgeState, graph: &PrerequisiteGraph) -> Vec<f64> {
    let mut open = vec![1.0; state.len()];
    for e in graph.edges() {
        if state.values()[e.parent] < e.threshold {
            open[e.child] = 0.0;
        }
    }
    open
}

/// Row-stochastic per-action transition matrices over the admissible
/// discrete states, with the state <-> mask bookkeeping.
#[derive(Clone, Debug)]
pub struct DiscreteTransition {
    k: usize,
    admissible: Vec<u64>,
    /// matrices[a] holds an n x n row-major matrix.
    matrices: Vec<Vec<f64>>,
}

impl DiscreteTransition {
    pub fn from_scenario(s: &Scenario) -> Result<Self, String> {
        let TransitionSpec::Discrete { matrices } = &s.transition else {
            return Err("scenario is not discrete".into());
        };
        let admissible = s.graph.admissible_states()?;
        let n = admissible.len();
        let mut flat = Vec::with_capacity(matrices.len());
        for m in matrices {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(format!("transition matrix is not {n}x{n}"));
            }
            flat.push(m.iter().flatten().copied().collect());
        }
        Ok(DiscreteTransition { k: s.k, admissible, matrices: flat })
    }

    pub fn state_count(&self) -> usize {
        self.admissible.len()
    }

    pub fn admissible(&self) -> &[u64] {
        &self.admissible
    }

    pub fn mask_of(&self, index: usize) -> u64 {
        self.admissible[index]
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.admissible.iter().position(|&m| m == mask)
    }

    pub fn knowledge_state(&self, index: usize) -> KnowledgeState {
        KnowledgeState::from_mask(self.admissible[index], self.k)
    }

    pub fn row(&self, action: usize, state: usize) -> &[f64] {
        let n = self.admissible.len();
        &self.matrices[action][state * n..(state + 1) * n]
    }

    /// Samples the successor state from the matrix row of `action`.
    pub fn step(&self, state: usize, action: usize, rng: &mut EpisodeRng) -> usize {
        let row = self.row(action, state);
        let mut u: f64 = rng.random();
        for (j, &p) in row.iter().enumerate() {
            if u < p {
                return j;
            }
            u -= p;
        }
        row.len() - 1 // guard against rounding at u ~ 1
    }
}

/// Continuous dynamics: s' = 1 - (1 - s) .* exp(-xi * W_a .* gate(s)),
/// with a single chi-square noise draw shared by all coordinates.
#[derive(Clone, Copy, Debug)]
pub struct ContinuousTransition {
    noise_df: f64,
}

impl ContinuousTransition {
    pub fn new(noise_df: f64) -> Self {
        assert!(noise_df > 0.0, "noise_df must be positive");
        ContinuousTransition { noise_df }
    }

    pub fn noise_df(&self) -> f64 {
        self.noise_df
    }

    /// Chi-square draw: sum of squared standard normals at integer df,
    /// gamma(df/2, 2) otherwise.
    pub fn sample_noise(&self, rng: &mut EpisodeRng) -> f64 {
        let df = self.noise_df;
        if df.fract() == 0.0 && df <= 64.0 {
            let mut sum = 0.0;
            for _ in 0..df as usize {
                let z: f64 = StandardNormal.sample(rng);
                sum += z * z;
            }
            sum
        } else {
            Gamma::new(df / 2.0, 2.0).expect("valid gamma").sample(rng)
        }
    }

    pub fn step(
        &self,
        state: &KnowledgeState,
        material: &LearningMaterial,
        graph: &PrerequisiteGraph,
        rng: &mut EpisodeRng,
    ) -> KnowledgeState {
        let xi = self.sample_noise(rng);
        step_with_noise(state, material, &gate(state, graph), xi)
    }
}

/// Deterministic core of the continuous transition for a fixed noise
/// value. Outputs stay in [0, 1] and never fall below the input.
pub fn step_with_noise(
    state: &KnowledgeState,
    material: &LearningMaterial,
    gate_vec: &[f64],
    xi: f64,
) -> KnowledgeState {
    let values = state
        .values()
        .iter()
        .zip(material.training_weights.iter().zip(gate_vec.iter()))
        .map(|(&s, (&w, &g))| 1.0 - (1.0 - s) * (-xi * w * g).exp())
        .collect();
    KnowledgeState::new(values)
}

/// One record per executed step: the true state before the step, the
/// estimate the action was chosen from, the action, the curiosity reward
/// and the post-assessment estimate.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub true_state: KnowledgeState,
    pub estimate: KnowledgeState,
    pub action: usize,
    pub reward: f64,
    pub next_estimate: KnowledgeState,
}

/// A full episode rollout.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    pub final_true_state: KnowledgeState,
    pub final_estimate: KnowledgeState,
    /// True when the episode ended in complete mastery; the return
    /// recursion then seeds with 0 instead of a bootstrap value.
    pub terminal: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Owns the ground-truth world for one scenario.
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    kind: SimKind,
}

enum SimKind {
    Discrete(DiscreteTransition),
    Continuous(ContinuousTransition),
}

/// World state: an admissible-state index or a mastery vector.
#[derive(Clone, Debug)]
pub enum SimState {
    Discrete(usize),
    Continuous(KnowledgeState),
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, String> {
        let kind = match &scenario.transition {
            TransitionSpec::Discrete { .. } => {
                SimKind::Discrete(DiscreteTransition::from_scenario(scenario)?)
            }
            TransitionSpec::Continuous { noise_df } => {
                SimKind::Continuous(ContinuousTransition::new(*noise_df))
            }
        };
        Ok(Simulator { scenario, kind })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn discrete(&self) -> Option<&DiscreteTransition> {
        match &self.kind {
            SimKind::Discrete(d) => Some(d),
            SimKind::Continuous(_) => None,
        }
    }

    pub fn initial_state(&self) -> SimState {
        match &self.kind {
            SimKind::Discrete(d) => {
                let mask = self.scenario.initial_state.to_mask();
                SimState::Discrete(d.index_of(mask).expect("initial state is admissible"))
            }
            SimKind::Continuous(_) => SimState::Continuous(self.scenario.initial_state.clone()),
        }
    }

    pub fn knowledge_state(&self, state: &SimState) -> KnowledgeState {
        match (state, &self.kind) {
            (SimState::Discrete(i), SimKind::Discrete(d)) => d.knowledge_state(*i),
            (SimState::Continuous(s), _) => s.clone(),
            _ => unreachable!("state kind mismatch"),
        }
    }

    pub fn step(&self, state: &mut SimState, action: usize, rng: &mut EpisodeRng) {
        match (state, &self.kind) {
            (SimState::Discrete(i), SimKind::Discrete(d)) => *i = d.step(*i, action, rng),
            (SimState::Continuous(s), SimKind::Continuous(c)) => {
                *s = c.step(s, &self.scenario.actions[action], &self.scenario.graph, rng);
            }
            _ => unreachable!("state kind mismatch"),
        }
    }

    pub fn fully_mastered(&self, state: &SimState) -> bool {
        match (state, &self.kind) {
            (SimState::Discrete(i), SimKind::Discrete(d)) => {
                d.mask_of(*i).count_ones() as usize == self.scenario.k
            }
            (SimState::Continuous(s), _) => {
                s.values().iter().all(|&v| v >= CONTINUOUS_MASTERY_THRESHOLD)
            }
            _ => unreachable!("state kind mismatch"),
        }
    }

    pub fn mode(&self) -> StateMode {
        self.scenario.mode()
    }
}

/// Rolls one episode: sample action from the estimate, execute it in the
/// world, assess the new state, collect the reward. The first estimate is
/// the true initial state; the episode stops early once the true state is
/// fully mastered.
pub fn run_episode(
    sim: &Simulator,
    policy: &mut dyn Policy,
    assessor: &mut dyn Assessor,
    rewarder: &mut dyn Rewarder,
    rng: &mut EpisodeRng,
) -> Trajectory {
    let mut world = sim.initial_state();
    let mut estimate = sim.knowledge_state(&world);
    let mut steps = Vec::with_capacity(sim.scenario.horizon);
    for _ in 0..sim.scenario.horizon {
        if sim.fully_mastered(&world) {
            break;
        }
        let true_state = sim.knowledge_state(&world);
        let action = policy.choose_action(&estimate, rng);
        sim.step(&mut world, action, rng);
        let next_true = sim.knowledge_state(&world);
        let next_estimate = assessor.assess(&next_true, &estimate, action, rng);
        let reward = rewarder.reward(&estimate, action, &next_estimate, rng);
        steps.push(StepRecord {
            true_state,
            estimate: estimate.clone(),
            action,
            reward,
            next_estimate: next_estimate.clone(),
        });
        estimate = next_estimate;
    }
    Trajectory {
        steps,
        final_true_state: sim.knowledge_state(&world),
        final_estimate: estimate,
        terminal: sim.fully_mastered(&world),
    }
}
