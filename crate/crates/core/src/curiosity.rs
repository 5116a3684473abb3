//! The predictive subsystem: a replay memory of observed transitions, a
//! feed-forward next-state predictor, mini-batch training on the summed
//! squared prediction error, and the curiosity reward — the squared
//! distance between the assessed and the predicted next state.

use crate::neuralnet::{adam_step, AdamState, Head, Mlp, Trace};
use crate::scenario::{KnowledgeState, StateMode};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Default replay capacity.
pub const DEFAULT_MEMORY_CAPACITY: usize = 6000;
/// Default mini-batch size.
pub const DEFAULT_BATCH_SIZE: usize = 64;

/// One observed transition between state estimates.
#[derive(Clone, Debug)]
pub struct Transition {
    pub state: KnowledgeState,
    pub action: usize,
    pub next_state: KnowledgeState,
}

/// FIFO ring buffer of transitions with fixed capacity.
#[derive(Clone, Debug)]
pub struct ReplayMemory {
    capacity: usize,
    entries: Vec<Transition>,
    head: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "capacity must be at least 1");
        ReplayMemory { capacity, entries: Vec::new(), head: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends a transition, evicting the oldest when full.
    pub fn push(&mut self, t: Transition) {
        if self.entries.len() < self.capacity {
            self.entries.push(t);
        } else {
            self.entries[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.entries[index]
    }

    /// Entries from oldest to newest.
    pub fn iter_fifo(&self) -> impl Iterator<Item = &Transition> {
        self.entries[self.head..].iter().chain(self.entries[..self.head].iter())
    }
}

/// Curiosity reward: squared Euclidean distance between the observed and
/// the predicted next state. Zero exactly when the prediction is exact.
pub fn curiosity_reward(observed_next: &[f64], predicted_next: &[f64]) -> f64 {
    assert_eq!(observed_next.len(), predicted_next.len());
    observed_next
        .iter()
        .zip(predicted_next.iter())
        .map(|(o, p)| (o - p) * (o - p))
        .sum()
}

/// Flat mini-batch storage reused across training steps so the per-step
/// sampling copies slices instead of allocating transitions.
#[derive(Clone, Debug)]
pub struct TransitionBatch {
    k: usize,
    states: Vec<f64>,
    next_states: Vec<f64>,
    actions: Vec<usize>,
}

impl TransitionBatch {
    pub fn new(k: usize) -> Self {
        TransitionBatch { k, states: Vec::new(), next_states: Vec::new(), actions: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn clear(&mut self) {
        self.states.clear();
        self.next_states.clear();
        self.actions.clear();
    }

    pub fn push(&mut self, state: &[f64], action: usize, next_state: &[f64]) {
        debug_assert_eq!(state.len(), self.k);
        debug_assert_eq!(next_state.len(), self.k);
        self.states.extend_from_slice(state);
        self.next_states.extend_from_slice(next_state);
        self.actions.push(action);
    }

    pub fn push_transition(&mut self, t: &Transition) {
        self.push(t.state.values(), t.action, t.next_state.values());
    }

    /// Refills with `n` uniform draws (with replacement) from the memory.
    pub fn sample_with_replacement(
        &mut self,
        memory: &ReplayMemory,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) {
        self.clear();
        for _ in 0..n {
            self.push_transition(memory.get(rng.random_range(0..memory.len())));
        }
    }

    fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.k..(i + 1) * self.k]
    }

    fn next_state(&self, i: usize) -> &[f64] {
        &self.next_states[i * self.k..(i + 1) * self.k]
    }
}

/// Next-state predictor f(s, a): an MLP over the state concatenated with a
/// one-hot action encoding, identity output head, trained by Adam on the
/// summed squared error of sampled mini-batches.
#[derive(Clone, Debug)]
pub struct Predictor {
    net: Mlp,
    adam: AdamState,
    k: usize,
    action_count: usize,
    input: Vec<f64>,
    dout: Vec<f64>,
    grads: Vec<f64>,
    trace: Trace,
}

impl Predictor {
    /// Hidden depth 2 in discrete mode, 3 in continuous mode.
    pub fn hidden_depth(mode: StateMode) -> usize {
        match mode {
            StateMode::Discrete => 2,
            StateMode::Continuous => 3,
        }
    }

    pub fn new(
        k: usize,
        action_count: usize,
        hidden_depth: usize,
        hidden_width: usize,
        learning_rate: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut dims = vec![k + action_count];
        dims.extend(std::iter::repeat(hidden_width).take(hidden_depth));
        dims.push(k);
        let net = Mlp::new(&dims, Head::Identity, rng);
        let adam = AdamState::new(learning_rate, net.param_count());
        let trace = Trace::new(&net);
        let grads = net.zero_grads();
        Predictor {
            net,
            adam,
            k,
            action_count,
            input: vec![0.0; k + action_count],
            dout: vec![0.0; k],
            grads,
            trace,
        }
    }

    /// Copies parameters and optimizer state from an identically-shaped
    /// predictor without reallocating.
    pub fn sync_from(&mut self, other: &Predictor) {
        self.net.copy_params_from(&other.net);
        self.adam.sync_from(&other.adam);
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    fn encode(input: &mut [f64], state: &[f64], action: usize, k: usize) {
        input[..k].copy_from_slice(state);
        input[k..].iter_mut().for_each(|v| *v = 0.0);
        input[k + action] = 1.0;
    }

    /// Forward pass on [state, one_hot(action)].
    pub fn predict_next(&self, state: &[f64], action: usize) -> Vec<f64> {
        assert!(action < self.action_count, "action out of range");
        assert_eq!(state.len(), self.k, "state length mismatch");
        let mut input = vec![0.0; self.k + self.action_count];
        Self::encode(&mut input, state, action, self.k);
        self.net.forward(&input)
    }

    /// Fills the internal gradient buffer with the gradient of the summed
    /// squared error over the batch.
    fn compute_batch_gradient(&mut self, batch: &TransitionBatch) {
        debug_assert_eq!(batch.k, self.k);
        self.grads.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..batch.len() {
            Self::encode(&mut self.input, batch.state(i), batch.actions[i], self.k);
            self.net.forward_trace(&self.input, &mut self.trace);
            for (d, (p, y)) in self
                .dout
                .iter_mut()
                .zip(self.trace.output().iter().zip(batch.next_state(i).iter()))
            {
                *d = 2.0 * (p - y);
            }
            self.net.backward(&mut self.trace, &self.dout, &mut self.grads);
        }
    }

    /// Gradient of the summed squared error over an explicit batch.
    pub fn batch_gradient_from(&mut self, batch: &[Transition]) -> Vec<f64> {
        let mut flat = TransitionBatch::new(self.k);
        for t in batch {
            flat.push_transition(t);
        }
        self.compute_batch_gradient(&flat);
        self.grads.clone()
    }

    /// Samples a mini-batch uniformly with replacement and returns the
    /// loss gradient, or None while the memory is still warming up.
    pub fn batch_gradient(
        &mut self,
        memory: &ReplayMemory,
        batch_size: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<Vec<f64>> {
        if memory.len() < batch_size {
            return None;
        }
        let mut flat = TransitionBatch::new(self.k);
        flat.sample_with_replacement(memory, batch_size, rng);
        self.compute_batch_gradient(&flat);
        Some(self.grads.clone())
    }

    /// One Adam step along an already-computed gradient.
    pub fn apply_gradient(&mut self, grads: &[f64]) {
        adam_step(self.net.params_mut(), grads, &mut self.adam);
    }

    /// Computes the batch gradient, applies it to self as one Adam step
    /// and exposes the applied gradient so it can also be committed to a
    /// shared parameter set. Allocation-free steady state.
    pub fn train_on_batch(&mut self, batch: &TransitionBatch) -> &[f64] {
        self.compute_batch_gradient(batch);
        let Predictor { net, adam, grads, .. } = self;
        adam_step(net.params_mut(), grads, adam);
        &self.grads
    }

    /// Stores the transition, then performs one mini-batch update if the
    /// memory holds at least a full batch. Returns whether an update ran.
    pub fn store_and_train(
        &mut self,
        memory: &mut ReplayMemory,
        transition: Transition,
        batch_size: usize,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        memory.push(transition);
        match self.batch_gradient(memory, batch_size, rng) {
            Some(grads) => {
                self.apply_gradient(&grads);
                true
            }
            None => false,
        }
    }

    /// Summed squared error over a set of transitions.
    pub fn batch_loss<'a>(&self, batch: impl IntoIterator<Item = &'a Transition>) -> f64 {
        let mut loss = 0.0;
        for t in batch {
            let predicted = self.predict_next(t.state.values(), t.action);
            loss += curiosity_reward(t.next_state.values(), &predicted);
        }
        loss
    }
}

/// Self-contained curiosity reward model: predict, score, store, train.
/// The reward always reflects the predictor as it was before this step's
/// update.
pub struct CuriosityDrive {
    pub predictor: Predictor,
    pub memory: ReplayMemory,
    pub batch_size: usize,
}

impl CuriosityDrive {
    pub fn new(predictor: Predictor, capacity: usize, batch_size: usize) -> Self {
        CuriosityDrive { predictor, memory: ReplayMemory::new(capacity), batch_size }
    }
}

impl crate::environment::Rewarder for CuriosityDrive {
    fn reward(
        &mut self,
        estimate: &KnowledgeState,
        action: usize,
        next_estimate: &KnowledgeState,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        let predicted = self.predictor.predict_next(estimate.values(), action);
        let reward = curiosity_reward(next_estimate.values(), &predicted);
        self.predictor.store_and_train(
            &mut self.memory,
            Transition { state: estimate.clone(), action, next_state: next_estimate.clone() },
            self.batch_size,
            rng,
        );
        reward
    }
}
