//! Psychometric assessment: turns simulated item responses into the noisy
//! state estimate after each action. DINA (noisy-AND with slip/guess) for
//! binary states, M3PL IRT for continuous states, or an exact pass-through.
//! Item banks are redrawn for every assessment call, like a fresh quiz.

use crate::environment::{Assessor, EpisodeRng};
use crate::scenario::{
    AssessmentSpec, KnowledgeState, LearningMaterial, PrerequisiteGraph, Scenario,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Latent mastery is clamped into [CLAMP, 1-CLAMP] before the logit to
/// avoid infinities at exact 0/1.
pub const LATENT_CLAMP: f64 = 1e-4;

const M3PL_MAX_ITERS: usize = 200;
const M3PL_GRAD_TOL: f64 = 1e-8;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn clamped_logit(p: f64) -> f64 {
    logit(p.clamp(LATENT_CLAMP, 1.0 - LATENT_CLAMP))
}

// ---------------------------------------------------------------------------
// DINA
// ---------------------------------------------------------------------------

/// One quiz worth of DINA items: per-item required-point masks plus slip
/// and guess probabilities.
#[derive(Clone, Debug)]
pub struct DinaItemBank {
    q_rows: Vec<u64>,
    slip: Vec<f64>,
    guess: Vec<f64>,
}

impl DinaItemBank {
    pub fn new(q_rows: Vec<u64>, slip: Vec<f64>, guess: Vec<f64>) -> Self {
        assert_eq!(q_rows.len(), slip.len());
        assert_eq!(q_rows.len(), guess.len());
        assert!(q_rows.iter().all(|&q| q != 0), "empty Q-matrix row");
        assert!(
            slip.iter().chain(guess.iter()).all(|&v| v > 0.0 && v < 0.5),
            "slip/guess outside (0, 0.5)"
        );
        DinaItemBank { q_rows, slip, guess }
    }

    /// Draws a fresh bank: item j requires point (j mod K), plus (with
    /// probability 0.3) one random prerequisite ancestor of that point;
    /// slip and guess are uniform over the configured range.
    pub fn generate(
        items: usize,
        k: usize,
        graph: &PrerequisiteGraph,
        slip_guess_range: [f64; 2],
        rng: &mut EpisodeRng,
    ) -> Self {
        let [lo, hi] = slip_guess_range;
        let mut q_rows = Vec::with_capacity(items);
        let mut slip = Vec::with_capacity(items);
        let mut guess = Vec::with_capacity(items);
        for j in 0..items {
            let base = j % k;
            let mut q = 1u64 << base;
            if rng.random::<f64>() < 0.3 {
                let ancestors = graph.ancestors(base);
                if !ancestors.is_empty() {
                    q |= 1 << ancestors[rng.random_range(0..ancestors.len())];
                }
            }
            q_rows.push(q);
            slip.push(rng.random_range(lo..=hi));
            guess.push(rng.random_range(lo..=hi));
        }
        DinaItemBank { q_rows, slip, guess }
    }

    pub fn items(&self) -> usize {
        self.q_rows.len()
    }

    /// P(correct) for an attribute mask: 1-slip when every required point
    /// is mastered, guess otherwise.
    pub fn correct_probability(&self, item: usize, mask: u64) -> f64 {
        if self.q_rows[item] & mask == self.q_rows[item] {
            1.0 - self.slip[item]
        } else {
            self.guess[item]
        }
    }
}

/// Bernoulli item responses for a binary knowledge state.
pub fn dina_simulate_responses(
    true_state: &KnowledgeState,
    bank: &DinaItemBank,
    rng: &mut EpisodeRng,
) -> Vec<bool> {
    debug_assert!(true_state.is_binary());
    let mask = true_state.to_mask();
    (0..bank.items())
        .map(|j| rng.random::<f64>() < bank.correct_probability(j, mask))
        .collect()
}

/// Maximum-likelihood estimate restricted to the admissible states, which
/// must be listed in chain order; ties break toward the earliest (fewest
/// mastered points).
pub fn dina_mle(
    responses: &[bool],
    bank: &DinaItemBank,
    admissible: &[u64],
    k: usize,
) -> KnowledgeState {
    assert!(!admissible.is_empty(), "admissible state set is empty");
    assert_eq!(responses.len(), bank.items());
    let mut best_mask = admissible[0];
    let mut best_ll = f64::NEG_INFINITY;
    for &mask in admissible {
        let mut ll = 0.0;
        for (j, &y) in responses.iter().enumerate() {
            let p = bank.correct_probability(j, mask);
            ll += if y { p.ln() } else { (1.0 - p).ln() };
        }
        if ll > best_ll {
            best_ll = ll;
            best_mask = mask;
        }
    }
    KnowledgeState::from_mask(best_mask, k)
}

// ---------------------------------------------------------------------------
// M3PL
// ---------------------------------------------------------------------------

/// One quiz worth of M3PL items: a J x K discrimination matrix plus
/// per-item difficulty and guessing parameters.
#[derive(Clone, Debug)]
pub struct M3plItemBank {
    discrimination: Vec<Vec<f64>>,
    difficulty: Vec<f64>,
    guessing: Vec<f64>,
}

impl M3plItemBank {
    pub fn new(discrimination: Vec<Vec<f64>>, difficulty: Vec<f64>, guessing: Vec<f64>) -> Self {
        assert_eq!(discrimination.len(), difficulty.len());
        assert_eq!(discrimination.len(), guessing.len());
        assert!(
            discrimination.iter().all(|row| row.iter().any(|&a| a > 0.0)),
            "item with no positive discrimination"
        );
        assert!(guessing.iter().all(|&c| (0.0..0.35).contains(&c)));
        M3plItemBank { discrimination, difficulty, guessing }
    }

    /// Draws a fresh bank: guessing in U[0, 0.25], difficulty N(0,1),
    /// discrimination 1.0 on the points trained by the most recent action
    /// and 0.3 everywhere else.
    pub fn generate(
        items: usize,
        k: usize,
        recent: Option<&LearningMaterial>,
        rng: &mut EpisodeRng,
    ) -> Self {
        let mut discrimination = Vec::with_capacity(items);
        let mut difficulty = Vec::with_capacity(items);
        let mut guessing = Vec::with_capacity(items);
        for _ in 0..items {
            let mut row = vec![0.3; k];
            if let Some(m) = recent {
                for &p in &m.trained_points {
                    row[p] = 1.0;
                }
            }
            discrimination.push(row);
            difficulty.push(StandardNormal.sample(rng));
            guessing.push(rng.random_range(0.0..0.25));
        }
        M3plItemBank { discrimination, difficulty, guessing }
    }

    pub fn items(&self) -> usize {
        self.discrimination.len()
    }

    pub fn dimensions(&self) -> usize {
        self.discrimination.first().map_or(0, Vec::len)
    }

    /// P(correct | theta) = c + (1-c) * sigmoid(alpha . theta - b).
    pub fn correct_probability(&self, item: usize, theta: &[f64]) -> f64 {
        let u: f64 = self.discrimination[item]
            .iter()
            .zip(theta.iter())
            .map(|(a, t)| a * t)
            .sum::<f64>()
            - self.difficulty[item];
        self.guessing[item] + (1.0 - self.guessing[item]) * sigmoid(u)
    }
}

/// Bernoulli item responses for a continuous state in [0,1]^K.
pub fn m3pl_simulate_responses(
    true_state: &KnowledgeState,
    bank: &M3plItemBank,
    rng: &mut EpisodeRng,
) -> Vec<bool> {
    debug_assert!(true_state.in_unit_interval());
    let theta: Vec<f64> = true_state.values().iter().map(|&v| clamped_logit(v)).collect();
    (0..bank.items())
        .map(|j| rng.random::<f64>() < bank.correct_probability(j, &theta))
        .collect()
}

/// Result of the penalized MLE; `converged` is false when the optimizer
/// hit its iteration cap and returned the best iterate seen.
#[derive(Clone, Debug)]
pub struct M3plEstimate {
    pub state: KnowledgeState,
    pub converged: bool,
}

/// Penalized MLE with the default anchor strength lambda = 1/J (1 when
/// J = 0): with few items the raw likelihood is underdetermined, so the
/// previous estimate acts as a shrinking pseudo-observation.
pub fn m3pl_estimate(
    responses: &[bool],
    bank: &M3plItemBank,
    prior: &KnowledgeState,
) -> M3plEstimate {
    let lambda = if bank.items() == 0 { 1.0 } else { 1.0 / bank.items() as f64 };
    m3pl_estimate_with_lambda(responses, bank, prior, lambda)
}

/// Maximizes sum_j log P(y_j | theta) - lambda * ||theta - theta0||^2 by
/// gradient ascent with backtracking line search, then maps back through
/// the logistic function. Output entries are strictly inside (0, 1).
pub fn m3pl_estimate_with_lambda(
    responses: &[bool],
    bank: &M3plItemBank,
    prior: &KnowledgeState,
    lambda: f64,
) -> M3plEstimate {
    assert_eq!(responses.len(), bank.items());
    let k = prior.len();
    let theta0: Vec<f64> = prior.values().iter().map(|&v| clamped_logit(v)).collect();

    let objective = |theta: &[f64]| -> f64 {
        let mut obj = 0.0;
        for (j, &y) in responses.iter().enumerate() {
            let p = bank.correct_probability(j, theta);
            obj += if y { p.max(1e-300).ln() } else { (1.0 - p).max(1e-300).ln() };
        }
        let penalty: f64 =
            theta.iter().zip(theta0.iter()).map(|(t, t0)| (t - t0) * (t - t0)).sum();
        obj - lambda * penalty
    };

    let gradient = |theta: &[f64], grad: &mut [f64]| {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (j, &y) in responses.iter().enumerate() {
            let c = bank.guessing[j];
            let u: f64 = bank.discrimination[j]
                .iter()
                .zip(theta.iter())
                .map(|(a, t)| a * t)
                .sum::<f64>()
                - bank.difficulty[j];
            let s = sigmoid(u);
            let p = c + (1.0 - c) * s;
            let resid = if y { 1.0 } else { 0.0 } - p;
            let factor = resid * (1.0 - c) * s * (1.0 - s) / (p * (1.0 - p)).max(1e-300);
            for (g, a) in grad.iter_mut().zip(bank.discrimination[j].iter()) {
                *g += factor * a;
            }
        }
        for i in 0..theta.len() {
            grad[i] -= 2.0 * lambda * (theta[i] - theta0[i]);
        }
    };

    let mut theta = theta0.clone();
    let mut grad = vec![0.0; k];
    let mut best = theta.clone();
    let mut best_obj = objective(&theta);
    let mut converged = false;
    for _ in 0..M3PL_MAX_ITERS {
        gradient(&theta, &mut grad);
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() <= M3PL_GRAD_TOL {
            converged = true;
            break;
        }
        let f0 = objective(&theta);
        let mut alpha = 1.0;
        let mut stepped = false;
        for _ in 0..60 {
            let candidate: Vec<f64> =
                theta.iter().zip(grad.iter()).map(|(t, g)| t + alpha * g).collect();
            let f1 = objective(&candidate);
            if f1 >= f0 + 1e-4 * alpha * gnorm2 {
                theta = candidate;
                if f1 > best_obj {
                    best_obj = f1;
                    best = theta.clone();
                }
                stepped = true;
                break;
            }
            alpha *= 0.5;
        }
        if !stepped {
            // No ascent direction survives backtracking; numerically done.
            converged = true;
            break;
        }
    }
    if objective(&theta) < best_obj {
        theta = best;
    }
    let state = KnowledgeState::new(theta.iter().map(|&t| sigmoid(t)).collect());
    M3plEstimate { state, converged }
}

// ---------------------------------------------------------------------------
// Assessor wiring
// ---------------------------------------------------------------------------

/// Pass-through assessor for the NO_DINA / NO_IRT settings.
pub struct ExactAssessor;

impl Assessor for ExactAssessor {
    fn assess(
        &mut self,
        true_state: &KnowledgeState,
        _: &KnowledgeState,
        _: usize,
        _: &mut EpisodeRng,
    ) -> KnowledgeState {
        true_state.clone()
    }
}

/// DINA assessor bound to one scenario's hierarchy and admissible states.
pub struct DinaAssessor {
    items: usize,
    slip_guess_range: [f64; 2],
    k: usize,
    graph: PrerequisiteGraph,
    admissible: Vec<u64>,
}

impl DinaAssessor {
    pub fn new(scenario: &Scenario, items: usize, slip_guess_range: [f64; 2]) -> Result<Self, String> {
        let admissible = scenario.graph.admissible_states()?;
        Ok(DinaAssessor {
            items,
            slip_guess_range,
            k: scenario.k,
            graph: scenario.graph.clone(),
            admissible,
        })
    }
}

impl Assessor for DinaAssessor {
    fn assess(
        &mut self,
        true_state: &KnowledgeState,
        _prior: &KnowledgeState,
        _action: usize,
        rng: &mut EpisodeRng,
    ) -> KnowledgeState {
        let bank =
            DinaItemBank::generate(self.items, self.k, &self.graph, self.slip_guess_range, rng);
        let responses = dina_simulate_responses(true_state, &bank, rng);
        dina_mle(&responses, &bank, &self.admissible, self.k)
    }
}

/// M3PL assessor; the item bank loads on the points trained by the action
/// that the quiz follows.
pub struct M3plAssessor {
    items: usize,
    k: usize,
    materials: Vec<LearningMaterial>,
}

impl M3plAssessor {
    pub fn new(scenario: &Scenario, items: usize) -> Self {
        M3plAssessor { items, k: scenario.k, materials: scenario.actions.clone() }
    }
}

impl Assessor for M3plAssessor {
    fn assess(
        &mut self,
        true_state: &KnowledgeState,
        prior: &KnowledgeState,
        action: usize,
        rng: &mut EpisodeRng,
    ) -> KnowledgeState {
        let bank = M3plItemBank::generate(self.items, self.k, self.materials.get(action), rng);
        let responses = m3pl_simulate_responses(true_state, &bank, rng);
        m3pl_estimate(&responses, &bank, prior).state
    }
}

/// Builds the assessor an `AssessmentSpec` calls for.
pub fn assessor_for(
    spec: &AssessmentSpec,
    scenario: &Scenario,
) -> Result<Box<dyn Assessor + Send>, String> {
    match spec {
        AssessmentSpec::None => Ok(Box::new(ExactAssessor)),
        AssessmentSpec::Dina { items, slip_guess_range } => {
            Ok(Box::new(DinaAssessor::new(scenario, *items, *slip_guess_range)?))
        }
        AssessmentSpec::M3pl { items } => Ok(Box::new(M3plAssessor::new(scenario, *items))),
    }
}

/// One-shot assessment under a spec: simulate responses from the true
/// state with a freshly drawn bank, then estimate. `None` is the identity.
pub fn assess(
    true_state: &KnowledgeState,
    spec: &AssessmentSpec,
    prior: &KnowledgeState,
    scenario: &Scenario,
    recent_action: Option<usize>,
    rng: &mut EpisodeRng,
) -> KnowledgeState {
    let mut assessor = assessor_for(spec, scenario).expect("assessment spec fits scenario");
    assessor.assess(true_state, prior, recent_action.unwrap_or(0), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bundled;
    use rand::SeedableRng;

    fn rng(seed: u64) -> EpisodeRng {
        EpisodeRng::seed_from_u64(seed)
    }

    fn uniform_bank(items: usize, k: usize, slip: f64, guess: f64) -> DinaItemBank {
        let q_rows = (0..items).map(|j| 1u64 << (j % k)).collect();
        DinaItemBank::new(q_rows, vec![slip; items], vec![guess; items])
    }

    #[test]
    fn dina_response_rate_matches_closed_form() {
        let bank = uniform_bank(1, 4, 0.2, 0.1);
        let full = KnowledgeState::new(vec![1.0; 4]);
        let none = KnowledgeState::zeros(4);
        assert_eq!(bank.correct_probability(0, full.to_mask()), 0.8);
        assert_eq!(bank.correct_probability(0, none.to_mask()), 0.1);

        let mut r = rng(1);
        let n = 100_000;
        let full_rate = (0..n)
            .filter(|_| dina_simulate_responses(&full, &bank, &mut r)[0])
            .count() as f64
            / n as f64;
        assert!((full_rate - 0.8).abs() < 0.01, "{full_rate}");
        let none_rate = (0..n)
            .filter(|_| dina_simulate_responses(&none, &bank, &mut r)[0])
            .count() as f64
            / n as f64;
        assert!((none_rate - 0.1).abs() < 0.01, "{none_rate}");
    }

    #[test]
    fn dina_mle_extreme_patterns_pick_extreme_states() {
        let s = bundled::discrete_case();
        let admissible = s.graph.admissible_states().unwrap();
        let bank = uniform_bank(16, 4, 0.1, 0.1);
        let all_correct = vec![true; 16];
        assert_eq!(dina_mle(&all_correct, &bank, &admissible, 4).to_mask(), 0b1111);
        let all_wrong = vec![false; 16];
        assert_eq!(dina_mle(&all_wrong, &bank, &admissible, 4).to_mask(), 0b0000);
    }

    #[test]
    fn dina_mle_with_no_items_breaks_tie_to_lowest_state() {
        let s = bundled::discrete_case();
        let admissible = s.graph.admissible_states().unwrap();
        let bank = DinaItemBank::new(vec![], vec![], vec![]);
        assert_eq!(dina_mle(&[], &bank, &admissible, 4).to_mask(), 0b0000);
    }

    #[test]
    fn dina_mle_agrees_with_exhaustive_argmax_for_all_patterns() {
        let s = bundled::discrete_case();
        let admissible = s.graph.admissible_states().unwrap();
        let mut r = rng(42);
        let bank = DinaItemBank::generate(8, 4, &s.graph, [0.1, 0.3], &mut r);
        for pattern in 0u32..(1 << 8) {
            let responses: Vec<bool> = (0..8).map(|j| pattern >> j & 1 == 1).collect();
            let got = dina_mle(&responses, &bank, &admissible, 4).to_mask();
            // Independent likelihood: plain probability product.
            let lik = |mask: u64| -> f64 {
                responses
                    .iter()
                    .enumerate()
                    .map(|(j, &y)| {
                        let p = bank.correct_probability(j, mask);
                        if y {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            };
            let got_lik = lik(got);
            let max_lik = admissible.iter().map(|&m| lik(m)).fold(f64::MIN, f64::max);
            assert!(
                got_lik >= max_lik * (1.0 - 1e-12),
                "pattern {pattern:#b}: {got_lik} < {max_lik}"
            );
            // Tie break: nothing earlier in chain order reaches the max.
            for &m in &admissible {
                if m == got {
                    break;
                }
                assert!(lik(m) < max_lik * (1.0 - 1e-12), "earlier state ties at {pattern:#b}");
            }
        }
    }

    #[test]
    fn m3pl_probability_matches_closed_form() {
        let bank = M3plItemBank::new(vec![vec![1.0]], vec![0.0], vec![0.0]);
        // theta = 0 => p = 0.5
        assert!((bank.correct_probability(0, &[0.0]) - 0.5).abs() < 1e-12);
        let bank2 = M3plItemBank::new(vec![vec![1.0]], vec![-30.0], vec![0.2]);
        assert!(bank2.correct_probability(0, &[0.0]) > 0.999);

        let bank3 = M3plItemBank::new(vec![vec![0.8, 0.4]], vec![0.3], vec![0.15]);
        let theta = [0.6, -0.2];
        let expect = 0.15 + 0.85 * sigmoid(0.8 * 0.6 + 0.4 * (-0.2) - 0.3);
        let state = KnowledgeState::new(theta.iter().map(|&t| sigmoid(t)).collect());
        let mut r = rng(7);
        let n = 100_000;
        let rate = (0..n)
            .filter(|_| m3pl_simulate_responses(&state, &bank3, &mut r)[0])
            .count() as f64
            / n as f64;
        assert!((rate - expect).abs() < 0.01, "{rate} vs {expect}");
    }

    #[test]
    fn m3pl_estimate_with_no_items_returns_prior() {
        let bank = M3plItemBank { discrimination: vec![], difficulty: vec![], guessing: vec![] };
        let prior = KnowledgeState::new(vec![0.3, 0.5, 0.82]);
        let est = m3pl_estimate(&[], &bank, &prior);
        assert!(est.converged);
        for (a, b) in est.state.values().iter().zip(prior.values().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn m3pl_estimate_with_huge_penalty_returns_prior() {
        let mut r = rng(3);
        let bank = M3plItemBank::generate(4, 3, None, &mut r);
        let prior = KnowledgeState::new(vec![0.25, 0.6, 0.4]);
        let responses = vec![true, false, true, true];
        let est = m3pl_estimate_with_lambda(&responses, &bank, &prior, 1e12);
        for (a, b) in est.state.values().iter().zip(prior.values().iter()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn m3pl_estimate_matches_bisection_oracle_in_one_dimension() {
        // Single item, single point, c = 0: the penalized score function is
        // strictly decreasing in theta, so bisection pins the optimum.
        for (y, alpha, b, prior, lambda) in [
            (true, 1.0, 0.0, 0.5, 1.0),
            (false, 1.3, 0.4, 0.3, 0.5),
            (true, 0.7, -0.8, 0.9, 0.25),
        ] {
            let bank = M3plItemBank::new(vec![vec![alpha]], vec![b], vec![0.0]);
            let prior_state = KnowledgeState::new(vec![prior]);
            let est = m3pl_estimate_with_lambda(&[y], &bank, &prior_state, lambda);

            let theta0 = logit(prior);
            let score = |t: f64| -> f64 {
                let target = if y { 1.0 } else { 0.0 };
                (target - sigmoid(alpha * t - b)) * alpha - 2.0 * lambda * (t - theta0)
            };
            let (mut lo, mut hi) = (-60.0, 60.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if score(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = sigmoid(0.5 * (lo + hi));
            let got = est.state.values()[0];
            assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
        }
    }

    #[test]
    fn m3pl_estimates_stay_strictly_inside_unit_interval() {
        let mut r = rng(11);
        for _ in 0..50 {
            let bank = M3plItemBank::generate(6, 4, None, &mut r);
            let true_state =
                KnowledgeState::new((0..4).map(|_| r.random_range(0.0..=1.0)).collect());
            let prior = KnowledgeState::zeros(4);
            let responses = m3pl_simulate_responses(&true_state, &bank, &mut r);
            let est = m3pl_estimate(&responses, &bank, &prior);
            assert!(est.state.values().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn assess_none_is_identity() {
        let s = bundled::continuous_case_1();
        let mut r = rng(19);
        for _ in 0..20 {
            let state = KnowledgeState::new((0..s.k).map(|_| r.random_range(0.0..=1.0)).collect());
            let prior = KnowledgeState::zeros(s.k);
            let est = assess(&state, &AssessmentSpec::None, &prior, &s, Some(0), &mut r);
            assert_eq!(est, state);
        }
    }

    #[test]
    fn dina_more_items_means_lower_hamming_error() {
        let s = bundled::discrete_case();
        let admissible = s.graph.admissible_states().unwrap();
        let mut r = rng(23);
        let mean_err = |items: usize, r: &mut EpisodeRng| -> f64 {
            let mut total = 0usize;
            let trials = 10_000;
            for t in 0..trials {
                let truth = KnowledgeState::from_mask(admissible[t % admissible.len()], 4);
                let bank = DinaItemBank::generate(items, 4, &s.graph, [0.1, 0.3], r);
                let responses = dina_simulate_responses(&truth, &bank, r);
                let est = dina_mle(&responses, &bank, &admissible, 4);
                total += (est.to_mask() ^ truth.to_mask()).count_ones() as usize;
            }
            total as f64 / trials as f64
        };
        let err16 = mean_err(16, &mut r);
        let err4 = mean_err(4, &mut r);
        assert!(err16 < err4, "J=16 error {err16} !< J=4 error {err4}");
    }

    #[test]
    fn dina_error_is_nonincreasing_in_item_count() {
        let s = bundled::discrete_case();
        let admissible = s.graph.admissible_states().unwrap();
        let trials = 10_000;
        let mut r = rng(29);
        let stats = |items: usize, r: &mut EpisodeRng| -> (f64, f64) {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for t in 0..trials {
                let truth = KnowledgeState::from_mask(admissible[t % admissible.len()], 4);
                let bank = DinaItemBank::generate(items, 4, &s.graph, [0.1, 0.3], r);
                let responses = dina_simulate_responses(&truth, &bank, r);
                let est = dina_mle(&responses, &bank, &admissible, 4);
                let e = (est.to_mask() ^ truth.to_mask()).count_ones() as f64;
                sum += e;
                sumsq += e * e;
            }
            let mean = sum / trials as f64;
            let var = (sumsq / trials as f64 - mean * mean).max(0.0);
            (mean, (var / trials as f64).sqrt())
        };
        let series: Vec<(f64, f64)> =
            [4, 16, 64].iter().map(|&j| stats(j, &mut r)).collect();
        let mut inversions = 0;
        for pair in series.windows(2) {
            let (m0, se0) = pair[0];
            let (m1, se1) = pair[1];
            if m1 > m0 {
                inversions += 1;
                let z = (m1 - m0) / (se0 * se0 + se1 * se1).sqrt().max(1e-12);
                assert!(z < 2.326, "significant error increase with more items: z = {z}");
            }
        }
        assert!(inversions <= 1, "{inversions} inversions");
    }

    #[test]
    fn m3pl_more_items_means_lower_squared_error() {
        let s = bundled::continuous_case_1();
        let mut r = rng(31);
        let mean_mse = |items: usize, r: &mut EpisodeRng| -> f64 {
            let mut total = 0.0;
            let trials = 10_000;
            for _ in 0..trials {
                let truth =
                    KnowledgeState::new((0..s.k).map(|_| r.random_range(0.0..=1.0)).collect());
                let prior = KnowledgeState::new(vec![0.5; s.k]);
                let action = r.random_range(0..s.action_count());
                let bank = M3plItemBank::generate(items, s.k, Some(&s.actions[action]), r);
                let responses = m3pl_simulate_responses(&truth, &bank, r);
                let est = m3pl_estimate(&responses, &bank, &prior);
                total += est
                    .state
                    .values()
                    .iter()
                    .zip(truth.values().iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
            total / trials as f64
        };
        let mse8 = mean_mse(8, &mut r);
        let mse2 = mean_mse(2, &mut r);
        assert!(mse8 < mse2, "J=8 mse {mse8} !< J=2 mse {mse2}");
    }
}
