//! Declarative experiment definition: knowledge space, learning materials,
//! prerequisite hierarchy, transition model, assessment setup and evaluation
//! weights, plus the `.scn` file schema (TOML) and validation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

/// Enumerating admissible discrete states is capped to keep validation
/// bounded for sparse prerequisite graphs.
pub const MAX_ADMISSIBLE_STATES: usize = 4096;

/// Whether mastery attributes are binary or continuous in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateMode {
    Discrete,
    Continuous,
}

/// Length-K vector of per-point mastery attributes. Carries the true state,
/// the assessed estimate and the predictor output alike; the role is decided
/// by context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KnowledgeState {
    values: Vec<f64>,
}

impl KnowledgeState {
    pub fn new(values: Vec<f64>) -> Self {
        KnowledgeState { values }
    }

    pub fn zeros(k: usize) -> Self {
        KnowledgeState { values: vec![0.0; k] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn in_unit_interval(&self) -> bool {
        self.values.iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    /// Bitmask over mastered points; requires a binary state and K <= 64.
    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.len() <= 64);
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1.0)
            .fold(0u64, |m, (i, _)| m | (1 << i))
    }

    pub fn from_mask(mask: u64, k: usize) -> Self {
        KnowledgeState {
            values: (0..k).map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// A recommendable learning action: the points it trains and the length-K
/// training weight vector used by the continuous transition.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningMaterial {
    pub id: usize,
    pub trained_points: Vec<usize>,
    pub training_weights: Vec<f64>,
}

/// One prerequisite edge: `child` only becomes learnable once the mastery of
/// `parent` reaches `threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrereqEdge {
    pub parent: usize,
    pub child: usize,
    pub threshold: f64,
}

/// Prerequisite DAG with AND semantics: a point with several parents needs
/// every one of them past its threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct PrerequisiteGraph {
    k: usize,
    edges: Vec<PrereqEdge>,
}

impl PrerequisiteGraph {
    pub fn new(k: usize, edges: Vec<PrereqEdge>) -> Self {
        PrerequisiteGraph { k, edges }
    }

    pub fn point_count(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[PrereqEdge] {
        &self.edges
    }

    pub fn parents_of(&self, child: usize) -> impl Iterator<Item = &PrereqEdge> {
        self.edges.iter().filter(move |e| e.child == child)
    }

    /// Kahn's algorithm; returns false if a cycle exists.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.k];
        for e in &self.edges {
            if e.child < self.k {
                indeg[e.child] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..self.k).filter(|&p| indeg[p] == 0).collect();
        let mut seen = 0;
        while let Some(p) = queue.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.parent == p) {
                if e.child < self.k {
                    indeg[e.child] -= 1;
                    if indeg[e.child] == 0 {
                        queue.push(e.child);
                    }
                }
            }
        }
        seen == self.k
    }

    /// Transitive ancestors of a point (all prerequisites, direct or not).
    pub fn ancestors(&self, point: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![point];
        while let Some(p) = stack.pop() {
            for e in self.parents_of(p) {
                if out.insert(e.parent) {
                    stack.push(e.parent);
                }
            }
        }
        out.into_iter().collect()
    }

    /// All downward-closed mastery sets (a mastered point implies mastered
    /// ancestors), ordered by (mastered count, mask). For the one-to-one
    /// chain this is exactly the S1..S5 progression.
    pub fn admissible_states(&self) -> Result<Vec<u64>, String> {
        if self.k > 64 {
            return Err(format!("discrete mode supports at most 64 points, got {}", self.k));
        }
        let mut closed = BTreeSet::new();
        closed.insert(0u64);
        let mut frontier = vec![0u64];
        while let Some(mask) = frontier.pop() {
            for p in 0..self.k {
                if mask >> p & 1 == 1 {
                    continue;
                }
                let unlocked = self.parents_of(p).all(|e| mask >> e.parent & 1 == 1);
                if unlocked {
                    let next = mask | (1 << p);
                    if closed.insert(next) {
                        frontier.push(next);
                        if closed.len() > MAX_ADMISSIBLE_STATES {
                            return Err(format!(
                                "admissible state set exceeds {MAX_ADMISSIBLE_STATES}"
                            ));
                        }
                    }
                }
            }
        }
        let mut states: Vec<u64> = closed.into_iter().collect();
        states.sort_by_key(|&m| (m.count_ones(), m));
        Ok(states)
    }
}

/// Ground-truth dynamics declaration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionSpec {
    /// One row-stochastic matrix per action over the admissible state set.
    Discrete { matrices: Vec<Vec<Vec<f64>>> },
    /// Saturating exponential gain with a shared chi-square noise draw.
    Continuous { noise_df: f64 },
}

/// Assessment model configuration. `none` delivers the true state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssessmentSpec {
    None,
    Dina { items: usize, slip_guess_range: [f64; 2] },
    M3pl { items: usize },
}

/// A full experiment definition.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub k: usize,
    pub horizon: usize,
    pub labels: Option<Vec<String>>,
    pub actions: Vec<LearningMaterial>,
    pub graph: PrerequisiteGraph,
    pub eval_weights: Vec<f64>,
    pub transition: TransitionSpec,
    pub assessment: AssessmentSpec,
    pub initial_state: KnowledgeState,
}

impl Scenario {
    pub fn mode(&self) -> StateMode {
        match self.transition {
            TransitionSpec::Discrete { .. } => StateMode::Discrete,
            TransitionSpec::Continuous { .. } => StateMode::Continuous,
        }
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    /// Runs every structural check and returns the collected violations.
    pub fn validate(&self) -> ValidationReport {
        validate_scenario(self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        load_scenario(path.as_ref())
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            path: PathBuf::from("<string>"),
            message: e.to_string(),
        })?;
        let scenario = file.into_scenario().map_err(|message| ScenarioError::Parse {
            path: PathBuf::from("<string>"),
            message,
        })?;
        let report = scenario.validate();
        if report.is_valid() {
            Ok(scenario)
        } else {
            Err(ScenarioError::Invalid { path: PathBuf::from("<string>"), report })
        }
    }

    pub fn to_toml_string(&self) -> String {
        let file = ScenarioFile::from_scenario(self);
        toml::to_string(&file).expect("scenario serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        std::fs::write(path.as_ref(), self.to_toml_string()).map_err(|source| {
            ScenarioError::Io { path: path.as_ref().to_path_buf(), source }
        })
    }
}

/// Loads, converts and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let scenario = file
        .into_scenario()
        .map_err(|message| ScenarioError::Parse { path: path.to_path_buf(), message })?;
    let report = scenario.validate();
    if report.is_valid() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid { path: path.to_path_buf(), report })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario {path}:\n{report}")]
    Invalid { path: PathBuf, report: ValidationReport },
}

/// Violations collected by `validate_scenario`; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: impl Into<String>) {
        self.violations.push(v.into());
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// Checks every structural invariant: weight normalization, graph
/// acyclicity, matrix stochasticity, state admissibility and material
/// consistency. Report-based; never fails outright.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    if s.k == 0 {
        report.push("knowledge point count must be at least 1");
    }
    if s.horizon == 0 {
        report.push("horizon must be at least 1");
    }
    if s.actions.is_empty() {
        report.push("at least one learning material is required");
    }
    if let Some(labels) = &s.labels {
        if labels.len() != s.k {
            report.push(format!("{} labels for {} knowledge points", labels.len(), s.k));
        }
    }

    if s.eval_weights.len() != s.k {
        report.push(format!("eval_weights has length {}, expected {}", s.eval_weights.len(), s.k));
    }
    if s.eval_weights.iter().any(|&w| w < 0.0) {
        report.push("eval_weights must be nonnegative");
    }
    let wsum: f64 = s.eval_weights.iter().sum();
    if (wsum - 1.0).abs() > 1e-9 {
        report.push(format!("eval_weights not normalized: sum = {wsum}"));
    }

    for m in &s.actions {
        let tag = format!("action {}", m.id + 1);
        if m.trained_points.is_empty() {
            report.push(format!("{tag}: trains no knowledge points"));
        }
        if m.training_weights.len() != s.k {
            report.push(format!("{tag}: weight vector length mismatch"));
            continue;
        }
        for p in 0..s.k {
            let trained = m.trained_points.contains(&p);
            let positive = m.training_weights[p] > 0.0;
            if trained != positive {
                report.push(format!(
                    "{tag}: training weight of point {} must be positive iff trained",
                    p + 1
                ));
            }
        }
    }

    for e in s.graph.edges() {
        if e.parent >= s.k || e.child >= s.k {
            report.push(format!(
                "prerequisite ({}, {}) references a point outside 1..={}",
                e.parent + 1,
                e.child + 1,
                s.k
            ));
        }
        if e.parent == e.child {
            report.push(format!("prerequisite of point {} on itself", e.child + 1));
        }
        if !(e.threshold > 0.0 && e.threshold <= 1.0) {
            report.push(format!(
                "prerequisite ({}, {}): threshold {} outside (0, 1]",
                e.parent + 1,
                e.child + 1,
                e.threshold
            ));
        }
    }
    if !s.graph.is_acyclic() {
        report.push("cycle detected in prerequisite graph");
    }

    if s.initial_state.len() != s.k {
        report.push(format!(
            "initial_state has length {}, expected {}",
            s.initial_state.len(),
            s.k
        ));
    }
    match s.mode() {
        StateMode::Discrete => {
            if !s.initial_state.is_binary() {
                report.push("discrete initial_state entries must be 0 or 1");
            }
        }
        StateMode::Continuous => {
            if !s.initial_state.in_unit_interval() {
                report.push("continuous initial_state entries must lie in [0, 1]");
            }
        }
    }

    match &s.transition {
        TransitionSpec::Discrete { matrices } => {
            validate_discrete_transition(s, matrices, &mut report);
        }
        TransitionSpec::Continuous { noise_df } => {
            if !(*noise_df > 0.0) {
                report.push(format!("noise_df must be positive, got {noise_df}"));
            }
        }
    }

    match &s.assessment {
        AssessmentSpec::None => {}
        AssessmentSpec::Dina { items: _, slip_guess_range: [lo, hi] } => {
            if !(0.0 < *lo && lo <= hi && *hi < 0.5) {
                report.push(format!("DINA slip/guess range [{lo}, {hi}] outside (0, 0.5)"));
            }
            if s.mode() != StateMode::Discrete {
                report.push("DINA assessment requires a discrete scenario");
            }
        }
        AssessmentSpec::M3pl { .. } => {
            if s.mode() != StateMode::Continuous {
                report.push("M3PL assessment requires a continuous scenario");
            }
        }
    }

    report
}

fn validate_discrete_transition(
    s: &Scenario,
    matrices: &[Vec<Vec<f64>>],
    report: &mut ValidationReport,
) {
    if !s.graph.is_acyclic() {
        return; // admissible enumeration needs a DAG
    }
    let admissible = match s.graph.admissible_states() {
        Ok(a) => a,
        Err(msg) => {
            report.push(msg);
            return;
        }
    };
    let n = admissible.len();
    if matrices.len() != s.actions.len() {
        report.push(format!(
            "{} transition matrices for {} actions",
            matrices.len(),
            s.actions.len()
        ));
    }
    for (a, matrix) in matrices.iter().enumerate() {
        let tag = format!("transition matrix of action {}", a + 1);
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            report.push(format!("{tag}: expected {n}x{n} over the admissible states"));
            continue;
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.iter().any(|&p| p < 0.0 || p > 1.0) {
                report.push(format!("{tag}: row {} has entries outside [0, 1]", i + 1));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                report.push(format!("{tag}: row {} sums to {sum}, not 1", i + 1));
            }
            for (j, &p) in row.iter().enumerate() {
                // No retrograde: mass only on states that keep every
                // mastered point mastered.
                if p > 0.0 && admissible[j] & admissible[i] != admissible[i] {
                    report.push(format!(
                        "{tag}: retrograde transition from state {} to state {}",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
    }
    if s.initial_state.len() == s.k && s.initial_state.is_binary() {
        let mask = s.initial_state.to_mask();
        if !admissible.contains(&mask) {
            report.push("initial_state is not an admissible discrete state");
        }
    }
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

/// Raw `.scn` schema. Knowledge points are 1-based in files and 0-based in
/// memory; action ids are implied by order.
#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    horizon: usize,
    eval_weights: Vec<f64>,
    initial_state: Vec<f64>,
    knowledge_points: KnowledgePointsSection,
    transition: TransitionSpec,
    assessment: AssessmentSpec,
    #[serde(default)]
    actions: Vec<ActionSection>,
    #[serde(default)]
    prerequisites: Vec<PrereqSection>,
}

#[derive(Debug, Serialize, Deserialize)]
struct KnowledgePointsSection {
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ActionSection {
    points: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PrereqSection {
    parent: usize,
    child: usize,
    threshold: f64,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, String> {
        let k = self.knowledge_points.count;
        let to_zero_based = |point: usize, ctx: &str| -> Result<usize, String> {
            if point == 0 || point > k {
                Err(format!("{ctx}: knowledge point {point} outside 1..={k}"))
            } else {
                Ok(point - 1)
            }
        };

        let mut actions = Vec::with_capacity(self.actions.len());
        for (id, raw) in self.actions.into_iter().enumerate() {
            let ctx = format!("actions[{id}]");
            let mut trained = Vec::with_capacity(raw.points.len());
            for p in &raw.points {
                trained.push(to_zero_based(*p, &ctx)?);
            }
            if let Some(w) = &raw.weights {
                if w.len() != trained.len() {
                    return Err(format!("{ctx}: {} weights for {} points", w.len(), trained.len()));
                }
            }
            let mut weights = vec![0.0; k];
            let per_point = raw.weights.unwrap_or_else(|| {
                // Default: unit training effort split across trained points.
                vec![1.0 / trained.len().max(1) as f64; trained.len()]
            });
            for (p, w) in trained.iter().zip(per_point.iter()) {
                weights[*p] = *w;
            }
            actions.push(LearningMaterial { id, trained_points: trained, training_weights: weights });
        }

        let mut edges = Vec::with_capacity(self.prerequisites.len());
        for (i, raw) in self.prerequisites.into_iter().enumerate() {
            let ctx = format!("prerequisites[{i}]");
            edges.push(PrereqEdge {
                parent: to_zero_based(raw.parent, &ctx)?,
                child: to_zero_based(raw.child, &ctx)?,
                threshold: raw.threshold,
            });
        }

        Ok(Scenario {
            k,
            horizon: self.horizon,
            labels: self.knowledge_points.labels,
            actions,
            graph: PrerequisiteGraph::new(k, edges),
            eval_weights: self.eval_weights,
            transition: self.transition,
            assessment: self.assessment,
            initial_state: KnowledgeState::new(self.initial_state),
        })
    }

    fn from_scenario(s: &Scenario) -> ScenarioFile {
        ScenarioFile {
            horizon: s.horizon,
            eval_weights: s.eval_weights.clone(),
            initial_state: s.initial_state.values().to_vec(),
            knowledge_points: KnowledgePointsSection { count: s.k, labels: s.labels.clone() },
            transition: s.transition.clone(),
            assessment: s.assessment.clone(),
            actions: s
                .actions
                .iter()
                .map(|m| ActionSection {
                    points: m.trained_points.iter().map(|p| p + 1).collect(),
                    weights: Some(
                        m.trained_points.iter().map(|&p| m.training_weights[p]).collect(),
                    ),
                })
                .collect(),
            prerequisites: s
                .graph
                .edges()
                .iter()
                .map(|e| PrereqSection {
                    parent: e.parent + 1,
                    child: e.child + 1,
                    threshold: e.threshold,
                })
                .collect(),
        }
    }
}

/// The three experiment definitions shipped with the crate.
pub mod bundled {
    use super::Scenario;

    pub const DISCRETE_CASE: &str = include_str!("../../../scenarios/discrete_case.scn");
    pub const CONTINUOUS_CASE_1: &str = include_str!("../../../scenarios/continuous_case_1.scn");
    pub const CONTINUOUS_CASE_2: &str = include_str!("../../../scenarios/continuous_case_2.scn");

    pub fn discrete_case() -> Scenario {
        Scenario::from_toml_str(DISCRETE_CASE).expect("bundled discrete scenario is valid")
    }

    pub fn continuous_case_1() -> Scenario {
        Scenario::from_toml_str(CONTINUOUS_CASE_1).expect("bundled continuous case 1 is valid")
    }

    pub fn continuous_case_2() -> Scenario {
        Scenario::from_toml_str(CONTINUOUS_CASE_2).expect("bundled continuous case 2 is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_discrete_case_matches_published_setup() {
        let s = bundled::discrete_case();
        assert!(s.validate().is_valid(), "{}", s.validate());
        assert_eq!(s.k, 4);
        assert_eq!(s.horizon, 15);
        assert_eq!(s.action_count(), 4);
        assert_eq!(s.eval_weights, vec![0.15, 0.25, 0.35, 0.25]);
        let admissible = s.graph.admissible_states().unwrap();
        assert_eq!(admissible, vec![0b0000, 0b0001, 0b0011, 0b0111, 0b1111]);
    }

    #[test]
    fn bundled_continuous_case_1_shape() {
        let s = bundled::continuous_case_1();
        assert!(s.validate().is_valid(), "{}", s.validate());
        assert_eq!(s.k, 10);
        assert_eq!(s.action_count(), 15);
        assert_eq!(s.horizon, 25);
        let wsum: f64 = s.eval_weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bundled_continuous_case_2_shape() {
        let s = bundled::continuous_case_2();
        assert!(s.validate().is_valid(), "{}", s.validate());
        assert_eq!(s.k, 16);
        assert_eq!(s.action_count(), 22);
        assert_eq!(s.horizon, 40);
        assert!(s.eval_weights.iter().all(|&w| w == 0.0625));
    }

    #[test]
    fn unnormalized_weights_are_reported() {
        let mut s = bundled::discrete_case();
        s.eval_weights = vec![0.15, 0.25, 0.35, 0.15];
        let report = s.validate();
        assert!(report.violations.iter().any(|v| v.contains("not normalized")), "{report}");
    }

    #[test]
    fn cycle_is_reported() {
        let mut s = bundled::continuous_case_1();
        let mut edges = s.graph.edges().to_vec();
        edges.push(PrereqEdge { parent: 1, child: 0, threshold: 0.5 });
        edges.push(PrereqEdge { parent: 0, child: 1, threshold: 0.5 });
        s.graph = PrerequisiteGraph::new(s.k, edges);
        let report = s.validate();
        assert!(report.violations.iter().any(|v| v.contains("cycle detected")), "{report}");
    }

    #[test]
    fn retrograde_matrix_is_reported() {
        let mut s = bundled::discrete_case();
        if let TransitionSpec::Discrete { matrices } = &mut s.transition {
            // Move mass from S2 back to S1.
            matrices[0][1] = vec![0.5, 0.5, 0.0, 0.0, 0.0];
        }
        let report = s.validate();
        assert!(report.violations.iter().any(|v| v.contains("retrograde")), "{report}");
    }

    #[test]
    fn non_stochastic_row_is_reported() {
        let mut s = bundled::discrete_case();
        if let TransitionSpec::Discrete { matrices } = &mut s.transition {
            matrices[2][0][0] = 0.9;
        }
        let report = s.validate();
        assert!(report.violations.iter().any(|v| v.contains("sums to")), "{report}");
    }

    #[test]
    fn bundled_scenarios_roundtrip_identically() {
        for s in [
            bundled::discrete_case(),
            bundled::continuous_case_1(),
            bundled::continuous_case_2(),
        ] {
            let text = s.to_toml_string();
            let back = Scenario::from_toml_str(&text).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn out_of_range_point_is_a_parse_error() {
        let text = bundled::DISCRETE_CASE.replace("points = [4]", "points = [9]");
        match Scenario::from_toml_str(&text) {
            Err(ScenarioError::Parse { message, .. }) => {
                assert!(message.contains("outside 1..=4"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ancestors_follow_transitive_edges() {
        let s = bundled::continuous_case_1();
        // Point 10 (index 9) requires 6 (index 5) which requires 2 (index 1).
        let anc = s.graph.ancestors(9);
        assert_eq!(anc, vec![1, 5]);
    }
}
