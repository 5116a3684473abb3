//! Curiosity-driven learning-path recommendation toolkit.
//!
//! Simulated learner environments with psychometric assessment (DINA and
//! M3PL IRT), a prediction-error curiosity reward, an asynchronous
//! actor-critic policy learner, and an experiment harness with a
//! dynamic-programming oracle for the discrete benchmark.

pub mod agent;

pub mod assessment;

pub mod curiosity;

pub mod environment;

pub mod harness;

pub mod neuralnet;

pub mod scenario;

pub mod seeding;

pub use scenario::{
    AssessmentSpec, KnowledgeState, LearningMaterial, PrereqEdge, PrerequisiteGraph, Scenario,
    ScenarioError, StateMode, TransitionSpec, ValidationReport,
};

pub use agent::{ScoreLog, TrainConfig, TrainError, TrainResult};

pub use harness::{DpOracle, ExperimentPlan, HarnessError, ScoreCurve};
