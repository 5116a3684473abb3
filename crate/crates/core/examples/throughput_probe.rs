use curio_core::agent::{train, TrainConfig};
use curio_core::scenario::{bundled, AssessmentSpec};
use std::time::Instant;

fn main() {
    for (name, scenario, episodes) in [
        ("discrete NO_DINA", bundled::discrete_case(), 2000usize),
        ("continuous_1 NO_IRT", bundled::continuous_case_1(), 500),
        ("continuous_2 NO_IRT", bundled::continuous_case_2(), 300),
    ] {
        let mut cfg = TrainConfig::new(episodes, 7);
        cfg.assessment_override = Some(AssessmentSpec::None);
        let t0 = Instant::now();
        let result = train(&scenario, &cfg).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        let last100: f64 = result.log.scores.iter().rev().take(100).sum::<f64>() / 100.0;
        println!(
            "{name}: {episodes} episodes in {dt:.2}s = {:.0} eps/s (mean score last 100: {last100:.1})",
            episodes as f64 / dt
        );
    }
    // DINA-assessed throughput
    let mut cfg = TrainConfig::new(2000, 7);
    cfg.assessment_override =
        Some(AssessmentSpec::Dina { items: 16, slip_guess_range: [0.1, 0.3] });
    let t0 = Instant::now();
    train(&bundled::discrete_case(), &cfg).unwrap();
    println!("discrete DINA_16: 2000 episodes in {:.2}s", t0.elapsed().as_secs_f64());
}
