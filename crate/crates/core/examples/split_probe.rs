use curio_core::agent::{train, TrainConfig};
use curio_core::scenario::{bundled, AssessmentSpec};
use std::time::Instant;

fn main() {
    let scenario = bundled::discrete_case();
    for (label, batch, width) in [
        ("batch=64 width=64", 64usize, 64usize),
        ("batch=1  width=64", 1, 64),
        ("batch=64 width=8", 64, 8),
    ] {
        let mut cfg = TrainConfig::new(1000, 7);
        cfg.assessment_override = Some(AssessmentSpec::None);
        cfg.batch_size = batch;
        cfg.hidden_width = width;
        let t0 = Instant::now();
        train(&scenario, &cfg).unwrap();
        println!("{label}: {:.2}s for 1000 episodes", t0.elapsed().as_secs_f64());
    }
}
