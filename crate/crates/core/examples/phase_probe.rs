use curio_core::agent::*;
use curio_core::environment::EpisodeRng;
use curio_core::scenario::KnowledgeState;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn main() {
    let mut rng = EpisodeRng::seed_from_u64(1);
    let policy = PolicyNet::new(4, 4, 64, 0.0006, &mut rng);
    let value = ValueNet::new(4, 64, 0.0006, &mut rng);
    let states: Vec<KnowledgeState> = (0..15)
        .map(|_| KnowledgeState::new((0..4).map(|_| rng.random_range(0.0..1.0)).collect()))
        .collect();
    let actions: Vec<usize> = (0..15).map(|_| rng.random_range(0..4)).collect();
    let advantages: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
    let returns: Vec<f64> = (0..15).map(|_| rng.random_range(0.0..3.0)).collect();

    let n = 5000;
    let t0 = Instant::now();
    for _ in 0..n {
        std::hint::black_box(actor_loss_grad(&policy, &states, &actions, &advantages));
    }
    println!("actor_loss_grad:  {:.1} us", t0.elapsed().as_secs_f64() / n as f64 * 1e6);

    let t0 = Instant::now();
    for _ in 0..n {
        std::hint::black_box(critic_loss_grad(&value, &states, &returns));
    }
    println!("critic_loss_grad: {:.1} us", t0.elapsed().as_secs_f64() / n as f64 * 1e6);

    let t0 = Instant::now();
    for _ in 0..n {
        for s in &states {
            std::hint::black_box(value.value(s.values()));
        }
    }
    println!("15 value fwd:     {:.1} us", t0.elapsed().as_secs_f64() / n as f64 * 1e6);

    let t0 = Instant::now();
    for _ in 0..n {
        for s in &states {
            std::hint::black_box(sample_action(&policy, s, &mut rng));
        }
    }
    println!("15 samples:       {:.1} us", t0.elapsed().as_secs_f64() / n as f64 * 1e6);

    let t0 = Instant::now();
    for _ in 0..n {
        let mut p2 = policy.clone();
        let g = vec![0.0; 8900];
        p2.apply_ascent(&g);
        std::hint::black_box(&p2);
    }
    println!("clone+apply:      {:.1} us", t0.elapsed().as_secs_f64() / n as f64 * 1e6);
}
