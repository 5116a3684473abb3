use curio_core::curiosity::{Predictor, ReplayMemory, Transition};
use curio_core::scenario::KnowledgeState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Discrete-case predictor shape: [8, 64, 64, 4]
    let mut p = Predictor::new(4, 4, 2, 64, 0.006, &mut rng);
    let mut mem = ReplayMemory::new(6000);
    for _ in 0..6000 {
        let s: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let n: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        mem.push(Transition {
            state: KnowledgeState::new(s),
            action: rng.random_range(0..4),
            next_state: KnowledgeState::new(n),
        });
    }
    // 1) full store_and_train-style step: sample + gradient + apply
    let iters = 20_000;
    let t0 = Instant::now();
    for _ in 0..iters {
        let g = p.batch_gradient(&mem, 64, &mut rng).unwrap();
        p.apply_gradient(&g);
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("sample+grad+apply: {:.1} us/step", dt / iters as f64 * 1e6);

    // 2) gradient only on a fixed batch (no sampling/cloning)
    let batch: Vec<Transition> = (0..64).map(|i| mem.get(i).clone()).collect();
    let t0 = Instant::now();
    for _ in 0..iters {
        let g = p.batch_gradient_from(&batch);
        std::hint::black_box(&g);
    }
    let dt2 = t0.elapsed().as_secs_f64();
    println!("grad only:         {:.1} us/step", dt2 / iters as f64 * 1e6);
    println!("=> sampling+clone overhead: {:.1} us/step", (dt - dt2) / iters as f64 * 1e6);
}
