//! The batch-gradient engine: identical bits for every worker count.
use std::time::Instant;

use svrg_ol::{gen_synthetic, random_weights, BatchEngine, StreamSampler};

fn main() -> svrg_ol::Result<()> {
    let d = gen_synthetic(200, 50_000, 10, &random_weights(200, 3.0, 1), 2)?;
    let batch = StreamSampler::new(&d, 3).take(400_000)?;
    let v = random_weights(200, 1.0, 4);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!("{} samples, {cores} core(s) available", batch.len());

    let mut reference = None;
    for m in [1, 2, 4, 8] {
        let engine = BatchEngine::new(m, BatchEngine::DEFAULT_BLOCK_SIZE)?;
        let start = Instant::now();
        let (g, stats) = engine.gradient(&v, &batch)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let same = reference.get_or_insert_with(|| g.clone()).as_slice() == g.as_slice();
        println!(
            "m = {m}: {ms:7.1} ms, ||g|| = {:.12}, bitwise equal to m = 1: {same}",
            g.norm_sq().sqrt()
        );
        if m == 1 {
            println!(
                "  p-hat of feature 0 = {:.4} (floor {:.2e})",
                stats.p_hat(0),
                stats.p_floor()
            );
        }
    }
    Ok(())
}
