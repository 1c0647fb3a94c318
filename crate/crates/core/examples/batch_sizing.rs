//! How large the anchor batch must be for a target gradient accuracy.
use svrg_ol::{batch_error_bound, required_batch_size};

fn main() -> svrg_ol::Result<()> {
    println!("{:>6} {:>4} {:>7} {:>7} {:>12}", "G", "K", "delta", "eps", "batch size");
    for (g, k, delta, eps) in [
        (1.0, 1, (-1.0f64).exp(), 1.0),
        (1.0, 10, 0.05, 0.1),
        (1.0, 10, 0.05, 0.05),
        (2.0, 8, 0.01, 0.1),
        (5.0, 20, 0.001, 0.01),
    ] {
        let n = required_batch_size(g, k, delta, eps)?;
        println!("{g:>6} {k:>4} {delta:>7.4} {eps:>7} {n:>12}");
        assert!(batch_error_bound(g, k, delta, n) <= eps);
    }
    println!("\nbound for G = 1, K = 10, delta = 0.05 as the batch grows:");
    for n in [100u64, 1_000, 10_000, 100_000] {
        println!("  N = {n:>6}: {:.4}", batch_error_bound(1.0, 10, 0.05, n));
    }
    Ok(())
}
