//! Sparse and dense vector basics: construction, dot products, axpy.
use svrg_ol::{axpy_sparse, dot, l2_norm, DenseVector, SparseVector};

fn main() -> svrg_ol::Result<()> {
    // duplicate indices are summed, zeros dropped
    let x = SparseVector::from_pairs(8, [(5, 1.0), (1, -2.0), (5, 0.5), (3, 0.0)])?;
    println!(
        "x: nnz = {}, indices = {:?}, values = {:?}",
        x.nnz(),
        x.indices(),
        x.values()
    );

    let w: DenseVector = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8].into();
    println!("x . w = {}", dot(&x, &w)?);
    println!("||x|| = {}, ||w|| = {}", x.norm(), l2_norm(&w));

    // w + 0.5 x touches only x's support
    let y = axpy_sparse(0.5, &x, &w)?;
    println!("w + 0.5 x = {:?}", y.as_slice());

    println!("x scaled by 3: {:?}", x.scaled(3.0).to_dense().as_slice());
    Ok(())
}
