//! Print the moment-closure tensors and check their antisymmetry relation.
//!
//! ```text
//! cargo run --example moment_tensors -- [N]
//! ```

use swme_dg::moment_basis::{build_tensors, shifted_legendre_values};

fn main() -> swme_dg::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let t = build_tensors(n)?;

    println!("shifted Legendre values at zeta = 0.25: {:?}", shifted_legendre_values(n, 0.25));
    for i in 0..n {
        println!("A[{}] =", i + 1);
        for j in 0..n {
            let row: Vec<String> = (0..n).map(|k| format!("{:9.5}", t.a(i, j, k))).collect();
            println!("  {}", row.join(" "));
        }
    }
    for i in 0..n {
        println!("B[{}] =", i + 1);
        for j in 0..n {
            let row: Vec<String> = (0..n).map(|k| format!("{:9.5}", t.b(i, j, k))).collect();
            println!("  {}", row.join(" "));
        }
    }
    println!("C =");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:9.3}", t.c(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    println!("antisymmetry residual: {:.3e}", t.antisymmetry_residual());
    Ok(())
}
