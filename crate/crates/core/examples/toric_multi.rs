//! Toric code on a 4x4 torus with six quantum tensors above a layer of
//! random classical unitaries, best of several random initializations,
//! against a classical tree of bond dimension 2.
//!
//! Usage: `cargo run --release --example toric_multi -- [realizations] [sweeps] [vqe iters]`

use httn::htensor::{classical_reference, httn_sweep, multi_quantum_tree, HybridOptions, VqeOptions};
use httn::pauli::toric_code;
use httn::ttn::{domino_quadtree, EnvCache, LocalOperator, SweepOptions};

fn main() -> httn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let realizations: u64 = arg(0, "20").parse().expect("realizations");
    let sweeps: usize = arg(1, "5").parse().expect("sweeps");
    let iters: usize = arg(2, "100").parse().expect("vqe iters");

    let op = toric_code(4, 4)?;
    let order = domino_quadtree(4, 4)?;
    let mut best_classical = f64::INFINITY;
    for seed in 0..realizations.min(10) {
        let (_, e) = classical_reference(&op, &order, 2, seed, &SweepOptions::default())?;
        best_classical = best_classical.min(e);
    }
    println!("exact -16  classical chi=2 best {best_classical:.6}");

    let opts = HybridOptions {
        vqe: VqeOptions {
            max_iters: iters,
            ..VqeOptions::default()
        },
        ..HybridOptions::default()
    };
    let mut best = f64::INFINITY;
    for seed in 0..realizations {
        let t = std::time::Instant::now();
        let mut net = multi_quantum_tree(&[2; 16], &order, 2, 3, seed)?;
        let mut cache = EnvCache::new(LocalOperator::from_pauli(&op));
        let mut energies = Vec::with_capacity(sweeps);
        for _ in 0..sweeps {
            energies.push(httn_sweep(&mut net, &mut cache, &op, &opts)?.energy);
        }
        let last = *energies.last().expect("at least one sweep");
        best = best.min(last);
        let shown: Vec<String> = energies.iter().map(|e| format!("{e:.6}")).collect();
        println!("seed {seed:3}  {}  {:.1}s", shown.join(" "), t.elapsed().as_secs_f64());
    }
    println!("best hybrid {best:.8}  error {:.3e}", best + 16.0);
    Ok(())
}
