//! Hybrid tree network for the critical Ising chain: a classical bottom layer
//! with one quantum tensor on top, compared against the classical network of
//! the same interface bond dimension.
//!
//! Usage: `cargo run --release --example ising_hybrid -- [sites] [e] [strategy] [sweeps] [seed] [vqe iters] [polish iters]`

use httn::htensor::{classical_reference, httn_sweep, hybrid_from_classical, CircuitInit, HybridOptions, Strategy, VqeOptions};
use httn::pauli::{ground_energy, ising_1d, lanczos_ground_energy};
use httn::ttn::{chain_order, EnvCache, LocalOperator, SweepOptions};

fn main() -> httn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let n: usize = arg(0, "8").parse().expect("sites");
    let e: usize = arg(1, "2").parse().expect("e");
    let strategy: Strategy = arg(2, "ii").parse()?;
    let sweeps: usize = arg(3, "10").parse().expect("sweeps");
    let seed: u64 = arg(4, "1").parse().expect("seed");
    let iters: usize = arg(5, "1000").parse().expect("vqe iters");
    let polish: usize = arg(6, "0").parse().expect("polish iters");

    let op = ising_1d(n, 1.0, 1.0, true)?;
    let exact = if n <= 10 { ground_energy(&op)? } else { lanczos_ground_energy(&op, 7)? };
    let (classical, e_c) = classical_reference(&op, &chain_order(n), 4, seed, &SweepOptions::default())?;
    println!("exact {exact:.12}  classical chi=4 {e_c:.12}  error {:.3e}", e_c - exact);

    let init = CircuitInit {
        m: 2,
        e,
        polish_iters: polish,
        seed,
        ..CircuitInit::default()
    };
    let (mut net, fid) = hybrid_from_classical(&classical, &init)?;
    println!("encoding fidelity {fid:.6}");
    let opts = HybridOptions {
        strategy,
        vqe: VqeOptions {
            max_iters: iters,
            ..VqeOptions::default()
        },
        reinit: init,
        ..HybridOptions::default()
    };
    let mut cache = EnvCache::new(LocalOperator::from_pauli(&op));
    for s in 1..=sweeps {
        let t = std::time::Instant::now();
        let evals = net.meter.vqe_evaluations;
        let rec = httn_sweep(&mut net, &mut cache, &op, &opts)?;
        println!(
            "sweep {s:3}  energy {:.12}  error {:.3e}  vqe iters {:5}  evals {:5}  settings {:6}  {:.1}s",
            rec.energy,
            rec.energy - exact,
            rec.vqe_iterations,
            net.meter.vqe_evaluations - evals,
            rec.tomography_settings,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
