//! Classical tree tensor network ground states: the 8-site Ising ring at
//! several bond dimensions and the 4x4 toric code at chi = 2.
//!
//! Usage: `cargo run --release --example classical_dmrg`

use httn::pauli::{ground_energy, ising_1d, toric_code};
use httn::ttn::{chain_order, dmrg, domino_quadtree, LocalOperator, SweepOptions, TreeNetwork};

fn main() -> httn::Result<()> {
    let op = ising_1d(8, 1.0, 1.0, true)?;
    let exact = ground_energy(&op)?;
    println!("ising 8 sites, exact {exact:.12}");
    for chi in [2, 4, 16] {
        let mut net = TreeNetwork::binary_random(&[2; 8], &chain_order(8), chi, 1)?;
        let rep = dmrg(&mut net, &LocalOperator::from_pauli(&op), &SweepOptions::default())?;
        let e = *rep.energies.last().expect("at least one sweep");
        println!("  chi {chi:2}: {e:.12}  error {:.3e}  sweeps {}", e - exact, rep.energies.len());
    }

    let op = toric_code(4, 4)?;
    let order = domino_quadtree(4, 4)?;
    let best = (0..5)
        .map(|seed| {
            let mut net = TreeNetwork::binary_random(&[2; 16], &order, 2, seed)?;
            let rep = dmrg(&mut net, &LocalOperator::from_pauli(&op), &SweepOptions::default())?;
            Ok(*rep.energies.last().expect("at least one sweep"))
        })
        .collect::<httn::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    println!("toric 4x4, chi 2, best of 5: {best:.6} (exact -16)");
    Ok(())
}
