//! Maps a 6-qubit Ising ground state onto ladder circuits of growing depth
//! and decomposes one extracted gate back into Cartan parameters.
//!
//! Usage: `cargo run --release --example circuit_encoding`

use httn::pauli::{ground_state, ising_1d};
use httn::qsim::{cartan, encode_state, kak_params, EncodeOptions, PARAMS_PER_GATE};
use httn::qsim::gates::phase_fidelity;

fn main() -> httn::Result<()> {
    let (_, psi) = ground_state(&ising_1d(6, 1.0, 1.0, true)?)?;
    let target: Vec<_> = psi.iter().copied().collect();
    for layers in 1..=4 {
        for polish in [0, 200] {
            let enc = encode_state(&target, &EncodeOptions { layers, polish_iters: polish })?;
            println!("layers {layers}  polish {polish:3}  fidelity {:.8}", enc.fidelity);
        }
    }
    let enc = encode_state(&target, &EncodeOptions { layers: 1, polish_iters: 0 })?;
    let u = cartan(&enc.params[..PARAMS_PER_GATE]);
    let back = cartan(&kak_params(&u));
    println!("gate round trip through Cartan parameters: 1 - fidelity = {:.2e}", 1.0 - phase_fidelity(&u, &back));
    Ok(())
}
