//! Reconstructs the open-leg matrix of a quantum tensor from Pauli
//! expectations, with and without shot noise, and makes the tensor
//! isometric toward that leg.
//!
//! Usage: `cargo run --release --example tomography -- [epsilon]`

use httn::htensor::{exact_open_link, implicit_isometrize, open_link_contraction, Fold, Meter, NoiseModel, QuantumTensor};
use httn::qsim::Circuit;
use httn::tensor::{Matrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> httn::Result<()> {
    let eps: f64 = std::env::args().nth(1).map_or(1e-4, |a| a.parse().expect("epsilon"));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let circuit = Circuit::brick_wall(6, 3)?;
    let params: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut qt = QuantumTensor::new(circuit, params, vec![2, 2, 2])?;
    let p = Matrix::from_fn(4, 4, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    qt.set_p(0, p)?;

    let obs = [None, None, None];
    let exact = exact_open_link(&qt, &obs, 0)?;
    let clean = open_link_contraction(&qt, &obs, 0, Fold::Result, None)?;
    println!("noiseless reconstruction error {:.2e}", (&clean.matrix - &exact).norm());
    let mut meter = Meter::new(NoiseModel::both(eps, 1));
    let noisy = open_link_contraction(&qt, &obs, 0, Fold::Result, Some(&mut meter))?;
    println!(
        "epsilon {eps:.0e}: reconstruction error {:.2e}, {} settings",
        (&noisy.matrix - &exact).norm(),
        meter.tomography_settings
    );

    implicit_isometrize(&mut qt, 0, Fold::Result, None)?;
    let (q, _, _) = qt.dense()?.matricize(&[1, 2])?;
    println!("isometry defect after isometrization {:.2e}", (q.adjoint() * &q - Matrix::identity(4, 4)).norm());
    Ok(())
}
