//! Experiment configuration in TOML. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::htensor::{NoiseModel, Strategy};
use crate::pauli::{ising_1d, ising_2d, toric_code, OperatorSum};
use crate::qsim::{Topology, MAX_QUBITS};
use crate::ttn::{chain_order, domino_quadtree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising1d,
    Ising2d,
    Toric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Sites along x (the chain length for `ising1d`).
    pub lx: usize,
    #[serde(default = "one")]
    pub ly: usize,
    #[serde(default = "unit")]
    pub j: f64,
    #[serde(default = "unit")]
    pub h: f64,
    #[serde(default = "yes")]
    pub periodic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzKind {
    ClassicalTtn,
    HttnSingleQt,
    HttnMultiQt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitTopology {
    Ladder,
    BrickWall,
}

impl From<CircuitTopology> for Topology {
    fn from(t: CircuitTopology) -> Self {
        match t {
            CircuitTopology::Ladder => Topology::Ladder,
            CircuitTopology::BrickWall => Topology::BrickWall,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub kind: AnsatzKind,
    /// Bond dimension of the classical network (and of the classical
    /// pre-optimization for a single quantum tensor).
    pub chi: usize,
    /// Bond dimension between classical and quantum tensors; a power of two.
    #[serde(default = "four")]
    pub interface_chi: usize,
    #[serde(default = "ladder")]
    pub topology: CircuitTopology,
    /// Layers mapped from the classical state (single quantum tensor) or
    /// random layers per quantum tensor (multiple quantum tensors).
    #[serde(default = "two")]
    pub m: usize,
    /// Near-identity layers appended to a mapped circuit.
    #[serde(default)]
    pub e: usize,
    #[serde(default = "sigma")]
    pub sigma: f64,
    /// Fidelity-fit iterations after circuit construction.
    #[serde(default)]
    pub polish_iters: usize,
    /// Insert wrap gates after this many sweeps.
    #[serde(default)]
    pub wrap_after: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "lambda")]
    pub lambda: f64,
    pub sweeps: usize,
    #[serde(default = "vqe_iters")]
    pub vqe_max_iters: usize,
    /// Sweep cap of the classical pre-optimization.
    #[serde(default = "classical_sweeps")]
    pub classical_sweeps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseScope {
    None,
    Tomography,
    Vqe,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "no_noise")]
    pub scope: NoiseScope,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            scope: NoiseScope::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Write wall-clock seconds into traces; off keeps traces reproducible.
    #[serde(default)]
    pub record_timing: bool,
    pub model: ModelConfig,
    pub ansatz: AnsatzConfig,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
}

fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn four() -> usize {
    4
}
fn unit() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn ladder() -> CircuitTopology {
    CircuitTopology::Ladder
}
fn sigma() -> f64 {
    0.01
}
fn default_strategy() -> Strategy {
    Strategy::Unitary
}
fn lambda() -> f64 {
    1000.0
}
fn vqe_iters() -> usize {
    1000
}
fn classical_sweeps() -> usize {
    30
}
fn no_noise() -> NoiseScope {
    NoiseScope::None
}

impl ModelConfig {
    pub fn n_sites(&self) -> usize {
        match self.kind {
            ModelKind::Ising1d => self.lx,
            ModelKind::Ising2d | ModelKind::Toric => self.lx * self.ly,
        }
    }

    pub fn hamiltonian(&self) -> Result<OperatorSum> {
        match self.kind {
            ModelKind::Ising1d => ising_1d(self.lx, self.j, self.h, self.periodic),
            ModelKind::Ising2d => ising_2d(self.lx, self.ly, self.j, self.h, self.periodic),
            ModelKind::Toric => toric_code(self.lx, self.ly),
        }
    }

    /// Site order along the leaves of the binary tree.
    pub fn leaf_order(&self) -> Result<Vec<usize>> {
        match self.kind {
            ModelKind::Ising1d => Ok(chain_order(self.lx)),
            ModelKind::Ising2d | ModelKind::Toric => domino_quadtree(self.lx, self.ly),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn noise_model(&self, seed: u64) -> NoiseModel {
        let (vqe, tomography) = match self.noise.scope {
            NoiseScope::None => (false, false),
            NoiseScope::Tomography => (false, true),
            NoiseScope::Vqe => (true, false),
            NoiseScope::Both => (true, true),
        };
        NoiseModel {
            epsilon: self.noise.epsilon,
            vqe,
            tomography,
            seed,
        }
    }

    /// Checks that every dimension and count is consistent before any compute.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        let m = &self.model;
        if m.kind == ModelKind::Ising1d && m.ly != 1 {
            return bad("ising1d takes ly = 1".into());
        }
        let n = m.n_sites();
        if n < 2 || !n.is_power_of_two() {
            return bad(format!("{n} sites; the binary tree needs a power of two of at least 2"));
        }
        if m.kind != ModelKind::Ising1d && !(m.lx.is_power_of_two() && m.ly.is_power_of_two()) {
            return bad(format!("{}x{} lattice; power-of-two sides required", m.lx, m.ly));
        }
        if !(m.j.is_finite() && m.h.is_finite()) {
            return bad("couplings must be finite".into());
        }
        let a = &self.ansatz;
        if a.chi == 0 {
            return bad("chi must be positive".into());
        }
        if a.interface_chi < 2 || !a.interface_chi.is_power_of_two() {
            return bad(format!("interface_chi = {} is not a power of two of at least 2", a.interface_chi));
        }
        if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
            return bad("sigma must be finite and nonnegative".into());
        }
        let qpl = a.interface_chi.trailing_zeros() as usize;
        match a.kind {
            AnsatzKind::ClassicalTtn => {
                if a.wrap_after.is_some() {
                    return bad("wrap gates need a quantum tensor".into());
                }
            }
            AnsatzKind::HttnSingleQt => {
                if n < 8 {
                    return bad("a single quantum tensor needs at least 8 sites".into());
                }
                if a.chi != a.interface_chi {
                    return bad(format!(
                        "chi = {} must equal interface_chi = {} for a single quantum tensor",
                        a.chi, a.interface_chi
                    ));
                }
                if a.interface_chi > 4 {
                    return bad("bottom nodes hold two sites, so interface_chi is at most 4".into());
                }
                if qpl * n / 2 > MAX_QUBITS {
                    return bad(format!("quantum tensor needs {} qubits, at most {MAX_QUBITS}", qpl * n / 2));
                }
                if a.topology == CircuitTopology::Ladder && a.m == 0 {
                    return bad("m must be at least 1".into());
                }
                if a.topology == CircuitTopology::BrickWall && a.m + a.e == 0 {
                    return bad("brick-wall circuits need at least one layer".into());
                }
            }
            AnsatzKind::HttnMultiQt => {
                if a.interface_chi != 4 || n < 8 {
                    return bad("multiple quantum tensors need interface_chi = 4 and at least 8 sites".into());
                }
                if a.topology != CircuitTopology::BrickWall {
                    return bad("multiple quantum tensors use brick-wall circuits".into());
                }
                if a.m == 0 {
                    return bad("m (layers per quantum tensor) must be at least 1".into());
                }
            }
        }
        let o = &self.optimizer;
        if o.sweeps == 0 {
            return bad("sweeps must be at least 1".into());
        }
        if !(o.lambda >= 0.0 && o.lambda.is_finite()) {
            return bad("lambda must be finite and nonnegative".into());
        }
        if let Some(w) = a.wrap_after {
            if w >= o.sweeps {
                return bad(format!("wrap_after = {w} leaves no sweeps with wrap gates"));
            }
        }
        let z = &self.noise;
        if !(z.epsilon >= 0.0 && z.epsilon.is_finite()) {
            return bad("epsilon must be finite and nonnegative".into());
        }
        if z.scope != NoiseScope::None && a.kind == AnsatzKind::ClassicalTtn {
            return bad("noise applies only to quantum tensors".into());
        }
        Ok(())
    }
}
