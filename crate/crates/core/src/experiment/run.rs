//! Executing an experiment: pre-optimization, initialization and sweeps for
//! each realization, spread over a worker pool.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::htensor::{
    add_wrap_gates, classical_reference, httn_sweep, hybrid_from_classical, multi_quantum_tree, CircuitInit,
    HybridOptions, Meter, VqeOptions,
};
use crate::pauli::{ground_energy, OperatorSum};
use crate::ttn::{exact_energy, optimize_center, sweep_with, EnvCache, LocalOperator, SweepOptions, TreeNetwork};

use super::config::{AnsatzKind, ExperimentConfig, ModelKind};
use super::trace::{
    best_of, write_atomic, RealizationSummary, Reference, ReferenceMethod, RunSummary, SweepRow, SweepTrace,
    TraceStatus,
};

/// Largest system with a state-vector reference.
pub const REFERENCE_MAX_SITES: usize = 20;

/// Exact ground energy of the configured model: dense or Lanczos up to
/// [`REFERENCE_MAX_SITES`], the stabilizer value for larger toric codes.
pub fn reference(cfg: &ExperimentConfig, hash: &str) -> Result<Reference> {
    let op = cfg.model.hamiltonian()?;
    let n = op.n_sites();
    let (energy, method) = if n <= REFERENCE_MAX_SITES {
        let method = if n <= 10 { ReferenceMethod::Dense } else { ReferenceMethod::Lanczos };
        (ground_energy(&op)?, method)
    } else if cfg.model.kind == ModelKind::Toric {
        let e = -op.terms().iter().map(|t| t.coeff.norm()).sum::<f64>();
        (e, ReferenceMethod::Stabilizer)
    } else {
        return Err(Error::Size(format!("no reference for {n} Ising sites")));
    };
    Ok(Reference {
        config_hash: hash.to_string(),
        energy,
        method,
    })
}

fn hybrid_options(cfg: &ExperimentConfig, seed: u64) -> HybridOptions {
    let a = &cfg.ansatz;
    HybridOptions {
        strategy: cfg.optimizer.strategy,
        vqe: VqeOptions {
            max_iters: cfg.optimizer.vqe_max_iters,
            lambda: cfg.optimizer.lambda,
            ..VqeOptions::default()
        },
        reinit_chi: a.chi,
        reinit: CircuitInit {
            topology: a.topology.into(),
            m: a.m,
            e: a.e,
            sigma: a.sigma,
            polish_iters: a.polish_iters,
            seed,
        },
    }
}

struct Recorder<'a> {
    trace: SweepTrace,
    record_timing: bool,
    op: &'a OperatorSum,
}

impl Recorder<'_> {
    fn push(&mut self, energy: f64, vqe_iters: usize, settings: u64, seconds: f64, losses: Vec<f64>) {
        let sweep = self.trace.rows.len();
        self.trace.rows.push(SweepRow {
            sweep,
            energy,
            abs_error: self.trace.reference.map(|r| (energy - r).abs()),
            vqe_iters,
            tomography_settings: settings,
            seconds: if self.record_timing { seconds } else { 0.0 },
        });
        if sweep > 0 {
            self.trace.vqe_losses.push(losses);
        }
    }

    fn initial(&mut self, net: &TreeNetwork) -> Result<()> {
        let e = exact_energy(net, self.op)?;
        self.push(e, 0, 0, 0.0, Vec::new());
        Ok(())
    }
}

fn run_classical(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<()> {
    let mut net = TreeNetwork::binary_random(
        &vec![2; cfg.model.n_sites()],
        &cfg.model.leaf_order()?,
        cfg.ansatz.chi,
        seed,
    )?;
    rec.initial(&net)?;
    let mut cache = EnvCache::new(LocalOperator::from_pauli(rec.op));
    let root = net.root();
    let tol = SweepOptions::default().tol;
    for _ in 0..cfg.optimizer.sweeps {
        let t = Instant::now();
        sweep_with(&mut net, &mut cache, root, &mut |n, c| optimize_center(n, c))?;
        let e = exact_energy(&net, rec.op)?;
        let prev = rec.trace.final_energy();
        rec.push(e, 0, 0, t.elapsed().as_secs_f64(), Vec::new());
        if prev.is_some_and(|p| (p - e).abs() < tol) {
            break;
        }
    }
    Ok(())
}

fn run_hybrid(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<()> {
    let a = &cfg.ansatz;
    let opts = hybrid_options(cfg, seed);
    let mut net = match a.kind {
        AnsatzKind::HttnSingleQt => {
            let sweeps = SweepOptions {
                max_sweeps: cfg.optimizer.classical_sweeps,
                ..SweepOptions::default()
            };
            let (classical, e_c) = classical_reference(rec.op, &cfg.model.leaf_order()?, a.chi, seed, &sweeps)?;
            rec.trace.classical_energy = Some(e_c);
            let (net, fid) = hybrid_from_classical(&classical, &opts.reinit)?;
            rec.trace.init_fidelity = Some(fid);
            net
        }
        AnsatzKind::HttnMultiQt => multi_quantum_tree(
            &vec![2; cfg.model.n_sites()],
            &cfg.model.leaf_order()?,
            a.interface_chi.trailing_zeros() as usize,
            a.m,
            seed,
        )?,
        AnsatzKind::ClassicalTtn => unreachable!("dispatched to run_classical"),
    };
    net.meter = Meter::new(cfg.noise_model(seed));
    rec.initial(&net)?;
    let mut cache = EnvCache::new(LocalOperator::from_pauli(rec.op));
    for s in 0..cfg.optimizer.sweeps {
        if a.wrap_after == Some(s) {
            for q in net.quantum_nodes() {
                add_wrap_gates(&mut net, q)?;
            }
        }
        let t = Instant::now();
        let r = httn_sweep(&mut net, &mut cache, rec.op, &opts)?;
        rec.push(
            r.energy,
            r.vqe_iterations,
            r.tomography_settings,
            t.elapsed().as_secs_f64(),
            r.vqe_losses,
        );
    }
    Ok(())
}

/// Runs one realization. Failures are recorded in the trace, which keeps
/// the rows completed before the failure.
pub fn run_realization(cfg: &ExperimentConfig, hash: &str, seed: u64, reference: Option<f64>) -> SweepTrace {
    let op = match cfg.model.hamiltonian() {
        Ok(op) => op,
        Err(e) => {
            return SweepTrace {
                config_hash: hash.to_string(),
                seed,
                outcome: TraceStatus::Failed { message: e.to_string() },
                reference,
                classical_energy: None,
                init_fidelity: None,
                rows: Vec::new(),
                vqe_losses: Vec::new(),
            }
        }
    };
    let mut rec = Recorder {
        trace: SweepTrace {
            config_hash: hash.to_string(),
            seed,
            outcome: TraceStatus::Complete,
            reference,
            classical_energy: None,
            init_fidelity: None,
            rows: Vec::new(),
            vqe_losses: Vec::new(),
        },
        record_timing: cfg.record_timing,
        op: &op,
    };
    let result = match cfg.ansatz.kind {
        AnsatzKind::ClassicalTtn => run_classical(cfg, seed, &mut rec),
        _ => run_hybrid(cfg, seed, &mut rec),
    };
    if let Err(e) = result {
        rec.trace.outcome = TraceStatus::Failed { message: e.to_string() };
    }
    rec.trace
}

/// Where and how to run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Output directory; nothing is written when `None`.
    pub out_dir: Option<std::path::PathBuf>,
    /// Worker threads; 0 uses the default pool size.
    pub workers: usize,
}

/// Runs every realization (seeds `cfg.seed + r`) and writes traces plus
/// `summary.json`. Returns the summary and the traces in seed order.
pub fn run(cfg: &ExperimentConfig, hash: &str, opts: &RunOptions) -> Result<(RunSummary, Vec<SweepTrace>)> {
    cfg.validate()?;
    let start = Instant::now();
    let reference = match reference(cfg, hash) {
        Ok(r) => Some(r.energy),
        Err(Error::Size(_)) => None,
        Err(e) => return Err(e),
    };
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let seeds: Vec<u64> = (0..cfg.realizations as u64).map(|r| cfg.seed.wrapping_add(r)).collect();
    let outputs: Vec<Result<(SweepTrace, String)>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let t = run_realization(cfg, hash, seed, reference);
                let csv = match &opts.out_dir {
                    Some(dir) => t.write(dir)?.0.file_name().expect("file").to_string_lossy().into_owned(),
                    None => String::new(),
                };
                Ok((t, csv))
            })
            .collect()
    });
    let mut traces = Vec::with_capacity(outputs.len());
    let mut rows = Vec::with_capacity(outputs.len());
    for o in outputs {
        let (t, csv) = o?;
        rows.push(RealizationSummary {
            seed: t.seed,
            complete: t.is_complete(),
            final_energy: t.final_energy(),
            abs_error: t.rows.last().and_then(|r| r.abs_error),
            csv,
        });
        traces.push(t);
    }
    let best = best_of(&traces);
    let summary = RunSummary {
        config_hash: hash.to_string(),
        reference,
        realizations: rows,
        best_seed: best.map(|b| b.0),
        best_energy: best.map(|b| b.1),
        seconds: cfg.record_timing.then(|| start.elapsed().as_secs_f64()),
    };
    if let Some(dir) = &opts.out_dir {
        write_summary(dir, &summary)?;
    }
    Ok((summary, traces))
}

fn write_summary(dir: &Path, summary: &RunSummary) -> Result<()> {
    write_atomic(&dir.join("summary.json"), serde_json::to_string_pretty(summary)?.as_bytes())
}
