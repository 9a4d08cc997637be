//! Numerical tolerances shared by every module.

/// Central record of numerical thresholds.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative Frobenius error allowed when reconstructing a decomposed tensor.
    pub reconstruction: f64,
    /// Deviation from identity allowed for isometry/unitarity checks.
    pub isometry: f64,
    /// Relative eigenvalue cutoff below which the pseudo-inverse treats a mode as zero.
    pub pseudo_inverse: f64,
    /// Gram condition number above which implicit isometrization measures a second time.
    pub remeasure_condition: f64,
    /// Coefficients smaller than this are dropped when merging Pauli terms.
    pub coefficient: f64,
    /// Eigenvalues closer than this are treated as degenerate in the local solve.
    pub degeneracy: f64,
    /// Sweep-to-sweep energy change that stops a DMRG run.
    pub sweep_convergence: f64,
}

pub const TOL: Tolerances = Tolerances {
    reconstruction: 1e-12,
    isometry: 1e-10,
    pseudo_inverse: 1e-12,
    remeasure_condition: 1e6,
    coefficient: 1e-14,
    degeneracy: 1e-10,
    sweep_convergence: 1e-10,
};
