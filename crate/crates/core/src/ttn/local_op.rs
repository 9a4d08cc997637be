//! Sums of products of single-site matrices.

use crate::error::{arg, Result};
use crate::pauli::OperatorSum;
use crate::tensor::{Matrix, C64, ZERO};

/// `coeff * prod_s factor_s`, with sites absent from `factors` acting as identity.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub coeff: C64,
    pub factors: Vec<(usize, Matrix)>,
}

/// An operator on sites of arbitrary dimension, plus a multiple of identity.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    pub site_dims: Vec<usize>,
    pub terms: Vec<LocalTerm>,
    pub constant: C64,
}

impl LocalOperator {
    pub fn new(site_dims: Vec<usize>) -> Self {
        Self {
            site_dims,
            terms: Vec::new(),
            constant: ZERO,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn push(&mut self, coeff: C64, mut factors: Vec<(usize, Matrix)>) -> Result<()> {
        for (s, m) in &factors {
            let Some(&d) = self.site_dims.get(*s) else {
                return arg(format!("site {s} out of range"));
            };
            if m.nrows() != d || m.ncols() != d {
                return arg(format!("factor on site {s} must be {d}x{d}"));
            }
        }
        factors.sort_by_key(|(s, _)| *s);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return arg("repeated site in a term");
        }
        if factors.is_empty() {
            self.constant += coeff;
        } else {
            self.terms.push(LocalTerm { coeff, factors });
        }
        Ok(())
    }

    pub fn from_pauli(op: &OperatorSum) -> Self {
        let mut out = Self::new(vec![2; op.n_sites()]);
        for t in op.terms() {
            let factors: Vec<(usize, Matrix)> = t.letters().iter().map(|(&s, p)| (s, p.matrix())).collect();
            out.push(t.coeff, factors).expect("Pauli terms are valid");
        }
        out
    }

    /// Dense matrix over all sites, first site most significant.
    pub fn to_dense(&self) -> Result<Matrix> {
        let dim: usize = self.site_dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
        if dim > 1 << 12 {
            return Err(crate::Error::Size(format!("dense operator of dimension {dim}")));
        }
        let mut out = Matrix::identity(dim, dim) * self.constant;
        for t in &self.terms {
            let mut m = Matrix::identity(1, 1);
            let mut it = t.factors.iter().peekable();
            for (s, &d) in self.site_dims.iter().enumerate() {
                let f = match it.peek() {
                    Some((fs, f)) if *fs == s => {
                        it.next();
                        f.clone()
                    }
                    _ => Matrix::identity(d, d),
                };
                m = m.kronecker(&f);
            }
            out += m * t.coeff;
        }
        Ok(out)
    }

    /// Factor of term `t` on site `s`, if any.
    pub fn factor(&self, t: usize, s: usize) -> Option<&Matrix> {
        self.terms[t].factors.iter().find(|(fs, _)| *fs == s).map(|(_, m)| m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::ising_1d;

    #[test]
    fn pauli_conversion_matches_dense() {
        let op = ising_1d(5, 1.0, 0.7, true).unwrap();
        let local = LocalOperator::from_pauli(&op);
        let diff = local.to_dense().unwrap() - op.to_dense().unwrap();
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_factors() {
        let mut op = LocalOperator::new(vec![2, 3]);
        assert!(op.push(C64::new(1.0, 0.0), vec![(1, Matrix::identity(2, 2))]).is_err());
        assert!(op.push(C64::new(1.0, 0.0), vec![(2, Matrix::identity(2, 2))]).is_err());
        op.push(C64::new(2.0, 0.0), vec![]).unwrap();
        assert_eq!(op.constant, C64::new(2.0, 0.0));
    }
}
