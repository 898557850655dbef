//! Spectra of reversible generators.
//!
//! A `mu`-reversible `G` is self-adjoint in ℓ²(mu), so `D^{1/2} (-G) D^{-1/2}`
//! with `D = diag(mu)` is symmetric. We diagonalize that matrix and map the
//! orthonormal eigenvectors back by `D^{-1/2}`, which makes them orthonormal
//! in ℓ²(mu). For non-reversible input the spectral gap is taken from the
//! additive reversiblization, whose Dirichlet form is the same.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::markov_core::{
    additive_reversiblization, check_dim, is_reversible, reversibility_defect, Generator,
    ProbabilityDistribution,
};

/// Detailed-balance tolerance accepted by [`reversible_spectrum`].
pub const REVERSIBILITY_TOL: f64 = 1e-9;

/// Eigen-decomposition of `-G` for a reversible `G`.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending eigenvalues of `-G`, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`; columns are ℓ²(mu)-orthonormal.
    pub eigenvectors: DMatrix<f64>,
    pub target: ProbabilityDistribution,
}

impl SpectrumResult {
    /// Second-smallest eigenvalue, or 0 for a single state.
    pub fn gap(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// Eigenvalues after the first (the non-trivial part of the spectrum).
    pub fn nontrivial(&self) -> &[f64] {
        &self.eigenvalues[1.min(self.eigenvalues.len())..]
    }
}

pub fn reversible_spectrum(g: &Generator, mu: &ProbabilityDistribution) -> Result<SpectrumResult> {
    check_dim(g.n(), mu.len())?;
    mu.require_positive()?;
    if !is_reversible(g, mu, REVERSIBILITY_TOL) {
        return Err(Error::NotReversible {
            defect: reversibility_defect(g, mu)?,
        });
    }
    let n = g.n();
    let root: Vec<f64> = mu.as_slice().iter().map(|m| m.sqrt()).collect();
    let mut sym = DMatrix::from_fn(n, n, |x, y| -root[x] * g.rate(x, y) / root[y]);
    // Remove the rounding asymmetry left by the conjugation.
    sym = (&sym + sym.transpose()) * 0.5;

    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |x, col| eig.eigenvectors[(x, order[col])] / root[x]);
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        target: mu.clone(),
    })
}

/// `inf{<-G f, f>_mu : mu(f) = 0, mu(f²) = 1}`, clamped at 0.
pub fn spectral_gap(g: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    mu.require_positive()?;
    let spectrum = if is_reversible(g, mu, REVERSIBILITY_TOL) {
        reversible_spectrum(g, mu)?
    } else {
        reversible_spectrum(&additive_reversiblization(g, mu)?, mu)?
    };
    Ok(spectrum.gap().max(0.0))
}

/// `1 / spectral_gap`.
pub fn relaxation_time(g: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    let gap = spectral_gap(g, mu)?;
    // Reducible chains leave a rounding-level second eigenvalue.
    if gap <= 1e-12 * g.scale() {
        return Err(Error::ZeroGap);
    }
    Ok(1.0 / gap)
}

/// Worst-case ℓ²(mu) contraction `sup ||e^{Gt} f - mu(f)||` over unit `f`,
/// which equals `exp(-gap * t)`.
pub fn l2_convergence_rate(gap: f64, t: f64) -> f64 {
    (-gap * t).exp()
}
