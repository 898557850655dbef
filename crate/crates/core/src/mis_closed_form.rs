//! Closed-form spectra of both reversiblizations for Metropolised independent
//! sampling: the proposal `Q = P - I` where every row of `P` equals `p`.
//!
//! States are relabelled so that the importance weights `w_x = mu(x) / p_x`
//! decrease. In that order, with `p_j = mu(j) / w_j`,
//!
//! ```text
//! gamma_x = sum_{j >= x} (p_j - mu(j) / w_x)   x = 1..m-1   (M1 eigenvalue gamma_x - 1)
//! beta_i  = sum_{j <= i} (p_j - mu(j) / w_i)   i = 2..m     (M2 eigenvalue beta_i - 1)
//! ```
//!
//! with eigenvectors
//!
//! ```text
//! M2: (-mu(i), ..., -mu(i), sum_{j < i} mu(j), 0, ..., 0)     value at position i
//! M1: (0, ..., 0, sum_{j > x} mu(j), -mu(x), ..., -mu(x))     value at position x
//! ```
//!
//! All vectors returned here are in the caller's original labels; `order`
//! records the relabelling.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov_core::{check_dim, Generator, ProbabilityDistribution};
use crate::mh_kernels::{build_m1, build_m2};
use crate::spectral::reversible_spectrum;

/// Proposal, target and importance weights, with the weight-sorting permutation.
#[derive(Debug, Clone)]
pub struct MisInstance {
    pub proposal: ProbabilityDistribution,
    pub target: ProbabilityDistribution,
    /// `mu(x) / p(x)` in original labels.
    pub weights: Vec<f64>,
    /// `order[k]` is the original label of the state at sorted position `k`.
    pub order: Vec<usize>,
}

pub fn build_mis(proposal: &ProbabilityDistribution, target: &ProbabilityDistribution) -> Result<MisInstance> {
    check_dim(proposal.len(), target.len())?;
    if proposal.len() < 2 {
        return Err(Error::InvalidArgument("MIS needs at least two states".into()));
    }
    proposal.require_positive()?;
    target.require_positive()?;
    let weights: Vec<f64> = target.as_slice().iter().zip(proposal.as_slice()).map(|(m, p)| m / p).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Stable: ties keep original index order.
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    Ok(MisInstance {
        proposal: proposal.clone(),
        target: target.clone(),
        weights,
        order,
    })
}

impl MisInstance {
    pub fn m(&self) -> usize {
        self.weights.len()
    }

    /// `Q = P - I` in original labels.
    pub fn proposal_generator(&self) -> Generator {
        let p = &self.proposal;
        Generator::from_off_diagonal(self.m(), |_, y| p.mass(y))
    }

    pub fn is_identity_order(&self) -> bool {
        self.order.iter().enumerate().all(|(k, &x)| k == x)
    }

    fn sorted(&self, values: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&x| values[x]).collect()
    }

    fn unsort(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (k, &x) in self.order.iter().enumerate() {
            out[x] = sorted[k];
        }
        out
    }
}

/// Closed-form non-zero spectra of `M1(Q, mu)` and `M2(Q, mu)`.
///
/// Index `k` of `gamma` is the sorted position `x = k + 1`; index `k` of `beta`
/// is the sorted position `i = k + 2`.
#[derive(Debug, Clone, Serialize)]
pub struct MisSpectrum {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    /// `gamma_x - 1`, eigenvalues of `M1`.
    pub m1_eigenvalues: Vec<f64>,
    /// `beta_i - 1`, eigenvalues of `M2`.
    pub m2_eigenvalues: Vec<f64>,
    pub m1_eigenvectors: Vec<Vec<f64>>,
    pub m2_eigenvectors: Vec<Vec<f64>>,
    pub order: Vec<usize>,
}

pub fn mis_spectrum(inst: &MisInstance) -> MisSpectrum {
    let m = inst.m();
    let p = inst.sorted(inst.proposal.as_slice());
    let mu = inst.sorted(inst.target.as_slice());
    let w = inst.sorted(&inst.weights);

    let gamma: Vec<f64> = (0..m - 1)
        .map(|x| (x..m).map(|j| p[j] - mu[j] / w[x]).sum())
        .collect();
    let beta: Vec<f64> = (1..m)
        .map(|i| (0..=i).map(|j| p[j] - mu[j] / w[i]).sum())
        .collect();

    let m1_eigenvectors = (0..m - 1)
        .map(|x| {
            let mut v = vec![0.0; m];
            v[x] = mu[x + 1..].iter().sum();
            v[x + 1..].iter_mut().for_each(|e| *e = -mu[x]);
            inst.unsort(&v)
        })
        .collect();
    let m2_eigenvectors = (1..m)
        .map(|i| {
            let mut v = vec![0.0; m];
            v[..i].iter_mut().for_each(|e| *e = -mu[i]);
            v[i] = mu[..i].iter().sum();
            inst.unsort(&v)
        })
        .collect();

    MisSpectrum {
        m1_eigenvalues: gamma.iter().map(|g| g - 1.0).collect(),
        m2_eigenvalues: beta.iter().map(|b| b - 1.0).collect(),
        gamma,
        beta,
        m1_eigenvectors,
        m2_eigenvectors,
        order: inst.order.clone(),
    }
}

/// Agreement between the closed form and a dense eigensolver.
#[derive(Debug, Clone, Serialize)]
pub struct MisValidation {
    pub m1_eigenvalue_deviation: f64,
    pub m2_eigenvalue_deviation: f64,
    pub m1_max_residual: f64,
    pub m2_max_residual: f64,
}

pub const MIS_TOLERANCE: f64 = 1e-10;

/// Sorted-multiset distance between `{0} ∪ closed` and the numeric spectrum of `G`.
fn spectrum_deviation(g: &Generator, mu: &ProbabilityDistribution, closed: &[f64]) -> Result<(f64, usize)> {
    let numeric = reversible_spectrum(g, mu)?;
    // Numeric eigenvalues are of -G; flip to eigenvalues of G, ascending.
    let mut numeric: Vec<f64> = numeric.eigenvalues.iter().map(|l| -l).collect();
    numeric.sort_by(f64::total_cmp);
    let mut expected: Vec<f64> = closed.to_vec();
    expected.push(0.0);
    expected.sort_by(f64::total_cmp);
    Ok(numeric
        .iter()
        .zip(&expected)
        .enumerate()
        .map(|(k, (a, b))| ((a - b).abs(), k))
        .fold((0.0, 0), |acc, cur| if cur.0 > acc.0 { cur } else { acc }))
}

fn max_residual(g: &Generator, values: &[f64], vectors: &[Vec<f64>]) -> (f64, usize) {
    values
        .iter()
        .zip(vectors)
        .enumerate()
        .map(|(k, (&lambda, v))| {
            let v = DVector::from_column_slice(v);
            ((g.rates() * &v - &v * lambda).amax(), k)
        })
        .fold((0.0, 0), |acc, cur| if cur.0 > acc.0 { cur } else { acc })
}

/// Checks the closed form against `M1`/`M2` built numerically from `Q = P - I`.
pub fn mis_cross_validate(inst: &MisInstance) -> Result<MisValidation> {
    if inst.m() > 200 {
        return Err(Error::InvalidArgument("cross-validation supports at most 200 states".into()));
    }
    let spectrum = mis_spectrum(inst);
    let q = inst.proposal_generator();
    let m1 = build_m1(&q, &inst.target)?;
    let m2 = build_m2(&q, &inst.target)?;

    let (d1, i1) = spectrum_deviation(&m1, &inst.target, &spectrum.m1_eigenvalues)?;
    let (d2, i2) = spectrum_deviation(&m2, &inst.target, &spectrum.m2_eigenvalues)?;
    let (r1, k1) = max_residual(&m1, &spectrum.m1_eigenvalues, &spectrum.m1_eigenvectors);
    let (r2, k2) = max_residual(&m2, &spectrum.m2_eigenvalues, &spectrum.m2_eigenvectors);

    let checks = [
        ("M1 eigenvalues", d1, i1),
        ("M2 eigenvalues", d2, i2),
        ("M1 eigenvector residual", r1, k1),
        ("M2 eigenvector residual", r2, k2),
    ];
    if let Some(&(what, deviation, index)) = checks.iter().find(|c| !(c.1 <= MIS_TOLERANCE)) {
        return Err(Error::ValidationFailure { what, index, deviation });
    }
    Ok(MisValidation {
        m1_eigenvalue_deviation: d1,
        m2_eigenvalue_deviation: d2,
        m1_max_residual: r1,
        m2_max_residual: r2,
    })
}
