//! Transition semigroups by uniformization, total-variation mixing times,
//! separation distance, and the fastest strong stationary time of birth-death
//! chains started at state 0.
//!
//! With `L = max_x |G(x,x)|` and `P = I + G/L`,
//! `exp(G t) = sum_k Poisson(L t; k) P^k`. Long horizons are split into
//! `m` equal steps with `L t / m <= 50` and recombined by repeated squaring.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::markov_core::{check_dim, is_reversible, Generator, ProbabilityDistribution};
use crate::spectral::{relaxation_time, reversible_spectrum, REVERSIBILITY_TOL};

const POISSON_TAIL: f64 = 1e-13;
const MAX_STEP_INTENSITY: f64 = 50.0;
/// Final bracket width of the mixing-time bisection.
pub const MIXING_TIME_WIDTH: f64 = 1e-10;
const MIXING_HORIZON: f64 = 1e12;

fn uniformized_block(g: &Generator, t: f64, intensity: f64) -> DMatrix<f64> {
    let n = g.n();
    let jump = DMatrix::identity(n, n) + g.rates() / intensity;
    let lt = intensity * t;
    let cap = (lt + 40.0 * lt.sqrt() + 50.0).ceil() as usize;
    let mut weight = (-lt).exp();
    let mut mass = weight;
    let mut power = DMatrix::identity(n, n);
    let mut acc = &power * weight;
    for k in 1..=cap {
        if 1.0 - mass < POISSON_TAIL {
            break;
        }
        power = &power * &jump;
        weight *= lt / k as f64;
        mass += weight;
        acc += &power * weight;
    }
    // Condition on the retained jump counts so block products stay stochastic.
    acc / mass
}

/// `exp(G t)` by uniformization, in blocks of at most 50 expected jumps.
pub fn transition_semigroup(g: &Generator, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let n = g.n();
    let intensity = (0..n).map(|x| g.exit_rate(x)).fold(0.0, f64::max);
    if intensity == 0.0 || t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let steps = (intensity * t / MAX_STEP_INTENSITY).ceil().max(1.0) as u64;
    let block = uniformized_block(g, t / steps as f64, intensity);
    let mut out = matrix_power(block, steps);
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(out)
}

fn matrix_power(mut base: DMatrix<f64>, mut exp: u64) -> DMatrix<f64> {
    let n = base.nrows();
    let mut acc = DMatrix::identity(n, n);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = &acc * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// `sup_x ||P_t(x, .) - pi||_TV` with `||nu - pi||_TV = (1/2) sum |nu - pi|`.
pub fn worst_total_variation(g: &Generator, stationary: &ProbabilityDistribution, t: f64) -> Result<f64> {
    check_dim(g.n(), stationary.len())?;
    let p = transition_semigroup(g, t)?;
    Ok(p.row_iter()
        .map(|row| 0.5 * row.iter().zip(stationary.as_slice()).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// `inf{t >= 0 : sup_x ||P_t(x,.) - pi||_TV < eps}`, by doubling from the
/// relaxation time (or `1/L`) and then bisection.
pub fn tv_mixing_time(g: &Generator, stationary: &ProbabilityDistribution, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    check_dim(g.n(), stationary.len())?;
    if !g.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let tv = |t: f64| worst_total_variation(g, stationary, t);
    if tv(0.0)? < eps {
        return Ok(0.0);
    }
    let intensity = (0..g.n()).map(|x| g.exit_rate(x)).fold(0.0, f64::max);
    let start = if stationary.require_positive().is_ok() && is_reversible(g, stationary, REVERSIBILITY_TOL) {
        relaxation_time(g, stationary).unwrap_or(1.0 / intensity)
    } else {
        1.0 / intensity
    };
    let (mut lo, mut hi) = (0.0, start);
    while tv(hi)? >= eps {
        lo = hi;
        hi *= 2.0;
        if hi > MIXING_HORIZON {
            return Err(Error::NoConvergence { horizon: hi });
        }
    }
    while hi - lo > MIXING_TIME_WIDTH {
        let mid = 0.5 * (lo + hi);
        if tv(mid)? < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `max_y {1 - P_t(start, y) / pi(y)}`, clamped to `[0, 1]`.
pub fn separation_distance(
    g: &Generator,
    stationary: &ProbabilityDistribution,
    start: usize,
    t: f64,
) -> Result<f64> {
    check_dim(g.n(), stationary.len())?;
    stationary.require_positive()?;
    if start >= g.n() {
        return Err(Error::StateOutOfRange { state: start, n: g.n() });
    }
    let p = transition_semigroup(g, t)?;
    let sep = (0..g.n())
        .map(|y| 1.0 - p[(start, y)] / stationary.mass(y))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(sep.clamp(0.0, 1.0))
}

/// Tridiagonal with strictly positive neighbour rates. Entries beyond the band
/// up to `1e-14 * scale` count as zero.
pub fn is_birth_death(g: &Generator) -> Result<()> {
    let n = g.n();
    let floor = 1e-14 * g.scale();
    for x in 0..n {
        for y in 0..n {
            let band = x.abs_diff(y) == 1;
            let r = g.rate(x, y);
            if band && r <= 0.0 {
                return Err(Error::NotBirthDeath(format!("rate ({x},{y}) is not positive")));
            }
            if x.abs_diff(y) > 1 && r.abs() > floor {
                return Err(Error::NotBirthDeath(format!("rate ({x},{y}) = {r} off the band")));
            }
        }
    }
    Ok(())
}

/// Law of the fastest strong stationary time from state 0 of an ergodic
/// birth-death chain: a sum of independent exponentials whose rates are the
/// non-zero eigenvalues of `-G`.
#[derive(Debug, Clone, PartialEq)]
pub struct SstDistribution {
    rates: Vec<f64>,
}

impl SstDistribution {
    /// Sorts ascending. Fails on non-positive or non-finite rates.
    pub fn from_rates(mut rates: Vec<f64>) -> Result<Self> {
        if rates.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("exponential rates must be positive".into()));
        }
        rates.sort_by(f64::total_cmp);
        Ok(SstDistribution { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `E exp(-alpha T) = prod lambda_i / (lambda_i + alpha)`.
    pub fn laplace(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        Ok(self.rates.iter().map(|l| l / (l + alpha)).product())
    }

    /// `sum 1 / lambda_i`.
    pub fn mean(&self) -> f64 {
        self.rates.iter().map(|l| 1.0 / l).sum()
    }

    /// `sum 1 / lambda_i^2`.
    pub fn variance(&self) -> f64 {
        self.rates.iter().map(|l| 1.0 / (l * l)).sum()
    }

    /// `P(T > t)`, from the pure-death chain that passes through one stage per
    /// rate and absorbs at the end. Repeated rates need no special handling.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let stages = self.rates.len();
        if stages == 0 {
            return Ok(0.0);
        }
        let chain = Generator::from_off_diagonal(stages + 1, |x, y| {
            if x < stages && y == x + 1 {
                self.rates[x]
            } else {
                0.0
            }
        });
        let p = transition_semigroup(&chain, t)?;
        Ok((1.0 - p[(0, stages)]).clamp(0.0, 1.0))
    }
}

/// Fastest strong stationary time law for a `mu`-reversible birth-death `G`.
pub fn bd_sst(g: &Generator, mu: &ProbabilityDistribution) -> Result<SstDistribution> {
    check_dim(g.n(), mu.len())?;
    is_birth_death(g)?;
    let spectrum = reversible_spectrum(g, mu)?;
    SstDistribution::from_rates(spectrum.nontrivial().to_vec())
}

/// Largest entrywise gap in the semigroup identity `P_{s+t} = P_s P_t`.
pub fn semigroup_defect(g: &Generator, s: f64, t: f64) -> Result<f64> {
    let joint = transition_semigroup(g, s + t)?;
    let split = transition_semigroup(g, s)? * transition_semigroup(g, t)?;
    Ok((joint - split).amax())
}
