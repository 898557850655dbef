//! Seeded random instances and independent brute-force oracles.
//!
//! Every function here is a pure function of its inputs and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov_core::{check_dim, Generator, ProbabilityDistribution};
use crate::mh_kernels::{distance_to_reversible, l1_distance, MhPair};
use crate::variance_ldp::donsker_varadhan_objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    Dense,
    BirthDeath,
    /// `P - I` with identical rows (Metropolised independent sampling proposal).
    Mis,
}

/// Recipe for a reproducible random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    pub seed: u64,
    pub structure: Structure,
    pub rate_scale: f64,
    /// Rates are drawn from `[floor * rate_scale, rate_scale)`.
    pub floor: f64,
}

impl InstanceSpec {
    pub fn new(n: usize, seed: u64, structure: Structure) -> Self {
        InstanceSpec {
            n,
            seed,
            structure,
            rate_scale: 1.0,
            floor: 0.1,
        }
    }

    /// Rates down to `1e-4 * scale`, for conditioning stress.
    pub fn hard(mut self) -> Self {
        self.floor = 1e-4;
        self
    }

    pub fn with_scale(mut self, rate_scale: f64) -> Self {
        self.rate_scale = rate_scale;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("instances need n >= 2".into()));
        }
        if !(self.rate_scale > 0.0) || !(self.floor > 0.0 && self.floor < 1.0) {
            return Err(Error::InvalidArgument("rate scale and floor must be positive".into()));
        }
        Ok(())
    }

    fn in_mask(&self, x: usize, y: usize) -> bool {
        match self.structure {
            Structure::Dense | Structure::Mis => x != y,
            Structure::BirthDeath => x.abs_diff(y) == 1,
        }
    }
}

/// Draws a strictly positive probability vector with entries proportional to
/// `uniform(0.05, 1)`.
pub fn random_distribution(n: usize, rng: &mut impl Rng) -> ProbabilityDistribution {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    ProbabilityDistribution::normalized(raw).expect("positive weights")
}

/// Dense or birth-death rates uniform on the mask; MIS proposals `P - I`.
pub fn random_irreducible_generator(spec: &InstanceSpec) -> Result<Generator> {
    spec.validate()?;
    let mut rng = spec.rng();
    let lo = spec.floor * spec.rate_scale;
    match spec.structure {
        Structure::Mis => {
            let p = random_distribution(spec.n, &mut rng);
            Ok(Generator::from_off_diagonal(spec.n, |_, y| spec.rate_scale * p.mass(y)))
        }
        _ => {
            let mut rates = vec![vec![0.0; spec.n]; spec.n];
            for (x, row) in rates.iter_mut().enumerate() {
                for (y, r) in row.iter_mut().enumerate() {
                    if spec.in_mask(x, y) {
                        *r = rng.random_range(lo..spec.rate_scale);
                    }
                }
            }
            Ok(Generator::from_off_diagonal(spec.n, |x, y| rates[x][y]))
        }
    }
}

/// Symmetric `S >= 0` on the mask, `N(x,y) = S(x,y) / mu(x)`.
pub fn random_reversible_generator(mu: &ProbabilityDistribution, spec: &InstanceSpec) -> Result<Generator> {
    spec.validate()?;
    check_dim(spec.n, mu.len())?;
    mu.require_positive()?;
    let mut rng = spec.rng();
    let lo = spec.floor * spec.rate_scale;
    let mut s = vec![vec![0.0; spec.n]; spec.n];
    for x in 0..spec.n {
        for y in (x + 1)..spec.n {
            if spec.in_mask(x, y) {
                let v = rng.random_range(lo..spec.rate_scale);
                s[x][y] = v;
                s[y][x] = v;
            }
        }
    }
    Ok(reversible_from_flux(mu, |x, y| s[x][y]))
}

/// `N(x,y) = flux(x,y) / mu(x)` for a symmetric non-negative flux.
pub fn reversible_from_flux(mu: &ProbabilityDistribution, flux: impl Fn(usize, usize) -> f64) -> Generator {
    Generator::from_off_diagonal(mu.len(), |x, y| flux(x, y) / mu.mass(x))
}

/// A reversible candidate near `Q`. The symmetric flux on each pair is drawn in
/// one of four regimes: below the smaller of the two directed fluxes, above the
/// larger, anywhere up to twice the larger, or zero (reducible candidates).
fn sample_reversible_candidate(q: &Generator, mu: &ProbabilityDistribution, rng: &mut impl Rng) -> Generator {
    let n = q.n();
    let regime = rng.random_range(0..4u8);
    let mut s = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in (x + 1)..n {
            let a = mu.mass(x) * q.rate(x, y);
            let b = mu.mass(y) * q.rate(y, x);
            let (lo, hi) = (a.min(b), a.max(b));
            let v = match regime {
                0 => lo * rng.random::<f64>(),
                1 => hi * (1.0 + rng.random::<f64>()),
                2 => 2.0 * hi * rng.random::<f64>(),
                _ => {
                    if rng.random_bool(0.3) {
                        0.0
                    } else {
                        2.0 * hi * rng.random::<f64>()
                    }
                }
            };
            s[x][y] = v;
            s[y][x] = v;
        }
    }
    reversible_from_flux(mu, |x, y| s[x][y])
}

/// Outcome of [`projection_oracle`].
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    /// `d_mu(Q, R(mu))` from the closed form.
    pub closed_form: f64,
    pub min_sampled: f64,
    pub samples: usize,
    /// No sample beats the closed form by more than `1e-12`.
    pub verdict: bool,
    /// Sampled candidates entrywise below `Q` (resp. above) that differ from
    /// `M1` (resp. `M2`) were all strictly farther.
    pub uniqueness_verdict: bool,
    /// Admissible `eps = 1e-3` perturbations of `M1` and `M2` were all strictly farther.
    pub perturbation_verdict: bool,
    pub reducible_samples: usize,
}

const PROJECTION_SLACK: f64 = 1e-12;
const PERTURBATION: f64 = 1e-3;

/// Samples reversible generators and checks none is closer to `Q` than the
/// closed-form projection distance.
pub fn projection_oracle(
    q: &Generator,
    mu: &ProbabilityDistribution,
    samples: usize,
    seed: u64,
) -> Result<ProjectionReport> {
    if samples < 100 {
        return Err(Error::InvalidArgument("projection oracle needs at least 100 samples".into()));
    }
    let closed_form = distance_to_reversible(q, mu)?;
    let pair = MhPair::new(q, mu)?;
    let d_m1 = l1_distance(q, &pair.m1, mu)?;
    let d_m2 = l1_distance(q, &pair.m2, mu)?;
    let n = q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut min_sampled = f64::INFINITY;
    let mut verdict = true;
    let mut uniqueness_verdict = true;
    let mut reducible_samples = 0;
    for _ in 0..samples {
        let cand = sample_reversible_candidate(q, mu, &mut rng);
        if !cand.is_irreducible() {
            reducible_samples += 1;
        }
        let d = l1_distance(q, &cand, mu)?;
        min_sampled = min_sampled.min(d);
        verdict &= d >= closed_form - PROJECTION_SLACK;

        let off = |x: usize, y: usize| x != y;
        let below = (0..n).all(|x| (0..n).all(|y| !off(x, y) || cand.rate(x, y) <= q.rate(x, y)));
        let above = (0..n).all(|x| (0..n).all(|y| !off(x, y) || cand.rate(x, y) >= q.rate(x, y)));
        let differs = |m: &Generator| {
            (0..n).any(|x| (0..n).any(|y| off(x, y) && (cand.rate(x, y) - m.rate(x, y)).abs() > 1e-9))
        };
        if below && differs(&pair.m1) {
            uniqueness_verdict &= d > d_m1 + PROJECTION_SLACK;
        }
        if above && differs(&pair.m2) {
            uniqueness_verdict &= d > d_m2 + PROJECTION_SLACK;
        }
    }

    let mut perturbation_verdict = true;
    for x in 0..n {
        for y in (x + 1)..n {
            // Lowering M1 on a pair keeps it below Q; raising M2 keeps it above.
            if pair.m1.rate(x, y) > PERTURBATION && pair.m1.rate(y, x) > PERTURBATION * mu.mass(x) / mu.mass(y) {
                let lowered = perturb_pair(&pair.m1, mu, x, y, -PERTURBATION);
                perturbation_verdict &= l1_distance(q, &lowered, mu)? > d_m1 + PROJECTION_SLACK;
            }
            let raised = perturb_pair(&pair.m2, mu, x, y, PERTURBATION);
            perturbation_verdict &= l1_distance(q, &raised, mu)? > d_m2 + PROJECTION_SLACK;
        }
    }

    Ok(ProjectionReport {
        closed_form,
        min_sampled,
        samples,
        verdict,
        uniqueness_verdict,
        perturbation_verdict,
        reducible_samples,
    })
}

/// Shifts `G(x,y)` by `eps` and `G(y,x)` by `eps mu(x)/mu(y)`, preserving detailed balance.
pub fn perturb_pair(g: &Generator, mu: &ProbabilityDistribution, x: usize, y: usize, eps: f64) -> Generator {
    Generator::from_off_diagonal(g.n(), |a, b| {
        if (a, b) == (x, y) {
            g.rate(a, b) + eps
        } else if (a, b) == (y, x) {
            g.rate(a, b) + eps * mu.mass(x) / mu.mass(y)
        } else {
            g.rate(a, b)
        }
    })
}

/// Grid and refinement settings for [`variational_ldp_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Grid points per free coordinate of `log u`.
    pub points: usize,
    /// Half-width of the `log u` grid.
    pub radius: f64,
    /// Compass-search step at which refinement stops.
    pub min_step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 9,
            radius: 6.0,
            min_step: 1e-9,
        }
    }
}

/// Derivative-free lower bound on the rate function: exhaustive log-uniform grid
/// over `u` (with `u(0) = 1`), then compass search from the best grid point.
pub fn variational_ldp_oracle(g: &Generator, nu: &ProbabilityDistribution, grid: &GridSpec) -> Result<f64> {
    check_dim(g.n(), nu.len())?;
    let n = g.n();
    if n > 6 {
        return Err(Error::InvalidArgument("grid oracle supports at most 6 states".into()));
    }
    if let Some(state) = nu.as_slice().iter().position(|&w| w <= 0.0) {
        return Err(Error::DegenerateSupport { state });
    }
    let eval = |v: &[f64]| {
        let u: Vec<f64> = v.iter().map(|x| x.exp()).collect();
        donsker_varadhan_objective(g, nu, &u)
    };
    let free = n - 1;
    let mut best_v = vec![0.0; n];
    let mut best = eval(&best_v);
    if free > 0 && grid.points > 1 {
        let step = 2.0 * grid.radius / (grid.points - 1) as f64;
        let total = grid.points.pow(free as u32);
        let mut v = vec![0.0; n];
        for idx in 0..total {
            let mut k = idx;
            for coord in v.iter_mut().skip(1) {
                *coord = -grid.radius + step * (k % grid.points) as f64;
                k /= grid.points;
            }
            let value = eval(&v);
            if value > best {
                best = value;
                best_v.copy_from_slice(&v);
            }
        }
    }
    let mut step = if grid.points > 1 {
        2.0 * grid.radius / (grid.points - 1) as f64
    } else {
        1.0
    };
    while step > grid.min_step && free > 0 {
        let mut moved = false;
        for i in 1..n {
            for dir in [1.0, -1.0] {
                let mut trial = best_v.clone();
                trial[i] += dir * step;
                let value = eval(&trial);
                if value > best {
                    best = value;
                    best_v = trial;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(best)
}
