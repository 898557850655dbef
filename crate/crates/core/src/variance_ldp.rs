//! Asymptotic variance through the Poisson equation, and the Donsker-Varadhan
//! rate function of the occupation measure.
//!
//! The rate function is `I(G, nu) = sup_{u > 0} -sum_x nu(x) (G u)(x) / u(x)`.
//! For `mu`-reversible `G` it has the closed form `<-G s, s>_mu` with
//! `s = sqrt(nu / mu)`. In general we maximize over `v = log u`, where the
//! objective is `-sum nu(x) G(x,x) - sum_{x != y} nu(x) G(x,y) exp(v(y) - v(x))`:
//! a constant minus a positive combination of exponentials of linear forms,
//! hence concave. Pinning `v(0) = 0` removes the scale invariance.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::markov_core::{
    check_dim, dirichlet_form, inner_product, is_reversible, reversibility_defect, Generator,
    ObservableFunction, ProbabilityDistribution,
};
use crate::spectral::REVERSIBILITY_TOL;

/// Solution of `G g = f` normalized by `mu(g) = 0`.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub g: ObservableFunction,
    /// `||G g - f||_inf`.
    pub residual: f64,
}

fn check_stationary(g: &Generator, mu: &ProbabilityDistribution) -> Result<()> {
    let residual = g.apply_left(mu.weights())?.amax();
    if residual > 1e-9 * g.scale() {
        return Err(Error::NotStationary { residual });
    }
    Ok(())
}

/// Solves the bordered system `[G 1; mu^T 0] [g; c] = [f; 0]`. Since `mu G = 0`
/// and `mu(f) = 0`, the multiplier `c` vanishes.
pub fn solve_poisson(
    g: &Generator,
    mu: &ProbabilityDistribution,
    f: &ObservableFunction,
) -> Result<PoissonSolution> {
    check_dim(g.n(), mu.len())?;
    check_dim(g.n(), f.len())?;
    let mean = mu.expect(f.values());
    if mean.abs() > 1e-10 * f.values().amax().max(1.0) {
        return Err(Error::NotMeanZero { mean });
    }
    check_stationary(g, mu)?;
    let n = g.n();
    let mut system = DMatrix::zeros(n + 1, n + 1);
    system.view_mut((0, 0), (n, n)).copy_from(g.rates());
    for x in 0..n {
        system[(x, n)] = 1.0;
        system[(n, x)] = mu.mass(x);
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(f.values());
    let sol = linalg::solve(&system, &rhs)?;
    let mut values = sol.rows(0, n).into_owned();
    // Re-center against rounding.
    let shift = mu.expect(&values);
    values.add_scalar_mut(-shift);
    let residual = (g.rates() * &values - f.values()).amax();
    Ok(PoissonSolution {
        g: ObservableFunction::from_vector(values),
        residual,
    })
}

/// `sigma^2(f, G, mu) = -2 <f, g>_mu` with `G g = f`.
pub fn asymptotic_variance(g: &Generator, mu: &ProbabilityDistribution, f: &ObservableFunction) -> Result<f64> {
    let sol = solve_poisson(g, mu, f)?;
    Ok(-2.0 * inner_product(f, &sol.g, mu)?)
}

/// Closed-form rate function of a `mu`-reversible generator. `nu` may have zeros.
pub fn rate_function_reversible(
    m: &Generator,
    mu: &ProbabilityDistribution,
    nu: &ProbabilityDistribution,
) -> Result<f64> {
    check_dim(m.n(), mu.len())?;
    check_dim(m.n(), nu.len())?;
    mu.require_positive()?;
    if !is_reversible(m, mu, REVERSIBILITY_TOL) {
        return Err(Error::NotReversible {
            defect: reversibility_defect(m, mu)?,
        });
    }
    let root = ObservableFunction::new(
        nu.as_slice().iter().zip(mu.as_slice()).map(|(v, m)| (v / m).sqrt()).collect(),
    )?;
    dirichlet_form(m, mu, &root)
}

/// `I(G, delta_x) = -G(x,x)`, the limit of the supremum for a point mass.
pub fn rate_function_point_mass(g: &Generator, x: usize) -> Result<f64> {
    if x >= g.n() {
        return Err(Error::StateOutOfRange { state: x, n: g.n() });
    }
    Ok(g.exit_rate(x))
}

/// `-sum_x nu(x) (G u)(x) / u(x)` for a positive `u`.
pub fn donsker_varadhan_objective(g: &Generator, nu: &ProbabilityDistribution, u: &[f64]) -> f64 {
    let n = g.n();
    let mut total = 0.0;
    for x in 0..n {
        let gu: f64 = (0..n).map(|y| g.rate(x, y) * u[y]).sum();
        total -= nu.mass(x) * gu / u[x];
    }
    total
}

/// Settings for [`rate_function_variational`].
#[derive(Debug, Clone, Copy)]
pub struct VariationalOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop once an iteration improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            starts: 8,
            seed: 0x5eed,
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

/// Pinned log-coordinate form of the objective: `constant - H(v)`.
struct LogObjective {
    constant: f64,
    weights: DMatrix<f64>,
}

impl LogObjective {
    fn new(g: &Generator, nu: &ProbabilityDistribution) -> Self {
        let n = g.n();
        let constant = (0..n).map(|x| -nu.mass(x) * g.rate(x, x)).sum();
        let weights = DMatrix::from_fn(n, n, |x, y| if x == y { 0.0 } else { nu.mass(x) * g.rate(x, y) });
        LogObjective { constant, weights }
    }

    fn value(&self, v: &DVector<f64>) -> f64 {
        let n = v.len();
        let mut h = 0.0;
        for x in 0..n {
            for y in 0..n {
                let c = self.weights[(x, y)];
                if c > 0.0 {
                    h += c * (v[y] - v[x]).exp();
                }
            }
        }
        self.constant - h
    }

    /// Gradient and Hessian of `H` (the convex part).
    fn derivatives(&self, v: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = v.len();
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                let c = self.weights[(x, y)];
                if c > 0.0 {
                    let w = c * (v[y] - v[x]).exp();
                    grad[y] += w;
                    grad[x] -= w;
                    hess[(x, x)] += w;
                    hess[(y, y)] += w;
                    hess[(x, y)] -= w;
                    hess[(y, x)] -= w;
                }
            }
        }
        (grad, hess)
    }

    /// Damped Newton descent on `H` with `v(0)` held at 0.
    fn maximize_from(&self, mut v: DVector<f64>, opts: &VariationalOptions) -> f64 {
        let n = v.len();
        v[0] = 0.0;
        let mut current = self.value(&v);
        if n == 1 {
            return current;
        }
        for _ in 0..opts.max_iterations {
            let (grad, hess) = self.derivatives(&v);
            let g_free = grad.rows(1, n - 1).into_owned();
            let mut h_free = hess.view((1, 1), (n - 1, n - 1)).into_owned();
            let damping = 1e-12 * (1.0 + h_free.diagonal().amax());
            for i in 0..n - 1 {
                h_free[(i, i)] += damping;
            }
            let step = match h_free.clone().cholesky() {
                Some(ch) => -ch.solve(&g_free),
                None => -g_free.clone(),
            };
            let slope = g_free.dot(&step);
            if slope >= 0.0 {
                break;
            }
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..60 {
                let mut trial = v.clone();
                for i in 0..n - 1 {
                    trial[i + 1] += t * step[i];
                }
                let value = self.value(&trial);
                // Armijo on the ascent objective: F increases by at least -1e-4 t slope.
                if value.is_finite() && value >= current - 1e-4 * t * slope {
                    let gain = value - current;
                    v = trial;
                    current = value;
                    improved = gain > opts.tolerance;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        current
    }
}

/// Numerical supremum of the rate function for full-support `nu`, never below
/// its value 0 at `u = 1`.
pub fn rate_function_variational(
    g: &Generator,
    nu: &ProbabilityDistribution,
    opts: &VariationalOptions,
) -> Result<f64> {
    check_dim(g.n(), nu.len())?;
    if let Some(state) = nu.as_slice().iter().position(|&w| w <= 0.0) {
        return Err(Error::DegenerateSupport { state });
    }
    let n = g.n();
    let objective = LogObjective::new(g, nu);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = objective.maximize_from(DVector::zeros(n), opts);
    for _ in 1..opts.starts.max(1) {
        let start = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        best = best.max(objective.maximize_from(start, opts));
    }
    Ok(best.max(0.0))
}
