//! Hitting-time functionals and capacities, computed exactly from linear systems.
//!
//! Capacity uses the rate-weighted convention
//! `cap(A,B) = sum_{x in A} mu(x) q(x) P_x(jump chain reaches B before returning to A)`
//! where `q(x) = -G(x,x)`. For reversible generators this is the Dirichlet
//! energy of the equilibrium potential, and `t_com(x,y) = 1 / cap({x},{y})`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::markov_core::{
    check_dim, dirichlet_form, is_reversible, stationary_distribution, Generator,
    ObservableFunction, ProbabilityDistribution,
};
use crate::spectral::{reversible_spectrum, REVERSIBILITY_TOL};

/// A non-empty set of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    members: Vec<usize>,
    n: usize,
}

impl TargetSet {
    pub fn new(members: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(&state) = members.iter().find(|&&s| s >= n) {
            return Err(Error::StateOutOfRange { state, n });
        }
        Ok(TargetSet { members, n })
    }

    pub fn singleton(x: usize, n: usize) -> Result<Self> {
        Self::new([x], n)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn state_count(&self) -> usize {
        self.n
    }

    pub(crate) fn mask(&self) -> Vec<bool> {
        (0..self.n).map(|x| self.contains(x)).collect()
    }
}

fn check_set(g: &Generator, a: &TargetSet) -> Result<()> {
    check_dim(g.n(), a.state_count())
}

/// Errors unless every state can reach `a`.
fn require_reachable(g: &Generator, a: &TargetSet) -> Result<()> {
    let reach = linalg::reaches(g.rates(), &a.mask());
    match reach.iter().position(|&r| !r) {
        Some(state) => Err(Error::UnreachableTarget { state }),
        None => Ok(()),
    }
}

/// Restriction of `G` to the complement of `a`, and the complement's indices.
fn complement_block(g: &Generator, a: &TargetSet) -> (Vec<usize>, DMatrix<f64>) {
    let free: Vec<usize> = (0..g.n()).filter(|&x| !a.contains(x)).collect();
    let block = DMatrix::from_fn(free.len(), free.len(), |i, j| g.rate(free[i], free[j]));
    (free, block)
}

/// `E_x(tau_A)` for every `x`: solves `(G v)(x) = -1` off `A`, `v = 0` on `A`.
pub fn expected_hitting_times(g: &Generator, a: &TargetSet) -> Result<ObservableFunction> {
    check_set(g, a)?;
    require_reachable(g, a)?;
    let (free, block) = complement_block(g, a);
    let sol = linalg::solve(&block, &DVector::from_element(free.len(), -1.0))?;
    let mut v = DVector::zeros(g.n());
    for (i, &x) in free.iter().enumerate() {
        v[x] = sol[i];
    }
    Ok(ObservableFunction::from_vector(v))
}

/// `E_x(exp(-lambda tau_A))`: solves `(lambda I - G) u = 0` off `A`, `u = 1` on `A`.
pub fn hitting_laplace(g: &Generator, a: &TargetSet, lambda: f64) -> Result<ObservableFunction> {
    check_set(g, a)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda(lambda));
    }
    require_reachable(g, a)?;
    let (free, block) = complement_block(g, a);
    let m = free.len();
    let system = DMatrix::identity(m, m) * lambda - block;
    let rhs = DVector::from_fn(m, |i, _| a.members().iter().map(|&y| g.rate(free[i], y)).sum::<f64>());
    let sol = linalg::solve(&system, &rhs)?;
    let mut u = DVector::from_element(g.n(), 1.0);
    for (i, &x) in free.iter().enumerate() {
        u[x] = sol[i];
    }
    Ok(ObservableFunction::from_vector(u))
}

/// `E_mu(tau_A)`.
pub fn mean_hitting_time(g: &Generator, mu: &ProbabilityDistribution, a: &TargetSet) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    Ok(mu.expect(expected_hitting_times(g, a)?.values()))
}

/// `E_mu(exp(-lambda tau_A))`.
pub fn mean_hitting_laplace(
    g: &Generator,
    mu: &ProbabilityDistribution,
    a: &TargetSet,
    lambda: f64,
) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    Ok(mu.expect(hitting_laplace(g, a, lambda)?.values()))
}

/// `t_av = sum_{x,y} E_x(tau_y) mu(x) mu(y)`, by direct summation.
pub fn average_hitting_time(g: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    if !g.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = g.n();
    let mut total = 0.0;
    for y in 0..n {
        let times = expected_hitting_times(g, &TargetSet::singleton(y, n)?)?;
        total += mu.mass(y) * mu.expect(times.values());
    }
    Ok(total)
}

/// `sum_{i >= 2} 1 / lambda_i` over the spectrum of `-G`; equals `t_av` for
/// reversible `G`.
pub fn average_hitting_time_spectral(g: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    if !g.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let spectrum = reversible_spectrum(g, mu)?;
    Ok(spectrum.nontrivial().iter().map(|l| 1.0 / l).sum())
}

/// `E_x(tau_y) + E_y(tau_x)`.
pub fn commute_time(g: &Generator, x: usize, y: usize) -> Result<f64> {
    let n = g.n();
    for s in [x, y] {
        if s >= n {
            return Err(Error::StateOutOfRange { state: s, n });
        }
    }
    if x == y {
        return Err(Error::SameState);
    }
    if !g.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let to_y = expected_hitting_times(g, &TargetSet::singleton(y, n)?)?;
    let to_x = expected_hitting_times(g, &TargetSet::singleton(x, n)?)?;
    Ok(to_y.get(x) + to_x.get(y))
}

fn check_disjoint(a: &TargetSet, b: &TargetSet) -> Result<()> {
    match a.members().iter().find(|&&x| b.contains(x)) {
        Some(&state) => Err(Error::OverlappingSets { state }),
        None => Ok(()),
    }
}

/// `h(x) = P_x(tau_A < tau_B)`: harmonic off `A ∪ B`, 1 on `A`, 0 on `B`.
/// States that reach neither set are assigned 0.
pub fn equilibrium_potential(g: &Generator, a: &TargetSet, b: &TargetSet) -> Result<ObservableFunction> {
    check_set(g, a)?;
    check_set(g, b)?;
    check_disjoint(a, b)?;
    let n = g.n();
    let boundary: Vec<bool> = (0..n).map(|x| a.contains(x) || b.contains(x)).collect();
    let reach = linalg::reaches(g.rates(), &boundary);
    let free: Vec<usize> = (0..n).filter(|&x| !boundary[x] && reach[x]).collect();
    let m = free.len();
    let block = DMatrix::from_fn(m, m, |i, j| g.rate(free[i], free[j]));
    let rhs = DVector::from_fn(m, |i, _| -a.members().iter().map(|&y| g.rate(free[i], y)).sum::<f64>());
    let sol = linalg::solve(&block, &rhs)?;
    let mut h = DVector::zeros(n);
    for &x in a.members() {
        h[x] = 1.0;
    }
    for (i, &x) in free.iter().enumerate() {
        h[x] = sol[i];
    }
    Ok(ObservableFunction::from_vector(h))
}

/// Dirichlet energy `<-G h, h>_mu` of the equilibrium potential between `A` and `B`.
pub fn capacity_dirichlet(
    g: &Generator,
    mu: &ProbabilityDistribution,
    a: &TargetSet,
    b: &TargetSet,
) -> Result<f64> {
    let h = equilibrium_potential(g, a, b)?;
    dirichlet_form(g, mu, &h)
}

/// `sum_{x in A} mu(x) sum_{y != x} G(x,y) P_y(tau_B < tau_A)`: the exit rate
/// from `x` times the probability that the embedded jump chain reaches `B`
/// before coming back to `A`.
pub fn capacity_probabilistic(
    g: &Generator,
    mu: &ProbabilityDistribution,
    a: &TargetSet,
    b: &TargetSet,
) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    // Escape probabilities are the potential with the roles of A and B swapped.
    let escape = equilibrium_potential(g, b, a)?;
    let n = g.n();
    let mut total = 0.0;
    for &x in a.members() {
        let flux: f64 = (0..n).filter(|&y| y != x).map(|y| g.rate(x, y) * escape.get(y)).sum();
        total += mu.mass(x) * flux;
    }
    Ok(total)
}

/// Capacity between disjoint `A` and `B`: the Dirichlet route for
/// `mu`-reversible generators, the probabilistic route otherwise.
pub fn capacity(g: &Generator, mu: &ProbabilityDistribution, a: &TargetSet, b: &TargetSet) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    if is_reversible(g, mu, REVERSIBILITY_TOL) {
        capacity_dirichlet(g, mu, a, b)
    } else {
        capacity_probabilistic(g, mu, a, b)
    }
}

/// `1 / cap({x},{y})` under the generator's own stationary law.
pub fn commute_time_from_capacity(g: &Generator, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(Error::SameState);
    }
    let pi = stationary_distribution(g)?;
    let n = g.n();
    let cap = capacity_probabilistic(g, &pi, &TargetSet::singleton(x, n)?, &TargetSet::singleton(y, n)?)?;
    Ok(1.0 / cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mh_kernels::MhPair;
    use approx::assert_abs_diff_eq;

    fn pair_a() -> MhPair {
        let q = Generator::from_rows(&[vec![-2.0, 2.0], vec![1.0, -1.0]]).unwrap();
        MhPair::new(&q, &ProbabilityDistribution::uniform(2)).unwrap()
    }

    fn pair_c() -> MhPair {
        let q = Generator::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![2.0, -3.0, 1.0],
            vec![0.0, 3.0, -3.0],
        ])
        .unwrap();
        MhPair::new(&q, &ProbabilityDistribution::uniform(3)).unwrap()
    }

    fn set(members: &[usize], n: usize) -> TargetSet {
        TargetSet::new(members.iter().copied(), n).unwrap()
    }

    #[test]
    fn target_set_validation() {
        assert_eq!(TargetSet::new([], 3), Err(Error::EmptySet));
        assert_eq!(TargetSet::new([3], 3), Err(Error::StateOutOfRange { state: 3, n: 3 }));
        assert_eq!(set(&[2, 0, 2], 3).members(), &[0, 2]);
    }

    #[test]
    fn hitting_times_two_states() {
        let pair = pair_a();
        let a = set(&[1], 2);
        let e1 = expected_hitting_times(&pair.m1, &a).unwrap();
        let e2 = expected_hitting_times(&pair.m2, &a).unwrap();
        assert_eq!(e1.get(1), 0.0);
        assert_abs_diff_eq!(e1.get(0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e2.get(0), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn hitting_times_path() {
        let pair = pair_c();
        let e = expected_hitting_times(&pair.m1, &set(&[2], 3)).unwrap();
        assert_abs_diff_eq!(e.get(0), 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(e.get(1), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn unreachable_target() {
        let g = Generator::from_rows(&[vec![-1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            expected_hitting_times(&g, &set(&[0], 2)),
            Err(Error::UnreachableTarget { state: 1 })
        );
        assert!(expected_hitting_times(&g, &set(&[1], 2)).is_ok());
    }

    #[test]
    fn laplace_two_states() {
        let pair = pair_a();
        let a = set(&[1], 2);
        let u1 = hitting_laplace(&pair.m1, &a, 1.0).unwrap();
        let u2 = hitting_laplace(&pair.m2, &a, 1.0).unwrap();
        assert_eq!(u1.get(1), 1.0);
        assert_abs_diff_eq!(u1.get(0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(u2.get(0), 2.0 / 3.0, epsilon = 1e-14);
        assert_eq!(hitting_laplace(&pair.m1, &a, 0.0), Err(Error::NonPositiveLambda(0.0)));
        let tiny = hitting_laplace(&pair.m1, &a, 1e-9).unwrap();
        assert_abs_diff_eq!(tiny.get(0), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn laplace_decreases_in_lambda() {
        let pair = pair_c();
        let a = set(&[2], 3);
        let grid = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];
        let values: Vec<f64> = grid.iter().map(|&l| hitting_laplace(&pair.m2, &a, l).unwrap().get(0)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn average_hitting_time_routes() {
        let pair = pair_a();
        assert_abs_diff_eq!(average_hitting_time(&pair.m1, &pair.target).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(average_hitting_time_spectral(&pair.m1, &pair.target).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(average_hitting_time(&pair.m2, &pair.target).unwrap(), 0.25, epsilon = 1e-14);
        let single = Generator::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(average_hitting_time(&single, &ProbabilityDistribution::uniform(1)).unwrap(), 0.0);
    }

    #[test]
    fn commute_times() {
        let pair = pair_a();
        assert_abs_diff_eq!(commute_time(&pair.m1, 0, 1).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(commute_time(&pair.m2, 0, 1).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(commute_time(&pair.m1, 1, 0).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(commute_time_from_capacity(&pair.m1, 0, 1).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(commute_time(&pair.m1, 1, 1), Err(Error::SameState));
    }

    #[test]
    fn capacities() {
        let pair = pair_a();
        let (a, b) = (set(&[0], 2), set(&[1], 2));
        assert_abs_diff_eq!(capacity(&pair.m1, &pair.target, &a, &b).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(capacity(&pair.m2, &pair.target, &a, &b).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(capacity(&pair.m2, &pair.target, &b, &a).unwrap(), 1.0, epsilon = 1e-14);

        let c = pair_c();
        let (a, b) = (set(&[0], 3), set(&[2], 3));
        let h = equilibrium_potential(&c.m1, &a, &b).unwrap();
        assert_abs_diff_eq!(h.get(1), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(capacity(&c.m1, &c.target, &a, &b).unwrap(), 1.0 / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            capacity_probabilistic(&c.m1, &c.target, &a, &b).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-14
        );
        assert_eq!(
            capacity(&c.m1, &c.target, &a, &set(&[0, 1], 3)),
            Err(Error::OverlappingSets { state: 0 })
        );
    }
}
