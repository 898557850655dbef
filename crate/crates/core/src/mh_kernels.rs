//! The two Metropolis-Hastings reversiblizations of a proposal generator and
//! the weighted ℓ¹ geometry in which they are closest reversible generators.
//!
//! For a proposal `Q` and strictly positive target `mu`, with
//! `Q*(x,y) = mu(y) Q(y,x) / mu(x)`:
//!
//! ```text
//! M1(x,y) = min{Q(x,y), Q*(x,y)}    M2(x,y) = max{Q(x,y), Q*(x,y)}    (x != y)
//! ```
//!
//! Both are `mu`-reversible, `M2` dominates `M1` off-diagonally and
//! `M1 + M2 = Q + Q*`. `M1` can be reducible when `Q` is not; it is returned
//! as-is and [`Generator::is_irreducible`] reports it.

use crate::error::{Error, Result};
use crate::markov_core::{check_dim, time_reversal, Generator, ProbabilityDistribution};

fn reversal_rate(q: &Generator, mu: &ProbabilityDistribution, x: usize, y: usize) -> f64 {
    mu.mass(y) * q.rate(y, x) / mu.mass(x)
}

fn build_with(
    q: &Generator,
    mu: &ProbabilityDistribution,
    pick: fn(f64, f64) -> f64,
) -> Result<Generator> {
    check_dim(q.n(), mu.len())?;
    mu.require_positive()?;
    let mut out = Generator::from_off_diagonal(q.n(), |x, y| pick(q.rate(x, y), reversal_rate(q, mu, x, y)));
    if let Some(labels) = q.labels() {
        out = out.with_labels(labels.to_vec())?;
    }
    Ok(out)
}

/// The classical Metropolis-Hastings generator (off-diagonal minimum).
pub fn build_m1(q: &Generator, mu: &ProbabilityDistribution) -> Result<Generator> {
    build_with(q, mu, f64::min)
}

/// The second Metropolis-Hastings generator (off-diagonal maximum).
pub fn build_m2(q: &Generator, mu: &ProbabilityDistribution) -> Result<Generator> {
    build_with(q, mu, f64::max)
}

/// Both reversiblizations of `source` with respect to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct MhPair {
    pub m1: Generator,
    pub m2: Generator,
    pub target: ProbabilityDistribution,
    pub source: Generator,
}

impl MhPair {
    pub fn new(source: &Generator, target: &ProbabilityDistribution) -> Result<Self> {
        Ok(MhPair {
            m1: build_m1(source, target)?,
            m2: build_m2(source, target)?,
            target: target.clone(),
            source: source.clone(),
        })
    }

    /// `R = M2 - M1`, itself a `mu`-reversible generator.
    pub fn difference(&self) -> Generator {
        self.m2.combine(1.0, &self.m1, -1.0)
    }

    /// Largest deviation from `M1 + M2 = Q + Q*`, entrywise including diagonals.
    pub fn sum_identity_defect(&self) -> Result<f64> {
        let rev = time_reversal(&self.source, &self.target)?;
        let lhs = self.m1.rates() + self.m2.rates();
        let rhs = self.source.rates() + rev.rates();
        Ok((lhs - rhs).amax())
    }
}

/// `alpha * M1 + (1 - alpha) * M2`.
pub fn convex_combination(pair: &MhPair, alpha: f64) -> Result<Generator> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(pair.m1.combine(alpha, &pair.m2, 1.0 - alpha))
}

/// `d_mu(G1, G2) = sum_x sum_{y != x} mu(x) |G1(x,y) - G2(x,y)|`.
pub fn l1_distance(g1: &Generator, g2: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    check_dim(g1.n(), g2.n())?;
    check_dim(g1.n(), mu.len())?;
    let n = g1.n();
    let mut total = 0.0;
    for x in 0..n {
        let mut row = 0.0;
        for y in 0..n {
            if x != y {
                row += (g1.rate(x, y) - g2.rate(x, y)).abs();
            }
        }
        total += mu.mass(x) * row;
    }
    Ok(total)
}

/// `d_mu(Q, R(mu))`: total positive detailed-balance excess
/// `sum over ordered pairs of max(0, mu(x)Q(x,y) - mu(y)Q(y,x))`.
pub fn distance_to_reversible(q: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    check_dim(q.n(), mu.len())?;
    mu.require_positive()?;
    let n = q.n();
    let mut total = 0.0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                let excess = mu.mass(x) * q.rate(x, y) - mu.mass(y) * q.rate(y, x);
                if excess > 0.0 {
                    total += excess;
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov_core::{additive_reversiblization, is_reversible, peskun_dominates};
    use approx::assert_abs_diff_eq;

    fn q_a() -> Generator {
        Generator::from_rows(&[vec![-2.0, 2.0], vec![1.0, -1.0]]).unwrap()
    }

    fn q_c() -> Generator {
        Generator::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![2.0, -3.0, 1.0],
            vec![0.0, 3.0, -3.0],
        ])
        .unwrap()
    }

    #[test]
    fn m1_m2_on_two_states() {
        let mu = ProbabilityDistribution::uniform(2);
        assert_eq!(build_m1(&q_a(), &mu).unwrap().to_rows(), vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
        assert_eq!(build_m2(&q_a(), &mu).unwrap().to_rows(), vec![vec![-2.0, 2.0], vec![2.0, -2.0]]);
    }

    #[test]
    fn birth_death_m2() {
        let m2 = build_m2(&q_c(), &ProbabilityDistribution::uniform(3)).unwrap();
        assert_eq!(m2.rate(0, 1), 2.0);
        assert_eq!(m2.rate(1, 0), 2.0);
        assert_eq!(m2.rate(1, 2), 3.0);
        assert_eq!(m2.rate(2, 1), 3.0);
        assert_eq!(m2.rate(0, 2), 0.0);
    }

    #[test]
    fn reversible_proposal_is_fixed() {
        // Ties mu(x)Q(x,y) = mu(y)Q(y,x) on every pair: min and max coincide.
        let mu = ProbabilityDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let q = Generator::from_off_diagonal(3, |x, y| if x < y { 0.7 } else { 0.7 * mu.mass(y) / mu.mass(x) });
        assert!(is_reversible(&q, &mu, 1e-12));
        let m1 = build_m1(&q, &mu).unwrap();
        let m2 = build_m2(&q, &mu).unwrap();
        assert!(m1.max_abs_diff(&q) < 1e-15);
        assert!(m2.max_abs_diff(&q) < 1e-15);
        assert_eq!(distance_to_reversible(&q, &mu).unwrap(), 0.0);
    }

    #[test]
    fn one_way_edge_is_removed_by_m1() {
        // 0 -> 1 -> 2 -> 0 cycle: every Q(y,x) is 0 on the reverse direction.
        let q = Generator::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
        ])
        .unwrap();
        assert!(q.is_irreducible());
        let m1 = build_m1(&q, &ProbabilityDistribution::uniform(3)).unwrap();
        assert_eq!(m1.rate(0, 1), 0.0);
        assert!(!m1.is_irreducible());
    }

    #[test]
    fn convex_combinations() {
        let pair = MhPair::new(&q_a(), &ProbabilityDistribution::uniform(2)).unwrap();
        assert_eq!(convex_combination(&pair, 1.0).unwrap(), pair.m1);
        assert_eq!(convex_combination(&pair, 0.0).unwrap(), pair.m2);
        let half = convex_combination(&pair, 0.5).unwrap();
        assert_eq!(half.to_rows(), vec![vec![-1.5, 1.5], vec![1.5, -1.5]]);
        let bar = additive_reversiblization(&q_a(), &pair.target).unwrap();
        assert!(half.max_abs_diff(&bar) < 1e-15);
        assert_eq!(convex_combination(&pair, 1.5), Err(Error::AlphaOutOfRange(1.5)));
    }

    #[test]
    fn distances_on_two_states() {
        let mu = ProbabilityDistribution::uniform(2);
        let pair = MhPair::new(&q_a(), &mu).unwrap();
        assert_eq!(l1_distance(&q_a(), &q_a(), &mu).unwrap(), 0.0);
        assert_abs_diff_eq!(l1_distance(&q_a(), &pair.m1, &mu).unwrap(), 0.5);
        assert_abs_diff_eq!(l1_distance(&q_a(), &pair.m2, &mu).unwrap(), 0.5);
        assert_abs_diff_eq!(distance_to_reversible(&q_a(), &mu).unwrap(), 0.5);
    }

    #[test]
    fn two_state_family_closed_form() {
        for &(a, b, m0) in &[(2.0, 1.0, 0.5), (0.3, 4.0, 0.2), (5.0, 5.0, 0.9), (1.0, 0.25, 0.6)] {
            let q = Generator::from_rows(&[vec![-a, a], vec![b, -b]]).unwrap();
            let mu = ProbabilityDistribution::new(vec![m0, 1.0 - m0]).unwrap();
            let pair = MhPair::new(&q, &mu).unwrap();
            let expected = ((1.0 - m0) * b - m0 * a).abs();
            assert_abs_diff_eq!(l1_distance(&q, &pair.m1, &mu).unwrap(), expected, epsilon = 1e-14);
            assert_abs_diff_eq!(l1_distance(&q, &pair.m2, &mu).unwrap(), expected, epsilon = 1e-14);
            assert_abs_diff_eq!(distance_to_reversible(&q, &mu).unwrap(), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn pair_invariants_hold() {
        let mu = ProbabilityDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        let pair = MhPair::new(&q_c(), &mu).unwrap();
        assert!(is_reversible(&pair.m1, &mu, 1e-12));
        assert!(is_reversible(&pair.m2, &mu, 1e-12));
        assert!(peskun_dominates(&pair.m2, &pair.m1, 0.0).unwrap());
        assert!(pair.sum_identity_defect().unwrap() <= 1e-12);
        let r = pair.difference();
        assert!(is_reversible(&r, &mu, 1e-12));
    }

    #[test]
    fn zero_target_mass_rejected() {
        let mu = ProbabilityDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(build_m1(&q_a(), &mu), Err(Error::ZeroTargetMass { state: 1 }));
        assert_eq!(distance_to_reversible(&q_a(), &mu), Err(Error::ZeroTargetMass { state: 1 }));
    }
}
