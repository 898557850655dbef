//! Generators, distributions and observables on a finite state space, plus the
//! elementary operations every other module builds on: stationary laws, time
//! reversal with respect to a target, additive reversiblization, Peskun
//! comparison, weighted inner products and Dirichlet forms.
//!
//! Tolerances are relative to a generator's [`Generator::scale`], the larger of
//! 1 and its largest off-diagonal rate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Row-sum tolerance applied by [`validate_generator`], relative to scale.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Normalization tolerance for probability vectors.
pub const MASS_TOL: f64 = 1e-9;

/// Assertion tolerances: `identity` for algebraic identities, `order` for
/// inequalities between functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub identity: f64,
    pub order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-12,
            order: 1e-9,
        }
    }
}

/// A conservative rate matrix: non-negative off-diagonal entries, rows summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    rates: DMatrix<f64>,
    labels: Option<Vec<String>>,
    irreducible: bool,
}

impl Generator {
    /// Builds a generator from off-diagonal rates; the diagonal is set to the
    /// negated off-diagonal row sum. Callers guarantee non-negative finite rates.
    pub(crate) fn from_off_diagonal(n: usize, mut rate: impl FnMut(usize, usize) -> f64) -> Self {
        let mut rates = DMatrix::zeros(n, n);
        for x in 0..n {
            let mut exit = 0.0;
            for y in 0..n {
                if x != y {
                    let r = rate(x, y);
                    rates[(x, y)] = r;
                    exit += r;
                }
            }
            rates[(x, x)] = -exit;
        }
        let irreducible = linalg::strongly_connected(&rates);
        Generator {
            rates,
            labels: None,
            irreducible,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        validate_generator(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.rates.nrows()
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.rates[(x, y)]
    }

    /// Total jump rate out of `x`, i.e. `-G(x,x)`.
    pub fn exit_rate(&self, x: usize) -> f64 {
        -self.rates[(x, x)]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// `max(1, largest off-diagonal rate)`.
    pub fn scale(&self) -> f64 {
        let n = self.n();
        let mut s: f64 = 1.0;
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    s = s.max(self.rates[(x, y)]);
                }
            }
        }
        s
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rates.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Entrywise `a * self + b * other` on off-diagonals, diagonal re-derived.
    /// Panics on mismatched dimensions; the result must have non-negative rates.
    pub(crate) fn combine(&self, a: f64, other: &Generator, b: f64) -> Generator {
        assert_eq!(self.n(), other.n());
        let mut g = Generator::from_off_diagonal(self.n(), |x, y| {
            (a * self.rate(x, y) + b * other.rate(x, y)).max(0.0)
        });
        g.labels = self.labels.clone();
        g
    }

    /// Largest entrywise deviation from `other`, diagonal included.
    pub fn max_abs_diff(&self, other: &Generator) -> f64 {
        (&self.rates - &other.rates).amax()
    }

    /// `G f` as a vector.
    pub fn apply(&self, f: &ObservableFunction) -> Result<DVector<f64>> {
        check_dim(self.n(), f.len())?;
        Ok(&self.rates * f.values())
    }

    /// `nu G` as a row vector stored in a column.
    pub fn apply_left(&self, nu: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.n(), nu.len())?;
        Ok(self.rates.tr_mul(nu))
    }

    /// Every rate multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Generator {
        let mut g = self.clone();
        g.rates *= c;
        g
    }
}

/// A probability vector. Targets used for Metropolis-Hastings constructions
/// must additionally be strictly positive, checked where they are consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    weights: DVector<f64>,
}

impl ProbabilityDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(ProbabilityDistribution {
            weights: DVector::from_vec(weights),
        })
    }

    /// Divides by the total mass. Fails on negative, non-finite or all-zero input.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityDistribution {
            weights: DVector::from_element(n, 1.0 / n as f64),
        }
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut weights = DVector::zeros(n);
        weights[x] = 1.0;
        ProbabilityDistribution { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn as_slice(&self) -> &[f64] {
        self.weights.as_slice()
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.weights[x]
    }

    /// Fails with [`Error::ZeroTargetMass`] at the first non-positive entry.
    pub fn require_positive(&self) -> Result<()> {
        match self.weights.iter().position(|&w| w <= 0.0) {
            Some(state) => Err(Error::ZeroTargetMass { state }),
            None => Ok(()),
        }
    }

    /// Expectation of `values` under this law.
    pub fn expect(&self, values: &DVector<f64>) -> f64 {
        self.weights.dot(values)
    }

    pub fn max_abs_diff(&self, other: &ProbabilityDistribution) -> f64 {
        (&self.weights - &other.weights).amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableFunction {
    values: DVector<f64>,
}

impl ObservableFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("observable entry {i} is not finite")));
        }
        Ok(ObservableFunction {
            values: DVector::from_vec(values),
        })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ObservableFunction {
            values: DVector::from_element(n, c),
        }
    }

    pub(crate) fn from_vector(values: DVector<f64>) -> Self {
        ObservableFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Checks the generator invariants on a square matrix. Reducible matrices are
/// accepted; query [`Generator::is_irreducible`].
pub fn validate_generator(matrix: &DMatrix<f64>) -> Result<Generator> {
    let (rows, cols) = matrix.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let mut max_off: f64 = 1.0;
    for x in 0..rows {
        for y in 0..cols {
            let v = matrix[(x, y)];
            if !v.is_finite() {
                return Err(Error::NonFinite { row: x, col: y });
            }
            if x != y {
                if v < 0.0 {
                    return Err(Error::NegativeOffDiagonal {
                        row: x,
                        col: y,
                        value: v,
                    });
                }
                max_off = max_off.max(v);
            }
        }
    }
    for x in 0..rows {
        let sum: f64 = matrix.row(x).iter().sum();
        if sum.abs() > ROW_SUM_TOL * max_off {
            return Err(Error::RowSumViolation { row: x, sum });
        }
    }
    Ok(Generator {
        rates: matrix.clone(),
        labels: None,
        irreducible: linalg::strongly_connected(matrix),
    })
}

/// Solves `pi G = 0`, `sum(pi) = 1` for an irreducible generator.
pub fn stationary_distribution(g: &Generator) -> Result<ProbabilityDistribution> {
    let n = g.n();
    if !g.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    if n == 1 {
        return Ok(ProbabilityDistribution::uniform(1));
    }
    // Transposed balance equations with the last one replaced by normalization.
    let mut a = g.rates().transpose();
    for y in 0..n {
        a[(n - 1, y)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = linalg::solve(&a, &b).map_err(|_| Error::NotIrreducible)?;
    if pi.iter().any(|&p| p <= 0.0) {
        return Err(Error::NotIrreducible);
    }
    let total = pi.sum();
    Ok(ProbabilityDistribution {
        weights: pi / total,
    })
}

/// `Q*(x,y) = mu(y) Q(y,x) / mu(x)` off the diagonal.
pub fn time_reversal(g: &Generator, mu: &ProbabilityDistribution) -> Result<Generator> {
    check_dim(g.n(), mu.len())?;
    mu.require_positive()?;
    let mut out = Generator::from_off_diagonal(g.n(), |x, y| mu.mass(y) * g.rate(y, x) / mu.mass(x));
    out.labels = g.labels.clone();
    Ok(out)
}

/// `(G + G*) / 2`, which is always `mu`-reversible.
pub fn additive_reversiblization(g: &Generator, mu: &ProbabilityDistribution) -> Result<Generator> {
    let rev = time_reversal(g, mu)?;
    Ok(g.combine(0.5, &rev, 0.5))
}

/// Largest detailed-balance defect `|mu(x)G(x,y) - mu(y)G(y,x)|` over pairs.
pub fn reversibility_defect(g: &Generator, mu: &ProbabilityDistribution) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    let n = g.n();
    let mut defect: f64 = 0.0;
    for x in 0..n {
        for y in (x + 1)..n {
            defect = defect.max((mu.mass(x) * g.rate(x, y) - mu.mass(y) * g.rate(y, x)).abs());
        }
    }
    Ok(defect)
}

/// Detailed balance within `tol * scale`.
pub fn is_reversible(g: &Generator, mu: &ProbabilityDistribution, tol: f64) -> bool {
    reversibility_defect(g, mu).is_ok_and(|d| d <= tol * g.scale())
}

/// `G1 ⪰ G2`: every off-diagonal rate of `g1` is at least that of `g2`, up to `tol`.
pub fn peskun_dominates(g1: &Generator, g2: &Generator, tol: f64) -> Result<bool> {
    check_dim(g1.n(), g2.n())?;
    let n = g1.n();
    Ok((0..n).all(|x| (0..n).all(|y| x == y || g1.rate(x, y) >= g2.rate(x, y) - tol)))
}

/// `sum_x f(x) g(x) mu(x)`.
pub fn inner_product(
    f: &ObservableFunction,
    g: &ObservableFunction,
    mu: &ProbabilityDistribution,
) -> Result<f64> {
    check_dim(mu.len(), f.len())?;
    check_dim(mu.len(), g.len())?;
    Ok(f.values().iter().zip(g.values().iter()).zip(mu.weights().iter()).map(|((a, b), m)| a * b * m).sum())
}

/// `<-G f, f>_mu`.
pub fn dirichlet_form(g: &Generator, mu: &ProbabilityDistribution, f: &ObservableFunction) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    let gf = ObservableFunction::from_vector(-g.apply(f)?);
    inner_product(&gf, f, mu)
}

/// `(1/2) sum_{x,y} mu(x) G(x,y) (f(x) - f(y))^2`, the edge form of the
/// Dirichlet energy. Agrees with [`dirichlet_form`] for `mu`-reversible `G`.
pub fn edge_dirichlet_form(
    g: &Generator,
    mu: &ProbabilityDistribution,
    f: &ObservableFunction,
) -> Result<f64> {
    check_dim(g.n(), mu.len())?;
    check_dim(g.n(), f.len())?;
    let n = g.n();
    let mut total = 0.0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                let d = f.get(x) - f.get(y);
                total += mu.mass(x) * g.rate(x, y) * d * d;
            }
        }
    }
    Ok(0.5 * total)
}
