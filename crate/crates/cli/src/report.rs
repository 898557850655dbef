//! Side-by-side functionals of `Q`, `Q*`, `Q̄`, `M1`, `M2` and the ordering
//! clauses between them.

use std::collections::BTreeMap;

use mhrev_core::variance_ldp::donsker_varadhan_objective;
use mhrev_core::{
    additive_reversiblization, asymptotic_variance, average_hitting_time, build_m1, build_m2,
    capacity, commute_time, is_reversible, mean_hitting_laplace, mean_hitting_time,
    rate_function_point_mass, rate_function_reversible, rate_function_variational,
    relaxation_time, spectral_gap, stationary_distribution, time_reversal, tv_mixing_time,
    Generator, ObservableFunction, ProbabilityDistribution, TargetSet, Tolerances,
    VariationalOptions,
};
use rand::Rng;
use serde::Serialize;

use crate::error::CliError;

/// Tolerance for clauses in which a numerically optimized rate function participates.
pub const VARIATIONAL_TOL: f64 = 1e-6;

/// Observables, occupation laws, sets and parameters at which functionals are evaluated.
#[derive(Debug, Clone)]
pub struct Battery {
    pub observables: Vec<Vec<f64>>,
    pub occupations: Vec<ProbabilityDistribution>,
    pub hitting_sets: Vec<TargetSet>,
    pub set_pairs: Vec<(TargetSet, TargetSet)>,
    pub commute_pairs: Vec<(usize, usize)>,
    pub lambdas: Vec<f64>,
    pub epsilon: f64,
}

impl Battery {
    /// Singleton hitting sets (first 10 states), `{0}` vs `{n-1}` for capacity
    /// and commute time, `lambda in {0.1, 1, 10}`, `eps = 1/4`.
    pub fn defaults(n: usize) -> Self {
        let hitting_sets = (0..n.min(10)).map(|x| TargetSet::singleton(x, n).expect("in range")).collect();
        let (set_pairs, commute_pairs) = if n >= 2 {
            let pair = (
                TargetSet::singleton(0, n).expect("in range"),
                TargetSet::singleton(n - 1, n).expect("in range"),
            );
            (vec![pair], vec![(0, n - 1)])
        } else {
            (vec![], vec![])
        };
        Battery {
            observables: vec![],
            occupations: vec![],
            hitting_sets,
            set_pairs,
            commute_pairs,
            lambdas: vec![0.1, 1.0, 10.0],
            epsilon: 0.25,
        }
    }

    /// Seeded random observables, full-support laws and sets.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut battery = Battery::defaults(n);
        battery.observables = (0..3).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        battery.occupations = (0..3)
            .map(|_| mhrev_core::oracles::random_distribution(n, rng))
            .collect();
        battery.hitting_sets = (0..3).map(|_| random_set(n, rng)).collect();
        if n >= 2 {
            battery.set_pairs = (0..2).map(|_| random_disjoint_pair(n, rng)).collect();
            battery.commute_pairs = (0..2).map(|_| random_distinct_pair(n, rng)).collect();
        }
        battery
    }
}

/// A random non-empty proper subset when `n >= 2`.
pub fn random_set(n: usize, rng: &mut impl Rng) -> TargetSet {
    let size = if n > 1 { rng.random_range(1..n) } else { 1 };
    let mut states: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.random_range(i..n);
        states.swap(i, j);
    }
    TargetSet::new(states[..size].iter().copied(), n).expect("non-empty, in range")
}

/// Two disjoint non-empty sets; needs `n >= 2`.
pub fn random_disjoint_pair(n: usize, rng: &mut impl Rng) -> (TargetSet, TargetSet) {
    let mut states: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let j = rng.random_range(i..n);
        states.swap(i, j);
    }
    let split = rng.random_range(1..n);
    let end = rng.random_range(split + 1..=n);
    (
        TargetSet::new(states[..split].iter().copied(), n).expect("valid"),
        TargetSet::new(states[split..end].iter().copied(), n).expect("valid"),
    )
}

pub fn random_distinct_pair(n: usize, rng: &mut impl Rng) -> (usize, usize) {
    let x = rng.random_range(0..n);
    let y = (x + rng.random_range(1..n)) % n;
    (x, y)
}

#[derive(Debug, Clone, Serialize)]
pub struct HittingStats {
    pub set: Vec<usize>,
    pub mean: Option<f64>,
    /// One entry per `lambda` in the battery.
    pub laplace: Vec<Option<f64>>,
}

/// Functionals of one generator, evaluated under `law`.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorBlock {
    pub name: &'static str,
    /// `target` for the reversiblizations, `stationary` for `Q` and `Q*`.
    pub law_source: &'static str,
    pub law: Vec<f64>,
    pub reversible: bool,
    pub irreducible: bool,
    pub rates: Vec<Vec<f64>>,
    pub spectral_gap: Option<f64>,
    pub relaxation_time: Option<f64>,
    pub average_hitting_time: Option<f64>,
    pub mixing_time: Option<f64>,
    /// Observables are centred under `law` first.
    pub variances: Vec<Option<f64>>,
    pub rate_functions: Vec<Option<f64>>,
    /// Whether the matching rate function came from the numerical optimizer.
    pub rate_function_variational: Vec<bool>,
    pub capacities: Vec<Option<f64>>,
    pub commute_times: Vec<Option<f64>>,
    pub hitting: Vec<HittingStats>,
}

fn block(name: &'static str, g: &Generator, law: ProbabilityDistribution, from_target: bool, battery: &Battery) -> GeneratorBlock {
    let reversible = is_reversible(g, &law, Tolerances::default().order);
    let variances = battery
        .observables
        .iter()
        .map(|f| {
            let mean: f64 = f.iter().zip(law.as_slice()).map(|(a, b)| a * b).sum();
            let centred = ObservableFunction::new(f.iter().map(|x| x - mean).collect()).ok()?;
            asymptotic_variance(g, &law, &centred).ok()
        })
        .collect();
    let (rate_functions, rate_function_variational) = battery
        .occupations
        .iter()
        .map(|nu| rate_function(g, &law, nu, reversible))
        .unzip();
    GeneratorBlock {
        name,
        law_source: if from_target { "target" } else { "stationary" },
        law: law.as_slice().to_vec(),
        reversible,
        irreducible: g.is_irreducible(),
        rates: g.to_rows(),
        spectral_gap: spectral_gap(g, &law).ok(),
        relaxation_time: relaxation_time(g, &law).ok(),
        average_hitting_time: average_hitting_time(g, &law).ok(),
        mixing_time: tv_mixing_time(g, &law, battery.epsilon).ok(),
        variances,
        rate_functions,
        rate_function_variational,
        capacities: battery.set_pairs.iter().map(|(a, b)| capacity(g, &law, a, b).ok()).collect(),
        commute_times: battery.commute_pairs.iter().map(|&(x, y)| commute_time(g, x, y).ok()).collect(),
        hitting: battery
            .hitting_sets
            .iter()
            .map(|a| HittingStats {
                set: a.members().to_vec(),
                mean: mean_hitting_time(g, &law, a).ok(),
                laplace: battery
                    .lambdas
                    .iter()
                    .map(|&l| mean_hitting_laplace(g, &law, a, l).ok())
                    .collect(),
            })
            .collect(),
    }
}

/// Closed form for reversible generators; otherwise the optimizer for
/// full-support `nu`, the exit rate for point masses, and nothing else.
fn rate_function(g: &Generator, law: &ProbabilityDistribution, nu: &ProbabilityDistribution, reversible: bool) -> (Option<f64>, bool) {
    if reversible {
        return (rate_function_reversible(g, law, nu).ok(), false);
    }
    let support: Vec<usize> = (0..nu.len()).filter(|&x| nu.mass(x) > 0.0).collect();
    match support.as_slice() {
        [x] => (rate_function_point_mass(g, *x).ok(), false),
        s if s.len() == nu.len() => {
            let value = rate_function_variational(g, nu, &VariationalOptions::default()).ok();
            // Guard against an optimizer that stalls below the value at u = 1.
            let floor = donsker_varadhan_objective(g, nu, &vec![1.0; nu.len()]);
            (value.map(|v| v.max(floor)), true)
        }
        _ => (None, false),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    HoldsAtTolerance,
    Violated,
    NotApplicable,
    /// Observed and reported; no inequality is claimed.
    Reported,
}

impl Verdict {
    /// The more severe of two verdicts.
    pub fn worse(self, other: Verdict) -> Verdict {
        use Verdict::*;
        let rank = |v: Verdict| match v {
            Holds | Reported => 0,
            HoldsAtTolerance => 1,
            NotApplicable => 2,
            Violated => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsAtTolerance => "holds-at-tolerance",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not-applicable",
            Verdict::Reported => "reported",
        }
    }
}

/// `lhs <= rhs`, exactly or within `tol * max(1, |lhs|, |rhs|)`.
pub fn compare_le(lhs: Option<f64>, rhs: Option<f64>, tol: f64) -> Verdict {
    match (lhs, rhs) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
            if a <= b {
                Verdict::Holds
            } else if a <= b + tol * a.abs().max(b.abs()).max(1.0) {
                Verdict::HoldsAtTolerance
            } else {
                Verdict::Violated
            }
        }
        _ => Verdict::NotApplicable,
    }
}

/// Whether larger values mean faster convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Larger,
    Smaller,
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    /// `mh-ordering` compares `M1` with `M2`; `stationary-sandwich` places `Q̄`
    /// and `Q` between them when the target is stationary for `Q`.
    pub family: &'static str,
    pub functional: &'static str,
    pub argument: String,
    pub relation: String,
    pub values: BTreeMap<&'static str, Option<f64>>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingObservation {
    pub epsilon: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub additive: Option<f64>,
    /// `t_mix(M2) / t_mix(M1)`.
    pub ratio: Option<f64>,
    pub additive_between: Option<bool>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceRecord {
    pub identity: f64,
    pub order: f64,
    pub variational: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub states: usize,
    pub target_source: String,
    pub target: Vec<f64>,
    pub stationary: Vec<f64>,
    pub target_is_stationary: bool,
    pub tolerances: ToleranceRecord,
    pub lambdas: Vec<f64>,
    pub observables: Vec<Vec<f64>>,
    pub occupations: Vec<Vec<f64>>,
    pub set_pairs: Vec<(Vec<usize>, Vec<usize>)>,
    pub commute_pairs: Vec<(usize, usize)>,
    pub generators: Vec<GeneratorBlock>,
    pub clauses: Vec<Clause>,
    pub mixing: MixingObservation,
    pub violated: usize,
}

impl ComparisonReport {
    pub fn block(&self, name: &str) -> &GeneratorBlock {
        self.generators.iter().find(|b| b.name == name).expect("all five blocks present")
    }

    pub fn has_violation(&self) -> bool {
        self.violated > 0
    }

    /// One functional per row: `section,subject,functional,argument,value,verdict`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "subject", "functional", "argument", "value", "verdict"]).expect("in-memory");
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.generators {
            let mut row = |functional: &str, argument: String, value: Option<f64>| {
                w.write_record(["generator", b.name, functional, &argument, &fmt(value), ""]).expect("in-memory");
            };
            row("spectral_gap", String::new(), b.spectral_gap);
            row("relaxation_time", String::new(), b.relaxation_time);
            row("average_hitting_time", String::new(), b.average_hitting_time);
            row("mixing_time", format!("eps={}", self.mixing.epsilon), b.mixing_time);
            for (i, v) in b.variances.iter().enumerate() {
                row("asymptotic_variance", format!("f{i}"), *v);
            }
            for (i, v) in b.rate_functions.iter().enumerate() {
                row("rate_function", format!("nu{i}"), *v);
            }
            for (i, v) in b.capacities.iter().enumerate() {
                row("capacity", pair_label(&self.set_pairs[i]), *v);
            }
            for (i, v) in b.commute_times.iter().enumerate() {
                let (x, y) = self.commute_pairs[i];
                row("commute_time", format!("{x}~{y}"), *v);
            }
            for h in &b.hitting {
                row("mean_hitting_time", set_label(&h.set), h.mean);
                for (l, v) in self.lambdas.iter().zip(&h.laplace) {
                    row("hitting_laplace", format!("{} lambda={l}", set_label(&h.set)), *v);
                }
            }
        }
        for c in &self.clauses {
            let values = c
                .values
                .iter()
                .map(|(k, v)| format!("{k}={}", fmt(*v)))
                .collect::<Vec<_>>()
                .join(" ");
            w.write_record(["clause", c.family, c.functional, &format!("{} [{}]", c.argument, c.relation), &values, c.verdict.as_str()])
                .expect("in-memory");
        }
        let m = &self.mixing;
        w.write_record(["observation", "mixing", "mixing_time_ratio", &format!("eps={}", m.epsilon), &fmt(m.ratio), m.verdict.as_str()])
            .expect("in-memory");
        String::from_utf8(w.into_inner().expect("in-memory")).expect("utf-8")
    }
}

fn set_label(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn pair_label(pair: &(Vec<usize>, Vec<usize>)) -> String {
    format!("{}|{}", set_label(&pair.0), set_label(&pair.1))
}

struct ClauseBuilder<'a> {
    tolerances: &'a Tolerances,
    sandwich: bool,
    out: Vec<Clause>,
}

impl ClauseBuilder<'_> {
    /// Emits the `M1` vs `M2` clause and, when requested, the sandwich clause.
    /// `values` are indexed as `[Q, Q*, Q̄, M1, M2]`.
    fn push(&mut self, functional: &'static str, argument: String, dir: Direction, values: [Option<f64>; 5], variational: [bool; 5], with_q: bool) {
        let [q, _, bar, m1, m2] = values;
        let tol_for = |names: &[usize]| {
            if names.iter().any(|&i| variational[i]) {
                VARIATIONAL_TOL
            } else {
                self.tolerances.order
            }
        };
        let (lo, hi) = match dir {
            Direction::Larger => (m1, m2),
            Direction::Smaller => (m2, m1),
        };
        let tol = tol_for(&[3, 4]);
        let relation = match dir {
            Direction::Larger => "M1 <= M2",
            Direction::Smaller => "M1 >= M2",
        };
        self.out.push(Clause {
            family: "mh-ordering",
            functional,
            argument: argument.clone(),
            relation: relation.into(),
            values: BTreeMap::from([("M1", m1), ("M2", m2)]),
            tolerance: tol,
            verdict: compare_le(lo, hi, tol),
        });

        let members: &[usize] = if with_q { &[0, 2, 3, 4] } else { &[2, 3, 4] };
        let tol = tol_for(members);
        let pairs = match dir {
            Direction::Larger => [(m1, bar), (bar, m2), (bar, q)],
            Direction::Smaller => [(bar, m1), (m2, bar), (q, bar)],
        };
        let verdict = if self.sandwich {
            pairs[..members.len() - 1]
                .iter()
                .fold(Verdict::Holds, |v, &(a, b)| v.worse(compare_le(a, b, tol)))
        } else {
            Verdict::NotApplicable
        };
        let relation = match (dir, with_q) {
            (Direction::Larger, true) => "M1 <= Qbar <= min(Q, M2)",
            (Direction::Larger, false) => "M1 <= Qbar <= M2",
            (Direction::Smaller, true) => "M1 >= Qbar >= max(Q, M2)",
            (Direction::Smaller, false) => "M1 >= Qbar >= M2",
        };
        let mut map = BTreeMap::from([("M1", m1), ("M2", m2), ("Qbar", bar)]);
        if with_q {
            map.insert("Q", q);
        }
        self.out.push(Clause {
            family: "stationary-sandwich",
            functional,
            argument,
            relation: relation.into(),
            values: map,
            tolerance: tol,
            verdict,
        });
    }
}

/// Evaluates the five generators and all ordering clauses. `target` defaults
/// to the stationary law of `q`.
pub fn compare(
    q: &Generator,
    target: Option<(&ProbabilityDistribution, &str)>,
    battery: &Battery,
    tolerances: &Tolerances,
) -> Result<ComparisonReport, CliError> {
    if !q.is_irreducible() {
        return Err(mhrev_core::Error::NotIrreducible.into());
    }
    let n = q.n();
    let pi = stationary_distribution(q)?;
    let (mu, source) = match target {
        Some((mu, source)) => (mu.clone(), source.to_string()),
        None => (pi.clone(), "stationary".to_string()),
    };
    mu.require_positive()?;
    for nu in &battery.occupations {
        if nu.len() != n {
            return Err(CliError::Usage(format!("--nu has {} entries, chain has {n} states", nu.len())));
        }
    }
    if let Some(f) = battery.observables.iter().find(|f| f.len() != n) {
        return Err(CliError::Usage(format!("--f has {} entries, chain has {n} states", f.len())));
    }
    let residual = q.apply_left(mu.weights())?.amax();
    let target_is_stationary = residual <= tolerances.order * q.scale();

    let star = time_reversal(q, &mu)?;
    let bar = additive_reversiblization(q, &mu)?;
    let m1 = build_m1(q, &mu)?;
    let m2 = build_m2(q, &mu)?;
    let star_law = stationary_distribution(&star).unwrap_or_else(|_| mu.clone());
    let blocks = vec![
        block("Q", q, pi.clone(), false, battery),
        block("Q*", &star, star_law, false, battery),
        block("Qbar", &bar, mu.clone(), true, battery),
        block("M1", &m1, mu.clone(), true, battery),
        block("M2", &m2, mu.clone(), true, battery),
    ];

    let mut b = ClauseBuilder {
        tolerances,
        sandwich: target_is_stationary,
        out: vec![],
    };
    let pick = |f: &dyn Fn(&GeneratorBlock) -> Option<f64>| -> [Option<f64>; 5] {
        [f(&blocks[0]), f(&blocks[1]), f(&blocks[2]), f(&blocks[3]), f(&blocks[4])]
    };
    let exact = [false; 5];

    b.push("spectral_gap", String::new(), Direction::Larger, pick(&|x| x.spectral_gap), exact, false);
    for (i, a) in battery.hitting_sets.iter().enumerate() {
        let label = set_label(a.members());
        for (k, &l) in battery.lambdas.iter().enumerate() {
            b.push(
                "hitting_laplace",
                format!("{label} lambda={l}"),
                Direction::Larger,
                pick(&|x| x.hitting[i].laplace[k]),
                exact,
                true,
            );
        }
        b.push("mean_hitting_time", label, Direction::Smaller, pick(&|x| x.hitting[i].mean), exact, true);
    }
    b.push("average_hitting_time", String::new(), Direction::Smaller, pick(&|x| x.average_hitting_time), exact, true);
    for i in 0..battery.observables.len() {
        b.push("asymptotic_variance", format!("f{i}"), Direction::Smaller, pick(&|x| x.variances[i]), exact, true);
    }
    for i in 0..battery.occupations.len() {
        let variational = [0, 1, 2, 3, 4].map(|k| blocks[k].rate_function_variational[i]);
        b.push("rate_function", format!("nu{i}"), Direction::Larger, pick(&|x| x.rate_functions[i]), variational, true);
    }
    let set_pairs: Vec<(Vec<usize>, Vec<usize>)> = battery
        .set_pairs
        .iter()
        .map(|(a, c)| (a.members().to_vec(), c.members().to_vec()))
        .collect();
    for (i, pair) in set_pairs.iter().enumerate() {
        b.push("capacity", pair_label(pair), Direction::Larger, pick(&|x| x.capacities[i]), exact, true);
    }
    for (i, &(x, y)) in battery.commute_pairs.iter().enumerate() {
        b.push("commute_time", format!("{x}~{y}"), Direction::Smaller, pick(&|g| g.commute_times[i]), exact, true);
    }
    let clauses = b.out;

    let [_, _, t_bar, t_m1, t_m2] = pick(&|x| x.mixing_time);
    let mixing = MixingObservation {
        epsilon: battery.epsilon,
        m1: t_m1,
        m2: t_m2,
        additive: t_bar,
        ratio: t_m1.zip(t_m2).map(|(a, b)| b / a),
        additive_between: match (t_m1, t_bar, t_m2) {
            (Some(a), Some(m), Some(c)) => Some(c <= m && m <= a),
            _ => None,
        },
        verdict: Verdict::Reported,
    };

    let violated = clauses.iter().filter(|c| c.verdict == Verdict::Violated).count();
    Ok(ComparisonReport {
        states: n,
        target_source: source,
        target: mu.as_slice().to_vec(),
        stationary: pi.as_slice().to_vec(),
        target_is_stationary,
        tolerances: ToleranceRecord {
            identity: tolerances.identity,
            order: tolerances.order,
            variational: VARIATIONAL_TOL,
        },
        lambdas: battery.lambdas.clone(),
        observables: battery.observables.clone(),
        occupations: battery.occupations.iter().map(|d| d.as_slice().to_vec()).collect(),
        set_pairs,
        commute_pairs: battery.commute_pairs.clone(),
        generators: blocks,
        clauses,
        mixing,
        violated,
    })
}
