use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mhrev_core::mis_closed_form::MisValidation;
use mhrev_core::mixing_sst::separation_distance;
use mhrev_core::oracles::{
    projection_oracle, random_distribution, random_irreducible_generator, InstanceSpec,
    ProjectionReport, Structure,
};
use mhrev_core::{
    additive_reversiblization, bd_sst, build_m1, build_m2, build_mis, convex_combination,
    distance_to_reversible, is_reversible, l1_distance, mis_cross_validate, mis_spectrum,
    stationary_distribution, Generator, MhPair, MisSpectrum, ProbabilityDistribution,
    SstDistribution, Tolerances,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ChainFile;
use crate::error::CliError;
use crate::report::{compare, Battery, ComparisonReport, Verdict};

/// Where the target law came from.
pub fn resolve_target(
    chain: &ChainFile,
    g: &Generator,
    override_target: Option<&ProbabilityDistribution>,
) -> Result<(ProbabilityDistribution, &'static str), CliError> {
    if let Some(t) = override_target {
        return Ok((t.clone(), "override"));
    }
    if let Some(t) = chain.target()? {
        return Ok((t, "file"));
    }
    Ok((stationary_distribution(g)?, "stationary"))
}

fn check_len(what: &str, len: usize, n: usize) -> Result<(), CliError> {
    if len != n {
        return Err(CliError::Usage(format!("{what} has {len} entries, chain has {n} states")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoRecord {
    pub states: usize,
    pub labels: Option<Vec<String>>,
    pub irreducible: bool,
    pub stationary: Option<Vec<f64>>,
    pub target: Option<Vec<f64>>,
    pub reversible_for_target: Option<bool>,
    pub distance_to_reversible: Option<f64>,
    pub birth_death: bool,
    pub max_exit_rate: f64,
}

pub fn cmd_info(chain: &ChainFile) -> Result<InfoRecord, CliError> {
    let g = chain.generator()?;
    let target = chain.target()?;
    if let Some(t) = &target {
        check_len("target", t.len(), g.n())?;
    }
    let positive = target.as_ref().filter(|t| t.require_positive().is_ok());
    Ok(InfoRecord {
        states: g.n(),
        labels: g.labels().map(<[String]>::to_vec),
        irreducible: g.is_irreducible(),
        stationary: stationary_distribution(&g).ok().map(|p| p.as_slice().to_vec()),
        target: target.as_ref().map(|t| t.as_slice().to_vec()),
        reversible_for_target: positive.map(|t| is_reversible(&g, t, Tolerances::default().order)),
        distance_to_reversible: positive.and_then(|t| distance_to_reversible(&g, t).ok()),
        birth_death: mhrev_core::mixing_sst::is_birth_death(&g).is_ok(),
        max_exit_rate: (0..g.n()).map(|x| g.exit_rate(x)).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    M1,
    M2,
    Additive,
    /// `(1 - alpha) M1 + alpha M2`.
    Convex(f64),
}

impl FromStr for Kind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "m1" => Ok(Kind::M1),
            "m2" => Ok(Kind::M2),
            "additive" => Ok(Kind::Additive),
            other => match other.strip_prefix("convex:") {
                Some(a) => a
                    .parse()
                    .map(Kind::Convex)
                    .map_err(|_| CliError::Usage(format!("cannot parse convex weight `{a}`"))),
                None => Err(CliError::Usage(format!(
                    "unknown kind `{other}`; expected m1, m2, additive or convex:<alpha>"
                ))),
            },
        }
    }
}

/// Builds the requested reversiblization and returns it as a chain file
/// carrying the target and its reversibility and irreducibility flags.
pub fn cmd_reversiblize(
    chain: &ChainFile,
    kind: Kind,
    override_target: Option<&ProbabilityDistribution>,
) -> Result<(ChainFile, Generator), CliError> {
    let q = chain.generator()?;
    let (mu, _) = resolve_target(chain, &q, override_target)?;
    check_len("target", mu.len(), q.n())?;
    let out = match kind {
        Kind::M1 => build_m1(&q, &mu)?,
        Kind::M2 => build_m2(&q, &mu)?,
        Kind::Additive => additive_reversiblization(&q, &mu)?,
        Kind::Convex(alpha) => convex_combination(&MhPair::new(&q, &mu)?, alpha)?,
    };
    let mut file = ChainFile::from_generator(&out, Some(&mu));
    file.reversible = Some(is_reversible(&out, &mu, Tolerances::default().identity));
    file.irreducible = Some(out.is_irreducible());
    Ok((file, out))
}

pub fn cmd_compare(
    chain: &ChainFile,
    override_target: Option<&ProbabilityDistribution>,
    battery: &Battery,
    tolerances: &Tolerances,
) -> Result<ComparisonReport, CliError> {
    let q = chain.generator()?;
    let (mu, source) = resolve_target(chain, &q, override_target)?;
    check_len("target", mu.len(), q.n())?;
    let target = (source != "stationary").then_some((&mu, source));
    compare(&q, target, battery, tolerances)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexPoint {
    pub alpha: f64,
    pub distance: f64,
}

/// Coordinates `(a, b) = (G(0,1), G(1,0))` of two-state generators.
#[derive(Debug, Clone, Serialize)]
pub struct Plane {
    pub q: [f64; 2],
    pub m1: [f64; 2],
    pub m2: [f64; 2],
    pub additive: [f64; 2],
    /// The reversible set is the ray `mu(1) b = mu(0) a`, i.e. `b = slope * a`.
    pub reversible_line_slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionRecord {
    pub target_source: &'static str,
    pub target: Vec<f64>,
    pub distance_to_reversible: f64,
    pub distance_m1: f64,
    pub distance_m2: f64,
    pub distance_additive: f64,
    pub convex_grid: Vec<ConvexPoint>,
    pub oracle: ProjectionReport,
    pub plane: Option<Plane>,
}

impl ProjectionRecord {
    pub fn oracle_holds(&self) -> bool {
        self.oracle.verdict && self.oracle.uniqueness_verdict && self.oracle.perturbation_verdict
    }
}

pub fn cmd_project(
    chain: &ChainFile,
    override_target: Option<&ProbabilityDistribution>,
    samples: usize,
    seed: u64,
) -> Result<ProjectionRecord, CliError> {
    let q = chain.generator()?;
    let (mu, source) = resolve_target(chain, &q, override_target)?;
    check_len("target", mu.len(), q.n())?;
    let pair = MhPair::new(&q, &mu)?;
    let bar = additive_reversiblization(&q, &mu)?;
    let convex_grid = (0..=10)
        .map(|k| {
            let alpha = k as f64 / 10.0;
            let g = convex_combination(&pair, alpha)?;
            Ok(ConvexPoint {
                alpha,
                distance: l1_distance(&q, &g, &mu)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let coords = |g: &Generator| [g.rate(0, 1), g.rate(1, 0)];
    let plane = (q.n() == 2).then(|| Plane {
        q: coords(&q),
        m1: coords(&pair.m1),
        m2: coords(&pair.m2),
        additive: coords(&bar),
        reversible_line_slope: mu.mass(0) / mu.mass(1),
    });
    Ok(ProjectionRecord {
        target_source: source,
        target: mu.as_slice().to_vec(),
        distance_to_reversible: distance_to_reversible(&q, &mu)?,
        distance_m1: l1_distance(&q, &pair.m1, &mu)?,
        distance_m2: l1_distance(&q, &pair.m2, &mu)?,
        distance_additive: l1_distance(&q, &bar, &mu)?,
        convex_grid,
        oracle: projection_oracle(&q, &mu, samples, seed)?,
        plane,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MisRecord {
    pub proposal: Vec<f64>,
    pub target: Vec<f64>,
    pub weights: Vec<f64>,
    pub spectrum: MisSpectrum,
    /// Absent above 200 states.
    pub validation: Option<MisValidation>,
}

/// Closed-form spectra; a failed cross-validation is an error.
pub fn cmd_mis(proposal: &ProbabilityDistribution, target: &ProbabilityDistribution) -> Result<MisRecord, CliError> {
    let inst = build_mis(proposal, target)?;
    let validation = if inst.m() <= 200 {
        Some(mis_cross_validate(&inst)?)
    } else {
        None
    };
    Ok(MisRecord {
        proposal: proposal.as_slice().to_vec(),
        target: target.as_slice().to_vec(),
        weights: inst.weights.clone(),
        spectrum: mis_spectrum(&inst),
        validation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SstBlock {
    pub rates: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `(alpha, E exp(-alpha T))`.
    pub laplace: Vec<(f64, f64)>,
    /// Largest `|sep(t) - P(T > t)|` over the check grid, started from state 0.
    pub separation_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SstRecord {
    pub target_source: &'static str,
    pub m1: SstBlock,
    pub m2: SstBlock,
    pub eigenvalue_order: Verdict,
    pub laplace_order: Verdict,
    pub mean_order: Verdict,
    pub variance_order: Verdict,
}

impl SstRecord {
    pub fn has_violation(&self) -> bool {
        [self.eigenvalue_order, self.laplace_order, self.mean_order, self.variance_order].contains(&Verdict::Violated)
    }
}

pub const SEPARATION_TOL: f64 = 1e-8;

fn sst_block(g: &Generator, mu: &ProbabilityDistribution, alphas: &[f64]) -> Result<(SstBlock, SstDistribution), CliError> {
    let sst = bd_sst(g, mu)?;
    let horizon = 3.0 * sst.mean() + 6.0 * sst.variance().sqrt();
    let mut deviation: f64 = 0.0;
    for k in 1..=10 {
        let t = horizon * k as f64 / 10.0;
        let sep = separation_distance(g, mu, 0, t)?;
        deviation = deviation.max((sep - sst.survival(t)?).abs());
    }
    let laplace = alphas.iter().map(|&a| Ok((a, sst.laplace(a)?))).collect::<Result<_, CliError>>()?;
    Ok((
        SstBlock {
            rates: sst.rates().to_vec(),
            mean: sst.mean(),
            variance: sst.variance(),
            laplace,
            separation_deviation: deviation,
        },
        sst,
    ))
}

/// Fastest strong stationary times from state 0 for `M1` and `M2` of a
/// birth-death chain. A separation cross-check above `1e-8` is an error.
pub fn cmd_bd_sst(
    chain: &ChainFile,
    override_target: Option<&ProbabilityDistribution>,
    alphas: &[f64],
    tol: f64,
) -> Result<SstRecord, CliError> {
    let q = chain.generator()?;
    let (mu, source) = resolve_target(chain, &q, override_target)?;
    check_len("target", mu.len(), q.n())?;
    let pair = MhPair::new(&q, &mu)?;
    let (b1, s1) = sst_block(&pair.m1, &mu, alphas)?;
    let (b2, s2) = sst_block(&pair.m2, &mu, alphas)?;
    for (what, b) in [("M1 separation", &b1), ("M2 separation", &b2)] {
        if b.separation_deviation > SEPARATION_TOL {
            return Err(mhrev_core::Error::ValidationFailure {
                what,
                index: 0,
                deviation: b.separation_deviation,
            }
            .into());
        }
    }
    let fold = |checks: Vec<Verdict>| checks.into_iter().fold(Verdict::Holds, Verdict::worse);
    let le = |a: f64, b: f64| crate::report::compare_le(Some(a), Some(b), tol);
    Ok(SstRecord {
        target_source: source,
        eigenvalue_order: fold(s1.rates().iter().zip(s2.rates()).map(|(&a, &b)| le(a, b)).collect()),
        laplace_order: fold(b1.laplace.iter().zip(&b2.laplace).map(|(a, b)| le(a.1, b.1)).collect()),
        mean_order: le(s2.mean(), s1.mean()),
        variance_order: le(s2.variance(), s1.variance()),
        m1: b1,
        m2: b2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub states: Option<usize>,
    pub target_source: Option<String>,
    pub clauses: usize,
    pub holds_at_tolerance: usize,
    pub violated: usize,
    pub mixing_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRecord {
    pub entries: Vec<SuiteEntry>,
    pub violated: usize,
    pub errors: usize,
}

fn summarize(name: String, result: Result<ComparisonReport, CliError>) -> SuiteEntry {
    match result {
        Ok(r) => SuiteEntry {
            name,
            states: Some(r.states),
            target_source: Some(r.target_source.clone()),
            clauses: r.clauses.len(),
            holds_at_tolerance: r.clauses.iter().filter(|c| c.verdict == Verdict::HoldsAtTolerance).count(),
            violated: r.violated,
            mixing_ratio: r.mixing.ratio,
            error: None,
        },
        Err(e) => SuiteEntry {
            name,
            states: None,
            target_source: None,
            clauses: 0,
            holds_at_tolerance: 0,
            violated: 0,
            mixing_ratio: None,
            error: Some(e.to_string()),
        },
    }
}

/// Chain files in `dir` (sorted, `*.json`) with their default battery, then
/// `random` seeded instances with random batteries; all evaluated in parallel.
pub fn cmd_suite(
    dir: Option<&Path>,
    random: usize,
    max_states: usize,
    seed: u64,
    tolerances: &Tolerances,
) -> Result<SuiteRecord, CliError> {
    let mut files: Vec<PathBuf> = match dir {
        Some(d) => fs::read_dir(d)
            .map_err(|e| CliError::io(d, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        None => vec![],
    };
    files.sort();
    let mut entries: Vec<SuiteEntry> = files
        .par_iter()
        .map(|path| {
            let result = ChainFile::read(path).and_then(|chain| {
                let n = chain.rates.len();
                cmd_compare(&chain, None, &Battery::defaults(n), tolerances)
            });
            summarize(path.display().to_string(), result)
        })
        .collect();
    if max_states < 2 && random > 0 {
        return Err(CliError::Usage("--max-states must be at least 2".into()));
    }
    let generated: Vec<SuiteEntry> = (0..random)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let n = 2 + (rand::Rng::random_range(&mut rng, 0..=max_states - 2));
            let structure = if i % 2 == 0 { Structure::Dense } else { Structure::BirthDeath };
            let stationary_target = i % 4 >= 2;
            let name = format!(
                "random-{i} n={n} {} {}",
                if structure == Structure::Dense { "dense" } else { "birth-death" },
                if stationary_target { "stationary" } else { "random-target" }
            );
            let result = (|| {
                let spec = InstanceSpec::new(n, rand::Rng::random(&mut rng), structure);
                let q = random_irreducible_generator(&spec)?;
                let battery = Battery::random(n, &mut rng);
                let mu = random_distribution(n, &mut rng);
                let target = (!stationary_target).then_some((&mu, "random"));
                compare(&q, target, &battery, tolerances)
            })();
            summarize(name, result)
        })
        .collect();
    entries.extend(generated);
    Ok(SuiteRecord {
        violated: entries.iter().map(|e| e.violated).sum(),
        errors: entries.iter().filter(|e| e.error.is_some()).count(),
        entries,
    })
}
