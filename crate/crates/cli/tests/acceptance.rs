//! Acceptance criteria, one line of output each. Run with `cargo test --test acceptance`.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mhrev_cli::report::{random_disjoint_pair, random_distinct_pair, random_set};
use mhrev_core::mixing_sst::{is_birth_death, semigroup_defect, separation_distance};
use mhrev_core::oracles::{
    projection_oracle, random_distribution, random_irreducible_generator,
    random_reversible_generator, InstanceSpec, Structure,
};
use mhrev_core::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = std::result::Result<String, String>;

const IDENTITY: f64 = 1e-12;
const ORDER: f64 = 1e-9;
const VARIATIONAL: f64 = 1e-6;

/// Counts checks and keeps the first few failure messages.
#[derive(Default)]
struct Checks {
    total: usize,
    failures: Vec<String>,
    failed: usize,
}

impl Checks {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 5 {
                self.failures.push(msg());
            }
        }
    }

    /// `a <= b + tol`.
    fn le(&mut self, a: f64, b: f64, tol: f64, what: impl FnOnce() -> String) {
        self.check(a <= b + tol, || format!("{}: {a:.17e} > {b:.17e}", what()));
    }

    fn close(&mut self, a: f64, b: f64, tol: f64, what: impl FnOnce() -> String) {
        self.check((a - b).abs() <= tol, || format!("{}: {a:.17e} vs {b:.17e}", what()));
    }

    fn finish(self, detail: String) -> Outcome {
        if self.failed == 0 {
            Ok(format!("{} checks; {detail}", self.total))
        } else {
            Err(format!("{}/{} checks failed; first: {}", self.failed, self.total, self.failures.join(" | ")))
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    InstanceSpec::new(2, seed, Structure::Dense).rng()
}

fn structure(i: usize) -> Structure {
    if i % 2 == 0 {
        Structure::Dense
    } else {
        Structure::BirthDeath
    }
}

fn observable(n: usize, rng: &mut impl Rng) -> ObservableFunction {
    ObservableFunction::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn centred(n: usize, law: &ProbabilityDistribution, rng: &mut impl Rng) -> ObservableFunction {
    let f = observable(n, rng);
    let mean = law.expect(f.values());
    ObservableFunction::new(f.as_slice().iter().map(|x| x - mean).collect()).unwrap()
}

fn criterion_1() -> Outcome {
    let mut c = Checks::default();
    for i in 0..500 {
        let n = 2 + i % 7;
        let spec = InstanceSpec::new(n, 1000 + i as u64, structure(i));
        let q = random_irreducible_generator(&spec).unwrap();
        let mut r = rng(5000 + i as u64);
        let random_mu = random_distribution(n, &mut r);
        let pi = stationary_distribution(&q).unwrap();
        for (stationary, mu) in [(false, &random_mu), (true, &pi)] {
            let pair = MhPair::new(&q, mu).unwrap();
            let scale = q.scale();
            c.check(is_reversible(&pair.m1, mu, IDENTITY), || format!("instance {i}: M1 not reversible"));
            c.check(is_reversible(&pair.m2, mu, IDENTITY), || format!("instance {i}: M2 not reversible"));
            c.check(peskun_dominates(&pair.m2, &pair.m1, ORDER).unwrap(), || format!("instance {i}: M2 !>= M1"));
            c.le(pair.sum_identity_defect().unwrap(), 0.0, IDENTITY * scale, || format!("instance {i}: M1+M2 vs Q+Q*"));
            for _ in 0..100 {
                let f = observable(n, &mut r);
                let e1 = dirichlet_form(&pair.m1, mu, &f).unwrap();
                let e2 = dirichlet_form(&pair.m2, mu, &f).unwrap();
                c.le(e1, e2, ORDER, || format!("instance {i}: Dirichlet M1 vs M2"));
                if stationary {
                    let eq = dirichlet_form(&q, mu, &f).unwrap();
                    c.le(e1, eq, ORDER, || format!("instance {i}: Dirichlet M1 vs Q"));
                    c.le(eq, e2, ORDER, || format!("instance {i}: Dirichlet Q vs M2"));
                }
            }
            if stationary {
                c.check(peskun_dominates(&pair.m2, &q, ORDER).unwrap(), || format!("instance {i}: M2 !>= Q"));
                c.check(peskun_dominates(&q, &pair.m1, ORDER).unwrap(), || format!("instance {i}: Q !>= M1"));
                let star = time_reversal(&q, mu).unwrap();
                c.le(star.apply_left(mu.weights()).unwrap().amax(), 0.0, IDENTITY * scale, || {
                    format!("instance {i}: pi not stationary for Q*")
                });
            }
        }
    }
    c.finish("500 instances, random target and stationary target".into())
}

fn criterion_2() -> Outcome {
    let mut c = Checks::default();
    let mut reducible = 0;
    for i in 0..200 {
        let n = 2 + i % 5;
        let spec = InstanceSpec::new(n, 2000 + i as u64, structure(i));
        let q = random_irreducible_generator(&spec).unwrap();
        let mu = random_distribution(n, &mut rng(6000 + i as u64));
        let d = distance_to_reversible(&q, &mu).unwrap();
        let pair = MhPair::new(&q, &mu).unwrap();
        for (name, g) in [("M1", &pair.m1), ("M2", &pair.m2)] {
            c.close(l1_distance(&q, g, &mu).unwrap(), d, IDENTITY, || format!("instance {i}: {name} distance"));
        }
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let g = convex_combination(&pair, alpha).unwrap();
            c.close(l1_distance(&q, &g, &mu).unwrap(), d, IDENTITY, || format!("instance {i}: convex {alpha} distance"));
        }
        let report = projection_oracle(&q, &mu, 1000, 9000 + i as u64).unwrap();
        reducible += report.reducible_samples;
        c.check(report.verdict, || format!("instance {i}: sample beats closed form ({} < {})", report.min_sampled, report.closed_form));
        c.check(report.uniqueness_verdict, || format!("instance {i}: side-condition sample ties M1/M2"));
        c.check(report.perturbation_verdict, || format!("instance {i}: perturbation does not increase distance"));
    }
    c.finish(format!("200 instances x 1000 samples ({reducible} reducible samples)"))
}

/// Paired functionals for the `M1` vs `M2` battery and the stationary sandwich.
struct Battery {
    sets: Vec<TargetSet>,
    observables: Vec<ObservableFunction>,
    occupations: Vec<ProbabilityDistribution>,
    pairs: Vec<(TargetSet, TargetSet)>,
    commutes: Vec<(usize, usize)>,
}

fn battery(n: usize, law: &ProbabilityDistribution, r: &mut ChaCha8Rng) -> Battery {
    Battery {
        sets: (0..5).map(|_| random_set(n, r)).collect(),
        observables: (0..20).map(|_| centred(n, law, r)).collect(),
        occupations: (0..10).map(|_| random_distribution(n, r)).collect(),
        pairs: (0..5).map(|_| random_disjoint_pair(n, r)).collect(),
        commutes: (0..5).map(|_| random_distinct_pair(n, r)).collect(),
    }
}

const LAMBDAS: [f64; 3] = [0.1, 1.0, 10.0];

/// Values of every functional in the battery, in a fixed order, paired with
/// whether larger means faster.
fn functionals(g: &Generator, law: &ProbabilityDistribution, b: &Battery, variational: bool) -> Vec<(String, f64, bool, bool)> {
    let mut out = vec![("gap".to_string(), spectral_gap(g, law).unwrap(), true, false)];
    for (k, a) in b.sets.iter().enumerate() {
        for l in LAMBDAS {
            out.push((format!("laplace A{k} lambda={l}"), mean_hitting_laplace(g, law, a, l).unwrap(), true, false));
        }
        out.push((format!("mean hitting A{k}"), mean_hitting_time(g, law, a).unwrap(), false, false));
    }
    out.push(("t_av".into(), average_hitting_time(g, law).unwrap(), false, false));
    for (k, f) in b.observables.iter().enumerate() {
        out.push((format!("variance f{k}"), asymptotic_variance(g, law, f).unwrap(), false, false));
    }
    for (k, nu) in b.occupations.iter().enumerate() {
        let value = if variational {
            rate_function_variational(g, nu, &VariationalOptions::default()).unwrap()
        } else {
            rate_function_reversible(g, law, nu).unwrap()
        };
        out.push((format!("rate function nu{k}"), value, true, variational));
    }
    for (k, (a, bset)) in b.pairs.iter().enumerate() {
        out.push((format!("capacity pair{k}"), capacity(g, law, a, bset).unwrap(), true, false));
    }
    for &(x, y) in &b.commutes {
        out.push((format!("commute {x}~{y}"), commute_time(g, x, y).unwrap(), false, false));
    }
    out
}

/// `slow` is ordered below `fast` when larger is faster, above otherwise.
fn ordered(c: &mut Checks, slow: &[(String, f64, bool, bool)], fast: &[(String, f64, bool, bool)], ctx: &str) {
    for (s, f) in slow.iter().zip(fast) {
        let tol = if s.3 || f.3 { VARIATIONAL } else { ORDER };
        if s.2 {
            c.le(s.1, f.1, tol, || format!("{ctx}: {}", s.0));
        } else {
            c.le(f.1, s.1, tol, || format!("{ctx}: {}", s.0));
        }
    }
}

fn criterion_3() -> Outcome {
    let mut c = Checks::default();
    for i in 0..200 {
        let n = 2 + i % 7;
        let spec = InstanceSpec::new(n, 3000 + i as u64, structure(i));
        let q = random_irreducible_generator(&spec).unwrap();
        let mut r = rng(7000 + i as u64);
        let mu = random_distribution(n, &mut r);
        let pair = MhPair::new(&q, &mu).unwrap();
        let b = battery(n, &mu, &mut r);
        let f1 = functionals(&pair.m1, &mu, &b, false);
        let f2 = functionals(&pair.m2, &mu, &b, false);
        ordered(&mut c, &f1, &f2, &format!("instance {i} M1 vs M2"));
    }
    c.finish("200 instances, random target".into())
}

fn criterion_4() -> Outcome {
    let mut c = Checks::default();
    let mut table = String::from("instance,n,t_mix_m1,t_mix_qbar,t_mix_m2,ratio_m2_m1,qbar_between\n");
    let (mut between, mut ratio_min, mut ratio_max) = (0, f64::INFINITY, 0.0f64);
    for i in 0..200 {
        // Two-state and birth-death chains are reversible for their own
        // stationary law, which would collapse the sandwich.
        let n = 3 + i % 6;
        let spec = InstanceSpec::new(n, 4000 + i as u64, Structure::Dense);
        let q = random_irreducible_generator(&spec).unwrap();
        let mut r = rng(8000 + i as u64);
        let pi = stationary_distribution(&q).unwrap();
        let pair = MhPair::new(&q, &pi).unwrap();
        let bar = additive_reversiblization(&q, &pi).unwrap();
        let b = battery(n, &pi, &mut r);
        c.check(!is_reversible(&q, &pi, ORDER), || format!("instance {i}: proposal unexpectedly reversible"));
        let fq = functionals(&q, &pi, &b, true);
        let fbar = functionals(&bar, &pi, &b, false);
        let f1 = functionals(&pair.m1, &pi, &b, false);
        let f2 = functionals(&pair.m2, &pi, &b, false);
        let ctx = format!("instance {i}");
        ordered(&mut c, &f1, &fbar, &format!("{ctx} M1 vs Qbar"));
        ordered(&mut c, &fbar, &f2, &format!("{ctx} Qbar vs M2"));
        // The spectral gap of Q is defined through Qbar; skip that trivial pair.
        ordered(&mut c, &fbar[1..], &fq[1..], &format!("{ctx} Qbar vs Q"));
        ordered(&mut c, &f1, &f2, &format!("{ctx} M1 vs M2"));

        let t = |g: &Generator| tv_mixing_time(g, &pi, 0.25).unwrap();
        let (t1, tb, t2) = (t(&pair.m1), t(&bar), t(&pair.m2));
        let ratio = t2 / t1;
        let inside = t2 <= tb && tb <= t1;
        between += inside as usize;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        writeln!(table, "{i},{n},{t1},{tb},{t2},{ratio},{inside}").unwrap();
    }
    let path = std::env::temp_dir().join("mhrev_mixing_report.csv");
    std::fs::write(&path, &table).unwrap();
    println!("    mixing-time report (not asserted): t_mix(M2)/t_mix(M1) in [{ratio_min:.4}, {ratio_max:.4}]; t_mix(Qbar) between M2 and M1 on {between}/200; table at {}", path.display());
    for line in table.lines().take(6) {
        println!("      {line}");
    }
    c.finish("200 non-reversible dense instances, stationary target, Q and Qbar in the sandwich".into())
}

fn criterion_5() -> Outcome {
    let mut c = Checks::default();
    for i in 0..100 {
        let m = 2 + (i * 7) % 49;
        let mut r = rng(10_000 + i as u64);
        let p = random_distribution(m, &mut r);
        let mu = random_distribution(m, &mut r);
        let inst = build_mis(&p, &mu).unwrap();
        match mis_cross_validate(&inst) {
            Ok(v) => {
                for (what, dev) in [
                    ("M1 eigenvalues", v.m1_eigenvalue_deviation),
                    ("M2 eigenvalues", v.m2_eigenvalue_deviation),
                    ("M1 residual", v.m1_max_residual),
                    ("M2 residual", v.m2_max_residual),
                ] {
                    c.le(dev, 0.0, 1e-10, || format!("instance {i} (m={m}): {what}"));
                }
            }
            Err(e) => c.check(false, || format!("instance {i} (m={m}): {e}")),
        }
    }
    let third = 1.0 / 3.0;
    let b = build_mis(
        &ProbabilityDistribution::new(vec![third; 3]).unwrap(),
        &ProbabilityDistribution::new(vec![0.5, third, 1.0 / 6.0]).unwrap(),
    )
    .unwrap();
    let s = mis_spectrum(&b);
    let expect = [
        ("gamma", &s.gamma, vec![1.0 / 3.0, 1.0 / 6.0]),
        ("beta", &s.beta, vec![-1.0 / 6.0, -1.0]),
        ("M2 eigenvalues", &s.m2_eigenvalues, vec![-7.0 / 6.0, -2.0]),
        ("M1 eigenvalues", &s.m1_eigenvalues, vec![-2.0 / 3.0, -5.0 / 6.0]),
    ];
    for (what, got, want) in expect {
        c.check(got.len() == want.len(), || format!("example: {what} length"));
        for (g, w) in got.iter().zip(&want) {
            c.close(*g, *w, 1e-12, || format!("example: {what}"));
        }
    }
    c.finish("100 instances, m in 2..=50, plus the three-state example".into())
}

fn criterion_6() -> Outcome {
    let mut c = Checks::default();
    let mut worst_sep: f64 = 0.0;
    for i in 0..200 {
        let n = 2 + i % 11;
        let spec = InstanceSpec::new(n, 11_000 + i as u64, Structure::BirthDeath);
        let q = random_irreducible_generator(&spec).unwrap();
        let mu = random_distribution(n, &mut rng(12_000 + i as u64));
        let pair = MhPair::new(&q, &mu).unwrap();
        c.check(is_birth_death(&pair.m1).is_ok() && is_birth_death(&pair.m2).is_ok(), || format!("instance {i}: not birth-death"));
        let s1 = bd_sst(&pair.m1, &mu).unwrap();
        let s2 = bd_sst(&pair.m2, &mu).unwrap();
        for (k, (a, b)) in s1.rates().iter().zip(s2.rates()).enumerate() {
            c.le(*a, *b, ORDER, || format!("instance {i}: eigenvalue {k}"));
        }
        for alpha in [0.1, 1.0, 10.0] {
            c.le(s1.laplace(alpha).unwrap(), s2.laplace(alpha).unwrap(), ORDER, || format!("instance {i}: transform at {alpha}"));
        }
        c.le(s2.mean(), s1.mean(), ORDER, || format!("instance {i}: mean"));
        c.le(s2.variance(), s1.variance(), ORDER, || format!("instance {i}: variance"));
        for (g, sst) in [(&pair.m1, &s1), (&pair.m2, &s2)] {
            let horizon = 3.0 * sst.mean();
            for k in 1..=10 {
                let t = horizon * k as f64 / 10.0;
                let dev = (separation_distance(g, &mu, 0, t).unwrap() - sst.survival(t).unwrap()).abs();
                worst_sep = worst_sep.max(dev);
                c.le(dev, 0.0, 1e-8, || format!("instance {i}: separation at t={t}"));
            }
        }
    }
    let q = Generator::from_rows(&[vec![-1.0, 1.0, 0.0], vec![2.0, -3.0, 1.0], vec![0.0, 3.0, -3.0]]).unwrap();
    let u = ProbabilityDistribution::uniform(3);
    let pair = MhPair::new(&q, &u).unwrap();
    let s1 = bd_sst(&pair.m1, &u).unwrap();
    let s2 = bd_sst(&pair.m2, &u).unwrap();
    c.close(s1.rates()[0], 1.0, 1e-12, || "example: M1 rate 1".into());
    c.close(s1.rates()[1], 3.0, 1e-12, || "example: M1 rate 3".into());
    c.close(s1.mean(), 4.0 / 3.0, 1e-12, || "example: M1 mean".into());
    let r7 = 7f64.sqrt();
    c.close(s2.rates()[0], 5.0 - r7, 1e-12, || "example: M2 rate 5-sqrt7".into());
    c.close(s2.rates()[1], 5.0 + r7, 1e-12, || "example: M2 rate 5+sqrt7".into());
    c.close(s2.laplace(1.0).unwrap(), 0.6207, 1e-4, || "example: M2 transform at 1".into());
    c.finish(format!("200 birth-death instances, n in 2..=12; worst separation gap {worst_sep:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut c = Checks::default();
    for i in 0..100 {
        let n = 2 + i % 7;
        let spec = InstanceSpec::new(n, 13_000 + i as u64, structure(i));
        let mut r = rng(14_000 + i as u64);
        let mu = random_distribution(n, &mut r);
        let g = random_reversible_generator(&mu, &spec).unwrap();
        let direct = average_hitting_time(&g, &mu).unwrap();
        let spectral = average_hitting_time_spectral(&g, &mu).unwrap();
        c.close(direct, spectral, ORDER, || format!("instance {i}: t_av routes"));

        let (a, b) = random_disjoint_pair(n, &mut r);
        let dirichlet = capacity_dirichlet(&g, &mu, &a, &b).unwrap();
        let probabilistic = capacity_probabilistic(&g, &mu, &a, &b).unwrap();
        c.close(dirichlet, probabilistic, 1e-10, || format!("instance {i}: capacity routes"));

        if n <= 6 {
            let nu = random_distribution(n, &mut r);
            let closed = rate_function_reversible(&g, &mu, &nu).unwrap();
            let optimized = rate_function_variational(&g, &nu, &VariationalOptions::default()).unwrap();
            c.close(closed, optimized, VARIATIONAL, || format!("instance {i}: rate function routes"));
        }

        let q = random_irreducible_generator(&spec).unwrap();
        let (s, t) = (r.random_range(0.0..5.0), r.random_range(0.0..5.0));
        c.le(semigroup_defect(&q, s, t).unwrap(), 0.0, 1e-10, || format!("instance {i}: semigroup at s={s}, t={t}"));
    }
    c.finish("100 instances per cross-check".into())
}

fn run_cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_mhrev")).args(args).output().expect("binary runs");
    let code = out.status.code().unwrap_or(-1);
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, value)
}

fn criterion_8() -> Outcome {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two_state.json");
    std::fs::write(&path, r#"{"rates": [["-2", "2"], ["1", "-1"]], "target": ["0.5", "0.5"]}"#).unwrap();
    let file = path.to_str().unwrap();

    let (code, report) = run_cli(&["compare", file, "--f", "1,-1", "--nu", "1,0", "--sets", "0:1", "--epsilon", "0.25"]);
    c.check(code == 0, || format!("compare exit code {code}"));
    let block = |name: &str| {
        report["generators"]
            .as_array()
            .and_then(|a| a.iter().find(|b| b["name"] == name))
            .cloned()
            .unwrap_or(Value::Null)
    };
    let num = |v: &Value| v.as_f64().unwrap_or(f64::NAN);
    let (m1, m2) = (block("M1"), block("M2"));
    let rates = |b: &Value| -> Vec<f64> {
        b["rates"].as_array().map(|rows| rows.iter().flat_map(|r| r.as_array().unwrap().iter().map(num)).collect()).unwrap_or_default()
    };
    c.check(rates(&m1) == [-1.0, 1.0, 1.0, -1.0], || format!("M1 matrix {:?}", rates(&m1)));
    c.check(rates(&m2) == [-2.0, 2.0, 2.0, -2.0], || format!("M2 matrix {:?}", rates(&m2)));
    for (b, gap, tmix, var, cap, rate) in [(&m1, 2.0, LN_2 / 2.0, 1.0, 0.5, 1.0), (&m2, 4.0, LN_2 / 4.0, 0.5, 1.0, 2.0)] {
        let name = b["name"].as_str().unwrap_or("?").to_string();
        c.close(num(&b["spectral_gap"]), gap, IDENTITY, || format!("{name} gap"));
        c.close(num(&b["mixing_time"]), tmix, 1e-8, || format!("{name} mixing time"));
        c.close(num(&b["variances"][0]), var, IDENTITY, || format!("{name} variance"));
        c.close(num(&b["capacities"][0]), cap, IDENTITY, || format!("{name} capacity"));
        c.close(num(&b["rate_functions"][0]), rate, IDENTITY, || format!("{name} rate function"));
    }

    let (code, proj) = run_cli(&["project", file, "--samples", "1000", "--seed", "7"]);
    c.check(code == 0, || format!("project exit code {code}"));
    for key in ["distance_m1", "distance_m2", "distance_additive", "distance_to_reversible"] {
        c.close(num(&proj[key]), 0.5, IDENTITY, || key.to_string());
    }
    c.close(num(&proj["plane"]["reversible_line_slope"]), 1.0, IDENTITY, || "line slope".into());
    c.check(num(&proj["oracle"]["min_sampled"]) >= 0.5 - 1e-12, || "oracle minimum below 0.5".into());
    c.finish("two-state ledger reproduced through the mhrev binary".into())
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion, u64); 8] = [
        ("1 reversiblization identities and orderings", criterion_1, 30),
        ("2 l1 projection onto reversible generators", criterion_2, 60),
        ("3 M1 vs M2 functional orderings", criterion_3, 300),
        ("4 stationary-target sandwich", criterion_4, 300),
        ("5 independent-proposal closed-form spectra", criterion_5, 30),
        ("6 birth-death strong stationary times", criterion_6, 60),
        ("7 numerical cross-checks", criterion_7, 300),
        ("8 two-state worked example end to end", criterion_8, 300),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > Duration::from_secs(budget) => Err(format!("over {budget}s budget; {d}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({:.2}s) {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({:.2}s) {detail}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
