//! Metropolis-Hastings reversiblizations of finite-state continuous-time
//! Markov generators.
//!
//! Given a proposal generator `Q` and a strictly positive target `mu`, the
//! crate builds
//!
//! * `M1(Q, mu)`: off-diagonal `min{Q(x,y), mu(y)Q(y,x)/mu(x)}`, the classical
//!   Metropolis-Hastings generator,
//! * `M2(Q, mu)`: the same with `max`,
//! * the time reversal `Q*` and the additive reversiblization `(Q + Q*)/2`,
//!
//! and evaluates, exactly and densely, the functionals used to compare them:
//! weighted ℓ¹ projection distances, spectral gaps, hitting times and their
//! Laplace transforms, average and commute times, capacities, total-variation
//! mixing times, separation and strong stationary times, asymptotic variances
//! and Donsker-Varadhan rate functions.
//!
//! ```
//! use mhrev_core::{build_m1, build_m2, spectral_gap, Generator, ProbabilityDistribution};
//!
//! let q = Generator::from_rows(&[vec![-2.0, 2.0], vec![1.0, -1.0]]).unwrap();
//! let mu = ProbabilityDistribution::uniform(2);
//! let m1 = build_m1(&q, &mu).unwrap();
//! let m2 = build_m2(&q, &mu).unwrap();
//! assert!((spectral_gap(&m1, &mu).unwrap() - 2.0).abs() < 1e-12);
//! assert!((spectral_gap(&m2, &mu).unwrap() - 4.0).abs() < 1e-12);
//! ```

mod error;
mod linalg;

pub mod hitting_potential;
pub mod markov_core;
pub mod mh_kernels;
pub mod mis_closed_form;
pub mod mixing_sst;
pub mod oracles;
pub mod spectral;
pub mod variance_ldp;

pub use error::{Error, Result};
pub use hitting_potential::{
    average_hitting_time, average_hitting_time_spectral, capacity, capacity_dirichlet,
    capacity_probabilistic, commute_time, equilibrium_potential, expected_hitting_times,
    hitting_laplace, mean_hitting_laplace, mean_hitting_time, TargetSet,
};
pub use markov_core::{
    additive_reversiblization, dirichlet_form, inner_product, is_reversible, peskun_dominates,
    stationary_distribution, time_reversal, validate_generator, Generator, ObservableFunction,
    ProbabilityDistribution, Tolerances,
};
pub use mh_kernels::{
    build_m1, build_m2, convex_combination, distance_to_reversible, l1_distance, MhPair,
};
pub use mis_closed_form::{build_mis, mis_cross_validate, mis_spectrum, MisInstance, MisSpectrum};
pub use mixing_sst::{
    bd_sst, separation_distance, transition_semigroup, tv_mixing_time, SstDistribution,
};
pub use spectral::{relaxation_time, reversible_spectrum, spectral_gap, SpectrumResult};
pub use variance_ldp::{
    asymptotic_variance, rate_function_point_mass, rate_function_reversible,
    rate_function_variational, PoissonSolution, VariationalOptions,
};

pub use nalgebra;
