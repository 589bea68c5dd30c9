//! Atoms, weak-`L^p` quasinorms, summation lemmas, envelope measures and the
//! end-to-end weak-type experiment.

pub mod atoms;
pub mod envelopes;
pub mod experiment;
pub mod quasinorm;
pub mod summation;

pub use atoms::{make_atom, min_moment_order, Atom, AtomReport};
pub use envelopes::{
    default_order, envelope_measure, lemma43_exponents, lemma43_measure_check, Case, CountingConfig, Envelope,
    EnvelopeMeasure, Exponents, Family, Lemma43Report,
};
pub use experiment::{weak_type_experiment, WeakTypeConfig, WeakTypeReport, WeakTypeRow};
pub use quasinorm::{distribution_function, lambda_grid, weak_quasinorm, Magnitudes, Region, WeakLpReport};
pub use summation::{
    lemma42_check, stw_constant, stw_power_law_check, stw_sum_check, suite_centers, Lemma42Report, PowerLawSum,
    SumCheck,
};
