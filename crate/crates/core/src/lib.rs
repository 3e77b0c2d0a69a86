//! Closed-form incoherent GN-model estimate of nonlinear interference in
//! multi-span links with arbitrary channel combs, frequency-dependent loss
//! and lumped inter-channel stimulated Raman scattering.

pub mod config;
pub mod engine;
pub mod error;
pub mod island;
pub mod model;
pub mod span;
pub mod special;
pub mod sum;

pub use config::{ingest_link_config, LinkConfig};
pub use engine::{
    analyze_all, g_nli_generic, g_nli_total, osnr_nl, rho_cut, rho_mch, CorrectionCoefficients, EngineSwitches, LossMode,
    RhoMode,
};
pub use error::{NliError, Result};
pub use island::{classify_triple, island_descriptor, IslandSquare, TripleClass};
pub use model::{Channel, EdfaGain, Link, ModulationFormat, NliReport, NliRow, Profile, Span};
pub use span::{G0Convention, LorentzianCoefficients};
pub use special::{f_int, f_int_asinh, harmonic_number, rect_kernel_integral, rect_lorentzian_integral, sine_integral, FintMode};
pub use sum::CompensatedSum;
