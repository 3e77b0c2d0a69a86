//! Independent numerical reference for the closed-form NLI estimator.
//!
//! Nothing here calls the library's island, span or engine code; only its
//! domain types are shared. Islands are clipped polygons, integrals are
//! adaptive Gauss–Kronrod quadrature, the special function is its raw power
//! series, and the printed flat-loss formulas are written out term by term.

pub mod closed_forms;
pub mod dilog;
pub mod gn;
pub mod physics;
pub mod polygon;
pub mod quadrature;

pub use dilog::dilog_series;
pub use gn::{gn_quadrature_square, gn_quadrature_true_island, gn_total, Domain, OracleTotal};
pub use polygon::{island_polygon_exact, IslandPolygon};
pub use quadrature::{Estimate, Tolerance};
