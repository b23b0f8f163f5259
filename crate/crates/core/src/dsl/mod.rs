//! Metric description language: expressions, metric specs, and the catalog.

pub mod catalog;
mod expr;
mod parse;
mod spec;

pub use expr::{Expr, Substitution};
pub use parse::parse;
pub use spec::{
    hermitian_defect, min_eigenvalue, ChartBox, CoordDomain, MetricFile, MetricSpec, ValidationReport,
    DEFAULT_RADIUS, HERMITIAN_TOL, PD_TOL,
};
