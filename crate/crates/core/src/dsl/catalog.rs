//! Named metrics.
//!
//! | name | coords | `g` |
//! |------|--------|-----|
//! | `flat(n)` | n | identity |
//! | `poincare` | 1 | `(1 − |z|²)^-2` |
//! | `fs_affine` | 1 | `(1 + |z|²)^-2` |
//! | `paper_base` | 1 | `1/(1 + |z|²)` (the base metric written in its own coordinate) |
//! | `paper_fiber` | 2 | `diag(e^{2|z₂|²}/(1 + |z₁|⁴ e^{4|z₂|²}), 1)` |
//! | `paper_G(λ)` | 2 | `diag(fiber entry, λ/(1 + |z₂|²))` |
//! | `warp_demo` | 2 | the warp fixture assembled at λ = 1 |
//!
//! Every catalog metric lives on the polydisk of radius 0.95.

use super::expr::Expr;
use super::parse::parse;
use super::spec::{ChartBox, MetricSpec, DEFAULT_RADIUS};
use crate::{HscError, Result};

pub const POINCARE: &str = "(1-z1*conj(z1))^-2";
pub const FS_AFFINE: &str = "(1+z1*conj(z1))^-2";
pub const PAPER_BASE: &str = "1/(1+z1*conj(z1))";
/// The base metric pulled back to the second coordinate of the bidisk.
pub const PAPER_BASE_Z2: &str = "1/(1+z2*conj(z2))";
pub const PAPER_FIBER: &str = "exp(2*z2*conj(z2))/(1+(z1*conj(z1))^2*exp(4*z2*conj(z2)))";

fn parsed(src: &str, n: usize) -> Expr {
    parse(src, n).expect("catalog expressions are well formed")
}

fn one_dim(name: &str, src: &str) -> MetricSpec {
    MetricSpec::new(name, vec![vec![parsed(src, 1)]], ChartBox::polydisk(1, DEFAULT_RADIUS))
        .expect("catalog metric is well formed")
}

pub fn flat(n: usize) -> Result<MetricSpec> {
    if n == 0 {
        return Err(HscError::InvalidArgument("flat(0) has no coordinates".into()));
    }
    let entries = (0..n)
        .map(|i| (0..n).map(|j| Expr::real(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    MetricSpec::new(format!("flat({n})"), entries, ChartBox::polydisk(n, DEFAULT_RADIUS))
}

pub fn poincare() -> MetricSpec {
    one_dim("poincare", POINCARE)
}

pub fn fs_affine() -> MetricSpec {
    one_dim("fs_affine", FS_AFFINE)
}

pub fn paper_base() -> MetricSpec {
    one_dim("paper_base", PAPER_BASE)
}

pub fn paper_fiber() -> MetricSpec {
    let entries = vec![
        vec![parsed(PAPER_FIBER, 2), Expr::real(0.0)],
        vec![Expr::real(0.0), Expr::real(1.0)],
    ];
    MetricSpec::new("paper_fiber", entries, ChartBox::polydisk(2, DEFAULT_RADIUS))
        .expect("catalog metric is well formed")
}

/// `Φ + λ·π*(ω_Y)` on the bidisk; `lambda` may depend on `z2`.
pub fn paper_g(lambda: Expr) -> Result<MetricSpec> {
    if lambda.uses_var(0) {
        return Err(HscError::InvalidArgument("the warp factor may depend on z2 only".into()));
    }
    if let Some(c) = lambda.as_const() {
        if !(c.im == 0.0 && c.re > 0.0) {
            return Err(HscError::InvalidArgument(format!("warp factor must be positive, got {c}")));
        }
    }
    let name = format!("paper_G({lambda})");
    let entries = vec![
        vec![parsed(PAPER_FIBER, 2), Expr::real(0.0)],
        vec![Expr::real(0.0), parsed(PAPER_BASE_Z2, 2).scaled_by(lambda)],
    ];
    MetricSpec::new(name, entries, ChartBox::polydisk(2, DEFAULT_RADIUS))
}

pub fn paper_g_const(lambda: f64) -> Result<MetricSpec> {
    paper_g(Expr::real(lambda))
}

pub fn warp_demo() -> MetricSpec {
    let mut spec = crate::warp::FibrationSpec::warp_demo()
        .assemble_psi(1.0)
        .expect("warp fixture assembles");
    spec.name = "warp_demo".into();
    spec
}

/// The one-dimensional catalog members.
pub fn one_dimensional() -> Vec<MetricSpec> {
    vec![flat(1).expect("n = 1"), poincare(), fs_affine(), paper_base()]
}

/// Every fixed catalog member (with `flat(2)` and `paper_G(1)` as representatives).
pub fn all() -> Vec<MetricSpec> {
    let mut v = one_dimensional();
    v.push(flat(2).expect("n = 2"));
    v.push(paper_fiber());
    v.push(paper_g_const(1.0).expect("λ = 1"));
    v.push(warp_demo());
    v
}

/// Look up a metric by name: `flat(3)`, `poincare`, `paper_G(5)`, `paper_G(1+z2*conj(z2))`, …
pub fn lookup(name: &str) -> Result<MetricSpec> {
    let name = name.trim();
    let (head, arg) = match name.find('(') {
        Some(open) if name.ends_with(')') => (&name[..open], Some(&name[open + 1..name.len() - 1])),
        _ => (name, None),
    };
    match (head, arg) {
        ("flat", None) => flat(2),
        ("flat", Some(a)) => {
            let n: usize = a.trim().parse().map_err(|_| HscError::UnknownCatalog(name.into()))?;
            flat(n)
        }
        ("poincare", None) => Ok(poincare()),
        ("fs_affine", None) => Ok(fs_affine()),
        ("paper_base", None) => Ok(paper_base()),
        ("paper_fiber", None) => Ok(paper_fiber()),
        ("paper_G", None) => paper_g_const(1.0),
        ("paper_G", Some(a)) => paper_g(parse(a, 2)?),
        ("warp_demo", None) => Ok(warp_demo()),
        _ => Err(HscError::UnknownCatalog(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_g_base_entry_reads_as_displayed() {
        let g = paper_g_const(1.0).unwrap();
        assert_eq!(g.entry(1, 1).to_string(), "1/(1+z2*conj(z2))");
        let g5 = lookup("paper_G(5)").unwrap();
        assert_eq!(g5.entry(1, 1).to_string(), "5/(1+z2*conj(z2))");
        let gv = lookup("paper_G(1+z2*conj(z2))").unwrap();
        assert_eq!(gv.entry(1, 1).to_string(), "(1+z2*conj(z2))/(1+z2*conj(z2))");
    }

    #[test]
    fn flat_three_is_identity() {
        let f = lookup("flat(3)").unwrap();
        assert_eq!(f.dim(), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.entry(i, j), &Expr::real(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn fiber_entry_reads_as_displayed() {
        let f = paper_fiber();
        assert_eq!(
            f.entry(0, 0).to_string(),
            "exp(2*z2*conj(z2))/(1+(z1*conj(z1))^2*exp(4*z2*conj(z2)))"
        );
    }

    #[test]
    fn unknown_names_and_bad_factors() {
        assert!(matches!(lookup("hyperbolic"), Err(HscError::UnknownCatalog(_))));
        assert!(matches!(lookup("flat(x)"), Err(HscError::UnknownCatalog(_))));
        assert!(paper_g_const(-1.0).is_err());
        assert!(lookup("paper_G(z1)").is_err());
    }

    #[test]
    fn catalog_validates() {
        for spec in all() {
            spec.validate(1000, 0).unwrap_or_else(|e| panic!("{}: {e}", spec.name));
        }
        let g = paper_g_const(1.0).unwrap();
        let r = g.validate(1000, 0).unwrap();
        assert!(r.min_eigenvalue > 0.0);
    }
}
