//! Warped-product metrics on fibrations in product charts.
//!
//! A chart `W × V` carries fiber coordinates `z_1..z_s` and base coordinates
//! `z_{s+1}..z_n`. The fiber family `{G_t}` is an `s × s` block that may
//! depend on every coordinate (the base ones act as the parameter `t`); the
//! base metric `ω_Y` depends on base coordinates only. The warped metric is
//!
//! ```text
//! Ψ_λ = blockdiag(G_t, (μ₀ + λ)·ω_Y)
//! ```
//!
//! so `μ₀` is kept explicit and `λ` is added on top of it.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature, restrict, MetricJet, PointGeometry};
use crate::dsl::{catalog, min_eigenvalue, parse, ChartBox, CoordDomain, Expr, MetricSpec, Substitution};
use crate::positivity::{self, find_negative_witness, scan_chart, ScanParams, Witness, NEGATIVE_THRESHOLD};
use crate::rng::{self, complex_normal};
use crate::{HscError, Result, C64};

/// Samples used when validating an assembled `Ψ_λ`.
pub const PSI_VALIDATION_SAMPLES: usize = 1000;
/// Sampled minimum a fiber or base metric must exceed to count as positive.
pub const POSITIVE_FLOOR: f64 = 1e-8;
/// Default upper end of the λ schedule.
pub const LAMBDA_MAX: f64 = (1u64 << 30) as f64;
/// Default lower end of the λ schedule.
pub const LAMBDA_MIN: f64 = 1.0 / 1024.0;
/// μ₀ schedule: powers of two between these exponents.
pub const MU0_EXPONENTS: (i32, i32) = (-20, 40);
/// Tolerance for the decreasing property on slices.
pub const SLICE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FibrationSpec {
    s: usize,
    m: usize,
    fiber_entries: Vec<Vec<Expr>>,
    base_entries: Vec<Vec<Expr>>,
    pub mu0: f64,
    domain: ChartBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibrationFile {
    pub s: usize,
    pub m: usize,
    pub fiber_entries: Vec<Vec<String>>,
    pub base_entries: Vec<Vec<String>>,
    pub mu0: f64,
    #[serde(rename = "box")]
    pub domain: Vec<CoordDomain>,
}

impl FibrationSpec {
    pub fn new(
        s: usize,
        m: usize,
        fiber_entries: Vec<Vec<Expr>>,
        base_entries: Vec<Vec<Expr>>,
        mu0: f64,
        domain: ChartBox,
    ) -> Result<Self> {
        let n = s + m;
        if s == 0 || m == 0 {
            return Err(HscError::InvalidArgument("fiber and base dimensions must be positive".into()));
        }
        if !(mu0 >= 0.0) {
            return Err(HscError::InvalidArgument(format!("mu0 must be nonnegative, got {mu0}")));
        }
        let shape_ok = |rows: &Vec<Vec<Expr>>, k: usize| rows.len() == k && rows.iter().all(|r| r.len() == k);
        if !shape_ok(&fiber_entries, s) {
            return Err(HscError::InvalidArgument(format!("fiber block must be {s}×{s}")));
        }
        if !shape_ok(&base_entries, m) {
            return Err(HscError::InvalidArgument(format!("base block must be {m}×{m}")));
        }
        for e in fiber_entries.iter().chain(&base_entries).flatten() {
            if e.arity() > n {
                return Err(HscError::VariableOutOfRange { index: e.arity(), dim: n });
            }
        }
        for e in base_entries.iter().flatten() {
            if let Some(k) = (0..s).find(|&k| e.uses_var(k)) {
                return Err(HscError::InvalidArgument(format!(
                    "base entry `{e}` depends on fiber coordinate z{}",
                    k + 1
                )));
            }
        }
        if domain.dim() != n {
            return Err(HscError::DimensionMismatch { expected: n, got: domain.dim() });
        }
        Ok(Self { s, m, fiber_entries, base_entries, mu0, domain })
    }

    pub fn from_file(file: &FibrationFile) -> Result<Self> {
        let n = file.s + file.m;
        let parse_rows = |rows: &Vec<Vec<String>>| -> Result<Vec<Vec<Expr>>> {
            rows.iter().map(|r| r.iter().map(|t| parse(t, n)).collect()).collect()
        };
        Self::new(
            file.s,
            file.m,
            parse_rows(&file.fiber_entries)?,
            parse_rows(&file.base_entries)?,
            file.mu0,
            ChartBox(file.domain.clone()),
        )
    }

    pub fn to_file(&self) -> FibrationFile {
        let show = |rows: &Vec<Vec<Expr>>| rows.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect();
        FibrationFile {
            s: self.s,
            m: self.m,
            fiber_entries: show(&self.fiber_entries),
            base_entries: show(&self.base_entries),
            mu0: self.mu0,
            domain: self.domain.0.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Fiber `e^{|z₂|²}/(1+|z₁|²)²` (a rescaled Fubini–Study family) over the
    /// base `1/(1+|z₂|²)`, on the bidisk of radius 0.95.
    pub fn warp_demo() -> Self {
        let fiber = parse("exp(z2*conj(z2))/(1+z1*conj(z1))^2", 2).expect("fixture parses");
        let base = parse(catalog::PAPER_BASE_Z2, 2).expect("fixture parses");
        Self::new(1, 1, vec![vec![fiber]], vec![vec![base]], 0.0, ChartBox::polydisk(2, 0.95))
            .expect("fixture is well formed")
    }

    /// The bidisk example whose fibers are only semi-positively curved.
    pub fn semipositive_example() -> Self {
        let fiber = parse(catalog::PAPER_FIBER, 2).expect("fixture parses");
        let base = parse(catalog::PAPER_BASE_Z2, 2).expect("fixture parses");
        Self::new(1, 1, vec![vec![fiber]], vec![vec![base]], 0.0, ChartBox::polydisk(2, 0.95))
            .expect("fixture is well formed")
    }

    pub fn fiber_dim(&self) -> usize {
        self.s
    }

    pub fn base_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.s + self.m
    }

    pub fn domain(&self) -> &ChartBox {
        &self.domain
    }

    pub fn with_mu0(mut self, mu0: f64) -> Self {
        self.mu0 = mu0;
        self
    }

    fn base_domain(&self) -> ChartBox {
        ChartBox(self.domain.0[self.s..].to_vec())
    }

    fn fiber_domain(&self) -> ChartBox {
        ChartBox(self.domain.0[..self.s].to_vec())
    }

    /// `ω_Y` in its own coordinates `z1..zm`.
    pub fn base_spec(&self) -> Result<MetricSpec> {
        let map: Vec<Substitution> = (0..self.dim())
            .map(|k| Substitution::Rename(k.saturating_sub(self.s)))
            .collect();
        let entries = self
            .base_entries
            .iter()
            .map(|r| r.iter().map(|e| e.substitute(&map)).collect())
            .collect();
        MetricSpec::new("base", entries, self.base_domain())
    }

    /// The fiber metric `G_t` over the base point `t`.
    pub fn fiber_at(&self, t: &[C64]) -> Result<MetricSpec> {
        if t.len() != self.m {
            return Err(HscError::DimensionMismatch { expected: self.m, got: t.len() });
        }
        let map: Vec<Substitution> = (0..self.dim())
            .map(|k| if k < self.s { Substitution::Rename(k) } else { Substitution::Value(t[k - self.s]) })
            .collect();
        let entries = self
            .fiber_entries
            .iter()
            .map(|r| r.iter().map(|e| e.substitute(&map)).collect())
            .collect();
        let label = t.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(",");
        MetricSpec::new(format!("fiber[t={label}]"), entries, self.fiber_domain())
    }

    fn assembled_entries(&self, base_factor: f64) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i < self.s && j < self.s {
                            self.fiber_entries[i][j].clone()
                        } else if i >= self.s && j >= self.s {
                            let e = self.base_entries[i - self.s][j - self.s].clone();
                            if e.is_zero() { e } else { e.scaled_by(Expr::real(base_factor)) }
                        } else {
                            Expr::real(0.0)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `Ψ_λ` without validation.
    pub fn psi_unchecked(&self, lambda: f64) -> Result<MetricSpec> {
        MetricSpec::new(
            format!("psi[lambda={lambda},mu0={}]", self.mu0),
            self.assembled_entries(self.mu0 + lambda),
            self.domain.clone(),
        )
    }

    /// `Ψ_λ = Φ + λ·π*(ω_Y)`, validated on [`PSI_VALIDATION_SAMPLES`] points.
    pub fn assemble_psi(&self, lambda: f64) -> Result<MetricSpec> {
        if !(lambda > 0.0) {
            return Err(HscError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let spec = self.psi_unchecked(lambda)?;
        spec.validate(PSI_VALIDATION_SAMPLES, 0)?;
        Ok(spec)
    }

    /// `Φ` at a point: `blockdiag(G_t, μ₀·ω_Y)`.
    pub fn phi_matrix(&self, point: &[C64]) -> Result<DMatrix<C64>> {
        self.psi_unchecked(0.0)?.matrix_at(point)
    }

    /// `ω_Y` at the base part of `point`.
    pub fn base_matrix(&self, point: &[C64]) -> Result<DMatrix<C64>> {
        self.base_spec()?.matrix_at(&point[self.s..])
    }
}

/// Smallest power of two `μ` making `Φ̃ + μ·π*(ω_Y)` positive definite on `samples` points.
pub fn mu0_search(f: &FibrationSpec, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(HscError::InvalidArgument("need at least one sample".into()));
    }
    f.base_spec()?
        .validate(samples, seed)
        .map_err(|e| HscError::Hypothesis(format!("base metric: {e}")))?;
    let mut rng = rng::stream(seed, 0x6d75_3030);
    let points: Vec<Vec<C64>> = (0..samples).map(|_| f.domain.sample(&mut rng)).collect();
    let tilde = f.clone().with_mu0(0.0);
    for k in MU0_EXPONENTS.0..=MU0_EXPONENTS.1 {
        let mu = 2f64.powi(k);
        let spec = tilde.psi_unchecked(mu)?;
        let mut ok = true;
        for p in &points {
            match spec.matrix_at(p) {
                Ok(m) if min_eigenvalue(&m) > crate::dsl::PD_TOL => {}
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(mu);
        }
    }
    Err(HscError::Exhausted(format!("no mu0 up to 2^{} makes the form positive definite", MU0_EXPONENTS.1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaStep {
    pub lambda: f64,
    pub min_hsc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearchResult {
    pub lambda_star: f64,
    pub min_hsc_at_star: f64,
    pub witness_point: Vec<C64>,
    pub witness_dir: Vec<C64>,
    /// Every evaluated λ, in evaluation order.
    pub history: Vec<LambdaStep>,
    pub base_min_hsc: f64,
    pub fiber_min_hsc: f64,
    pub seed: u64,
}

impl LambdaSearchResult {
    /// `lambda,min_hsc` rows sorted by λ.
    pub fn history_csv(&self) -> String {
        let mut rows = self.history.clone();
        rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let mut out = String::from("lambda,min_hsc\n");
        for r in rows {
            let _ = writeln!(out, "{:e},{:e}", r.lambda, r.min_hsc);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearchParams {
    pub scan: ScanParams,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Bisection stops once `hi / lo ≤ 1 + rel_tol`.
    pub rel_tol: f64,
    /// Fibers sampled for the hypothesis check (the first sits over the base centre).
    pub fibers: usize,
}

impl Default for LambdaSearchParams {
    fn default() -> Self {
        Self { scan: ScanParams::default(), lambda_min: LAMBDA_MIN, lambda_max: LAMBDA_MAX, rel_tol: 1e-2, fibers: 8 }
    }
}

/// Base points over which fibers are checked: the base centre, then uniform samples.
pub fn fiber_sample_points(f: &FibrationSpec, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let base = f.base_domain();
    let mut rng = rng::stream(seed, 0x6669_6272);
    let mut pts = Vec::with_capacity(count);
    if count > 0 {
        pts.push(base.center());
    }
    while pts.len() < count {
        pts.push(base.sample(&mut rng));
    }
    pts
}

fn min_scan(spec: &MetricSpec, params: &ScanParams) -> Result<positivity::ScanReport> {
    scan_chart(spec, spec.domain(), params)
}

/// Doubling-then-bisection for the smallest λ whose `Ψ_λ` has positive sampled HSC.
pub fn lambda_search(f: &FibrationSpec, params: &LambdaSearchParams) -> Result<LambdaSearchResult> {
    let base = min_scan(&f.base_spec()?, &params.scan)?;
    if !(base.min_hsc > POSITIVE_FLOOR) {
        return Err(HscError::Hypothesis(format!(
            "base metric: sampled HSC {:e} at {:?}",
            base.min_hsc, base.witness_point
        )));
    }
    let mut fiber_min = f64::INFINITY;
    for t in fiber_sample_points(f, params.fibers, params.scan.seed) {
        let r = min_scan(&f.fiber_at(&t)?, &params.scan)?;
        if !(r.min_hsc > POSITIVE_FLOOR) {
            return Err(HscError::Hypothesis(format!(
                "fiber over t={t:?}: sampled HSC {:e} at {:?}",
                r.min_hsc, r.witness_point
            )));
        }
        fiber_min = fiber_min.min(r.min_hsc);
    }

    let mut history = Vec::new();
    let mut eval = |lambda: f64| -> Result<positivity::ScanReport> {
        let r = min_scan(&f.assemble_psi(lambda)?, &params.scan)?;
        history.push(LambdaStep { lambda, min_hsc: r.min_hsc });
        Ok(r)
    };

    let mut lambda = params.lambda_min;
    let mut lo = None;
    let (mut hi, mut hi_report) = loop {
        let r = eval(lambda)?;
        if r.min_hsc > 0.0 {
            break (lambda, r);
        }
        lo = Some(lambda);
        lambda *= 2.0;
        if lambda > params.lambda_max {
            let trail = history
                .iter()
                .map(|s| format!("({:e}, {:e})", s.lambda, s.min_hsc))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(HscError::Exhausted(format!(
                "no positive sampled HSC up to lambda_max = {:e}; history: {trail}",
                params.lambda_max
            )));
        }
    };
    if let Some(mut lo) = lo {
        while hi / lo > 1.0 + params.rel_tol {
            let mid = 0.5 * (lo + hi);
            let r = eval(mid)?;
            if r.min_hsc > 0.0 {
                hi = mid;
                hi_report = r;
            } else {
                lo = mid;
            }
        }
    }
    Ok(LambdaSearchResult {
        lambda_star: hi,
        min_hsc_at_star: hi_report.min_hsc,
        witness_point: hi_report.witness_point,
        witness_dir: hi_report.witness_dir,
        history,
        base_min_hsc: base.min_hsc,
        fiber_min_hsc: fiber_min,
        seed: params.scan.seed,
    })
}

/// Sampled minimum HSC of `Ψ_λ` at each `lambda` (same point and direction sets).
pub fn min_hsc_profile(f: &FibrationSpec, lambdas: &[f64], scan: &ScanParams) -> Result<Vec<LambdaStep>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let r = min_scan(&f.assemble_psi(lambda)?, scan)?;
            Ok(LambdaStep { lambda, min_hsc: r.min_hsc })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Errors at or below this are treated as exact zeros.
const ZERO_FLOOR: f64 = 1e-13;
/// Allowed deviation of a fitted slope from its predicted order.
pub const SLOPE_TOL: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFamily {
    pub name: String,
    pub predicted_slope: f64,
    /// `None` when every error was an exact zero.
    pub fitted_slope: Option<f64>,
    pub errors: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub lambdas: Vec<f64>,
    pub families: Vec<DecayFamily>,
    pub passed: bool,
}

fn family(name: &str, predicted: f64, lambdas: &[f64], errors: Vec<f64>) -> DecayFamily {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        lambdas.iter().zip(&errors).filter(|(_, e)| **e > ZERO_FLOOR).map(|(l, e)| (*l, *e)).unzip();
    let (fitted, passed) = if xs.is_empty() {
        (None, true)
    } else if xs.len() < 2 {
        (None, false)
    } else {
        let s = loglog_slope(&xs, &ys);
        (Some(s), (s - predicted).abs() <= SLOPE_TOL)
    };
    DecayFamily { name: name.into(), predicted_slope: predicted, fitted_slope: fitted, errors, passed }
}

/// Decay orders of the inverse of `H(λ) = Φ + λ·blockdiag(0, I_m)`, where
/// `phi` is written in base coordinates orthonormal for `ω_Y`.
///
/// Predicted: `h^{ab} − (A⁻¹)_{ab} = O(1/λ)`, `λh^{χχ̄} − 1 = O(1/λ)`,
/// `h^{aη̄} = O(1/λ)` and `h^{χη̄} = O(1/λ²)` for `χ ≠ η`.
pub fn block_inverse_asymptotics(phi: &DMatrix<C64>, s: usize, lambdas: &[f64]) -> Result<AsymptoticsReport> {
    let n = phi.nrows();
    if s == 0 || s >= n {
        return Err(HscError::InvalidArgument(format!("fiber dimension {s} must lie in 1..{n}")));
    }
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| !(w[1] > w[0])) || lambdas[lambdas.len() - 1] < 1e4 {
        return Err(HscError::InvalidArgument("lambdas must increase and end at or above 1e4".into()));
    }
    let a = phi.view((0, 0), (s, s)).into_owned();
    let a_inv = a.try_inverse().ok_or(HscError::IllConditioned { condition: f64::INFINITY })?;
    let (mut fib, mut diag, mut mixed, mut off) = (vec![], vec![], vec![], vec![]);
    for &lambda in lambdas {
        let mut h = phi.clone();
        for k in s..n {
            h[(k, k)] += C64::new(lambda, 0.0);
        }
        let hinv = h.try_inverse().ok_or(HscError::IllConditioned { condition: f64::INFINITY })?;
        let mut e = [0.0f64; 4];
        for i in 0..n {
            for j in 0..n {
                let v = hinv[(i, j)];
                match (i < s, j < s) {
                    (true, true) => e[0] = e[0].max((v - a_inv[(i, j)]).norm()),
                    (false, false) if i == j => e[1] = e[1].max((v * lambda - 1.0).norm()),
                    (false, false) => e[3] = e[3].max(v.norm()),
                    _ => e[2] = e[2].max(v.norm()),
                }
            }
        }
        fib.push(e[0]);
        diag.push(e[1]);
        mixed.push(e[2]);
        off.push(e[3]);
    }
    let families = vec![
        family("fiber_block_minus_limit", -1.0, lambdas, fib),
        family("lambda_times_base_diagonal_minus_one", -1.0, lambdas, diag),
        family("mixed_block", -1.0, lambdas, mixed),
        family("base_off_diagonal", -2.0, lambdas, off),
    ];
    let passed = families.iter().all(|f| f.passed);
    Ok(AsymptoticsReport { lambdas: lambdas.to_vec(), families, passed })
}

/// [`block_inverse_asymptotics`] for `Φ` at `point`, after a constant change
/// of base coordinates making `ω_Y(point)` the identity.
pub fn block_inverse_asymptotics_check(f: &FibrationSpec, point: &[C64], lambdas: &[f64]) -> Result<AsymptoticsReport> {
    let (s, n) = (f.s, f.dim());
    let phi = f.phi_matrix(point)?;
    let base = f.base_matrix(point)?;
    let q = orthonormalizer(&base)?;
    let mut t = DMatrix::<C64>::identity(n, n);
    t.view_mut((s, s), (f.m, f.m)).copy_from(&q);
    let phi_ortho = t.adjoint() * phi * t;
    block_inverse_asymptotics(&phi_ortho, s, lambdas)
}

/// `Q = (L*)⁻¹` for `B = L L*`, so that `Q* B Q = I`.
pub fn orthonormalizer(b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let herm = (b + b.adjoint()).scale(0.5);
    let chol = herm.cholesky().ok_or(HscError::NotPositiveDefinite {
        name: "base".into(),
        point: vec![],
        min_eigenvalue: min_eigenvalue(b),
    })?;
    let k = b.nrows();
    chol.l()
        .adjoint()
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(HscError::IllConditioned { condition: f64::INFINITY })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantReport {
    pub trials: usize,
    /// Largest `|det H − det P·det(S − R P⁻¹ Q)| / |det H|`.
    pub worst_relative_error: f64,
    pub seed: u64,
}

/// `det [[P, Q], [R, S]] = det P · det(S − R P⁻¹ Q)` on random Hermitian
/// positive-definite matrices of size `n` with leading block size `s`.
pub fn block_determinant_identity(n: usize, s: usize, trials: usize, seed: u64) -> Result<DeterminantReport> {
    if s == 0 || s >= n {
        return Err(HscError::InvalidArgument(format!("need 0 < s < n, got s = {s}, n = {n}")));
    }
    let mut rng = rng::stream(seed, 0x6465_7400);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let entries = complex_normal(&mut rng, n * n);
        let x = DMatrix::from_vec(n, n, entries);
        let h = &x * x.adjoint() + DMatrix::<C64>::identity(n, n).scale(0.1);
        let p = h.view((0, 0), (s, s)).into_owned();
        let q = h.view((0, s), (s, n - s)).into_owned();
        let r = h.view((s, 0), (n - s, s)).into_owned();
        let sb = h.view((s, s), (n - s, n - s)).into_owned();
        let p_inv = p.clone().try_inverse().ok_or(HscError::IllConditioned { condition: f64::INFINITY })?;
        let schur = sb - r * p_inv * q;
        let full = h.determinant();
        let split = p.determinant() * schur.determinant();
        worst = worst.max((full - split).norm() / full.norm());
    }
    Ok(DeterminantReport { trials, worst_relative_error: worst, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecreasingReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `K(slice) − K(ambient)`; at most zero up to tolerance.
    pub worst_gap: f64,
    /// Largest `|K(slice) − K(ambient)|`.
    pub max_abs_gap: f64,
    pub witness: Option<(Vec<C64>, Vec<C64>)>,
    pub seed: u64,
}

/// Compare HSC on coordinate slices with the ambient HSC in the same direction.
///
/// `keep` lists the free coordinates (0-based). The complement is frozen at
/// `fixed` when given, otherwise at fresh random values for every trial.
pub fn submanifold_decreasing_check(
    spec: &MetricSpec,
    keep: &[usize],
    fixed: Option<&[C64]>,
    trials: usize,
    seed: u64,
) -> Result<DecreasingReport> {
    let n = spec.dim();
    if keep.is_empty() || keep.len() >= n || keep.iter().any(|&k| k >= n) {
        return Err(HscError::InvalidArgument("slice must be a proper nonempty coordinate subset".into()));
    }
    let complement: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    if let Some(v) = fixed {
        if v.len() != complement.len() {
            return Err(HscError::DimensionMismatch { expected: complement.len(), got: v.len() });
        }
    }
    let mut rng = rng::stream(seed, 0x736c_6963);
    let mut report = DecreasingReport {
        trials,
        violations: 0,
        worst_gap: f64::NEG_INFINITY,
        max_abs_gap: 0.0,
        witness: None,
        seed,
    };
    let fixed_slice = match fixed {
        Some(v) => Some(restrict(spec, &complement.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>())?),
        None => None,
    };
    for _ in 0..trials {
        let mut point = spec.domain().sample(&mut rng);
        if let Some(v) = fixed {
            for (k, z) in complement.iter().zip(v) {
                point[*k] = *z;
            }
        }
        let slice = match &fixed_slice {
            Some(s) => s.clone(),
            None => restrict(spec, &complement.iter().map(|&k| (k, point[k])).collect::<Vec<_>>())?,
        };
        let sub_point: Vec<C64> = keep.iter().map(|&k| point[k]).collect();
        let sub_dir = complex_normal(&mut rng, keep.len());
        let mut dir = vec![C64::new(0.0, 0.0); n];
        for (k, v) in keep.iter().zip(&sub_dir) {
            dir[*k] = *v;
        }
        let k_slice = PointGeometry::at(&slice, &sub_point)?.hsc(&sub_dir)?;
        let k_full = PointGeometry::at(spec, &point)?.hsc(&dir)?;
        let gap = k_slice - k_full;
        report.max_abs_gap = report.max_abs_gap.max(gap.abs());
        if gap > report.worst_gap {
            report.worst_gap = gap;
        }
        if gap > SLICE_TOL {
            report.violations += 1;
            if report.witness.is_none() {
                report.witness = Some((point, dir));
            }
        }
    }
    Ok(report)
}

/// Curvature numerator `Σ R_{αβ̄γδ̄} ξ_α ξ̄_β ξ_γ ξ̄_δ` of `Ψ_λ` at `point` for a
/// fixed base direction, at each λ, with the fitted log-log slope.
pub fn base_numerator_growth(
    f: &FibrationSpec,
    point: &[C64],
    base_dir: &[C64],
    lambdas: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if base_dir.len() != f.m {
        return Err(HscError::DimensionMismatch { expected: f.m, got: base_dir.len() });
    }
    let mut xi = vec![C64::new(0.0, 0.0); f.s];
    xi.extend_from_slice(base_dir);
    let nums = lambdas
        .iter()
        .map(|&lambda| {
            let mj = MetricJet::from_spec(&f.assemble_psi(lambda)?, point)?;
            Ok(curvature(&mj)?.quartic(&xi).re)
        })
        .collect::<Result<Vec<f64>>>()?;
    if nums.iter().any(|v| !(*v > 0.0)) {
        return Ok((nums, f64::NAN));
    }
    let slope = loglog_slope(lambdas, &nums);
    Ok((nums, slope))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberCheck {
    pub base_point: Vec<C64>,
    pub min_hsc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaWitness {
    pub lambda: f64,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1Report {
    pub base_min_hsc: f64,
    pub base_positive: bool,
    pub fibers: Vec<FiberCheck>,
    pub fibers_semipositive: bool,
    /// HSC of the fiber metric over `z₂ = 0` at `z₁ = 0`.
    pub fiber_origin_hsc: f64,
    pub witnesses: Vec<LambdaWitness>,
    pub all_negative: bool,
    pub passed: bool,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1Params {
    pub scan: ScanParams,
    pub fibers: usize,
    pub witness_budget: usize,
}

impl Default for Example1Params {
    fn default() -> Self {
        Self { scan: ScanParams::default(), fibers: 20, witness_budget: 512 }
    }
}

/// Positive base, semi-positive fibers, and yet negative HSC somewhere for
/// every tested warp factor.
pub fn example1_report(lambdas: &[f64], params: &Example1Params) -> Result<Example1Report> {
    if lambdas.is_empty() {
        return Err(HscError::InvalidArgument("need at least one lambda".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(HscError::InvalidArgument(format!("lambda must be positive, got {l}")));
    }
    let seed = params.scan.seed;
    let base = catalog::paper_base();
    let base_scan = scan_chart(&base, base.domain(), &params.scan)?;

    let fib = FibrationSpec::semipositive_example();
    let fibers = fiber_sample_points(&fib, params.fibers, seed)
        .into_iter()
        .map(|t| {
            let spec = restrict(&catalog::paper_fiber(), &[(1, t[0])])?;
            let r = scan_chart(&spec, spec.domain(), &params.scan)?;
            Ok(FiberCheck { base_point: t, min_hsc: r.min_hsc })
        })
        .collect::<Result<Vec<_>>>()?;
    let origin_fiber = restrict(&catalog::paper_fiber(), &[(1, C64::new(0.0, 0.0))])?;
    let fiber_origin_hsc = PointGeometry::at(&origin_fiber, &[C64::new(0.0, 0.0)])?.hsc(&[C64::new(1.0, 0.0)])?;

    let witnesses = lambdas
        .iter()
        .map(|&lambda| {
            let g = catalog::paper_g_const(lambda)?;
            let witness = find_negative_witness(&g, g.domain(), params.witness_budget, seed)?;
            Ok(LambdaWitness { lambda, witness })
        })
        .collect::<Result<Vec<_>>>()?;

    let base_positive = base_scan.min_hsc > 0.0;
    let fibers_semipositive =
        fibers.iter().all(|f| f.min_hsc >= NEGATIVE_THRESHOLD) && fiber_origin_hsc.abs() <= 1e-9;
    let all_negative = witnesses
        .iter()
        .all(|w| w.witness.as_ref().is_some_and(|w| w.value < NEGATIVE_THRESHOLD));
    Ok(Example1Report {
        base_min_hsc: base_scan.min_hsc,
        base_positive,
        fibers,
        fibers_semipositive,
        fiber_origin_hsc,
        witnesses,
        all_negative,
        passed: base_positive && fibers_semipositive && all_negative,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::positivity::DirectionSearch;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn m(rows: &[&[f64]]) -> DMatrix<C64> {
        DMatrix::from_fn(rows.len(), rows.len(), |i, j| c(rows[i][j], 0.0))
    }

    fn light_scan() -> ScanParams {
        ScanParams { grid_per_axis: 5, random_points: 16, search: DirectionSearch { dirs: 16, starts: 3, max_iters: 120 }, seed: 0 }
    }

    #[test]
    fn example_data_reassembles_paper_g() {
        for lambda in [1.0, 5.0, 0.5] {
            let psi = FibrationSpec::semipositive_example().assemble_psi(lambda).unwrap();
            let g = catalog::paper_g_const(lambda).unwrap();
            assert_eq!(psi.entries(), g.entries());
        }
    }

    #[test]
    fn flat_pieces_assemble_diagonally() {
        let f = FibrationSpec::new(
            2,
            1,
            vec![vec![Expr::real(1.0), Expr::real(0.0)], vec![Expr::real(0.0), Expr::real(1.0)]],
            vec![vec![Expr::real(1.0)]],
            0.0,
            ChartBox::polydisk(3, 0.5),
        )
        .unwrap();
        let psi = f.assemble_psi(3.0).unwrap();
        let mat = psi.matrix_at(&[c(0.1, 0.0), c(0.0, 0.2), c(0.3, 0.3)]).unwrap();
        assert_eq!(mat, m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 3.0]]));
        let psi = f.with_mu0(1.0).assemble_psi(3.0).unwrap();
        assert_eq!(psi.matrix_at(&[c(0.0, 0.0); 3]).unwrap()[(2, 2)], c(4.0, 0.0));
    }

    #[test]
    fn warp_demo_validates_at_ten() {
        let psi = FibrationSpec::warp_demo().assemble_psi(10.0).unwrap();
        assert!(psi.validate(1000, 5).is_ok());
    }

    #[test]
    fn base_entries_must_not_see_fiber_coordinates() {
        let r = FibrationSpec::new(
            1,
            1,
            vec![vec![Expr::real(1.0)]],
            vec![vec![parse("1+z1*conj(z1)", 2).unwrap()]],
            0.0,
            ChartBox::polydisk(2, 0.5),
        );
        assert!(r.is_err());
    }

    #[test]
    fn mu0_for_product_chart_is_schedule_minimum() {
        let mu = mu0_search(&FibrationSpec::warp_demo(), 200, 0).unwrap();
        assert_eq!(mu, 2f64.powi(MU0_EXPONENTS.0));
    }

    #[test]
    fn degenerate_fiber_block_has_no_mu0() {
        let domain = ChartBox(vec![
            CoordDomain::disk(0.5),
            CoordDomain::Rect { re: [-0.5, 0.5], im: [-0.5, 0.5] },
        ]);
        let f = FibrationSpec::new(
            1,
            1,
            vec![vec![parse("(z2+conj(z2))/2", 2).unwrap()]],
            vec![vec![Expr::real(1.0)]],
            0.0,
            domain,
        )
        .unwrap();
        assert!(matches!(mu0_search(&f, 100, 0), Err(HscError::Exhausted(_))));
    }

    #[test]
    fn two_by_two_inverse_limits() {
        // fiber [[2]], base [[1]]: h = [[2,0],[0,λ]]
        let phi = m(&[&[2.0, 0.0], &[0.0, 0.0]]);
        let lambdas = [1e2, 1e3, 1e4];
        let r = block_inverse_asymptotics(&phi, 1, &lambdas).unwrap();
        assert!(r.passed);
        assert!(r.families.iter().all(|f| f.fitted_slope.is_none()));

        // with a cross term: h = [[2,1],[1,λ]], h¹¹ = λ/(2λ−1), λh²² = 2λ/(2λ−1)
        let phi = m(&[&[2.0, 1.0], &[1.0, 0.0]]);
        let lambda = 1000.0;
        let mut h = phi.clone();
        h[(1, 1)] += c(lambda, 0.0);
        let inv = h.try_inverse().unwrap();
        assert!((inv[(0, 0)].re - lambda / (2.0 * lambda - 1.0)).abs() < 1e-12);
        assert!((inv[(0, 0)].re - 0.5).abs() < 1e-3);
        assert!((lambda * inv[(1, 1)].re - 1.0).abs() < 1e-3);
        let r = block_inverse_asymptotics(&phi, 1, &lambdas).unwrap();
        assert!(r.passed, "{r:?}");
        let fib = &r.families[0];
        assert!((fib.fitted_slope.unwrap() + 1.0).abs() < 0.05);
    }

    #[test]
    fn block_determinants_factor() {
        for (n, s) in [(2, 1), (4, 2), (5, 1)] {
            let r = block_determinant_identity(n, s, 200, 9).unwrap();
            assert!(r.worst_relative_error < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn block_diagonal_mixed_entries_vanish() {
        let f = FibrationSpec::warp_demo();
        let r = block_inverse_asymptotics_check(&f, &[c(0.3, 0.1), c(0.2, -0.4)], &[1e2, 1e3, 1e4, 1e5]).unwrap();
        assert!(r.passed);
        assert!(r.families[2].errors.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn asymptotics_reject_bad_lambda_lists() {
        let phi = m(&[&[2.0, 0.0], &[0.0, 0.0]]);
        assert!(block_inverse_asymptotics(&phi, 1, &[1e2, 1e3]).is_err());
        assert!(block_inverse_asymptotics(&phi, 1, &[1e4, 1e2, 1e5]).is_err());
        assert!(block_inverse_asymptotics(&phi, 2, &[1e2, 1e4]).is_err());
    }

    #[test]
    fn diagonal_metrics_are_totally_geodesic_on_coordinate_slices() {
        let g = catalog::paper_g_const(1.0).unwrap();
        let r = submanifold_decreasing_check(&g, &[1], Some(&[c(0.5, 0.0)]), 200, 0).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_abs_gap < 1e-10);
    }

    #[test]
    fn non_diagonal_metric_decreases_on_slices() {
        let spec = MetricSpec::parse(
            "twisted",
            &[
                vec!["2+z1*conj(z1)", "0.3*z1*conj(z2)"],
                vec!["0.3*z2*conj(z1)", "1+exp(z2*conj(z2))"],
            ],
            ChartBox::polydisk(2, 0.9),
        )
        .unwrap();
        spec.validate(200, 0).unwrap();
        for keep in [[0usize], [1]] {
            let r = submanifold_decreasing_check(&spec, &keep, None, 300, 1).unwrap();
            assert_eq!(r.violations, 0, "{r:?}");
            assert!(r.worst_gap < 0.0);
        }
    }

    #[test]
    fn slice_arguments_are_checked() {
        let g = catalog::paper_g_const(1.0).unwrap();
        assert!(submanifold_decreasing_check(&g, &[], None, 1, 0).is_err());
        assert!(submanifold_decreasing_check(&g, &[0, 1], None, 1, 0).is_err());
        assert!(submanifold_decreasing_check(&g, &[0], Some(&[]), 1, 0).is_err());
    }

    #[test]
    fn semipositive_fibers_violate_the_hypotheses() {
        let params = LambdaSearchParams { scan: light_scan(), fibers: 3, ..LambdaSearchParams::default() };
        match lambda_search(&FibrationSpec::semipositive_example(), &params) {
            Err(HscError::Hypothesis(msg)) => assert!(msg.starts_with("fiber")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn untwisted_product_of_positive_metrics() {
        let f = FibrationSpec::new(
            1,
            1,
            vec![vec![parse(catalog::FS_AFFINE, 2).unwrap()]],
            vec![vec![parse(catalog::PAPER_BASE_Z2, 2).unwrap()]],
            0.0,
            ChartBox::polydisk(2, 0.95),
        )
        .unwrap();
        let params = LambdaSearchParams { scan: light_scan(), fibers: 2, ..LambdaSearchParams::default() };
        let r = lambda_search(&f, &params).unwrap();
        assert!(r.min_hsc_at_star > 0.0);
        assert!(r.lambda_star.is_finite());
    }

    #[test]
    fn warp_demo_needs_a_large_enough_lambda() {
        let f = FibrationSpec::warp_demo();
        let params = LambdaSearchParams { scan: light_scan(), fibers: 2, ..LambdaSearchParams::default() };
        let r = lambda_search(&f, &params).unwrap();
        assert!(r.min_hsc_at_star > 0.0);
        let small = min_hsc_profile(&f, &[1e-3], &params.scan).unwrap();
        assert!(small[0].min_hsc < 0.0);
        let later = min_hsc_profile(&f, &[2.0 * r.lambda_star, 4.0 * r.lambda_star], &params.scan).unwrap();
        assert!(later.iter().all(|s| s.min_hsc > 0.0));
        assert!(r.history_csv().starts_with("lambda,min_hsc\n"));
    }

    #[test]
    fn fibration_json_round_trip() {
        let f = FibrationSpec::warp_demo();
        let text = serde_json::to_string(&f.to_file()).unwrap();
        assert!(text.contains("\"box\""));
        assert_eq!(FibrationSpec::from_json(&text).unwrap(), f);
    }
}
