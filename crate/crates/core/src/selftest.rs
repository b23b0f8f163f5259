//! Acceptance suite.
//!
//! Each check returns a [`CheckOutcome`]; [`run_all`] collects them into a
//! report that depends only on the seed, so two runs serialize identically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature, gaussian_curvature_1d, MetricJet, PointGeometry};
use crate::dsl::{catalog, ChartBox, Expr, MetricSpec};
use crate::lemmas::{self, lemma1_constants};
use crate::positivity::{scan_chart, DirectionSearch, ScanParams};
use crate::rng::{self, complex_normal, disk_point, StreamRng};
use crate::warp::{self, Example1Params, FibrationSpec, LambdaSearchParams};
use crate::wirtinger::{fd_jet_extrapolated, Jet2, FD_STEP, SINGULAR_EPS};
use crate::{Result, C64, VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub criterion: String,
    pub check: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    /// Set when the expected value itself is known to be wrong; the check is
    /// still reported as failed but does not count against the suite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erratum: Option<String>,
}

impl CheckOutcome {
    fn new(criterion: &str, check: &str, passed: bool, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            criterion: criterion.into(),
            check: check.into(),
            passed,
            measured,
            tolerance,
            detail,
            erratum: None,
        }
    }

    fn errored(criterion: &str, check: &str, err: impl std::fmt::Display) -> Self {
        Self::new(criterion, check, false, f64::NAN, f64::NAN, format!("error: {err}"))
    }

    /// One line: `PASS|FAIL|ERRATUM criterion/check measured=… tol=… detail`.
    pub fn line(&self) -> String {
        let tag = match (self.passed, &self.erratum) {
            (true, _) => "PASS",
            (false, None) => "FAIL",
            (false, Some(_)) => "FAIL (erratum)",
        };
        format!(
            "{tag} {}/{} measured={:e} tol={:e} {}",
            self.criterion, self.check, self.measured, self.tolerance, self.detail
        )
    }

    /// Passed, or failed only because of a recorded erratum.
    pub fn counts_as_passed(&self) -> bool {
        self.passed || self.erratum.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub schema: u32,
    pub version: String,
    pub seed: u64,
    pub outcomes: Vec<CheckOutcome>,
    pub failures: usize,
    pub errata: usize,
    pub passed: bool,
}

impl SelftestReport {
    pub fn lines(&self) -> Vec<String> {
        self.outcomes.iter().map(CheckOutcome::line).collect()
    }
}

fn outcome_of(criterion: &str, check: &str, r: Result<CheckOutcome>) -> CheckOutcome {
    r.unwrap_or_else(|e| CheckOutcome::errored(criterion, check, e))
}

fn suite_scan(seed: u64) -> ScanParams {
    ScanParams {
        grid_per_axis: 5,
        random_points: 24,
        search: DirectionSearch { dirs: 16, starts: 3, max_iters: 80 },
        seed,
    }
}

fn random_points(rng: &mut StreamRng, n: usize, radius: f64) -> Vec<C64> {
    (0..n).map(|_| disk_point(rng, radius)).collect()
}

fn unit_dir(rng: &mut StreamRng, n: usize) -> Vec<C64> {
    let v = complex_normal(rng, n);
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

/// HSC of the constant-curvature fixtures at 100 random points and directions.
pub fn constant_curvature(seed: u64) -> Vec<CheckOutcome> {
    let crit = "constant_curvature";
    [(catalog::poincare(), -4.0), (catalog::fs_affine(), 4.0)]
        .into_iter()
        .map(|(spec, expected)| {
            let check = spec.name.clone();
            outcome_of(crit, &check, (|| {
                let mut rng = rng::stream(seed, 0x0101);
                let mut worst: f64 = 0.0;
                for _ in 0..100 {
                    let p = spec.domain().sample(&mut rng);
                    let xi = unit_dir(&mut rng, 1);
                    worst = worst.max((PointGeometry::at(&spec, &p)?.hsc(&xi)? - expected).abs());
                }
                Ok(CheckOutcome::new(crit, &check, worst <= 1e-8, worst, 1e-8, format!("expected {expected}")))
            })())
        })
        .collect()
}

/// The base metric `1/(1+|z|²)` has HSC `2/(1+|z|²)` and is positive on the chart.
pub fn base_metric(seed: u64) -> Vec<CheckOutcome> {
    let crit = "base_metric";
    let spec = catalog::paper_base();
    let closed = outcome_of(crit, "closed_form", (|| {
        let mut rng = rng::stream(seed, 0x0201);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = spec.domain().sample(&mut rng);
            let k = PointGeometry::at(&spec, &p)?.hsc(&[C64::new(1.0, 0.0)])?;
            worst = worst.max((k - 2.0 / (1.0 + p[0].norm_sqr())).abs());
        }
        Ok(CheckOutcome::new(crit, "closed_form", worst <= 1e-8, worst, 1e-8, "K = 2/(1+|z|^2)".into()))
    })());
    let positive = outcome_of(crit, "positive_on_chart", (|| {
        let r = scan_chart(&spec, spec.domain(), &ScanParams { seed, ..ScanParams::default() })?;
        Ok(CheckOutcome::new(
            crit,
            "positive_on_chart",
            r.min_hsc > 0.0,
            r.min_hsc,
            0.0,
            format!("{} points", r.points_scanned),
        ))
    })());
    vec![closed, positive]
}

/// Negative witnesses for the warped example, with semi-positive fibers and a positive base.
pub fn example1(seed: u64) -> Vec<CheckOutcome> {
    let crit = "example1";
    let params = Example1Params { scan: ScanParams { seed, ..suite_scan(seed) }, fibers: 20, witness_budget: 512 };
    match warp::example1_report(&[0.5, 1.0, 5.0, 50.0], &params) {
        Err(e) => vec![CheckOutcome::errored(crit, "report", e)],
        Ok(r) => {
            let mut out = vec![
                CheckOutcome::new(crit, "base_positive", r.base_positive, r.base_min_hsc, 0.0, "sampled min".into()),
                CheckOutcome::new(
                    crit,
                    "fibers_semipositive",
                    r.fibers.iter().all(|f| f.min_hsc >= -1e-8),
                    r.fibers.iter().map(|f| f.min_hsc).fold(f64::INFINITY, f64::min),
                    -1e-8,
                    format!("{} fibers", r.fibers.len()),
                ),
                CheckOutcome::new(
                    crit,
                    "fiber_origin_zero",
                    r.fiber_origin_hsc.abs() <= 1e-9,
                    r.fiber_origin_hsc,
                    1e-9,
                    "fiber over z2=0 at z1=0".into(),
                ),
            ];
            for w in &r.witnesses {
                let value = w.witness.as_ref().map_or(f64::NAN, |w| w.value);
                let detail = match &w.witness {
                    Some(w) => format!("point {:?}", w.point),
                    None => "no witness within budget".into(),
                };
                out.push(CheckOutcome::new(
                    crit,
                    &format!("negative_witness_lambda_{}", w.lambda),
                    value < -1e-8,
                    value,
                    -1e-8,
                    detail,
                ));
            }
            out
        }
    }
}

/// Random expression over `n` variables, of depth at most `depth`.
pub fn random_expr(rng: &mut StreamRng, n: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random::<f64>() < 0.2 {
        let roll = rng.random::<f64>();
        return if roll < 0.4 {
            Expr::var(rng.random_range(0..n))
        } else if roll < 0.65 {
            Expr::conj(Expr::var(rng.random_range(0..n)))
        } else {
            Expr::Const(C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
        };
    }
    let sub = |rng: &mut StreamRng| random_expr(rng, n, depth - 1);
    match rng.random_range(0..9) {
        0 | 1 => Expr::add(sub(rng), sub(rng)),
        2 => Expr::sub(sub(rng), sub(rng)),
        3 | 4 => Expr::mul(sub(rng), sub(rng)),
        5 => Expr::div(sub(rng), sub(rng)),
        6 => Expr::exp(sub(rng)),
        7 => Expr::conj(sub(rng)),
        _ => Expr::pow(sub(rng), rng.random_range(-2..=3)),
    }
}

/// Denominators (and bases of negative powers) below this modulus are resampled.
pub const POLE_MARGIN: f64 = 0.3;
/// FD comparison tolerance, relative to `max(1, largest jet component)`.
pub const FD_REL_TOL: f64 = 1e-6;

fn jet_components(j: &Jet2) -> Vec<C64> {
    let mut v = vec![j.value()];
    v.extend_from_slice(j.d());
    v.extend_from_slice(j.dbar());
    v.extend_from_slice(j.ddbar_slice());
    v
}

/// Relative disagreement between AD and FD jets of `e` at `p`.
pub fn jet_disagreement(e: &Expr, p: &[C64]) -> Result<f64> {
    let ad = e.eval_jet(p, SINGULAR_EPS)?;
    let fd = fd_jet_extrapolated(|q| e.eval(q, SINGULAR_EPS).unwrap_or(C64::new(f64::NAN, f64::NAN)), p, FD_STEP);
    let (a, f) = (jet_components(&ad), jet_components(&fd));
    let scale = a.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let err = a.iter().zip(&f).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(err / scale)
}

/// Jets from the arithmetic rules against central differences.
pub fn ad_vs_fd(seed: u64) -> Vec<CheckOutcome> {
    let crit = "ad_vs_fd";
    let exprs = outcome_of(crit, "random_expressions", (|| {
        let mut rng = rng::stream(seed, 0x0401);
        let (mut worst, mut tested, mut resampled) = (0.0f64, 0usize, 0usize);
        let mut worst_expr = String::new();
        while tested < 1000 {
            let e = random_expr(&mut rng, 2, 4);
            let mut point = None;
            for _ in 0..20 {
                let p = random_points(&mut rng, 2, 0.8);
                match e.eval(&p, POLE_MARGIN) {
                    Ok(v) if v.norm() < 1e6 => {
                        point = Some(p);
                        break;
                    }
                    _ => resampled += 1,
                }
            }
            let Some(p) = point else { continue };
            let d = jet_disagreement(&e, &p)?;
            if !(d <= worst) {
                worst = d;
                worst_expr = e.to_string();
            }
            tested += 1;
        }
        Ok(CheckOutcome::new(
            crit,
            "random_expressions",
            worst <= FD_REL_TOL,
            worst,
            FD_REL_TOL,
            format!("{tested} expressions, {resampled} near-pole points resampled; worst `{worst_expr}`"),
        ))
    })());
    let tensors = outcome_of(crit, "catalog_tensors", (|| {
        let mut rng = rng::stream(seed, 0x0402);
        let mut worst: f64 = 0.0;
        for spec in catalog::all() {
            for _ in 0..10 {
                let p = spec.domain().sample(&mut rng);
                let ad = curvature(&MetricJet::from_spec(&spec, &p)?)?;
                let fd = curvature(&MetricJet::from_fd_extrapolated(&spec, &p, FD_STEP)?)?;
                let scale = ad.components().iter().map(|c| c.norm()).fold(1.0, f64::max);
                let err = ad
                    .components()
                    .iter()
                    .zip(fd.components())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                worst = worst.max(err / scale);
            }
        }
        Ok(CheckOutcome::new(
            crit,
            "catalog_tensors",
            worst <= FD_REL_TOL,
            worst,
            FD_REL_TOL,
            format!("{} metrics x 10 points", catalog::all().len()),
        ))
    })());
    vec![exprs, tensors]
}

/// Gaussian curvature equals HSC for one-dimensional metrics.
pub fn gaussian_equals_hsc(seed: u64) -> Vec<CheckOutcome> {
    let crit = "gaussian_equals_hsc";
    vec![outcome_of(crit, "one_dimensional_catalog", (|| {
        let mut rng = rng::stream(seed, 0x0501);
        let mut worst: f64 = 0.0;
        for spec in catalog::one_dimensional() {
            for _ in 0..100 {
                let p = spec.domain().sample(&mut rng);
                let k = PointGeometry::at(&spec, &p)?.hsc(&[C64::new(1.0, 0.0)])?;
                worst = worst.max((gaussian_curvature_1d(&spec, &p)? - k).abs());
            }
        }
        Ok(CheckOutcome::new(crit, "one_dimensional_catalog", worst <= 1e-9, worst, 1e-9, "4 metrics x 100 points".into()))
    })())]
}

/// Product inequalities, constants, and the splitting bound.
pub fn lemma1(seed: u64) -> Vec<CheckOutcome> {
    let crit = "lemma1";
    let ineq = outcome_of(crit, "product_inequalities", (|| {
        let mut rng = rng::stream(seed, 0x0601);
        let (mut violations, mut worst) = (0usize, f64::INFINITY);
        for tuple in 0..100u64 {
            let w: Vec<f64> = (0..4).map(|_| 10f64.powf(rng.random_range(-1.5..1.5))).collect();
            let r = lemmas::prod_ineq_check(w[0], w[1], w[2], w[3], 1000, seed.wrapping_add(tuple))?;
            violations += r.violations;
            worst = worst.min(r.worst_slack.iter().copied().fold(f64::INFINITY, f64::min));
        }
        Ok(CheckOutcome::new(
            crit,
            "product_inequalities",
            violations == 0,
            violations as f64,
            0.0,
            format!("100 weight tuples x 1000 trials; worst relative slack {worst:e}"),
        ))
    })());

    let constants = outcome_of(crit, "constants_invariants", (|| {
        let mut rng = rng::stream(seed, 0x0602);
        let mut worst: f64 = 0.0;
        let cases = [(8.0, 1.0, 2, 1), (8.0, 1.0, 3, 1), (1.0, 3.0, 5, 2), (0.2, 0.7, 4, 3)];
        for (k0, k1, n, s) in cases {
            let c = lemma1_constants(k0, k1, n, s)?;
            let sum: f64 = c.constraint_terms().iter().sum();
            worst = worst.max((sum - 0.5 * k0 / k1).abs() / (0.5 * k0 / k1));
            worst = worst.max((c.kcal - c.kcal_formula()).abs() / c.kcal);
            worst = worst.max((c.K2_required - c.kcal * k1).abs() / c.K2_required);
            for _ in 0..20 {
                let t = 10f64.powf(rng.random_range(-3.0..3.0));
                let scaled = lemma1_constants(t * k0, t * k1, n, s)?;
                worst = worst.max((scaled.kcal - c.kcal).abs() / c.kcal);
            }
        }
        Ok(CheckOutcome::new(
            crit,
            "constants_invariants",
            worst <= 1e-14,
            worst,
            1e-14,
            "constraint sum, Kcal formula, K2_required, scale invariance (20 t per case)".into(),
        ))
    })());

    let kcal = outcome_of(crit, "kcal_8_1_2_1", (|| {
        let c = lemma1_constants(8.0, 1.0, 2, 1)?;
        Ok(CheckOutcome::new(crit, "kcal_8_1_2_1", (c.kcal - 312.0).abs() <= 1e-9, c.kcal, 1e-9, "expected 312".into()))
    })());

    let bound = outcome_of(crit, "bound_at_required_k2", (|| {
        let mut rng = rng::stream(seed, 0x0603);
        let (mut violations, mut worst) = (0usize, f64::INFINITY);
        let shapes = [(2usize, 1usize), (3, 1), (3, 2), (4, 2)];
        for t in 0..100u64 {
            let (n, s) = shapes[t as usize % shapes.len()];
            let k0 = 10f64.powf(rng.random_range(-1.0..1.0));
            let k1 = 10f64.powf(rng.random_range(-1.0..1.0));
            let c = lemma1_constants(k0, k1, n, s)?;
            let tensor = lemmas::random_hypothesis_tensor(k0, k1, c.K2_required, n, s, seed.wrapping_add(t), 1.0)?;
            let r = lemmas::lemma1_bound_check(&tensor, &c, 10_000, seed.wrapping_add(t))?;
            violations += r.violations;
            worst = worst.min(r.worst_slack);
        }
        Ok(CheckOutcome::new(
            crit,
            "bound_at_required_k2",
            violations == 0,
            violations as f64,
            0.0,
            format!("100 tensors x 10^4 directions; worst slack {worst:e}"),
        ))
    })());
    vec![ineq, constants, kcal, bound]
}

/// Closed-form `K(g + λh)`, thresholds and decay.
pub fn lemma2(seed: u64) -> Vec<CheckOutcome> {
    let crit = "lemma2";
    let origin = [C64::new(0.0, 0.0)];
    let formula = outcome_of(crit, "formula_vs_direct", (|| {
        let specs = catalog::one_dimensional();
        let mut rng = rng::stream(seed, 0x0701);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let g = &specs[rng.random_range(0..specs.len())];
            let h = specs[rng.random_range(0..specs.len())].scaled(rng.random_range(0.5..2.0));
            for _ in 0..5 {
                let p = g.domain().sample(&mut rng);
                for lambda in [0.1, 1.0, 10.0, 100.0] {
                    let a = lemmas::lemma2_at(g, &h, &p, lambda)?;
                    let b = lemmas::lemma2_direct(g, &h, &p, lambda)?;
                    worst = worst.max((a - b).abs());
                }
            }
        }
        Ok(CheckOutcome::new(crit, "formula_vs_direct", worst <= 1e-9, worst, 1e-9, "50 pairs x 5 points x 4 lambdas".into()))
    })());

    let threshold = lemmas::lemma2_threshold(&catalog::poincare(), &catalog::fs_affine(), &origin, 1e6);
    let stated = match &threshold {
        Ok(t) => {
            let target = 2f64.sqrt() - 1.0;
            let err = (t.lambda_t - target).abs();
            let mut o = CheckOutcome::new(
                crit,
                "threshold_stated_sqrt2_minus_1",
                err <= 1e-6,
                t.lambda_t,
                1e-6,
                format!("expected {target}"),
            );
            if !o.passed {
                o.erratum = Some(
                    "the expected value drops the sign of h_zz̄: with g_zz̄ = 2, h_zz̄ = −2 the cross term \
                     −h·g_zz̄ − g·h_zz̄ is 0, the numerator is 4λ² − 4 and the root is 1"
                        .into(),
                );
            }
            o
        }
        Err(e) => CheckOutcome::errored(crit, "threshold_stated_sqrt2_minus_1", e),
    };
    let oracle = match &threshold {
        Ok(t) => {
            // direct curvature of (1−r)^-2 + λ(1+r)^-2 at 0 is 4(λ−1)/(1+λ)²
            let err = (t.lambda_t - 1.0).abs();
            let direct_below = lemmas::lemma2_direct(&catalog::poincare(), &catalog::fs_affine(), &origin, 1.0 - 1e-6)
                .map_or(f64::NAN, |k| k);
            CheckOutcome::new(
                crit,
                "threshold_direct_root",
                err <= 1e-6 && direct_below < 0.0 && t.persistence.iter().all(|(_, k)| *k > 0.0),
                t.lambda_t,
                1e-6,
                format!("expected 1; direct K at 1-1e-6 is {direct_below:e}; persistence on 10 lambdas"),
            )
        }
        Err(e) => CheckOutcome::errored(crit, "threshold_direct_root", e),
    };

    let decay = outcome_of(crit, "decay_lambda_1e4", (|| {
        let lambdas = [1e2, 1e3, 1e4];
        let fs = catalog::fs_affine();
        let a = lemmas::decay_check(&catalog::poincare(), &fs, &origin, &lambdas)?;
        let b = lemmas::decay_check(&catalog::flat(1)?, &fs, &origin, &lambdas)?;
        let c = lemmas::decay_check(&catalog::flat(1)?, &fs.scaled(2.0), &origin, &lambdas)?;
        let worst = a.relative_error.max(b.relative_error).max(c.relative_error);
        Ok(CheckOutcome::new(
            crit,
            "decay_lambda_1e4",
            a.passed && b.passed && c.passed && (c.limit - 2.0).abs() < 1e-12,
            worst,
            0.01,
            format!("slopes {:.3}, {:.3}, {:.3}", a.slope, b.slope, c.slope),
        ))
    })());
    vec![formula, stated, oracle, decay]
}

/// Block determinants, inverse asymptotics, slices, and the λ search.
pub fn warp_skeleton(seed: u64) -> Vec<CheckOutcome> {
    let crit = "warp_skeleton";
    let det = outcome_of(crit, "block_determinant", (|| {
        let mut worst: f64 = 0.0;
        for (q, (n, s)) in [(2usize, 1usize), (3, 1), (4, 2), (5, 3)].into_iter().enumerate() {
            let r = warp::block_determinant_identity(n, s, 250, seed.wrapping_add(q as u64))?;
            worst = worst.max(r.worst_relative_error);
        }
        Ok(CheckOutcome::new(crit, "block_determinant", worst <= 1e-9, worst, 1e-9, "1000 random matrices".into()))
    })());

    let asym = outcome_of(crit, "inverse_asymptotics", (|| {
        let lambdas = [1e2, 1e3, 1e4, 1e5];
        let mut rng = rng::stream(seed, 0x0801);
        let mut fits = Vec::new();
        let mut all = true;
        let demo = FibrationSpec::warp_demo();
        for _ in 0..3 {
            let p = demo.domain().sample(&mut rng);
            let r = warp::block_inverse_asymptotics_check(&demo, &p, &lambdas)?;
            all &= r.passed;
        }
        for (n, s) in [(3usize, 1usize), (4, 2)] {
            let x = nalgebra::DMatrix::from_vec(n, n, complex_normal(&mut rng, n * n));
            let phi = &x * x.adjoint() + nalgebra::DMatrix::<C64>::identity(n, n);
            let r = warp::block_inverse_asymptotics(&phi, s, &lambdas)?;
            all &= r.passed;
            fits.extend(r.families.iter().filter_map(|f| f.fitted_slope.map(|m| (m - f.predicted_slope).abs())));
        }
        let worst = fits.iter().copied().fold(0.0, f64::max);
        Ok(CheckOutcome::new(
            crit,
            "inverse_asymptotics",
            all,
            worst,
            warp::SLOPE_TOL,
            "largest |fitted - predicted| slope over coupled blocks".into(),
        ))
    })());

    let slices = outcome_of(crit, "decreasing_on_slices", (|| {
        let g = catalog::paper_g_const(1.0)?;
        let a = warp::submanifold_decreasing_check(&g, &[1], Some(&[C64::new(0.5, 0.0)]), 1000, seed)?;
        let psi = FibrationSpec::warp_demo().assemble_psi(10.0)?;
        let b = warp::submanifold_decreasing_check(&psi, &[1], None, 1000, seed)?;
        let twisted = MetricSpec::parse(
            "twisted",
            &[
                vec!["2+z1*conj(z1)", "0.3*z1*conj(z2)"],
                vec!["0.3*z2*conj(z1)", "1+exp(z2*conj(z2))"],
            ],
            ChartBox::polydisk(2, 0.9),
        )?;
        let c = warp::submanifold_decreasing_check(&twisted, &[0], None, 1000, seed)?;
        let violations = a.violations + b.violations + c.violations;
        Ok(CheckOutcome::new(
            crit,
            "decreasing_on_slices",
            violations == 0,
            violations as f64,
            0.0,
            format!(
                "paper_G(1) at z1=0.5: max |gap| {:e}; psi(10) base slice: max |gap| {:e}; coupled metric: worst gap {:e}",
                a.max_abs_gap, b.max_abs_gap, c.worst_gap
            ),
        ))
    })());

    let growth = outcome_of(crit, "base_numerator_growth", (|| {
        let f = FibrationSpec::warp_demo();
        let p = [C64::new(0.3, -0.2), C64::new(-0.4, 0.1)];
        let (_, slope) = warp::base_numerator_growth(&f, &p, &[C64::new(1.0, 0.0)], &[1e2, 1e3, 1e4])?;
        Ok(CheckOutcome::new(crit, "base_numerator_growth", slope >= 0.8, slope, 0.8, "log-log slope over [1e2, 1e4]".into()))
    })());

    let mu0 = outcome_of(crit, "mu0_warp_demo", (|| {
        let mu = warp::mu0_search(&FibrationSpec::warp_demo(), 200, seed)?;
        Ok(CheckOutcome::new(crit, "mu0_warp_demo", mu.is_finite() && mu > 0.0, mu, 0.0, "smallest power of two".into()))
    })());

    let mut out = vec![det, asym, slices, growth, mu0];
    let f = FibrationSpec::warp_demo();
    let params = LambdaSearchParams { scan: suite_scan(seed), fibers: 4, ..LambdaSearchParams::default() };
    match warp::lambda_search(&f, &params) {
        Err(e) => out.push(CheckOutcome::errored(crit, "lambda_search", e)),
        Ok(r) => {
            out.push(CheckOutcome::new(
                crit,
                "lambda_search",
                r.lambda_star.is_finite() && r.min_hsc_at_star > 0.0,
                r.lambda_star,
                0.0,
                format!("min HSC at lambda* {:e} after {} evaluations", r.min_hsc_at_star, r.history.len()),
            ));
            out.push(outcome_of(crit, "negative_at_1e-3", (|| {
                let s = warp::min_hsc_profile(&f, &[1e-3], &params.scan)?;
                Ok(CheckOutcome::new(crit, "negative_at_1e-3", s[0].min_hsc < 0.0, s[0].min_hsc, 0.0, "sampled min".into()))
            })()));
            out.push(outcome_of(crit, "persistence", (|| {
                let s = warp::min_hsc_profile(&f, &[2.0 * r.lambda_star, 4.0 * r.lambda_star], &params.scan)?;
                let worst = s.iter().map(|x| x.min_hsc).fold(f64::INFINITY, f64::min);
                Ok(CheckOutcome::new(crit, "persistence", worst > 0.0, worst, 0.0, "sampled min at 2x and 4x lambda*".into()))
            })()));
        }
    }
    match warp::lambda_search(&FibrationSpec::semipositive_example(), &params) {
        Err(crate::HscError::Hypothesis(msg)) => out.push(CheckOutcome::new(
            crit,
            "semipositive_fibers_rejected",
            true,
            0.0,
            0.0,
            msg,
        )),
        other => out.push(CheckOutcome::new(
            crit,
            "semipositive_fibers_rejected",
            false,
            f64::NAN,
            0.0,
            format!("expected a hypothesis error, got {other:?}"),
        )),
    }
    out
}

/// Every check, in a fixed order.
pub fn run_all(seed: u64) -> SelftestReport {
    let mut outcomes = Vec::new();
    outcomes.extend(constant_curvature(seed));
    outcomes.extend(base_metric(seed));
    outcomes.extend(example1(seed));
    outcomes.extend(ad_vs_fd(seed));
    outcomes.extend(gaussian_equals_hsc(seed));
    outcomes.extend(lemma1(seed));
    outcomes.extend(lemma2(seed));
    outcomes.extend(warp_skeleton(seed));
    let failures = outcomes.iter().filter(|o| !o.counts_as_passed()).count();
    let errata = outcomes.iter().filter(|o| !o.passed && o.erratum.is_some()).count();
    SelftestReport {
        schema: 1,
        version: VERSION.into(),
        seed,
        failures,
        errata,
        passed: failures == 0,
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_expressions_are_deterministic() {
        let a = random_expr(&mut rng::stream(4, 0), 2, 4).to_string();
        let b = random_expr(&mut rng::stream(4, 0), 2, 4).to_string();
        assert_eq!(a, b);
    }

    #[test]
    fn jet_check_on_a_fixed_expression() {
        let e = crate::dsl::parse("exp(z1*conj(z2))/(2+z1^2)", 2).unwrap();
        let d = jet_disagreement(&e, &[C64::new(0.3, 0.1), C64::new(-0.2, 0.4)]).unwrap();
        assert!(d < 1e-7);
    }

    #[test]
    fn outcome_lines() {
        let mut o = CheckOutcome::new("c", "x", false, 1.0, 0.5, "d".into());
        assert!(o.line().starts_with("FAIL c/x"));
        o.erratum = Some("why".into());
        assert!(o.counts_as_passed());
        assert!(o.line().starts_with("FAIL (erratum)"));
    }
}
