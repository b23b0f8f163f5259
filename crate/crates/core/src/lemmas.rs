//! Quantitative pieces of the two curvature lemmas.
//!
//! The block-splitting estimate turns bounds on the fiber block (`K0`), the mixed components
//! (`K1`) and the base block (`K2`) of a curvature tensor into positivity of
//! the full quartic once `K2/K1 ≥ 𝒦`. The sum formula gives the HSC of `g + λh` for
//! one-dimensional metrics in closed form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature, gaussian_curvature_1d, CurvatureTensor, MetricJet, PointGeometry};
use crate::dsl::{Expr, MetricSpec};
use crate::rng::{self, complex_normal};
use crate::warp::loglog_slope;
use crate::{HscError, Result, C64};

/// Absolute slack allowed in the block-splitting bound.
pub const BOUND_TOL: f64 = 1e-9;
/// Fraction of `K1` bounding the mixed components of generated tensors.
pub const MIXED_CAP: f64 = 0.9;

#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Constants {
    pub K0: f64,
    pub K1: f64,
    pub K2_required: f64,
    pub n: usize,
    pub s: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub kcal: f64,
}

impl Lemma1Constants {
    /// The four terms constrained to sum to at most `K0/(2K1)`.
    pub fn constraint_terms(&self) -> [f64; 4] {
        let (n, s) = ((self.n - self.s) as f64, self.s as f64);
        let (a2, b2, c2, d2) = (self.a * self.a, self.b * self.b, self.c * self.c, self.d * self.d);
        [4.0 * a2 * n.powi(3), 6.0 * b2 * n * n, 4.0 * c2 * s * n, 4.0 * d2 / c2 * s * s * n]
    }

    /// `(4/a²)s(n−s)² + 4s(n−s) + (6/b²)s² + (4/(c²d²))s³`.
    pub fn kcal_formula(&self) -> f64 {
        kcal_from(self.n, self.s, self.a * self.a, self.b * self.b, self.c * self.c, self.d * self.d)
    }
}

fn kcal_from(n: usize, s: usize, a2: f64, b2: f64, c2: f64, d2: f64) -> f64 {
    let (m, s) = ((n - s) as f64, s as f64);
    4.0 / a2 * s * m * m + 4.0 * s * m + 6.0 / b2 * s * s + 4.0 / (c2 * d2) * s.powi(3)
}

/// Weights from the equalization rule: every constraint term equals `K0/(8K1)`.
#[allow(non_snake_case)]
pub fn lemma1_constants(K0: f64, K1: f64, n: usize, s: usize) -> Result<Lemma1Constants> {
    if !(K0 > 0.0 && K1 > 0.0) {
        return Err(HscError::InvalidArgument(format!("K0 and K1 must be positive, got {K0}, {K1}")));
    }
    if s == 0 || s >= n {
        return Err(HscError::InvalidArgument(format!("need 0 < s < n, got s = {s}, n = {n}")));
    }
    let t = K0 / (8.0 * K1);
    let (m, sf) = ((n - s) as f64, s as f64);
    let a2 = t / (4.0 * m.powi(3));
    let b2 = t / (6.0 * m * m);
    let c2 = t / (4.0 * sf * m);
    let d2 = t * c2 / (4.0 * sf * sf * m);
    let kcal = kcal_from(n, s, a2, b2, c2, d2);
    Ok(Lemma1Constants {
        K0,
        K1,
        K2_required: kcal * K1,
        n,
        s,
        a: a2.sqrt(),
        b: b2.sqrt(),
        c: c2.sqrt(),
        d: d2.sqrt(),
        kcal,
    })
}

/// `RHS − LHS` of the three product inequalities for moduli
/// `[x_i, x_j, x_k, x_α, x_β, x_γ]`.
pub fn prod_ineq_slacks(a: f64, b: f64, c: f64, d: f64, x: [f64; 6]) -> [f64; 3] {
    let [xi, xj, xk, xa, xb, xg] = x;
    let (a2, b2, c2, d2) = (a * a, b * b, c * c, d * d);
    [
        a2 * xi.powi(4) + xa.powi(4) / a2 + xb * xb * xg * xg - xi * xa * xb * xg,
        b2 * xi * xi * xj * xj + xa * xa * xb * xb / b2 - xi * xj * xa * xb,
        c2 * xi * xi * xj * xj + d2 / c2 * xk.powi(4) + xa.powi(4) / (c2 * d2) - xi * xj * xk * xa,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProdIneqReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest slack relative to the right-hand side, per inequality.
    pub worst_slack: [f64; 3],
    pub witness: Option<[f64; 6]>,
    pub weights: [f64; 4],
    pub seed: u64,
}

/// Check the product inequalities on log-uniform moduli in `[1e-3, 1e3]`,
/// with a zero substituted for each modulus one time in ten.
pub fn prod_ineq_check(a: f64, b: f64, c: f64, d: f64, trials: usize, seed: u64) -> Result<ProdIneqReport> {
    if !(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0) {
        return Err(HscError::InvalidArgument("weights must be positive".into()));
    }
    let mut rng = rng::stream(seed, 0x7072_6f64);
    let mut report = ProdIneqReport {
        trials,
        violations: 0,
        worst_slack: [f64::INFINITY; 3],
        witness: None,
        weights: [a, b, c, d],
        seed,
    };
    for _ in 0..trials {
        let mut x = [0.0; 6];
        for v in &mut x {
            *v = if rng.random::<f64>() < 0.1 { 0.0 } else { 10f64.powf(rng.random_range(-3.0..3.0)) };
        }
        let slacks = prod_ineq_slacks(a, b, c, d, x);
        let mut bad = false;
        for (q, slack) in slacks.iter().enumerate() {
            let lhs = match q {
                0 => x[0] * x[3] * x[4] * x[5],
                1 => x[0] * x[1] * x[3] * x[4],
                _ => x[0] * x[1] * x[2] * x[3],
            };
            let rhs = slack + lhs;
            let rel = if rhs > 0.0 { slack / rhs } else { 0.0 };
            report.worst_slack[q] = report.worst_slack[q].min(rel);
            if *slack < -1e-12 * rhs.max(lhs) {
                bad = true;
            }
        }
        if bad {
            report.violations += 1;
            report.witness.get_or_insert(x);
        }
    }
    Ok(report)
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisTensor {
    pub n: usize,
    pub s: usize,
    pub r: CurvatureTensor,
    pub K0: f64,
    pub K1: f64,
    pub K2: f64,
}

/// `K·(δ_ij δ_kl + δ_il δ_kj)/2`: its quartic is `K·(Σ|ξ|²)²`.
fn model(k: f64, i: usize, j: usize, kk: usize, l: usize) -> f64 {
    let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
    k * (d(i, j) * d(kk, l) + d(i, l) * d(kk, j)) / 2.0
}

/// Model tensors on the fiber and base blocks, random mixed components of
/// modulus at most `0.9·K1·noise`, with `R_{ij̄kl̄} = conj(R_{jīlk̄})`.
#[allow(non_snake_case)]
pub fn random_hypothesis_tensor(
    K0: f64,
    K1: f64,
    K2: f64,
    n: usize,
    s: usize,
    seed: u64,
    noise: f64,
) -> Result<HypothesisTensor> {
    if !(K0 > 0.0 && K1 > 0.0 && K2 > 0.0) {
        return Err(HscError::InvalidArgument("K0, K1, K2 must be positive".into()));
    }
    if s == 0 || s >= n {
        return Err(HscError::InvalidArgument(format!("need 0 < s < n, got s = {s}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(HscError::InvalidArgument(format!("noise must lie in [0, 1], got {noise}")));
    }
    let mut rng = rng::stream(seed, 0x6879_7074);
    let cap = MIXED_CAP * K1 * noise;
    let mut r = CurvatureTensor::zeros(n);
    let fiber = |q: usize| q < s;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let (twin_i, twin_j, twin_k, twin_l) = (j, i, l, k);
                    if (twin_i, twin_j, twin_k, twin_l) < (i, j, k, l) {
                        continue;
                    }
                    let idx = [i, j, k, l];
                    let v = if idx.iter().all(|&q| fiber(q)) {
                        C64::new(model(K0, i, j, k, l), 0.0)
                    } else if idx.iter().all(|&q| !fiber(q)) {
                        C64::new(model(K2, i - s, j - s, k - s, l - s), 0.0)
                    } else if (twin_i, twin_j, twin_k, twin_l) == (i, j, k, l) {
                        C64::new(cap * rng.random_range(-1.0..=1.0), 0.0)
                    } else {
                        let modulus = cap * rng.random::<f64>();
                        C64::from_polar(modulus, std::f64::consts::TAU * rng.random::<f64>())
                    };
                    r.set(i, j, k, l, v);
                    r.set(twin_i, twin_j, twin_k, twin_l, v.conj());
                }
            }
        }
    }
    Ok(HypothesisTensor { n, s, r, K0, K1, K2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisChecks {
    /// Smallest `fiber quartic − K0·F` over the sampled ξ (relative to `F`).
    pub fiber_slack: f64,
    /// Largest mixed-component modulus.
    pub max_mixed: f64,
    pub base_slack: f64,
    pub pair_symmetry_defect: f64,
    pub passed: bool,
}

/// `(Σ_{i≤s}|ξ_i|²)²` and `(Σ_{α>s}|ξ_α|²)²`.
fn block_norms(xi: &[C64], s: usize) -> (f64, f64) {
    let f: f64 = xi[..s].iter().map(|c| c.norm_sqr()).sum();
    let b: f64 = xi[s..].iter().map(|c| c.norm_sqr()).sum();
    (f * f, b * b)
}

impl HypothesisTensor {
    /// Check the three hypotheses on `samples` random ξ per block.
    pub fn check(&self, samples: usize, seed: u64) -> HypothesisChecks {
        let (n, s) = (self.n, self.s);
        let mut rng = rng::stream(seed, 0x6863_6b00);
        let (mut fiber_slack, mut base_slack) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..samples {
            let mut xi = complex_normal(&mut rng, n);
            xi[s..].iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            let (f, _) = block_norms(&xi, s);
            fiber_slack = fiber_slack.min((self.r.quartic(&xi).re - self.K0 * f) / f);

            let mut xi = complex_normal(&mut rng, n);
            xi[..s].iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            let (_, b) = block_norms(&xi, s);
            base_slack = base_slack.min((self.r.quartic(&xi).re - self.K2 * b) / b);
        }
        let mut max_mixed: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = [i, j, k, l];
                        let lo = *idx.iter().min().expect("four indices");
                        let hi = *idx.iter().max().expect("four indices");
                        if lo < s && hi >= s {
                            max_mixed = max_mixed.max(self.r.get(i, j, k, l).norm());
                        }
                    }
                }
            }
        }
        let tol = 1e-12 * self.K0.max(self.K2);
        let pair_symmetry_defect = self.r.pair_symmetry_defect();
        HypothesisChecks {
            fiber_slack,
            max_mixed,
            base_slack,
            pair_symmetry_defect,
            passed: fiber_slack >= -tol && base_slack >= -tol && max_mixed < self.K1 && pair_symmetry_defect == 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `numerator − bound` over the trials.
    pub worst_slack: f64,
    /// Smallest numerator over the trials (unit ξ).
    pub min_numerator: f64,
    pub witness: Option<Vec<C64>>,
    pub constants: Lemma1Constants,
    pub seed: u64,
}

/// Check `Σ R ξξ̄ξξ̄ ≥ (K0/2)F + (K2 − K1𝒦)B − 1e-9` and strict positivity on
/// unit random ξ, where `F`, `B` are the squared block norms.
pub fn lemma1_bound_check(
    t: &HypothesisTensor,
    consts: &Lemma1Constants,
    trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    if t.n != consts.n || t.s != consts.s {
        return Err(HscError::DimensionMismatch { expected: consts.n, got: t.n });
    }
    let required = consts.kcal * t.K1;
    if t.K2 < required * (1.0 - 1e-12) {
        return Err(HscError::Hypothesis(format!("K2 = {} is below Kcal·K1 = {required}", t.K2)));
    }
    let mut rng = rng::stream(seed, 0x626e_6400);
    let mut report = BoundReport {
        trials,
        violations: 0,
        worst_slack: f64::INFINITY,
        min_numerator: f64::INFINITY,
        witness: None,
        constants: *consts,
        seed,
    };
    for _ in 0..trials {
        let mut xi = complex_normal(&mut rng, t.n);
        let norm = xi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        xi.iter_mut().for_each(|c| *c /= norm);
        let (f, b) = block_norms(&xi, t.s);
        let num = t.r.quartic(&xi).re;
        let bound = 0.5 * t.K0 * f + (t.K2 - t.K1 * consts.kcal) * b;
        let slack = num - bound;
        report.worst_slack = report.worst_slack.min(slack);
        report.min_numerator = report.min_numerator.min(num);
        if slack < -BOUND_TOL || !(num > 0.0) {
            report.violations += 1;
            report.witness.get_or_insert(xi);
        }
    }
    Ok(report)
}

fn check_1d(jet: &MetricJet, name: &str) -> Result<f64> {
    if jet.dim() != 1 {
        return Err(HscError::DimensionMismatch { expected: 1, got: jet.dim() });
    }
    let v = jet.g(0, 0).re;
    if !(v > 0.0) {
        return Err(HscError::NotPositiveDefinite {
            name: name.into(),
            point: jet.point().to_vec(),
            min_eigenvalue: v,
        });
    }
    Ok(v)
}

/// Closed-form HSC of `g + λh` from the jets and curvatures of `g` and `h`:
///
/// ```text
/// [g³K_G + λ²h³K_H + 2λ(−h g_zz̄ − g h_zz̄ + g_z h_z̄ + h_z g_z̄)] / (g + λh)³
/// ```
#[allow(non_snake_case)]
pub fn lemma2_curvature(gjet: &MetricJet, hjet: &MetricJet, KG: f64, KH: f64, lambda: f64) -> Result<f64> {
    let g = check_1d(gjet, "g")?;
    let h = check_1d(hjet, "h")?;
    if !(lambda > 0.0) {
        return Err(HscError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let g_zzb = gjet.ddbarg(0, 0, 0, 0).re;
    let h_zzb = hjet.ddbarg(0, 0, 0, 0).re;
    let cross = (gjet.dg(0, 0, 0) * hjet.dbarg(0, 0, 0) + hjet.dg(0, 0, 0) * gjet.dbarg(0, 0, 0)).re;
    let num = g.powi(3) * KG + lambda * lambda * h.powi(3) * KH + 2.0 * lambda * (-h * g_zzb - g * h_zzb + cross);
    Ok(num / (g + lambda * h).powi(3))
}

/// `g + λh` as a metric spec.
pub fn summed_metric(gspec: &MetricSpec, hspec: &MetricSpec, lambda: f64) -> Result<MetricSpec> {
    if gspec.dim() != 1 || hspec.dim() != 1 {
        return Err(HscError::DimensionMismatch { expected: 1, got: gspec.dim().max(hspec.dim()) });
    }
    let entry = Expr::add(gspec.entry(0, 0).clone(), hspec.entry(0, 0).clone().scaled_by(Expr::real(lambda)));
    MetricSpec::new(format!("{}+{lambda}*{}", gspec.name, hspec.name), vec![vec![entry]], gspec.domain().clone())
}

/// [`lemma2_curvature`] with everything evaluated from the specs at `point`.
pub fn lemma2_at(gspec: &MetricSpec, hspec: &MetricSpec, point: &[C64], lambda: f64) -> Result<f64> {
    let gjet = MetricJet::from_spec(gspec, point)?;
    let hjet = MetricJet::from_spec(hspec, point)?;
    let kg = gaussian_curvature_1d(gspec, point)?;
    let kh = gaussian_curvature_1d(hspec, point)?;
    lemma2_curvature(&gjet, &hjet, kg, kh, lambda)
}

/// HSC of `g + λh` computed directly by the curvature engine.
pub fn lemma2_direct(gspec: &MetricSpec, hspec: &MetricSpec, point: &[C64], lambda: f64) -> Result<f64> {
    let sum = summed_metric(gspec, hspec, lambda)?;
    let mj = MetricJet::from_spec(&sum, point)?;
    let r = curvature(&mj)?;
    crate::curvature::hsc(&mj, &r, &[C64::new(1.0, 0.0)])
}

/// Start of the λ schedule.
pub const LAMBDA_START: f64 = 1e-6;
pub const BISECTION_STEPS: usize = 40;
pub const PERSISTENCE_SAMPLES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub lambda_t: f64,
    pub curvature_at_threshold: f64,
    /// `(λ′, K(λ′))` at log-spaced `λ′` in `(λ_t, λ_max]`.
    pub persistence: Vec<(f64, f64)>,
}

/// Smallest λ on a doubling-then-bisection schedule with positive HSC of `g + λh`.
pub fn lemma2_threshold(gspec: &MetricSpec, hspec: &MetricSpec, point: &[C64], lambda_max: f64) -> Result<ThresholdReport> {
    let kh = PointGeometry::at(hspec, point)?.hsc(&[C64::new(1.0, 0.0)])?;
    if !(kh > 0.0) {
        return Err(HscError::Hypothesis(format!("HSC of h at the point is {kh}, not positive")));
    }
    let gjet = MetricJet::from_spec(gspec, point)?;
    let hjet = MetricJet::from_spec(hspec, point)?;
    let kg = gaussian_curvature_1d(gspec, point)?;
    let k = |lambda: f64| lemma2_curvature(&gjet, &hjet, kg, kh, lambda);

    let mut hi = LAMBDA_START;
    let mut lo = None;
    while !(k(hi)? > 0.0) {
        lo = Some(hi);
        hi *= 2.0;
        if hi > lambda_max {
            return Err(HscError::Exhausted(format!("curvature still nonpositive at lambda_max = {lambda_max:e}")));
        }
    }
    if let Some(mut lo) = lo {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if k(mid)? > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let ratio = (lambda_max / hi).max(1.0);
    let persistence = (1..=PERSISTENCE_SAMPLES)
        .map(|q| {
            let l = hi * ratio.powf(q as f64 / PERSISTENCE_SAMPLES as f64);
            Ok((l, k(l)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((l, v)) = persistence.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(HscError::CheckFailed(format!("positivity lost at lambda = {l:e} (K = {v:e})")));
    }
    Ok(ThresholdReport { lambda_t: hi, curvature_at_threshold: k(hi)?, persistence })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub lambdas: Vec<f64>,
    pub curvatures: Vec<f64>,
    pub limit: f64,
    /// `|λK(λ) − K_H| / |K_H|` at the largest λ.
    pub relative_error: f64,
    /// Smallest `C` with `|K(λ)| ≤ C/λ` on the list.
    pub c: f64,
    /// Log-log slope of `|K|` over the three largest λ.
    pub slope: f64,
    pub passed: bool,
}

/// `λ·K(g + λh) → K_H` and `|K| = O(1/λ)`.
pub fn decay_check(gspec: &MetricSpec, hspec: &MetricSpec, point: &[C64], lambdas: &[f64]) -> Result<DecayReport> {
    if lambdas.len() < 3 || lambdas.windows(2).any(|w| !(w[1] > w[0])) || lambdas[lambdas.len() - 1] < 1e4 {
        return Err(HscError::InvalidArgument("need at least three increasing lambdas ending at or above 1e4".into()));
    }
    let limit = PointGeometry::at(hspec, point)?.hsc(&[C64::new(1.0, 0.0)])?;
    let curvatures = lambdas
        .iter()
        .map(|&l| lemma2_at(gspec, hspec, point, l))
        .collect::<Result<Vec<_>>>()?;
    let last = lambdas.len() - 1;
    let relative_error = (lambdas[last] * curvatures[last] - limit).abs() / limit.abs();
    let c = lambdas.iter().zip(&curvatures).map(|(l, k)| l * k.abs()).fold(0.0, f64::max);
    let tail = last - 2..=last;
    let slope = loglog_slope(&lambdas[tail.clone()], &curvatures[tail].iter().map(|k| k.abs()).collect::<Vec<_>>());
    let passed = relative_error <= 0.01 && c > 0.0 && c.is_finite() && (slope + 1.0).abs() <= 0.2;
    Ok(DecayReport { lambdas: lambdas.to_vec(), curvatures, limit, relative_error, c, slope, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::catalog;

    fn origin() -> Vec<C64> {
        vec![C64::new(0.0, 0.0)]
    }

    #[test]
    fn constants_for_two_dimensions() {
        let k = lemma1_constants(8.0, 1.0, 2, 1).unwrap();
        assert!((k.a * k.a - 0.25).abs() < 1e-15);
        assert!((k.b * k.b - 1.0 / 6.0).abs() < 1e-15);
        assert!((k.c * k.c - 0.25).abs() < 1e-15);
        assert!((k.d * k.d - 1.0 / 16.0).abs() < 1e-15);
        assert!((k.kcal - 312.0).abs() < 1e-9);
        assert_eq!(k.K2_required, k.kcal);
    }

    #[test]
    fn constants_for_three_dimensions_saturate_each_term() {
        let k = lemma1_constants(8.0, 1.0, 3, 1).unwrap();
        for term in k.constraint_terms() {
            assert!((term - 1.0).abs() < 1e-14);
        }
        assert!((k.kcal - k.kcal_formula()).abs() <= 1e-12 * k.kcal);
    }

    #[test]
    fn constants_reject_bad_input() {
        assert!(lemma1_constants(0.0, 1.0, 2, 1).is_err());
        assert!(lemma1_constants(1.0, 1.0, 2, 2).is_err());
        assert!(lemma1_constants(1.0, 1.0, 2, 0).is_err());
    }

    #[test]
    fn product_slacks_at_ones() {
        assert_eq!(prod_ineq_slacks(1.0, 1.0, 1.0, 1.0, [1.0; 6]), [2.0, 1.0, 2.0]);
    }

    #[test]
    fn product_inequalities_hold() {
        let r = prod_ineq_check(0.3, 2.0, 0.7, 1.5, 20_000, 3).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_slack.iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn generated_tensor_satisfies_hypotheses() {
        let t = random_hypothesis_tensor(1.0, 1.0, 0.1, 2, 1, 7, 1.0).unwrap();
        let c = t.check(10_000, 7);
        assert!(c.passed, "{c:?}");
        assert_eq!(c.pair_symmetry_defect, 0.0);
    }

    #[test]
    fn noiseless_tensor_is_block_diagonal() {
        let t = random_hypothesis_tensor(2.0, 1.0, 3.0, 3, 1, 0, 0.0).unwrap();
        let xi = [C64::new(0.5, 0.1), C64::new(-0.2, 0.3), C64::new(0.4, -0.6)];
        let (f, b) = block_norms(&xi, 1);
        assert!((t.r.quartic(&xi).re - (2.0 * f + 3.0 * b)).abs() < 1e-14);
        let k = lemma1_constants(2.0, 1.0, 3, 1).unwrap();
        let r = lemma1_bound_check(&t, &k, 100, 0);
        assert!(matches!(r, Err(HscError::Hypothesis(_))));
    }

    #[test]
    fn bound_holds_at_the_required_k2() {
        for seed in 0..5 {
            let k = lemma1_constants(2.0, 1.0, 3, 1).unwrap();
            let t = random_hypothesis_tensor(2.0, 1.0, k.K2_required, 3, 1, seed, 1.0).unwrap();
            let r = lemma1_bound_check(&t, &k, 2000, seed).unwrap();
            assert_eq!(r.violations, 0, "{r:?}");
            assert!(r.min_numerator > 0.0);
        }
    }

    #[test]
    fn fiber_only_directions_meet_half_the_fiber_bound() {
        let k = lemma1_constants(4.0, 1.0, 3, 2).unwrap();
        let t = random_hypothesis_tensor(4.0, 1.0, k.K2_required, 3, 2, 1, 1.0).unwrap();
        let xi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
        let (f, _) = block_norms(&xi, 2);
        assert!(t.r.quartic(&xi).re >= 0.5 * 4.0 * f);
    }

    #[test]
    fn flat_plus_flat_is_flat() {
        let f = catalog::flat(1).unwrap();
        for lambda in [0.1, 1.0, 10.0] {
            assert_eq!(lemma2_at(&f, &f, &origin(), lambda).unwrap(), 0.0);
        }
    }

    #[test]
    fn flat_plus_poincare() {
        let (g, h) = (catalog::flat(1).unwrap(), catalog::poincare());
        for lambda in [0.3, 1.0, 7.0] {
            let k = lemma2_at(&g, &h, &origin(), lambda).unwrap();
            assert!((k + 4.0 * lambda / (1.0 + lambda).powi(2)).abs() < 1e-12);
            assert!((k - lemma2_direct(&g, &h, &origin(), lambda).unwrap()).abs() < 1e-12);
        }
        assert!((lemma2_at(&g, &h, &origin(), 1.0).unwrap() + 1.0).abs() < 1e-12);
        let fs = catalog::fs_affine();
        assert!((lemma2_at(&g, &fs, &origin(), 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn formula_matches_direct_curvature_off_origin() {
        let specs = catalog::one_dimensional();
        let p = [C64::new(0.31, -0.47)];
        for g in &specs {
            for h in &specs {
                for lambda in [0.1, 1.0, 10.0, 100.0] {
                    let a = lemma2_at(g, h, &p, lambda).unwrap();
                    let b = lemma2_direct(g, h, &p, lambda).unwrap();
                    assert!((a - b).abs() < 1e-10, "{} {} {lambda}: {a} vs {b}", g.name, h.name);
                }
            }
        }
    }

    #[test]
    fn thresholds() {
        let fs = catalog::fs_affine();
        let t = lemma2_threshold(&catalog::flat(1).unwrap(), &fs, &origin(), 1e6).unwrap();
        assert!(t.lambda_t <= 1e-6);
        // (1−r)^-2 + λ(1+r)^-2 at 0: f = 1+λ, f_zz̄ = 2−2λ, so K = 4(λ−1)/(1+λ)²
        let t = lemma2_threshold(&catalog::poincare(), &fs, &origin(), 1e6).unwrap();
        assert!((t.lambda_t - 1.0).abs() < 1e-9, "{t:?}");
        for lambda in [0.5, 1.0, 3.0] {
            let direct = lemma2_direct(&catalog::poincare(), &fs, &origin(), lambda).unwrap();
            assert!((direct - 4.0 * (lambda - 1.0) / (1.0 + lambda).powi(2)).abs() < 1e-12);
        }
        assert_eq!(t.persistence.len(), 10);
        assert!(matches!(
            lemma2_threshold(&fs, &catalog::poincare(), &origin(), 1e6),
            Err(HscError::Hypothesis(_))
        ));
        assert!(matches!(
            lemma2_threshold(&catalog::poincare(), &fs, &origin(), 0.1),
            Err(HscError::Exhausted(_))
        ));
    }

    #[test]
    fn decay_to_the_curvature_of_h() {
        let lambdas = [1e2, 1e3, 1e4];
        let fs = catalog::fs_affine();
        let r = decay_check(&catalog::poincare(), &fs, &origin(), &lambdas).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.limit - 4.0).abs() < 1e-12);
        let r = decay_check(&catalog::flat(1).unwrap(), &fs, &origin(), &lambdas).unwrap();
        assert!(r.passed);
        let doubled = fs.scaled(2.0);
        let r = decay_check(&catalog::flat(1).unwrap(), &doubled, &origin(), &lambdas).unwrap();
        assert!((r.limit - 2.0).abs() < 1e-12);
        assert!(r.passed);
    }
}
