//! Sampling the sign of the holomorphic sectional curvature.
//!
//! At a point the direction search works in a `g`-orthonormal frame, where
//! `K` is a quartic form on the unit sphere of `ℂⁿ`. Random directions are
//! evaluated directly; a separate set of random starts is refined by a
//! coordinate pattern search (shrinking step, renormalised after every
//! move). Both sets come from per-point RNG streams, so enlarging either
//! count only adds candidates and never raises the reported minimum.
//!
//! Verdicts are empirical: a positive minimum over samples says nothing about
//! points or directions that were not sampled.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::PointGeometry;
use crate::dsl::{ChartBox, MetricSpec};
use crate::rng::{self, complex_normal};
use crate::{HscError, Result, C64};

/// HSC values below this count as genuinely negative.
pub const NEGATIVE_THRESHOLD: f64 = -1e-8;

const STEP_FLOOR: f64 = 1e-9;
const STREAM_POINTS: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSearch {
    /// Random directions evaluated without refinement.
    pub dirs: usize,
    /// Random starts refined by pattern search.
    pub starts: usize,
    pub max_iters: usize,
}

impl Default for DirectionSearch {
    fn default() -> Self {
        Self { dirs: 64, starts: 8, max_iters: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Grid points per real axis of each coordinate.
    pub grid_per_axis: usize,
    /// Uniform random points added to the grid.
    pub random_points: usize,
    pub search: DirectionSearch,
    pub seed: u64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self { grid_per_axis: 9, random_points: 64, search: DirectionSearch::default(), seed: 0 }
    }
}

/// Best direction found at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionMin {
    pub value: f64,
    /// `g`-unit coordinate direction.
    pub dir: Vec<C64>,
}

fn unit(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut v {
        *c /= norm;
    }
    v
}

/// Pattern search for the minimum of `K` along frame vectors, from `eta`.
pub fn refine_direction(geo: &PointGeometry, eta: Vec<C64>, max_iters: usize) -> (f64, Vec<C64>) {
    let n = geo.dim();
    let mut best_eta = unit(eta);
    let mut best = geo.hsc_frame(&best_eta);
    let mut step = 0.5;
    for _ in 0..max_iters {
        let mut improved = false;
        for r in 0..2 * n {
            for sign in [1.0, -1.0] {
                let mut cand = best_eta.clone();
                let delta = if r % 2 == 0 { C64::new(sign * step, 0.0) } else { C64::new(0.0, sign * step) };
                cand[r / 2] += delta;
                if cand.iter().all(|c| c.norm() == 0.0) {
                    continue;
                }
                let cand = unit(cand);
                let v = geo.hsc_frame(&cand);
                if v < best {
                    best = v;
                    best_eta = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < STEP_FLOOR {
                break;
            }
        }
    }
    (best, best_eta)
}

/// Minimum of `K` over directions at one point, with RNG streams keyed by `(seed, stream)`.
pub fn min_direction(geo: &PointGeometry, search: &DirectionSearch, seed: u64, stream: u64) -> DirectionMin {
    let n = geo.dim();
    if n == 1 {
        let eta = vec![C64::new(1.0, 0.0)];
        return DirectionMin { value: geo.hsc_frame(&eta), dir: geo.direction(&eta) };
    }
    let mut best_value = f64::INFINITY;
    let mut best_eta = Vec::new();
    let mut consider = |v: f64, eta: Vec<C64>| {
        if v < best_value || best_eta.is_empty() {
            best_value = v;
            best_eta = eta;
        }
    };
    let mut dir_rng = rng::stream(seed, stream.wrapping_mul(2));
    for _ in 0..search.dirs {
        let eta = unit(complex_normal(&mut dir_rng, n));
        consider(geo.hsc_frame(&eta), eta);
    }
    let mut start_rng = rng::stream(seed, stream.wrapping_mul(2).wrapping_add(1));
    for _ in 0..search.starts {
        let eta = complex_normal(&mut start_rng, n);
        let (v, eta) = refine_direction(geo, eta, search.max_iters);
        consider(v, eta);
    }
    if best_eta.is_empty() {
        // no directions requested at all: fall back to the first frame vector
        let mut eta = vec![C64::new(0.0, 0.0); n];
        eta[0] = C64::new(1.0, 0.0);
        best_value = geo.hsc_frame(&eta);
        best_eta = eta;
    }
    DirectionMin { value: best_value, dir: geo.direction(&best_eta) }
}

/// Multi-start minimisation of `K` over the `g`-unit sphere at `point`.
pub fn min_hsc_at_point(spec: &MetricSpec, point: &[C64], starts: usize, seed: u64) -> Result<DirectionMin> {
    if starts == 0 {
        return Err(HscError::InvalidArgument("need at least one start".into()));
    }
    let geo = PointGeometry::at(spec, point)?;
    let search = DirectionSearch { starts, ..DirectionSearch::default() };
    Ok(min_direction(&geo, &search, seed, 0))
}

/// Per-point result of a chart scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: Vec<C64>,
    pub min_hsc: f64,
    pub dir: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every sampled value was positive (not a proof).
    EmpiricallyPositive,
    /// Sampled minimum within the roundoff band around zero.
    EmpiricallySemiPositive,
    /// A sample fell below [`NEGATIVE_THRESHOLD`].
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub metric: String,
    pub min_hsc: f64,
    /// Largest per-point minimum.
    pub max_point_min: f64,
    pub witness_point: Vec<C64>,
    pub witness_dir: Vec<C64>,
    pub points_scanned: usize,
    pub dirs_per_point: usize,
    pub starts_per_point: usize,
    /// `|min_hsc|`.
    pub margin: f64,
    pub verdict: Verdict,
    pub seed: u64,
    #[serde(skip)]
    pub records: Vec<PointRecord>,
}

impl ScanReport {
    /// `index,z1_re,z1_im,…,min_hsc` rows.
    pub fn to_csv(&self) -> String {
        let n = self.witness_point.len();
        let mut out = String::from("index");
        for k in 1..=n {
            let _ = write!(out, ",z{k}_re,z{k}_im");
        }
        out.push_str(",min_hsc\n");
        for (i, r) in self.records.iter().enumerate() {
            let _ = write!(out, "{i}");
            for z in &r.point {
                let _ = write!(out, ",{:e},{:e}", z.re, z.im);
            }
            let _ = writeln!(out, ",{:e}", r.min_hsc);
        }
        out
    }
}

pub fn verdict_for(min_hsc: f64) -> Verdict {
    if min_hsc < NEGATIVE_THRESHOLD {
        Verdict::Negative
    } else if min_hsc > 0.0 {
        Verdict::EmpiricallyPositive
    } else {
        Verdict::EmpiricallySemiPositive
    }
}

fn lex_less(a: &[C64], b: &[C64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x.re != y.re {
            return x.re < y.re;
        }
        if x.im != y.im {
            return x.im < y.im;
        }
    }
    false
}

/// The scan's point set: the regular grid followed by `random_points` uniform samples.
pub fn scan_points(domain: &ChartBox, params: &ScanParams) -> Vec<Vec<C64>> {
    let mut pts = domain.grid(params.grid_per_axis);
    let mut rng = rng::stream(params.seed, STREAM_POINTS);
    for _ in 0..params.random_points {
        pts.push(domain.sample(&mut rng));
    }
    pts
}

/// Minimum sampled HSC of `spec` over `domain`.
pub fn scan_chart(spec: &MetricSpec, domain: &ChartBox, params: &ScanParams) -> Result<ScanReport> {
    if params.grid_per_axis < 2 {
        return Err(HscError::InvalidArgument("grid_per_axis must be at least 2".into()));
    }
    if params.search.dirs == 0 && params.search.starts == 0 {
        return Err(HscError::InvalidArgument("need at least one direction".into()));
    }
    let spec = spec.clone().with_domain(domain.clone())?;
    let points = scan_points(domain, params);
    let records: Vec<PointRecord> = points
        .into_par_iter()
        .enumerate()
        .map(|(idx, point)| {
            let geo = PointGeometry::at(&spec, &point)?;
            let best = min_direction(&geo, &params.search, params.seed, idx as u64);
            Ok(PointRecord { point, min_hsc: best.value, dir: best.dir })
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    let mut max_point_min = f64::NEG_INFINITY;
    for (i, r) in records.iter().enumerate() {
        max_point_min = max_point_min.max(r.min_hsc);
        let b = &records[best];
        if r.min_hsc < b.min_hsc || (r.min_hsc == b.min_hsc && lex_less(&r.point, &b.point)) {
            best = i;
        }
    }
    let w = &records[best];
    Ok(ScanReport {
        metric: spec.name.clone(),
        min_hsc: w.min_hsc,
        max_point_min,
        witness_point: w.point.clone(),
        witness_dir: w.dir.clone(),
        points_scanned: records.len(),
        dirs_per_point: params.search.dirs,
        starts_per_point: params.search.starts,
        margin: w.min_hsc.abs(),
        verdict: verdict_for(w.min_hsc),
        seed: params.seed,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<C64>,
    /// `g`-unit direction.
    pub dir: Vec<C64>,
    pub value: f64,
}

/// Joint pattern search over point (kept inside the box) and direction.
fn descend_witness(spec: &MetricSpec, start: Witness, iters: usize) -> Result<Witness> {
    let n = spec.dim();
    let domain = spec.domain().clone();
    let eval = |p: &[C64], xi: &[C64]| -> Option<f64> {
        PointGeometry::at(spec, p).ok().and_then(|g| g.hsc(xi).ok())
    };
    let mut best = start;
    let mut step = 0.05;
    for _ in 0..iters {
        let mut improved = false;
        for r in 0..4 * n {
            for sign in [1.0, -1.0] {
                let (mut p, mut xi) = (best.point.clone(), best.dir.clone());
                let slot = (r % (2 * n)) / 2;
                let delta = if r % 2 == 0 { C64::new(sign * step, 0.0) } else { C64::new(0.0, sign * step) };
                if r < 2 * n {
                    p[slot] += delta;
                    p = domain.project(&p);
                } else {
                    xi[slot] += delta;
                }
                if let Some(v) = eval(&p, &xi) {
                    if v < best.value {
                        best = Witness { point: p, dir: xi, value: v };
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 {
                break;
            }
        }
    }
    // report a g-unit direction and its checked value
    let geo = PointGeometry::at(spec, &best.point)?;
    let norm = geo.jet.norm_sq(&best.dir).sqrt();
    let dir: Vec<C64> = best.dir.iter().map(|c| c / norm).collect();
    let value = geo.hsc(&dir)?;
    Ok(Witness { point: best.point, dir, value })
}

/// First sampled `(point, direction)` with `K < NEGATIVE_THRESHOLD`, improved
/// by local descent. `None` means nothing was found within `budget` points,
/// which is not evidence of positivity.
pub fn find_negative_witness(
    spec: &MetricSpec,
    domain: &ChartBox,
    budget: usize,
    seed: u64,
) -> Result<Option<Witness>> {
    if budget == 0 {
        return Err(HscError::InvalidArgument("budget must be at least 1".into()));
    }
    let spec = spec.clone().with_domain(domain.clone())?;
    let search = DirectionSearch { dirs: 16, starts: 2, max_iters: 100 };
    let mut rng = rng::stream(seed, STREAM_POINTS);
    for idx in 0..budget {
        let point = domain.sample(&mut rng);
        let geo = match PointGeometry::at(&spec, &point) {
            Ok(g) => g,
            Err(HscError::Singular { .. }) | Err(HscError::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        };
        let best = min_direction(&geo, &search, seed, idx as u64);
        if best.value < NEGATIVE_THRESHOLD {
            let start = Witness { point, dir: best.dir, value: best.value };
            return descend_witness(&spec, start, 60).map(Some);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::catalog;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn quick() -> ScanParams {
        ScanParams {
            grid_per_axis: 5,
            random_points: 8,
            search: DirectionSearch { dirs: 16, starts: 3, max_iters: 150 },
            seed: 11,
        }
    }

    #[test]
    fn poincare_minimum_is_minus_four() {
        let m = min_hsc_at_point(&catalog::poincare(), &[c(0.2, -0.5)], 4, 0).unwrap();
        assert!((m.value + 4.0).abs() < 1e-9);
    }

    #[test]
    fn flat_minimum_is_zero() {
        let spec = catalog::flat(2).unwrap();
        let m = min_hsc_at_point(&spec, &[c(0.1, 0.1), c(0.0, 0.3)], 4, 0).unwrap();
        assert_eq!(m.value, 0.0);
        let geo = PointGeometry::at(&spec, &[c(0.1, 0.1), c(0.0, 0.3)]).unwrap();
        assert!((geo.jet.norm_sq(&m.dir) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_starts_is_rejected() {
        assert!(min_hsc_at_point(&catalog::poincare(), &[c(0.0, 0.0)], 0, 0).is_err());
    }

    #[test]
    fn paper_g_is_negative_at_origin_in_a_skew_direction() {
        let spec = catalog::paper_g_const(1.0).unwrap();
        let m = min_hsc_at_point(&spec, &[c(0.0, 0.0), c(0.0, 0.0)], 8, 3).unwrap();
        assert!(m.value < NEGATIVE_THRESHOLD, "{}", m.value);
    }

    #[test]
    fn fs_affine_scan_is_constant() {
        let spec = catalog::fs_affine();
        let r = scan_chart(&spec, spec.domain(), &quick()).unwrap();
        assert!((r.min_hsc - 4.0).abs() < 1e-6);
        assert!((r.max_point_min - r.min_hsc).abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::EmpiricallyPositive);
    }

    #[test]
    fn base_metric_scan_bottoms_out_on_the_rim() {
        let spec = catalog::paper_base();
        let r = scan_chart(&spec, spec.domain(), &quick()).unwrap();
        let want = 2.0 / (1.0 + 0.95f64.powi(2));
        assert!((r.min_hsc - want).abs() < 1e-9, "{}", r.min_hsc);
        assert!((r.witness_point[0].norm() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn paper_g_scan_finds_negative_curvature() {
        let spec = catalog::paper_g_const(1.0).unwrap();
        let r = scan_chart(&spec, spec.domain(), &quick()).unwrap();
        assert!(r.min_hsc < 0.0);
        assert_eq!(r.verdict, Verdict::Negative);
        let geo = PointGeometry::at(&spec, &r.witness_point).unwrap();
        assert!((geo.hsc(&r.witness_dir).unwrap() - r.min_hsc).abs() < 1e-9);
        assert!((geo.jet.norm_sq(&r.witness_dir) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scans_are_deterministic() {
        let spec = catalog::warp_demo();
        let a = scan_chart(&spec, spec.domain(), &quick()).unwrap();
        let b = scan_chart(&spec, spec.domain(), &quick()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_csv().starts_with("index,z1_re,z1_im,z2_re,z2_im,min_hsc\n"));
    }

    #[test]
    fn witnesses() {
        let p = catalog::poincare();
        let w = find_negative_witness(&p, p.domain(), 4, 0).unwrap().unwrap();
        assert!((w.value + 4.0).abs() < 1e-9);
        let f = catalog::fs_affine();
        assert!(find_negative_witness(&f, f.domain(), 50, 0).unwrap().is_none());
        let g = catalog::paper_g_const(5.0).unwrap();
        let w = find_negative_witness(&g, g.domain(), 512, 0).unwrap().unwrap();
        assert!(w.value < NEGATIVE_THRESHOLD);
    }
}
