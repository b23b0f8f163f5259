//! Chern curvature and holomorphic sectional curvature of Hermitian metrics.
//!
//! With `g = (g_{ij̄})` the metric matrix at a point,
//!
//! ```text
//! R_{ij̄kl̄} = −∂_k∂_l̄ g_{ij̄} + Σ_{p,q} (g⁻¹)_{pq} ∂_k g_{ip̄} ∂_l̄ g_{qj̄}
//! K(ξ)     = 2 Σ R_{ij̄kl̄} ξ_i ξ̄_j ξ_k ξ̄_l / (Σ g_{ij̄} ξ_i ξ̄_j)²
//! ```
//!
//! No Kähler condition is assumed.

use nalgebra::DMatrix;

use crate::dsl::{ChartBox, MetricSpec, Substitution};
use crate::wirtinger::{fd_jet, fd_jet_extrapolated, Jet2, SINGULAR_EPS};
use crate::{HscError, Result, C64};

/// Largest condition number accepted when inverting the metric.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative size of the HSC numerator's imaginary part that is tolerated and dropped.
pub const NUMERATOR_IMAG_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Metric values and their Wirtinger derivatives at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    n: usize,
    point: Vec<C64>,
    g: Vec<C64>,
    dg: Vec<C64>,
    dbarg: Vec<C64>,
    ddbarg: Vec<C64>,
}

impl MetricJet {
    /// Evaluate every entry of `spec` as a [`Jet2`] at `point`.
    pub fn from_spec(spec: &MetricSpec, point: &[C64]) -> Result<Self> {
        Self::build(spec, point, |i, j| spec.entry(i, j).eval_jet(point, SINGULAR_EPS))
    }

    /// Same slots from central differences of pointwise entry values.
    pub fn from_fd(spec: &MetricSpec, point: &[C64], h: f64) -> Result<Self> {
        // Surface singularities up front; the stencil itself cannot report them.
        spec.matrix_at(point)?;
        Self::build(spec, point, |i, j| {
            let e = spec.entry(i, j);
            Ok(fd_jet(|q| e.eval(q, SINGULAR_EPS).unwrap_or(C64::new(f64::NAN, f64::NAN)), point, h))
        })
    }

    /// [`MetricJet::from_fd`] with the `h²` truncation term extrapolated away.
    pub fn from_fd_extrapolated(spec: &MetricSpec, point: &[C64], h: f64) -> Result<Self> {
        spec.matrix_at(point)?;
        Self::build(spec, point, |i, j| {
            let e = spec.entry(i, j);
            Ok(fd_jet_extrapolated(|q| e.eval(q, SINGULAR_EPS).unwrap_or(C64::new(f64::NAN, f64::NAN)), point, h))
        })
    }

    fn build(
        spec: &MetricSpec,
        point: &[C64],
        mut entry_jet: impl FnMut(usize, usize) -> Result<Jet2>,
    ) -> Result<Self> {
        let n = spec.dim();
        if point.len() != n {
            return Err(HscError::DimensionMismatch { expected: n, got: point.len() });
        }
        if !spec.domain().contains(point) {
            return Err(HscError::OutsideBox { point: point.to_vec() });
        }
        let mut mj = Self {
            n,
            point: point.to_vec(),
            g: vec![ZERO; n * n],
            dg: vec![ZERO; n * n * n],
            dbarg: vec![ZERO; n * n * n],
            ddbarg: vec![ZERO; n * n * n * n],
        };
        for i in 0..n {
            for j in 0..n {
                let jet = entry_jet(i, j)?;
                let ij = i * n + j;
                mj.g[ij] = jet.value();
                for k in 0..n {
                    mj.dg[ij * n + k] = jet.d()[k];
                    mj.dbarg[ij * n + k] = jet.dbar()[k];
                    for l in 0..n {
                        mj.ddbarg[(ij * n + k) * n + l] = jet.ddbar(k, l);
                    }
                }
            }
        }
        Ok(mj)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> &[C64] {
        &self.point
    }

    /// `g_{ij̄}`.
    pub fn g(&self, i: usize, j: usize) -> C64 {
        self.g[i * self.n + j]
    }

    /// `∂g_{ij̄}/∂z_k`.
    pub fn dg(&self, i: usize, j: usize, k: usize) -> C64 {
        self.dg[(i * self.n + j) * self.n + k]
    }

    /// `∂g_{ij̄}/∂z̄_l`.
    pub fn dbarg(&self, i: usize, j: usize, l: usize) -> C64 {
        self.dbarg[(i * self.n + j) * self.n + l]
    }

    /// `∂²g_{ij̄}/∂z_k∂z̄_l`.
    pub fn ddbarg(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.ddbarg[((i * self.n + j) * self.n + k) * self.n + l]
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.g(i, j))
    }

    /// Largest of `|dbarg[i][j][l] − conj(dg[j][i][l])|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    worst = worst.max((self.dbarg(i, j, l) - self.dg(j, i, l).conj()).norm());
                }
            }
        }
        worst
    }

    /// `Σ g_{ij̄} ξ_i ξ̄_j`.
    pub fn norm_sq(&self, xi: &[C64]) -> f64 {
        let n = self.n;
        let mut s = ZERO;
        for i in 0..n {
            for j in 0..n {
                s += self.g(i, j) * xi[i] * xi[j].conj();
            }
        }
        s.re
    }

    /// Inverse metric matrix, after the conditioning guard.
    pub fn inverse(&self) -> Result<DMatrix<C64>> {
        let g = self.matrix();
        let herm = (&g + g.adjoint()).scale(0.5);
        let eig = herm.clone().symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
        if !(lo > 0.0) {
            return Err(HscError::IllConditioned { condition: f64::INFINITY });
        }
        let condition = hi / lo;
        if condition > MAX_CONDITION {
            return Err(HscError::IllConditioned { condition });
        }
        let chol = herm
            .cholesky()
            .ok_or(HscError::IllConditioned { condition: f64::INFINITY })?;
        // one Hermitian solve per unit vector
        Ok(chol.solve(&DMatrix::identity(self.n, self.n)))
    }
}

/// Components `R_{ij̄kl̄}` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    r: Vec<C64>,
}

impl CurvatureTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, r: vec![ZERO; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> C64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let at = t.idx(i, j, k, l);
                        t.r[at] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.r[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: C64) {
        let at = self.idx(i, j, k, l);
        self.r[at] = v;
    }

    pub fn components(&self) -> &[C64] {
        &self.r
    }

    /// Largest `|R[i][j][k][l] − conj(R[j][i][l][k])|`.
    pub fn pair_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((self.get(i, j, k, l) - self.get(j, i, l, k).conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// `Σ R_{ij̄kl̄} ξ_i ξ̄_j ξ_k ξ̄_l`, plus the sum of the term moduli.
    pub fn quartic_with_scale(&self, xi: &[C64]) -> (C64, f64) {
        let n = self.n;
        let v: Vec<C64> = (0..n * n).map(|ij| xi[ij / n] * xi[ij % n].conj()).collect();
        let mut s = ZERO;
        let mut scale = 0.0;
        for ij in 0..n * n {
            for kl in 0..n * n {
                let t = self.r[ij * n * n + kl] * v[ij] * v[kl];
                s += t;
                scale += t.norm();
            }
        }
        (s, scale)
    }

    pub fn quartic(&self, xi: &[C64]) -> C64 {
        self.quartic_with_scale(xi).0
    }

    /// Components in a new frame: `R'_{abcd} = Σ R_{ijkl} M_ia M̄_jb M_kc M̄_ld`.
    pub fn transform(&self, m: &DMatrix<C64>) -> Self {
        let n = self.n;
        let mut cur = self.r.clone();
        // Contract one slot at a time; slot s has stride n^(3-s).
        for slot in 0..4 {
            let stride = n.pow(3 - slot as u32);
            let conj = slot % 2 == 1;
            let mut next = vec![ZERO; cur.len()];
            for (at, out) in next.iter_mut().enumerate() {
                let a = (at / stride) % n;
                let base = at - a * stride;
                let mut s = ZERO;
                for i in 0..n {
                    let coef = if conj { m[(i, a)].conj() } else { m[(i, a)] };
                    s += cur[base + i * stride] * coef;
                }
                *out = s;
            }
            cur = next;
        }
        Self { n, r: cur }
    }
}

/// Curvature tensor of the metric jet.
pub fn curvature(mj: &MetricJet) -> Result<CurvatureTensor> {
    let n = mj.dim();
    let ginv = mj.inverse()?;
    let mut t = CurvatureTensor::zeros(n);
    let mut u = vec![ZERO; n];
    for i in 0..n {
        for k in 0..n {
            for (q, uq) in u.iter_mut().enumerate() {
                *uq = (0..n).map(|p| mj.dg(i, p, k) * ginv[(p, q)]).sum();
            }
            for j in 0..n {
                for l in 0..n {
                    let quad: C64 = (0..n).map(|q| u[q] * mj.dbarg(q, j, l)).sum();
                    t.set(i, j, k, l, quad - mj.ddbarg(i, j, k, l));
                }
            }
        }
    }
    Ok(t)
}

/// Holomorphic sectional curvature in direction `xi`.
pub fn hsc(mj: &MetricJet, r: &CurvatureTensor, xi: &[C64]) -> Result<f64> {
    if xi.len() != mj.dim() {
        return Err(HscError::DimensionMismatch { expected: mj.dim(), got: xi.len() });
    }
    let den = mj.norm_sq(xi);
    if !(den > 0.0) || xi.iter().all(|c| c.norm() == 0.0) {
        return Err(HscError::ZeroVector);
    }
    let (num, scale) = r.quartic_with_scale(xi);
    if num.im.abs() > NUMERATOR_IMAG_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(HscError::ComplexNumerator { real: num.re, imag: num.im });
    }
    Ok(2.0 * num.re / (den * den))
}

/// `−(2/g) ∂²(log g)/∂z∂z̄` for a one-dimensional metric.
pub fn gaussian_curvature_1d(spec: &MetricSpec, point: &[C64]) -> Result<f64> {
    if spec.dim() != 1 {
        return Err(HscError::DimensionMismatch { expected: 1, got: spec.dim() });
    }
    let mj = MetricJet::from_spec(spec, point)?;
    let g = mj.g(0, 0).re;
    if !(g > SINGULAR_EPS) {
        return Err(HscError::Singular { modulus: g.abs(), eps: SINGULAR_EPS });
    }
    let log_ddbar = mj.ddbarg(0, 0, 0, 0) / g - mj.dg(0, 0, 0) * mj.dbarg(0, 0, 0) / (g * g);
    Ok(-(2.0 / g) * log_ddbar.re)
}

/// Induced metric on the coordinate slice where the `fixed` coordinates
/// (0-based index, value) are frozen. Remaining coordinates keep their order.
pub fn restrict(spec: &MetricSpec, fixed: &[(usize, C64)]) -> Result<MetricSpec> {
    let n = spec.dim();
    let mut map: Vec<Option<Substitution>> = vec![None; n];
    for &(k, v) in fixed {
        if k >= n {
            return Err(HscError::IndexOutOfRange { index: k, dim: n });
        }
        if map[k].is_some() {
            return Err(HscError::InvalidArgument(format!("coordinate z{} fixed twice", k + 1)));
        }
        if !spec.domain().0[k].contains(v) {
            let mut point = spec.domain().center();
            point[k] = v;
            return Err(HscError::OutsideBox { point });
        }
        map[k] = Some(Substitution::Value(v));
    }
    let kept: Vec<usize> = (0..n).filter(|k| map[*k].is_none()).collect();
    if kept.is_empty() {
        return Err(HscError::InvalidArgument("cannot fix every coordinate".into()));
    }
    for (new, &old) in kept.iter().enumerate() {
        map[old] = Some(Substitution::Rename(new));
    }
    let map: Vec<Substitution> = map.into_iter().map(|s| s.expect("all assigned")).collect();
    let entries = kept
        .iter()
        .map(|&i| kept.iter().map(|&j| spec.entry(i, j).substitute(&map)).collect())
        .collect();
    let domain = ChartBox(kept.iter().map(|&k| spec.domain().0[k].clone()).collect());
    let label = fixed
        .iter()
        .map(|(k, v)| format!("z{}={v}", k + 1))
        .collect::<Vec<_>>()
        .join(",");
    MetricSpec::new(format!("{}|{label}", spec.name), entries, domain)
}

/// Jet, tensor and a `g`-orthonormal frame at one point.
///
/// In the frame `ξ = M η` the denominator of `K` is `|η|⁴`, which is what
/// the direction searches in [`crate::positivity`] optimise over.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub jet: MetricJet,
    pub tensor: CurvatureTensor,
    frame: DMatrix<C64>,
    frame_tensor: CurvatureTensor,
}

impl PointGeometry {
    pub fn at(spec: &MetricSpec, point: &[C64]) -> Result<Self> {
        Self::from_jet(MetricJet::from_spec(spec, point)?)
    }

    pub fn from_jet(jet: MetricJet) -> Result<Self> {
        let tensor = curvature(&jet)?;
        let n = jet.dim();
        // Σ g_{ij̄} ξ_i ξ̄_j = ξ* conj(g) ξ; factor conj(g) = L L*.
        let g = jet.matrix();
        let gc = (g.map(|c| c.conj()) + g.transpose()).scale(0.5);
        let chol = gc.cholesky().ok_or(HscError::IllConditioned { condition: f64::INFINITY })?;
        let l_adj = chol.l().adjoint();
        let frame = l_adj
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .ok_or(HscError::IllConditioned { condition: f64::INFINITY })?;
        let frame_tensor = tensor.transform(&frame);
        Ok(Self { jet, tensor, frame, frame_tensor })
    }

    pub fn dim(&self) -> usize {
        self.jet.dim()
    }

    /// Checked HSC in a coordinate direction.
    pub fn hsc(&self, xi: &[C64]) -> Result<f64> {
        hsc(&self.jet, &self.tensor, xi)
    }

    /// HSC along the frame vector `η` (need not be normalised).
    pub fn hsc_frame(&self, eta: &[C64]) -> f64 {
        let norm_sq: f64 = eta.iter().map(|c| c.norm_sqr()).sum();
        2.0 * self.frame_tensor.quartic(eta).re / (norm_sq * norm_sq)
    }

    /// Coordinate direction `M η`, `g`-unit when `|η| = 1`.
    pub fn direction(&self, eta: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|a| self.frame[(i, a)] * eta[a]).sum()).collect()
    }
}
