use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::parse::parse;
use crate::rng::{self, disk_point};
use crate::wirtinger::SINGULAR_EPS;
use crate::{HscError, Result, C64};

/// Largest tolerated `|g_{ij̄} − conj(g_{jī})|` at a validation sample.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue a validated metric must exceed.
pub const PD_TOL: f64 = 1e-12;
/// Radius of the default disk domain.
pub const DEFAULT_RADIUS: f64 = 0.95;

/// Domain of one complex coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordDomain {
    /// Closed rectangle `[re.0, re.1] × [im.0, im.1]`.
    Rect { re: [f64; 2], im: [f64; 2] },
    /// Closed disk `|z| ≤ radius` centred at the origin.
    Disk { radius: f64 },
}

impl CoordDomain {
    pub fn disk(radius: f64) -> Self {
        CoordDomain::Disk { radius }
    }

    pub fn contains(&self, z: C64) -> bool {
        const SLACK: f64 = 1e-12;
        match self {
            CoordDomain::Rect { re, im } => {
                z.re >= re[0] - SLACK && z.re <= re[1] + SLACK && z.im >= im[0] - SLACK && z.im <= im[1] + SLACK
            }
            CoordDomain::Disk { radius } => z.norm() <= radius * (1.0 + SLACK) + SLACK,
        }
    }

    pub fn sample(&self, rng: &mut rng::StreamRng) -> C64 {
        use rand::Rng;
        match self {
            CoordDomain::Rect { re, im } => C64::new(
                re[0] + (re[1] - re[0]) * rng.random::<f64>(),
                im[0] + (im[1] - im[0]) * rng.random::<f64>(),
            ),
            CoordDomain::Disk { radius } => disk_point(rng, *radius),
        }
    }

    /// Regular grid with `per_axis` points per real axis: a Cartesian grid on
    /// rectangles, a polar grid (rings × angles, origin once) on disks.
    pub fn grid(&self, per_axis: usize) -> Vec<C64> {
        let lin = |a: f64, b: f64, k: usize| {
            if per_axis == 1 {
                (a + b) / 2.0
            } else {
                a + (b - a) * k as f64 / (per_axis - 1) as f64
            }
        };
        match self {
            CoordDomain::Rect { re, im } => {
                let mut pts = Vec::with_capacity(per_axis * per_axis);
                for a in 0..per_axis {
                    for b in 0..per_axis {
                        pts.push(C64::new(lin(re[0], re[1], a), lin(im[0], im[1], b)));
                    }
                }
                pts
            }
            CoordDomain::Disk { radius } => {
                let mut pts = vec![C64::new(0.0, 0.0)];
                for ring in 1..per_axis {
                    let r = lin(0.0, *radius, ring);
                    for k in 0..per_axis {
                        let theta = std::f64::consts::TAU * k as f64 / per_axis as f64;
                        pts.push(C64::from_polar(r, theta));
                    }
                }
                pts
            }
        }
    }

    pub fn center(&self) -> C64 {
        match self {
            CoordDomain::Rect { re, im } => C64::new((re[0] + re[1]) / 2.0, (im[0] + im[1]) / 2.0),
            CoordDomain::Disk { .. } => C64::new(0.0, 0.0),
        }
    }

    /// Clamp a point back into the domain.
    pub fn project(&self, z: C64) -> C64 {
        match self {
            CoordDomain::Rect { re, im } => {
                C64::new(z.re.clamp(re[0], re[1]), z.im.clamp(im[0], im[1]))
            }
            CoordDomain::Disk { radius } => {
                let r = z.norm();
                if r > *radius {
                    z * (*radius / r)
                } else {
                    z
                }
            }
        }
    }
}

/// Chart box: one domain per complex coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChartBox(pub Vec<CoordDomain>);

impl ChartBox {
    pub fn polydisk(n: usize, radius: f64) -> Self {
        ChartBox(vec![CoordDomain::disk(radius); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, point: &[C64]) -> bool {
        point.len() == self.dim() && self.0.iter().zip(point).all(|(d, z)| d.contains(*z))
    }

    pub fn sample(&self, rng: &mut rng::StreamRng) -> Vec<C64> {
        self.0.iter().map(|d| d.sample(rng)).collect()
    }

    pub fn project(&self, point: &[C64]) -> Vec<C64> {
        self.0.iter().zip(point).map(|(d, z)| d.project(*z)).collect()
    }

    pub fn center(&self) -> Vec<C64> {
        self.0.iter().map(CoordDomain::center).collect()
    }

    /// Cartesian product of the per-coordinate grids.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<C64>> {
        let mut out: Vec<Vec<C64>> = vec![Vec::new()];
        for d in &self.0 {
            let axis = d.grid(per_axis);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |z| {
                        let mut p = prefix.clone();
                        p.push(*z);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// A Hermitian metric `Σ g_{ij̄} dz_i ⊗ dz̄_j` given by component expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    n: usize,
    entries: Vec<Vec<Expr>>,
    domain: ChartBox,
}

impl MetricSpec {
    pub fn new(name: impl Into<String>, entries: Vec<Vec<Expr>>, domain: ChartBox) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(HscError::InvalidArgument("metric must have at least one coordinate".into()));
        }
        for row in &entries {
            if row.len() != n {
                return Err(HscError::DimensionMismatch { expected: n, got: row.len() });
            }
            for e in row {
                if e.arity() > n {
                    return Err(HscError::VariableOutOfRange { index: e.arity(), dim: n });
                }
            }
        }
        if domain.dim() != n {
            return Err(HscError::DimensionMismatch { expected: n, got: domain.dim() });
        }
        Ok(Self { name: name.into(), n, entries, domain })
    }

    /// Parse every entry from DSL text.
    pub fn parse(name: impl Into<String>, entries: &[Vec<&str>], domain: ChartBox) -> Result<Self> {
        let n = entries.len();
        let parsed = entries
            .iter()
            .map(|row| row.iter().map(|s| parse(s, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, parsed, domain)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `g_{ij̄}` (0-based).
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.entries
    }

    pub fn domain(&self) -> &ChartBox {
        &self.domain
    }

    pub fn with_domain(mut self, domain: ChartBox) -> Result<Self> {
        if domain.dim() != self.n {
            return Err(HscError::DimensionMismatch { expected: self.n, got: domain.dim() });
        }
        self.domain = domain;
        Ok(self)
    }

    /// The same metric multiplied by a positive constant.
    pub fn scaled(&self, c: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| if e.is_zero() { e.clone() } else { e.clone().scaled_by(Expr::real(c)) })
                    .collect()
            })
            .collect();
        Self { name: format!("{}*{c}", self.name), n: self.n, entries, domain: self.domain.clone() }
    }

    /// Numerical matrix `g_{ij̄}(point)`.
    pub fn matrix_at(&self, point: &[C64]) -> Result<DMatrix<C64>> {
        if point.len() != self.n {
            return Err(HscError::DimensionMismatch { expected: self.n, got: point.len() });
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entries[i][j].eval(point, SINGULAR_EPS)?;
            }
        }
        Ok(m)
    }

    /// Check Hermitian symmetry and positive definiteness at `samples`
    /// uniform points of the chart box.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<ValidationReport> {
        if samples == 0 {
            return Err(HscError::InvalidArgument("validation needs at least one sample".into()));
        }
        let mut rng = rng::stream(seed, 0x7661_6c69);
        let mut report = ValidationReport {
            samples,
            seed,
            worst_hermitian_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
        };
        for _ in 0..samples {
            let p = self.domain.sample(&mut rng);
            let (defect, min_eig) = self.check_point(&p)?;
            report.worst_hermitian_defect = report.worst_hermitian_defect.max(defect);
            report.min_eigenvalue = report.min_eigenvalue.min(min_eig);
        }
        Ok(report)
    }

    /// Hermitian defect and smallest eigenvalue at one point; errors if either check fails.
    pub fn check_point(&self, p: &[C64]) -> Result<(f64, f64)> {
        let m = self.matrix_at(p)?;
        let defect = hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(HscError::HermitianDefect { name: self.name.clone(), point: p.to_vec(), defect });
        }
        let min_eig = min_eigenvalue(&m);
        if !(min_eig > PD_TOL) {
            return Err(HscError::NotPositiveDefinite {
                name: self.name.clone(),
                point: p.to_vec(),
                min_eigenvalue: min_eig,
            });
        }
        Ok((defect, min_eig))
    }

    pub fn to_file(&self) -> MetricFile {
        MetricFile {
            name: self.name.clone(),
            n: self.n,
            entries: self.entries.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect(),
            domain: self.domain.0.clone(),
        }
    }

    pub fn from_file(file: &MetricFile) -> Result<Self> {
        if file.entries.len() != file.n {
            return Err(HscError::DimensionMismatch { expected: file.n, got: file.entries.len() });
        }
        let rows: Vec<Vec<&str>> =
            file.entries.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
        Self::parse(file.name.clone(), &rows, ChartBox(file.domain.clone()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MetricFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }
}

/// On-disk metric description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    pub name: String,
    pub n: usize,
    pub entries: Vec<Vec<String>>,
    #[serde(rename = "box")]
    pub domain: Vec<CoordDomain>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    pub worst_hermitian_defect: f64,
    pub min_eigenvalue: f64,
}

pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_metric_validates() {
        let spec = MetricSpec::parse("flat", &[vec!["1", "0"], vec!["0", "1"]], ChartBox::polydisk(2, 1.0)).unwrap();
        let r = spec.validate(50, 3).unwrap();
        assert_eq!(r.worst_hermitian_defect, 0.0);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_real_diagonal_is_rejected() {
        let spec = MetricSpec::parse("bad", &[vec!["z1"]], ChartBox::polydisk(1, 0.95)).unwrap();
        assert!(matches!(spec.validate(10, 0), Err(HscError::HermitianDefect { .. })));
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let spec = MetricSpec::parse("neg", &[vec!["1", "0"], vec!["0", "-1"]], ChartBox::polydisk(2, 0.5)).unwrap();
        match spec.validate(5, 0) {
            Err(HscError::NotPositiveDefinite { min_eigenvalue, point, .. }) => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-14);
                assert_eq!(point.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn entry_shape_errors() {
        assert!(matches!(
            MetricSpec::parse("x", &[vec!["1", "0"], vec!["0"]], ChartBox::polydisk(2, 0.5)),
            Err(HscError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            MetricSpec::parse("x", &[vec!["z2"]], ChartBox::polydisk(1, 0.5)),
            Err(HscError::VariableOutOfRange { index: 2, dim: 1 })
        ));
    }

    #[test]
    fn json_accepts_rect_and_disk_boxes() {
        let text = r#"{"name":"m","n":2,
            "entries":[["1+z1*conj(z1)","0"],["0","2.5"]],
            "box":[{"re":[-0.5,0.5],"im":[-0.25,0.25]},{"radius":0.9}]}"#;
        let spec = MetricSpec::from_json(text).unwrap();
        assert_eq!(spec.dim(), 2);
        assert_eq!(spec.domain().0[1], CoordDomain::Disk { radius: 0.9 });
        assert!(spec.validate(100, 1).is_ok());
        let again = MetricSpec::from_file(&spec.to_file()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn disk_grid_includes_origin_and_rim() {
        let g = CoordDomain::disk(0.95).grid(9);
        assert_eq!(g.len(), 1 + 8 * 9);
        assert_eq!(g[0], C64::new(0.0, 0.0));
        assert!(g.iter().any(|z| (z.norm() - 0.95).abs() < 1e-15));
        assert!(g.iter().all(|z| z.norm() <= 0.95 + 1e-15));
    }
}
