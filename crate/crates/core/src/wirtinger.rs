//! Second-order Wirtinger jets.
//!
//! A [`Jet2`] carries the value of a function of `z_1..z_n` (and their
//! conjugates, treated as independent variables) together with `∂f/∂z_k`,
//! `∂f/∂z̄_l` and the mixed second derivatives `∂²f/∂z_k∂z̄_l`. Pure
//! second derivatives (`∂²/∂z_k∂z_m`, `∂²/∂z̄_k∂z̄_m`) are not carried: the
//! curvature formula only consumes mixed ones, and the truncation is closed
//! under every operation below.
//!
//! [`fd_jet`] rebuilds the same slots from point evaluations with central
//! differences in the real coordinates `x_k`, `y_k`. It shares no code with
//! the jet arithmetic and serves as its oracle.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{HscError, Result, C64};

/// Default singularity threshold on the modulus of a denominator.
pub const SINGULAR_EPS: f64 = 1e-12;

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Which coordinate function a jet is seeded from (0-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Z(usize),
    ZBar(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: C64,
    d: Vec<C64>,
    dbar: Vec<C64>,
    /// Row-major `n × n`; entry `(k, l)` is `∂²f/∂z_k∂z̄_l`.
    ddbar: Vec<C64>,
}

impl Jet2 {
    pub fn constant(n: usize, value: C64) -> Self {
        Self {
            value,
            d: vec![C64::new(0.0, 0.0); n],
            dbar: vec![C64::new(0.0, 0.0); n],
            ddbar: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    /// Jet of the coordinate function `z_k` (or `z̄_k`) at `point`.
    pub fn seed(point: &[C64], which: Var) -> Result<Self> {
        let n = point.len();
        let mut jet = Self::constant(n, C64::new(0.0, 0.0));
        match which {
            Var::Z(k) => {
                check_index(k, n)?;
                jet.value = point[k];
                jet.d[k] = C64::new(1.0, 0.0);
            }
            Var::ZBar(k) => {
                check_index(k, n)?;
                jet.value = point[k].conj();
                jet.dbar[k] = C64::new(1.0, 0.0);
            }
        }
        Ok(jet)
    }

    /// Assemble a jet from raw slots. `ddbar` is row-major `n × n`.
    pub fn from_parts(value: C64, d: Vec<C64>, dbar: Vec<C64>, ddbar: Vec<C64>) -> Result<Self> {
        let n = d.len();
        if dbar.len() != n {
            return Err(HscError::DimensionMismatch { expected: n, got: dbar.len() });
        }
        if ddbar.len() != n * n {
            return Err(HscError::DimensionMismatch { expected: n * n, got: ddbar.len() });
        }
        Ok(Self { value, d, dbar, ddbar })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    /// `∂f/∂z_k` for every `k`.
    pub fn d(&self) -> &[C64] {
        &self.d
    }

    /// `∂f/∂z̄_l` for every `l`.
    pub fn dbar(&self) -> &[C64] {
        &self.dbar
    }

    /// `∂²f/∂z_k∂z̄_l`.
    pub fn ddbar(&self, k: usize, l: usize) -> C64 {
        self.ddbar[k * self.dim() + l]
    }

    pub fn ddbar_slice(&self) -> &[C64] {
        &self.ddbar
    }

    /// Largest deviation from the real-function invariants: real value,
    /// `dbar = conj(d)`, Hermitian `ddbar`.
    pub fn real_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = self.value.im.abs();
        for k in 0..n {
            worst = worst.max((self.dbar[k] - self.d[k].conj()).norm());
            for l in 0..n {
                worst = worst.max((self.ddbar(k, l) - self.ddbar(l, k).conj()).norm());
            }
        }
        worst
    }

    pub fn conj(&self) -> Self {
        let n = self.dim();
        let mut ddbar = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for l in 0..n {
                ddbar[k * n + l] = self.ddbar(l, k).conj();
            }
        }
        Self {
            value: self.value.conj(),
            d: self.dbar.iter().map(|c| c.conj()).collect(),
            dbar: self.d.iter().map(|c| c.conj()).collect(),
            ddbar,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            value: self.value * c,
            d: self.d.iter().map(|x| x * c).collect(),
            dbar: self.dbar.iter().map(|x| x * c).collect(),
            ddbar: self.ddbar.iter().map(|x| x * c).collect(),
        }
    }

    /// Compose with a holomorphic scalar function `φ`, given `φ(v)`, `φ'(v)`, `φ''(v)`.
    ///
    /// `(φ∘f)_{kl̄} = φ'(f)·f_{kl̄} + φ''(f)·f_k·f_{l̄}`.
    fn compose(&self, phi: C64, dphi: C64, ddphi: C64) -> Self {
        let n = self.dim();
        let mut ddbar = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                ddbar.push(dphi * self.ddbar(k, l) + ddphi * self.d[k] * self.dbar[l]);
            }
        }
        Self {
            value: phi,
            d: self.d.iter().map(|x| dphi * x).collect(),
            dbar: self.dbar.iter().map(|x| dphi * x).collect(),
            ddbar,
        }
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn recip(&self, eps: f64) -> Result<Self> {
        let modulus = self.value.norm();
        if modulus < eps {
            return Err(HscError::Singular { modulus, eps });
        }
        let r = self.value.inv();
        Ok(self.compose(r, -r * r, 2.0 * r * r * r))
    }

    pub fn checked_div(&self, rhs: &Self, eps: f64) -> Result<Self> {
        Ok(self * &rhs.recip(eps)?)
    }

    /// Integer power by repeated squaring; negative exponents go through [`Jet2::recip`].
    pub fn powi(&self, exponent: i32, eps: f64) -> Result<Self> {
        let mut e = exponent.unsigned_abs();
        let mut base = self.clone();
        let mut acc = Self::constant(self.dim(), C64::new(1.0, 0.0));
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        if exponent < 0 {
            acc.recip(eps)
        } else {
            Ok(acc)
        }
    }

    fn zip(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        Self {
            value: f(self.value, rhs.value),
            d: self.d.iter().zip(&rhs.d).map(|(a, b)| f(*a, *b)).collect(),
            dbar: self.dbar.iter().zip(&rhs.dbar).map(|(a, b)| f(*a, *b)).collect(),
            ddbar: self.ddbar.iter().zip(&rhs.ddbar).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

fn check_index(k: usize, n: usize) -> Result<()> {
    if k >= n {
        Err(HscError::IndexOutOfRange { index: k, dim: n })
    } else {
        Ok(())
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    /// Leibniz rule, mixed slot: `(fg)_{kl̄} = f_{kl̄}g + f_k g_{l̄} + f_{l̄} g_k + f g_{kl̄}`.
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        assert_eq!(n, rhs.dim(), "jet dimension mismatch");
        let (f, g) = (self.value, rhs.value);
        let mut ddbar = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                ddbar.push(
                    self.ddbar(k, l) * g
                        + self.d[k] * rhs.dbar[l]
                        + self.dbar[l] * rhs.d[k]
                        + f * rhs.ddbar(k, l),
                );
            }
        }
        Jet2 {
            value: f * g,
            d: (0..n).map(|k| self.d[k] * g + f * rhs.d[k]).collect(),
            dbar: (0..n).map(|k| self.dbar[k] * g + f * rhs.dbar[k]).collect(),
            ddbar,
        }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        -&self
    }
}

/// Central-difference estimate of every [`Jet2`] slot of `f` at `point`.
///
/// First derivatives use `(f(p+h e) − f(p−h e)) / 2h` in each real direction;
/// second partials use the four-point stencil with offsets `±h` along each
/// pair of real directions (so the diagonal case reaches `±2h`). Wirtinger
/// slots follow from `∂/∂z = (∂_x − i∂_y)/2` and `∂/∂z̄ = (∂_x + i∂_y)/2`.
pub fn fd_jet<F>(f: F, point: &[C64], h: f64) -> Jet2
where
    F: Fn(&[C64]) -> C64,
{
    let n = point.len();
    let i = C64::new(0.0, 1.0);
    // Real direction r: coordinate r / 2, real part if r is even.
    let unit = |r: usize| -> (usize, C64) {
        if r % 2 == 0 {
            (r / 2, C64::new(1.0, 0.0))
        } else {
            (r / 2, i)
        }
    };
    let eval_at = |shifts: &[(usize, f64)]| -> C64 {
        let mut p = point.to_vec();
        for &(r, t) in shifts {
            let (k, dir) = unit(r);
            p[k] += dir * t;
        }
        f(&p)
    };

    let value = f(point);
    let m = 2 * n;
    let grad: Vec<C64> = (0..m)
        .map(|r| (eval_at(&[(r, h)]) - eval_at(&[(r, -h)])) / (2.0 * h))
        .collect();
    let mut hess = vec![C64::new(0.0, 0.0); m * m];
    for a in 0..m {
        for b in a..m {
            let v = (eval_at(&[(a, h), (b, h)]) - eval_at(&[(a, h), (b, -h)])
                - eval_at(&[(a, -h), (b, h)])
                + eval_at(&[(a, -h), (b, -h)]))
                / (4.0 * h * h);
            hess[a * m + b] = v;
            hess[b * m + a] = v;
        }
    }

    let d = (0..n).map(|k| (grad[2 * k] - i * grad[2 * k + 1]) / 2.0).collect();
    let dbar = (0..n).map(|k| (grad[2 * k] + i * grad[2 * k + 1]) / 2.0).collect();
    let mut ddbar = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let (xk, yk, xl, yl) = (2 * k, 2 * k + 1, 2 * l, 2 * l + 1);
            // (∂x_k − i∂y_k)(∂x_l + i∂y_l) / 4
            let v = (hess[xk * m + xl] + i * hess[xk * m + yl] - i * hess[yk * m + xl]
                + hess[yk * m + yl])
                / 4.0;
            ddbar.push(v);
        }
    }
    Jet2 { value, d, dbar, ddbar }
}

/// Richardson combination `(4·D(h) − D(2h))/3` of two [`fd_jet`] stencils,
/// cancelling the `h²` truncation term.
pub fn fd_jet_extrapolated<F>(f: F, point: &[C64], h: f64) -> Jet2
where
    F: Fn(&[C64]) -> C64,
{
    let fine = fd_jet(&f, point, h);
    let coarse = fd_jet(&f, point, 2.0 * h);
    &fine.scale(C64::new(4.0 / 3.0, 0.0)) - &coarse.scale(C64::new(1.0 / 3.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn seed_coordinate_functions() {
        let j = Jet2::seed(&[c(0.0, 0.0)], Var::Z(0)).unwrap();
        assert_eq!(j.value(), c(0.0, 0.0));
        assert_eq!(j.d(), &[c(1.0, 0.0)]);
        assert_eq!(j.dbar(), &[c(0.0, 0.0)]);
        assert_eq!(j.ddbar(0, 0), c(0.0, 0.0));

        let j = Jet2::seed(&[c(2.0, 1.0)], Var::ZBar(0)).unwrap();
        assert_eq!(j.value(), c(2.0, -1.0));
        assert_eq!(j.d(), &[c(0.0, 0.0)]);
        assert_eq!(j.dbar(), &[c(1.0, 0.0)]);

        let j = Jet2::seed(&[c(1.0, 0.0), c(0.0, 1.0)], Var::Z(1)).unwrap();
        assert_eq!(j.value(), c(0.0, 1.0));
        assert_eq!(j.d(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(j.dbar(), &[c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn seed_rejects_bad_index() {
        assert!(matches!(
            Jet2::seed(&[c(0.0, 0.0)], Var::ZBar(1)),
            Err(HscError::IndexOutOfRange { index: 1, dim: 1 })
        ));
    }

    #[test]
    fn modulus_squared_at_origin() {
        let p = [c(0.0, 0.0)];
        let z = Jet2::seed(&p, Var::Z(0)).unwrap();
        let r = &z * &z.conj();
        assert_eq!(r.value(), c(0.0, 0.0));
        assert_eq!(r.d(), &[c(0.0, 0.0)]);
        assert_eq!(r.dbar(), &[c(0.0, 0.0)]);
        assert_eq!(r.ddbar(0, 0), c(1.0, 0.0));
    }

    #[test]
    fn modulus_squared_matches_fd() {
        let p = [c(0.7, -0.4)];
        let z = Jet2::seed(&p, Var::Z(0)).unwrap();
        let r = &z * &z.conj();
        let fd = fd_jet(|q| q[0] * q[0].conj(), &p, FD_STEP);
        assert!(close(r.value(), c(0.65, 0.0), 1e-15));
        assert!(close(r.d()[0], p[0].conj(), 1e-15));
        assert!(close(r.dbar()[0], p[0], 1e-15));
        assert!(close(r.ddbar(0, 0), c(1.0, 0.0), 1e-15));
        assert!(close(r.d()[0], fd.d()[0], 1e-8));
        assert!(close(r.dbar()[0], fd.dbar()[0], 1e-8));
        assert!(close(r.ddbar(0, 0), fd.ddbar(0, 0), 1e-6));
    }

    #[test]
    fn exp_of_modulus_squared() {
        let p = [c(0.0, 0.0)];
        let z = Jet2::seed(&p, Var::Z(0)).unwrap();
        let e = (&z * &z.conj()).exp();
        assert!(close(e.value(), c(1.0, 0.0), 1e-15));
        assert!(close(e.d()[0], c(0.0, 0.0), 1e-15));
        assert!(close(e.ddbar(0, 0), c(1.0, 0.0), 1e-15));

        let p = [c(0.5, 0.0)];
        let z = Jet2::seed(&p, Var::Z(0)).unwrap();
        let e = (&z * &z.conj()).exp();
        let fd = fd_jet(|q| (q[0] * q[0].conj()).exp(), &p, FD_STEP);
        let rel = |a: C64, b: C64| (a - b).norm() / b.norm().max(1e-300);
        assert!(rel(fd.value(), e.value()) < 1e-12);
        assert!(rel(fd.d()[0], e.d()[0]) < 1e-6);
        assert!(rel(fd.ddbar(0, 0), e.ddbar(0, 0)) < 1e-6);
    }

    #[test]
    fn fd_of_constant_is_flat() {
        let p = [c(0.3, 0.2), c(-0.1, 0.4)];
        let fd = fd_jet(|_| c(5.0, 0.0), &p, FD_STEP);
        assert_eq!(fd.value(), c(5.0, 0.0));
        for k in 0..2 {
            assert!(fd.d()[k].norm() < 1e-10);
            assert!(fd.dbar()[k].norm() < 1e-10);
            for l in 0..2 {
                assert!(fd.ddbar(k, l).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn fd_modulus_squared_at_one() {
        let fd = fd_jet(|q| q[0] * q[0].conj(), &[c(1.0, 0.0)], 1e-4);
        assert!(close(fd.ddbar(0, 0), c(1.0, 0.0), 1e-6));
    }

    #[test]
    fn division_by_tiny_value_is_singular() {
        let p = [c(0.0, 0.0)];
        let z = Jet2::seed(&p, Var::Z(0)).unwrap();
        let one = Jet2::constant(1, c(1.0, 0.0));
        assert!(matches!(
            one.checked_div(&z, SINGULAR_EPS),
            Err(HscError::Singular { .. })
        ));
        assert!(matches!(z.powi(-2, SINGULAR_EPS), Err(HscError::Singular { .. })));
    }

    #[test]
    fn negative_power_matches_quotient() {
        let p = [c(0.3, 0.1), c(0.2, -0.5)];
        let z1 = Jet2::seed(&p, Var::Z(0)).unwrap();
        let w2 = Jet2::seed(&p, Var::ZBar(1)).unwrap();
        let one = Jet2::constant(2, c(1.0, 0.0));
        let base = &(&one + &(&z1 * &w2)) + &z1.conj();
        let a = base.powi(-3, SINGULAR_EPS).unwrap();
        let cube = &(&base * &base) * &base;
        let b = one.checked_div(&cube, SINGULAR_EPS).unwrap();
        assert!(close(a.value(), b.value(), 1e-13));
        for k in 0..2 {
            assert!(close(a.d()[k], b.d()[k], 1e-12));
            assert!(close(a.dbar()[k], b.dbar()[k], 1e-12));
            for l in 0..2 {
                assert!(close(a.ddbar(k, l), b.ddbar(k, l), 1e-12));
            }
        }
        assert_eq!(base.powi(0, SINGULAR_EPS).unwrap(), Jet2::constant(2, c(1.0, 0.0)));
    }

    #[test]
    fn product_with_own_conjugate_is_real() {
        let p = [c(0.3, 0.1), c(-0.6, 0.2)];
        let z1 = Jet2::seed(&p, Var::Z(0)).unwrap();
        let z2b = Jet2::seed(&p, Var::ZBar(1)).unwrap();
        let f = (&(&z1 * &z2b) + &z1.exp()).powi(2, SINGULAR_EPS).unwrap();
        let r = &f * &f.conj();
        assert!(r.real_defect() < 1e-13);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_point() -> impl Strategy<Value = Vec<C64>> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2)
                .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
        }

        proptest! {
            #[test]
            fn conj_is_an_involution(p in arb_point(), a in -2.0f64..2.0) {
                let z1 = Jet2::seed(&p, Var::Z(0)).unwrap();
                let z2b = Jet2::seed(&p, Var::ZBar(1)).unwrap();
                let f = (&(&z1 * &z2b).scale(C64::new(a, 0.5)) + &z1).exp();
                prop_assert_eq!(f.conj().conj(), f);
            }
        }
    }

    #[test]
    fn extrapolation_beats_plain_differences_near_a_pole() {
        // 1/(1−z z̄)² at |z| = 0.95: ∂∂̄ = (2 + 4|z|²)/(1−|z|²)⁴
        let p = [c(0.95, 0.0)];
        let f = |q: &[C64]| (C64::new(1.0, 0.0) - q[0] * q[0].conj()).powi(-2);
        let r = 0.95f64 * 0.95;
        let exact = (2.0 + 4.0 * r) / (1.0 - r).powi(4);
        let plain = (fd_jet(f, &p, FD_STEP).ddbar(0, 0).re - exact).abs() / exact;
        let rich = (fd_jet_extrapolated(f, &p, FD_STEP).ddbar(0, 0).re - exact).abs() / exact;
        assert!(rich < 1e-7 && rich < plain, "{plain:e} {rich:e}");
    }
}
