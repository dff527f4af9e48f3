//! Jets `(a, u)`, dual jets, the jet derivatives `nabla_{i,u}` and the
//! multilinear variations `Delta_l` of the Euler-Lagrange operator.

use crate::error::{Error, Result};
use crate::lagrangian::{lag_phi_deriv, LatticeDerivs, ModelParams, MAX_DERIV_ORDER};
use crate::space::{LatticePoint, Region, Site, Window, STENCIL};

/// Largest `l` accepted by [`delta_ell`].
pub const MAX_ELL: usize = 4;

/// A real function on the lattice sites of a window, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    window: Window,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(window: Window) -> Self {
        Field {
            window,
            data: vec![0.0; window.len()],
        }
    }

    pub fn from_fn(window: Window, f: impl Fn(Site) -> f64) -> Self {
        Field {
            window,
            data: window.sites().map(f).collect(),
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Value at a site, `None` outside the window.
    pub fn get(&self, s: Site) -> Option<f64> {
        self.window.index(s).map(|i| self.data[i])
    }

    /// Value at a site, extended by zero outside the window.
    #[inline]
    pub fn at(&self, s: Site) -> f64 {
        match self.window.index(s) {
            Some(i) => self.data[i],
            None => 0.0,
        }
    }

    #[inline]
    pub(crate) fn at_unchecked(&self, s: Site) -> f64 {
        self.data[self.window.index_unchecked(s)]
    }

    pub fn set(&mut self, s: Site, v: f64) {
        let i = self
            .window
            .index(s)
            .unwrap_or_else(|| panic!("site {s:?} outside window"));
        self.data[i] = v;
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            window: self.window,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Field) {
        assert_eq!(self.window, other.window, "fields on different windows");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn sum_over(&self, region: &Region) -> f64 {
        region.iter().map(|s| self.at(s)).sum()
    }

    /// Sum over the slice `x^0 = t`.
    pub fn slice_sum(&self, t: i64) -> f64 {
        (self.window.x_min..=self.window.x_max)
            .map(|x| self.at(Site::new(t, x)))
            .sum()
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.window, other.window, "fields on different windows");
        Field {
            window: self.window,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

/// A one-jet `(a, u)` with `u = (u_const, u_phi)`.
///
/// The constant part `u_const` is carried along but never differentiated:
/// on the lattice only the fiber direction is differentiable.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub a: Field,
    pub u_const: (f64, f64),
    pub u_phi: Field,
}

impl Jet {
    pub fn new(a: Field, u_phi: Field) -> Self {
        assert_eq!(a.window(), u_phi.window(), "jet components on different windows");
        Jet {
            a,
            u_const: (0.0, 0.0),
            u_phi,
        }
    }

    pub fn zero(window: Window) -> Self {
        Jet::new(Field::zeros(window), Field::zeros(window))
    }

    pub fn scalar(a: Field) -> Self {
        let w = *a.window();
        Jet::new(a, Field::zeros(w))
    }

    pub fn vector(u_phi: Field) -> Self {
        let w = *u_phi.window();
        Jet::new(Field::zeros(w), u_phi)
    }

    pub fn window(&self) -> &Window {
        self.a.window()
    }

    pub fn scaled(&self, c: f64) -> Jet {
        Jet {
            a: self.a.scaled(c),
            u_const: (c * self.u_const.0, c * self.u_const.1),
            u_phi: self.u_phi.scaled(c),
        }
    }

    pub fn axpy(&mut self, c: f64, other: &Jet) {
        self.a.axpy(c, &other.a);
        self.u_phi.axpy(c, &other.u_phi);
        self.u_const.0 += c * other.u_const.0;
        self.u_const.1 += c * other.u_const.1;
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.u_phi.is_zero() && self.u_const == (0.0, 0.0)
    }

    /// Member of the test jets: no constant vector part.
    pub fn is_test(&self) -> bool {
        self.u_const == (0.0, 0.0)
    }
}

/// A dual jet, stored by the components that pair with test jets.
#[derive(Debug, Clone, PartialEq)]
pub struct DualJet {
    pub b: Field,
    pub w_phi: Field,
}

impl DualJet {
    pub fn new(b: Field, w_phi: Field) -> Self {
        assert_eq!(b.window(), w_phi.window(), "dual jet components on different windows");
        DualJet { b, w_phi }
    }

    pub fn zero(window: Window) -> Self {
        DualJet::new(Field::zeros(window), Field::zeros(window))
    }

    pub fn window(&self) -> &Window {
        self.b.window()
    }

    pub fn scaled(&self, c: f64) -> DualJet {
        DualJet::new(self.b.scaled(c), self.w_phi.scaled(c))
    }

    pub fn axpy(&mut self, c: f64, other: &DualJet) {
        self.b.axpy(c, &other.b);
        self.w_phi.axpy(c, &other.w_phi);
    }

    pub fn is_zero(&self) -> bool {
        self.b.is_zero() && self.w_phi.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.b.max_abs().max(self.w_phi.max_abs())
    }

    /// `sum_x (b b' + w_phi w_phi')`, the pairing used by kernel modifiers.
    pub fn dot(&self, other: &DualJet) -> f64 {
        let mut s = 0.0;
        for (x, y) in self.b.data().iter().zip(other.b.data()) {
            s += x * y;
        }
        for (x, y) in self.w_phi.data().iter().zip(other.w_phi.data()) {
            s += x * y;
        }
        s
    }
}

/// Value of a dual jet at one point: pairing with `(1, 0)` and with `(0, e_phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualValue {
    pub scalar: f64,
    pub phi: f64,
}

/// Argument slot of `L(x, y)` a jet derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

/// `nabla_{1,u}` or `nabla_{2,u}`.
#[derive(Debug, Clone, Copy)]
pub struct PointDeriv<'a> {
    pub slot: Slot,
    pub jet: &'a Jet,
}

impl<'a> PointDeriv<'a> {
    pub fn first(jet: &'a Jet) -> Self {
        PointDeriv {
            slot: Slot::First,
            jet,
        }
    }

    pub fn second(jet: &'a Jet) -> Self {
        PointDeriv {
            slot: Slot::Second,
            jet,
        }
    }
}

const NP: usize = MAX_DERIV_ORDER + 1;

/// Polynomial in the commuting symbols `D_x = d/dx^phi`, `D_y = d/dy^phi`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DerivPoly {
    c: [[f64; NP]; NP],
    deg: usize,
}

impl DerivPoly {
    pub(crate) fn one() -> Self {
        let mut c = [[0.0; NP]; NP];
        c[0][0] = 1.0;
        DerivPoly { c, deg: 0 }
    }

    /// Multiplies by `a + ux D_x + uy D_y`.
    pub(crate) fn mul_linear(&mut self, a: f64, ux: f64, uy: f64) {
        let d = self.deg + 1;
        assert!(d < NP, "derivative order exceeds the supported maximum");
        for tot in (0..=d).rev() {
            for i in 0..=tot {
                let j = tot - i;
                let mut v = if tot <= self.deg { a * self.c[i][j] } else { 0.0 };
                if i > 0 {
                    v += ux * self.c[i - 1][j];
                }
                if j > 0 {
                    v += uy * self.c[i][j - 1];
                }
                self.c[i][j] = v;
            }
        }
        self.deg = d;
    }

    /// `sum_{ij} c_ij L_{ij}` with `L_{ij}` supplied by `deriv(i, j)`.
    pub(crate) fn contract(&self, mut deriv: impl FnMut(usize, usize) -> f64) -> f64 {
        let mut s = 0.0;
        for tot in 0..=self.deg {
            for i in 0..=tot {
                let c = self.c[i][tot - i];
                if c != 0.0 {
                    s += c * deriv(i, tot - i);
                }
            }
        }
        s
    }
}

fn check_field_site(jet: &Jet, s: Site) -> Result<()> {
    if jet.window().contains(s) {
        Ok(())
    } else {
        Err(Error::Domain(format!("jet undefined at {s:?}")))
    }
}

/// Applies an ordered product of jet derivatives to `L(x, y)`.
pub fn nabla_l(
    derivs: &[PointDeriv],
    x: &LatticePoint,
    y: &LatticePoint,
    p: &ModelParams,
) -> Result<f64> {
    if derivs.len() > MAX_DERIV_ORDER {
        return Err(Error::UnsupportedOrder {
            order: derivs.len(),
            max: MAX_DERIV_ORDER,
        });
    }
    let (sx, sy) = (x.site(), y.site());
    let mut poly = DerivPoly::one();
    for d in derivs {
        match d.slot {
            Slot::First => {
                check_field_site(d.jet, sx)?;
                poly.mul_linear(d.jet.a.at(sx), d.jet.u_phi.at(sx), 0.0);
            }
            Slot::Second => {
                check_field_site(d.jet, sy)?;
                poly.mul_linear(d.jet.a.at(sy), 0.0, d.jet.u_phi.at(sy));
            }
        }
    }
    let mut err = None;
    let v = poly.contract(|i, j| match lag_phi_deriv(p, x, y, i, j) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_ELL {
        Err(Error::UnsupportedOrder {
            order,
            max: MAX_ELL,
        })
    } else {
        Ok(())
    }
}

fn common_window(jets: &[&Jet]) -> Result<Window> {
    let w = *jets[0].window();
    if jets.iter().any(|j| *j.window() != w) {
        return Err(Error::InvalidInput("jets live on different windows".into()));
    }
    Ok(w)
}

// Delta_l at an interior site; no checks.
fn delta_ell_at(
    jets: &[&Jet],
    x: Site,
    p: &ModelParams,
    table: &LatticeDerivs,
    inv_fact: f64,
) -> DualValue {
    let mut scalar = 0.0;
    let mut phi = 0.0;
    for (k, off) in STENCIL.iter().enumerate() {
        let y = x.shift(*off);
        let mut poly = DerivPoly::one();
        for j in jets {
            poly.mul_linear(
                j.a.at_unchecked(x) + j.a.at_unchecked(y),
                j.u_phi.at_unchecked(x),
                j.u_phi.at_unchecked(y),
            );
        }
        scalar += poly.contract(|i, l| table.mixed(k, i, l));
        phi += poly.contract(|i, l| table.mixed(k, i + 1, l));
    }
    let prod: f64 = jets.iter().map(|j| j.a.at_unchecked(x)).product();
    DualValue {
        scalar: inv_fact * (scalar - 0.5 * p.nu * prod),
        phi: inv_fact * phi,
    }
}

/// `Delta_l[v_1, ..., v_l](x)` from the jet-derivative expansion.
pub fn delta_ell(
    order: usize,
    jets: &[&Jet],
    x: Site,
    p: &ModelParams,
    window: &Window,
) -> Result<DualValue> {
    check_order(order)?;
    if jets.len() != order {
        return Err(Error::InvalidInput(format!(
            "Delta_{order} needs {order} jets, got {}",
            jets.len()
        )));
    }
    let w = common_window(jets)?;
    if w != *window {
        return Err(Error::InvalidInput("jets do not live on the given window".into()));
    }
    if !window.is_interior(x, 1) {
        return Err(Error::Range(format!("{x:?} is not an interior site")));
    }
    let table = LatticeDerivs::new(p);
    Ok(delta_ell_at(jets, x, p, &table, 1.0 / factorial(order)))
}

/// `Delta_l[v_1, ..., v_l]` on every interior site; zero on the window edge.
pub fn delta_ell_field(order: usize, jets: &[&Jet], p: &ModelParams) -> Result<DualJet> {
    check_order(order)?;
    if jets.len() != order {
        return Err(Error::InvalidInput(format!(
            "Delta_{order} needs {order} jets, got {}",
            jets.len()
        )));
    }
    let w = common_window(jets)?;
    let table = LatticeDerivs::new(p);
    let inv_fact = 1.0 / factorial(order);
    let mut out = DualJet::zero(w);
    for x in w.sites().filter(|s| w.is_interior(*s, 1)) {
        let v = delta_ell_at(jets, x, p, &table, inv_fact);
        let i = w.index_unchecked(x);
        out.b.data_mut()[i] = v.scalar;
        out.w_phi.data_mut()[i] = v.phi;
    }
    Ok(out)
}

/// Scalar part of `Delta_2[u, v]` for jets without scalar parts:
/// `1/2 sum_y u(y) v(y) f(x - y)`. Zero on the window edge.
pub fn delta2_closed_form(u: &Jet, v: &Jet) -> Result<Field> {
    let w = common_window(&[u, v])?;
    let mut out = Field::zeros(w);
    for x in w.sites().filter(|s| w.is_interior(*s, 1)) {
        let mut acc = 0.0;
        for off in STENCIL {
            let y = x.shift(off);
            acc += u.u_phi.at_unchecked(y) * v.u_phi.at_unchecked(y) * off.f();
        }
        out.set(x, 0.5 * acc);
    }
    Ok(out)
}

/// Combination of slot derivatives applied by one factor of a surface term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOp {
    /// `nabla_{1,u}`
    First,
    /// `nabla_{2,u}`
    Second,
    /// `nabla_{1,u} + nabla_{2,u}`
    Plus,
    /// `nabla_{1,u} - nabla_{2,u}`
    Minus,
}

/// Position of `y - x` in [`STENCIL`].
pub fn stencil_index(x: Site, y: Site) -> Option<usize> {
    let (dt, dx) = (y.t - x.t, y.x - x.x);
    STENCIL.iter().position(|o| o.dt == dt && o.dx == dx)
}

/// `prod_i op_i(u_i) L(x, y)` for on-lattice `x`, `y` (zero off the stencil).
///
/// Jets are read with zero extension outside their window.
pub fn pair_term(factors: &[(PairOp, &Jet)], x: Site, y: Site, table: &LatticeDerivs) -> f64 {
    let Some(k) = stencil_index(x, y) else {
        return 0.0;
    };
    let mut poly = DerivPoly::one();
    for (op, j) in factors {
        let (ax, ay) = (j.a.at(x), j.a.at(y));
        let (ux, uy) = (j.u_phi.at(x), j.u_phi.at(y));
        match op {
            PairOp::First => poly.mul_linear(ax, ux, 0.0),
            PairOp::Second => poly.mul_linear(ay, 0.0, uy),
            PairOp::Plus => poly.mul_linear(ax + ay, ux, uy),
            PairOp::Minus => poly.mul_linear(ax - ay, ux, -uy),
        }
    }
    poly.contract(|i, l| table.mixed(k, i, l))
}

fn delta_op_at(v: &Jet, x: Site, p: &ModelParams) -> DualValue {
    let b = |s: Site| v.a.at_unchecked(s);
    let up = Site::new(x.t + 1, x.x);
    let dn = Site::new(x.t - 1, x.x);
    let scalar = (p.lambda_a + 2.0 * p.lambda_i - 0.5 * p.nu) * b(x)
        + p.lambda_a * b(x)
        + p.lambda_i * (b(up) + b(dn));
    let mut wave = 0.0;
    for off in STENCIL {
        let y = x.shift(off);
        wave += v.u_phi.at_unchecked(y) * off.f();
    }
    DualValue {
        scalar,
        phi: -wave,
    }
}

/// The linearized operator `Delta = Delta_1` in closed form.
pub fn delta_op(v: &Jet, x: Site, p: &ModelParams, window: &Window) -> Result<DualValue> {
    if v.window() != window {
        return Err(Error::InvalidInput("jet does not live on the given window".into()));
    }
    if !window.is_interior(x, 1) {
        return Err(Error::Range(format!("{x:?} is not an interior site")));
    }
    Ok(delta_op_at(v, x, p))
}

/// Closed-form `Delta v` on every interior site; zero on the window edge.
pub fn delta_op_field(v: &Jet, p: &ModelParams) -> DualJet {
    let w = *v.window();
    let mut out = DualJet::zero(w);
    for x in w.sites().filter(|s| w.is_interior(*s, 1)) {
        let d = delta_op_at(v, x, p);
        let i = w.index_unchecked(x);
        out.b.data_mut()[i] = d.scalar;
        out.w_phi.data_mut()[i] = d.phi;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> Window {
        Window::centered(6, 8).unwrap()
    }

    fn bumpy(w: Window, seed: u64) -> Field {
        Field::from_fn(w, |s| {
            let h = (s.t * 31 + s.x * 17 + seed as i64 * 7).rem_euclid(13) as f64;
            if w.is_interior(s, 2) {
                h / 13.0 - 0.4
            } else {
                0.0
            }
        })
    }

    #[test]
    fn pure_scalar_derivative_is_multiplication() {
        let p = ModelParams::default();
        let w = window();
        let u = Jet::scalar(bumpy(w, 1));
        let (x, y) = (Site::new(0, 0).point(), Site::new(1, 0).point());
        let got = nabla_l(&[PointDeriv::first(&u)], &x, &y, &p).unwrap();
        assert_eq!(got, u.a.at(Site::new(0, 0)) * 2.0);
    }

    #[test]
    fn mixed_vector_derivative_flips_sign() {
        let p = ModelParams::default();
        let w = window();
        let u = Jet::vector(bumpy(w, 2));
        let v = Jet::vector(bumpy(w, 3));
        let (sx, sy) = (Site::new(0, 0), Site::new(0, 1));
        let got = nabla_l(
            &[PointDeriv::first(&u), PointDeriv::second(&v)],
            &sx.point(),
            &sy.point(),
            &p,
        )
        .unwrap();
        assert_eq!(got, -u.u_phi.at(sx) * v.u_phi.at(sy) * 1.0);
        let swapped = nabla_l(
            &[PointDeriv::second(&v), PointDeriv::first(&u)],
            &sx.point(),
            &sy.point(),
            &p,
        )
        .unwrap();
        assert_eq!(got, swapped);
    }

    #[test]
    fn nabla_outside_window_is_domain_error() {
        let p = ModelParams::default();
        let u = Jet::vector(bumpy(window(), 2));
        let far = Site::new(100, 0).point();
        assert!(matches!(
            nabla_l(&[PointDeriv::first(&u)], &far, &far, &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn delta_one_of_constant_scalar() {
        let p = ModelParams::default();
        let w = window();
        let one = Jet::scalar(Field::from_fn(w, |_| 1.0));
        let v = delta_ell(1, &[&one], Site::new(0, 0), &p, &w).unwrap();
        assert_eq!(v.scalar, 9.0);
        assert_eq!(v.phi, 0.0);
        let c = delta_op(&one, Site::new(0, 0), &p, &w).unwrap();
        assert_eq!(c.scalar, 9.0);
    }

    #[test]
    fn delta_one_matches_closed_form() {
        let p = ModelParams::default();
        let w = window();
        let v = Jet::new(bumpy(w, 4), bumpy(w, 5));
        let a = delta_ell_field(1, &[&v], &p).unwrap();
        let b = delta_op_field(&v, &p);
        let mut diff = a.clone();
        diff.axpy(-1.0, &b);
        assert!(diff.max_abs() <= 1e-12);
    }

    #[test]
    fn delta_zero_jet_and_order_bounds() {
        let p = ModelParams::default();
        let w = window();
        let z = Jet::zero(w);
        let v = delta_ell(1, &[&z], Site::new(0, 0), &p, &w).unwrap();
        assert_eq!(v, DualValue::default());
        assert!(matches!(
            delta_ell(5, &[&z, &z, &z, &z, &z], Site::new(0, 0), &p, &w),
            Err(Error::UnsupportedOrder { order: 5, .. })
        ));
        assert!(delta_ell(1, &[&z], Site::new(6, 0), &p, &w).is_err());
    }

    #[test]
    fn constant_vector_part_is_ignored() {
        let p = ModelParams::default();
        let w = window();
        let v = Jet::new(bumpy(w, 6), bumpy(w, 7));
        let mut shifted = v.clone();
        shifted.u_const = (3.0, -2.0);
        let a = delta_ell_field(2, &[&v, &v], &p).unwrap();
        let b = delta_ell_field(2, &[&shifted, &shifted], &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deriv_poly_binomial() {
        let mut q = DerivPoly::one();
        for _ in 0..3 {
            q.mul_linear(0.0, 1.0, 1.0);
        }
        let coeffs: Vec<f64> = (0..=3).map(|i| q.c[i][3 - i]).collect();
        assert_eq!(coeffs, vec![1.0, 3.0, 3.0, 1.0]);
    }
}
