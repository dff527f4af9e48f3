//! The lattice Lagrangian, its fiber derivatives in closed form, the function
//! `ell` and the Euler-Lagrange check.

use crate::error::{Error, Result};
use crate::space::{LatticePoint, Site, StencilOffset, Window, STENCIL};

/// Highest total fiber-derivative order handled by [`lag_phi_deriv`].
pub const MAX_DERIV_ORDER: usize = 8;

/// Parameters `(lambda_A, lambda_I, delta, epsilon, nu)` of the lattice model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub lambda_a: f64,
    pub lambda_i: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub nu: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::new(5.0, 2.0, 1.0, 0.2).expect("default parameters are admissible")
    }
}

impl ModelParams {
    /// Builds admissible parameters with the Lagrange multiplier at its
    /// Euler-Lagrange value `2 lambda_A + 4 lambda_I`.
    pub fn new(lambda_a: f64, lambda_i: f64, delta: f64, epsilon: f64) -> Result<Self> {
        let p = ModelParams {
            lambda_a,
            lambda_i,
            delta,
            epsilon,
            nu: 2.0 * lambda_a + 4.0 * lambda_i,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn default_nu(&self) -> f64 {
        2.0 * self.lambda_a + 4.0 * self.lambda_i
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.lambda_a,
            self.lambda_i,
            self.delta,
            self.epsilon,
            self.nu,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite model parameter".into()));
        }
        if self.lambda_i < 2.0 {
            return Err(Error::InvalidInput(format!(
                "lambda_I = {} must be >= 2",
                self.lambda_i
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {} must lie in (0, 1/4)",
                self.epsilon
            )));
        }
        if self.lambda_a < 2.0 * self.lambda_i + self.epsilon {
            return Err(Error::InvalidInput(format!(
                "lambda_A = {} must be >= 2 lambda_I + epsilon",
                self.lambda_a
            )));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "delta = {} must be positive",
                self.delta
            )));
        }
        Ok(())
    }
}

/// `V(phi) = 1 - cos(phi)`.
pub fn v_fiber(phi: f64) -> f64 {
    1.0 - phi.cos()
}

// n-th derivative of cos at phi; exact zeros at phi = 0 for odd n.
fn cos_deriv(phi: f64, n: usize) -> f64 {
    match n % 4 {
        0 => phi.cos(),
        1 => -phi.sin(),
        2 => -phi.cos(),
        _ => phi.sin(),
    }
}

/// `d^n/dphi^n V(phi)`.
pub fn v_deriv(phi: f64, n: usize) -> f64 {
    if n == 0 {
        v_fiber(phi)
    } else {
        -cos_deriv(phi, n)
    }
}

/// `d^n/dphi^n V(phi)^2`, using `V^2 = 3/2 - 2 cos(phi) + cos(2 phi)/2`.
pub fn v2_deriv(phi: f64, n: usize) -> f64 {
    if n == 0 {
        let v = v_fiber(phi);
        v * v
    } else {
        -2.0 * cos_deriv(phi, n) + 2f64.powi(n as i32 - 1) * cos_deriv(2.0 * phi, n)
    }
}

/// Indicator weights of the four terms of `L` at a base-point difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermWeights {
    pub chi_a: f64,
    pub chi_i: f64,
    pub f: f64,
    pub chi_b: f64,
}

fn in_ball(d0: f64, d1: f64, c0: f64, c1: f64, r: f64) -> bool {
    (d0 - c0).hypot(d1 - c1) < r
}

/// Evaluates the indicator functions of the open sets `A`, `I`, `B_eps` and
/// the function `f` at a real difference vector.
pub fn term_weights(p: &ModelParams, d0: f64, d1: f64) -> TermWeights {
    let e = p.epsilon;
    let chi = |b: bool| b as u8 as f64;
    TermWeights {
        chi_a: chi(d0.abs() < 1.0 && d1.abs() < 1.0),
        chi_i: chi(d0 * d0 - d1 * d1 > 0.0 && d0.abs() < 1.0 + e),
        f: chi(in_ball(d0, d1, 0.0, 1.0, e)) + chi(in_ball(d0, d1, 0.0, -1.0, e))
            - chi(in_ball(d0, d1, 1.0, 0.0, e))
            - chi(in_ball(d0, d1, -1.0, 0.0, e)),
        chi_b: chi(in_ball(d0, d1, 0.0, 0.0, e)),
    }
}

fn weights_of(p: &ModelParams, x: &LatticePoint, y: &LatticePoint) -> TermWeights {
    let d0 = x.t_coord - y.t_coord;
    let d1 = x.x_coord - y.x_coord;
    if d0.abs() <= 1 && d1.abs() <= 1 {
        let off = StencilOffset::new(d0, d1);
        TermWeights {
            chi_a: off.chi_a(),
            chi_i: off.chi_i(),
            f: off.f(),
            chi_b: off.chi_b(),
        }
    } else {
        term_weights(p, d0 as f64, d1 as f64)
    }
}

// n-th derivative of phi -> L at fixed base points.
fn profile_deriv(p: &ModelParams, w: &TermWeights, phi: f64, n: usize) -> f64 {
    let base = if n == 0 {
        p.lambda_a * w.chi_a + p.lambda_i * w.chi_i
    } else {
        0.0
    };
    let mut out = base;
    if w.f != 0.0 {
        out += w.f * v_deriv(phi, n);
    }
    if w.chi_b != 0.0 {
        out += p.delta * w.chi_b * v2_deriv(phi, n);
    }
    out
}

/// The Lagrangian `L(x, y)`.
pub fn lag_value(p: &ModelParams, x: &LatticePoint, y: &LatticePoint) -> f64 {
    let w = weights_of(p, x, y);
    profile_deriv(p, &w, x.phi - y.phi, 0)
}

/// `d^kx/d(x^phi)^kx d^ky/d(y^phi)^ky L(x, y)` in closed form.
pub fn lag_phi_deriv(
    p: &ModelParams,
    x: &LatticePoint,
    y: &LatticePoint,
    kx: usize,
    ky: usize,
) -> Result<f64> {
    let n = kx + ky;
    if n > MAX_DERIV_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            max: MAX_DERIV_ORDER,
        });
    }
    let w = weights_of(p, x, y);
    let sign = if ky.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * profile_deriv(p, &w, x.phi - y.phi, n))
}

/// Fiber derivatives `g^(n)(0)` of `L` on `M`, tabulated per stencil offset.
///
/// On the support the mixed derivative is `(-1)^ky g^(kx+ky)(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDerivs {
    table: [[f64; MAX_DERIV_ORDER + 1]; 5],
}

impl LatticeDerivs {
    pub fn new(p: &ModelParams) -> Self {
        let mut table = [[0.0; MAX_DERIV_ORDER + 1]; 5];
        for (row, off) in table.iter_mut().zip(STENCIL) {
            let w = TermWeights {
                chi_a: off.chi_a(),
                chi_i: off.chi_i(),
                f: off.f(),
                chi_b: off.chi_b(),
            };
            for (n, v) in row.iter_mut().enumerate() {
                *v = profile_deriv(p, &w, 0.0, n);
            }
        }
        LatticeDerivs { table }
    }

    /// `g^(n)(0)` for stencil entry `k` (index into [`STENCIL`]).
    #[inline]
    pub fn pure(&self, k: usize, n: usize) -> f64 {
        self.table[k][n]
    }

    #[inline]
    pub fn mixed(&self, k: usize, kx: usize, ky: usize) -> f64 {
        let v = self.table[k][kx + ky];
        if ky.is_multiple_of(2) {
            v
        } else {
            -v
        }
    }
}

/// `ell(x) = sum_y L(x, y) - nu/2` over the window's lattice sites.
pub fn ell(p: &ModelParams, x: &LatticePoint, window: &Window) -> Result<f64> {
    let base = x.site();
    if !window.is_interior(base, 1) {
        return Err(Error::Range(format!(
            "ell needs a one-site margin, got {base:?}"
        )));
    }
    let mut sum = 0.0;
    for off in STENCIL {
        let y = base.shift(off).point();
        sum += lag_value(p, x, &y);
    }
    Ok(sum - p.nu / 2.0)
}

/// Outcome of [`el_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElReport {
    /// `max |ell|` over interior lattice sites.
    pub max_abs_on_support: f64,
    /// Minimum of `ell` over all sampled fiber points.
    pub min_sampled: f64,
    /// Per sample: `(phi, min over sites, delta V(phi)^2)`.
    pub samples: Vec<(f64, f64, f64)>,
}

impl ElReport {
    /// Largest deviation of the sampled minima from `delta V(phi)^2`.
    pub fn max_sample_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|(_, got, want)| (got - want).abs())
            .fold(0.0, f64::max)
    }
}

/// Checks `ell = 0` on `M` and `ell >= 0` on sampled fiber points.
pub fn el_check(p: &ModelParams, window: &Window, phi_samples: &[f64]) -> Result<ElReport> {
    if phi_samples.is_empty() {
        return Err(Error::InvalidInput("no fiber samples".into()));
    }
    let interior: Vec<Site> = window.sites().filter(|s| window.is_interior(*s, 1)).collect();
    let mut max_abs: f64 = 0.0;
    for s in &interior {
        max_abs = max_abs.max(ell(p, &s.point(), window)?.abs());
    }
    let mut samples = Vec::with_capacity(phi_samples.len());
    let mut min_all = f64::INFINITY;
    for &phi in phi_samples {
        let mut m = f64::INFINITY;
        for s in &interior {
            let x = LatticePoint::new(s.t, s.x, phi);
            m = m.min(ell(p, &x, window)?);
        }
        let v = v_fiber(phi);
        samples.push((phi, m, p.delta * v * v));
        min_all = min_all.min(m);
    }
    Ok(ElReport {
        max_abs_on_support: max_abs,
        min_sampled: min_all,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(t: i64, x: i64, phi: f64) -> LatticePoint {
        LatticePoint::new(t, x, phi)
    }

    #[test]
    fn values_at_hand_evaluated_points() {
        let p = ModelParams::default();
        assert_eq!(lag_value(&p, &pt(0, 0, 0.0), &pt(0, 0, 0.0)), 5.0);
        assert_eq!(lag_value(&p, &pt(0, 0, 0.0), &pt(1, 0, 0.0)), 2.0);
        assert_eq!(lag_value(&p, &pt(0, 0, PI), &pt(0, 1, 0.0)), 2.0);
        assert_eq!(lag_value(&p, &pt(0, 0, 1.0), &pt(3, 0, 0.0)), 0.0);
    }

    #[test]
    fn derivative_examples() {
        let p = ModelParams::default();
        let (x, y) = (pt(0, 0, 0.0), pt(0, 1, 0.0));
        assert_eq!(lag_phi_deriv(&p, &x, &y, 0, 0).unwrap(), lag_value(&p, &x, &y));
        assert_eq!(lag_phi_deriv(&p, &x, &y, 2, 0).unwrap(), 1.0);
        for off in STENCIL {
            let y = Site::new(off.dt, off.dx).point();
            assert_eq!(lag_phi_deriv(&p, &x, &y, 3, 0).unwrap(), 0.0);
            assert_eq!(lag_phi_deriv(&p, &x, &y, 1, 0).unwrap(), 0.0);
        }
        assert!(matches!(
            lag_phi_deriv(&p, &x, &y, 5, 4),
            Err(Error::UnsupportedOrder { order: 9, .. })
        ));
    }

    #[test]
    fn fourth_derivative_of_delta_term() {
        // V^2 ~ phi^4 / 4 near zero.
        let p = ModelParams::default();
        let o = pt(0, 0, 0.0);
        assert_eq!(lag_phi_deriv(&p, &o, &o, 4, 0).unwrap(), 6.0 * p.delta);
        assert_eq!(lag_phi_deriv(&p, &o, &o, 2, 2).unwrap(), 6.0 * p.delta);
        assert_eq!(lag_phi_deriv(&p, &o, &o, 1, 3).unwrap(), -6.0 * p.delta);
    }

    #[test]
    fn geometric_weights_match_stencil() {
        let p = ModelParams::default();
        for dt in -3i64..=3 {
            for dx in -3i64..=3 {
                let g = term_weights(&p, dt as f64, dx as f64);
                let s = weights_of(&p, &pt(dt, dx, 0.0), &pt(0, 0, 0.0));
                assert_eq!(g, s, "offset ({dt},{dx})");
            }
        }
    }

    #[test]
    fn ell_examples() {
        let p = ModelParams::default();
        let w = Window::centered(3, 3).unwrap();
        assert_eq!(ell(&p, &pt(0, 0, 0.0), &w).unwrap(), 0.0);
        assert!((ell(&p, &pt(0, 0, PI), &w).unwrap() - 4.0 * p.delta).abs() < 1e-14);
        let p0 = p.with_nu(0.0);
        assert_eq!(ell(&p0, &pt(0, 0, 0.0), &w).unwrap(), 9.0);
        assert!(ell(&p, &pt(3, 0, 0.0), &w).is_err());
    }

    #[test]
    fn el_check_examples() {
        let p = ModelParams::default();
        let w = Window::centered(10, 10).unwrap();
        let r = el_check(&p, &w, &[0.0]).unwrap();
        assert!(r.max_abs_on_support <= 1e-12);
        assert_eq!(r.min_sampled, 0.0);
        let r = el_check(&p, &w, &[PI / 2.0]).unwrap();
        assert!((r.min_sampled - p.delta).abs() < 1e-12);
        assert!(el_check(&p, &w, &[]).is_err());
    }

    #[test]
    fn parameter_invariants() {
        assert!(ModelParams::new(5.0, 1.5, 1.0, 0.2).is_err());
        assert!(ModelParams::new(4.1, 2.0, 1.0, 0.2).is_err());
        assert!(ModelParams::new(5.0, 2.0, 1.0, 0.3).is_err());
        assert!(ModelParams::new(5.0, 2.0, 0.0, 0.2).is_err());
        assert_eq!(ModelParams::default().nu, 18.0);
    }
}
