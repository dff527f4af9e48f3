//! Linearized field equations: residuals, solution generators and the
//! Green's operators of the lattice model.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::jets::{delta_op_field, DualJet, Field, Jet};
use crate::lagrangian::ModelParams;
use crate::space::{Region, Site, Window};

/// Residual below which a jet counts as a linearized solution.
pub const LINEAR_TOL: f64 = 1e-10;

/// Values on the window edge above this signal a truncated propagation.
pub const EDGE_TOL: f64 = 1e-12;

/// A function `Z -> R`, either finitely supported or constant.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `values[k]` sits at `start + k`; zero elsewhere.
    Tabulated { start: i64, values: Vec<f64> },
    Constant(f64),
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Tabulated {
            start: 0,
            values: Vec::new(),
        }
    }

    /// Kronecker delta at `n0`.
    pub fn delta(n0: i64) -> Self {
        Profile::Tabulated {
            start: n0,
            values: vec![1.0],
        }
    }

    /// Triangular bump `amp (1 - |n - center| / (width + 1))` on `|n - center| <= width`.
    pub fn bump(center: i64, width: i64, amp: f64) -> Self {
        let w = width.max(0);
        let values = (-w..=w)
            .map(|k| amp * (1.0 - k.abs() as f64 / (w + 1) as f64))
            .collect();
        Profile::Tabulated {
            start: center - w,
            values,
        }
    }

    pub fn eval(&self, n: i64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Tabulated { start, values } => {
                let k = n - start;
                if k >= 0 && (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest interval containing the nonzero values; `None` when unbounded.
    pub fn support(&self) -> Option<(i64, i64)> {
        match self {
            Profile::Constant(_) => None,
            Profile::Tabulated { start, values } => {
                let first = values.iter().position(|v| *v != 0.0)?;
                let last = values.iter().rposition(|v| *v != 0.0)?;
                Some((start + first as i64, start + last as i64))
            }
        }
    }
}

/// `max_{x in region} max(|scalar|, |phi|)` of `Delta v`.
pub fn linear_residual(v: &Jet, region: &Region, p: &ModelParams) -> Result<f64> {
    let w = *v.window();
    if *region.window() != w {
        return Err(Error::InvalidInput("region and jet on different windows".into()));
    }
    if let Some(s) = region.iter().find(|s| !w.is_interior(*s, 1)) {
        return Err(Error::Range(format!("region touches the window edge at {s:?}")));
    }
    let d = delta_op_field(v, p);
    Ok(region
        .iter()
        .map(|s| d.b.at(s).abs().max(d.w_phi.at(s).abs()))
        .fold(0.0, f64::max))
}

/// Interior sites of a window, as a region.
pub fn interior_region(window: &Window) -> Region {
    Region::from_fn(*window, |s| window.is_interior(s, 1))
}

fn edge_max(f: &Field) -> f64 {
    let w = f.window();
    w.sites()
        .filter(|s| !w.is_interior(*s, 1))
        .map(|s| f.at(s).abs())
        .fold(0.0, f64::max)
}

fn spatial_edge_max(f: &Field) -> f64 {
    let w = f.window();
    w.times()
        .flat_map(|t| [Site::new(t, w.x_min), Site::new(t, w.x_max)])
        .map(|s| f.at(s).abs())
        .fold(0.0, f64::max)
}

/// d'Alembert solution `u^phi = g(x^0 + x^1) + h(x^0 - x^1)` with vanishing scalar part.
pub fn wave_solution(g: &Profile, h: &Profile, window: &Window) -> Result<Jet> {
    let u = Field::from_fn(*window, |s| g.eval(s.t + s.x) + h.eval(s.t - s.x));
    let bounded = !matches!(g, Profile::Constant(_)) && !matches!(h, Profile::Constant(_));
    if bounded && spatial_edge_max(&u) != 0.0 {
        return Err(Error::Range(
            "profile support reaches the spatial edge of the window".into(),
        ));
    }
    Ok(Jet::vector(u))
}

/// Effective diagonal of the scalar operator: `lambda_A` at the default `nu`.
pub fn scalar_diagonal(p: &ModelParams) -> f64 {
    2.0 * p.lambda_a + 2.0 * p.lambda_i - 0.5 * p.nu
}

/// Root `|z| < 1` of `lambda_I z^2 + diag z + lambda_I = 0`.
pub fn scalar_root(p: &ModelParams) -> Result<f64> {
    let d = scalar_diagonal(p);
    let disc = d * d - 4.0 * p.lambda_i * p.lambda_i;
    if d.is_nan() || d <= 2.0 * p.lambda_i || disc <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "scalar operator is not elliptic for diagonal {d}"
        )));
    }
    // Stable form of (-d + sqrt(disc)) / (2 lambda_I).
    Ok(-2.0 * p.lambda_i / (d + disc.sqrt()))
}

/// Scalar linearized solution `b = amp z^{x^0}` on the whole window.
pub fn scalar_solution(amp: f64, p: &ModelParams, window: &Window) -> Result<Jet> {
    let z = scalar_root(p)?;
    Ok(Jet::scalar(Field::from_fn(*window, |s| {
        amp * z.powi(s.t as i32)
    })))
}

/// Spatially localized scalar solution `b = profile(x^1) z^{x^0 - t_ref}`.
pub fn scalar_mode(profile: &Profile, t_ref: i64, p: &ModelParams, window: &Window) -> Result<Jet> {
    let z = scalar_root(p)?;
    let b = Field::from_fn(*window, |s| profile.eval(s.x) * z.powi((s.t - t_ref) as i32));
    if spatial_edge_max(&b) != 0.0 {
        return Err(Error::Range("scalar mode reaches the spatial edge".into()));
    }
    Ok(Jet::scalar(b))
}

/// Retarded or advanced Green's operator of the discrete wave equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VectorKind {
    #[default]
    Retarded,
    Advanced,
}

/// Back-end for the scalar Green's operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalarKind {
    #[default]
    BandedSolve,
    Frequency,
}

/// Rank-one map `w -> <probe, w> image` with a linearized solution as image.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModifier {
    probe: DualJet,
    image: Jet,
}

impl KernelModifier {
    pub fn new(probe: DualJet, image: Jet, p: &ModelParams) -> Result<Self> {
        if probe.window() != image.window() {
            return Err(Error::InvalidInput("probe and image on different windows".into()));
        }
        if !image.is_test() {
            return Err(Error::InvalidInput("image has a constant vector part".into()));
        }
        let r = linear_residual(&image, &interior_region(image.window()), p)?;
        if r > LINEAR_TOL {
            return Err(Error::InvalidInput(format!(
                "modifier image is not a linearized solution (residual {r:e})"
            )));
        }
        Ok(KernelModifier { probe, image })
    }

    pub fn image(&self) -> &Jet {
        &self.image
    }

    pub fn probe(&self) -> &DualJet {
        &self.probe
    }

    pub fn apply(&self, w: &DualJet) -> Jet {
        self.image.scaled(self.probe.dot(w))
    }
}

/// Choice of Green's operator for one perturbation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GreensChoice {
    pub vector_kind: VectorKind,
    pub scalar_kind: ScalarKind,
    pub kernel_modifier: Option<Arc<KernelModifier>>,
}

impl GreensChoice {
    pub fn new(vector_kind: VectorKind, scalar_kind: ScalarKind) -> Self {
        GreensChoice {
            vector_kind,
            scalar_kind,
            kernel_modifier: None,
        }
    }

    pub fn with_modifier(mut self, k: KernelModifier) -> Self {
        self.kernel_modifier = Some(Arc::new(k));
        self
    }
}

/// Solves `diag s(t) + lambda_I (s(t+1) + s(t-1)) = -b(t)` along every column.
///
/// The end rows use `s(t_min - 1) = z s(t_min)` and `s(t_max + 1) = z s(t_max)`,
/// which is exact for the bounded solution when the source lies inside.
fn scalar_banded(b: &Field, p: &ModelParams) -> Result<Field> {
    let w = *b.window();
    let z = scalar_root(p)?;
    let d = scalar_diagonal(p);
    let li = p.lambda_i;
    let nt = w.nt();
    let mut out = Field::zeros(w);
    let mut cp = vec![0.0; nt];
    let mut dp = vec![0.0; nt];
    for x in w.x_min..=w.x_max {
        let col: Vec<f64> = w.times().map(|t| b.at(Site::new(t, x))).collect();
        if col.iter().all(|v| *v == 0.0) {
            continue;
        }
        // Thomas algorithm; sub- and super-diagonal are lambda_I.
        let diag = |i: usize| {
            if nt == 1 {
                d + 2.0 * li * z
            } else if i == 0 || i == nt - 1 {
                d + li * z
            } else {
                d
            }
        };
        cp[0] = li / diag(0);
        dp[0] = -col[0] / diag(0);
        for i in 1..nt {
            let m = diag(i) - li * cp[i - 1];
            cp[i] = li / m;
            dp[i] = (-col[i] - li * dp[i - 1]) / m;
        }
        let mut s = dp[nt - 1];
        out.set(Site::new(w.t_max, x), s);
        for i in (0..nt - 1).rev() {
            s = dp[i] - cp[i] * s;
            out.set(Site::new(w.t_min + i as i64, x), s);
        }
    }
    Ok(out)
}

/// Same solve by division with the symbol `-(diag + 2 lambda_I cos w)` on a
/// zero-padded periodic grid.
fn scalar_frequency(b: &Field, p: &ModelParams) -> Result<Field> {
    let w = *b.window();
    let z = scalar_root(p)?;
    let d = scalar_diagonal(p);
    let nt = w.nt();
    // Padding so that the wrapped tail of the kernel is below 1e-17.
    let tail = (17.0 * std::f64::consts::LN_10 / -z.abs().ln()).ceil() as usize + 1;
    let n = (nt + tail).next_power_of_two().max(2 * nt.next_power_of_two());
    if n > 1 << 24 {
        return Err(Error::InvalidInput("scalar kernel decays too slowly".into()));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let symbol: Vec<f64> = (0..n)
        .map(|k| {
            let om = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            -1.0 / (d + 2.0 * p.lambda_i * om.cos()) / n as f64
        })
        .collect();
    let mut out = Field::zeros(w);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for x in w.x_min..=w.x_max {
        let mut any = false;
        for (i, t) in w.times().enumerate() {
            let v = b.at(Site::new(t, x));
            any |= v != 0.0;
            buf[i] = Complex::new(v, 0.0);
        }
        if !any {
            continue;
        }
        for c in buf.iter_mut().skip(nt) {
            *c = Complex::new(0.0, 0.0);
        }
        fwd.process(&mut buf);
        for (c, s) in buf.iter_mut().zip(&symbol) {
            *c *= *s;
        }
        inv.process(&mut buf);
        for (i, t) in w.times().enumerate() {
            out.set(Site::new(t, x), buf[i].re);
        }
    }
    Ok(out)
}

/// Solves `sum_y sv(y) f(x - y) = w(x)` on the interior rows by stepping in time.
fn vector_green(wphi: &Field, kind: VectorKind) -> Result<Field> {
    let w = *wphi.window();
    if edge_max(wphi) != 0.0 {
        return Err(Error::Range(
            "vector source must vanish on the window edge".into(),
        ));
    }
    let mut sv = Field::zeros(w);
    let step = |sv: &mut Field, from: i64, prev: i64, to: i64| {
        for x in w.x_min..=w.x_max {
            let v = sv.at(Site::new(from, x + 1)) + sv.at(Site::new(from, x - 1))
                - sv.at(Site::new(prev, x))
                - wphi.at(Site::new(from, x));
            sv.set(Site::new(to, x), v);
        }
    };
    match kind {
        VectorKind::Retarded => {
            for n in (w.t_min + 1)..w.t_max {
                step(&mut sv, n, n - 1, n + 1);
            }
        }
        VectorKind::Advanced => {
            for n in ((w.t_min + 1)..w.t_max).rev() {
                step(&mut sv, n, n + 1, n - 1);
            }
        }
    }
    let e = spatial_edge_max(&sv);
    if e > EDGE_TOL {
        return Err(Error::Truncation(format!(
            "vector Green's operator reaches the spatial edge ({e:e})"
        )));
    }
    Ok(sv)
}

/// Applies the Green's operator `S` with `Delta S w = -w` on interior sites.
pub fn greens_apply(
    choice: &GreensChoice,
    w: &DualJet,
    p: &ModelParams,
    window: &Window,
) -> Result<Jet> {
    if w.window() != window {
        return Err(Error::InvalidInput("dual jet does not live on the given window".into()));
    }
    let sb = match choice.scalar_kind {
        ScalarKind::BandedSolve => scalar_banded(&w.b, p)?,
        ScalarKind::Frequency => scalar_frequency(&w.b, p)?,
    };
    let sv = vector_green(&w.w_phi, choice.vector_kind)?;
    let mut out = Jet::new(sb, sv);
    if let Some(k) = &choice.kernel_modifier {
        if k.image().window() != window {
            return Err(Error::InvalidInput("modifier lives on another window".into()));
        }
        out.axpy(1.0, &k.apply(w));
    }
    Ok(out)
}

/// `max` over interior sites of `|Delta S w + w|`.
pub fn green_defect(choice: &GreensChoice, w: &DualJet, p: &ModelParams) -> Result<f64> {
    let win = *w.window();
    let s = greens_apply(choice, w, p, &win)?;
    let mut d = delta_op_field(&s, p);
    d.axpy(1.0, w);
    let interior = interior_region(&win);
    Ok(interior
        .iter()
        .map(|x| d.b.at(x).abs().max(d.w_phi.at(x).abs()))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Window;

    fn p() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn root_of_default_model() {
        assert_eq!(scalar_root(&p()).unwrap(), -0.5);
        let w = Window::centered(5, 3).unwrap();
        let j = scalar_solution(1.0, &p(), &w).unwrap();
        let ratio = j.a.at(Site::new(1, 0)) / j.a.at(Site::new(0, 0));
        assert_eq!(ratio, -0.5);
        assert!(scalar_solution(0.0, &p(), &w).unwrap().is_zero());
        let r = linear_residual(&j, &interior_region(&w), &p()).unwrap();
        assert!(r <= 1e-12);
    }

    #[test]
    fn wave_solution_examples() {
        let w = Window::centered(6, 10).unwrap();
        let j = wave_solution(&Profile::delta(0), &Profile::zero(), &w).unwrap();
        for s in w.sites() {
            assert_eq!(j.u_phi.at(s), if s.t + s.x == 0 { 1.0 } else { 0.0 });
        }
        assert_eq!(linear_residual(&j, &interior_region(&w), &p()).unwrap(), 0.0);
        assert!(wave_solution(&Profile::zero(), &Profile::zero(), &w)
            .unwrap()
            .is_zero());
        let c = wave_solution(&Profile::Constant(2.5), &Profile::zero(), &w).unwrap();
        assert_eq!(c.u_phi.at(Site::new(3, -4)), 2.5);
        assert_eq!(linear_residual(&c, &interior_region(&w), &p()).unwrap(), 0.0);
        assert!(wave_solution(&Profile::delta(0), &Profile::zero(), &Window::centered(12, 10).unwrap()).is_err());
    }

    #[test]
    fn point_bump_is_not_a_solution() {
        let w = Window::centered(4, 4).unwrap();
        let mut u = Field::zeros(w);
        u.set(Site::new(0, 0), 1.0);
        let r = linear_residual(&Jet::vector(u), &interior_region(&w), &p()).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn constant_scalar_source() {
        let w = Window::new(-60, 60, -2, 2).unwrap();
        let src = DualJet::new(Field::from_fn(w, |_| 1.0), Field::zeros(w));
        for kind in [ScalarKind::BandedSolve, ScalarKind::Frequency] {
            let s = greens_apply(&GreensChoice::new(VectorKind::Retarded, kind), &src, &p(), &w)
                .unwrap();
            assert!((s.a.at(Site::new(0, 0)) + 1.0 / 9.0).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn zero_source() {
        let w = Window::centered(8, 8).unwrap();
        let s = greens_apply(&GreensChoice::default(), &DualJet::zero(w), &p(), &w).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn point_source_defects() {
        let w = Window::centered(12, 20).unwrap();
        let mut src = DualJet::zero(w);
        src.b.set(Site::new(1, 2), 0.7);
        src.w_phi.set(Site::new(-1, 3), -1.3);
        for vk in [VectorKind::Retarded, VectorKind::Advanced] {
            for sk in [ScalarKind::BandedSolve, ScalarKind::Frequency] {
                let d = green_defect(&GreensChoice::new(vk, sk), &src, &p()).unwrap();
                assert!(d <= 1e-12, "{vk:?} {sk:?}: {d}");
            }
        }
    }

    #[test]
    fn scalar_kernel_is_exponential() {
        let w = Window::new(-30, 30, 0, 1).unwrap();
        let mut src = DualJet::zero(w);
        src.b.set(Site::new(0, 0), 1.0);
        let s = greens_apply(&GreensChoice::default(), &src, &p(), &w).unwrap();
        let g0 = -1.0 / 3.0;
        for n in -20i64..=20 {
            let want = g0 * (-0.5f64).powi(n.abs() as i32);
            assert!((s.a.at(Site::new(n, 0)) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn truncation_and_margin_errors() {
        let w = Window::centered(20, 5).unwrap();
        let mut src = DualJet::zero(w);
        src.w_phi.set(Site::new(-15, 0), 1.0);
        assert!(matches!(
            greens_apply(&GreensChoice::default(), &src, &p(), &w),
            Err(Error::Truncation(_))
        ));
        let mut edge = DualJet::zero(w);
        edge.w_phi.set(Site::new(-20, 0), 1.0);
        assert!(matches!(
            greens_apply(&GreensChoice::default(), &edge, &p(), &w),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn modifier_requires_solution_image() {
        let w = Window::centered(6, 10).unwrap();
        let mut bad = Field::zeros(w);
        bad.set(Site::new(0, 0), 1.0);
        assert!(KernelModifier::new(DualJet::zero(w), Jet::vector(bad), &p()).is_err());
        let img = wave_solution(&Profile::bump(0, 2, 1.0), &Profile::zero(), &w).unwrap();
        let mut probe = DualJet::zero(w);
        probe.b.set(Site::new(0, 0), 2.0);
        let k = KernelModifier::new(probe, img.clone(), &p()).unwrap();
        let mut src = DualJet::zero(w);
        src.b.set(Site::new(0, 0), 1.5);
        assert_eq!(k.apply(&src), img.scaled(3.0));
    }
}
