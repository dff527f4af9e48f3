//! Surface layer integrals: `I_1`, the symplectic form, the symmetric bilinear
//! form with its volume identity, the general `I_m` and the dependence of
//! `I_2` on the Green's operator.

use crate::error::{Error, Result};
use crate::jets::{delta_ell_field, pair_term, Field, Jet, PairOp};
use crate::lagrangian::{LatticeDerivs, ModelParams};
use crate::linear::{greens_apply, scalar_root, GreensChoice, KernelModifier};
use crate::perturb::{build_hierarchy, family_taylor_i};
use crate::space::{past_region, stencil_pairs, Region, Site, Window};

/// A surface layer integral split into its double sum and its volume term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfaceVolume {
    pub surface: f64,
    pub volume: f64,
}

impl SurfaceVolume {
    /// `surface - volume`, which vanishes for conserved quantities.
    pub fn value(&self) -> f64 {
        self.surface - self.volume
    }
}

fn check_jet(j: &Jet, omega: &Region) -> Result<()> {
    if j.window() != omega.window() {
        return Err(Error::InvalidInput("jet and region on different windows".into()));
    }
    if !j.is_test() {
        return Err(Error::InvalidInput("jet has a constant vector part".into()));
    }
    let w = j.window();
    for t in w.times() {
        for x in [w.x_min, w.x_max] {
            let s = Site::new(t, x);
            if j.a.at(s) != 0.0 || j.u_phi.at(s) != 0.0 {
                return Err(Error::Range(format!(
                    "jet is not spacelike compact inside the window (nonzero at {s:?})"
                )));
            }
        }
    }
    Ok(())
}

fn surface_sum(factors: &[(PairOp, &Jet)], omega: &Region, table: &LatticeDerivs) -> f64 {
    stencil_pairs(omega)
        .into_iter()
        .map(|(x, y)| pair_term(factors, x, y, table))
        .sum()
}

/// Per-pair terms `(nabla_{1,u} - nabla_{2,u}) L(x, y)` of `I_1`.
pub fn i1_pair_terms(u: &Jet, omega: &Region, p: &ModelParams) -> Result<Vec<f64>> {
    check_jet(u, omega)?;
    let table = LatticeDerivs::new(p);
    Ok(stencil_pairs(omega)
        .into_iter()
        .map(|(x, y)| pair_term(&[(PairOp::Minus, u)], x, y, &table))
        .collect())
}

/// `I_1^Omega(u)`: surface `sum (nabla_1 - nabla_2) L`, volume `nu/2 sum_Omega a`.
pub fn i1(u: &Jet, omega: &Region, p: &ModelParams) -> Result<SurfaceVolume> {
    let surface = i1_pair_terms(u, omega, p)?.into_iter().sum();
    let volume = 0.5 * p.nu * u.a.sum_over(omega);
    Ok(SurfaceVolume { surface, volume })
}

/// `sigma_Omega(u, v) = sum (nabla_{1,u} nabla_{2,v} - nabla_{1,v} nabla_{2,u}) L`.
pub fn sigma(u: &Jet, v: &Jet, omega: &Region, p: &ModelParams) -> Result<f64> {
    check_jet(u, omega)?;
    check_jet(v, omega)?;
    let table = LatticeDerivs::new(p);
    let a = surface_sum(&[(PairOp::First, u), (PairOp::Second, v)], omega, &table);
    let b = surface_sum(&[(PairOp::First, v), (PairOp::Second, u)], omega, &table);
    Ok(a - b)
}

/// Closed form of `sigma` on the past of `N_t`.
///
/// The wave part is `sum u v_+ - u_+ v`, as follows from `d_x d_y L = 1` on
/// timelike neighbours.
pub fn sigma_closed_form(u: &Jet, v: &Jet, t: i64, p: &ModelParams) -> f64 {
    let w = u.window();
    let mut scalar = 0.0;
    let mut wave = 0.0;
    for x in w.x_min..=w.x_max {
        let (s, s1) = (Site::new(t, x), Site::new(t + 1, x));
        scalar += u.a.at(s) * v.a.at(s1) - u.a.at(s1) * v.a.at(s);
        wave += u.u_phi.at(s) * v.u_phi.at(s1) - u.u_phi.at(s1) * v.u_phi.at(s);
    }
    p.lambda_i * scalar + wave
}

/// The symmetric bilinear form `(u, v)_Omega` with its volume term.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmBilinear {
    pub surface: f64,
    pub volume: f64,
    /// Scalar part `s` of `S Delta_2[u, v]`.
    pub s_field: Field,
}

/// `S Delta_2[u, v]` for jets with vanishing scalar parts.
pub fn second_order_jet(
    u: &Jet,
    v: &Jet,
    greens: &GreensChoice,
    p: &ModelParams,
) -> Result<Jet> {
    if !u.a.is_zero() || !v.a.is_zero() {
        return Err(Error::InvalidInput(
            "symmetric bilinear form needs vanishing scalar components".into(),
        ));
    }
    let d2 = delta_ell_field(2, &[u, v], p)?;
    greens_apply(greens, &d2, p, u.window())
}

fn symm_with(u: &Jet, v: &Jet, sd: &Jet, omega: &Region, table: &LatticeDerivs, p: &ModelParams) -> (f64, f64) {
    let surface = surface_sum(&[(PairOp::First, u), (PairOp::First, v)], omega, table)
        + 2.0 * surface_sum(&[(PairOp::First, sd)], omega, table)
        - surface_sum(&[(PairOp::Second, u), (PairOp::Second, v)], omega, table)
        - 2.0 * surface_sum(&[(PairOp::Second, sd)], omega, table);
    let volume = p.nu * sd.a.sum_over(omega);
    (surface, volume)
}

/// `(u, v)_Omega`: surface term and volume term `nu sum_Omega s`.
pub fn symm_bilinear(
    u: &Jet,
    v: &Jet,
    omega: &Region,
    greens: &GreensChoice,
    p: &ModelParams,
) -> Result<SymmBilinear> {
    check_jet(u, omega)?;
    check_jet(v, omega)?;
    let sd = second_order_jet(u, v, greens, p)?;
    let table = LatticeDerivs::new(p);
    let (surface, volume) = symm_with(u, v, &sd, omega, &table, p);
    Ok(SymmBilinear {
        surface,
        volume,
        s_field: sd.a,
    })
}

/// Closed form of the surface term of `(u, v)` on the past of `N_t`.
pub fn symm_closed_form(u: &Jet, v: &Jet, s: &Field, t: i64, p: &ModelParams) -> f64 {
    let w = u.window();
    let layer = |t: i64| -> f64 {
        (w.x_min..=w.x_max)
            .map(|x| {
                let site = Site::new(t, x);
                u.u_phi.at(site) * v.u_phi.at(site) - 2.0 * p.lambda_i * s.at(site)
            })
            .sum()
    };
    layer(t + 1) - layer(t)
}

/// `I_m^Omega(u, v)` through the hierarchy of order `m`.
pub fn i_m(
    u: &Jet,
    v: &Jet,
    omega: &Region,
    m: usize,
    choices: &[GreensChoice],
    p: &ModelParams,
    window: &Window,
) -> Result<f64> {
    if m == 0 || m > 3 {
        return Err(Error::UnsupportedOrder { order: m, max: 3 });
    }
    let hier = build_hierarchy(u, v, m, choices, p, window)?;
    family_taylor_i(&hier, omega, m, m)
}

/// `(I2_hat - I2, 2 I_1(K Delta_2[u, v]))` for a modified second-order Green's operator.
pub fn greens_dependence_check(
    u: &Jet,
    v: &Jet,
    omega: &Region,
    k: &KernelModifier,
    p: &ModelParams,
    window: &Window,
) -> Result<(f64, f64)> {
    let base = GreensChoice::default();
    let hat = base.clone().with_modifier(k.clone());
    let i2 = family_taylor_i(&build_hierarchy(u, v, 2, &[base], p, window)?, omega, 2, 2)?;
    let i2_hat = family_taylor_i(&build_hierarchy(u, v, 2, &[hat], p, window)?, omega, 2, 2)?;
    let kd = k.apply(&delta_ell_field(2, &[u, v], p)?);
    let rhs = 2.0 * i1(&kd, omega, p)?.value();
    Ok((i2_hat - i2, rhs))
}

/// Values of one slice `t` of a sweep over the regions `Omega_{N_t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRow {
    pub t: i64,
    pub i1_surface: f64,
    pub sigma: f64,
    pub sigma_closed: f64,
    pub symm_surface: f64,
    pub symm_closed: f64,
    /// `nu sum_{Omega} s(x)`.
    pub symm_volume: f64,
}

impl SliceRow {
    pub fn sigma_residual(&self) -> f64 {
        (self.sigma - self.sigma_closed).abs()
    }

    pub fn symm_closed_residual(&self) -> f64 {
        (self.symm_surface - self.symm_closed).abs()
    }

    pub fn symm_volume_residual(&self) -> f64 {
        (self.symm_surface - self.symm_volume).abs()
    }
}

/// Per-slice values of `I_1`, `sigma` and `(.,.)` on past regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SlayerReport {
    pub rows: Vec<SliceRow>,
}

impl SlayerReport {
    /// `max |sigma_t - sigma_{t0}| / max(|sigma_{t0}|, 1)`.
    pub fn sigma_spread(&self) -> f64 {
        let Some(first) = self.rows.first() else {
            return 0.0;
        };
        let scale = first.sigma.abs().max(1.0);
        self.rows
            .iter()
            .map(|r| (r.sigma - first.sigma).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// `nu sum_{x^0 < t_min} s(x)` for `s` continued below the window as the
/// bounded solution `s(t_min - k) = z^k s(t_min)`, valid when `Delta_2`
/// vanishes below the window.
pub fn past_volume_tail(s: &Field, p: &ModelParams) -> Result<f64> {
    let z = scalar_root(p)?;
    let w = s.window();
    Ok(p.nu * z / (1.0 - z) * s.slice_sum(w.t_min))
}

/// Evaluates every slice `t` in `t_range` for jets with vanishing scalar parts.
///
/// `Omega_{N_t}` is taken as the full past, so the volume term of `(u, v)`
/// includes [`past_volume_tail`].
pub fn sweep(
    u: &Jet,
    v: &Jet,
    t_range: std::ops::RangeInclusive<i64>,
    greens: &GreensChoice,
    p: &ModelParams,
) -> Result<SlayerReport> {
    let window = *u.window();
    let sd = second_order_jet(u, v, greens, p)?;
    let table = LatticeDerivs::new(p);
    let tail = past_volume_tail(&sd.a, p)?;
    let mut rows = Vec::new();
    for t in t_range {
        let omega = past_region(&window, t)?;
        let i1_surface = i1(u, &omega, p)?.surface;
        let sig = sigma(u, v, &omega, p)?;
        let (symm_surface, symm_volume) = symm_with(u, v, &sd, &omega, &table, p);
        rows.push(SliceRow {
            t,
            i1_surface,
            sigma: sig,
            sigma_closed: sigma_closed_form(u, v, t, p),
            symm_surface,
            symm_closed: symm_closed_form(u, v, &sd.a, t, p),
            symm_volume: symm_volume + tail,
        });
    }
    Ok(SlayerReport { rows })
}
