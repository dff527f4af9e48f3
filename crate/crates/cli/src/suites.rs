//! One function per subcommand. Each fills a [`Report`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sli_core::lagrangian::el_check;
use sli_core::linear::{green_defect, greens_apply, interior_region, linear_residual};
use sli_core::perturb::{build_hierarchy, family_taylor_i, taylor_oracle_i};
use sli_core::slayer::{greens_dependence_check, sweep};
use sli_core::{DualJet, Field, GreensChoice, KernelModifier, Region, ScalarKind, Site, VectorKind};

use crate::config::Experiment;
use crate::report::Report;

pub type RunResult = Result<Report, sli_core::Error>;

pub fn check_el(ex: &Experiment) -> RunResult {
    let tol = ex.config.tolerances.el;
    let r = el_check(&ex.params, &ex.window, &ex.config.el_samples)?;
    let mut rep = Report::new("check-el");
    rep.check(None, "max_abs_ell", r.max_abs_on_support, 0.0, tol);
    let below = (-r.min_sampled).max(0.0);
    rep.check_residual(None, "min_sampled_ell", r.min_sampled, 0.0, below, tol);
    for (phi, got, want) in &r.samples {
        rep.check(None, format!("min_ell(phi={phi})"), *got, *want, tol);
    }
    Ok(rep)
}

pub fn solve_linear(ex: &Experiment) -> RunResult {
    let tol = ex.config.tolerances.linear;
    let region = interior_region(&ex.window);
    let mut rep = Report::new("solve-linear");
    for (name, jet) in [("u", &ex.u), ("v", &ex.v), ("modifier_image", &ex.image)] {
        let r = linear_residual(jet, &region, &ex.params)?;
        rep.check(None, format!("residual_{name}"), r, 0.0, tol);
    }
    Ok(rep)
}

fn random_dual(rng: &mut ChaCha8Rng, ex: &Experiment) -> DualJet {
    let w = ex.window;
    let mut b = Field::zeros(w);
    let mut wp = Field::zeros(w);
    for t in -3..=3 {
        for x in -3..=3 {
            let s = Site::new(t, x);
            let (vb, vw) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if w.is_interior(s, 1) {
                b.set(s, vb);
                wp.set(s, vw);
            }
        }
    }
    DualJet::new(b, wp)
}

pub fn greens_verify(ex: &Experiment) -> RunResult {
    let tol = &ex.config.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(ex.config.seed);
    let kinds = [
        (VectorKind::Retarded, ScalarKind::BandedSolve, "retarded/banded"),
        (VectorKind::Retarded, ScalarKind::Frequency, "retarded/frequency"),
        (VectorKind::Advanced, ScalarKind::BandedSolve, "advanced/banded"),
        (VectorKind::Advanced, ScalarKind::Frequency, "advanced/frequency"),
    ];
    let mut defect = [0.0f64; 4];
    let mut agree = 0.0f64;
    for _ in 0..ex.config.trials {
        let d = random_dual(&mut rng, ex);
        for (k, (vk, sk, _)) in kinds.iter().enumerate() {
            defect[k] = defect[k].max(green_defect(&GreensChoice::new(*vk, *sk), &d, &ex.params)?);
        }
        let banded = greens_apply(&GreensChoice::new(VectorKind::Retarded, ScalarKind::BandedSolve), &d, &ex.params, &ex.window)?;
        let freq = greens_apply(&GreensChoice::new(VectorKind::Retarded, ScalarKind::Frequency), &d, &ex.params, &ex.window)?;
        agree = agree.max(banded.a.zip_with(&freq.a, |x, y| x - y).max_abs());
    }
    let mut rep = Report::new("greens-verify");
    for (k, (_, _, name)) in kinds.iter().enumerate() {
        rep.check(None, format!("max_defect[{name}]"), defect[k], 0.0, tol.green_defect);
    }
    rep.check(None, "scalar_backend_difference", agree, 0.0, tol.backend_agreement);
    Ok(rep)
}

pub fn slayer_sweep(ex: &Experiment) -> RunResult {
    let tol = &ex.config.tolerances;
    let s = &ex.config.slices;
    let r = sweep(&ex.u, &ex.v, s.from..=s.to, &ex.config.greens.choice(), &ex.params)?;
    let mut rep = Report::new("slayer-sweep");
    let sigma0 = r.rows.first().map_or(0.0, |row| row.sigma);
    let scale = sigma0.abs().max(1.0);
    for row in &r.rows {
        let t = Some(row.t);
        rep.check(t, "i1_surface", row.i1_surface, 0.0, tol.sigma_closed);
        rep.check(t, "sigma_vs_closed_form", row.sigma, row.sigma_closed, tol.sigma_closed);
        let spread = (row.sigma - sigma0).abs() / scale;
        rep.check_residual(t, "sigma_vs_first_slice", row.sigma, sigma0, spread, tol.sigma_spread);
        rep.check(t, "symm_vs_closed_form", row.symm_surface, row.symm_closed, tol.symm_closed);
        rep.check(t, "symm_surface_vs_volume", row.symm_surface, row.symm_volume, tol.symm_volume);
    }
    Ok(rep)
}

fn slab(ex: &Experiment) -> Result<Region, sli_core::Error> {
    Region::slab(ex.window, ex.config.slices.from, ex.config.slices.to)
}

pub fn perturb_verify(ex: &Experiment) -> RunResult {
    let tol = ex.config.tolerances.conservation;
    let order = ex.config.order;
    let hier = build_hierarchy(&ex.u, &ex.v, order, &[ex.config.greens.choice()], &ex.params, &ex.window)?;
    let omega = slab(ex)?;
    let mut rep = Report::new("perturb-verify");
    for m in 1..=order {
        for p in 1..=m {
            let fam = family_taylor_i(&hier, &omega, m, p)?;
            let oracle = taylor_oracle_i(&hier, &omega, m, p)?;
            rep.check(None, format!("I_{m},({p})/family"), fam, 0.0, tol);
            rep.check(None, format!("I_{m},({p})/oracle"), oracle, 0.0, tol);
            rep.check(None, format!("I_{m},({p})/family_vs_oracle"), fam, oracle, tol);
        }
    }
    Ok(rep)
}

pub fn greens_dependence(ex: &Experiment) -> RunResult {
    let tol = ex.config.tolerances.dependence;
    let mut rng = ChaCha8Rng::seed_from_u64(ex.config.seed);
    let omega = slab(ex)?;
    let mut rep = Report::new("greens-dependence");
    for k in 0..ex.config.modifier_count {
        let probe = random_dual(&mut rng, ex).scaled(0.1);
        let modifier = KernelModifier::new(probe, ex.image.clone(), &ex.params)?;
        let (lhs, rhs) = greens_dependence_check(&ex.u, &ex.v, &omega, &modifier, &ex.params, &ex.window)?;
        rep.check(None, format!("modifier_{k}"), lhs, rhs, tol);
    }
    Ok(rep)
}
