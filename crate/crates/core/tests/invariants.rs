use proptest::prelude::*;
use sli_core::jets::{delta_ell, delta_ell_field};
use sli_core::lagrangian::{lag_phi_deriv, lag_value};
use sli_core::linear::{green_defect, greens_apply, wave_solution};
use sli_core::slayer::sigma;
use sli_core::space::{past_region, stencil_pairs};
use sli_core::{
    DualJet, Field, GreensChoice, Jet, LatticePoint, ModelParams, Profile, Region, ScalarKind,
    Site, VectorKind, Window,
};

fn small_window() -> Window {
    Window::new(-12, 12, -30, 30).unwrap()
}

fn profile() -> impl Strategy<Value = Profile> {
    (-4i64..=2, prop::collection::vec(-1.0f64..1.0, 1..5))
        .prop_map(|(start, values)| Profile::Tabulated { start, values })
}

fn wave() -> impl Strategy<Value = Jet> {
    (profile(), profile()).prop_map(|(g, h)| wave_solution(&g, &h, &small_window()).unwrap())
}

fn dual() -> impl Strategy<Value = DualJet> {
    (
        prop::collection::vec(-1.0f64..1.0, 25),
        prop::collection::vec(-1.0f64..1.0, 25),
    )
        .prop_map(|(b, w)| {
            let win = small_window();
            let mut bf = Field::zeros(win);
            let mut wf = Field::zeros(win);
            for k in 0..25 {
                let s = Site::new(k as i64 / 5 - 2, k as i64 % 5 - 2);
                bf.set(s, b[k]);
                wf.set(s, w[k]);
            }
            DualJet::new(bf, wf)
        })
}

fn offset() -> impl Strategy<Value = (i64, i64)> {
    prop::sample::select(vec![(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (2, 0)])
}

fn choice() -> impl Strategy<Value = GreensChoice> {
    (
        prop::sample::select(vec![VectorKind::Retarded, VectorKind::Advanced]),
        prop::sample::select(vec![ScalarKind::BandedSolve, ScalarKind::Frequency]),
    )
        .prop_map(|(v, s)| GreensChoice::new(v, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lagrangian_is_symmetric(off in offset(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let p = ModelParams::default();
        let x = LatticePoint::new(0, 0, a);
        let y = LatticePoint::new(off.0, off.1, b);
        prop_assert!((lag_value(&p, &x, &y) - lag_value(&p, &y, &x)).abs() <= 1e-14);
    }

    #[test]
    fn derivatives_match_chained_differences(
        off in offset(), a in -3.0f64..3.0, b in -3.0f64..3.0, kx in 0usize..4, ky in 0usize..3,
    ) {
        let p = ModelParams::default();
        let h = 1e-4;
        let x = |phi: f64| LatticePoint::new(0, 0, phi);
        let y = |phi: f64| LatticePoint::new(off.0, off.1, phi);
        let dx = (lag_phi_deriv(&p, &x(a + h), &y(b), kx, ky).unwrap()
            - lag_phi_deriv(&p, &x(a - h), &y(b), kx, ky).unwrap()) / (2.0 * h);
        let want = lag_phi_deriv(&p, &x(a), &y(b), kx + 1, ky).unwrap();
        prop_assert!((dx - want).abs() <= 1e-6 * want.abs().max(1.0), "{dx} vs {want}");
        let dy = (lag_phi_deriv(&p, &x(a), &y(b + h), kx, ky).unwrap()
            - lag_phi_deriv(&p, &x(a), &y(b - h), kx, ky).unwrap()) / (2.0 * h);
        let want = lag_phi_deriv(&p, &x(a), &y(b), kx, ky + 1).unwrap();
        prop_assert!((dy - want).abs() <= 1e-6 * want.abs().max(1.0), "{dy} vs {want}");
    }

    #[test]
    fn delta_two_is_symmetric_and_linear(u in wave(), v in wave(), w in wave(), c in -2.0f64..2.0) {
        let p = ModelParams::default();
        let win = small_window();
        let x = Site::new(1, -1);
        let uv = delta_ell(2, &[&u, &v], x, &p, &win).unwrap();
        let vu = delta_ell(2, &[&v, &u], x, &p, &win).unwrap();
        prop_assert!((uv.scalar - vu.scalar).abs() <= 1e-13);
        prop_assert!((uv.phi - vu.phi).abs() <= 1e-13);
        let mut lin = u.scaled(c);
        lin.axpy(1.0, &w);
        let lhs = delta_ell(2, &[&lin, &v], x, &p, &win).unwrap();
        let wv = delta_ell(2, &[&w, &v], x, &p, &win).unwrap();
        prop_assert!((lhs.scalar - (c * uv.scalar + wv.scalar)).abs() <= 1e-12);
    }

    #[test]
    fn green_operator_is_linear_and_inverts(a in dual(), b in dual(), c in -2.0f64..2.0, g in choice()) {
        let p = ModelParams::default();
        let win = small_window();
        let mut ab = a.scaled(c);
        ab.axpy(1.0, &b);
        let sab = greens_apply(&g, &ab, &p, &win).unwrap();
        let mut want = greens_apply(&g, &a, &p, &win).unwrap().scaled(c);
        want.axpy(1.0, &greens_apply(&g, &b, &p, &win).unwrap());
        prop_assert!(sab.a.zip_with(&want.a, |x, y| x - y).max_abs() <= 1e-12);
        prop_assert!(sab.u_phi.zip_with(&want.u_phi, |x, y| x - y).max_abs() <= 1e-12);
        prop_assert!(green_defect(&g, &ab, &p).unwrap() <= 1e-10);
    }

    #[test]
    fn sigma_is_antisymmetric_and_bilinear(u in wave(), v in wave(), w in wave(), t in -6i64..6, c in -2.0f64..2.0) {
        let p = ModelParams::default();
        let omega = past_region(&small_window(), t).unwrap();
        let uv = sigma(&u, &v, &omega, &p).unwrap();
        prop_assert!((uv + sigma(&v, &u, &omega, &p).unwrap()).abs() <= 1e-12);
        let mut lin = u.scaled(c);
        lin.axpy(1.0, &w);
        let got = sigma(&lin, &v, &omega, &p).unwrap();
        let want = c * uv + sigma(&w, &v, &omega, &p).unwrap();
        prop_assert!((got - want).abs() <= 1e-11);
    }

    #[test]
    fn complement_swaps_boundary_pairs(mask in prop::collection::vec(any::<bool>(), 35)) {
        let win = Window::new(0, 4, 0, 6).unwrap();
        let omega = Region::from_fn(win, |s| mask[(s.t * 7 + s.x) as usize]);
        let mut outer: Vec<_> = stencil_pairs(&omega.complement()).into_iter().map(|(x, y)| (y, x)).collect();
        let mut inner = stencil_pairs(&omega);
        outer.sort_by_key(|(x, y)| (x.t, x.x, y.t, y.x));
        inner.sort_by_key(|(x, y)| (x.t, x.x, y.t, y.x));
        prop_assert_eq!(inner, outer);
    }

    #[test]
    fn delta_two_of_waves_has_no_vector_part(u in wave(), v in wave()) {
        let p = ModelParams::default();
        let d = delta_ell_field(2, &[&u, &v], &p).unwrap();
        prop_assert!(d.w_phi.max_abs() <= 1e-13);
    }
}
