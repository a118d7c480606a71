use proptest::prelude::*;

use twoflux::analysis::{classify_type, estimate_asymptotics, rh_deficit, FluxKind, Interval};
use twoflux::fluxlang::{BinOp, Expr, FluxExpr, Func};
use twoflux::godunov::{roe_matrix, step, GridState};
use twoflux::prelude::*;
use twoflux::riemann::{select_case, solve_riemann, Rarefaction, Side};
use twoflux::shadow::classify_shadow;
use twoflux::verify::{delta_mass, sample_admissible};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

/// Expressions that stay finite and differentiable for |u| ≤ 2.
fn safe_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0.0..3.0f64).prop_map(Expr::Num), Just(Expr::Var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Binary(BinOp::Add, b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Binary(BinOp::Sub, b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Binary(BinOp::Mul, b(x), b(y))),
            // x / (1 + y^2)
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::Binary(
                BinOp::Div,
                b(x),
                b(Expr::Binary(BinOp::Add, b(Expr::Num(1.0)), b(Expr::Pow(b(y), 2.0))))
            )),
            inner.clone().prop_map(|x| Expr::Neg(b(x))),
            (inner.clone(), 2..4i32).prop_map(|(x, n)| Expr::Pow(b(x), f64::from(n))),
            // sqrt(x^2 + 1), exp(x / (1 + x^2))
            inner.clone().prop_map(|x| Expr::Call(
                Func::Sqrt,
                b(Expr::Binary(BinOp::Add, b(Expr::Pow(b(x), 2.0)), b(Expr::Num(1.0))))
            )),
            inner.clone().prop_map(|x| Expr::Call(
                Func::Exp,
                b(Expr::Binary(
                    BinOp::Div,
                    b(x.clone()),
                    b(Expr::Binary(BinOp::Add, b(Expr::Num(1.0)), b(Expr::Pow(b(x), 2.0))))
                ))
            )),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dual_derivative_matches_central_difference(e in safe_expr(), u in -2.0..2.0f64) {
        let f = FluxExpr::from(e);
        let h = 1e-6;
        let (Ok((v, d)), Ok(p), Ok(m)) = (f.eval_d(u), f.eval(u + h), f.eval(u - h)) else {
            return Err(TestCaseError::reject("outside domain"));
        };
        prop_assume!(v.abs() < 1e4);
        let fd = (p - m) / (2.0 * h);
        let tol = 1e-6 * (1.0 + d.abs());
        prop_assert!((fd - d).abs() <= tol, "{f} at {u}: dual {d}, fd {fd}");
        prop_assert_eq!(f.eval(u).unwrap(), v);
    }
}

proptest! {
    #[test]
    fn canonical_print_reparses_to_same_tree(e in safe_expr()) {
        let printed = e.to_string();
        let back = FluxExpr::parse(&printed).unwrap();
        prop_assert_eq!(back.root(), &e);
        let again = FluxExpr::parse(&back.to_string()).unwrap();
        prop_assert_eq!(again.root(), &e);
    }

    #[test]
    fn eval_is_bit_reproducible(e in safe_expr(), u in -2.0..2.0f64) {
        let f = FluxExpr::from(e);
        let a = f.eval(u).map(f64::to_bits);
        let c = f.eval(u).map(f64::to_bits);
        prop_assert_eq!(a, c);
    }

    #[test]
    fn convex_minimizer_is_located(m in -3.0..3.0f64, a in 0.2..4.0f64, q in 0.0..2.0f64, c in -2.0..2.0f64) {
        let text = format!("{a:?}*(u-{m:?})^2 + {q:?}*(u-{m:?})^4 + {c:?}");
        let f = FluxExpr::parse(&text).unwrap();
        let dom = Interval::new(-5.0, 5.0);
        let cl = classify_type(&f, dom, 4096).unwrap();
        prop_assert_eq!(cl.kind, FluxKind::ConvexType);
        prop_assert!((cl.theta.unwrap() - m).abs() <= 1e-8 * dom.width(), "{text}: {:?}", cl.theta);
    }

    #[test]
    fn asymptotics_are_recovered(c in 0.5..5.0f64, k in 0usize..4) {
        let nu = [0.0, 0.5, 1.0, 1.5][k];
        let text = if nu == 0.0 {
            format!("{c:?} + 1/(1+u^2)")
        } else {
            format!("{c:?}*u^{nu:?} + u^{:?}", nu - 0.5)
        };
        let a = estimate_asymptotics(&FluxExpr::parse(&text).unwrap()).unwrap();
        prop_assert!((a.nu - nu).abs() <= 1e-3, "{text}: nu {}", a.nu);
        prop_assert!((a.c - c).abs() <= 0.01 * c, "{text}: c {}", a.c);
        prop_assert_eq!(a.chi, 1);
    }

    #[test]
    fn deficit_is_antisymmetric(u0 in -4.0..4.0f64, u1 in -4.0..4.0f64) {
        let fl = FluxExpr::parse("sqrt(u^2+1)+1").unwrap();
        let fr = FluxExpr::parse("1/sqrt(u^2+1)").unwrap();
        prop_assert_eq!(rh_deficit(&fl, &fr, u0, u1).unwrap(), -rh_deficit(&fr, &fl, u1, u0).unwrap());
    }

    /// Here min f_l exceeds max f_r, so every state pair has a positive deficit.
    #[test]
    fn deficit_positive_under_separated_fluxes(u0 in -5.0..5.0f64, u1 in -5.0..5.0f64, k in 0usize..3) {
        let (l, r) = [
            ("(1+2*u^2)/(1+u^2)", "-(1+2*u^2)/(1+u^2)"),
            ("sqrt(u^2+1)", "-sqrt(u^2+1)"),
            ("u^2+1", "1/(2*(u^2+1))"),
        ][k];
        let s = ProblemSetup::new(l, r, 0.0, 0.0, Interval::new(-5.0, 5.0)).unwrap();
        let (pl, pr) = s.profiles().unwrap();
        prop_assert!(s.geometry(&pl, &pr).unwrap().assumption1_holds);
        prop_assert!(rh_deficit(&s.f_l, &s.f_r, u0, u1).unwrap() > 0.0);
    }

    #[test]
    fn table_rows_obey_exponent_and_kind_laws(seed in any::<u64>(), k in 0usize..11) {
        let row = TableRow::ALL[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = sample_admissible(row, &mut rng);
        let p = classify_shadow(c.nu1, c.nu2, c.chi, c.kappa, c.c1, c.c2).unwrap();
        prop_assert_eq!(p.alpha.max(p.beta), 1.0);
        prop_assert!(p.xi0 >= 0.0 && p.xi1 >= 0.0);
        prop_assert_eq!(p.kind, row.tabulated_kind());
        if p.alpha == 1.0 && p.beta == 1.0 {
            prop_assert!((p.xi0 + p.xi1 - p.kappa).abs() <= 1e-12 * p.kappa.max(1.0));
        }
        prop_assert!((p.delta_coefficient() - p.kappa).abs() <= 1e-12 * p.kappa);

        let net = ShadowWaveNet::new(0.3, -0.2, p);
        let mut prev = f64::INFINITY;
        for e in 2..=8 {
            let drift = (net.strength(10f64.powi(-e), 1.0) - net.strength_limit(1.0)).abs();
            prop_assert!(drift <= prev + 1e-12, "{row:?} drift {drift} after {prev}");
            prev = drift;
        }
    }

    #[test]
    fn case_partition_is_exclusive(ul in -3.0..3.0f64, ur in -3.0..3.0f64, tl in -1.0..1.0f64, tr in -1.0..1.0f64) {
        let c = select_case(ul, ur, tl, tr);
        let expect = match (ul >= tl, ur >= tr) {
            (true, true) => RiemannCase::I,
            (true, false) => RiemannCase::II,
            (false, true) => RiemannCase::III,
            (false, false) => RiemannCase::IV,
        };
        prop_assert_eq!(c, expect);
    }

    #[test]
    fn fans_never_cross_the_interface(ul in -3.0..3.0f64, ur in -3.0..3.0f64, x in -3.0..3.0f64, lambda in 0.1..10.0f64) {
        let s = ProblemSetup::new("sqrt(u^2+1)+1", "-sqrt((u-0.5)^2+1)", ul, ur, Interval::new(-5.0, 5.0)).unwrap();
        let (pl, pr) = s.profiles().unwrap();
        let fan = solve_riemann(&s, &pl, &pr).unwrap();
        if let Some(r) = &fan.back {
            prop_assert!(r.speed_hi <= 0.0);
        }
        if let Some(r) = &fan.fwd {
            prop_assert!(r.speed_lo >= 0.0);
        }
        let (u0, u1) = (fan.sdw.u0, fan.sdw.u1);
        prop_assert!(twoflux::analysis::is_overcompressive(&s.f_l, &s.f_r, u0, u1).unwrap());

        let eps = 1e-6;
        prop_assume!(x.abs() > 1e-3);
        let a = fan.sample(x, 1.0, eps).unwrap();
        let c = fan.sample(lambda * x, lambda, eps).unwrap();
        prop_assert!((a - c).abs() <= 1e-11, "self-similarity: {a} vs {c}");
    }

    #[test]
    fn roe_identity_holds(ul in -3.0..3.0f64, ur in -3.0..3.0f64, jump in any::<bool>(), left_one in any::<bool>()) {
        let fl = FluxExpr::parse("u^3-u").unwrap();
        let fr = FluxExpr::parse("exp(u/3)-1").unwrap();
        let hl = if left_one { 1.0 } else { 0.0 };
        let hr = if jump { 1.0 } else { hl };
        let big = |u: f64, h: f64| h * fr.eval(u).unwrap() + (1.0 - h) * fl.eval(u).unwrap();
        let m = roe_matrix(ul, hl, ur, hr, &fl, &fr).unwrap();
        let df = big(ur, hr) - big(ul, hl);
        prop_assert!((m.gamma * (ur - ul) + m.rho * (hr - hl) - df).abs() <= 1e-12 * (1.0 + df.abs()));
    }

    #[test]
    fn single_flux_conserves_mass(us in prop::collection::vec(-1.0..1.0f64, 8..40)) {
        let f = FluxExpr::parse("u^2/2").unwrap();
        let n = us.len();
        let s = GridState::new(0.0, 0.1, us, vec![0.0; n], 0.0).unwrap();
        let next = step(&s, 0.05, &f, &f, 0.0).unwrap();
        let mass = |g: &GridState| g.u.iter().sum::<f64>() * g.dx;
        let boundary = 0.05 * (f.eval(s.u[0]).unwrap() - f.eval(s.u[n - 1]).unwrap());
        prop_assert!((mass(&next) - mass(&s) - boundary).abs() <= 1e-10);
    }
}

#[test]
fn roe_gamma_is_consistent_with_the_jacobian() {
    let fl = FluxExpr::parse("(1+2*u^2)/(1+u^2)").unwrap();
    let fr = FluxExpr::parse("-(1+2*u^2)/(1+u^2)").unwrap();
    for (u, h) in [(0.3, 0.0), (1.7, 1.0), (-0.8, 0.0)] {
        let exact = if h == 0.0 { fl.derivative(u).unwrap() } else { fr.derivative(u).unwrap() };
        let errs: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&d| (roe_matrix(u, h, u + d, h, &fl, &fr).unwrap().gamma - exact).abs())
            .collect();
        assert!(errs[1] < 0.2 * errs[0] && errs[2] < 0.2 * errs[1], "{errs:?}");
    }
}

#[test]
fn h_is_untouched_for_a_thousand_steps() {
    let fl = FluxExpr::parse("(1+2*u^2)/(1+u^2)").unwrap();
    let fr = FluxExpr::parse("-(1+2*u^2)/(1+u^2)").unwrap();
    let s0 = GridState::riemann(-1.0, 1.0, 0.05, 1.0, 1.0).unwrap();
    let mut s = s0.clone();
    for _ in 0..1000 {
        s = step(&s, 0.01, &fl, &fr, 0.0).unwrap();
        assert!(s.h.iter().zip(&s0.h).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn rarefaction_edges_are_continuous() {
    let f = FluxExpr::parse("-sqrt(u^2+1)").unwrap();
    let r = Rarefaction::new(Side::Forward, &f, 0.0, -1.0).unwrap().unwrap();
    let mut prev = f64::INFINITY;
    for k in 2..10 {
        let d = (r.value(r.speed_lo + 10f64.powi(-k)).unwrap() - r.u_slow).abs();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-8);
}

#[test]
fn constant_single_flux_state_has_no_singular_mass() {
    let s = ProblemSetup::new("u^2/2", "u^2/2", 0.7, 0.7, Interval::new(-5.0, 5.0)).unwrap();
    let profile = ShadowProfile {
        alpha: 1.0,
        beta: 1.0,
        xi0: 0.0,
        xi1: 0.0,
        kappa: 0.0,
        kind: ShadowKind::DeltaShock,
        table_row: TableRow::PlusBothSub,
    };
    let fan = WaveFan {
        back: None,
        sdw: ShadowWaveNet::new(0.7, 0.7, profile),
        fwd: None,
        case: RiemannCase::I,
        u_l: 0.7,
        u_r: 0.7,
    };
    let p = SimulationParams {
        t_end: 0.5,
        snapshot_times: vec![0.0, 0.25],
        ..Default::default()
    };
    let snaps = twoflux::godunov::run(&s, &p).unwrap();
    let rep = delta_mass(&snaps, &fan, 1e-6).unwrap();
    assert!(rep.p_l.iter().all(|m| m.abs() <= 1e-8), "{:?}", rep.p_l);
}
