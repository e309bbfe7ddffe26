use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use mixbvp::certification::{brouwer_degree_1d, check_positivity, kernel_h};
use mixbvp::cli::{read_solution_csv, write_solution_csv};
use mixbvp::coincidence::{
    image_defect, kernel_coordinate, kernel_embed, project_p, project_q, right_inverse_kp, KernelElement,
};
use mixbvp::corpus::{logistic_family, manufactured_problem};
use mixbvp::nonlinearity::{extend_tilde, nemytskii};
use mixbvp::numerics::{cumulative_integral, double_cumulative, integrate};
use mixbvp::solver::{phi_operator, residual, solve_fixed_point};
use mixbvp::{
    BoundaryCondition, CoincidenceFrame, Grid, GridFunction, HomotopyParams, SampledDensity, SolveOptions,
};

fn bc_strategy() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![Just(BoundaryCondition::Bc1), Just(BoundaryCondition::Bc2), Just(BoundaryCondition::Bc3)]
}

/// Coefficients of `Σ c_k sin(k t + φ_k)` plus a constant.
fn smooth_coeffs() -> impl Strategy<Value = (f64, Vec<(f64, f64, f64)>)> {
    (-2.0..2.0f64, prop::collection::vec((-2.0..2.0f64, 0.5..4.0f64, 0.0..(2.0 * PI)), 1..4))
}

fn eval(c: &(f64, Vec<(f64, f64, f64)>), t: f64) -> (f64, f64, f64) {
    let mut v = c.0;
    let mut d = 0.0;
    let mut dd = 0.0;
    for &(a, k, ph) in &c.1 {
        v += a * (k * t + ph).sin();
        d += a * k * (k * t + ph).cos();
        dd -= a * k * k * (k * t + ph).sin();
    }
    (v, d, dd)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integrate_is_linear(
        c1 in smooth_coeffs(), c2 in smooth_coeffs(),
        a in -5.0..5.0f64, b in -5.0..5.0f64,
        length in 0.2..4.0f64, n in 2usize..300,
    ) {
        let g = Grid::new(length, n).unwrap();
        let w1 = SampledDensity::from_fn(g, |t| eval(&c1, t).0);
        let w2 = SampledDensity::from_fn(g, |t| eval(&c2, t).0);
        let combo = SampledDensity::new(g, w1.w.iter().zip(&w2.w).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let lhs = integrate(&combo);
        let rhs = a * integrate(&w1) + b * integrate(&w2);
        let scale = (a.abs() * w1.sup_norm() + b.abs() * w2.sup_norm()) * length + 1.0;
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        let cl = cumulative_integral(&combo);
        let (c1v, c2v) = (cumulative_integral(&w1), cumulative_integral(&w2));
        for i in 0..g.len() {
            prop_assert!((cl.w[i] - (a * c1v.w[i] + b * c2v.w[i])).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn cumulative_endpoints_agree_to_second_order(c in smooth_coeffs(), length in 0.5..2.0f64) {
        // double_cumulative is trapezoid-on-trapezoid; Simpson of the
        // cumulative differs from it by O(h²)
        let errs: Vec<f64> = [200usize, 400].iter().map(|&n| {
            let g = Grid::new(length, n).unwrap();
            let w = SampledDensity::from_fn(g, |t| eval(&c, t).0);
            (double_cumulative(&w).last() - integrate(&cumulative_integral(&w))).abs()
        }).collect();
        prop_assume!(errs[0] > 1e-11);
        let ratio = errs[0] / errs[1];
        prop_assert!((3.0..5.0).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn extension_matches_base_and_is_positive_below_zero(
        t in 0.0..1.0f64, s in -10.0..10.0f64, xi in -10.0..10.0f64,
        lambda in 0.1..3.0f64, c in -1.0..1.0f64,
    ) {
        let spec = logistic_family(lambda, c, 1.0, BoundaryCondition::Bc1).unwrap();
        let ft = extend_tilde(spec.f.clone());
        if s >= 0.0 {
            prop_assert_eq!(ft.eval(t, s, xi), spec.f.eval(t, s, xi));
        } else {
            prop_assert_eq!(ft.eval(t, s, xi), -s);
            prop_assert!(ft.eval(t, s, xi) > 0.0);
        }
    }

    #[test]
    fn nemytskii_commutes_with_restriction(c in smooth_coeffs(), n in 2usize..100) {
        let ft = extend_tilde(logistic_family(1.0, 0.3, 1.0, BoundaryCondition::Bc1).unwrap().f);
        let fine = Grid::new(1.0, 2 * n).unwrap();
        let coarse = Grid::new(1.0, n).unwrap();
        let uf = GridFunction::from_fn(fine, |t| { let (v, d, _) = eval(&c, t); (v, d) });
        let uc = GridFunction::new(
            coarse,
            (0..=n).map(|i| uf.u[2 * i]).collect(),
            (0..=n).map(|i| uf.du[2 * i]).collect(),
        ).unwrap();
        let wf = nemytskii(&ft, &uf).unwrap();
        let wc = nemytskii(&ft, &uc).unwrap();
        for i in 0..=n {
            prop_assert_eq!(wc.w[i], wf.w[2 * i]);
        }
    }

    #[test]
    fn projections_are_idempotent(
        bc in bc_strategy(), cu in smooth_coeffs(), cw in smooth_coeffs(), length in 0.3..3.0f64,
    ) {
        let g = Grid::new(length, 256).unwrap();
        let u = GridFunction::from_fn(g, |t| { let (v, d, _) = eval(&cu, t); (v, d) });
        let pu = project_p(&u, bc);
        prop_assert!(project_p(&pu, bc).distance(&pu) <= 1e-10 * (1.0 + pu.c1_norm()));
        let w = SampledDensity::from_fn(g, |t| eval(&cw, t).0);
        let q = project_q(&w, bc);
        assert_relative_eq!(project_q(&SampledDensity::constant(g, q), bc), q, epsilon = 1e-12, max_relative = 1e-12);
        let frame = CoincidenceFrame::new(bc, g);
        prop_assert!(image_defect(&frame.complement(&w), bc).abs() <= 1e-10 * (1.0 + w.sup_norm()));
    }

    #[test]
    fn kernel_elements_are_fixed_by_p(bc in bc_strategy(), a in -10.0..10.0f64, length in 0.3..3.0f64) {
        let g = Grid::new(length, 64).unwrap();
        let e = kernel_embed(KernelElement { a, bc }, g);
        prop_assert_eq!(bc.defect(&e), [0.0, 0.0]);
        let pe = project_p(&e, bc);
        prop_assert!(pe.distance(&e) <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn right_inverse_solves_and_lands_in_ker_p(bc in bc_strategy(), cw in smooth_coeffs(), length in 0.5..2.0f64) {
        let n = 400;
        let g = Grid::new(length, n).unwrap();
        let frame = CoincidenceFrame::new(bc, g);
        let w = frame.complement(&SampledDensity::from_fn(g, |t| eval(&cw, t).0));
        let u = right_inverse_kp(&w, bc).unwrap();
        let h = g.step();
        // the discrete second difference averages w with weights (1, 2, 1)/4
        let w2max = cw.1.iter().map(|&(a, k, _)| a.abs() * k * k).sum::<f64>();
        let mut err = 0.0_f64;
        for i in 1..n {
            let d2 = (u.u[i + 1] - 2.0 * u.u[i] + u.u[i - 1]) / (h * h);
            err = err.max((-d2 - w.w[i]).abs());
        }
        prop_assert!(err <= 0.25 * h * h * w2max + 1e-9, "err {} bound {}", err, 0.25 * h * h * w2max);
        let b = bc.defect(&u);
        // trapezoid cumulative integrals leave an O(h²) boundary residue
        let bound = h * h * length * (1.0 + w2max);
        prop_assert!(b[0].abs() + b[1].abs() <= bound, "defect {:?} bound {}", b, bound);
        prop_assert!(kernel_coordinate(&u, bc).abs() <= bound);
    }

    #[test]
    fn degree_sign_rule(lo in -5.0..-0.01f64, hi in 0.01..5.0f64, s1 in prop::bool::ANY, s2 in prop::bool::ANY) {
        let h = move |x: f64| if x < 0.0 { if s1 { 1.0 } else { -1.0 } } else if s2 { 2.0 } else { -2.0 };
        let expected = ((if s2 { 1.0 } else { -1.0 }) - (if s1 { 1.0 } else { -1.0 })) / 2.0;
        prop_assert_eq!(brouwer_degree_1d(h, lo, hi).unwrap(), expected as i32);
    }

    #[test]
    fn kernel_map_is_positive_multiple_for_negative_a(
        bc in bc_strategy(), a in -20.0..-1e-6f64, lambda in 0.1..3.0f64, length in 0.2..3.0f64,
    ) {
        let spec = logistic_family(lambda, 0.2, length, bc).unwrap();
        let g = Grid::new(length, 64).unwrap();
        let h = kernel_h(a, &spec.extended(), bc, g).unwrap();
        prop_assert!(h < 0.0);
        let factor = match bc {
            BoundaryCondition::Bc1 => 1.0 + length / 2.0,
            BoundaryCondition::Bc2 => length / 2.0,
            BoundaryCondition::Bc3 => 1.0,
        };
        assert_relative_eq!(h, a * factor, max_relative = 1e-12);
    }

    #[test]
    fn csv_round_trip_is_bit_exact(
        values in prop::collection::vec((-1e300..1e300f64, -1e-300..1e-300f64), 3..50),
        length in 1e-3..1e3f64,
    ) {
        let g = Grid::new(length, values.len() - 1).unwrap();
        let u = GridFunction::new(g, values.iter().map(|p| p.0).collect(), values.iter().map(|p| p.1).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        write_solution_csv(&path, &u).unwrap();
        let back = read_solution_csv(&path).unwrap();
        prop_assert_eq!(back.grid().intervals(), g.intervals());
        prop_assert_eq!(back.u, u.u);
        prop_assert_eq!(back.du, u.du);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_solutions_are_fixed_points_and_nonnegative(
        bc in bc_strategy(), lambda in 0.5..2.5f64, c in -0.3..0.3f64, a in -1.0..3.0f64, length in 0.5..1.5f64,
    ) {
        let spec = logistic_family(lambda, c, length, bc).unwrap();
        let ft = spec.extended();
        let g = Grid::new(length, 400).unwrap();
        let frame = CoincidenceFrame::new(bc, g);
        let opts = SolveOptions::default();
        let hp = HomotopyParams::unforced();
        let init = frame.embed(a);
        if let Ok(rep) = solve_fixed_point(&init, &ft, &frame, &hp, &opts) {
            if rep.converged {
                let gap = phi_operator(&rep.solution, &ft, &frame, &hp).unwrap().distance(&rep.solution);
                let (res, defect) = residual(&rep.solution, &ft, bc, &hp).unwrap();
                prop_assert!(gap <= 10.0 * opts.tol && res <= opts.tol && defect <= opts.tol);
                prop_assert!(rep.solution.min_value() >= -10.0 * opts.tol);
            }
            let again = solve_fixed_point(&init, &ft, &frame, &hp, &opts).unwrap();
            prop_assert_eq!(again.solution.u, rep.solution.u);
            prop_assert_eq!(again.iterations, rep.iterations);
        }
    }

    #[test]
    fn manufactured_solutions_are_recovered(
        bc in bc_strategy(), c in 0.5..2.0f64, dfrac in -2.0..2.0f64, length in 0.5..2.0f64,
    ) {
        let spec = manufactured_problem(bc, length, c, dfrac * c).unwrap();
        let g = Grid::new(length, 800).unwrap();
        let frame = CoincidenceFrame::new(bc, g);
        let init = frame.embed(0.5 * bc.kernel_radius(1.0, length));
        let rep = solve_fixed_point(&init, &spec.extended(), &frame, &HomotopyParams::unforced(), &SolveOptions::default()).unwrap();
        let exact = spec.known_solution.as_ref().unwrap().on_grid(g);
        if rep.converged {
            let h = g.step();
            prop_assert!(rep.solution.value_distance(&exact) <= 100.0 * h * h * (1.0 + exact.sup_norm()));
            let cert = check_positivity(&rep.solution, bc, 1e-4);
            prop_assert!(cert.meets_claim(bc), "{:?}", cert);
        }
    }
}

#[test]
fn forced_nagumo_pair_is_bigger() {
    let spec = logistic_family(1.0, 0.0, 1.0, BoundaryCondition::Bc1).unwrap();
    let pair = spec.f.nagumo_pair(2.0);
    let forced = pair.forced(0.5, Arc::new(|_| 1.0));
    assert_eq!((forced.psi)(0.3), (pair.psi)(0.3) + 0.5);
    assert_eq!((forced.phi)(2.0), (pair.phi)(2.0) + 1.0);
}
