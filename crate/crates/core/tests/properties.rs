use proptest::prelude::*;

use tvar::blockdet::{compare_abar, compare_car, compare_par, xi_par_decomposed};
use tvar::moments::{
    autocovariance, autocovariance_recursive, forecast, unconditional_variance, Truncation,
};
use tvar::schedules::{season_of, validate, CoefficientSchedule, CoefficientTuple, Schedule};
use tvar::solution::{forward_recursion, general_solution, particular_solution_determinant_oracle};
use tvar::vs_rep::{build_vs, stationarity_check, Verdict};
use tvar::xi::{
    green_functions, xi, xi_determinant_oracle, xi_second, xi_second_determinant_oracle,
};
use tvar::{
    BreakSchedule, ConstantSchedule, CyclicalSchedule, PeriodicSchedule, TabulatedSchedule,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn tuple(c: f64) -> impl Strategy<Value = CoefficientTuple> {
    (-c..c, -c..c, -c..c, 0.1f64..3.0).prop_map(|(a, b, d, s)| CoefficientTuple::new(a, b, d, s))
}

/// Generic schedule on `[start, start + len)` with coefficients in `(-1, 1)`.
fn tabulated(len: std::ops::Range<usize>) -> impl Strategy<Value = TabulatedSchedule> {
    (-20i64..20, prop::collection::vec(tuple(1.0), len))
        .prop_map(|(start, rows)| TabulatedSchedule::new(start, rows).unwrap())
}

fn periodic(
    seasons: std::ops::RangeInclusive<usize>,
    c: f64,
) -> impl Strategy<Value = PeriodicSchedule> {
    prop::collection::vec(tuple(c), seasons).prop_map(|s| PeriodicSchedule::new(s).unwrap())
}

fn cyclical() -> impl Strategy<Value = CyclicalSchedule> {
    (2usize..=8)
        .prop_flat_map(|l| {
            let d = 0..=3.min(l - 1);
            (Just(l), d)
        })
        .prop_flat_map(|(l, d)| {
            (
                Just(l),
                prop::sample::subsequence((1..l).collect::<Vec<_>>(), d),
                prop::collection::vec(tuple(1.0), d + 1),
            )
        })
        .prop_map(|(l, b, cycles)| CyclicalSchedule::new(l, b, cycles).unwrap())
}

fn breaks() -> impl Strategy<Value = BreakSchedule> {
    (5usize..=14)
        .prop_flat_map(|k| {
            (
                Just(k),
                prop::sample::subsequence((1..k).collect::<Vec<_>>(), 0..=4),
            )
        })
        .prop_flat_map(|(k, offsets)| {
            let r = offsets.len();
            (
                -10i64..10,
                Just(k),
                Just(offsets),
                prop::collection::vec(tuple(1.5), r + 1),
            )
        })
        .prop_map(|(anchor, k, offsets, regimes)| {
            BreakSchedule::new(anchor, k, offsets, regimes).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn recurrence_matches_determinant(s in tabulated(2..16)) {
        let t = s.end();
        let depth = s.rows.len();
        let table = green_functions(&s, t, depth).unwrap();
        for k in 1..=depth {
            let oracle = xi_determinant_oracle(&s, t, k).unwrap();
            prop_assert!(close(xi(&s, t, k as isize).unwrap(), oracle, 1e-10));
            prop_assert!(close(table.get(k as isize), oracle, 1e-10));
        }
    }

    #[test]
    fn anchor_moving_recurrence(s in tabulated(4..16)) {
        let t = s.end();
        for k in 2..s.rows.len() as isize {
            let lhs = xi(&s, t, k).unwrap();
            let rhs = s.phi1(t).unwrap() * xi(&s, t - 1, k - 1).unwrap()
                + s.phi2(t).unwrap() * xi(&s, t - 2, k - 2).unwrap();
            prop_assert!(close(lhs, rhs, 1e-12));
        }
    }

    #[test]
    fn second_solution_matches_its_determinant(s in tabulated(2..16)) {
        let t = s.end();
        for k in 1..=s.rows.len() {
            let v = xi_second(&s, t, k).unwrap();
            prop_assert!(close(v, xi_second_determinant_oracle(&s, t, k).unwrap(), 1e-10));
            let expected = s.phi2(t - k as i64 + 1).unwrap() * xi(&s, t, k as isize - 1).unwrap();
            prop_assert!(close(v, expected, 1e-14));
        }
    }

    #[test]
    fn solution_triangle(
        s in tabulated(14..15),
        y in (-3.0f64..3.0, -3.0f64..3.0),
        eps in prop::collection::vec(-2.0f64..2.0, 12),
        k in 1usize..=12,
    ) {
        let t = s.end();
        let eps = &eps[..k];
        let sol = general_solution(&s, t, k).unwrap();
        let closed = sol.evaluate(y, eps).unwrap();
        let rec = forward_recursion(&s, t, y, eps).unwrap();
        let oracle = sol.homogeneous(y) + particular_solution_determinant_oracle(&s, t, eps).unwrap();
        prop_assert!(close(closed, rec, 1e-10));
        prop_assert!(close(closed, oracle, 1e-10));
    }

    #[test]
    fn solution_is_linear(
        s in tabulated(10..11),
        y1 in (-3.0f64..3.0, -3.0f64..3.0),
        y2 in (-3.0f64..3.0, -3.0f64..3.0),
        e1 in prop::collection::vec(-2.0f64..2.0, 8),
        e2 in prop::collection::vec(-2.0f64..2.0, 8),
        a in -2.0f64..2.0,
    ) {
        let t = s.end();
        let sol = general_solution(&s, t, 8).unwrap();
        let hom = |y| sol.homogeneous(y);
        let inn = |e: &[f64]| sol.innovation_part(e).unwrap();
        let ymix = (a * y1.0 + y2.0, a * y1.1 + y2.1);
        let emix: Vec<f64> = e1.iter().zip(&e2).map(|(x, z)| a * x + z).collect();
        prop_assert!(close(hom(ymix), a * hom(y1) + hom(y2), 1e-12));
        prop_assert!(close(inn(&emix), a * inn(&e1) + inn(&e2), 1e-12));
    }

    #[test]
    fn mse_is_nondecreasing_in_horizon(s in tabulated(16..17)) {
        let t = s.end();
        let mut last = 0.0;
        for k in 1..=14 {
            let f = forecast(&s, t, k, (0.0, 0.0)).unwrap();
            prop_assert!(f.mse >= last);
            last = f.mse;
        }
    }

    #[test]
    fn periodic_shift_invariance(p in periodic(1..=6, 1.0), t in -30i64..30, k in 0isize..20) {
        let l = p.seasons_per_period() as i64;
        let a = xi(&p, t, k).unwrap();
        prop_assert_eq!(a, xi(&p, t + l, k).unwrap());
        prop_assert_eq!(a, xi(&p, t - 3 * l, k).unwrap());
        prop_assert!(validate(&p, t..=t + 2 * l).is_valid());
    }

    #[test]
    fn par_three_way(p in periodic(1..=5, 1.0), n in 1usize..=4, t in -12i64..12) {
        let r = compare_par(&p, t, n).unwrap();
        prop_assert_eq!(r.terms, 1 << (n - 1));
        prop_assert!(r.max_deviation() <= 1e-11, "{r:?}");
    }

    #[test]
    fn car_three_way(c in cyclical(), periods in -3i64..3) {
        let t = periods * c.seasons as i64;
        let r = compare_car(&c, t).unwrap();
        prop_assert_eq!(r.terms, 1 << c.breaks());
        prop_assert!(r.max_deviation() <= 1e-11, "{r:?}");
    }

    #[test]
    fn abar_three_way(b in breaks()) {
        let r = compare_abar(&b).unwrap();
        prop_assert_eq!(r.terms, 1 << b.breaks());
        prop_assert!(r.max_deviation() <= 1e-11, "{r:?}");
    }

    #[test]
    fn zero_coupling_collapses_to_a_product(p in periodic(2..=5, 1.0), n in 2usize..=4) {
        let seasons: Vec<_> = p
            .seasons
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { CoefficientTuple { phi2: 0.0, ..*c } } else { *c })
            .collect();
        let p = PeriodicSchedule::new(seasons).unwrap();
        let l = p.seasons_per_period() as isize;
        // anchor on the last season so every boundary coupling is phi2 of season 1
        let t = l as i64;
        let d = xi_par_decomposed(&p, t, n).unwrap();
        prop_assert!(close(d.value, xi(&p, t, l).unwrap().powi(n as i32), 1e-12));
    }

    #[test]
    fn period_induction_step(p in periodic(2..=5, 1.0), t in -10i64..10) {
        let l = p.seasons_per_period();
        for n in 1..=4usize {
            let lhs = xi(&p, t, ((n + 1) * l) as isize).unwrap();
            let rhs = xi(&p, t, (n * l) as isize).unwrap() * xi(&p, t, l as isize).unwrap()
                + p.phi2(t - (n * l) as i64 + 1).unwrap()
                    * xi(&p, t, (n * l) as isize - 1).unwrap()
                    * xi(&p, t - 1, l as isize - 1).unwrap();
            prop_assert!(close(lhs, rhs, 1e-11));
        }
    }

    #[test]
    fn par1_product_condition_matches_spectral_radius(phi1 in prop::collection::vec(-1.6f64..1.6, 2..=6)) {
        let p = PeriodicSchedule::from_ar(&phi1, &vec![0.0; phi1.len()]).unwrap();
        let product: f64 = phi1.iter().product();
        let v = stationarity_check(&build_vs(&p).unwrap());
        prop_assume!(v.verdict != Verdict::Indeterminate);
        prop_assert!(close(v.spectral_radius, product.abs(), 1e-10));
        prop_assert_eq!(v.is_stationary(), product.abs() < 1.0);
    }

    #[test]
    fn autocovariance_forms_agree(c in tuple(0.6), lag in 0usize..6) {
        let s = ConstantSchedule::new(CoefficientTuple { phi2: c.phi2 * 0.5, ..c }).unwrap();
        let tr = Truncation::default();
        let a = autocovariance(&s, 0, lag, tr).unwrap();
        let b = autocovariance_recursive(&s, 0, lag, tr).unwrap();
        prop_assert!(a.converged && b.converged);
        prop_assert!(close(a.value, b.value, 1e-9));
    }

    #[test]
    fn toml_round_trip(p in periodic(1..=6, 1.0), c in cyclical(), b in breaks()) {
        for s in [Schedule::from(p), Schedule::from(c), Schedule::from(b)] {
            let text = toml::to_string(&s).unwrap();
            let back: Schedule = toml::from_str(&text).unwrap();
            let (lo, hi) = s.window().unwrap_or((-50, 49));
            let step = ((hi - lo) / 100).max(1);
            let times: Vec<i64> = (0..100).map(|i| (lo + i * step).min(hi)).collect();
            for t in times {
                prop_assert_eq!(s.evaluate(t).unwrap(), back.evaluate(t).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Converged moments exactly when the vector-of-seasons form is stable,
    /// away from the boundary.
    #[test]
    fn moment_convergence_follows_stationarity(p in periodic(2..=4, 1.3)) {
        let v = stationarity_check(&build_vs(&p).unwrap());
        let l = p.seasons_per_period();
        let tr = Truncation::default();
        if v.is_stationary() && v.margin > 0.02 {
            for t in 1..=l as i64 {
                prop_assert!(unconditional_variance(&p, t, tr).unwrap().variance_converged);
            }
        } else if v.margin < -0.05 {
            for t in 1..=l as i64 {
                prop_assert!(!unconditional_variance(&p, t, tr).unwrap().variance_converged);
            }
        }
        prop_assert_eq!(season_of(l as i64, l), l);
    }
}
