use super::*;
use proptest::prelude::*;

fn lambdas(ls: &[f64]) -> Vec<DiscreteLevyMeasure> {
    ls.iter().map(|&l| DiscreteLevyMeasure::dirac(1.0, l).unwrap()).collect()
}

fn identity() -> TestFunction {
    TestFunction::from_rule(&FunctionRule::Identity).unwrap()
}

#[test]
fn norm_examples() {
    let v = lambdas(&[1.0, 2.0]);
    assert!((v_norm(&identity(), &Region::Whole, &v, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    let zero = TestFunction::from_rule(&FunctionRule::Constant { value: 0.0 }).unwrap();
    assert_eq!(v_norm(&zero, &Region::Whole, &v, 1.0).unwrap(), 0.0);
    assert_eq!(v_norm(&identity(), &Region::closed(3.0, 4.0), &v, 1.0).unwrap(), 0.0);
    assert!(v_norm(&identity(), &Region::Whole, &v, 0.5).is_err());
}

#[test]
fn tightness_of_finite_families() {
    let v = vec![
        DiscreteLevyMeasure::from_pairs(&[(0.5, 1.0), (3.0, 0.2)]).unwrap(),
        DiscreteLevyMeasure::from_pairs(&[(-1.0, 0.4), (2.0, 1.0)]).unwrap(),
    ];
    let prof = tightness_profile(&identity(), &v, 1.0, &[1e-3, 0.5, 10.0]).unwrap();
    assert_eq!(prof[0].compact, Compact::Annulus { inner: 0.5, outer: 3.0 });
    assert_eq!(prof[0].outside, 0.0);
    assert_eq!(prof[2].compact, Compact::Empty);
    match prof[1].compact {
        Compact::Annulus { inner, outer } => assert!(inner >= 0.5 && outer <= 3.0 && prof[1].outside < 0.5),
        c => panic!("{c:?}"),
    }
}

#[test]
fn supported_function_gets_an_annulus_inside_its_support() {
    let f = identity().with_support(Region::closed(1.0, 2.0));
    let v = vec![DiscreteLevyMeasure::from_pairs(&[(0.5, 1.0), (1.2, 1.0), (1.8, 2.0), (4.0, 1.0)]).unwrap()];
    for e in tightness_profile(&f, &v, 1.0, &[1e-6, 1e-2]).unwrap() {
        match e.compact {
            Compact::Annulus { inner, outer } => assert!(1.0 <= inner && outer <= 2.0),
            c => panic!("{c:?}"),
        }
    }
}

#[test]
fn ui_profile_is_an_exact_tail_sum() {
    let k_max = 20;
    let v = vec![DiscreteLevyMeasure::from_pairs(
        &(1..=k_max).map(|k| (k as f64, 1.0 / (k * k) as f64)).collect::<Vec<_>>(),
    )
    .unwrap()];
    let prof = uniform_integrability_profile(&identity(), &v, 1.0, &[1.0, 5.0, 10.0, 21.0]).unwrap();
    for e in &prof {
        let exact: f64 = (1..=k_max).filter(|&k| k as f64 >= e.level).map(|k| 1.0 / k as f64).sum();
        assert!((e.tail - exact).abs() < 1e-12);
    }
    assert_eq!(prof[3].tail, 0.0);
    let bounded = TestFunction::from_rule(&FunctionRule::Constant { value: 2.0 }).unwrap();
    assert_eq!(uniform_integrability_profile(&bounded, &v, 1.0, &[2.5]).unwrap()[0].tail, 0.0);
}

#[test]
fn membership_examples() {
    let cfg = MembershipConfig::default();
    let v = vec![
        DiscreteLevyMeasure::from_pairs(&[(0.5, 1.0), (3.0, 0.2)]).unwrap(),
        DiscreteLevyMeasure::from_pairs(&[(-1.0, 0.4), (2.0, 1.0)]).unwrap(),
    ];
    let bounded = TestFunction::from_rule(&FunctionRule::Indicator {
        region: Region::closed(1.0, 5.0),
    })
    .unwrap();
    assert!(membership_lpb(&bounded, &Region::Whole, &v, 1.0, &cfg).unwrap().member);
    assert!(membership_lpb(&identity(), &Region::Whole, &v, 1.0, &cfg).unwrap().member);
    // atoms at 10^k with unit weight: f(z) = z has non-decaying tails
    let wild = vec![DiscreteLevyMeasure::from_pairs(&(1..=6).map(|k| (10f64.powi(k), 1.0)).collect::<Vec<_>>()).unwrap()];
    let m = membership_lpb(&identity(), &Region::Whole, &wild, 1.0, &cfg).unwrap();
    assert!(!m.member && !m.tight && !m.uniformly_integrable);
}

#[test]
fn quasi_continuity_examples() {
    let deltas: Vec<DiscreteLevyMeasure> = [1.0, 1.5, 2.0].iter().map(|&x| DiscreteLevyMeasure::dirac(x, 1.0).unwrap()).collect();
    let point = TestFunction::from_rule(&FunctionRule::Indicator { region: Region::point(1.0) })
        .unwrap()
        .with_discontinuities(Region::point(1.0));
    assert_eq!(
        qc_criterion(&point, &deltas),
        QcVerdict::NotQuasiContinuous {
            measure: 0,
            witness: vec![1.0],
            capacity: 1.0
        }
    );
    let open = TestFunction::from_rule(&FunctionRule::Indicator { region: Region::open(1.0, 2.0) })
        .unwrap()
        .with_discontinuities(Region::points(&[1.0, 2.0]));
    assert_eq!(qc_criterion(&open, &deltas[1..2]), QcVerdict::QuasiContinuous);
    assert_eq!(qc_criterion(&identity(), &deltas), QcVerdict::Inconclusive);
    assert_eq!(
        qc_criterion(&identity().with_discontinuities(Region::Empty), &deltas),
        QcVerdict::QuasiContinuous
    );
}

#[test]
fn non_finite_values_are_reported() {
    let f = TestFunction::new("inverse", |z: &[f64]| 1.0 / (z[0] - 1.0));
    let v = lambdas(&[1.0]);
    assert!(matches!(v_norm(&f, &Region::Whole, &v, 1.0), Err(Error::Evaluation(_))));
}

fn family() -> impl Strategy<Value = Vec<DiscreteLevyMeasure>> {
    proptest::collection::vec(
        proptest::collection::vec((0.1f64..5.0, 0.01f64..2.0), 1..5)
            .prop_filter_map("distinct atoms", |p| DiscreteLevyMeasure::from_pairs(&p).ok()),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_a_seminorm(v in family(), a in -3.0f64..3.0, b in -3.0f64..3.0, c in -2.0f64..2.0, p in 1.0f64..4.0) {
        let f = TestFunction::new("f", move |z: &[f64]| (a * z[0]).sin() + 0.5);
        let g = TestFunction::new("g", move |z: &[f64]| b * z[0] - 1.0);
        let sum = TestFunction::new("f+g", move |z: &[f64]| (a * z[0]).sin() + 0.5 + b * z[0] - 1.0);
        let cf = TestFunction::new("cf", move |z: &[f64]| c * ((a * z[0]).sin() + 0.5));
        let n = |h: &TestFunction| v_norm(h, &Region::Whole, &v, p).unwrap();
        prop_assert!(n(&sum) <= n(&f) + n(&g) + 1e-9);
        prop_assert!((n(&cf) - c.abs() * n(&f)).abs() <= 1e-9 * (1.0 + n(&f)));
    }

    #[test]
    fn profiles_are_monotone(v in family(), eps in proptest::collection::vec(1e-4f64..2.0, 1..6)) {
        let f = TestFunction::new("f", |z: &[f64]| z[0].powi(2));
        let mut levels: Vec<f64> = eps.iter().map(|e| e * 10.0).collect();
        levels.sort_by(f64::total_cmp);
        let ui = uniform_integrability_profile(&f, &v, 1.0, &levels).unwrap();
        prop_assert!(ui.windows(2).all(|w| w[1].tail <= w[0].tail));

        let prof = tightness_profile(&f, &v, 1.0, &eps).unwrap();
        let mut sorted: Vec<&TightnessEntry> = prof.iter().collect();
        sorted.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        let mut outer: Option<(f64, f64)> = None;
        for e in sorted {
            prop_assert!(e.outside < e.eps);
            match e.compact {
                Compact::Annulus { inner, outer: o } => {
                    if let Some((pi, po)) = outer {
                        prop_assert!(inner >= pi && o <= po);
                    }
                    outer = Some((inner, o));
                }
                Compact::Empty => outer = Some((f64::INFINITY, f64::NEG_INFINITY)),
                Compact::NotFound => prop_assert!(false, "finite family always tight"),
            }
        }
    }

    #[test]
    fn membership_is_monotone(v in family(), s in 0.0f64..1.0) {
        let cfg = MembershipConfig { radii: (0.5, 3.0), levels: vec![1.0, 4.0], ui_threshold: 0.5, ..Default::default() };
        let f = TestFunction::new("f", |z: &[f64]| z[0]);
        let g = TestFunction::new("g", move |z: &[f64]| s * z[0] * (z[0] * 7.0).cos().abs());
        let mf = membership_lpb(&f, &Region::Whole, &v, 1.0, &cfg).unwrap();
        let mg = membership_lpb(&g, &Region::Whole, &v, 1.0, &cfg).unwrap();
        prop_assert!(!mf.member || mg.member);
    }
}
