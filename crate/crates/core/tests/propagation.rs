use nalgebra::DMatrix;
use proptest::prelude::*;
use sfq_core::model::ladder_matrices;
use sfq_core::oracle::{resonant_comb, two_level_propagate};
use sfq_core::propagate::{kick_unitary, propagate, to_rotating_frame};
use sfq_core::fitness::extract_angle;
use sfq_core::*;

fn taylor_exp(a: &DMatrix<Complex64>, terms: usize) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..terms {
        term = &term * a / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    sum
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn arb_train(max_len: usize) -> impl Strategy<Value = PulseSequence> {
    prop::collection::vec(-1i64..=1, 1..=max_len)
        .prop_map(|v| PulseSequence::from_values(&v, Alphabet::Bipolar).unwrap())
}

#[test]
fn kick_matches_taylor_series() {
    for dim in [2, 3, 5, 8] {
        let model = TransmonModel::from_ghz(5.0, 0.25, 0.032, dim).unwrap();
        let g = ladder_matrices(dim).unwrap().kick_generator;
        for p in [Pulse::Negative, Pulse::Positive] {
            let c = Complex64::new(p.value() as f64 * 0.016, 0.0);
            let reference = taylor_exp(&g.map(|z| z * c), 20);
            let k = kick_unitary(&model, p);
            assert!(max_diff(k.matrix(), &reference) < 1e-12, "dim {dim} {p:?}");
        }
    }
}

#[test]
fn large_kick_matches_taylor_series() {
    let model = TransmonModel::from_ghz(5.0, 0.25, 0.7, 6).unwrap();
    let g = ladder_matrices(6).unwrap().kick_generator;
    let reference = taylor_exp(&g.map(|z| z * 0.35), 40);
    assert!(max_diff(kick_unitary(&model, Pulse::Positive).matrix(), &reference) < 1e-12);
}

#[test]
fn resonant_comb_accumulates_linearly() {
    let model = TransmonModel::from_ghz(5.0, 0.25, 0.032, 2).unwrap();
    let drive = DriveConfig::from_ghz(25.0).unwrap();
    let spacing = (drive.omega_g() / model.omega0()).round() as usize;
    assert_eq!(spacing, 5);
    for m in 1..=50 {
        let comb = resonant_comb(m, spacing).unwrap();
        let u = to_rotating_frame(&propagate(&comb, &model, &drive), &model);
        let expected = m as f64 * model.delta_theta();
        assert!((extract_angle(&u) - expected).abs() < 1e-6, "M = {m}");
        let oracle = to_rotating_frame(&two_level_propagate(&comb, &model, &drive).unwrap(), &model);
        assert!((extract_angle(&oracle) - expected).abs() < 1e-6, "oracle M = {m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trains_are_unitary(seq in arb_train(128)) {
        let model = TransmonModel::from_ghz(5.0, 0.25, 0.032, 5).unwrap();
        let drive = DriveConfig::default();
        prop_assert!(propagate(&seq, &model, &drive).unitarity_defect() < 1e-10);
    }

    #[test]
    fn two_level_matches_closed_form(seq in arb_train(128)) {
        let model = TransmonModel::from_ghz(4.9, 0.25, 0.032, 2).unwrap();
        let drive = DriveConfig::default();
        let u = propagate(&seq, &model, &drive);
        let v = two_level_propagate(&seq, &model, &drive).unwrap();
        prop_assert!(u.max_abs_diff(&v) < 1e-12);
        prop_assert!(u.total_time() == v.total_time());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn concatenation_is_a_homomorphism(a in arb_train(64), b in arb_train(64)) {
        let model = TransmonModel::from_ghz(5.2, 0.25, 0.032, 5).unwrap();
        let drive = DriveConfig::default();
        let p = Propagator::new(&model, &drive);
        let whole = p.propagate(&a.concat(&b).unwrap());
        let ua = p.propagate(&a);
        let ub = p.propagate(&b);
        prop_assert!(ua.then(&ub).max_abs_diff(&whole) < 1e-10);
        prop_assert!(p.continue_from(&ua, &b).max_abs_diff(&whole) < 1e-10);
        prop_assert!((p.continue_from(&ua, &b).total_time() - whole.total_time()).abs() < 1e-12);
    }

    #[test]
    fn fast_block_matches_full_propagation(seq in arb_train(128)) {
        let model = TransmonModel::from_ghz(4.6, 0.25, 0.032, 5).unwrap();
        let drive = DriveConfig::default();
        let p = Propagator::new(&model, &drive);
        let full = to_rotating_frame(&p.propagate(&seq), &model).computational_block();
        let fast = p.rotating_block(&seq);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((full[i][j] - fast[i][j]).norm() < 1e-12);
            }
        }
    }
}
