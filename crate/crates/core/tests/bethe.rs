use num_complex::Complex64;
use proptest::prelude::*;
use statrs::distribution::{Discrete, Poisson};
use tasep_core::bethe::{
    epsilon, evaluate_batch, evaluate_direct, transition_matrix, transition_probability,
    SpectralParams,
};
use tasep_core::oracle::{build_generator, default_window};
use tasep_core::rmatrix::SpectralPoint;
use tasep_core::state::{ParticleState, RateTable};
use tasep_core::Error;

fn rates(v: &[f64]) -> RateTable {
    RateTable::new(v.to_vec()).unwrap()
}

fn st(positions: &[i64], species: &[usize]) -> ParticleState {
    ParticleState::new(positions.to_vec(), species.to_vec())
}

#[test]
fn single_particle_is_poisson() {
    for b in [0.5, 1.0, 2.0] {
        let rt = rates(&[b]);
        let params = SpectralParams::for_rates(&rt);
        let from = st(&[3], &[1]);
        for t in [0.1, 1.0, 5.0] {
            let pois = Poisson::new(b * t).unwrap();
            for x in 3..=23 {
                let p = transition_probability(&from, &st(&[x], &[1]), t, &rt, &params).unwrap();
                let expected = pois.pmf((x - 3) as u64);
                assert!((p.value - expected).abs() < 1e-10, "b={b} t={t} x={x}");
            }
        }
    }
}

#[test]
fn time_zero_reproduces_initial_state() {
    let rt = rates(&[0.8, 1.7, 1.1]);
    let params = SpectralParams::for_rates(&rt);
    let from = st(&[0, 2, 3], &[3, 1, 2]);
    let targets = vec![
        from.clone(),
        st(&[0, 2, 3], &[1, 3, 2]),
        st(&[0, 2, 4], &[3, 1, 2]),
        st(&[1, 2, 3], &[3, 1, 2]),
    ];
    let out = transition_matrix(&from, &targets, 0.0, &rt, &params).unwrap();
    assert!((out[0].value - 1.0).abs() < 1e-8);
    for r in &out[1..] {
        assert!(r.value.abs() < 1e-8);
    }
}

#[test]
fn forbidden_transitions_vanish() {
    let rt = rates(&[1.0, 2.0]);
    let params = SpectralParams::for_rates(&rt);
    let from = st(&[0, 1], &[1, 2]);
    // species multiset changed: exact zero without quadrature
    let p = transition_probability(&from, &st(&[0, 1], &[1, 1]), 1.0, &rt, &params).unwrap();
    assert_eq!(p.value, 0.0);
    assert_eq!(p.nodes_used, 0);
    // a particle left of where it started: the integral itself vanishes
    let back = st(&[-1, 3], &[2, 1]);
    let raw = evaluate_direct(&from, &back, 1.0, &rt, params.radius, 64).unwrap();
    assert!(raw.norm() < 1e-10, "{raw}");
}

#[test]
fn direct_and_batch_routes_agree() {
    let rt = rates(&[0.6, 1.4, 1.0]);
    let from = st(&[0, 1, 3], &[2, 3, 1]);
    let targets = vec![
        st(&[1, 2, 4], &[2, 1, 3]),
        st(&[0, 2, 3], &[3, 2, 1]),
        st(&[2, 3, 6], &[1, 2, 3]),
    ];
    let r = 0.5 / rt.max_rate();
    let batch = evaluate_batch(&from, &targets, 0.7, &rt, r, 32).unwrap();
    for (target, b) in targets.iter().zip(batch) {
        let d = evaluate_direct(&from, target, 0.7, &rt, r, 32).unwrap();
        assert!((d - b).norm() < 1e-12, "{d} vs {b}");
    }
}

#[test]
fn quadrature_is_stable_under_refinement() {
    let rt = rates(&[1.0, 2.0]);
    let from = st(&[0, 1], &[2, 1]);
    let to = st(&[1, 3], &[1, 2]);
    let r = 0.5 / rt.max_rate();
    let coarse = evaluate_direct(&from, &to, 1.0, &rt, r, 64).unwrap();
    let fine = evaluate_direct(&from, &to, 1.0, &rt, r, 128).unwrap();
    assert!((coarse - fine).norm() < 1e-12);
    assert!(fine.im.abs() < 1e-10);
    // a different admissible radius gives the same integral
    let other = evaluate_direct(&from, &to, 1.0, &rt, 0.35 / rt.max_rate(), 128).unwrap();
    assert!((other - fine).norm() < 1e-10);
}

// the plane wave prod (b xi)^x is an eigenfunction of the free generator
#[test]
fn plane_wave_eigenvalue() {
    let rt = rates(&[0.7, 1.5, 1.2]);
    let xi = vec![
        Complex64::new(0.2, 0.1),
        Complex64::new(-0.3, 0.25),
        Complex64::new(0.05, -0.4),
    ];
    let sp = SpectralPoint::new(xi.clone()).unwrap();
    let word = [2, 3, 1];
    let x = [4i64, 7, 9];
    let u = |pos: &[i64]| -> Complex64 {
        (0..3)
            .map(|i| (rt.rate(word[i]) * xi[i]).powi(pos[i] as i32))
            .product()
    };
    let mut free = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        let mut left = x;
        left[i] -= 1;
        free += rt.rate(word[i]) * (u(&left) - u(&x));
    }
    let eps = epsilon(&word, &sp, &rt).unwrap();
    assert!((free - eps * u(&x)).norm() < 1e-12 * u(&x).norm().max(1.0));
}

// d/dt P(t) = P(t) Q, checked by central differences on the window
#[test]
fn forward_equation_holds() {
    let rt = rates(&[1.0, 1.8]);
    let params = SpectralParams::for_rates(&rt);
    let from = st(&[0, 1], &[2, 1]);
    let (t, h) = (0.6, 1e-3);
    let gen = build_generator(&from, &rt, default_window(&from, &rt, t + h)).unwrap();
    let at = |time: f64| -> Vec<f64> {
        transition_matrix(&from, gen.states(), time, &rt, &params)
            .unwrap()
            .into_iter()
            .map(|r| r.value)
            .collect()
    };
    let (p, plus, minus) = (at(t), at(t + h), at(t - h));
    let pq = gen.apply_forward(&p);
    for s in 0..gen.len() {
        let fd = (plus[s] - minus[s]) / (2.0 * h);
        assert!((fd - pq[s]).abs() < 1e-5, "state {}", gen.states()[s]);
    }
}

#[test]
fn evaluation_is_deterministic() {
    let rt = rates(&[0.9, 1.3, 0.5]);
    let params = SpectralParams::for_rates(&rt);
    let from = st(&[0, 1, 2], &[1, 2, 3]);
    let to = st(&[1, 2, 4], &[2, 1, 3]);
    let a = transition_probability(&from, &to, 0.5, &rt, &params).unwrap();
    let b = transition_probability(&from, &to, 0.5, &rt, &params).unwrap();
    assert_eq!(a.raw, b.raw);
}

#[test]
fn guards_reject_bad_parameters() {
    let rt = rates(&[1.0, 2.0]);
    let from = st(&[0, 1], &[1, 2]);
    let mut params = SpectralParams::for_rates(&rt);
    params.radius = 0.5;
    let err = transition_probability(&from, &from, 1.0, &rt, &params).unwrap_err();
    assert!(matches!(err, Error::ContourInvalid { .. }));

    let params = SpectralParams::for_rates(&rt);
    let err = transition_probability(&from, &from, 1e4, &rt, &params).unwrap_err();
    assert!(matches!(err, Error::OverflowRisk { .. }));
    let err = transition_probability(&from, &from, -1.0, &rt, &params).unwrap_err();
    assert!(matches!(err, Error::NegativeTime(_)));

    let rt5 = rates(&[1.0; 5]);
    let five = st(&[0, 1, 2, 3, 4], &[1, 2, 3, 4, 5]);
    let params = SpectralParams::for_rates(&rt5);
    let err = transition_probability(&five, &five, 1.0, &rt5, &params).unwrap_err();
    assert!(matches!(err, Error::UnsupportedSize { n: 5, max: 4 }));

    let mut params = SpectralParams::for_rates(&rt);
    params.max_nodes = 64;
    // heavy cancellation at large t keeps successive levels apart
    let fast_first = st(&[0, 1], &[2, 1]);
    let far = st(&[30, 60], &[1, 2]);
    let err = transition_probability(&fast_first, &far, 40.0, &rt, &params).unwrap_err();
    assert!(matches!(err, Error::NotConverged { .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // probabilities over all reachable states sum to one and are nonnegative
    #[test]
    fn two_particle_rows_are_stochastic(b1 in 0.4f64..2.5, b2 in 0.4f64..2.5, word in prop::sample::select(vec![[1usize, 2], [2, 1], [1, 1], [2, 2]]), t in 0.05f64..1.2) {
        let rt = rates(&[b1, b2]);
        let params = SpectralParams::for_rates(&rt);
        let from = st(&[0, 1], &word);
        let gen = build_generator(&from, &rt, default_window(&from, &rt, t)).unwrap();
        let out = transition_matrix(&from, gen.states(), t, &rt, &params).unwrap();
        let total: f64 = out.iter().map(|r| r.value).sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
        for r in &out {
            prop_assert!(r.value > -1e-10);
            prop_assert!(r.raw.im.abs() < 1e-10);
        }
    }
}
