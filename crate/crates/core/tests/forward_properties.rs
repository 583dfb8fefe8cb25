use phaseshift::forward_solver::{interface_matrix, propagate};
use phaseshift::ode_oracle::{phase_shift_ode, OdeSettings};
use phaseshift::{phase_shift_table, Potential};
use proptest::prelude::*;

fn q0() -> Potential {
    Potential::from_layers(&[(0.5, 7.2), (1.0, 4.5), (1.5, 7.2), (2.0, 4.5)]).unwrap()
}

/// 1 to 4 layers with widths in [0.2, 1] and values in [0, 0.8 k²].
fn layered(k: f64) -> impl Strategy<Value = Potential> {
    prop::collection::vec((0.2f64..1.0, 0.0f64..=0.8), 1..=4).prop_map(move |layers| {
        let mut r = 0.0;
        let layers: Vec<(f64, f64)> = layers
            .into_iter()
            .map(|(w, frac)| {
                r += w;
                (r, frac * k * k)
            })
            .collect();
        Potential::from_layers(&layers).unwrap()
    })
}

fn wavenumber() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(3.0)]
}

/// Splits layer `i` at the fraction `t` of its width.
fn split(p: &Potential, i: usize, t: f64) -> Potential {
    let mut radii = p.radii().to_vec();
    let mut values = p.values().to_vec();
    let inner = if i == 0 { 0.0 } else { radii[i - 1] };
    radii.insert(i, inner + t * (radii[i] - inner));
    values.insert(i, values[i]);
    Potential::new(radii, values).unwrap()
}

proptest! {
    #[test]
    fn splitting_a_layer_changes_nothing(
        (k, p) in wavenumber().prop_flat_map(|k| (Just(k), layered(k))),
        which in 0usize..4,
        t in 0.1f64..0.9,
    ) {
        let i = which % p.len();
        let a = phase_shift_table(&p, k, 20).unwrap();
        let b = phase_shift_table(&split(&p, i, t), k, 20).unwrap();
        for l in 0..=20 {
            prop_assert!((a.delta[l] - b.delta[l]).abs() <= 1e-10, "l={} {} vs {}", l, a.delta[l], b.delta[l]);
        }
    }

    #[test]
    fn ratio_recursion_agrees_with_the_coefficient_pair(
        (k, p) in wavenumber().prop_flat_map(|k| (Just(k), layered(k))),
        l in 0usize..=12,
    ) {
        // x_{i+1} = (α21 + α22 x_i) / (α11 + α12 x_i), x_1 = 0
        let mut kappa: Vec<f64> = p.values().iter().map(|q| (k * k - q).sqrt()).collect();
        kappa.push(k);
        let mut x = 0.0;
        for (i, &r) in p.radii().iter().enumerate() {
            let a = interface_matrix(l, kappa[i], kappa[i + 1], r).unwrap();
            let den = a[0][0] + a[0][1] * x;
            let num = a[1][0] + a[1][1] * x;
            prop_assume!(den.abs() > 1e-6 * (num.abs() + a[0][0].abs()));
            x = num / den;
        }
        let pair = propagate(&p, k, l).unwrap().phase_shift();
        prop_assert!((pair - (-x.atan())).abs() <= 1e-9, "{} vs {}", pair, -x.atan());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn matrix_solver_agrees_with_the_ode(
        (k, p) in wavenumber().prop_flat_map(|k| (Just(k), layered(k))),
    ) {
        let table = phase_shift_table(&p, k, 10).unwrap();
        let s = OdeSettings::default();
        for l in 0..=10 {
            let ode = phase_shift_ode(&p, k, l, &s).unwrap();
            prop_assert!((table.delta[l] - ode).abs() <= 1e-6, "l={} matrix {} ode {}", l, table.delta[l], ode);
        }
    }
}

#[test]
fn single_layer_matches_the_ode() {
    let p = Potential::from_layers(&[(1.0, 1.0)]).unwrap();
    let s = OdeSettings::default();
    let matrix = propagate(&p, 2.0, 1).unwrap().phase_shift();
    let ode = phase_shift_ode(&p, 2.0, 1, &s).unwrap();
    assert!((matrix - ode).abs() < 1e-6, "{matrix} vs {ode}");
}

#[test]
fn three_layer_potential_matches_the_ode() {
    let p = Potential::from_layers(&[(0.7, 2.1), (1.3, 4.4), (2.2, 0.6)]).unwrap();
    let matrix = propagate(&p, 2.5, 4).unwrap().phase_shift();
    let ode = phase_shift_ode(&p, 2.5, 4, &OdeSettings::default()).unwrap();
    assert!((matrix - ode).abs() < 1e-6, "{matrix} vs {ode}");
}

#[test]
fn ode_reproduces_the_first_table_entry() {
    // q0 in units of k² = 9
    let d = phase_shift_ode(&q0().scaled(1.0 / 9.0), 3.0, 0, &OdeSettings::default()).unwrap();
    assert!((d - -0.220024).abs() < 1e-5, "{d}");
}

#[test]
fn shifts_decay_strictly_from_l_two() {
    let t = phase_shift_table(&q0().scaled(1.0 / 9.0), 3.0, 20).unwrap();
    for l in 2..20 {
        assert!(t.delta[l + 1].abs() < t.delta[l].abs(), "l={l}");
    }
}

#[test]
fn bisected_q0_table_is_unchanged() {
    let a = phase_shift_table(&q0(), 3.0, 20).unwrap();
    let b = phase_shift_table(&q0().bisected(), 3.0, 20).unwrap();
    for l in 0..=20 {
        assert!((a.delta[l] - b.delta[l]).abs() <= 1e-10);
    }
}
