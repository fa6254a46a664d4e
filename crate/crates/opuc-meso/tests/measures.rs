use opuc_meso::measures::{
    geronimus_gap, hua_pickrell_alphas, jacobi_coefficients, levinson, trig_moments, CircleMeasure, VerblunskySequence,
};
use opuc_meso::C64;
use opuc_meso::szego::Recurrence;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

#[test]
fn catalog_coefficients() {
    assert_eq!(VerblunskySequence::geronimus(0.5).unwrap().alpha(7).unwrap(), C64::new(0.5, 0.0));
    assert_eq!(VerblunskySequence::cue().alpha(3).unwrap(), C64::new(0.0, 0.0));
    assert!((VerblunskySequence::single_moment().alpha(3).unwrap().re + 0.2).abs() < 1e-15);
    assert!((VerblunskySequence::geronimus(0.5).unwrap().rho(0).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
    assert_eq!(VerblunskySequence::cue().rho(10).unwrap(), 1.0);
    assert!(VerblunskySequence::explicit(vec![C64::new(1.0, 0.0)]).rho(0).is_err());
}

#[test]
fn moments_of_simple_measures() {
    let c = trig_moments(&CircleMeasure::cue(), 3).unwrap();
    assert!((c[0] - 1.0).norm() < 1e-14);
    assert!(c[1..].iter().all(|m| m.norm() < 1e-12));
    let c = trig_moments(&CircleMeasure::single_moment(), 2).unwrap();
    assert!((c[1] - C64::new(-0.5, 0.0)).norm() < 1e-12);
    assert!(c[2].norm() < 1e-12);
}

#[test]
fn geronimus_first_moment_matches_gram_schmidt() {
    // Φ_1(z) = z − c_1 must be orthogonal to 1, and Φ_1(0) = −conj(α_0).
    let c = trig_moments(&CircleMeasure::geronimus(0.5).unwrap(), 1).unwrap();
    assert!((c[1] - C64::new(0.5, 0.0)).norm() < 1e-9, "{}", c[1]);
}

#[test]
fn levinson_round_trip_on_atom_free_catalog() {
    let cases: Vec<(CircleMeasure, VerblunskySequence)> = vec![
        (CircleMeasure::cue(), VerblunskySequence::cue()),
        (CircleMeasure::single_moment(), VerblunskySequence::single_moment()),
        (CircleMeasure::bernstein_szego(0.5).unwrap(), VerblunskySequence::bernstein_szego(0.5).unwrap()),
        (CircleMeasure::geronimus(-0.3).unwrap(), VerblunskySequence::geronimus(-0.3).unwrap()),
        (CircleMeasure::hua_pickrell(0.5).unwrap(), VerblunskySequence::hua_pickrell(0.5).unwrap()),
    ];
    for (mu, seq) in cases {
        let k = 30;
        let got = levinson(&trig_moments(&mu, k).unwrap(), k).unwrap();
        let want = seq.alphas(k).unwrap();
        for (j, (g, w)) in got.iter().zip(&want).enumerate() {
            assert!((g - w).norm() < 1e-8, "{} index {j}: {g} vs {w}", mu.id());
        }
    }
}

#[test]
fn bernstein_szego_first_coefficient_sign_matches_gram_schmidt() {
    // For the density (1 − r²)/|1 − re^{iθ}|² the moments are c_k = r^{|k|}, so
    // Φ_1 = z − r and α_0 = r; all later coefficients vanish.
    let seq = VerblunskySequence::bernstein_szego(0.5).unwrap();
    assert_eq!(seq.alpha(0).unwrap(), C64::new(0.5, 0.0));
    assert!(seq.alphas(5).unwrap()[1..].iter().all(|a| a.norm() == 0.0));
    let c = trig_moments(&CircleMeasure::bernstein_szego(0.5).unwrap(), 3).unwrap();
    for (k, m) in c.iter().enumerate() {
        assert!((m - C64::new(0.5f64.powi(k as i32), 0.0)).norm() < 1e-10, "c_{k} = {m}");
    }
}

#[test]
fn inserted_mass_point_coefficients_decay() {
    let mu = CircleMeasure::inserted_mass_point(0.3, 1.0).unwrap();
    assert_eq!(mu.atoms().len(), 1);
    let a = levinson(&trig_moments(&mu, 200).unwrap(), 200).unwrap();
    // n·|α_n| stays bounded along the tail.
    let tail: Vec<f64> = (50..200).map(|n| n as f64 * a[n].norm()).collect();
    let peak = tail.iter().cloned().fold(0.0, f64::max);
    assert!(peak < 4.0 * 100.0 * a[100].norm() + 1e-12, "{peak}");
    assert!(a[199].norm() < a[20].norm());
}

#[test]
fn jacobi_and_hua_pickrell_gold_values() {
    let j = jacobi_coefficients(0.0, 2).unwrap();
    assert!((j.a - 1.0).abs() < 1e-14 && j.b.abs() < 1e-14);
    assert!((jacobi_coefficients(0.0, 1).unwrap().a - 2f64.sqrt()).abs() < 1e-14);
    assert!((jacobi_coefficients(1.0, 1).unwrap().b + 1.0).abs() < 1e-14);
    assert!(jacobi_coefficients(-0.5, 1).is_err());
    let a = hua_pickrell_alphas(1.0, 100).unwrap();
    for (n, v) in a.iter().enumerate() {
        assert!((v + 1.0 / (n as f64 + 2.0)).abs() < 1e-8, "{n}: {v}");
    }
    assert!(hua_pickrell_alphas(0.0, 20).unwrap().iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn jacobi_coefficients_approach_the_free_chain() {
    for delta in [-0.25, 0.5, 1.5] {
        let far = jacobi_coefficients(delta, 10_000).unwrap();
        let near = jacobi_coefficients(delta, 100).unwrap();
        assert!((far.a - 1.0).abs() < 1e-6 && far.b.abs() < 1e-6);
        // Quadratic decay: 100× further out, about 10⁴× closer.
        assert!((far.a - 1.0).abs() <= 2e-4 * (near.a - 1.0).abs().max(1e-300) || (far.a - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hua_pickrell_matches_levinson_oracle() {
    for delta in [-0.25, 0.5, 1.5] {
        let mu = CircleMeasure::hua_pickrell(delta).unwrap();
        let oracle = levinson(&trig_moments(&mu, 31).unwrap(), 31).unwrap();
        let direct = hua_pickrell_alphas(delta, 31).unwrap();
        for (n, (o, d)) in oracle.iter().zip(&direct).enumerate() {
            assert!((o.re - d).abs() < 1e-8 && o.im.abs() < 1e-10, "delta {delta} n {n}: {o} vs {d}");
        }
    }
}

#[test]
fn hua_pickrell_tail_is_order_one_over_n() {
    let a = hua_pickrell_alphas(0.5, 100_001).unwrap();
    let anchor = 1000.0 * a[1000].abs();
    let worst = (1000..=100_000).map(|n| n as f64 * a[n].abs()).fold(0.0, f64::max);
    assert!(worst <= 2.0 * anchor, "{worst} vs {anchor}");
}

#[test]
fn geronimus_density_lives_on_its_arc() {
    let alpha = 0.4;
    let mu = CircleMeasure::geronimus(alpha).unwrap();
    let gap = geronimus_gap(alpha);
    assert!((gap - 2.0 * alpha.asin()).abs() < 1e-15);
    for j in 0..1000 {
        let theta = 2.0 * PI * (j as f64 + 0.5) / 1000.0;
        let inside = theta > gap && theta < 2.0 * PI - gap;
        assert_eq!(mu.weight(theta) > 0.0, inside, "theta {theta}");
    }
    assert!((mu.total_mass() - 1.0).abs() < 1e-10);
}

#[test]
fn total_mass_is_one_across_the_catalog() {
    let mus = [
        CircleMeasure::cue(),
        CircleMeasure::geronimus(0.5).unwrap(),
        CircleMeasure::geronimus(-0.7).unwrap(),
        CircleMeasure::bernstein_szego(0.8).unwrap(),
        CircleMeasure::single_moment(),
        CircleMeasure::inserted_mass_point(0.25, 2.0).unwrap(),
        CircleMeasure::hua_pickrell(-0.4).unwrap(),
        CircleMeasure::hua_pickrell(2.0).unwrap(),
    ];
    for mu in &mus {
        let via_quadrature = mu.integrate(|_| C64::new(1.0, 0.0), 1e-12).unwrap().re;
        assert!((via_quadrature - 1.0).abs() < 1e-10, "{}: {via_quadrature}", mu.id());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn real_parameters_give_real_coefficients(alpha in -0.95f64..0.95, r in 0.0f64..0.9, delta in -0.45f64..3.0) {
        for seq in [
            VerblunskySequence::geronimus(alpha).unwrap(),
            VerblunskySequence::bernstein_szego(r).unwrap(),
            VerblunskySequence::hua_pickrell(delta).unwrap(),
        ] {
            for a in seq.alphas(40).unwrap() {
                prop_assert!(a.im == 0.0 && a.norm() < 1.0);
            }
        }
    }

    #[test]
    fn levinson_inverts_bernstein_szego_weights(
        entries in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..5),
    ) {
        // A finite list followed by zeros has weight 1/|φ_N(e^{iθ})|².
        let alphas: Vec<C64> = entries.iter().map(|(a, b)| C64::new(*a, *b)).collect();
        let seq = VerblunskySequence::explicit(alphas.clone());
        let n = alphas.len();
        let rec = Recurrence::new(&seq, n).unwrap();
        let weight = Arc::new(move |t: f64| 1.0 / rec.eval(C64::from_polar(1.0, t)).0.norm_sqr());
        let mu = CircleMeasure::from_density("explicit", weight, &[(0.0, 2.0 * PI)], vec![]).unwrap();
        let k = n + 2;
        let back = levinson(&trig_moments(&mu, k).unwrap(), k).unwrap();
        for (j, b) in back.iter().enumerate() {
            let want = alphas.get(j).copied().unwrap_or_default();
            prop_assert!((b - want).norm() < 1e-8, "index {}: {} vs {}", j, b, want);
        }
    }
}
