use opuc_meso::measures::{CircleMeasure, VerblunskySequence};
use opuc_meso::szego::{cd_kernel, cmv_basis, cmv_kernel, eval_polys, Recurrence};
use opuc_meso::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn sample_sequence() -> VerblunskySequence {
    VerblunskySequence::explicit(vec![
        C64::new(0.3, 0.1),
        C64::new(-0.2, 0.4),
        C64::new(0.5, -0.1),
        C64::new(0.1, 0.1),
        C64::new(0.0, -0.6),
    ])
}

#[test]
fn first_polynomial_of_geronimus() {
    let alpha = 0.5f64;
    let rho = (1.0 - alpha * alpha).sqrt();
    let p = eval_polys(&VerblunskySequence::geronimus(alpha).unwrap(), 1, C64::new(1.0, 0.0)).unwrap();
    assert!((p.phi - (1.0 - alpha) / rho).norm() < 1e-15);
    assert!((p.phi_star - (1.0 - alpha) / rho).norm() < 1e-15);
    let p0 = eval_polys(&VerblunskySequence::geronimus(alpha).unwrap(), 0, C64::new(0.3, 0.2)).unwrap();
    assert_eq!((p0.phi, p0.phi_star), (C64::new(1.0, 0.0), C64::new(1.0, 0.0)));
}

#[test]
fn reversed_polynomial_is_the_conjugate_reflection() {
    // φ_n*(z) = z^n conj(φ_n(1/conj z)).
    let seq = sample_sequence();
    let z = C64::new(0.4, -0.7);
    for n in 0..5 {
        let direct = eval_polys(&seq, n, z).unwrap().phi_star;
        let reflected = z.powu(n as u32) * eval_polys(&seq, n, 1.0 / z.conj()).unwrap().phi.conj();
        assert!((direct - reflected).norm() < 1e-12, "n {n}");
    }
}

#[test]
fn polynomials_are_orthonormal() {
    let mu = CircleMeasure::geronimus(-0.3).unwrap();
    let seq = VerblunskySequence::geronimus(-0.3).unwrap();
    let n = 8;
    let rec = Recurrence::new(&seq, n).unwrap();
    let mut gram = vec![vec![C64::new(0.0, 0.0); n]; n];
    let mut f = vec![C64::new(0.0, 0.0); n];
    for (t, w) in mu.rule(1 << 14) {
        rec.features(C64::from_polar(1.0, t), &mut f);
        for i in 0..n {
            for j in 0..n {
                gram[i][j] += f[i] * f[j].conj() * w;
            }
        }
    }
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).norm() < 1e-9, "({i},{j}) = {g}");
        }
    }
}

#[test]
fn cue_kernel_is_the_dirichlet_kernel() {
    let seq = VerblunskySequence::cue();
    for (t, p) in [(1.3f64, 0.2f64), (0.0, 3.0), (2.0, 2.0 + 1e-9)] {
        let k = cd_kernel(&seq, 9, t, p).unwrap().value;
        let d = t - p;
        let want: C64 = (0..9).map(|j| C64::from_polar(1.0, j as f64 * d)).sum();
        assert!((k - want).norm() < 1e-9, "{k} vs {want}");
    }
}

#[test]
fn christoffel_darboux_matches_the_direct_sum() {
    let rec = Recurrence::new(&sample_sequence(), 5).unwrap();
    for (t, p) in [(0.3, 2.9), (1.0, 1.0 + 1e-4), (4.0, 4.0 + 1e-8), (5.0, 5.0)] {
        assert!((rec.kernel(t, p) - rec.kernel_direct(t, p)).norm() < 1e-10, "{t} {p}");
    }
    for t in [0.1, 2.0, 5.9] {
        assert!((rec.kernel(t, t).re - rec.kernel_diag(t)).abs() < 1e-12);
    }
}

#[test]
fn cmv_basis_small_indices() {
    // χ_0 = 1, χ_1 = φ_1, χ_2 = e^{−iθ} φ_2*.
    let seq = sample_sequence();
    let t = 0.9;
    let z = C64::from_polar(1.0, t);
    assert!((cmv_basis(&seq, 0, t).unwrap() - 1.0).norm() < 1e-15);
    assert!((cmv_basis(&seq, 1, t).unwrap() - eval_polys(&seq, 1, z).unwrap().phi).norm() < 1e-15);
    let chi2 = C64::from_polar(1.0, -t) * eval_polys(&seq, 2, z).unwrap().phi_star;
    assert!((cmv_basis(&seq, 2, t).unwrap() - chi2).norm() < 1e-15);
}

#[test]
fn cmv_kernel_agrees_with_the_polynomial_kernel() {
    // Both kernels reproduce the same n-dimensional space up to a unimodular
    // factor in each variable, so the diagonals and moduli coincide.
    let seq = sample_sequence();
    for n in [3usize, 4, 5] {
        let rec = Recurrence::new(&seq, n).unwrap();
        for (t, p) in [(0.2, 0.2), (0.7, 2.5), (3.0, 5.5)] {
            let cmv = cmv_kernel(&seq, n, t, p).unwrap();
            let cd = rec.kernel(t, p);
            assert!((cmv.norm() - cd.norm()).abs() < 1e-12, "n {n}: {cmv} vs {cd}");
        }
        assert!((cmv_kernel(&seq, n, 1.1, 1.1).unwrap().re - rec.kernel_diag(1.1)).abs() < 1e-12);
    }
}

#[test]
fn kernel_reproduces_and_integrates_to_n() {
    let mu = CircleMeasure::bernstein_szego(0.5).unwrap();
    let seq = VerblunskySequence::bernstein_szego(0.5).unwrap();
    let n = 6;
    let rec = Recurrence::new(&seq, n).unwrap();
    let rule = mu.rule(1 << 13);
    let mass: f64 = rule.iter().map(|(t, w)| rec.kernel_diag(*t) * w).sum();
    assert!((mass - n as f64).abs() < 1e-9, "{mass}");
    let (a, b) = (0.4, 2.2);
    let reproduced: C64 = rule.iter().map(|(t, w)| rec.kernel_direct(a, *t) * rec.kernel_direct(*t, b) * *w).sum();
    assert!((reproduced - rec.kernel(a, b)).norm() < 1e-9);
}

proptest! {
    #[test]
    fn polynomial_and_reversal_share_modulus_on_the_circle(
        entries in prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6), 1..12),
        theta in 0.0f64..2.0 * PI,
    ) {
        let seq = VerblunskySequence::explicit(entries.iter().map(|(a, b)| C64::new(*a, *b)).collect());
        let p = eval_polys(&seq, entries.len(), C64::from_polar(1.0, theta)).unwrap();
        prop_assert!((p.phi.norm() - p.phi_star.norm()).abs() < 1e-10 * (1.0 + p.phi.norm()));
    }
}
