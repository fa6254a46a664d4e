use opuc_meso::linalg::{expm, Matrix};
use opuc_meso::measures::VerblunskySequence;
use opuc_meso::operators::{
    cayley, cmv_truncation, combes_thomas_cmv, combes_thomas_ggt, ggt_truncation, hankel, matrix_exp, real_part,
    resolvent_decay_rate, toeplitz, OperatorModel, OperatorTruncation, Symbol, TruncationMode,
};
use opuc_meso::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn wrap(data: Matrix) -> OperatorTruncation {
    OperatorTruncation {
        data,
        kind: opuc_meso::operators::OperatorKind::Toeplitz,
        meta: Default::default(),
    }
}

#[test]
fn ggt_corner_for_geronimus() {
    let a = 0.6;
    let rho = 0.8;
    let g = ggt_truncation(&VerblunskySequence::geronimus(a).unwrap(), 5, TruncationMode::Plain).unwrap().data;
    assert!((g[(0, 0)] - a).norm() < 1e-15);
    assert!((g[(0, 1)] - a * rho).norm() < 1e-15);
    assert!((g[(1, 0)] - rho).norm() < 1e-15);
    assert!((g[(1, 1)] + a * a).norm() < 1e-15);
    assert_eq!(g.bandwidth().0, 1, "upper Hessenberg");
}

#[test]
fn cmv_is_five_diagonal_with_the_expected_first_rows() {
    let seq = VerblunskySequence::explicit(vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.1), c(0.1, 0.1), c(0.0, -0.6)]);
    let a = seq.alphas(5).unwrap();
    let rho: Vec<f64> = a.iter().map(|x| (1.0 - x.norm_sqr()).sqrt()).collect();
    let m = cmv_truncation(&seq, 4, TruncationMode::Plain).unwrap().data;
    // Row 0: (conj α0, ρ0 conj α1, ρ0 ρ1, 0).
    let row0 = [a[0].conj(), rho[0] * a[1].conj(), c(rho[0] * rho[1], 0.0), c(0.0, 0.0)];
    // Row 1: (ρ0, −α0 conj α1, −α0 ρ1, 0).
    let row1 = [c(rho[0], 0.0), -a[0] * a[1].conj(), -a[0] * rho[1], c(0.0, 0.0)];
    for j in 0..4 {
        assert!((m[(0, j)] - row0[j]).norm() < 1e-15, "(0,{j})");
        assert!((m[(1, j)] - row1[j]).norm() < 1e-15, "(1,{j})");
    }
    let big = cmv_truncation(&seq, 5, TruncationMode::UnitaryCut).unwrap().data;
    let (kl, ku) = big.bandwidth();
    assert!(kl <= 2 && ku <= 2);
}

#[test]
fn cayley_of_a_diagonal_unitary_is_a_poisson_kernel() {
    let angles = [0.0, 1.0, 2.5, 4.0];
    let u = Matrix::diagonal(&angles.map(|t| C64::from_polar(1.0, t)));
    let omega = c(0.5, 0.3);
    let x = cayley(&wrap(u), omega).unwrap();
    let re = real_part(&x).data;
    for (i, t) in angles.iter().enumerate() {
        let z = C64::from_polar(1.0, *t);
        let want = (1.0 - omega.norm_sqr()) / (z - omega).norm_sqr();
        assert!((re[(i, i)] - want).norm() < 1e-13);
    }
    assert!(cayley(&wrap(Matrix::identity(2)), C64::from_polar(1.0, 0.4)).is_err());
    let one = cayley(&wrap(Matrix::identity(1)), c(0.5, 0.0)).unwrap();
    assert!((one.data[(0, 0)] - 3.0).norm() < 1e-15);
}

#[test]
fn toeplitz_of_the_geronimus_type_symbol() {
    let rho = 0.8;
    let sym = Symbol::trig_polynomial("g", -1, &[c(0.6, 0.0), c(-0.36, 0.0), c(rho, 0.0)]);
    let t = toeplitz(&sym, 4).unwrap().data;
    assert_eq!(t[(0, 0)], c(-0.36, 0.0));
    assert_eq!(t[(1, 0)], c(rho, 0.0));
    assert_eq!(t[(0, 1)], c(0.6, 0.0));
    assert_eq!(t[(3, 0)], c(0.0, 0.0));
}

#[test]
fn toeplitz_product_identity() {
    // T(ab) = T(a)T(b) + H(a)H(b̃) on the top-left block, where the finite
    // truncation error lives in the opposite corner.
    let a = Symbol::trig_polynomial("a", -2, &[c(0.1, 0.2), c(1.0, 0.0), c(0.5, -0.3), c(0.0, 1.0), c(-0.4, 0.0)]);
    let b = Symbol::trig_polynomial("b", -1, &[c(0.3, 0.0), c(2.0, 1.0), c(0.0, -0.5), c(0.7, 0.0)]);
    let ab = a.product(&b).unwrap();
    let n = 20;
    let m = 10;
    let lhs = toeplitz(&ab, n).unwrap().data.top_left(m);
    let prod = toeplitz(&a, n).unwrap().data.matmul(&toeplitz(&b, n).unwrap().data);
    let hank = hankel(&a, n).unwrap().data.matmul(&hankel(&b.reflect(), n).unwrap().data);
    let rhs = prod.add(&hank).top_left(m);
    assert!(lhs.sub(&rhs).max_abs() < 1e-13);
}

#[test]
fn hankel_hilbert_schmidt_norm_is_the_weighted_coefficient_sum() {
    let coeffs: Vec<C64> = (0..8).map(|k| c(0.5f64.powi(k), -0.1 * k as f64)).collect();
    let sym = Symbol::trig_polynomial("h", -3, &coeffs);
    let hs = hankel(&sym, 12).unwrap().data.frobenius_norm().powi(2);
    let want: f64 = (1..=4i64).map(|k| k as f64 * sym.scalar(k).unwrap().norm_sqr()).sum();
    assert!((hs - want).abs() < 1e-12);
}

#[test]
fn matrix_exponential_examples() {
    let z = expm(&Matrix::zeros(3, 3), 1e-14).unwrap();
    assert!(z.sub(&Matrix::identity(3)).max_abs() < 1e-15);
    let nil = Matrix::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let e = expm(&nil, 1e-14).unwrap();
    assert!((e[(0, 1)] - 1.0).norm() < 1e-14 && (e[(0, 0)] - 1.0).norm() < 1e-14);
    let d = Matrix::diagonal(&[c(0.0, 1.0), c(-2.0, 0.0), c(3.0, 0.0)]);
    let e = matrix_exp(&wrap(d), 1e-14).unwrap().data;
    assert!((e[(0, 0)] - C64::from_polar(1.0, 1.0)).norm() < 1e-13);
    assert!((e[(1, 1)] - (-2.0f64).exp()).norm() < 1e-14);
    assert!((e[(2, 2)] - 3.0f64.exp()).norm() < 1e-11);
}

#[test]
fn resolvent_decay_beats_the_guaranteed_rate() {
    let alpha = 0.5f64;
    let rho = (1.0 - alpha * alpha).sqrt();
    let seq = VerblunskySequence::geronimus(alpha).unwrap();
    for z in [c(0.9, 0.0), c(0.0, 0.5), c(-0.3, 0.3)] {
        let ggt = resolvent_decay_rate(&seq, z, 160, OperatorModel::Ggt).unwrap();
        let cmv = resolvent_decay_rate(&seq, z, 160, OperatorModel::Cmv).unwrap();
        assert!(ggt.rate >= combes_thomas_ggt(rho, z), "ggt at {z}: {}", ggt.rate);
        assert!(cmv.rate >= combes_thomas_cmv(z), "cmv at {z}: {}", cmv.rate);
    }
    assert!(resolvent_decay_rate(&seq, c(1.2, 0.0), 40, OperatorModel::Ggt).is_err());
}

#[test]
fn decay_rate_grows_away_from_the_circle() {
    let seq = VerblunskySequence::geronimus(0.5).unwrap();
    let rates: Vec<f64> = [0.95, 0.8, 0.5]
        .iter()
        .map(|r| resolvent_decay_rate(&seq, c(*r, 0.0), 160, OperatorModel::Cmv).unwrap().rate)
        .collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unitary_cut_truncations_are_unitary(
        entries in prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6), 3..10),
    ) {
        let seq = VerblunskySequence::explicit(entries.iter().map(|(a, b)| c(*a, *b)).collect());
        let n = entries.len() - 1;
        for m in [
            ggt_truncation(&seq, n, TruncationMode::UnitaryCut).unwrap().data,
            cmv_truncation(&seq, n.max(2), TruncationMode::UnitaryCut).unwrap().data,
        ] {
            let err = m.matmul(&m.adjoint()).sub(&Matrix::identity(m.rows())).max_abs();
            prop_assert!(err < 1e-13, "{}", err);
        }
    }
}
