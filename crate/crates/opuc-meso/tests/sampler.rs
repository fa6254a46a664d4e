use opuc_meso::measures::{CircleMeasure, VerblunskySequence};
use opuc_meso::sampler::{batch_sample, sample_ope, OpeSampler};
use opuc_meso::szego::Recurrence;
use std::f64::consts::PI;

const GRID: usize = 1 << 12;

#[test]
fn batches_are_reproducible_and_worker_independent() {
    let mu = CircleMeasure::geronimus(0.3).unwrap();
    let seq = VerblunskySequence::geronimus(0.3).unwrap();
    let a = batch_sample(&mu, &seq, 12, 42, 3, 1, GRID).unwrap();
    let b = batch_sample(&mu, &seq, 12, 42, 3, 1, GRID).unwrap();
    let c = batch_sample(&mu, &seq, 12, 42, 3, 8, GRID).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    // Each sample is its own stream: sampling index 2 alone gives the same points.
    assert_eq!(sample_ope(&mu, &seq, 12, 42, 2, GRID).unwrap().angles, a[2].angles);
    assert_ne!(a[0].angles, a[1].angles);
}

#[test]
fn samples_are_sorted_and_on_the_support() {
    let mu = CircleMeasure::geronimus(0.6).unwrap();
    let seq = VerblunskySequence::geronimus(0.6).unwrap();
    for s in batch_sample(&mu, &seq, 30, 5, 10, 2, GRID).unwrap() {
        assert_eq!(s.angles.len(), 30);
        assert!(s.angles.windows(2).all(|w| w[0] <= w[1]));
        for &t in &s.angles {
            assert!((0.0..2.0 * PI).contains(&t));
            let on_atom = mu.atoms().iter().any(|a| a.angle == t);
            assert!(mu.in_support(t) || on_atom, "{t} outside the arc");
        }
        assert_eq!(s.diagnostics.envelope_violations, 0);
    }
}

#[test]
fn cue_pair_puts_one_point_in_each_half_on_average() {
    let mu = CircleMeasure::cue();
    let seq = VerblunskySequence::cue();
    let m = 10_000;
    let counts: Vec<f64> = batch_sample(&mu, &seq, 2, 11, m, 1, GRID)
        .unwrap()
        .iter()
        .map(|s| s.angles.iter().filter(|t| **t < PI).count() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / m as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let se = (var / m as f64).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn cue_number_variance_is_suppressed() {
    // The Poisson value for Σ cos θ_i would be n·Var(cos θ) = n/2.
    let n = 100;
    let samples = batch_sample(&CircleMeasure::cue(), &VerblunskySequence::cue(), n, 3, 200, 1, GRID).unwrap();
    let sums: Vec<f64> = samples.iter().map(|s| s.angles.iter().map(|t| t.cos()).sum()).collect();
    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
    let var = sums.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (sums.len() - 1) as f64;
    assert!(var < 0.2 * n as f64 / 2.0, "variance {var}");
}

#[test]
fn one_point_intensity_matches_the_kernel_diagonal() {
    let (alpha, n, m, bins) = (0.3, 5, 3000, 8);
    let mu = CircleMeasure::geronimus(alpha).unwrap();
    let seq = VerblunskySequence::geronimus(alpha).unwrap();
    let rec = Recurrence::new(&seq, n).unwrap();
    let mut expected = vec![0.0; bins];
    for (t, w) in mu.rule(1 << 14) {
        let b = ((t / (2.0 * PI)) * bins as f64) as usize;
        expected[b.min(bins - 1)] += rec.kernel_diag(t) * w / n as f64;
    }
    // Positive α carries an atom at θ = 0.
    assert_eq!(mu.atoms().len(), 1);
    for a in mu.atoms() {
        let b = ((a.angle / (2.0 * PI)) * bins as f64) as usize;
        expected[b.min(bins - 1)] += rec.kernel_diag(a.angle) * a.mass / n as f64;
    }
    let mut observed = vec![0.0; bins];
    for s in batch_sample(&mu, &seq, n, 8, m, 1, GRID).unwrap() {
        for t in s.angles {
            observed[((t / (2.0 * PI)) * bins as f64) as usize] += 1.0 / (n * m) as f64;
        }
    }
    for (b, (o, e)) in observed.iter().zip(&expected).enumerate() {
        // Repulsion makes pooled bin counts less variable than binomial
        // ones, so binomial errors are conservative.
        let se = (e * (1.0 - e) / (n * m) as f64).sqrt();
        assert!((o - e).abs() < 4.0 * se + 1e-12, "bin {b}: {o} vs {e}");
    }
}

#[test]
fn singular_weights_are_sampled_from_the_right_law() {
    // One point from the Hua-Pickrell weight with δ = −0.4: mass of the arc
    // |θ| < π/2 around the singularity, compared with quadrature.
    let mu = CircleMeasure::hua_pickrell(-0.4).unwrap();
    let seq = VerblunskySequence::hua_pickrell(-0.4).unwrap();
    let near = |t: f64| t < 0.5 * PI || t > 1.5 * PI;
    let p: f64 = mu.rule(1 << 16).iter().filter(|(t, _)| near(*t)).map(|(_, w)| w).sum();
    let sampler = OpeSampler::new(&mu, &seq, 1, GRID).unwrap();
    let m = 4000;
    let hits = (0..m).filter(|i| near(sampler.sample(9, *i as u64).unwrap().angles[0])).count() as f64 / m as f64;
    let se = (p * (1.0 - p) / m as f64).sqrt();
    assert!((hits - p).abs() < 4.0 * se, "{hits} vs {p}");
}

#[test]
fn mismatched_measure_and_sequence_are_rejected() {
    let mu = CircleMeasure::geronimus(0.3).unwrap();
    let seq = VerblunskySequence::geronimus(0.4).unwrap();
    assert!(sample_ope(&mu, &seq, 3, 0, 0, GRID).is_err());
    assert!(batch_sample(&mu, &VerblunskySequence::geronimus(0.3).unwrap(), 3, 0, 0, 1, GRID).is_err());
}
