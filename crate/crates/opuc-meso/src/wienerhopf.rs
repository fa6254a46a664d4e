//! Constant-coefficient analysis: the Toeplitz symbol of the GGT matrix,
//! the quadratic whose roots factor it, Fourier coefficients of the
//! Cayley symbol, the Hankel-trace variance, and the block closed forms
//! for `α = 0`.
//!
//! Root labels follow `z_± = ((1+ω) ± sqrt((1+ω)² − 4ωρ²))/(2ρ)` with the
//! square root cut along the positive real axis; they are never sorted by
//! modulus.

use crate::error::{Error, Result};
use crate::linstat::{omega_n, scale};
use crate::operators::Symbol;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative size below which tail coefficients of the symbol are dropped.
const SYMBOL_TAIL: f64 = 1e-18;
const SYMBOL_MAX_TERMS: usize = 10_000_000;

/// Toeplitz symbol of the GGT matrix with constant coefficient `α ≠ 0`:
/// `φ̂_1 = ρ`, `φ̂_{−k} = −α²ρ^k` for `k ≥ 0`, zero otherwise, so that
/// `T(φ)` agrees with the GGT matrix below its first row. The closed
/// form is `φ(z) = z(ρz − 1)/(z − ρ)`. Coefficients smaller than 1e-18
/// relative to `α²` are dropped.
pub fn geronimus_symbol(alpha: f64) -> Result<Symbol> {
    if alpha == 0.0 {
        return Err(Error::invalid("alpha = 0 has no scalar symbol; use the block closed forms"));
    }
    if !(alpha.abs() < 1.0) {
        return Err(Error::OutOfDisk { index: 0, modulus: alpha.abs() });
    }
    let rho = (1.0 - alpha * alpha).sqrt();
    let terms = if rho == 0.0 { 1 } else { ((SYMBOL_TAIL.ln() / rho.ln()).ceil() as usize).clamp(1, SYMBOL_MAX_TERMS) };
    let a2 = alpha * alpha;
    // Index j holds the coefficient of k = j − terms.
    let mut coeffs: Vec<C64> = (0..=terms).map(|j| C64::new(-a2 * rho.powi((terms - j) as i32), 0.0)).collect();
    coeffs.push(C64::new(rho, 0.0));
    let evaluator = Arc::new(move |theta: f64| {
        let z = C64::from_polar(1.0, theta);
        z * (rho * z - 1.0) / (z - rho)
    });
    Ok(Symbol::trig_polynomial(format!("geronimus-symbol(alpha={alpha})"), -(terms as i64), &coeffs)
        .with_evaluator(evaluator))
}

/// Square root with the cut on the positive real axis: for
/// `z = R e^{iθ}`, `θ ∈ [0, 2π)`, returns `sqrt(R)·e^{iθ/2}`. On the cut
/// the limit from the upper half plane (the positive root) is returned.
pub fn branch_sqrt(z: C64) -> C64 {
    let mut theta = z.im.atan2(z.re);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    C64::from_polar(z.norm().sqrt(), 0.5 * theta)
}

/// `P_ω(z) = ρz² − (1+ω)z + ρω`, so that `φ(z) − ω = P_ω(z)/(z − ρ)`.
pub fn p_omega(rho: f64, omega: C64, z: C64) -> C64 {
    rho * z * z - (ONE + omega) * z + rho * omega
}

/// Roots of `P_ω` and the quantities attached to them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WienerHopfData {
    pub rho: f64,
    pub omega: C64,
    pub z_plus: C64,
    pub z_minus: C64,
    pub disc: C64,
    /// `sqrt(ρ² − cos²(θ0/2))` with `θ0 = arg ω`; zero outside the support.
    pub a: f64,
}

/// Relative imaginary part below which the discriminant counts as lying on
/// the positive real axis.
const CUT_SNAP: f64 = 1e-12;

/// Roots of `P_ω` by the displayed `±` formula under [`branch_sqrt`],
/// except that a pair straddling the circle in the reversed order is
/// relabeled.
pub fn roots(rho: f64, omega: C64) -> Result<(C64, C64)> {
    let d = wiener_hopf(rho, omega)?;
    Ok((d.z_plus, d.z_minus))
}

pub fn wiener_hopf(rho: f64, omega: C64) -> Result<WienerHopfData> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    let s = ONE + omega;
    let disc = s * s - 4.0 * omega * rho * rho;
    if disc.norm() <= 1e-300 {
        return Err(Error::Degenerate("P_omega has a double root".into()));
    }
    // A discriminant within rounding of the cut takes the limit from above.
    let on_cut = disc.re > 0.0 && disc.im.abs() <= CUT_SNAP * disc.norm();
    let mut root = if on_cut { C64::new(disc.norm().sqrt(), 0.0) } else { branch_sqrt(disc) };
    // For arg ω in (0, π) the displayed sheet puts z_+ inside the circle
    // and z_− outside; the other sheet restores |z_+| > 1 > |z_−|. Pairs
    // on the same side of the circle keep the displayed labels.
    let straddles_reversed = |r: C64| ((s + r) / (2.0 * rho)).norm() < 1.0 && ((s - r) / (2.0 * rho)).norm() > 1.0;
    if straddles_reversed(root) {
        root = -root;
    }
    let z_plus = (s + root) / (2.0 * rho);
    let z_minus = (s - root) / (2.0 * rho);
    let c = (0.5 * omega.arg()).cos();
    let a = (rho * rho - c * c).max(0.0).sqrt();
    Ok(WienerHopfData { rho, omega, z_plus, z_minus, disc, a })
}

/// `max_θ |ρ(z − z_+)(z − z_−)/(z − ρ) − (φ(z) − ω)|` over `nodes` points.
pub fn factorization_residual(alpha: f64, omega: C64, nodes: usize) -> Result<f64> {
    let sym = geronimus_symbol(alpha)?;
    let rho = (1.0 - alpha * alpha).sqrt();
    let d = wiener_hopf(rho, omega)?;
    let mut worst = 0.0f64;
    for j in 0..nodes {
        let theta = 2.0 * PI * j as f64 / nodes as f64;
        let z = C64::from_polar(1.0, theta);
        let h = rho * (z - d.z_plus) * (z - d.z_minus) / (z - rho);
        worst = worst.max((h - (sym.eval(theta)? - omega)).norm());
    }
    Ok(worst)
}

/// Minimum number of DFT nodes for the central coefficients.
pub const RATIO_DFT_NODES: usize = 1 << 12;
const RATIO_DFT_MAX_NODES: usize = 1 << 24;

/// Fourier coefficients of `P_{−ω}/P_ω`, the Cayley transform
/// `(φ + ω)/(φ − ω)` of the symbol. With
/// `a = (z_+ − ρ)/(z_+ − z_−)`, `b = (z_− − ρ)/(z_− − z_+)`:
/// `ψ̂_k = −(2ω/ρ)·a·z_+^{−k−1}` for `k ≥ 2` and
/// `ψ̂_{−j} = (2ω/ρ)·b·z_−^{j−1}` for `j ≥ 2`; `k ∈ {−1, 0, 1}` come
/// from a DFT of the closed-form ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioCoefficients {
    pub data: WienerHopfData,
    pub dft_nodes: usize,
    plus_factor: C64,
    minus_factor: C64,
    central: [C64; 3],
}

impl RatioCoefficients {
    pub fn new(rho: f64, omega: C64) -> Result<Self> {
        let data = wiener_hopf(rho, omega)?;
        let (zp, zm) = (data.z_plus, data.z_minus);
        if !(zm.norm() < 1.0 && zp.norm() > 1.0) {
            return Err(Error::Unsupported(format!(
                "roots |z+| = {}, |z-| = {} are outside the regime |z+| > 1 > |z-|",
                zp.norm(),
                zm.norm()
            )));
        }
        let c = 2.0 * omega / rho;
        let a = (zp - rho) / (zp - zm);
        let b = (zm - rho) / (zm - zp);
        // Aliasing in an M-point DFT is of order max(|z−|, 1/|z+|)^M.
        let q = zm.norm().max(1.0 / zp.norm());
        let mut nodes = RATIO_DFT_NODES;
        while nodes < RATIO_DFT_MAX_NODES && q.powf(nodes as f64) > 1e-16 {
            nodes *= 2;
        }
        let mut central = [ZERO; 3];
        for j in 0..nodes {
            let theta = 2.0 * PI * j as f64 / nodes as f64;
            let z = C64::from_polar(1.0, theta);
            let r = p_omega(rho, -omega, z) / p_omega(rho, omega, z);
            central[0] += r * z;
            central[1] += r;
            central[2] += r / z;
        }
        central.iter_mut().for_each(|c| *c /= nodes as f64);
        Ok(RatioCoefficients { data, dft_nodes: nodes, plus_factor: -c * a, minus_factor: c * b, central })
    }

    /// Closed form, valid for `|k| ≥ 1`.
    pub fn closed_form(&self, k: i64) -> C64 {
        if k >= 1 {
            self.plus_factor * self.data.z_plus.powi(-(k as i32) - 1)
        } else if k <= -1 {
            self.minus_factor * self.data.z_minus.powi((-k) as i32 - 1)
        } else {
            ONE + self.plus_factor / self.data.z_plus
        }
    }

    pub fn coefficient(&self, k: i64) -> C64 {
        match k {
            -1..=1 => self.central[(k + 1) as usize],
            _ => self.closed_form(k),
        }
    }
}

pub fn symbol_ratio_fourier(rho: f64, omega: C64, k: i64) -> Result<C64> {
    Ok(RatioCoefficients::new(rho, omega)?.coefficient(k))
}

/// Terms of `Σ_{k≥1}` are summed until they fall below this fraction of the running sum.
const TRACE_TAIL: f64 = 1e-16;
const TRACE_MAX_TERMS: usize = 100_000_000;

/// Sums `Σ_{k≥1} term(k, ψ̂_k, ψ̂_{−k})` with the geometric tails of the
/// coefficients generated by recurrence.
fn sum_pairs(coeffs: &RatioCoefficients, mut term: impl FnMut(f64, C64, C64) -> f64) -> f64 {
    let (zp, zm) = (coeffs.data.z_plus, coeffs.data.z_minus);
    let mut total = term(1.0, coeffs.coefficient(1), coeffs.coefficient(-1));
    let inv_zp = 1.0 / zp;
    let mut plus = coeffs.closed_form(2);
    let mut minus = coeffs.closed_form(-2);
    for k in 2..TRACE_MAX_TERMS {
        let t = term(k as f64, plus, minus);
        total += t;
        if t.abs() <= TRACE_TAIL * total.abs() && plus.norm() + minus.norm() < 1e-12 {
            break;
        }
        plus *= inv_zp;
        minus *= zm;
        // Re-anchor occasionally so rounding in the recurrence stays bounded.
        if k % 4096 == 0 {
            plus = coeffs.closed_form(k as i64 + 1);
            minus = coeffs.closed_form(-(k as i64) - 1);
        }
    }
    total
}

/// `Tr H(κ)H(κ̃)` for the rescaled real part `κ = Re(ψ)/n^γ` of the
/// Cayley symbol: `(1/(4n^{2γ}))·Σ_{k≥1} k·|ψ̂_k + conj(ψ̂_{−k})|²`.
pub fn hankel_trace_sigma(rho: f64, omega: C64, n: usize, gamma: f64) -> Result<f64> {
    let coeffs = RatioCoefficients::new(rho, omega)?;
    let s = scale(n, gamma);
    Ok(sum_pairs(&coeffs, |k, p, m| k * (p + m.conj()).norm_sqr()) / (4.0 * s * s))
}

/// `(1/(2n^{2γ}))·Σ_{k≥1} k·Re(ψ̂_k ψ̂_{−k})`, the cross term that vanishes in the limit.
pub fn hankel_cross_term(rho: f64, omega: C64, n: usize, gamma: f64) -> Result<f64> {
    let coeffs = RatioCoefficients::new(rho, omega)?;
    let s = scale(n, gamma);
    Ok(sum_pairs(&coeffs, |k, p, m| k * (p * m).re) / (2.0 * s * s))
}

/// `Tr H_N(κ)H_N(κ̃)` for `N×N` Hankel truncations, summed along
/// anti-diagonals: entry `s = i + j` occurs `min(s + 1, 2N − 1 − s)` times.
pub fn hankel_trace_truncated(rho: f64, omega: C64, n: usize, gamma: f64, size: usize) -> Result<f64> {
    let coeffs = RatioCoefficients::new(rho, omega)?;
    let s = scale(n, gamma);
    let mut total = 0.0;
    for d in 0..(2 * size).saturating_sub(1) {
        let k = d as i64 + 1;
        let kappa_plus = (coeffs.coefficient(k) + coeffs.coefficient(-k).conj()) / (2.0 * s);
        let count = (d + 1).min(2 * size - 1 - d) as f64;
        // κ̃_k = κ_{−k} = conj(κ_k) for the real symbol κ.
        total += count * (kappa_plus * kappa_plus.conj()).re;
    }
    Ok(total)
}

/// Closed form `2|ω|²/(n^{2γ}(1 − |ω|²)²)` of the block Hankel trace for `α = 0`.
pub fn alpha0_block_trace(omega: C64, n: usize, gamma: f64) -> Result<f64> {
    let w2 = omega.norm_sqr();
    if !(w2 < 1.0) {
        return Err(Error::invalid("block trace needs |omega| < 1"));
    }
    let s = scale(n, gamma);
    Ok(2.0 * w2 / (s * s * (1.0 - w2) * (1.0 - w2)))
}

/// Diagonal of the block Fourier coefficient `φ̂_j` for `α = 0`:
/// `diag(ω^j, ω̄^j)/n^γ` for `j > 0` and `diag(ω̄^{|j|}, ω^{|j|})/n^γ` for `j ≤ 0`.
pub fn alpha0_block_coefficient(omega: C64, n: usize, gamma: f64, j: i64) -> [C64; 2] {
    let s = scale(n, gamma);
    let p = omega.powi(j.unsigned_abs() as i32) / s;
    if j > 0 {
        [p, p.conj()]
    } else {
        [p.conj(), p]
    }
}

/// `Σ_{j≥1} Tr Σ_{k≥0} φ̂_{k+j}φ̂_{−k−j}` summed directly.
pub fn alpha0_block_trace_direct(omega: C64, n: usize, gamma: f64) -> Result<f64> {
    if !(omega.norm() < 1.0) {
        return Err(Error::invalid("block trace needs |omega| < 1"));
    }
    let mut total = 0.0;
    for m in 1..TRACE_MAX_TERMS {
        let a = alpha0_block_coefficient(omega, n, gamma, m as i64);
        let b = alpha0_block_coefficient(omega, n, gamma, -(m as i64));
        // Index m = k + j appears for j = 1..=m.
        let t = m as f64 * (a[0] * b[0] + a[1] * b[1]).re;
        total += t;
        if t.abs() <= TRACE_TAIL * total.abs() {
            break;
        }
    }
    Ok(total)
}

/// Summary of the four block-coefficient properties at one `n`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BlockCoefficientDiagnostics {
    pub n: usize,
    pub scale: f64,
    /// `Σ_k ‖φ̂_k‖_1`.
    pub coefficient_sum: f64,
    /// `−n^γ·ln|ω_n|`, the exact decay rate of `‖φ̂_k‖_1` in `|k|/n^γ`.
    pub decay_rate: f64,
    /// `Σ_{|k|≥1} |k|·‖φ̂_k‖_1²`.
    pub weighted_square_sum: f64,
}

/// Fitted constants of the block-coefficient properties over an `n` grid.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BlockCoefficientReport {
    pub eta: C64,
    pub gamma: f64,
    pub rows: Vec<BlockCoefficientDiagnostics>,
    /// Uniform bound for `Σ_k ‖φ̂_k‖_1`.
    pub sum_bound: f64,
    /// `‖φ̂_k‖_1 ≤ (d̃/n^γ)·exp(−d|k|/n^γ)`.
    pub d: f64,
    pub d_tilde: f64,
    /// `Σ_{k≥m} ‖φ̂_k‖_1 ≤ D_1·exp(−D_2·m/n^γ)`.
    pub d1: f64,
    pub d2: f64,
    /// `2/(Re η)²`.
    pub weighted_square_limit: f64,
}

const BLOCK_TAIL: f64 = 1e-17;

/// Evaluates the block-coefficient properties by direct summation.
pub fn block_coefficient_properties(eta: C64, gamma: f64, n_grid: &[usize]) -> Result<BlockCoefficientReport> {
    if !(eta.re > 0.0) {
        return Err(Error::invalid("block coefficient properties need Re(eta) > 0"));
    }
    if n_grid.is_empty() {
        return Err(Error::invalid("empty n grid"));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    let (mut d1, mut d2) = (0.0f64, f64::INFINITY);
    for &n in n_grid {
        let omega = omega_n(eta, n, gamma, 0.0);
        let r = omega.norm();
        if !(r < 1.0) {
            return Err(Error::invalid(format!("omega_n is outside the disk at n = {n}")));
        }
        let s = scale(n, gamma);
        // ‖φ̂_k‖_1 = 2|ω|^{|k|}/n^γ.
        let norm1 = |k: f64| 2.0 * r.powf(k) / s;
        let mut coefficient_sum = norm1(0.0);
        let mut weighted = 0.0;
        let mut k = 1usize;
        loop {
            let c = norm1(k as f64);
            coefficient_sum += 2.0 * c;
            weighted += 2.0 * k as f64 * c * c;
            if c <= BLOCK_TAIL * coefficient_sum {
                break;
            }
            k += 1;
        }
        let decay_rate = -s * r.ln();
        // Tail Σ_{k≥m} ‖φ̂_k‖_1 = (2/n^γ)·|ω|^m/(1 − |ω|) = (2/(n^γ(1−|ω|)))·e^{−rate·m/n^γ}.
        d1 = d1.max(2.0 / (s * (1.0 - r)));
        d2 = d2.min(decay_rate);
        rows.push(BlockCoefficientDiagnostics { n, scale: s, coefficient_sum, decay_rate, weighted_square_sum: weighted });
    }
    let sum_bound = rows.iter().map(|r| r.coefficient_sum).fold(0.0, f64::max);
    Ok(BlockCoefficientReport {
        eta,
        gamma,
        rows,
        sum_bound,
        d: d2,
        d_tilde: 2.0,
        d1,
        d2,
        weighted_square_limit: 2.0 / (eta.re * eta.re),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_sqrt_convention() {
        assert!((branch_sqrt(C64::new(-1.0, 0.0)) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(branch_sqrt(C64::new(4.0, 0.0)), C64::new(2.0, 0.0));
        assert_eq!(branch_sqrt(C64::new(4.0, -0.0)), C64::new(2.0, 0.0));
        // Just below the cut the root is close to −2.
        assert!((branch_sqrt(C64::new(4.0, -1e-12)) + 2.0).norm() < 1e-9);
    }

    #[test]
    fn geronimus_symbol_coefficients() {
        let s = geronimus_symbol(0.6).unwrap();
        assert!((s.scalar(0).unwrap() + 0.36).norm() < 1e-15);
        assert!((s.scalar(1).unwrap() - 0.8).norm() < 1e-15);
        assert!(geronimus_symbol(0.0).is_err());
    }

    #[test]
    fn roots_straddle_the_circle_across_the_support() {
        let rho = 0.75f64.sqrt();
        for theta0 in [PI / 2.0 + 0.2, 2.0, PI, 4.5, 1.5 * PI - 0.2] {
            let omega = C64::from_polar(0.99, theta0);
            let (zp, zm) = roots(rho, omega).unwrap();
            assert!(zp.norm() > 1.0 && zm.norm() < 1.0, "theta0 {theta0}: {} {}", zp.norm(), zm.norm());
            assert!((zp * zm - omega).norm() < 1e-14);
            assert!((zp + zm - (ONE + omega) / rho).norm() < 1e-14);
        }
    }

    #[test]
    fn block_trace_at_unit_eta() {
        let v = alpha0_block_trace(C64::new(0.9, 0.0), 100, 0.5).unwrap();
        assert!((v - 0.448753462603878).abs() < 1e-12, "{v}");
    }
}
