//! Orthonormal polynomials on the circle, their reversed duals, the CMV
//! basis and the Christoffel–Darboux kernel.

use crate::error::Result;
use crate::measures::VerblunskySequence;
use num_complex::Complex64 as C64;

/// `φ_n(z)` and `φ_n*(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyPair {
    pub n: usize,
    pub phi: C64,
    pub phi_star: C64,
    pub z: C64,
}

/// `K_n(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub n: usize,
    pub theta: f64,
    pub phi: f64,
    pub value: C64,
}

/// Below this distance `|1 − e^{i(θ−φ)}|` the kernel is summed directly.
pub const CD_SWITCH: f64 = 1e-6;

/// The first `n` coefficients of a sequence, unpacked for repeated
/// evaluation of `φ_0..φ_n`.
#[derive(Clone, Debug)]
pub struct Recurrence {
    alpha: Vec<C64>,
    rho: Vec<f64>,
}

impl Recurrence {
    pub fn new(seq: &VerblunskySequence, n: usize) -> Result<Self> {
        let alpha = seq.alphas(n)?;
        let rho = alpha.iter().map(|a| (1.0 - a.norm_sqr()).sqrt()).collect();
        Ok(Recurrence { alpha, rho })
    }

    pub fn degree(&self) -> usize {
        self.alpha.len()
    }

    /// `(φ_m(z), φ_m*(z))` for `m ≤ degree`.
    pub fn eval_to(&self, m: usize, z: C64) -> (C64, C64) {
        let (mut p, mut q) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for (a, r) in self.alpha[..m].iter().zip(&self.rho[..m]) {
            let zp = z * p;
            let inv = 1.0 / r;
            p = (zp - a.conj() * q) * inv;
            q = (q - a * zp) * inv;
        }
        (p, q)
    }

    pub fn eval(&self, z: C64) -> (C64, C64) {
        self.eval_to(self.degree(), z)
    }

    /// `out[j] = φ_j(z)` for `j < out.len() ≤ degree + 1`.
    pub fn features(&self, z: C64, out: &mut [C64]) {
        let (mut p, mut q) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = p;
            if j < self.degree() {
                let zp = z * p;
                let inv = 1.0 / self.rho[j];
                let a = self.alpha[j];
                p = (zp - a.conj() * q) * inv;
                q = (q - a * zp) * inv;
            }
        }
    }

    /// `K_n(θ, θ) = Σ_{j<n} |φ_j(e^{iθ})|²` with `n = degree`.
    pub fn kernel_diag(&self, theta: f64) -> f64 {
        let z = C64::from_polar(1.0, theta);
        let (mut p, mut q) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let mut acc = 0.0;
        for (a, r) in self.alpha.iter().zip(&self.rho) {
            acc += p.norm_sqr();
            let zp = z * p;
            let inv = 1.0 / r;
            p = (zp - a.conj() * q) * inv;
            q = (q - a * zp) * inv;
        }
        acc
    }

    /// `K_n(θ, φ)` with `n = degree`: Christoffel–Darboux formula away from
    /// the diagonal, direct sum near it.
    pub fn kernel(&self, theta: f64, phi: f64) -> C64 {
        let denom = C64::new(1.0, 0.0) - C64::from_polar(1.0, theta - phi);
        if denom.norm() > CD_SWITCH {
            let (p1, q1) = self.eval(C64::from_polar(1.0, theta));
            let (p2, q2) = self.eval(C64::from_polar(1.0, phi));
            (q1 * q2.conj() - p1 * p2.conj()) / denom
        } else {
            self.kernel_direct(theta, phi)
        }
    }

    pub fn kernel_direct(&self, theta: f64, phi: f64) -> C64 {
        let n = self.degree();
        let mut f = vec![C64::new(0.0, 0.0); n];
        let mut g = vec![C64::new(0.0, 0.0); n];
        self.features(C64::from_polar(1.0, theta), &mut f);
        self.features(C64::from_polar(1.0, phi), &mut g);
        f.iter().zip(&g).map(|(a, b)| a * b.conj()).sum()
    }
}

pub fn eval_polys(seq: &VerblunskySequence, n: usize, z: C64) -> Result<PolyPair> {
    let (phi, phi_star) = Recurrence::new(seq, n)?.eval(z);
    Ok(PolyPair { n, phi, phi_star, z })
}

pub fn cd_kernel(seq: &VerblunskySequence, n: usize, theta: f64, phi: f64) -> Result<KernelValue> {
    let value = Recurrence::new(seq, n)?.kernel(theta, phi);
    Ok(KernelValue { n, theta, phi, value })
}

/// `χ_j(e^{iθ})`: `χ_{2k} = z^{-k} φ_{2k}*`, `χ_{2k-1} = z^{-k+1} φ_{2k-1}`.
pub fn cmv_basis(seq: &VerblunskySequence, j: usize, theta: f64) -> Result<C64> {
    let (p, q) = Recurrence::new(seq, j)?.eval(C64::from_polar(1.0, theta));
    Ok(cmv_from_pair(j, theta, p, q))
}

fn cmv_from_pair(j: usize, theta: f64, phi: C64, phi_star: C64) -> C64 {
    if j % 2 == 0 {
        let k = (j / 2) as f64;
        C64::from_polar(1.0, -k * theta) * phi_star
    } else {
        let k = j.div_ceil(2) as f64;
        C64::from_polar(1.0, (1.0 - k) * theta) * phi
    }
}

/// `K̃_n(θ, φ) = Σ_{j<n} χ_j(e^{iθ}) conj(χ_j(e^{iφ}))`.
pub fn cmv_kernel(seq: &VerblunskySequence, n: usize, theta: f64, phi: f64) -> Result<C64> {
    let rec = Recurrence::new(seq, n)?;
    let (z, w) = (C64::from_polar(1.0, theta), C64::from_polar(1.0, phi));
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let (p1, q1) = rec.eval_to(j, z);
        let (p2, q2) = rec.eval_to(j, w);
        acc += cmv_from_pair(j, theta, p1, q1) * cmv_from_pair(j, phi, p2, q2).conj();
    }
    Ok(acc)
}
