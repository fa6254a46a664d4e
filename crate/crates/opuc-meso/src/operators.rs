//! Finite sections of the GGT and CMV matrices, Toeplitz and Hankel
//! matrices of symbols, Cayley transforms and resolvent decay.
//!
//! Two truncation modes exist. `Plain` is the top-left `N×N` block of the
//! infinite matrix. `UnitaryCut` replaces `α_{N−1}` by a unimodular value
//! first; the infinite matrix then decouples after row `N−1`, so the block
//! is exactly unitary and functional calculus on it is well defined. Away
//! from the cut both modes agree with the infinite operator.

use crate::error::{Error, Result};
use crate::linalg::{expm, BandedLu, Lu, Matrix};
use crate::measures::VerblunskySequence;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationMode {
    Plain,
    UnitaryCut,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    Ggt(TruncationMode),
    Cmv(TruncationMode),
    Toeplitz,
    Hankel,
    BlockToeplitz,
    BlockHankel,
    Cayley(Box<OperatorKind>),
    Resolvent(Box<OperatorKind>),
    Exponential(Box<OperatorKind>),
    RealPart(Box<OperatorKind>),
}

/// Parameters an operator was generated from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorMeta {
    pub sequence: Option<String>,
    pub symbol: Option<String>,
    pub omega: Option<C64>,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTruncation {
    pub data: Matrix,
    pub kind: OperatorKind,
    pub meta: OperatorMeta,
}

impl OperatorTruncation {
    pub fn size(&self) -> usize {
        self.data.rows()
    }

    fn derived(&self, data: Matrix, kind: OperatorKind, omega: Option<C64>) -> Self {
        let mut meta = self.meta.clone();
        if omega.is_some() {
            meta.omega = omega;
        }
        OperatorTruncation { data, kind, meta }
    }
}

/// `α_0..α_{N−1}` with the last one made unimodular in `UnitaryCut` mode.
fn truncation_alphas(seq: &VerblunskySequence, n: usize, mode: TruncationMode) -> Result<Vec<C64>> {
    let mut alpha = seq.alphas(n)?;
    if mode == TruncationMode::UnitaryCut {
        if let Some(last) = alpha.last_mut() {
            let r = last.norm();
            *last = if r > 0.0 { *last / r } else { ONE };
        }
    }
    Ok(alpha)
}

fn rhos(alpha: &[C64]) -> Vec<f64> {
    alpha.iter().map(|a| (1.0 - a.norm_sqr()).max(0.0).sqrt()).collect()
}

/// GGT matrix from explicit coefficients: `G_{ij} = −conj(α_j)·α_{i−1}·Π_{l=i}^{j−1} ρ_l`
/// for `i ≤ j` with `α_{−1} = −1`, `G_{j+1,j} = ρ_j`, zero below.
pub fn ggt_from_alphas(alpha: &[C64]) -> Matrix {
    let n = alpha.len();
    let rho = rhos(alpha);
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        let prev = if i == 0 { -ONE } else { alpha[i - 1] };
        let mut prod = 1.0;
        for j in i..n {
            if j > i {
                prod *= rho[j - 1];
                if prod == 0.0 {
                    break;
                }
            }
            g[(i, j)] = -alpha[j].conj() * prev * prod;
        }
        if i + 1 < n {
            g[(i + 1, i)] = C64::new(rho[i], 0.0);
        }
    }
    g
}

/// CMV matrix `C = LM` from explicit coefficients, with
/// `L = Θ_0 ⊕ Θ_2 ⊕ …`, `M = 1 ⊕ Θ_1 ⊕ Θ_3 ⊕ …` and
/// `Θ_j = [[conj α_j, ρ_j], [ρ_j, −α_j]]`. Needs `α_0..α_N` for an `N×N`
/// block; the last coefficient only enters through the final row pair.
pub fn cmv_from_alphas(alpha: &[C64], n: usize) -> Matrix {
    assert!(alpha.len() > n, "need alpha_0..alpha_N for an N x N CMV block");
    let rho = rhos(alpha);
    // Entry (r, c) of a block-diagonal factor whose 2×2 blocks start at `offset` parity.
    let theta = |j: usize, r: usize, c: usize| -> C64 {
        match (r, c) {
            (0, 0) => alpha[j].conj(),
            (0, 1) | (1, 0) => C64::new(rho[j], 0.0),
            _ => -alpha[j],
        }
    };
    let l_row = |i: usize| -> [(usize, C64); 2] {
        let b = i - i % 2;
        [(b, theta(b, i - b, 0)), (b + 1, theta(b, i - b, 1))]
    };
    let m_row = |k: usize| -> Vec<(usize, C64)> {
        if k == 0 {
            vec![(0, ONE)]
        } else {
            let b = if k % 2 == 1 { k } else { k - 1 };
            vec![(b, theta(b, k - b, 0)), (b + 1, theta(b, k - b, 1))]
        }
    };
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for (k, l) in l_row(i) {
            if l == ZERO {
                continue;
            }
            for (j, m) in m_row(k) {
                if j < n {
                    c[(i, j)] += l * m;
                }
            }
        }
    }
    c
}

pub fn ggt_truncation(seq: &VerblunskySequence, n: usize, mode: TruncationMode) -> Result<OperatorTruncation> {
    if n == 0 {
        return Err(Error::invalid("truncation size must be at least 1"));
    }
    let alpha = truncation_alphas(seq, n, mode)?;
    Ok(OperatorTruncation {
        data: ggt_from_alphas(&alpha),
        kind: OperatorKind::Ggt(mode),
        meta: OperatorMeta { sequence: Some(seq.id()), size: n, ..Default::default() },
    })
}

pub fn cmv_truncation(seq: &VerblunskySequence, n: usize, mode: TruncationMode) -> Result<OperatorTruncation> {
    if n < 2 {
        return Err(Error::invalid("CMV truncation size must be at least 2"));
    }
    let mut alpha = truncation_alphas(seq, n, mode)?;
    alpha.push(seq.alpha(n)?);
    Ok(OperatorTruncation {
        data: cmv_from_alphas(&alpha, n),
        kind: OperatorKind::Cmv(mode),
        meta: OperatorMeta { sequence: Some(seq.id()), size: n, ..Default::default() },
    })
}

/// Band widths small enough for the banded solver.
fn banded_shape(a: &Matrix) -> Option<(usize, usize)> {
    let (kl, ku) = a.bandwidth();
    (kl + ku <= 16 && a.rows() > 4 * (kl + ku + 1)).then_some((kl, ku))
}

/// `(A − zI)^{-1}`; banded matrices use the banded factorization and
/// exploit that column `j` of the identity starts at row `j`.
pub fn resolvent_matrix(a: &Matrix, z: C64) -> Result<Matrix> {
    let n = a.rows();
    let shifted = a.shift(-z);
    if let Some((kl, ku)) = banded_shape(a) {
        let lu = BandedLu::factor(&shifted, kl, ku)?;
        let mut out = Matrix::zeros(n, n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = ZERO);
            col[j] = ONE;
            lu.solve_in_place(&mut col, j);
            for (i, v) in col.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        Ok(out)
    } else {
        Ok(Lu::factor(&shifted)?.inverse())
    }
}

pub fn resolvent(a: &OperatorTruncation, z: C64) -> Result<OperatorTruncation> {
    let data = resolvent_matrix(&a.data, z)?;
    Ok(a.derived(data, OperatorKind::Resolvent(Box::new(a.kind.clone())), Some(z)))
}

/// `(A + ω)(A − ω)^{-1} = I + 2ω(A − ω)^{-1}`.
pub fn cayley_matrix(a: &Matrix, omega: C64) -> Result<Matrix> {
    if (omega.norm() - 1.0).abs() < 1e-15 {
        return Err(Error::invalid("Cayley parameter must not lie on the unit circle"));
    }
    let mut x = resolvent_matrix(a, omega)?;
    x.scale_in_place(2.0 * omega);
    for i in 0..x.rows() {
        x[(i, i)] += ONE;
    }
    Ok(x)
}

pub fn cayley(a: &OperatorTruncation, omega: C64) -> Result<OperatorTruncation> {
    let data = cayley_matrix(&a.data, omega)?;
    Ok(a.derived(data, OperatorKind::Cayley(Box::new(a.kind.clone())), Some(omega)))
}

/// `½(A + A*)`.
pub fn real_part(a: &OperatorTruncation) -> OperatorTruncation {
    a.derived(a.data.hermitian_part(), OperatorKind::RealPart(Box::new(a.kind.clone())), None)
}

pub fn matrix_exp(a: &OperatorTruncation, tol: f64) -> Result<OperatorTruncation> {
    let data = expm(&a.data, tol)?;
    Ok(a.derived(data, OperatorKind::Exponential(Box::new(a.kind.clone())), None))
}

/// A Fourier coefficient: scalar, or a 2×2 block stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Scalar(C64),
    Block([C64; 4]),
}

impl Coefficient {
    fn zero_like(&self) -> Coefficient {
        match self {
            Coefficient::Scalar(_) => Coefficient::Scalar(ZERO),
            Coefficient::Block(_) => Coefficient::Block([ZERO; 4]),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Coefficient::Scalar(_) => 1,
            Coefficient::Block(_) => 2,
        }
    }

    fn entry(&self, r: usize, c: usize) -> C64 {
        match self {
            Coefficient::Scalar(z) => *z,
            Coefficient::Block(b) => b[2 * r + c],
        }
    }
}

/// Function on the circle given by Fourier coefficients `ψ̂_k`, stored for
/// `k` in a contiguous window. Outside the window the coefficients are
/// zero when the symbol is a trigonometric polynomial and unknown
/// otherwise.
#[derive(Clone)]
pub struct Symbol {
    id: String,
    fourier: BTreeMap<i64, Coefficient>,
    window: (i64, i64),
    polynomial: bool,
    evaluator: Option<Arc<dyn Fn(f64) -> C64 + Send + Sync>>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("id", &self.id)
            .field("window", &self.window)
            .field("polynomial", &self.polynomial)
            .finish()
    }
}

impl Symbol {
    /// Trigonometric polynomial `Σ_k c_k e^{ikθ}` with `coeffs[j] = c_{lo+j}`.
    pub fn trig_polynomial(id: impl Into<String>, lo: i64, coeffs: &[C64]) -> Symbol {
        let fourier = coeffs.iter().enumerate().map(|(j, c)| (lo + j as i64, Coefficient::Scalar(*c))).collect();
        Symbol {
            id: id.into(),
            fourier,
            window: (lo, lo + coeffs.len() as i64 - 1),
            polynomial: true,
            evaluator: None,
        }
    }

    /// Coefficients known on `[lo, hi]` only; `coeff(k)` must cover it.
    pub fn truncated(id: impl Into<String>, lo: i64, hi: i64, coeff: impl Fn(i64) -> Coefficient) -> Symbol {
        Symbol {
            id: id.into(),
            fourier: (lo..=hi).map(|k| (k, coeff(k))).collect(),
            window: (lo, hi),
            polynomial: false,
            evaluator: None,
        }
    }

    pub fn with_evaluator(mut self, f: Arc<dyn Fn(f64) -> C64 + Send + Sync>) -> Symbol {
        self.evaluator = Some(f);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn coefficient(&self, k: i64) -> Result<Coefficient> {
        if let Some(c) = self.fourier.get(&k) {
            return Ok(*c);
        }
        if self.polynomial {
            let template = self.fourier.values().next().copied().unwrap_or(Coefficient::Scalar(ZERO));
            Ok(template.zero_like())
        } else {
            Err(Error::invalid(format!("symbol {} has no coefficient at k = {k}", self.id)))
        }
    }

    pub fn scalar(&self, k: i64) -> Result<C64> {
        match self.coefficient(k)? {
            Coefficient::Scalar(z) => Ok(z),
            Coefficient::Block(_) => Err(Error::invalid(format!("symbol {} is block valued", self.id))),
        }
    }

    fn block_dim(&self) -> usize {
        self.fourier.values().next().map(Coefficient::dim).unwrap_or(1)
    }

    /// Closed-form value at `e^{iθ}` if one was attached, otherwise the
    /// stored partial Fourier sum.
    pub fn eval(&self, theta: f64) -> Result<C64> {
        if let Some(f) = &self.evaluator {
            return Ok(f(theta));
        }
        let mut acc = ZERO;
        for (k, c) in &self.fourier {
            match c {
                Coefficient::Scalar(z) => acc += z * C64::from_polar(1.0, *k as f64 * theta),
                Coefficient::Block(_) => return Err(Error::invalid("block symbols have no scalar value")),
            }
        }
        Ok(acc)
    }

    /// `θ ↦ ψ(e^{−iθ})`: coefficients `ψ̂_{−k}`.
    pub fn reflect(&self) -> Symbol {
        Symbol {
            id: format!("reflect({})", self.id),
            fourier: self.fourier.iter().map(|(k, c)| (-k, *c)).collect(),
            window: (-self.window.1, -self.window.0),
            polynomial: self.polynomial,
            evaluator: self.evaluator.clone().map(|f| Arc::new(move |t: f64| f(-t)) as Arc<dyn Fn(f64) -> C64 + Send + Sync>),
        }
    }

    /// Product of two scalar trigonometric polynomials.
    pub fn product(&self, other: &Symbol) -> Result<Symbol> {
        if !(self.polynomial && other.polynomial) {
            return Err(Error::invalid("symbol products are only formed for trigonometric polynomials"));
        }
        let lo = self.window.0 + other.window.0;
        let hi = self.window.1 + other.window.1;
        let mut out = vec![ZERO; (hi - lo + 1) as usize];
        for j in self.window.0..=self.window.1 {
            let a = self.scalar(j)?;
            for k in other.window.0..=other.window.1 {
                out[(j + k - lo) as usize] += a * other.scalar(k)?;
            }
        }
        Ok(Symbol::trig_polynomial(format!("{}*{}", self.id, other.id), lo, &out))
    }
}

fn structured(sym: &Symbol, n: usize, index: impl Fn(usize, usize) -> i64) -> Result<Matrix> {
    let d = sym.block_dim();
    let mut m = Matrix::zeros(d * n, d * n);
    for i in 0..n {
        for j in 0..n {
            let c = sym.coefficient(index(i, j))?;
            for r in 0..d {
                for s in 0..d {
                    m[(d * i + r, d * j + s)] = c.entry(r, s);
                }
            }
        }
    }
    Ok(m)
}

fn symbol_operator(sym: &Symbol, data: Matrix, kind: OperatorKind, n: usize) -> OperatorTruncation {
    OperatorTruncation {
        data,
        kind,
        meta: OperatorMeta { symbol: Some(sym.id.clone()), size: n, ..Default::default() },
    }
}

/// `T_{ij} = ψ̂_{i−j}`.
pub fn toeplitz(sym: &Symbol, n: usize) -> Result<OperatorTruncation> {
    let data = structured(sym, n, |i, j| i as i64 - j as i64)?;
    let kind = if sym.block_dim() == 1 { OperatorKind::Toeplitz } else { OperatorKind::BlockToeplitz };
    Ok(symbol_operator(sym, data, kind, n))
}

/// `H_{ij} = ψ̂_{i+j+1}`, the offset for which
/// `T(ab) = T(a)T(b) + H(a)H(b̃)` holds.
pub fn hankel(sym: &Symbol, n: usize) -> Result<OperatorTruncation> {
    let data = structured(sym, n, |i, j| (i + j + 1) as i64)?;
    let kind = if sym.block_dim() == 1 { OperatorKind::Hankel } else { OperatorKind::BlockHankel };
    Ok(symbol_operator(sym, data, kind, n))
}

pub fn block_toeplitz(sym: &Symbol, n: usize) -> Result<OperatorTruncation> {
    if sym.block_dim() != 2 {
        return Err(Error::invalid(format!("symbol {} is not block valued", sym.id)));
    }
    toeplitz(sym, n)
}

pub fn block_hankel(sym: &Symbol, n: usize) -> Result<OperatorTruncation> {
    if sym.block_dim() != 2 {
        return Err(Error::invalid(format!("symbol {} is not block valued", sym.id)));
    }
    hankel(sym, n)
}

/// Which matrix the resolvent decay is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorModel {
    Ggt,
    Cmv,
}

/// Off-diagonal decay of a resolvent: `profile[d]` is the largest entry
/// with `|i − j| = d` among central rows and columns, and
/// `profile[d] ≈ constant·e^{−rate·d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub constant: f64,
    pub profile: Vec<f64>,
    pub fitted_range: (usize, usize),
}

/// Largest `|M_{ij}|` over `|i − j| = d` with both indices in the middle
/// half of the matrix, for `d < n/4`.
pub fn decay_profile(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let (lo, hi) = (n / 4, n - n / 4);
    let dmax = (n / 4).max(1);
    let mut profile = vec![0.0f64; dmax];
    for i in lo..hi {
        for j in lo..hi {
            let d = i.abs_diff(j);
            if d < dmax {
                profile[d] = profile[d].max(m[(i, j)].norm());
            }
        }
    }
    profile
}

/// Least-squares fit of `ln profile(d)` on `d ∈ [1, D]`, where `D` is the
/// last distance before the profile drops below `1e−12·profile(1)`.
pub fn fit_decay(profile: &[f64]) -> Result<DecayFit> {
    if profile.len() < 4 || !(profile[1] > 0.0) {
        return Err(Error::Degenerate("decay profile too short to fit".into()));
    }
    let floor = 1e-12 * profile[1];
    let end = profile.iter().enumerate().skip(1).take_while(|(_, p)| **p > floor).map(|(d, _)| d).last().unwrap_or(1);
    if end < 3 {
        return Err(Error::Degenerate("decay profile drops too fast to fit".into()));
    }
    let pts: Vec<(f64, f64)> = (1..=end).map(|d| (d as f64, profile[d].ln())).collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    Ok(DecayFit { rate: -slope, constant: intercept.exp(), profile: profile.to_vec(), fitted_range: (1, end) })
}

/// Fits the off-diagonal decay of `(M − z)^{-1}` for the unitary-cut
/// truncation `M` of size `n`.
pub fn resolvent_decay_rate(seq: &VerblunskySequence, z: C64, n: usize, model: OperatorModel) -> Result<DecayFit> {
    if !(z.norm() < 1.0) {
        return Err(Error::invalid("resolvent decay needs |z| < 1"));
    }
    let m = match model {
        OperatorModel::Ggt => ggt_truncation(seq, n, TruncationMode::UnitaryCut)?,
        OperatorModel::Cmv => cmv_truncation(seq, n, TruncationMode::UnitaryCut)?,
    };
    fit_decay(&decay_profile(&resolvent_matrix(&m.data, z)?))
}

fn distance_to_circle(z: C64) -> f64 {
    (1.0 - z.norm()).abs()
}

/// Guaranteed decay rate for the GGT resolvent with constant `|α|`:
/// `min(d/(2(12/(1−ρ)² + 3)), ln((1+ρ)/(2ρ)))`, `d` the distance to the circle.
pub fn combes_thomas_ggt(rho: f64, z: C64) -> f64 {
    let d = distance_to_circle(z);
    let first = d / (2.0 * (12.0 / ((1.0 - rho) * (1.0 - rho)) + 3.0));
    let second = ((1.0 + rho) / (2.0 * rho)).ln();
    first.min(second)
}

/// Guaranteed decay rate for the CMV resolvent: `min(1/3, d/(6e))`.
pub fn combes_thomas_cmv(z: C64) -> f64 {
    (1.0f64 / 3.0).min(distance_to_circle(z) / (6.0 * std::f64::consts::E))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_unitary(m: &Matrix, tol: f64) -> bool {
        let p = m.matmul(&m.adjoint());
        p.sub(&Matrix::identity(m.rows())).max_abs() < tol
    }

    #[test]
    fn ggt_geronimus_corner() {
        let a = 0.6;
        let rho = (1.0f64 - a * a).sqrt();
        let g = ggt_truncation(&VerblunskySequence::geronimus(a).unwrap(), 4, TruncationMode::Plain).unwrap();
        let expect = [[a, a * rho], [rho, -a * a]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.data[(i, j)] - expect[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cue_ggt_is_a_shift() {
        let g = ggt_truncation(&VerblunskySequence::cue(), 6, TruncationMode::Plain).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(g.data[(i, j)], C64::new(e, 0.0));
            }
        }
    }

    #[test]
    fn unitary_cut_is_unitary() {
        let seq = VerblunskySequence::explicit(vec![
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.4),
            C64::new(0.5, -0.1),
            C64::new(0.1, 0.1),
            C64::new(0.0, -0.6),
            C64::new(0.2, 0.2),
            C64::new(-0.3, 0.0),
        ]);
        for n in [5, 6] {
            let g = ggt_truncation(&seq, n, TruncationMode::UnitaryCut).unwrap();
            let c = cmv_truncation(&seq, n, TruncationMode::UnitaryCut).unwrap();
            assert!(is_unitary(&g.data, 1e-14), "ggt n={n}");
            assert!(is_unitary(&c.data, 1e-14), "cmv n={n}");
        }
    }

    #[test]
    fn cmv_rows_for_cue() {
        let c = cmv_truncation(&VerblunskySequence::cue(), 6, TruncationMode::Plain).unwrap();
        assert_eq!(c.data.row(0)[2], ONE);
        assert_eq!(c.data.row(1)[0], ONE);
        assert_eq!(c.data.row(0).iter().filter(|z| **z != ZERO).count(), 1);
    }

    #[test]
    fn cayley_scalar() {
        let a = Matrix::identity(1);
        let x = cayley_matrix(&a, C64::new(0.5, 0.0)).unwrap();
        assert!((x[(0, 0)] - 3.0).norm() < 1e-15);
    }

    #[test]
    fn banded_and_dense_resolvents_agree() {
        let seq = VerblunskySequence::geronimus(0.4).unwrap();
        let c = cmv_truncation(&seq, 40, TruncationMode::UnitaryCut).unwrap();
        let z = C64::new(0.3, 0.5);
        let banded = resolvent_matrix(&c.data, z).unwrap();
        let dense = Lu::factor(&c.data.shift(-z)).unwrap().inverse();
        assert!(banded.sub(&dense).max_abs() < 1e-12);
    }

    #[test]
    fn hankel_offset_and_hilbert_schmidt_norm() {
        let sym = Symbol::trig_polynomial("p", -2, &[ONE, ONE, ONE, C64::new(2.0, 0.0), C64::new(0.0, 3.0)]);
        let h = hankel(&sym, 5).unwrap();
        assert_eq!(h.data[(0, 0)], C64::new(2.0, 0.0));
        let hs = h.data.frobenius_norm().powi(2);
        assert!((hs - (4.0 + 2.0 * 9.0)).abs() < 1e-12);
    }

    #[test]
    fn truncated_symbols_refuse_missing_coefficients() {
        let sym = Symbol::truncated("t", -3, 3, |_| Coefficient::Scalar(ONE));
        assert!(toeplitz(&sym, 4).is_ok());
        assert!(toeplitz(&sym, 5).is_err());
    }

    #[test]
    fn shift_resolvent_decays_at_log_rate() {
        let z = C64::new(0.5, 0.0);
        let fit = resolvent_decay_rate(&VerblunskySequence::cue(), z, 200, OperatorModel::Ggt).unwrap();
        assert!((fit.rate - 2f64.ln()).abs() < 1e-6, "{}", fit.rate);
    }
}
