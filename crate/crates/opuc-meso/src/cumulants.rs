//! Cumulants of linear statistics of the ensemble, four ways: the
//! restricted-trace expansion on a truncated operator, finite differences
//! of the Fredholm-determinant generating function, k-statistics of
//! Monte-Carlo samples, and quadrature of the CD-kernel variance formula.
//!
//! `κ_m` below is the classical cumulant: `log E e^{tX} = Σ κ_m t^m/m!`,
//! so `κ_2` is the variance. The restricted-trace coefficient `C_m` is the
//! Taylor coefficient itself, `κ_m = m!·C_m`.

use crate::error::{Error, Result};
use crate::linalg::{expm, Lu, Matrix};
use crate::linstat::{mobius, ScaledStatistic, StatisticKind};
use crate::measures::{CircleMeasure, VerblunskySequence};
use crate::operators::{cayley_matrix, cmv_truncation, TruncationMode};
use crate::sampler::PointSample;
use crate::szego::Recurrence;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trace,
    Mgf,
    Mc,
    Quadrature,
}

/// One cumulant estimate. `resolution` is the operator size for `trace`
/// and `mgf`, the sample count for `mc` and the node count for
/// `quadrature`. `error_estimate` is the last adaptive change, or a
/// standard error for `mc`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantReport {
    pub order: usize,
    pub value: f64,
    pub method: Method,
    pub resolution: usize,
    pub error_estimate: f64,
    pub theory: Option<f64>,
}

pub const MAX_TRACE_ORDER: usize = 6;
pub const MAX_MGF_ORDER: usize = 4;
pub const MAX_K_ORDER: usize = 4;

/// Hermitian matrix of the statistic in the CMV basis of the unitary-cut
/// truncation of size `size`.
///
/// Poisson: `(1/n^γ)·Re((C + ω)(C − ω)^{-1})`. Rational: each
/// `Im 1/(x − p)` term becomes
/// `((I + Re(e^{−iθ0}C))/(2n^γ))·Re((C + w)(C − w)^{-1})` with
/// `w = M(p/n^γ)e^{iθ0}`; all factors are functions of the same unitary
/// matrix and commute. Other statistics need a spectral decomposition and
/// are not supported.
pub fn statistic_matrix(seq: &VerblunskySequence, stat: &ScaledStatistic, size: usize) -> Result<Matrix> {
    let c = cmv_truncation(seq, size, TruncationMode::UnitaryCut)?.data;
    let s = stat.scale();
    match &stat.kind {
        StatisticKind::Poisson(_) => {
            let omega = stat.omega().expect("poisson statistic has omega");
            let mut x = cayley_matrix(&c, omega)?;
            x.hermitian_part_in_place();
            x.scale_in_place(C64::new(1.0 / s, 0.0));
            Ok(x)
        }
        StatisticKind::RationalImag { poles, coeffs } => {
            let rot = C64::from_polar(1.0, stat.theta0);
            let mut envelope = c.scale(rot.conj());
            envelope.hermitian_part_in_place();
            for i in 0..size {
                envelope[(i, i)] += ONE;
            }
            let mut total = Matrix::zeros(size, size);
            for (p, coeff) in poles.iter().zip(coeffs) {
                let w = mobius(p / s)? * rot;
                let mut x = cayley_matrix(&c, w)?;
                x.hermitian_part_in_place();
                let term = banded_times_dense(&envelope, &x, 4);
                total = total.add(&term.scale(C64::new(coeff / (2.0 * s), 0.0)));
            }
            total.hermitian_part_in_place();
            Ok(total)
        }
        StatisticKind::Line(_) | StatisticKind::Circle(_) => Err(Error::Unsupported(
            "exact cumulants are available for poisson and rational-imag statistics only".into(),
        )),
    }
}

/// `B·X` for `B` with bandwidth at most `band`.
fn banded_times_dense(b: &Matrix, x: &Matrix, band: usize) -> Matrix {
    let n = b.rows();
    let cols = x.cols();
    let mut out = Matrix::zeros(n, cols);
    for i in 0..n {
        let lo = i.saturating_sub(band);
        let hi = (i + band + 1).min(n);
        let row = out.row_mut(i);
        for k in lo..hi {
            let bik = b[(i, k)];
            if bik == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, v) in row.iter_mut().zip(x.row(k)) {
                *o += bik * v;
            }
        }
    }
    out
}

/// Blocks `B_l = P A^l P` (as `n×n` matrices) of a Hermitian `A`, with
/// memoized products for the composition sums.
struct RestrictedPowers {
    blocks: Vec<Matrix>,
    products: HashMap<Vec<usize>, Matrix>,
}

impl RestrictedPowers {
    fn new(a: &Matrix, n: usize, max_order: usize) -> Self {
        let size = a.rows();
        // rows[k] = first n rows of A^k; B_{a+b} = rows[a]·rows[b]*.
        let half = max_order.div_ceil(2);
        let mut rows = vec![Matrix::from_fn(n, size, |i, j| if i == j { ONE } else { C64::new(0.0, 0.0) })];
        if half >= 1 {
            rows.push(a.block(0, n, 0, size));
        }
        for k in 2..=half {
            let next = rows[k - 1].matmul(a);
            rows.push(next);
        }
        let mut blocks = vec![Matrix::identity(n)];
        for l in 1..=max_order {
            let (p, q) = (l.div_ceil(2), l / 2);
            let block = if q == 0 { rows[p].block(0, n, 0, n) } else { rows[p].matmul_adjoint(&rows[q]) };
            blocks.push(block);
        }
        RestrictedPowers { blocks, products: HashMap::new() }
    }

    fn product(&mut self, parts: &[usize]) -> Matrix {
        if parts.len() == 1 {
            return self.blocks[parts[0]].clone();
        }
        if let Some(p) = self.products.get(parts) {
            return p.clone();
        }
        let mid = parts.len() / 2;
        let left = self.product(&parts[..mid]);
        let right = self.product(&parts[mid..]);
        let p = left.matmul(&right);
        self.products.insert(parts.to_vec(), p.clone());
        p
    }

    fn trace(&mut self, parts: &[usize]) -> f64 {
        if parts.len() == 1 {
            return self.blocks[parts[0]].trace().re;
        }
        let mid = parts.len() / 2;
        let left = self.product(&parts[..mid]);
        let right = self.product(&parts[mid..]);
        left.trace_of_product(&right).re
    }

    /// `Σ_j ((−1)^{j+1}/j)·Σ_{l_1+…+l_j=m} [Tr(B_{l_1}⋯B_{l_j}) − Tr B_m]/(l_1!⋯l_j!)`.
    fn coefficient(&mut self, m: usize) -> f64 {
        let tr_m = self.blocks[m].trace().re;
        let mut classes: HashMap<Vec<usize>, usize> = HashMap::new();
        for comp in compositions(m) {
            *classes.entry(canonical_rotation(&comp)).or_insert(0) += 1;
        }
        let mut keys: Vec<_> = classes.into_iter().collect();
        keys.sort();
        let mut total = 0.0;
        for (rep, count) in keys {
            let j = rep.len();
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let denom: f64 = rep.iter().map(|&l| factorial(l)).product();
            let tr = self.trace(&rep);
            total += sign / j as f64 * count as f64 * (tr - tr_m) / denom;
        }
        total
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All ordered compositions of `m` into positive parts.
fn compositions(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=m {
        for mut rest in compositions(m - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Lexicographically least rotation; traces are invariant under rotation.
fn canonical_rotation(parts: &[usize]) -> Vec<usize> {
    (0..parts.len())
        .map(|r| parts[r..].iter().chain(&parts[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

fn check_trace_inputs(a: &Matrix, n: usize, m: usize) -> Result<()> {
    if m == 0 || m > MAX_TRACE_ORDER {
        return Err(Error::Unsupported(format!("trace cumulants are implemented for orders 1..=6, got {m}")));
    }
    if !a.is_square() || n == 0 || n > a.rows() {
        return Err(Error::invalid("trace cumulants need a square matrix and 0 < n <= size"));
    }
    Ok(())
}

/// Restricted-trace coefficient `C_m` of `P_n A P_n` (`C_1 = Tr P_n A`).
pub fn restricted_trace_coefficient(a: &Matrix, n: usize, m: usize) -> Result<f64> {
    check_trace_inputs(a, n, m)?;
    let mut powers = RestrictedPowers::new(a, n, m);
    if m == 1 {
        return Ok(powers.blocks[1].trace().re);
    }
    Ok(powers.coefficient(m))
}

/// `κ_2 = Tr(P A Q A P) = Σ_{i<n≤j} |A_ij|²`.
fn variance_from_matrix(a: &Matrix, n: usize) -> f64 {
    (0..n).map(|i| a.row(i)[n..].iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
}

/// Classical cumulants `κ_1..κ_{max_order}` of the statistic whose matrix is `a`.
fn cumulants_of_matrix(a: &Matrix, n: usize, max_order: usize) -> Vec<f64> {
    if max_order <= 2 {
        let mut out = vec![(0..n).map(|i| a[(i, i)].re).sum()];
        if max_order == 2 {
            out.push(variance_from_matrix(a, n));
        }
        return out;
    }
    let mut powers = RestrictedPowers::new(a, n, max_order);
    let mut out = vec![powers.blocks[1].trace().re];
    for m in 2..=max_order {
        out.push(factorial(m) * powers.coefficient(m));
    }
    out
}

/// Classical cumulant `κ_m` from the restricted-trace expansion on a
/// given truncation.
pub fn cumulant_trace(a: &Matrix, n: usize, m: usize) -> Result<CumulantReport> {
    check_trace_inputs(a, n, m)?;
    let value = cumulants_of_matrix(a, n, m)[m - 1];
    Ok(CumulantReport { order: m, value, method: Method::Trace, resolution: a.rows(), error_estimate: 0.0, theory: None })
}

/// Settings of the adaptive truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Smallest buffer `N − n`; doubled from here.
    pub initial_buffer: usize,
    pub max_buffer: usize,
    pub tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { initial_buffer: 64, max_buffer: 1 << 14, tolerance: 1e-8 }
    }
}

/// First buffer tried for a statistic living on scale `n^{−γ}`: off-diagonal
/// decay is roughly `e^{−d/n^γ}`, so buffers much below `16·n^γ` are always
/// rejected by the change test.
fn starting_buffer(policy: &TruncationPolicy, stat: &ScaledStatistic) -> usize {
    let mut b = policy.initial_buffer.max(1);
    while (b as f64) < 16.0 * stat.scale() && b < policy.max_buffer {
        b *= 2;
    }
    b
}

/// `κ_1..κ_{max_order}` by the trace formula, doubling the truncation
/// buffer until every cumulant changes by less than the tolerance.
pub fn exact_cumulants(
    seq: &VerblunskySequence,
    stat: &ScaledStatistic,
    max_order: usize,
    policy: &TruncationPolicy,
) -> Result<Vec<CumulantReport>> {
    if max_order == 0 || max_order > MAX_TRACE_ORDER {
        return Err(Error::Unsupported(format!("trace cumulants are implemented for orders 1..=6, got {max_order}")));
    }
    let n = stat.n;
    let mut buffer = starting_buffer(policy, stat);
    let mut previous: Option<Vec<f64>> = None;
    loop {
        let size = n + buffer;
        let a = statistic_matrix(seq, stat, size)?;
        let values = cumulants_of_matrix(&a, n, max_order);
        if let Some(prev) = &previous {
            let change: Vec<f64> = values.iter().zip(prev).map(|(a, b)| (a - b).abs()).collect();
            if change.iter().all(|c| *c < policy.tolerance) {
                return Ok(values
                    .iter()
                    .zip(&change)
                    .enumerate()
                    .map(|(k, (v, c))| CumulantReport {
                        order: k + 1,
                        value: *v,
                        method: Method::Trace,
                        resolution: size,
                        error_estimate: *c,
                        theory: None,
                    })
                    .collect());
            }
            if 2 * buffer > policy.max_buffer {
                let m = change
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                return Err(Error::NoConvergence { previous: prev[m], last: values[m] });
            }
        }
        previous = Some(values);
        buffer *= 2;
    }
}

/// Step sizes of the two difference stencils.
const MGF_STEPS: [f64; 2] = [0.02, 0.01];

/// `L(t) = log det([e^{tA}]_{n×n}) − t·Tr P_n A`, i.e. the log generating
/// function minus its linear term.
fn centered_log_mgf(a: &Matrix, n: usize, t: f64, mean: f64) -> Result<f64> {
    let e = expm(&a.scale(C64::new(t, 0.0)), 1e-15)?;
    let block = e.block(0, n, 0, n);
    let lu = Lu::factor(&block)?;
    let ld = lu.log_det();
    if ld.im.abs() > 1e-8 {
        return Err(Error::Degenerate(format!("restricted exponential has non-positive determinant at t = {t}")));
    }
    Ok(ld.re - t * mean)
}

/// Five-point central difference of order `m` at step `h`; `f[i] = L((i−2)h)`.
fn central_difference(f: &[f64; 5], h: f64, m: usize) -> f64 {
    match m {
        1 => (-f[4] + 8.0 * f[3] - 8.0 * f[1] + f[0]) / (12.0 * h),
        2 => (-f[4] + 16.0 * f[3] - 30.0 * f[2] + 16.0 * f[1] - f[0]) / (12.0 * h * h),
        3 => (f[4] - 2.0 * f[3] + 2.0 * f[1] - f[0]) / (2.0 * h * h * h),
        4 => (f[4] - 4.0 * f[3] + 6.0 * f[2] - 4.0 * f[1] + f[0]) / (h * h * h * h),
        _ => unreachable!("orders above four are rejected earlier"),
    }
}

/// `κ_1..κ_{orders}` by differentiating the Fredholm determinant
/// `det(I + P(e^{tA} − I)P)` at `t = 0`: five-point differences at two
/// steps, combined by one Richardson step (error `O(h⁴)` for orders 1–2,
/// `O(h²)` for 3–4).
pub fn cumulant_mgf(a: &Matrix, n: usize, orders: usize) -> Result<Vec<CumulantReport>> {
    if orders == 0 || orders > MAX_MGF_ORDER {
        return Err(Error::Unsupported(format!("generating-function cumulants are implemented for orders 1..=4, got {orders}")));
    }
    if !a.is_square() || n == 0 || n > a.rows() {
        return Err(Error::invalid("mgf cumulants need a square matrix and 0 < n <= size"));
    }
    let norm = a.norm_one();
    if 2.0 * MGF_STEPS[0] * norm > 0.5 {
        return Err(Error::invalid(format!("|t|·||A|| exceeds 1/2 on the difference grid (||A||_1 = {norm})")));
    }
    let mean: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    let mut stencils = Vec::with_capacity(2);
    for h in MGF_STEPS {
        let mut f = [0.0; 5];
        for (i, slot) in f.iter_mut().enumerate() {
            let t = (i as f64 - 2.0) * h;
            *slot = if i == 2 { 0.0 } else { centered_log_mgf(a, n, t, mean)? };
        }
        stencils.push(f);
    }
    let mut out = Vec::with_capacity(orders);
    for m in 1..=orders {
        let coarse = central_difference(&stencils[0], MGF_STEPS[0], m);
        let fine = central_difference(&stencils[1], MGF_STEPS[1], m);
        let extrapolated = if m <= 2 { (16.0 * fine - coarse) / 15.0 } else { (4.0 * fine - coarse) / 3.0 };
        let value = if m == 1 { extrapolated + mean } else { extrapolated };
        out.push(CumulantReport {
            order: m,
            value,
            method: Method::Mgf,
            resolution: a.rows(),
            error_estimate: (extrapolated - fine).abs(),
            theory: None,
        });
    }
    Ok(out)
}

/// `k`-statistics from power sums of centered data.
fn kstats_from_sums(n: f64, s1: f64, s2: f64, s3: f64, s4: f64, order: usize) -> f64 {
    match order {
        1 => s1 / n,
        2 => (n * s2 - s1 * s1) / (n * (n - 1.0)),
        3 => (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0)),
        4 => {
            (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2
                - 4.0 * n * (n + 1.0) * s1 * s3
                + n * n * (n + 1.0) * s4)
                / (n * (n - 1.0) * (n - 2.0) * (n - 3.0))
        }
        _ => unreachable!("orders above four are rejected earlier"),
    }
}

/// Unbiased estimators `k_1..k_order` with jackknife standard errors.
pub fn kstatistics(values: &[f64], order: usize) -> Result<Vec<CumulantReport>> {
    if order == 0 || order > MAX_K_ORDER {
        return Err(Error::Unsupported(format!("k-statistics are implemented for orders 1..=4, got {order}")));
    }
    // Leave-one-out estimates of order m need m + 1 values.
    if values.len() < order + 1 || values.len() < 3 {
        return Err(Error::invalid(format!("need at least {} values for order {order}, got {}", (order + 1).max(3), values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k-statistics need finite values"));
    }
    let count = values.len();
    let n = count as f64;
    let mean = values.iter().sum::<f64>() / n;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let sums = |x: &[f64]| -> [f64; 4] {
        let mut s = [0.0; 4];
        for v in x {
            let v2 = v * v;
            s[0] += v;
            s[1] += v2;
            s[2] += v2 * v;
            s[3] += v2 * v2;
        }
        s
    };
    let s = sums(&centered);
    if order >= 3 && s[1] == 0.0 {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    let mut out = Vec::with_capacity(order);
    for k in 1..=order {
        let full = kstats_from_sums(n, s[0], s[1], s[2], s[3], k);
        let value = if k == 1 { full + mean } else { full };
        // Leave-one-out estimates from downdated power sums.
        let loo: Vec<f64> = centered
            .iter()
            .map(|v| {
                let v2 = v * v;
                kstats_from_sums(n - 1.0, s[0] - v, s[1] - v2, s[2] - v2 * v, s[3] - v2 * v2, k)
            })
            .collect();
        let loo_mean = loo.iter().sum::<f64>() / n;
        let var = (n - 1.0) / n * loo.iter().map(|x| (x - loo_mean).powi(2)).sum::<f64>();
        out.push(CumulantReport {
            order: k,
            value,
            method: Method::Mc,
            resolution: count,
            error_estimate: var.sqrt(),
            theory: None,
        });
    }
    Ok(out)
}

/// `X = Σ_i f(θ_i)` for every sample, then k-statistics.
pub fn mc_cumulants(samples: &[PointSample], statistic: &dyn Fn(f64) -> f64, orders: usize) -> Result<Vec<CumulantReport>> {
    let values: Vec<f64> = samples.iter().map(|s| s.angles.iter().map(|t| statistic(*t)).sum()).collect();
    kstatistics(&values, orders)
}

/// Lower bound on quadrature cells per chart.
const QUAD_BASE_CELLS: usize = 200;
const QUAD_TOL: f64 = 1e-7;
const QUAD_MAX_CELLS: usize = 1 << 20;

/// `Var Σf(θ_i) = ½∬|f(θ) − f(φ)|²|K_n(θ, φ)|² dμ dμ`, by a tensor rule
/// on the measure's charts (atoms included as nodes).
///
/// With the CD formula, `|K_n|² = 2(u_θu_φ − Re(q_θ conj q_φ))/|e^{iθ} − e^{iφ}|²`
/// where `u = |φ_n|²` and `q = φ_n*·conj(φ_n)`; the bracket vanishes on the
/// diagonal, where the difference quotient of `f` stays bounded, so
/// diagonal pairs contribute nothing. Cells start at the first
/// `200·2^k ≥ 2n` and double until the relative change is below 1e-7.
pub fn variance_quadrature(
    measure: &CircleMeasure,
    seq: &VerblunskySequence,
    n: usize,
    statistic: &(dyn Fn(f64) -> C64 + Sync),
) -> Result<CumulantReport> {
    let rec = Recurrence::new(seq, n)?;
    let mut cells = QUAD_BASE_CELLS;
    while cells < 2 * n {
        cells *= 2;
    }
    let mut previous = f64::NAN;
    while cells <= QUAD_MAX_CELLS {
        let value = variance_on_rule(measure, &rec, cells, statistic);
        if !value.is_finite() {
            return Err(Error::Degenerate("variance quadrature produced a non-finite value".into()));
        }
        if previous.is_finite() && (value - previous).abs() <= QUAD_TOL * value.abs().max(1e-300) {
            let nodes = cells * measure.charts().len() + measure.atoms().len();
            return Ok(CumulantReport {
                order: 2,
                value,
                method: Method::Quadrature,
                resolution: nodes,
                error_estimate: (value - previous).abs(),
                theory: None,
            });
        }
        if previous.is_finite() && value == 0.0 && previous == 0.0 {
            return Ok(CumulantReport {
                order: 2,
                value,
                method: Method::Quadrature,
                resolution: cells,
                error_estimate: 0.0,
                theory: None,
            });
        }
        previous = value;
        cells *= 2;
    }
    Err(Error::NoConvergence { previous, last: variance_on_rule(measure, &rec, cells / 2, statistic) })
}

fn variance_on_rule(
    measure: &CircleMeasure,
    rec: &Recurrence,
    cells: usize,
    statistic: &(dyn Fn(f64) -> C64 + Sync),
) -> f64 {
    let mut nodes: Vec<(f64, f64)> = measure.rule(cells);
    nodes.extend(measure.atoms().iter().map(|a| (a.angle, a.mass)));
    nodes.retain(|(_, w)| *w > 0.0);
    let m = nodes.len();
    // Structure of arrays for the pair loop.
    let mut w = Vec::with_capacity(m);
    let mut half_sin = Vec::with_capacity(m);
    let mut half_cos = Vec::with_capacity(m);
    let mut u = Vec::with_capacity(m);
    let (mut q_re, mut q_im) = (Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut f_re, mut f_im) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for &(theta, weight) in &nodes {
        let (p, ps) = rec.eval(C64::from_polar(1.0, theta));
        let q = ps * p.conj();
        let f = statistic(theta);
        w.push(weight);
        half_sin.push((0.5 * theta).sin());
        half_cos.push((0.5 * theta).cos());
        u.push(p.norm_sqr());
        q_re.push(q.re);
        q_im.push(q.im);
        f_re.push(f.re);
        f_im.push(f.im);
    }
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut acc = 0.0;
            for b in a + 1..m {
                // |e^{iθ_a} − e^{iθ_b}| = 2|sin((θ_a − θ_b)/2)|.
                let s = half_sin[a] * half_cos[b] - half_cos[a] * half_sin[b];
                let dz2 = 4.0 * s * s;
                if dz2 == 0.0 {
                    continue;
                }
                let dre = f_re[a] - f_re[b];
                let dim = f_im[a] - f_im[b];
                let bracket = u[a] * u[b] - (q_re[a] * q_re[b] + q_im[a] * q_im[b]);
                acc += w[b] * (dre * dre + dim * dim) / dz2 * bracket;
            }
            2.0 * w[a] * acc
        })
        .collect();
    rows.iter().sum()
}

/// Kolmogorov–Smirnov statistic of standardized data against `N(0, 1)`
/// and its asymptotic p-value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_normality(values: &[f64]) -> Result<KsResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("normality test needs at least two values"));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let mut d = 0.0f64;
    for (i, x) in z.iter().enumerate() {
        let cdf = 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
        d = d.max(cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf);
    }
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(KsResult { statistic: d, p_value: kolmogorov_tail(lambda) })
}

/// `Q(λ) = 2Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `(2/n^{2γ})·Σ_{k≥1} min(k, n)·r^{2k}`: variance of the Poisson statistic
/// for the uniform measure with real `ω = r` (`θ0 = 0`, real `η`).
pub fn cue_poisson_variance(n: usize, gamma: f64, r: f64) -> f64 {
    let s = crate::linstat::scale(n, gamma);
    let r2 = r * r;
    // Σ_{k≤n} k r^{2k} + n·Σ_{k>n} r^{2k}, both in closed form.
    let head = r2 * (1.0 - (n as f64 + 1.0) * r2.powi(n as i32) + n as f64 * r2.powi(n as i32 + 1)) / (1.0 - r2).powi(2);
    let tail = n as f64 * r2.powi(n as i32 + 1) / (1.0 - r2);
    2.0 / (s * s) * (head + tail)
}

/// `2π`-periodic angle in `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    // rem_euclid rounds tiny negative angles up to exactly 2π.
    let wrapped = theta.rem_euclid(2.0 * PI);
    if wrapped >= 2.0 * PI {
        0.0
    } else {
        wrapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_restricted_coefficient() {
        let a = Matrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), ONE, ONE, C64::new(0.0, 0.0)]);
        assert!((restricted_trace_coefficient(&a, 1, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((cumulant_trace(&a, 1, 2).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn composition_classes() {
        assert_eq!(compositions(4).len(), 8);
        assert_eq!(canonical_rotation(&[2, 1, 1]), vec![1, 1, 2]);
    }

    #[test]
    fn kstat_small_cases() {
        let v: Vec<f64> = (0..30).map(|i| (i % 3 + 1) as f64).collect();
        let k = kstatistics(&v, 2).unwrap();
        assert!((k[0].value - 2.0).abs() < 1e-14);
        assert!((k[1].value - 20.0 / 29.0).abs() < 1e-14);
        assert!((kstatistics(&[1.0, 2.0, 3.0], 2).unwrap()[1].value - 1.0).abs() < 1e-15);
        let c = kstatistics(&[5.0; 20], 2).unwrap();
        assert_eq!(c[1].value, 0.0);
        assert!(kstatistics(&[5.0; 40], 3).is_err());
    }

    #[test]
    fn cue_oracle_closed_form_matches_sum() {
        let (n, gamma, r) = (100usize, 0.5, 0.9f64);
        let s = 10.0f64;
        let direct: f64 = (1..20000).map(|k| (k.min(n) as f64) * r.powi(2 * k as i32)).sum::<f64>() * 2.0 / (s * s);
        assert!((cue_poisson_variance(n, gamma, r) - direct).abs() < 1e-12);
    }
}
