//! Mesoscopic linear statistics: the Möbius map between the line and the
//! circle, the rescaled Poisson kernel, rescaled line functions, the
//! weighted Lipschitz norm and the limiting variance functional.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub type LineFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type CircleFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Inputs closer than this to a pole are rejected.
const POLE_GUARD: f64 = 1e-300;

/// `M(z) = (i − z)/(i + z)`, the upper half plane onto the disk.
pub fn mobius(z: C64) -> Result<C64> {
    let d = I + z;
    if d.norm() <= POLE_GUARD {
        return Err(Error::invalid("mobius map has a pole at -i"));
    }
    Ok((I - z) / d)
}

/// `M^{-1}(w) = i(1 − w)/(1 + w)`; on the circle `M^{-1}(e^{iθ}) = tan(θ/2)`.
pub fn mobius_inv(w: C64) -> Result<C64> {
    let d = ONE + w;
    if d.norm() <= POLE_GUARD {
        return Err(Error::invalid("inverse mobius map has a pole at -1"));
    }
    Ok(I * (ONE - w) / d)
}

/// `ω_n = (1 − η/n^γ)·e^{iθ0}`.
pub fn omega_n(eta: C64, n: usize, gamma: f64, theta0: f64) -> C64 {
    (ONE - eta / scale(n, gamma)) * C64::from_polar(1.0, theta0)
}

/// `n^γ`.
pub fn scale(n: usize, gamma: f64) -> f64 {
    (n as f64).powf(gamma)
}

/// `η` as a constant or as a sequence `η_n`.
#[derive(Clone)]
pub enum Eta {
    Constant(C64),
    Sequence(Arc<dyn Fn(usize) -> C64 + Send + Sync>),
}

impl Eta {
    pub fn at(&self, n: usize) -> C64 {
        match self {
            Eta::Constant(e) => *e,
            Eta::Sequence(f) => f(n),
        }
    }
}

impl fmt::Debug for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Constant(e) => write!(f, "Eta({e})"),
            Eta::Sequence(_) => write!(f, "Eta(<sequence>)"),
        }
    }
}

#[derive(Clone)]
pub enum StatisticKind {
    Poisson(Eta),
    /// `g(x) = Σ_j c_j·Im 1/(x − p_j)` with every `Im p_j > 0`.
    RationalImag { poles: Vec<C64>, coeffs: Vec<f64> },
    Line(LineFn),
    /// A function of the angle; `g(x) = f(2·arctan x)`.
    Circle(CircleFn),
}

impl fmt::Debug for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticKind::Poisson(eta) => write!(f, "Poisson({eta:?})"),
            StatisticKind::RationalImag { poles, coeffs } => write!(f, "RationalImag({poles:?}, {coeffs:?})"),
            StatisticKind::Line(_) => write!(f, "Line(<fn>)"),
            StatisticKind::Circle(_) => write!(f, "Circle(<fn>)"),
        }
    }
}

/// A test function rescaled around `e^{iθ0}` at scale `n^{−γ}`.
#[derive(Clone, Debug)]
pub struct ScaledStatistic {
    pub kind: StatisticKind,
    pub gamma: f64,
    pub theta0: f64,
    pub n: usize,
}

/// Points at which line functions must already have decayed.
const VANISHING_PROBE: f64 = 1e6;
const VANISHING_TOL: f64 = 1e-5;

fn check_common(gamma: f64, theta0: f64, n: usize) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !theta0.is_finite() {
        return Err(Error::invalid("theta0 must be finite"));
    }
    if n == 0 {
        return Err(Error::invalid("ensemble size must be positive"));
    }
    Ok(())
}

fn check_vanishing(g: &dyn Fn(f64) -> f64) -> Result<()> {
    for x in [-VANISHING_PROBE, VANISHING_PROBE] {
        let v = g(x);
        if !(v.abs() <= VANISHING_TOL) {
            return Err(Error::invalid(format!("line function does not vanish at infinity: g({x}) = {v}")));
        }
    }
    Ok(())
}

/// `Σ_j c_j·Im 1/(x − p_j)`.
pub fn rational_imag(poles: &[C64], coeffs: &[f64], x: f64) -> f64 {
    poles.iter().zip(coeffs).map(|(p, c)| c * (1.0 / (x - p)).im).sum()
}

impl ScaledStatistic {
    pub fn poisson(eta: Eta, gamma: f64, theta0: f64, n: usize) -> Result<Self> {
        check_common(gamma, theta0, n)?;
        let e = eta.at(n);
        if !(e.re > 0.0) {
            return Err(Error::invalid(format!("Poisson statistic needs Re(eta) > 0, got {e}")));
        }
        let omega = omega_n(e, n, gamma, theta0);
        if !(omega.norm() < 1.0) {
            return Err(Error::invalid(format!(
                "omega_n = {omega} is not inside the disk; n = {n} is too small for eta = {e}"
            )));
        }
        Ok(ScaledStatistic { kind: StatisticKind::Poisson(eta), gamma, theta0, n })
    }

    pub fn rational_imag(poles: Vec<C64>, coeffs: Vec<f64>, gamma: f64, theta0: f64, n: usize) -> Result<Self> {
        check_common(gamma, theta0, n)?;
        if poles.len() != coeffs.len() || poles.is_empty() {
            return Err(Error::invalid("rational statistic needs one coefficient per pole"));
        }
        if poles.iter().any(|p| !(p.im > 0.0) || !p.re.is_finite()) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("rational statistic poles must lie in the upper half plane"));
        }
        Ok(ScaledStatistic { kind: StatisticKind::RationalImag { poles, coeffs }, gamma, theta0, n })
    }

    pub fn line(g: LineFn, gamma: f64, theta0: f64, n: usize) -> Result<Self> {
        check_common(gamma, theta0, n)?;
        check_vanishing(&*g)?;
        Ok(ScaledStatistic { kind: StatisticKind::Line(g), gamma, theta0, n })
    }

    pub fn circle(f: CircleFn, gamma: f64, theta0: f64, n: usize) -> Result<Self> {
        check_common(gamma, theta0, n)?;
        let g = circle_to_line(f.clone());
        check_vanishing(&*g)?;
        Ok(ScaledStatistic { kind: StatisticKind::Circle(f), gamma, theta0, n })
    }

    /// Same statistic at another ensemble size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        match &self.kind {
            StatisticKind::Poisson(eta) => Self::poisson(eta.clone(), self.gamma, self.theta0, n),
            _ => {
                check_common(self.gamma, self.theta0, n)?;
                Ok(ScaledStatistic { n, ..self.clone() })
            }
        }
    }

    pub fn scale(&self) -> f64 {
        scale(self.n, self.gamma)
    }

    /// `ω_n` for the Poisson kind.
    pub fn omega(&self) -> Option<C64> {
        match &self.kind {
            StatisticKind::Poisson(eta) => Some(omega_n(eta.at(self.n), self.n, self.gamma, self.theta0)),
            _ => None,
        }
    }

    /// The unscaled line function `g`, if the statistic has one.
    pub fn line_function(&self) -> Option<LineFn> {
        match &self.kind {
            StatisticKind::Poisson(_) => None,
            StatisticKind::RationalImag { poles, coeffs } => {
                let (poles, coeffs) = (poles.clone(), coeffs.clone());
                Some(Arc::new(move |x| rational_imag(&poles, &coeffs, x)))
            }
            StatisticKind::Line(g) => Some(g.clone()),
            StatisticKind::Circle(f) => Some(circle_to_line(f.clone())),
        }
    }

    /// Value at the point `e^{iθ}`.
    pub fn value(&self, theta: f64) -> f64 {
        match &self.kind {
            StatisticKind::Poisson(_) => poisson_statistic(self, theta),
            _ => rescaled_statistic(self, theta),
        }
    }
}

/// `g(x) = f(2·arctan x)`.
pub fn circle_to_line(f: CircleFn) -> LineFn {
    Arc::new(move |x: f64| f(2.0 * x.atan()))
}

/// `θ − θ0` reduced to `(−π, π]`.
fn centered(theta: f64, theta0: f64) -> f64 {
    let t = (theta - theta0).rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// `(1/n^γ)·Re((e^{i(θ−θ0)} + r)/(e^{i(θ−θ0)} − r))`, `r = 1 − η/n^γ`.
/// Zero for statistics of another kind.
pub fn poisson_statistic(stat: &ScaledStatistic, theta: f64) -> f64 {
    let StatisticKind::Poisson(eta) = &stat.kind else {
        return 0.0;
    };
    let s = stat.scale();
    let r = ONE - eta.at(stat.n) / s;
    let z = C64::from_polar(1.0, theta - stat.theta0);
    ((z + r) / (z - r)).re / s
}

/// `g(n^γ·tan((θ − θ0)/2))`, with `g(∞) = 0` at the antipode of `θ0`.
pub fn rescaled_statistic(stat: &ScaledStatistic, theta: f64) -> f64 {
    if let StatisticKind::Poisson(_) = stat.kind {
        return poisson_statistic(stat, theta);
    }
    let t = centered(theta, stat.theta0);
    if t.abs() >= PI {
        return 0.0;
    }
    let x = stat.scale() * (0.5 * t).tan();
    match &stat.kind {
        StatisticKind::RationalImag { poles, coeffs } => rational_imag(poles, coeffs, x),
        StatisticKind::Line(g) => g(x),
        StatisticKind::Circle(f) => f(2.0 * x.atan()),
        StatisticKind::Poisson(_) => unreachable!(),
    }
}

/// `ω_n = M(η̃/n^γ)` for a line pole `η̃` in the upper half plane.
pub fn omega_from_line_pole(eta_tilde: C64, n: usize, gamma: f64) -> Result<C64> {
    mobius(eta_tilde / scale(n, gamma))
}

/// Circle form of the rescaled `Im 1/(x − η̃)`:
/// `((1 + cos(θ−θ0))/(2n^γ))·Re((e^{iθ} + ω_n e^{iθ0})/(e^{iθ} − ω_n e^{iθ0}))`.
pub fn imaginary_pole_circle_form(eta_tilde: C64, n: usize, gamma: f64, theta0: f64, theta: f64) -> Result<f64> {
    let w = omega_from_line_pole(eta_tilde, n, gamma)? * C64::from_polar(1.0, theta0);
    let z = C64::from_polar(1.0, theta);
    Ok((1.0 + (theta - theta0).cos()) / (2.0 * scale(n, gamma)) * ((z + w) / (z - w)).re)
}

/// Nodes of the tangent grid on the first pass.
const LIPSCHITZ_NODES: usize = 4097;
const LIPSCHITZ_TOL: f64 = 1e-4;
const LIPSCHITZ_MAX_PASSES: usize = 4;

/// `sup_{x,y} sqrt(1+x²)·sqrt(1+y²)·|g(x) − g(y)|/|x − y|`, as a lower
/// bound from a grid `x = tan a` with `a` uniform on `[−π/2, π/2]` (the
/// endpoints standing for `x = ±∞`, where `g = 0`) plus the diagonal
/// limit `(1 + x²)|g'(x)|`. The grid is doubled until the estimate moves by
/// less than 1e-4 relative; an estimate that keeps moving is an error.
pub fn weighted_lipschitz_norm(g: &dyn Fn(f64) -> f64) -> Result<f64> {
    let mut nodes = LIPSCHITZ_NODES;
    let (mut before, mut previous) = (f64::NAN, f64::NAN);
    for _ in 0..LIPSCHITZ_MAX_PASSES {
        let value = lipschitz_on_grid(g, nodes);
        if !value.is_finite() {
            return Err(Error::invalid("function is not in the weighted Lipschitz class (non-finite norm)"));
        }
        if previous.is_finite() {
            if value > 2.0 * previous && previous > 0.0 {
                return Err(Error::invalid(format!(
                    "weighted Lipschitz norm diverges under refinement ({previous} -> {value})"
                )));
            }
            if (value - previous).abs() <= LIPSCHITZ_TOL * value.max(f64::MIN_POSITIVE) {
                return Ok(value);
            }
        }
        (before, previous) = (previous, value);
        nodes = 2 * nodes - 1;
    }
    // Still moving after the last pass: slow growth such as sqrt|x| in
    // (1 + x²)|g'(x)| ends here rather than by doubling.
    Err(Error::NoConvergence { previous: before, last: previous })
}

fn lipschitz_on_grid(g: &dyn Fn(f64) -> f64, nodes: usize) -> f64 {
    let h = PI / (nodes - 1) as f64;
    let interior = nodes - 2;
    // Interior nodes only; the two ends are x = ±∞ with g = 0.
    let mut x = Vec::with_capacity(interior);
    let mut w = Vec::with_capacity(interior);
    let mut gv = Vec::with_capacity(interior);
    for j in 1..=interior {
        let a = -0.5 * PI + j as f64 * h;
        let xj = a.tan();
        x.push(xj);
        w.push((1.0 + xj * xj).sqrt());
        gv.push(g(xj));
    }
    let mut best = 0.0f64;
    for i in 0..interior {
        // Pair with infinity: the quotient tends to sqrt(1+y²)|g(y)|.
        best = best.max(w[i] * gv[i].abs());
        for j in i + 1..interior {
            let q = w[i] * w[j] * (gv[i] - gv[j]).abs() / (x[j] - x[i]);
            best = best.max(q);
        }
        let step = 1e-6 * (1.0 + x[i].abs());
        let d = (g(x[i] + step) - g(x[i] - step)) / (2.0 * step);
        best = best.max((1.0 + x[i] * x[i]) * d.abs());
    }
    best
}

/// Default Gauss–Legendre order per axis.
pub const SIGMA_NODES: usize = 400;
const SIGMA_TOL: f64 = 1e-10;
const SIGMA_MAX_NODES: usize = 6400;

/// `σ² = (1/4π²)∬((g(x) − g(y))/(x − y))² dx dy`.
///
/// With `x = tan a`, `y = tan b` the integrand becomes
/// `((G(a) − G(b))/sin(a − b))²`, `G = g∘tan`, on `(−π/2, π/2)²`; it is
/// bounded whenever `g` is weighted-Lipschitz. Diagonal nodes use `G'(a)²`.
pub fn sigma_f_squared(g: &dyn Fn(f64) -> f64) -> Result<f64> {
    let mut nodes = SIGMA_NODES;
    let mut previous = f64::NAN;
    while nodes <= SIGMA_MAX_NODES {
        let value = sigma_with_nodes(g, nodes);
        if !value.is_finite() {
            return Err(Error::invalid("variance integrand is not finite"));
        }
        if previous.is_finite() && (value - previous).abs() <= SIGMA_TOL * value.abs().max(1.0) {
            return Ok(value);
        }
        previous = value;
        nodes *= 2;
    }
    Err(Error::NoConvergence { previous, last: sigma_with_nodes(g, nodes / 2) })
}

fn sigma_with_nodes(g: &dyn Fn(f64) -> f64, nodes: usize) -> f64 {
    let (t, w) = gauss_legendre(nodes);
    let a: Vec<f64> = t.iter().map(|t| 0.5 * PI * t).collect();
    let w: Vec<f64> = w.iter().map(|w| 0.5 * PI * w).collect();
    let big_g: Vec<f64> = a.iter().map(|a| g(a.tan())).collect();
    let mut total = 0.0;
    for i in 0..nodes {
        let mut row = 0.0;
        for j in 0..nodes {
            let q = if i == j {
                let h = 1e-6;
                (g((a[i] + h).tan()) - g((a[i] - h).tan())) / (2.0 * h)
            } else {
                (big_g[i] - big_g[j]) / (a[i] - a[j]).sin()
            };
            row += w[j] * q * q;
        }
        total += w[i] * row;
    }
    total / (4.0 * PI * PI)
}

/// `2/(η + η̄)²`, the limiting variance of the Poisson statistic.
pub fn poisson_limit_variance(eta: C64) -> f64 {
    2.0 / (2.0 * eta.re).powi(2)
}
