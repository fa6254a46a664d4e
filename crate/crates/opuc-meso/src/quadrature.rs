//! Quadrature building blocks: Gauss–Legendre rules and the charts that
//! map a unit parameter interval onto an arc of the circle.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A smooth bijection from `s ∈ (0, 1)` onto an open arc `(start, end)`.
///
/// The midpoint rule in `s` is spectrally accurate for the integrands each
/// chart is paired with: periodic for full circles, square-root edges for
/// `Cosine`, algebraic endpoint singularities for `DoubleExponential`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Chart {
    Periodic { start: f64 },
    Cosine { start: f64, end: f64 },
    DoubleExponential { start: f64, end: f64 },
}

/// Parameter half-width of the double-exponential chart. The outermost
/// nodes sit about 1e-37 from the ends, so even an `x^{-1/2}` endpoint
/// singularity loses less than 1e-18 to the cut-off tails.
const DE_HALF_WIDTH: f64 = 4.0;

/// A chart node: `θ = anchor + offset`, where `anchor` is an end of the
/// chart. Near an end `θ` itself rounds, the offset does not.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub theta: f64,
    pub jacobian: f64,
    pub anchor: f64,
    pub offset: f64,
}

impl Chart {
    pub fn start(&self) -> f64 {
        match *self {
            Chart::Periodic { start } => start,
            Chart::Cosine { start, .. } | Chart::DoubleExponential { start, .. } => start,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            Chart::Periodic { start } => start + 2.0 * PI,
            Chart::Cosine { end, .. } | Chart::DoubleExponential { end, .. } => end,
        }
    }

    /// Angle and `dθ/ds` at parameter `s`.
    pub fn map(&self, s: f64) -> (f64, f64) {
        let node = self.node(s);
        (node.theta, node.jacobian)
    }

    /// The node at parameter `s`, with its offset from the nearer end kept
    /// to full relative precision.
    pub fn node(&self, s: f64) -> Node {
        match *self {
            Chart::Periodic { start } => {
                let (anchor, offset) = if s <= 0.5 { (start, 2.0 * PI * s) } else { (start + 2.0 * PI, 2.0 * PI * (s - 1.0)) };
                Node { theta: anchor + offset, jacobian: 2.0 * PI, anchor, offset }
            }
            Chart::Cosine { start, end } => {
                let half = 0.5 * (end - start);
                let t = PI * s;
                // half·(1 ∓ cos t) written as squares of half-angle sines.
                let (anchor, offset) = if s <= 0.5 {
                    (start, 2.0 * half * (0.5 * t).sin().powi(2))
                } else {
                    (end, -2.0 * half * (0.5 * t).cos().powi(2))
                };
                Node { theta: anchor + offset, jacobian: half * PI * t.sin(), anchor, offset }
            }
            Chart::DoubleExponential { start, end } => {
                let t = DE_HALF_WIDTH * (2.0 * s - 1.0);
                let u = 0.5 * PI * t.sinh();
                let du = 0.5 * PI * t.cosh() * 2.0 * DE_HALF_WIDTH;
                let len = end - start;
                let e = (-2.0 * u.abs()).exp();
                let near = len * e / (1.0 + e);
                let (anchor, offset) = if u < 0.0 { (start, near) } else { (end, -near) };
                let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
                Node { theta: anchor + offset, jacobian: 0.5 * len * sech2 * du, anchor, offset }
            }
        }
    }

    /// Midpoint nodes `(θ_j, dθ/ds(s_j) / L)` for `L` cells.
    pub fn midpoint_rule(&self, cells: usize) -> Vec<(f64, f64)> {
        self.midpoint_nodes(cells).into_iter().map(|(node, d)| (node.theta, d)).collect()
    }

    /// Midpoint nodes with their cell weights `dθ/ds · h`.
    pub fn midpoint_nodes(&self, cells: usize) -> Vec<(Node, f64)> {
        let h = 1.0 / cells as f64;
        (0..cells)
            .map(|j| {
                let node = self.node((j as f64 + 0.5) * h);
                (node, node.jacobian * h)
            })
            .collect()
    }
}
