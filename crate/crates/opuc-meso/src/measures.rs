//! Verblunsky coefficient sequences, the catalog of circle measures, and
//! the moment/Levinson machinery connecting the two.
//!
//! Conventions: moments are `c_k = ∫ e^{-ikθ} dμ`, the inner product is
//! `⟨f, g⟩ = ∫ f·conj(g) dμ`, and the monic recursion reads
//! `Φ_{n+1} = zΦ_n − conj(α_n)Φ_n*`.

use crate::error::{Error, Result};
use crate::quadrature::{Chart, Node};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

const TWO_PI: f64 = 2.0 * PI;

/// Catalog tag and parameters of a coefficient sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceKind {
    Cue,
    Geronimus { alpha: f64 },
    BernsteinSzego { r: f64 },
    SingleMoment,
    InsertedMassPoint { mass: f64, angle: f64 },
    HuaPickrell { delta: f64 },
    Perturbed { base: Box<VerblunskySequence>, c: C64, beta: f64 },
    ExplicitList(Vec<C64>),
}

/// Lazily evaluated `α_0, α_1, …`. Kinds without a closed form keep a
/// shared, monotonically growing cache, so clones stay cheap and every
/// evaluation of a given index returns the same value.
#[derive(Clone)]
pub struct VerblunskySequence {
    kind: SequenceKind,
    cache: Arc<Mutex<Vec<C64>>>,
}

impl PartialEq for VerblunskySequence {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Debug for VerblunskySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VerblunskySequence({})", self.id())
    }
}

/// Index range probed when validating perturbed sequences.
const PERTURBED_PROBE: usize = 1000;

impl VerblunskySequence {
    fn new(kind: SequenceKind) -> Self {
        VerblunskySequence { kind, cache: Arc::new(Mutex::new(Vec::new())) }
    }

    pub fn cue() -> Self {
        Self::new(SequenceKind::Cue)
    }

    pub fn geronimus(alpha: f64) -> Result<Self> {
        if !(alpha.abs() < 1.0) {
            return Err(Error::OutOfDisk { index: 0, modulus: alpha.abs() });
        }
        Ok(Self::new(SequenceKind::Geronimus { alpha }))
    }

    pub fn bernstein_szego(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::invalid(format!("Bernstein-Szego parameter must lie in [0, 1), got {r}")));
        }
        Ok(Self::new(SequenceKind::BernsteinSzego { r }))
    }

    pub fn single_moment() -> Self {
        Self::new(SequenceKind::SingleMoment)
    }

    pub fn inserted_mass_point(mass: f64, angle: f64) -> Result<Self> {
        if !(mass > 0.0 && mass < 1.0) || !angle.is_finite() {
            return Err(Error::invalid(format!("inserted mass must lie in (0, 1), got {mass}")));
        }
        Ok(Self::new(SequenceKind::InsertedMassPoint { mass, angle: angle.rem_euclid(TWO_PI) }))
    }

    pub fn hua_pickrell(delta: f64) -> Result<Self> {
        if !(delta > -0.5) || !delta.is_finite() {
            return Err(Error::invalid(format!("Hua-Pickrell parameter must exceed -1/2, got {delta}")));
        }
        Ok(Self::new(SequenceKind::HuaPickrell { delta }))
    }

    /// `α_k = base_k + c·(k+1)^{-β}`, checked on the first thousand indices.
    pub fn perturbed(base: VerblunskySequence, c: C64, beta: f64) -> Result<Self> {
        if !beta.is_finite() || !c.is_finite() {
            return Err(Error::invalid("perturbation parameters must be finite"));
        }
        let seq = Self::new(SequenceKind::Perturbed { base: Box::new(base), c, beta });
        seq.alphas(PERTURBED_PROBE)?;
        Ok(seq)
    }

    /// Finite list; coefficients past its end are zero. Entries are checked
    /// on evaluation, not here.
    pub fn explicit(alphas: Vec<C64>) -> Self {
        Self::new(SequenceKind::ExplicitList(alphas))
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// Stable human-readable identifier.
    pub fn id(&self) -> String {
        match &self.kind {
            SequenceKind::Cue => "cue".into(),
            SequenceKind::Geronimus { alpha } => format!("geronimus(alpha={alpha})"),
            SequenceKind::BernsteinSzego { r } => format!("bernstein-szego(r={r})"),
            SequenceKind::SingleMoment => "single-moment".into(),
            SequenceKind::InsertedMassPoint { mass, angle } => {
                format!("inserted-mass-point(mass={mass},angle={angle})")
            }
            SequenceKind::HuaPickrell { delta } => format!("hua-pickrell(delta={delta})"),
            SequenceKind::Perturbed { base, c, beta } => {
                format!("perturbed({},c={}{:+}i,beta={beta})", base.id(), c.re, c.im)
            }
            SequenceKind::ExplicitList(v) => format!("explicit-list(len={})", v.len()),
        }
    }

    /// True when every coefficient is real (conjugation-invariant measure).
    pub fn is_real(&self) -> bool {
        match &self.kind {
            SequenceKind::InsertedMassPoint { angle, .. } => *angle == 0.0 || *angle == PI,
            SequenceKind::Perturbed { base, c, .. } => base.is_real() && c.im == 0.0,
            SequenceKind::ExplicitList(v) => v.iter().all(|a| a.im == 0.0),
            _ => true,
        }
    }

    fn raw_alpha(&self, k: usize) -> Result<C64> {
        Ok(match &self.kind {
            SequenceKind::Cue => C64::new(0.0, 0.0),
            SequenceKind::Geronimus { alpha } => C64::new(*alpha, 0.0),
            SequenceKind::BernsteinSzego { r } => C64::new(if k == 0 { *r } else { 0.0 }, 0.0),
            SequenceKind::SingleMoment => C64::new(-1.0 / (k as f64 + 2.0), 0.0),
            SequenceKind::InsertedMassPoint { .. } | SequenceKind::HuaPickrell { .. } => self.cached(k)?,
            SequenceKind::Perturbed { base, c, beta } => base.alpha(k)? + c * (k as f64 + 1.0).powf(-beta),
            SequenceKind::ExplicitList(v) => v.get(k).copied().unwrap_or(C64::new(0.0, 0.0)),
        })
    }

    fn cached(&self, k: usize) -> Result<C64> {
        let mut cache = self.cache.lock().expect("coefficient cache poisoned");
        if k >= cache.len() {
            let len = (k + 1).max(2 * cache.len()).max(64);
            *cache = match &self.kind {
                SequenceKind::InsertedMassPoint { mass, angle } => {
                    let moments: Vec<C64> = (0..=len)
                        .map(|j| {
                            let atom = C64::from_polar(*mass, -(j as f64) * angle);
                            if j == 0 {
                                atom + (1.0 - mass)
                            } else {
                                atom
                            }
                        })
                        .collect();
                    levinson(&moments, len)?
                }
                SequenceKind::HuaPickrell { delta } => {
                    hua_pickrell_alphas(*delta, len)?.into_iter().map(|a| C64::new(a, 0.0)).collect()
                }
                _ => unreachable!("only computed kinds are cached"),
            };
        }
        Ok(cache[k])
    }

    /// `α_k`; fails if the value is not strictly inside the unit disk.
    pub fn alpha(&self, k: usize) -> Result<C64> {
        let a = self.raw_alpha(k)?;
        let modulus = a.norm();
        if !(modulus < 1.0) {
            return Err(Error::OutOfDisk { index: k, modulus });
        }
        Ok(a)
    }

    /// `ρ_k = sqrt(1 − |α_k|²)`.
    pub fn rho(&self, k: usize) -> Result<f64> {
        let a = self.alpha(k)?;
        Ok((1.0 - a.norm_sqr()).sqrt())
    }

    /// `α_0..α_{n-1}`.
    pub fn alphas(&self, n: usize) -> Result<Vec<C64>> {
        if n > 0 {
            self.alpha(n - 1)?;
        }
        (0..n).map(|k| self.alpha(k)).collect()
    }
}

/// `α_k` of `seq`.
pub fn alpha_at(seq: &VerblunskySequence, k: usize) -> Result<C64> {
    seq.alpha(k)
}

/// `ρ_k` of `seq`.
pub fn rho_at(seq: &VerblunskySequence, k: usize) -> Result<f64> {
    seq.rho(k)
}

/// A point mass of a circle measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Clone)]
enum Density {
    Uniform,
    Geronimus { alpha: f64 },
    BernsteinSzego { r: f64 },
    SingleMoment,
    HuaPickrell { delta: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Density {
    /// Unnormalized weight against `dθ/2π`.
    fn raw(&self, theta: f64) -> f64 {
        self.raw_at(&Node { theta, jacobian: 1.0, anchor: theta, offset: 0.0 })
    }

    /// Weight at a chart node; the singular point θ = 0 of the Hua-Pickrell
    /// weight is resolved through the node offset when it is the anchor.
    fn raw_at(&self, node: &Node) -> f64 {
        let theta = node.theta;
        let gap_to_zero = if node.anchor.rem_euclid(TWO_PI) == 0.0 { node.offset } else { theta };
        match self {
            Density::Uniform => 1.0,
            Density::Geronimus { alpha } => {
                let s = (0.5 * theta).sin().abs();
                let gap = (s * s - alpha * alpha).max(0.0);
                if s == 0.0 {
                    0.0
                } else {
                    gap.sqrt() / ((1.0 + alpha).abs() * s)
                }
            }
            Density::BernsteinSzego { r } => (1.0 - r * r) / (1.0 - 2.0 * r * theta.cos() + r * r),
            Density::SingleMoment => 1.0 - theta.cos(),
            Density::HuaPickrell { delta } => {
                let s = 2.0 * (0.5 * gap_to_zero).sin().abs();
                if s == 0.0 {
                    if *delta > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    s.powf(2.0 * delta)
                }
            }
            Density::Custom(f) => f(theta),
        }
    }
}

/// Probability measure on the circle: an absolutely continuous part
/// `w(θ) dθ/2π` carried by open arcs, plus atoms.
#[derive(Clone)]
pub struct CircleMeasure {
    id: String,
    density: Density,
    charts: Vec<Chart>,
    atoms: Vec<Atom>,
    normalization: f64,
}

impl fmt::Debug for CircleMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleMeasure")
            .field("id", &self.id)
            .field("support", &self.support())
            .field("atoms", &self.atoms)
            .field("normalization", &self.normalization)
            .finish()
    }
}

/// Cells per chart at refinement level 0.
const BASE_CELLS: usize = 64;
const MAX_LEVEL: u32 = 14;

impl CircleMeasure {
    /// Builds the measure and normalizes its continuous part so that the
    /// total mass is one. With `expect_unit_mass`, a closed-form density
    /// must already integrate to one; anything else is an error.
    fn build(
        id: String,
        density: Density,
        charts: Vec<Chart>,
        atoms: Vec<Atom>,
        expect_unit_mass: bool,
    ) -> Result<Self> {
        let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();
        if atoms.iter().any(|a| !(a.mass > 0.0) || !a.angle.is_finite()) || atom_mass > 1.0 {
            return Err(Error::invalid("atoms need positive masses summing to at most one"));
        }
        let mut measure = CircleMeasure { id, density, charts, atoms, normalization: 1.0 };
        let raw = if measure.charts.is_empty() { 0.0 } else { measure.converged_ac_mass()? };
        if !(raw.is_finite()) || raw < 0.0 {
            return Err(Error::invalid(format!("density of {} is not normalizable", measure.id)));
        }
        if expect_unit_mass {
            if (raw + atom_mass - 1.0).abs() > 1e-10 {
                return Err(Error::Degenerate(format!(
                    "{} has total mass {} instead of one",
                    measure.id,
                    raw + atom_mass
                )));
            }
        } else if raw > 0.0 {
            measure.normalization = (1.0 - atom_mass) / raw;
        } else if (atom_mass - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("{} carries no mass on its support", measure.id)));
        }
        Ok(measure)
    }

    fn converged_ac_mass(&self) -> Result<f64> {
        // Summation rounding over up to 2^20 cells sits near 1e-14.
        let (mut previous, mut last) = (f64::NAN, f64::NAN);
        for level in 0..=MAX_LEVEL {
            let mass: f64 = self.rule(BASE_CELLS << level).iter().map(|(_, w)| w).sum();
            if !mass.is_finite() {
                return Err(Error::invalid(format!("density of {} is not integrable", self.id)));
            }
            if level >= 2 && (mass - last).abs() <= 1e-13 * mass.abs().max(1e-300) {
                return Ok(mass);
            }
            (previous, last) = (last, mass);
        }
        Err(Error::NoConvergence { previous, last })
    }

    pub fn cue() -> Self {
        Self::build("cue".into(), Density::Uniform, vec![Chart::Periodic { start: 0.0 }], vec![], true)
            .expect("uniform measure has unit mass")
    }

    /// Constant-coefficient measure: square-root density on
    /// `(I, 2π − I)`, `I = 2·arcsin|α|`, plus a point mass `2α/(1+α)` at
    /// `θ = 0` when `α > 0`.
    pub fn geronimus(alpha: f64) -> Result<Self> {
        if !(alpha.abs() < 1.0) {
            return Err(Error::OutOfDisk { index: 0, modulus: alpha.abs() });
        }
        if alpha == 0.0 {
            return Ok(Self::cue());
        }
        let gap = geronimus_gap(alpha);
        let atoms = if alpha > 0.0 { vec![Atom { angle: 0.0, mass: 2.0 * alpha / (1.0 + alpha) }] } else { vec![] };
        Self::build(
            format!("geronimus(alpha={alpha})"),
            Density::Geronimus { alpha },
            vec![Chart::Cosine { start: gap, end: TWO_PI - gap }],
            atoms,
            true,
        )
    }

    /// Degree-one Bernstein–Szegő weight `(1 − r²)/|1 − r e^{iθ}|²`.
    pub fn bernstein_szego(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::invalid(format!("Bernstein-Szego parameter must lie in [0, 1), got {r}")));
        }
        Self::build(
            format!("bernstein-szego(r={r})"),
            Density::BernsteinSzego { r },
            vec![Chart::Periodic { start: 0.0 }],
            vec![],
            true,
        )
    }

    /// Weight `1 − cos θ`.
    pub fn single_moment() -> Self {
        Self::build(
            "single-moment".into(),
            Density::SingleMoment,
            vec![Chart::Periodic { start: 0.0 }],
            vec![],
            true,
        )
        .expect("single-moment weight has unit mass")
    }

    /// `(1 − h)·dθ/2π + h·δ_{θ0}`.
    pub fn inserted_mass_point(mass: f64, angle: f64) -> Result<Self> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(Error::invalid(format!("inserted mass must lie in (0, 1), got {mass}")));
        }
        let angle = angle.rem_euclid(TWO_PI);
        Self::build(
            format!("inserted-mass-point(mass={mass},angle={angle})"),
            Density::Uniform,
            vec![Chart::Periodic { start: 0.0 }],
            vec![Atom { angle, mass }],
            false,
        )
    }

    /// Weight `(2 − 2cos θ)^δ`, normalized numerically.
    pub fn hua_pickrell(delta: f64) -> Result<Self> {
        if !(delta > -0.5) || !delta.is_finite() {
            return Err(Error::invalid(format!("Hua-Pickrell parameter must exceed -1/2, got {delta}")));
        }
        Self::build(
            format!("hua-pickrell(delta={delta})"),
            Density::HuaPickrell { delta },
            vec![Chart::DoubleExponential { start: 0.0, end: TWO_PI }],
            vec![],
            false,
        )
    }

    /// User-supplied weight on the given open arcs (angles in `[0, 2π]`,
    /// `start < end`), normalized numerically together with `atoms`.
    pub fn from_density(
        id: impl Into<String>,
        weight: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        arcs: &[(f64, f64)],
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        let mut charts = Vec::with_capacity(arcs.len());
        for &(start, end) in arcs {
            if !(0.0 <= start && start < end && end <= TWO_PI) {
                return Err(Error::invalid(format!("arc ({start}, {end}) is not inside [0, 2pi]")));
            }
            charts.push(Chart::DoubleExponential { start, end });
        }
        let atoms = atoms.into_iter().map(|a| Atom { angle: a.angle.rem_euclid(TWO_PI), mass: a.mass }).collect();
        Self::build(id.into(), Density::Custom(weight), charts, atoms, false)
    }

    /// The catalog measure whose coefficients are `seq`.
    pub fn for_sequence(seq: &VerblunskySequence) -> Result<Self> {
        match seq.kind() {
            SequenceKind::Cue => Ok(Self::cue()),
            SequenceKind::Geronimus { alpha } => Self::geronimus(*alpha),
            SequenceKind::BernsteinSzego { r } => Self::bernstein_szego(*r),
            SequenceKind::SingleMoment => Ok(Self::single_moment()),
            SequenceKind::InsertedMassPoint { mass, angle } => Self::inserted_mass_point(*mass, *angle),
            SequenceKind::HuaPickrell { delta } => Self::hua_pickrell(*delta),
            SequenceKind::Perturbed { .. } | SequenceKind::ExplicitList(_) => Err(Error::Unsupported(format!(
                "{} is defined by its coefficients only and has no density",
                seq.id()
            ))),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Open support arcs of the continuous part.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.charts.iter().map(|c| (c.start(), c.end())).collect()
    }

    pub fn in_support(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TWO_PI);
        self.charts.iter().any(|c| match c {
            Chart::Periodic { .. } => true,
            _ => c.start() < t && t < c.end(),
        })
    }

    /// Normalized weight against `dθ/2π`; zero off the support.
    pub fn weight(&self, theta: f64) -> f64 {
        if self.in_support(theta) {
            self.normalization * self.density.raw(theta.rem_euclid(TWO_PI))
        } else {
            0.0
        }
    }

    /// Weight at a node produced by one of this measure's charts, which is
    /// inside the support by construction.
    pub(crate) fn weight_on_chart(&self, node: &Node) -> f64 {
        self.normalization * self.density.raw_at(node)
    }

    /// Midpoint rule with `cells` cells per chart for the continuous part:
    /// `(θ_j, weight_j)` with `Σ weight_j g(θ_j) ≈ ∫ g w dθ/2π`.
    pub fn rule(&self, cells: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(cells * self.charts.len());
        for chart in &self.charts {
            for (node, d) in chart.midpoint_nodes(cells) {
                out.push((node.theta, self.weight_on_chart(&node) * d / TWO_PI));
            }
        }
        out
    }

    pub fn ac_mass(&self) -> f64 {
        if self.charts.is_empty() {
            return 0.0;
        }
        self.converged_ac_mass().unwrap_or(f64::NAN)
    }

    pub fn total_mass(&self) -> f64 {
        self.ac_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// `∫ f dμ`, refining until two successive levels agree to `tol`.
    pub fn integrate(&self, f: impl Fn(f64) -> C64, tol: f64) -> Result<C64> {
        let atoms: C64 = self.atoms.iter().map(|a| f(a.angle) * a.mass).sum();
        if self.charts.is_empty() {
            return Ok(atoms);
        }
        let (mut previous, mut last) = (C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0));
        for level in 0..=MAX_LEVEL + 2 {
            let value: C64 = self.rule(BASE_CELLS << level).iter().map(|(t, w)| f(*t) * w).sum();
            if level >= 2 && (value - last).norm() <= tol * value.norm().max(1.0) {
                return Ok(value + atoms);
            }
            (previous, last) = (last, value);
        }
        Err(Error::NoConvergence { previous: previous.re, last: last.re })
    }
}

/// `I_α = 2·arcsin|α|`, the half-width of the gap around `θ = 0`.
pub fn geronimus_gap(alpha: f64) -> f64 {
    2.0 * alpha.abs().asin()
}

/// `c_0..c_K` with `c_k = ∫ e^{-ikθ} dμ`, refined until successive levels
/// agree to 1e-13.
pub fn trig_moments(measure: &CircleMeasure, count: usize) -> Result<Vec<C64>> {
    let mut atoms = vec![C64::new(0.0, 0.0); count + 1];
    for a in measure.atoms() {
        let step = C64::from_polar(1.0, -a.angle);
        let mut z = C64::new(a.mass, 0.0);
        for c in atoms.iter_mut() {
            *c += z;
            z *= step;
        }
    }
    if measure.charts().is_empty() {
        return Ok(atoms);
    }
    let min_cells = 4 * (count + 1);
    let mut previous: Option<Vec<C64>> = None;
    let mut before = f64::NAN;
    for level in 0..=MAX_LEVEL + 4 {
        let cells = BASE_CELLS << level;
        let mut acc = vec![C64::new(0.0, 0.0); count + 1];
        for (theta, w) in measure.rule(cells) {
            if w == 0.0 {
                continue;
            }
            let step = C64::from_polar(1.0, -theta);
            let mut z = C64::new(w, 0.0);
            for (k, c) in acc.iter_mut().enumerate() {
                *c += z;
                z *= step;
                // Re-anchor the power to keep rounding from accumulating.
                if k % 64 == 63 {
                    z = C64::from_polar(w, -((k + 1) as f64) * theta);
                }
            }
        }
        if acc.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("density of {} is not normalizable", measure.id())));
        }
        if let Some(prev) = &previous {
            let change = acc.iter().zip(prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if cells >= min_cells && change <= 1e-13 {
                return Ok(acc.iter().zip(&atoms).map(|(a, b)| a + b).collect());
            }
        }
        before = previous.as_ref().map_or(f64::NAN, |p| p[0].re);
        previous = Some(acc);
    }
    Err(Error::NoConvergence { previous: before, last: previous.map_or(f64::NAN, |p| p[0].re) })
}

/// Verblunsky coefficients `α_0..α_{K-1}` from moments `c_0..c_K`
/// (Levinson/Szegő recursion on the Toeplitz moment matrix).
pub fn levinson(moments: &[C64], count: usize) -> Result<Vec<C64>> {
    if moments.len() < count + 1 {
        return Err(Error::invalid(format!("need {} moments, got {}", count + 1, moments.len())));
    }
    let c0 = moments[0].re;
    if !(c0 > 0.0) || moments[0].im.abs() > 1e-12 * c0 {
        return Err(Error::NotPositiveDefinite { order: 1 });
    }
    // Monic coefficients of Φ_n, lowest degree first.
    let mut phi = vec![C64::new(1.0, 0.0)];
    let mut energy = c0;
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        // ⟨zΦ_n, 1⟩ = Σ_j φ_j conj(c_{j+1});  ⟨Φ_n*, 1⟩ = ‖Φ_n‖².
        let inner: C64 = phi.iter().enumerate().map(|(j, p)| p * moments[j + 1].conj()).sum();
        let alpha = (inner / energy).conj();
        let next_energy = energy * (1.0 - alpha.norm_sqr());
        if !(alpha.norm() < 1.0) || !(next_energy > 1e-15 * c0) {
            return Err(Error::NotPositiveDefinite { order: n + 1 });
        }
        // Φ_{n+1} = zΦ_n − conj(α)Φ_n*,  Φ_n*[j] = conj(Φ_n[n−j]).
        let mut next = vec![C64::new(0.0, 0.0); n + 2];
        for j in 0..=n {
            next[j + 1] += phi[j];
            next[j] -= alpha.conj() * phi[n - j].conj();
        }
        phi = next;
        energy = next_energy;
        out.push(alpha);
    }
    Ok(out)
}

/// Recurrence coefficients of the weight `(2−x)^{δ−1/2}(2+x)^{−1/2}` on
/// `[−2, 2]`: `(a_k, b_k)` for `k ≥ 1` in the monic three-term form
/// `x p_k = p_{k+1} + b_{k+1} p_k + a_k² p_{k−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiCoefficients {
    pub delta: f64,
    pub a: f64,
    pub b: f64,
}

/// Jacobi parameters on `[−1, 1]`: `(δ − 1/2, −1/2)`.
fn jacobi_params(delta: f64) -> (f64, f64) {
    (delta - 0.5, -0.5)
}

/// Monic recurrence coefficient `β_k` on `[−1, 1]`.
fn jacobi_beta(p: f64, q: f64, k: usize) -> f64 {
    if k == 0 {
        (q - p) / (p + q + 2.0)
    } else {
        let s = 2.0 * k as f64 + p + q;
        (q * q - p * p) / (s * (s + 2.0))
    }
}

/// Monic recurrence coefficient `γ_k` on `[−1, 1]`, `k ≥ 1`. The first
/// one has its own closed form because the general expression is 0/0 when
/// `p + q = −1`.
fn jacobi_gamma(p: f64, q: f64, k: usize) -> f64 {
    if k == 1 {
        4.0 * (p + 1.0) * (q + 1.0) / ((p + q + 2.0).powi(2) * (p + q + 3.0))
    } else {
        let k = k as f64;
        let s = 2.0 * k + p + q;
        4.0 * k * (k + p) * (k + q) * (k + p + q) / (s * s * (s + 1.0) * (s - 1.0))
    }
}

pub fn jacobi_coefficients(delta: f64, k: usize) -> Result<JacobiCoefficients> {
    if !(delta > -0.5) {
        return Err(Error::invalid(format!("Jacobi parameter delta must exceed -1/2, got {delta}")));
    }
    if k == 0 {
        return Err(Error::invalid("Jacobi coefficients are indexed from 1"));
    }
    let (p, q) = jacobi_params(delta);
    Ok(JacobiCoefficients {
        delta,
        a: 2.0 * jacobi_gamma(p, q, k).sqrt(),
        b: 2.0 * jacobi_beta(p, q, k - 1),
    })
}

/// Coefficients of the Hua–Pickrell weight through the Szegő map:
/// `u_k^± = 2 ± b_{k+1} − a_k²/u_{k−1}^±` with `a_0²/u_{−1} = 0`, then
/// `α_{2k} = (u_k^+ − u_k^−)/(u_k^+ + u_k^−)` and
/// `α_{2k−1} = 1 − (u_k^+ + u_k^−)/2`.
pub fn hua_pickrell_alphas(delta: f64, count: usize) -> Result<Vec<f64>> {
    if !(delta > -0.5) || !delta.is_finite() {
        return Err(Error::invalid(format!("Hua-Pickrell parameter must exceed -1/2, got {delta}")));
    }
    let (p, q) = jacobi_params(delta);
    let mut out = Vec::with_capacity(count);
    let (mut up, mut um) = (f64::INFINITY, f64::INFINITY);
    let mut k = 0usize;
    while out.len() < count {
        let b = 2.0 * jacobi_beta(p, q, k);
        let a2 = if k == 0 { 0.0 } else { 4.0 * jacobi_gamma(p, q, k) };
        let next_up = 2.0 + b - a2 / up;
        let next_um = 2.0 - b - a2 / um;
        if !(next_up > 0.0 && next_um > 0.0) {
            return Err(Error::Degenerate(format!("Szego-map recursion lost positivity at step {k}")));
        }
        up = next_up;
        um = next_um;
        if k >= 1 {
            out.push(1.0 - 0.5 * (up + um));
            if out.len() == count {
                break;
            }
        }
        out.push((up - um) / (up + um));
        k += 1;
    }
    out.truncate(count);
    if let Some((i, a)) = out.iter().enumerate().find(|(_, a)| !(a.abs() < 1.0)) {
        return Err(Error::OutOfDisk { index: i, modulus: a.abs() });
    }
    Ok(out)
}
