//! Weighted Lebesgue and weighted variable Lebesgue spaces, their norm
//! oracles, and the lattice algebra acting on them.
//!
//! A [`SpaceSpec`] is symbolic: the reciprocal exponent is an affine
//! expression `c + Σ a_k u_k(x)` in stored fields `u_k = 1/p_k(x)` and the
//! weight is a monomial `Π v_k(x)^{q_k}` in stored weights, all coefficients
//! exact rationals. Associate spaces, concavification, rescaling and
//! Calderón products act on those coefficients only, so two algebra routes
//! can be compared exactly before any floating point is involved.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponent::{rational_serde, to_f64, Exponent, Rational};
use crate::grid::{Grid, GridFunction};
use crate::sampling::Sampler;
use crate::weights::Weight;

/// Relative bracket width at which the Luxembourg bisection stops.
pub const LUXEMBOURG_RTOL: f64 = 1e-13;

/// Slack below which a sampled convexity inequality counts as violated.
pub const CONVEXITY_TOL: f64 = 1e-12;

static NEXT_FIELD: AtomicU64 = AtomicU64::new(0);

fn fresh_id() -> u64 {
    NEXT_FIELD.fetch_add(1, AtomicOrdering::Relaxed)
}

type Fields = BTreeMap<u64, Arc<Vec<f64>>>;

fn prune(map: &mut BTreeMap<u64, Rational>) {
    map.retain(|_, v| !v.is_zero());
}

fn combine(a: &BTreeMap<u64, Rational>, ka: &Rational, b: &BTreeMap<u64, Rational>, kb: &Rational) -> BTreeMap<u64, Rational> {
    let mut out: BTreeMap<u64, Rational> = a.iter().map(|(k, v)| (*k, v * ka)).collect();
    for (k, v) in b {
        *out.entry(*k).or_insert_with(Rational::zero) += v * kb;
    }
    prune(&mut out);
    out
}

/// `c + Σ a_k u_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Affine {
    constant: Rational,
    terms: BTreeMap<u64, Rational>,
}

impl Affine {
    fn scale(&self, k: &Rational) -> Self {
        let mut terms: BTreeMap<u64, Rational> = self.terms.iter().map(|(i, a)| (*i, a * k)).collect();
        prune(&mut terms);
        Self { constant: &self.constant * k, terms }
    }

    fn one_minus(&self) -> Self {
        Self {
            constant: Rational::one() - &self.constant,
            terms: self.terms.iter().map(|(i, a)| (*i, -a)).collect(),
        }
    }

    fn shift(&self, c: &Rational) -> Self {
        Self { constant: &self.constant + c, terms: self.terms.clone() }
    }

    fn combine(&self, ka: &Rational, other: &Self, kb: &Rational) -> Self {
        Self {
            constant: &self.constant * ka + &other.constant * kb,
            terms: combine(&self.terms, ka, &other.terms, kb),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    WeightedLebesgue,
    VariableLebesgue,
}

/// Symbolic descriptor of `L^{p(·)}_w` with `‖f‖ = ‖f w‖_{L^{p(·)}}`.
#[derive(Clone, Debug)]
pub struct SpaceSpec {
    grid: Grid,
    recip: Affine,
    weight: BTreeMap<u64, Rational>,
    fields: Fields,
    weights: Fields,
}

impl PartialEq for SpaceSpec {
    /// Symbolic equality: same grid, same exponent expression, same weight monomial.
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.recip == other.recip && self.weight == other.weight
    }
}

fn weight_part(grid: &Grid, w: Option<&Weight>) -> Result<(BTreeMap<u64, Rational>, Fields)> {
    let mut powers = BTreeMap::new();
    let mut weights = Fields::new();
    if let Some(w) = w {
        if w.grid() != grid {
            return Err(Error::GridMismatch("weight lives on a different grid".into()));
        }
        let id = fresh_id();
        powers.insert(id, Rational::one());
        weights.insert(id, Arc::new(w.values().to_vec()));
    }
    Ok((powers, weights))
}

impl SpaceSpec {
    /// `L^p_w`, unweighted when `w` is `None`.
    pub fn weighted_lebesgue(grid: Grid, p: Exponent, w: Option<&Weight>) -> Result<Self> {
        let (weight, weights) = weight_part(&grid, w)?;
        Ok(Self {
            grid,
            recip: Affine { constant: p.recip().clone(), terms: BTreeMap::new() },
            weight,
            fields: Fields::new(),
            weights,
        })
    }

    /// `L^{p(·)}_w` for a cellwise exponent `p(x) >= 1`.
    pub fn variable_lebesgue(p: &GridFunction, w: Option<&Weight>) -> Result<Self> {
        let grid = *p.grid();
        if let Some(cell) = p.values().iter().position(|&v| !(v >= 1.0)) {
            return Err(Error::InvalidExponent(format!("p(x) = {} < 1 at cell {cell}", p.get(cell))));
        }
        let (weight, weights) = weight_part(&grid, w)?;
        let id = fresh_id();
        let mut fields = Fields::new();
        fields.insert(id, Arc::new(p.values().iter().map(|v| 1.0 / v).collect()));
        Ok(Self {
            grid,
            recip: Affine { constant: Rational::zero(), terms: BTreeMap::from([(id, Rational::one())]) },
            weight,
            fields,
            weights,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> SpaceKind {
        if self.recip.terms.is_empty() {
            SpaceKind::WeightedLebesgue
        } else {
            SpaceKind::VariableLebesgue
        }
    }

    /// The exact exponent of the constant kind.
    pub fn constant_exponent(&self) -> Option<Exponent> {
        match self.kind() {
            SpaceKind::WeightedLebesgue => Exponent::from_recip(self.recip.constant.clone()).ok(),
            SpaceKind::VariableLebesgue => None,
        }
    }

    /// Exact exponent of the weight monomial when it has a single base.
    pub fn weight_power(&self) -> Option<Rational> {
        match self.weight.len() {
            0 => Some(Rational::zero()),
            1 => self.weight.values().next().cloned(),
            _ => None,
        }
    }

    pub fn is_unweighted(&self) -> bool {
        self.weight.is_empty()
    }

    /// `1/p(x)` per cell.
    pub fn recip_values(&self) -> Vec<f64> {
        let c = to_f64(&self.recip.constant);
        let mut out = vec![c; self.grid.cell_count()];
        for (id, a) in &self.recip.terms {
            let a = to_f64(a);
            for (o, u) in out.iter_mut().zip(self.fields[id].iter()) {
                *o += a * u;
            }
        }
        out
    }

    /// `w(x)` per cell.
    pub fn weight_values(&self) -> Vec<f64> {
        let mut out = vec![1.0; self.grid.cell_count()];
        for (id, q) in &self.weight {
            let q = to_f64(q);
            for (o, &b) in out.iter_mut().zip(self.weights[id].iter()) {
                *o *= if q == 1.0 {
                    b
                } else if q == -1.0 {
                    1.0 / b
                } else {
                    b.powf(q)
                };
            }
        }
        out
    }

    fn recip_range(&self) -> (f64, f64) {
        let v = self.recip_values();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `r* = essinf p`.
    pub fn r_star(&self) -> f64 {
        1.0 / self.recip_range().1
    }

    /// `s* = esssup p`, possibly `∞`.
    pub fn s_star(&self) -> f64 {
        1.0 / self.recip_range().0
    }

    /// True when `p(x) < 1` somewhere, so the norm is only a quasi-norm.
    pub fn is_quasi(&self) -> bool {
        self.recip_range().1 > 1.0
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch("function and space grids differ".into()));
        }
        Ok(())
    }

    fn checked_recips(&self) -> Result<Vec<f64>> {
        let r = self.recip_values();
        if let Some(cell) = r.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidExponent(format!("1/p = {} at cell {cell}", r[cell])));
        }
        Ok(r)
    }

    /// `|f| w` per cell, with a check that it is finite.
    fn weighted_abs(&self, f: &GridFunction) -> Result<Vec<f64>> {
        self.check_grid(f)?;
        let g: Vec<f64> = f.values().iter().zip(self.weight_values()).map(|(v, w)| v.abs() * w).collect();
        if let Some(cell) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell });
        }
        Ok(g)
    }

    /// `ρ(f) = Σ_x |f(x) w(x)|^{p(x)} |cell|`; cells with `p(x) = ∞` contribute
    /// `0` when `|f w| <= 1` and make the modular infinite otherwise.
    pub fn modular(&self, f: &GridFunction) -> Result<f64> {
        let recips = self.checked_recips()?;
        let g = self.weighted_abs(f)?;
        Ok(modular_of(&g, &recips, self.grid.cell_volume()))
    }

    /// Lebesgue norm for the constant kind, Luxembourg norm otherwise.
    pub fn norm(&self, f: &GridFunction) -> Result<f64> {
        let recips = self.checked_recips()?;
        let g = self.weighted_abs(f)?;
        let top = g.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(0.0);
        }
        let g: Vec<f64> = g.iter().map(|v| v / top).collect();
        let vol = self.grid.cell_volume();
        let unit = match self.kind() {
            SpaceKind::WeightedLebesgue if recips[0] == 0.0 => 1.0,
            SpaceKind::WeightedLebesgue => {
                let p = 1.0 / recips[0];
                (g.iter().map(|v| v.powf(p)).sum::<f64>() * vol).powf(recips[0])
            }
            SpaceKind::VariableLebesgue => luxembourg(&g, &recips, vol),
        };
        Ok(top * unit)
    }

    /// `X'`: pointwise conjugate exponent and inverse weight. For the variable
    /// kind this is the associate space up to norm equivalence.
    pub fn associate(&self) -> Result<SpaceSpec> {
        let (_, hi) = self.recip_range();
        if hi >= 1.0 {
            return Err(Error::InvalidExponent("p = 1 somewhere, the associate is not reflexive here".into()));
        }
        Ok(self.associate_unchecked())
    }

    fn associate_banach(&self) -> Result<SpaceSpec> {
        let (lo, hi) = self.recip_range();
        if hi > 1.0 || lo < 0.0 {
            return Err(Error::InvalidExponent(format!("1/p ranges over [{lo}, {hi}], outside [0, 1]")));
        }
        Ok(self.associate_unchecked())
    }

    fn associate_unchecked(&self) -> SpaceSpec {
        let mut weight: BTreeMap<u64, Rational> = self.weight.iter().map(|(k, q)| (*k, -q)).collect();
        prune(&mut weight);
        SpaceSpec {
            grid: self.grid,
            recip: self.recip.one_minus(),
            weight,
            fields: self.fields.clone(),
            weights: self.weights.clone(),
        }
    }

    /// `X^r` with `‖f‖_{X^r} = ‖|f|^{1/r}‖_X^r`: exponent `p/r`, weight `w^r`.
    /// The result may be a quasi-space, see [`SpaceSpec::is_quasi`].
    pub fn concavify(&self, r: &Rational) -> Result<SpaceSpec> {
        if !r.is_positive() {
            return Err(invalid("r", format!("{r} is not positive")));
        }
        let mut weight: BTreeMap<u64, Rational> = self.weight.iter().map(|(k, q)| (*k, q * r)).collect();
        prune(&mut weight);
        Ok(SpaceSpec {
            grid: self.grid,
            recip: self.recip.scale(r),
            weight,
            fields: self.fields.clone(),
            weights: self.weights.clone(),
        })
    }

    fn merged(&self, other: &SpaceSpec) -> Result<(Fields, Fields)> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("spaces live on different grids".into()));
        }
        let mut fields = self.fields.clone();
        fields.extend(other.fields.iter().map(|(k, v)| (*k, v.clone())));
        let mut weights = self.weights.clone();
        weights.extend(other.weights.iter().map(|(k, v)| (*k, v.clone())));
        Ok((fields, weights))
    }

    /// Pointwise product `Y·Z`: reciprocal exponents add, weights multiply.
    pub fn pointwise_product(&self, other: &SpaceSpec) -> Result<SpaceSpec> {
        let (fields, weights) = self.merged(other)?;
        let one = Rational::one();
        Ok(SpaceSpec {
            grid: self.grid,
            recip: self.recip.combine(&one, &other.recip, &one),
            weight: combine(&self.weight, &one, &other.weight, &one),
            fields,
            weights,
        })
    }

    /// Calderón–Lozanovskii product `X_0^{1-θ} X_1^θ`.
    pub fn calderon_product(&self, other: &SpaceSpec, theta: &Rational) -> Result<SpaceSpec> {
        if !(theta.is_positive() && *theta < Rational::one()) {
            return Err(invalid("theta", format!("{theta} is not in (0, 1)")));
        }
        let (fields, weights) = self.merged(other)?;
        let rest = Rational::one() - theta;
        Ok(SpaceSpec {
            grid: self.grid,
            recip: self.recip.combine(&rest, &other.recip, theta),
            weight: combine(&self.weight, &rest, &other.weight, theta),
            fields,
            weights,
        })
    }

    /// `X_{r,s}` in closed form: `1/p ↦ (1/p - 1/s)/(1/r - 1/s)`, `w ↦ w^{1/(1/r-1/s)}`.
    fn rescale_closed(&self, r: &Exponent, s: &Exponent) -> SpaceSpec {
        let e = (r.recip() - s.recip()).recip();
        let mut weight: BTreeMap<u64, Rational> = self.weight.iter().map(|(k, q)| (*k, q * &e)).collect();
        prune(&mut weight);
        SpaceSpec {
            grid: self.grid,
            recip: self.recip.shift(&-s.recip()).scale(&e),
            weight,
            fields: self.fields.clone(),
            weights: self.weights.clone(),
        }
    }

    /// `X_{r,s} = (((X^r)')^{(s/r)'})'`, computed along the defining chain and
    /// in closed form; the two must agree exactly.
    pub fn rescale(&self, r: &Exponent, s: &Exponent) -> Result<SpecAlgebraResult> {
        if r < &Exponent::one() {
            return Err(Error::Ordering(format!("r = {r} < 1")));
        }
        if r >= s {
            return Err(Error::Ordering(format!("need r < s, got r = {r}, s = {s}")));
        }
        let (lo, hi) = self.recip_range();
        let slack = 1e-12;
        let exact = self.constant_exponent();
        let r_ok = match &exact {
            Some(p) => r <= p,
            None => to_f64(r.recip()) >= hi * (1.0 - slack),
        };
        if !r_ok {
            return Err(Error::Convexity { side: "r-convex", detail: format!("r = {r} exceeds essinf p = {}", 1.0 / hi) });
        }
        let s_ok = match &exact {
            Some(p) => s >= p,
            None => to_f64(s.recip()) <= lo * (1.0 + slack),
        };
        if !s_ok {
            return Err(Error::Convexity { side: "s-concave", detail: format!("s = {s} is below esssup p = {}", 1.0 / lo) });
        }
        // (s/r)' has reciprocal 1 - r/s.
        let q = (Rational::one() - s.recip() / r.recip()).recip();
        let steps = vec![
            AlgebraStep::Concavify { r: r.value().expect("r is finite") },
            AlgebraStep::Associate,
            AlgebraStep::Concavify { r: q },
            AlgebraStep::Associate,
        ];
        let mut trace = Vec::with_capacity(steps.len());
        let mut current = self.clone();
        for step in steps {
            current = step.apply(&current)?;
            trace.push(TraceEntry { description: current.describe(), step });
        }
        let closed = self.rescale_closed(r, s);
        if current != closed {
            return Err(Error::AlgebraMismatch(format!(
                "chain gives {}, closed form gives {}",
                current.exponent_string(),
                closed.exponent_string()
            )));
        }
        Ok(SpecAlgebraResult { spec: current, trace })
    }

    fn labels(&self) -> (BTreeMap<u64, usize>, BTreeMap<u64, usize>) {
        let f = self.fields.keys().enumerate().map(|(i, k)| (*k, i)).collect();
        let w = self.weights.keys().enumerate().map(|(i, k)| (*k, i)).collect();
        (f, w)
    }

    /// `1/p = ...` in terms of the stored fields `u0, u1, ...`.
    pub fn exponent_string(&self) -> String {
        let (labels, _) = self.labels();
        let mut s = format!("1/p = {}", self.recip.constant);
        for (id, a) in &self.recip.terms {
            let _ = write!(s, " + ({a})*u{}", labels[id]);
        }
        s
    }

    /// `w = ...` in terms of the stored weights `v0, v1, ...`.
    pub fn weight_string(&self) -> String {
        let (_, labels) = self.labels();
        if self.weight.is_empty() {
            return "w = 1".into();
        }
        let parts: Vec<String> = self.weight.iter().map(|(id, q)| format!("v{}^({q})", labels[id])).collect();
        format!("w = {}", parts.join(" * "))
    }

    pub fn describe(&self) -> SpaceSummary {
        SpaceSummary {
            kind: self.kind(),
            exponent: self.constant_exponent(),
            r_star: self.r_star(),
            s_star: self.s_star(),
            quasi: self.is_quasi(),
            reciprocal_exponent: self.exponent_string(),
            weight: self.weight_string(),
        }
    }

    /// `1` for the constant kind; `1 + 1/r* - 1/s*` for the variable kind.
    pub fn holder_constant(&self) -> f64 {
        match self.kind() {
            SpaceKind::WeightedLebesgue => 1.0,
            SpaceKind::VariableLebesgue => {
                let (lo, hi) = self.recip_range();
                1.0 + hi - lo
            }
        }
    }
}

fn modular_of(g: &[f64], recips: &[f64], vol: f64) -> f64 {
    let mut total = 0.0;
    for (&v, &r) in g.iter().zip(recips) {
        if r == 0.0 {
            if v > 1.0 {
                return f64::INFINITY;
            }
        } else if v > 0.0 {
            total += v.powf(1.0 / r);
        }
    }
    total * vol
}

/// Luxembourg norm of `g` with `max g = 1`, where the modular at `λ = 1` is
/// at most `1`; the lower end of the bracket is found by halving.
fn luxembourg(g: &[f64], recips: &[f64], vol: f64) -> f64 {
    let at = |lambda: f64| {
        let scaled: Vec<f64> = g.iter().map(|v| v / lambda).collect();
        modular_of(&scaled, recips, vol)
    };
    let mut hi = 1.0;
    let mut lo = 0.5;
    while at(lo) <= 1.0 {
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..200 {
        if hi - lo <= LUXEMBOURG_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceSummary {
    pub kind: SpaceKind,
    pub exponent: Option<Exponent>,
    pub r_star: f64,
    pub s_star: f64,
    pub quasi: bool,
    pub reciprocal_exponent: String,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AlgebraStep {
    Concavify {
        #[serde(with = "rational_serde")]
        r: Rational,
    },
    Associate,
}

impl AlgebraStep {
    pub fn apply(&self, spec: &SpaceSpec) -> Result<SpaceSpec> {
        match self {
            AlgebraStep::Concavify { r } => spec.concavify(r),
            AlgebraStep::Associate => spec.associate_banach(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub step: AlgebraStep,
    pub description: SpaceSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecAlgebraResult {
    #[serde(skip)]
    pub spec: SpaceSpec,
    pub trace: Vec<TraceEntry>,
}

impl SpecAlgebraResult {
    /// Re-applies the recorded steps to `input`.
    pub fn replay(&self, input: &SpaceSpec) -> Result<SpaceSpec> {
        self.trace.iter().try_fold(input.clone(), |acc, e| e.step.apply(&acc))
    }
}

/// `∫ |f g|`.
pub fn pairing(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.check_same_grid(g)?;
    let vol = f.grid().cell_volume();
    Ok(f.values().iter().zip(g.values()).map(|(a, b)| (a * b).abs()).sum::<f64>() * vol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductNorm {
    /// Closed-form norm of `h` in `X_0^{1-θ} X_1^θ`.
    pub norm: f64,
    /// Factors with `|h| = f^{1-θ} g^θ`.
    pub f: GridFunction,
    pub g: GridFunction,
    pub f_norm: f64,
    pub g_norm: f64,
    /// `‖f‖_0^{1-θ} ‖g‖_1^θ`, equal to `norm` for the optimal factors.
    pub factored: f64,
    /// `max |f^{1-θ} g^θ - |h|| / max |h|`.
    pub reconstruction_error: f64,
}

/// Norm of `h` in the Calderón product together with its optimal factorization
/// `f = H u^{p/p_0} / w_0`, `g = H u^{p/p_1} / w_1`, `u = |h| w_θ / H`.
pub fn product_norm(x0: &SpaceSpec, x1: &SpaceSpec, theta: &Rational, h: &GridFunction) -> Result<ProductNorm> {
    let xt = x0.calderon_product(x1, theta)?;
    let norm = xt.norm(h)?;
    let grid = *h.grid();
    if norm == 0.0 {
        let zero = GridFunction::zeros(grid);
        return Ok(ProductNorm {
            norm,
            f: zero.clone(),
            g: zero,
            f_norm: 0.0,
            g_norm: 0.0,
            factored: 0.0,
            reconstruction_error: 0.0,
        });
    }
    let (rt, r0, r1) = (xt.checked_recips()?, x0.checked_recips()?, x1.checked_recips()?);
    let (wt, w0, w1) = (xt.weight_values(), x0.weight_values(), x1.weight_values());
    let ratio = |a: f64, t: f64| if t == 0.0 { 1.0 } else { a / t };
    let mut f = Vec::with_capacity(grid.cell_count());
    let mut g = Vec::with_capacity(grid.cell_count());
    for cell in 0..grid.cell_count() {
        let u = h.get(cell).abs() * wt[cell] / norm;
        f.push(norm * u.powf(ratio(r0[cell], rt[cell])) / w0[cell]);
        g.push(norm * u.powf(ratio(r1[cell], rt[cell])) / w1[cell]);
    }
    let f = GridFunction::new(grid, f)?;
    let g = GridFunction::new(grid, g)?;
    let t = to_f64(theta);
    let scale = h.max_abs();
    let reconstruction_error = (0..grid.cell_count())
        .map(|c| (f.get(c).powf(1.0 - t) * g.get(c).powf(t) - h.get(c).abs()).abs() / scale)
        .fold(0.0, f64::max);
    let f_norm = x0.norm(&f)?;
    let g_norm = x1.norm(&g)?;
    Ok(ProductNorm {
        norm,
        factored: f_norm.powf(1.0 - t) * g_norm.powf(t),
        f,
        g,
        f_norm,
        g_norm,
        reconstruction_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub r: Exponent,
    pub s: Exponent,
    pub samples: usize,
    /// Smallest relative slack of `‖(|f|^r+|g|^r)^{1/r}‖ <= (‖f‖^r+‖g‖^r)^{1/r}`.
    pub worst_convexity_slack: f64,
    /// Smallest relative slack of `(‖f‖^s+‖g‖^s)^{1/s} <= ‖(|f|^s+|g|^s)^{1/s}‖`.
    pub worst_concavity_slack: f64,
    pub convexity_counterexample: bool,
    pub concavity_counterexample: bool,
}

fn lp_pair(a: f64, b: f64, r: &Exponent) -> f64 {
    let m = a.max(b);
    if r.is_infinite() || m == 0.0 {
        return m;
    }
    let p = r.to_f64();
    m * ((a / m).powf(p) + (b / m).powf(p)).powf(1.0 / p)
}

fn relative_slack(lhs: f64, rhs: f64) -> f64 {
    let m = lhs.max(rhs);
    if m == 0.0 {
        0.0
    } else {
        (rhs - lhs) / m
    }
}

/// Samples the `r`-convexity and `s`-concavity inequalities on random pairs.
/// Even samples use full-support signed pairs, odd samples disjointly
/// supported ones. Passing only means no counterexample was found.
pub fn convexity_check(spec: &SpaceSpec, r: &Exponent, s: &Exponent, samples: usize, seed: u64) -> Result<ConvexityReport> {
    if r > s {
        return Err(Error::Ordering(format!("need r <= s, got r = {r}, s = {s}")));
    }
    let grid = *spec.grid();
    let mut sampler = Sampler::new(seed);
    let mut worst_r = f64::INFINITY;
    let mut worst_s = f64::INFINITY;
    for i in 0..samples {
        let mut f = sampler.signed(grid);
        let mut g = sampler.signed(grid);
        if i % 2 == 1 {
            let mask: Vec<bool> = (0..grid.cell_count()).map(|_| sampler.bernoulli(0.5)).collect();
            f = GridFunction::new(grid, f.values().iter().zip(&mask).map(|(v, m)| if *m { *v } else { 0.0 }).collect())?;
            g = GridFunction::new(grid, g.values().iter().zip(&mask).map(|(v, m)| if *m { 0.0 } else { *v }).collect())?;
        }
        let (nf, ng) = (spec.norm(&f)?, spec.norm(&g)?);
        let combined = |e: &Exponent| f.zip_map(&g, |a, b| lp_pair(a.abs(), b.abs(), e));
        let lhs_r = spec.norm(&combined(r)?)?;
        worst_r = worst_r.min(relative_slack(lhs_r, lp_pair(nf, ng, r)));
        let rhs_s = spec.norm(&combined(s)?)?;
        worst_s = worst_s.min(relative_slack(lp_pair(nf, ng, s), rhs_s));
    }
    Ok(ConvexityReport {
        r: r.clone(),
        s: s.clone(),
        samples,
        worst_convexity_slack: worst_r,
        worst_concavity_slack: worst_s,
        convexity_counterexample: worst_r < -CONVEXITY_TOL,
        concavity_counterexample: worst_s < -CONVEXITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{int, rat};

    fn grid(l: u32) -> Grid {
        Grid::new(1, l).unwrap()
    }

    #[test]
    fn two_cell_luxembourg_example() {
        let g = grid(1);
        let p = GridFunction::new(g, vec![2.0, 4.0]).unwrap();
        let x = SpaceSpec::variable_lebesgue(&p, None).unwrap();
        let n = x.norm(&GridFunction::constant(g, 1.0)).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_field_matches_lebesgue() {
        let g = grid(6);
        let mut s = Sampler::new(1);
        let w = s.lognormal(g, 0.5);
        let f = s.signed(g);
        let var = SpaceSpec::variable_lebesgue(&GridFunction::constant(g, 3.0), Some(&w)).unwrap();
        let con = SpaceSpec::weighted_lebesgue(g, Exponent::int(3), Some(&w)).unwrap();
        let (a, b) = (var.norm(&f).unwrap(), con.norm(&f).unwrap());
        assert!((a - b).abs() <= 1e-10 * b);
    }

    #[test]
    fn infinite_exponent_is_sup_norm() {
        let g = grid(3);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::infinity(), None).unwrap();
        let f = GridFunction::new(g, vec![0.0, -3.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(x.norm(&f).unwrap(), 3.0);
    }

    #[test]
    fn associate_and_double_associate() {
        let g = grid(3);
        let w = Sampler::new(2).lognormal(g, 0.3);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(4), Some(&w)).unwrap();
        let xa = x.associate().unwrap();
        assert_eq!(xa.constant_exponent(), Some(Exponent::ratio(4, 3)));
        assert_eq!(xa.weight_power(), Some(int(-1)));
        assert_eq!(xa.associate().unwrap(), x);
        let l1 = SpaceSpec::weighted_lebesgue(g, Exponent::one(), None).unwrap();
        assert!(l1.associate().is_err());
    }

    #[test]
    fn rescale_examples() {
        let g = grid(3);
        let w = Sampler::new(3).lognormal(g, 0.3);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(2), Some(&w)).unwrap();
        let same = x.rescale(&Exponent::one(), &Exponent::infinity()).unwrap();
        assert_eq!(same.spec, x);
        let res = x.rescale(&Exponent::ratio(4, 3), &Exponent::int(4)).unwrap();
        assert_eq!(res.spec.constant_exponent(), Some(Exponent::int(2)));
        assert_eq!(res.spec.weight_power(), Some(int(2)));
        assert_eq!(res.replay(&x).unwrap(), res.spec);
        assert!(matches!(x.rescale(&Exponent::int(3), &Exponent::int(4)), Err(Error::Convexity { side: "r-convex", .. })));
        assert!(matches!(x.rescale(&Exponent::one(), &Exponent::ratio(3, 2)), Err(Error::Convexity { side: "s-concave", .. })));
        assert!(matches!(x.rescale(&Exponent::int(2), &Exponent::int(2)), Err(Error::Ordering(_))));
    }

    #[test]
    fn calderon_duality_instance() {
        let g = grid(5);
        let w = Sampler::new(4).lognormal(g, 0.7);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(3), Some(&w)).unwrap();
        let prod = x.calderon_product(&x.associate().unwrap(), &rat(1, 2)).unwrap();
        assert_eq!(prod.constant_exponent(), Some(Exponent::int(2)));
        assert!(prod.is_unweighted());
    }

    #[test]
    fn lebesgue_convexity() {
        let g = grid(4);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(3), None).unwrap();
        let rep = convexity_check(&x, &Exponent::int(3), &Exponent::int(3), 20, 5).unwrap();
        assert!(!rep.convexity_counterexample && !rep.concavity_counterexample);
        let l4 = SpaceSpec::weighted_lebesgue(g, Exponent::int(4), None).unwrap();
        let rep = convexity_check(&l4, &Exponent::one(), &Exponent::int(2), 20, 5).unwrap();
        assert!(rep.concavity_counterexample);
        assert!(!rep.convexity_counterexample);
    }
}
