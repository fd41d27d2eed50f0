//! Discretized singular integrals, commutators with multipliers, mean
//! oscillation, and singular-value probes of compactness.
//!
//! Operators are assembled by midpoint collocation,
//! `A_ij = K(x_i, x_j) |cell|` for `i ≠ j` and `A_ii = 0`, the zero diagonal
//! standing in for the principal value.

use std::f64::consts::E;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{lattice_means, Grid, GridFunction, Lattice};
use crate::weights::{argmax, grid_vertex, radial_cell_means, RadialProfile, Supremum, Weight};

/// Weighted probes reject weights whose `max/min` exceeds this.
pub const MAX_DYNAMIC_RANGE: f64 = 1e12;

/// Sampled modulus of continuity `ω`, linearly interpolated and constant
/// past the last sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiniModulus {
    pub samples: Vec<(f64, f64)>,
}

impl DiniModulus {
    /// `ω(t) = t^a` sampled at `n + 1` equispaced points of `[0, 1]`.
    pub fn power(a: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid("a", format!("{a} is not in (0, 1]")));
        }
        let samples = (0..=n).map(|i| {
            let t = i as f64 / n as f64;
            (t, t.powf(a))
        });
        Self::new(samples.collect())
    }

    /// Checks `ω(0) = 0`, strictly increasing abscissae, monotonicity, and
    /// subadditivity on all sample pairs.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 || samples[0] != (0.0, 0.0) {
            return Err(invalid("modulus", "needs at least two samples starting at (0, 0)"));
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(invalid("modulus", "samples must be finite"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid("modulus", "abscissae must increase strictly"));
            }
            if w[1].1 < w[0].1 {
                return Err(invalid("modulus", format!("decreases between t = {} and t = {}", w[0].0, w[1].0)));
            }
        }
        let m = Self { samples };
        for &(a, wa) in &m.samples {
            for &(b, wb) in &m.samples {
                let lhs = m.eval(a + b);
                if lhs > (wa + wb) * (1.0 + 1e-12) {
                    return Err(invalid("modulus", format!("not subadditive: ω({a} + {b}) = {lhs} > {}", wa + wb)));
                }
            }
        }
        Ok(m)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t <= 0.0 {
            return 0.0;
        }
        match s.iter().position(|&(x, _)| x >= t) {
            None => s[s.len() - 1].1,
            Some(i) => {
                let (x0, y0) = s[i - 1];
                let (x1, y1) = s[i];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// `∫_0^1 ω(t) dt / t` by the trapezoid rule on the samples; the integrand
    /// at `0` is the first slope.
    pub fn dini_integral(&self) -> f64 {
        let f = |t: f64| if t == 0.0 { self.samples[1].1 / self.samples[1].0 } else { self.eval(t) / t };
        let mut knots: Vec<f64> = self.samples.iter().map(|p| p.0).filter(|&t| t < 1.0).collect();
        knots.push(1.0);
        knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (f(w[0]) + f(w[1]))).sum()
    }
}

/// Angular part `Ω` of a rough kernel `Ω(z/|z|)/|z|^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim", rename_all = "snake_case")]
pub enum Omega {
    /// `(Ω(+1), Ω(-1))`.
    Line { plus: f64, minus: f64 },
    /// `c_0 + Σ_k a_k cos kφ + b_k sin kφ`, with `cos[k-1] = a_k`.
    Circle { constant: f64, cos: Vec<f64>, sin: Vec<f64> },
}

impl Omega {
    fn mean(&self) -> f64 {
        match self {
            Omega::Line { plus, minus } => 0.5 * (plus + minus),
            Omega::Circle { constant, .. } => *constant,
        }
    }

    fn eval(&self, z: [f64; 2]) -> f64 {
        match self {
            Omega::Line { plus, minus } => {
                if z[0] > 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            Omega::Circle { constant, cos, sin } => {
                let phi = z[1].atan2(z[0]);
                let mut v = *constant;
                for (k, a) in cos.iter().enumerate() {
                    v += a * ((k + 1) as f64 * phi).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    v += b * ((k + 1) as f64 * phi).sin();
                }
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `1/(x - y)`, one dimension.
    Hilbert,
    /// `z_1/|z|^{d+1} (1 + ω(min(|z|, 1)))`, `z = x - y`.
    Dini { modulus: DiniModulus },
    /// `Ω(z/|z|)/|z|^d`.
    Rough { omega: Omega },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Entries whose cell distance (max norm) is below this are zero. At
    /// least `1`, which removes only the diagonal.
    pub truncation: usize,
}

impl KernelSpec {
    pub fn hilbert() -> Self {
        Self { kind: KernelKind::Hilbert, truncation: 1 }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.truncation >= grid.side() {
            return Err(invalid("truncation", format!("{} cells is not below the domain size {}", self.truncation, grid.side())));
        }
        match &self.kind {
            KernelKind::Hilbert if grid.dim() != 1 => Err(invalid("kernel", "the Hilbert kernel is one-dimensional")),
            KernelKind::Rough { omega } => {
                let ok_dim = matches!((omega, grid.dim()), (Omega::Line { .. }, 1) | (Omega::Circle { .. }, 2));
                if !ok_dim {
                    return Err(invalid("omega", "angular part does not match the grid dimension"));
                }
                if omega.mean().abs() > 1e-12 {
                    return Err(invalid("omega", format!("mean {} is not zero", omega.mean())));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, z: [f64; 2], dim: u32) -> f64 {
        match &self.kind {
            KernelKind::Hilbert => 1.0 / z[0],
            KernelKind::Dini { modulus } => {
                let r = z[0].hypot(z[1]);
                z[0] / r.powi(dim as i32 + 1) * (1.0 + modulus.eval(r.min(1.0)))
            }
            KernelKind::Rough { omega } => {
                let r = if dim == 1 { z[0].abs() } else { z[0].hypot(z[1]) };
                omega.eval(z) / r.powi(dim as i32)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub grid: Grid,
    pub matrix: DMatrix<f64>,
    pub provenance: String,
}

impl OperatorMatrix {
    pub fn identity(grid: Grid) -> Self {
        let n = grid.cell_count();
        Self { grid, matrix: DMatrix::identity(n, n), provenance: "identity".into() }
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch("matrix and function grids differ".into()));
        }
        let v = &self.matrix * nalgebra::DVector::from_column_slice(f.values());
        GridFunction::new(self.grid, v.as_slice().to_vec())
    }
}

/// Midpoint collocation of the kernel on `grid`.
pub fn discretize(kernel: &KernelSpec, grid: Grid) -> Result<OperatorMatrix> {
    kernel.check(&grid)?;
    let n = grid.cell_count();
    let vol = grid.cell_volume();
    let centers: Vec<[f64; 2]> = (0..n).map(|c| grid.cell_center(c)).collect();
    let coords: Vec<[usize; 2]> = (0..n).map(|c| grid.cell_coords(c)).collect();
    let t = kernel.truncation;
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let dist = coords[i][0].abs_diff(coords[j][0]).max(coords[i][1].abs_diff(coords[j][1]));
        if dist < t {
            return 0.0;
        }
        let z = [centers[i][0] - centers[j][0], centers[i][1] - centers[j][1]];
        kernel.eval(z, grid.dim()) * vol
    });
    Ok(OperatorMatrix { grid, matrix, provenance: format!("{:?}, truncation {t}", kernel.kind) })
}

/// `[b, T]`: `C_ij = (b_i - b_j) A_ij`.
pub fn commutator_matrix(b: &GridFunction, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    if *b.grid() != a.grid {
        return Err(Error::GridMismatch("symbol and matrix grids differ".into()));
    }
    let bv = b.values();
    let matrix = DMatrix::from_fn(a.matrix.nrows(), a.matrix.ncols(), |i, j| (bv[i] - bv[j]) * a.matrix[(i, j)]);
    Ok(OperatorMatrix { grid: a.grid, matrix, provenance: format!("commutator with {}", a.provenance) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolClass {
    SmoothBump,
    JumpIndicator,
    LogSingular,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFunction {
    pub b: GridFunction,
    pub class: SymbolClass,
}

impl SymbolFunction {
    pub fn custom(b: GridFunction) -> Self {
        Self { b, class: SymbolClass::Custom }
    }

    /// `e · exp(-1/(1 - |z|^2))` with `z = (x - center)/width`, peak value 1.
    pub fn bump(grid: Grid, center: [f64; 2], width: f64) -> Result<Self> {
        let d = grid.dim() as usize;
        if center[..d].iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(invalid("center", format!("{center:?} is outside the domain")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid("width", format!("{width} is not positive")));
        }
        let b = GridFunction::from_fn(grid, |x| {
            let r2: f64 = (0..d).map(|k| ((x[k] - center[k]) / width).powi(2)).sum();
            if r2 < 1.0 {
                E * (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        })?;
        Ok(Self { b, class: SymbolClass::SmoothBump })
    }

    /// `1_{x_1 < 1/2}`.
    pub fn jump(grid: Grid) -> Result<Self> {
        let b = GridFunction::from_fn(grid, |x| if x[0] < 0.5 { 1.0 } else { 0.0 })?;
        Ok(Self { b, class: SymbolClass::JumpIndicator })
    }

    /// `log|x - c|` with `c` the centre of the domain, as exact cell averages.
    pub fn log_singular(grid: Grid) -> Result<Self> {
        let center = [0.5, if grid.dim() == 2 { 0.5 } else { 0.0 }];
        let vertex = grid_vertex(&grid, center)?;
        Ok(Self { b: radial_cell_means(&grid, vertex, RadialProfile::Log), class: SymbolClass::LogSingular })
    }
}

/// `sup_Q <|b - <b>_Q|>_Q` over the lattice, with the attaining cube.
pub fn bmo_norm(b: &GridFunction, lattice: Lattice) -> Result<Supremum> {
    let grid = *b.grid();
    let values = b.values();
    let oscillations = lattice_means(&grid, lattice, values).into_iter().map(|(q, mean)| {
        let cells = q.cells(&grid);
        let dev = cells.iter().map(|&c| (values[c] - mean).abs()).sum::<f64>() / cells.len() as f64;
        (q, dev)
    });
    argmax(oscillations).ok_or_else(|| Error::InvalidGrid("no cubes".into()))
}

/// Singular values, decreasing, of `D_w A D_w^{-1}`: the matrix of `A` on
/// `L^2_w` transported to `L^2` by `f ↦ f w`.
pub fn weighted_singular_values(a: &OperatorMatrix, w: Option<&Weight>) -> Result<Vec<f64>> {
    let m = match w {
        None => a.matrix.clone(),
        Some(w) => {
            if *w.grid() != a.grid {
                return Err(Error::GridMismatch("weight and matrix grids differ".into()));
            }
            let range = w.dynamic_range();
            if !(range <= MAX_DYNAMIC_RANGE) {
                return Err(Error::DynamicRange(format!("weight max/min = {range:e} exceeds {MAX_DYNAMIC_RANGE:e}")));
            }
            let wv = w.values();
            DMatrix::from_fn(a.matrix.nrows(), a.matrix.ncols(), |i, j| wv[i] * a.matrix[(i, j)] / wv[j])
        }
    };
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRatio {
    /// One-based index.
    pub k: usize,
    /// `σ_k / σ_1`, `0` for the zero matrix.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessProfile {
    pub n: usize,
    pub sigma: Vec<f64>,
    pub tails: Vec<TailRatio>,
}

pub fn tail_ratios(sigma: &[f64], tails: &[usize]) -> Result<Vec<TailRatio>> {
    tails
        .iter()
        .map(|&k| {
            if k == 0 || k > sigma.len() {
                return Err(invalid("tail", format!("index {k} is not in 1..={}", sigma.len())));
            }
            let ratio = if sigma[0] == 0.0 { 0.0 } else { sigma[k - 1] / sigma[0] };
            Ok(TailRatio { k, ratio })
        })
        .collect()
}

pub fn compactness_profile(a: &OperatorMatrix, w: Option<&Weight>, tails: &[usize]) -> Result<CompactnessProfile> {
    let sigma = weighted_singular_values(a, w)?;
    let tails = tail_ratios(&sigma, tails)?;
    Ok(CompactnessProfile { n: sigma.len(), sigma, tails })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementRow {
    pub depth: u32,
    pub n: usize,
    pub k: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trend {
    pub k: usize,
    pub ratios: Vec<f64>,
    /// Strictly decreasing with depth.
    pub decreasing: bool,
    /// `(max - min) / max` across depths.
    pub spread: f64,
}

/// Tail ratios across depths for operators built by `build`.
pub fn refinement_series(
    depths: &[u32],
    tails: &[usize],
    mut build: impl FnMut(u32) -> Result<(OperatorMatrix, Option<Weight>)>,
) -> Result<(Vec<RefinementRow>, Vec<Trend>)> {
    let mut rows = Vec::new();
    for &depth in depths {
        let (a, w) = build(depth)?;
        let profile = compactness_profile(&a, w.as_ref(), tails)?;
        rows.extend(profile.tails.into_iter().map(|t| RefinementRow { depth, n: profile.n, k: t.k, ratio: t.ratio }));
    }
    let trends = tails
        .iter()
        .map(|&k| {
            let ratios: Vec<f64> = rows.iter().filter(|r| r.k == k).map(|r| r.ratio).collect();
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            Trend {
                k,
                decreasing: ratios.windows(2).all(|w| w[1] < w[0]),
                spread: if max == 0.0 { 0.0 } else { (max - min) / max },
                ratios,
            }
        })
        .collect();
    Ok((rows, trends))
}
