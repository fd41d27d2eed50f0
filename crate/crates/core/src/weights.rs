//! Weights and their Muckenhoupt-type constants.
//!
//! Constants follow the convention in which the weight multiplies the
//! function, `‖f‖_{L^p_w} = ‖f w‖_{L^p}`, so that
//!
//! ```text
//! [w]_p       = sup_Q <w^p>_{1,Q}^{1/p} <w^{-p'}>_{1,Q}^{1/p'}
//! [w]_{p,(r,s)} = sup_Q <w>_{1/(1/p-1/s),Q} <w^{-1}>_{1/(1/r-1/p),Q}
//! [w]_{A∞}    = sup_Q w(Q)^{-1} ∫_Q M(w 1_Q)
//! ```
//!
//! Every supremum is an exact maximum over a cube lattice and reports the
//! cube attaining it.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{lattice_means, Cube, DyadicCube, DyadicPyramid, Grid, GridFunction, Lattice};
use crate::quadrature::{corner_square_mean, square_mean};

/// A grid function with strictly positive cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(f: GridFunction) -> Result<Self> {
        if let Some((cell, &value)) = f.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveWeight { cell, value });
        }
        Ok(Self(f))
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(GridFunction::constant(grid, c))
    }

    pub fn function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }

    pub fn grid(&self) -> &Grid {
        self.0.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    pub fn inverse(&self) -> Weight {
        Weight(self.0.map(|v| 1.0 / v))
    }

    pub fn powf(&self, e: f64) -> Result<Weight> {
        Weight::new(self.0.map(|v| v.powf(e)))
    }

    pub fn scale(&self, lambda: f64) -> Result<Weight> {
        Weight::new(self.0.scale(lambda))
    }

    /// `max / min`.
    pub fn dynamic_range(&self) -> f64 {
        self.0.max() / self.0.min()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Supremum {
    pub value: f64,
    pub cube: Cube,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitedConstant {
    pub value: f64,
    pub r: f64,
    pub s: f64,
    pub cube: Cube,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightConstants {
    pub p: f64,
    pub ap: Supremum,
    pub ainf: Supremum,
    pub limited: Option<LimitedConstant>,
}

/// Maximum with ties broken towards the smaller cube key.
pub(crate) fn argmax(items: impl IntoIterator<Item = (Cube, f64)>) -> Option<Supremum> {
    let mut best: Option<Supremum> = None;
    for (cube, value) in items {
        best = match best {
            Some(b) if value < b.value || (value == b.value && cube >= b.cube) => Some(b),
            _ => Some(Supremum { value, cube }),
        };
    }
    best
}

fn powered(w: &Weight, e: f64, what: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = if e == 1.0 {
        w.values().to_vec()
    } else if e == -1.0 {
        w.values().iter().map(|v| 1.0 / v).collect()
    } else {
        w.values().iter().map(|v| v.powf(e)).collect()
    };
    if let Some(cell) = out.iter().position(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::DynamicRange(format!(
            "{what} = w^{e} is not representable at cell {cell} (w = {})",
            w.values()[cell]
        )));
    }
    Ok(out)
}

/// `sup_Q <a>_Q^{ea} <b>_Q^{eb}` for cellwise arrays `a`, `b`.
fn sup_of_product(
    grid: &Grid,
    lattice: Lattice,
    a: &[f64],
    ea: f64,
    b: &[f64],
    eb: f64,
) -> Result<Supremum> {
    let ma = lattice_means(grid, lattice, a);
    let mb = lattice_means(grid, lattice, b);
    let root = |m: f64, e: f64| if e == 1.0 { m } else { m.powf(e) };
    let best = argmax(ma.iter().zip(&mb).map(|(&(cube, x), &(_, y))| (cube, root(x, ea) * root(y, eb))))
        .expect("lattice has at least one cube");
    if !best.value.is_finite() {
        return Err(Error::DynamicRange("weight constant overflowed".into()));
    }
    Ok(best)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} is not in (1, ∞)")));
    }
    Ok(())
}

/// Conjugate exponent `p' = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// `[w]_p` and an attaining cube.
pub fn ap_constant(w: &Weight, p: f64, lattice: Lattice) -> Result<Supremum> {
    check_p(p)?;
    let q = conjugate(p);
    let a = powered(w, p, "w^p")?;
    let b = powered(w, -q, "w^{-p'}")?;
    sup_of_product(w.grid(), lattice, &a, 1.0 / p, &b, 1.0 / q)
}

/// `[w]_{p,(r,s)}` for `1 <= r < p < s <= ∞`; pass `f64::INFINITY` for `s = ∞`.
pub fn limited_range_constant(w: &Weight, p: f64, r: f64, s: f64, lattice: Lattice) -> Result<LimitedConstant> {
    if !(r >= 1.0 && r < p && p < s) || p.is_infinite() {
        return Err(Error::Ordering(format!("need 1 <= r < p < s <= ∞, got r={r}, p={p}, s={s}")));
    }
    let first = if s.is_infinite() { p } else { 1.0 / (1.0 / p - 1.0 / s) };
    let second = if r == 1.0 { conjugate(p) } else { 1.0 / (1.0 / r - 1.0 / p) };
    let a = powered(w, first, "w^a")?;
    let b = powered(w, -second, "w^{-b}")?;
    let sup = sup_of_product(w.grid(), lattice, &a, 1.0 / first, &b, 1.0 / second)?;
    Ok(LimitedConstant { value: sup.value, r, s, cube: sup.cube })
}

/// Fujii–Wilson constant over the dyadic lattice:
/// `sup_Q w(Q)^{-1} ∫_Q M_dyadic(w 1_Q)`.
///
/// Inside `Q`, `M(w 1_Q)` is the running maximum of means over dyadic
/// subcubes of `Q` (ancestors of `Q` only see smaller means), so each `Q`
/// costs one top-down pass over its subtree.
pub fn ainf_constant(w: &Weight) -> Result<Supremum> {
    let grid = *w.grid();
    let d = grid.dim() as usize;
    let depth = grid.depth();
    let pyr = DyadicPyramid::new(&grid, w.values());
    let means: Vec<Vec<f64>> = (0..=depth).map(|k| pyr.level_means(k)).collect();
    let mut items = Vec::with_capacity(grid.cube_count());
    for cube in crate::grid::enumerate_cubes(&grid) {
        let k = cube.level;
        let mut run = vec![means[k as usize][DyadicPyramid::flat(k, cube.index)]];
        for j in k + 1..=depth {
            let width = 1usize << (j - k);
            let m = 1usize << j;
            let level = &means[j as usize];
            let (ox, oy) = (cube.index[0] * width, cube.index[1] * width);
            let next: Vec<f64> = if d == 1 {
                (0..width).map(|a| level[ox + a].max(run[a / 2])).collect()
            } else {
                let pw = width / 2;
                let mut v = vec![0.0; width * width];
                for b in 0..width {
                    for a in 0..width {
                        v[a + width * b] = level[(ox + a) + m * (oy + b)].max(run[a / 2 + pw * (b / 2)]);
                    }
                }
                v
            };
            run = next;
        }
        let integral: f64 = run.iter().sum();
        items.push((Cube::from(cube), integral / pyr.sum(&cube)));
    }
    Ok(argmax(items).expect("grid has cubes"))
}

pub fn weight_constants(w: &Weight, p: f64, lattice: Lattice, limited: Option<(f64, f64)>) -> Result<WeightConstants> {
    let ap = ap_constant(w, p, lattice)?;
    let ainf = ainf_constant(w)?;
    let limited = limited
        .map(|(r, s)| limited_range_constant(w, p, r, s, lattice))
        .transpose()?;
    Ok(WeightConstants { p, ap, ainf, limited })
}

/// Power weight `|x - center|^alpha` given by exact cell averages.
///
/// In one dimension every cell average is the closed-form integral. In two
/// dimensions the (up to four) cells touching the center use the polar closed
/// form, the others tensor Gauss–Legendre. `center` must be a grid vertex.
pub fn power_weight(grid: Grid, alpha: f64, center: [f64; 2]) -> Result<Weight> {
    let d = grid.dim() as f64;
    if !(alpha > -d) {
        return Err(invalid("alpha", format!("{alpha} <= -{d} is not locally integrable")));
    }
    let vertex = grid_vertex(&grid, center)?;
    if alpha == 0.0 {
        return Weight::constant(grid, 1.0);
    }
    let radial = RadialProfile::Power(alpha);
    Weight::new(radial_cell_means(&grid, vertex, radial))
}

/// Validates that `center` is a grid vertex and returns it in cell units.
pub(crate) fn grid_vertex(grid: &Grid, center: [f64; 2]) -> Result<[usize; 2]> {
    let n = grid.side() as f64;
    let mut out = [0usize; 2];
    for axis in 0..grid.dim() as usize {
        let scaled = center[axis] * n;
        if !(0.0..=n).contains(&scaled) || scaled.fract() != 0.0 {
            return Err(invalid("center", format!("{:?} is not a grid vertex", center)));
        }
        out[axis] = scaled as usize;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum RadialProfile {
    /// `ρ^alpha`
    Power(f64),
    /// `ln ρ`
    Log,
}

impl RadialProfile {
    fn eval(self, rho: f64) -> f64 {
        match self {
            RadialProfile::Power(a) => rho.powf(a),
            RadialProfile::Log => rho.ln(),
        }
    }

    /// `∫_0^t g(|x|) dx` for `t >= 0` (one dimension).
    fn antiderivative_1d(self, t: f64) -> f64 {
        match self {
            RadialProfile::Power(a) => t.powf(a + 1.0) / (a + 1.0),
            RadialProfile::Log => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln() - t
                }
            }
        }
    }

    /// `∫_0^R g(ρ) ρ dρ` (two dimensions, polar).
    fn antiderivative_polar(self, r: f64) -> f64 {
        match self {
            RadialProfile::Power(a) => r.powf(a + 2.0) / (a + 2.0),
            RadialProfile::Log => r * r / 2.0 * (r.ln() - 0.5),
        }
    }
}

/// Exact-as-possible cell means of `g(|x - vertex|)`.
pub(crate) fn radial_cell_means(grid: &Grid, vertex: [usize; 2], g: RadialProfile) -> GridFunction {
    let h = grid.cell_width();
    let values = (0..grid.cell_count())
        .map(|cell| {
            let c = grid.cell_coords(cell);
            if grid.dim() == 1 {
                // Cell [c, c+1) never straddles the vertex.
                let (near, far) = if c[0] >= vertex[0] {
                    ((c[0] - vertex[0]) as f64 * h, (c[0] + 1 - vertex[0]) as f64 * h)
                } else {
                    ((vertex[0] - c[0] - 1) as f64 * h, (vertex[0] - c[0]) as f64 * h)
                };
                (g.antiderivative_1d(far) - g.antiderivative_1d(near)) / h
            } else {
                let dx = c[0] as f64 - vertex[0] as f64;
                let dy = c[1] as f64 - vertex[1] as f64;
                let touches = (dx == 0.0 || dx == -1.0) && (dy == 0.0 || dy == -1.0);
                if touches {
                    corner_square_mean(h, |r| g.antiderivative_polar(r))
                } else {
                    let dist = dx.abs().min((dx + 1.0).abs()).max(dy.abs().min((dy + 1.0).abs()));
                    let points = if dist < 4.0 { 16 } else { 6 };
                    square_mean(dx * h, dy * h, h, points, |x, y| g.eval(x.hypot(y)))
                }
            }
        })
        .collect();
    GridFunction::from_vec_unchecked(*grid, values)
}

/// Worst cube for a dyadic constant, as a [`DyadicCube`].
pub fn dyadic_cube(sup: &Supremum) -> Option<DyadicCube> {
    sup.cube.as_dyadic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    fn w21() -> Weight {
        Weight::new(GridFunction::new(Grid::new(1, 1).unwrap(), vec![2.0, 1.0]).unwrap()).unwrap()
    }

    /// Direct enumeration over the three cubes of the depth-1 grid.
    fn brute_ap(w: &[f64; 2], p: f64) -> f64 {
        let q = p / (p - 1.0);
        let term = |vals: &[f64]| {
            let n = vals.len() as f64;
            let a: f64 = vals.iter().map(|v| v.powf(p)).sum::<f64>() / n;
            let b: f64 = vals.iter().map(|v| v.powf(-q)).sum::<f64>() / n;
            a.powf(1.0 / p) * b.powf(1.0 / q)
        };
        term(&w[..]).max(term(&w[..1])).max(term(&w[1..]))
    }

    #[test]
    fn ap_hand_example() {
        let sup = ap_constant(&w21(), 2.0, Lattice::Dyadic).unwrap();
        assert!((sup.value - 1.25).abs() < 1e-12);
        assert!((brute_ap(&[2.0, 1.0], 2.0) - 1.25).abs() < 1e-12);
        assert_eq!(sup.cube, Cube::from(DyadicCube::ROOT));
        let dual = ap_constant(&w21().inverse(), 2.0, Lattice::Dyadic).unwrap();
        assert!((dual.value - 1.25).abs() < 1e-12);
    }

    #[test]
    fn ap_of_constant_is_one() {
        let grid = Grid::new(2, 3).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let one = Weight::constant(grid, 1.0).unwrap();
            assert_eq!(ap_constant(&one, p, Lattice::Shifted).unwrap().value, 1.0);
            let c = Weight::constant(grid, 3.7).unwrap();
            assert!((ap_constant(&c, p, Lattice::Dyadic).unwrap().value - 1.0).abs() < 1e-13);
        }
        assert!(ap_constant(&w21(), 1.0, Lattice::Dyadic).is_err());
    }

    #[test]
    fn ainf_hand_example() {
        let sup = ainf_constant(&w21()).unwrap();
        assert!((sup.value - 7.0 / 6.0).abs() < 1e-12);
        assert_eq!(sup.cube, Cube::from(DyadicCube::ROOT));
        let one = Weight::constant(Grid::new(1, 6).unwrap(), 1.0).unwrap();
        assert_eq!(ainf_constant(&one).unwrap().value, 1.0);
    }

    #[test]
    fn ainf_matches_brute_force() {
        use crate::maximal::maximal;
        let grid = Grid::new(2, 3).unwrap();
        let w = Sampler::new(4).lognormal(grid, 1.0);
        let sup = ainf_constant(&w).unwrap();
        let mut best: f64 = 0.0;
        for cube in crate::grid::enumerate_cubes(&grid) {
            let cells = cube.cells(&grid);
            let mut restricted = vec![0.0; grid.cell_count()];
            for &c in &cells {
                restricted[c] = w.values()[c];
            }
            let m = maximal(&GridFunction::new(grid, restricted).unwrap(), Lattice::Dyadic);
            let num: f64 = cells.iter().map(|&c| m.get(c)).sum();
            let den: f64 = cells.iter().map(|&c| w.values()[c]).sum();
            best = best.max(num / den);
        }
        assert!((sup.value - best).abs() < 1e-12 * best);
    }

    #[test]
    fn ainf_is_scale_invariant() {
        let grid = Grid::new(1, 8).unwrap();
        let w = Sampler::new(9).lognormal(grid, 1.0);
        let a = ainf_constant(&w).unwrap().value;
        let b = ainf_constant(&w.scale(17.0).unwrap()).unwrap().value;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn limited_range_examples() {
        let lc = limited_range_constant(&w21(), 2.0, 1.0, 4.0, Lattice::Dyadic).unwrap();
        let expect = 8.5f64.powf(0.25) * 0.625f64.sqrt();
        assert!((lc.value - expect).abs() < 1e-12);
        assert!((expect - 1.3499).abs() < 1e-4);
        let one = Weight::constant(Grid::new(1, 5).unwrap(), 1.0).unwrap();
        assert_eq!(limited_range_constant(&one, 3.0, 2.0, 5.0, Lattice::Dyadic).unwrap().value, 1.0);
        assert!(limited_range_constant(&w21(), 2.0, 2.0, 4.0, Lattice::Dyadic).is_err());
        assert!(limited_range_constant(&w21(), 5.0, 1.0, 4.0, Lattice::Dyadic).is_err());
    }

    #[test]
    fn overflow_guard() {
        let grid = Grid::new(1, 2).unwrap();
        let w = Weight::new(GridFunction::new(grid, vec![1e-200, 1.0, 1.0, 1e200]).unwrap()).unwrap();
        assert!(matches!(ap_constant(&w, 4.0, Lattice::Dyadic), Err(Error::DynamicRange(_))));
    }

    #[test]
    fn power_weight_examples() {
        let grid = Grid::new(1, 1).unwrap();
        let w = power_weight(grid, 1.0, [0.0, 0.0]).unwrap();
        assert!((w.values()[0] - 0.25).abs() < 1e-15);
        assert!((w.values()[1] - 0.75).abs() < 1e-15);
        let flat = power_weight(Grid::new(2, 3).unwrap(), 0.0, [0.5, 0.5]).unwrap();
        assert!(flat.values().iter().all(|&v| v == 1.0));
        assert!(power_weight(grid, -1.0, [0.0, 0.0]).is_err());
        assert!(power_weight(Grid::new(2, 2).unwrap(), -2.0, [0.5, 0.5]).is_err());
        assert!(power_weight(grid, 0.5, [0.3, 0.0]).is_err());
    }

    #[test]
    fn power_weight_2d_cell_means() {
        // α = 2: |x|² is a polynomial, so every cell mean is exact.
        let grid = Grid::new(2, 2).unwrap();
        let w = power_weight(grid, 2.0, [0.5, 0.5]).unwrap();
        let h = grid.cell_width();
        for cell in 0..grid.cell_count() {
            let c = grid.cell_coords(cell);
            let m1 = |i: usize| {
                let a = i as f64 * h - 0.5;
                let b = a + h;
                (b.powi(3) - a.powi(3)) / (3.0 * h)
            };
            let expect = m1(c[0]) + m1(c[1]);
            assert!((w.values()[cell] - expect).abs() < 1e-14, "cell {cell}");
        }
        // The singular corner cell for a negative power: mean of |x|^{-1}
        // over [0,h]² is 2 ln(1+√2)/h.
        let w = power_weight(grid, -1.0, [0.5, 0.5]).unwrap();
        let corner = grid.cell_index([2, 2]);
        let expect = 2.0 * (1.0 + 2f64.sqrt()).ln() / h;
        assert!((w.values()[corner] - expect).abs() < 1e-12 * expect);
    }
}
