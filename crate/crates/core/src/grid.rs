//! Finite dyadic model of the unit cube `[0,1)^d`.
//!
//! A [`Grid`] of depth `L` splits every axis into `2^L` cells. Functions are
//! piecewise constant on cells and vanish outside the unit cube, so every
//! integral is an exact cell sum and every supremum over cubes is a finite
//! maximum over a lattice of cubes.
//!
//! Cells are stored x-fastest: cell `(x, y)` has flat index `x + 2^L * y`.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MAX_DEPTH: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: u32,
    depth: u32,
}

impl Grid {
    pub fn new(dim: u32, depth: u32) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(Error::InvalidGrid(format!("depth {depth} not in 1..={MAX_DEPTH}")));
        }
        Ok(Self { dim, depth })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Cells per axis.
    pub fn side(&self) -> usize {
        1usize << self.depth
    }

    pub fn cell_count(&self) -> usize {
        1usize << (self.dim * self.depth)
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.side() as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.dim as i32)
    }

    pub fn cell_coords(&self, cell: usize) -> [usize; 2] {
        let n = self.side();
        if self.dim == 1 {
            [cell, 0]
        } else {
            [cell % n, cell / n]
        }
    }

    pub fn cell_index(&self, coords: [usize; 2]) -> usize {
        coords[0] + self.side() * coords[1]
    }

    /// Midpoint of a cell; the second coordinate is 0 when `d = 1`.
    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let h = self.cell_width();
        let c = self.cell_coords(cell);
        let y = if self.dim == 1 { 0.0 } else { (c[1] as f64 + 0.5) * h };
        [(c[0] as f64 + 0.5) * h, y]
    }

    /// Number of dyadic cubes over all levels `0..=L`.
    pub fn cube_count(&self) -> usize {
        (0..=self.depth).map(|k| 1usize << (self.dim * k)).sum()
    }
}

/// A cube of the standard dyadic lattice: level `k` and an index in `[0, 2^k)^d`.
/// For `d = 1` the second index is always 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: [usize; 2],
}

impl DyadicCube {
    pub const ROOT: DyadicCube = DyadicCube { level: 0, index: [0, 0] };

    pub fn new(grid: &Grid, level: u32, index: [usize; 2]) -> Result<Self> {
        let cube = Self { level, index };
        Cube::from(cube).validate(grid)?;
        Ok(cube)
    }

    pub fn side_cells(&self, grid: &Grid) -> usize {
        1usize << (grid.depth - self.level)
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        (0.5f64).powi((self.level * grid.dim) as i32)
    }

    pub fn children(&self, grid: &Grid) -> Vec<DyadicCube> {
        if self.level == grid.depth {
            return Vec::new();
        }
        let level = self.level + 1;
        let [i, j] = self.index;
        if grid.dim == 1 {
            vec![
                DyadicCube { level, index: [2 * i, 0] },
                DyadicCube { level, index: [2 * i + 1, 0] },
            ]
        } else {
            let mut out = Vec::with_capacity(4);
            for a in 0..2 {
                for b in 0..2 {
                    out.push(DyadicCube { level, index: [2 * i + a, 2 * j + b] });
                }
            }
            out
        }
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            level: self.level - 1,
            index: [self.index[0] / 2, self.index[1] / 2],
        })
    }

    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        Cube::from(*self).cells(grid)
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(level {}, index [{}, {}])", self.level, self.index[0], self.index[1])
    }
}

/// Translation of a lattice, in thirds of the cube side per axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shift(pub [u8; 2]);

impl Shift {
    pub const ZERO: Shift = Shift([0, 0]);

    pub fn is_zero(&self) -> bool {
        *self == Shift::ZERO
    }

    /// Cell offset of this shift for cubes of `side` cells: `round(t * side / 3)`.
    pub fn offset(&self, axis: usize, side: usize) -> usize {
        (self.0[axis] as usize * side + 1) / 3
    }
}

/// Which cubes a supremum ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    #[default]
    Dyadic,
    /// The `3^d` lattices translated by `{0, 1/3, 2/3}` of the side per axis,
    /// keeping only cubes that lie inside the unit cube.
    Shifted,
}

impl std::str::FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(Lattice::Dyadic),
            "shifted" => Ok(Lattice::Shifted),
            other => Err(Error::Parse(format!("unknown lattice `{other}`"))),
        }
    }
}

/// A cube of one of the (possibly shifted) lattices.
///
/// Field order gives the deterministic tie-break used by every supremum:
/// lowest level first, then the unshifted lattice, then lexicographic index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub level: u32,
    #[serde(default, skip_serializing_if = "Shift::is_zero")]
    pub shift: Shift,
    pub index: [usize; 2],
}

impl From<DyadicCube> for Cube {
    fn from(c: DyadicCube) -> Self {
        Cube { level: c.level, shift: Shift::ZERO, index: c.index }
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shift.is_zero() {
            write!(f, "(level {}, index [{}, {}])", self.level, self.index[0], self.index[1])
        } else {
            write!(
                f,
                "(level {}, shift [{}/3, {}/3], index [{}, {}])",
                self.level, self.shift.0[0], self.shift.0[1], self.index[0], self.index[1]
            )
        }
    }
}

impl Cube {
    pub fn as_dyadic(&self) -> Option<DyadicCube> {
        self.shift.is_zero().then_some(DyadicCube { level: self.level, index: self.index })
    }

    pub fn side_cells(&self, grid: &Grid) -> usize {
        1usize << (grid.depth - self.level)
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        (0.5f64).powi((self.level * grid.dim) as i32)
    }

    /// Lower corner in cell coordinates.
    pub fn origin(&self, grid: &Grid) -> [usize; 2] {
        let side = self.side_cells(grid);
        let mut o = [0, 0];
        for (axis, slot) in o.iter_mut().enumerate().take(grid.dim as usize) {
            *slot = self.shift.offset(axis, side) + self.index[axis] * side;
        }
        o
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let bad = || Error::CubeOutOfGrid(self.to_string());
        if self.level > grid.depth {
            return Err(bad());
        }
        if grid.dim == 1 && (self.index[1] != 0 || self.shift.0[1] != 0) {
            return Err(bad());
        }
        if self.shift.0.iter().any(|&t| t > 2) {
            return Err(bad());
        }
        let side = self.side_cells(grid);
        let o = self.origin(grid);
        for &c in o.iter().take(grid.dim as usize) {
            if c + side > grid.side() {
                return Err(bad());
            }
        }
        Ok(())
    }

    /// Half-open cell box `[lo, hi)` per axis.
    pub fn cell_box(&self, grid: &Grid) -> ([usize; 2], [usize; 2]) {
        let side = self.side_cells(grid);
        let lo = self.origin(grid);
        let mut hi = [1, 1];
        for axis in 0..grid.dim as usize {
            hi[axis] = lo[axis] + side;
        }
        (lo, hi)
    }

    pub fn contains_cell(&self, grid: &Grid, cell: usize) -> bool {
        let (lo, hi) = self.cell_box(grid);
        let c = grid.cell_coords(cell);
        (0..grid.dim as usize).all(|a| lo[a] <= c[a] && c[a] < hi[a])
    }

    /// Whether `other` lies inside `self`.
    pub fn contains(&self, grid: &Grid, other: &Cube) -> bool {
        let (lo, hi) = self.cell_box(grid);
        let (olo, ohi) = other.cell_box(grid);
        (0..grid.dim as usize).all(|a| lo[a] <= olo[a] && ohi[a] <= hi[a])
    }

    pub fn intersects(&self, grid: &Grid, other: &Cube) -> bool {
        let (lo, hi) = self.cell_box(grid);
        let (olo, ohi) = other.cell_box(grid);
        (0..grid.dim as usize).all(|a| lo[a] < ohi[a] && olo[a] < hi[a])
    }

    /// Cell indices of the cube, row by row.
    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        let (lo, hi) = self.cell_box(grid);
        let mut out = Vec::with_capacity((hi[0] - lo[0]) * (hi[1] - lo[1]));
        for y in lo[1]..hi[1] {
            for x in lo[0]..hi[0] {
                out.push(grid.cell_index([x, y]));
            }
        }
        out
    }

    /// Sum of `values` over the cube, accumulated row by row.
    pub fn sum(&self, grid: &Grid, values: &[f64]) -> f64 {
        let (lo, hi) = self.cell_box(grid);
        let mut total = 0.0;
        for y in lo[1]..hi[1] {
            let row = grid.cell_index([0, y]);
            total += values[row + lo[0]..row + hi[0]].iter().sum::<f64>();
        }
        total
    }

    pub fn cell_count(&self, grid: &Grid) -> usize {
        self.side_cells(grid).pow(grid.dim)
    }
}

/// All cubes of the standard dyadic lattice, levels `0..=L`, each exactly once,
/// ordered by level and then lexicographically by index.
pub fn enumerate_cubes(grid: &Grid) -> Vec<DyadicCube> {
    let mut out = Vec::with_capacity(grid.cube_count());
    for level in 0..=grid.depth {
        let m = 1usize << level;
        if grid.dim == 1 {
            out.extend((0..m).map(|i| DyadicCube { level, index: [i, 0] }));
        } else {
            for i in 0..m {
                out.extend((0..m).map(|j| DyadicCube { level, index: [i, j] }));
            }
        }
    }
    out
}

/// The `3^d` lattice shifts, the unshifted one first.
pub fn shifted_lattices(grid: &Grid) -> Vec<Shift> {
    let mut out = Vec::new();
    if grid.dim == 1 {
        for t in 0..3 {
            out.push(Shift([t, 0]));
        }
    } else {
        for t0 in 0..3 {
            for t1 in 0..3 {
                out.push(Shift([t0, t1]));
            }
        }
    }
    out
}

pub fn lattice_shifts(grid: &Grid, lattice: Lattice) -> Vec<Shift> {
    match lattice {
        Lattice::Dyadic => vec![Shift::ZERO],
        Lattice::Shifted => shifted_lattices(grid),
    }
}

/// Cubes of one translated lattice that fit inside the unit cube.
pub fn lattice_cubes(grid: &Grid, shift: Shift) -> Vec<Cube> {
    if shift.is_zero() {
        return enumerate_cubes(grid).into_iter().map(Cube::from).collect();
    }
    let n = grid.side();
    let mut out = Vec::new();
    for level in 0..=grid.depth {
        let side = 1usize << (grid.depth - level);
        let count = |axis: usize| (n - shift.offset(axis, side).min(n)) / side;
        let c0 = count(0);
        let c1 = if grid.dim == 1 { 1 } else { count(1) };
        for i in 0..c0 {
            for j in 0..c1 {
                out.push(Cube { level, shift, index: [i, j] });
            }
        }
    }
    out
}

pub fn all_cubes(grid: &Grid, lattice: Lattice) -> Vec<Cube> {
    lattice_shifts(grid, lattice)
        .into_iter()
        .flat_map(|s| lattice_cubes(grid, s))
        .collect()
}

/// Bottom-up cube sums over the dyadic lattice. Each parent sum adds its
/// children in a fixed order, so results are bit-stable.
#[derive(Clone, Debug)]
pub struct DyadicPyramid {
    grid: Grid,
    /// `sums[k]` holds level-`k` sums at flat index `i + 2^k * j`.
    sums: Vec<Vec<f64>>,
}

impl DyadicPyramid {
    pub fn new(grid: &Grid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.cell_count());
        let depth = grid.depth as usize;
        let mut sums = vec![Vec::new(); depth + 1];
        sums[depth] = values.to_vec();
        for k in (0..depth).rev() {
            let m = 1usize << k;
            let fine = &sums[k + 1];
            let level: Vec<f64> = if grid.dim == 1 {
                (0..m).map(|i| fine[2 * i] + fine[2 * i + 1]).collect()
            } else {
                let mf = 2 * m;
                let mut v = vec![0.0; m * m];
                for j in 0..m {
                    for i in 0..m {
                        v[i + m * j] = fine[2 * i + mf * 2 * j]
                            + fine[2 * i + 1 + mf * 2 * j]
                            + fine[2 * i + mf * (2 * j + 1)]
                            + fine[2 * i + 1 + mf * (2 * j + 1)];
                    }
                }
                v
            };
            sums[k] = level;
        }
        Self { grid: *grid, sums }
    }

    pub fn flat(level: u32, index: [usize; 2]) -> usize {
        index[0] + (1usize << level) * index[1]
    }

    pub fn sum(&self, cube: &DyadicCube) -> f64 {
        self.sums[cube.level as usize][Self::flat(cube.level, cube.index)]
    }

    pub fn mean(&self, cube: &DyadicCube) -> f64 {
        self.sum(cube) / cube.cell_count_f64(&self.grid)
    }

    /// Level-`k` means, flat-indexed like the sums.
    pub fn level_means(&self, level: u32) -> Vec<f64> {
        let count = (1usize << ((self.grid.depth - level) * self.grid.dim)) as f64;
        self.sums[level as usize].iter().map(|s| s / count).collect()
    }
}

impl DyadicCube {
    fn cell_count_f64(&self, grid: &Grid) -> f64 {
        (1usize << ((grid.depth - self.level) * grid.dim)) as f64
    }
}

/// Means of `values` over every cube of `lattice`, in [`all_cubes`] order.
pub fn lattice_means(grid: &Grid, lattice: Lattice, values: &[f64]) -> Vec<(Cube, f64)> {
    let mut out = Vec::new();
    for shift in lattice_shifts(grid, lattice) {
        if shift.is_zero() {
            let pyr = DyadicPyramid::new(grid, values);
            out.extend(enumerate_cubes(grid).into_iter().map(|c| (Cube::from(c), pyr.mean(&c))));
        } else {
            for c in lattice_cubes(grid, shift) {
                let m = c.sum(grid, values) / c.cell_count(grid) as f64;
                out.push((c, m));
            }
        }
    }
    out
}

/// Real function sampled on the cells of a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridFunctionFile {
    d: u32,
    #[serde(rename = "L")]
    depth: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::GridMismatch(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { cell });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.cell_count()] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|c| f(grid.cell_center(c))).collect();
        Self::new(grid, values)
    }

    pub fn indicator(grid: Grid, cube: &Cube) -> Self {
        let mut values = vec![0.0; grid.cell_count()];
        for c in cube.cells(&grid) {
            values[c] = 1.0;
        }
        Self { grid, values }
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        self.map(|v| lambda * v)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ |f|` with exact cell quadrature.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Whether `self <= other + tol` at every cell.
    pub fn le_within(&self, other: &Self, tol: f64) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| *a <= *b + tol)
    }

    pub fn to_json(&self) -> String {
        let file = GridFunctionFile {
            d: self.grid.dim,
            depth: self.grid.depth,
            values: self.values.clone(),
        };
        serde_json::to_string(&file).expect("grid function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GridFunctionFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(Grid::new(file.d, file.depth)?, file.values)
    }

    /// CSV with header `d,L,cell,value` and one row per cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["d", "L", "cell", "value"]).map_err(io)?;
        for (cell, v) in self.values.iter().enumerate() {
            w.write_record(&[
                self.grid.dim.to_string(),
                self.grid.depth.to_string(),
                cell.to_string(),
                format!("{v:e}"),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            d: u32,
            #[serde(rename = "L")]
            depth: u32,
            cell: usize,
            value: f64,
        }
        let mut rdr = csv::Reader::from_reader(input);
        let mut grid = None;
        let mut values = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            let g = Grid::new(row.d, row.depth)?;
            match grid {
                None => {
                    grid = Some(g);
                    values = vec![f64::NAN; g.cell_count()];
                }
                Some(prev) if prev != g => {
                    return Err(Error::Parse("rows disagree on the grid header".into()))
                }
                _ => {}
            }
            if row.cell >= values.len() {
                return Err(Error::Parse(format!("cell {} out of range", row.cell)));
            }
            values[row.cell] = row.value;
        }
        let grid = grid.ok_or_else(|| Error::Parse("empty CSV".into()))?;
        Self::new(grid, values)
    }
}

/// The `r`-average `(|Q|^{-1} ∫_Q |f|^r)^{1/r}`.
pub fn average(f: &GridFunction, cube: &Cube, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("{r} is not positive")));
    }
    cube.validate(f.grid())?;
    let grid = f.grid();
    let (lo, hi) = cube.cell_box(grid);
    let mut total = 0.0;
    for y in lo[1]..hi[1] {
        for x in lo[0]..hi[0] {
            let v = f.get(grid.cell_index([x, y])).abs();
            total += if r == 1.0 { v } else { v.powf(r) };
        }
    }
    let mean = total / cube.cell_count(grid) as f64;
    Ok(if r == 1.0 { mean } else { mean.powf(1.0 / r) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(d: u32, l: u32) -> Grid {
        Grid::new(d, l).unwrap()
    }

    #[test]
    fn cube_counts() {
        assert_eq!(enumerate_cubes(&g(1, 1)).len(), 3);
        assert_eq!(enumerate_cubes(&g(1, 2)).len(), 7);
        assert_eq!(enumerate_cubes(&g(2, 1)).len(), 5);
        assert_eq!(enumerate_cubes(&g(2, 3)).len(), 1 + 4 + 16 + 64);
        let cubes = enumerate_cubes(&g(1, 1));
        assert_eq!(cubes[0], DyadicCube::ROOT);
        assert_eq!(cubes[1].cells(&g(1, 1)), vec![0]);
        assert_eq!(cubes[2].cells(&g(1, 1)), vec![1]);
    }

    #[test]
    fn cubes_are_distinct_and_tile_each_level() {
        let grid = g(2, 3);
        let cubes = enumerate_cubes(&grid);
        let set: std::collections::HashSet<_> = cubes.iter().collect();
        assert_eq!(set.len(), cubes.len());
        for level in 0..=3 {
            let mut hits = vec![0; grid.cell_count()];
            for c in cubes.iter().filter(|c| c.level == level) {
                for cell in c.cells(&grid) {
                    hits[cell] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 1));
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid::new(3, 2).is_err());
        assert!(Grid::new(1, 0).is_err());
        assert!(Grid::new(1, 17).is_err());
        assert_eq!(g(2, 16).cell_count(), 1 << 32);
    }

    #[test]
    fn shifted_lattice_counts() {
        assert_eq!(shifted_lattices(&g(1, 4)).len(), 3);
        assert_eq!(shifted_lattices(&g(2, 4)).len(), 9);
        let grid = g(2, 3);
        let plain: Vec<Cube> = enumerate_cubes(&grid).into_iter().map(Cube::from).collect();
        assert_eq!(lattice_cubes(&grid, Shift::ZERO), plain);
        for s in shifted_lattices(&grid) {
            for c in lattice_cubes(&grid, s) {
                c.validate(&grid).unwrap();
            }
        }
    }

    #[test]
    fn shifted_cubes_straddle_dyadic_boundaries() {
        let grid = g(1, 3);
        let cubes = lattice_cubes(&grid, Shift([1, 0]));
        // Side-4 cubes offset by round(4/3) = 1 cell.
        let level1: Vec<_> = cubes.iter().filter(|c| c.level == 1).collect();
        assert_eq!(level1.len(), 1);
        assert_eq!(level1[0].cells(&grid), vec![1, 2, 3, 4]);
        assert!(cubes.iter().all(|c| c.level > 0));
    }

    #[test]
    fn averages() {
        let grid = g(1, 1);
        let c = GridFunction::constant(grid, 3.5);
        for cube in all_cubes(&grid, Lattice::Dyadic) {
            for r in [0.5, 1.0, 2.0, 7.0] {
                assert!((average(&c, &cube, r).unwrap() - 3.5).abs() < 1e-14);
            }
        }
        let f = GridFunction::new(grid, vec![1.0, 0.0]).unwrap();
        let root = Cube::from(DyadicCube::ROOT);
        assert_eq!(average(&f, &root, 1.0).unwrap(), 0.5);
        assert!((average(&f, &root, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(average(&f, &root, 0.0).is_err());
    }

    #[test]
    fn pyramid_matches_direct_sums() {
        let grid = g(2, 3);
        let values: Vec<f64> = (0..grid.cell_count()).map(|i| (i as f64).sin()).collect();
        let pyr = DyadicPyramid::new(&grid, &values);
        for c in enumerate_cubes(&grid) {
            let direct = Cube::from(c).sum(&grid, &values);
            assert!((pyr.sum(&c) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn serialization() {
        let grid = g(2, 2);
        let f = GridFunction::from_fn(grid, |[x, y]| x - 2.0 * y).unwrap();
        assert_eq!(GridFunction::from_json(&f.to_json()).unwrap(), f);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(GridFunction::read_csv(buf.as_slice()).unwrap(), f);
        assert!(GridFunction::from_json(r#"{"d":1,"L":2,"values":[1,2]}"#).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let grid = g(1, 1);
        assert_eq!(
            GridFunction::new(grid, vec![1.0, f64::NAN]).unwrap_err(),
            Error::NonFinite { cell: 1 }
        );
    }
}
