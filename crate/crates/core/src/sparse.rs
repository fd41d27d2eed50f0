//! Sparse families, the Calderón–Zygmund stopping construction, and the
//! sparse averaging operator `T_S f = Σ_{Q∈S} <f>_{1,Q} 1_Q`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Cube, DyadicCube, DyadicPyramid, Grid, GridFunction};
use crate::maximal::GridOperator;

/// Sparseness parameter: `|E_Q| >= η |Q|`.
pub const SPARSENESS: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCube {
    #[serde(flatten)]
    pub cube: Cube,
    /// Cells of the designated subset `E_Q`.
    #[serde(rename = "E_cells")]
    pub e_cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub grid: Grid,
    pub cubes: Vec<SparseCube>,
}

impl SparseFamily {
    pub fn cubes(&self) -> impl Iterator<Item = &Cube> {
        self.cubes.iter().map(|c| &c.cube)
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains(&self, cube: &Cube) -> bool {
        self.cubes.iter().any(|c| &c.cube == cube)
    }

    /// Designates `E_Q` greedily from the finest cubes up: each cube takes
    /// the cells of `Q` no finer cube has claimed.
    pub fn greedy(grid: Grid, mut cubes: Vec<Cube>) -> Result<Self> {
        for c in &cubes {
            c.validate(&grid)?;
        }
        cubes.sort_by(|a, b| b.level.cmp(&a.level).then(a.cmp(b)));
        let mut taken = vec![false; grid.cell_count()];
        let mut out: Vec<SparseCube> = cubes
            .into_iter()
            .map(|cube| {
                let e_cells: Vec<usize> = cube.cells(&grid).into_iter().filter(|&c| !taken[c]).collect();
                for &c in &e_cells {
                    taken[c] = true;
                }
                SparseCube { cube, e_cells }
            })
            .collect();
        out.sort_by_key(|c| c.cube);
        Ok(Self { grid, cubes: out })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sparse family serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Calderón–Zygmund stopping family of a nonnegative `f` with threshold `a`.
///
/// From each stopping cube `Q` select the maximal strict dyadic descendants
/// `Q'` with `<f>_{Q'} > a <f>_Q` and recurse into them; `E_Q` is `Q` minus its
/// selected descendants. Since those have total measure `< |Q| / a`, the
/// family is `1/2`-sparse for `a >= 2`, and `M_dyadic f <= a T_S f`.
pub fn cz_sparse_family(f: &GridFunction, a: f64) -> Result<SparseFamily> {
    if !(a >= 2.0) || !a.is_finite() {
        return Err(invalid("a", format!("{a} < 2 breaks the sparseness guarantee")));
    }
    if !f.is_nonnegative() {
        return Err(invalid("f", "must be nonnegative"));
    }
    if f.is_zero() {
        return Err(invalid("f", "is identically zero"));
    }
    let grid = *f.grid();
    let pyr = DyadicPyramid::new(&grid, f.values());
    let mut family = Vec::new();
    let mut stack = vec![DyadicCube::ROOT];
    while let Some(q) = stack.pop() {
        let threshold = a * pyr.mean(&q);
        let mut selected = Vec::new();
        let mut frontier = q.children(&grid);
        while let Some(p) = frontier.pop() {
            if pyr.mean(&p) > threshold {
                selected.push(p);
            } else {
                frontier.extend(p.children(&grid));
            }
        }
        let mut in_selected = std::collections::HashSet::new();
        for s in &selected {
            in_selected.extend(s.cells(&grid));
        }
        let e_cells = q.cells(&grid).into_iter().filter(|c| !in_selected.contains(c)).collect();
        family.push(SparseCube { cube: Cube::from(q), e_cells });
        stack.extend(selected);
    }
    family.sort_by_key(|c| c.cube);
    Ok(SparseFamily { grid, cubes: family })
}

/// `T_S f = Σ_{Q∈S} <|f|>_{1,Q} 1_Q`.
pub fn sparse_operator(family: &SparseFamily, f: &GridFunction) -> Result<GridFunction> {
    if *f.grid() != family.grid {
        return Err(Error::GridMismatch("family and function grids differ".into()));
    }
    let grid = family.grid;
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; grid.cell_count()];
    for sc in &family.cubes {
        let cube = &sc.cube;
        cube.validate(&grid)?;
        let avg = cube.sum(&grid, &abs) / cube.cell_count(&grid) as f64;
        for c in cube.cells(&grid) {
            out[c] += avg;
        }
    }
    Ok(GridFunction::from_vec_unchecked(grid, out))
}

impl GridOperator for SparseFamily {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        sparse_operator(self, f)
    }

    fn name(&self) -> String {
        format!("sparse[{} cubes]", self.cubes.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SparseViolation {
    /// `E_Q` has a cell outside `Q`.
    NotContained { cube: Cube, cell: usize },
    /// `|E_Q| < |Q| / 2`.
    TooSmall { cube: Cube, e_measure: f64, cube_measure: f64 },
    /// A cell belongs to two of the sets.
    Overlap { cube: Cube, other: Cube, cell: usize },
}

impl SparseViolation {
    pub fn cube(&self) -> Cube {
        match self {
            SparseViolation::NotContained { cube, .. }
            | SparseViolation::TooSmall { cube, .. }
            | SparseViolation::Overlap { cube, .. } => *cube,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseVerdict {
    pub sparse: bool,
    pub violation: Option<SparseViolation>,
}

/// Checks `E_Q ⊆ Q`, `|E_Q| >= |Q|/2` and pairwise disjointness, reporting
/// the first violation in family order. Families whose cubes overlap without
/// one containing the other are rejected with [`Error::NonNested`].
pub fn verify_sparse(family: &SparseFamily) -> Result<SparseVerdict> {
    let grid = family.grid;
    for sc in &family.cubes {
        sc.cube.validate(&grid)?;
    }
    for (i, a) in family.cubes.iter().enumerate() {
        for b in &family.cubes[i + 1..] {
            let (a, b) = (&a.cube, &b.cube);
            if a.intersects(&grid, b) && !a.contains(&grid, b) && !b.contains(&grid, a) {
                return Err(Error::NonNested(a.to_string(), b.to_string()));
            }
        }
    }
    let fail = |v: SparseViolation| Ok(SparseVerdict { sparse: false, violation: Some(v) });
    let mut owner: Vec<Option<Cube>> = vec![None; grid.cell_count()];
    let vol = grid.cell_volume();
    for sc in &family.cubes {
        let cube = sc.cube;
        for &cell in &sc.e_cells {
            if cell >= grid.cell_count() || !cube.contains_cell(&grid, cell) {
                return fail(SparseViolation::NotContained { cube, cell });
            }
        }
        let e_measure = sc.e_cells.len() as f64 * vol;
        let cube_measure = cube.volume(&grid);
        if e_measure < SPARSENESS * cube_measure {
            return fail(SparseViolation::TooSmall { cube, e_measure, cube_measure });
        }
        for &cell in &sc.e_cells {
            if let Some(other) = owner[cell] {
                return fail(SparseViolation::Overlap { cube, other, cell });
            }
            owner[cell] = Some(cube);
        }
    }
    Ok(SparseVerdict { sparse: true, violation: None })
}

/// `Σ_{Q∈S} <f>_{1,Q} <g>_{1,Q} |Q|`, which equals `‖(T_S f) g‖_{L^1}` for `f, g >= 0`.
pub fn sparse_form(family: &SparseFamily, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.check_same_grid(g)?;
    let grid = family.grid;
    let fa: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let ga: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
    Ok(family
        .cubes()
        .map(|c| {
            let n = c.cell_count(&grid) as f64;
            (c.sum(&grid, &fa) / n) * (c.sum(&grid, &ga) / n) * c.volume(&grid)
        })
        .sum())
}
