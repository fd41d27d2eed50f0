//! Hardy–Littlewood maximal operators on the grid.

use crate::error::Result;
use crate::grid::{lattice_cubes, lattice_shifts, Cube, DyadicPyramid, Grid, GridFunction, Lattice, Shift};

/// An operator acting on grid functions, used by the operator-norm estimator.
pub trait GridOperator {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction>;

    fn name(&self) -> String;

    /// `Some(lattice)` when the operator is the maximal operator over that lattice.
    fn maximal_lattice(&self) -> Option<Lattice> {
        None
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl GridOperator for Identity {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        Ok(f.clone())
    }

    fn name(&self) -> String {
        "identity".into()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MaximalOperator {
    pub lattice: Lattice,
}

impl GridOperator for MaximalOperator {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        Ok(maximal(f, self.lattice))
    }

    fn name(&self) -> String {
        format!("maximal[{:?}]", self.lattice).to_lowercase()
    }

    fn maximal_lattice(&self) -> Option<Lattice> {
        Some(self.lattice)
    }
}

/// Top-down running maximum of level means, returned at cell resolution.
fn dyadic_running_max(grid: &Grid, pyr: &DyadicPyramid) -> Vec<f64> {
    let mut run = pyr.level_means(0);
    for level in 1..=grid.depth() {
        let means = pyr.level_means(level);
        let m = 1usize << level;
        let half = m / 2;
        let next: Vec<f64> = if grid.dim() == 1 {
            means.iter().enumerate().map(|(i, &v)| v.max(run[i / 2])).collect()
        } else {
            let mut v = vec![0.0; m * m];
            for j in 0..m {
                for i in 0..m {
                    v[i + m * j] = means[i + m * j].max(run[i / 2 + half * (j / 2)]);
                }
            }
            v
        };
        run = next;
    }
    run
}

/// Raises `out` to the mean of `values` over every cube of a shifted lattice.
fn fold_shifted(grid: &Grid, shift: Shift, values: &[f64], out: &mut [f64]) {
    for cube in lattice_cubes(grid, shift) {
        let mean = cube.sum(grid, values) / cube.cell_count(grid) as f64;
        for cell in cube.cells(grid) {
            if mean > out[cell] {
                out[cell] = mean;
            }
        }
    }
}

/// `Mf(x) = max { <|f|>_{1,Q} : x ∈ Q }` over the cubes of `lattice`.
pub fn maximal(f: &GridFunction, lattice: Lattice) -> GridFunction {
    let grid = *f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let pyr = DyadicPyramid::new(&grid, &abs);
    let mut out = dyadic_running_max(&grid, &pyr);
    for shift in lattice_shifts(&grid, lattice).into_iter().filter(|s| !s.is_zero()) {
        fold_shifted(&grid, shift, &abs, &mut out);
    }
    GridFunction::from_vec_unchecked(grid, out)
}

/// `M^k f`, with `M^0 f = |f|`.
pub fn iterate_maximal(f: &GridFunction, k: usize, lattice: Lattice) -> GridFunction {
    let mut g = f.abs();
    for _ in 0..k {
        g = maximal(&g, lattice);
    }
    g
}

/// `M_{1,1}(f, g) = sup_Q <f>_{1,Q} <g>_{1,Q} 1_Q`, over the lattice or, when
/// `family` is given, over those cubes only (cells outside every cube get 0).
pub fn bilinear_maximal(
    f: &GridFunction,
    g: &GridFunction,
    lattice: Lattice,
    family: Option<&[Cube]>,
) -> Result<GridFunction> {
    f.check_same_grid(g)?;
    let grid = *f.grid();
    let fa: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let ga: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; grid.cell_count()];
    let mut raise = |cube: &Cube, value: f64| {
        for cell in cube.cells(&grid) {
            if value > out[cell] {
                out[cell] = value;
            }
        }
    };
    match family {
        Some(cubes) => {
            for cube in cubes {
                cube.validate(&grid)?;
                let n = cube.cell_count(&grid) as f64;
                raise(cube, (cube.sum(&grid, &fa) / n) * (cube.sum(&grid, &ga) / n));
            }
        }
        None => {
            for shift in lattice_shifts(&grid, lattice) {
                for cube in lattice_cubes(&grid, shift) {
                    let n = cube.cell_count(&grid) as f64;
                    raise(&cube, (cube.sum(&grid, &fa) / n) * (cube.sum(&grid, &ga) / n));
                }
            }
        }
    }
    Ok(GridFunction::from_vec_unchecked(grid, out))
}
