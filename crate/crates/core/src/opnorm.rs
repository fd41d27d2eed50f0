//! Empirical lower bounds for operator norms on the concrete spaces.
//!
//! Sampling only ever yields lower bounds. An upper bound is attached only
//! when theory supplies one: Buckley's bound for the maximal operator on a
//! weighted Lebesgue space.

use serde::Serialize;

use crate::error::Result;
use crate::extrapolation::rdf::{buckley_bound, buckley_constant};
use crate::grid::{enumerate_cubes, lattice_shifts, Cube, GridFunction, Lattice};
use crate::maximal::GridOperator;
use crate::sampling::Sampler;
use crate::spaces::SpaceSpec;
use crate::weights::{ap_constant, Weight};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestSet {
    /// Indicators of every dyadic cube.
    pub cube_indicators: bool,
    /// Number of seeded random functions, half `|N(0,1)|` and half log-normal.
    pub random: usize,
    /// How many times the best function so far is fed back through the operator.
    pub refeed: usize,
    pub seed: u64,
}

impl Default for TestSet {
    fn default() -> Self {
        Self { cube_indicators: true, random: 32, refeed: 4, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorNormEstimate {
    pub operator: String,
    /// Largest observed `‖Tf‖ / ‖f‖`.
    pub lower: f64,
    /// Description of the function attaining `lower`.
    pub witness: String,
    #[serde(skip)]
    pub witness_function: Option<GridFunction>,
    pub upper: Option<UpperBound>,
    pub tested: usize,
    pub skipped: usize,
}

/// Buckley's bound for the maximal operator over `lattice` on `space`, when
/// `space` is a weighted Lebesgue space with `1 < p < ∞`. For the shifted
/// lattices the pointwise maximum over `3^d` dyadic-type forests costs a
/// factor `3^{d/p}`.
pub fn maximal_upper_bound(space: &SpaceSpec, lattice: Lattice) -> Result<Option<UpperBound>> {
    let Some(p) = space.constant_exponent() else {
        return Ok(None);
    };
    let p = p.to_f64();
    if !(p > 1.0 && p.is_finite()) {
        return Ok(None);
    }
    let grid = *space.grid();
    let w = Weight::new(GridFunction::new(grid, space.weight_values())?)?;
    let c_d = buckley_constant(grid.dim());
    let ap = ap_constant(&w, p, lattice)?.value;
    let base = buckley_bound(p, ap, c_d)?;
    Ok(Some(match lattice {
        Lattice::Dyadic => UpperBound { value: base, source: format!("Buckley: {c_d} p' [w]_p^p' with [w]_p = {ap}") },
        Lattice::Shifted => {
            let forests = lattice_shifts(&grid, lattice).len() as f64;
            UpperBound {
                value: forests.powf(1.0 / p) * base,
                source: format!("Buckley per shifted lattice: {forests}^(1/p) {c_d} p' [w]_p^p' with [w]_p = {ap}"),
            }
        }
    }))
}

struct Tracker<'a> {
    op: &'a dyn GridOperator,
    space: &'a SpaceSpec,
    ratio: f64,
    label: String,
    witness: Option<GridFunction>,
    tested: usize,
    skipped: usize,
}

impl Tracker<'_> {
    /// Records the ratio for `f` and returns `Tf`, or `None` when `‖f‖ = 0`.
    fn consider(&mut self, f: GridFunction, label: String) -> Result<Option<GridFunction>> {
        let nf = self.space.norm(&f)?;
        if nf == 0.0 || !nf.is_finite() {
            self.skipped += 1;
            return Ok(None);
        }
        let tf = self.op.apply(&f)?;
        let ratio = self.space.norm(&tf)? / nf;
        self.tested += 1;
        if ratio > self.ratio {
            self.ratio = ratio;
            self.label = label;
            self.witness = Some(f);
        }
        Ok(Some(tf))
    }
}

/// `sup ‖Tf‖_X / ‖f‖_X` over the test set; functions of zero norm are skipped.
pub fn operator_norm_lower_bound(op: &dyn GridOperator, space: &SpaceSpec, tests: &TestSet) -> Result<OperatorNormEstimate> {
    let grid = *space.grid();
    let mut t = Tracker { op, space, ratio: f64::NEG_INFINITY, label: String::new(), witness: None, tested: 0, skipped: 0 };
    t.consider(GridFunction::constant(grid, 1.0), "constant 1".into())?;
    if tests.cube_indicators {
        for q in enumerate_cubes(&grid) {
            let cube = Cube::from(q);
            t.consider(GridFunction::indicator(grid, &cube), format!("indicator of {cube}"))?;
        }
    }
    let mut sampler = Sampler::new(tests.seed);
    for i in 0..tests.random {
        let f = if i % 2 == 0 { sampler.nonnegative(grid) } else { sampler.lognormal(grid, 1.0).into_function() };
        t.consider(f, format!("random #{i} (seed {})", tests.seed))?;
    }
    if let Some(mut f) = t.witness.clone() {
        let origin = t.label.clone();
        for k in 1..=tests.refeed {
            let Some(tf) = t.consider(f.clone(), format!("{origin}, iterated {} times", k - 1))? else {
                break;
            };
            let scale = tf.max_abs();
            if scale == 0.0 {
                break;
            }
            f = tf.scale(1.0 / scale);
        }
    }
    let upper = match op.maximal_lattice() {
        Some(lattice) => maximal_upper_bound(space, lattice)?,
        None => None,
    };
    Ok(OperatorNormEstimate {
        operator: op.name(),
        lower: t.ratio.max(0.0),
        witness: t.label,
        witness_function: t.witness,
        upper,
        tested: t.tested,
        skipped: t.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;
    use crate::grid::Grid;
    use crate::maximal::{Identity, MaximalOperator};

    #[test]
    fn identity_is_exactly_one() {
        let g = Grid::new(1, 6).unwrap();
        let w = Sampler::new(1).lognormal(g, 1.0);
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(3), Some(&w)).unwrap();
        let est = operator_norm_lower_bound(&Identity, &x, &TestSet::default()).unwrap();
        assert_eq!(est.lower, 1.0);
        assert!(est.upper.is_none());
    }

    #[test]
    fn maximal_on_l2_is_at_least_one_and_below_buckley() {
        let g = Grid::new(1, 8).unwrap();
        let x = SpaceSpec::weighted_lebesgue(g, Exponent::int(2), None).unwrap();
        let op = MaximalOperator { lattice: Lattice::Dyadic };
        let est = operator_norm_lower_bound(&op, &x, &TestSet::default()).unwrap();
        assert!(est.lower >= 1.0);
        let upper = est.upper.unwrap();
        assert_eq!(upper.value, 16.0);
        assert!(est.lower <= upper.value);
    }
}
