//! Rubio de Francia iteration, reverse Hölder scans and Buckley's bound.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{lattice_means, Cube, GridFunction, Lattice};
use crate::maximal::maximal;
use crate::spaces::SpaceSpec;
use crate::weights::{argmax, conjugate, Weight};

/// Dimensional constant in `‖M‖ <= C_d p' [w]_p^{p'}`: 8 in one dimension,
/// 32 in two. Neither is sharp.
pub fn buckley_constant(dim: u32) -> f64 {
    if dim == 1 {
        8.0
    } else {
        32.0
    }
}

/// Default reverse Hölder constant `c_d`: 4 in one dimension, 16 in two.
pub fn default_rh_constant(dim: u32) -> f64 {
    if dim == 1 {
        4.0
    } else {
        16.0
    }
}

/// `C_d p' ap^{p'}`.
pub fn buckley_bound(p: f64, ap: f64, c_d: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} is not in (1, ∞)")));
    }
    if !(ap >= 1.0) {
        return Err(invalid("ap", format!("{ap} < 1")));
    }
    let pp = conjugate(p);
    Ok(c_d * pp * ap.powf(pp))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RdfWeight {
    pub weight: GridFunction,
    pub r: f64,
    pub bound: f64,
    pub depth: usize,
    /// `max |f|^{1/r} · 2^{-K}`.
    pub tail: f64,
    /// Set when `bound` is below a supplied lower estimate of `‖M‖`.
    pub bound_below_estimate: bool,
}

/// `w = Σ_{k=0}^{K} M^k(|f|^{1/r}) / (2B)^k`.
pub fn rdf_weight(f: &GridFunction, r: f64, bound: f64, depth: usize, lattice: Lattice, lower_estimate: Option<f64>) -> Result<RdfWeight> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("r", format!("{r} is not a positive number")));
    }
    if !(bound >= 1.0 && bound.is_finite()) {
        return Err(invalid("B", format!("{bound} < 1")));
    }
    if depth < 1 {
        return Err(invalid("K", "must be at least 1"));
    }
    let h = f.map(|v| v.abs().powf(1.0 / r));
    let mut term = h.clone();
    let mut w = h.values().to_vec();
    let mut factor = 1.0;
    for _ in 0..depth {
        term = maximal(&term, lattice);
        factor /= 2.0 * bound;
        for (o, t) in w.iter_mut().zip(term.values()) {
            *o += factor * t;
        }
    }
    let tail = h.max() * 0.5f64.powi(depth as i32);
    Ok(RdfWeight {
        weight: GridFunction::new(*f.grid(), w)?,
        r,
        bound,
        depth,
        tail,
        bound_below_estimate: lower_estimate.is_some_and(|m| bound < m),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RdfCheck {
    /// `min (w - |f|^{1/r})`, never negative.
    pub majorant_slack: f64,
    /// `max (M w - 2B w - tail)`, at most `0` when the bound holds.
    pub a1_excess: f64,
    pub a1_holds: bool,
    /// `(‖w‖_X, 2 ‖f‖_{X^r}^{1/r})` when a space is supplied.
    pub norm_check: Option<(f64, f64)>,
}

/// Evaluates the three defining properties of the iteration.
pub fn check_rdf(rdf: &RdfWeight, f: &GridFunction, lattice: Lattice, space: Option<&SpaceSpec>) -> Result<RdfCheck> {
    let h = f.map(|v| v.abs().powf(1.0 / rdf.r));
    let w = &rdf.weight;
    let majorant_slack = w.values().iter().zip(h.values()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    let mw = maximal(w, lattice);
    let a1_excess = mw
        .values()
        .iter()
        .zip(w.values())
        .map(|(m, v)| m - 2.0 * rdf.bound * v - rdf.tail)
        .fold(f64::NEG_INFINITY, f64::max);
    let norm_check = match space {
        None => None,
        Some(x) => {
            let lhs = x.norm(w)?;
            let xr = x.concavify(&crate::exponent::rational_from_f64(rdf.r)?)?;
            Some((lhs, 2.0 * xr.norm(f)?.powf(1.0 / rdf.r)))
        }
    };
    Ok(RdfCheck { majorant_slack, a1_excess, a1_holds: a1_excess <= 0.0, norm_check })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReverseHolder {
    pub pass: bool,
    pub worst_ratio: f64,
    pub worst_cube: Cube,
}

/// `max_Q <w>_{r,Q} / <w>_{1,Q}` over the lattice, passing when at most 2.
pub fn reverse_holder_check(w: &Weight, r: f64, lattice: Lattice) -> Result<ReverseHolder> {
    if !(r > 1.0) {
        return Err(invalid("r", format!("{r} <= 1")));
    }
    let grid = *w.grid();
    let top = w.function().max();
    let scaled: Vec<f64> = w.values().iter().map(|v| v / top).collect();
    let powered: Vec<f64> = if r.is_infinite() {
        scaled.clone()
    } else {
        scaled.iter().map(|v| v.powf(r)).collect()
    };
    let means = lattice_means(&grid, lattice, &scaled);
    let ratios = if r.is_infinite() {
        means.into_iter().map(|(q, m)| (q, q.cells(&grid).iter().map(|&c| scaled[c]).fold(0.0, f64::max) / m)).collect::<Vec<_>>()
    } else {
        let powered_means = lattice_means(&grid, lattice, &powered);
        means
            .into_iter()
            .zip(powered_means)
            .map(|((q, m), (_, pm))| (q, pm.powf(1.0 / r) / m))
            .collect()
    };
    let sup = argmax(ratios).ok_or_else(|| Error::InvalidGrid("no cubes".into()))?;
    Ok(ReverseHolder { pass: sup.value <= 2.0, worst_ratio: sup.value, worst_cube: sup.cube })
}

/// `r` with `r' = 2 c_d B`.
pub fn rh_exponent(c_d: f64, bound: f64) -> f64 {
    let rp = 2.0 * c_d * bound;
    if rp <= 1.0 {
        f64::INFINITY
    } else {
        rp / (rp - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmallestConstant {
    /// Smallest `c_d` (to relative `1e-9`) for which the reverse Hölder
    /// inequality at `r' = 2 c_d B` passes on this weight.
    pub c_d: f64,
    pub r: f64,
    pub check: ReverseHolder,
}

/// Bisects on `c_d`; larger `c_d` means smaller `r`, hence smaller ratios.
pub fn smallest_rh_constant(w: &Weight, bound: f64, lattice: Lattice) -> Result<SmallestConstant> {
    let passes = |c: f64| -> Result<ReverseHolder> { reverse_holder_check(w, rh_exponent(c, bound), lattice) };
    // At c_d = 1/(2B) the exponent r is infinite.
    let edge = (1.0 + 1e-12) / (2.0 * bound);
    let edge_check = passes(edge)?;
    if edge_check.pass {
        return Ok(SmallestConstant { c_d: edge, r: rh_exponent(edge, bound), check: edge_check });
    }
    let mut lo = edge;
    let mut hi = 2.0 * edge;
    let mut hi_check = passes(hi)?;
    while !hi_check.pass {
        lo = hi;
        hi *= 2.0;
        hi_check = passes(hi)?;
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        let check = passes(mid)?;
        if check.pass {
            hi = mid;
            hi_check = check;
        } else {
            lo = mid;
        }
    }
    Ok(SmallestConstant { c_d: hi, r: rh_exponent(hi, bound), check: hi_check })
}
