//! Dispatch from a config to one library operation, plus invariant checks.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use dyadic_lab::compactness::{commutator_matrix, discretize, refinement_series, SymbolFunction};
use dyadic_lab::exponent::{parse_rational, Rational};
use dyadic_lab::extrapolation::{
    check_rdf, choose_rs_for_l2, default_rh_constant, limited_range_plan, rdf_weight, reverse_holder_check, rh_exponent,
    self_improvement_r0, smallest_rh_constant,
};
use dyadic_lab::opnorm::{maximal_upper_bound, operator_norm_lower_bound, TestSet};
use dyadic_lab::weights::{conjugate, weight_constants};
use dyadic_lab::{
    ap_constant, cz_sparse_family, maximal, sparse_operator, verify_sparse, Exponent, Grid, GridFunction, Lattice,
    MaximalOperator, Sampler, SpaceKind, SpaceSpec, Weight,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance;
use crate::config::{Experiment, ExperimentConfig, FunctionSource, SpaceConfig, SymbolSource, Tolerances, WeightSource};
use crate::error::{RunError, RunResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub experiment: String,
    pub outputs: Value,
    pub invariants: Vec<InvariantCheck>,
    pub passed: bool,
    /// Wall-clock seconds. Not covered by the determinism contract.
    pub runtime_seconds: f64,
    /// Per-stage wall-clock seconds. Not covered by the determinism contract.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timings: BTreeMap<String, f64>,
}

impl ResultRecord {
    /// The record with all wall-clock fields cleared.
    pub fn without_timings(&self) -> Self {
        Self { runtime_seconds: 0.0, timings: BTreeMap::new(), ..self.clone() }
    }
}

/// Reads a grid function from JSON (`{d, L, values}`) or CSV (`d,L,cell,value`).
pub fn read_grid_function(path: &Path) -> RunResult<GridFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(path.display().to_string(), e.to_string()))?;
    let f = if text.trim_start().starts_with('{') {
        GridFunction::from_json(&text)?
    } else {
        GridFunction::read_csv(text.as_bytes())?
    };
    Ok(f)
}

struct Ctx<'a> {
    grid: Grid,
    lattice: Lattice,
    seed: u64,
    sampler: Sampler,
    tol: &'a Tolerances,
    checks: Vec<InvariantCheck>,
    timings: BTreeMap<String, f64>,
}

impl Ctx<'_> {
    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(InvariantCheck { name: name.into(), pass, detail: detail.into() });
    }

    fn load(&self, path: &Path, grid: Grid, field: &str) -> RunResult<GridFunction> {
        let f = read_grid_function(path)?;
        if *f.grid() != grid {
            return Err(RunError::field(
                field,
                format!("{} holds d = {}, L = {} but the run uses d = {}, L = {}", path.display(), f.grid().dim(), f.grid().depth(), grid.dim(), grid.depth()),
            ));
        }
        Ok(f)
    }

    fn function_on(&mut self, src: &FunctionSource, grid: Grid, field: &str) -> RunResult<GridFunction> {
        Ok(match src {
            FunctionSource::Signed => self.sampler.signed(grid),
            FunctionSource::Nonnegative => self.sampler.nonnegative(grid),
            FunctionSource::LogNormal { sigma } => self.sampler.lognormal(grid, *sigma).into_function(),
            FunctionSource::Constant { value } => GridFunction::new(grid, vec![*value; grid.cell_count()])?,
            FunctionSource::File { path } => self.load(path, grid, field)?,
        })
    }

    fn function(&mut self, src: &FunctionSource, field: &str) -> RunResult<GridFunction> {
        self.function_on(src, self.grid, field)
    }

    fn weight_on(&mut self, src: &WeightSource, grid: Grid, field: &str) -> RunResult<Weight> {
        let w = match src {
            WeightSource::Ones => Weight::constant(grid, 1.0)?,
            WeightSource::LogNormal { sigma } => self.sampler.lognormal(grid, *sigma),
            WeightSource::Power { alpha, center } => dyadic_lab::power_weight(grid, *alpha, *center)?,
            WeightSource::File { path } => Weight::new(self.load(path, grid, field)?)?,
        };
        Ok(w)
    }

    fn weight(&mut self, src: &WeightSource, field: &str) -> RunResult<Weight> {
        self.weight_on(src, self.grid, field)
    }

    fn space(&mut self, cfg: &SpaceConfig) -> RunResult<SpaceSpec> {
        Ok(match cfg {
            SpaceConfig::Weighted { p, weight } => {
                let w = weight.as_ref().map(|s| self.weight(s, "space.weight")).transpose()?;
                SpaceSpec::weighted_lebesgue(self.grid, p.clone(), w.as_ref())?
            }
            SpaceConfig::Variable { p, weight } => {
                let p = self.function(p, "space.p")?;
                let w = weight.as_ref().map(|s| self.weight(s, "space.weight")).transpose()?;
                SpaceSpec::variable_lebesgue(&p, w.as_ref())?
            }
        })
    }

    fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tol.relative * a.abs().max(b.abs())
    }
}

fn rational(text: &str, field: &str) -> RunResult<Rational> {
    parse_rational(text).map_err(|e| RunError::field(field, e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output serializes")
}

/// Runs one experiment. The record passes iff every declared invariant holds.
pub fn run(config: &ExperimentConfig) -> RunResult<ResultRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut ctx = Ctx {
        grid: config.grid.grid()?,
        lattice: config.lattice,
        seed: config.seed,
        sampler: Sampler::new(config.seed),
        tol: &config.tolerances,
        checks: Vec::new(),
        timings: BTreeMap::new(),
    };
    let outputs = match &config.experiment {
        Experiment::Weights { weight, p, r, s } => weights(&mut ctx, weight, *p, *r, *s)?,
        Experiment::Maximal { f, space } => maximal_experiment(&mut ctx, f, space.as_ref())?,
        Experiment::Sparse { f, a } => sparse(&mut ctx, f, *a)?,
        Experiment::Norm { space, f } => norm(&mut ctx, space, f)?,
        Experiment::Rescale { space, r, s, f } => rescale(&mut ctx, space, r, s, f.as_ref())?,
        Experiment::Rdf { f, space, r, depth, bound, c_d } => rdf(&mut ctx, f, space, *r, *depth, *bound, *c_d)?,
        Experiment::Selfimprove { bound, r_star, c_d, s0 } => selfimprove(&mut ctx, bound, r_star, c_d, s0.as_ref())?,
        Experiment::Lrplan { r, s, p1, epsilon } => lrplan(&mut ctx, r, s, p1, epsilon.as_deref())?,
        Experiment::ProbeCompactness { kernel, symbol, weight, depths, tails } => {
            probe(&mut ctx, kernel, symbol, weight.as_ref(), depths, tails)?
        }
        Experiment::Acceptance => acceptance_experiment(&mut ctx)?,
    };
    let passed = ctx.checks.iter().all(|c| c.pass);
    Ok(ResultRecord {
        config_hash: config.hash(),
        experiment: config.experiment.kind().to_string(),
        outputs,
        invariants: ctx.checks,
        passed,
        runtime_seconds: start.elapsed().as_secs_f64(),
        timings: ctx.timings,
    })
}

fn weights(ctx: &mut Ctx, src: &WeightSource, p: f64, r: Option<f64>, s: Option<f64>) -> RunResult<Value> {
    let w = ctx.weight(src, "experiment.weight")?;
    let limited = match (r, s) {
        (None, None) => None,
        (Some(r), Some(s)) => Some((r, s)),
        _ => return Err(RunError::field("experiment", "r and s must be given together")),
    };
    let c = weight_constants(&w, p, ctx.lattice, limited)?;
    let dual = ap_constant(&w.inverse(), conjugate(p), ctx.lattice)?.value;
    ctx.check("ap >= 1", c.ap.value >= 1.0 - ctx.tol.pointwise, format!("[w]_p = {}", c.ap.value));
    ctx.check("ainf >= 1", c.ainf.value >= 1.0 - ctx.tol.pointwise, format!("A_inf = {}", c.ainf.value));
    ctx.check("duality", ctx.close(c.ap.value, dual), format!("[w]_p = {}, [w^-1]_p' = {dual}", c.ap.value));
    if let Some(l) = &c.limited {
        ctx.check("limited >= 1", l.value >= 1.0 - ctx.tol.pointwise, format!("[w]_p,(r,s) = {}", l.value));
    }
    Ok(json!({
        "p": p,
        "ap": c.ap.value,
        "ainf": c.ainf.value,
        "limited": c.limited.as_ref().map(|l| l.value),
        "worst_cubes": {
            "ap": c.ap.cube,
            "ainf": c.ainf.cube,
            "limited": c.limited.as_ref().map(|l| l.cube),
        },
    }))
}

fn maximal_experiment(ctx: &mut Ctx, src: &FunctionSource, space: Option<&SpaceConfig>) -> RunResult<Value> {
    let f = ctx.function(src, "experiment.f")?;
    let mf = maximal(&f, ctx.lattice);
    ctx.check("Mf >= |f|", f.abs().le_within(&mf, ctx.tol.pointwise), "pointwise");
    let estimate = match space {
        None => None,
        Some(cfg) => {
            let x = ctx.space(cfg)?;
            let tests = TestSet { seed: ctx.seed, ..TestSet::default() };
            let est = operator_norm_lower_bound(&MaximalOperator { lattice: ctx.lattice }, &x, &tests)?;
            if let Some(upper) = &est.upper {
                ctx.check("lower <= upper", est.lower <= upper.value, format!("{} <= {}", est.lower, upper.value));
            }
            Some(est)
        }
    };
    Ok(json!({ "mf": mf.values(), "max": mf.max(), "operator_norm": estimate }))
}

fn sparse(ctx: &mut Ctx, src: &FunctionSource, a: f64) -> RunResult<Value> {
    let f = ctx.function(src, "experiment.f")?;
    let family = cz_sparse_family(&f, a)?;
    let verdict = verify_sparse(&family)?;
    let t = sparse_operator(&family, &f)?;
    let mf = maximal(&f, Lattice::Dyadic);
    let dominated = mf.le_within(&t.scale(a), ctx.tol.pointwise);
    ctx.check("sparse", verdict.sparse, format!("{:?}", verdict.violation));
    ctx.check("Mf <= a T_S f", dominated, "pointwise");
    Ok(json!({ "cubes": family.len(), "verdict": verdict, "family": family, "sparse_operator": t.values() }))
}

fn norm(ctx: &mut Ctx, cfg: &SpaceConfig, src: &FunctionSource) -> RunResult<Value> {
    let x = ctx.space(cfg)?;
    let f = ctx.function(src, "experiment.f")?;
    let n = x.norm(&f)?;
    let modular = if n > 0.0 && n.is_finite() { Some(x.modular(&f.scale(1.0 / n))?) } else { None };
    if x.kind() == SpaceKind::VariableLebesgue {
        if let Some(m) = modular {
            ctx.check("modular(f/|f|) = 1", (m - 1.0).abs() <= ctx.tol.relative, format!("{m}"));
        }
    }
    let doubled = x.norm(&f.scale(2.0))?;
    ctx.check("homogeneity", ctx.close(doubled, 2.0 * n), format!("|2f| = {doubled}, 2|f| = {}", 2.0 * n));
    Ok(json!({ "norm": n, "kind": x.kind(), "trace": { "space": x.describe(), "modular_at_unit": modular } }))
}

fn rescale(ctx: &mut Ctx, cfg: &SpaceConfig, r: &Exponent, s: &Exponent, f: Option<&FunctionSource>) -> RunResult<Value> {
    let x = ctx.space(cfg)?;
    let result = x.rescale(r, s)?;
    let replayed = result.replay(&x)?;
    ctx.check("replay reproduces result", replayed == result.spec, "symbolic equality");
    let f_norm = match f {
        None => None,
        Some(src) => {
            let f = ctx.function(src, "experiment.f")?;
            Some(result.spec.norm(&f)?)
        }
    };
    Ok(json!({
        "input": x.describe(),
        "result": result.spec.describe(),
        "trace": result.trace,
        "norm": f_norm,
    }))
}

#[allow(clippy::too_many_arguments)]
fn rdf(
    ctx: &mut Ctx,
    src: &FunctionSource,
    cfg: &SpaceConfig,
    r: f64,
    depth: usize,
    bound: Option<f64>,
    c_d: Option<f64>,
) -> RunResult<Value> {
    let f = ctx.function(src, "experiment.f")?;
    let x = ctx.space(cfg)?;
    let (bound, source, lower) = match bound {
        Some(b) => (b, "config".to_string(), None),
        None => match maximal_upper_bound(&x, ctx.lattice)? {
            Some(u) => (u.value, u.source, None),
            None => {
                let tests = TestSet { seed: ctx.seed, ..TestSet::default() };
                let est = operator_norm_lower_bound(&MaximalOperator { lattice: ctx.lattice }, &x, &tests)?;
                (2.0 * est.lower, "warning: no upper bound known, using twice the empirical lower bound".to_string(), Some(est.lower))
            }
        },
    };
    let c_d = c_d.unwrap_or_else(|| default_rh_constant(ctx.grid.dim()));
    let w = rdf_weight(&f, r, bound, depth, ctx.lattice, lower)?;
    let check = check_rdf(&w, &f, ctx.lattice, Some(&x))?;
    let weight = Weight::new(w.weight.clone())?;
    let rh = reverse_holder_check(&weight, rh_exponent(c_d, bound), ctx.lattice)?;
    let smallest = smallest_rh_constant(&weight, bound, ctx.lattice)?;
    ctx.check("w >= |f|^(1/r)", check.majorant_slack >= 0.0, format!("min slack {}", check.majorant_slack));
    ctx.check("Mw <= 2Bw + tail", check.a1_holds, format!("max excess {}", check.a1_excess));
    if let Some((lhs, rhs)) = check.norm_check {
        ctx.check("|w| <= 2 |f|^(1/r)", lhs <= rhs * (1.0 + ctx.tol.relative), format!("{lhs} <= {rhs}"));
    }
    ctx.check("reverse Hölder at c_d", rh.pass, format!("c_d = {c_d}, worst ratio {}", rh.worst_ratio));
    Ok(json!({
        "bound": bound,
        "bound_source": source,
        "depth": w.depth,
        "tail": w.tail,
        "bound_below_estimate": w.bound_below_estimate,
        "check": check,
        "c_d": c_d,
        "reverse_holder": rh,
        "smallest_c_d": smallest,
        "weight": w.weight.values(),
    }))
}

fn selfimprove(ctx: &mut Ctx, bound: &str, r_star: &Exponent, c_d: &str, s0: Option<&Exponent>) -> RunResult<Value> {
    let b = rational(bound, "experiment.bound")?;
    let c = rational(c_d, "experiment.c_d")?;
    let r0 = self_improvement_r0(&b, r_star, &c)?;
    ctx.check("1 < r0 <= r*", r0 > Exponent::one() && &r0 <= r_star, format!("r0 = {r0}"));
    let choice = s0.map(|s0| choose_rs_for_l2(&r0, s0)).transpose()?;
    if let (Some(ch), Some(s0)) = (&choice, s0) {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        ctx.check("p = 2", ch.p == Exponent::int(2), format!("p = {}", ch.p));
        ctx.check("0 < theta < 1", ch.theta > zero && ch.theta < one, format!("theta = {}", ch.theta));
        ctx.check("r <= r0, s >= s0", ch.r <= r0 && &ch.s >= s0, format!("r = {}, s = {}", ch.r, ch.s));
    }
    Ok(json!({ "r0": r0, "choice": choice }))
}

fn lrplan(ctx: &mut Ctx, r: &[Exponent; 2], s: &[Exponent; 2], p1: &Exponent, epsilon: Option<&str>) -> RunResult<Value> {
    let eps = epsilon.map(|e| rational(e, "experiment.epsilon")).transpose()?;
    let plan = limited_range_plan([&r[0], &r[1]], [&s[0], &s[1]], p1, eps.as_ref())?;
    if let Some(imp) = &plan.improvement {
        ctx.check("beta/gamma identity", imp.beta_gamma_identity, "affine maps and weight powers agree");
    }
    Ok(to_value(&plan))
}

fn symbol_on(ctx: &mut Ctx, src: &SymbolSource, grid: Grid) -> RunResult<SymbolFunction> {
    Ok(match src {
        SymbolSource::Bump { center, width } => SymbolFunction::bump(grid, *center, *width)?,
        SymbolSource::Jump => SymbolFunction::jump(grid)?,
        SymbolSource::Log => SymbolFunction::log_singular(grid)?,
        SymbolSource::File { path } => SymbolFunction::custom(ctx.load(path, grid, "experiment.symbol")?),
    })
}

fn probe(
    ctx: &mut Ctx,
    kernel: &dyadic_lab::compactness::KernelSpec,
    symbol: &SymbolSource,
    weight: Option<&WeightSource>,
    depths: &[u32],
    tails: &[usize],
) -> RunResult<Value> {
    if depths.is_empty() || tails.is_empty() {
        return Err(RunError::field("experiment", "depths and tails must be non-empty"));
    }
    let dim = ctx.grid.dim();
    let (rows, trends) = refinement_series(depths, tails, |depth| {
        let grid = Grid::new(dim, depth)?;
        let a = discretize(kernel, grid)?;
        let b = symbol_on(ctx, symbol, grid).map_err(lab_error)?;
        let w = weight.map(|s| ctx.weight_on(s, grid, "experiment.weight")).transpose().map_err(lab_error)?;
        Ok((commutator_matrix(&b.b, &a)?, w))
    })?;
    let in_range = rows.iter().all(|r| (0.0..=1.0).contains(&r.ratio));
    ctx.check("0 <= sigma_k/sigma_1 <= 1", in_range, format!("{} rows", rows.len()));
    Ok(json!({ "rows": rows, "trends": trends }))
}

/// Folds runner errors raised inside a library callback back into the library error type.
fn lab_error(e: RunError) -> dyadic_lab::Error {
    match e {
        RunError::Lab(inner) => inner,
        other => dyadic_lab::Error::Parse(other.to_string()),
    }
}

fn acceptance_experiment(ctx: &mut Ctx) -> RunResult<Value> {
    let outcomes = acceptance::run_all(ctx.seed)?;
    for o in &outcomes {
        ctx.check(&format!("criterion {}", o.number), o.pass, o.detail.clone());
        ctx.timings.insert(format!("criterion {}", o.number), o.seconds);
    }
    let list: Vec<Value> =
        outcomes.iter().map(|o| json!({ "criterion": o.number, "title": o.title, "pass": o.pass, "detail": o.detail })).collect();
    Ok(json!({ "criteria": list }))
}
