//! Saturation search: bounded Nelder-Mead restarted from a shifted Halton
//! grid, and full-factorial parameter sweeps.
//!
//! Free parameters are named by paths into the state spec (see
//! [`StateSpec::with_values`]). The grid shift is drawn from a ChaCha RNG
//! seeded by the problem, so a problem and its seed fix the result bitwise.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::inequalities::{catalog_entry, evaluate, InequalityReport};
use crate::scenario::{Scenario, StateSpec, TupleSpec};
use crate::{Error, Result};

pub const MIN_STARTS: usize = 32;
pub const DEFAULT_MAX_EVALS: usize = 20_000;
pub const DIAMETER_TOL: f64 = 1e-8;
pub const MAX_GRID_POINTS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Margin,
    /// `lhs / rhs`, `+inf` when `rhs < 1e-12`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchProblem {
    pub inequality_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inequality_params: Vec<f64>,
    pub family: StateSpec,
    pub tuple: TupleSpec,
    pub objective: Objective,
    pub bounds: Vec<Bound>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
}

fn default_starts() -> usize {
    MIN_STARTS
}

fn default_max_evals() -> usize {
    DEFAULT_MAX_EVALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub param_names: Vec<String>,
    pub best_params: Vec<f64>,
    pub best_objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Report of the inequality at `best_params`.
    pub report: InequalityReport,
}

impl SearchProblem {
    pub fn validate(&self) -> Result<()> {
        catalog_entry(&self.inequality_id)?;
        if self.bounds.is_empty() {
            return Err(Error::spec("bounds", "at least one free parameter is required"));
        }
        for (k, b) in self.bounds.iter().enumerate() {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo <= b.hi) {
                return Err(Error::spec(
                    format!("bounds[{k}]"),
                    format!("need finite lo <= hi, got [{}, {}]", b.lo, b.hi),
                ));
            }
        }
        if self.starts < MIN_STARTS {
            return Err(Error::spec("starts", format!("at least {MIN_STARTS} starts are required")));
        }
        if self.max_evals < self.starts {
            return Err(Error::spec("max_evals", "budget must cover the start grid"));
        }
        Ok(())
    }

    pub fn param_names(&self) -> Vec<String> {
        self.bounds.iter().map(|b| b.name.clone()).collect()
    }

    pub fn scenario_at(&self, params: &[f64]) -> Result<Scenario> {
        let state = self.family.with_values(&self.param_names(), params)?;
        Ok(Scenario::new(state, self.tuple.clone()))
    }

    pub fn report_at(&self, params: &[f64]) -> Result<InequalityReport> {
        let ms = self.scenario_at(params)?.moments()?;
        evaluate(&self.inequality_id, &ms, &self.inequality_params)
    }

    /// Objective value at `params`; evaluation failures carry the parameters.
    pub fn objective_at(&self, params: &[f64]) -> Result<f64> {
        let wrap = |e: Error| Error::Objective {
            params: params.to_vec(),
            message: e.to_string(),
        };
        let r = self.report_at(params).map_err(wrap)?;
        let v = match self.objective {
            Objective::Margin => r.margin,
            Objective::Ratio => r.ratio(),
        };
        if v.is_nan() {
            return Err(Error::Objective {
                params: params.to_vec(),
                message: "objective is NaN".into(),
            });
        }
        Ok(v)
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Halton points `1..=count` in `[0, 1)^d`, shifted modulo 1.
pub fn shifted_halton(count: usize, shift: &[f64]) -> Result<Vec<Vec<f64>>> {
    if shift.len() > PRIMES.len() {
        return Err(Error::InvalidParameter(format!(
            "at most {} free parameters are supported",
            PRIMES.len()
        )));
    }
    Ok((1..=count as u64)
        .map(|i| {
            shift
                .iter()
                .zip(PRIMES)
                .map(|(s, p)| (radical_inverse(i, p) + s).fract())
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone)]
struct Candidate {
    params: Vec<f64>,
    value: f64,
    converged: bool,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn better(a: &Candidate, b: &Candidate) -> Ordering {
    a.value.total_cmp(&b.value).then_with(|| lex(&a.params, &b.params))
}

struct Counter<'a> {
    problem: &'a SearchProblem,
    evals: usize,
}

impl Counter<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        self.problem.objective_at(x)
    }
}

fn project(x: &mut [f64], bounds: &[Bound]) {
    for (v, b) in x.iter_mut().zip(bounds) {
        *v = v.clamp(b.lo, b.hi);
    }
}

/// Nelder-Mead inside the box with coefficients 1, 2, 1/2, 1/2 and
/// every trial point clamped to the bounds.
fn nelder_mead(
    f: &mut Counter,
    start: &Candidate,
    bounds: &[Bound],
    budget: usize,
) -> Result<Candidate> {
    let free: Vec<usize> = (0..bounds.len()).filter(|&k| bounds[k].hi > bounds[k].lo).collect();
    if free.is_empty() {
        return Ok(Candidate {
            converged: true,
            ..start.clone()
        });
    }
    let used_at_start = f.evals;
    let mut simplex = vec![(start.params.clone(), start.value)];
    for &k in &free {
        let b = &bounds[k];
        let step = 0.1 * (b.hi - b.lo);
        let mut v = start.params.clone();
        v[k] = if v[k] + step <= b.hi { v[k] + step } else { v[k] - step };
        let fv = f.eval(&v)?;
        simplex.push((v, fv));
    }
    let n = free.len();
    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lex(&a.0, &b.0)));
    };
    let diameter = |s: &[(Vec<f64>, f64)]| {
        s[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&s[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    };
    let mut converged = false;
    loop {
        order(&mut simplex);
        if diameter(&simplex) < DIAMETER_TOL {
            converged = true;
            break;
        }
        if f.evals - used_at_start + 2 > budget {
            break;
        }
        let mut centroid = vec![0.0; bounds.len()];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            project(&mut p, bounds);
            p
        };
        let xr = along(1.0);
        let fr = f.eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f.eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = f.eval(&xc)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f.eval(&xc)?;
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            let mut p: Vec<f64> = best.iter().zip(&item.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            project(&mut p, bounds);
            let fp = f.eval(&p)?;
            *item = (p, fp);
        }
    }
    order(&mut simplex);
    let (params, value) = simplex.swap_remove(0);
    Ok(Candidate {
        params,
        value,
        converged,
    })
}

/// Minimise the problem's objective over its box.
pub fn minimize(problem: &SearchProblem) -> Result<SearchResult> {
    problem.validate()?;
    let bounds = &problem.bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let shift: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
    let unit = shifted_halton(problem.starts, &shift)?;
    let mut f = Counter { problem, evals: 0 };
    let mut starts = Vec::with_capacity(unit.len());
    for u in unit {
        let params: Vec<f64> = u
            .iter()
            .zip(bounds)
            .map(|(t, b)| b.lo + t * (b.hi - b.lo))
            .collect();
        let value = f.eval(&params)?;
        starts.push(Candidate {
            params,
            value,
            converged: false,
        });
    }
    starts.sort_by(better);
    let mut best = starts[0].clone();
    for (i, s) in starts.iter().enumerate() {
        let remaining = problem.max_evals.saturating_sub(f.evals);
        let share = remaining / (starts.len() - i);
        if share < bounds.len() + 3 {
            continue;
        }
        let local = nelder_mead(&mut f, s, bounds, share)?;
        if better(&local, &best).is_lt() {
            best = local;
        }
    }
    let report = problem.report_at(&best.params)?;
    Ok(SearchResult {
        param_names: problem.param_names(),
        best_params: best.params,
        best_objective: best.value,
        evaluations: f.evals,
        converged: best.converged,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub inequality_id: String,
    pub param_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Evenly spaced points including both ends; a count of 1 gives `lo`.
fn axis(b: &Bound, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![b.lo];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                b.hi
            } else {
                b.lo + (b.hi - b.lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Full-factorial evaluation in row-major order: the last parameter varies fastest.
pub fn sweep(problem: &SearchProblem, counts: &[usize]) -> Result<SweepTable> {
    catalog_entry(&problem.inequality_id)?;
    let bounds = &problem.bounds;
    if counts.len() != bounds.len() {
        return Err(Error::spec(
            "grid",
            format!("{} counts given for {} parameters", counts.len(), bounds.len()),
        ));
    }
    if counts.contains(&0) {
        return Err(Error::spec("grid", "every count must be >= 1"));
    }
    let total = counts.iter().map(|&c| c as u128).product::<u128>();
    if total > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge {
            points: total,
            limit: MAX_GRID_POINTS,
        });
    }
    let axes: Vec<Vec<f64>> = bounds.iter().zip(counts).map(|(b, &c)| axis(b, c)).collect();
    let mut rows = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; counts.len()];
    for _ in 0..total {
        let params: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        let r = problem.report_at(&params).map_err(|e| Error::Objective {
            params: params.clone(),
            message: e.to_string(),
        })?;
        rows.push(SweepRow {
            params,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            satisfied: r.satisfied,
        });
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(SweepTable {
        inequality_id: problem.inequality_id.clone(),
        param_names: problem.param_names(),
        rows,
    })
}
