//! Evaluators for uncertainty relations on a [`MomentSet`].
//!
//! Every evaluator returns an [`InequalityReport`] with `margin = lhs - rhs`.
//! Tuples are 0-based in the API; reports carry 1-based indices.
//!
//! Besides the classical pair bounds and `det(X + iY) >= 0`, the triple and
//! quadruple bounds here contain the variances `X_kk` and commutator means
//! `Y_jk` only; no covariance `X_jk` with `j != k` enters them. The report
//! `eq5-INCORRECT` evaluates the bound obtained by simply deleting the
//! covariances from the three-observable determinant. It is false and is kept
//! so the counterexample can be reproduced.

use serde::{Deserialize, Serialize};

use crate::moments::MomentSet;
use crate::operator::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    #[serde(default)]
    pub params: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    pub relative_margin: f64,
    pub n_required: usize,
    pub tolerance: f64,
    /// `true` for the deliberately incorrect bound, which may be violated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub known_incorrect: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl InequalityReport {
    fn new(id: &str, lhs: f64, rhs: f64, n_required: usize) -> Result<Self> {
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(Error::NonFinite("inequality sides"));
        }
        let margin = lhs - rhs;
        let tolerance = Tolerances::INEQ;
        Ok(Self {
            id: id.to_string(),
            lhs,
            rhs,
            margin,
            satisfied: margin >= -tolerance,
            params: None,
            indices: None,
            relative_margin: margin / lhs.abs().max(rhs.abs()).max(1.0),
            n_required,
            tolerance,
            known_incorrect: false,
            stages: Vec::new(),
            warnings: Vec::new(),
        })
    }

    fn with_params(mut self, params: &[f64]) -> Self {
        self.params = Some(params.to_vec());
        self
    }

    fn with_indices(mut self, idx: &[usize]) -> Self {
        self.indices = Some(idx.iter().map(|k| k + 1).collect());
        self
    }

    /// Re-judge `satisfied` under a different absolute tolerance.
    pub fn rejudge(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.satisfied = if self.stages.is_empty() {
            self.margin >= -tol
        } else {
            self.stages.iter().all(|s| s.margin >= -tol)
        };
        self
    }

    /// `lhs / rhs`, or `+inf` when `rhs < 1e-12`.
    pub fn ratio(&self) -> f64 {
        if self.rhs < 1e-12 {
            f64::INFINITY
        } else {
            self.lhs / self.rhs
        }
    }
}

fn require_n(ms: &MomentSet, what: &'static str, n: usize) -> Result<()> {
    if ms.n() != n {
        return Err(Error::TupleSize {
            what,
            expected: n,
            found: ms.n(),
        });
    }
    Ok(())
}

fn distinct_pair(ms: &MomentSet, j: usize, k: usize) -> Result<()> {
    ms.check_index(j)?;
    ms.check_index(k)?;
    if j == k {
        return Err(Error::InvalidParameter("pair indices must differ".into()));
    }
    Ok(())
}

/// `X_jj X_kk >= Y_jk^2`.
pub fn eval_robertson_pair(ms: &MomentSet, j: usize, k: usize) -> Result<InequalityReport> {
    distinct_pair(ms, j, k)?;
    Ok(InequalityReport::new(
        "robertson-pair",
        ms.variance(j) * ms.variance(k),
        ms.comm(j, k).powi(2),
        2,
    )?
    .with_indices(&[j, k]))
}

/// `X_jj X_kk >= X_jk^2 + Y_jk^2`.
pub fn eval_schrodinger_pair(ms: &MomentSet, j: usize, k: usize) -> Result<InequalityReport> {
    distinct_pair(ms, j, k)?;
    Ok(InequalityReport::new(
        "schrodinger-pair",
        ms.variance(j) * ms.variance(k),
        crate::moments::schrodinger_bound(ms, j, k)?,
        2,
    )?
    .with_indices(&[j, k]))
}

/// `det(X + iY) >= 0`.
pub fn eval_detf(ms: &MomentSet) -> Result<InequalityReport> {
    let det = ms.f_matrix().determinant();
    let scale = (0..ms.n()).map(|k| ms.variance(k).abs()).product::<f64>().max(1.0);
    let threshold = 1e-9 * scale.max(det.re.abs());
    if det.im.abs() > threshold {
        return Err(Error::ImaginaryResidue {
            residue: det.im.abs(),
            threshold,
            context: "det(X + iY)",
        });
    }
    InequalityReport::new("detF", det.re, 0.0, ms.n())
}

/// Three-observable determinant written out, including every covariance term.
pub fn eval_n3_det(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "n3-det", 3)?;
    let x = |j: usize, k: usize| ms.cov(j - 1, k - 1);
    let y = |j: usize, k: usize| ms.comm(j - 1, k - 1);
    let lhs = x(1, 1) * x(2, 2) * x(3, 3);
    let rhs = x(1, 1) * (x(2, 3).powi(2) + y(2, 3).powi(2))
        + x(2, 2) * (x(1, 3).powi(2) + y(1, 3).powi(2))
        + x(3, 3) * (x(1, 2).powi(2) + y(1, 2).powi(2))
        - 2.0 * x(1, 2) * x(2, 3) * x(3, 1)
        + 2.0 * (x(1, 2) * y(2, 3) * y(3, 1) + x(2, 3) * y(3, 1) * y(1, 2) + x(3, 1) * y(1, 2) * y(2, 3));
    InequalityReport::new("n3-det", lhs, rhs, 3)
}

/// `X11 X22 X33 >= X11 Y23^2 + X22 Y13^2 + X33 Y12^2`. NOT a valid inequality.
pub fn eval_false5(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "eq5-INCORRECT", 3)?;
    let (x1, x2, x3) = (ms.variance(0), ms.variance(1), ms.variance(2));
    let lhs = x1 * x2 * x3;
    let rhs = x1 * ms.comm(1, 2).powi(2) + x2 * ms.comm(0, 2).powi(2) + x3 * ms.comm(0, 1).powi(2);
    let mut r = InequalityReport::new("eq5-INCORRECT", lhs, rhs, 3)?;
    r.known_incorrect = true;
    Ok(r)
}

fn gen3_sides(ms: &MomentSet, a: [f64; 3]) -> (f64, f64) {
    let lhs = a[0] * a[0] * ms.variance(0) + a[1] * a[1] * ms.variance(1) + a[2] * a[2] * ms.variance(2);
    let rhs = 2.0
        * ((a[0] * a[1] * ms.comm(0, 1)).powi(2)
            + (a[1] * a[2] * ms.comm(1, 2)).powi(2)
            + (a[0] * a[2] * ms.comm(0, 2)).powi(2))
        .sqrt();
    (lhs, rhs)
}

/// `sum a_k^2 X_kk >= 2 sqrt((a1 a2 Y12)^2 + (a2 a3 Y23)^2 + (a1 a3 Y13)^2)` for real weights.
pub fn eval_gen3(ms: &MomentSet, alphas: [f64; 3]) -> Result<InequalityReport> {
    require_n(ms, "gen3", 3)?;
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("weights must be finite".into()));
    }
    let (lhs, rhs) = gen3_sides(ms, alphas);
    Ok(InequalityReport::new("gen3", lhs, rhs, 3)?.with_params(&alphas))
}

/// `X11 + X22 + X33 >= 2 sqrt(Y12^2 + Y23^2 + Y13^2)`.
pub fn eval_sum3(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "sum3", 3)?;
    let (lhs, rhs) = gen3_sides(ms, [1.0; 3]);
    InequalityReport::new("sum3", lhs, rhs, 3)
}

/// `X11 + X22 + X33 >= |Y12| + |Y23| + |Y13|`, the weaker bound implied by pair relations.
pub fn eval_sum3_robertson(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "sum3-robertson", 3)?;
    let lhs = ms.variance(0) + ms.variance(1) + ms.variance(2);
    let rhs = ms.comm(0, 1).abs() + ms.comm(1, 2).abs() + ms.comm(0, 2).abs();
    InequalityReport::new("sum3-robertson", lhs, rhs, 3)
}

/// Weights `a_k^2 = X_kk^n`.
pub fn eval_sum3_power(ms: &MomentSet, n_exp: f64) -> Result<InequalityReport> {
    require_n(ms, "sum3-power", 3)?;
    if !(n_exp.is_finite() && n_exp >= 0.0) {
        return Err(Error::InvalidParameter(format!("exponent must be >= 0, got {n_exp}")));
    }
    let mut w = [0.0; 3];
    for (k, wk) in w.iter_mut().enumerate() {
        let v = ms.variance(k);
        if v < 0.0 && n_exp.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "X_{0}{0} = {v:e} < 0 with fractional exponent",
                k + 1
            )));
        }
        *wk = v.powf(n_exp);
    }
    let lhs = (0..3).map(|k| ms.variance(k).powf(n_exp + 1.0)).sum::<f64>();
    let rhs = 2.0
        * (ms.comm(0, 1).powi(2) * w[0] * w[1]
            + ms.comm(1, 2).powi(2) * w[1] * w[2]
            + ms.comm(0, 2).powi(2) * w[0] * w[2])
            .sqrt();
    Ok(InequalityReport::new("sum3-power", lhs, rhs, 3)?.with_params(&[n_exp]))
}

/// `X11 X22 X33 >= (4/9)(X11 Y23^2 + X22 Y13^2 + X33 Y12^2)`.
pub fn eval_prod3(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "prod3", 3)?;
    let (x1, x2, x3) = (ms.variance(0), ms.variance(1), ms.variance(2));
    let lhs = x1 * x2 * x3;
    let rhs = 4.0 / 9.0
        * (x1 * ms.comm(1, 2).powi(2) + x2 * ms.comm(0, 2).powi(2) + x3 * ms.comm(0, 1).powi(2));
    InequalityReport::new("prod3", lhs, rhs, 3)
}

fn x33_positive(ms: &MomentSet) -> Result<f64> {
    let x33 = ms.variance(2);
    if x33 <= 0.0 {
        return Err(Error::DegenerateDenominator("X_33 must be positive"));
    }
    Ok(x33)
}

/// `sqrt(X11 X22) >= sqrt((2 Y12 / 3)^2 + B^2) + B`, `B = 4 |Y13 Y23| / (9 X33)`.
pub fn eval_pair_bound(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "pair-bound", 3)?;
    let x33 = x33_positive(ms)?;
    let b = 4.0 * (ms.comm(0, 2) * ms.comm(1, 2)).abs() / (9.0 * x33);
    let lhs = (ms.variance(0) * ms.variance(1)).sqrt();
    let rhs = ((2.0 * ms.comm(0, 1) / 3.0).powi(2) + b * b).sqrt() + b;
    Ok(InequalityReport::new("pair-bound", lhs, rhs, 3)?.with_params(&[b]))
}

/// `sqrt(X11 X22) >= 8 |Y13 Y23| / (9 X33)`; meant for `Y12 = 0`.
pub fn eval_zero_comm(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "zero-comm", 3)?;
    let x33 = x33_positive(ms)?;
    let lhs = (ms.variance(0) * ms.variance(1)).sqrt();
    let rhs = 8.0 * (ms.comm(0, 2) * ms.comm(1, 2)).abs() / (9.0 * x33);
    let mut r = InequalityReport::new("zero-comm", lhs, rhs, 3)?;
    if ms.comm(0, 1).abs() > 1e-9 {
        r.warnings.push(format!(
            "Y12 = {:e} is nonzero; pair-bound is the sharper relation",
            ms.comm(0, 1)
        ));
    }
    Ok(r)
}

/// Derived quantities of a four-observable moment set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourTupleDerived {
    /// `X11 X22 X33 X44`.
    #[serde(rename = "P")]
    pub p: f64,
    /// `sum_{j<k} Y_jk^2 X_ll X_mm` over complementary index pairs.
    #[serde(rename = "Psi")]
    pub psi: f64,
    /// `2 (Y12^2 Y34^2 + Y23^2 Y14^2 + Y31^2 Y24^2)`.
    #[serde(rename = "PsiStar")]
    pub psi_star: f64,
    /// `|Y12 Y34 + Y23 Y14 + Y31 Y24|`, the Pfaffian of `Y` up to sign.
    #[serde(rename = "Lambda")]
    pub lambda: f64,
}

pub fn four_derived(ms: &MomentSet) -> Result<FourTupleDerived> {
    require_n(ms, "four_derived", 4)?;
    let x = |k: usize| ms.variance(k - 1);
    let y = |j: usize, k: usize| ms.comm(j - 1, k - 1);
    let p = x(1) * x(2) * x(3) * x(4);
    let psi = y(1, 2).powi(2) * x(3) * x(4)
        + y(1, 3).powi(2) * x(2) * x(4)
        + y(1, 4).powi(2) * x(3) * x(2)
        + y(2, 3).powi(2) * x(1) * x(4)
        + y(2, 4).powi(2) * x(3) * x(1)
        + y(3, 4).powi(2) * x(1) * x(2);
    let psi_star = 2.0
        * (y(1, 2).powi(2) * y(3, 4).powi(2)
            + y(2, 3).powi(2) * y(1, 4).powi(2)
            + y(3, 1).powi(2) * y(2, 4).powi(2));
    let lambda = (y(1, 2) * y(3, 4) + y(2, 3) * y(1, 4) + y(3, 1) * y(2, 4)).abs();
    Ok(FourTupleDerived {
        p,
        psi,
        psi_star,
        lambda,
    })
}

fn gen4_sides(ms: &MomentSet, xi: [f64; 4], lambda: f64) -> (f64, f64) {
    let g: f64 = (0..4).map(|k| xi[k] * xi[k] * ms.variance(k)).sum();
    let mut v = 0.0;
    for j in 0..4 {
        for k in j + 1..4 {
            v += (xi[j] * xi[k] * ms.comm(j, k)).powi(2);
        }
    }
    let lhs = (g * g - 4.0 * v).powi(2);
    let rhs = 64.0 * (xi[0] * xi[1] * xi[2] * xi[3]).powi(2) * lambda * lambda;
    (lhs, rhs)
}

/// `(g^2 - 4V)^2 >= 64 (xi1 xi2 xi3 xi4)^2 Lambda^2` with
/// `g = sum xi_k^2 X_kk` and `V = sum_{j<k} (xi_j xi_k Y_jk)^2`.
pub fn eval_gen4(ms: &MomentSet, xis: [f64; 4]) -> Result<InequalityReport> {
    require_n(ms, "gen4", 4)?;
    if xis.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("weights must be finite".into()));
    }
    let d = four_derived(ms)?;
    let (lhs, rhs) = gen4_sides(ms, xis, d.lambda);
    Ok(InequalityReport::new("gen4", lhs, rhs, 4)?.with_params(&xis))
}

/// `|(sum X_kk)^2 - 4 sum_{j<k} Y_jk^2| >= 8 Lambda`.
pub fn eval_sum4(ms: &MomentSet) -> Result<InequalityReport> {
    require_n(ms, "sum4", 4)?;
    let d = four_derived(ms)?;
    let g: f64 = (0..4).map(|k| ms.variance(k)).sum();
    let mut v = 0.0;
    for j in 0..4 {
        for k in j + 1..4 {
            v += ms.comm(j, k).powi(2);
        }
    }
    InequalityReport::new("sum4", (g * g - 4.0 * v).abs(), 8.0 * d.lambda, 4)
}

fn prod4_rhs(psi: f64, lambda: f64) -> f64 {
    2.0 * psi + lambda * lambda + lambda * (4.0 * psi + lambda * lambda).sqrt()
}

/// `8 P >= 2 Psi + Lambda^2 + Lambda sqrt(4 Psi + Lambda^2)`.
pub fn eval_prod4(ms: &MomentSet) -> Result<InequalityReport> {
    let d = four_derived(ms)?;
    InequalityReport::new("prod4", 8.0 * d.p, prod4_rhs(d.psi, d.lambda), 4)
}

/// As [`eval_prod4`] with `Psi` replaced by its lower bound `Psi*`.
pub fn eval_prod4_star(ms: &MomentSet) -> Result<InequalityReport> {
    let d = four_derived(ms)?;
    InequalityReport::new("prod4-star", 8.0 * d.p, prod4_rhs(d.psi_star, d.lambda), 4)
}

/// The chain `X11 X22 ... X_NN >= det X >= det Y`. The headline sides are the
/// two ends of the chain; `satisfied` requires both links.
pub fn eval_robertson_det(ms: &MomentSet) -> Result<InequalityReport> {
    let prod: f64 = (0..ms.n()).map(|k| ms.variance(k)).product();
    let det_x = ms.x.determinant();
    // An antisymmetric matrix of odd order is singular.
    let det_y = if ms.n() % 2 == 1 { 0.0 } else { ms.y.determinant() };
    let stages = vec![
        Stage {
            label: "prod X_kk >= det X".into(),
            lhs: prod,
            rhs: det_x,
            margin: prod - det_x,
        },
        Stage {
            label: "det X >= det Y".into(),
            lhs: det_x,
            rhs: det_y,
            margin: det_x - det_y,
        },
    ];
    let mut r = InequalityReport::new("robertson-det", prod, det_y, ms.n())?;
    r.stages = stages;
    Ok(r.rejudge(Tolerances::INEQ))
}

/// `(det Y, Lambda^2)`; equal for every antisymmetric 4x4 `Y`.
pub fn lambda_pfaffian_identity(ms: &MomentSet) -> Result<(f64, f64)> {
    let d = four_derived(ms)?;
    Ok((ms.y.determinant(), d.lambda * d.lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    /// Any tuple with at least two entries; evaluated on index pairs.
    Pair,
    /// Any tuple size.
    Any,
    Exactly(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub arity: Arity,
    pub statement: &'static str,
    /// Meaning of the optional parameter list.
    pub params: &'static str,
    pub correct: bool,
}

const CATALOG: &[CatalogEntry] = &[
    CatalogEntry { id: "robertson-pair", arity: Arity::Pair, statement: "X_jj X_kk >= Y_jk^2", params: "pair indices j,k (1-based, default 1,2)", correct: true },
    CatalogEntry { id: "schrodinger-pair", arity: Arity::Pair, statement: "X_jj X_kk >= X_jk^2 + Y_jk^2", params: "pair indices j,k (1-based, default 1,2)", correct: true },
    CatalogEntry { id: "detF", arity: Arity::Any, statement: "det(X + iY) >= 0", params: "", correct: true },
    CatalogEntry { id: "n3-det", arity: Arity::Exactly(3), statement: "X11 X22 X33 >= X11(X23^2+Y23^2) + X22(X13^2+Y13^2) + X33(X12^2+Y12^2) - 2 X12 X23 X31 + 2(X12 Y23 Y31 + X23 Y31 Y12 + X31 Y12 Y23)", params: "", correct: true },
    CatalogEntry { id: "eq5-INCORRECT", arity: Arity::Exactly(3), statement: "X11 X22 X33 >= X11 Y23^2 + X22 Y13^2 + X33 Y12^2  (FALSE in general)", params: "", correct: false },
    CatalogEntry { id: "gen3", arity: Arity::Exactly(3), statement: "a1^2 X11 + a2^2 X22 + a3^2 X33 >= 2 sqrt((a1 a2 Y12)^2 + (a2 a3 Y23)^2 + (a1 a3 Y13)^2)", params: "real weights a1,a2,a3 (default 1,1,1)", correct: true },
    CatalogEntry { id: "sum3", arity: Arity::Exactly(3), statement: "X11 + X22 + X33 >= 2 sqrt(Y12^2 + Y23^2 + Y13^2)", params: "", correct: true },
    CatalogEntry { id: "sum3-robertson", arity: Arity::Exactly(3), statement: "X11 + X22 + X33 >= |Y12| + |Y23| + |Y13|", params: "", correct: true },
    CatalogEntry { id: "sum3-power", arity: Arity::Exactly(3), statement: "sum X_kk^(n+1) >= 2 sqrt(Y12^2 X11^n X22^n + Y23^2 X22^n X33^n + Y13^2 X11^n X33^n)", params: "exponent n >= 0 (default 1)", correct: true },
    CatalogEntry { id: "prod3", arity: Arity::Exactly(3), statement: "X11 X22 X33 >= (4/9)(X11 Y23^2 + X22 Y13^2 + X33 Y12^2)", params: "", correct: true },
    CatalogEntry { id: "pair-bound", arity: Arity::Exactly(3), statement: "sqrt(X11 X22) >= sqrt((2 Y12/3)^2 + B^2) + B,  B = 4|Y13 Y23|/(9 X33)", params: "", correct: true },
    CatalogEntry { id: "zero-comm", arity: Arity::Exactly(3), statement: "sqrt(X11 X22) >= 8 |Y13 Y23| / (9 X33)", params: "", correct: true },
    CatalogEntry { id: "gen4", arity: Arity::Exactly(4), statement: "(g^2 - 4V)^2 >= 64 (x1 x2 x3 x4)^2 Lambda^2,  g = sum x_k^2 X_kk,  V = sum_{j<k} (x_j x_k Y_jk)^2", params: "real weights x1..x4 (default 1,1,1,1)", correct: true },
    CatalogEntry { id: "sum4", arity: Arity::Exactly(4), statement: "|(sum X_kk)^2 - 4 sum_{j<k} Y_jk^2| >= 8 Lambda", params: "", correct: true },
    CatalogEntry { id: "prod4", arity: Arity::Exactly(4), statement: "8 P >= 2 Psi + Lambda^2 + Lambda sqrt(4 Psi + Lambda^2)", params: "", correct: true },
    CatalogEntry { id: "prod4-star", arity: Arity::Exactly(4), statement: "8 P >= 2 Psi* + Lambda^2 + Lambda sqrt(4 Psi* + Lambda^2)", params: "", correct: true },
    CatalogEntry { id: "robertson-det", arity: Arity::Any, statement: "X11 X22 ... X_NN >= det X >= det Y", params: "", correct: true },
];

pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

pub fn catalog_entry(id: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownInequality(id.to_string()))
}

fn fixed_params<const N: usize>(params: &[f64], default: [f64; N], id: &str) -> Result<[f64; N]> {
    match params.len() {
        0 => Ok(default),
        n if n == N => Ok(std::array::from_fn(|i| params[i])),
        n => Err(Error::InvalidParameter(format!("{id} takes {N} parameters, got {n}"))),
    }
}

fn pair_params(params: &[f64], id: &str) -> Result<(usize, usize)> {
    let [j, k] = fixed_params(params, [1.0, 2.0], id)?;
    let to_index = |v: f64| {
        if v.fract() == 0.0 && v >= 1.0 {
            Ok(v as usize - 1)
        } else {
            Err(Error::InvalidParameter(format!("{id}: indices are 1-based integers, got {v}")))
        }
    };
    Ok((to_index(j)?, to_index(k)?))
}

/// Evaluate a catalog entry by id. `params` holds the optional parameter
/// list described in the catalog; empty means defaults.
pub fn evaluate(id: &str, ms: &MomentSet, params: &[f64]) -> Result<InequalityReport> {
    let no_params = || {
        if params.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{id} takes no parameters")))
        }
    };
    match id {
        "robertson-pair" => {
            let (j, k) = pair_params(params, id)?;
            eval_robertson_pair(ms, j, k)
        }
        "schrodinger-pair" => {
            let (j, k) = pair_params(params, id)?;
            eval_schrodinger_pair(ms, j, k)
        }
        "gen3" => eval_gen3(ms, fixed_params(params, [1.0; 3], id)?),
        "sum3-power" => eval_sum3_power(ms, fixed_params(params, [1.0], id)?[0]),
        "gen4" => eval_gen4(ms, fixed_params(params, [1.0; 4], id)?),
        _ => {
            no_params()?;
            match id {
                "detF" => eval_detf(ms),
                "n3-det" => eval_n3_det(ms),
                "eq5-INCORRECT" => eval_false5(ms),
                "sum3" => eval_sum3(ms),
                "sum3-robertson" => eval_sum3_robertson(ms),
                "prod3" => eval_prod3(ms),
                "pair-bound" => eval_pair_bound(ms),
                "zero-comm" => eval_zero_comm(ms),
                "sum4" => eval_sum4(ms),
                "prod4" => eval_prod4(ms),
                "prod4-star" => eval_prod4_star(ms),
                "robertson-det" => eval_robertson_det(ms),
                other => Err(Error::UnknownInequality(other.to_string())),
            }
        }
    }
}

/// Every catalog entry that applies to the tuple size, with default
/// parameters. Pair bounds are evaluated on every pair `j < k`. The triple
/// bounds that divide by `X33` are skipped when it vanishes.
pub fn applicable_suite(ms: &MomentSet) -> Result<Vec<InequalityReport>> {
    let n = ms.n();
    let mut out = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            out.push(eval_robertson_pair(ms, j, k)?);
            out.push(eval_schrodinger_pair(ms, j, k)?);
        }
    }
    for entry in CATALOG {
        match entry.arity {
            Arity::Pair => continue,
            Arity::Exactly(m) if m != n => continue,
            _ => {}
        }
        if matches!(entry.id, "pair-bound" | "zero-comm") && ms.variance(2) <= 0.0 {
            continue;
        }
        out.push(evaluate(entry.id, ms, &[])?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn ms3(x: [f64; 3], y12: f64, y13: f64, y23: f64) -> MomentSet {
        #[rustfmt::skip]
        let y = DMatrix::from_row_slice(3, 3, &[0.0, y12, y13, -y12, 0.0, y23, -y13, -y23, 0.0]);
        MomentSet::new(vec![0.0; 3], DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&x)), y, 1.0).unwrap()
    }

    #[test]
    fn catalog_has_every_evaluator() {
        assert!(catalog().len() >= 16);
        let ms = ms3([1.0, 1.0, 1.0], 0.1, 0.2, 0.3);
        for e in catalog() {
            let r = evaluate(e.id, &ms, &[]);
            match e.arity {
                Arity::Exactly(4) => assert!(matches!(r, Err(Error::TupleSize { .. }))),
                _ => assert_eq!(r.unwrap().id, e.id),
            }
        }
        assert!(matches!(evaluate("nope", &ms, &[]), Err(Error::UnknownInequality(_))));
        assert!(evaluate("sum3", &ms, &[1.0]).is_err());
    }

    #[test]
    fn zero_commutators_give_zero_rhs() {
        let ms = ms3([0.3, 0.7, 1.1], 0.0, 0.0, 0.0);
        for r in [
            eval_false5(&ms).unwrap(),
            eval_sum3(&ms).unwrap(),
            eval_prod3(&ms).unwrap(),
            eval_zero_comm(&ms).unwrap(),
        ] {
            assert_eq!(r.rhs, 0.0, "{}", r.id);
            assert!(r.satisfied);
        }
    }

    #[test]
    fn gen3_with_single_weight() {
        let ms = ms3([0.3, 0.7, 1.1], 0.2, 0.1, 0.4);
        let r = eval_gen3(&ms, [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.lhs, 0.3);
    }

    #[test]
    fn pair_bound_reduces_to_zero_comm() {
        let ms = ms3([0.5, 0.6, 0.9], 0.0, 0.3, -0.2);
        let a = eval_pair_bound(&ms).unwrap();
        let b = eval_zero_comm(&ms).unwrap();
        assert!((a.rhs - b.rhs).abs() < 1e-15);
        assert!(b.warnings.is_empty());
        let ms = ms3([0.5, 0.6, 0.9], 0.1, 0.3, -0.2);
        assert_eq!(eval_zero_comm(&ms).unwrap().warnings.len(), 1);
    }

    #[test]
    fn degenerate_denominator_rejected() {
        let ms = ms3([0.5, 0.6, 0.0], 0.0, 0.0, 0.0);
        assert!(matches!(eval_pair_bound(&ms), Err(Error::DegenerateDenominator(_))));
        assert!(matches!(eval_zero_comm(&ms), Err(Error::DegenerateDenominator(_))));
        let suite = applicable_suite(&ms).unwrap();
        assert!(suite.iter().all(|r| r.id != "zero-comm"));
    }

    #[test]
    fn fractional_exponent_on_negative_variance() {
        let y = DMatrix::zeros(3, 3);
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1e-12, 0.5, 0.5]));
        let ms = MomentSet::new(vec![0.0; 3], x, y, 1.0).unwrap();
        assert!(eval_sum3_power(&ms, 0.5).is_err());
        assert!(eval_sum3_power(&ms, 2.0).is_ok());
        assert!(eval_sum3_power(&ms, -1.0).is_err());
    }

    #[test]
    fn robertson_det_three_is_useless() {
        let ms = ms3([0.5, 0.6, 0.9], 0.2, 0.3, -0.2);
        let r = eval_robertson_det(&ms).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.stages.len(), 2);
    }

    #[test]
    fn pair_indices_are_one_based_in_reports() {
        let ms = ms3([0.5, 0.6, 0.9], 0.2, 0.3, -0.2);
        let r = evaluate("robertson-pair", &ms, &[1.0, 3.0]).unwrap();
        assert_eq!(r.indices, Some(vec![1, 3]));
        assert!((r.rhs - 0.09).abs() < 1e-15);
        assert!(evaluate("robertson-pair", &ms, &[1.0, 1.0]).is_err());
        assert!(evaluate("robertson-pair", &ms, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn report_json_shape() {
        let ms = ms3([0.5, 0.6, 0.9], 0.2, 0.3, -0.2);
        let r = eval_gen3(&ms, [1.0, 2.0, 3.0]).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["id", "lhs", "rhs", "margin", "satisfied", "params"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["params"][2], 3.0);
    }
}
