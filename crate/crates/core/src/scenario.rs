//! JSON state and tuple specifications, resolved to a [`MomentSet`].
//!
//! ```json
//! {"family": "ccs", "params": {"sigma": 0.577, "r": -0.5}, "hbar": 1.0}
//! {"tuple": "xpxi"}
//! ```
//!
//! Gaussian families are evaluated analytically unless a Fock dimension is
//! given; `fock_vacuum` is always realised in the Fock basis.

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::gaussian::{quad_triple_moments, GaussianState};
use crate::moments::{moment_set, MomentOptions, MomentSet};
use crate::operator::{Operator, QuantumState};
use crate::states::{
    ccs_moments, ccs_state, fock_pair, fock_vacuum, gaussian2d_fock, gaussian2d_moments,
    hyperspherical_coeffs, reference_spin1_state, spin_operators, spin_superposition,
    two_mode_phase_space, CcsParams, Gaussian2dParams,
};
use crate::{Error, Result, C64};

pub const DEFAULT_VACUUM_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ccs,
    FockVacuum,
    Spin,
    Gaussian2d,
    Gaussian,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub family: Family,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleKind {
    Xp,
    Xpxi,
    SpinXyz,
    QuadTriple,
    XyPhaseSpace,
    Raw,
}

/// A matrix or vector entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CNum {
    Real(f64),
    Complex([f64; 2]),
}

impl From<CNum> for C64 {
    fn from(c: CNum) -> C64 {
        match c {
            CNum::Real(r) => C64::new(r, 0.0),
            CNum::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOperator {
    #[serde(default)]
    pub label: Option<String>,
    pub matrix: Vec<Vec<CNum>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSpec {
    pub tuple: TupleKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<RawOperator>,
    /// 1-based permutation applied after the moments are computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    #[serde(default = "yes")]
    pub centered: bool,
}

fn yes() -> bool {
    true
}

impl TupleSpec {
    pub fn new(tuple: TupleKind) -> Self {
        Self {
            tuple,
            operators: Vec::new(),
            order: None,
            centered: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CcsSpec {
    #[serde(default = "default_sigma")]
    sigma: f64,
    #[serde(default = "default_r")]
    r: f64,
    #[serde(default)]
    alpha_re: f64,
    #[serde(default)]
    alpha_im: f64,
}

fn default_sigma() -> f64 {
    CcsParams::counterexample().sigma
}

fn default_r() -> f64 {
    CcsParams::counterexample().r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianSpec {
    #[serde(default)]
    sxx: Option<f64>,
    #[serde(default)]
    spp: Option<f64>,
    #[serde(default)]
    sxp: f64,
    #[serde(default)]
    mx: f64,
    #[serde(default)]
    mp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinSpec {
    #[serde(default = "two")]
    two_j: usize,
    #[serde(default)]
    coeffs: Option<Vec<CNum>>,
    #[serde(default)]
    angles: Option<Vec<f64>>,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct G2dSpec {
    #[serde(default = "one")]
    a: f64,
    #[serde(default)]
    b: f64,
    #[serde(default = "one")]
    c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStateSpec {
    #[serde(default)]
    vector: Option<Vec<CNum>>,
    #[serde(default)]
    density: Option<Vec<Vec<CNum>>>,
}

fn parse<T: DeserializeOwned>(v: &Value, field: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::spec(field, e.to_string()))
}

fn complex_matrix(rows: &[Vec<CNum>], field: &str) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::spec(field, "matrix must be square and non-empty"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j].into()))
}

impl StateSpec {
    pub fn new(family: Family, params: Value) -> Self {
        Self {
            family,
            params,
            dim: None,
            hbar: None,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar.unwrap_or(1.0)
    }

    /// Copy with the real parameters at `paths` replaced. A path is either
    /// `hbar` or a dotted path into `params`, optionally prefixed `params.`;
    /// numeric segments index arrays.
    pub fn with_values(&self, paths: &[String], values: &[f64]) -> Result<StateSpec> {
        if paths.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: paths.len(),
                found: values.len(),
            });
        }
        let mut out = self.clone();
        for (path, &v) in paths.iter().zip(values) {
            if path == "hbar" {
                out.hbar = Some(v);
                continue;
            }
            let rel = path.strip_prefix("params.").unwrap_or(path);
            set_path(&mut out.params, rel, v).map_err(|m| Error::spec(path.clone(), m))?;
        }
        Ok(out)
    }

    fn ccs(&self) -> Result<CcsParams> {
        let s: CcsSpec = parse(&self.params, "params")?;
        CcsParams::new(s.sigma, s.r, C64::new(s.alpha_re, s.alpha_im))
    }

    fn g2d(&self) -> Result<Gaussian2dParams> {
        let s: G2dSpec = parse(&self.params, "params")?;
        Gaussian2dParams::new(s.a, s.b, s.c)
    }

    /// The single-mode phase-space description of Gaussian families.
    pub fn gaussian(&self) -> Result<Option<GaussianState>> {
        let hbar = self.hbar();
        match self.family {
            Family::Ccs => Ok(Some(ccs_moments(&self.ccs()?, hbar)?)),
            Family::Gaussian => {
                let s: GaussianSpec = parse(&self.params, "params")?;
                Ok(Some(GaussianState::single_mode(
                    s.sxx.unwrap_or(hbar / 2.0),
                    s.spp.unwrap_or(hbar / 2.0),
                    s.sxp,
                    s.mx,
                    s.mp,
                    hbar,
                )?))
            }
            Family::FockVacuum => Ok(Some(GaussianState::vacuum(hbar)?)),
            _ => Ok(None),
        }
    }

    fn need_dim(&self) -> Result<usize> {
        self.dim
            .ok_or_else(|| Error::spec("dim", "a Fock dimension is required for this family and tuple"))
    }

    /// The state as a vector or density matrix.
    pub fn quantum_state(&self) -> Result<QuantumState> {
        let hbar = self.hbar();
        match self.family {
            Family::Ccs => ccs_state(&self.ccs()?, self.need_dim()?, hbar),
            Family::Gaussian => self.gaussian()?.expect("gaussian family").to_fock(self.need_dim()?),
            Family::FockVacuum => fock_vacuum(self.dim.unwrap_or(DEFAULT_VACUUM_DIM), hbar),
            Family::Gaussian2d => gaussian2d_fock(&self.g2d()?, self.need_dim()?, hbar),
            Family::Spin => {
                let s: SpinSpec = parse(&self.params, "params")?;
                let coeffs: Vec<C64> = match (s.coeffs, s.angles) {
                    (Some(_), Some(_)) => {
                        return Err(Error::spec("params", "give either coeffs or angles, not both"))
                    }
                    (Some(c), None) => c.into_iter().map(C64::from).collect(),
                    (None, Some(a)) => hyperspherical_coeffs(&a)?,
                    (None, None) if s.two_j == 2 => return reference_spin1_state(hbar),
                    (None, None) => return Err(Error::spec("params", "coeffs or angles required")),
                };
                if coeffs.len() != s.two_j + 1 {
                    return Err(Error::spec(
                        "params",
                        format!("spin two_j = {} needs {} coefficients, got {}", s.two_j, s.two_j + 1, coeffs.len()),
                    ));
                }
                spin_superposition(&coeffs, hbar)
            }
            Family::Raw => {
                let s: RawStateSpec = parse(&self.params, "params")?;
                match (s.vector, s.density) {
                    (Some(v), None) => {
                        QuantumState::pure(DVector::from_iterator(v.len(), v.into_iter().map(C64::from)), hbar)
                    }
                    (None, Some(d)) => QuantumState::mixed(complex_matrix(&d, "params.density")?, hbar),
                    _ => Err(Error::spec("params", "raw state needs exactly one of vector or density")),
                }
            }
        }
    }
}

fn set_path(root: &mut Value, path: &str, v: f64) -> std::result::Result<(), String> {
    let mut cur = root;
    let segs: Vec<&str> = path.split('.').collect();
    for (i, seg) in segs.iter().enumerate() {
        let last = i + 1 == segs.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), Value::from(v));
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(empty_object)
            }
            Value::Array(arr) => {
                let k: usize = seg.parse().map_err(|_| format!("`{seg}` is not an array index"))?;
                let len = arr.len();
                let slot = arr.get_mut(k).ok_or_else(|| format!("index {k} out of range ({len})"))?;
                if last {
                    *slot = Value::from(v);
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("cannot descend into `{seg}`")),
        };
    }
    Err("empty path".into())
}

/// A state together with the tuple of observables measured on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub state: StateSpec,
    pub tuple: TupleSpec,
}

impl Scenario {
    pub fn new(state: StateSpec, tuple: TupleSpec) -> Self {
        Self { state, tuple }
    }

    fn fock_moments(&self, state: &QuantumState, ops: &[Operator]) -> Result<MomentSet> {
        let opts = MomentOptions {
            centered: self.tuple.centered,
            ..Default::default()
        };
        moment_set(state, ops, &opts)
    }

    fn unordered(&self) -> Result<MomentSet> {
        let spec = &self.state;
        let hbar = spec.hbar();
        let centered = self.tuple.centered;
        let analytic = spec.dim.is_none() && spec.family != Family::FockVacuum;
        match self.tuple.tuple {
            TupleKind::Xp | TupleKind::Xpxi | TupleKind::QuadTriple => {
                if let (true, Some(gs)) = (analytic, spec.gaussian()?) {
                    let labels: &[&str] = match self.tuple.tuple {
                        TupleKind::Xp => &["x", "p"],
                        TupleKind::Xpxi => &["x", "p", "xi"],
                        _ => {
                            if !centered {
                                return Err(Error::spec("centered", "quad_triple is defined on centred quadratures"));
                            }
                            return quad_triple_moments(&gs);
                        }
                    };
                    let rows = [vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
                    let ms = gs.linear_moments(&rows[..labels.len()], centered)?;
                    return Ok(ms.with_labels(labels.iter().map(|s| s.to_string()).collect()));
                }
                if !matches!(spec.family, Family::Ccs | Family::Gaussian | Family::FockVacuum | Family::Raw) {
                    return Err(Error::spec("tuple", "oscillator tuples need a single-mode state"));
                }
                let state = spec.quantum_state()?;
                let pair = fock_pair(state.dim(), hbar)?;
                let ops = match self.tuple.tuple {
                    TupleKind::Xp => vec![pair.x.clone(), pair.p.clone()],
                    TupleKind::Xpxi => pair.xpxi()?,
                    _ => pair.quad_triple(&state)?,
                };
                self.fock_moments(&state, &ops)
            }
            TupleKind::SpinXyz => {
                if !matches!(spec.family, Family::Spin | Family::Raw) {
                    return Err(Error::spec("tuple", "spin_xyz needs a spin or raw state"));
                }
                let state = spec.quantum_state()?;
                let (lx, ly, lz) = spin_operators(state.dim() - 1, hbar)?;
                self.fock_moments(&state, &[lx, ly, lz])
            }
            TupleKind::XyPhaseSpace => {
                if spec.family != Family::Gaussian2d {
                    return Err(Error::spec("tuple", "xy_phase_space needs the gaussian2d family"));
                }
                if analytic {
                    if !centered {
                        return Err(Error::spec("centered", "gaussian2d moments are centred"));
                    }
                    return gaussian2d_moments(&spec.g2d()?, hbar);
                }
                let state = spec.quantum_state()?;
                let dim = spec.need_dim()?;
                self.fock_moments(&state, &two_mode_phase_space(dim, hbar)?)
            }
            TupleKind::Raw => {
                if self.tuple.operators.is_empty() {
                    return Err(Error::spec("operators", "raw tuple needs operators"));
                }
                let ops = self
                    .tuple
                    .operators
                    .iter()
                    .enumerate()
                    .map(|(k, op)| {
                        let field = format!("operators[{k}].matrix");
                        let m = complex_matrix(&op.matrix, &field)?;
                        let label = op.label.clone().unwrap_or_else(|| format!("z{}", k + 1));
                        Operator::new(label, m).map_err(|e| Error::spec(field, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let state = spec.quantum_state()?;
                self.fock_moments(&state, &ops)
            }
        }
    }

    pub fn moments(&self) -> Result<MomentSet> {
        let ms = self.unordered()?;
        match &self.tuple.order {
            None => Ok(ms),
            Some(order) => {
                let zero_based = order
                    .iter()
                    .map(|&k| k.checked_sub(1).ok_or_else(|| Error::spec("order", "indices are 1-based")))
                    .collect::<Result<Vec<_>>>()?;
                ms.reordered(&zero_based)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn scenario(state: Value, tuple: Value) -> Scenario {
        Scenario::new(
            serde_json::from_value(state).unwrap(),
            serde_json::from_value(tuple).unwrap(),
        )
    }

    #[test]
    fn set_nested_paths() {
        let s: StateSpec = serde_json::from_value(json!({"family": "spin", "params": {"angles": [0, 0, 0, 0]}})).unwrap();
        let t = s
            .with_values(&["angles.2".into(), "params.two_j".into(), "hbar".into()], &[1.5, 2.0, 0.5])
            .unwrap();
        assert_eq!(t.params["angles"][2], 1.5);
        assert_eq!(t.hbar, Some(0.5));
        assert!(s.with_values(&["angles.9".into()], &[0.0]).is_err());
        assert!(s.with_values(&["angles.x".into()], &[0.0]).is_err());
    }

    #[test]
    fn unknown_fields_are_reported() {
        let bad = serde_json::from_value::<StateSpec>(json!({"family": "ccs", "sigma": 1}));
        assert!(bad.is_err());
        let s = scenario(json!({"family": "ccs", "params": {"sigmaa": 1}}), json!({"tuple": "xpxi"}));
        let err = s.moments().unwrap_err();
        assert!(matches!(err, Error::Spec { ref field, .. } if field == "params"), "{err}");
    }

    #[test]
    fn ccs_analytic_and_fock_agree() {
        let a = scenario(json!({"family": "ccs"}), json!({"tuple": "xpxi"})).moments().unwrap();
        let b = scenario(json!({"family": "ccs", "dim": 60}), json!({"tuple": "xpxi"})).moments().unwrap();
        assert!((&a.x - &b.x).amax() < 1e-6);
        assert!((&a.y - &b.y).amax() < 1e-6);
        assert_eq!(a.labels, vec!["x", "p", "xi"]);
    }

    #[test]
    fn order_permutes() {
        let a = scenario(json!({"family": "spin"}), json!({"tuple": "spin_xyz"})).moments().unwrap();
        let b = scenario(json!({"family": "spin"}), json!({"tuple": "spin_xyz", "order": [3, 1, 2]}))
            .moments()
            .unwrap();
        assert_eq!(b.labels, vec!["Lz", "Lx", "Ly"]);
        assert_eq!(b.variance(0), a.variance(2));
        assert!(scenario(json!({"family": "spin"}), json!({"tuple": "spin_xyz", "order": [0, 1, 2]}))
            .moments()
            .is_err());
    }

    #[test]
    fn raw_matches_builtin() {
        let half = 0.5;
        let raw = scenario(
            json!({"family": "raw", "params": {"vector": [1, 0]}}),
            json!({"tuple": "raw", "operators": [
                {"label": "sx", "matrix": [[0, half], [half, 0]]},
                {"label": "sy", "matrix": [[0, [0, -half]], [[0, half], 0]]},
                {"label": "sz", "matrix": [[half, 0], [0, -half]]}
            ]}),
        )
        .moments()
        .unwrap();
        let spin = scenario(
            json!({"family": "spin", "params": {"two_j": 1, "coeffs": [1, 0]}}),
            json!({"tuple": "spin_xyz"}),
        )
        .moments()
        .unwrap();
        assert!((&raw.x - &spin.x).amax() < 1e-15);
        assert!((&raw.y - &spin.y).amax() < 1e-15);
    }

    #[test]
    fn family_tuple_mismatch() {
        assert!(scenario(json!({"family": "spin"}), json!({"tuple": "xy_phase_space"})).moments().is_err());
        assert!(scenario(json!({"family": "gaussian2d"}), json!({"tuple": "quad_triple"})).moments().is_err());
        assert!(scenario(json!({"family": "ccs"}), json!({"tuple": "raw"})).moments().is_err());
    }
}
