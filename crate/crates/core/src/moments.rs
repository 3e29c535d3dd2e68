//! First and second moments of an ordered tuple of observables.
//!
//! For operators `z_1..z_n` the set holds the means `<z_k>`, the symmetric
//! covariance matrix `X_mn = <{dz_m, dz_n}>/2` and the antisymmetric matrix of
//! commutator means `Y_mn = <[z_m, z_n]>/(2i)`. Together they form the
//! Hermitian matrix `F = X + iY`, `F_mn = <dz_m dz_n>`, which is PSD for every
//! physical state.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::operator::{Operator, QuantumState, StateKind, Tolerances};
use crate::{Error, Result, C64};

pub const MIN_TUPLE: usize = 2;
pub const MAX_TUPLE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    /// Centre the operators on their means before forming products. With
    /// `false` the raw second moments are used, so `X_jj = <z_j^2>`.
    pub centered: bool,
    pub tolerances: Tolerances,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            centered: true,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MomentSetJson", into = "MomentSetJson")]
pub struct MomentSet {
    pub means: Vec<f64>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub hbar: f64,
    pub labels: Vec<String>,
}

/// Wire format: `{n, means, X, Y, hbar}` with nested row-major matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MomentSetJson {
    n: usize,
    means: Vec<f64>,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    y: Vec<Vec<f64>>,
    hbar: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn from_rows(rows: &[Vec<f64>], n: usize, field: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::spec(field, format!("expected a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl From<MomentSet> for MomentSetJson {
    fn from(ms: MomentSet) -> Self {
        MomentSetJson {
            n: ms.n(),
            x: to_rows(&ms.x),
            y: to_rows(&ms.y),
            means: ms.means,
            hbar: ms.hbar,
            labels: ms.labels,
        }
    }
}

impl TryFrom<MomentSetJson> for MomentSet {
    type Error = Error;

    fn try_from(j: MomentSetJson) -> Result<Self> {
        if j.means.len() != j.n {
            return Err(Error::spec("means", format!("expected {} entries", j.n)));
        }
        let x = from_rows(&j.x, j.n, "X")?;
        let y = from_rows(&j.y, j.n, "Y")?;
        let mut ms = MomentSet::new(j.means, x, y, j.hbar)?;
        if !j.labels.is_empty() {
            if j.labels.len() != j.n {
                return Err(Error::spec("labels", format!("expected {} labels", j.n)));
            }
            ms.labels = j.labels;
        }
        Ok(ms)
    }
}

const SYMMETRY_TOL: f64 = 1e-10;

impl MomentSet {
    pub fn new(means: Vec<f64>, x: DMatrix<f64>, y: DMatrix<f64>, hbar: f64) -> Result<Self> {
        let n = means.len();
        if x.shape() != (n, n) || y.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.nrows().max(y.nrows()),
            });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        let scale = x.amax().max(y.amax()).max(1.0);
        for i in 0..n {
            if x[(i, i)] < -SYMMETRY_TOL * scale {
                return Err(Error::InvalidState(format!(
                    "negative variance X[{i}][{i}] = {}",
                    x[(i, i)]
                )));
            }
            for j in 0..n {
                if (x[(i, j)] - x[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidState("X is not symmetric".into()));
                }
                if (y[(i, j)] + y[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidState("Y is not antisymmetric".into()));
                }
            }
        }
        if means.iter().chain(x.iter()).chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moment set"));
        }
        let labels = (1..=n).map(|k| format!("z{k}")).collect();
        Ok(Self {
            means,
            x,
            y,
            hbar,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        if labels.len() == self.n() {
            self.labels = labels;
        }
        self
    }

    pub fn n(&self) -> usize {
        self.means.len()
    }

    /// `X_jk`, 0-based.
    pub fn cov(&self, j: usize, k: usize) -> f64 {
        self.x[(j, k)]
    }

    /// `Y_jk`, 0-based.
    pub fn comm(&self, j: usize, k: usize) -> f64 {
        self.y[(j, k)]
    }

    pub fn variance(&self, k: usize) -> f64 {
        self.x[(k, k)]
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            return Err(Error::IndexOutOfRange { index: k, n: self.n() });
        }
        Ok(())
    }

    /// `F = X + iY`.
    pub fn f_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| C64::new(self.x[(i, j)], self.y[(i, j)]))
    }

    /// The moment set of the tuple `(z_order[0], z_order[1], ...)`.
    pub fn reordered(&self, order: &[usize]) -> Result<MomentSet> {
        let n = self.n();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::InvalidParameter(format!("order must list {n} indices")));
        }
        for &k in order {
            self.check_index(k)?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidParameter("order repeats an index".into()));
            }
        }
        Ok(MomentSet {
            means: order.iter().map(|&k| self.means[k]).collect(),
            x: DMatrix::from_fn(n, n, |i, j| self.x[(order[i], order[j])]),
            y: DMatrix::from_fn(n, n, |i, j| self.y[(order[i], order[j])]),
            hbar: self.hbar,
            labels: order.iter().map(|&k| self.labels[k].clone()).collect(),
        })
    }

    /// Moments of the rescaled tuple `lambda_k z_k`.
    pub fn scaled(&self, lambdas: &[f64]) -> Result<MomentSet> {
        if lambdas.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: lambdas.len(),
            });
        }
        let n = self.n();
        Ok(MomentSet {
            means: self.means.iter().zip(lambdas).map(|(m, l)| m * l).collect(),
            x: DMatrix::from_fn(n, n, |i, j| lambdas[i] * lambdas[j] * self.x[(i, j)]),
            y: DMatrix::from_fn(n, n, |i, j| lambdas[i] * lambdas[j] * self.y[(i, j)]),
            hbar: self.hbar,
            labels: self.labels.clone(),
        })
    }
}

/// Means, `X` and `Y` for an ordered tuple of operators in `state`.
pub fn moment_set(state: &QuantumState, ops: &[Operator], opts: &MomentOptions) -> Result<MomentSet> {
    let n = ops.len();
    if !(MIN_TUPLE..=MAX_TUPLE).contains(&n) {
        return Err(Error::TupleSize {
            what: "moment_set",
            expected: MAX_TUPLE,
            found: n,
        });
    }
    for op in ops {
        if op.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: op.dim(),
            });
        }
    }
    let means = ops
        .iter()
        .map(|op| crate::operator::expectation(state, op))
        .collect::<Result<Vec<_>>>()?;

    let shifted: Vec<DMatrix<C64>> = ops
        .iter()
        .zip(&means)
        .map(|(op, m)| {
            if opts.centered {
                op.shifted(-m).into_matrix()
            } else {
                op.matrix().clone()
            }
        })
        .collect();

    // F_mn = <dz_m dz_n>
    let f = match state.kind() {
        StateKind::Pure(psi) => {
            let applied: Vec<DVector<C64>> = shifted.iter().map(|m| m * psi).collect();
            DMatrix::from_fn(n, n, |i, j| applied[i].dotc(&applied[j]))
        }
        StateKind::Mixed(rho) => {
            let left: Vec<DMatrix<C64>> = shifted.iter().map(|m| rho * m).collect();
            DMatrix::from_fn(n, n, |i, j| crate::operator::trace_of_product(&left[i], &shifted[j]))
        }
    };

    let scale = f.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let threshold = opts.tolerances.residue * scale;
    let mut x = DMatrix::<f64>::zeros(n, n);
    let mut y = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let anti = (f[(i, j)] + f[(j, i)]) * 0.5;
            let comm = (f[(i, j)] - f[(j, i)]) * 0.5;
            if anti.im.abs() > threshold {
                return Err(Error::ImaginaryResidue {
                    residue: anti.im.abs(),
                    threshold,
                    context: "anticommutator mean",
                });
            }
            if comm.re.abs() > threshold {
                return Err(Error::ImaginaryResidue {
                    residue: comm.re.abs(),
                    threshold,
                    context: "commutator mean",
                });
            }
            x[(i, j)] = anti.re;
            // <[z_i, z_j]>/(2i) = Im(F_ij - F_ji)/2
            y[(i, j)] = comm.im;
        }
    }
    let labels = ops.iter().map(|op| op.label().to_string()).collect();
    Ok(MomentSet::new(means, x, y, state.hbar())?.with_labels(labels))
}

/// `G^2 = X_jk^2 + Y_jk^2`, the right side of the Robertson-Schrödinger pair bound.
pub fn schrodinger_bound(ms: &MomentSet, j: usize, k: usize) -> Result<f64> {
    ms.check_index(j)?;
    ms.check_index(k)?;
    Ok(ms.cov(j, k).powi(2) + ms.comm(j, k).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{fock_pair, spin_operators, spin_superposition};

    #[test]
    fn vacuum_xp_moments() {
        let pair = fock_pair(40, 1.0).unwrap();
        let mut v = DVector::<C64>::zeros(40);
        v[0] = C64::new(1.0, 0.0);
        let st = QuantumState::pure(v, 1.0).unwrap();
        let ms = moment_set(&st, &[pair.x.clone(), pair.p.clone()], &Default::default()).unwrap();
        assert!((ms.cov(0, 0) - 0.5).abs() < 1e-14);
        assert!((ms.cov(1, 1) - 0.5).abs() < 1e-14);
        assert!(ms.cov(0, 1).abs() < 1e-14);
        assert!((ms.comm(0, 1) - 0.5).abs() < 1e-14);
        assert!((schrodinger_bound(&ms, 0, 1).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn spin1_reference_state_moments() {
        let (lx, ly, lz) = spin_operators(2, 1.0).unwrap();
        let st = crate::states::reference_spin1_state(1.0).unwrap();
        let ms = moment_set(&st, &[lx, ly, lz], &Default::default()).unwrap();
        assert!((ms.variance(0) - 0.25).abs() < 1e-12);
        assert!((ms.variance(1) - 0.25).abs() < 1e-12);
        assert!((ms.variance(2) - 0.5).abs() < 1e-12);
        // L_xy = -1/4, Y_xy = <L_z>/2 = 0
        assert!((ms.cov(0, 1) + 0.25).abs() < 1e-12);
        assert!(ms.comm(0, 1).abs() < 1e-12);
        assert!((schrodinger_bound(&ms, 0, 1).unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_operator_has_zero_commutator() {
        let (lx, _, _) = spin_operators(3, 1.0).unwrap();
        let st = spin_superposition(
            &[C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.7, 0.0), C64::new(0.1, -0.1)],
            1.0,
        )
        .unwrap();
        let ms = moment_set(&st, &[lx.clone(), lx], &Default::default()).unwrap();
        assert_eq!(ms.comm(0, 1), 0.0);
        let g2 = schrodinger_bound(&ms, 0, 1).unwrap();
        assert!((g2 - ms.variance(0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn uncentered_moments_use_raw_squares() {
        let (_, _, lz) = spin_operators(2, 1.0).unwrap();
        let (lx, _, _) = spin_operators(2, 1.0).unwrap();
        let st = spin_superposition(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], 1.0)
            .unwrap();
        let opts = MomentOptions {
            centered: false,
            ..Default::default()
        };
        let ms = moment_set(&st, &[lz.clone(), lx.clone()], &opts).unwrap();
        assert!((ms.variance(0) - 1.0).abs() < 1e-14);
        let ms = moment_set(&st, &[lz, lx], &Default::default()).unwrap();
        assert!(ms.variance(0).abs() < 1e-14);
    }

    #[test]
    fn tuple_size_and_index_errors() {
        let (lx, ly, _) = spin_operators(1, 1.0).unwrap();
        let st = spin_superposition(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(
            moment_set(&st, &[lx.clone()], &Default::default()),
            Err(Error::TupleSize { .. })
        ));
        let ms = moment_set(&st, &[lx, ly], &Default::default()).unwrap();
        assert!(matches!(schrodinger_bound(&ms, 0, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn json_shape() {
        let ms = MomentSet::new(
            vec![0.0, 1.0],
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]),
            1.0,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&ms).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["X"][0][1], 0.1);
        assert_eq!(v["Y"][1][0], -0.5);
        let back: MomentSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, ms);

        let bad = serde_json::json!({"n": 2, "means": [0, 0], "X": [[1, 0], [0, 1]],
            "Y": [[0, 1], [1, 0]], "hbar": 1.0});
        assert!(serde_json::from_value::<MomentSet>(bad).is_err());
    }
}
