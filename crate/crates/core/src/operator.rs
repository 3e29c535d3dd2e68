//! Hermitian operators and quantum states on a finite-dimensional Hilbert space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Named numerical tolerances. The defaults are the values every check in the
/// crate uses unless a caller overrides them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity, `max |M - M^dagger|` relative to `max(1, max |M|)`.
    pub herm: f64,
    /// Smallest eigenvalue allowed in a PSD test.
    pub psd: f64,
    /// Inequality margin slack.
    pub ineq: f64,
    /// Imaginary residue discarded from quantities that must be real.
    pub residue: f64,
    /// State normalisation.
    pub norm: f64,
}

impl Tolerances {
    pub const HERM: f64 = 1e-12;
    pub const PSD: f64 = 1e-9;
    pub const INEQ: f64 = 1e-9;
    pub const RESIDUE: f64 = 1e-10;
    pub const NORM: f64 = 1e-12;
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: Self::HERM,
            psd: Self::PSD,
            ineq: Self::INEQ,
            residue: Self::RESIDUE,
            norm: Self::NORM,
        }
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation `|M_ij - conj(M_ji)|`.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn ensure_hermitian(m: &DMatrix<C64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let dev = hermitian_deviation(m);
    if dev > tol * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// A labelled Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    label: String,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(label: impl Into<String>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("operator dimension must be >= 1".into()));
        }
        ensure_hermitian(&matrix, Tolerances::HERM)?;
        Ok(Self {
            label: label.into(),
            matrix,
        })
    }

    pub fn from_real(label: impl Into<String>, matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(label, matrix.map(|x| C64::new(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            label: "I".into(),
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `self + other`, labelled `a+b`.
    pub fn sum(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim(), other.dim())?;
        Ok(Operator {
            label: format!("{}+{}", self.label, other.label),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator {
            label: format!("{factor}*{}", self.label),
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Operator {
        let mut matrix = self.matrix.clone();
        for i in 0..self.dim() {
            matrix[(i, i)] += C64::new(shift, 0.0);
        }
        Operator {
            label: self.label.clone(),
            matrix,
        }
    }

    /// Symmetrised product `(ab + ba) / 2`, always Hermitian.
    pub fn sym_product(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim(), other.dim())?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        Ok(Operator {
            label: format!("{{{},{}}}/2", self.label, other.label),
            matrix: (ab + ba) * C64::new(0.5, 0.0),
        })
    }

    pub fn square(&self) -> Operator {
        Operator {
            label: format!("{}^2", self.label),
            matrix: &self.matrix * &self.matrix,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            label: format!("{}(x){}", self.label, other.label),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

/// A pure state vector or a density matrix, together with the value of ħ
/// used to build the operators it is measured with.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    kind: StateKind,
    hbar: f64,
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

impl QuantumState {
    /// A pure state; `vector` must already be normalised.
    pub fn pure(vector: DVector<C64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if vector.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > Tolerances::NORM.max(4.0 * f64::EPSILON * vector.len() as f64) {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self {
            kind: StateKind::Pure(vector),
            hbar,
        })
    }

    /// A pure state built from an unnormalised vector.
    pub fn pure_normalized(vector: DVector<C64>, hbar: f64) -> Result<Self> {
        let norm = vector.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        Self::pure(vector.unscale(norm), hbar)
    }

    pub fn mixed(rho: DMatrix<C64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if rho.nrows() == 0 {
            return Err(Error::InvalidState("empty density matrix".into()));
        }
        ensure_hermitian(&rho, Tolerances::HERM)?;
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > Tolerances::NORM.max(1e-13 * rho.nrows() as f64)
            || trace.im.abs() > Tolerances::NORM
        {
            return Err(Error::InvalidState(format!("density matrix trace is {trace}")));
        }
        let min_eig = hermitian_eigenvalues(&rho).min();
        if min_eig < -Tolerances::RESIDUE {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            kind: StateKind::Mixed(rho),
            hbar,
        })
    }

    /// The convex mixture `sum_k w_k |v_k><v_k|` of normalised vectors.
    pub fn mixture(weights: &[f64], vectors: &[DVector<C64>], hbar: f64) -> Result<Self> {
        if weights.len() != vectors.len() || vectors.is_empty() {
            return Err(Error::InvalidState("mixture needs one weight per vector".into()));
        }
        let dim = vectors[0].len();
        let total: f64 = weights.iter().sum();
        let mut rho = DMatrix::<C64>::zeros(dim, dim);
        for (w, v) in weights.iter().zip(vectors) {
            check_dims(dim, v.len())?;
            if *w < 0.0 {
                return Err(Error::InvalidState("negative mixture weight".into()));
            }
            rho += v * v.adjoint() * C64::new(*w / total, 0.0);
        }
        // exact symmetrisation of round-off before validation
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        Self::mixed(rho, hbar)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            StateKind::Pure(v) => v.len(),
            StateKind::Mixed(r) => r.nrows(),
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, StateKind::Pure(_))
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        self.hbar = hbar;
        Ok(self)
    }

    /// Density matrix of the state (built on demand for pure states).
    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.kind {
            StateKind::Pure(v) => v * v.adjoint(),
            StateKind::Mixed(r) => r.clone(),
        }
    }

    /// Raw complex trace `Tr(rho M)` for an arbitrary square matrix.
    pub(crate) fn raw_mean(&self, m: &DMatrix<C64>) -> C64 {
        match &self.kind {
            StateKind::Pure(v) => v.dotc(&(m * v)),
            StateKind::Mixed(rho) => trace_of_product(rho, m),
        }
    }
}

/// `Tr(a b)` without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `<op>` in `state`. The imaginary part of the raw trace is checked and discarded.
pub fn expectation(state: &QuantumState, op: &Operator) -> Result<f64> {
    check_dims(state.dim(), op.dim())?;
    let z = state.raw_mean(op.matrix());
    let threshold = Tolerances::RESIDUE * z.re.abs().max(1.0);
    if z.im.abs() > threshold {
        return Err(Error::ImaginaryResidue {
            residue: z.im.abs(),
            threshold,
            context: "expectation value",
        });
    }
    Ok(z.re)
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<DMatrix<C64>> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    pub tolerance: f64,
}

/// Eigenvalues of a Hermitian matrix, from nalgebra's deterministic
/// tridiagonalisation + implicit QR.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> DVector<f64> {
    m.clone().symmetric_eigenvalues()
}

pub fn psd_check(m: &DMatrix<C64>, tol: f64) -> Result<PsdReport> {
    ensure_hermitian(m, Tolerances::HERM)?;
    let min_eigenvalue = hermitian_eigenvalues(m).min();
    Ok(PsdReport {
        min_eigenvalue,
        is_psd: min_eigenvalue >= -tol,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(Operator::new("n", m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let state = QuantumState::pure(DVector::from_vec(vec![c(1., 0.), c(0., 0.)]), 1.0).unwrap();
        let op = Operator::identity(3);
        assert!(matches!(
            expectation(&state, &op),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn psd_identity_and_indefinite() {
        let id = DMatrix::<C64>::identity(3, 3);
        let r = psd_check(&id, 1e-9).unwrap();
        assert!(r.is_psd);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-15);

        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1., 0.), c(-0.5, 0.)]));
        let r = psd_check(&d, 1e-9).unwrap();
        assert!(!r.is_psd);
        assert!((r.min_eigenvalue + 0.5).abs() < 1e-15);
    }

    #[test]
    fn psd_check_is_deterministic() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(2., 0.), c(0.3, 0.1), c(0., -0.4),
                c(0.3, -0.1), c(1., 0.), c(0.2, 0.),
                c(0., 0.4), c(0.2, 0.), c(0.5, 0.),
            ],
        );
        let a = psd_check(&m, 1e-9).unwrap();
        let b = psd_check(&m, 1e-9).unwrap();
        assert_eq!(a.min_eigenvalue.to_bits(), b.min_eigenvalue.to_bits());
    }

    #[test]
    fn mixed_state_validation() {
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.7, 0.), c(0.4, 0.)]));
        assert!(QuantumState::mixed(rho, 1.0).is_err());
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.2, 0.), c(-0.2, 0.)]));
        assert!(matches!(QuantumState::mixed(rho, 1.0), Err(Error::InvalidState(_))));
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.6, 0.), c(0.4, 0.)]));
        let st = QuantumState::mixed(rho, 1.0).unwrap();
        let sz = Operator::from_real("sz", DMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])).unwrap();
        assert!((expectation(&st, &sz).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unnormalised_pure_state_rejected() {
        let v = DVector::from_vec(vec![c(1., 0.), c(1., 0.)]);
        assert!(QuantumState::pure(v.clone(), 1.0).is_err());
        assert!(QuantumState::pure_normalized(v, 1.0).is_ok());
        assert!(QuantumState::pure_normalized(DVector::zeros(2), 1.0).is_err());
    }

    #[test]
    fn commutator_of_operator_with_itself_vanishes() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., -2.), c(0., 2.), c(3., 0.)]);
        let a = Operator::new("a", m).unwrap();
        let k = commutator(&a, &a).unwrap();
        assert!(k.iter().all(|z| z.norm() == 0.0));
    }
}
