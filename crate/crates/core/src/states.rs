//! Concrete states and operator tuples: truncated oscillators, correlated
//! coherent states, spin-j operators and superpositions, and the correlated
//! two-dimensional Gaussian wavefunction.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gaussian::GaussianState;
use crate::moments::MomentSet;
use crate::operator::{Operator, QuantumState};
use crate::{Error, Result, C64};

/// Largest tail weight `1 - sum |c_n|^2` accepted from a Fock projection.
pub const MAX_TAIL_WEIGHT: f64 = 1e-8;

/// Position and momentum on a truncated oscillator basis.
#[derive(Debug, Clone)]
pub struct FockPair {
    pub dim: usize,
    pub x: Operator,
    pub p: Operator,
    pub hbar: f64,
}

/// Truncated lowering operator, `a|n> = sqrt(n)|n-1>`.
pub fn lowering(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `x = sqrt(hbar/2)(a + a^dagger)`, `p = i sqrt(hbar/2)(a^dagger - a)`.
pub fn fock_pair(dim: usize, hbar: f64) -> Result<FockPair> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("Fock dimension must be >= 2, got {dim}")));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    let a = lowering(dim);
    let ad = a.adjoint();
    let s = (hbar / 2.0).sqrt();
    let x = (&a + &ad) * C64::new(s, 0.0);
    let p = (&ad - &a) * C64::new(0.0, s);
    Ok(FockPair {
        dim,
        x: Operator::new("x", x)?,
        p: Operator::new("p", p)?,
        hbar,
    })
}

pub fn fock_vacuum(dim: usize, hbar: f64) -> Result<QuantumState> {
    if dim < 1 {
        return Err(Error::InvalidParameter("Fock dimension must be >= 1".into()));
    }
    let mut v = DVector::<C64>::zeros(dim);
    v[0] = C64::new(1.0, 0.0);
    QuantumState::pure(v, hbar)
}

impl FockPair {
    /// `(x, p, x + p)`.
    pub fn xpxi(&self) -> Result<Vec<Operator>> {
        let xi = self.x.sum(&self.p)?.relabel("xi");
        Ok(vec![self.x.clone(), self.p.clone(), xi])
    }

    /// `((dp)^2, (dx)^2, (dp dx + dx dp)/2)` centred on the means of `state`.
    pub fn quad_triple(&self, state: &QuantumState) -> Result<Vec<Operator>> {
        let mx = crate::operator::expectation(state, &self.x)?;
        let mp = crate::operator::expectation(state, &self.p)?;
        let dx = self.x.shifted(-mx);
        let dp = self.p.shifted(-mp);
        Ok(vec![
            dp.square().relabel("dp^2"),
            dx.square().relabel("dx^2"),
            dp.sym_product(&dx)?.relabel("{dp,dx}/2"),
        ])
    }
}

/// Oscillator eigenfunctions `phi_n(x)` for `n < nmax` at each grid point,
/// with `x` in units where the ground state has `<x^2> = hbar/2`.
/// Row `n`, column `i`.
pub fn hermite_functions(xs: &[f64], nmax: usize, hbar: f64) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(nmax, xs.len());
    let norm0 = (PI * hbar).powf(-0.25);
    for (i, &x) in xs.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = norm0 * (-x * x / (2.0 * hbar)).exp();
        for n in 0..nmax {
            out[(n, i)] = cur;
            let nf = n as f64;
            let next = (2.0 / (hbar * (nf + 1.0))).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    out
}

fn grid(center: f64, half_width: f64, kmax: f64) -> (Vec<f64>, f64) {
    let h = PI / kmax;
    let steps = (half_width / h).ceil() as usize;
    let xs = (0..=2 * steps)
        .map(|i| center + (i as f64 - steps as f64) * h)
        .collect();
    (xs, h)
}

fn suggested_dim(dim: usize, mean_photons: f64) -> usize {
    (2 * dim).max((8.0 * mean_photons + 40.0).ceil() as usize)
}

/// Fock coefficients of the pure single-mode Gaussian with means `(x0, p0)`,
/// position variance `sxx` and symmetrised covariance `sxp`. The
/// wavefunction is projected onto the oscillator eigenfunctions with the
/// trapezoid rule, which converges geometrically for this integrand.
pub fn pure_gaussian_fock(
    x0: f64,
    p0: f64,
    sxx: f64,
    sxp: f64,
    hbar: f64,
    dim: usize,
) -> Result<DVector<C64>> {
    if !(sxx > 0.0 && sxx.is_finite()) {
        return Err(Error::InvalidParameter(format!("position variance must be positive, got {sxx}")));
    }
    let chirp = 2.0 * sxp / hbar;
    let spp = (hbar * hbar / 4.0 + sxp * sxp) / sxx;
    let width = sxx.sqrt();
    let kmax = 2.0
        * (((2 * dim + 1) as f64 / hbar).sqrt()
            + 4.0 / hbar.sqrt()
            + p0.abs() / hbar
            + 10.0 * spp.sqrt() / hbar);
    let (xs, h) = grid(x0, 12.0 * width, kmax);
    let norm = (2.0 * PI * sxx).powf(-0.25);
    let psi: Vec<C64> = xs
        .iter()
        .map(|&x| {
            let u = x - x0;
            let exponent = C64::new(-u * u / (4.0 * sxx), chirp * u * u / (4.0 * sxx) + p0 * x / hbar);
            exponent.exp() * norm
        })
        .collect();
    let phi = hermite_functions(&xs, dim, hbar);
    let mut coeffs = DVector::<C64>::zeros(dim);
    for n in 0..dim {
        let mut acc = C64::new(0.0, 0.0);
        for (i, z) in psi.iter().enumerate() {
            acc += z * phi[(n, i)];
        }
        coeffs[n] = acc * h;
    }
    let weight: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    let tail = (1.0 - weight).max(0.0);
    if tail > MAX_TAIL_WEIGHT {
        let nbar = (sxx + spp + x0 * x0 + p0 * p0) / (2.0 * hbar) - 0.5;
        return Err(Error::Truncation {
            tail_weight: tail,
            suggested_dim: suggested_dim(dim, nbar),
        });
    }
    Ok(coeffs.unscale(weight.sqrt()))
}

/// Parameters of the correlated coherent state
/// `psi(x) ~ exp[-x^2 (1 - i r / sqrt(1 - r^2)) / (4 sigma) + alpha x / sqrt(sigma)]`.
/// `sigma` is the position variance in units of ħ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcsParams {
    pub sigma: f64,
    pub r: f64,
    #[serde(default = "zero_alpha")]
    pub alpha: C64,
}

fn zero_alpha() -> C64 {
    C64::new(0.0, 0.0)
}

impl CcsParams {
    pub fn new(sigma: f64, r: f64, alpha: C64) -> Result<Self> {
        let p = Self { sigma, r, alpha };
        p.validate()?;
        Ok(p)
    }

    /// `sigma = 1/sqrt(3)`, `r = -1/2`, `alpha = 0`.
    pub fn counterexample() -> Self {
        Self {
            sigma: 1.0 / 3f64.sqrt(),
            r: -0.5,
            alpha: zero_alpha(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.r.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("correlation r must lie in (-1, 1), got {}", self.r)));
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        Ok(())
    }
}

/// Analytic means and covariances of the correlated coherent state.
/// `sxx sxp (1 - r^2) = hbar^2/4`: the state saturates the Schrödinger bound.
pub fn ccs_moments(params: &CcsParams, hbar: f64) -> Result<GaussianState> {
    params.validate()?;
    let sxx = params.sigma * hbar;
    let one_minus = 1.0 - params.r * params.r;
    let spp = hbar * hbar / (4.0 * sxx * one_minus);
    let sxp = params.r * hbar / (2.0 * one_minus.sqrt());
    let chirp = params.r / one_minus.sqrt();
    let x0 = 2.0 * sxx.sqrt() * params.alpha.re;
    let p0 = hbar * (chirp * x0 / (2.0 * sxx) + params.alpha.im / sxx.sqrt());
    GaussianState::single_mode(sxx, spp, sxp, x0, p0, hbar)
}

/// The correlated coherent state expanded in the first `dim` Fock states.
pub fn ccs_state(params: &CcsParams, dim: usize, hbar: f64) -> Result<QuantumState> {
    let gs = ccs_moments(params, hbar)?;
    let v = pure_gaussian_fock(gs.means[0], gs.means[1], gs.sxx(), gs.sxp(), hbar, dim)?;
    QuantumState::pure(v, hbar)
}

/// `(L_x, L_y, L_z)` for spin `j = two_j / 2` in the basis `m = j, j-1, ..., -j`.
pub fn spin_operators(two_j: usize, hbar: f64) -> Result<(Operator, Operator, Operator)> {
    if two_j < 1 {
        return Err(Error::InvalidParameter("two_j must be >= 1".into()));
    }
    let dim = two_j + 1;
    let j = two_j as f64 / 2.0;
    let m = |i: usize| j - i as f64;
    let mut raise = DMatrix::<C64>::zeros(dim, dim);
    for i in 1..dim {
        let mi = m(i);
        raise[(i - 1, i)] = C64::new(hbar * (j * (j + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let lx = (&raise + &lower) * C64::new(0.5, 0.0);
    let ly = (&raise - &lower) * C64::new(0.0, -0.5);
    let lz = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            C64::new(hbar * m(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok((
        Operator::new("Lx", lx)?,
        Operator::new("Ly", ly)?,
        Operator::new("Lz", lz)?,
    ))
}

/// Normalise and rotate the global phase so that the first non-negligible
/// coefficient is real and positive.
pub fn gauge_fix(coeffs: &[C64]) -> Result<Vec<C64>> {
    let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidState("coefficients have zero norm".into()));
    }
    let lead = coeffs
        .iter()
        .find(|z| z.norm() > 1e-14 * norm)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    Ok(coeffs.iter().map(|z| z * phase / norm).collect())
}

/// Normalised superposition in the `|j, m>` basis ordered `m = j ... -j`.
pub fn spin_superposition(coeffs: &[C64], hbar: f64) -> Result<QuantumState> {
    if coeffs.len() < 2 {
        return Err(Error::InvalidState("a spin state needs at least two components".into()));
    }
    let fixed = gauge_fix(coeffs)?;
    QuantumState::pure_normalized(DVector::from_vec(fixed), hbar)
}

/// Coefficients from `d - 1` hyperspherical angles followed by `d - 1` relative
/// phases. The first coefficient is `cos(theta_1) >= 0` for `theta_1` in `[0, pi/2]`.
pub fn hyperspherical_coeffs(angles: &[f64]) -> Result<Vec<C64>> {
    if angles.len() < 2 || angles.len() % 2 != 0 {
        return Err(Error::InvalidParameter(
            "angles must hold d-1 polar angles followed by d-1 phases".into(),
        ));
    }
    let k = angles.len() / 2;
    let (thetas, phis) = angles.split_at(k);
    let mut out = Vec::with_capacity(k + 1);
    let mut radius = 1.0;
    for i in 0..=k {
        let amp = if i < k { radius * thetas[i].cos() } else { radius };
        if i < k {
            radius *= thetas[i].sin();
        }
        let phase = if i == 0 { 0.0 } else { phis[i - 1] };
        out.push(C64::from_polar(amp, phase));
    }
    Ok(out)
}

/// `(|1,1> + (1+i)|1,0> + i|1,-1>) / 2`.
pub fn reference_spin1_state(hbar: f64) -> Result<QuantumState> {
    spin_superposition(
        &[C64::new(0.5, 0.0), C64::new(0.5, 0.5), C64::new(0.0, 0.5)],
        hbar,
    )
}

/// Real Gaussian `psi(x, y) ~ exp(-a x^2/2 - b x y - c y^2/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian2dParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Gaussian2dParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.c > 0.0 && self.det() > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need a > 0, c > 0 and ac - b^2 > 0 (a={}, b={}, c={})",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

/// Phase-space state of the 2D Gaussian in mode order `(x, p_x, y, p_y)`.
pub fn gaussian2d_state(params: &Gaussian2dParams, hbar: f64) -> Result<GaussianState> {
    params.validate()?;
    let Gaussian2dParams { a, b, c } = *params;
    let d = params.det();
    let h2 = hbar * hbar;
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        c / (2.0 * d), 0.0,           -b / (2.0 * d), 0.0,
        0.0,           a * h2 / 2.0,  0.0,            b * h2 / 2.0,
        -b / (2.0 * d), 0.0,          a / (2.0 * d),  0.0,
        0.0,           b * h2 / 2.0,  0.0,            c * h2 / 2.0,
    ]);
    GaussianState::new(2, vec![0.0; 4], cov, hbar)
}

/// Moments of `(x, p_x, y, p_y)` in the 2D Gaussian.
pub fn gaussian2d_moments(params: &Gaussian2dParams, hbar: f64) -> Result<MomentSet> {
    let gs = gaussian2d_state(params, hbar)?;
    let rows = (0..4)
        .map(|k| (0..4).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect::<Vec<Vec<f64>>>();
    gs.linear_moments(&rows, true)
        .map(|ms| ms.with_labels(["x", "px", "y", "py"].map(String::from).to_vec()))
}

/// `(x ⊗ I, p ⊗ I, I ⊗ x, I ⊗ p)` on a `dim x dim` two-mode truncation.
pub fn two_mode_phase_space(dim: usize, hbar: f64) -> Result<Vec<Operator>> {
    let pair = fock_pair(dim, hbar)?;
    let id = Operator::identity(dim);
    Ok(vec![
        pair.x.kron(&id).relabel("x"),
        pair.p.kron(&id).relabel("px"),
        id.kron(&pair.x).relabel("y"),
        id.kron(&pair.p).relabel("py"),
    ])
}

/// The 2D Gaussian on the two-mode Fock basis, index `m * dim + n` for `|m>|n>`.
pub fn gaussian2d_fock(params: &Gaussian2dParams, dim: usize, hbar: f64) -> Result<QuantumState> {
    params.validate()?;
    let Gaussian2dParams { a, b, c } = *params;
    let d = params.det();
    let (vx, vy) = (c / (2.0 * d), a / (2.0 * d));
    let (px, py) = (a * hbar * hbar / 2.0, c * hbar * hbar / 2.0);
    let k_osc = ((2 * dim + 1) as f64 / hbar).sqrt() + 4.0 / hbar.sqrt();
    let (xs, hx) = grid(0.0, 12.0 * vx.sqrt(), 2.0 * (k_osc + 10.0 * px.sqrt() / hbar));
    let (ys, hy) = grid(0.0, 12.0 * vy.sqrt(), 2.0 * (k_osc + 10.0 * py.sqrt() / hbar));
    let norm = (d.sqrt() / PI).sqrt();
    let psi = DMatrix::from_fn(xs.len(), ys.len(), |i, j| {
        let (x, y) = (xs[i], ys[j]);
        norm * (-a * x * x / 2.0 - b * x * y - c * y * y / 2.0).exp()
    });
    let phi_x = hermite_functions(&xs, dim, hbar);
    let phi_y = hermite_functions(&ys, dim, hbar);
    let coeffs = &phi_x * psi * phi_y.transpose() * (hx * hy);
    let weight: f64 = coeffs.iter().map(|v| v * v).sum();
    let tail = (1.0 - weight).max(0.0);
    if tail > MAX_TAIL_WEIGHT {
        let nbar = (vx + vy + px + py) / (2.0 * hbar);
        return Err(Error::Truncation {
            tail_weight: tail,
            suggested_dim: suggested_dim(dim, nbar),
        });
    }
    let v = DVector::from_fn(dim * dim, |k, _| C64::new(coeffs[(k / dim, k % dim)], 0.0));
    QuantumState::pure_normalized(v, hbar)
}
