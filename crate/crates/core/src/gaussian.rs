//! Gaussian phase-space states and their fourth-order moment calculus.
//!
//! The Wigner function of a Gaussian state is a classical Gaussian, so
//! symmetrically ordered (Weyl) fourth moments of centred quadratures decouple
//! into pair products:
//!
//! ```text
//! <ABCD>_W = AB·CD + AC·BD + AD·BC,    AB = <{A, B}>/2
//! ```
//!
//! Moments of operator products in a fixed order differ from the Weyl ones by
//! powers of ħ; the corrections needed for the quadratic triple
//! `((dp)^2, (dx)^2, (dp dx + dx dp)/2)` are encoded below as fixed formulas.

use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::moments::{from_rows, to_rows, MomentSet};
use crate::operator::{psd_check, QuantumState, Tolerances};
use crate::states::pure_gaussian_fock;
use crate::{Error, Result, C64};

/// Means `(x_1, p_1, x_2, p_2, ...)` and the symmetrised covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianJson", into = "GaussianJson")]
pub struct GaussianState {
    pub n_modes: usize,
    pub means: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub hbar: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianJson {
    n_modes: usize,
    means: Vec<f64>,
    cov: Vec<Vec<f64>>,
    hbar: f64,
}

impl From<GaussianState> for GaussianJson {
    fn from(g: GaussianState) -> Self {
        GaussianJson {
            n_modes: g.n_modes,
            cov: to_rows(&g.cov),
            means: g.means,
            hbar: g.hbar,
        }
    }
}

impl TryFrom<GaussianJson> for GaussianState {
    type Error = Error;
    fn try_from(j: GaussianJson) -> Result<Self> {
        let cov = from_rows(&j.cov, 2 * j.n_modes, "cov")?;
        GaussianState::new(j.n_modes, j.means, cov, j.hbar)
    }
}

/// Standard symplectic form, `Omega_{x_k p_k} = 1`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n_modes, 2 * n_modes, |i, j| {
        if i / 2 != j / 2 {
            0.0
        } else if i % 2 == 0 && j == i + 1 {
            1.0
        } else if i % 2 == 1 && j + 1 == i {
            -1.0
        } else {
            0.0
        }
    })
}

impl GaussianState {
    pub fn new(n_modes: usize, means: Vec<f64>, cov: DMatrix<f64>, hbar: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("n_modes must be >= 1".into()));
        }
        let d = 2 * n_modes;
        if means.len() != d || cov.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: means.len().max(cov.nrows()),
            });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if means.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Gaussian state"));
        }
        let scale = cov.amax().max(1.0);
        for i in 0..d {
            for j in 0..d {
                if (cov[(i, j)] - cov[(j, i)]).abs() > Tolerances::HERM * scale {
                    return Err(Error::InvalidState("covariance matrix is not symmetric".into()));
                }
            }
        }
        // cov + (i hbar / 2) Omega >= 0
        let omega = symplectic_form(n_modes);
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(cov[(i, j)], hbar / 2.0 * omega[(i, j)]));
        let report = psd_check(&m, Tolerances::PSD * scale)?;
        if !report.is_psd {
            return Err(Error::InvalidState(format!(
                "covariance violates the uncertainty principle (min eigenvalue {:e})",
                report.min_eigenvalue
            )));
        }
        Ok(Self {
            n_modes,
            means,
            cov,
            hbar,
        })
    }

    pub fn single_mode(sxx: f64, spp: f64, sxp: f64, mx: f64, mp: f64, hbar: f64) -> Result<Self> {
        Self::new(
            1,
            vec![mx, mp],
            DMatrix::from_row_slice(2, 2, &[sxx, sxp, sxp, spp]),
            hbar,
        )
    }

    pub fn vacuum(hbar: f64) -> Result<Self> {
        Self::single_mode(hbar / 2.0, hbar / 2.0, 0.0, 0.0, 0.0, hbar)
    }

    /// Thermal oscillator state with mean occupation `nbar`.
    pub fn thermal(nbar: f64, hbar: f64) -> Result<Self> {
        let v = hbar * (nbar + 0.5);
        Self::single_mode(v, v, 0.0, 0.0, 0.0, hbar)
    }

    pub fn sxx(&self) -> f64 {
        self.cov[(0, 0)]
    }

    pub fn spp(&self) -> f64 {
        self.cov[(1, 1)]
    }

    pub fn sxp(&self) -> f64 {
        self.cov[(0, 1)]
    }

    /// `4 det(cov) / hbar^2` for a single mode; 1 for pure states.
    pub fn purity_ratio(&self) -> f64 {
        4.0 * (self.sxx() * self.spp() - self.sxp() * self.sxp()) / (self.hbar * self.hbar)
    }

    /// Moments of the linear combinations `z_k = sum_j rows[k][j] r_j` of the
    /// quadratures: `X = C cov C^T`, `Y = C (hbar/2) Omega C^T`.
    pub fn linear_moments(&self, rows: &[Vec<f64>], centered: bool) -> Result<MomentSet> {
        let d = 2 * self.n_modes;
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rows.iter().map(|r| r.len()).find(|&l| l != d).unwrap_or(0),
            });
        }
        let n = rows.len();
        let c = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        let mean_vec = nalgebra::DVector::from_vec(self.means.clone());
        let means = &c * &mean_vec;
        let mut second = self.cov.clone();
        if !centered {
            second += &mean_vec * mean_vec.transpose();
        }
        let x = &c * second * c.transpose();
        let y = &c * symplectic_form(self.n_modes) * c.transpose() * (self.hbar / 2.0);
        MomentSet::new(means.iter().copied().collect(), x, y, self.hbar)
    }

    /// Density matrix on the first `dim` Fock states with the same first and
    /// second moments. Mixed states are realised as a Gauss-Hermite mixture
    /// of displaced pure Gaussians; the 5-point rule reproduces every moment of
    /// order <= 9 of the continuous mixture exactly.
    pub fn to_fock(&self, dim: usize) -> Result<QuantumState> {
        if self.n_modes != 1 {
            return Err(Error::InvalidParameter("Fock realisation is single-mode only".into()));
        }
        let hbar = self.hbar;
        let ratio = self.purity_ratio();
        let (mx, mp) = (self.means[0], self.means[1]);
        if ratio - 1.0 < 1e-12 {
            let v = pure_gaussian_fock(mx, mp, self.sxx(), self.sxp(), hbar, dim)?;
            return QuantumState::pure(v, hbar);
        }
        let shrink = ratio.sqrt().recip();
        let (pxx, pxp) = (self.sxx() * shrink, self.sxp() * shrink);
        let noise = &self.cov * (1.0 - shrink);
        let eig = noise.symmetric_eigen();
        let (nodes, weights) = gauss_hermite5();
        let mut ws = Vec::with_capacity(25);
        let mut vs = Vec::with_capacity(25);
        for (t1, w1) in nodes.iter().zip(&weights) {
            for (t2, w2) in nodes.iter().zip(&weights) {
                let mut shift = [0.0; 2];
                for (k, t) in [t1, t2].into_iter().enumerate() {
                    let amp = eig.eigenvalues[k].max(0.0).sqrt() * t;
                    shift[0] += amp * eig.eigenvectors[(0, k)];
                    shift[1] += amp * eig.eigenvectors[(1, k)];
                }
                vs.push(pure_gaussian_fock(
                    mx + shift[0],
                    mp + shift[1],
                    pxx,
                    pxp,
                    hbar,
                    dim,
                )?);
                ws.push(w1 * w2);
            }
        }
        QuantumState::mixture(&ws, &vs, hbar)
    }
}

/// Nodes and weights of the 5-point Gauss-Hermite rule for the standard normal.
fn gauss_hermite5() -> ([f64; 5], [f64; 5]) {
    let s10 = 10f64.sqrt();
    let inner = (5.0 - s10).sqrt();
    let outer = (5.0 + s10).sqrt();
    let wi = (7.0 + 2.0 * s10) / 60.0;
    let wo = (7.0 - 2.0 * s10) / 60.0;
    (
        [-outer, -inner, 0.0, inner, outer],
        [wo, wi, 8.0 / 15.0, wi, wo],
    )
}

/// `<ABCD>_W = AB·CD + AC·BD + AD·BC` from the six pair moments.
pub fn wick_fourth(ab: f64, cd: f64, ac: f64, bd: f64, ad: f64, bc: f64) -> f64 {
    ab * cd + ac * bd + ad * bc
}

/// Weyl-ordered `<(dx)^2 (dp)^2>_W = sxx spp + 2 sxp^2`.
fn weyl_x2p2(gs: &GaussianState) -> f64 {
    let (sxx, spp, sxp) = (gs.sxx(), gs.spp(), gs.sxp());
    wick_fourth(sxx, spp, sxp, sxp, sxp, sxp)
}

/// Fixed reordering identities between Weyl-ordered and concrete products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricCorrection {
    /// `<(dx^2 dp^2 + dp^2 dx^2)/2> = <x^2 p^2>_W - hbar^2/2`.
    X2p2SymFromOrdered,
    /// `<(dx dp + dp dx)^2> = 2 <dx^2 dp^2 + dp^2 dx^2> + 3 hbar^2`.
    XpPlusPxSq,
}

impl FromStr for SymmetricCorrection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x2p2_sym_from_ordered" => Ok(Self::X2p2SymFromOrdered),
            "xp_plus_px_sq" => Ok(Self::XpPlusPxSq),
            other => Err(Error::UnknownCorrection(other.to_string())),
        }
    }
}

pub fn apply_correction(correction: SymmetricCorrection, gs: &GaussianState) -> Result<f64> {
    if gs.n_modes != 1 {
        return Err(Error::InvalidParameter("fourth-moment calculus is single-mode".into()));
    }
    let h2 = gs.hbar * gs.hbar;
    let ordered = weyl_x2p2(gs) - h2 / 2.0;
    Ok(match correction {
        SymmetricCorrection::X2p2SymFromOrdered => ordered,
        SymmetricCorrection::XpPlusPxSq => 2.0 * (2.0 * ordered) + 3.0 * h2,
    })
}

/// Ordered-product mean named by `correction_id`
/// (`x2p2_sym_from_ordered` or `xp_plus_px_sq`).
pub fn symmetric_to_ordered(correction_id: &str, gs: &GaussianState) -> Result<f64> {
    apply_correction(correction_id.parse()?, gs)
}

/// Moment set of `((dp)^2, (dx)^2, (dp dx + dx dp)/2)` in a single-mode Gaussian.
pub fn quad_triple_moments(gs: &GaussianState) -> Result<MomentSet> {
    if gs.n_modes != 1 {
        return Err(Error::InvalidParameter("quadratic triple needs a single-mode state".into()));
    }
    let (sxx, spp, sxp, hbar) = (gs.sxx(), gs.spp(), gs.sxp(), gs.hbar);
    let p4 = wick_fourth(spp, spp, spp, spp, spp, spp);
    let x4 = wick_fourth(sxx, sxx, sxx, sxx, sxx, sxx);
    // <{p^2, sym(xp)}>/2 and <{x^2, sym(xp)}>/2 carry no ordering correction
    let p3x = wick_fourth(spp, sxp, spp, sxp, sxp, spp);
    let x3p = wick_fourth(sxx, sxp, sxx, sxp, sxp, sxx);
    let sym_p2x2 = apply_correction(SymmetricCorrection::X2p2SymFromOrdered, gs)?;
    let anti_sq = apply_correction(SymmetricCorrection::XpPlusPxSq, gs)?;

    let means = vec![spp, sxx, sxp];
    let x11 = p4 - spp * spp;
    let x22 = x4 - sxx * sxx;
    let x33 = anti_sq / 4.0 - sxp * sxp;
    let x12 = sym_p2x2 - spp * sxx;
    let x13 = p3x - spp * sxp;
    let x23 = x3p - sxx * sxp;
    #[rustfmt::skip]
    let x = DMatrix::from_row_slice(3, 3, &[
        x11, x12, x13,
        x12, x22, x23,
        x13, x23, x33,
    ]);
    let (y12, y13, y23) = (-2.0 * hbar * sxp, -hbar * spp, hbar * sxx);
    #[rustfmt::skip]
    let y = DMatrix::from_row_slice(3, 3, &[
        0.0,  y12,  y13,
        -y12, 0.0,  y23,
        -y13, -y23, 0.0,
    ]);
    Ok(MomentSet::new(means, x, y, hbar)?.with_labels(
        ["dp^2", "dx^2", "{dp,dx}/2"].map(String::from).to_vec(),
    ))
}
