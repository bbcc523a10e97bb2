//! Independent coordinate-basis cross-check of the frame pipeline.
//!
//! The connection is rebuilt here from scratch: Levi-Civita symbols by
//! central finite differences of the coordinate metric, plus the potential
//! correction terms, with Ricci obtained by differencing the connection. No
//! jets and no frames are involved, so agreement with the frame pipeline is
//! meaningful. Accuracy is finite-difference limited (~1e-6 on the
//! connection, ~1e-5 on Ricci).

use thiserror::Error;

use crate::fields::{EvalError, ScalarField};
use crate::weyl::{WeylError, WeylStructure};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("coordinate metric is singular at {0:?}")]
    SingularMetric([f64; 3]),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// First-derivative step.
const STEP1: f64 = 1e-5;
/// Step for differencing the connection inside the Ricci computation.
const STEP2: f64 = 1e-4;

/// A Weyl structure presented purely in coordinates.
pub struct CoordMetric {
    pub g: [[ScalarField; 3]; 3],
    pub nu: [ScalarField; 3],
}

impl CoordMetric {
    /// Symbolic coordinate metric of a frame-presented structure,
    /// g_munu = g_ij theta^i_mu theta^j_nu, with the same potential.
    pub fn from_structure(w: &WeylStructure) -> CoordMetric {
        let mut g: [[ScalarField; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| ScalarField::zero()));
        for mu in 0..3 {
            for nu in 0..3 {
                let mut acc = ScalarField::zero();
                for i in 0..3 {
                    for j in 0..3 {
                        let gij = w.metric.g[i][j];
                        if gij == 0.0 {
                            continue;
                        }
                        acc = acc.add(
                            &w.coframe[i][mu].mul(&w.coframe[j][nu]).scale(gij),
                        );
                    }
                }
                g[mu][nu] = acc;
            }
        }
        CoordMetric {
            g,
            nu: w.nu.clone(),
        }
    }

    fn g_at(&self, p: [f64; 3]) -> Result<nalgebra::Matrix3<f64>, OracleError> {
        let mut m = nalgebra::Matrix3::zeros();
        for mu in 0..3 {
            for nu in 0..3 {
                m[(mu, nu)] = self.g[mu][nu].eval(p)?;
            }
        }
        Ok(m)
    }

    fn nu_at(&self, p: [f64; 3]) -> Result<[f64; 3], OracleError> {
        Ok([
            self.nu[0].eval(p)?,
            self.nu[1].eval(p)?,
            self.nu[2].eval(p)?,
        ])
    }
}

fn shifted(p: [f64; 3], axis: usize, delta: f64) -> [f64; 3] {
    let mut q = p;
    q[axis] += delta;
    q
}

/// Connection coefficients Gamma^lambda_{mu nu} of the Weyl connection:
/// Levi-Civita of g by central differences plus the potential terms
/// delta^l_m nu_n + delta^l_n nu_m - g_mn nu^l. The sign convention is fixed
/// by the requirement that nabla g + 2 nu (x) g vanish, which
/// [`nabla_g_residual`] measures.
pub fn coord_connection(
    m: &CoordMetric,
    p: [f64; 3],
) -> Result<[[[f64; 3]; 3]; 3], OracleError> {
    let g = m.g_at(p)?;
    let g_inv = g
        .try_inverse()
        .ok_or(OracleError::SingularMetric(p))?;
    // dg[sigma][mu][nu] = d_sigma g_munu.
    let mut dg = [[[0.0f64; 3]; 3]; 3];
    for sigma in 0..3 {
        let plus = m.g_at(shifted(p, sigma, STEP1))?;
        let minus = m.g_at(shifted(p, sigma, -STEP1))?;
        for mu in 0..3 {
            for nu in 0..3 {
                dg[sigma][mu][nu] = (plus[(mu, nu)] - minus[(mu, nu)]) / (2.0 * STEP1);
            }
        }
    }
    let nu_low = m.nu_at(p)?;
    let mut nu_up = [0.0f64; 3];
    for l in 0..3 {
        nu_up[l] = (0..3).map(|s| g_inv[(l, s)] * nu_low[s]).sum();
    }
    let mut gamma = [[[0.0f64; 3]; 3]; 3];
    for l in 0..3 {
        for mu in 0..3 {
            for nu in 0..3 {
                let mut lc = 0.0;
                for s in 0..3 {
                    lc += 0.5
                        * g_inv[(l, s)]
                        * (dg[mu][s][nu] + dg[nu][s][mu] - dg[s][mu][nu]);
                }
                let correction = if l == mu { nu_low[nu] } else { 0.0 }
                    + if l == nu { nu_low[mu] } else { 0.0 }
                    - g[(mu, nu)] * nu_up[l];
                gamma[l][mu][nu] = lc + correction;
            }
        }
    }
    Ok(gamma)
}

/// Max |nabla_sigma g_munu + 2 nu_sigma g_munu| by finite differences; the
/// defining property of the Weyl connection, and the oracle's own
/// postcondition.
pub fn nabla_g_residual(m: &CoordMetric, p: [f64; 3]) -> Result<f64, OracleError> {
    let gamma = coord_connection(m, p)?;
    let g = m.g_at(p)?;
    let nu = m.nu_at(p)?;
    let mut worst = 0.0f64;
    for sigma in 0..3 {
        let plus = m.g_at(shifted(p, sigma, STEP1))?;
        let minus = m.g_at(shifted(p, sigma, -STEP1))?;
        for mu in 0..3 {
            for nu_idx in 0..3 {
                let dg = (plus[(mu, nu_idx)] - minus[(mu, nu_idx)]) / (2.0 * STEP1);
                let mut covariant = dg;
                for s in 0..3 {
                    covariant -= gamma[s][mu][sigma] * g[(s, nu_idx)];
                    covariant -= gamma[s][nu_idx][sigma] * g[(mu, s)];
                }
                worst = worst.max((covariant + 2.0 * nu[sigma] * g[(mu, nu_idx)]).abs());
            }
        }
    }
    Ok(worst)
}

/// Ricci tensor of the coordinate connection by central differences of the
/// connection coefficients:
/// Ric_mr = d_n Gamma^n_mr - d_r Gamma^n_mn + Gamma^n_sn Gamma^s_mr
///          - Gamma^n_sr Gamma^s_mn.
pub fn coord_ricci(m: &CoordMetric, p: [f64; 3]) -> Result<[[f64; 3]; 3], OracleError> {
    let gamma = coord_connection(m, p)?;
    // dgamma[sigma][l][mu][nu] = d_sigma Gamma^l_{mu nu}.
    let mut dgamma = [[[[0.0f64; 3]; 3]; 3]; 3];
    for sigma in 0..3 {
        let plus = coord_connection(m, shifted(p, sigma, STEP2))?;
        let minus = coord_connection(m, shifted(p, sigma, -STEP2))?;
        for l in 0..3 {
            for mu in 0..3 {
                for nu in 0..3 {
                    dgamma[sigma][l][mu][nu] =
                        (plus[l][mu][nu] - minus[l][mu][nu]) / (2.0 * STEP2);
                }
            }
        }
    }
    let mut ric = [[0.0f64; 3]; 3];
    for mu in 0..3 {
        for rho in 0..3 {
            let mut acc = 0.0;
            for n in 0..3 {
                acc += dgamma[n][n][mu][rho] - dgamma[rho][n][mu][n];
                for s in 0..3 {
                    acc += gamma[n][s][n] * gamma[s][mu][rho]
                        - gamma[n][s][rho] * gamma[s][mu][n];
                }
            }
            ric[mu][rho] = acc;
        }
    }
    Ok(ric)
}
