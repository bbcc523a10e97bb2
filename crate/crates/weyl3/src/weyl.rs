//! Weyl structures on R^3: the unique torsion-free connection compatible with
//! a conformal metric up to a potential 1-form, its curvature, and the
//! Einstein-Weyl tensor.
//!
//! A structure is given by an adapted coframe theta^i with a constant frame
//! metric g_ij, plus the potential nu. The connection matrix is found per
//! point by solving the linear system coming from
//!
//! ```text
//! d theta^i + Gamma^i_j ^ theta^j = 0,      Gamma_(ij) = g_ij nu,
//! ```
//!
//! with Gamma = nu * id + Gammatilde and the lowered Gammatilde antisymmetric.
//! The solve is carried in jet arithmetic so Gamma keeps enough derivatives
//! for the curvature 2-form Omega = d Gamma + Gamma ^ Gamma.

use thiserror::Error;

use crate::fields::{EvalError, ScalarField};
use crate::forms::{
    coframe_inverse, frame_components_with_inverse, one_form_frame_components, Form, FormError,
};
use crate::jets::{solve_linear, Axis, Jet, JetError};

#[derive(Debug, Error)]
pub enum WeylError {
    #[error("coframe component matrix is singular at {0:?}")]
    SingularCoframe([f64; 3]),
    #[error("connection solve hit a singular linear system at {0:?}")]
    LinearSolveSingular([f64; 3]),
    #[error("jet order {available} too low: the computation needs {needed}")]
    OrderExceeded { needed: usize, available: usize },
    #[error("vector field vanishes at the evaluation point")]
    ZeroVector,
    #[error("domain guard `{label}` violated at {point:?}: value {value:.6}")]
    DomainGuardViolated {
        label: String,
        point: [f64; 3],
        value: f64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl From<FormError> for WeylError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::SingularCoframe => WeylError::SingularCoframe([f64::NAN; 3]),
            FormError::Jet(j) => WeylError::Jet(j),
            FormError::DegreeMismatch(..) => unreachable!("degrees are fixed by construction"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Lorentzian,
    Euclidean,
}

/// Constant frame metric g_ij with its inverse.
///
/// Lorentzian structures use the null form g = (theta^2)^2 - 2 theta^1 theta^3;
/// Euclidean structures use the identity.
#[derive(Debug, Clone)]
pub struct FrameMetric {
    pub signature: Signature,
    pub g: [[f64; 3]; 3],
    pub g_inv: [[f64; 3]; 3],
}

impl FrameMetric {
    pub fn lorentzian_null() -> FrameMetric {
        let g = [[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]];
        // g is an involution, so it is its own inverse.
        FrameMetric {
            signature: Signature::Lorentzian,
            g,
            g_inv: g,
        }
    }

    pub fn euclidean() -> FrameMetric {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        FrameMetric {
            signature: Signature::Euclidean,
            g: id,
            g_inv: id,
        }
    }

    pub fn det(&self) -> f64 {
        let g = &self.g;
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    }
}

/// Pointwise positivity / nonvanishing requirement on a coefficient field.
#[derive(Debug, Clone)]
pub struct Guard {
    pub label: String,
    pub field: ScalarField,
    /// Reject when |field| drops below this bound.
    pub min_abs: f64,
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, Copy)]
pub struct DomainBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl DomainBox {
    pub fn symmetric(half_width: f64) -> DomainBox {
        DomainBox {
            min: [-half_width; 3],
            max: [half_width; 3],
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// A Weyl structure in an adapted coframe.
#[derive(Debug, Clone)]
pub struct WeylStructure {
    /// coframe[i][mu]: component of theta^i along dx^mu.
    pub coframe: [[ScalarField; 3]; 3],
    pub metric: FrameMetric,
    /// nu[mu]: coordinate components of the potential 1-form.
    pub nu: [ScalarField; 3],
    pub domain: DomainBox,
    pub guards: Vec<Guard>,
}

/// Coframe, its inverse and the potential evaluated at one point.
pub struct FrameAt {
    pub point: [f64; 3],
    pub order: usize,
    pub theta: [Form; 3],
    /// theta_inv[mu][k] = (e_k)^mu, the dual frame in coordinates.
    pub theta_inv: [[Jet; 3]; 3],
    pub nu: Form,
}

/// The solved Weyl connection at a point.
pub struct ConnectionMatrix {
    pub point: [f64; 3],
    /// Jet order of the connection components (input order minus one).
    pub order: usize,
    /// Gamma^i_j as 1-forms in coordinates.
    pub gamma: [[Form; 3]; 3],
    /// gamma_frame[i][j][k]: coefficient of Gamma^i_j along theta^k.
    pub gamma_frame: [[[Jet; 3]; 3]; 3],
    /// Frame components of nu.
    pub nu_frame: [Jet; 3],
    /// Max |d theta^i + Gamma^i_j ^ theta^j| over components, at the point.
    pub torsion_residual: f64,
    /// Max |Gamma_(ij) - g_ij nu| over components, at the point.
    pub symmetry_residual: f64,
}

impl ConnectionMatrix {
    /// Value matrices Gamma(e_k), one per frame direction.
    pub fn value_matrices(&self) -> [[[f64; 3]; 3]; 3] {
        let mut out = [[[0.0; 3]; 3]; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    slot[i][j] = self.gamma_frame[i][j][k].value();
                }
            }
        }
        out
    }

    pub fn max_value(&self) -> f64 {
        self.gamma
            .iter()
            .flatten()
            .fold(0.0f64, |m, form| m.max(form.max_value()))
    }
}

/// Curvature, Ricci and the Einstein-Weyl tensor at a point.
pub struct CurvatureData {
    pub point: [f64; 3],
    /// Omega^i_j as 2-forms in coordinates.
    pub omega: [[Form; 3]; 3],
    /// omega_frame[i][j][k][l]: Omega^i_j = (1/2) omega_frame[i][j][k][l] theta^k ^ theta^l.
    pub omega_frame: [[[[f64; 3]; 3]; 3]; 3],
    /// Ricci_ij = Omega^k_ikj; not necessarily symmetric.
    pub ricci: [[f64; 3]; 3],
    pub scalar: f64,
    /// Symmetric trace-free part of Ricci in frame components.
    pub ew_frame: [[f64; 3]; 3],
    /// The same tensor pushed to coordinate components.
    pub ew_coord: [[f64; 3]; 3],
    /// Ricci pushed to coordinate components (for oracle comparisons).
    pub ricci_coord: [[f64; 3]; 3],
    /// Frame components of d nu.
    pub dnu_frame: [[f64; 3]; 3],
    pub max_omega: f64,
    pub max_ew: f64,
}

/// Unknown layout of the connection solve: lowered components
/// Gammatilde_{(a b) c} for the pairs (0,1), (0,2), (1,2) and c = 0..2.
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn unknown_index(pair: usize, c: usize) -> usize {
    3 * pair + c
}

/// Coefficient of unknown u[(pair, c)] in the lowered component
/// Gammatilde_{m j c'}; zero unless c' == c.
fn lowered_coeff(m: usize, j: usize, pair: usize) -> f64 {
    let (a, b) = PAIRS[pair];
    if (m, j) == (a, b) {
        1.0
    } else if (m, j) == (b, a) {
        -1.0
    } else {
        0.0
    }
}

impl WeylStructure {
    /// Evaluate the coframe and potential at a point.
    pub fn frame_at(&self, point: [f64; 3], order: usize) -> Result<FrameAt, WeylError> {
        let eval = |f: &ScalarField| f.eval_jet(point, order);
        let mut theta = Vec::with_capacity(3);
        for i in 0..3 {
            let comps = [
                eval(&self.coframe[i][0])?,
                eval(&self.coframe[i][1])?,
                eval(&self.coframe[i][2])?,
            ];
            theta.push(Form::from_components(1, comps.to_vec()));
        }
        let theta: [Form; 3] = [theta[0].clone(), theta[1].clone(), theta[2].clone()];
        let theta_inv = coframe_inverse(&theta).map_err(|e| match e {
            FormError::SingularCoframe => WeylError::SingularCoframe(point),
            other => WeylError::from(other),
        })?;
        let nu = Form::from_components(
            1,
            vec![eval(&self.nu[0])?, eval(&self.nu[1])?, eval(&self.nu[2])?],
        );
        Ok(FrameAt {
            point,
            order,
            theta,
            theta_inv,
            nu,
        })
    }

    /// Check the guards at a point.
    pub fn check_guards(&self, point: [f64; 3]) -> Result<(), WeylError> {
        for guard in &self.guards {
            let value = guard.field.eval(point)?;
            if value.abs() < guard.min_abs {
                return Err(WeylError::DomainGuardViolated {
                    label: guard.label.clone(),
                    point,
                    value,
                });
            }
        }
        Ok(())
    }

    /// Reconstructed coordinate metric g_munu = g_ij theta^i_mu theta^j_nu.
    pub fn coordinate_metric(&self, point: [f64; 3], order: usize) -> Result<[[Jet; 3]; 3], WeylError> {
        let frame = self.frame_at(point, order)?;
        let zero = Jet::zero(point, order);
        let mut out = [
            [zero.clone(), zero.clone(), zero.clone()],
            [zero.clone(), zero.clone(), zero.clone()],
            [zero.clone(), zero.clone(), zero],
        ];
        for mu in 0..3 {
            for nu in 0..3 {
                let mut acc = Jet::zero(point, order);
                for i in 0..3 {
                    for j in 0..3 {
                        let gij = self.metric.g[i][j];
                        if gij == 0.0 {
                            continue;
                        }
                        let t = frame.theta[i]
                            .component(mu)
                            .try_mul(frame.theta[j].component(nu))?;
                        acc = acc.try_add(&t.scale(gij))?;
                    }
                }
                out[mu][nu] = acc;
            }
        }
        Ok(out)
    }

    /// Whether d nu vanishes at the point (the structure is then locally
    /// metric around it).
    pub fn nu_is_closed_at(&self, point: [f64; 3], tol: f64) -> Result<bool, WeylError> {
        let frame = self.frame_at(point, 2)?;
        let dnu = frame.nu.d()?;
        Ok(dnu.max_value() <= tol)
    }

    /// Solve the first structure equations for the connection at a point.
    pub fn solve_connection(&self, point: [f64; 3], order: usize) -> Result<ConnectionMatrix, WeylError> {
        self.solve_connection_with_ordering(point, order, &IDENTITY_ORDERING)
    }

    /// Same solve with a permuted equation ordering; used to confirm the
    /// solution is independent of the assembly order.
    pub fn solve_connection_with_ordering(
        &self,
        point: [f64; 3],
        order: usize,
        ordering: &[usize; 9],
    ) -> Result<ConnectionMatrix, WeylError> {
        if order < 2 {
            return Err(WeylError::OrderExceeded {
                needed: 2,
                available: order,
            });
        }
        let frame = self.frame_at(point, order)?;
        let conn_order = order - 1;

        // Torsion source T^i = d theta^i + nu ^ theta^i, in frame components.
        let theta_low: [Form; 3] = [
            frame.theta[0].truncate(conn_order),
            frame.theta[1].truncate(conn_order),
            frame.theta[2].truncate(conn_order),
        ];
        let inv_low = {
            let mut inv = frame.theta_inv.clone();
            for row in inv.iter_mut() {
                for jet in row.iter_mut() {
                    *jet = jet.truncate(conn_order);
                }
            }
            inv
        };
        let mut source_frame = Vec::with_capacity(3);
        for i in 0..3 {
            let t = frame.theta[i]
                .d()?
                .try_add(&frame.nu.truncate(conn_order).wedge(&theta_low[i])?)?;
            source_frame.push(frame_components_with_inverse(&t, &inv_low)?);
        }

        // Assemble the 9x9 constant system Gammatilde^i_{kl} - Gammatilde^i_{lk} = T^i_{kl}.
        let g_inv = &self.metric.g_inv;
        let gamma_tilde_coeff = |i: usize, j: usize, pair: usize| -> f64 {
            (0..3).map(|m| g_inv[i][m] * lowered_coeff(m, j, pair)).sum()
        };
        let mut matrix = vec![vec![Jet::zero(point, conn_order); 9]; 9];
        let mut rhs = vec![Jet::zero(point, conn_order); 9];
        for (row_slot, &row) in ordering.iter().enumerate() {
            let i = row / 3;
            let (k, l) = PAIRS[row % 3];
            for pair in 0..3 {
                for c in 0..3 {
                    let mut coeff = 0.0;
                    if c == l {
                        coeff += gamma_tilde_coeff(i, k, pair);
                    }
                    if c == k {
                        coeff -= gamma_tilde_coeff(i, l, pair);
                    }
                    if coeff != 0.0 {
                        matrix[row_slot][unknown_index(pair, c)] =
                            Jet::constant(point, conn_order, coeff);
                    }
                }
            }
            rhs[row_slot] = source_frame[i][k][l].clone();
        }
        let unknowns = solve_linear(matrix, rhs).map_err(|e| match e {
            JetError::SingularSystem(_) => WeylError::LinearSolveSingular(point),
            other => WeylError::Jet(other),
        })?;

        // Gamma^i_{jk} = nu_k delta^i_j + Gammatilde^i_{jk}.
        let nu_frame = one_form_frame_components(&frame.nu.truncate(conn_order), &inv_low)?;
        let zero = Jet::zero(point, conn_order);
        let mut gamma_frame: [[[Jet; 3]; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| zero.clone())));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut acc = if i == j {
                        nu_frame[k].clone()
                    } else {
                        Jet::zero(point, conn_order)
                    };
                    for pair in 0..3 {
                        let coeff = gamma_tilde_coeff(i, j, pair);
                        if coeff != 0.0 {
                            acc = acc.try_add(&unknowns[unknown_index(pair, k)].scale(coeff))?;
                        }
                    }
                    gamma_frame[i][j][k] = acc;
                }
            }
        }

        // Coordinate 1-forms Gamma^i_j = Gamma^i_{jk} theta^k.
        let mut gamma: Vec<Vec<Form>> = Vec::with_capacity(3);
        for i in 0..3 {
            let mut row = Vec::with_capacity(3);
            for j in 0..3 {
                let mut acc = Form::zero(1, point, conn_order);
                for k in 0..3 {
                    let term = Form::scalar(gamma_frame[i][j][k].clone()).wedge(&theta_low[k])?;
                    acc = acc.try_add(&term)?;
                }
                row.push(acc);
            }
            gamma.push(row);
        }
        let gamma: [[Form; 3]; 3] = [
            [gamma[0][0].clone(), gamma[0][1].clone(), gamma[0][2].clone()],
            [gamma[1][0].clone(), gamma[1][1].clone(), gamma[1][2].clone()],
            [gamma[2][0].clone(), gamma[2][1].clone(), gamma[2][2].clone()],
        ];

        // Residuals of the defining relations at the point.
        let mut torsion_residual = 0.0f64;
        for i in 0..3 {
            let mut t = frame.theta[i].d()?;
            for j in 0..3 {
                t = t.try_add(&gamma[i][j].wedge(&theta_low[j])?)?;
            }
            torsion_residual = torsion_residual.max(t.max_value());
        }
        let mut symmetry_residual = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for mu in 0..3 {
                    let mut sym = 0.0;
                    for m in 0..3 {
                        sym += self.metric.g[i][m] * gamma[m][j].component(mu).value()
                            + self.metric.g[j][m] * gamma[m][i].component(mu).value();
                    }
                    let target = 2.0 * self.metric.g[i][j] * frame.nu.component(mu).value();
                    symmetry_residual = symmetry_residual.max((sym - target).abs());
                }
            }
        }

        Ok(ConnectionMatrix {
            point,
            order: conn_order,
            gamma,
            gamma_frame,
            nu_frame,
            torsion_residual,
            symmetry_residual,
        })
    }

    /// Curvature, Ricci, scalar and the Einstein-Weyl tensor at a point.
    pub fn curvature(&self, point: [f64; 3], order: usize) -> Result<CurvatureData, WeylError> {
        if order < 3 {
            return Err(WeylError::OrderExceeded {
                needed: 3,
                available: order,
            });
        }
        let frame = self.frame_at(point, order)?;
        let conn = self.solve_connection(point, order)?;
        let curv_order = conn.order - 1;

        // Omega^i_j = d Gamma^i_j + Gamma^i_m ^ Gamma^m_j.
        let mut omega: Vec<Vec<Form>> = Vec::with_capacity(3);
        for i in 0..3 {
            let mut row = Vec::with_capacity(3);
            for j in 0..3 {
                let mut acc = conn.gamma[i][j].d()?;
                for m in 0..3 {
                    let t = conn.gamma[i][m]
                        .truncate(curv_order)
                        .wedge(&conn.gamma[m][j].truncate(curv_order))?;
                    acc = acc.try_add(&t)?;
                }
                row.push(acc);
            }
            omega.push(row);
        }

        let inv_low = {
            let mut inv = frame.theta_inv.clone();
            for row in inv.iter_mut() {
                for jet in row.iter_mut() {
                    *jet = jet.truncate(curv_order);
                }
            }
            inv
        };
        let mut omega_frame = [[[[0.0f64; 3]; 3]; 3]; 3];
        let mut max_omega = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                max_omega = max_omega.max(omega[i][j].max_value());
                let fc = frame_components_with_inverse(&omega[i][j], &inv_low)?;
                for k in 0..3 {
                    for l in 0..3 {
                        omega_frame[i][j][k][l] = fc[k][l].value();
                    }
                }
            }
        }

        // Ricci_ij = Omega^k_ikj, scalar R = g^ij Ricci_ij.
        let mut ricci = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                ricci[i][j] = (0..3).map(|k| omega_frame[k][i][k][j]).sum();
            }
        }
        let g = &self.metric.g;
        let g_inv = &self.metric.g_inv;
        let scalar: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| g_inv[i][j] * ricci[i][j])
            .sum();

        let mut ew_frame = [[0.0f64; 3]; 3];
        let mut max_ew = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                ew_frame[i][j] = 0.5 * (ricci[i][j] + ricci[j][i]) - scalar / 3.0 * g[i][j];
                max_ew = max_ew.max(ew_frame[i][j].abs());
            }
        }

        // Push (0,2)-tensors to coordinates with theta^i_mu values.
        let th = |i: usize, mu: usize| frame.theta[i].component(mu).value();
        let push = |t: &[[f64; 3]; 3]| {
            let mut out = [[0.0f64; 3]; 3];
            for mu in 0..3 {
                for nv in 0..3 {
                    out[mu][nv] = (0..3)
                        .flat_map(|i| (0..3).map(move |j| (i, j)))
                        .map(|(i, j)| t[i][j] * th(i, mu) * th(j, nv))
                        .sum();
                }
            }
            out
        };
        let ew_coord = push(&ew_frame);
        let ricci_coord = push(&ricci);

        let dnu = frame.nu.d()?;
        let dnu_fc = frame_components_with_inverse(&dnu, &inv_low)?;
        let mut dnu_frame = [[0.0f64; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                dnu_frame[k][l] = dnu_fc[k][l].value();
            }
        }

        let omega: [[Form; 3]; 3] = [
            [omega[0][0].clone(), omega[0][1].clone(), omega[0][2].clone()],
            [omega[1][0].clone(), omega[1][1].clone(), omega[1][2].clone()],
            [omega[2][0].clone(), omega[2][1].clone(), omega[2][2].clone()],
        ];
        Ok(CurvatureData {
            point,
            omega,
            omega_frame,
            ricci,
            scalar,
            ew_frame,
            ew_coord,
            ricci_coord,
            dnu_frame,
            max_omega,
            max_ew,
        })
    }

    /// The connection in coordinate components, from the frame solve:
    /// Gamma^lambda_{nu mu} = E^lambda_i (d_mu theta^i_nu
    ///                        + theta^j_nu theta^k_mu Gamma^i_{jk}).
    /// Indexed as [lambda][nu][mu]; symmetric in (nu, mu) for a torsion-free
    /// connection.
    pub fn coordinate_connection(
        &self,
        point: [f64; 3],
        order: usize,
    ) -> Result<[[[f64; 3]; 3]; 3], WeylError> {
        let frame = self.frame_at(point, order)?;
        let conn = self.solve_connection(point, order)?;
        let mut out = [[[0.0f64; 3]; 3]; 3];
        for lambda in 0..3 {
            for nu in 0..3 {
                for (mu, axis) in Axis::ALL.iter().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..3 {
                        let mut bracket =
                            frame.theta[i].component(nu).derivative(*axis)?.value();
                        for j in 0..3 {
                            for k in 0..3 {
                                bracket += frame.theta[j].component(nu).value()
                                    * frame.theta[k].component(mu).value()
                                    * conn.gamma_frame[i][j][k].value();
                            }
                        }
                        acc += frame.theta_inv[lambda][i].value() * bracket;
                    }
                    out[lambda][nu][mu] = acc;
                }
            }
        }
        Ok(out)
    }

    /// Gauge transformation: theta -> e^phi theta, nu -> nu - d phi. The
    /// underlying Weyl connection is unchanged.
    pub fn gauge_transform(&self, phi: &ScalarField) -> WeylStructure {
        let factor = phi.exp();
        let coframe = std::array::from_fn(|i| {
            std::array::from_fn(|mu| factor.mul(&self.coframe[i][mu]))
        });
        let nu = std::array::from_fn(|mu| {
            let axis = Axis::ALL[mu];
            self.nu[mu].sub(&phi.derivative(axis))
        });
        WeylStructure {
            coframe,
            metric: self.metric.clone(),
            nu,
            domain: self.domain,
            guards: self.guards.clone(),
        }
    }

    /// Weighted covariant derivative of a vector field given in frame
    /// components: nabla-hat_k V^i = e_k(V^i) + Gamma^i_{jk} V^j + m nu_k V^i.
    /// Rows are i, columns are the frame direction k.
    pub fn weighted_covariant_derivative(
        &self,
        v_frame: &[ScalarField; 3],
        weight: f64,
        point: [f64; 3],
        order: usize,
    ) -> Result<[[f64; 3]; 3], WeylError> {
        let conn = self.solve_connection(point, order)?;
        let frame = self.frame_at(point, order)?;
        let v: Vec<Jet> = v_frame
            .iter()
            .map(|f| f.eval_jet(point, order))
            .collect::<Result<_, _>>()?;
        let mut out = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                // e_k(V^i) = (e_k)^mu d_mu V^i.
                let mut dir = 0.0;
                for (mu, axis) in Axis::ALL.iter().enumerate() {
                    dir += frame.theta_inv[mu][k].value() * v[i].derivative(*axis)?.value();
                }
                let mut acc = dir + weight * conn.nu_frame[k].value() * v[i].value();
                for j in 0..3 {
                    acc += conn.gamma_frame[i][j][k].value() * v[j].value();
                }
                out[i][k] = acc;
            }
        }
        Ok(out)
    }

    /// Weighted covariant derivative of a 1-form given in frame components:
    /// nabla-hat_k w_i = e_k(w_i) - Gamma^j_{ik} w_j + m nu_k w_i.
    pub fn weighted_covariant_derivative_covector(
        &self,
        w_frame: &[ScalarField; 3],
        weight: f64,
        point: [f64; 3],
        order: usize,
    ) -> Result<[[f64; 3]; 3], WeylError> {
        let conn = self.solve_connection(point, order)?;
        let frame = self.frame_at(point, order)?;
        let w: Vec<Jet> = w_frame
            .iter()
            .map(|f| f.eval_jet(point, order))
            .collect::<Result<_, _>>()?;
        let mut out = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                let mut dir = 0.0;
                for (mu, axis) in Axis::ALL.iter().enumerate() {
                    dir += frame.theta_inv[mu][k].value() * w[i].derivative(*axis)?.value();
                }
                let mut acc = dir + weight * conn.nu_frame[k].value() * w[i].value();
                for j in 0..3 {
                    acc -= conn.gamma_frame[j][i][k].value() * w[j].value();
                }
                out[i][k] = acc;
            }
        }
        Ok(out)
    }

    /// How far the direction spanned by V is from being constant:
    /// max_k |(nabla_k V) wedge V| / |V|^2. Zero means constant direction.
    pub fn constant_direction_check(
        &self,
        v_frame: &[ScalarField; 3],
        point: [f64; 3],
        order: usize,
    ) -> Result<f64, WeylError> {
        let nabla = self.weighted_covariant_derivative(v_frame, 0.0, point, order)?;
        let v: Vec<f64> = v_frame
            .iter()
            .map(|f| f.eval(point))
            .collect::<Result<_, _>>()?;
        let norm2: f64 = v.iter().map(|c| c * c).sum();
        if norm2 < 1e-24 {
            return Err(WeylError::ZeroVector);
        }
        let mut worst = 0.0f64;
        for k in 0..3 {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let wedge = nabla[i][k] * v[j] - nabla[j][k] * v[i];
                    worst = worst.max(wedge.abs());
                }
            }
        }
        Ok(worst / norm2)
    }

    /// Max |g_munu(reconstructed) - expected| at the point.
    pub fn metric_reconstruction_residual(
        &self,
        expected: &[[ScalarField; 3]; 3],
        point: [f64; 3],
    ) -> Result<f64, WeylError> {
        let got = self.coordinate_metric(point, 0)?;
        let mut worst = 0.0f64;
        for mu in 0..3 {
            for nu in 0..3 {
                let want = expected[mu][nu].eval(point)?;
                worst = worst.max((got[mu][nu].value() - want).abs());
            }
        }
        Ok(worst)
    }

    /// Numeric signature check of the reconstructed coordinate metric:
    /// det < 0 for Lorentzian, positive definite for Euclidean.
    pub fn signature_ok(&self, point: [f64; 3]) -> Result<bool, WeylError> {
        let gm = self.coordinate_metric(point, 0)?;
        let m = nalgebra::Matrix3::from_fn(|r, c| gm[r][c].value());
        let det = m.determinant();
        Ok(match self.metric.signature {
            Signature::Lorentzian => det < 0.0,
            Signature::Euclidean => {
                m[(0, 0)] > 0.0
                    && (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]) > 0.0
                    && det > 0.0
            }
        })
    }

    /// The flat model: constant null coframe (dy, dz, dx) and zero potential.
    pub fn flat_null() -> WeylStructure {
        let zero = ScalarField::zero;
        let one = || ScalarField::number(1.0);
        WeylStructure {
            coframe: [
                [zero(), one(), zero()],
                [zero(), zero(), one()],
                [one(), zero(), zero()],
            ],
            metric: FrameMetric::lorentzian_null(),
            nu: [zero(), zero(), zero()],
            domain: DomainBox::symmetric(1.0),
            guards: Vec::new(),
        }
    }
}

const IDENTITY_ORDERING: [usize; 9] = [0, 1, 2, 3, 4, 5, 6, 7, 8];

#[cfg(test)]
mod tests {
    use super::*;

    fn b0_structure(k_expr: &str, l_expr: &str) -> WeylStructure {
        // g = dz^2 + 2 dx dy + K(x,z) dx^2, nu = L dx, adapted coframe
        // theta^1 = -(dy + K/2 dx), theta^2 = dz, theta^3 = dx.
        let k = ScalarField::parse(k_expr).unwrap();
        let l = ScalarField::parse(l_expr).unwrap();
        let zero = ScalarField::zero;
        WeylStructure {
            coframe: [
                [k.scale(0.5).neg(), ScalarField::number(-1.0), zero()],
                [zero(), zero(), ScalarField::number(1.0)],
                [ScalarField::number(1.0), zero(), zero()],
            ],
            metric: FrameMetric::lorentzian_null(),
            nu: [l, zero(), zero()],
            domain: DomainBox::symmetric(0.5),
            guards: Vec::new(),
        }
    }

    #[test]
    fn frame_metric_determinants() {
        assert!(FrameMetric::lorentzian_null().det() < 0.0);
        assert_eq!(FrameMetric::euclidean().det(), 1.0);
        // g * g_inv = id.
        for m in [FrameMetric::lorentzian_null(), FrameMetric::euclidean()] {
            for i in 0..3 {
                for j in 0..3 {
                    let prod: f64 = (0..3).map(|k| m.g[i][k] * m.g_inv[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((prod - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn flat_model_has_zero_connection() {
        let flat = WeylStructure::flat_null();
        let conn = flat.solve_connection([0.1, -0.2, 0.3], 3).unwrap();
        assert!(conn.max_value() < 1e-14);
        assert!(conn.torsion_residual < 1e-14);
        assert!(conn.symmetry_residual < 1e-14);
        let curv = flat.curvature([0.1, -0.2, 0.3], 3).unwrap();
        assert!(curv.max_omega < 1e-14);
        assert!(curv.max_ew < 1e-14);
        assert!(curv.scalar.abs() < 1e-14);
    }

    #[test]
    fn b0_connection_matches_closed_form() {
        // For H = 1, K = z^2, L = 0 the nonzero connection 1-forms are
        // beta = Gamma^1_2 = Gamma^2_3 = -(1/2) K_z dx = -z dx, alpha = 0.
        let w = b0_structure("z^2", "0");
        let p = [0.2, -0.3, 0.4];
        let conn = w.solve_connection(p, 3).unwrap();
        assert!(conn.torsion_residual < 1e-12);
        assert!(conn.symmetry_residual < 1e-12);
        let beta_x = conn.gamma[0][1].component(0).value();
        assert!((beta_x - (-p[2])).abs() < 1e-12, "beta_x = {beta_x}");
        assert!((conn.gamma[1][2].component(0).value() - (-p[2])).abs() < 1e-12);
        // alpha = (Gamma^1_1 - Gamma^3_3)/2 vanishes, as does nu.
        for mu in 0..3 {
            let alpha = 0.5
                * (conn.gamma[0][0].component(mu).value()
                    - conn.gamma[2][2].component(mu).value());
            assert!(alpha.abs() < 1e-12);
        }
        // Gamma^2_1 and Gamma^3_2 (the c-slot) vanish for this family.
        assert!(conn.gamma[1][0].max_value() < 1e-12);
        assert!(conn.gamma[2][1].max_value() < 1e-12);
    }

    #[test]
    fn solve_is_independent_of_equation_ordering() {
        let w = b0_structure("z^2 + x*z", "x + y/2");
        let p = [0.15, 0.25, -0.2];
        let base = w.solve_connection(p, 3).unwrap();
        for ordering in [
            [8, 7, 6, 5, 4, 3, 2, 1, 0],
            [4, 0, 8, 1, 7, 2, 6, 3, 5],
        ] {
            let other = w.solve_connection_with_ordering(p, 3, &ordering).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    for mu in 0..3 {
                        let a = base.gamma[i][j].component(mu).value();
                        let b = other.gamma[i][j].component(mu).value();
                        assert!((a - b).abs() < 1e-12, "ordering changed the solution");
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_needs_order_three() {
        let w = b0_structure("z^2", "0");
        assert!(matches!(
            w.curvature([0.0; 3], 2),
            Err(WeylError::OrderExceeded { needed: 3, .. })
        ));
    }

    #[test]
    fn first_bianchi_identity() {
        let w = b0_structure("z^2 + x*y + 1", "x/2");
        let p = [0.1, 0.2, 0.3];
        let frame = w.frame_at(p, 3).unwrap();
        let curv = w.curvature(p, 3).unwrap();
        for i in 0..3 {
            let mut total = Form::zero(3, p, 1);
            for j in 0..3 {
                let t = curv.omega[i][j].wedge(&frame.theta[j].truncate(1)).unwrap();
                total = total.try_add(&t).unwrap();
            }
            assert!(total.max_value() < 1e-9, "Bianchi residual {}", total.max_value());
        }
    }

    #[test]
    fn guard_violation_is_reported() {
        let mut w = b0_structure("z^2", "0");
        w.guards.push(Guard {
            label: "H".into(),
            field: ScalarField::parse("x").unwrap(),
            min_abs: 0.1,
        });
        assert!(matches!(
            w.check_guards([0.0; 3]),
            Err(WeylError::DomainGuardViolated { .. })
        ));
        assert!(w.check_guards([0.5, 0.0, 0.0]).is_ok());
    }
}
