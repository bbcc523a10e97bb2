//! The subalgebra catalog of co(2,1) / co(3) and classification of a Weyl
//! structure's connection values in its adapted frame.
//!
//! In the null coframe the conformal algebra co(2,1) is parametrized by
//! (p, a, b, c):
//!
//! ```text
//!         | p+a  b   0  |
//!   M  =  |  c   p   b  |
//!         |  0   c  p-a |
//! ```
//!
//! p is the trace part; lowering with g sends the rest to the antisymmetric
//! matrix A = gM with A_13 = a, A_23 = b, A_21 = c. The same lowering rule
//! parametrizes co(3) in an orthonormal frame, where c generates rotations
//! about the third frame vector.
//!
//! A structure has reduced holonomy when the matrices Gamma(e_k) stay inside
//! a proper subalgebra; classification samples those matrices, spans them,
//! and returns the smallest catalog member containing the span.

use serde::Serialize;
use thiserror::Error;

use crate::weyl::{FrameMetric, Signature, WeylError, WeylStructure};

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("matrix is not in the conformal algebra: membership residual {residual:.3e}")]
    NotInCO { residual: f64 },
    #[error("no sample points were provided")]
    EmptySampleSet,
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// Parameter vector of a conformal-algebra element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CoParams {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p, self.a, self.b, self.c]
    }

    pub fn magnitude(&self) -> f64 {
        self.as_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Decompose M in co(p, q): p = tr(M)/3 and the lowered traceless part must
/// be antisymmetric. `tol` bounds the allowed symmetric residual relative to
/// the matrix scale.
pub fn co_decompose(
    m: &[[f64; 3]; 3],
    metric: &FrameMetric,
    tol: f64,
) -> Result<CoParams, HolonomyError> {
    let p = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    // Lower the traceless part: A = g (M - p id).
    let mut lowered = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            lowered[i][j] = (0..3)
                .map(|k| metric.g[i][k] * (m[k][j] - if k == j { p } else { 0.0 }))
                .sum();
        }
    }
    let scale = 1.0
        + m.iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut residual = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            residual = residual.max((lowered[i][j] + lowered[j][i]).abs());
        }
    }
    if residual > tol * scale {
        return Err(HolonomyError::NotInCO { residual });
    }
    // Read the parameters off the antisymmetrized part.
    let anti = |i: usize, j: usize| 0.5 * (lowered[i][j] - lowered[j][i]);
    Ok(CoParams {
        p,
        a: anti(0, 2),
        b: anti(1, 2),
        c: anti(1, 0),
    })
}

/// Rebuild the matrix from its parameters (the inverse of [`co_decompose`]).
pub fn co_assemble(params: &CoParams, metric: &FrameMetric) -> [[f64; 3]; 3] {
    let CoParams { p, a, b, c } = *params;
    let lowered = [[0.0, -c, a], [c, 0.0, b], [-a, -b, 0.0]];
    let mut m = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| metric.g_inv[i][k] * lowered[k][j]).sum::<f64>()
                + if i == j { p } else { 0.0 };
        }
    }
    m
}

/// Catalog of proper subalgebras that occur as reduced holonomy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SubalgebraId {
    Trivial,
    A,
    Bq(f64),
    C,
    Dq(f64),
    E,
    Fplus,
    Fminus,
    Gq(f64),
    Full,
}

impl SubalgebraId {
    pub fn tag(&self) -> &'static str {
        match self {
            SubalgebraId::Trivial => "Trivial",
            SubalgebraId::A => "A",
            SubalgebraId::Bq(_) => "Bq",
            SubalgebraId::C => "C",
            SubalgebraId::Dq(_) => "Dq",
            SubalgebraId::E => "E",
            SubalgebraId::Fplus => "F+",
            SubalgebraId::Fminus => "F-",
            SubalgebraId::Gq(_) => "Gq",
            SubalgebraId::Full => "Full",
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            SubalgebraId::Bq(q) | SubalgebraId::Dq(q) | SubalgebraId::Gq(q) => Some(*q),
            _ => None,
        }
    }

    /// Dimension of the subalgebra as a linear space.
    pub fn dim(&self, signature: Signature) -> usize {
        match (self, signature) {
            (SubalgebraId::Trivial, _) => 0,
            (SubalgebraId::A, _) => 3,
            (SubalgebraId::Bq(_), _) => 2,
            (SubalgebraId::C, _) => 2,
            (SubalgebraId::Dq(_), _) => 1,
            (SubalgebraId::E, _) => 2,
            (SubalgebraId::Fplus, _) | (SubalgebraId::Fminus, _) => 1,
            (SubalgebraId::Gq(_), _) => 1,
            (SubalgebraId::Full, Signature::Lorentzian) => 4,
            (SubalgebraId::Full, Signature::Euclidean) => 4,
        }
    }

    /// Abstract Lie-algebra label of the holonomy algebra.
    pub fn algebra_label(&self) -> &'static str {
        match self {
            SubalgebraId::Trivial => "0",
            SubalgebraId::A => "a_1+R",
            SubalgebraId::Bq(q) if (*q + 1.0).abs() < 1e-9 => "R^2",
            SubalgebraId::Bq(_) => "a_1",
            SubalgebraId::C => "R^2",
            SubalgebraId::Dq(_) => "R",
            SubalgebraId::E => "R^2",
            SubalgebraId::Fplus | SubalgebraId::Fminus => "R",
            SubalgebraId::Gq(_) => "R",
            SubalgebraId::Full => "co",
        }
    }

    /// Max violation of the subalgebra's defining linear constraints.
    pub fn constraint_residual(&self, v: &CoParams, signature: Signature) -> f64 {
        let CoParams { p, a, b, c } = *v;
        let max = |vals: &[f64]| vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        match signature {
            Signature::Lorentzian => match self {
                SubalgebraId::Trivial => max(&[p, a, b, c]),
                SubalgebraId::A => max(&[c]),
                SubalgebraId::Bq(q) => max(&[c, a + (q + 1.0) * p]),
                SubalgebraId::C => max(&[c, b]),
                SubalgebraId::Dq(q) => max(&[c, b, a - (q + 1.0) * p]),
                SubalgebraId::E => max(&[a, c + b]),
                SubalgebraId::Fplus => max(&[c, a, b - p]),
                SubalgebraId::Fminus => max(&[c, a, b + p]),
                SubalgebraId::Gq(q) => max(&[a, b - q * p, c + q * p]),
                SubalgebraId::Full => 0.0,
            },
            // co(3) has two proper subalgebra types up to conjugacy; in the
            // orthonormal frame they are rotations about e_3 plus the trace
            // (type E) and its one-dimensional diagonal family (type G).
            Signature::Euclidean => match self {
                SubalgebraId::Trivial => max(&[p, a, b, c]),
                SubalgebraId::E => max(&[a, b]),
                SubalgebraId::Gq(q) => max(&[a, b, c + q * p]),
                SubalgebraId::Full => 0.0,
                // Not part of the Euclidean catalog; treat as unmatched.
                _ => f64::INFINITY,
            },
        }
    }
}

/// Result of sampling and classifying the connection values.
#[derive(Debug, Clone, Serialize)]
pub struct HolonomyReport {
    pub classified: SubalgebraId,
    pub signature_label: &'static str,
    pub algebra_label: &'static str,
    pub fitted_q: Option<f64>,
    pub q_fit_residual: Option<f64>,
    pub span_dim: usize,
    /// Max constraint violation of the classified subalgebra per sample point.
    pub membership_residuals: Vec<f64>,
    pub membership_residual: f64,
    pub samples: Vec<[f64; 3]>,
}

/// Tolerances of the classification pipeline.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Absolute residual below which a constraint counts as satisfied,
    /// scaled by the sample magnitude.
    pub membership_tol: f64,
    /// Relative singular-value threshold for the span dimension.
    pub span_tol: f64,
    /// |p| below this plays no part in q-fitting.
    pub p_floor: f64,
    /// Candidate q to fall back on when the least-squares fit is
    /// indeterminate (all trace parts below the floor, e.g. a vanishing
    /// potential). Membership is still checked against the samples; without
    /// a hint such structures classify into the unparametrized container.
    pub q_hint: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            membership_tol: 1e-9,
            span_tol: 1e-7,
            p_floor: 1e-6,
            q_hint: None,
        }
    }
}

/// Collect the connection value matrices Gamma(e_k) at each sample and
/// classify their span against the catalog.
pub fn classify(
    structure: &WeylStructure,
    samples: &[[f64; 3]],
    order: usize,
    options: &ClassifyOptions,
) -> Result<HolonomyReport, HolonomyError> {
    if samples.is_empty() {
        return Err(HolonomyError::EmptySampleSet);
    }
    let mut vectors: Vec<CoParams> = Vec::with_capacity(samples.len() * 3);
    for &point in samples {
        let conn = structure.solve_connection(point, order)?;
        for m in conn.value_matrices() {
            vectors.push(co_decompose(&m, &structure.metric, 1e-7)?);
        }
    }
    Ok(classify_vectors(
        &vectors,
        structure.metric.signature,
        samples,
        options,
    ))
}

fn classify_vectors(
    vectors: &[CoParams],
    signature: Signature,
    samples: &[[f64; 3]],
    options: &ClassifyOptions,
) -> HolonomyReport {
    let scale = 1.0 + vectors.iter().fold(0.0f64, |m, v| m.max(v.magnitude()));

    // Numerical span dimension by singular values.
    let rows = nalgebra::DMatrix::from_fn(vectors.len(), 4, |r, c| vectors[r].as_array()[c]);
    let svals = rows.singular_values();
    let top = svals.iter().fold(0.0f64, |m, s| m.max(*s));
    let span_dim = if top <= 1e-12 * scale {
        0
    } else {
        svals.iter().filter(|s| **s >= options.span_tol * top).count()
    };

    // q estimates for the one-parameter families: least squares on the
    // defining constraint, using samples with |p| above the floor. When no
    // sample has usable trace part the fit is indeterminate and the caller's
    // hint, if any, stands in.
    let fit = |sign: f64, from_bc: bool| -> Option<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for v in vectors {
            if v.p.abs() <= options.p_floor {
                continue;
            }
            if from_bc {
                // minimize (b - q p)^2 + (c + q p)^2
                num += v.p * (v.b - v.c);
                den += 2.0 * v.p * v.p;
            } else {
                // minimize (a + sign (q+1) p)^2 over q
                num += -sign * v.a * v.p;
                den += v.p * v.p;
            }
        }
        if den == 0.0 {
            return options.q_hint;
        }
        let ratio = num / den;
        Some(if from_bc { ratio } else { ratio - 1.0 })
    };

    // Candidate members, screened by membership of every sampled vector.
    let mut candidates: Vec<SubalgebraId> = vec![SubalgebraId::Trivial, SubalgebraId::Full];
    match signature {
        Signature::Lorentzian => {
            candidates.extend([
                SubalgebraId::A,
                SubalgebraId::C,
                SubalgebraId::E,
                SubalgebraId::Fplus,
                SubalgebraId::Fminus,
            ]);
            if let Some(q) = fit(1.0, false) {
                candidates.push(SubalgebraId::Bq(q));
            }
            if let Some(q) = fit(-1.0, false) {
                if q > -1.0 {
                    candidates.push(SubalgebraId::Dq(q));
                }
            }
            if let Some(q) = fit(0.0, true) {
                candidates.push(SubalgebraId::Gq(q));
            }
        }
        Signature::Euclidean => {
            candidates.push(SubalgebraId::E);
            if let Some(q) = fit(0.0, true) {
                candidates.push(SubalgebraId::Gq(q));
            }
        }
    }

    let tol = options.membership_tol * scale;
    let member = |id: &SubalgebraId| -> bool {
        vectors
            .iter()
            .all(|v| id.constraint_residual(v, signature) <= tol)
    };
    // Smallest containing member; ties break toward the more constrained tag.
    let order_rank = |id: &SubalgebraId| match id {
        SubalgebraId::Trivial => 0,
        SubalgebraId::Dq(_) => 1,
        SubalgebraId::Fplus => 2,
        SubalgebraId::Fminus => 3,
        SubalgebraId::Gq(_) => 4,
        SubalgebraId::Bq(_) => 5,
        SubalgebraId::C => 6,
        SubalgebraId::E => 7,
        SubalgebraId::A => 8,
        SubalgebraId::Full => 9,
    };
    let classified = candidates
        .iter()
        .filter(|id| member(id))
        .min_by(|x, y| {
            (x.dim(signature), order_rank(x)).cmp(&(y.dim(signature), order_rank(y)))
        })
        .copied()
        .unwrap_or(SubalgebraId::Full);

    let membership_residuals: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(s, _)| {
            vectors[3 * s..3 * s + 3]
                .iter()
                .map(|v| classified.constraint_residual(v, signature))
                .fold(0.0f64, f64::max)
        })
        .collect();
    let membership_residual = membership_residuals.iter().fold(0.0f64, |m, r| m.max(*r));

    let (fitted_q, q_fit_residual) = match classified {
        SubalgebraId::Bq(q) | SubalgebraId::Dq(q) | SubalgebraId::Gq(q) => {
            (Some(q), Some(membership_residual))
        }
        _ => (None, None),
    };

    HolonomyReport {
        classified,
        signature_label: match signature {
            Signature::Lorentzian => "lorentzian",
            Signature::Euclidean => "euclidean",
        },
        algebra_label: classified.algebra_label(),
        fitted_q,
        q_fit_residual,
        span_dim,
        membership_residuals,
        membership_residual,
        samples: samples.to_vec(),
    }
}
