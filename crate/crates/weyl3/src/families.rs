//! Constructors for the canonical Weyl structures with reduced holonomy.
//!
//! Each family is a coordinate normal form (metric, potential) together with
//! an adapted null (or orthonormal) coframe and the geometric object whose
//! constancy reduces the holonomy. Constructors return the structure, the
//! expected coordinate metric for reconstruction checks, and the constant
//! objects to verify.

use serde::Serialize;
use thiserror::Error;

use crate::fields::{EvalError, ScalarField};
use crate::holonomy::SubalgebraId;
use crate::jets::Axis;
use crate::sample;
use crate::weyl::{DomainBox, FrameMetric, Guard, WeylError, WeylStructure};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("family {family} requires the field {field}")]
    MissingField {
        family: &'static str,
        field: &'static str,
    },
    #[error("{0}")]
    BadParameter(String),
    #[error("field {field} of family {family} must not depend on {axis}: d/d{axis} = {value:.3e} at {point:?}")]
    ForbiddenDependency {
        family: &'static str,
        field: &'static str,
        axis: &'static str,
        point: [f64; 3],
        value: f64,
    },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Canonical family names as they appear on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyTag {
    A,
    B0,
    Bm2,
    Bq,
    C,
    D,
    E,
    AEw,
}

impl FamilyTag {
    pub fn parse(s: &str) -> Option<FamilyTag> {
        match s {
            "A" => Some(FamilyTag::A),
            "B0" => Some(FamilyTag::B0),
            "Bm2" => Some(FamilyTag::Bm2),
            "Bq" => Some(FamilyTag::Bq),
            "C" => Some(FamilyTag::C),
            "D" => Some(FamilyTag::D),
            "E" => Some(FamilyTag::E),
            "A-EW" => Some(FamilyTag::AEw),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyTag::A => "A",
            FamilyTag::B0 => "B0",
            FamilyTag::Bm2 => "Bm2",
            FamilyTag::Bq => "Bq",
            FamilyTag::C => "C",
            FamilyTag::D => "D",
            FamilyTag::E => "E",
            FamilyTag::AEw => "A-EW",
        }
    }

    /// The subalgebra the classifier is expected to return.
    pub fn expected_subalgebra(&self, q: Option<f64>) -> SubalgebraId {
        match self {
            FamilyTag::A => SubalgebraId::A,
            FamilyTag::B0 => SubalgebraId::Bq(0.0),
            FamilyTag::Bm2 => SubalgebraId::Bq(-2.0),
            FamilyTag::Bq => SubalgebraId::Bq(q.unwrap_or(f64::NAN)),
            FamilyTag::C => SubalgebraId::C,
            FamilyTag::D => SubalgebraId::Dq(0.0),
            FamilyTag::E => SubalgebraId::E,
            FamilyTag::AEw => SubalgebraId::Bq(-0.5),
        }
    }
}

/// Sign choice: for family E the sign of the dz^2 term (minus is Lorentzian,
/// plus Euclidean); for A-EW the sign of the 2 dx dy cross term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricSign {
    Plus,
    Minus,
}

impl MetricSign {
    pub fn parse(s: &str) -> Option<MetricSign> {
        match s {
            "+" => Some(MetricSign::Plus),
            "-" => Some(MetricSign::Minus),
            _ => None,
        }
    }

    fn value(&self) -> f64 {
        match self {
            MetricSign::Plus => 1.0,
            MetricSign::Minus => -1.0,
        }
    }
}

/// Named coefficient fields; which are required depends on the family.
#[derive(Debug, Clone, Default)]
pub struct FamilyFields {
    pub h: Option<ScalarField>,
    pub k: Option<ScalarField>,
    pub l: Option<ScalarField>,
    /// F(x, z) of the reduced family.
    pub f_upper: Option<ScalarField>,
    /// G(x, y, z) of the reduced family.
    pub g_upper: Option<ScalarField>,
    /// f(x) of the reduced family.
    pub f_lower: Option<ScalarField>,
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub tag: FamilyTag,
    pub q: Option<f64>,
    pub sign: MetricSign,
    pub fields: FamilyFields,
    pub domain: DomainBox,
}

impl FamilySpec {
    pub fn new(tag: FamilyTag) -> FamilySpec {
        FamilySpec {
            tag,
            q: None,
            sign: match tag {
                // E defaults to the Lorentzian signature; the reduced family
                // defaults to the cross-term sign that admits the constant
                // weighted vector (see the builder notes).
                FamilyTag::E => MetricSign::Minus,
                _ => MetricSign::Plus,
            },
            fields: FamilyFields::default(),
            domain: sample::default_box(),
        }
    }
}

/// What kind of geometric object is claimed constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObjectKind {
    /// Weighted vector field: verified through nabla-hat V = 0.
    Vector,
    /// Weighted 1-form: verified through the covector rule.
    OneForm,
    /// Direction only: verified through the transversality residual.
    Direction,
}

/// A geometric object expected to be covariantly constant, in frame
/// components of the family's adapted coframe.
#[derive(Debug, Clone)]
pub struct ConstantObject {
    pub kind: ObjectKind,
    pub label: String,
    pub frame_components: [ScalarField; 3],
    pub weight: Option<f64>,
}

impl ConstantObject {
    /// Residual of the constancy claim at a point.
    pub fn residual(
        &self,
        structure: &WeylStructure,
        point: [f64; 3],
        order: usize,
    ) -> Result<f64, WeylError> {
        match self.kind {
            ObjectKind::Direction => {
                structure.constant_direction_check(&self.frame_components, point, order)
            }
            ObjectKind::Vector => {
                let d = structure.weighted_covariant_derivative(
                    &self.frame_components,
                    self.weight.unwrap_or(0.0),
                    point,
                    order,
                )?;
                Ok(max_abs(&d))
            }
            ObjectKind::OneForm => {
                let d = structure.weighted_covariant_derivative_covector(
                    &self.frame_components,
                    self.weight.unwrap_or(0.0),
                    point,
                    order,
                )?;
                Ok(max_abs(&d))
            }
        }
    }
}

fn max_abs(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// A built family: structure plus everything needed to check it.
pub struct FamilyInstance {
    pub tag: FamilyTag,
    pub q: Option<f64>,
    pub sign: MetricSign,
    pub structure: WeylStructure,
    /// Coordinate metric of the normal form, for reconstruction checks.
    pub expected_metric: [[ScalarField; 3]; 3],
    pub constant_objects: Vec<ConstantObject>,
    /// Convention notes surfaced in reports.
    pub notes: Vec<String>,
}

/// Number of seeded probe points used for dependency validation.
const PROBE_POINTS: usize = 12;

pub fn build(spec: &FamilySpec) -> Result<FamilyInstance, FamilyError> {
    let need = |f: &Option<ScalarField>, field: &'static str| -> Result<ScalarField, FamilyError> {
        f.clone().ok_or(FamilyError::MissingField {
            family: spec.tag.name(),
            field,
        })
    };
    let zero = ScalarField::zero;
    let one = || ScalarField::number(1.0);

    // Shared pieces of the null-coframe families with metric
    // dz^2 + 2 H dx dy + K dx^2: theta^1 = -(H dy + K/2 dx), theta^2 = dz,
    // theta^3 = dx.
    let null_coframe = |h: &ScalarField, k: &ScalarField| -> [[ScalarField; 3]; 3] {
        [
            [k.scale(0.5).neg(), h.neg(), zero()],
            [zero(), zero(), one()],
            [one(), zero(), zero()],
        ]
    };
    let null_metric = |h: &ScalarField, k: &ScalarField| -> [[ScalarField; 3]; 3] {
        [
            [k.clone(), h.clone(), zero()],
            [h.clone(), zero(), zero()],
            [zero(), zero(), one()],
        ]
    };
    // nu_z = -H_z / (2H), shared by several families.
    let nu_z_of = |h: &ScalarField| h.derivative(Axis::Z).div(&h.scale(2.0)).neg();
    let h_guard = |h: &ScalarField| Guard {
        label: "|H| >= 0.1".into(),
        field: h.clone(),
        min_abs: 0.1,
    };

    let mut notes = Vec::new();
    let (coframe, metric, nu, guards, expected_metric, constant_objects): (
        [[ScalarField; 3]; 3],
        FrameMetric,
        [ScalarField; 3],
        Vec<Guard>,
        [[ScalarField; 3]; 3],
        Vec<ConstantObject>,
    ) = match spec.tag {
        FamilyTag::A => {
            let h = need(&spec.fields.h, "H")?;
            let k = need(&spec.fields.k, "K")?;
            let l = need(&spec.fields.l, "L")?;
            let objects = vec![ConstantObject {
                kind: ObjectKind::Direction,
                label: "null direction of d/dy".into(),
                frame_components: [h.neg(), zero(), zero()],
                weight: None,
            }];
            (
                null_coframe(&h, &k),
                FrameMetric::lorentzian_null(),
                [l, zero(), nu_z_of(&h)],
                vec![h_guard(&h)],
                null_metric(&h, &k),
                objects,
            )
        }
        FamilyTag::B0 => {
            let k = need(&spec.fields.k, "K")?;
            let l = need(&spec.fields.l, "L")?;
            forbid_dependency(spec, &k, "K", Axis::Y)?;
            let objects = vec![ConstantObject {
                kind: ObjectKind::Vector,
                label: "null vector d/dy".into(),
                frame_components: [ScalarField::number(-1.0), zero(), zero()],
                weight: Some(0.0),
            }];
            (
                null_coframe(&one(), &k),
                FrameMetric::lorentzian_null(),
                [l, zero(), zero()],
                Vec::new(),
                null_metric(&one(), &k),
                objects,
            )
        }
        FamilyTag::Bm2 => {
            let h = need(&spec.fields.h, "H")?;
            let k = need(&spec.fields.k, "K")?;
            // nu = (K_y - 2 H_x)/(4H) dx - H_z/(2H) dz.
            let nu_x = k
                .derivative(Axis::Y)
                .sub(&h.derivative(Axis::X).scale(2.0))
                .div(&h.scale(4.0));
            notes.push(
                "the 1-form dx is parallel (weight 0); the weight -2 constant object \
                 is the null vector (1/H) d/dy dual to it"
                    .into(),
            );
            let objects = vec![
                ConstantObject {
                    kind: ObjectKind::OneForm,
                    label: "null 1-form dx".into(),
                    frame_components: [zero(), zero(), one()],
                    weight: Some(0.0),
                },
                ConstantObject {
                    kind: ObjectKind::Vector,
                    label: "null vector (1/H) d/dy of weight -2".into(),
                    frame_components: [ScalarField::number(-1.0), zero(), zero()],
                    weight: Some(-2.0),
                },
                ConstantObject {
                    kind: ObjectKind::Direction,
                    label: "null direction of d/dy".into(),
                    frame_components: [h.neg(), zero(), zero()],
                    weight: None,
                },
            ];
            (
                null_coframe(&h, &k),
                FrameMetric::lorentzian_null(),
                [nu_x, zero(), nu_z_of(&h)],
                vec![h_guard(&h)],
                null_metric(&h, &k),
                objects,
            )
        }
        FamilyTag::Bq => {
            let q = spec.q.ok_or_else(|| {
                FamilyError::BadParameter("family Bq needs the parameter q".into())
            })?;
            if q == 0.0 || q == -2.0 {
                return Err(FamilyError::BadParameter(format!(
                    "family Bq requires q != 0, -2 (got q = {q}); use B0 or Bm2 instead"
                )));
            }
            let k = need(&spec.fields.k, "K")?;
            let nu_x = k.derivative(Axis::Y).scale(-1.0 / (2.0 * q));
            let objects = vec![ConstantObject {
                kind: ObjectKind::Vector,
                label: format!("null vector d/dy of weight {q}"),
                frame_components: [ScalarField::number(-1.0), zero(), zero()],
                weight: Some(q),
            }];
            (
                null_coframe(&one(), &k),
                FrameMetric::lorentzian_null(),
                [nu_x, zero(), zero()],
                Vec::new(),
                null_metric(&one(), &k),
                objects,
            )
        }
        FamilyTag::C => {
            let h = need(&spec.fields.h, "H")?;
            let objects = vec![ConstantObject {
                kind: ObjectKind::Direction,
                label: "spatial direction of d/dz".into(),
                frame_components: [zero(), one(), zero()],
                weight: None,
            }];
            (
                null_coframe(&h, &zero()),
                FrameMetric::lorentzian_null(),
                [zero(), zero(), nu_z_of(&h)],
                vec![h_guard(&h)],
                null_metric(&h, &zero()),
                objects,
            )
        }
        FamilyTag::D => {
            let h = need(&spec.fields.h, "H")?;
            forbid_dependency(spec, &h, "H", Axis::X)?;
            let objects = vec![
                ConstantObject {
                    kind: ObjectKind::Direction,
                    label: "spatial direction of d/dz".into(),
                    frame_components: [zero(), one(), zero()],
                    weight: None,
                },
                ConstantObject {
                    kind: ObjectKind::Vector,
                    label: "null vector d/dx".into(),
                    frame_components: [zero(), zero(), one()],
                    weight: Some(0.0),
                },
            ];
            (
                null_coframe(&h, &zero()),
                FrameMetric::lorentzian_null(),
                [zero(), zero(), nu_z_of(&h)],
                vec![h_guard(&h)],
                null_metric(&h, &zero()),
                objects,
            )
        }
        FamilyTag::E => {
            let k = need(&spec.fields.k, "K")?;
            let nu_z = k.derivative(Axis::Z).div(&k.scale(2.0)).neg();
            let root_k = k.sqrt();
            let guards = vec![Guard {
                label: "K >= 0.1".into(),
                field: k.clone(),
                min_abs: 0.1,
            }];
            let sgn = spec.sign.value();
            let expected = [
                [k.clone(), zero(), zero()],
                [zero(), k.clone(), zero()],
                [zero(), zero(), ScalarField::number(sgn)],
            ];
            match spec.sign {
                MetricSign::Minus => {
                    // Lorentzian: K(dx^2 + dy^2) - dz^2 in the null coframe
                    // theta^1 = (sqrt(K) dx + dz)/sqrt(2), theta^2 = sqrt(K) dy,
                    // theta^3 = (dz - sqrt(K) dx)/sqrt(2); then e_1 + e_3 is
                    // parallel to d/dz.
                    let s2 = std::f64::consts::FRAC_1_SQRT_2;
                    let coframe = [
                        [root_k.scale(s2), zero(), ScalarField::number(s2)],
                        [zero(), root_k.clone(), zero()],
                        [root_k.scale(-s2), zero(), ScalarField::number(s2)],
                    ];
                    let objects = vec![ConstantObject {
                        kind: ObjectKind::Direction,
                        label: "timelike direction of d/dz".into(),
                        frame_components: [
                            ScalarField::number(s2),
                            zero(),
                            ScalarField::number(s2),
                        ],
                        weight: None,
                    }];
                    (
                        coframe,
                        FrameMetric::lorentzian_null(),
                        [zero(), zero(), nu_z],
                        guards,
                        expected,
                        objects,
                    )
                }
                MetricSign::Plus => {
                    // Euclidean: orthonormal coframe (sqrt(K) dx, sqrt(K) dy, dz).
                    let coframe = [
                        [root_k.clone(), zero(), zero()],
                        [zero(), root_k.clone(), zero()],
                        [zero(), zero(), one()],
                    ];
                    let objects = vec![ConstantObject {
                        kind: ObjectKind::Direction,
                        label: "direction of d/dz".into(),
                        frame_components: [zero(), zero(), one()],
                        weight: None,
                    }];
                    (
                        coframe,
                        FrameMetric::euclidean(),
                        [zero(), zero(), nu_z],
                        guards,
                        expected,
                        objects,
                    )
                }
            }
        }
        FamilyTag::AEw => {
            let f_upper = need(&spec.fields.f_upper, "F")?;
            let g_upper = need(&spec.fields.g_upper, "G")?;
            let f_lower = need(&spec.fields.f_lower, "f")?;
            forbid_dependency(spec, &f_upper, "F", Axis::Y)?;
            forbid_dependency(spec, &f_lower, "f", Axis::Y)?;
            forbid_dependency(spec, &f_lower, "f", Axis::Z)?;
            // nu = (G_y + f'(x)) dx.
            let nu_x = g_upper
                .derivative(Axis::Y)
                .add(&f_lower.derivative(Axis::X));
            let exp_f_half = f_upper.scale(0.5).exp();
            let expected = [
                [
                    g_upper.clone(),
                    ScalarField::number(spec.sign.value()),
                    zero(),
                ],
                [ScalarField::number(spec.sign.value()), zero(), zero()],
                [zero(), zero(), f_upper.exp()],
            ];
            match spec.sign {
                MetricSign::Plus => {
                    // e^F dz^2 + 2 dx dy + G dx^2. The frame is rescaled by
                    // s = exp(f/2) along the null pair so that the constant
                    // weight -1/2 vector X = s d/dy has constant frame
                    // components and the connection sits in the q = -1/2
                    // normal form.
                    let s = f_lower.scale(0.5).exp();
                    let s_inv = f_lower.scale(-0.5).exp();
                    let coframe = [
                        [
                            s_inv.mul(&g_upper.scale(0.5)).neg(),
                            s_inv.neg(),
                            zero(),
                        ],
                        [zero(), zero(), exp_f_half],
                        [s.clone(), zero(), zero()],
                    ];
                    notes.push(
                        "cross term +2 dx dy: admits the constant null vector \
                         X = exp(f/2) d/dy of weight -1/2"
                            .into(),
                    );
                    let objects = vec![ConstantObject {
                        kind: ObjectKind::Vector,
                        label: "null vector exp(f/2) d/dy of weight -1/2".into(),
                        frame_components: [ScalarField::number(-1.0), zero(), zero()],
                        weight: Some(-0.5),
                    }];
                    (
                        coframe,
                        FrameMetric::lorentzian_null(),
                        [nu_x, zero(), zero()],
                        Vec::new(),
                        expected,
                        objects,
                    )
                }
                MetricSign::Minus => {
                    // e^F dz^2 - 2 dx dy + G dx^2 as printed. Only the null
                    // direction of d/dy is constant here; no weighted vector
                    // in that direction exists for generic G.
                    let coframe = [
                        [g_upper.scale(0.5).neg(), one(), zero()],
                        [zero(), zero(), exp_f_half],
                        [one(), zero(), zero()],
                    ];
                    notes.push(
                        "cross term -2 dx dy: only the null direction of d/dy is constant"
                            .into(),
                    );
                    let objects = vec![ConstantObject {
                        kind: ObjectKind::Direction,
                        label: "null direction of d/dy".into(),
                        frame_components: [one(), zero(), zero()],
                        weight: None,
                    }];
                    (
                        coframe,
                        FrameMetric::lorentzian_null(),
                        [nu_x, zero(), zero()],
                        Vec::new(),
                        expected,
                        objects,
                    )
                }
            }
        }
    };

    let structure = WeylStructure {
        coframe,
        metric,
        nu,
        domain: spec.domain,
        guards,
    };
    Ok(FamilyInstance {
        tag: spec.tag,
        q: spec.q,
        sign: spec.sign,
        structure,
        expected_metric,
        constant_objects,
        notes,
    })
}

/// Error when `field` shows a numeric dependence on `axis` at seeded probes.
fn forbid_dependency(
    spec: &FamilySpec,
    field: &ScalarField,
    name: &'static str,
    axis: Axis,
) -> Result<(), FamilyError> {
    let d = field.derivative(axis);
    let mut rng = sample::rng(0x5eed);
    for point in sample::points_in_box(&spec.domain, PROBE_POINTS, &mut rng) {
        let value = d.eval(point)?;
        if value.abs() > 1e-10 {
            return Err(FamilyError::ForbiddenDependency {
                family: spec.tag.name(),
                field: name,
                axis: axis.name(),
                point,
                value,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::{classify, ClassifyOptions};
    use crate::sample::{points_in_box, rng};

    fn parse(s: &str) -> ScalarField {
        ScalarField::parse(s).unwrap()
    }

    fn spec_with(tag: FamilyTag, f: impl FnOnce(&mut FamilySpec)) -> FamilySpec {
        let mut spec = FamilySpec::new(tag);
        f(&mut spec);
        spec
    }

    fn check_instance(spec: &FamilySpec, expect: SubalgebraId) {
        let instance = build(spec).unwrap();
        let mut r = rng(99);
        let points = points_in_box(&spec.domain, 20, &mut r);
        // Metric reconstruction.
        for &p in &points {
            let res = instance
                .structure
                .metric_reconstruction_residual(&instance.expected_metric, p)
                .unwrap();
            assert!(res < 1e-10, "{}: metric residual {res}", spec.tag.name());
            assert!(instance.structure.signature_ok(p).unwrap());
            let conn = instance.structure.solve_connection(p, 3).unwrap();
            assert!(conn.torsion_residual < 1e-10);
            assert!(conn.symmetry_residual < 1e-10);
        }
        // Constant objects.
        for object in &instance.constant_objects {
            for &p in &points[..10] {
                let res = object.residual(&instance.structure, p, 3).unwrap();
                assert!(
                    res < 1e-9,
                    "{}: object `{}` residual {res} at {p:?}",
                    spec.tag.name(),
                    object.label
                );
            }
        }
        // Classification.
        let report = classify(
            &instance.structure,
            &points[..10],
            3,
            &ClassifyOptions::default(),
        )
        .unwrap();
        match (expect, report.classified) {
            (SubalgebraId::Bq(want), SubalgebraId::Bq(got)) => {
                assert!((want - got).abs() < 1e-6, "q mismatch: {got} vs {want}")
            }
            (SubalgebraId::Dq(want), SubalgebraId::Dq(got)) => {
                assert!((want - got).abs() < 1e-6)
            }
            (want, got) => assert_eq!(
                want,
                got,
                "{}: classified {:?}",
                spec.tag.name(),
                report
            ),
        }
        assert!(report.membership_residual < 1e-9);
    }

    #[test]
    fn family_a_checks() {
        let spec = spec_with(FamilyTag::A, |s| {
            s.fields.h = Some(parse("1 + x/5 + z^2/7"));
            s.fields.k = Some(parse("x*y/3 + z/2"));
            s.fields.l = Some(parse("y/4 - x*z/6"));
        });
        check_instance(&spec, SubalgebraId::A);
    }

    #[test]
    fn family_b0_checks() {
        let spec = spec_with(FamilyTag::B0, |s| {
            s.fields.k = Some(parse("1 + z^2 + x*z/2"));
            s.fields.l = Some(parse("x + y/2 + z/3"));
        });
        check_instance(&spec, SubalgebraId::Bq(0.0));
    }

    #[test]
    fn family_b0_rejects_y_dependent_k() {
        let spec = spec_with(FamilyTag::B0, |s| {
            s.fields.k = Some(parse("y"));
            s.fields.l = Some(parse("0"));
        });
        assert!(matches!(
            build(&spec),
            Err(FamilyError::ForbiddenDependency { field: "K", .. })
        ));
    }

    #[test]
    fn family_bm2_checks() {
        let spec = spec_with(FamilyTag::Bm2, |s| {
            s.fields.h = Some(parse("1 + x/6 + y/5 + z^2/8"));
            s.fields.k = Some(parse("x*y/3 + y*z/4"));
        });
        check_instance(&spec, SubalgebraId::Bq(-2.0));
    }

    #[test]
    fn family_bq_checks() {
        let spec = spec_with(FamilyTag::Bq, |s| {
            s.q = Some(0.7);
            s.fields.k = Some(parse("1 + y^2/3 + x*z/2"));
        });
        check_instance(&spec, SubalgebraId::Bq(0.7));
    }

    #[test]
    fn family_bq_guards_bad_q() {
        for q in [0.0, -2.0] {
            let spec = spec_with(FamilyTag::Bq, |s| {
                s.q = Some(q);
                s.fields.k = Some(parse("y"));
            });
            assert!(matches!(build(&spec), Err(FamilyError::BadParameter(_))));
        }
    }

    #[test]
    fn family_c_checks() {
        let spec = spec_with(FamilyTag::C, |s| {
            s.fields.h = Some(parse("1 + x^2/4 + z/3"));
        });
        check_instance(&spec, SubalgebraId::C);
    }

    #[test]
    fn family_d_checks() {
        let spec = spec_with(FamilyTag::D, |s| {
            s.fields.h = Some(parse("1 + y/4 + z^2/5"));
        });
        check_instance(&spec, SubalgebraId::Dq(0.0));
    }

    #[test]
    fn family_e_lorentzian_checks() {
        let spec = spec_with(FamilyTag::E, |s| {
            s.sign = MetricSign::Minus;
            s.fields.k = Some(parse("1 + x^2/5 + y/4 + z/3"));
        });
        check_instance(&spec, SubalgebraId::E);
    }

    #[test]
    fn family_e_euclidean_checks() {
        let spec = spec_with(FamilyTag::E, |s| {
            s.sign = MetricSign::Plus;
            s.fields.k = Some(parse("1 + y^2/5 + x/4 + z/3"));
        });
        check_instance(&spec, SubalgebraId::E);
    }

    #[test]
    fn family_aew_plus_checks() {
        let spec = spec_with(FamilyTag::AEw, |s| {
            s.sign = MetricSign::Plus;
            s.fields.f_upper = Some(parse("x/4 + z/3 + x*z/5"));
            s.fields.g_upper = Some(parse("y^2/4 + x*y/3 + z/2"));
            s.fields.f_lower = Some(parse("x/2 + x^2/5"));
        });
        check_instance(&spec, SubalgebraId::Bq(-0.5));
    }

    #[test]
    fn missing_fields_are_reported() {
        let spec = FamilySpec::new(FamilyTag::A);
        assert!(matches!(
            build(&spec),
            Err(FamilyError::MissingField { field: "H", .. })
        ));
    }

    #[test]
    fn constant_h_type_c_is_flat() {
        let spec = spec_with(FamilyTag::C, |s| {
            s.fields.h = Some(parse("1"));
        });
        let instance = build(&spec).unwrap();
        // nu = 0 and the curvature vanishes.
        for mu in 0..3 {
            assert!(instance.structure.nu[mu].is_zero_literal() || {
                instance.structure.nu[mu].eval([0.1, 0.2, 0.3]).unwrap().abs() < 1e-15
            });
        }
        let curv = instance.structure.curvature([0.1, -0.2, 0.15], 3).unwrap();
        assert!(curv.max_omega < 1e-12);
        assert!(curv.max_ew < 1e-12);
    }
}
