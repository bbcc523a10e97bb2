//! Pointwise exterior calculus on R^3 with jet-valued components.
//!
//! A degree-k form stores its coefficients in the coordinate basis, ordered
//! dx, dy, dz / dx^dy, dx^dz, dy^dz / dx^dy^dz. Components are jets sharing
//! one center and order, so the exterior derivative is exact in coordinates.
//! Degrees above three carry no components and are identically zero, which
//! keeps the wedge total.

use thiserror::Error;

use crate::jets::{solve_linear, Axis, Jet, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("forms have different degrees: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("coframe component matrix is singular at the point")]
    SingularCoframe,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Basis bitmasks per degree; bit 0 = dx, bit 1 = dy, bit 2 = dz.
const MASKS: [&[u8]; 4] = [
    &[0b000],
    &[0b001, 0b010, 0b100],
    &[0b011, 0b101, 0b110],
    &[0b111],
];

fn masks(degree: usize) -> &'static [u8] {
    MASKS.get(degree).copied().unwrap_or(&[])
}

fn mask_index(degree: usize, mask: u8) -> usize {
    masks(degree)
        .iter()
        .position(|&m| m == mask)
        .expect("valid basis mask")
}

/// Sign of dx^I wedge dx^J for disjoint index sets given as bitmasks: the
/// parity of the number of transpositions needed to merge-sort them.
fn wedge_sign(a: u8, b: u8) -> f64 {
    let mut inversions = 0;
    for j in 0..3 {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Differential form of degree 0..=3 (higher degrees are identically zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    degree: usize,
    center: [f64; 3],
    order: usize,
    comps: Vec<Jet>,
}

impl Form {
    pub fn zero(degree: usize, center: [f64; 3], order: usize) -> Form {
        Form {
            degree,
            center,
            order,
            comps: masks(degree)
                .iter()
                .map(|_| Jet::zero(center, order))
                .collect(),
        }
    }

    pub fn from_components(degree: usize, comps: Vec<Jet>) -> Form {
        assert_eq!(comps.len(), masks(degree).len(), "component count");
        let center = comps[0].center();
        let order = comps[0].order();
        assert!(
            comps.iter().all(|j| j.center() == center && j.order() == order),
            "components must share center and order"
        );
        Form {
            degree,
            center,
            order,
            comps,
        }
    }

    /// 0-form wrapping a scalar jet.
    pub fn scalar(jet: Jet) -> Form {
        Form {
            degree: 0,
            center: jet.center(),
            order: jet.order(),
            comps: vec![jet],
        }
    }

    /// Coordinate 1-form dx, dy or dz.
    pub fn coordinate(axis: Axis, center: [f64; 3], order: usize) -> Form {
        let mut form = Form::zero(1, center, order);
        form.comps[axis.index()] = Jet::constant(center, order, 1.0);
        form
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn components(&self) -> &[Jet] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Jet {
        &self.comps[i]
    }

    pub fn magnitude(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.magnitude()))
    }

    pub fn max_value(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, j| m.max(j.value().abs()))
    }

    pub fn try_add(&self, other: &Form) -> Result<Form, FormError> {
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch(self.degree, other.degree));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<_, _>>()?;
        Ok(Form {
            degree: self.degree,
            center: self.center,
            order: self.order,
            comps,
        })
    }

    pub fn try_sub(&self, other: &Form) -> Result<Form, FormError> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Form {
        Form {
            degree: self.degree,
            center: self.center,
            order: self.order,
            comps: self.comps.iter().map(|j| j.scale(s)).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> Form {
        Form {
            degree: self.degree,
            center: self.center,
            order,
            comps: self.comps.iter().map(|j| j.truncate(order)).collect(),
        }
    }

    /// Antisymmetric bilinear product; zero beyond degree three.
    pub fn wedge(&self, other: &Form) -> Result<Form, FormError> {
        let degree = self.degree + other.degree;
        let mut out = Form::zero(degree, self.center, self.order.min(other.order));
        if degree > 3 {
            return Ok(out);
        }
        let self_masks = masks(self.degree);
        let other_masks = masks(other.degree);
        for (ia, &ma) in self_masks.iter().enumerate() {
            for (ib, &mb) in other_masks.iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let sign = wedge_sign(ma, mb);
                let a = self.comps[ia].truncate(out.order);
                let b = other.comps[ib].truncate(out.order);
                let term = a.try_mul(&b)?.scale(sign);
                let slot = mask_index(degree, ma | mb);
                out.comps[slot] = out.comps[slot].try_add(&term)?;
            }
        }
        Ok(out)
    }

    /// Exterior derivative; the result's jets hold one order less.
    pub fn d(&self) -> Result<Form, FormError> {
        if self.order == 0 {
            return Err(FormError::Jet(JetError::OrderExceeded((1, 0, 0), 0)));
        }
        let degree = self.degree + 1;
        let mut out = Form::zero(degree, self.center, self.order - 1);
        if degree > 3 {
            return Ok(out);
        }
        for (i, &mask) in masks(self.degree).iter().enumerate() {
            for axis in Axis::ALL {
                let bit = 1u8 << axis.index();
                if mask & bit != 0 {
                    continue;
                }
                let sign = wedge_sign(bit, mask);
                let dcomp = self.comps[i].derivative(axis)?.scale(sign);
                let slot = mask_index(degree, mask | bit);
                out.comps[slot] = out.comps[slot].try_add(&dcomp)?;
            }
        }
        Ok(out)
    }
}

/// Inverse of the coframe component matrix: columns are the dual frame
/// vectors, `inverse[mu][k] = (e_k)^mu`.
pub fn coframe_inverse(coframe: &[Form; 3]) -> Result<[[Jet; 3]; 3], FormError> {
    let center = coframe[0].center();
    let order = coframe[0].order();
    let matrix: Vec<Vec<Jet>> = (0..3)
        .map(|k| (0..3).map(|mu| coframe[k].component(mu).clone()).collect())
        .collect();
    let mut out: Vec<Vec<Jet>> = vec![vec![Jet::zero(center, order); 3]; 3];
    for k in 0..3 {
        let mut rhs = vec![Jet::zero(center, order); 3];
        rhs[k] = Jet::constant(center, order, 1.0);
        let col = solve_linear(matrix.clone(), rhs).map_err(|e| match e {
            JetError::SingularSystem(_) => FormError::SingularCoframe,
            other => FormError::Jet(other),
        })?;
        for (mu, jet) in col.into_iter().enumerate() {
            out[mu][k] = jet;
        }
    }
    Ok([
        [out[0][0].clone(), out[0][1].clone(), out[0][2].clone()],
        [out[1][0].clone(), out[1][1].clone(), out[1][2].clone()],
        [out[2][0].clone(), out[2][1].clone(), out[2][2].clone()],
    ])
}

/// Frame components nu_k of a 1-form, with nu = nu_k theta^k.
pub fn one_form_frame_components(
    form: &Form,
    inverse: &[[Jet; 3]; 3],
) -> Result<[Jet; 3], FormError> {
    assert_eq!(form.degree(), 1);
    let center = form.center();
    let order = form.order().min(inverse[0][0].order());
    let mut out = [
        Jet::zero(center, order),
        Jet::zero(center, order),
        Jet::zero(center, order),
    ];
    for (k, slot) in out.iter_mut().enumerate() {
        for mu in 0..3 {
            let t = form
                .component(mu)
                .truncate(order)
                .try_mul(&inverse[mu][k].truncate(order))?;
            *slot = slot.try_add(&t)?;
        }
    }
    Ok(out)
}

/// Frame components a_kl of a 2-form, with a = (1/2) a_kl theta^k ^ theta^l
/// and a_kl = -a_lk; computed by inverting the coframe component matrix.
pub fn frame_components(form: &Form, coframe: &[Form; 3]) -> Result<[[Jet; 3]; 3], FormError> {
    let inverse = coframe_inverse(coframe)?;
    frame_components_with_inverse(form, &inverse)
}

pub fn frame_components_with_inverse(
    form: &Form,
    inverse: &[[Jet; 3]; 3],
) -> Result<[[Jet; 3]; 3], FormError> {
    assert_eq!(form.degree(), 2);
    let center = form.center();
    let order = form.order().min(inverse[0][0].order());
    // Coordinate components as an antisymmetric matrix.
    let zero = Jet::zero(center, order);
    let mut coord = vec![vec![zero.clone(); 3]; 3];
    for (slot, &mask) in masks(2).iter().enumerate() {
        let (mu, nu) = match mask {
            0b011 => (0, 1),
            0b101 => (0, 2),
            _ => (1, 2),
        };
        coord[mu][nu] = form.component(slot).truncate(order);
        coord[nu][mu] = -form.component(slot).truncate(order);
    }
    let mut out = [
        [zero.clone(), zero.clone(), zero.clone()],
        [zero.clone(), zero.clone(), zero.clone()],
        [zero.clone(), zero.clone(), zero],
    ];
    for k in 0..3 {
        for l in 0..3 {
            let mut acc = Jet::zero(center, order);
            for mu in 0..3 {
                for nu in 0..3 {
                    if coord[mu][nu].magnitude() == 0.0 {
                        continue;
                    }
                    let t = coord[mu][nu]
                        .try_mul(&inverse[mu][k].truncate(order))?
                        .try_mul(&inverse[nu][l].truncate(order))?;
                    acc = acc.try_add(&t)?;
                }
            }
            out[k][l] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use rand::{Rng, SeedableRng};

    fn dx(center: [f64; 3], order: usize) -> Form {
        Form::coordinate(Axis::X, center, order)
    }

    fn dy(center: [f64; 3], order: usize) -> Form {
        Form::coordinate(Axis::Y, center, order)
    }

    fn dz(center: [f64; 3], order: usize) -> Form {
        Form::coordinate(Axis::Z, center, order)
    }

    fn max_diff(a: &Form, b: &Form) -> f64 {
        a.components()
            .iter()
            .zip(b.components())
            .flat_map(|(x, y)| {
                x.coeffs()
                    .iter()
                    .zip(y.coeffs())
                    .map(|(u, v)| (u - v).abs())
            })
            .fold(0.0, f64::max)
    }

    fn random_poly(rng: &mut impl Rng, center: [f64; 3], order: usize) -> Jet {
        let x = Jet::variable(center, order, Axis::X);
        let y = Jet::variable(center, order, Axis::Y);
        let z = Jet::variable(center, order, Axis::Z);
        let mut jet = Jet::zero(center, order);
        for (i, j, l) in crate::jets::multi_indices(3) {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let term = x.try_powi(i as i32).unwrap()
                * y.try_powi(j as i32).unwrap()
                * z.try_powi(l as i32).unwrap();
            jet = jet + term.scale(c);
        }
        jet
    }

    #[test]
    fn wedge_basics() {
        let c = [0.0; 3];
        let two = dx(c, 2).wedge(&dy(c, 2)).unwrap();
        assert_eq!(two.degree(), 2);
        assert_eq!(two.component(0).value(), 1.0);
        assert_eq!(two.component(1).value(), 0.0);
        assert_eq!(two.component(2).value(), 0.0);

        let zero = dx(c, 2).wedge(&dx(c, 2)).unwrap();
        assert_eq!(zero.magnitude(), 0.0);
    }

    #[test]
    fn wedge_with_coefficients() {
        // (x dy) ^ (y dz) at (2,3,0) -> 6 dy^dz.
        let c = [2.0, 3.0, 0.0];
        let x = Jet::variable(c, 2, Axis::X);
        let y = Jet::variable(c, 2, Axis::Y);
        let a = Form::scalar(x).wedge(&dy(c, 2)).unwrap();
        let b = Form::scalar(y).wedge(&dz(c, 2)).unwrap();
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.component(0).value(), 0.0);
        assert_eq!(w.component(1).value(), 0.0);
        assert_eq!(w.component(2).value(), 6.0);
    }

    #[test]
    fn wedge_anticommutes_by_degree() {
        let c = [0.3, -0.1, 0.2];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a = Form::from_components(
            1,
            (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
        );
        let b = Form::from_components(
            1,
            (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
        );
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap().scale(-1.0);
        assert!(max_diff(&ab, &ba) < 1e-12);
    }

    #[test]
    fn wedge_beyond_top_degree_is_zero() {
        let c = [0.0; 3];
        let vol = dx(c, 2)
            .wedge(&dy(c, 2))
            .unwrap()
            .wedge(&dz(c, 2))
            .unwrap();
        assert_eq!(vol.degree(), 3);
        let overflow = vol.wedge(&dx(c, 2)).unwrap();
        assert_eq!(overflow.degree(), 4);
        assert!(overflow.components().is_empty());
    }

    #[test]
    fn exterior_derivative_of_product() {
        // d(x*y) at (2,3,0) -> 3 dx + 2 dy.
        let c = [2.0, 3.0, 0.0];
        let xy = Jet::variable(c, 2, Axis::X) * Jet::variable(c, 2, Axis::Y);
        let df = Form::scalar(xy).d().unwrap();
        assert_eq!(df.component(0).value(), 3.0);
        assert_eq!(df.component(1).value(), 2.0);
        assert_eq!(df.component(2).value(), 0.0);
    }

    #[test]
    fn exterior_derivative_of_x_dy() {
        let c = [0.5, -0.4, 0.1];
        let x = Jet::variable(c, 2, Axis::X);
        let form = Form::scalar(x).wedge(&dy(c, 2)).unwrap();
        let d = form.d().unwrap();
        assert_eq!(d.component(0).value(), 1.0); // dx^dy
        assert_eq!(d.component(1).value(), 0.0);
        assert_eq!(d.component(2).value(), 0.0);
    }

    #[test]
    fn d_squared_vanishes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let c = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let f = Form::scalar(random_poly(&mut rng, c, 3));
            let ddf = f.d().unwrap().d().unwrap();
            assert!(ddf.magnitude() < 1e-12, "d(d f) = {}", ddf.magnitude());

            let one = Form::from_components(
                1,
                (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
            );
            let dd = one.d().unwrap().d().unwrap();
            assert!(dd.magnitude() < 1e-12, "d(d omega) = {}", dd.magnitude());
        }
    }

    #[test]
    fn leibniz_rule() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let c = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let f = Form::scalar(random_poly(&mut rng, c, 3));
            let omega = Form::from_components(
                1,
                (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
            );
            let lhs = f.wedge(&omega).unwrap().d().unwrap();
            let rhs = f
                .d()
                .unwrap()
                .wedge(&omega.truncate(2))
                .unwrap()
                .try_add(&f.truncate(2).wedge(&omega.d().unwrap()).unwrap())
                .unwrap();
            assert!(max_diff(&lhs, &rhs) < 1e-10);
        }
    }

    #[test]
    fn wedge_associativity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let c = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let forms: Vec<Form> = (0..3)
                .map(|_| {
                    Form::from_components(
                        1,
                        (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
                    )
                })
                .collect();
            let left = forms[0]
                .wedge(&forms[1])
                .unwrap()
                .wedge(&forms[2])
                .unwrap();
            let right = forms[0]
                .wedge(&forms[1].wedge(&forms[2]).unwrap())
                .unwrap();
            assert!(max_diff(&left, &right) < 1e-12);
        }
    }

    #[test]
    fn frame_components_of_coordinate_coframe() {
        let c = [0.2, 0.4, -0.3];
        let coframe = [dx(c, 3), dy(c, 3), dz(c, 3)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let form = Form::from_components(
            2,
            (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
        );
        let fc = frame_components(&form, &coframe).unwrap();
        assert!((fc[0][1].value() - form.component(0).value()).abs() < 1e-12);
        assert!((fc[0][2].value() - form.component(1).value()).abs() < 1e-12);
        assert!((fc[1][2].value() - form.component(2).value()).abs() < 1e-12);
        assert!((fc[1][0].value() + form.component(0).value()).abs() < 1e-12);
    }

    #[test]
    fn theta12_has_unit_frame_component() {
        // a = theta^1 ^ theta^2 for a generic invertible coframe.
        let c = [0.1, 0.2, 0.3];
        let parse = |s: &str| {
            let f = ScalarField::parse(s).unwrap();
            f.eval_jet(c, 3).unwrap()
        };
        let coframe = [
            Form::from_components(1, vec![parse("1 + x/4"), parse("y/3"), parse("0")]),
            Form::from_components(1, vec![parse("z/5"), parse("1 - x/6"), parse("x*y/4")]),
            Form::from_components(1, vec![parse("0"), parse("x/7"), parse("1 + y/5")]),
        ];
        let a = coframe[0].wedge(&coframe[1]).unwrap();
        let fc = frame_components(&a.truncate(2), &[
            coframe[0].truncate(2),
            coframe[1].truncate(2),
            coframe[2].truncate(2),
        ])
        .unwrap();
        for k in 0..3 {
            for l in 0..3 {
                let expect = match (k, l) {
                    (0, 1) => 1.0,
                    (1, 0) => -1.0,
                    _ => 0.0,
                };
                assert!(
                    (fc[k][l].value() - expect).abs() < 1e-10,
                    "a_{k}{l} = {}",
                    fc[k][l].value()
                );
            }
        }
    }

    #[test]
    fn random_two_form_reconstructs_from_frame_components() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let c = [
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
            ];
            // Coframe = identity + small random perturbation, surely invertible.
            let coframe: Vec<Form> = (0..3)
                .map(|k| {
                    let comps: Vec<Jet> = (0..3)
                        .map(|mu| {
                            let bump = random_poly(&mut rng, c, 3).scale(0.2);
                            if mu == k {
                                Jet::constant(c, 3, 1.0) + bump
                            } else {
                                bump
                            }
                        })
                        .collect();
                    Form::from_components(1, comps)
                })
                .collect();
            let coframe: [Form; 3] = [coframe[0].clone(), coframe[1].clone(), coframe[2].clone()];
            let a = Form::from_components(
                2,
                (0..3).map(|_| random_poly(&mut rng, c, 3)).collect(),
            );
            let fc = frame_components(&a, &coframe).unwrap();
            // Rebuild sum_{k<l} a_kl theta^k ^ theta^l and compare.
            let mut rebuilt = Form::zero(2, c, 3);
            for k in 0..3 {
                for l in (k + 1)..3 {
                    let term = Form::scalar(fc[k][l].clone())
                        .wedge(&coframe[k])
                        .unwrap()
                        .wedge(&coframe[l])
                        .unwrap();
                    rebuilt = rebuilt.try_add(&term).unwrap();
                }
            }
            for (got, want) in rebuilt.components().iter().zip(a.components()) {
                assert!(
                    (got.value() - want.value()).abs() < 1e-10,
                    "reconstruction mismatch"
                );
            }
        }
    }
}
