//! Seeded sampling of evaluation points and random admissible test fields.
//!
//! Everything is driven by a ChaCha stream cipher so reports are reproducible
//! from (seed, arguments) alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::ScalarField;
use crate::jets::Axis;
use crate::weyl::DomainBox;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in the box, deterministic for a fixed seed.
pub fn points_in_box(domain: &DomainBox, count: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    (0..count)
        .map(|_| {
            let mut p = [0.0; 3];
            for i in 0..3 {
                p[i] = rng.gen_range(domain.min[i]..domain.max[i]);
            }
            p
        })
        .collect()
}

/// Which coordinates a generated field may depend on.
#[derive(Debug, Clone, Copy)]
pub struct AxisMask {
    pub x: bool,
    pub y: bool,
    pub z: bool,
}

impl AxisMask {
    pub const ALL: AxisMask = AxisMask {
        x: true,
        y: true,
        z: true,
    };

    pub const XZ: AxisMask = AxisMask {
        x: true,
        y: false,
        z: true,
    };

    pub const YZ: AxisMask = AxisMask {
        x: false,
        y: true,
        z: true,
    };

    pub const X_ONLY: AxisMask = AxisMask {
        x: true,
        y: false,
        z: false,
    };

    fn allows(&self, i: usize, j: usize, l: usize) -> bool {
        (self.x || i == 0) && (self.y || j == 0) && (self.z || l == 0)
    }
}

/// Random polynomial of degree <= 3 with coefficients in [-1, 1], restricted
/// to the allowed axes.
pub fn random_polynomial(rng: &mut ChaCha8Rng, mask: AxisMask) -> ScalarField {
    let mut acc = ScalarField::zero();
    for (i, j, l) in crate::jets::multi_indices(3) {
        if !mask.allows(i, j, l) {
            continue;
        }
        let coeff: f64 = rng.gen_range(-1.0..1.0);
        let mut term = ScalarField::number(coeff);
        for (axis, power) in [(Axis::X, i), (Axis::Y, j), (Axis::Z, l)] {
            for _ in 0..power {
                term = term.mul(&ScalarField::var(axis));
            }
        }
        acc = acc.add(&term);
    }
    acc
}

/// Random polynomial shifted to stay near 1: `1 + scale * poly`. With the
/// default box half-width 0.35 and scale 0.15 the result stays in
/// [0.52, 1.48], clear of the positivity guards.
pub fn random_positive_field(rng: &mut ChaCha8Rng, mask: AxisMask, scale: f64) -> ScalarField {
    ScalarField::number(1.0).add(&random_polynomial(rng, mask).scale(scale))
}

/// Random small field `scale * poly`, for potentials and perturbations.
pub fn random_small_field(rng: &mut ChaCha8Rng, mask: AxisMask, scale: f64) -> ScalarField {
    random_polynomial(rng, mask).scale(scale)
}

/// Default box used by the canonical families: guards stay bounded away
/// from zero for the default random fields.
pub fn default_box() -> DomainBox {
    DomainBox::symmetric(0.35)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_deterministic_per_seed() {
        let domain = default_box();
        let a = points_in_box(&domain, 5, &mut rng(42));
        let b = points_in_box(&domain, 5, &mut rng(42));
        assert_eq!(a, b);
        let c = points_in_box(&domain, 5, &mut rng(43));
        assert_ne!(a, c);
        assert!(a.iter().all(|p| domain.contains(*p)));
    }

    #[test]
    fn masked_polynomial_ignores_forbidden_axes() {
        let f = random_polynomial(&mut rng(7), AxisMask::XZ);
        let dy = f.derivative(Axis::Y);
        for p in points_in_box(&default_box(), 10, &mut rng(8)) {
            assert_eq!(dy.eval(p).unwrap(), 0.0);
        }
    }

    #[test]
    fn positive_fields_respect_the_bound() {
        let mut r = rng(11);
        for _ in 0..20 {
            let f = random_positive_field(&mut r, AxisMask::ALL, 0.15);
            for p in points_in_box(&default_box(), 50, &mut r.clone()) {
                let v = f.eval(p).unwrap();
                assert!(v > 0.1, "field dipped to {v}");
            }
        }
    }
}
