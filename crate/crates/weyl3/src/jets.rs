//! Truncated multivariate Taylor arithmetic in three variables.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function at a base
//! point, up to a fixed total order. All differentiation in the toolkit is
//! carried by jets, so derivatives are exact to rounding rather than
//! approximated by finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Coordinate axes of the underlying space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jets have different centers: {0:?} vs {1:?}")]
    CenterMismatch([f64; 3], [f64; 3]),
    #[error("jets have different orders: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("division by a jet whose value part {0} is below the working epsilon")]
    DivisionByZeroValue(f64),
    #[error("{func} undefined for value part {value}")]
    DomainError { func: &'static str, value: f64 },
    #[error("multi-index {0:?} exceeds jet order {1}")]
    OrderExceeded((usize, usize, usize), usize),
    #[error("linear system is numerically singular (best pivot {0:.3e})")]
    SingularSystem(f64),
}

/// Number of coefficients of a jet of the given order: binomial(order+3, 3).
pub fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

/// Dense rank of the multi-index (i, j, l) in graded ordering
/// (total degree first, then i descending, then j descending).
fn rank(i: usize, j: usize, l: usize) -> usize {
    let d = i + j + l;
    let block = d * (d + 1) * (d + 2) / 6; // indices of degree < d
    let di = d - i;
    block + di * (di + 1) / 2 + (di - j)
}

/// All multi-indices of total degree <= order, in rank order.
pub fn multi_indices(order: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(coeff_count(order));
    for d in 0..=order {
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                out.push((i, j, d - i - j));
            }
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Truncated Taylor expansion of a scalar at a point of R^3.
///
/// `coeffs[rank(i,j,l)]` is the mixed partial d^{i+j+l} f / dx^i dy^j dz^l
/// divided by i! j! l!. Jets are immutable values; every operation returns a
/// fresh jet with the same center and order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: [f64; 3],
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn zero(center: [f64; 3], order: usize) -> Self {
        Jet {
            center,
            order,
            coeffs: vec![0.0; coeff_count(order)],
        }
    }

    pub fn constant(center: [f64; 3], order: usize, value: f64) -> Self {
        let mut jet = Jet::zero(center, order);
        jet.coeffs[0] = value;
        jet
    }

    /// Jet of a coordinate function: value `center[axis]`, unit first-order
    /// coefficient on `axis`, everything else zero.
    pub fn variable(center: [f64; 3], order: usize, axis: Axis) -> Self {
        let mut jet = Jet::zero(center, order);
        jet.coeffs[0] = center[axis.index()];
        if order >= 1 {
            let idx = match axis {
                Axis::X => rank(1, 0, 0),
                Axis::Y => rank(0, 1, 0),
                Axis::Z => rank(0, 0, 1),
            };
            jet.coeffs[idx] = 1.0;
        }
        jet
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest absolute coefficient, used to scale tolerances.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn check_compatible(&self, other: &Jet) -> Result<(), JetError> {
        if self.center != other.center {
            return Err(JetError::CenterMismatch(self.center, other.center));
        }
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    /// Mixed partial derivative i!j!l! * coeff(i,j,l).
    pub fn partial(&self, idx: (usize, usize, usize)) -> Result<f64, JetError> {
        let (i, j, l) = idx;
        if i + j + l > self.order {
            return Err(JetError::OrderExceeded(idx, self.order));
        }
        Ok(self.coeffs[rank(i, j, l)] * factorial(i) * factorial(j) * factorial(l))
    }

    /// First partial along `axis` as a jet of one order less.
    pub fn derivative(&self, axis: Axis) -> Result<Jet, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderExceeded((1, 0, 0), 0));
        }
        let mut out = Jet::zero(self.center, self.order - 1);
        for (r, (i, j, l)) in multi_indices(self.order - 1).into_iter().enumerate() {
            let (src, mult) = match axis {
                Axis::X => (rank(i + 1, j, l), (i + 1) as f64),
                Axis::Y => (rank(i, j + 1, l), (j + 1) as f64),
                Axis::Z => (rank(i, j, l + 1), (l + 1) as f64),
            };
            out.coeffs[r] = mult * self.coeffs[src];
        }
        Ok(out)
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order, "truncate cannot raise the order");
        Jet {
            center: self.center,
            order,
            coeffs: self.coeffs[..coeff_count(order)].to_vec(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c -= o;
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let mut out = Jet::zero(self.center, self.order);
        let indices = multi_indices(self.order);
        for (ra, &(ia, ja, la)) in indices.iter().enumerate() {
            let a = self.coeffs[ra];
            if a == 0.0 {
                continue;
            }
            let da = ia + ja + la;
            for (rb, &(ib, jb, lb)) in indices.iter().enumerate() {
                if da + ib + jb + lb > self.order {
                    continue;
                }
                let b = other.coeffs[rb];
                if b == 0.0 {
                    continue;
                }
                out.coeffs[rank(ia + ib, ja + jb, la + lb)] += a * b;
            }
        }
        Ok(out)
    }

    /// Power-series division. Rejects denominators whose value part is below
    /// 1e-12 scaled by the denominator's coefficient magnitude.
    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let b0 = other.value();
        if b0.abs() < 1e-12 * (1.0 + other.magnitude()) {
            return Err(JetError::DivisionByZeroValue(b0));
        }
        let indices = multi_indices(self.order);
        let mut out = Jet::zero(self.center, self.order);
        // Graded order guarantees every needed quotient coefficient is ready.
        for (rm, &(im, jm, lm)) in indices.iter().enumerate() {
            let mut acc = self.coeffs[rm];
            for (rn, &(inn, jn, ln)) in indices.iter().enumerate() {
                if rn == 0 || inn > im || jn > jm || ln > lm {
                    continue;
                }
                let bn = other.coeffs[rn];
                if bn == 0.0 {
                    continue;
                }
                acc -= bn * out.coeffs[rank(im - inn, jm - jn, lm - ln)];
            }
            out.coeffs[rm] = acc / b0;
        }
        Ok(out)
    }

    /// Integer power; negative exponents go through division.
    pub fn try_powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            let one = Jet::constant(self.center, self.order, 1.0);
            return one.try_div(&self.try_powi(-n)?);
        }
        let mut out = Jet::constant(self.center, self.order, 1.0);
        for _ in 0..n {
            out = out.try_mul(self)?;
        }
        Ok(out)
    }

    /// Composition with a univariate analytic function given by the Taylor
    /// coefficients of f at the jet's value part.
    fn compose(&self, series: &[f64]) -> Jet {
        // Horner evaluation in h = self - value, whose value part vanishes,
        // so all powers truncate exactly.
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Jet::constant(self.center, self.order, series[self.order]);
        for k in (0..self.order).rev() {
            out = out.try_mul(&h).expect("same center/order by construction");
            out.coeffs[0] += series[k];
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order).map(|n| e / factorial(n)).collect();
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let series: Vec<f64> = (0..=self.order)
            .map(|n| match n % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            } / factorial(n))
            .collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let series: Vec<f64> = (0..=self.order)
            .map(|n| match n % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            } / factorial(n))
            .collect();
        self.compose(&series)
    }

    pub fn try_ln(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::DomainError {
                func: "log",
                value: v,
            });
        }
        let mut series = vec![0.0; self.order + 1];
        series[0] = v.ln();
        for n in 1..=self.order {
            // d^n/du^n log u = (-1)^(n+1) (n-1)! / u^n, divided by n!.
            series[n] = if n % 2 == 1 { 1.0 } else { -1.0 } / (n as f64 * v.powi(n as i32));
        }
        Ok(self.compose(&series))
    }

    pub fn try_sqrt(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::DomainError {
                func: "sqrt",
                value: v,
            });
        }
        let mut series = vec![0.0; self.order + 1];
        // Binomial series: coefficient of h^n is C(1/2, n) v^(1/2 - n).
        let mut binom = 1.0;
        for (n, slot) in series.iter_mut().enumerate() {
            *slot = binom * v.powf(0.5 - n as f64);
            binom *= (0.5 - n as f64) / (n as f64 + 1.0);
        }
        Ok(self.compose(&series))
    }
}

macro_rules! impl_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$checked(rhs).expect("jet center/order mismatch")
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
    };
}

impl_op!(Add, add, try_add);
impl_op!(Sub, sub, try_sub);
impl_op!(Mul, mul, try_mul);
impl_op!(Div, div, try_div);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Gaussian elimination with partial pivoting on value parts, carried in jet
/// arithmetic so the solution retains its derivatives.
pub fn solve_linear(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>) -> Result<Vec<Jet>, JetError> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, j| m.max(j.value().abs()));
    for col in 0..n {
        let (pivot, best) = (col..n)
            .map(|r| (r, a[r][col].value().abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty range");
        if best < 1e-12 * (1.0 + scale) {
            return Err(JetError::SingularSystem(best));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].try_div(&a[col][col])?;
            for k in col..n {
                let t = factor.try_mul(&a[col][k])?;
                a[row][k] = a[row][k].try_sub(&t)?;
            }
            let t = factor.try_mul(&b[col])?;
            b[row] = b[row].try_sub(&t)?;
        }
    }
    (0..n).map(|i| b[i].try_div(&a[i][i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p0() -> [f64; 3] {
        [0.0; 3]
    }

    /// Central finite differences of a closure, the independent oracle for
    /// jet-carried partials. First derivatives use step 1e-5; second
    /// derivatives use 1e-4 to stay clear of rounding in the h^2 divisor.
    fn fd_partial(f: &dyn Fn([f64; 3]) -> f64, p: [f64; 3], idx: (usize, usize, usize)) -> f64 {
        let h1 = 1e-5;
        let h2 = 1e-4;
        let shift = |p: [f64; 3], axis: usize, s: f64| {
            let mut q = p;
            q[axis] += s;
            q
        };
        let first = |axis: usize| (f(shift(p, axis, h1)) - f(shift(p, axis, -h1))) / (2.0 * h1);
        let second =
            |axis: usize| (f(shift(p, axis, h2)) - 2.0 * f(p) + f(shift(p, axis, -h2))) / (h2 * h2);
        let mixed = |a: usize, b: usize| {
            (f(shift(shift(p, a, h2), b, h2)) - f(shift(shift(p, a, h2), b, -h2))
                - f(shift(shift(p, a, -h2), b, h2))
                + f(shift(shift(p, a, -h2), b, -h2)))
                / (4.0 * h2 * h2)
        };
        match idx {
            (0, 0, 0) => f(p),
            (1, 0, 0) => first(0),
            (0, 1, 0) => first(1),
            (0, 0, 1) => first(2),
            (2, 0, 0) => second(0),
            (0, 2, 0) => second(1),
            (0, 0, 2) => second(2),
            (1, 1, 0) => mixed(0, 1),
            (1, 0, 1) => mixed(0, 2),
            (0, 1, 1) => mixed(1, 2),
            _ => unimplemented!("stencil not needed"),
        }
    }

    #[test]
    fn rank_enumeration_is_consistent() {
        for order in 0..=5 {
            let idx = multi_indices(order);
            assert_eq!(idx.len(), coeff_count(order));
            for (r, &(i, j, l)) in idx.iter().enumerate() {
                assert_eq!(rank(i, j, l), r);
            }
        }
    }

    #[test]
    fn variable_jets_match_contract() {
        let x = Jet::variable([2.0, 0.0, 0.0], 2, Axis::X);
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.partial((1, 0, 0)).unwrap(), 1.0);
        assert_eq!(x.partial((0, 1, 0)).unwrap(), 0.0);
        assert_eq!(x.partial((2, 0, 0)).unwrap(), 0.0);

        let z = Jet::variable([0.0, 0.0, 5.0], 1, Axis::Z);
        assert_eq!(z.value(), 5.0);
        assert_eq!(z.partial((0, 0, 1)).unwrap(), 1.0);

        let y = Jet::variable([1.0, 1.0, 1.0], 0, Axis::Y);
        assert_eq!(y.value(), 1.0);
        assert_eq!(y.coeffs().len(), 1);
    }

    #[test]
    fn product_rule_on_xy() {
        let c = [2.0, 3.0, 0.0];
        let xy = Jet::variable(c, 2, Axis::X) * Jet::variable(c, 2, Axis::Y);
        assert_eq!(xy.value(), 6.0);
        assert_eq!(xy.partial((1, 0, 0)).unwrap(), 3.0);
        assert_eq!(xy.partial((0, 1, 0)).unwrap(), 2.0);
        assert_eq!(xy.partial((1, 1, 0)).unwrap(), 1.0);
    }

    #[test]
    fn self_division_is_one() {
        let x = Jet::variable([1.0, 0.0, 0.0], 3, Axis::X);
        let one = x.try_div(&x).unwrap();
        assert_relative_eq!(one.value(), 1.0);
        for c in &one.coeffs()[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn division_by_zero_value_is_rejected() {
        let x = Jet::variable([0.0; 3], 2, Axis::X);
        let one = Jet::constant([0.0; 3], 2, 1.0);
        assert!(matches!(
            one.try_div(&x),
            Err(JetError::DivisionByZeroValue(_))
        ));
    }

    #[test]
    fn center_mismatch_is_rejected() {
        let a = Jet::variable([0.0; 3], 2, Axis::X);
        let b = Jet::variable([1.0, 0.0, 0.0], 2, Axis::X);
        assert!(matches!(a.try_add(&b), Err(JetError::CenterMismatch(_, _))));
    }

    #[test]
    fn partials_match_finite_differences() {
        // f = x^2 + y at (1, 1, 0), per the finite-difference oracle.
        let f = |p: [f64; 3]| p[0] * p[0] + p[1];
        let c = [1.0, 1.0, 0.0];
        let jet = Jet::variable(c, 2, Axis::X).try_powi(2).unwrap() + Jet::variable(c, 2, Axis::Y);
        for idx in [(1, 0, 0), (0, 1, 0)] {
            assert_relative_eq!(
                jet.partial(idx).unwrap(),
                fd_partial(&f, c, idx),
                epsilon = 1e-8
            );
        }
        for idx in [(2, 0, 0), (1, 1, 0)] {
            assert_relative_eq!(
                jet.partial(idx).unwrap(),
                fd_partial(&f, c, idx),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn exp_log_functions() {
        let zero = Jet::constant([0.0; 3], 3, 0.0);
        let one = zero.exp();
        assert_eq!(one.value(), 1.0);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));

        let x = Jet::variable([0.7, 0.0, 0.0], 3, Axis::X);
        let back = x.exp().try_ln().unwrap();
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }

        assert!(matches!(
            Jet::constant([0.0; 3], 2, -1.0).try_ln(),
            Err(JetError::DomainError { .. })
        ));
        assert!(matches!(
            Jet::constant([0.0; 3], 2, -1.0).try_sqrt(),
            Err(JetError::DomainError { .. })
        ));
    }

    #[test]
    fn z_cubed_second_partial() {
        let z = Jet::variable([0.0, 0.0, 2.0], 3, Axis::Z);
        let z3 = z.try_powi(3).unwrap();
        assert_relative_eq!(z3.partial((0, 0, 2)).unwrap(), 12.0, epsilon = 1e-12);
        assert!(matches!(
            z3.partial((0, 0, 4)),
            Err(JetError::OrderExceeded(_, _))
        ));
    }

    #[test]
    fn sqrt_squares_back() {
        let c = [0.3, -0.2, 0.1];
        let f = Jet::constant(c, 3, 2.0) + Jet::variable(c, 3, Axis::X);
        let r = f.try_sqrt().unwrap();
        let sq = r.try_mul(&r).unwrap();
        for (a, b) in sq.coeffs().iter().zip(f.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_linear_small_system() {
        // Constant 2x2 system with jet-valued right-hand side.
        let c = [0.0; 3];
        let k = 2;
        let j = |v: f64| Jet::constant(c, k, v);
        let x = Jet::variable(c, k, Axis::X);
        let a = vec![vec![j(2.0), j(1.0)], vec![j(1.0), j(3.0)]];
        let b = vec![x.clone(), j(1.0)];
        let sol = solve_linear(a, b).unwrap();
        // 2u + v = x, u + 3v = 1 => u = (3x - 1)/5, v = (2 - x)/5.
        let expect_u = (x.scale(3.0) - j(1.0)).scale(0.2);
        let expect_v = (j(2.0) - x).scale(0.2);
        for (got, want) in [(&sol[0], &expect_u), (&sol[1], &expect_v)] {
            for (a, b) in got.coeffs().iter().zip(want.coeffs()) {
                assert_relative_eq!(a, b, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn solve_linear_singular_is_reported() {
        let c = [0.0; 3];
        let j = |v: f64| Jet::constant(c, 1, v);
        let a = vec![vec![j(1.0), j(2.0)], vec![j(2.0), j(4.0)]];
        let b = vec![j(1.0), j(2.0)];
        assert!(matches!(
            solve_linear(a, b),
            Err(JetError::SingularSystem(_))
        ));
    }

    proptest! {
        #[test]
        fn sin_cos_pythagorean(coeffs in proptest::collection::vec(-1.0f64..1.0, 20)) {
            let mut jet = Jet::zero(p0(), 3);
            for (slot, c) in jet.coeffs.iter_mut().zip(&coeffs) {
                *slot = *c;
            }
            let s = jet.sin();
            let c = jet.cos();
            let unit = s.try_mul(&s).unwrap() + c.try_mul(&c).unwrap();
            prop_assert!((unit.value() - 1.0).abs() < 1e-12);
            for c in &unit.coeffs()[1..] {
                prop_assert!(c.abs() < 1e-12);
            }
        }

        #[test]
        fn arithmetic_ring_laws(a in proptest::collection::vec(-1.0f64..1.0, 20),
                                b in proptest::collection::vec(-1.0f64..1.0, 20),
                                c in proptest::collection::vec(-1.0f64..1.0, 20)) {
            let mk = |v: &[f64]| {
                let mut j = Jet::zero(p0(), 3);
                j.coeffs.copy_from_slice(v);
                j
            };
            let (a, b, c) = (mk(&a), mk(&b), mk(&c));
            let ab = a.try_mul(&b).unwrap();
            let ba = b.try_mul(&a).unwrap();
            let assoc_l = ab.try_mul(&c).unwrap();
            let assoc_r = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
            let dist_l = a.try_mul(&b.try_add(&c).unwrap()).unwrap();
            let dist_r = a.try_mul(&b).unwrap().try_add(&a.try_mul(&c).unwrap()).unwrap();
            for (x, y) in [(&ab, &ba), (&assoc_l, &assoc_r), (&dist_l, &dist_r)] {
                for (u, v) in x.coeffs().iter().zip(y.coeffs()) {
                    prop_assert!((u - v).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn division_inverts_multiplication(a in proptest::collection::vec(-1.0f64..1.0, 20),
                                           b in proptest::collection::vec(-1.0f64..1.0, 20)) {
            let mk = |v: &[f64], shift: f64| {
                let mut j = Jet::zero(p0(), 3);
                j.coeffs.copy_from_slice(v);
                j.coeffs[0] += shift;
                j
            };
            let a = mk(&a, 0.0);
            let b = mk(&b, 3.0); // keep the value part away from zero
            let q = a.try_mul(&b).unwrap().try_div(&b).unwrap();
            for (u, v) in q.coeffs().iter().zip(a.coeffs()) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_polynomial_partials_match_analytic() {
        // Degree-3 polynomial with fixed pseudo-random coefficients; partials
        // from the jet must match the analytically differentiated polynomial.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let monos = multi_indices(3);
        let coeffs: Vec<f64> = (0..monos.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eval = |p: [f64; 3]| -> f64 {
            monos
                .iter()
                .zip(&coeffs)
                .map(|(&(i, j, l), c)| c * p[0].powi(i as i32) * p[1].powi(j as i32) * p[2].powi(l as i32))
                .sum()
        };
        let center = [0.3, -0.7, 0.4];
        let x = Jet::variable(center, 3, Axis::X);
        let y = Jet::variable(center, 3, Axis::Y);
        let z = Jet::variable(center, 3, Axis::Z);
        let mut jet = Jet::zero(center, 3);
        for (&(i, j, l), c) in monos.iter().zip(&coeffs) {
            let term = x.try_powi(i as i32).unwrap()
                * y.try_powi(j as i32).unwrap()
                * z.try_powi(l as i32).unwrap();
            jet = jet + term.scale(*c);
        }
        assert_relative_eq!(jet.value(), eval(center), epsilon = 1e-12);
        // Analytic partial of the monomial basis.
        let analytic = |(pi, pj, pl): (usize, usize, usize)| -> f64 {
            monos
                .iter()
                .zip(&coeffs)
                .filter(|(&(i, j, l), _)| i >= pi && j >= pj && l >= pl)
                .map(|(&(i, j, l), c)| {
                    let fall = |n: usize, k: usize| {
                        (n - k + 1..=n).map(|v| v as f64).product::<f64>()
                    };
                    c * fall(i, pi) * fall(j, pj) * fall(l, pl)
                        * center[0].powi((i - pi) as i32)
                        * center[1].powi((j - pj) as i32)
                        * center[2].powi((l - pl) as i32)
                })
                .sum()
        };
        for idx in multi_indices(3) {
            let got = jet.partial(idx).unwrap();
            let want = analytic(idx);
            assert!(
                (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
                "partial {idx:?}: {got} vs {want}"
            );
        }
    }
}
