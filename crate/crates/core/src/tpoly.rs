//! Elements of `A[t]/t^(N+1)` where `A` is a polynomial ring over the
//! rationals.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{AlgebraError, Result};
use crate::poly::{render_terms, Poly};
use crate::rat::Rat;

/// Truncated polynomial `c_0 + c_1 t + ... + c_N t^N` with `Poly` coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TPoly {
    coeffs: Vec<Poly>,
}

impl TPoly {
    pub fn zero(nvars: usize, order: usize) -> Self {
        TPoly {
            coeffs: vec![Poly::zero(nvars); order + 1],
        }
    }

    pub fn from_poly(p: Poly, order: usize) -> Self {
        let mut out = TPoly::zero(p.nvars(), order);
        out.coeffs[0] = p;
        out
    }

    pub fn constant(nvars: usize, order: usize, c: Rat) -> Self {
        Self::from_poly(Poly::constant(nvars, c), order)
    }

    pub fn one(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, order, Rat::one())
    }

    pub fn var(nvars: usize, order: usize, i: usize) -> Self {
        Self::from_poly(Poly::var(nvars, i), order)
    }

    /// `t^k * p`, zero when `k` exceeds the order.
    pub fn t_term(p: Poly, k: usize, order: usize) -> Self {
        let mut out = TPoly::zero(p.nvars(), order);
        if k <= order {
            out.coeffs[k] = p;
        }
        out
    }

    /// The element `t`, zero at order 0.
    pub fn t(nvars: usize, order: usize) -> Self {
        Self::t_term(Poly::one(nvars), 1, order)
    }

    /// Builds from explicit coefficients; missing slots are zero and slots
    /// above `order` must be zero.
    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<Poly>) -> Result<Self> {
        let mut out = TPoly::zero(nvars, order);
        for (k, c) in coeffs.into_iter().enumerate() {
            if c.nvars() != nvars {
                return Err(AlgebraError::ArityMismatch {
                    left: nvars,
                    right: c.nvars(),
                });
            }
            if k > order {
                if !c.is_zero() {
                    return Err(AlgebraError::OrderMismatch {
                        left: order,
                        right: k,
                    });
                }
                continue;
            }
            out.coeffs[k] = c;
        }
        Ok(out)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.coeffs[0].nvars()
    }

    pub fn coeff(&self, k: usize) -> &Poly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    /// Exponent of the lowest nonzero power of `t`.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Highest power of `t` with a nonzero coefficient.
    pub fn t_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    fn check(&self, other: &TPoly) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars(),
                right: other.nvars(),
            });
        }
        if self.order() != other.order() {
            return Err(AlgebraError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &TPoly) -> Result<TPoly> {
        self.check(other)?;
        Ok(TPoly {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &TPoly) -> Result<TPoly> {
        self.check(other)?;
        Ok(TPoly {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Product truncated above `t^N`.
    pub fn checked_mul(&self, other: &TPoly) -> Result<TPoly> {
        self.check(other)?;
        let order = self.order();
        let mut out = TPoly::zero(self.nvars(), order);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] = &out.coeffs[i + j] + &(a * b);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> TPoly {
        TPoly {
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Multiplies every coefficient by a `t`-free polynomial.
    pub fn mul_poly(&self, p: &Poly) -> TPoly {
        TPoly {
            coeffs: self.coeffs.iter().map(|c| c * p).collect(),
        }
    }

    /// Multiplication by `t^k`, truncated.
    pub fn shift(&self, k: usize) -> TPoly {
        let order = self.order();
        let mut out = TPoly::zero(self.nvars(), order);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i + k <= order {
                out.coeffs[i + k] = c.clone();
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> TPoly {
        let mut base = self.clone();
        let mut acc = TPoly::one(self.nvars(), self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Reduction modulo `t^(order+1)`; `order` may not exceed the current one.
    pub fn truncate(&self, order: usize) -> Result<TPoly> {
        if order > self.order() {
            return Err(AlgebraError::OrderMismatch {
                left: self.order(),
                right: order,
            });
        }
        Ok(TPoly {
            coeffs: self.coeffs[..=order].to_vec(),
        })
    }

    /// Canonical lift to a higher order: new coefficients are zero.
    pub fn lift(&self, order: usize) -> Result<TPoly> {
        if order < self.order() {
            return Err(AlgebraError::OrderMismatch {
                left: self.order(),
                right: order,
            });
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Poly::zero(self.nvars()));
        Ok(TPoly { coeffs })
    }

    /// Reduction or canonical lift, whichever reaches `order`.
    pub fn with_order(&self, order: usize) -> TPoly {
        if order <= self.order() {
            self.truncate(order).unwrap()
        } else {
            self.lift(order).unwrap()
        }
    }

    /// Coefficientwise partial derivative in generator `i`.
    pub fn partial(&self, i: usize) -> TPoly {
        TPoly {
            coeffs: self.coeffs.iter().map(|c| c.partial(i)).collect(),
        }
    }

    /// `d/dt`, exact at one order lower.
    pub fn t_derivative(&self) -> Result<TPoly> {
        if self.order() == 0 {
            return Err(AlgebraError::PrecisionExhausted);
        }
        Ok(TPoly {
            coeffs: self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c.scale(&Rat::from_integer((k + 1).into())))
                .collect(),
        })
    }

    pub fn eval(&self, values: &[Rat], t: &Rat) -> Result<Rat> {
        let mut acc = Rat::zero();
        let mut tp = Rat::one();
        for c in &self.coeffs {
            acc += c.eval(values)? * &tp;
            tp *= t;
        }
        Ok(acc)
    }

    /// Inverse of a unit `c (1 + t q)` with `c` a nonzero rational.
    pub fn invert_unit(&self) -> Result<TPoly> {
        let c0 = self.coeffs[0]
            .as_constant()
            .filter(|c| !c.is_zero())
            .ok_or_else(|| {
                AlgebraError::NotAUnit(
                    "constant term must be a nonzero rational".to_string(),
                )
            })?;
        let inv0 = c0.recip();
        let nvars = self.nvars();
        let order = self.order();
        let mut inv: Vec<Poly> = Vec::with_capacity(order + 1);
        inv.push(Poly::constant(nvars, inv0.clone()));
        for k in 1..=order {
            let mut acc = Poly::zero(nvars);
            for j in 1..=k {
                if self.coeffs[j].is_zero() || inv[k - j].is_zero() {
                    continue;
                }
                acc = &acc + &(&self.coeffs[j] * &inv[k - j]);
            }
            inv.push(acc.scale(&-inv0.clone()));
        }
        Ok(TPoly { coeffs: inv })
    }

    /// Simultaneous substitution `x_i -> assignment[i]`, `t -> t`.
    ///
    /// All assignment values share one arity and this element's order.
    pub fn substitute(&self, assignment: &[TPoly]) -> Result<TPoly> {
        if assignment.len() < self.nvars() {
            return Err(AlgebraError::MissingGenerator(format!(
                "#{}",
                assignment.len()
            )));
        }
        let order = self.order();
        let target = match assignment.first() {
            Some(a) => a.nvars(),
            None => 0,
        };
        for a in assignment {
            if a.nvars() != target {
                return Err(AlgebraError::ArityMismatch {
                    left: target,
                    right: a.nvars(),
                });
            }
            if a.order() != order {
                return Err(AlgebraError::OrderMismatch {
                    left: order,
                    right: a.order(),
                });
            }
        }
        let n = self.nvars();
        let mut powers: Vec<Vec<TPoly>> = Vec::with_capacity(n);
        for (i, a) in assignment.iter().enumerate().take(n) {
            let top = self.coeffs.iter().map(|c| c.degree_in(i)).max().unwrap_or(0);
            let mut ps = vec![TPoly::one(target, order)];
            for e in 1..=top as usize {
                let next = &ps[e - 1] * a;
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = TPoly::zero(target, order);
        for (k, c) in self.coeffs.iter().enumerate() {
            for (m, coef) in c.terms() {
                let mut term = TPoly::t_term(Poly::constant(target, coef.clone()), k, order);
                for (i, &e) in m.exponents().iter().enumerate() {
                    if e > 0 {
                        term = &term * &powers[i][e as usize];
                    }
                }
                out = &out + &term;
            }
        }
        Ok(out)
    }

    /// Canonical rendering; `t` factors precede generator factors and terms
    /// are sorted by ascending `t`-power, then descending monomial order.
    pub fn render<S: AsRef<str>>(&self, names: &[S]) -> String {
        render_terms(self.coeffs.iter().enumerate().flat_map(|(k, c)| {
            c.terms()
                .map(move |(m, coef)| {
                    let mut factors = Vec::new();
                    if k > 0 {
                        factors.push(("t".to_string(), k as u32));
                    }
                    factors.extend(
                        names
                            .iter()
                            .zip(m.exponents())
                            .filter(|(_, &e)| e > 0)
                            .map(|(n, &e)| (n.as_ref().to_string(), e)),
                    );
                    (coef.clone(), factors)
                })
                .collect::<Vec<_>>()
        }))
    }
}

impl Add for &TPoly {
    type Output = TPoly;
    fn add(self, rhs: &TPoly) -> TPoly {
        self.checked_add(rhs).expect("truncated polynomial mismatch")
    }
}

impl Sub for &TPoly {
    type Output = TPoly;
    fn sub(self, rhs: &TPoly) -> TPoly {
        self.checked_sub(rhs).expect("truncated polynomial mismatch")
    }
}

impl Mul for &TPoly {
    type Output = TPoly;
    fn mul(self, rhs: &TPoly) -> TPoly {
        self.checked_mul(rhs).expect("truncated polynomial mismatch")
    }
}

impl Neg for &TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        self.scale(&-Rat::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    const XY: [&str; 2] = ["x", "y"];

    fn x(order: usize) -> TPoly {
        TPoly::var(2, order, 0)
    }

    fn y(order: usize) -> TPoly {
        TPoly::var(2, order, 1)
    }

    #[test]
    fn truncation_kills_t_squared() {
        let tx = &TPoly::t(2, 1) * &x(1);
        let one = TPoly::one(2, 1);
        let p = &(&one + &tx) * &(&one - &tx);
        assert_eq!(p, one);
    }

    #[test]
    fn order_mismatch_is_an_error() {
        assert_eq!(
            x(1).checked_add(&x(2)),
            Err(AlgebraError::OrderMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn substitute_shear() {
        let f = &x(1) * &y(1);
        let t = TPoly::t(2, 1);
        let g = f.substitute(&[x(1), &y(1) - &(&t * &x(1))]).unwrap();
        assert_eq!(g.render(&XY), "x*y - t*x^2");
    }

    #[test]
    fn substitute_translation() {
        let f = x(1).pow(2);
        let g = f.substitute(&[&x(1) + &TPoly::t(2, 1), y(1)]).unwrap();
        assert_eq!(g.render(&XY), "x^2 + 2*t*x");
    }

    #[test]
    fn substitute_constant_and_missing() {
        let c = TPoly::constant(2, 1, ratio(3, 4));
        assert_eq!(c.substitute(&[y(1), x(1)]).unwrap(), c);
        assert!(matches!(
            c.substitute(&[y(1)]),
            Err(AlgebraError::MissingGenerator(_))
        ));
    }

    #[test]
    fn geometric_series_inverse() {
        let p = &x(2) + &y(2);
        let u = &TPoly::one(2, 2) + &(&TPoly::t(2, 2) * &p);
        let inv = u.invert_unit().unwrap();
        let expected = &(&TPoly::one(2, 2) - &(&TPoly::t(2, 2) * &p))
            + &(&TPoly::t(2, 2).pow(2) * &p.pow(2));
        assert_eq!(inv, expected);
        assert_eq!(&u * &inv, TPoly::one(2, 2));
    }

    #[test]
    fn constant_inverse() {
        let u = TPoly::constant(2, 3, rat(2));
        assert_eq!(u.invert_unit().unwrap(), TPoly::constant(2, 3, ratio(1, 2)));
    }

    #[test]
    fn non_constant_leading_term_is_rejected() {
        assert!(matches!(x(2).invert_unit(), Err(AlgebraError::NotAUnit(_))));
        assert!(matches!(
            TPoly::t(2, 2).invert_unit(),
            Err(AlgebraError::NotAUnit(_))
        ));
    }

    #[test]
    fn t_derivative_drops_order() {
        let f = &TPoly::t(2, 2).pow(2) * &x(2);
        let d = f.t_derivative().unwrap();
        assert_eq!(d.order(), 1);
        assert_eq!(d.render(&XY), "2*t*x");
    }

    #[test]
    fn render_orders_by_t_power() {
        let t = TPoly::t(2, 2);
        let p = &(&y(2) - &(&t * &x(2))) + &(&t.pow(2) * &x(2).pow(2)).scale(&ratio(1, 2));
        assert_eq!(p.render(&XY), "y - t*x + 1/2*t^2*x^2");
    }
}
