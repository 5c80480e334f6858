//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{AlgebraError, Result};
use crate::rat::Rat;

/// Exponent vector over the ambient generator list.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of the earliest generator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `nvars` commuting generators over the rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Self::monomial(c, Monomial::one(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "generator index {i} out of range");
        Self::monomial(Rat::one(), Monomial::var(nvars, i))
    }

    pub fn monomial(c: Rat, m: Monomial) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), nvars, "exponent vector arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coefficient(&Monomial::one(self.nvars))
    }

    /// Returns the value if this polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_arity(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_arity(other)?;
        let mut out = Poly::zero(self.nvars);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
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

    /// Partial derivative with respect to generator `i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, c * Rat::from_integer(e.into()));
        }
        out
    }

    pub fn eval(&self, values: &[Rat]) -> Result<Rat> {
        if values.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars,
                right: values.len(),
            });
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, &e) in values.iter().zip(&m.0) {
                if e > 0 {
                    term *= num_traits::pow(v.clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Reinterprets the polynomial over a larger generator list by appending
    /// `extra` unused generators.
    pub fn extend_vars(&self, extra: usize) -> Poly {
        Poly {
            nvars: self.nvars + extra,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e.extend(std::iter::repeat_n(0, extra));
                    (Monomial(e), c.clone())
                })
                .collect(),
        }
    }

    /// Splits off the last generator: returns `c_k` with
    /// `self = sum_k c_k * v^k` where `v` is the last generator.
    pub fn split_last(&self) -> Vec<Poly> {
        assert!(self.nvars > 0);
        let inner = self.nvars - 1;
        let mut out: Vec<Poly> = Vec::new();
        for (m, c) in &self.terms {
            let k = m.0[inner] as usize;
            while out.len() <= k {
                out.push(Poly::zero(inner));
            }
            out[k].add_term(Monomial(m.0[..inner].to_vec()), c.clone());
        }
        out
    }

    /// Canonical rendering against the given generator names.
    pub fn render<S: AsRef<str>>(&self, names: &[S]) -> String {
        render_terms(self.terms().map(|(m, c)| {
            let factors = names
                .iter()
                .zip(m.exponents())
                .filter(|(_, &e)| e > 0)
                .map(|(n, &e)| (n.as_ref().to_string(), e))
                .collect();
            (c.clone(), factors)
        }))
    }
}

/// Joins `coefficient * factor^e * ...` terms with `+`/`-` separators.
pub(crate) fn render_terms(terms: impl Iterator<Item = (Rat, Vec<(String, u32)>)>) -> String {
    let mut out = String::new();
    for (c, factors) in terms {
        let negative = c.is_negative();
        let magnitude = c.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mut parts: Vec<String> = Vec::new();
        if factors.is_empty() || !magnitude.is_one() {
            parts.push(magnitude.to_string());
        }
        for (name, e) in factors {
            if e == 1 {
                parts.push(name);
            } else {
                let mut s = name;
                let _ = write!(s, "^{e}");
                parts.push(s);
            }
        }
        out.push_str(&parts.join("*"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial arity mismatch")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("polynomial arity mismatch")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("polynomial arity mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rat::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn xy() -> (Poly, Poly) {
        (Poly::var(2, 0), Poly::var(2, 1))
    }

    #[test]
    fn difference_of_squares() {
        let (x, y) = xy();
        let p = &(&x + &y) * &(&x - &y);
        assert_eq!(p.render(&["x", "y"]), "x^2 - y^2");
    }

    #[test]
    fn rational_coefficients() {
        let (x, _) = xy();
        let p = &x.scale(&ratio(1, 2)) + &x.scale(&ratio(1, 3));
        assert_eq!(p, x.scale(&ratio(5, 6)));
        assert_eq!(p.render(&["x", "y"]), "5/6*x");
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = Poly::var(2, 0);
        let b = Poly::var(3, 0);
        assert_eq!(
            a.checked_add(&b),
            Err(AlgebraError::ArityMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn graded_lex_rendering() {
        let (x, y) = xy();
        let p = &(&(&x * &y) + &y.pow(3)) - &Poly::constant(2, rat(7));
        assert_eq!(p.render(&["x", "y"]), "y^3 + x*y - 7");
        assert_eq!(Poly::zero(2).render(&["x", "y"]), "0");
        let q = (&x * &y).scale(&ratio(-1, 2));
        assert_eq!(q.render(&["x", "y"]), "-1/2*x*y");
    }

    #[test]
    fn partials_and_eval() {
        let (x, y) = xy();
        let p = &x.pow(2) * &y;
        assert_eq!(p.partial(0), (&x * &y).scale(&rat(2)));
        assert_eq!(p.eval(&[rat(3), rat(2)]).unwrap(), rat(18));
    }

    #[test]
    fn split_last_generator() {
        let p = Poly::from_terms(
            2,
            [
                (Monomial::from_exponents(vec![1, 0]), rat(1)),
                (Monomial::from_exponents(vec![2, 1]), rat(3)),
            ],
        );
        let parts = p.split_last();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0], Poly::var(1, 0));
        assert_eq!(parts[1], Poly::var(1, 0).pow(2).scale(&rat(3)));
    }
}
