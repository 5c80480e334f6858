//! Rank-1 Poisson modules presented in a global trivialization.
//!
//! With a trivializing section `e`, the module bracket is determined by the
//! datum `alpha` with `{a, e} = alpha(a) e`. `alpha` is a derivation over `k`
//! with `alpha(t) = 1`, taking functions at order `N` to order `N-1`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::derivation::Derivation;
use crate::error::{AlgebraError, Result};
use crate::poisson::PoissonStructure;
use crate::poly::render_terms;
use crate::rat::Rat;
use crate::report::Report;
use crate::tpoly::TPoly;

pub const DEFAULT_DEGREE_BOUND: i64 = 16;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LineData {
    base: PoissonStructure,
    low: PoissonStructure,
    alpha: Derivation,
    degree_bound: i64,
}

impl LineData {
    /// `alpha_values[i] = alpha(x_i)` at order `N-1`, where `N` is the order
    /// of `base` (at least 1).
    pub fn new(base: PoissonStructure, alpha_values: Vec<TPoly>) -> Result<Self> {
        let n = base.order();
        if n == 0 {
            return Err(AlgebraError::Precondition(
                "a line datum needs base order at least 1".into(),
            ));
        }
        let k = base.nvars();
        if alpha_values.len() != k {
            return Err(AlgebraError::ArityMismatch {
                left: k,
                right: alpha_values.len(),
            });
        }
        let alpha = Derivation::new(alpha_values, TPoly::one(k, n - 1))?;
        let low = base.truncate(n - 1)?;
        Ok(LineData {
            base,
            low,
            alpha,
            degree_bound: DEFAULT_DEGREE_BOUND,
        })
    }

    /// The datum `alpha = 0`, i.e. `{a, e} = 0` for `t`-free `a`.
    pub fn trivial(base: PoissonStructure) -> Result<Self> {
        let n = base.order();
        let k = base.nvars();
        Self::new(base, vec![TPoly::zero(k, n.saturating_sub(1)); k])
    }

    pub fn with_degree_bound(mut self, bound: i64) -> Self {
        self.degree_bound = bound;
        self
    }

    pub fn degree_bound(&self) -> i64 {
        self.degree_bound
    }

    pub fn base(&self) -> &PoissonStructure {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn nvars(&self) -> usize {
        self.base.nvars()
    }

    pub fn gens(&self) -> &[String] {
        self.base.gens()
    }

    pub fn alpha(&self) -> &Derivation {
        &self.alpha
    }

    /// `alpha(f)` for `f` at order `N`, result at order `N-1`.
    pub fn alpha_of(&self, f: &TPoly) -> Result<TPoly> {
        self.alpha.apply(f)
    }

    /// `H_a(b(alpha)) - H_b(alpha(a)) - alpha({a,b})` at order `N-1`.
    pub fn cocycle_defect(&self, a: &TPoly, b: &TPoly) -> Result<TPoly> {
        let n1 = self.order() - 1;
        let ab = self.base.bracket(a, b)?;
        let first = self.low.bracket(&a.truncate(n1)?, &self.alpha_of(b)?)?;
        let second = self.low.bracket(&b.truncate(n1)?, &self.alpha_of(a)?)?;
        Ok(&(&first - &second) - &self.alpha_of(&ab)?)
    }

    /// The module Jacobi identity on generator pairs.
    pub fn verify_cocycle(&self) -> Report {
        let mut report = Report::pass("cocycle");
        let k = self.nvars();
        let gens = self.gens();
        for i in 0..k {
            for j in (i + 1)..k {
                let d = self
                    .cocycle_defect(&self.base.var(i), &self.base.var(j))
                    .expect("generators share the datum's shape");
                if !d.is_zero() {
                    report.fail([gens[i].clone(), gens[j].clone()], d.render(gens));
                }
            }
        }
        report.note("pairs with t hold structurally: H_t = 0 and alpha(t) = 1");
        report
    }

    /// Coefficient of `e` in `{a, m e}`: `H_a(m) + m alpha(a)`.
    ///
    /// `a` lives at order `N`, the section `m` at order `N-1`.
    pub fn module_bracket(&self, a: &TPoly, m: &TPoly) -> Result<TPoly> {
        let n1 = self.order() - 1;
        if m.order() != n1 {
            return Err(AlgebraError::OrderMismatch {
                left: n1,
                right: m.order(),
            });
        }
        let h = self.low.bracket(&a.truncate(n1)?, m)?;
        Ok(&h + &(m * &self.alpha_of(a)?))
    }

    /// Datum relative to the new trivialization `u e`:
    /// `alpha'(a) = alpha(a) + u^-1 H_a(u)`.
    pub fn change_trivialization(&self, u: &TPoly) -> Result<LineData> {
        let n1 = self.order() - 1;
        if u.order() != n1 {
            return Err(AlgebraError::OrderMismatch {
                left: n1,
                right: u.order(),
            });
        }
        let inv = u.invert_unit()?;
        let values = (0..self.nvars())
            .map(|i| {
                let h = self.low.bracket(&self.low.var(i), u)?;
                Ok(self.alpha.value(i) + &(&inv * &h))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LineData::new(self.base.clone(), values)?.with_degree_bound(self.degree_bound))
    }

    fn check_degree(&self, p: i64) -> Result<()> {
        if p.abs() > self.degree_bound {
            return Err(AlgebraError::DegreeBound {
                degree: p,
                bound: self.degree_bound,
            });
        }
        Ok(())
    }

    /// Poisson bracket on the total space, extended bilinearly from
    /// `{f s^n, g s^m} = ({f,g} + m g alpha(f) - n f alpha(g)) s^(n+m)`.
    ///
    /// Inputs may carry any precision up to `N`. Each `alpha` term costs one
    /// order of precision of its argument, so the result is exact at the
    /// largest order all contributing terms reach.
    pub fn tot_bracket(&self, u: &TotElement, v: &TotElement) -> Result<TotElement> {
        let k = self.nvars();
        for w in [u, v] {
            if w.nvars != k {
                return Err(AlgebraError::ArityMismatch {
                    left: k,
                    right: w.nvars,
                });
            }
            if w.order > self.order() {
                return Err(AlgebraError::OrderMismatch {
                    left: self.order(),
                    right: w.order,
                });
            }
            for &p in w.terms.keys() {
                self.check_degree(p)?;
            }
        }
        // alpha(f) costs one order of f's precision; it is needed when the
        // partner has a term of nonzero degree.
        let (uo, vo) = (u.order, v.order);
        let mut out_order = Some(uo.min(vo));
        if !v.is_degree_zero() && !u.is_zero() {
            out_order = out_order.zip(uo.checked_sub(1)).map(|(a, b)| a.min(b));
        }
        if !u.is_degree_zero() && !v.is_zero() {
            out_order = out_order.zip(vo.checked_sub(1)).map(|(a, b)| a.min(b));
        }
        let out_order = out_order.ok_or(AlgebraError::PrecisionExhausted)?;
        let structure = self.base.truncate(out_order)?;
        let alpha = if out_order < self.order() {
            Some(self.alpha.truncate(out_order)?)
        } else {
            None
        };
        let mut out = TotElement::zero(k, out_order);
        for (&n, f) in &u.terms {
            let f_out = f.truncate(out_order)?;
            for (&m, g) in &v.terms {
                self.check_degree(n + m)?;
                let g_out = g.truncate(out_order)?;
                let mut c = structure.bracket(&f_out, &g_out)?;
                let alpha = alpha.as_ref();
                if m != 0 {
                    let alpha = alpha.ok_or(AlgebraError::PrecisionExhausted)?;
                    let af = alpha.apply(&f.truncate(out_order + 1)?)?;
                    c = &c + &(&g_out * &af).scale(&Rat::from_integer(m.into()));
                }
                if n != 0 {
                    let alpha = alpha.ok_or(AlgebraError::PrecisionExhausted)?;
                    let ag = alpha.apply(&g.truncate(out_order + 1)?)?;
                    c = &c - &(&f_out * &ag).scale(&Rat::from_integer(n.into()));
                }
                out.add_term(n + m, c);
            }
        }
        Ok(out)
    }

    /// `{u,{v,w}} + {v,{w,u}} + {w,{u,v}}` at the precision all three
    /// nested brackets reach.
    pub fn tot_jacobiator(
        &self,
        u: &TotElement,
        v: &TotElement,
        w: &TotElement,
    ) -> Result<TotElement> {
        let a = self.tot_bracket(u, &self.tot_bracket(v, w)?)?;
        let b = self.tot_bracket(v, &self.tot_bracket(w, u)?)?;
        let c = self.tot_bracket(w, &self.tot_bracket(u, v)?)?;
        let order = a.order.min(b.order).min(c.order);
        a.truncate(order)?
            .checked_add(&b.truncate(order)?)?
            .checked_add(&c.truncate(order)?)
    }

    /// The Tot coordinates used by [`LineData::verify_tot_jacobi`]:
    /// `x_i`, `s`, `s^-1` and `t`, each at order `N`.
    pub fn tot_probes(&self) -> Vec<(String, TotElement)> {
        let k = self.nvars();
        let n = self.order();
        let mut probes: Vec<(String, TotElement)> = (0..k)
            .map(|i| (self.gens()[i].clone(), TotElement::homogeneous(self.base.var(i), 0)))
            .collect();
        probes.push(("s".into(), TotElement::s_power(k, n, 1)));
        probes.push(("s^-1".into(), TotElement::s_power(k, n, -1)));
        probes.push(("t".into(), TotElement::homogeneous(TPoly::t(k, n), 0)));
        probes
    }

    /// Jacobi identity of the Tot bracket on all triples of distinct probes.
    /// Triples whose nested brackets exceed the available precision are
    /// skipped and noted.
    pub fn verify_tot_jacobi(&self) -> Report {
        let mut report = Report::pass("tot-jacobi");
        let probes = self.tot_probes();
        let mut skipped = 0usize;
        for i in 0..probes.len() {
            for j in (i + 1)..probes.len() {
                for l in (j + 1)..probes.len() {
                    match self.tot_jacobiator(&probes[i].1, &probes[j].1, &probes[l].1) {
                        Ok(r) if r.is_zero() => {}
                        Ok(r) => report.fail(
                            [&probes[i].0, &probes[j].0, &probes[l].0].map(|s| s.clone()),
                            r.render(self.gens()),
                        ),
                        Err(AlgebraError::PrecisionExhausted) => skipped += 1,
                        Err(e) => report.fail(
                            [&probes[i].0, &probes[j].0, &probes[l].0].map(|s| s.clone()),
                            format!("error: {e}"),
                        ),
                    }
                }
            }
        }
        if skipped > 0 {
            report.note(format!("{skipped} triple(s) beyond available t-adic precision"));
        }
        report
    }
}

/// A finite Laurent sum `sum_p f_p s^p` with coefficients at a common order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TotElement {
    nvars: usize,
    order: usize,
    terms: BTreeMap<i64, TPoly>,
}

impl TotElement {
    pub fn zero(nvars: usize, order: usize) -> Self {
        TotElement {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// `f s^p`.
    pub fn homogeneous(f: TPoly, p: i64) -> Self {
        let mut out = TotElement::zero(f.nvars(), f.order());
        out.add_term(p, f);
        out
    }

    pub fn s_power(nvars: usize, order: usize, p: i64) -> Self {
        Self::homogeneous(TPoly::one(nvars, order), p)
    }

    pub fn from_terms(nvars: usize, order: usize, terms: impl IntoIterator<Item = (i64, TPoly)>) -> Result<Self> {
        let mut out = TotElement::zero(nvars, order);
        for (p, f) in terms {
            if f.nvars() != nvars {
                return Err(AlgebraError::ArityMismatch {
                    left: nvars,
                    right: f.nvars(),
                });
            }
            if f.order() != order {
                return Err(AlgebraError::OrderMismatch {
                    left: order,
                    right: f.order(),
                });
            }
            out.add_term(p, f);
        }
        Ok(out)
    }

    fn add_term(&mut self, p: i64, f: TPoly) {
        debug_assert_eq!(f.order(), self.order);
        let sum = match self.terms.remove(&p) {
            Some(prev) => &prev + &f,
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(p, sum);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_degree_zero(&self) -> bool {
        self.terms.keys().all(|&p| p == 0)
    }

    /// Nonzero coefficients by ascending degree.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &TPoly)> {
        self.terms.iter().map(|(&p, f)| (p, f))
    }

    pub fn coefficient(&self, p: i64) -> TPoly {
        self.terms
            .get(&p)
            .cloned()
            .unwrap_or_else(|| TPoly::zero(self.nvars, self.order))
    }

    pub fn truncate(&self, order: usize) -> Result<TotElement> {
        let mut out = TotElement::zero(self.nvars, order);
        for (&p, f) in &self.terms {
            out.add_term(p, f.truncate(order)?);
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &TotElement) -> Result<TotElement> {
        if self.order != other.order {
            return Err(AlgebraError::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        let mut out = self.clone();
        for (&p, f) in &other.terms {
            out.add_term(p, f.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &TotElement) -> Result<TotElement> {
        self.checked_add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> TotElement {
        let mut out = TotElement::zero(self.nvars, self.order);
        if !c.is_zero() {
            for (&p, f) in &self.terms {
                out.add_term(p, f.scale(c));
            }
        }
        out
    }

    /// Product in the Laurent algebra.
    pub fn checked_mul(&self, other: &TotElement) -> Result<TotElement> {
        if self.order != other.order {
            return Err(AlgebraError::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        let mut out = TotElement::zero(self.nvars, self.order);
        for (&p, f) in &self.terms {
            for (&q, g) in &other.terms {
                out.add_term(p + q, f.checked_mul(g)?);
            }
        }
        Ok(out)
    }

    /// Applies `f s^p -> f u^p s^p` for a unit `u`, canonically lifted to
    /// this element's order. This rewrites an element given relative to the
    /// section `u s` in terms of `s`.
    pub fn rescale(&self, u: &TPoly) -> Result<TotElement> {
        let u = u.with_order(self.order);
        let inv = u.invert_unit()?;
        let mut out = TotElement::zero(self.nvars, self.order);
        for (&p, f) in &self.terms {
            let factor = if p >= 0 {
                u.pow(p as u32)
            } else {
                inv.pow(p.unsigned_abs() as u32)
            };
            out.add_term(p, f.checked_mul(&factor)?);
        }
        Ok(out)
    }

    /// Canonical rendering: descending `s`-degree, then the coefficient's
    /// own term order; each term reads `coef*t^k*x^a*s^p`.
    pub fn render<S: AsRef<str>>(&self, names: &[S]) -> String {
        let mut rows: Vec<(Rat, Vec<(String, u32)>)> = Vec::new();
        for (&p, f) in self.terms.iter().rev() {
            for (k, c) in f.coeffs().iter().enumerate() {
                for (m, coef) in c.terms() {
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
                    match p {
                        0 => {}
                        p if p > 0 => factors.push(("s".to_string(), p as u32)),
                        p => factors.push((format!("s^{p}"), 1)),
                    }
                    rows.push((coef.clone(), factors));
                }
            }
        }
        render_terms(rows.into_iter())
    }
}
