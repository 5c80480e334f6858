// Independent reference implementations used as test oracles, plus proptest
// strategies. Nothing here calls into the crate's arithmetic except to
// convert values in and out.
#![allow(dead_code)]

use std::collections::HashMap;

use momentkit::{Monomial, Poly, Rat, TPoly};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Polynomial in `k` generators plus `t` (last exponent), truncated above
/// `t^order`.
#[derive(Clone, Debug)]
pub struct Naive {
    pub k: usize,
    pub order: usize,
    pub terms: HashMap<Vec<u32>, Rat>,
}

impl Naive {
    pub fn zero(k: usize, order: usize) -> Self {
        Naive { k, order, terms: HashMap::new() }
    }

    pub fn constant(k: usize, order: usize, c: Rat) -> Self {
        let mut n = Naive::zero(k, order);
        n.add_term(vec![0; k + 1], c);
        n
    }

    pub fn var(k: usize, order: usize, i: usize) -> Self {
        let mut e = vec![0; k + 1];
        e[i] = 1;
        let mut n = Naive::zero(k, order);
        n.add_term(e, Rat::one());
        n
    }

    pub fn t(k: usize, order: usize) -> Self {
        Naive::var(k, order, k)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if e[self.k] as usize > self.order || c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn from_tpoly(p: &TPoly) -> Self {
        let k = p.nvars();
        let mut n = Naive::zero(k, p.order());
        for (j, c) in p.coeffs().iter().enumerate() {
            for (m, v) in c.terms() {
                let mut e = m.exponents().to_vec();
                e.push(j as u32);
                n.add_term(e, v.clone());
            }
        }
        n
    }

    pub fn to_tpoly(&self) -> TPoly {
        let mut coeffs: Vec<Vec<(Monomial, Rat)>> = vec![Vec::new(); self.order + 1];
        for (e, c) in &self.terms {
            coeffs[e[self.k] as usize].push((Monomial::from_exponents(e[..self.k].to_vec()), c.clone()));
        }
        let polys = coeffs.into_iter().map(|ts| Poly::from_terms(self.k, ts)).collect();
        TPoly::from_coeffs(self.k, self.order, polys).unwrap()
    }

    pub fn add(&self, o: &Naive) -> Naive {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Naive {
        let mut out = Naive::zero(self.k, self.order);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, o: &Naive) -> Naive {
        self.add(&o.scale(&-Rat::one()))
    }

    pub fn mul(&self, o: &Naive) -> Naive {
        let mut out = Naive::zero(self.k, self.order.min(o.order));
        for (a, c) in &self.terms {
            for (b, d) in &o.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, c * d);
            }
        }
        out
    }

    /// Derivative in exponent slot `i` (`i == k` is `d/dt`, which drops
    /// one order).
    pub fn partial(&self, i: usize) -> Naive {
        let order = if i == self.k { self.order.saturating_sub(1) } else { self.order };
        let mut out = Naive::zero(self.k, order);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * Rat::from_integer(e[i].into()));
            }
        }
        out
    }

    pub fn truncate(&self, order: usize) -> Naive {
        let mut out = Naive::zero(self.k, order);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn pow(&self, e: u32) -> Naive {
        let mut out = Naive::constant(self.k, self.order, Rat::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes `x_i -> vals[i]` monomial by monomial.
    pub fn substitute(&self, vals: &[Naive]) -> Naive {
        let order = vals.iter().map(|v| v.order).min().unwrap_or(self.order).min(self.order);
        let mut out = Naive::zero(self.k, order);
        for (e, c) in &self.terms {
            let mut term = Naive::constant(self.k, order, c.clone());
            for (i, &p) in e[..self.k].iter().enumerate() {
                term = term.mul(&vals[i].pow(p));
            }
            term = term.mul(&Naive::t(self.k, order).pow(e[self.k]));
            out = out.add(&term);
        }
        out
    }
}

/// `{f,g} = sum_ij d_i f d_j g P_ij`, expanding every ordered pair.
pub fn bracket_oracle(table: &[Vec<Naive>], f: &Naive, g: &Naive) -> Naive {
    let k = f.k;
    let mut out = Naive::zero(k, f.order.min(g.order));
    for (i, row) in table.iter().enumerate().take(k) {
        for (j, p) in row.iter().enumerate().take(k) {
            out = out.add(&f.partial(i).mul(&g.partial(j)).mul(p));
        }
    }
    out
}

pub fn table_oracle(s: &momentkit::PoissonStructure) -> Vec<Vec<Naive>> {
    let k = s.nvars();
    (0..k)
        .map(|i| (0..k).map(|j| Naive::from_tpoly(s.entry(i, j))).collect())
        .collect()
}

/// `D(f) = sum_i d_i f values[i] + d_t f t_value`.
pub fn derivation_oracle(values: &[Naive], t_value: &Naive, f: &Naive) -> Naive {
    let order = t_value.order;
    let mut out = Naive::zero(f.k, order);
    for (i, v) in values.iter().enumerate() {
        out = out.add(&f.partial(i).truncate(order).mul(v));
    }
    out.add(&f.partial(f.k).truncate(order).mul(t_value))
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    if n == 0 {
        return Rat::one();
    }
    let mut total = Rat::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rat>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][c] * det(&minor);
        if c % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Rank of an antisymmetric matrix: the largest size of a nonsingular
/// principal submatrix.
pub fn antisymmetric_rank(m: &[Vec<Rat>]) -> usize {
    let n = m.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() <= best {
            continue;
        }
        let sub: Vec<Vec<Rat>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
        if !det(&sub).is_zero() {
            best = idx.len();
        }
    }
    best
}

pub fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| Rat::new(n.into(), d.into()))
}

pub fn poly_strategy(k: usize, max_deg: u32) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, k), rat_strategy()), 0..4).prop_map(
        move |terms| {
            Poly::from_terms(
                k,
                terms.into_iter().filter(|(e, _)| e.iter().sum::<u32>() <= max_deg).map(|(e, c)| (Monomial::from_exponents(e), c)),
            )
        },
    )
}

pub fn tpoly_strategy(k: usize, order: usize, max_deg: u32) -> impl Strategy<Value = TPoly> {
    prop::collection::vec(poly_strategy(k, max_deg), order + 1)
        .prop_map(move |cs| TPoly::from_coeffs(k, order, cs).unwrap())
}

/// Units `c + O(t)` with `c` a nonzero constant.
pub fn unit_strategy(k: usize, order: usize, max_deg: u32) -> impl Strategy<Value = TPoly> {
    (rat_strategy().prop_filter("nonzero", |c| !c.is_zero()), tpoly_strategy(k, order, max_deg)).prop_map(
        move |(c, p)| {
            let mut coeffs = p.coeffs().to_vec();
            coeffs[0] = Poly::constant(k, c);
            TPoly::from_coeffs(k, order, coeffs).unwrap()
        },
    )
}

pub fn names(k: usize) -> Vec<String> {
    ["x", "y", "z"][..k].iter().map(|s| s.to_string()).collect()
}
