//! Poisson brackets on `A[t]/t^(N+1)` given by a table on generators.
//!
//! Only generator brackets are stored; `t` never occupies a bracket slot, so
//! it is Poisson-central by construction.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::derivation::Derivation;
use crate::error::{AlgebraError, Result};
use crate::linalg;
use crate::rat::Rat;
use crate::report::Report;
use crate::tpoly::TPoly;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PoissonStructure {
    gens: Arc<[String]>,
    order: usize,
    table: Vec<Vec<TPoly>>,
}

impl PoissonStructure {
    /// The zero bracket.
    pub fn zero(gens: &[&str], order: usize) -> Self {
        let gens: Arc<[String]> = gens.iter().map(|g| g.to_string()).collect();
        Self::zero_with(gens, order)
    }

    pub(crate) fn zero_with(gens: Arc<[String]>, order: usize) -> Self {
        let k = gens.len();
        PoissonStructure {
            table: vec![vec![TPoly::zero(k, order); k]; k],
            gens,
            order,
        }
    }

    /// Builds the table from brackets `{x_i, x_j}`; the antisymmetric mate is
    /// derived. Each unordered pair may appear at most once.
    pub fn new(
        gens: &[&str],
        order: usize,
        entries: impl IntoIterator<Item = (usize, usize, TPoly)>,
    ) -> Result<Self> {
        let gens: Arc<[String]> = gens.iter().map(|g| g.to_string()).collect();
        Self::with_entries(gens, order, entries)
    }

    pub(crate) fn with_entries(
        gens: Arc<[String]>,
        order: usize,
        entries: impl IntoIterator<Item = (usize, usize, TPoly)>,
    ) -> Result<Self> {
        let k = gens.len();
        let mut s = Self::zero_with(gens, order);
        let mut seen = vec![vec![false; k]; k];
        for (i, j, v) in entries {
            if i >= k || j >= k {
                return Err(AlgebraError::Precondition(format!(
                    "bracket index ({i}, {j}) out of range"
                )));
            }
            if v.nvars() != k {
                return Err(AlgebraError::ArityMismatch {
                    left: k,
                    right: v.nvars(),
                });
            }
            if v.order() != order {
                return Err(AlgebraError::OrderMismatch {
                    left: order,
                    right: v.order(),
                });
            }
            if i == j {
                if v.is_zero() {
                    continue;
                }
                return Err(AlgebraError::Precondition(format!(
                    "bracket {{{0},{0}}} must vanish",
                    s.gens[i]
                )));
            }
            if seen[i][j] {
                return Err(AlgebraError::Precondition(format!(
                    "bracket {{{},{}}} declared twice",
                    s.gens[i], s.gens[j]
                )));
            }
            seen[i][j] = true;
            seen[j][i] = true;
            s.table[j][i] = -&v;
            s.table[i][j] = v;
        }
        Ok(s)
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub(crate) fn gens_arc(&self) -> Arc<[String]> {
        self.gens.clone()
    }

    pub fn nvars(&self) -> usize {
        self.gens.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `{x_i, x_j}`.
    pub fn entry(&self, i: usize, j: usize) -> &TPoly {
        &self.table[i][j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    pub fn var(&self, i: usize) -> TPoly {
        TPoly::var(self.nvars(), self.order, i)
    }

    /// Reduction modulo `t^(order+1)`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        self.map_entries(order, |e| e.truncate(order))
    }

    /// Canonical (`t`-independent beyond the stored coefficients) lift.
    pub fn lift(&self, order: usize) -> Result<Self> {
        self.map_entries(order, |e| e.lift(order))
    }

    fn map_entries(&self, order: usize, f: impl Fn(&TPoly) -> Result<TPoly>) -> Result<Self> {
        let table = self
            .table
            .iter()
            .map(|row| row.iter().map(&f).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(PoissonStructure {
            gens: self.gens.clone(),
            order,
            table,
        })
    }

    fn check(&self, f: &TPoly) -> Result<()> {
        if f.nvars() != self.nvars() {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars(),
                right: f.nvars(),
            });
        }
        if f.order() != self.order {
            return Err(AlgebraError::OrderMismatch {
                left: self.order,
                right: f.order(),
            });
        }
        Ok(())
    }

    /// Biderivation extension of the table:
    /// `{f,g} = sum_{i<j} B_ij (f_i g_j - f_j g_i)`.
    pub fn bracket(&self, f: &TPoly, g: &TPoly) -> Result<TPoly> {
        self.check(f)?;
        self.check(g)?;
        let k = self.nvars();
        let df: Vec<TPoly> = (0..k).map(|i| f.partial(i)).collect();
        let dg: Vec<TPoly> = (0..k).map(|i| g.partial(i)).collect();
        let mut out = TPoly::zero(k, self.order);
        for i in 0..k {
            for j in (i + 1)..k {
                let b = &self.table[i][j];
                if b.is_zero() {
                    continue;
                }
                let cross = &(&df[i] * &dg[j]) - &(&df[j] * &dg[i]);
                if !cross.is_zero() {
                    out = &out + &(b * &cross);
                }
            }
        }
        Ok(out)
    }

    /// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`.
    pub fn jacobiator(&self, f: &TPoly, g: &TPoly, h: &TPoly) -> Result<TPoly> {
        let a = self.bracket(f, &self.bracket(g, h)?)?;
        let b = self.bracket(g, &self.bracket(h, f)?)?;
        let c = self.bracket(h, &self.bracket(f, g)?)?;
        Ok(&(&a + &b) + &c)
    }

    /// Jacobi identity on all generator triples `i < j < l`.
    pub fn verify_jacobi(&self) -> Report {
        let mut report = Report::pass("jacobi");
        let k = self.nvars();
        for i in 0..k {
            for j in (i + 1)..k {
                for l in (j + 1)..k {
                    let r = self
                        .jacobiator(&self.var(i), &self.var(j), &self.var(l))
                        .expect("generators share the structure's shape");
                    if !r.is_zero() {
                        report.fail(
                            [&self.gens[i], &self.gens[j], &self.gens[l]].map(|s| s.clone()),
                            r.render(&self.gens),
                        );
                    }
                }
            }
        }
        report
    }

    /// `H_f = {f, -}` as a `k[t]`-linear derivation.
    pub fn hamiltonian_field(&self, f: &TPoly) -> Result<Derivation> {
        let values = (0..self.nvars())
            .map(|i| self.bracket(f, &self.var(i)))
            .collect::<Result<Vec<_>>>()?;
        Derivation::new(values, TPoly::zero(self.nvars(), self.order))
    }

    /// Whether `f` brackets to zero with every generator (and hence with
    /// everything).
    pub fn is_central(&self, f: &TPoly) -> Result<bool> {
        for i in 0..self.nvars() {
            if !self.bracket(f, &self.var(i))?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `xi{f,g} - {xi f, g} - {f, xi g} - lambda {f,g}`.
    pub fn conformal_defect(
        &self,
        field: &ConformalField,
        f: &TPoly,
        g: &TPoly,
    ) -> Result<TPoly> {
        let xi = &field.xi;
        let fg = self.bracket(f, g)?;
        let lhs = xi.apply(&fg)?;
        let a = self.bracket(&xi.apply(f)?, g)?;
        let b = self.bracket(f, &xi.apply(g)?)?;
        Ok(&(&(&lhs - &a) - &b) - &fg.scale(&field.lambda))
    }

    /// Conformality of weight `lambda` on all generator pairs.
    pub fn verify_conformal(&self, field: &ConformalField) -> Result<Report> {
        self.check_field(field)?;
        let mut report = Report::pass("conformal");
        let k = self.nvars();
        for i in 0..k {
            for j in (i + 1)..k {
                let d = self.conformal_defect(field, &self.var(i), &self.var(j))?;
                if !d.is_zero() {
                    report.fail([self.gens[i].clone(), self.gens[j].clone()], d.render(&self.gens));
                }
            }
        }
        Ok(report)
    }

    fn check_field(&self, field: &ConformalField) -> Result<()> {
        if field.xi.nvars() != self.nvars() {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars(),
                right: field.xi.nvars(),
            });
        }
        if field.xi.order() != self.order {
            return Err(AlgebraError::OrderMismatch {
                left: self.order,
                right: field.xi.order(),
            });
        }
        Ok(())
    }

    /// Solves for the weight of `xi` using the first generator pair whose
    /// bracket is a nonzero constant; `None` if no such pair exists or the
    /// solved weight does not make `xi` conformal.
    pub fn solve_conformal_weight(&self, xi: &Derivation) -> Option<Rat> {
        let k = self.nvars();
        let probe = ConformalField {
            xi: xi.clone(),
            lambda: Rat::zero(),
        };
        for i in 0..k {
            for j in (i + 1)..k {
                let b = &self.table[i][j];
                let Some(c) = constant_value(b).filter(|c| !c.is_zero()) else {
                    continue;
                };
                let numer = self
                    .conformal_defect(&probe, &self.var(i), &self.var(j))
                    .ok()?;
                let lambda = constant_value(&numer)? / c;
                let field = ConformalField {
                    xi: xi.clone(),
                    lambda: lambda.clone(),
                };
                return self
                    .verify_conformal(&field)
                    .ok()
                    .filter(|r| r.passed)
                    .map(|_| lambda);
            }
        }
        None
    }

    /// Generator values and `t` from a point, in generator order.
    pub fn coordinates(&self, pt: &Point) -> Result<(Vec<Rat>, Rat)> {
        let values = self
            .gens
            .iter()
            .map(|g| {
                pt.get(g)
                    .cloned()
                    .ok_or_else(|| AlgebraError::MissingGenerator(g.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((values, pt.get("t").cloned().unwrap_or_else(Rat::zero)))
    }

    /// The bracket matrix `{x_i, x_j}` evaluated at `pt`.
    pub fn matrix_at(&self, pt: &Point) -> Result<Vec<Vec<Rat>>> {
        let (values, t) = self.coordinates(pt)?;
        self.table
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&values, &t)).collect())
            .collect()
    }

    /// Rank of the Poisson bivector at `pt` (`t` defaults to 0).
    pub fn bivector_rank(&self, pt: &Point) -> Result<usize> {
        let m = self.matrix_at(pt)?;
        debug_assert!(linalg::is_antisymmetric(&m));
        Ok(linalg::rank(&m))
    }
}

fn constant_value(p: &TPoly) -> Option<Rat> {
    if p.t_degree().unwrap_or(0) > 0 {
        return None;
    }
    p.coeff(0).as_constant()
}

/// A derivation together with a claimed conformal weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConformalField {
    pub xi: Derivation,
    pub lambda: Rat,
}

/// A rational point: values for generators and optionally `s` and `t`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Point {
    values: BTreeMap<String, Rat>,
}

impl Point {
    pub fn new<S: Into<String>>(values: impl IntoIterator<Item = (S, Rat)>) -> Self {
        Point {
            values: values.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Rat> {
        self.values.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rat)> {
        self.values.iter()
    }
}
