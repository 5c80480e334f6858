//! Derivations of `A[t]/t^(N+1)` determined by their values on generators.

use crate::error::{AlgebraError, Result};
use crate::tpoly::TPoly;

/// A derivation `D(f) = sum_i (df/dx_i) D(x_i) + (df/dt) D(t)`.
///
/// Values live at the target order. A derivation over `k[t]` has
/// `D(t) = 0`; the module datum of a line bundle has `D(t) = 1`, which is why
/// it maps order `N` inputs to order `N-1` outputs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    values: Vec<TPoly>,
    t_value: TPoly,
}

impl Derivation {
    pub fn new(values: Vec<TPoly>, t_value: TPoly) -> Result<Self> {
        for v in &values {
            if v.nvars() != t_value.nvars() {
                return Err(AlgebraError::ArityMismatch {
                    left: t_value.nvars(),
                    right: v.nvars(),
                });
            }
            if v.order() != t_value.order() {
                return Err(AlgebraError::OrderMismatch {
                    left: t_value.order(),
                    right: v.order(),
                });
            }
        }
        if values.len() != t_value.nvars() {
            return Err(AlgebraError::ArityMismatch {
                left: t_value.nvars(),
                right: values.len(),
            });
        }
        Ok(Derivation { values, t_value })
    }

    /// A `k[t]`-linear derivation.
    pub fn over_t(values: Vec<TPoly>) -> Result<Self> {
        let first = values.first().ok_or_else(|| {
            AlgebraError::Precondition("derivation needs at least one generator".into())
        })?;
        let zero = TPoly::zero(first.nvars(), first.order());
        Self::new(values, zero)
    }

    pub fn zero(nvars: usize, order: usize) -> Self {
        Derivation {
            values: vec![TPoly::zero(nvars, order); nvars],
            t_value: TPoly::zero(nvars, order),
        }
    }

    pub fn nvars(&self) -> usize {
        self.t_value.nvars()
    }

    pub fn order(&self) -> usize {
        self.t_value.order()
    }

    pub fn values(&self) -> &[TPoly] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &TPoly {
        &self.values[i]
    }

    pub fn t_value(&self) -> &TPoly {
        &self.t_value
    }

    /// Smallest input order for which `apply` is exact at the target order.
    pub fn required_input_order(&self) -> usize {
        let order = self.order();
        let generators = self
            .values
            .iter()
            .filter_map(TPoly::valuation)
            .min()
            .map_or(0, |w| order.saturating_sub(w));
        let t = self
            .t_value
            .valuation()
            .map_or(0, |v| (order + 1).saturating_sub(v));
        generators.max(t)
    }

    pub fn apply(&self, f: &TPoly) -> Result<TPoly> {
        if f.nvars() != self.nvars() {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars(),
                right: f.nvars(),
            });
        }
        let needed = self.required_input_order();
        if f.order() < needed {
            return Err(AlgebraError::InsufficientOrder {
                needed,
                got: f.order(),
            });
        }
        let order = self.order();
        let base = f.truncate(order.min(f.order()))?.with_order(order);
        let mut out = TPoly::zero(self.nvars(), order);
        for (i, v) in self.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let d = base.partial(i);
            if !d.is_zero() {
                out = &out + &(&d * v);
            }
        }
        if !self.t_value.is_zero() && f.order() > 0 {
            let dt = f.t_derivative()?.with_order(order);
            out = &out + &(&dt * &self.t_value);
        }
        Ok(out)
    }

    /// The same derivation read modulo `t^(order+1)`.
    pub fn truncate(&self, order: usize) -> Result<Derivation> {
        let values = self
            .values
            .iter()
            .map(|v| v.truncate(order))
            .collect::<Result<Vec<_>>>()?;
        Derivation::new(values, self.t_value.truncate(order)?)
    }

    /// Pointwise sum of two derivations with identical shape.
    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Derivation::new(values, self.t_value.checked_add(&other.t_value)?)
    }
}
