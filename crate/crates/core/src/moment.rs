//! Order-`n` moment systems: a Poisson deformation over `k[t]/t^(n+1)` with
//! `t` central, together with a rank-1 Poisson module on the order `n-1`
//! restriction on which `H_t` acts as the identity.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::derivation::Derivation;
use crate::error::{AlgebraError, Result};
use crate::line::{LineData, TotElement};
use crate::linalg;
use crate::poisson::{ConformalField, Point, PoissonStructure};
use crate::rat::Rat;
use crate::report::Report;
use crate::tpoly::TPoly;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MomentSystem {
    line: LineData,
}

/// An automorphism `x_i -> phi_i` (identity modulo `t`, fixing `t`) combined
/// with the rescaling `e -> u e` of the trivialization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaugeTwist {
    pub phi: Vec<TPoly>,
    pub unit: TPoly,
}

impl GaugeTwist {
    pub fn identity(nvars: usize, n: usize) -> Self {
        GaugeTwist {
            phi: (0..nvars).map(|i| TPoly::var(nvars, n, i)).collect(),
            unit: TPoly::one(nvars, n - 1),
        }
    }
}

/// Canonical lifts `x_i'` with `{x_i', e} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivializationResult {
    pub gens: Vec<String>,
    pub lifts: Vec<TPoly>,
    pub alpha_vanishes: bool,
    pub poisson_compatible: bool,
    pub report: Report,
}

impl TrivializationResult {
    pub fn verified(&self) -> bool {
        self.alpha_vanishes && self.poisson_compatible
    }

    pub fn rendered_lifts(&self) -> Vec<(String, String)> {
        self.gens
            .iter()
            .zip(&self.lifts)
            .map(|(g, l)| (g.clone(), l.render(&self.gens)))
            .collect()
    }
}

/// Whether `t` acts on the module by a constant multiple of `e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ModuleWeight {
    /// Every constant works.
    Free,
    Constant(String),
    /// No constant solves the module compatibility; a non-constant weight
    /// would be needed.
    NonConstant,
}

#[derive(Clone, Debug)]
pub struct ConformalExtension {
    pub lambda: Rat,
    pub mu: Option<Rat>,
    pub module_weight: Option<ModuleWeight>,
    /// `t-independent` or `transported`.
    pub strategy: &'static str,
    pub field: Option<Derivation>,
    pub report: Report,
}

/// Inverse of the substitution `x_i -> phi_i` where `phi_i = x_i mod t`:
/// returns `psi` with `psi_i(phi) = x_i`.
pub fn invert_substitution(phi: &[TPoly]) -> Result<Vec<TPoly>> {
    let k = phi.len();
    let Some(first) = phi.first() else {
        return Ok(Vec::new());
    };
    let order = first.order();
    for (i, p) in phi.iter().enumerate() {
        if p.nvars() != k || p.order() != order {
            return Err(AlgebraError::NotInvertible(
                "substitution values must share arity and order".into(),
            ));
        }
        if p.coeff(0) != TPoly::var(k, order, i).coeff(0) {
            return Err(AlgebraError::NotInvertible(format!(
                "value for generator #{i} is not the identity modulo t"
            )));
        }
    }
    let ident: Vec<TPoly> = (0..k).map(|i| TPoly::var(k, order, i)).collect();
    // psi = x - (psi(phi) - psi); each pass fixes one more power of t.
    let mut psi = ident.clone();
    for _ in 0..=order {
        psi = psi
            .iter()
            .zip(&ident)
            .map(|(p, x)| {
                let drift = &p.substitute(phi)? - p;
                Ok(x - &drift)
            })
            .collect::<Result<Vec<_>>>()?;
    }
    for (p, x) in psi.iter().zip(&ident) {
        if &p.substitute(phi)? != x {
            return Err(AlgebraError::Internal("substitution inverse did not converge".into()));
        }
    }
    Ok(psi)
}

impl MomentSystem {
    pub fn new(line: LineData) -> Self {
        MomentSystem { line }
    }

    /// `X x S_n` with the structure sheaf of `X_{n-1}` as the line bundle.
    pub fn make_trivial(base: &PoissonStructure, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(AlgebraError::Precondition("moment systems need order n >= 1".into()));
        }
        if base.order() != 0 {
            return Err(AlgebraError::Precondition(
                "the base structure must be given at order 0".into(),
            ));
        }
        let jacobi = base.verify_jacobi();
        if !jacobi.passed {
            return Err(AlgebraError::Precondition(format!(
                "base bracket fails the Jacobi identity:\n{}",
                jacobi.to_text()
            )));
        }
        Ok(MomentSystem {
            line: LineData::trivial(base.lift(n)?)?,
        })
    }

    pub fn with_degree_bound(self, bound: i64) -> Self {
        MomentSystem {
            line: self.line.with_degree_bound(bound),
        }
    }

    pub fn n(&self) -> usize {
        self.line.order()
    }

    pub fn line(&self) -> &LineData {
        &self.line
    }

    pub fn structure(&self) -> &PoissonStructure {
        self.line.base()
    }

    pub fn gens(&self) -> &[String] {
        self.line.gens()
    }

    pub fn nvars(&self) -> usize {
        self.line.nvars()
    }

    /// Both conditions on a moment system plus the Poisson axioms.
    pub fn verify_system(&self) -> Report {
        let mut alpha_t = Report::pass("alpha-t");
        alpha_t.note("alpha(t) = 1 (H_t is the identity on the line bundle)");
        if !self.line.alpha().t_value().checked_sub(&TPoly::one(self.nvars(), self.n() - 1)).map(|d| d.is_zero()).unwrap_or(false) {
            alpha_t.fail(["t"], self.line.alpha().t_value().render(self.gens()));
        }
        let mut central = Report::pass("t-central");
        central.note("t never occupies a bracket slot (H_t = 0 on functions)");
        Report::aggregate(
            "system",
            vec![
                self.structure().verify_jacobi(),
                self.line.verify_cocycle(),
                alpha_t,
                central,
            ],
        )
    }

    /// Transports the system along `phi` and then rescales the
    /// trivialization by `u`.
    pub fn twist(&self, g: &GaugeTwist) -> Result<MomentSystem> {
        let k = self.nvars();
        let n = self.n();
        if g.phi.len() != k {
            return Err(AlgebraError::ArityMismatch {
                left: k,
                right: g.phi.len(),
            });
        }
        let psi = invert_substitution(&g.phi)?;
        let psi_low = psi
            .iter()
            .map(|p| p.truncate(n - 1))
            .collect::<Result<Vec<_>>>()?;
        let s = self.structure();
        let mut entries = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                let b = s.bracket(&g.phi[i], &g.phi[j])?;
                entries.push((i, j, b.substitute(&psi)?));
            }
        }
        let twisted = PoissonStructure::with_entries(s.gens_arc(), n, entries)?;
        let alpha = g
            .phi
            .iter()
            .map(|p| self.line.alpha_of(p)?.substitute(&psi_low))
            .collect::<Result<Vec<_>>>()?;
        let transported = LineData::new(twisted, alpha)?.with_degree_bound(self.line.degree_bound());
        Ok(MomentSystem {
            line: transported.change_trivialization(&g.unit)?,
        })
    }

    /// Computes the lifts `x_i' = x_i mod t` with vanishing module bracket.
    ///
    /// For `k = 1..=n`, the residual `alpha(x_i')` vanishes below `t^(k-1)`;
    /// if its `t^(k-1)` coefficient is `r`, subtracting `t^k r / k` clears it
    /// because `alpha(t^k r) = k t^(k-1) r + O(t^k)`.
    pub fn trivialize(&self) -> Result<TrivializationResult> {
        let verdict = self.verify_system();
        if !verdict.passed {
            return Err(AlgebraError::Precondition(format!(
                "system fails verification:\n{}",
                verdict.to_text()
            )));
        }
        let k = self.nvars();
        let n = self.n();
        let s = self.structure();
        let mut lifts: Vec<TPoly> = (0..k).map(|i| s.var(i)).collect();
        for step in 1..=n {
            for lift in lifts.iter_mut() {
                let r = self.line.alpha_of(lift)?;
                if let Some(v) = r.valuation() {
                    if v < step - 1 {
                        return Err(AlgebraError::Internal(format!(
                            "residual of order {v} survived sweep {step}"
                        )));
                    }
                    let c = r.coeff(step - 1).scale(&Rat::new(1.into(), (step as i64).into()));
                    *lift = &*lift - &TPoly::t_term(c, step, n);
                }
            }
        }

        let gens = self.gens().to_vec();
        let mut alpha_report = Report::pass("lift-alpha");
        for (i, lift) in lifts.iter().enumerate() {
            let r = self.line.alpha_of(lift)?;
            if !r.is_zero() {
                alpha_report.fail([gens[i].clone()], r.render(&gens));
            }
        }
        let classical = s.truncate(0)?.lift(n)?;
        let mut poisson_report = Report::pass("lift-poisson");
        for i in 0..k {
            for j in (i + 1)..k {
                let lhs = s.bracket(&lifts[i], &lifts[j])?;
                let rhs = classical.entry(i, j).substitute(&lifts)?;
                let d = &lhs - &rhs;
                if !d.is_zero() {
                    poisson_report.fail([gens[i].clone(), gens[j].clone()], d.render(&gens));
                }
            }
        }
        let alpha_vanishes = alpha_report.passed;
        let poisson_compatible = poisson_report.passed;
        if alpha_vanishes && !poisson_compatible {
            return Err(AlgebraError::Internal(format!(
                "canonical lifts are not Poisson on a verified system:\n{}",
                poisson_report.to_text()
            )));
        }
        Ok(TrivializationResult {
            gens,
            lifts,
            alpha_vanishes,
            poisson_compatible,
            report: Report::aggregate("trivialize", vec![alpha_report, poisson_report]),
        })
    }

    /// `{t, w} = p w` for `w = x_i s^p` and `w = s^p`, `p` in `degrees`.
    pub fn verify_gm_hamiltonian(&self, degrees: impl IntoIterator<Item = i64>) -> Report {
        let mut report = Report::pass("gm-hamiltonian");
        let k = self.nvars();
        let n = self.n();
        let gens = self.gens();
        let t = TotElement::homogeneous(TPoly::t(k, n), 0);
        for p in degrees {
            let mut probes: Vec<(String, TotElement)> = (0..k)
                .map(|i| (gens[i].clone(), TotElement::homogeneous(self.structure().var(i), p)))
                .collect();
            probes.push(("1".into(), TotElement::s_power(k, n, p)));
            for (name, w) in probes {
                let label = if p == 0 { name.clone() } else { format!("{name}*s^{p}") };
                match self.line.tot_bracket(&t, &w) {
                    Ok(lhs) => {
                        let rhs = w
                            .truncate(lhs.order())
                            .expect("result order never exceeds input order")
                            .scale(&Rat::from_integer(p.into()));
                        let d = lhs.checked_sub(&rhs).expect("orders agree");
                        if !d.is_zero() {
                            report.fail(["t".to_string(), label], d.render(gens));
                        }
                    }
                    Err(e) => report.fail(["t".to_string(), label], format!("error: {e}")),
                }
            }
        }
        report
    }

    /// Bracket matrix on the coordinates `(x_1..x_k, s, t)` at `pt`.
    pub fn tot_matrix(&self, pt: &Point) -> Result<Vec<Vec<Rat>>> {
        let s_val = pt
            .get("s")
            .cloned()
            .ok_or_else(|| AlgebraError::MissingGenerator("s".into()))?;
        if s_val.is_zero() {
            return Err(AlgebraError::Precondition("s must be nonzero on the total space".into()));
        }
        let k = self.nvars();
        let (values, t) = self.structure().coordinates(pt)?;
        let mut m = self.structure().matrix_at(pt)?;
        for (i, row) in m.iter_mut().enumerate() {
            let a = self.line.alpha().value(i).eval(&values, &t)?;
            row.push(a * &s_val);
            row.push(Rat::zero());
        }
        let mut s_row: Vec<Rat> = (0..k).map(|i| -m[i][k].clone()).collect();
        s_row.push(Rat::zero());
        s_row.push(-s_val.clone());
        let mut t_row = vec![Rat::zero(); k];
        t_row.push(s_val);
        t_row.push(Rat::zero());
        m.push(s_row);
        m.push(t_row);
        Ok(m)
    }

    pub fn tot_rank(&self, pt: &Point) -> Result<usize> {
        let m = self.tot_matrix(pt)?;
        debug_assert!(linalg::is_antisymmetric(&m));
        Ok(linalg::rank(&m))
    }

    /// Extends a conformal field of the order-0 structure to the system,
    /// solving for `mu` in `xi(t) = mu t`, and checks conformality of weight
    /// `lambda` on all pairs of Tot coordinates `{x_i, s, t}`.
    ///
    /// The module action is `xi(e) = h e` with `h` constant. Generators are
    /// first extended `t`-independently; if that fails, the field is
    /// transported from the trivial model through the canonical lifts.
    pub fn extend_conformal(&self, xi: &Derivation, lambda: &Rat) -> Result<ConformalExtension> {
        let k = self.nvars();
        let n = self.n();
        if xi.nvars() != k {
            return Err(AlgebraError::ArityMismatch {
                left: k,
                right: xi.nvars(),
            });
        }
        if xi.order() != 0 {
            return Err(AlgebraError::Precondition(
                "the conformal field must be given on the order-0 structure".into(),
            ));
        }
        let system = self.verify_system();
        if !system.passed {
            return Err(AlgebraError::Precondition(format!(
                "system fails verification:\n{}",
                system.to_text()
            )));
        }
        let classical = self.structure().truncate(0)?;
        let base_report = classical.verify_conformal(&ConformalField {
            xi: xi.clone(),
            lambda: lambda.clone(),
        })?;
        if !base_report.passed {
            return Ok(ConformalExtension {
                lambda: lambda.clone(),
                mu: None,
                module_weight: None,
                strategy: "t-independent",
                field: None,
                report: Report::aggregate("conformal-extension", vec![base_report]),
            });
        }

        let lifted: Vec<TPoly> = xi.values().iter().map(|v| v.with_order(n)).collect();
        let plain = |mu: &Rat| -> Result<Derivation> {
            Derivation::new(lifted.clone(), TPoly::t(k, n).scale(mu))
        };
        let first = self.solve_extension(&plain, lambda, "t-independent", base_report.clone())?;
        if first.report.passed {
            return Ok(first);
        }

        let lifts = self.trivialize()?.lifts;
        let psi = invert_substitution(&lifts)?;
        let transported = |mu: &Rat| -> Result<Derivation> {
            let model = Derivation::new(lifted.clone(), TPoly::t(k, n).scale(mu))?;
            let values = psi
                .iter()
                .map(|p| model.apply(p)?.substitute(&lifts))
                .collect::<Result<Vec<_>>>()?;
            Derivation::new(values, TPoly::t(k, n).scale(mu))
        };
        let second = self.solve_extension(&transported, lambda, "transported", base_report)?;
        Ok(if second.report.passed { second } else { first })
    }

    fn solve_extension(
        &self,
        make_field: &dyn Fn(&Rat) -> Result<Derivation>,
        lambda: &Rat,
        strategy: &'static str,
        base_report: Report,
    ) -> Result<ConformalExtension> {
        let zero = Rat::zero();
        let one = Rat::one();
        let k = self.nvars();
        let n = self.n();
        let t = TotElement::homogeneous(TPoly::t(k, n), 0);
        let s = TotElement::s_power(k, n, 1);

        let at = |mu: &Rat, h: &Rat, a: &TotElement, b: &TotElement| -> Result<TotElement> {
            self.tot_conformal_defect(&make_field(mu)?, h, lambda, a, b)
        };
        let mut mu_report = Report::pass("moment-weight");
        let mu = match solve_affine(&[(at(&zero, &zero, &t, &s)?, at(&one, &zero, &t, &s)?)])? {
            Affine::Unique(mu) => Some(mu),
            Affine::Free => {
                mu_report.note("mu is unconstrained by the (t, s) pair; using 0");
                Some(Rat::zero())
            }
            Affine::Inconsistent(residual) => {
                mu_report.fail(["t", "s"], residual.render(self.gens()));
                None
            }
        };
        let Some(mu) = mu else {
            return Ok(ConformalExtension {
                lambda: lambda.clone(),
                mu: None,
                module_weight: None,
                strategy,
                field: None,
                report: Report::aggregate("conformal-extension", vec![base_report, mu_report]),
            });
        };
        mu_report.note(format!(
            "xi(t) = mu*t with mu = {mu}; -lambda = {}{}",
            -lambda.clone(),
            if mu == -lambda.clone() { " (mu = -lambda)" } else { "" }
        ));

        let probes = self.line.tot_probes();
        let coords: Vec<&(String, TotElement)> = probes.iter().filter(|(name, _)| name != "s^-1").collect();
        let mut pairs = Vec::new();
        for i in 0..coords.len() {
            for j in (i + 1)..coords.len() {
                pairs.push((i, j));
            }
        }
        let mut systems = Vec::new();
        for &(i, j) in &pairs {
            systems.push((
                at(&mu, &zero, &coords[i].1, &coords[j].1)?,
                at(&mu, &one, &coords[i].1, &coords[j].1)?,
            ));
        }
        let (weight, h) = match solve_affine(&systems)? {
            Affine::Free => (ModuleWeight::Free, Rat::zero()),
            Affine::Unique(h) => (ModuleWeight::Constant(h.to_string()), h),
            Affine::Inconsistent(_) => (ModuleWeight::NonConstant, Rat::zero()),
        };

        let field = make_field(&mu)?;
        let mut full = Report::pass("tot-conformal");
        for &(i, j) in &pairs {
            let d = self.tot_conformal_defect(&field, &h, lambda, &coords[i].1, &coords[j].1)?;
            if !d.is_zero() {
                full.fail([coords[i].0.clone(), coords[j].0.clone()], d.render(self.gens()));
            }
        }
        full.note(format!("strategy: {strategy}"));
        match &weight {
            ModuleWeight::Free => full.note("module weight h: any constant"),
            ModuleWeight::Constant(h) => full.note(format!("module weight h = {h}")),
            ModuleWeight::NonConstant => full.note("module weight h: no constant solution"),
        }
        Ok(ConformalExtension {
            lambda: lambda.clone(),
            mu: Some(mu),
            module_weight: Some(weight),
            strategy,
            field: Some(field),
            report: Report::aggregate("conformal-extension", vec![base_report, mu_report, full]),
        })
    }

    /// Action of the extended field on a Tot element: `xi(f s^p) =
    /// (xi(f) + p h f) s^p`.
    pub fn tot_apply(&self, xi: &Derivation, h: &Rat, w: &TotElement) -> Result<TotElement> {
        let xi = xi.truncate(w.order())?;
        let mut terms = Vec::new();
        for (p, f) in w.terms() {
            let c = &xi.apply(f)? + &f.scale(&(h * Rat::from_integer(p.into())));
            terms.push((p, c));
        }
        TotElement::from_terms(w.nvars(), w.order(), terms)
    }

    /// `xi{a,b} - {xi a, b} - {a, xi b} - lambda {a,b}` on the total space.
    pub fn tot_conformal_defect(
        &self,
        xi: &Derivation,
        h: &Rat,
        lambda: &Rat,
        a: &TotElement,
        b: &TotElement,
    ) -> Result<TotElement> {
        let ab = self.line.tot_bracket(a, b)?;
        let lhs = self.tot_apply(xi, h, &ab)?;
        let first = self.line.tot_bracket(&self.tot_apply(xi, h, a)?, b)?;
        let second = self.line.tot_bracket(a, &self.tot_apply(xi, h, b)?)?;
        let order = lhs.order().min(first.order()).min(second.order());
        lhs.truncate(order)?
            .checked_sub(&first.truncate(order)?)?
            .checked_sub(&second.truncate(order)?)?
            .checked_sub(&ab.truncate(order)?.scale(lambda))
    }
}

enum Affine {
    Free,
    Unique(Rat),
    Inconsistent(TotElement),
}

/// Solves `r0 + x (r1 - r0) = 0` simultaneously for all pairs `(r0, r1)`.
fn solve_affine(systems: &[(TotElement, TotElement)]) -> Result<Affine> {
    let mut candidate: Option<Rat> = None;
    for (r0, r1) in systems {
        let slope = r1.checked_sub(r0)?;
        if let Some((p, f)) = slope.terms().next() {
            let (k, c) = f
                .coeffs()
                .iter()
                .enumerate()
                .find(|(_, c)| !c.is_zero())
                .expect("nonzero coefficient has a nonzero slot");
            let (m, sc) = c.terms().next().expect("nonzero polynomial has a term");
            let rc = r0.coefficient(p).coeff(k).coefficient(m);
            candidate = Some(-(rc / sc));
            break;
        };
    }
    let x = match candidate {
        Some(x) => x,
        None => {
            return Ok(match systems.iter().find(|(r0, _)| !r0.is_zero()) {
                Some((r0, _)) => Affine::Inconsistent(r0.clone()),
                None => Affine::Free,
            })
        }
    };
    for (r0, r1) in systems {
        let slope = r1.checked_sub(r0)?;
        let value = r0.checked_add(&slope.scale(&x))?;
        if !value.is_zero() {
            return Ok(Affine::Inconsistent(value));
        }
    }
    Ok(Affine::Unique(x))
}
