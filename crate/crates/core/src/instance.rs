//! Seeded random moment systems and gauge twists.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{AlgebraError, Result};
use crate::model::Model;
use crate::moment::{GaugeTwist, MomentSystem};
use crate::poisson::PoissonStructure;
use crate::poly::{Monomial, Poly};
use crate::rat::Rat;
use crate::tpoly::TPoly;

pub const MAX_GENS: usize = 3;
pub const MAX_ORDER: usize = 4;
pub const MAX_DEGREE: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceParams {
    pub max_gens: usize,
    pub max_order: usize,
    pub max_degree: u32,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            max_gens: MAX_GENS,
            max_order: MAX_ORDER,
            max_degree: MAX_DEGREE,
        }
    }
}

impl InstanceParams {
    pub fn check(&self) -> Result<()> {
        if !(2..=MAX_GENS).contains(&self.max_gens) {
            return Err(AlgebraError::Precondition(format!(
                "generator bound must be in 2..={MAX_GENS}, got {}",
                self.max_gens
            )));
        }
        if !(1..=MAX_ORDER).contains(&self.max_order) {
            return Err(AlgebraError::Precondition(format!(
                "order bound must be in 1..={MAX_ORDER}, got {}",
                self.max_order
            )));
        }
        if self.max_degree > MAX_DEGREE {
            return Err(AlgebraError::Precondition(format!(
                "degree bound must be at most {MAX_DEGREE}, got {}",
                self.max_degree
            )));
        }
        Ok(())
    }
}

/// Jacobi-verified order-0 tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Catalog {
    /// `{x,y} = 1`.
    SymplecticPlane,
    /// `{x,y} = z`, `{y,z} = x`, `{z,x} = y`.
    So3,
    /// Zero bracket on `k` generators.
    Zero(usize),
    /// `{x,y} = y`.
    Affine,
    /// `{x,y} = z`, `z` central.
    Heisenberg,
}

impl Catalog {
    pub const ALL: [Catalog; 5] = [
        Catalog::SymplecticPlane,
        Catalog::So3,
        Catalog::Zero(2),
        Catalog::Affine,
        Catalog::Heisenberg,
    ];

    pub fn name(&self) -> String {
        match self {
            Catalog::SymplecticPlane => "symplectic-plane".into(),
            Catalog::So3 => "so3".into(),
            Catalog::Zero(k) => format!("zero-{k}"),
            Catalog::Affine => "affine".into(),
            Catalog::Heisenberg => "heisenberg".into(),
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            Catalog::SymplecticPlane | Catalog::Affine => 2,
            Catalog::So3 | Catalog::Heisenberg => 3,
            Catalog::Zero(k) => *k,
        }
    }

    /// Constant symplectic entries are nondegenerate at every point.
    pub fn is_symplectic(&self) -> bool {
        matches!(self, Catalog::SymplecticPlane)
    }

    pub fn structure(&self) -> PoissonStructure {
        let v = |k, i| TPoly::var(k, 0, i);
        let built = match self {
            Catalog::SymplecticPlane => {
                PoissonStructure::new(&["x", "y"], 0, [(0, 1, TPoly::one(2, 0))])
            }
            Catalog::So3 => PoissonStructure::new(
                &["x", "y", "z"],
                0,
                [(0, 1, v(3, 2)), (1, 2, v(3, 0)), (2, 0, v(3, 1))],
            ),
            Catalog::Zero(k) => {
                let names: Vec<&str> = ["x", "y", "z"][..*k].to_vec();
                Ok(PoissonStructure::zero(&names, 0))
            }
            Catalog::Affine => PoissonStructure::new(&["x", "y"], 0, [(0, 1, v(2, 1))]),
            Catalog::Heisenberg => PoissonStructure::new(&["x", "y", "z"], 0, [(0, 1, v(3, 2))]),
        };
        built.expect("catalog tables are well formed")
    }
}

/// A seeded instance: the untwisted system, its gauge twist and the model
/// recording both (the twist under the name `g`).
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub catalog: Catalog,
    pub model: Model,
    pub twist: GaugeTwist,
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    let n: i64 = rng.gen_range(-3..=3);
    let d: i64 = if rng.gen_bool(0.25) { 2 } else { 1 };
    Rat::new(n.into(), d.into())
}

fn nonzero_rat(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let r = small_rat(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

fn random_monomial(rng: &mut ChaCha8Rng, k: usize, max_degree: u32) -> Monomial {
    let deg = rng.gen_range(0..=max_degree);
    let mut e = vec![0u32; k];
    for _ in 0..deg {
        e[rng.gen_range(0..k)] += 1;
    }
    Monomial::from_exponents(e)
}

/// Up to three terms of degree at most `max_degree`.
pub fn random_poly(rng: &mut ChaCha8Rng, k: usize, max_degree: u32) -> Poly {
    let terms = rng.gen_range(0..=3);
    Poly::from_terms(
        k,
        (0..terms).map(|_| (random_monomial(rng, k, max_degree), nonzero_rat(rng))),
    )
}

fn random_tpoly(rng: &mut ChaCha8Rng, k: usize, order: usize, from: usize, max_degree: u32) -> TPoly {
    let coeffs = (0..=order)
        .map(|j| {
            if j < from || rng.gen_bool(0.4) {
                Poly::zero(k)
            } else {
                random_poly(rng, k, max_degree)
            }
        })
        .collect();
    TPoly::from_coeffs(k, order, coeffs).expect("sizes agree")
}

/// `phi_i = x_i + O(t)` and `u = c + O(t)` with `c` a nonzero constant.
pub fn random_twist(rng: &mut ChaCha8Rng, k: usize, n: usize, max_degree: u32) -> GaugeTwist {
    let phi = (0..k)
        .map(|i| &TPoly::var(k, n, i) + &random_tpoly(rng, k, n, 1, max_degree))
        .collect();
    let c = TPoly::constant(k, n - 1, nonzero_rat(rng));
    let unit = &c + &random_tpoly(rng, k, n - 1, 1, max_degree);
    GaugeTwist { phi, unit }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic instance for `seed`. Seed 0 is the symplectic plane with
/// the identity twist.
pub fn random_instance(seed: u64, params: InstanceParams) -> Result<Instance> {
    params.check()?;
    let mut rng = rng_for(seed);
    let choices: Vec<Catalog> = Catalog::ALL
        .iter()
        .map(|c| match c {
            Catalog::Zero(_) => Catalog::Zero(2 + (seed as usize % (params.max_gens - 1))),
            c => *c,
        })
        .filter(|c| c.nvars() <= params.max_gens)
        .collect();
    let catalog = if seed == 0 {
        Catalog::SymplecticPlane
    } else {
        choices[rng.gen_range(0..choices.len())]
    };
    let n = rng.gen_range(1..=params.max_order);
    let d = params.max_degree;
    let k = catalog.nvars();
    let trivial = MomentSystem::make_trivial(&catalog.structure(), n)?;
    let s = trivial.structure().truncate(n - 1)?;

    // Inner on every table; arbitrary values are cocycles only for the zero bracket.
    let alpha: Vec<TPoly> = match (catalog, rng.gen_range(0..3)) {
        (_, 0) => vec![TPoly::zero(k, n - 1); k],
        (Catalog::Zero(_), 1) => (0..k).map(|_| random_tpoly(&mut rng, k, n - 1, 0, d)).collect(),
        _ => {
            let h = random_tpoly(&mut rng, k, n - 1, 0, d);
            (0..k)
                .map(|i| s.bracket(&h, &s.var(i)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let twist = if seed == 0 {
        GaugeTwist::identity(k, n)
    } else {
        random_twist(&mut rng, k, n, d)
    };
    let line = crate::line::LineData::new(trivial.structure().clone(), alpha)?;
    let mut model = Model::from_system(&MomentSystem::new(line));
    model.twists.push(("g".into(), twist.clone()));
    Ok(Instance {
        seed,
        catalog,
        model,
        twist,
    })
}
