//! Quotient ring presentations, localizations and ring maps.

use crate::error::{Error, Result};
use crate::groebner::{buchberger, normal_form};
use crate::order::MonomialOrder;
use crate::poly::Polynomial;
use once_cell::sync::OnceCell;
use std::fmt;
use std::sync::Arc;

/// An ideal given by generators, with a lazily computed reduced Gröbner
/// basis for one monomial order.
#[derive(Debug, Clone)]
pub struct Ideal {
    gens: Vec<Polynomial>,
    cache: OnceCell<(MonomialOrder, Vec<Polynomial>)>,
}

impl Ideal {
    pub fn new(gens: Vec<Polynomial>) -> Self {
        Ideal {
            gens: gens.into_iter().filter(|g| !g.is_zero()).collect(),
            cache: OnceCell::new(),
        }
    }

    pub fn zero() -> Self {
        Ideal::new(Vec::new())
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    /// Reduced Gröbner basis in the given order, cached on first use.
    pub fn groebner(&self, order: &MonomialOrder) -> Vec<Polynomial> {
        let (cached_order, basis) = self
            .cache
            .get_or_init(|| (order.clone(), buchberger(&self.gens, order)));
        if cached_order == order {
            basis.clone()
        } else {
            buchberger(&self.gens, order)
        }
    }
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens
    }
}
impl Eq for Ideal {}

/// A record of one principal-open localization: the Rabinowitsch variable
/// index and the inverted element (in the extended ring).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Localization {
    pub inverse_var: usize,
    pub inverted: Polynomial,
}

/// A polynomial quotient ring with a fixed monomial order, presented as
/// `Q[vars]/relations`. Principal-open localizations are presented by a
/// fresh variable `u` with relation `u*f - 1`.
#[derive(Debug, Clone)]
pub struct RingPresentation {
    vars: Vec<String>,
    order: MonomialOrder,
    relations: Ideal,
    localizations: Vec<Localization>,
}

pub type Ring = Arc<RingPresentation>;

impl PartialEq for RingPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars
            && self.order == other.order
            && self.localizations == other.localizations
            && (self.relations == other.relations
                || self.relation_basis() == other.relation_basis())
    }
}
impl Eq for RingPresentation {}

impl fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[{}]", self.vars.join(","))?;
        if !self.relations.is_zero() {
            let gens: Vec<String> = self
                .relations
                .generators()
                .iter()
                .map(|g| g.display(&self.order, &self.vars))
                .collect();
            write!(f, "/({})", gens.join(", "))?;
        }
        Ok(())
    }
}

impl RingPresentation {
    /// Free polynomial ring.
    pub fn polynomial(vars: Vec<String>, order: MonomialOrder) -> Ring {
        assert_eq!(vars.len(), order.nvars());
        Arc::new(RingPresentation {
            vars,
            order,
            relations: Ideal::zero(),
            localizations: Vec::new(),
        })
    }

    /// Quotient by additional relations.
    pub fn quotient(ring: &Ring, extra: Vec<Polynomial>) -> Ring {
        let mut gens = ring.relations.generators().to_vec();
        gens.extend(extra);
        Arc::new(RingPresentation {
            vars: ring.vars.clone(),
            order: ring.order.clone(),
            relations: Ideal::new(gens),
            localizations: ring.localizations.clone(),
        })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn relations(&self) -> &Ideal {
        &self.relations
    }

    pub fn localizations(&self) -> &[Localization] {
        &self.localizations
    }

    /// Indices of the variables that are not Rabinowitsch inverses.
    pub fn base_vars(&self) -> Vec<usize> {
        let inv: Vec<usize> = self.localizations.iter().map(|l| l.inverse_var).collect();
        (0..self.vars.len()).filter(|i| !inv.contains(i)).collect()
    }

    pub fn relation_basis(&self) -> Vec<Polynomial> {
        self.relations.groebner(&self.order)
    }

    /// Normal form modulo the ring relations.
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        if self.relations.is_zero() {
            return p.clone();
        }
        normal_form(p, &self.relation_basis(), &self.order)
    }

    pub fn is_zero_elem(&self, p: &Polynomial) -> bool {
        self.reduce(p).is_zero()
    }

    /// The zero ring: 1 lies in the relation ideal.
    pub fn is_zero_ring(&self) -> bool {
        let gb = self.relation_basis();
        gb.iter().any(|g| g.is_constant() && !g.is_zero())
    }

    pub fn zero(&self) -> Polynomial {
        Polynomial::zero(self.nvars())
    }

    pub fn one(&self) -> Polynomial {
        Polynomial::one(self.nvars())
    }

    pub fn var(&self, i: usize) -> Polynomial {
        Polynomial::var(self.nvars(), i)
    }

    pub fn parse(&self, text: &str) -> Result<Polynomial> {
        Polynomial::parse(text, &self.vars)
    }

    pub fn show(&self, p: &Polynomial) -> String {
        p.display(&self.order, &self.vars)
    }

    /// Fresh variable names that avoid collisions with existing ones.
    /// Next unused Rabinowitsch variable name `u1`, `u2`, ...
    pub fn next_inverse_name(&self) -> String {
        let mut k = self.localizations.len() + 1;
        loop {
            let name = format!("u{}", k);
            if !self.vars.contains(&name) {
                return name;
            }
            k += 1;
        }
    }

    pub fn fresh_names(&self, base: &str, count: usize) -> Vec<String> {
        let mut prefix = base.to_string();
        loop {
            let candidate: Vec<String> = (1..=count).map(|i| format!("{}{}", prefix, i)).collect();
            if candidate.iter().all(|c| !self.vars.contains(c)) {
                return candidate;
            }
            prefix = format!("{}{}", base, prefix);
        }
    }

    /// Extends the ring by fresh variables (same relations, same order kind).
    pub fn extend(ring: &Ring, names: Vec<String>) -> Ring {
        let extra = names.len();
        let mut vars = ring.vars.clone();
        vars.extend(names);
        let relations = Ideal::new(
            ring.relations
                .generators()
                .iter()
                .map(|g| g.extended(extra))
                .collect(),
        );
        Arc::new(RingPresentation {
            vars,
            order: ring.order.extended(extra),
            relations,
            localizations: ring
                .localizations
                .iter()
                .map(|l| Localization {
                    inverse_var: l.inverse_var,
                    inverted: l.inverted.extended(extra),
                })
                .collect(),
        })
    }

    /// Principal-open localization `R[1/f]` by a Rabinowitsch variable.
    /// The result may be the zero ring when `f` is nilpotent.
    pub fn localize(ring: &Ring, f: &Polynomial) -> (Ring, RingMap) {
        assert_eq!(f.nvars(), ring.nvars());
        let name = ring.next_inverse_name();
        let extended = RingPresentation::extend(ring, vec![name]);
        let u = extended.nvars() - 1;
        let fe = f.extended(1);
        let rel = fe
            .mul(&Polynomial::var(extended.nvars(), u))
            .sub(&Polynomial::one(extended.nvars()));
        let mut gens = extended.relations.generators().to_vec();
        gens.push(rel);
        let mut localizations = extended.localizations.clone();
        localizations.push(Localization {
            inverse_var: u,
            inverted: fe,
        });
        let target = Arc::new(RingPresentation {
            vars: extended.vars.clone(),
            order: extended.order.clone(),
            relations: Ideal::new(gens),
            localizations,
        });
        let images: Vec<Polynomial> = (0..ring.nvars())
            .map(|i| Polynomial::var(target.nvars(), i))
            .collect();
        let map = RingMap::new_unchecked(ring.clone(), target.clone(), images);
        (target, map)
    }

    /// Localization that must stay nonzero.
    pub fn localize_checked(ring: &Ring, f: &Polynomial) -> Result<(Ring, RingMap)> {
        if ring.is_zero_elem(f) {
            return Err(Error::NilpotentElement(ring.show(f)));
        }
        let (target, map) = RingPresentation::localize(ring, f);
        if target.is_zero_ring() {
            return Err(Error::EmptyLocalization(ring.show(f)));
        }
        Ok((target, map))
    }

    /// Successive localization at every element of `fs`.
    pub fn localize_all(ring: &Ring, fs: &[Polynomial]) -> (Ring, RingMap) {
        let mut current = ring.clone();
        let mut map = RingMap::identity(ring.clone());
        for f in fs {
            let lifted = map.apply(f);
            let (next, step) = RingPresentation::localize(&current, &lifted);
            map = step.compose(&map);
            current = next;
        }
        (current, map)
    }

    /// Derivative that treats Rabinowitsch inverses as functions of the
    /// base variables: d(u)/dx = -u^2 * d(f)/dx for u = 1/f.
    pub fn derivative(&self, p: &Polynomial, base_var: usize) -> Polynomial {
        let mut out = p.formal_derivative(base_var);
        for l in &self.localizations {
            let du = p.formal_derivative(l.inverse_var);
            if du.is_zero() {
                continue;
            }
            let u = Polynomial::var(self.nvars(), l.inverse_var);
            let df = self.derivative(&l.inverted, base_var);
            let chain = du.mul(&u).mul(&u).mul(&df).neg();
            out = out.add(&chain);
        }
        self.reduce(&out)
    }
}

/// A ring homomorphism given by the images of the source variables.
#[derive(Debug, Clone)]
pub struct RingMap {
    pub source: Ring,
    pub target: Ring,
    images: Vec<Polynomial>,
}

impl RingMap {
    /// Builds the map and verifies that source relations die in the target.
    pub fn new(source: Ring, target: Ring, images: Vec<Polynomial>) -> Result<RingMap> {
        let map = RingMap::new_unchecked(source, target, images);
        for rel in map.source.relations.generators() {
            let img = map.apply(rel);
            if !map.target.is_zero_elem(&img) {
                return Err(Error::RingMismatch(format!(
                    "relation {} does not map to zero",
                    map.source.show(rel)
                )));
            }
        }
        Ok(map)
    }

    pub fn new_unchecked(source: Ring, target: Ring, images: Vec<Polynomial>) -> RingMap {
        assert_eq!(images.len(), source.nvars());
        RingMap {
            source,
            target,
            images,
        }
    }

    pub fn identity(ring: Ring) -> RingMap {
        let images = (0..ring.nvars()).map(|i| ring.var(i)).collect();
        RingMap {
            source: ring.clone(),
            target: ring,
            images,
        }
    }

    pub fn images(&self) -> &[Polynomial] {
        &self.images
    }

    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        let img = p.substitute(&self.images, self.target.nvars());
        self.target.reduce(&img)
    }

    /// `self ∘ earlier`.
    pub fn compose(&self, earlier: &RingMap) -> RingMap {
        assert_eq!(earlier.target, self.source, "composition mismatch");
        let images = earlier.images.iter().map(|p| self.apply(p)).collect();
        RingMap {
            source: earlier.source.clone(),
            target: self.target.clone(),
            images,
        }
    }

    pub fn is_identity_shape(&self) -> bool {
        self.source == self.target
            && self
                .images
                .iter()
                .enumerate()
                .all(|(i, p)| *p == self.source.var(i))
    }
}
