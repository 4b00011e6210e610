//! Gröbner bases for submodules of free modules.
//!
//! Vectors are plain `Vec<Polynomial>`; module monomials are pairs
//! (component, monomial) compared position-over-term: a lower component
//! index dominates, ties break with the ring order. Syzygies and lifts
//! go through the usual augmented-module elimination.

use crate::order::{Monomial, MonomialOrder};
use crate::poly::{Coef, Polynomial};
use num_traits::One;
use std::cmp::Ordering;
use std::collections::BTreeSet;

pub type VecPoly = Vec<Polynomial>;

pub fn vp_zero(ncomp: usize, nvars: usize) -> VecPoly {
    vec![Polynomial::zero(nvars); ncomp]
}

pub fn vp_is_zero(v: &VecPoly) -> bool {
    v.iter().all(|p| p.is_zero())
}

pub fn vp_add(a: &VecPoly, b: &VecPoly) -> VecPoly {
    a.iter().zip(b).map(|(p, q)| p.add(q)).collect()
}

pub fn vp_sub(a: &VecPoly, b: &VecPoly) -> VecPoly {
    a.iter().zip(b).map(|(p, q)| p.sub(q)).collect()
}

pub fn vp_mul_term(v: &VecPoly, m: &Monomial, c: &Coef) -> VecPoly {
    v.iter().map(|p| p.mul_term(m, c)).collect()
}

pub fn vp_scale_poly(v: &VecPoly, p: &Polynomial) -> VecPoly {
    v.iter().map(|q| q.mul(p)).collect()
}

pub fn vp_unit(ncomp: usize, nvars: usize, comp: usize) -> VecPoly {
    let mut v = vp_zero(ncomp, nvars);
    v[comp] = Polynomial::one(nvars);
    v
}

/// Leading module term `(component, monomial, coefficient)`.
pub fn vp_lead<'a>(
    v: &'a VecPoly,
    order: &MonomialOrder,
) -> Option<(usize, &'a Monomial, &'a Coef)> {
    let mut best: Option<(usize, &Monomial, &Coef)> = None;
    for (j, p) in v.iter().enumerate() {
        if let Some((m, c)) = p.leading_term(order) {
            best = match best {
                None => Some((j, m, c)),
                Some((bj, bm, bc)) => {
                    if mod_term_cmp(order, j, m, bj, bm) == Ordering::Greater {
                        Some((j, m, c))
                    } else {
                        Some((bj, bm, bc))
                    }
                }
            };
        }
    }
    best
}

fn mod_term_cmp(
    order: &MonomialOrder,
    j1: usize,
    m1: &Monomial,
    j2: usize,
    m2: &Monomial,
) -> Ordering {
    match j2.cmp(&j1) {
        // lower component index is greater
        Ordering::Equal => order.cmp(m1, m2),
        o => o,
    }
}

fn vp_monic(v: &VecPoly, order: &MonomialOrder) -> VecPoly {
    match vp_lead(v, order) {
        None => v.clone(),
        Some((_, _, c)) => {
            let inv = Coef::one() / c.clone();
            v.iter().map(|p| p.scale(&inv)).collect()
        }
    }
}

/// Full normal form of `v` against `basis`: no term of any component is
/// divisible by a basis leading term in the same component.
pub fn vp_normal_form(v: &VecPoly, basis: &[VecPoly], order: &MonomialOrder) -> VecPoly {
    let leads: Vec<(usize, Monomial, Coef)> = basis
        .iter()
        .filter_map(|b| vp_lead(b, order).map(|(j, m, c)| (j, m.clone(), c.clone())))
        .collect();
    let mut rem = v.clone();
    loop {
        let mut target: Option<(usize, Monomial, Coef, usize)> = None;
        for (j, p) in rem.iter().enumerate() {
            for (m, c) in p.terms() {
                for (bi, (bj, bm, _)) in leads.iter().enumerate() {
                    if *bj == j && bm.divides(m) {
                        let better = match &target {
                            None => true,
                            Some((tj, tm, _, _)) => {
                                mod_term_cmp(order, j, m, *tj, tm) == Ordering::Greater
                            }
                        };
                        if better {
                            target = Some((j, m.clone(), c.clone(), bi));
                        }
                        break;
                    }
                }
            }
        }
        match target {
            None => return rem,
            Some((_, m, c, bi)) => {
                let (_, bm, bc) = &leads[bi];
                let q = bm.div_into(&m).expect("divisibility checked");
                let factor = c / bc.clone();
                rem = vp_sub(&rem, &vp_mul_term(&basis[bi], &q, &factor));
            }
        }
    }
}

/// Buchberger for submodules of a free module; returns the reduced basis
/// sorted descending by leading term.
pub fn module_groebner(gens: &[VecPoly], order: &MonomialOrder) -> Vec<VecPoly> {
    let mut basis: Vec<VecPoly> = Vec::new();
    for g in gens {
        if !vp_is_zero(g) {
            basis.push(vp_monic(g, order));
        }
    }
    let mut pairs: BTreeSet<(u32, usize, Vec<u32>, usize, usize)> = BTreeSet::new();
    let enqueue = |pairs: &mut BTreeSet<(u32, usize, Vec<u32>, usize, usize)>,
                   basis: &[VecPoly],
                   i: usize,
                   j: usize| {
        let (ci, mi, _) = vp_lead(&basis[i], order).unwrap();
        let (cj, mj, _) = vp_lead(&basis[j], order).unwrap();
        if ci != cj {
            return;
        }
        let l = mi.lcm(mj);
        pairs.insert((l.degree(), ci, l.exps().to_vec(), i, j));
    };
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            enqueue(&mut pairs, &basis, i, j);
        }
    }
    while let Some(key) = pairs.iter().next().cloned() {
        pairs.remove(&key);
        let (_, _, _, i, j) = key;
        let (_, mi, ci) = vp_lead(&basis[i], order).unwrap();
        let (_, mj, cj) = vp_lead(&basis[j], order).unwrap();
        let l = mi.lcm(mj);
        let ui = mi.div_into(&l).unwrap();
        let uj = mj.div_into(&l).unwrap();
        let a = vp_mul_term(&basis[i], &ui, &(Coef::one() / ci.clone()));
        let b = vp_mul_term(&basis[j], &uj, &(Coef::one() / cj.clone()));
        let s = vp_sub(&a, &b);
        let r = vp_normal_form(&s, &basis, order);
        if !vp_is_zero(&r) {
            basis.push(vp_monic(&r, order));
            let k = basis.len() - 1;
            for i in 0..k {
                enqueue(&mut pairs, &basis, i, k);
            }
        }
    }
    module_interreduce(basis, order)
}

pub fn module_interreduce(mut basis: Vec<VecPoly>, order: &MonomialOrder) -> Vec<VecPoly> {
    basis.retain(|g| !vp_is_zero(g));
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let (ci, mi, _) = vp_lead(&basis[i], order).unwrap();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (cj, mj, _) = vp_lead(&basis[j], order).unwrap();
            if cj == ci && mj.divides(mi) && (mj != mi || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<VecPoly> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| if k { Some(g) } else { None })
        .collect();
    let mut reduced: Vec<VecPoly> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<VecPoly> = minimal
            .iter()
            .enumerate()
            .filter_map(|(j, g)| if j != i { Some(g.clone()) } else { None })
            .collect();
        let r = vp_normal_form(&minimal[i], &others, order);
        if !vp_is_zero(&r) {
            reduced.push(vp_monic(&r, order));
        }
    }
    reduced.sort_by(|a, b| {
        let (ca, ma, _) = vp_lead(a, order).unwrap();
        let (cb, mb, _) = vp_lead(b, order).unwrap();
        mod_term_cmp(order, cb, mb, ca, ma)
    });
    reduced
}

/// Generators of the syzygy module of `vectors` (in `ncomp` components),
/// working modulo the span of `modulo`: returns the coefficient vectors
/// `a` with `sum a_i vectors_i ∈ span(modulo)`.
pub fn syzygies_modulo(
    vectors: &[VecPoly],
    modulo: &[VecPoly],
    ncomp: usize,
    order: &MonomialOrder,
) -> Vec<VecPoly> {
    let s = vectors.len();
    let nvars = order.nvars();
    let mut aug: Vec<VecPoly> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        debug_assert_eq!(v.len(), ncomp);
        let mut w = v.clone();
        w.extend(vp_unit(s, nvars, i));
        aug.push(w);
    }
    for m in modulo {
        debug_assert_eq!(m.len(), ncomp);
        let mut w = m.clone();
        w.extend(vp_zero(s, nvars));
        aug.push(w);
    }
    let gb = module_groebner(&aug, order);
    let mut out = Vec::new();
    for g in gb {
        if g[..ncomp].iter().all(|p| p.is_zero()) {
            let tail: VecPoly = g[ncomp..].to_vec();
            if !vp_is_zero(&tail) {
                out.push(tail);
            }
        }
    }
    out
}

/// A division context: expresses elements in terms of fixed generators.
pub struct LiftContext {
    ncomp: usize,
    ngens: usize,
    gb: Vec<VecPoly>,
    order: MonomialOrder,
}

impl LiftContext {
    /// Prepares lifting through `gens`, modulo the span of `modulo`.
    pub fn new(
        gens: &[VecPoly],
        modulo: &[VecPoly],
        ncomp: usize,
        order: &MonomialOrder,
    ) -> LiftContext {
        let nvars = order.nvars();
        let s = gens.len();
        let mut aug: Vec<VecPoly> = Vec::new();
        for (i, v) in gens.iter().enumerate() {
            let mut w = v.clone();
            w.extend(vp_unit(s, nvars, i));
            aug.push(w);
        }
        for m in modulo {
            let mut w = m.clone();
            w.extend(vp_zero(s, nvars));
            aug.push(w);
        }
        LiftContext {
            ncomp,
            ngens: s,
            gb: module_groebner(&aug, order),
            order: order.clone(),
        }
    }

    /// Coefficients `a` with `v ≡ sum a_i gens_i` modulo the span, if any.
    pub fn lift(&self, v: &VecPoly) -> Option<VecPoly> {
        debug_assert_eq!(v.len(), self.ncomp);
        let nvars = self.order.nvars();
        let mut w = v.clone();
        w.extend(vp_zero(self.ngens, nvars));
        let r = vp_normal_form(&w, &self.gb, &self.order);
        if r[..self.ncomp].iter().all(|p| p.is_zero()) {
            Some(r[self.ncomp..].iter().map(|p| p.neg()).collect())
        } else {
            None
        }
    }

    /// Whether `v` lies in the span of the generators plus the modulo part.
    pub fn contains(&self, v: &VecPoly) -> bool {
        self.lift(v).is_some()
    }
}
