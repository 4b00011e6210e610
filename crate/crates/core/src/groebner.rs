//! Buchberger's algorithm, normal forms and ideal operations.
//!
//! S-pair selection is the normal strategy: pairs are processed by degree
//! of the pair lcm, then by the lcm itself and the generator indices, so
//! repeated runs produce identical bases.

use crate::order::{Monomial, MonomialOrder};
use crate::poly::{Coef, Polynomial};
use num_traits::One;
use std::collections::BTreeSet;

/// Remainder of `p` on division by `basis`; no term of the result is
/// divisible by any leading term of the basis.
pub fn normal_form(p: &Polynomial, basis: &[Polynomial], order: &MonomialOrder) -> Polynomial {
    let leads: Vec<(Monomial, Coef)> = basis
        .iter()
        .filter_map(|g| g.leading_term(order).map(|(m, c)| (m.clone(), c.clone())))
        .collect();
    let mut rem = p.clone();
    'outer: loop {
        // largest reducible term
        let mut target: Option<(Monomial, Coef, usize)> = None;
        for (m, c) in rem.terms() {
            for (gi, (lm, _)) in leads.iter().enumerate() {
                if lm.divides(m) {
                    let better = match &target {
                        None => true,
                        Some((tm, _, _)) => order.cmp(m, tm) == std::cmp::Ordering::Greater,
                    };
                    if better {
                        target = Some((m.clone(), c.clone(), gi));
                    }
                    break;
                }
            }
        }
        match target {
            None => break 'outer,
            Some((m, c, gi)) => {
                let (lm, lc) = &leads[gi];
                let q = lm.div_into(&m).expect("divisibility checked");
                let factor = c / lc.clone();
                rem = rem.sub(&basis[gi].mul_term(&q, &factor));
            }
        }
    }
    rem
}

fn s_polynomial(f: &Polynomial, g: &Polynomial, order: &MonomialOrder) -> Polynomial {
    let (fm, fc) = f.leading_term(order).expect("nonzero");
    let (gm, gc) = g.leading_term(order).expect("nonzero");
    let l = fm.lcm(gm);
    let uf = fm.div_into(&l).unwrap();
    let ug = gm.div_into(&l).unwrap();
    let a = f.mul_term(&uf, &(Coef::one() / fc.clone()));
    let b = g.mul_term(&ug, &(Coef::one() / gc.clone()));
    a.sub(&b)
}

/// The unique reduced monic Gröbner basis of the ideal generated by `gens`,
/// sorted descending by leading term.
pub fn buchberger(gens: &[Polynomial], order: &MonomialOrder) -> Vec<Polynomial> {
    let mut basis: Vec<Polynomial> = Vec::new();
    for g in gens {
        if !g.is_zero() {
            basis.push(g.monic(order));
        }
    }
    // pair key: (lcm degree, lcm exponents, i, j) for determinism
    let mut pairs: BTreeSet<(u32, Vec<u32>, usize, usize)> = BTreeSet::new();
    let enqueue = |pairs: &mut BTreeSet<(u32, Vec<u32>, usize, usize)>,
                   basis: &[Polynomial],
                   i: usize,
                   j: usize| {
        let (mi, _) = basis[i].leading_term(order).unwrap();
        let (mj, _) = basis[j].leading_term(order).unwrap();
        if mi.is_coprime(mj) {
            return; // product criterion
        }
        let l = mi.lcm(mj);
        pairs.insert((l.degree(), l.exps().to_vec(), i, j));
    };
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            enqueue(&mut pairs, &basis, i, j);
        }
    }
    while let Some(key) = pairs.iter().next().cloned() {
        pairs.remove(&key);
        let (_, _, i, j) = key;
        let s = s_polynomial(&basis[i], &basis[j], order);
        let r = normal_form(&s, &basis, order);
        if !r.is_zero() {
            basis.push(r.monic(order));
            let k = basis.len() - 1;
            for i in 0..k {
                enqueue(&mut pairs, &basis, i, k);
            }
        }
    }
    interreduce(basis, order)
}

/// Reduces a Gröbner basis: minimal leading terms, fully reduced tails,
/// monic, sorted descending by leading term.
pub fn interreduce(mut basis: Vec<Polynomial>, order: &MonomialOrder) -> Vec<Polynomial> {
    basis.retain(|g| !g.is_zero());
    // minimalize: drop any element whose lead is divisible by another lead
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let (mi, _) = basis[i].leading_term(order).unwrap();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (mj, _) = basis[j].leading_term(order).unwrap();
            if mj.divides(mi) && (mj != mi || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<Polynomial> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| if k { Some(g) } else { None })
        .collect();
    // tail-reduce each element against the others
    let mut reduced: Vec<Polynomial> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<Polynomial> = minimal
            .iter()
            .enumerate()
            .filter_map(|(j, g)| if j != i { Some(g.clone()) } else { None })
            .collect();
        let r = normal_form(&minimal[i], &others, order);
        if !r.is_zero() {
            reduced.push(r.monic(order));
        }
    }
    reduced.sort_by(|a, b| {
        let (ma, _) = a.leading_term(order).unwrap();
        let (mb, _) = b.leading_term(order).unwrap();
        order.cmp(mb, ma)
    });
    reduced
}

/// Membership test against a Gröbner basis.
pub fn reduces_to_zero(p: &Polynomial, basis: &[Polynomial], order: &MonomialOrder) -> bool {
    normal_form(p, basis, order).is_zero()
}

/// Elimination ideal: generators of `I ∩ k[vars not in `eliminate`]`,
/// expressed in the ambient ring.
pub fn eliminate(gens: &[Polynomial], eliminated: &[usize], nvars: usize) -> Vec<Polynomial> {
    let order = MonomialOrder::elimination(nvars, eliminated);
    let gb = buchberger(gens, &order);
    gb.into_iter()
        .filter(|g| eliminated.iter().all(|&v| !g.involves(v)))
        .collect()
}

/// Saturation `(I : f^∞)` via a Rabinowitsch variable: adjoin `t`, add
/// `t*f - 1` and eliminate `t`.
pub fn saturate(gens: &[Polynomial], f: &Polynomial, nvars: usize) -> Vec<Polynomial> {
    assert!(!f.is_zero(), "saturation by zero");
    let t = nvars;
    let mut ext: Vec<Polynomial> = gens.iter().map(|g| g.extended(1)).collect();
    let tf = f.extended(1).mul(&Polynomial::var(nvars + 1, t));
    ext.push(tf.sub(&Polynomial::one(nvars + 1)));
    let elim = eliminate(&ext, &[t], nvars + 1);
    elim.into_iter()
        .map(|g| {
            // drop the unused last variable
            Polynomial::from_terms(
                nvars,
                g.terms().map(|(m, c)| {
                    (
                        crate::order::Monomial::from_exps(m.exps()[..nvars].to_vec()),
                        c.clone(),
                    )
                }),
            )
        })
        .collect()
}
