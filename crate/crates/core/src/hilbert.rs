//! Length and truncated Hilbert series via standard module monomials.

use crate::error::{Error, Result};
use crate::modgb::vp_lead;
use crate::module::FpModule;
use crate::order::Monomial;

/// Leading terms of the relation Gröbner basis, grouped by component.
fn leading_terms(m: &FpModule) -> Vec<Vec<Monomial>> {
    let order = m.ring().order();
    let mut by_comp: Vec<Vec<Monomial>> = vec![Vec::new(); m.gens()];
    for g in m.rel_gb() {
        if let Some((c, mono, _)) = vp_lead(g, order) {
            by_comp[c].push(mono.clone());
        }
    }
    by_comp
}

fn is_standard(mono: &Monomial, leads: &[Monomial]) -> bool {
    leads.iter().all(|l| !l.divides(mono))
}

/// Length over the rationals: the number of standard module monomials,
/// or `None` when the module is not finite dimensional.
///
/// Finiteness is decided on the Gröbner data: every live component needs a
/// pure power of every variable among its leading terms.
pub fn length(m: &FpModule) -> Option<u64> {
    let nvars = m.ring().nvars();
    let by_comp = leading_terms(m);
    let mut total: u64 = 0;
    for leads in &by_comp {
        if leads.iter().any(|l| l.is_one()) {
            continue; // dead component
        }
        // bound for each variable from a pure power leading term
        let mut bounds = vec![None::<u32>; nvars];
        for l in leads {
            let support: Vec<usize> = (0..nvars).filter(|&v| l.exp(v) > 0).collect();
            if support.len() == 1 {
                let v = support[0];
                let e = l.exp(v);
                bounds[v] = Some(bounds[v].map_or(e, |b: u32| b.min(e)));
            }
        }
        if nvars > 0 && bounds.iter().any(|b| b.is_none()) {
            return None;
        }
        // enumerate standard monomials below the pure-power box
        let bounds: Vec<u32> = bounds.into_iter().map(|b| b.unwrap_or(1)).collect();
        let mut count: u64 = 0;
        let mut exps = vec![0u32; nvars];
        loop {
            let mono = Monomial::from_exps(exps.clone());
            if is_standard(&mono, leads) {
                count += 1;
            }
            // odometer over the box
            let mut k = 0;
            loop {
                if k == nvars {
                    break;
                }
                exps[k] += 1;
                if exps[k] < bounds[k] {
                    break;
                }
                exps[k] = 0;
                k += 1;
            }
            if k == nvars {
                break;
            }
        }
        total += count;
    }
    Some(total)
}

/// Coefficients of the Hilbert series up to `bound`: entry `d` counts the
/// standard module monomials of weighted degree `d`. Requires a grading
/// with homogeneous relations.
pub fn hilbert_series(m: &FpModule, bound: i64) -> Result<Vec<u64>> {
    let grading = m
        .grading()
        .ok_or_else(|| Error::InvalidInput("module carries no grading".into()))?
        .clone();
    let nvars = m.ring().nvars();
    // homogeneity of the presentation data: relation columns and ring relations
    for col in m.relations().columns() {
        let mut seen: Option<i64> = None;
        for (i, p) in col.iter().enumerate() {
            for (mono, _) in p.terms() {
                let d = mono.weighted_degree(&grading.var_weights) + grading.gen_weights[i];
                match seen {
                    None => seen = Some(d),
                    Some(s) if s == d => {}
                    Some(_) => return Err(Error::InhomogeneousRelations),
                }
            }
        }
    }
    for g in m.ring().relations().generators() {
        let mut seen: Option<i64> = None;
        for (mono, _) in g.terms() {
            let d = mono.weighted_degree(&grading.var_weights);
            match seen {
                None => seen = Some(d),
                Some(s) if s == d => {}
                Some(_) => return Err(Error::InhomogeneousRelations),
            }
        }
    }
    if grading.var_weights.contains(&0) {
        return Err(Error::InvalidInput(
            "variable weights must be positive".into(),
        ));
    }

    let by_comp = leading_terms(m);
    let lo = 0i64;
    let size = (bound - lo + 1).max(0) as usize;
    let mut coeffs = vec![0u64; size];
    for (comp, leads) in by_comp.iter().enumerate() {
        if leads.iter().any(|l| l.is_one()) {
            continue;
        }
        let shift = grading.gen_weights[comp];
        enumerate_standard(
            nvars,
            &grading.var_weights,
            leads,
            bound - shift,
            &mut |mono_deg| {
                let d = mono_deg + shift;
                if (lo..=bound).contains(&d) {
                    coeffs[(d - lo) as usize] += 1;
                }
            },
        );
    }
    Ok(coeffs)
}

/// Calls `visit` with the weighted degree of every standard monomial of
/// weighted degree at most `max_deg`.
fn enumerate_standard(
    nvars: usize,
    weights: &[u32],
    leads: &[Monomial],
    max_deg: i64,
    visit: &mut dyn FnMut(i64),
) {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        exps: &mut Vec<u32>,
        var: usize,
        deg: i64,
        nvars: usize,
        weights: &[u32],
        leads: &[Monomial],
        max_deg: i64,
        visit: &mut dyn FnMut(i64),
    ) {
        if var == nvars {
            let mono = Monomial::from_exps(exps.clone());
            if is_standard(&mono, leads) {
                visit(deg);
            }
            return;
        }
        let w = weights[var] as i64;
        let mut e = 0u32;
        loop {
            let d = deg + w * e as i64;
            if d > max_deg {
                break;
            }
            exps[var] = e;
            // prune: any lead dividing the partial support already kills all
            rec(exps, var + 1, d, nvars, weights, leads, max_deg, visit);
            exps[var] = 0;
            e += 1;
        }
    }
    if max_deg < 0 {
        return;
    }
    let mut exps = vec![0u32; nvars];
    rec(&mut exps, 0, 0, nvars, weights, leads, max_deg, visit);
}

/// Default truncation: twice (max generator weight + max relation degree
/// + generator count), at least 4.
pub fn default_degree_bound(m: &FpModule) -> i64 {
    let max_gen = m
        .grading()
        .map(|g| g.gen_weights.iter().copied().max().unwrap_or(0))
        .unwrap_or(0);
    let max_rel = m
        .relations()
        .columns()
        .iter()
        .flat_map(|c| c.iter().map(|p| p.total_degree() as i64))
        .max()
        .unwrap_or(0);
    (2 * (max_gen + max_rel + m.gens() as i64)).max(4)
}
