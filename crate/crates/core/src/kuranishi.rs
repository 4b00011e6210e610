//! Kuranishi models: smooth ambient data cutting out a locus, the induced
//! two-term obstruction theory, obstruction sheaves, normal cones and
//! chart-level virtual structure sheaf classes.

use crate::chart::{LocalChart, SheafOnF};
use crate::complex::{ChainComplex, ComplexMap};
use crate::error::{Error, Result};
use crate::groebner::{buchberger, reduces_to_zero};
use crate::ktheory::{gysin_chart_value, tautological_chart, KClass};
use crate::matrix::PolyMatrix;
use crate::modgb::VecPoly;
use crate::module::{base_change, lift_through, FpModule, ModuleMap};
use crate::poly::Polynomial;
use crate::ring::{Ring, RingMap, RingPresentation};

/// A Kuranishi model: a smooth ambient ring (a principal open of affine
/// space), a free bundle rank, and a section whose vanishing locus is the
/// model's scheme.
#[derive(Debug, Clone)]
pub struct KuranishiModel {
    pub name: String,
    pub ambient: Ring,
    pub rank: usize,
    pub section: Vec<Polynomial>,
    pub locus: Ring,
    pub to_locus: RingMap,
}

impl KuranishiModel {
    pub fn new(
        name: impl Into<String>,
        ambient: Ring,
        section: Vec<Polynomial>,
    ) -> Result<KuranishiModel> {
        let name = name.into();
        // the ambient must be a polynomial ring up to principal-open
        // localizations: every relation comes from an inverted element
        if ambient.relations().generators().len() != ambient.localizations().len() {
            return Err(Error::InvalidInput(format!(
                "model `{}`: ambient is not a principal open of affine space",
                name
            )));
        }
        let locus = RingPresentation::quotient(&ambient, section.clone());
        if locus.is_zero_ring() && !section.is_empty() {
            return Err(Error::EmptyLocalization(format!(
                "model `{}`: the section has empty vanishing locus",
                name
            )));
        }
        let images = (0..ambient.nvars()).map(|i| locus.var(i)).collect();
        let to_locus = RingMap::new_unchecked(ambient.clone(), locus.clone(), images);
        Ok(KuranishiModel {
            name,
            ambient,
            rank: section.len(),
            section,
            locus,
            to_locus,
        })
    }

    /// The d-critical model of a function: bundle = cotangent sheaf of the
    /// ambient, section = the differential.
    pub fn d_critical(
        name: impl Into<String>,
        ambient: Ring,
        f: &Polynomial,
    ) -> Result<KuranishiModel> {
        let section: Vec<Polynomial> = ambient
            .base_vars()
            .iter()
            .map(|&v| ambient.derivative(f, v))
            .collect();
        KuranishiModel::new(name, ambient, section)
    }

    /// Jacobian of the section over the locus: one row per section entry,
    /// one column per ambient base variable.
    pub fn jacobian(&self) -> PolyMatrix {
        let base_vars = self.ambient.base_vars();
        let mut m = PolyMatrix::zero(self.rank, base_vars.len(), self.locus.nvars());
        for (j, s) in self.section.iter().enumerate() {
            for (c, &v) in base_vars.iter().enumerate() {
                let d = self.ambient.derivative(s, v);
                *m.at_mut(j, c) = self.to_locus.apply(&d);
            }
        }
        m
    }

    /// Ambient dimension (count of genuine variables).
    pub fn ambient_dim(&self) -> usize {
        self.ambient.base_vars().len()
    }

    /// Jacobian criterion for smoothness of the ambient: automatic here,
    /// since the ambient is a localized polynomial ring.
    pub fn ambient_is_smooth(&self) -> bool {
        self.ambient.relations().generators().len() == self.ambient.localizations().len()
    }
}

/// The obstruction sheaf: cokernel of the Jacobian map from the restricted
/// tangent sheaf to the restricted bundle.
#[derive(Debug, Clone)]
pub struct ObstructionSheafData {
    pub module: FpModule,
    pub jacobian: PolyMatrix,
}

pub fn obstruction_sheaf(model: &KuranishiModel) -> Result<ObstructionSheafData> {
    let n = model.ambient_dim();
    let jac = model.jacobian();
    let tangent = FpModule::free(model.locus.clone(), n);
    let bundle = FpModule::free(model.locus.clone(), model.rank);
    let map = ModuleMap::new(tangent, bundle, jac.clone())?;
    let (coker, _) = map.cokernel();
    Ok(ObstructionSheafData {
        module: coker,
        jacobian: jac,
    })
}

/// The induced two-term obstruction theory of a model, with the canonical
/// comparison to the (truncated) cotangent data of the locus.
#[derive(Debug, Clone)]
pub struct InducedPot {
    /// degree 0: restricted cotangent forms; degree 1: the dual bundle
    pub complex: ChainComplex,
    pub conormal: FpModule,
    /// dual bundle onto the conormal module (degree -1 comparison)
    pub to_conormal: ModuleMap,
    /// cotangent sheaf of the locus: cokernel of the conormal map
    pub cotangent: FpModule,
    pub obstruction: ObstructionSheafData,
    pub h0_is_iso: bool,
    pub hm1_is_surjective: bool,
}

/// Presentation of `I/I^2` for the section ideal, over the locus.
fn conormal_module(model: &KuranishiModel) -> Result<FpModule> {
    let ambient = &model.ambient;
    let order = ambient.order().clone();
    // relations: coefficient vectors with sum(a_j * w_j) in I^2
    let mut modulo: Vec<VecPoly> = Vec::new();
    for a in &model.section {
        for b in &model.section {
            modulo.push(vec![a.mul(b)]);
        }
    }
    for g in ambient.relations().generators() {
        modulo.push(vec![g.clone()]);
    }
    let vectors: Vec<VecPoly> = model.section.iter().map(|s| vec![s.clone()]).collect();
    let syz = crate::modgb::syzygies_modulo(&vectors, &modulo, 1, &order);
    let cols: Vec<VecPoly> = syz
        .into_iter()
        .map(|v| v.iter().map(|p| model.to_locus.apply(p)).collect())
        .collect();
    Ok(FpModule::new(model.locus.clone(), model.rank, cols))
}

pub fn induced_pot(model: &KuranishiModel) -> Result<InducedPot> {
    let locus = model.locus.clone();
    let n = model.ambient_dim();
    let forms = FpModule::free(locus.clone(), n);
    let dual_bundle = FpModule::free(locus.clone(), model.rank);
    // differential: transpose Jacobian, columns are gradients of sections
    let dtrans = model.jacobian().transpose();
    let diff = ModuleMap::new(dual_bundle.clone(), forms.clone(), dtrans.clone())?;
    let complex = ChainComplex::new(vec![forms.clone(), dual_bundle.clone()], vec![diff])?;
    let conormal = conormal_module(model)?;
    let to_conormal = ModuleMap::new(
        dual_bundle,
        conormal.clone(),
        PolyMatrix::identity(model.rank, locus.nvars()),
    )?;
    let hm1_is_surjective = to_conormal.is_surjective();
    // degree-0 comparison: the cokernel of the two-term differential
    // against the cotangent sheaf of the locus (cokernel of d on the
    // conormal module); the matrices agree, so the cokernels must match
    let cotangent_map = ModuleMap::new(conormal.clone(), forms, dtrans)?;
    let (omega_u, _) = cotangent_map.cokernel();
    let (h0, _) = complex.diff_into(0).unwrap().cokernel();
    let h0_is_iso = h0.presentation_eq(&omega_u);
    let obstruction = obstruction_sheaf(model)?;
    Ok(InducedPot {
        complex,
        conormal,
        to_conormal,
        cotangent: omega_u,
        obstruction,
        h0_is_iso,
        hm1_is_surjective,
    })
}

/// The normal cone of the locus in the ambient, presented inside the
/// total space of the bundle restricted to the locus.
#[derive(Debug, Clone)]
pub struct NormalConeData {
    /// ambient ring with the fiber variables appended (no quotient)
    pub ambient_total: Ring,
    pub fiber_vars: Vec<usize>,
    /// generators of the cone ideal: the elimination output plus the
    /// section, over the ambient total ring
    pub cone_ideal: Vec<Polynomial>,
    /// the elimination output alone
    pub rees_part: Vec<Polynomial>,
    pub trace: Vec<String>,
}

pub fn normal_cone(model: &KuranishiModel) -> Result<NormalConeData> {
    let ambient = &model.ambient;
    let m = model.rank;
    let mut trace = Vec::new();
    // work ring: ambient + t + fiber variables
    let t_name = ambient.fresh_names("t", 1);
    let with_t = RingPresentation::extend(ambient, t_name);
    let t_var = with_t.nvars() - 1;
    let y_names = with_t.fresh_names("y", m);
    let work = RingPresentation::extend(&with_t, y_names);
    let y_vars: Vec<usize> = (with_t.nvars()..with_t.nvars() + m).collect();
    let t = work.var(t_var);
    let mut gens: Vec<Polynomial> = Vec::new();
    for (i, s) in model.section.iter().enumerate() {
        let s_ext = s.extended(1 + m);
        gens.push(work.var(y_vars[i]).sub(&t.mul(&s_ext)));
    }
    for g in ambient.relations().generators() {
        gens.push(g.extended(1 + m));
    }
    trace.push(format!("rees generators: {}", gens.len()));
    let saturated = crate::groebner::saturate(&gens, &t, work.nvars());
    trace.push(format!("saturated by t: {} generators", saturated.len()));
    let eliminated = crate::groebner::eliminate(&saturated, &[t_var], work.nvars());
    trace.push(format!("eliminated t: {} generators", eliminated.len()));
    // re-present over ambient + fiber variables (drop t)
    let y_names2 = ambient.fresh_names("y", m);
    let ambient_total = RingPresentation::extend(ambient, y_names2);
    let fiber_vars: Vec<usize> = (ambient.nvars()..ambient.nvars() + m).collect();
    let drop_t = |p: &Polynomial| -> Polynomial {
        let images: Vec<Polynomial> = (0..work.nvars())
            .map(|i| {
                if i == t_var {
                    ambient_total.zero()
                } else if i < ambient.nvars() {
                    ambient_total.var(i)
                } else {
                    // fiber variable: shift down by one (skipping t)
                    ambient_total.var(i - 1)
                }
            })
            .collect();
        p.substitute(&images, ambient_total.nvars())
    };
    let rees_part: Vec<Polynomial> = eliminated
        .iter()
        .map(|p| {
            debug_assert!(!p.involves(t_var));
            ambient_total.reduce(&drop_t(p))
        })
        .filter(|p| !p.is_zero())
        .collect();
    let mut cone_ideal = rees_part.clone();
    for s in &model.section {
        cone_ideal.push(s.extended(m));
    }
    // invariants: fiber-homogeneous generators that contain the section
    for g in &rees_part {
        let mut fiber_deg: Option<u32> = None;
        for (mono, _) in g.terms() {
            let d: u32 = fiber_vars.iter().map(|&v| mono.exp(v)).sum();
            match fiber_deg {
                None => fiber_deg = Some(d),
                Some(e) if e == d => {}
                Some(_) => {
                    return Err(Error::InvalidInput(
                        "cone ideal generator is not homogeneous in the fiber variables".into(),
                    ))
                }
            }
        }
    }
    let order = ambient_total.order().clone();
    let gb = buchberger(&cone_ideal, &order);
    for s in &model.section {
        if !reduces_to_zero(&s.extended(m), &gb, &order) {
            return Err(Error::InvalidInput(
                "cone ideal does not contain the pulled-back locus relations".into(),
            ));
        }
    }
    Ok(NormalConeData {
        ambient_total,
        fiber_vars,
        cone_ideal,
        rees_part,
        trace,
    })
}

impl NormalConeData {
    /// The cone ideal transported into a chart's total ring (the chart
    /// must be the tautological chart of the restricted bundle).
    pub fn ideal_on_chart(
        &self,
        model: &KuranishiModel,
        chart: &LocalChart,
    ) -> Result<Vec<Polynomial>> {
        if chart.rank != model.rank {
            return Err(Error::ShapeMismatch(
                "chart rank differs from the bundle rank".into(),
            ));
        }
        let images: Vec<Polynomial> = (0..self.ambient_total.nvars())
            .map(|i| {
                if let Some(k) = self.fiber_vars.iter().position(|&v| v == i) {
                    chart.total.var(chart.fiber_vars[k])
                } else {
                    chart
                        .to_total
                        .apply(&model.to_locus.apply(&model.ambient.var(i)))
                }
            })
            .collect();
        Ok(self
            .rees_part
            .iter()
            .map(|p| {
                chart
                    .total
                    .reduce(&p.substitute(&images, chart.total.nvars()))
            })
            .filter(|p| !p.is_zero())
            .collect())
    }
}

/// The tautological chart of a model's bundle over its locus.
pub fn model_chart(model: &KuranishiModel) -> Result<LocalChart> {
    tautological_chart(&model.name, &model.locus, model.rank)
}

/// The chart-level virtual structure sheaf class: the zero-section Gysin
/// image of the normal cone's structure sheaf.
pub fn virtual_sheaf_chart(model: &KuranishiModel) -> Result<(KClass, NormalConeData)> {
    let cone = normal_cone(model)?;
    let chart = model_chart(model)?;
    let ideal = cone.ideal_on_chart(model, &chart)?;
    let value = FpModule::cyclic(chart.total.clone(), &ideal);
    let class = gysin_chart_value(&chart, &value)?;
    Ok((class, cone))
}

/// The cone as a sheaf on the obstruction-bundle chart.
pub fn cone_sheaf(
    model: &KuranishiModel,
    chart: &LocalChart,
    cone: &NormalConeData,
) -> Result<SheafOnF> {
    let ideal = cone.ideal_on_chart(model, chart)?;
    Ok(SheafOnF::substack_on(chart, ideal))
}

/// Data for comparing two models of the same locus: an ambient morphism
/// and a bundle surjection matching the sections.
#[derive(Debug, Clone)]
pub struct OmegaCompat {
    /// the smaller model (on the étale-local scheme)
    pub fine: KuranishiModel,
    /// the larger model
    pub coarse: KuranishiModel,
    /// ambient morphism: coarse ambient functions pull back to the fine one
    pub phi: RingMap,
    /// bundle surjection: fine rank × coarse rank over the fine ambient
    pub eta: PolyMatrix,
    pub right_inverse: Option<PolyMatrix>,
}

/// Per-condition verification report.
#[derive(Debug)]
pub struct CompatReport {
    pub diagram_commutes: bool,
    pub eta_surjective: bool,
    pub eta_matches_sections: bool,
    pub obstruction_iso: bool,
    pub detail: Vec<String>,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.diagram_commutes
            && self.eta_surjective
            && self.eta_matches_sections
            && self.obstruction_iso
    }
}

/// Locus-level ring map induced by the ambient morphism.
pub fn locus_map(data: &OmegaCompat) -> Result<RingMap> {
    let images: Vec<Polynomial> = data
        .phi
        .images()
        .iter()
        .map(|p| data.fine.to_locus.apply(p))
        .collect();
    RingMap::new(data.coarse.locus.clone(), data.fine.locus.clone(), images)
}

/// Pullback of the coarse section along the ambient morphism.
fn pulled_section(data: &OmegaCompat) -> Vec<Polynomial> {
    data.coarse
        .section
        .iter()
        .map(|s| data.phi.apply(s))
        .collect()
}

/// The obstruction-sheaf comparison induced by the bundle surjection:
/// from the restricted coarse obstruction sheaf to the fine one.
pub fn obstruction_comparison(data: &OmegaCompat) -> Result<ModuleMap> {
    let to_t = locus_map(data)?;
    let coarse_ob = obstruction_sheaf(&data.coarse)?;
    let fine_ob = obstruction_sheaf(&data.fine)?;
    let restricted = base_change(&coarse_ob.module, &to_t);
    let eta_t = data.eta.map(|p| data.fine.to_locus.apply(p));
    ModuleMap::new(restricted, fine_ob.module, eta_t)
}

pub fn check_omega_compat(data: &OmegaCompat) -> Result<CompatReport> {
    let mut detail = Vec::new();
    let fine = &data.fine;
    // (1) the ambient square commutes: the pulled-back coarse section
    // vanishes on the fine locus, ideal-theoretically
    let pulled = pulled_section(data);
    let order = fine.ambient.order().clone();
    let mut ideal_gens = fine.section.clone();
    ideal_gens.extend(fine.ambient.relations().generators().iter().cloned());
    let gb = buchberger(&ideal_gens, &order);
    let mut diagram_commutes = true;
    for (j, p) in pulled.iter().enumerate() {
        if !reduces_to_zero(p, &gb, &order) {
            diagram_commutes = false;
            detail.push(format!(
                "pulled section entry {} does not lie in the fine section ideal",
                j
            ));
        }
    }
    // (2) eta is surjective and matches the sections exactly
    let free_coarse = FpModule::free(fine.ambient.clone(), data.coarse.rank);
    let free_fine = FpModule::free(fine.ambient.clone(), fine.rank);
    let eta_map = ModuleMap::new(free_coarse, free_fine, data.eta.clone())?;
    let eta_surjective = eta_map.is_surjective();
    if !eta_surjective {
        detail.push("eta is not surjective".into());
    }
    let image = data.eta.apply(&pulled);
    let eta_matches_sections = image
        .iter()
        .zip(&fine.section)
        .all(|(a, b)| fine.ambient.is_zero_elem(&a.sub(b)));
    if !eta_matches_sections {
        detail.push("eta does not carry the pulled section to the fine section".into());
    }
    // (3) the induced obstruction-sheaf map is an isomorphism
    let obstruction_iso = match obstruction_comparison(data) {
        Ok(map) => {
            let iso = map.is_isomorphism();
            if !iso {
                detail.push("obstruction comparison is not an isomorphism".into());
            }
            iso
        }
        Err(e) => {
            detail.push(format!("obstruction comparison is ill-formed: {}", e));
            false
        }
    };
    Ok(CompatReport {
        diagram_commutes,
        eta_surjective,
        eta_matches_sections,
        obstruction_iso,
        detail,
    })
}

/// Right inverse of the bundle surjection over the fine ambient, supplied
/// or solved column by column.
pub fn right_inverse(data: &OmegaCompat) -> Result<PolyMatrix> {
    if let Some(ri) = &data.right_inverse {
        let prod = data.eta.mul(ri);
        let id = PolyMatrix::identity(data.fine.rank, data.fine.ambient.nvars());
        let diff = prod.sub(&id);
        for j in 0..diff.ncols {
            for i in 0..diff.nrows {
                if !data.fine.ambient.is_zero_elem(diff.at(i, j)) {
                    return Err(Error::InvalidInput(
                        "supplied right inverse fails eta * sigma = id".into(),
                    ));
                }
            }
        }
        return Ok(ri.clone());
    }
    let ring = &data.fine.ambient;
    let m_fine = data.fine.rank;
    let cols = data.eta.columns();
    let mut solved: Vec<VecPoly> = Vec::new();
    for k in 0..m_fine {
        let mut e = vec![ring.zero(); m_fine];
        e[k] = ring.one();
        let x =
            lift_through(ring, &cols, &[], m_fine, &e).ok_or_else(|| Error::NoRightInverse {
                hint: format!("column {} of the identity has no preimage", k),
            })?;
        solved.push(x);
    }
    Ok(PolyMatrix::from_columns(
        data.coarse.rank,
        &solved,
        ring.nvars(),
    ))
}

/// The two-term comparison map of Ω-compatible models, with certificates.
pub struct PsiData {
    /// degree 1 component: coarse dual bundle to fine dual bundle
    pub bundle_component: PolyMatrix,
    /// degree 0 component: coarse forms to fine forms
    pub forms_component: PolyMatrix,
    pub chain_map: ComplexMap,
    pub quasi_iso: bool,
    pub h1_matches_eta: bool,
}

pub fn build_psi(data: &OmegaCompat) -> Result<PsiData> {
    let report = check_omega_compat(data)?;
    if !report.passed() {
        return Err(Error::InvalidInput(format!(
            "models are not compatible: {}",
            report.detail.join("; ")
        )));
    }
    let fine = &data.fine;
    let coarse = &data.coarse;
    let ambient = &fine.ambient;
    let sigma = right_inverse(data)?;
    // correction: the pulled coarse section minus sigma applied to the
    // fine section lies in the fine ideal; lift its entries
    let pulled = pulled_section(data);
    let sigma_omega = sigma.apply(&fine.section);
    let residual: Vec<Polynomial> = pulled
        .iter()
        .zip(&sigma_omega)
        .map(|(a, b)| a.sub(b))
        .collect();
    // modulo: squares of the fine ideal plus ambient relations
    let mut modulo: Vec<VecPoly> = Vec::new();
    for a in &fine.section {
        for b in &fine.section {
            modulo.push(vec![a.mul(b)]);
        }
    }
    let gens: Vec<VecPoly> = fine.section.iter().map(|s| vec![s.clone()]).collect();
    let mut correction = PolyMatrix::zero(fine.rank, coarse.rank, ambient.nvars());
    for (j, r) in residual.iter().enumerate() {
        if ambient.is_zero_elem(r) {
            continue;
        }
        let coeffs = lift_through(ambient, &gens, &modulo, 1, &vec![r.clone()])
            .ok_or_else(|| Error::LiftInfeasible(format!(
                "residual section entry {} does not lift through the fine section modulo its square",
                j
            )))?;
        for (k, coeff) in coeffs.iter().enumerate().take(fine.rank) {
            *correction.at_mut(k, j) = coeff.clone();
        }
    }
    let bundle_component_ambient =
        sigma
            .transpose()
            .hstack(&PolyMatrix::zero(fine.rank, 0, ambient.nvars()));
    let mut bundle_total = bundle_component_ambient;
    for i in 0..fine.rank {
        for j in 0..coarse.rank {
            let v = bundle_total.at(i, j).add(correction.at(i, j));
            *bundle_total.at_mut(i, j) = v;
        }
    }
    let to_t = |p: &Polynomial| fine.to_locus.apply(p);
    let bundle_component = bundle_total.map(|p| to_t(p));
    // forms component: jacobian of the ambient morphism
    let fine_base = fine.ambient.base_vars();
    let coarse_base = coarse.ambient.base_vars();
    let mut forms = PolyMatrix::zero(fine_base.len(), coarse_base.len(), fine.locus.nvars());
    for (col, &w) in coarse_base.iter().enumerate() {
        let image = &data.phi.images()[w];
        for (row, &v) in fine_base.iter().enumerate() {
            *forms.at_mut(row, col) = to_t(&fine.ambient.derivative(image, v));
        }
    }
    // complexes over the fine locus
    let locus = fine.locus.clone();
    let to_t_map = locus_map(data)?;
    let coarse_pot_matrix = {
        let jac = coarse.jacobian().transpose();
        jac.map(|p| to_t_map.apply(p))
    };
    let coarse_forms = FpModule::free(locus.clone(), coarse_base.len());
    let coarse_dual = FpModule::free(locus.clone(), coarse.rank);
    let coarse_complex = ChainComplex::new(
        vec![coarse_forms.clone(), coarse_dual.clone()],
        vec![ModuleMap::new(
            coarse_dual,
            coarse_forms,
            coarse_pot_matrix,
        )?],
    )?;
    let fine_pot = induced_pot(fine)?;
    let fine_complex = fine_pot.complex.clone();
    let maps = vec![
        ModuleMap::new(
            coarse_complex.module(0).clone(),
            fine_complex.module(0).clone(),
            forms.clone(),
        )?,
        ModuleMap::new(
            coarse_complex.module(1).clone(),
            fine_complex.module(1).clone(),
            bundle_component.clone(),
        )?,
    ];
    let chain_map = ComplexMap::new(coarse_complex, fine_complex, maps)?;
    let quasi_iso = chain_map.is_quasi_iso()?.is_ok();

    // dualizing in degree 1: the transpose of the bundle component induces
    // a map of obstruction sheaves; it must invert the eta comparison
    let h1_matches_eta = {
        let fine_ob = obstruction_sheaf(fine)?;
        let coarse_ob = obstruction_sheaf(coarse)?;
        let coarse_ob_t = base_change(&coarse_ob.module, &to_t_map);
        let dual = bundle_component.transpose();
        match ModuleMap::new(fine_ob.module.clone(), coarse_ob_t.clone(), dual) {
            Err(_) => false,
            Ok(h1) => match obstruction_comparison(data) {
                Err(_) => false,
                Ok(eta_bar) => {
                    let round = eta_bar.compose(&h1);
                    match round {
                        Err(_) => false,
                        Ok(r) => {
                            r.equals(&ModuleMap::identity(&fine_ob.module)) && h1.is_isomorphism()
                        }
                    }
                }
            },
        }
    };
    Ok(PsiData {
        bundle_component,
        forms_component: forms,
        chain_map,
        quasi_iso,
        h1_matches_eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::length;
    use crate::order::MonomialOrder;

    fn line() -> Ring {
        RingPresentation::polynomial(vec!["x".into()], MonomialOrder::grevlex(1))
    }

    fn plane() -> Ring {
        RingPresentation::polynomial(vec!["x".into(), "y".into()], MonomialOrder::grevlex(2))
    }

    #[test]
    fn regular_value_has_zero_obstruction() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x").unwrap()]).unwrap();
        let pot = induced_pot(&model).unwrap();
        assert!(pot.obstruction.module.is_zero_module());
        assert!(pot.h0_is_iso);
        assert!(pot.hm1_is_surjective);
    }

    #[test]
    fn fat_point_obstruction_has_length_one() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x^2").unwrap()]).unwrap();
        let pot = induced_pot(&model).unwrap();
        assert_eq!(length(&pot.obstruction.module), Some(1));
        assert!(pot.h0_is_iso);
        assert!(pot.hm1_is_surjective);
    }

    #[test]
    fn zero_section_obstruction_is_free() {
        let r = plane();
        let model = KuranishiModel::new("K", r.clone(), vec![r.zero(), r.zero()]).unwrap();
        let pot = induced_pot(&model).unwrap();
        let free = FpModule::free(model.locus.clone(), 2);
        assert!(pot.obstruction.module.prune().presentation_eq(&free));
    }

    #[test]
    fn normal_cone_of_regular_sequence_is_whole_bundle() {
        let r = plane();
        let model = KuranishiModel::new(
            "K",
            r.clone(),
            vec![r.parse("x").unwrap(), r.parse("y").unwrap()],
        )
        .unwrap();
        let cone = normal_cone(&model).unwrap();
        assert!(
            cone.rees_part.iter().all(|p| {
                // everything in the rees part reduces to zero modulo the locus
                let chart = model_chart(&model).unwrap();
                cone.ideal_on_chart(&model, &chart).unwrap().is_empty() && !p.is_zero()
            }) || cone.rees_part.is_empty()
        );
    }

    #[test]
    fn normal_cone_of_fat_point_is_whole_line() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x^2").unwrap()]).unwrap();
        let cone = normal_cone(&model).unwrap();
        let chart = model_chart(&model).unwrap();
        assert!(cone.ideal_on_chart(&model, &chart).unwrap().is_empty());
    }

    #[test]
    fn normal_cone_with_embedded_structure() {
        // section (x^2, x*y) on the plane: the elimination finds the Rees
        // relation between the two fiber variables
        let r = plane();
        let model = KuranishiModel::new(
            "K",
            r.clone(),
            vec![r.parse("x^2").unwrap(), r.parse("x*y").unwrap()],
        )
        .unwrap();
        let cone = normal_cone(&model).unwrap();
        assert_eq!(cone.rees_part.len(), 1);
        let g = &cone.rees_part[0];
        // y*y1 - x*y2 up to sign and normalization
        let vars: Vec<String> = cone.ambient_total.vars().to_vec();
        let want = Polynomial::parse("y*y1 - x*y2", &vars).unwrap();
        let order = cone.ambient_total.order().clone();
        let gm = g.monic(&order);
        assert!(gm.sub(&want.monic(&order)).is_zero());
    }

    #[test]
    fn virtual_class_of_transverse_point() {
        let r = plane();
        let model = KuranishiModel::new(
            "K",
            r.clone(),
            vec![r.parse("x").unwrap(), r.parse("y").unwrap()],
        )
        .unwrap();
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert_eq!(class.euler_characteristic().unwrap(), 1);
    }

    #[test]
    fn virtual_class_of_fat_point() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x^2").unwrap()]).unwrap();
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert_eq!(class.euler_characteristic().unwrap(), 2);
    }

    #[test]
    fn virtual_class_of_two_reduced_points() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x^2 - x").unwrap()]).unwrap();
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert_eq!(class.euler_characteristic().unwrap(), 2);
        // two reduced points: the obstruction sheaf vanishes
        let pot = induced_pot(&model).unwrap();
        assert!(pot.obstruction.module.is_zero_module());
    }

    #[test]
    fn virtual_class_of_trivial_bundle_cancels() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.zero()]).unwrap();
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert!(class.is_zero_class_syntactic());
    }

    #[test]
    fn compat_identity() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x^2").unwrap()]).unwrap();
        let data = OmegaCompat {
            fine: model.clone(),
            coarse: model.clone(),
            phi: RingMap::identity(r.clone()),
            eta: PolyMatrix::identity(1, 1),
            right_inverse: None,
        };
        let report = check_omega_compat(&data).unwrap();
        assert!(report.passed());
        let psi = build_psi(&data).unwrap();
        assert!(psi.quasi_iso);
        assert!(psi.h1_matches_eta);
    }

    #[test]
    fn compat_pair_with_extra_direction() {
        // (A^1, O, x^2) against (A^2, O^2, (x^2, y)) via y = 0
        let v = line();
        let w = plane();
        let fine = KuranishiModel::new("K", v.clone(), vec![v.parse("x^2").unwrap()]).unwrap();
        let coarse = KuranishiModel::new(
            "L",
            w.clone(),
            vec![w.parse("x^2").unwrap(), w.parse("y").unwrap()],
        )
        .unwrap();
        let phi =
            RingMap::new(w.clone(), v.clone(), vec![v.parse("x").unwrap(), v.zero()]).unwrap();
        let eta = PolyMatrix::new(1, 2, vec![v.one(), v.zero()]);
        let data = OmegaCompat {
            fine,
            coarse,
            phi,
            eta,
            right_inverse: None,
        };
        let report = check_omega_compat(&data).unwrap();
        assert!(report.passed(), "{:?}", report.detail);
        let psi = build_psi(&data).unwrap();
        assert!(psi.quasi_iso);
        assert!(psi.h1_matches_eta);
    }

    #[test]
    fn compat_fails_for_zero_eta() {
        let r = line();
        let model = KuranishiModel::new("K", r.clone(), vec![r.parse("x^2").unwrap()]).unwrap();
        let data = OmegaCompat {
            fine: model.clone(),
            coarse: model.clone(),
            phi: RingMap::identity(r.clone()),
            eta: PolyMatrix::zero(1, 1, 1),
            right_inverse: None,
        };
        let report = check_omega_compat(&data).unwrap();
        assert!(!report.eta_surjective);
        assert!(!report.eta_matches_sections);
        assert!(!report.passed());
    }

    #[test]
    fn d_critical_chart_is_symmetric() {
        // f = x^3: the model (A^1, Ω, df) has Hessian presentation equal
        // to the cotangent presentation of the locus
        let r = line();
        let f = r.parse("x^3").unwrap();
        let model = KuranishiModel::d_critical("K", r.clone(), &f).unwrap();
        assert_eq!(model.section, vec![r.parse("3*x^2").unwrap()]);
        let pot = induced_pot(&model).unwrap();
        // obstruction = cokernel of the Hessian (6x); cotangent of the
        // locus = cokernel of d(3x^2) = (6x): same presentation
        let locus = model.locus.clone();
        let hessian_coker = FpModule::cyclic(locus.clone(), &[locus.parse("6*x").unwrap()]);
        assert!(pot.obstruction.module.presentation_eq(&hessian_coker));
        // symmetric data: the cotangent presentation agrees with the
        // obstruction presentation
        assert!(pot.cotangent.presentation_eq(&pot.obstruction.module));
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert_eq!(class.euler_characteristic().unwrap(), 2);
    }

    #[test]
    fn model_over_localized_ambient() {
        // ambient D(x) in the line: the section x^2 - x cuts out only the
        // point x = 1 there
        let r = line();
        let (ambient, map) = RingPresentation::localize(&r, &r.parse("x").unwrap());
        let section = map.apply(&r.parse("x^2 - x").unwrap());
        let model = KuranishiModel::new("K", ambient, vec![section]).unwrap();
        assert_eq!(crate::hilbert::length(&FpModule::free(model.locus.clone(), 1)), Some(1));
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert_eq!(class.euler_characteristic().unwrap(), 1);
        // regular point: no obstruction
        let pot = induced_pot(&model).unwrap();
        assert!(pot.obstruction.module.is_zero_module());
    }

    #[test]
    fn zero_section_over_a_point_has_cancelling_class() {
        // zero-variable ambient: a single reduced point with a rank-2
        // zero section; the class is the alternating sum of binomials
        let point = RingPresentation::polynomial(Vec::new(), MonomialOrder::grevlex(0));
        let model =
            KuranishiModel::new("K", point.clone(), vec![point.zero(), point.zero()]).unwrap();
        let (class, _) = virtual_sheaf_chart(&model).unwrap();
        assert_eq!(class.euler_characteristic().unwrap(), 0);
        let ob = obstruction_sheaf(&model).unwrap();
        assert_eq!(crate::hilbert::length(&ob.module), Some(2));
    }
}
