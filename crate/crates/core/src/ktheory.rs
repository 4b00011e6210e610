//! K-classes, the zero-section Gysin map on sheaf stacks, the Gysin map of
//! a regular embedding, and their commutation check.

use crate::chart::{glue_koszul, koszul_homology_of_value, LocalChart, SheafOnF};
use crate::complex::{koszul_complex, ChainComplex};
use crate::error::{Error, Result};
use crate::hilbert::{hilbert_series, length};
use crate::matrix::PolyMatrix;
use crate::module::{base_change, tensor, FpModule, ModuleMap};
use crate::poly::Polynomial;
use crate::ring::Ring;
use crate::space::SpacePresentation;
use std::collections::BTreeMap;
use std::fmt;

/// A formal integer combination of module handles over one ring.
#[derive(Debug, Clone)]
pub struct KClass {
    ring: Ring,
    terms: Vec<(i64, FpModule)>,
}

/// How strongly two classes were identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqStrength {
    /// identical presentations after cancellation
    Syntactic,
    /// equal after cancelling structurally equal terms of opposite sign
    Witnessed,
    /// invariant vectors (length, Hilbert data) agree
    Invariant,
}

/// Invariant data extracted from a class: a signed length when every
/// constituent has finite length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KInvariant {
    pub euler: Option<i64>,
    pub piece_lengths: Vec<(i64, Option<u64>)>,
}

impl KClass {
    pub fn zero(ring: Ring) -> KClass {
        KClass {
            ring,
            terms: Vec::new(),
        }
    }

    pub fn of(module: FpModule) -> KClass {
        let ring = module.ring().clone();
        KClass {
            ring,
            terms: vec![(1, module)],
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &[(i64, FpModule)] {
        &self.terms
    }

    pub fn add_term(&mut self, sign: i64, module: FpModule) {
        if sign == 0 || module.is_zero_module() {
            return;
        }
        assert_eq!(module.ring(), &self.ring);
        self.terms.push((sign, module));
    }

    pub fn negate(&self) -> KClass {
        KClass {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(s, m)| (-s, m.clone())).collect(),
        }
    }

    pub fn add(&self, other: &KClass) -> KClass {
        assert_eq!(self.ring, other.ring);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        KClass {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// Cancels pairs of structurally equal terms with opposite signs.
    /// Returns the simplified class and whether anything cancelled.
    pub fn simplify(&self) -> (KClass, bool) {
        let mut live: Vec<(i64, FpModule)> = Vec::new();
        let mut cancelled = false;
        'outer: for (s, m) in &self.terms {
            for (ls, lm) in live.iter_mut() {
                if *ls != 0 && ls.signum() != s.signum() && lm.presentation_eq(m) {
                    *ls += s;
                    cancelled = true;
                    continue 'outer;
                }
            }
            live.push((*s, m.clone()));
        }
        let terms: Vec<(i64, FpModule)> = live.into_iter().filter(|(s, _)| *s != 0).collect();
        (
            KClass {
                ring: self.ring.clone(),
                terms,
            },
            cancelled,
        )
    }

    pub fn is_zero_class_syntactic(&self) -> bool {
        self.simplify().0.terms.is_empty()
    }

    pub fn invariant(&self) -> KInvariant {
        // structurally equal terms of opposite sign cancel first, so a
        // witnessed zero has a well-defined Euler characteristic
        let (simplified, _) = self.simplify();
        let piece_lengths: Vec<(i64, Option<u64>)> = simplified
            .terms
            .iter()
            .map(|(s, m)| (*s, length(m)))
            .collect();
        let euler = piece_lengths
            .iter()
            .map(|(s, l)| l.map(|v| s * v as i64))
            .sum::<Option<i64>>();
        KInvariant {
            euler,
            piece_lengths,
        }
    }

    /// Euler characteristic when every constituent has finite length.
    pub fn euler_characteristic(&self) -> Result<i64> {
        self.invariant().euler.ok_or(Error::InfiniteLength)
    }

    /// Compares two classes, reporting the strength of the identification.
    pub fn compare(&self, other: &KClass) -> Option<EqStrength> {
        let (a, _) = self.simplify();
        let (b, _) = other.simplify();
        let syntactic = a.terms.len() == b.terms.len()
            && a.terms
                .iter()
                .zip(&b.terms)
                .all(|((s1, m1), (s2, m2))| s1 == s2 && m1.presentation_eq(m2));
        if syntactic {
            return Some(EqStrength::Syntactic);
        }
        let diff = self.add(&other.negate());
        if diff.simplify().0.terms.is_empty() {
            return Some(EqStrength::Witnessed);
        }
        let (ia, ib) = (self.invariant(), other.invariant());
        if ia.euler.is_some() && ia.euler == ib.euler {
            return Some(EqStrength::Invariant);
        }
        None
    }

    /// Signed truncated Hilbert series, when every term is graded with the
    /// given weights.
    pub fn hilbert_vector(&self, var_weights: &[u32], bound: i64) -> Result<Vec<i64>> {
        let mut acc = vec![0i64; (bound + 1).max(0) as usize];
        for (s, m) in &self.terms {
            let graded = m.clone().with_grading(crate::module::Grading {
                gen_weights: vec![0; m.gens()],
                var_weights: var_weights.to_vec(),
            });
            let coeffs = hilbert_series(&graded, bound)?;
            for (i, c) in coeffs.iter().enumerate() {
                acc[i] += s * *c as i64;
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, m)) in self.terms.iter().enumerate() {
            if i == 0 {
                if *s < 0 {
                    write!(f, "-")?;
                }
            } else if *s < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mult = s.abs();
            if mult != 1 {
                write!(f, "{}*", mult)?;
            }
            write!(f, "[gens={}]", m.gens())?;
        }
        Ok(())
    }
}

/// The Gysin image of a sheaf on the sheaf stack through a single chart:
/// the alternating sum of chart-level Koszul homologies over the base.
pub fn gysin_chart(q: &LocalChart, a: &SheafOnF) -> Result<KClass> {
    let value = a.value_on(q)?;
    gysin_chart_value(q, &value)
}

pub fn gysin_chart_value(q: &LocalChart, value: &FpModule) -> Result<KClass> {
    let mut class = KClass::zero(q.base.clone());
    for i in 0..=q.rank {
        let h = koszul_homology_of_value(q, value, i)?;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        class.add_term(sign, h.base_module.prune());
    }
    Ok(class)
}

/// Gysin classes over a cover of charts: one class per chart base,
/// glued consistency checked degree by degree.
pub struct GysinFamily {
    pub charts: Vec<LocalChart>,
    pub classes: Vec<KClass>,
    /// per degree, the glued homology data (kept for inspection)
    pub degrees: Vec<crate::chart::GluedKoszul>,
}

pub fn gysin(charts: &[LocalChart], a: &SheafOnF) -> Result<GysinFamily> {
    if charts.is_empty() {
        return Err(Error::CoverIncomplete("no charts given".into()));
    }
    let max_rank = charts.iter().map(|q| q.rank).max().unwrap();
    let mut degrees = Vec::new();
    let mut classes: Vec<KClass> = charts
        .iter()
        .map(|q| KClass::zero(q.base.clone()))
        .collect();
    for i in 0..=max_rank {
        let glued = glue_koszul(charts, a, i)?;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        for (k, m) in glued.modules.iter().enumerate() {
            classes[k].add_term(sign, m.prune());
        }
        degrees.push(glued);
    }
    Ok(GysinFamily {
        charts: charts.to_vec(),
        classes,
        degrees,
    })
}

impl GysinFamily {
    /// Euler characteristic by inclusion–exclusion over the chart cover;
    /// requires finite length on every intersection.
    pub fn euler_characteristic(&self) -> Result<i64> {
        let n = self.charts.len();
        let mut total: i64 = 0;
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
            let sign = if subset.len() % 2 == 1 { 1 } else { -1 };
            let chi = self.chi_on_intersection(&subset)?;
            total += sign * chi;
        }
        Ok(total)
    }

    fn chi_on_intersection(&self, subset: &[usize]) -> Result<i64> {
        if subset.len() == 1 {
            return self.classes[subset[0]].euler_characteristic();
        }
        let refs: Vec<&LocalChart> = subset.iter().map(|&k| &self.charts[k]).collect();
        let (ring, maps) = crate::chart::chart_intersection(&refs)?;
        if ring.is_zero_ring() {
            return Ok(0);
        }
        // restrict the first chart's class to the intersection
        let class = &self.classes[subset[0]];
        let mut chi: i64 = 0;
        for (s, m) in class.terms() {
            let restricted = base_change(m, &maps[0]);
            let l = length(&restricted).ok_or(Error::InfiniteLength)?;
            chi += s * l as i64;
        }
        Ok(chi)
    }
}

/// Report of a chart-level short-exact-sequence additivity check.
#[derive(Debug)]
pub struct SesReport {
    pub exact: bool,
    pub additivity_holds: bool,
    pub chi_sub: Option<i64>,
    pub chi_mid: Option<i64>,
    pub chi_quot: Option<i64>,
    pub detail: String,
}

/// Verifies chart-level exactness of `0 -> A -> B -> C -> 0` given by
/// module maps over the chart total ring, then checks that the Gysin
/// images add up.
pub fn ses_additivity_check(
    q: &LocalChart,
    inject: &ModuleMap,
    surject: &ModuleMap,
) -> Result<SesReport> {
    if inject.ring() != &q.total || surject.ring() != &q.total {
        return Err(Error::RingMismatch(
            "sequence is not over the chart total ring".into(),
        ));
    }
    if inject.target != surject.source {
        return Err(Error::NotExact("maps are not composable".into()));
    }
    // exactness: injectivity, surjectivity, im = ker
    let mut detail = String::new();
    let mut exact = true;
    if !inject.is_injective() {
        exact = false;
        detail.push_str("first map is not injective; ");
    }
    if !surject.is_surjective() {
        exact = false;
        detail.push_str("second map is not surjective; ");
    }
    let composed = surject.compose(inject)?;
    if !composed.is_zero_map() {
        exact = false;
        detail.push_str("composite is nonzero; ");
    }
    // kernel of the surjection is contained in the image of the injection
    let (_, ker_incl) = surject.kernel();
    let mut modulo = inject.target.relations().columns();
    modulo.extend(crate::module::ring_relation_vectors(
        &q.total,
        inject.target.gens(),
    ));
    for j in 0..ker_incl.matrix.ncols {
        let col = ker_incl.matrix.column(j);
        if crate::module::lift_through(
            &q.total,
            &inject.matrix.columns(),
            &modulo,
            inject.target.gens(),
            &col,
        )
        .is_none()
        {
            exact = false;
            detail.push_str("kernel of the quotient map is not in the image; ");
            break;
        }
    }
    if !exact {
        return Ok(SesReport {
            exact,
            additivity_holds: false,
            chi_sub: None,
            chi_mid: None,
            chi_quot: None,
            detail,
        });
    }
    let class_sub = gysin_chart_value(q, &inject.source)?;
    let class_mid = gysin_chart_value(q, &inject.target)?;
    let class_quot = gysin_chart_value(q, &surject.target)?;
    let sum = class_sub.add(&class_quot);
    let additivity_holds = class_mid.compare(&sum).is_some();
    Ok(SesReport {
        exact,
        additivity_holds,
        chi_sub: class_sub.invariant().euler,
        chi_mid: class_mid.invariant().euler,
        chi_quot: class_quot.invariant().euler,
        detail: if additivity_holds {
            "long exact sequence of Koszul homology".into()
        } else {
            "additivity failed".into()
        },
    })
}

/// A regular embedding with a chosen finite free resolution of the
/// structure sheaf of the center over the ambient ring.
#[derive(Debug, Clone)]
pub struct RegularEmbeddingData {
    pub ambient: Ring,
    pub center_ideal: Vec<Polynomial>,
    pub resolution: ChainComplex,
}

impl RegularEmbeddingData {
    /// Koszul resolution of a regular sequence; exactness is verified.
    pub fn from_regular_sequence(
        ambient: Ring,
        seq: Vec<Polynomial>,
    ) -> Result<RegularEmbeddingData> {
        let resolution = koszul_complex(seq.len(), &seq, &ambient)?;
        for i in 1..=seq.len() {
            if !resolution.homology(i).module.is_zero_module() {
                return Err(Error::InvalidInput(
                    "sequence is not regular: resolution is not exact".into(),
                ));
            }
        }
        Ok(RegularEmbeddingData {
            ambient,
            center_ideal: seq,
            resolution,
        })
    }

    /// Jacobian smoothness check for the center: the critical minors must
    /// generate the unit ideal modulo the center.
    pub fn center_is_smooth(&self) -> bool {
        let ring = &self.ambient;
        let codim = self.center_ideal.len();
        let nvars: Vec<usize> = ring.base_vars();
        // Jacobian rows per equation
        let jac: Vec<Vec<Polynomial>> = self
            .center_ideal
            .iter()
            .map(|g| nvars.iter().map(|&v| ring.derivative(g, v)).collect())
            .collect();
        let mut gens: Vec<Polynomial> = self.center_ideal.clone();
        gens.extend(ring.relations().generators().iter().cloned());
        // all codim-size minors
        let rows: Vec<usize> = (0..codim).collect();
        let col_sets = crate::complex::exterior_basis(nvars.len(), codim);
        let mut minor_gens = gens.clone();
        for cols in &col_sets {
            let sub: Vec<Vec<Polynomial>> = rows
                .iter()
                .map(|&r| cols.iter().map(|&c| jac[r][c].clone()).collect())
                .collect();
            minor_gens.push(det_small(&sub, ring));
        }
        let order = ring.order();
        let gb = crate::groebner::buchberger(&minor_gens, order);
        crate::groebner::reduces_to_zero(&ring.one(), &gb, order)
    }
}

fn det_small(m: &[Vec<Polynomial>], ring: &Ring) -> Polynomial {
    let n = m.len();
    if n == 0 {
        return ring.one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ring.zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| m[r][c].clone())
                    .collect()
            })
            .collect();
        let sub = det_small(&minor, ring);
        let term = m[0][j].mul(&sub);
        acc = if j % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    ring.reduce(&acc)
}

/// The Gysin image of a module along a regular embedding: the alternating
/// sum of homologies of the restricted resolution tensored with the
/// module. The module lives over a quotient presentation of the ambient.
pub fn regular_gysin(v: &RegularEmbeddingData, a: &FpModule) -> Result<KClass> {
    let ring = a.ring().clone();
    if ring.vars() != v.ambient.vars() {
        return Err(Error::RingMismatch(
            "module ring must be a quotient presentation of the ambient".into(),
        ));
    }
    let images = (0..v.ambient.nvars()).map(|i| ring.var(i)).collect();
    let restrict = crate::ring::RingMap::new(v.ambient.clone(), ring.clone(), images)?;
    let restricted = restrict_complex(&v.resolution, &restrict)?;
    let complex = restricted.tensor_with(a)?;
    let mut class = KClass::zero(ring);
    for i in 0..restricted.len() {
        let h = complex.homology(i);
        let sign = if i % 2 == 0 { 1 } else { -1 };
        class.add_term(sign, h.module.prune());
    }
    Ok(class)
}

fn restrict_complex(c: &ChainComplex, rm: &crate::ring::RingMap) -> Result<ChainComplex> {
    let modules: Vec<FpModule> = c.modules().iter().map(|m| base_change(m, rm)).collect();
    let mut diffs = Vec::new();
    for i in 0..c.len() - 1 {
        let d = c.diff_into(i).unwrap();
        diffs.push(ModuleMap::new(
            modules[i + 1].clone(),
            modules[i].clone(),
            d.matrix.map(|p| rm.apply(p)),
        )?);
    }
    ChainComplex::new(modules, diffs)
}

/// Report of the commutation check between the chart-level zero-section
/// Gysin map and a regular-embedding Gysin map.
#[derive(Debug)]
pub struct CommuteReport {
    pub zero_section_first: KInvariant,
    pub embedding_first: KInvariant,
    pub agree: bool,
}

/// Computes both evaluation orders on one chart and compares invariants.
pub fn gysin_commute_check(
    q: &LocalChart,
    v: &RegularEmbeddingData,
    a: &SheafOnF,
) -> Result<CommuteReport> {
    let value = a.value_on(q)?;
    let base = q.base.clone();

    // restriction of the resolution to the base and to the total ring
    let images_base = (0..v.ambient.nvars()).map(|i| base.var(i)).collect();
    let to_base = crate::ring::RingMap::new(v.ambient.clone(), base.clone(), images_base)?;
    let res_base = restrict_complex(&v.resolution, &to_base)?;
    let to_total = |p: &Polynomial| q.to_total.apply(&to_base.apply(p));
    let res_total = {
        let modules: Vec<FpModule> = v
            .resolution
            .modules()
            .iter()
            .map(|m| FpModule::free(q.total.clone(), m.gens()))
            .collect();
        let mut diffs = Vec::new();
        for i in 0..v.resolution.len() - 1 {
            let d = v.resolution.diff_into(i).unwrap();
            diffs.push(ModuleMap::new(
                modules[i + 1].clone(),
                modules[i].clone(),
                d.matrix.map(|p| to_total(p)),
            )?);
        }
        ChainComplex::new(modules, diffs)?
    };

    // order one: restrict first (resolution ⊗ value over the total ring),
    // then zero-section Gysin of each homology
    let tensored = res_total.tensor_with(&value)?;
    let mut inv_first: Vec<(i64, Option<u64>)> = Vec::new();
    let mut chi_first: Option<i64> = Some(0);
    for j in 0..res_total.len() {
        let hj = tensored.homology(j);
        let sign_j = if j % 2 == 0 { 1 } else { -1 };
        for i in 0..=q.rank {
            let sign = sign_j * if i % 2 == 0 { 1 } else { -1 };
            let h = koszul_homology_of_value(q, &hj.module, i)?;
            let l = length(&h.base_module);
            inv_first.push((sign, l));
            chi_first = match (chi_first, l) {
                (Some(acc), Some(v)) => Some(acc + sign * v as i64),
                _ => None,
            };
        }
    }

    // order two: zero-section Gysin first, then the embedding Gysin of
    // each Koszul homology over the base
    let mut inv_second: Vec<(i64, Option<u64>)> = Vec::new();
    let mut chi_second: Option<i64> = Some(0);
    for i in 0..=q.rank {
        let h = koszul_homology_of_value(q, &value, i)?;
        let sign_i = if i % 2 == 0 { 1 } else { -1 };
        let tensored = res_base.tensor_with(&h.base_module)?;
        for j in 0..res_base.len() {
            let sign = sign_i * if j % 2 == 0 { 1 } else { -1 };
            let hj = tensored.homology(j);
            let l = length(&hj.module);
            inv_second.push((sign, l));
            chi_second = match (chi_second, l) {
                (Some(acc), Some(v)) => Some(acc + sign * v as i64),
                _ => None,
            };
        }
    }

    let zero_section_first = KInvariant {
        euler: chi_first,
        piece_lengths: inv_first,
    };
    let embedding_first = KInvariant {
        euler: chi_second,
        piece_lengths: inv_second,
    };
    let agree =
        zero_section_first.euler.is_some() && zero_section_first.euler == embedding_first.euler;
    Ok(CommuteReport {
        zero_section_first,
        embedding_first,
        agree,
    })
}

/// Classical Koszul pullback on a tautological chart of a free sheaf:
/// the homologies of the Koszul complex tensored with the value, computed
/// without the chart machinery. Used as the reference for vector-bundle
/// consistency.
pub fn classical_koszul_pullback(
    base: &Ring,
    rank: usize,
    value_on_total: &FpModule,
) -> Result<Vec<FpModule>> {
    let (total, _, fiber_vars) = crate::complex::total_space_ring(base, rank);
    if value_on_total.ring() != &total {
        return Err(Error::RingMismatch(
            "value must be over the standard total ring".into(),
        ));
    }
    let section: Vec<Polynomial> = fiber_vars.iter().map(|&i| total.var(i)).collect();
    let k = koszul_complex(rank, &section, &total)?;
    let complex = k.tensor_with(value_on_total)?;
    let zs = {
        let mut images: Vec<Polynomial> = Vec::new();
        for i in 0..total.nvars() {
            if fiber_vars.contains(&i) {
                images.push(base.zero());
            } else {
                images.push(base.var(i));
            }
        }
        crate::ring::RingMap::new_unchecked(total.clone(), base.clone(), images)
    };
    let mut out = Vec::new();
    for i in 0..=rank {
        let h = complex.homology(i).module;
        out.push(base_change(&h, &zs).prune());
    }
    Ok(out)
}

/// Per-piece K-class family over a space, with a twist by free modules.
pub fn twist_class(class: &KClass, twist_rank: usize) -> KClass {
    let mut out = KClass::zero(class.ring().clone());
    for (s, m) in class.terms() {
        let free = FpModule::free(class.ring().clone(), twist_rank);
        out.add_term(*s, tensor(m, &free));
    }
    out
}

/// Builds the tautological chart of a free sheaf of the given rank.
pub fn tautological_chart(name: &str, base: &Ring, rank: usize) -> Result<LocalChart> {
    LocalChart::on_single_piece(
        name,
        base.clone(),
        FpModule::free(base.clone(), rank),
        rank,
        PolyMatrix::identity(rank, base.nvars()),
    )
}

/// The value of a trivially glued sheaf on the space built from one ring.
pub fn single_space(ring: &Ring) -> crate::space::Space {
    SpacePresentation::single(ring.clone())
}

/// Stable rendering of an invariant vector.
pub fn render_invariant(inv: &KInvariant) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (s, l) in &inv.piece_lengths {
        let ls = match l {
            Some(v) => v.to_string(),
            None => "inf".into(),
        };
        parts.push(format!("{}{}", if *s >= 0 { "+" } else { "-" }, ls));
    }
    let chi = match inv.euler {
        Some(v) => v.to_string(),
        None => "undefined".into(),
    };
    format!("[{}] chi={}", parts.join(" "), chi)
}

/// Groups signed lengths by sign for reporting.
pub fn signed_lengths(inv: &KInvariant) -> BTreeMap<i64, Vec<Option<u64>>> {
    let mut map: BTreeMap<i64, Vec<Option<u64>>> = BTreeMap::new();
    for (s, l) in &inv.piece_lengths {
        map.entry(*s).or_default().push(*l);
    }
    map
}
