//! Local charts on a sheaf stack, morphisms and common roofs, chart-level
//! Koszul homology, comparison isomorphisms and descent gluing.
//!
//! A chart carries a base ring, a free bundle of some rank surjecting onto
//! the restriction of the defining sheaf, and the total-space ring of the
//! bundle (base ring plus fiber variables). Koszul homology on a chart is
//! annihilated by the fiber variables, which is what lets it be
//! re-presented over the base.

use crate::complex::{koszul_complex, ChainComplex, HomologyData};
use crate::error::{Error, Result};
use crate::groebner::{buchberger, reduces_to_zero};
use crate::matrix::PolyMatrix;
use crate::modgb::{vp_zero, VecPoly};
use crate::module::{base_change, ring_relation_vectors, FpModule, ModuleMap};
use crate::poly::Polynomial;
use crate::ring::{Ring, RingMap, RingPresentation};
use crate::space::{build_tower, Space, SpaceKind, SpacePresentation};
use itertools::Itertools;
use std::collections::BTreeMap;

/// A local chart: an étale-local base with a free bundle surjecting onto
/// the sheaf. Bases are cut out of space pieces by principal-open
/// localization towers.
#[derive(Debug, Clone)]
pub struct LocalChart {
    pub name: String,
    pub space: Space,
    pub piece: usize,
    /// localizations applied after the piece ring; element `k` lives over
    /// stage `k-1`
    pub tower: Vec<Polynomial>,
    pub base: Ring,
    pub from_piece: RingMap,
    /// the sheaf restricted to the base
    pub sheaf_value: FpModule,
    /// matrix of the bundle surjection: sheaf generators × rank
    pub surjection: PolyMatrix,
    pub rank: usize,
    pub total: Ring,
    pub to_total: RingMap,
    pub fiber_vars: Vec<usize>,
}

impl LocalChart {
    /// Chart whose base is a localization tower over a space piece;
    /// `sheaf_on_piece` is the sheaf value on that piece.
    pub fn new(
        name: impl Into<String>,
        space: Space,
        piece: usize,
        tower: Vec<Polynomial>,
        sheaf_on_piece: &FpModule,
        rank: usize,
        surjection: PolyMatrix,
    ) -> Result<LocalChart> {
        let piece_ring = space.piece(piece).clone();
        if sheaf_on_piece.ring() != &piece_ring {
            return Err(Error::RingMismatch(
                "sheaf value is not over the piece ring".into(),
            ));
        }
        let (base, from_piece) = RingPresentation::localize_all(&piece_ring, &tower);
        if base.is_zero_ring() {
            return Err(Error::EmptyLocalization(format!(
                "chart `{}` has empty base",
                name.into()
            )));
        }
        let sheaf_value = base_change(sheaf_on_piece, &from_piece);
        LocalChart::on_base(
            name,
            space,
            piece,
            tower,
            base,
            from_piece,
            sheaf_value,
            rank,
            surjection,
        )
    }

    /// Chart on a space consisting of a single affine piece.
    pub fn on_single_piece(
        name: impl Into<String>,
        ring: Ring,
        sheaf_value: FpModule,
        rank: usize,
        surjection: PolyMatrix,
    ) -> Result<LocalChart> {
        let space = SpacePresentation::single(ring.clone());
        let from_piece = RingMap::identity(ring);
        LocalChart::on_base(
            name,
            space,
            0,
            Vec::new(),
            from_piece.source.clone(),
            from_piece,
            sheaf_value,
            rank,
            surjection,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn on_base(
        name: impl Into<String>,
        space: Space,
        piece: usize,
        tower: Vec<Polynomial>,
        base: Ring,
        from_piece: RingMap,
        sheaf_value: FpModule,
        rank: usize,
        surjection: PolyMatrix,
    ) -> Result<LocalChart> {
        let name = name.into();
        if surjection.nrows != sheaf_value.gens() || surjection.ncols != rank {
            return Err(Error::ShapeMismatch(format!(
                "chart `{}`: surjection matrix is {}x{}, expected {}x{}",
                name,
                surjection.nrows,
                surjection.ncols,
                sheaf_value.gens(),
                rank
            )));
        }
        // surjectivity: the cokernel of free^rank -> F|_U must vanish
        let free = FpModule::free(base.clone(), rank);
        let surj = ModuleMap::new(free, sheaf_value.clone(), surjection.clone())?;
        if !surj.is_surjective() {
            return Err(Error::InvalidInput(format!(
                "chart `{}`: bundle map is not surjective onto the sheaf",
                name
            )));
        }
        let names = base.fresh_names("y", rank);
        let total = RingPresentation::extend(&base, names);
        let fiber_vars: Vec<usize> = (base.nvars()..base.nvars() + rank).collect();
        let images = (0..base.nvars()).map(|i| total.var(i)).collect();
        let to_total = RingMap::new_unchecked(base.clone(), total.clone(), images);
        Ok(LocalChart {
            name,
            space,
            piece,
            tower,
            base,
            from_piece,
            sheaf_value,
            surjection,
            rank,
            total,
            to_total,
            fiber_vars,
        })
    }

    pub fn fiber_polys(&self) -> Vec<Polynomial> {
        self.fiber_vars.iter().map(|&i| self.total.var(i)).collect()
    }

    /// The projection `O_E -> O_U` killing the fiber variables.
    pub fn zero_section_map(&self) -> RingMap {
        let mut images: Vec<Polynomial> = Vec::with_capacity(self.total.nvars());
        for i in 0..self.total.nvars() {
            if self.fiber_vars.contains(&i) {
                images.push(self.base.zero());
            } else {
                images.push(self.base.var(i));
            }
        }
        RingMap::new_unchecked(self.total.clone(), self.base.clone(), images)
    }

    /// The Koszul complex of the tautological section over the total ring.
    pub fn koszul(&self) -> Result<ChainComplex> {
        koszul_complex(self.rank, &self.fiber_polys(), &self.total)
    }
}

/// A morphism of local charts: a base localization plus a bundle
/// surjection, with both triangles commuting.
#[derive(Debug, Clone)]
pub struct ChartMorphism {
    pub source: LocalChart,
    pub target: LocalChart,
    /// functions pull back: O_{U'} -> O_U
    pub base_map: RingMap,
    /// bundle surjection E -> ρ*E': target rank × source rank over O_U
    pub bundle_map: PolyMatrix,
}

impl ChartMorphism {
    pub fn new(
        source: LocalChart,
        target: LocalChart,
        base_map: RingMap,
        bundle_map: PolyMatrix,
    ) -> Result<ChartMorphism> {
        if base_map.source != target.base || base_map.target != source.base {
            return Err(Error::RingMismatch(
                "base map endpoints do not match charts".into(),
            ));
        }
        if bundle_map.nrows != target.rank || bundle_map.ncols != source.rank {
            return Err(Error::ShapeMismatch("bundle map has wrong shape".into()));
        }
        // base triangle: over a shared piece the base map must commute
        // with the structure maps from the piece ring
        if std::sync::Arc::ptr_eq(&source.space, &target.space) && source.piece == target.piece {
            for (i, img) in target.from_piece.images().iter().enumerate() {
                let via_target = base_map.apply(img);
                let direct = source.from_piece.images()[i].clone();
                if !source.base.is_zero_elem(&via_target.sub(&direct)) {
                    return Err(Error::InvalidInput("base triangle does not commute".into()));
                }
            }
        }
        // pulled-back sheaf value must agree with the source chart's value
        let pulled = base_change(&target.sheaf_value, &base_map);
        if pulled.gens() != source.sheaf_value.gens() {
            return Err(Error::InvalidInput(
                "pulled-back sheaf presentation does not match the source chart".into(),
            ));
        }
        // bundle triangle: ρ*(r') ∘ r_γ = r
        let pulled_surj = target.surjection.map(|p| base_map.apply(p));
        let composite = pulled_surj.mul(&bundle_map);
        let diff = composite.sub(&source.surjection);
        for j in 0..diff.ncols {
            if !source.sheaf_value.element_is_zero(&diff.column(j)) {
                return Err(Error::InvalidInput(
                    "bundle triangle does not commute".into(),
                ));
            }
        }
        // the bundle map must surject
        let free_src = FpModule::free(source.base.clone(), source.rank);
        let free_tgt = FpModule::free(source.base.clone(), target.rank);
        let bm = ModuleMap::new(free_src, free_tgt, bundle_map.clone())?;
        if !bm.is_surjective() {
            return Err(Error::InvalidInput("bundle map is not surjective".into()));
        }
        Ok(ChartMorphism {
            source,
            target,
            base_map,
            bundle_map,
        })
    }

    /// Restriction morphism: the identity bundle map over a localization.
    pub fn restriction(
        source: LocalChart,
        target: LocalChart,
        base_map: RingMap,
    ) -> Result<ChartMorphism> {
        let rank = target.rank;
        let bundle = PolyMatrix::identity(rank, source.base.nvars());
        ChartMorphism::new(source, target, base_map, bundle)
    }

    /// Ring map between total spaces: base variables through the base map,
    /// target fiber variables to linear forms in source fiber variables.
    pub fn total_map(&self) -> RingMap {
        let src_total = &self.source.total;
        let mut images: Vec<Polynomial> = Vec::with_capacity(self.target.total.nvars());
        for i in 0..self.target.base.nvars() {
            let img = self.base_map.images()[i].clone();
            images.push(self.source.to_total.apply(&img));
        }
        for k in 0..self.target.rank {
            let mut acc = src_total.zero();
            for i in 0..self.source.rank {
                let coef = self.source.to_total.apply(self.bundle_map.at(k, i));
                acc = acc.add(&coef.mul(&src_total.var(self.source.fiber_vars[i])));
            }
            images.push(acc);
        }
        RingMap::new_unchecked(self.target.total.clone(), src_total.clone(), images)
    }

    /// `self ∘ earlier` where `earlier: R -> Q` and `self: Q -> Q'` make
    /// no sense; composition follows sources: `later.compose(earlier)` is
    /// the morphism `earlier.source -> later.target`.
    pub fn compose(later: &ChartMorphism, earlier: &ChartMorphism) -> Result<ChartMorphism> {
        if earlier.target.name != later.source.name {
            return Err(Error::InvalidInput("morphisms are not composable".into()));
        }
        let base_map = earlier.base_map.compose(&later.base_map);
        let pulled = later.bundle_map.map(|p| earlier.base_map.apply(p));
        let bundle = pulled.mul(&earlier.bundle_map);
        ChartMorphism::new(
            earlier.source.clone(),
            later.target.clone(),
            base_map,
            bundle,
        )
    }
}

/// Restricts a chart to the principal open where `f` is invertible.
pub fn restrict_chart(q: &LocalChart, f: &Polynomial) -> Result<(LocalChart, ChartMorphism)> {
    if q.base.is_zero_elem(f) {
        return Err(Error::NilpotentElement(q.base.show(f)));
    }
    let mut tower = q.tower.clone();
    tower.push(f.clone());
    let (new_base, step) = RingPresentation::localize_checked(&q.base, f)?;
    let from_piece = step.compose(&q.from_piece);
    let sheaf_value = base_change(&q.sheaf_value, &step);
    let surjection = q.surjection.map(|p| step.apply(p));
    let restricted = LocalChart::on_base(
        format!("{}|{}", q.name, q.base.show(f)),
        q.space.clone(),
        q.piece,
        tower,
        new_base,
        from_piece,
        sheaf_value,
        q.rank,
        surjection,
    )?;
    let morphism = ChartMorphism::restriction(restricted.clone(), q.clone(), step)?;
    Ok((restricted, morphism))
}

/// A common roof for two charts over the same base: a free bundle
/// surjecting onto their fiber product over the sheaf.
#[derive(Debug, Clone)]
pub struct CommonRoof {
    pub roof: LocalChart,
    pub to_first: ChartMorphism,
    pub to_second: ChartMorphism,
}

/// Generators of the fiber product `E ×_F E'` inside `E ⊕ E'`.
pub fn fiber_product_generators(q: &LocalChart, q2: &LocalChart) -> Result<Vec<VecPoly>> {
    if q.base != q2.base {
        return Err(Error::RingMismatch("roof charts must share a base".into()));
    }
    if q.sheaf_value != q2.sheaf_value {
        return Err(Error::InvalidInput(
            "roof charts must present the same sheaf value".into(),
        ));
    }
    let ring = q.base.clone();
    let f_gens = q.sheaf_value.gens();
    // columns of (r_E | -r_{E'}) as one matrix
    let matrix = q.surjection.hstack(&q2.surjection.map(|p| p.neg()));
    let mut modulo = q.sheaf_value.relations().columns();
    modulo.extend(ring_relation_vectors(&ring, f_gens));
    let raw = crate::modgb::syzygies_modulo(&matrix.columns(), &modulo, f_gens, ring.order());
    // reduce mod ring relations; ring-multiple syzygies are zero here
    Ok(raw
        .into_iter()
        .map(|g| g.iter().map(|p| ring.reduce(p)).collect::<VecPoly>())
        .filter(|g: &VecPoly| !crate::modgb::vp_is_zero(g))
        .collect())
}

/// Builds the roof from explicit generators of (a module surjecting onto)
/// the fiber product.
pub fn build_roof_from_generators(
    q: &LocalChart,
    q2: &LocalChart,
    gens: Vec<VecPoly>,
) -> Result<CommonRoof> {
    let ring = q.base.clone();
    let r1 = q.rank;
    let r2 = q2.rank;
    let _f_gens = q.sheaf_value.gens();
    // every generator must lie in the fiber product
    for g in &gens {
        if g.len() != r1 + r2 {
            return Err(Error::ShapeMismatch(
                "roof generator has wrong length".into(),
            ));
        }
        let first: VecPoly = g[..r1].to_vec();
        let second: VecPoly = g[r1..].to_vec();
        let img1 = q.surjection.apply(&first);
        let img2 = q2.surjection.apply(&second);
        let diff: VecPoly = img1.iter().zip(&img2).map(|(a, b)| a.sub(b)).collect();
        if !q.sheaf_value.element_is_zero(&diff) {
            return Err(Error::InvalidInput(
                "roof generator is not in the fiber product".into(),
            ));
        }
    }
    // the generators must span the fiber product: each canonical kernel
    // generator lifts through them
    let canonical = fiber_product_generators(q, q2)?;
    let modulo = ring_relation_vectors(&ring, r1 + r2);
    let ctx = crate::modgb::LiftContext::new(&gens, &modulo, r1 + r2, ring.order());
    for c in &canonical {
        if !ctx.contains(c) {
            return Err(Error::InvalidInput(
                "roof generators do not span the fiber product".into(),
            ));
        }
    }
    let p = gens.len();
    // roof surjection onto the sheaf: through the first projection
    let first_rows = PolyMatrix::from_columns(
        r1,
        &gens.iter().map(|g| g[..r1].to_vec()).collect::<Vec<_>>(),
        ring.nvars(),
    );
    let second_rows = PolyMatrix::from_columns(
        r2,
        &gens.iter().map(|g| g[r1..].to_vec()).collect::<Vec<_>>(),
        ring.nvars(),
    );
    let surj = q.surjection.mul(&first_rows);
    let roof = LocalChart::on_base(
        format!("roof({},{})", q.name, q2.name),
        q.space.clone(),
        q.piece,
        q.tower.clone(),
        ring.clone(),
        q.from_piece.clone(),
        q.sheaf_value.clone(),
        p,
        surj,
    )?;
    let id_map = RingMap::identity(ring);
    let to_first = ChartMorphism::new(roof.clone(), q.clone(), id_map.clone(), first_rows)?;
    let to_second = ChartMorphism::new(roof.clone(), q2.clone(), id_map, second_rows)?;
    Ok(CommonRoof {
        roof,
        to_first,
        to_second,
    })
}

/// Canonical roof: the free module on the fiber product generators.
pub fn build_roof(q: &LocalChart, q2: &LocalChart) -> Result<CommonRoof> {
    let gens = fiber_product_generators(q, q2)?;
    build_roof_from_generators(q, q2, gens)
}

/// A coherent sheaf on the sheaf stack, given per chart. The closed
/// substack form stores an ideal of the chart's total-space ring; values
/// on derived charts arise by pullback and are checked for consistency.
#[derive(Debug, Clone)]
pub enum SheafOnF {
    /// the whole stack (zero ideal on every chart)
    Full,
    /// the zero section of the chart bundle: the fiber variables; only
    /// consistent across charts of equal rank
    ZeroSection,
    /// closed substack: ideal generators per chart name
    Substack(BTreeMap<String, Vec<Polynomial>>),
    /// assignment form: explicit module per chart name, with optional
    /// compatibility matrices keyed by (source chart, target chart)
    Assignment {
        values: BTreeMap<String, FpModule>,
        compat: BTreeMap<(String, String), PolyMatrix>,
    },
}

impl SheafOnF {
    pub fn substack_on(chart: &LocalChart, gens: Vec<Polynomial>) -> SheafOnF {
        let mut m = BTreeMap::new();
        m.insert(chart.name.clone(), gens);
        SheafOnF::Substack(m)
    }

    pub fn substack(entries: Vec<(&LocalChart, Vec<Polynomial>)>) -> SheafOnF {
        SheafOnF::Substack(
            entries
                .into_iter()
                .map(|(q, gens)| (q.name.clone(), gens))
                .collect(),
        )
    }

    /// The value on a chart when directly available.
    pub fn value_on(&self, q: &LocalChart) -> Result<FpModule> {
        match self {
            SheafOnF::Full => Ok(FpModule::cyclic(q.total.clone(), &[])),
            SheafOnF::ZeroSection => Ok(FpModule::cyclic(q.total.clone(), &q.fiber_polys())),
            SheafOnF::Substack(map) => {
                let gens = map.get(&q.name).ok_or_else(|| {
                    Error::InconsistentSheaf(format!("no value registered on chart `{}`", q.name))
                })?;
                Ok(FpModule::cyclic(q.total.clone(), gens))
            }
            SheafOnF::Assignment { values, .. } => values.get(&q.name).cloned().ok_or_else(|| {
                Error::InconsistentSheaf(format!("no value registered on chart `{}`", q.name))
            }),
        }
    }

    /// The value on the source of a morphism, obtained by pulling back the
    /// target value; when the source also has a registered value the two
    /// are compared and an inconsistency is an error. Returns the source
    /// value together with the compatibility map from the pullback.
    pub fn pull_to_source(&self, gamma: &ChartMorphism) -> Result<(FpModule, ModuleMap)> {
        let total_map = gamma.total_map();
        let target_value = self.value_on(&gamma.target)?;
        let pulled = base_change(&target_value, &total_map);
        match self {
            SheafOnF::Full | SheafOnF::ZeroSection | SheafOnF::Substack(_) => {
                let source_value = match self.value_on(&gamma.source) {
                    Ok(v) => v,
                    Err(_) => pulled.clone(),
                };
                // both are cyclic: the ideals must agree
                if !cyclic_ideals_equal(&pulled, &source_value)? {
                    return Err(Error::InconsistentSheaf(format!(
                        "pullback along `{}` -> `{}` does not match the registered value",
                        gamma.target.name, gamma.source.name
                    )));
                }
                let compat = ModuleMap::new(
                    pulled.clone(),
                    source_value.clone(),
                    PolyMatrix::identity(1, gamma.source.total.nvars()),
                )?;
                Ok((source_value, compat))
            }
            SheafOnF::Assignment { values, compat } => match values.get(&gamma.source.name) {
                None => {
                    let id = ModuleMap::identity(&pulled);
                    Ok((pulled, id))
                }
                Some(v) => {
                    let key = (gamma.source.name.clone(), gamma.target.name.clone());
                    let matrix = compat.get(&key).cloned().unwrap_or_else(|| {
                        PolyMatrix::identity(v.gens(), gamma.source.total.nvars())
                    });
                    let map = ModuleMap::new(pulled, v.clone(), matrix)?;
                    if !map.is_isomorphism() {
                        return Err(Error::InconsistentSheaf(format!(
                            "compatibility map for `{}` -> `{}` is not an isomorphism",
                            gamma.source.name, gamma.target.name
                        )));
                    }
                    Ok((v.clone(), map))
                }
            },
        }
    }

    /// Compatibility of the pullback along `gamma` with an already chosen
    /// value on the source chart: the certified isomorphism from the
    /// pullback onto that value. An inconsistency is an error.
    pub fn compat_into(&self, gamma: &ChartMorphism, value: &FpModule) -> Result<ModuleMap> {
        let total_map = gamma.total_map();
        let target_value = self.value_on(&gamma.target)?;
        let pulled = base_change(&target_value, &total_map);
        let matrix = match self {
            SheafOnF::Assignment { compat, .. } => {
                let key = (gamma.source.name.clone(), gamma.target.name.clone());
                compat
                    .get(&key)
                    .cloned()
                    .unwrap_or_else(|| PolyMatrix::identity(value.gens(), gamma.source.total.nvars()))
            }
            _ => PolyMatrix::identity(value.gens(), gamma.source.total.nvars()),
        };
        let map = ModuleMap::new(pulled, value.clone(), matrix).map_err(|_| {
            Error::InconsistentSheaf(format!(
                "pullback along `{}` -> `{}` is incompatible with the chosen roof value",
                gamma.target.name, gamma.source.name
            ))
        })?;
        if !map.is_isomorphism() {
            return Err(Error::InconsistentSheaf(format!(
                "pullback along `{}` -> `{}` does not match the chosen roof value",
                gamma.target.name, gamma.source.name
            )));
        }
        Ok(map)
    }
}

/// Equality of cyclic presentations as ideals of the same ring.
fn cyclic_ideals_equal(a: &FpModule, b: &FpModule) -> Result<bool> {
    if a.ring() != b.ring() || a.gens() != 1 || b.gens() != 1 {
        return Err(Error::InconsistentSheaf(
            "expected cyclic presentations".into(),
        ));
    }
    let ring = a.ring();
    let order = ring.order();
    let collect = |m: &FpModule| -> Vec<Polynomial> {
        let mut gens: Vec<Polynomial> = m
            .relations()
            .columns()
            .iter()
            .map(|c| c[0].clone())
            .collect();
        gens.extend(ring.relations().generators().iter().cloned());
        buchberger(&gens, order)
    };
    Ok(collect(a) == collect(b))
}

/// Chart-level Koszul homology, over the total ring and re-presented over
/// the chart base.
#[derive(Debug, Clone)]
pub struct ChartHomology {
    pub degree: usize,
    pub value: FpModule,
    pub complex: ChainComplex,
    pub total_data: HomologyData,
    pub base_module: FpModule,
}

/// Homology of the Koszul complex tensored with the sheaf value, as a
/// module over the chart base. Zero for `i` above the bundle rank.
pub fn koszul_homology_chart(q: &LocalChart, a: &SheafOnF, i: usize) -> Result<ChartHomology> {
    let value = a.value_on(q)?;
    koszul_homology_of_value(q, &value, i)
}

pub fn koszul_homology_of_value(
    q: &LocalChart,
    value: &FpModule,
    i: usize,
) -> Result<ChartHomology> {
    if value.ring() != &q.total {
        return Err(Error::RingMismatch(
            "sheaf value is not over the chart total ring".into(),
        ));
    }
    let koszul = q.koszul()?;
    let complex = koszul.tensor_with(value)?;
    if i > q.rank {
        return Ok(ChartHomology {
            degree: i,
            value: value.clone(),
            complex,
            total_data: HomologyData::zero(q.total.clone()),
            base_module: FpModule::zero_module(q.base.clone()),
        });
    }
    let total_data = complex.homology(i);
    // the fiber variables act as zero on Koszul homology; verify and use
    // that to re-present over the base
    let h = &total_data.module;
    for &fv in &q.fiber_vars {
        let y = q.total.var(fv);
        for g in 0..h.gens() {
            let mut v = vp_zero(h.gens(), q.total.nvars());
            v[g] = y.clone();
            if !h.element_is_zero(&v) {
                return Err(Error::InconsistentSheaf(
                    "Koszul homology is not annihilated by the section".into(),
                ));
            }
        }
    }
    let base_module = base_change(h, &q.zero_section_map());
    Ok(ChartHomology {
        degree: i,
        value: value.clone(),
        complex,
        total_data,
        base_module,
    })
}

impl ChartHomology {
    /// Coordinates over the base of the class of a cycle in the tensored
    /// Koszul complex.
    pub fn base_class_of(&self, q: &LocalChart, z: &VecPoly) -> Result<VecPoly> {
        let coords = self
            .total_data
            .class_of(z, self.complex.module(self.degree))?;
        let zs = q.zero_section_map();
        Ok(coords.iter().map(|p| zs.apply(p)).collect())
    }
}

/// The comparison map induced by a chart morphism: from the pullback of
/// the target chart's homology to the source chart's homology, over the
/// source base.
pub struct ComparisonMap {
    pub map: ModuleMap,
    pub source_homology: ChartHomology,
    pub target_homology: ChartHomology,
}

pub fn comparison_map(gamma: &ChartMorphism, a: &SheafOnF, i: usize) -> Result<ComparisonMap> {
    let (source_value, compat) = a.pull_to_source(gamma)?;
    let target_value = a.value_on(&gamma.target)?;
    comparison_map_with_values(gamma, &target_value, &source_value, &compat, i)
}

/// Comparison map with explicitly chosen sheaf values on both charts;
/// `compat` identifies the pullback of `target_value` with `source_value`.
pub fn comparison_map_with_values(
    gamma: &ChartMorphism,
    target_value: &FpModule,
    source_value: &FpModule,
    compat: &ModuleMap,
    i: usize,
) -> Result<ComparisonMap> {
    let target_h = koszul_homology_of_value(&gamma.target, target_value, i)?;
    let source_h = koszul_homology_of_value(&gamma.source, source_value, i)?;
    let pulled = base_change(&target_h.base_module, &gamma.base_map);
    let total_map = gamma.total_map();

    // chain map in degree i: exterior minors of the dual bundle inclusion
    // tensored with the sheaf compatibility map
    let src_rank = gamma.source.rank;
    let tgt_rank = gamma.target.rank;
    let tgt_value_gens = target_h.value.gens();
    let src_value_gens = source_value.gens();
    let src_subsets: Vec<Vec<usize>> = (0..src_rank).combinations(i).collect();
    let tgt_subsets: Vec<Vec<usize>> = (0..tgt_rank).combinations(i).collect();

    let mut cols: Vec<VecPoly> = Vec::new();
    for z in &target_h.total_data.cycle_cols {
        // z is a cycle over the target total ring with one coordinate per
        // (target subset, target value generator)
        let mut w = vp_zero(
            src_subsets.len() * src_value_gens,
            gamma.source.total.nvars(),
        );
        for (tj, tsubset) in tgt_subsets.iter().enumerate() {
            for a_idx in 0..tgt_value_gens {
                let entry = &z[tj * tgt_value_gens + a_idx];
                if entry.is_zero() {
                    continue;
                }
                let pulled_entry = total_map.apply(entry);
                for (sj, ssubset) in src_subsets.iter().enumerate() {
                    let minor = exterior_minor(&gamma.bundle_map, tsubset, ssubset, &gamma.source);
                    if minor.is_zero() {
                        continue;
                    }
                    let minor_t = gamma.source.to_total.apply(&minor);
                    for b_idx in 0..src_value_gens {
                        let c = compat.matrix.at(b_idx, a_idx);
                        if c.is_zero() {
                            continue;
                        }
                        let add = pulled_entry.mul(&minor_t).mul(c);
                        let pos = sj * src_value_gens + b_idx;
                        w[pos] = gamma.source.total.reduce(&w[pos].add(&add));
                    }
                }
            }
        }
        cols.push(source_h.base_class_of(&gamma.source, &w)?);
    }
    let matrix = PolyMatrix::from_columns(
        source_h.base_module.gens(),
        &cols,
        gamma.source.base.nvars(),
    );
    let map = ModuleMap::new(pulled, source_h.base_module.clone(), matrix)?;
    Ok(ComparisonMap {
        map,
        source_homology: source_h,
        target_homology: target_h,
    })
}

/// Minor of the dual bundle inclusion on exterior powers: rows from the
/// target subset, columns from the source subset.
fn exterior_minor(
    bundle: &PolyMatrix,
    tgt_subset: &[usize],
    src_subset: &[usize],
    chart: &LocalChart,
) -> Polynomial {
    let n = tgt_subset.len();
    debug_assert_eq!(n, src_subset.len());
    let nvars = chart.base.nvars();
    if n == 0 {
        return Polynomial::one(nvars);
    }
    // Laplace expansion along the first row; sizes stay tiny
    fn det(m: &[Vec<Polynomial>], nvars: usize) -> Polynomial {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = Polynomial::zero(nvars);
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
            let sub = det(&minor, nvars);
            let signed = if j % 2 == 0 {
                m[0][j].mul(&sub)
            } else {
                m[0][j].mul(&sub).neg()
            };
            acc = acc.add(&signed);
        }
        acc
    }
    let sub: Vec<Vec<Polynomial>> = tgt_subset
        .iter()
        .map(|&r| {
            src_subset
                .iter()
                .map(|&c| bundle.at(r, c).clone())
                .collect()
        })
        .collect();
    chart.base.reduce(&det(&sub, nvars))
}

/// Roof comparison: the composite `h(γ')^{-1} ∘ h(γ)` from the first
/// chart's homology to the second's, both over the common base. Both legs
/// use one shared roof value, so inconsistent sheaf data on the two sides
/// is detected rather than silently mixed.
pub fn roof_comparison(roof: &CommonRoof, a: &SheafOnF, i: usize) -> Result<ModuleMap> {
    let (roof_value, compat_first) = a.pull_to_source(&roof.to_first)?;
    let compat_second = a.compat_into(&roof.to_second, &roof_value)?;
    let first_target_value = a.value_on(&roof.to_first.target)?;
    let second_target_value = a.value_on(&roof.to_second.target)?;
    let via_first = comparison_map_with_values(
        &roof.to_first,
        &first_target_value,
        &roof_value,
        &compat_first,
        i,
    )?;
    let via_second = comparison_map_with_values(
        &roof.to_second,
        &second_target_value,
        &roof_value,
        &compat_second,
        i,
    )?;
    let inv = via_second
        .map
        .inverse()
        .map_err(|_| Error::InconsistentSheaf("roof comparison map is not invertible".into()))?;
    inv.compose(&via_first.map)
}

/// Koszul homology sheaf of degree `i` glued over a cover of charts.
#[derive(Debug)]
pub struct GluedKoszul {
    pub charts: Vec<LocalChart>,
    pub modules: Vec<FpModule>,
    /// overlap data keyed by chart pair (alpha < beta)
    pub gluing: BTreeMap<(usize, usize), ModuleMap>,
    pub overlap_rings: BTreeMap<(usize, usize), Ring>,
}

/// Intersection of chart bases inside their common space, with maps from
/// each chart base. Charts must live on the same space.
pub fn chart_intersection(charts: &[&LocalChart]) -> Result<(Ring, Vec<RingMap>)> {
    let space = &charts[0].space;
    let pieces: Vec<usize> = charts.iter().map(|q| q.piece).sorted().dedup().collect();
    let (piece_ring, piece_maps) = space.intersection(&pieces)?;
    // localize further by each chart's tower, tracking maps from each
    // chart base
    let segments: Vec<(Ring, RingMap, Vec<Polynomial>)> = charts
        .iter()
        .map(|q| {
            let pos = pieces.iter().position(|&p| p == q.piece).unwrap();
            (
                space.piece(q.piece).clone(),
                piece_maps[pos].clone(),
                q.tower.clone(),
            )
        })
        .collect();
    let tower = build_tower(&piece_ring, &segments);
    Ok((tower.ring, tower.segment_maps))
}

/// Glues chart-level Koszul homology over a cover: per-chart modules with
/// roof-built overlap isomorphisms, with the cocycle verified on triples.
pub fn glue_koszul(charts: &[LocalChart], a: &SheafOnF, i: usize) -> Result<GluedKoszul> {
    if charts.is_empty() {
        return Err(Error::CoverIncomplete("no charts given".into()));
    }
    verify_cover(charts)?;
    let homologies: Vec<ChartHomology> = charts
        .iter()
        .map(|q| koszul_homology_chart(q, a, i))
        .collect::<Result<_>>()?;
    let mut gluing = BTreeMap::new();
    let mut overlap_rings = BTreeMap::new();
    let n = charts.len();
    for alpha in 0..n {
        for beta in alpha + 1..n {
            let (ring, maps) = chart_intersection(&[&charts[alpha], &charts[beta]])?;
            overlap_rings.insert((alpha, beta), ring.clone());
            if ring.is_zero_ring() {
                continue;
            }
            let g = overlap_comparison(
                &charts[alpha],
                &charts[beta],
                &ring,
                &maps[0],
                &maps[1],
                a,
                i,
            )?;
            gluing.insert((alpha, beta), g);
        }
    }
    // cocycle on triples
    for a_idx in 0..n {
        for b_idx in a_idx + 1..n {
            for c_idx in b_idx + 1..n {
                verify_chart_cocycle(charts, &homologies, &gluing, (a_idx, b_idx, c_idx))?;
            }
        }
    }
    Ok(GluedKoszul {
        charts: charts.to_vec(),
        modules: homologies.into_iter().map(|h| h.base_module).collect(),
        gluing,
        overlap_rings,
    })
}

/// The charts must cover the space: per piece, the inverted elements of
/// the charts based there generate the unit ideal.
pub fn verify_cover(charts: &[LocalChart]) -> Result<()> {
    let space = &charts[0].space;
    for (pi, piece) in space.pieces().iter().enumerate() {
        let based_here: Vec<&LocalChart> = charts.iter().filter(|q| q.piece == pi).collect();
        if based_here.is_empty() {
            return Err(Error::CoverIncomplete(format!("piece {} has no chart", pi)));
        }
        if based_here.iter().any(|q| q.tower.is_empty()) {
            continue; // some chart covers the whole piece
        }
        let mut gens: Vec<Polynomial> = piece.relations().generators().to_vec();
        for q in &based_here {
            if q.tower.len() > 1 {
                return Err(Error::CoverIncomplete(
                    "cover check needs single-step localizations".into(),
                ));
            }
            gens.push(q.tower[0].clone());
        }
        let order = piece.order();
        let gb = buchberger(&gens, order);
        if !reduces_to_zero(&piece.one(), &gb, order) {
            return Err(Error::CoverIncomplete(format!(
                "inverted elements do not generate the unit ideal on piece {}",
                pi
            )));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn overlap_comparison(
    qa: &LocalChart,
    qb: &LocalChart,
    overlap: &Ring,
    map_a: &RingMap,
    map_b: &RingMap,
    a: &SheafOnF,
    i: usize,
) -> Result<ModuleMap> {
    // restrict both charts to the overlap
    let (ra, ga) = restrict_to(qa, overlap, map_a)?;
    let (rb, gb) = restrict_to(qb, overlap, map_b)?;
    let cm_a = comparison_map(&ga, a, i)?;
    let cm_b = comparison_map(&gb, a, i)?;
    let roof = build_roof(&ra, &rb)?;
    // the roof needs sheaf values on the restricted charts; pull them
    // down once and hand the restricted datum to the roof comparison
    let restricted = restrict_sheaf(a, &[(&ra, &ga), (&rb, &gb)])?;
    let h_roof = roof_comparison(&roof, &restricted, i)?;
    // pulled(H_a) --cm_a--> H(ra) --h_roof--> H(rb) <--cm_b-- pulled(H_b)
    let cm_b_inv = cm_b
        .map
        .inverse()
        .map_err(|_| Error::InconsistentSheaf("restriction comparison is not invertible".into()))?;
    cm_b_inv.compose(&h_roof.compose(&cm_a.map)?)
}

/// Transport of sheaf data onto restricted charts: values are pulled back
/// along the restriction morphisms (with the consistency checks of
/// `pull_to_source`) and registered under the restricted chart names.
fn restrict_sheaf(
    a: &SheafOnF,
    restrictions: &[(&LocalChart, &ChartMorphism)],
) -> Result<SheafOnF> {
    match a {
        SheafOnF::Full | SheafOnF::ZeroSection => Ok(a.clone()),
        SheafOnF::Substack(_) => {
            let mut ideals = BTreeMap::new();
            for (chart, gamma) in restrictions {
                let (value, _) = a.pull_to_source(gamma)?;
                let gens: Vec<Polynomial> = value
                    .relations()
                    .columns()
                    .iter()
                    .map(|c| c[0].clone())
                    .collect();
                ideals.insert(chart.name.clone(), gens);
            }
            Ok(SheafOnF::Substack(ideals))
        }
        SheafOnF::Assignment { .. } => {
            let mut values = BTreeMap::new();
            for (chart, gamma) in restrictions {
                let (value, _) = a.pull_to_source(gamma)?;
                values.insert(chart.name.clone(), value);
            }
            Ok(SheafOnF::Assignment {
                values,
                compat: BTreeMap::new(),
            })
        }
    }
}

/// Reinterprets a chart over a localization of its base; `map` sends the
/// chart base into the overlap ring.
fn restrict_to(
    q: &LocalChart,
    overlap: &Ring,
    map: &RingMap,
) -> Result<(LocalChart, ChartMorphism)> {
    let sheaf_value = base_change(&q.sheaf_value, map);
    let surjection = q.surjection.map(|p| map.apply(p));
    let restricted = LocalChart::on_single_piece(
        format!("{}|overlap", q.name),
        overlap.clone(),
        sheaf_value,
        q.rank,
        surjection,
    )?;
    let morphism = ChartMorphism::restriction(restricted.clone(), q.clone(), map.clone())?;
    Ok((restricted, morphism))
}

fn verify_chart_cocycle(
    charts: &[LocalChart],
    homologies: &[ChartHomology],
    gluing: &BTreeMap<(usize, usize), ModuleMap>,
    (a_idx, b_idx, c_idx): (usize, usize, usize),
) -> Result<()> {
    let (tring, tmaps) = chart_intersection(&[&charts[a_idx], &charts[b_idx], &charts[c_idx]])?;
    if tring.is_zero_ring() {
        return Ok(());
    }
    let restrict = |pair: (usize, usize)| -> Result<ModuleMap> {
        let g = gluing
            .get(&pair)
            .ok_or(Error::CocycleFailure(a_idx, b_idx, c_idx))?;
        // the pairwise overlap ring embeds into the triple ring; rebuild
        // the restricted map on triple-restricted presentations
        let refine = chart_refinement(charts, &[pair.0, pair.1], &[a_idx, b_idx, c_idx])?;
        crate::module::base_change_map(g, &refine)
    };
    let gab = restrict((a_idx, b_idx))?;
    let gbc = restrict((b_idx, c_idx))?;
    let gac = restrict((a_idx, c_idx))?;
    let ma = base_change(&homologies[a_idx].base_module, &tmaps[0]);
    let mb = base_change(&homologies[b_idx].base_module, &tmaps[1]);
    let mc = base_change(&homologies[c_idx].base_module, &tmaps[2]);
    let to = |g: ModuleMap, s: &FpModule, t: &FpModule| -> Result<ModuleMap> {
        ModuleMap::new(s.clone(), t.clone(), g.matrix)
    };
    let gab = to(gab, &ma, &mb)?;
    let gbc = to(gbc, &mb, &mc)?;
    let gac = to(gac, &ma, &mc)?;
    if !gbc.compose(&gab)?.equals(&gac) {
        return Err(Error::CocycleFailure(a_idx, b_idx, c_idx));
    }
    Ok(())
}

/// Variable layout of a chart-subset intersection ring: space base
/// variables, then the piece-tower inverses of the participating pieces
/// in order, then the chart-tower inverses in chart order.
struct TowerLayout {
    piece_offsets: BTreeMap<usize, usize>,
    chart_offsets: BTreeMap<usize, usize>,
}

fn tower_layout(charts: &[LocalChart], subset: &[usize]) -> Result<(usize, Vec<usize>, TowerLayout)> {
    let space = &charts[0].space;
    let (base_n, piece_tower_len): (usize, Vec<usize>) = match space.kind() {
        SpaceKind::Single => (space.piece(0).nvars(), vec![0]),
        SpaceKind::PrincipalCover { base, towers } => {
            (base.nvars(), towers.iter().map(|t| t.len()).collect())
        }
        _ => {
            return Err(Error::InvalidInput(
                "triple refinements need a single piece or a principal cover".into(),
            ))
        }
    };
    let pieces: Vec<usize> = subset
        .iter()
        .map(|&s| charts[s].piece)
        .sorted()
        .dedup()
        .collect();
    let mut off = base_n;
    let mut piece_offsets = BTreeMap::new();
    for &p in &pieces {
        piece_offsets.insert(p, off);
        off += piece_tower_len[p];
    }
    let mut chart_offsets = BTreeMap::new();
    for &s in subset {
        chart_offsets.insert(s, off);
        off += charts[s].tower.len();
    }
    Ok((base_n, piece_tower_len, TowerLayout { piece_offsets, chart_offsets }))
}

/// Map from a pairwise chart intersection into a triple intersection by
/// positional variable bookkeeping.
fn chart_refinement(charts: &[LocalChart], sub: &[usize], sup: &[usize]) -> Result<RingMap> {
    let refs_sub: Vec<&LocalChart> = sub.iter().map(|&s| &charts[s]).collect();
    let refs_sup: Vec<&LocalChart> = sup.iter().map(|&s| &charts[s]).collect();
    let (sub_ring, _) = chart_intersection(&refs_sub)?;
    let (sup_ring, _) = chart_intersection(&refs_sup)?;
    let (base_n, piece_tower_len, sub_layout) = tower_layout(charts, sub)?;
    let (_, _, sup_layout) = tower_layout(charts, sup)?;
    let mut images: Vec<Polynomial> = (0..base_n).map(|i| sup_ring.var(i)).collect();
    for (&p, &start) in &sub_layout.piece_offsets {
        let sup_start = sup_layout.piece_offsets[&p];
        for k in 0..piece_tower_len[p] {
            debug_assert_eq!(images.len(), start + k);
            images.push(sup_ring.var(sup_start + k));
        }
    }
    for (&s, &start) in &sub_layout.chart_offsets {
        let sup_start = sup_layout.chart_offsets[&s];
        for k in 0..charts[s].tower.len() {
            debug_assert_eq!(images.len(), start + k);
            images.push(sup_ring.var(sup_start + k));
        }
    }
    if images.len() != sub_ring.nvars() {
        return Err(Error::ShapeMismatch(
            "refinement layout does not match the pair ring".into(),
        ));
    }
    RingMap::new(sub_ring, sup_ring, images)
}
