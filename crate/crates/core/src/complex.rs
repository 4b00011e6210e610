//! Chain complexes, homology presentations, Koszul complexes and
//! quasi-isomorphism certificates.
//!
//! Complexes are homological: `modules[i]` sits in degree `i` and
//! `diffs[i]` maps degree `i+1` to degree `i`.

use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::modgb::{vp_is_zero, VecPoly};
use crate::module::{ring_relation_vectors, FpModule, ModuleMap};
use crate::poly::Polynomial;
use crate::ring::{Ring, RingMap, RingPresentation};
use itertools::Itertools;

#[derive(Debug, Clone)]
pub struct ChainComplex {
    modules: Vec<FpModule>,
    diffs: Vec<ModuleMap>,
}

impl ChainComplex {
    /// Builds a complex and checks that consecutive differentials compose
    /// to zero.
    pub fn new(modules: Vec<FpModule>, diffs: Vec<ModuleMap>) -> Result<ChainComplex> {
        assert!(!modules.is_empty());
        assert_eq!(diffs.len() + 1, modules.len());
        for (i, d) in diffs.iter().enumerate() {
            if d.source.gens() != modules[i + 1].gens() || d.target.gens() != modules[i].gens() {
                return Err(Error::ShapeMismatch(format!(
                    "differential {} does not match adjacent terms",
                    i
                )));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            let dd = diffs[i].compose(&diffs[i + 1])?;
            if !dd.is_zero_map() {
                return Err(Error::IllFormedComplex { position: i });
            }
        }
        Ok(ChainComplex { modules, diffs })
    }

    pub fn ring(&self) -> &Ring {
        self.modules[0].ring()
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn module(&self, i: usize) -> &FpModule {
        &self.modules[i]
    }

    pub fn modules(&self) -> &[FpModule] {
        &self.modules
    }

    /// The differential leaving degree `i` (down to `i - 1`), when present.
    pub fn diff_from(&self, i: usize) -> Option<&ModuleMap> {
        if i == 0 || i > self.diffs.len() {
            None
        } else {
            Some(&self.diffs[i - 1])
        }
    }

    /// The differential entering degree `i` (from `i + 1`), when present.
    pub fn diff_into(&self, i: usize) -> Option<&ModuleMap> {
        self.diffs.get(i)
    }

    /// Homology at degree `i`, presented on cycle generators.
    pub fn homology(&self, i: usize) -> HomologyData {
        let ring = self.ring().clone();
        if i >= self.modules.len() {
            return HomologyData::zero(ring);
        }
        let term = &self.modules[i];
        // kernel of the outgoing differential (whole term in degree 0)
        let (cycles, incl) = match self.diff_from(i) {
            Some(d) => d.kernel(),
            None => {
                let m = term.clone();
                let id = ModuleMap::identity(&m);
                (m, id)
            }
        };
        let cycle_cols = incl.matrix.columns();
        // express boundaries in cycle coordinates
        let mut term_modulo = term.relations().columns();
        term_modulo.extend(ring_relation_vectors(&ring, term.gens()));
        let boundary_cols: Vec<VecPoly> = match self.diff_into(i) {
            None => Vec::new(),
            Some(d) => d.matrix.columns(),
        };
        let mut rels = cycles.relations().columns();
        if !boundary_cols.is_empty() {
            let ctx = crate::modgb::LiftContext::new(
                &cycle_cols,
                &term_modulo,
                term.gens(),
                ring.order(),
            );
            for b in &boundary_cols {
                let coords = ctx
                    .lift(b)
                    .expect("boundary is a cycle; complex was validated");
                rels.push(coords);
            }
        }
        let h = FpModule::new(ring.clone(), cycles.gens(), rels);
        HomologyData {
            module: h,
            cycle_cols,
            term_gens: term.gens(),
            ring,
        }
    }

    /// Serializes the complex as an ordered list of (module, differential)
    /// blocks, differentials row-major.
    pub fn describe(&self) -> String {
        let ring = self.ring();
        let mut out = String::new();
        for (i, m) in self.modules.iter().enumerate() {
            out.push_str(&format!("term[{}]: gens={}", i, m.gens()));
            let rels: Vec<String> = m
                .relations()
                .columns()
                .iter()
                .map(|c| c.iter().map(|p| ring.show(p)).collect::<Vec<_>>().join(","))
                .collect();
            out.push_str(&format!(" rels=({})\n", rels.join("; ")));
            if let Some(d) = self.diff_into(i) {
                let mut rows: Vec<String> = Vec::new();
                for r in 0..d.matrix.nrows {
                    let row: Vec<String> = (0..d.matrix.ncols)
                        .map(|c| ring.show(d.matrix.at(r, c)))
                        .collect();
                    rows.push(format!("[{}]", row.join(", ")));
                }
                out.push_str(&format!("diff[{}<-{}]: {}\n", i, i + 1, rows.join(", ")));
            }
        }
        out
    }

    /// Tensors every term with `m` (over the same ring).
    pub fn tensor_with(&self, m: &FpModule) -> Result<ChainComplex> {
        let modules: Vec<FpModule> = self
            .modules
            .iter()
            .map(|t| crate::module::tensor(t, m))
            .collect();
        let diffs: Vec<ModuleMap> = self
            .diffs
            .iter()
            .map(|d| crate::module::tensor_map_left(d, m))
            .collect::<Result<_>>()?;
        ChainComplex::new(modules, diffs)
    }
}

/// A homology presentation that remembers the cycle generators, so classes
/// of explicit cycles can be expressed in its coordinates.
#[derive(Debug, Clone)]
pub struct HomologyData {
    pub module: FpModule,
    /// cycle generators as columns in the ambient term
    pub cycle_cols: Vec<VecPoly>,
    pub term_gens: usize,
    ring: Ring,
}

impl HomologyData {
    pub fn zero(ring: Ring) -> HomologyData {
        HomologyData {
            module: FpModule::zero_module(ring.clone()),
            cycle_cols: Vec::new(),
            term_gens: 0,
            ring,
        }
    }

    /// Coordinates of the class of a cycle `z` in the ambient term.
    pub fn class_of(&self, z: &VecPoly, term: &FpModule) -> Result<VecPoly> {
        if self.cycle_cols.is_empty() {
            if term.element_is_zero(z) {
                return Ok(Vec::new());
            }
            // a nonzero class cannot exist when there are no cycle generators
            return Err(Error::LiftInfeasible("vector is not a cycle class".into()));
        }
        let mut modulo = term.relations().columns();
        modulo.extend(ring_relation_vectors(&self.ring, term.gens()));
        let ctx = crate::modgb::LiftContext::new(
            &self.cycle_cols,
            &modulo,
            term.gens(),
            self.ring.order(),
        );
        ctx.lift(z)
            .ok_or_else(|| Error::LiftInfeasible("vector is not a cycle".into()))
    }
}

/// Basis labels for exterior powers: the index subsets of size `k`, in
/// lexicographic order.
pub fn exterior_basis(rank: usize, k: usize) -> Vec<Vec<usize>> {
    (0..rank).combinations(k).collect()
}

/// The Koszul complex on a section: terms are exterior powers of a free
/// rank-`rank` module, differentials contract with the section. Degree `i`
/// holds the `i`-th exterior power.
pub fn koszul_complex(rank: usize, section: &[Polynomial], ring: &Ring) -> Result<ChainComplex> {
    if section.len() != rank {
        return Err(Error::ShapeMismatch(format!(
            "section has {} entries for rank {}",
            section.len(),
            rank
        )));
    }
    let nvars = ring.nvars();
    let modules: Vec<FpModule> = (0..=rank)
        .map(|k| FpModule::free(ring.clone(), binomial(rank, k)))
        .collect();
    let mut diffs = Vec::new();
    for k in 1..=rank {
        let src_basis = exterior_basis(rank, k);
        let tgt_basis = exterior_basis(rank, k - 1);
        let mut matrix = PolyMatrix::zero(tgt_basis.len(), src_basis.len(), nvars);
        for (j, subset) in src_basis.iter().enumerate() {
            for (pos, &elem) in subset.iter().enumerate() {
                let mut rest = subset.clone();
                rest.remove(pos);
                let i = tgt_basis
                    .iter()
                    .position(|b| *b == rest)
                    .expect("subset basis");
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let entry = if sign > 0 {
                    section[elem].clone()
                } else {
                    section[elem].neg()
                };
                *matrix.at_mut(i, j) = ring.reduce(&entry);
            }
        }
        diffs.push(ModuleMap::new(
            modules[k].clone(),
            modules[k - 1].clone(),
            matrix,
        )?);
    }
    ChainComplex::new(modules, diffs)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k.min(n - k) {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// The total-space ring of a trivial bundle: the base ring with fresh
/// fiber variables appended, and the inclusion map.
pub fn total_space_ring(base: &Ring, rank: usize) -> (Ring, RingMap, Vec<usize>) {
    let names = base.fresh_names("y", rank);
    let total = RingPresentation::extend(base, names);
    let fiber_vars: Vec<usize> = (base.nvars()..base.nvars() + rank).collect();
    let images = (0..base.nvars()).map(|i| total.var(i)).collect();
    let incl = RingMap::new_unchecked(base.clone(), total.clone(), images);
    (total, incl, fiber_vars)
}

/// A degreewise map of chain complexes.
#[derive(Debug, Clone)]
pub struct ComplexMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub maps: Vec<ModuleMap>,
}

impl ComplexMap {
    /// Builds the map and checks the squares commute.
    pub fn new(
        source: ChainComplex,
        target: ChainComplex,
        maps: Vec<ModuleMap>,
    ) -> Result<ComplexMap> {
        assert_eq!(maps.len(), source.len().max(target.len()));
        for i in 0..maps.len().saturating_sub(1) {
            let (Some(ds), Some(dt)) = (source.diff_into(i), target.diff_into(i)) else {
                continue;
            };
            let a = maps[i].compose(ds)?;
            let b = dt.compose(&maps[i + 1])?;
            if !a.equals(&b) {
                return Err(Error::NotChainMap { position: i });
            }
        }
        Ok(ComplexMap {
            source,
            target,
            maps,
        })
    }

    /// Induced map on degree-`i` homology.
    pub fn induced(&self, i: usize) -> Result<ModuleMap> {
        let hs = self.source.homology(i);
        let ht = self.target.homology(i);
        let ring = self.source.ring().clone();
        let nvars = ring.nvars();
        let mut cols: Vec<VecPoly> = Vec::new();
        for z in &hs.cycle_cols {
            let img = self.maps[i].matrix.apply(z);
            let coords = ht.class_of(&img, self.target.module(i))?;
            cols.push(coords);
        }
        ModuleMap::new(
            hs.module.clone(),
            ht.module.clone(),
            PolyMatrix::from_columns(ht.module.gens(), &cols, nvars),
        )
    }

    /// True when every induced homology map is an isomorphism; otherwise
    /// returns the first failing degree.
    pub fn is_quasi_iso(&self) -> Result<std::result::Result<(), usize>> {
        let top = self.source.len().max(self.target.len());
        for i in 0..top {
            let f = self.induced(i)?;
            if !f.is_isomorphism() {
                return Ok(Err(i));
            }
        }
        Ok(Ok(()))
    }
}

/// A complex whose terms are all zero modules, for comparisons.
pub fn zero_complex(ring: &Ring, len: usize) -> ChainComplex {
    let modules = vec![FpModule::zero_module(ring.clone()); len.max(1)];
    let mut diffs = Vec::new();
    for i in 0..modules.len() - 1 {
        diffs.push(ModuleMap::zero(&modules[i + 1], &modules[i]));
    }
    ChainComplex { modules, diffs }
}

/// Checks that a vector of polynomials is zero after reduction; used by
/// callers asserting cycle conditions.
pub fn reduced_is_zero(ring: &Ring, v: &VecPoly) -> bool {
    vp_is_zero(&v.iter().map(|p| ring.reduce(p)).collect::<Vec<_>>())
}
