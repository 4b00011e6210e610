//! Finitely presented modules over a ring presentation and maps between
//! them. Kernels, cokernels and tensor products reduce to module Gröbner
//! computations; ring relations enter every computation as extra relation
//! vectors in each component.

use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::modgb::{
    module_groebner, syzygies_modulo, vp_is_zero, vp_normal_form, vp_unit, vp_zero, LiftContext,
    VecPoly,
};
use crate::poly::Polynomial;
use crate::ring::{Ring, RingMap};
use once_cell::sync::OnceCell;

/// Integer weights making a module graded: one weight per generator plus
/// one positive weight per ring variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    pub gen_weights: Vec<i64>,
    pub var_weights: Vec<u32>,
}

/// A finitely presented module: `ring^gens / column span of relations`.
#[derive(Debug, Clone)]
pub struct FpModule {
    ring: Ring,
    gens: usize,
    relations: PolyMatrix,
    grading: Option<Grading>,
    relgb: OnceCell<Vec<VecPoly>>,
}

impl PartialEq for FpModule {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.gens == other.gens && self.relations == other.relations
    }
}
impl Eq for FpModule {}

/// Relation vectors contributed by the ring: `g * e_j` for every relation
/// generator `g` and every component `j`.
pub fn ring_relation_vectors(ring: &Ring, ncomp: usize) -> Vec<VecPoly> {
    let nvars = ring.nvars();
    let mut out = Vec::new();
    for g in ring.relations().generators() {
        for j in 0..ncomp {
            let mut v = vp_zero(ncomp, nvars);
            v[j] = g.clone();
            out.push(v);
        }
    }
    out
}

impl FpModule {
    pub fn new(ring: Ring, gens: usize, relation_cols: Vec<VecPoly>) -> FpModule {
        let cols: Vec<VecPoly> = relation_cols
            .into_iter()
            .map(|c| c.iter().map(|p| ring.reduce(p)).collect())
            .filter(|c: &VecPoly| !vp_is_zero(c))
            .collect();
        let relations = PolyMatrix::from_columns(gens, &cols, ring.nvars());
        FpModule {
            ring,
            gens,
            relations,
            grading: None,
            relgb: OnceCell::new(),
        }
    }

    pub fn free(ring: Ring, n: usize) -> FpModule {
        FpModule::new(ring, n, Vec::new())
    }

    pub fn zero_module(ring: Ring) -> FpModule {
        FpModule::free(ring, 0)
    }

    /// The cyclic module `ring / (gens of the ideal)`.
    pub fn cyclic(ring: Ring, ideal_gens: &[Polynomial]) -> FpModule {
        let cols: Vec<VecPoly> = ideal_gens.iter().map(|g| vec![g.clone()]).collect();
        FpModule::new(ring, 1, cols)
    }

    pub fn with_grading(mut self, grading: Grading) -> FpModule {
        assert_eq!(grading.gen_weights.len(), self.gens);
        assert_eq!(grading.var_weights.len(), self.ring.nvars());
        self.grading = Some(grading);
        self
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn relations(&self) -> &PolyMatrix {
        &self.relations
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_ref()
    }

    /// Module Gröbner basis of the relation span (ring relations included).
    pub fn rel_gb(&self) -> &Vec<VecPoly> {
        self.relgb.get_or_init(|| {
            let mut gens = self.relations.columns();
            gens.extend(ring_relation_vectors(&self.ring, self.gens));
            module_groebner(&gens, self.ring.order())
        })
    }

    pub fn reduce_element(&self, v: &VecPoly) -> VecPoly {
        vp_normal_form(v, self.rel_gb(), self.ring.order())
    }

    pub fn element_is_zero(&self, v: &VecPoly) -> bool {
        vp_is_zero(&self.reduce_element(v))
    }

    pub fn is_zero_module(&self) -> bool {
        (0..self.gens).all(|j| self.element_is_zero(&vp_unit(self.gens, self.ring.nvars(), j)))
    }

    /// Structural equality of reduced presentations: same generator count
    /// and identical reduced relation Gröbner bases.
    pub fn presentation_eq(&self, other: &FpModule) -> bool {
        self.ring == other.ring && self.gens == other.gens && self.rel_gb() == other.rel_gb()
    }

    /// Removes redundant generators: any relation with a unit (constant)
    /// entry lets the corresponding generator be eliminated.
    pub fn prune(&self) -> FpModule {
        let ring = self.ring.clone();
        let nvars = ring.nvars();
        let mut gens = self.gens;
        let mut cols: Vec<VecPoly> = self
            .relations
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|p| ring.reduce(p)).collect())
            .collect();
        loop {
            cols.retain(|c| !vp_is_zero(c));
            // find a unit pivot
            let mut pivot: Option<(usize, usize)> = None;
            'search: for (j, c) in cols.iter().enumerate() {
                for (i, p) in c.iter().enumerate() {
                    if !p.is_zero() && p.is_constant() {
                        pivot = Some((i, j));
                        break 'search;
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            let pcol = cols[pj].clone();
            let c = pcol[pi].constant_coef();
            // eliminate generator pi using column pj
            let mut next: Vec<VecPoly> = Vec::new();
            for (j, col) in cols.iter().enumerate() {
                if j == pj {
                    continue;
                }
                let factor = col[pi].clone();
                let inv_c = crate::poly::coef_int(1) / c.clone();
                let mut adjusted: VecPoly = Vec::with_capacity(gens - 1);
                for i in 0..gens {
                    if i == pi {
                        continue;
                    }
                    let correction = factor.mul(&pcol[i]).scale(&inv_c);
                    adjusted.push(ring.reduce(&col[i].sub(&correction)));
                }
                next.push(adjusted);
            }
            let _ = nvars;
            gens -= 1;
            cols = next;
        }
        FpModule::new(ring, gens, cols)
    }
}

/// A map of finitely presented modules, by a matrix acting on generator
/// coordinate columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap {
    pub source: FpModule,
    pub target: FpModule,
    pub matrix: PolyMatrix,
}

impl ModuleMap {
    /// Builds the map, checking that source relations land in the target
    /// relation span.
    pub fn new(source: FpModule, target: FpModule, matrix: PolyMatrix) -> Result<ModuleMap> {
        if source.ring != target.ring {
            return Err(Error::RingMismatch(
                "module map between different rings".into(),
            ));
        }
        if matrix.nrows != target.gens || matrix.ncols != source.gens {
            return Err(Error::ShapeMismatch(format!(
                "map matrix is {}x{}, expected {}x{}",
                matrix.nrows, matrix.ncols, target.gens, source.gens
            )));
        }
        let matrix = matrix.map(|p| source.ring.reduce(p));
        let map = ModuleMap {
            source,
            target,
            matrix,
        };
        for col in map.source.relations.columns() {
            let img = map.matrix.apply(&col);
            if !map.target.element_is_zero(&img) {
                return Err(Error::IllFormedMap(
                    "matrix does not carry source relations into target relations".into(),
                ));
            }
        }
        Ok(map)
    }

    pub fn identity(m: &FpModule) -> ModuleMap {
        ModuleMap {
            source: m.clone(),
            target: m.clone(),
            matrix: PolyMatrix::identity(m.gens, m.ring.nvars()),
        }
    }

    pub fn zero(source: &FpModule, target: &FpModule) -> ModuleMap {
        ModuleMap {
            source: source.clone(),
            target: target.clone(),
            matrix: PolyMatrix::zero(target.gens, source.gens, source.ring.nvars()),
        }
    }

    pub fn ring(&self) -> &Ring {
        self.source.ring()
    }

    pub fn apply(&self, v: &VecPoly) -> VecPoly {
        self.target.reduce_element(&self.matrix.apply(v))
    }

    /// `self ∘ earlier`.
    pub fn compose(&self, earlier: &ModuleMap) -> Result<ModuleMap> {
        if earlier.target.gens != self.source.gens || earlier.target.ring != self.source.ring {
            return Err(Error::ShapeMismatch("map composition mismatch".into()));
        }
        ModuleMap::new(
            earlier.source.clone(),
            self.target.clone(),
            self.matrix.mul(&earlier.matrix),
        )
    }

    /// Maps agree when their difference lands in the target relations.
    pub fn equals(&self, other: &ModuleMap) -> bool {
        if self.source.gens != other.source.gens || self.target.gens != other.target.gens {
            return false;
        }
        let diff = self.matrix.sub(&other.matrix);
        (0..diff.ncols).all(|j| self.target.element_is_zero(&diff.column(j)))
    }

    pub fn is_zero_map(&self) -> bool {
        (0..self.matrix.ncols).all(|j| self.target.element_is_zero(&self.matrix.column(j)))
    }

    /// Kernel with its inclusion map.
    pub fn kernel(&self) -> (FpModule, ModuleMap) {
        let ring = self.ring().clone();
        let order = ring.order().clone();
        let n = self.target.gens;
        let mut modulo = self.target.relations.columns();
        modulo.extend(ring_relation_vectors(&ring, n));
        let cols = self.matrix.columns();
        let ker_gens = syzygies_modulo(&cols, &modulo, n, &order);
        // present the kernel: relations = syzygies of the kernel generators
        // modulo the source relations
        let mut src_modulo = self.source.relations.columns();
        src_modulo.extend(ring_relation_vectors(&ring, self.source.gens));
        let ker_rels = syzygies_modulo(&ker_gens, &src_modulo, self.source.gens, &order);
        let ker = FpModule::new(ring.clone(), ker_gens.len(), ker_rels);
        let incl = ModuleMap {
            source: ker.clone(),
            target: self.source.clone(),
            matrix: PolyMatrix::from_columns(self.source.gens, &ker_gens, ring.nvars()),
        };
        (ker, incl)
    }

    /// Cokernel with its projection map.
    pub fn cokernel(&self) -> (FpModule, ModuleMap) {
        let mut rels = self.target.relations.columns();
        rels.extend(self.matrix.columns());
        let coker = FpModule::new(self.ring().clone(), self.target.gens, rels);
        let proj = ModuleMap {
            source: self.target.clone(),
            target: coker.clone(),
            matrix: PolyMatrix::identity(self.target.gens, self.ring().nvars()),
        };
        (coker, proj)
    }

    pub fn is_injective(&self) -> bool {
        let (_, incl) = self.kernel();
        (0..incl.matrix.ncols).all(|j| self.source.element_is_zero(&incl.matrix.column(j)))
    }

    pub fn is_surjective(&self) -> bool {
        let (coker, _) = self.cokernel();
        coker.is_zero_module()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Explicit two-sided inverse certificate for an isomorphism.
    pub fn inverse(&self) -> Result<ModuleMap> {
        let ring = self.ring().clone();
        let order = ring.order().clone();
        let n = self.target.gens;
        let mut modulo = self.target.relations.columns();
        modulo.extend(ring_relation_vectors(&ring, n));
        let ctx = LiftContext::new(&self.matrix.columns(), &modulo, n, &order);
        let mut cols: Vec<VecPoly> = Vec::with_capacity(n);
        for j in 0..n {
            let e = vp_unit(n, ring.nvars(), j);
            let x = ctx
                .lift(&e)
                .ok_or_else(|| Error::LiftInfeasible(format!("generator {} has no preimage", j)))?;
            cols.push(x);
        }
        let inv = ModuleMap::new(
            self.target.clone(),
            self.source.clone(),
            PolyMatrix::from_columns(self.source.gens, &cols, ring.nvars()),
        )?;
        // two-sided certificate
        let left = inv.compose(self)?;
        let right = self.compose(&inv)?;
        if !left.equals(&ModuleMap::identity(&self.source))
            || !right.equals(&ModuleMap::identity(&self.target))
        {
            return Err(Error::LiftInfeasible("inverse certificate failed".into()));
        }
        Ok(inv)
    }
}

/// Tensor product of two modules over the same ring, by the Kronecker
/// presentation; generator `(i, k)` sits at index `i * n.gens + k`.
pub fn tensor(m: &FpModule, n: &FpModule) -> FpModule {
    assert_eq!(m.ring(), n.ring());
    let ring = m.ring().clone();
    let nvars = ring.nvars();
    let gens = m.gens() * n.gens();
    let mut cols: Vec<VecPoly> = Vec::new();
    for r in m.relations().columns() {
        for k in 0..n.gens() {
            let mut v = vp_zero(gens, nvars);
            for i in 0..m.gens() {
                v[i * n.gens() + k] = r[i].clone();
            }
            cols.push(v);
        }
    }
    for r in n.relations().columns() {
        for i in 0..m.gens() {
            let mut v = vp_zero(gens, nvars);
            for k in 0..n.gens() {
                v[i * n.gens() + k] = r[k].clone();
            }
            cols.push(v);
        }
    }
    FpModule::new(ring, gens, cols)
}

/// `f ⊗ id_n` on tensor presentations.
pub fn tensor_map_left(f: &ModuleMap, n: &FpModule) -> Result<ModuleMap> {
    let source = tensor(&f.source, n);
    let target = tensor(&f.target, n);
    let nvars = f.ring().nvars();
    let mut matrix = PolyMatrix::zero(target.gens(), source.gens(), nvars);
    for i2 in 0..f.target.gens() {
        for i1 in 0..f.source.gens() {
            for k in 0..n.gens() {
                *matrix.at_mut(i2 * n.gens() + k, i1 * n.gens() + k) = f.matrix.at(i2, i1).clone();
            }
        }
    }
    ModuleMap::new(source, target, matrix)
}

/// Base change of a module along a ring map (right-exact: same generators,
/// mapped relations).
pub fn base_change(m: &FpModule, rm: &RingMap) -> FpModule {
    assert_eq!(*m.ring(), rm.source);
    let cols: Vec<VecPoly> = m
        .relations()
        .columns()
        .into_iter()
        .map(|c| c.iter().map(|p| rm.apply(p)).collect())
        .collect();
    FpModule::new(rm.target.clone(), m.gens(), cols)
}

/// Base change of a map along a ring map.
pub fn base_change_map(f: &ModuleMap, rm: &RingMap) -> Result<ModuleMap> {
    let source = base_change(&f.source, rm);
    let target = base_change(&f.target, rm);
    ModuleMap::new(source, target, f.matrix.map(|p| rm.apply(p)))
}

/// Syzygies of a matrix over a quotient ring: the columns of the result
/// generate the kernel of the map between free modules defined by the
/// matrix, with the ring relations taking part in the computation.
pub fn syzygies(ring: &Ring, matrix: &PolyMatrix) -> PolyMatrix {
    let modulo = ring_relation_vectors(ring, matrix.nrows);
    let gens = crate::modgb::syzygies_modulo(
        &matrix.columns(),
        &modulo,
        matrix.nrows,
        ring.order(),
    );
    let cols: Vec<VecPoly> = gens
        .into_iter()
        .map(|v| v.iter().map(|p| ring.reduce(p)).collect::<VecPoly>())
        .filter(|v: &VecPoly| !vp_is_zero(v))
        .collect();
    PolyMatrix::from_columns(matrix.ncols, &cols, ring.nvars())
}

/// Membership with coefficients: expresses `v` in the submodule generated
/// by `gens` inside the ambient free module with `ncomp` components,
/// working modulo `modulo` and the ring relations.
pub fn lift_through(
    ring: &Ring,
    gens: &[VecPoly],
    modulo: &[VecPoly],
    ncomp: usize,
    v: &VecPoly,
) -> Option<VecPoly> {
    let mut m = modulo.to_vec();
    m.extend(ring_relation_vectors(ring, ncomp));
    let ctx = LiftContext::new(gens, &m, ncomp, ring.order());
    ctx.lift(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::MonomialOrder;
    use crate::ring::RingPresentation;

    fn ring_x() -> Ring {
        RingPresentation::polynomial(vec!["x".into()], MonomialOrder::grevlex(1))
    }

    fn ring_xy() -> Ring {
        RingPresentation::polynomial(vec!["x".into(), "y".into()], MonomialOrder::grevlex(2))
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        let r = ring_x();
        let m = FpModule::free(r.clone(), 2);
        let f = ModuleMap::identity(&m);
        let (ker, incl) = f.kernel();
        assert!(ker.is_zero_module() || incl.is_zero_map());
        assert!(f.is_injective());
    }

    #[test]
    fn kernel_of_zero_map_is_everything() {
        let r = ring_x();
        let m = FpModule::cyclic(r.clone(), &[r.parse("x^2").unwrap()]);
        let z = ModuleMap::zero(&m, &m);
        let (_, incl) = z.kernel();
        // the generator of m must lie in the kernel span
        let mut modulo = m.relations().columns();
        modulo.extend(ring_relation_vectors(&r, 1));
        let found = lift_through(&r, &incl.matrix.columns(), &modulo, 1, &vec![r.one()]);
        assert!(found.is_some());
    }

    #[test]
    fn kernel_of_multiplication_on_quotient() {
        // multiplication by y on Q[x,y]/(xy): kernel generated by x
        let r0 = ring_xy();
        let r = RingPresentation::quotient(&r0, vec![r0.parse("x*y").unwrap()]);
        let m = FpModule::free(r.clone(), 1);
        let f = ModuleMap::new(
            m.clone(),
            m.clone(),
            PolyMatrix::new(1, 1, vec![r.parse("y").unwrap()]),
        )
        .unwrap();
        let (ker, incl) = f.kernel();
        assert_eq!(ker.gens(), 1);
        let order = r.order().clone();
        assert_eq!(incl.matrix.at(0, 0).monic(&order), r.parse("x").unwrap());
        assert!(!f.is_injective());
    }

    #[test]
    fn cokernel_of_surjection_is_zero() {
        let r = ring_x();
        let m2 = FpModule::free(r.clone(), 2);
        let m1 = FpModule::free(r.clone(), 1);
        let proj = ModuleMap::new(m2, m1, PolyMatrix::new(1, 2, vec![r.one(), r.zero()])).unwrap();
        let (coker, _) = proj.cokernel();
        assert!(coker.is_zero_module());
        assert!(proj.is_surjective());
    }

    #[test]
    fn cokernel_of_2x_on_dual_numbers() {
        // multiplication by 2x on Q[x]/(x^2) has cokernel Q[x]/(x)
        let r0 = ring_x();
        let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2").unwrap()]);
        let m = FpModule::free(r.clone(), 1);
        let f = ModuleMap::new(
            m.clone(),
            m.clone(),
            PolyMatrix::new(1, 1, vec![r.parse("2*x").unwrap()]),
        )
        .unwrap();
        let (coker, _) = f.cokernel();
        let expect = FpModule::cyclic(r.clone(), &[r.parse("x").unwrap()]);
        assert!(coker.presentation_eq(&expect));
    }

    #[test]
    fn zero_map_cokernel_is_target() {
        let r = ring_x();
        let m = FpModule::cyclic(r.clone(), &[r.parse("x^3").unwrap()]);
        let z = ModuleMap::zero(&FpModule::free(r.clone(), 0), &m);
        let (coker, _) = z.cokernel();
        assert!(coker.presentation_eq(&m));
    }

    #[test]
    fn tensor_with_free_rank_one_is_identity() {
        let r = ring_x();
        let m = FpModule::cyclic(r.clone(), &[r.parse("x^2").unwrap()]);
        let f = FpModule::free(r.clone(), 1);
        let t = tensor(&m, &f);
        assert!(t.presentation_eq(&m));
    }

    #[test]
    fn tensor_of_cyclic_quotients() {
        // Q[x]/(x) ⊗ Q[x]/(x^2) = Q[x]/(x)
        let r = ring_x();
        let a = FpModule::cyclic(r.clone(), &[r.parse("x").unwrap()]);
        let b = FpModule::cyclic(r.clone(), &[r.parse("x^2").unwrap()]);
        let t = tensor(&a, &b);
        assert!(t.presentation_eq(&a));
    }

    #[test]
    fn tensor_with_zero_module() {
        let r = ring_x();
        let m = FpModule::cyclic(r.clone(), &[r.parse("x^2").unwrap()]);
        let z = FpModule::zero_module(r.clone());
        assert!(tensor(&m, &z).is_zero_module());
    }

    #[test]
    fn inverse_certificate() {
        let r0 = ring_x();
        let r = RingPresentation::quotient(&r0, vec![r0.parse("x^2 - 1").unwrap()]);
        let m = FpModule::free(r.clone(), 1);
        // multiplication by x is invertible on Q[x]/(x^2 - 1)
        let f = ModuleMap::new(
            m.clone(),
            m.clone(),
            PolyMatrix::new(1, 1, vec![r.parse("x").unwrap()]),
        )
        .unwrap();
        let inv = f.inverse().unwrap();
        assert!(inv.compose(&f).unwrap().equals(&ModuleMap::identity(&m)));
    }

    #[test]
    fn matrix_syzygies_over_quotient_ring() {
        // the row (x y) over Q[x,y] has the Koszul syzygy (y, -x)
        let r = ring_xy();
        let m = PolyMatrix::new(1, 2, vec![r.parse("x").unwrap(), r.parse("y").unwrap()]);
        let syz = syzygies(&r, &m);
        assert_eq!(syz.ncols, 1);
        assert!(m.mul(&syz).is_zero());
        // a nonzerodivisor has no syzygies
        let m1 = PolyMatrix::new(1, 1, vec![r.parse("x").unwrap()]);
        assert_eq!(syzygies(&r, &m1).ncols, 0);
        // over Q[x,y]/(xy) the kernel of y appears
        let q = RingPresentation::quotient(&r, vec![r.parse("x*y").unwrap()]);
        let my = PolyMatrix::new(1, 1, vec![q.parse("y").unwrap()]);
        let syz = syzygies(&q, &my);
        assert_eq!(syz.ncols, 1);
        assert_eq!(syz.at(0, 0).monic(q.order()), q.parse("x").unwrap());
    }

    #[test]
    fn prune_eliminates_unit_pivots() {
        let r = ring_x();
        // presentation <a, b | a + x b, x^2 b> ~ <b | x^2 b - x*(x b)> = <b | 0>? no:
        // a = -x b, second relation x^2 b stays
        let m = FpModule::new(
            r.clone(),
            2,
            vec![
                vec![r.one(), r.parse("x").unwrap()],
                vec![r.zero(), r.parse("x^2").unwrap()],
            ],
        );
        let p = m.prune();
        assert_eq!(p.gens(), 1);
        let expect = FpModule::cyclic(r.clone(), &[r.parse("x^2").unwrap()]);
        assert!(p.presentation_eq(&expect));
    }
}
