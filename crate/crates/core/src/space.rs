//! Spaces presented by affine pieces with principal-open overlaps, and
//! coherent sheaves on them given by descent data.

use crate::error::{Error, Result};
use crate::module::{base_change, base_change_map, FpModule, ModuleMap};
use crate::poly::Polynomial;
use crate::ring::{Ring, RingMap, RingPresentation};
use std::collections::BTreeMap;
use std::sync::Arc;

/// How the pieces of a space fit together.
#[derive(Debug, Clone)]
pub enum SpaceKind {
    /// One affine piece.
    Single,
    /// Every piece is a principal-open localization of a common base ring;
    /// `towers[i]` lists the successively inverted elements.
    PrincipalCover {
        base: Ring,
        towers: Vec<Vec<Polynomial>>,
    },
    /// Pairwise disjoint pieces.
    Disjoint,
    /// Two pieces with an explicit common localization.
    Pair {
        overlap: Ring,
        from_first: RingMap,
        from_second: RingMap,
    },
}

#[derive(Debug, Clone)]
pub struct SpacePresentation {
    pieces: Vec<Ring>,
    kind: SpaceKind,
}

pub type Space = Arc<SpacePresentation>;

/// A ring built by a chain of localizations, together with the positions
/// of the inverse variables contributed by each registered segment.
#[derive(Debug, Clone)]
pub struct LocalizationTower {
    pub ring: Ring,
    /// for each segment, the inverse-variable indices it contributed
    pub segment_vars: Vec<Vec<usize>>,
    /// maps from each segment's standalone stage ring into `ring`
    pub segment_maps: Vec<RingMap>,
}

/// Localizes `start` successively at tower segments. Each segment is a
/// list of elements; element `k` of a segment lives over that segment's
/// stage `k-1` ring (the segment's standalone tower over `seg_base`).
pub fn build_tower(
    start: &Ring,
    segments: &[(Ring, RingMap, Vec<Polynomial>)],
) -> LocalizationTower {
    // each segment: (segment base ring, map segment base -> current, elements)
    let mut current = start.clone();
    let mut into_current: Vec<RingMap> = segments.iter().map(|(_, m, _)| m.clone()).collect();
    let mut segment_vars: Vec<Vec<usize>> = vec![Vec::new(); segments.len()];
    // stage maps from each segment's standalone localized ring; earlier
    // segments keep getting re-targeted as later segments grow the ring
    let mut stage_maps: Vec<Option<RingMap>> = vec![None; segments.len()];
    for (si, (seg_base, _, elements)) in segments.iter().enumerate() {
        // standalone stage ring of this segment, rebuilt as we go
        let mut stage = seg_base.clone();
        stage_maps[si] = Some(into_current[si].clone());
        for f in elements {
            // f lives over `stage`; push it into the current ring
            let f_cur = stage_maps[si].as_ref().unwrap().apply(f);
            let (next, step) = RingPresentation::localize(&current, &f_cur);
            // update every pending map into the grown ring
            for m in into_current.iter_mut() {
                *m = step.compose(m);
            }
            for m in stage_maps.iter_mut().flatten() {
                *m = step.compose(m);
            }
            let new_var = next.nvars() - 1;
            segment_vars[si].push(new_var);
            // grow the standalone stage and extend the stage map by the
            // new inverse variable
            let (stage_next, _) = RingPresentation::localize(&stage, f);
            let mut images: Vec<Polynomial> = stage_maps[si].as_ref().unwrap().images().to_vec();
            images.push(next.var(new_var));
            stage = stage_next;
            stage_maps[si] = Some(RingMap::new_unchecked(stage.clone(), next.clone(), images));
            current = next;
        }
    }
    // every stage map must target the final ring
    let segment_maps: Vec<RingMap> = stage_maps
        .into_iter()
        .map(|m| {
            let m = m.expect("every segment visited");
            debug_assert_eq!(m.target, current);
            m
        })
        .collect();
    LocalizationTower {
        ring: current,
        segment_vars,
        segment_maps,
    }
}

impl SpacePresentation {
    pub fn single(ring: Ring) -> Space {
        Arc::new(SpacePresentation {
            pieces: vec![ring],
            kind: SpaceKind::Single,
        })
    }

    pub fn principal_cover(base: Ring, towers: Vec<Vec<Polynomial>>) -> Space {
        let pieces: Vec<Ring> = towers
            .iter()
            .map(|tw| RingPresentation::localize_all(&base, tw).0)
            .collect();
        Arc::new(SpacePresentation {
            pieces,
            kind: SpaceKind::PrincipalCover { base, towers },
        })
    }

    pub fn disjoint(pieces: Vec<Ring>) -> Space {
        Arc::new(SpacePresentation {
            pieces,
            kind: SpaceKind::Disjoint,
        })
    }

    pub fn pair(
        first: Ring,
        second: Ring,
        overlap: Ring,
        from_first: RingMap,
        from_second: RingMap,
    ) -> Space {
        Arc::new(SpacePresentation {
            pieces: vec![first, second],
            kind: SpaceKind::Pair {
                overlap,
                from_first,
                from_second,
            },
        })
    }

    pub fn pieces(&self) -> &[Ring] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &Ring {
        &self.pieces[i]
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// The zero ring, used for empty overlaps.
    fn zero_ring_from(piece: &Ring) -> Ring {
        RingPresentation::quotient(piece, vec![piece.one()])
    }

    /// Ring of the intersection of the listed pieces, with the restriction
    /// map from each. `subset` must be strictly increasing.
    pub fn intersection(&self, subset: &[usize]) -> Result<(Ring, Vec<RingMap>)> {
        assert!(!subset.is_empty());
        assert!(subset.windows(2).all(|w| w[0] < w[1]));
        if subset.len() == 1 {
            let p = self.pieces[subset[0]].clone();
            return Ok((p.clone(), vec![RingMap::identity(p)]));
        }
        match &self.kind {
            SpaceKind::Single => {
                let p = self.pieces[0].clone();
                Ok((p.clone(), vec![RingMap::identity(p); subset.len()]))
            }
            SpaceKind::Disjoint => {
                let z = SpacePresentation::zero_ring_from(&self.pieces[subset[0]]);
                let maps = subset
                    .iter()
                    .map(|&i| {
                        let src = self.pieces[i].clone();
                        let images = vec![z.zero(); src.nvars()];
                        RingMap::new_unchecked(src, z.clone(), images)
                    })
                    .collect();
                Ok((z, maps))
            }
            SpaceKind::Pair {
                overlap,
                from_first,
                from_second,
            } => {
                if subset == [0, 1] {
                    Ok((
                        overlap.clone(),
                        vec![from_first.clone(), from_second.clone()],
                    ))
                } else {
                    Err(Error::InvalidInput(
                        "pair space has exactly two pieces".into(),
                    ))
                }
            }
            SpaceKind::PrincipalCover { base, towers } => {
                let segments: Vec<(Ring, RingMap, Vec<Polynomial>)> = subset
                    .iter()
                    .map(|&i| {
                        (
                            base.clone(),
                            RingMap::identity(base.clone()),
                            towers[i].clone(),
                        )
                    })
                    .collect();
                let tower = build_tower(base, &segments);
                Ok((tower.ring, tower.segment_maps))
            }
        }
    }
}

/// A coherent sheaf on a space: one module per piece plus gluing
/// isomorphisms over pairwise intersections, subject to the cocycle
/// condition on triples.
#[derive(Debug, Clone)]
pub struct CoherentSheafOnX {
    pub space: Space,
    pub modules: Vec<FpModule>,
    /// keyed by (i, j) with i < j: iso from `modules[i]` to `modules[j]`
    /// restricted to the intersection
    pub gluing: BTreeMap<(usize, usize), ModuleMap>,
}

impl CoherentSheafOnX {
    /// Single-piece sheaf.
    pub fn on_single(space: Space, module: FpModule) -> Result<CoherentSheafOnX> {
        if space.pieces().len() != 1 {
            return Err(Error::InvalidInput("expected a single-piece space".into()));
        }
        if module.ring() != space.piece(0) {
            return Err(Error::RingMismatch(
                "module is not over the piece ring".into(),
            ));
        }
        Ok(CoherentSheafOnX {
            space,
            modules: vec![module],
            gluing: BTreeMap::new(),
        })
    }

    /// Builds descent data and verifies gluing shapes; `gluing` maps are
    /// between base-changed modules over each pairwise intersection.
    pub fn new(
        space: Space,
        modules: Vec<FpModule>,
        gluing: BTreeMap<(usize, usize), ModuleMap>,
    ) -> Result<CoherentSheafOnX> {
        if modules.len() != space.pieces().len() {
            return Err(Error::ShapeMismatch("one module per piece required".into()));
        }
        for (m, p) in modules.iter().zip(space.pieces()) {
            if m.ring() != p {
                return Err(Error::RingMismatch(
                    "module is not over its piece ring".into(),
                ));
            }
        }
        let sheaf = CoherentSheafOnX {
            space,
            modules,
            gluing,
        };
        sheaf.verify_gluing()?;
        Ok(sheaf)
    }

    fn verify_gluing(&self) -> Result<()> {
        let n = self.modules.len();
        for i in 0..n {
            for j in i + 1..n {
                let (ring, maps) = self.space.intersection(&[i, j])?;
                if ring.is_zero_ring() {
                    continue;
                }
                let g = self.gluing.get(&(i, j)).ok_or_else(|| {
                    Error::InvalidInput(format!("missing gluing iso for pieces ({}, {})", i, j))
                })?;
                let mi = base_change(&self.modules[i], &maps[0]);
                let mj = base_change(&self.modules[j], &maps[1]);
                if g.source != mi || g.target != mj {
                    return Err(Error::ShapeMismatch(format!(
                        "gluing iso for ({}, {}) does not match restricted modules",
                        i, j
                    )));
                }
                if !g.is_isomorphism() {
                    return Err(Error::InvalidInput(format!(
                        "gluing map for ({}, {}) is not an isomorphism",
                        i, j
                    )));
                }
            }
        }
        self.verify_cocycle()
    }

    /// Cocycle condition on all triples; requires refinement maps from the
    /// pairwise intersections into the triple intersection.
    pub fn verify_cocycle(&self) -> Result<()> {
        let n = self.modules.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    self.check_triple(a, b, c)?;
                }
            }
        }
        Ok(())
    }

    fn check_triple(&self, a: usize, b: usize, c: usize) -> Result<()> {
        let (tring, tmaps) = self.space.intersection(&[a, b, c])?;
        if tring.is_zero_ring() {
            return Ok(());
        }
        let refine =
            |sub: &[usize]| -> Result<RingMap> { refinement_map(&self.space, sub, &[a, b, c]) };
        let gab = restrict_gluing(self.gluing.get(&(a, b)).unwrap(), &refine(&[a, b])?)?;
        let gbc = restrict_gluing(self.gluing.get(&(b, c)).unwrap(), &refine(&[b, c])?)?;
        let gac = restrict_gluing(self.gluing.get(&(a, c)).unwrap(), &refine(&[a, c])?)?;
        // the restricted sources/targets are base changes along different
        // towers of the same pieces; identify them by presentation
        let ma = base_change(&self.modules[a], &tmaps[0]);
        let mb = base_change(&self.modules[b], &tmaps[1]);
        let mc = base_change(&self.modules[c], &tmaps[2]);
        let gab = rebase(gab, &ma, &mb)?;
        let gbc = rebase(gbc, &mb, &mc)?;
        let gac = rebase(gac, &ma, &mc)?;
        let composed = gbc.compose(&gab)?;
        if !composed.equals(&gac) {
            return Err(Error::CocycleFailure(a, b, c));
        }
        Ok(())
    }
}

/// Restriction map between intersections `sub ⊆ sup` of the same space.
pub fn refinement_map(space: &Space, sub: &[usize], sup: &[usize]) -> Result<RingMap> {
    assert!(sub.iter().all(|i| sup.contains(i)));
    match space.kind() {
        SpaceKind::Single => {
            let p = space.piece(0).clone();
            Ok(RingMap::identity(p))
        }
        SpaceKind::Disjoint => {
            let (sub_ring, _) = space.intersection(sub)?;
            let (sup_ring, _) = space.intersection(sup)?;
            let images = vec![sup_ring.zero(); sub_ring.nvars()];
            Ok(RingMap::new_unchecked(sub_ring, sup_ring, images))
        }
        SpaceKind::Pair { .. } => {
            if sub == sup {
                let (r, _) = space.intersection(sub)?;
                Ok(RingMap::identity(r))
            } else {
                let (sub_ring, _) = space.intersection(sub)?;
                let (_sup_ring, maps) = space.intersection(sup)?;
                // sub is a single piece inside the pair overlap
                let pos = sup.iter().position(|x| x == &sub[0]).unwrap();
                let _ = sub_ring;
                Ok(maps[pos].clone())
            }
        }
        SpaceKind::PrincipalCover { base, towers } => {
            let (sub_ring, _) = space.intersection(sub)?;
            let (sup_ring, _) = space.intersection(sup)?;
            // positional mapping: base variables first, then inverse
            // variables segment by segment
            let mut images: Vec<Polynomial> = (0..base.nvars()).map(|i| sup_ring.var(i)).collect();
            // positions of each sup segment's inverse variables
            let mut sup_offsets: BTreeMap<usize, usize> = BTreeMap::new();
            let mut off = base.nvars();
            for &s in sup {
                sup_offsets.insert(s, off);
                off += towers[s].len();
            }
            for &s in sub {
                let start = sup_offsets[&s];
                for k in 0..towers[s].len() {
                    images.push(sup_ring.var(start + k));
                }
            }
            Ok(RingMap::new_unchecked(sub_ring, sup_ring, images))
        }
    }
}

fn restrict_gluing(g: &ModuleMap, refine: &RingMap) -> Result<ModuleMap> {
    base_change_map(g, refine)
}

/// Reinterprets a map between base-changed presentations as a map between
/// structurally equal presentations built along another route.
fn rebase(g: ModuleMap, source: &FpModule, target: &FpModule) -> Result<ModuleMap> {
    if g.source.gens() != source.gens() || g.target.gens() != target.gens() {
        return Err(Error::ShapeMismatch(
            "restricted gluing does not match triple-restricted modules".into(),
        ));
    }
    ModuleMap::new(source.clone(), target.clone(), g.matrix)
}
