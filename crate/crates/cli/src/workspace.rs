//! Resolution of parsed blocks into live engine objects.

use crate::parse::{parse_blocks, RawBlock};
use sheafstack::apot::ApotData;
use sheafstack::chart::{LocalChart, SheafOnF};
use sheafstack::kuranishi::{KuranishiModel, OmegaCompat};
use sheafstack::matrix::PolyMatrix;
use sheafstack::module::{base_change, FpModule};
use sheafstack::order::MonomialOrder;
use sheafstack::poly::Polynomial;
use sheafstack::ring::{Ring, RingMap, RingPresentation};
use sheafstack::space::{Space, SpacePresentation};
use std::collections::BTreeMap;

#[derive(Debug)]
pub struct BuildError {
    pub msg: String,
}

impl std::fmt::Display for BuildError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.msg)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, BuildError> {
    Err(BuildError { msg: msg.into() })
}

pub struct RingEntity {
    pub ring: Ring,
}

pub struct IdealEntity {
    pub ring: String,
    pub gens: Vec<Polynomial>,
}

pub struct ModuleEntity {
    pub module: FpModule,
}

pub struct SpaceEntity {
    pub space: Space,
    /// maps from the base ring into each piece (principal covers)
    pub piece_maps: Vec<RingMap>,
}

pub struct XSheafEntity {
    pub space: String,
    pub per_piece: Vec<FpModule>,
}

pub struct ChartEntity {
    pub chart: LocalChart,
    pub xsheaf: String,
}

pub struct SheafEntity {
    pub sheaf: SheafOnF,
    pub chart_names: Vec<String>,
}

pub struct ApotEntity {
    pub data: ApotData,
    pub twists: Vec<usize>,
}

pub struct RoofEntity {
    pub roof: sheafstack::chart::CommonRoof,
    pub first: String,
    pub second: String,
    pub xsheaf: String,
}

#[derive(Default)]
pub struct Workspace {
    pub blocks: Vec<(String, String)>,
    pub rings: BTreeMap<String, RingEntity>,
    pub ideals: BTreeMap<String, IdealEntity>,
    pub modules: BTreeMap<String, ModuleEntity>,
    pub spaces: BTreeMap<String, SpaceEntity>,
    pub xsheaves: BTreeMap<String, XSheafEntity>,
    pub charts: BTreeMap<String, ChartEntity>,
    pub sheaves: BTreeMap<String, SheafEntity>,
    pub kuranishi: BTreeMap<String, KuranishiModel>,
    pub compats: BTreeMap<String, OmegaCompat>,
    pub apots: BTreeMap<String, ApotEntity>,
    pub roofs: BTreeMap<String, RoofEntity>,
}

fn order_by_name(name: &str, n: usize) -> Result<MonomialOrder, BuildError> {
    match name {
        "lex" => Ok(MonomialOrder::lex(n)),
        "grlex" => Ok(MonomialOrder::grlex(n)),
        "grevlex" => Ok(MonomialOrder::grevlex(n)),
        other => err(format!("unknown order `{}`", other)),
    }
}

fn parse_polys(texts: &[String], ring: &Ring, ctx: &str) -> Result<Vec<Polynomial>, BuildError> {
    texts
        .iter()
        .map(|t| {
            ring.parse(t).map_err(|e| BuildError {
                msg: format!("{}: {}", ctx, e),
            })
        })
        .collect()
}

fn parse_matrix(rows: &[Vec<String>], ring: &Ring, ctx: &str) -> Result<PolyMatrix, BuildError> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut entries = Vec::new();
    for r in rows {
        if r.len() != ncols {
            return err(format!("{}: ragged matrix", ctx));
        }
        for t in r {
            entries.push(ring.parse(t).map_err(|e| BuildError {
                msg: format!("{}: {}", ctx, e),
            })?);
        }
    }
    Ok(PolyMatrix::new(nrows, ncols, entries))
}

impl Workspace {
    pub fn from_source(src: &str, default_order: &str) -> Result<Workspace, String> {
        let blocks = parse_blocks(src).map_err(|e| e.to_string())?;
        Workspace::from_blocks(&blocks, default_order).map_err(|e| e.msg)
    }

    fn check_fresh(&self, name: &str) -> Result<(), BuildError> {
        if self.blocks.iter().any(|(n, _)| n == name) {
            return err(format!("duplicate name `{}`", name));
        }
        Ok(())
    }

    pub fn from_blocks(blocks: &[RawBlock], default_order: &str) -> Result<Workspace, BuildError> {
        let mut ws = Workspace::default();
        for b in blocks {
            ws.check_fresh(&b.name)?;
            match b.kind.as_str() {
                "ring" => ws.add_ring(b, default_order)?,
                "ideal" => ws.add_ideal(b)?,
                "module" => ws.add_module(b)?,
                "space" => ws.add_space(b)?,
                "xsheaf" => ws.add_xsheaf(b)?,
                "chart" => ws.add_chart(b)?,
                "sheaf" => ws.add_sheaf(b)?,
                "kuranishi" => ws.add_kuranishi(b, default_order)?,
                "compat" => ws.add_compat(b)?,
                "apot" => ws.add_apot(b)?,
                "roof" => ws.add_roof(b)?,
                other => return err(format!("unknown block kind `{}`", other)),
            }
            ws.blocks.push((b.name.clone(), b.kind.clone()));
        }
        Ok(ws)
    }

    fn add_ring(&mut self, b: &RawBlock, default_order: &str) -> Result<(), BuildError> {
        let vars = b.scalars("vars").ok_or_else(|| BuildError {
            msg: format!("ring `{}` needs vars", b.name),
        })?;
        let order_name = b
            .scalar("order")
            .unwrap_or_else(|| default_order.to_string());
        let order = order_by_name(&order_name, vars.len())?;
        let mut ring = RingPresentation::polynomial(vars.clone(), order);
        let relations_text = b.scalars("relations").unwrap_or_default();
        let rels = parse_polys(&relations_text, &ring, &format!("ring `{}`", b.name))?;
        if !rels.is_empty() {
            ring = RingPresentation::quotient(&ring, rels);
        }
        let invert_text = b.scalars("invert").unwrap_or_default();
        for t in &invert_text {
            let f = ring.parse(t).map_err(|e| BuildError {
                msg: format!("ring `{}`: {}", b.name, e),
            })?;
            let (next, _) =
                RingPresentation::localize_checked(&ring, &f).map_err(|e| BuildError {
                    msg: format!("ring `{}`: {}", b.name, e),
                })?;
            ring = next;
        }
        let _ = (vars, order_name, relations_text, invert_text);
        self.rings.insert(b.name.clone(), RingEntity { ring });
        Ok(())
    }

    fn ring_of(&self, name: &str, ctx: &str) -> Result<&Ring, BuildError> {
        self.rings
            .get(name)
            .map(|r| &r.ring)
            .ok_or_else(|| BuildError {
                msg: format!("{}: unknown ring `{}`", ctx, name),
            })
    }

    fn add_ideal(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let rname = b.scalar("ring").ok_or_else(|| BuildError {
            msg: format!("ideal `{}` needs ring", b.name),
        })?;
        let ring = self
            .ring_of(&rname, &format!("ideal `{}`", b.name))?
            .clone();
        let gens = parse_polys(
            &b.scalars("generators").unwrap_or_default(),
            &ring,
            &format!("ideal `{}`", b.name),
        )?;
        self.ideals
            .insert(b.name.clone(), IdealEntity { ring: rname, gens });
        Ok(())
    }

    fn add_module(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let rname = b.scalar("ring").ok_or_else(|| BuildError {
            msg: format!("module `{}` needs ring", b.name),
        })?;
        let ring = self
            .ring_of(&rname, &format!("module `{}`", b.name))?
            .clone();
        let gens: usize = b
            .scalar("generators")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| BuildError {
                msg: format!("module `{}` needs a generator count", b.name),
            })?;
        let rel_rows = b.rows("relations").unwrap_or_default();
        let mut cols = Vec::new();
        for row in &rel_rows {
            if row.len() != gens {
                return err(format!(
                    "module `{}`: relation column has {} entries, expected {}",
                    b.name,
                    row.len(),
                    gens
                ));
            }
            let col = parse_polys(row, &ring, &format!("module `{}`", b.name))?;
            cols.push(col);
        }
        let _ = rname;
        let module = FpModule::new(ring, gens, cols);
        self.modules.insert(b.name.clone(), ModuleEntity { module });
        Ok(())
    }

    fn add_space(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let base_name = b.scalar("base");
        let cover_text = b.scalars("cover").unwrap_or_default();
        let (space, piece_maps, piece_names) = match (&base_name, cover_text.is_empty()) {
            (Some(rname), true) => {
                let ring = self.ring_of(rname, &format!("space `{}`", b.name))?.clone();
                let space = SpacePresentation::single(ring.clone());
                (space, vec![RingMap::identity(ring)], vec![rname.clone()])
            }
            (Some(rname), false) => {
                let ring = self.ring_of(rname, &format!("space `{}`", b.name))?.clone();
                let elements = parse_polys(&cover_text, &ring, &format!("space `{}`", b.name))?;
                let towers: Vec<Vec<Polynomial>> =
                    elements.iter().map(|f| vec![f.clone()]).collect();
                let space = SpacePresentation::principal_cover(ring.clone(), towers.clone());
                let maps: Vec<RingMap> = towers
                    .iter()
                    .map(|tw| RingPresentation::localize_all(&ring, tw).1)
                    .collect();
                let names = (0..elements.len())
                    .map(|i| format!("{}#{}", rname, i))
                    .collect();
                (space, maps, names)
            }
            (None, _) => {
                let pieces = b.scalars("pieces").unwrap_or_default();
                if pieces.is_empty() {
                    return err(format!("space `{}` needs base or pieces", b.name));
                }
                let rings: Vec<Ring> = pieces
                    .iter()
                    .map(|p| self.ring_of(p, &format!("space `{}`", b.name)).cloned())
                    .collect::<Result<_, _>>()?;
                let maps = rings.iter().map(|r| RingMap::identity(r.clone())).collect();
                let space = SpacePresentation::disjoint(rings);
                (space, maps, pieces)
            }
        };
        let _ = piece_names;
        self.spaces
            .insert(b.name.clone(), SpaceEntity { space, piece_maps });
        Ok(())
    }

    fn add_xsheaf(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let sname = b.scalar("space").ok_or_else(|| BuildError {
            msg: format!("xsheaf `{}` needs space", b.name),
        })?;
        let space = self.spaces.get(&sname).ok_or_else(|| BuildError {
            msg: format!("xsheaf `{}`: unknown space `{}`", b.name, sname),
        })?;
        let mname = b.scalar("module").ok_or_else(|| BuildError {
            msg: format!("xsheaf `{}` needs module", b.name),
        })?;
        let module = self.modules.get(&mname).ok_or_else(|| BuildError {
            msg: format!("xsheaf `{}`: unknown module `{}`", b.name, mname),
        })?;
        let per_piece: Vec<FpModule> = space
            .piece_maps
            .iter()
            .map(|m| base_change(&module.module, m))
            .collect();
        let _ = mname;
        self.xsheaves.insert(
            b.name.clone(),
            XSheafEntity {
                space: sname,
                per_piece,
            },
        );
        Ok(())
    }

    fn add_chart(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let fname = b.scalar("sheaf").ok_or_else(|| BuildError {
            msg: format!("chart `{}` needs sheaf", b.name),
        })?;
        let xsheaf = self.xsheaves.get(&fname).ok_or_else(|| BuildError {
            msg: format!("chart `{}`: unknown xsheaf `{}`", b.name, fname),
        })?;
        let space_ent = &self.spaces[&xsheaf.space];
        let piece: usize = b
            .scalar("piece")
            .map(|s| s.parse().unwrap_or(usize::MAX))
            .unwrap_or(0);
        if piece >= space_ent.space.pieces().len() {
            return err(format!("chart `{}`: piece {} out of range", b.name, piece));
        }
        let piece_ring = space_ent.space.piece(piece).clone();
        let tower = parse_polys(
            &b.scalars("localize").unwrap_or_default(),
            &piece_ring,
            &format!("chart `{}`", b.name),
        )?;
        let rank: usize = b
            .scalar("rank")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| BuildError {
                msg: format!("chart `{}` needs rank", b.name),
            })?;
        let value = &xsheaf.per_piece[piece];
        // the surjection matrix is given over the chart base; parse over
        // the localized ring
        let (base, _) = RingPresentation::localize_all(&piece_ring, &tower);
        let surj_rows = b.rows("surjection").ok_or_else(|| BuildError {
            msg: format!("chart `{}` needs surjection rows", b.name),
        })?;
        let surjection = parse_matrix(&surj_rows, &base, &format!("chart `{}`", b.name))?;
        let chart = LocalChart::new(
            b.name.clone(),
            space_ent.space.clone(),
            piece,
            tower,
            value,
            rank,
            surjection,
        )
        .map_err(|e| BuildError {
            msg: format!("chart `{}`: {}", b.name, e),
        })?;
        self.charts.insert(
            b.name.clone(),
            ChartEntity {
                chart,
                xsheaf: fname,
            },
        );
        Ok(())
    }

    fn add_sheaf(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let on = b.scalar("on").ok_or_else(|| BuildError {
            msg: format!("sheaf `{}` needs on", b.name),
        })?;
        if !self.xsheaves.contains_key(&on) {
            return err(format!("sheaf `{}`: unknown xsheaf `{}`", b.name, on));
        }
        let kind = b.scalar("kind").unwrap_or_else(|| "full".into());
        let charts_on: Vec<String> = self
            .blocks
            .iter()
            .filter(|(n, k)| {
                k == "chart" && self.charts.get(n).map(|c| c.xsheaf == on).unwrap_or(false)
            })
            .map(|(n, _)| n.clone())
            .collect();
        let (sheaf, chart_names) = match kind.as_str() {
            "full" => (SheafOnF::Full, charts_on),
            "zerosection" => (SheafOnF::ZeroSection, charts_on),
            "substack" => {
                let mut ideals = BTreeMap::new();
                let mut names = Vec::new();
                for e in &b.entries {
                    if let Some(chart_name) = e.key.strip_prefix("ideal.") {
                        let chart = self.charts.get(chart_name).ok_or_else(|| BuildError {
                            msg: format!("sheaf `{}`: unknown chart `{}`", b.name, chart_name),
                        })?;
                        let texts: Vec<String> = e
                            .items
                            .iter()
                            .map(|it| match it {
                                crate::parse::RawItem::Scalar(s) => Ok(s.clone()),
                                _ => err("substack ideals take scalar polynomials"),
                            })
                            .collect::<Result<_, _>>()?;
                        let gens = parse_polys(
                            &texts,
                            &chart.chart.total,
                            &format!("sheaf `{}`", b.name),
                        )?;
                        ideals.insert(chart_name.to_string(), gens);
                        names.push(chart_name.to_string());
                    }
                }
                (SheafOnF::Substack(ideals), names)
            }
            other => return err(format!("sheaf `{}`: unknown kind `{}`", b.name, other)),
        };
        let _ = (on, kind);
        self.sheaves
            .insert(b.name.clone(), SheafEntity { sheaf, chart_names });
        Ok(())
    }

    fn add_kuranishi(&mut self, b: &RawBlock, default_order: &str) -> Result<(), BuildError> {
        let vars = b.scalars("vars").ok_or_else(|| BuildError {
            msg: format!("kuranishi `{}` needs vars", b.name),
        })?;
        let order_name = b
            .scalar("order")
            .unwrap_or_else(|| default_order.to_string());
        let order = order_by_name(&order_name, vars.len())?;
        let mut ambient = RingPresentation::polynomial(vars, order);
        for t in b.scalars("invert").unwrap_or_default() {
            let f = ambient.parse(&t).map_err(|e| BuildError {
                msg: format!("kuranishi `{}`: {}", b.name, e),
            })?;
            let (next, _) =
                RingPresentation::localize_checked(&ambient, &f).map_err(|e| BuildError {
                    msg: format!("kuranishi `{}`: {}", b.name, e),
                })?;
            ambient = next;
        }
        let model = if let Some(f_text) = b.scalar("potential") {
            let f = ambient.parse(&f_text).map_err(|e| BuildError {
                msg: format!("kuranishi `{}`: {}", b.name, e),
            })?;
            KuranishiModel::d_critical(b.name.clone(), ambient, &f)
        } else {
            let section = parse_polys(
                &b.scalars("section").unwrap_or_default(),
                &ambient,
                &format!("kuranishi `{}`", b.name),
            )?;
            KuranishiModel::new(b.name.clone(), ambient, section)
        }
        .map_err(|e| BuildError {
            msg: format!("kuranishi `{}`: {}", b.name, e),
        })?;
        self.kuranishi.insert(b.name.clone(), model);
        Ok(())
    }

    fn add_compat(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let fine_name = b.scalar("fine").ok_or_else(|| BuildError {
            msg: format!("compat `{}` needs fine", b.name),
        })?;
        let coarse_name = b.scalar("coarse").ok_or_else(|| BuildError {
            msg: format!("compat `{}` needs coarse", b.name),
        })?;
        let fine = self
            .kuranishi
            .get(&fine_name)
            .ok_or_else(|| BuildError {
                msg: format!("compat `{}`: unknown model `{}`", b.name, fine_name),
            })?
            .clone();
        let coarse = self
            .kuranishi
            .get(&coarse_name)
            .ok_or_else(|| BuildError {
                msg: format!("compat `{}`: unknown model `{}`", b.name, coarse_name),
            })?
            .clone();
        let phi_images = parse_polys(
            &b.scalars("phi").unwrap_or_default(),
            &fine.ambient,
            &format!("compat `{}`", b.name),
        )?;
        let phi = RingMap::new(coarse.ambient.clone(), fine.ambient.clone(), phi_images).map_err(
            |e| BuildError {
                msg: format!("compat `{}`: {}", b.name, e),
            },
        )?;
        let eta_rows = b.rows("eta").ok_or_else(|| BuildError {
            msg: format!("compat `{}` needs eta rows", b.name),
        })?;
        let eta = parse_matrix(&eta_rows, &fine.ambient, &format!("compat `{}`", b.name))?;
        self.compats.insert(
            b.name.clone(),
            OmegaCompat {
                fine,
                coarse,
                phi,
                eta,
                right_inverse: None,
            },
        );
        Ok(())
    }

    fn add_apot(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let data = if let Some(cname) = b.scalar("compat") {
            let compat = self
                .compats
                .get(&cname)
                .ok_or_else(|| BuildError {
                    msg: format!("apot `{}`: unknown compat `{}`", b.name, cname),
                })?
                .clone();
            ApotData::from_compat(compat)
        } else {
            let mname = b.scalar("model").ok_or_else(|| BuildError {
                msg: format!("apot `{}` needs model or compat", b.name),
            })?;
            let model = self.kuranishi.get(&mname).ok_or_else(|| BuildError {
                msg: format!("apot `{}`: unknown model `{}`", b.name, mname),
            })?;
            if let Some(copies) = b.scalar("copies").and_then(|s| s.parse::<usize>().ok()) {
                ApotData::redundant_cover(model, copies)
            } else {
                let cover = parse_polys(
                    &b.scalars("cover").unwrap_or_default(),
                    &model.ambient,
                    &format!("apot `{}`", b.name),
                )?;
                if cover.is_empty() {
                    ApotData::disjoint(vec![model.clone()])
                } else {
                    ApotData::principal_cover(model, cover)
                }
            }
        }
        .map_err(|e| BuildError {
            msg: format!("apot `{}`: {}", b.name, e),
        })?;
        let mut data = data;
        // descent overrides: psi.<a>.<b> = rows
        for e in &b.entries {
            if let Some(rest) = e.key.strip_prefix("psi.") {
                let parts: Vec<&str> = rest.split('.').collect();
                if parts.len() != 2 {
                    return err(format!("apot `{}`: bad psi key `{}`", b.name, e.key));
                }
                let a: usize = parts[0].parse().map_err(|_| BuildError {
                    msg: format!("apot `{}`: bad psi index", b.name),
                })?;
                let bb: usize = parts[1].parse().map_err(|_| BuildError {
                    msg: format!("apot `{}`: bad psi index", b.name),
                })?;
                let (ring, _) = data
                    .space
                    .intersection(&[a.min(bb), a.max(bb)])
                    .map_err(|er| BuildError {
                        msg: format!("apot `{}`: {}", b.name, er),
                    })?;
                let rows: Vec<Vec<String>> = e
                    .items
                    .iter()
                    .map(|it| match it {
                        crate::parse::RawItem::Row(r) => Ok(r.clone()),
                        _ => err("psi takes matrix rows"),
                    })
                    .collect::<Result<_, _>>()?;
                let m = parse_matrix(&rows, &ring, &format!("apot `{}`", b.name))?;
                data.set_psi(a.min(bb), a.max(bb), m);
            }
        }
        let n = data.models.len();
        let twists: Vec<usize> = match b.scalars("twist") {
            None => vec![1; n],
            Some(ts) if ts.len() == 1 => {
                let t = ts[0].parse().map_err(|_| BuildError {
                    msg: format!("apot `{}`: bad twist", b.name),
                })?;
                vec![t; n]
            }
            Some(ts) => {
                if ts.len() != n {
                    return err(format!("apot `{}`: need one twist per piece", b.name));
                }
                ts.iter()
                    .map(|t| {
                        t.parse().map_err(|_| BuildError {
                            msg: format!("apot `{}`: bad twist", b.name),
                        })
                    })
                    .collect::<Result<_, _>>()?
            }
        };
        self.apots
            .insert(b.name.clone(), ApotEntity { data, twists });
        Ok(())
    }

    fn add_roof(&mut self, b: &RawBlock) -> Result<(), BuildError> {
        let first = b.scalar("first").ok_or_else(|| BuildError {
            msg: format!("roof `{}` needs first", b.name),
        })?;
        let second = b.scalar("second").ok_or_else(|| BuildError {
            msg: format!("roof `{}` needs second", b.name),
        })?;
        let q1 = self.charts.get(&first).ok_or_else(|| BuildError {
            msg: format!("roof `{}`: unknown chart `{}`", b.name, first),
        })?;
        let q2 = self.charts.get(&second).ok_or_else(|| BuildError {
            msg: format!("roof `{}`: unknown chart `{}`", b.name, second),
        })?;
        if q1.xsheaf != q2.xsheaf {
            return err(format!(
                "roof `{}`: charts present different sheaves",
                b.name
            ));
        }
        let roof = sheafstack::chart::build_roof(&q1.chart, &q2.chart).map_err(|e| BuildError {
            msg: format!("roof `{}`: {}", b.name, e),
        })?;
        let xsheaf = q1.xsheaf.clone();
        self.roofs.insert(
            b.name.clone(),
            RoofEntity {
                roof,
                first,
                second,
                xsheaf,
            },
        );
        Ok(())
    }
}

/// Normalized re-rendering of parsed blocks; parsing the output again
/// yields the same blocks.
pub fn render_blocks(blocks: &[RawBlock]) -> String {
    let mut out = String::new();
    for b in blocks {
        out.push_str(&format!("{} {} {{\n", b.name, b.kind));
        for e in &b.entries {
            let items: Vec<String> = e
                .items
                .iter()
                .map(|it| match it {
                    crate::parse::RawItem::Scalar(s) => s.clone(),
                    crate::parse::RawItem::Row(r) => format!("[{}]", r.join(", ")),
                })
                .collect();
            out.push_str(&format!("  {} = {};\n", e.key, items.join(", ")));
        }
        out.push_str("}\n");
    }
    out
}
