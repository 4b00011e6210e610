//! Command execution and deterministic report rendering.

use crate::workspace::Workspace;
use serde_json::{json, Map, Value};
use sheafstack::apot::{dt_number, global_cone, global_virtual_sheaf, validate_apot};
use sheafstack::chart::koszul_homology_chart;
use sheafstack::groebner::buchberger;
use sheafstack::hilbert::length;
use sheafstack::ktheory::{gysin, KClass};
use sheafstack::kuranishi::{build_psi, check_omega_compat, virtual_sheaf_chart};
use sheafstack::module::FpModule;

pub struct Outcome {
    pub text: String,
    pub json: Value,
    /// 0 = success, 1 = a check failed
    pub status: i32,
}

fn render_module(m: &FpModule) -> String {
    let ring = m.ring();
    let cols: Vec<String> = m
        .relations()
        .columns()
        .iter()
        .map(|c| {
            let entries: Vec<String> = c.iter().map(|p| ring.show(p)).collect();
            entries.join(",")
        })
        .collect();
    let len = match length(m) {
        Some(v) => v.to_string(),
        None => "inf".into(),
    };
    format!(
        "gens={} rels=({}) length={}",
        m.gens(),
        cols.join("; "),
        len
    )
}

fn render_class(c: &KClass) -> String {
    let (s, _) = c.simplify();
    if s.terms().is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = s
        .terms()
        .iter()
        .map(|(sign, m)| {
            let len = match length(m) {
                Some(v) => v.to_string(),
                None => "inf".into(),
            };
            format!(
                "{}{}*[gens={} length={}]",
                if *sign >= 0 { "+" } else { "-" },
                sign.abs(),
                m.gens(),
                len
            )
        })
        .collect();
    parts.join(" ")
}

fn class_json(c: &KClass) -> Value {
    let (s, _) = c.simplify();
    let terms: Vec<Value> = s
        .terms()
        .iter()
        .map(|(sign, m)| {
            json!({
                "sign": sign,
                "gens": m.gens(),
                "length": length(m).map(|v| v.to_string()).unwrap_or_else(|| "inf".into()),
            })
        })
        .collect();
    Value::Array(terms)
}

/// Invariant fallback for classes without finite length: a signed
/// truncated Hilbert vector with unit weights, when the data is graded.
fn invariant_vector(c: &KClass, bound: i64) -> Option<Vec<i64>> {
    c.hilbert_vector(&vec![1u32; c.ring().nvars()], bound).ok()
}

pub fn run(ws: &Workspace, cmd: &str, degree_bound: i64) -> Result<Outcome, String> {
    match cmd {
        "groebner" => run_groebner(ws),
        "homology" => run_homology(ws),
        "gysin" => run_gysin(ws, degree_bound),
        "vsheaf" => run_vsheaf(ws, degree_bound),
        "apot-check" => run_apot_check(ws),
        "dt" => run_dt(ws),
        other => Err(format!("unknown command `{}`", other)),
    }
}

fn run_groebner(ws: &Workspace) -> Result<Outcome, String> {
    let mut text = String::new();
    let mut items = Vec::new();
    for (name, kind) in &ws.blocks {
        if kind != "ideal" {
            continue;
        }
        let ideal = &ws.ideals[name];
        let ring = &ws.rings[&ideal.ring].ring;
        let basis = buchberger(&ideal.gens, ring.order());
        text.push_str(&format!("== groebner {}\n", name));
        text.push_str(&format!("ring: {}\n", ideal.ring));
        let mut basis_strings = Vec::new();
        for (i, g) in basis.iter().enumerate() {
            let s = ring.show(g);
            text.push_str(&format!("basis[{}] = {}\n", i, s));
            basis_strings.push(s);
        }
        if basis.is_empty() {
            text.push_str("basis is empty\n");
        }
        items.push(json!({"name": name, "ring": ideal.ring, "basis": basis_strings}));
    }
    Ok(Outcome {
        text,
        json: json!({"command": "groebner", "items": items}),
        status: 0,
    })
}

fn run_homology(ws: &Workspace) -> Result<Outcome, String> {
    let mut text = String::new();
    let mut items = Vec::new();
    for (name, kind) in &ws.blocks {
        if kind != "sheaf" {
            continue;
        }
        let sheaf = &ws.sheaves[name];
        for chart_name in &sheaf.chart_names {
            let chart = &ws.charts[chart_name].chart;
            text.push_str(&format!("== homology {} on {}\n", name, chart_name));
            let mut degrees = Vec::new();
            for i in 0..=chart.rank {
                let h = koszul_homology_chart(chart, &sheaf.sheaf, i).map_err(|e| e.to_string())?;
                let m = h.base_module.prune();
                if m.is_zero_module() {
                    text.push_str(&format!("H^{}: zero\n", i));
                    degrees.push(json!({"degree": i, "zero": true}));
                } else {
                    text.push_str(&format!("H^{}: {}\n", i, render_module(&m)));
                    degrees.push(json!({
                        "degree": i,
                        "gens": m.gens(),
                        "length": length(&m).map(|v| v.to_string()).unwrap_or_else(|| "inf".into()),
                    }));
                }
            }
            items.push(json!({"sheaf": name, "chart": chart_name, "degrees": degrees}));
        }
    }
    // roof blocks: report the comparison isomorphisms for every sheaf on
    // the same presentation
    for (name, kind) in &ws.blocks {
        if kind != "roof" {
            continue;
        }
        let roof = &ws.roofs[name];
        for (sname, skind) in &ws.blocks {
            if skind != "sheaf" {
                continue;
            }
            let sheaf = &ws.sheaves[sname];
            if !sheaf.chart_names.contains(&roof.first) || !sheaf.chart_names.contains(&roof.second)
            {
                continue;
            }
            text.push_str(&format!(
                "== roof {} ({} ~ {}) with {}\n",
                name, roof.first, roof.second, sname
            ));
            let top = roof
                .roof
                .to_first
                .target
                .rank
                .min(roof.roof.to_second.target.rank);
            let mut degrees = Vec::new();
            for i in 0..=top {
                let cmp = sheafstack::chart::roof_comparison(&roof.roof, &sheaf.sheaf, i)
                    .map_err(|e| e.to_string())?;
                let iso = cmp.is_isomorphism();
                text.push_str(&format!("comparison[{}]: iso={}\n", i, iso));
                degrees.push(json!({"degree": i, "iso": iso}));
            }
            items.push(json!({"roof": name, "sheaf": sname, "degrees": degrees}));
        }
    }
    Ok(Outcome {
        text,
        json: json!({"command": "homology", "items": items}),
        status: 0,
    })
}

fn run_gysin(ws: &Workspace, degree_bound: i64) -> Result<Outcome, String> {
    let mut text = String::new();
    let mut items = Vec::new();
    for (name, kind) in &ws.blocks {
        if kind != "sheaf" {
            continue;
        }
        let sheaf = &ws.sheaves[name];
        let charts: Vec<sheafstack::chart::LocalChart> = sheaf
            .chart_names
            .iter()
            .map(|n| ws.charts[n].chart.clone())
            .collect();
        if charts.is_empty() {
            continue;
        }
        text.push_str(&format!("== gysin {}\n", name));
        text.push_str(&format!("cover: {}\n", sheaf.chart_names.join(", ")));
        let family = gysin(&charts, &sheaf.sheaf).map_err(|e| e.to_string())?;
        let mut pieces = Vec::new();
        for (k, class) in family.classes.iter().enumerate() {
            text.push_str(&format!(
                "piece {}: class = {}\n",
                sheaf.chart_names[k],
                render_class(class)
            ));
            pieces.push(json!({
                "chart": sheaf.chart_names[k],
                "class": class_json(class),
            }));
        }
        match family.euler_characteristic() {
            Ok(chi) => {
                text.push_str(&format!("chi = {}\n", chi));
                items.push(json!({"name": name, "pieces": pieces, "chi": chi.to_string()}));
            }
            Err(_) => {
                let inv = invariant_vector(&family.classes[0], degree_bound);
                match inv {
                    Some(v) => {
                        let rendered: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                        text.push_str(&format!(
                            "chi undefined; invariant vector = [{}]\n",
                            rendered.join(", ")
                        ));
                        items.push(json!({"name": name, "pieces": pieces, "invariant": rendered}));
                    }
                    None => {
                        text.push_str("chi undefined; no graded invariant available\n");
                        items.push(json!({"name": name, "pieces": pieces}));
                    }
                }
            }
        }
    }
    Ok(Outcome {
        text,
        json: json!({"command": "gysin", "items": items}),
        status: 0,
    })
}

fn run_vsheaf(ws: &Workspace, degree_bound: i64) -> Result<Outcome, String> {
    let mut text = String::new();
    let mut items = Vec::new();
    for (name, kind) in &ws.blocks {
        if kind == "kuranishi" {
            let model = &ws.kuranishi[name];
            let (class, cone) = virtual_sheaf_chart(model).map_err(|e| e.to_string())?;
            text.push_str(&format!("== vsheaf {}\n", name));
            text.push_str(&format!("ambient: {}\n", model.ambient));
            let section: Vec<String> = model
                .section
                .iter()
                .map(|s| model.ambient.show(s))
                .collect();
            text.push_str(&format!("section: ({})\n", section.join(", ")));
            text.push_str(&format!("rank: {}\n", model.rank));
            let rees: Vec<String> = cone
                .rees_part
                .iter()
                .map(|p| cone.ambient_total.show(p))
                .collect();
            let cone_text = if rees.is_empty() {
                "(0)".to_string()
            } else {
                format!("({})", rees.join(", "))
            };
            text.push_str(&format!("cone ideal: {}\n", cone_text));
            text.push_str(&format!("class: {}\n", render_class(&class)));
            match class.euler_characteristic() {
                Ok(chi) => {
                    text.push_str(&format!("chi = {}\n", chi));
                    items.push(json!({
                        "name": name, "rank": model.rank, "cone": rees,
                        "class": class_json(&class), "chi": chi.to_string(),
                    }));
                }
                Err(_) => {
                    let inv = invariant_vector(&class, degree_bound);
                    match inv {
                        Some(v) => {
                            let rendered: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                            text.push_str(&format!(
                                "chi undefined; invariant vector = [{}]\n",
                                rendered.join(", ")
                            ));
                            items.push(json!({
                                "name": name, "rank": model.rank, "cone": rees,
                                "class": class_json(&class), "invariant": rendered,
                            }));
                        }
                        None => {
                            text.push_str("chi undefined\n");
                            items.push(json!({
                                "name": name, "rank": model.rank, "cone": rees,
                                "class": class_json(&class),
                            }));
                        }
                    }
                }
            }
        } else if kind == "apot" {
            let apot = &ws.apots[name];
            let gv = global_virtual_sheaf(&apot.data).map_err(|e| e.to_string())?;
            text.push_str(&format!("== vsheaf {}\n", name));
            text.push_str(&format!("pieces: {}\n", apot.data.models.len()));
            let mut pieces = Vec::new();
            for (k, class) in gv.classes.iter().enumerate() {
                text.push_str(&format!("piece {}: class = {}\n", k, render_class(class)));
                pieces.push(class_json(class));
            }
            match gv.euler {
                Some(chi) => {
                    text.push_str(&format!("chi = {}\n", chi));
                    items.push(json!({"name": name, "pieces": pieces, "chi": chi.to_string()}));
                }
                None => {
                    text.push_str("chi undefined\n");
                    items.push(json!({"name": name, "pieces": pieces}));
                }
            }
        }
    }
    let _ = degree_bound;
    Ok(Outcome {
        text,
        json: json!({"command": "vsheaf", "items": items}),
        status: 0,
    })
}

fn run_apot_check(ws: &Workspace) -> Result<Outcome, String> {
    let mut text = String::new();
    let mut items = Vec::new();
    let mut status = 0;
    for (name, kind) in &ws.blocks {
        if kind == "apot" {
            let apot = &ws.apots[name];
            text.push_str(&format!("== apot-check {}\n", name));
            let report = validate_apot(&apot.data).map_err(|e| e.to_string())?;
            let mut obj = Map::new();
            obj.insert("name".into(), json!(name));
            for ((a, b), ok) in &report.descent_isos {
                text.push_str(&format!("descent ({}, {}): iso={}\n", a, b, ok));
            }
            if report.cocycle_failures.is_empty() {
                text.push_str("cocycle: ok\n");
            } else {
                for (a, b, c) in &report.cocycle_failures {
                    text.push_str(&format!("cocycle: FAIL on triple ({}, {}, {})\n", a, b, c));
                }
            }
            for (label, ok) in &report.eta_checks {
                text.push_str(&format!("eta: {} = {}\n", label, ok));
            }
            let mut pass = report.passed();
            obj.insert(
                "cocycle_failures".into(),
                json!(report
                    .cocycle_failures
                    .iter()
                    .map(|t| format!("({},{},{})", t.0, t.1, t.2))
                    .collect::<Vec<_>>()),
            );
            if pass {
                match global_cone(&apot.data) {
                    Ok(cone) => {
                        for ((a, b), ok) in &cone.agreements {
                            text.push_str(&format!("cone agreement ({}, {}): {}\n", a, b, ok));
                        }
                    }
                    Err(e) => {
                        text.push_str(&format!("cone agreement: FAIL ({})\n", e));
                        pass = false;
                    }
                }
            }
            text.push_str(&format!("result: {}\n", if pass { "PASS" } else { "FAIL" }));
            obj.insert("result".into(), json!(if pass { "PASS" } else { "FAIL" }));
            if !pass {
                status = 1;
            }
            items.push(Value::Object(obj));
        } else if kind == "compat" {
            let compat = &ws.compats[name];
            text.push_str(&format!("== apot-check {}\n", name));
            let report = check_omega_compat(compat).map_err(|e| e.to_string())?;
            text.push_str(&format!(
                "condition 1 (diagram commutes): {}\n",
                pass_str(report.diagram_commutes)
            ));
            text.push_str(&format!(
                "condition 2 (eta surjective, sections match): {}\n",
                pass_str(report.eta_surjective && report.eta_matches_sections)
            ));
            text.push_str(&format!(
                "condition 3 (obstruction iso): {}\n",
                pass_str(report.obstruction_iso)
            ));
            let mut pass = report.passed();
            if pass {
                match build_psi(compat) {
                    Ok(psi) => {
                        text.push_str(&format!(
                            "psi: quasi-iso={} h1-matches-eta={}\n",
                            psi.quasi_iso, psi.h1_matches_eta
                        ));
                        pass = psi.quasi_iso && psi.h1_matches_eta;
                    }
                    Err(e) => {
                        text.push_str(&format!("psi: FAIL ({})\n", e));
                        pass = false;
                    }
                }
            } else {
                for d in &report.detail {
                    text.push_str(&format!("detail: {}\n", d));
                }
            }
            text.push_str(&format!("result: {}\n", if pass { "PASS" } else { "FAIL" }));
            if !pass {
                status = 1;
            }
            items.push(json!({"name": name, "result": if pass { "PASS" } else { "FAIL" }}));
        }
    }
    Ok(Outcome {
        text,
        json: json!({"command": "apot-check", "items": items}),
        status,
    })
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn run_dt(ws: &Workspace) -> Result<Outcome, String> {
    let mut text = String::new();
    let mut items = Vec::new();
    for (name, kind) in &ws.blocks {
        if kind != "apot" {
            continue;
        }
        let apot = &ws.apots[name];
        text.push_str(&format!("== dt {}\n", name));
        let twists: Vec<String> = apot.twists.iter().map(|t| t.to_string()).collect();
        text.push_str(&format!("twist: {}\n", twists.join(", ")));
        let value = dt_number(&apot.data, &apot.twists).map_err(|e| e.to_string())?;
        text.push_str(&format!("dt = {}\n", value));
        items.push(json!({"name": name, "twist": twists, "dt": value.to_string()}));
    }
    Ok(Outcome {
        text,
        json: json!({"command": "dt", "items": items}),
        status: 0,
    })
}
