//! The document format: one flat JSON file describing algebras, spaces,
//! maps, sheaves, complexes and composable chains, with string IDs and
//! cross-references. Loading validates every record; errors pinpoint the
//! failing record.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use dgperf_core::algebra::{AlgebraMap, AlgebraRef, FinAlgebra, FinModule};
use dgperf_core::dgcat::{DComplex, DComplexRef};
use dgperf_core::error::Caps;
use dgperf_core::fp::Matrix;
use dgperf_core::rectify::{DMorphism, DObject};
use dgperf_core::ringedspace::{spec, spec_map, Open, RingedMap, SpaceRef, SpecSpace};
use dgperf_core::sheaf::{ext_by_zero, Sheaf};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Document {
    pub version: u32,
    #[serde(default)]
    pub algebras: Vec<AlgebraRecord>,
    #[serde(default)]
    pub algebra_maps: Vec<AlgebraMapRecord>,
    #[serde(default)]
    pub spaces: Vec<SpaceRecord>,
    #[serde(default)]
    pub maps: Vec<MapRecord>,
    #[serde(default)]
    pub sheaves: Vec<SheafRecord>,
    #[serde(default)]
    pub complexes: Vec<ComplexRecord>,
    #[serde(default)]
    pub chains: Vec<ChainRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraRecord {
    pub id: String,
    pub p: u32,
    /// monic polynomial, low degree first, defining `F_p[x]/(f)`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<u32>>,
    /// explicit structure constants
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableRecord>,
    /// product of two previously declared algebras
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRecord {
    pub dim: usize,
    pub labels: Vec<String>,
    /// dim^3 scalars, index `(i*dim + j)*dim + k`
    pub mul: Vec<u32>,
    pub unit: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraMapRecord {
    pub id: String,
    pub source: String,
    pub target: String,
    /// row-major, target.dim x source.dim
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub id: String,
    /// spectrum of a declared algebra
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    /// explicit finite ringed space
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub le: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stalks: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub res: Vec<ResRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResRecord {
    pub from: String,
    pub to: String,
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapRecord {
    pub id: String,
    pub source: String,
    pub target: String,
    /// spectrum of a declared algebra map (target space = spec of its
    /// source algebra)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_map: Option<String>,
    /// explicit data: image point label per source point, in point order
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_map: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pullbacks: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SheafRecord {
    pub id: String,
    pub space: String,
    #[serde(default)]
    pub structure: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ext_by_zero: Option<Vec<String>>,
    /// explicit stalk modules: per point, action matrices per stalk
    /// algebra basis element
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stalks: Option<Vec<StalkRecord>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<ComparisonRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StalkRecord {
    pub point: String,
    pub dim: usize,
    pub action: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub from: String,
    pub to: String,
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub id: String,
    pub space: String,
    pub lo: i32,
    /// per degree: list of opens, each a list of point labels
    pub components: Vec<Vec<Vec<String>>>,
    /// per degree: `entries[k][j]` = section coordinates (ambient family)
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differentials: Vec<Vec<Vec<Vec<u32>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRecord {
    pub id: String,
    /// the inner map g : U -> T
    pub g: String,
    /// the outer map f : T -> S
    pub f: String,
}

/// Validated in-memory workspace.
pub struct Workspace {
    pub caps: Caps,
    pub algebras: BTreeMap<String, AlgebraRef>,
    pub algebra_maps: BTreeMap<String, AlgebraMap>,
    pub spaces: BTreeMap<String, SpaceRef>,
    pub spec_spaces: BTreeMap<String, SpecSpace>,
    pub maps: BTreeMap<String, RingedMap>,
    pub sheaves: BTreeMap<String, Sheaf>,
    pub complexes: BTreeMap<String, DComplexRef>,
    pub chains: BTreeMap<String, (String, String)>,
}

fn record_err(kind: &str, id: &str, msg: impl std::fmt::Display) -> String {
    format!("{kind} record '{id}': {msg}")
}

fn to_matrix(p: u32, rows: &[Vec<u32>]) -> Result<Matrix, String> {
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    for row in rows {
        if row.len() != c {
            return Err("ragged matrix".into());
        }
    }
    Ok(Matrix::from_rows(p, rows.to_vec()))
}

pub fn load(doc: &Document, caps: &Caps) -> Result<Workspace, String> {
    let mut ws = Workspace {
        caps: caps.clone(),
        algebras: BTreeMap::new(),
        algebra_maps: BTreeMap::new(),
        spaces: BTreeMap::new(),
        spec_spaces: BTreeMap::new(),
        maps: BTreeMap::new(),
        sheaves: BTreeMap::new(),
        complexes: BTreeMap::new(),
        chains: BTreeMap::new(),
    };
    for rec in &doc.algebras {
        let alg = if let Some(poly) = &rec.poly {
            FinAlgebra::from_poly(rec.p, poly, caps)
                .map_err(|e| record_err("algebra", &rec.id, e))?
        } else if let Some(t) = &rec.table {
            FinAlgebra::new(
                rec.p,
                t.dim,
                t.labels.clone(),
                t.mul.clone(),
                t.unit.clone(),
                caps,
            )
            .map_err(|e| record_err("algebra", &rec.id, e))?
        } else if let Some((a, b)) = &rec.product {
            let aa = ws
                .algebras
                .get(a)
                .ok_or_else(|| record_err("algebra", &rec.id, format!("unknown factor '{a}'")))?;
            let bb = ws
                .algebras
                .get(b)
                .ok_or_else(|| record_err("algebra", &rec.id, format!("unknown factor '{b}'")))?;
            let (prod, _, _) = FinAlgebra::product(aa, bb, caps)
                .map_err(|e| record_err("algebra", &rec.id, e))?;
            ws.algebras.insert(rec.id.clone(), prod);
            continue;
        } else {
            return Err(record_err("algebra", &rec.id, "no constructor given"));
        };
        ws.algebras.insert(rec.id.clone(), Arc::new(alg));
    }
    for rec in &doc.algebra_maps {
        let src = ws
            .algebras
            .get(&rec.source)
            .ok_or_else(|| record_err("algebra_map", &rec.id, "unknown source"))?;
        let tgt = ws
            .algebras
            .get(&rec.target)
            .ok_or_else(|| record_err("algebra_map", &rec.id, "unknown target"))?;
        let m = to_matrix(src.p(), &rec.matrix).map_err(|e| record_err("algebra_map", &rec.id, e))?;
        let am = AlgebraMap::new(src.clone(), tgt.clone(), m)
            .map_err(|e| record_err("algebra_map", &rec.id, e))?;
        ws.algebra_maps.insert(rec.id.clone(), am);
    }
    for rec in &doc.spaces {
        if let Some(alg_id) = &rec.spec {
            let alg = ws
                .algebras
                .get(alg_id)
                .ok_or_else(|| record_err("space", &rec.id, "unknown algebra"))?;
            let sp = spec(alg, caps).map_err(|e| record_err("space", &rec.id, e))?;
            ws.spaces.insert(rec.id.clone(), sp.space.clone());
            ws.spec_spaces.insert(rec.id.clone(), sp);
        } else {
            let points = rec
                .points
                .clone()
                .ok_or_else(|| record_err("space", &rec.id, "no points"))?;
            let idx = |l: &String| -> Result<usize, String> {
                points
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| record_err("space", &rec.id, format!("unknown point '{l}'")))
            };
            let mut stalks = Vec::new();
            for s in &rec.stalks {
                stalks.push(
                    ws.algebras
                        .get(s)
                        .ok_or_else(|| record_err("space", &rec.id, format!("unknown stalk '{s}'")))?
                        .clone(),
                );
            }
            let mut le_pairs = Vec::new();
            for (a, b) in &rec.le {
                le_pairs.push((idx(a)?, idx(b)?));
            }
            let mut edges = Vec::new();
            for r in &rec.res {
                let from = idx(&r.from)?;
                let to = idx(&r.to)?;
                let m = to_matrix(stalks[from].p(), &r.matrix)
                    .map_err(|e| record_err("space", &rec.id, e))?;
                let am = AlgebraMap::new(stalks[from].clone(), stalks[to].clone(), m)
                    .map_err(|e| record_err("space", &rec.id, e))?;
                edges.push(((from, to), am));
            }
            let sp = dgperf_core::ringedspace::space_from_edges(
                points, &le_pairs, stalks, &edges, caps,
            )
            .map_err(|e| record_err("space", &rec.id, e))?;
            ws.spaces.insert(rec.id.clone(), sp);
        }
    }
    for rec in &doc.maps {
        let src = ws
            .spaces
            .get(&rec.source)
            .ok_or_else(|| record_err("map", &rec.id, "unknown source space"))?
            .clone();
        let tgt = ws
            .spaces
            .get(&rec.target)
            .ok_or_else(|| record_err("map", &rec.id, "unknown target space"))?
            .clone();
        let rm = if let Some(am_id) = &rec.spec_map {
            let am = ws
                .algebra_maps
                .get(am_id)
                .ok_or_else(|| record_err("map", &rec.id, "unknown algebra map"))?;
            let spec_src = ws
                .spec_spaces
                .get(&rec.source)
                .ok_or_else(|| record_err("map", &rec.id, "source is not a spec space"))?;
            let spec_tgt = ws
                .spec_spaces
                .get(&rec.target)
                .ok_or_else(|| record_err("map", &rec.id, "target is not a spec space"))?;
            spec_map(am, spec_src, spec_tgt).map_err(|e| record_err("map", &rec.id, e))?
        } else {
            let mut point_map = Vec::new();
            for l in &rec.point_map {
                point_map.push(
                    tgt.point_index(l)
                        .ok_or_else(|| record_err("map", &rec.id, format!("unknown point '{l}'")))?,
                );
            }
            let mut pullbacks = Vec::new();
            for (t, m) in rec.pullbacks.iter().enumerate() {
                let ft = point_map[t];
                let mat = to_matrix(src.p(), m).map_err(|e| record_err("map", &rec.id, e))?;
                pullbacks.push(
                    AlgebraMap::new(tgt.stalk(ft).clone(), src.stalk(t).clone(), mat)
                        .map_err(|e| record_err("map", &rec.id, e))?,
                );
            }
            RingedMap::new(src.clone(), tgt.clone(), point_map, pullbacks)
                .map_err(|e| record_err("map", &rec.id, e))?
        };
        ws.maps.insert(rec.id.clone(), rm);
    }
    for rec in &doc.sheaves {
        let space = ws
            .spaces
            .get(&rec.space)
            .ok_or_else(|| record_err("sheaf", &rec.id, "unknown space"))?
            .clone();
        let sheaf = if rec.structure {
            Sheaf::structure(&space)
        } else if let Some(open_labels) = &rec.ext_by_zero {
            let open = open_from_labels(&space, open_labels)
                .map_err(|e| record_err("sheaf", &rec.id, e))?;
            if !space.is_open(&open) {
                return Err(record_err("sheaf", &rec.id, "set is not open"));
            }
            ext_by_zero(&space, &open)
        } else if let Some(stalk_recs) = &rec.stalks {
            let p = space.p();
            let mut stalks = vec![None; space.n_points()];
            for sr in stalk_recs {
                let x = space
                    .point_index(&sr.point)
                    .ok_or_else(|| record_err("sheaf", &rec.id, format!("unknown point '{}'", sr.point)))?;
                let mut action = Vec::new();
                for a in &sr.action {
                    action.push(to_matrix(p, a).map_err(|e| record_err("sheaf", &rec.id, e))?);
                }
                let m = FinModule::new(space.stalk(x).clone(), sr.dim, action)
                    .map_err(|e| record_err("sheaf", &rec.id, e))?;
                stalks[x] = Some(m);
            }
            let stalks: Vec<FinModule> = stalks
                .into_iter()
                .enumerate()
                .map(|(x, m)| m.unwrap_or_else(|| FinModule::zero(space.stalk(x).clone())))
                .collect();
            let mut comp = BTreeMap::new();
            for cr in &rec.comparisons {
                let from = space
                    .point_index(&cr.from)
                    .ok_or_else(|| record_err("sheaf", &rec.id, "unknown comparison point"))?;
                let to = space
                    .point_index(&cr.to)
                    .ok_or_else(|| record_err("sheaf", &rec.id, "unknown comparison point"))?;
                comp.insert(
                    (from, to),
                    to_matrix(p, &cr.matrix).map_err(|e| record_err("sheaf", &rec.id, e))?,
                );
            }
            // implicit zero comparison maps where a side is zero
            for x in 0..space.n_points() {
                for y in 0..space.n_points() {
                    if x != y && space.le(x, y) && !comp.contains_key(&(x, y)) {
                        comp.insert(
                            (x, y),
                            Matrix::zeros(p, stalks[y].dim(), stalks[x].dim()),
                        );
                    }
                }
            }
            Sheaf::new(space.clone(), stalks, comp)
                .map_err(|e| record_err("sheaf", &rec.id, e))?
        } else {
            return Err(record_err("sheaf", &rec.id, "no constructor given"));
        };
        ws.sheaves.insert(rec.id.clone(), sheaf);
    }
    for rec in &doc.complexes {
        let space = ws
            .spaces
            .get(&rec.space)
            .ok_or_else(|| record_err("complex", &rec.id, "unknown space"))?
            .clone();
        let mut comps = Vec::new();
        for c in &rec.components {
            let mut opens = Vec::new();
            for labels in c {
                opens.push(
                    open_from_labels(&space, labels)
                        .map_err(|e| record_err("complex", &rec.id, e))?,
                );
            }
            comps.push(
                DObject::new(space.clone(), opens)
                    .map_err(|e| record_err("complex", &rec.id, e))?,
            );
        }
        let mut diffs = Vec::new();
        for (i, d) in rec.differentials.iter().enumerate() {
            if i + 1 >= comps.len() {
                return Err(record_err("complex", &rec.id, "too many differentials"));
            }
            diffs.push(
                DMorphism::new(comps[i].clone(), comps[i + 1].clone(), d.clone())
                    .map_err(|e| record_err("complex", &rec.id, e))?,
            );
        }
        if !comps.is_empty() && diffs.len() + 1 != comps.len() {
            return Err(record_err("complex", &rec.id, "differential count mismatch"));
        }
        let cplx = DComplex::new(space, rec.lo, comps, diffs)
            .map_err(|e| record_err("complex", &rec.id, e))?;
        ws.complexes.insert(rec.id.clone(), Arc::new(cplx));
    }
    for rec in &doc.chains {
        let g = ws
            .maps
            .get(&rec.g)
            .ok_or_else(|| record_err("chain", &rec.id, "unknown map g"))?;
        let f = ws
            .maps
            .get(&rec.f)
            .ok_or_else(|| record_err("chain", &rec.id, "unknown map f"))?;
        if g.target() != f.source() {
            return Err(record_err("chain", &rec.id, "maps are not composable"));
        }
        ws.chains.insert(rec.id.clone(), (rec.g.clone(), rec.f.clone()));
    }
    Ok(ws)
}

fn open_from_labels(space: &SpaceRef, labels: &[String]) -> Result<Open, String> {
    let mut pts = Vec::new();
    for l in labels {
        pts.push(
            space
                .point_index(l)
                .ok_or_else(|| format!("unknown point '{l}'"))?,
        );
    }
    Ok(Open::new(pts))
}

pub fn load_file(path: &std::path::Path, caps: &Caps) -> Result<Workspace, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))?;
    let doc: Document =
        serde_json::from_str(&text).map_err(|e| format!("parse {path:?}: {e}"))?;
    load(&doc, caps)
}
