//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;
use simplexdb_core::*;

pub type Rng8 = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    Rng8::seed_from_u64(seed)
}

pub fn sid(s: &str) -> SimplexId {
    SimplexId::from(s)
}

fn enumerated(name: &str, n: usize) -> DataType {
    DataType::enumerated(name, (0..n).map(|i| format!("{name}{i}")))
}

/// Edge between two vertices: slot 0 is `a`, slot 1 is `b`.
fn edge(id: &str, a: &str, b: &str) -> Simplex {
    Simplex::with_faces(id, [b, a])
}

/// A schema of at most six simplices: one to three vertices, edges with
/// loops and parallels allowed, and sometimes a triangle.
pub fn random_graph_schema(r: &mut Rng8) -> Schema {
    let types = [enumerated("c", r.random_range(1..=8)), enumerated("s", r.random_range(1..=8))];
    let reg = Registry::new().with(types[0].clone()).unwrap().with(types[1].clone()).unwrap();
    let nv = r.random_range(1..=3);
    let vertices: Vec<String> = (0..nv).map(|i| format!("V{i}")).collect();
    let mut simplices: Vec<Simplex> =
        vertices.iter().map(|v| Simplex::vertex(v.as_str(), types[r.random_range(0..2)].name())).collect();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut budget = 6 - nv;

    let add_edge = |edges: &mut Vec<(String, String, String)>, simplices: &mut Vec<Simplex>, a: &str, b: &str| {
        let id = format!("E{}", edges.len());
        simplices.push(edge(&id, a, b));
        edges.push((id.clone(), a.to_owned(), b.to_owned()));
        id
    };

    if budget >= 2 && r.random_bool(0.4) {
        let slots: Vec<String> = (0..3).map(|_| vertices.choose(r).unwrap().clone()).collect();
        let want = [(1, 2), (0, 2), (0, 1)];
        let missing = want
            .iter()
            .filter(|(i, j)| !edges.iter().any(|(_, a, b)| *a == slots[*i] && *b == slots[*j]))
            .count();
        if missing < budget {
            let mut faces = Vec::new();
            for (i, j) in want {
                let found = edges.iter().find(|(_, a, b)| *a == slots[i] && *b == slots[j]).map(|e| e.0.clone());
                let id = match found {
                    Some(id) => id,
                    None => {
                        budget -= 1;
                        add_edge(&mut edges, &mut simplices, &slots[i], &slots[j])
                    }
                };
                faces.push(id);
            }
            simplices.push(Simplex::with_faces("T", faces));
            budget -= 1;
        }
    }
    for _ in 0..r.random_range(0..=budget) {
        let a = vertices.choose(r).unwrap().clone();
        let b = vertices.choose(r).unwrap().clone();
        add_edge(&mut edges, &mut simplices, &a, &b);
    }
    let schema = Schema::from_parts(reg, simplices).unwrap();
    assert!(schema.validate().is_empty(), "{:?}", schema.validate());
    schema
}

fn random_value(r: &mut Rng8, t: &DataType) -> Value {
    match t.values() {
        Some(vs) => vs.choose(r).unwrap().clone(),
        None => Value::Int(r.random_range(0..5)),
    }
}

/// Concrete tables everywhere, built bottom-up. Key maps are explicit, so
/// face tables may hold repeated values.
pub fn random_concrete_sheaf(r: &mut Rng8, schema: &Schema, max_rows: usize) -> Sheaf {
    let mut sheaf = Sheaf::new(schema.clone());
    let mut by_dim: Vec<&Simplex> = schema.simplices().collect();
    by_dim.sort_by_key(|s| (s.dim, s.id.clone()));
    for s in by_dim {
        match s.dim {
            0 => {
                let t = schema.registry().get(s.label.as_deref().unwrap()).unwrap().clone();
                let rows = (0..r.random_range(1..=6))
                    .map(|i| (Key::new(format!("{}#{i}", s.id)), Tuple(vec![random_value(r, &t)])))
                    .collect();
                sheaf = sheaf.set_table(&s.id, rows, KeyMaps::Derive).unwrap();
            }
            1 => {
                let f0 = sheaf.concrete(&s.faces[0]).unwrap().clone();
                let f1 = sheaf.concrete(&s.faces[1]).unwrap().clone();
                let (mut rows, mut m0, mut m1) = (Vec::new(), BTreeMap::new(), BTreeMap::new());
                for i in 0..r.random_range(0..=max_rows) {
                    let (k0, t0) = f0.rows().choose(r).unwrap().clone();
                    let (k1, t1) = f1.rows().choose(r).unwrap().clone();
                    let key = Key::new(format!("{}#{i}", s.id));
                    rows.push((key.clone(), t1.concat(&t0)));
                    m0.insert(key.clone(), k0);
                    m1.insert(key, k1);
                }
                let maps = BTreeMap::from([(0, KeyMap(m0)), (1, KeyMap(m1))]);
                sheaf = sheaf.set_table(&s.id, rows, KeyMaps::Explicit(maps)).unwrap();
            }
            2 => {
                let e: Vec<ConcreteTable> = s.faces.iter().map(|f| sheaf.concrete(f).unwrap().clone()).collect();
                let km = |face: usize, slot: usize, k: &Key| -> Key {
                    sheaf.key_map(&s.faces[face], slot).unwrap().get(k).unwrap().clone()
                };
                let mut consistent = Vec::new();
                for (k2, t2) in e[2].rows() {
                    for (k0, t0) in e[0].rows() {
                        if km(2, 0, k2) != km(0, 1, k0) {
                            continue;
                        }
                        for (k1, _) in e[1].rows() {
                            if km(2, 1, k2) == km(1, 1, k1) && km(0, 0, k0) == km(1, 0, k1) {
                                let t = Tuple(vec![t2.0[0].clone(), t2.0[1].clone(), t0.0[1].clone()]);
                                consistent.push((t, [k0.clone(), k1.clone(), k2.clone()]));
                            }
                        }
                    }
                }
                let (mut rows, mut maps) = (Vec::new(), [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()]);
                if !consistent.is_empty() {
                    for i in 0..r.random_range(0..=max_rows) {
                        let (t, ks) = consistent.choose(r).unwrap().clone();
                        let key = Key::new(format!("{}#{i}", s.id));
                        for f in 0..3 {
                            maps[f].insert(key.clone(), ks[f].clone());
                        }
                        rows.push((key, t));
                    }
                }
                let maps = maps.into_iter().enumerate().map(|(i, m)| (i, KeyMap(m))).collect();
                sheaf = sheaf.set_table(&s.id, rows, KeyMaps::Explicit(maps)).unwrap();
            }
            _ => unreachable!("graph schemas stop at triangles"),
        }
    }
    sheaf
}

/// A walk through the face relation with at most `max_steps` steps.
pub fn random_zigzag(r: &mut Rng8, schema: &Schema, max_steps: usize) -> Zigzag {
    let ids: Vec<SimplexId> = schema.ids().cloned().collect();
    let start = ids.choose(r).unwrap().clone();
    let mut steps = Vec::new();
    let mut cur = start.clone();
    for _ in 0..r.random_range(0..=max_steps) {
        let mut options = Vec::new();
        for other in &ids {
            if other == &cur {
                continue;
            }
            for f in schema.face_maps_between(&cur, other).unwrap() {
                options.push(ZigzagStep { direction: Direction::Descend, face: f, target: other.clone() });
            }
            for f in schema.face_maps_between(other, &cur).unwrap() {
                options.push(ZigzagStep { direction: Direction::Ascend, face: f, target: other.clone() });
            }
        }
        let Some(step) = options.choose(r).cloned() else { break };
        cur = step.target.clone();
        steps.push(step);
    }
    Zigzag { start, steps }
}

/// Key of the face reached by deleting `deleted` slots, taking the lowest
/// slot first.
pub fn oracle_compose(sheaf: &Sheaf, simplex: &SimplexId, deleted: &[usize], key: &Key) -> Option<Key> {
    let mut cur = simplex.clone();
    let mut k = key.clone();
    for (n, d) in deleted.iter().enumerate() {
        let idx = d - n;
        k = sheaf.key_map(&cur, idx)?.get(&k)?.clone();
        cur = sheaf.schema().get(&cur).ok()?.faces[idx].clone();
    }
    Some(k)
}

/// Every chain of rows, one per zigzag position, related by the key maps;
/// projected to (start values, end values).
pub fn oracle_graph(sheaf: &Sheaf, z: &Zigzag, selected: &[Key]) -> Vec<Tuple> {
    let mut simplices = vec![z.start.clone()];
    simplices.extend(z.steps.iter().map(|s| s.target.clone()));
    let mut out = Vec::new();
    fn walk(
        sheaf: &Sheaf,
        z: &Zigzag,
        simplices: &[SimplexId],
        pos: usize,
        key: &Key,
        start: &Tuple,
        out: &mut Vec<Tuple>,
    ) {
        let here = &simplices[pos];
        if pos == z.steps.len() {
            let t = sheaf.concrete(here).unwrap().get(key).unwrap();
            out.push(start.concat(t));
            return;
        }
        let step = &z.steps[pos];
        let next = &simplices[pos + 1];
        let table = sheaf.concrete(next).unwrap();
        for k in table.keys() {
            let related = match step.direction {
                Direction::Descend => oracle_compose(sheaf, here, step.face.deleted(), key).as_ref() == Some(k),
                Direction::Ascend => oracle_compose(sheaf, next, step.face.deleted(), k).as_ref() == Some(key),
            };
            if related {
                walk(sheaf, z, simplices, pos + 1, k, start, out);
            }
        }
    }
    let base = sheaf.concrete(&z.start).unwrap();
    for k in selected {
        walk(sheaf, z, &simplices, 0, k, base.get(k).unwrap(), &mut out);
    }
    out.sort();
    out
}

pub fn sorted_tuples(t: &ConcreteTable) -> Vec<Tuple> {
    let mut v: Vec<Tuple> = t.tuples().cloned().collect();
    v.sort();
    v
}

pub fn counts(t: impl IntoIterator<Item = Tuple>) -> BTreeMap<Tuple, usize> {
    let mut m = BTreeMap::new();
    for x in t {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

pub fn random_provenance(r: &mut Rng8) -> Provenance {
    let created = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + Duration::seconds(r.random_range(0..10_000_000));
    Provenance {
        source: format!("source {}", r.random_range(0..100)),
        created_at: created,
        verified: r.random_bool(0.5),
        freshness: created + Duration::seconds(r.random_range(0..1_000_000)),
        trademark: if r.random_bool(0.3) { Some("Acme™".into()) } else { None },
    }
}

/// Tiles over labels `int` and `col`: concrete up to a triangle, or a
/// virtual addition or difference.
pub fn random_tile(r: &mut Rng8) -> Tile {
    let prov = random_provenance(r);
    match r.random_range(0..10) {
        0 => addition_tile("int", prov).unwrap(),
        1 => difference_tile("int", r.random_range(-3..=3), prov).unwrap(),
        _ => {
            let col = DataType::enumerated("col", ["r", "g", "b"]);
            let reg = Registry::new().with(DataType::integer("int")).unwrap().with(col.clone()).unwrap();
            let dim = r.random_range(0..=2);
            let names = ["a", "b", "c"];
            let labels: Vec<(&str, &str)> =
                (0..=dim).map(|i| (names[i], *["int", "col"].choose(r).unwrap())).collect();
            let schema = Schema::representable_named(&reg, &labels).unwrap();
            let top = sid(&names[..=dim].concat());
            let types = schema.slot_types(&top).unwrap();
            let rows = (0..r.random_range(0..=5))
                .map(|i| (Key::seq(i), Tuple(types.iter().map(|t| random_value(r, t)).collect())))
                .collect();
            Tile::new(format!("t{}", r.random_range(0..1000)), schema, top, TileTable::Concrete(rows), prov).unwrap()
        }
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Matchings under which the slot labels of `x1` and `x2` agree.
pub fn label_matchings(a: &Schema, x1: &SimplexId, b: &Schema, x2: &SimplexId) -> Vec<Vec<usize>> {
    let (la, lb) = (a.slot_labels(x1).unwrap(), b.slot_labels(x2).unwrap());
    if la.len() != lb.len() {
        return Vec::new();
    }
    permutations(la.len()).into_iter().filter(|p| (0..la.len()).all(|k| la[k] == lb[p[k]])).collect()
}

/// A workspace built from random drops and self-glues. Failed operations are
/// skipped; returns the workspace and the number of applied operations.
pub fn random_workspace(r: &mut Rng8, ops: usize) -> (Workspace, usize) {
    let mut ws = Workspace::new(r.random_range(0..1000));
    let mut applied = 0;
    let policies = [Policy::Universal, Policy::Intersect, Policy::UnionAll, Policy::UnionDedup];
    for _ in 0..ops {
        let result = if !ws.schema().is_empty() && r.random_bool(0.15) {
            let ids: Vec<SimplexId> = ws.schema().ids().cloned().collect();
            let x1 = ids.choose(r).unwrap().clone();
            let x2 = ids.choose(r).unwrap().clone();
            match label_matchings(ws.schema(), &x1, ws.schema(), &x2).choose(r) {
                Some(m) if x1 != x2 => ws.glue(&x1, &x2, &SlotMatching(m.clone()), policies.choose(r).copied()),
                _ => continue,
            }
        } else {
            let tile = random_tile(r);
            let mut attachment = None;
            if !ws.schema().is_empty() && r.random_bool(0.7) {
                let mut options = Vec::new();
                for x1 in ws.schema().ids() {
                    for x2 in tile.schema().ids() {
                        for m in label_matchings(ws.schema(), x1, tile.schema(), x2) {
                            options.push(Attachment { workspace: x1.clone(), tile: x2.clone(), matching: m });
                        }
                    }
                }
                attachment = options.choose(r).cloned();
            }
            let policy = if r.random_bool(0.5) { policies.choose(r).copied() } else { None };
            ws.drop_tile(&tile, attachment, policy)
        };
        if let Ok(next) = result {
            ws = next;
            applied += 1;
        }
    }
    (ws, applied)
}
