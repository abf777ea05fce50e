//! Gluing sheaves along a schema glue.
//!
//! The glued schema identifies simplices of a disjoint union. Each class of
//! identified simplices gets one table built from the tables of its members,
//! according to a [`Policy`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SheafError;
use crate::schema::{Glued, Schema, SimplexId, SlotMatching};
use crate::sheaf::{KeyMap, Sheaf};
use crate::table::{Builtin, ConcreteTable, Table, VirtualTable};
use crate::value::{Key, Tuple};

/// How tables over identified simplices are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Glue along the universal table: identified simplices carry the
    /// distinct values of all members, and no row is dropped.
    Universal,
    /// The limit: rows survive only when every identified member agrees.
    /// On a single identified simplex this is the fiber product.
    Intersect,
    /// Like `Universal`, but the attached simplex keeps every row of both sides.
    UnionAll,
    /// Like `Universal`, with one row per distinct value on the attached simplex.
    UnionDedup,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Universal => "universal",
            Policy::Intersect => "intersect",
            Policy::UnionAll => "union_all",
            Policy::UnionDedup => "union_dedup",
        }
    }
}

/// Glues two sheaves: the schema pushout of [`Schema::glue`] with tables
/// combined per `policy`.
pub fn glue_sheaves(
    left: &Sheaf,
    x1: &SimplexId,
    right: &Sheaf,
    x2: &SimplexId,
    matching: &SlotMatching,
    policy: Policy,
) -> Result<(Sheaf, Glued), SheafError> {
    let glued = Schema::glue(left.schema(), x1, right.schema(), x2, matching)?;
    let mut tables = left.tables().clone();
    let mut maps = left.key_maps().clone();
    let (rt, rm) = transport(right, &glued.right_perms, &glued.right_ids)?;
    tables.extend(rt);
    maps.extend(rm);
    let z = Sheaf::from_parts(glued.union.clone(), tables, maps);
    let sheaf = quotient(&z, &glued, &glued.quotient[x1], policy)?;
    Ok((sheaf, glued))
}

/// Places two sheaves side by side without identifying anything.
pub fn disjoint_sheaves(left: &Sheaf, right: &Sheaf) -> Result<(Sheaf, Glued), SheafError> {
    let glued = Schema::disjoint_union(left.schema(), right.schema())?;
    let mut tables = left.tables().clone();
    let mut maps = left.key_maps().clone();
    let (rt, rm) = transport(right, &BTreeMap::new(), &glued.right_ids)?;
    tables.extend(rt);
    maps.extend(rm);
    let sheaf = Sheaf::from_parts(glued.schema.clone(), tables, maps);
    sheaf.ensure_valid()?;
    Ok((sheaf, glued))
}

/// Identifies `x2` with `x1` inside one sheaf.
pub fn glue_within_sheaf(
    sheaf: &Sheaf,
    x1: &SimplexId,
    x2: &SimplexId,
    matching: &SlotMatching,
    policy: Policy,
) -> Result<(Sheaf, Glued), SheafError> {
    let glued = sheaf.schema().glue_within(x1, x2, matching)?;
    let (tables, maps) = transport(sheaf, &glued.right_perms, &glued.right_ids)?;
    let z = Sheaf::from_parts(glued.union.clone(), tables, maps);
    let out = quotient(&z, &glued, &glued.quotient[x1], policy)?;
    Ok((out, glued))
}

type Tables = BTreeMap<SimplexId, Table>;
type Maps = BTreeMap<(SimplexId, usize), KeyMap>;

/// Re-indexes and renames a sheaf's tables and key maps into the union.
fn transport(
    sheaf: &Sheaf,
    perms: &BTreeMap<SimplexId, Vec<usize>>,
    ids: &BTreeMap<SimplexId, SimplexId>,
) -> Result<(Tables, Maps), SheafError> {
    let mut tables = BTreeMap::new();
    for (id, table) in sheaf.tables() {
        let new_id = ids[id].clone();
        let moved = match (table, perms.get(id)) {
            (Table::Concrete(t), Some(p)) => Table::Concrete(t.map_tuples(|tup| tup.permuted(p))),
            (Table::Virtual(v), Some(p)) => {
                let types = p.iter().map(|&s| v.types()[s].clone()).collect();
                Table::Virtual(VirtualTable::new(id.clone(), v.builtin().reindexed(p), types)?)
            }
            (t, None) => t.clone(),
        };
        tables.insert(new_id.clone(), moved.with_simplex(new_id));
    }
    let mut maps = BTreeMap::new();
    for ((id, i), map) in sheaf.key_maps() {
        let new_index = match perms.get(id) {
            Some(p) => p.iter().position(|&s| s == *i).expect("permutation"),
            None => *i,
        };
        maps.insert((ids[id].clone(), new_index), map.clone());
    }
    Ok((tables, maps))
}

fn preimages(glued: &Glued) -> BTreeMap<SimplexId, Vec<SimplexId>> {
    let mut out: BTreeMap<SimplexId, Vec<SimplexId>> = BTreeMap::new();
    for (z, y) in &glued.quotient {
        out.entry(y.clone()).or_default().push(z.clone());
    }
    for (y, zs) in out.iter_mut() {
        zs.sort_by_key(|z| (z != y, z.clone()));
    }
    out
}

/// The virtual table a class keeps when none of its members is concrete.
fn pick_virtual(z: &Sheaf, members: &[SimplexId], y: &SimplexId) -> Option<Table> {
    let virtuals: Vec<&VirtualTable> = members.iter().filter_map(|m| z.table(m)?.as_virtual()).collect();
    let chosen = virtuals
        .iter()
        .find(|v| v.builtin() != &Builtin::Gamma)
        .or_else(|| virtuals.first())?;
    Some(Table::Virtual((*chosen).clone()).with_simplex(y.clone()))
}

fn quotient(z: &Sheaf, glued: &Glued, top: &SimplexId, policy: Policy) -> Result<Sheaf, SheafError> {
    let out = match policy {
        Policy::Intersect => limit(z, glued)?,
        _ => translate(z, glued, top, policy)?,
    };
    out.ensure_valid()?;
    Ok(out)
}

fn translate(z: &Sheaf, glued: &Glued, top: &SimplexId, policy: Policy) -> Result<Sheaf, SheafError> {
    let y_schema = &glued.schema;
    let pre = preimages(glued);
    let mut tables: Tables = BTreeMap::new();
    // rows of each concrete class with the member row they came from
    let mut origins: BTreeMap<SimplexId, Vec<Option<(SimplexId, Key)>>> = BTreeMap::new();
    let mut trans: BTreeMap<(SimplexId, Key), Key> = BTreeMap::new();

    for (y, members) in &pre {
        let concrete: Vec<&SimplexId> = members.iter().filter(|m| z.concrete(m).is_some()).collect();
        let mut extra: Vec<Tuple> = Vec::new();
        for m in members.iter().filter(|m| matches!(z.table(m), Some(Table::Virtual(_)))) {
            for (c, j) in z.schema().cofaces(m)? {
                if let Some(ct) = z.concrete(&c) {
                    extra.extend(ct.tuples().map(|t| t.without(j)));
                }
            }
        }
        if concrete.is_empty() && extra.is_empty() {
            if let Some(t) = pick_virtual(z, members, y) {
                tables.insert(y.clone(), t);
            }
            continue;
        }
        if concrete.len() == 1 && extra.is_empty() {
            let m = concrete[0];
            let t = z.concrete(m).expect("concrete").clone().with_simplex(y.clone());
            let mut orig = Vec::new();
            for (k, _) in t.rows() {
                trans.insert((m.clone(), k.clone()), k.clone());
                orig.push(Some((m.clone(), k.clone())));
            }
            origins.insert(y.clone(), orig);
            tables.insert(y.clone(), Table::Concrete(t));
            continue;
        }
        let dedup = !(y == top && policy == Policy::UnionAll);
        let mut rows: Vec<(Tuple, Option<(SimplexId, Key)>)> = Vec::new();
        let mut key_of_value: BTreeMap<Tuple, Key> = BTreeMap::new();
        for m in &concrete {
            for (k, t) in z.concrete(m).expect("concrete").rows() {
                if dedup {
                    if let Some(existing) = key_of_value.get(t) {
                        trans.insert(((*m).clone(), k.clone()), existing.clone());
                        continue;
                    }
                }
                let new_key = Key::seq(rows.len());
                key_of_value.entry(t.clone()).or_insert_with(|| new_key.clone());
                trans.insert(((*m).clone(), k.clone()), new_key);
                rows.push((t.clone(), Some(((*m).clone(), k.clone()))));
            }
        }
        for t in extra {
            if !key_of_value.contains_key(&t) {
                key_of_value.insert(t.clone(), Key::seq(rows.len()));
                rows.push((t, None));
            }
        }
        let table = ConcreteTable::from_tuples(y.clone(), rows.iter().map(|(t, _)| t.clone()));
        origins.insert(y.clone(), rows.into_iter().map(|(_, o)| o).collect());
        tables.insert(y.clone(), Table::Concrete(table));
    }

    let mut maps: Maps = BTreeMap::new();
    for (y, orig) in &origins {
        let s = y_schema.get(y)?;
        let table = tables[y].as_concrete().expect("concrete").clone();
        for (i, f) in s.faces.iter().enumerate() {
            let Some(ft) = tables.get(f).and_then(Table::as_concrete) else { continue };
            let mut map = BTreeMap::new();
            for ((k, t), o) in table.rows().iter().zip(orig) {
                let via_origin = o.as_ref().and_then(|(m, mk)| {
                    let target = z.key_map(m, i)?.get(mk)?;
                    let zf = &z.schema().get(m).ok()?.faces[i];
                    trans.get(&(zf.clone(), target.clone())).cloned()
                });
                let target = match via_origin {
                    Some(tk) => tk,
                    None => {
                        let hits = ft.keys_with(&t.without(i));
                        match hits.as_slice() {
                            [one] => (*one).clone(),
                            [] => return Err(SheafError::NoFaceRow { simplex: y.clone(), face: i, key: k.clone() }),
                            _ => {
                                return Err(SheafError::AmbiguousFaceRow {
                                    simplex: y.clone(),
                                    face: i,
                                    key: k.clone(),
                                })
                            }
                        }
                    }
                };
                map.insert(k.clone(), target);
            }
            maps.insert((y.clone(), i), KeyMap(map));
        }
    }
    Ok(Sheaf::from_parts(y_schema.clone(), tables, maps))
}

struct LimitRow {
    key: Key,
    tuple: Tuple,
    /// Key of this row in each concrete member.
    comps: BTreeMap<SimplexId, Key>,
    /// Chosen row of each concrete face table.
    faces: Vec<Option<Key>>,
}

/// Rows are compatible families: one row per concrete member, agreeing in
/// value, plus one row per face consistent with the members' key maps.
fn limit(z: &Sheaf, glued: &Glued) -> Result<Sheaf, SheafError> {
    let y_schema = &glued.schema;
    let pre = preimages(glued);
    let mut order: Vec<&SimplexId> = y_schema.ids().collect();
    order.sort_by_key(|id| (y_schema.get(id).map(|s| s.dim).unwrap_or(0), (*id).clone()));

    let mut tables: Tables = BTreeMap::new();
    let mut built: BTreeMap<SimplexId, Vec<LimitRow>> = BTreeMap::new();
    let mut index: BTreeMap<SimplexId, BTreeMap<Key, usize>> = BTreeMap::new();

    for y in order {
        let members = &pre[y];
        let concrete: Vec<&SimplexId> = members.iter().filter(|m| z.concrete(m).is_some()).collect();
        let virtuals: Vec<&VirtualTable> = members.iter().filter_map(|m| z.table(m)?.as_virtual()).collect();
        if concrete.is_empty() {
            if let Some(t) = pick_virtual(z, members, y) {
                tables.insert(y.clone(), t);
            }
            continue;
        }
        let mut cands: Vec<(BTreeMap<SimplexId, Key>, Tuple)> = z
            .concrete(concrete[0])
            .expect("concrete")
            .rows()
            .iter()
            .map(|(k, t)| (BTreeMap::from([(concrete[0].clone(), k.clone())]), t.clone()))
            .collect();
        for m in &concrete[1..] {
            let table = z.concrete(m).expect("concrete");
            let mut next = Vec::new();
            for (comps, t) in &cands {
                for k in table.keys_with(t) {
                    let mut c = comps.clone();
                    c.insert((*m).clone(), k.clone());
                    next.push((c, t.clone()));
                }
            }
            cands = next;
        }
        cands.retain(|(_, t)| virtuals.iter().all(|v| v.contains(t)));

        let s = y_schema.get(y)?;
        let mut rows: Vec<LimitRow> = Vec::new();
        let mut branching = false;
        for (comps, tuple) in cands {
            let mut options: Vec<Vec<Option<Key>>> = Vec::new();
            let mut dead = false;
            for (i, f) in s.faces.iter().enumerate() {
                let proj = tuple.without(i);
                match tables.get(f) {
                    None => options.push(vec![None]),
                    Some(Table::Virtual(v)) => {
                        if v.contains(&proj) {
                            options.push(vec![None]);
                        } else {
                            dead = true;
                        }
                    }
                    Some(Table::Concrete(_)) => {
                        let mut wanted: BTreeMap<SimplexId, Key> = BTreeMap::new();
                        for (m, k) in &comps {
                            if let Some(target) = z.key_map(m, i).and_then(|km| km.get(k)) {
                                let zf = z.schema().get(m)?.faces[i].clone();
                                wanted.insert(zf, target.clone());
                            }
                        }
                        let opts: Vec<Option<Key>> = built[f]
                            .iter()
                            .filter(|r| {
                                r.tuple == proj
                                    && wanted.iter().all(|(zf, k)| r.comps.get(zf).is_none_or(|c| c == k))
                            })
                            .map(|r| Some(r.key.clone()))
                            .collect();
                        if opts.is_empty() {
                            dead = true;
                        }
                        options.push(opts);
                    }
                }
                if dead {
                    break;
                }
            }
            if dead {
                continue;
            }
            let families = consistent_families(&options, s.faces.as_slice(), &built, &index);
            if families.len() > 1 {
                branching = true;
            }
            for fam in families {
                rows.push(LimitRow { key: Key::seq(0), tuple: tuple.clone(), comps: comps.clone(), faces: fam });
            }
        }
        let keep_keys = members.len() == 1 && !branching;
        for (n, r) in rows.iter_mut().enumerate() {
            r.key = if keep_keys { r.comps[&members[0]].clone() } else { Key::seq(n) };
        }
        let table = ConcreteTable::new(y.clone(), rows.iter().map(|r| (r.key.clone(), r.tuple.clone())).collect())?;
        tables.insert(y.clone(), Table::Concrete(table));
        index.insert(y.clone(), rows.iter().enumerate().map(|(n, r)| (r.key.clone(), n)).collect());
        built.insert(y.clone(), rows);
    }

    let mut maps: Maps = BTreeMap::new();
    for (y, rows) in &built {
        let s = y_schema.get(y)?;
        for (i, f) in s.faces.iter().enumerate() {
            if !built.contains_key(f) {
                continue;
            }
            let map = rows
                .iter()
                .map(|r| (r.key.clone(), r.faces[i].clone().expect("concrete face chosen")))
                .collect();
            maps.insert((y.clone(), i), KeyMap(map));
        }
    }
    Ok(Sheaf::from_parts(y_schema.clone(), tables, maps))
}

/// Choices of one face row per face index satisfying the simplicial identity
/// on key maps.
fn consistent_families(
    options: &[Vec<Option<Key>>],
    faces: &[SimplexId],
    built: &BTreeMap<SimplexId, Vec<LimitRow>>,
    index: &BTreeMap<SimplexId, BTreeMap<Key, usize>>,
) -> Vec<Vec<Option<Key>>> {
    let face_of = |f: &SimplexId, k: &Key, i: usize| -> Option<Key> {
        let row = &built.get(f)?[*index.get(f)?.get(k)?];
        row.faces.get(i).cloned().flatten()
    };
    let mut out = Vec::new();
    let mut cur: Vec<Option<Key>> = Vec::new();
    fn go(
        j: usize,
        options: &[Vec<Option<Key>>],
        faces: &[SimplexId],
        cur: &mut Vec<Option<Key>>,
        out: &mut Vec<Vec<Option<Key>>>,
        face_of: &dyn Fn(&SimplexId, &Key, usize) -> Option<Key>,
    ) {
        if j == options.len() {
            out.push(cur.clone());
            return;
        }
        for opt in &options[j] {
            // face_i(g_j) must equal face_{j-1}(g_i) for i < j
            let ok = (0..j).all(|i| match (&cur[i], opt) {
                (Some(gi), Some(gj)) => {
                    match (face_of(&faces[j], gj, i), face_of(&faces[i], gi, j - 1)) {
                        (Some(a), Some(b)) => a == b,
                        _ => true,
                    }
                }
                _ => true,
            });
            if ok {
                cur.push(opt.clone());
                go(j + 1, options, faces, cur, out, face_of);
                cur.pop();
            }
        }
    }
    go(0, options, faces, &mut cur, &mut out, &face_of);
    out
}
