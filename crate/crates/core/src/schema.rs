//! Schemas: semi-simplicial sets whose vertices carry datatype labels.
//!
//! A simplex is stored as its face array; `faces[i]` is the face obtained by
//! deleting vertex slot `i`. Symmetry is handled at glue time through explicit
//! [`SlotMatching`]s instead of a stored group action, so two simplices that
//! differ only in slot order are distinct values that may be re-indexed into
//! each other.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SchemaError;
use crate::value::{DataType, Registry};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexId(String);

impl SimplexId {
    pub fn new(s: impl Into<String>) -> Self {
        SimplexId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for SimplexId {
    fn from(s: &str) -> Self {
        SimplexId(s.to_owned())
    }
}

impl From<String> for SimplexId {
    fn from(s: String) -> Self {
        SimplexId(s)
    }
}

impl fmt::Display for SimplexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub id: SimplexId,
    pub dim: usize,
    pub faces: Vec<SimplexId>,
    pub label: Option<String>,
}

impl Simplex {
    pub fn vertex(id: impl Into<SimplexId>, label: impl Into<String>) -> Self {
        Simplex { id: id.into(), dim: 0, faces: Vec::new(), label: Some(label.into()) }
    }

    /// A simplex of dimension `faces.len() - 1`; needs at least two faces.
    pub fn with_faces<I, S>(id: impl Into<SimplexId>, faces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<SimplexId>,
    {
        let faces: Vec<SimplexId> = faces.into_iter().map(Into::into).collect();
        assert!(faces.len() >= 2, "use Simplex::vertex for 0-simplices");
        Simplex { id: id.into(), dim: faces.len() - 1, faces, label: None }
    }

    /// Unchecked constructor; used when reading documents.
    pub fn raw(id: SimplexId, dim: usize, faces: Vec<SimplexId>, label: Option<String>) -> Self {
        Simplex { id, dim, faces, label }
    }
}

/// A composite face map, named by the set of deleted vertex slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaceMap(Vec<usize>);

impl FaceMap {
    pub fn new(mut deleted: Vec<usize>) -> Self {
        deleted.sort_unstable();
        deleted.dedup();
        FaceMap(deleted)
    }

    pub fn single(slot: usize) -> Self {
        FaceMap(vec![slot])
    }

    pub fn deleted(&self) -> &[usize] {
        &self.0
    }

    pub fn codim(&self) -> usize {
        self.0.len()
    }

    /// Slots of a `dim`-simplex that survive this face map, ascending.
    pub fn retained(&self, dim: usize) -> Vec<usize> {
        (0..=dim).filter(|s| !self.0.contains(s)).collect()
    }
}

impl fmt::Display for FaceMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [one] => write!(f, "{one}"),
            many => write!(f, "{many:?}"),
        }
    }
}

/// Bijection between the vertex slots of two simplices of equal dimension:
/// slot `k` of the left simplex is matched with slot `self[k]` of the right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotMatching(pub Vec<usize>);

impl SlotMatching {
    pub fn identity(dim: usize) -> Self {
        SlotMatching((0..=dim).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> SlotMatching {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        SlotMatching(inv)
    }

    fn check(&self, dim: usize) -> Result<(), SchemaError> {
        if self.0.len() != dim + 1 {
            return Err(SchemaError::BadMatching(format!(
                "expected {} slots, got {}",
                dim + 1,
                self.0.len()
            )));
        }
        let distinct: BTreeSet<_> = self.0.iter().copied().collect();
        if distinct.len() != self.0.len() || self.0.iter().any(|&j| j > dim) {
            return Err(SchemaError::BadMatching(format!("{:?} is not a permutation", self.0)));
        }
        Ok(())
    }
}

/// One broken schema invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaViolation {
    BadDataType(String),
    FaceCount { simplex: SimplexId, dim: usize, faces: usize },
    DanglingFace { simplex: SimplexId, index: usize, face: SimplexId },
    FaceDimension { simplex: SimplexId, index: usize, face: SimplexId, found: usize },
    SimplicialIdentity { simplex: SimplexId, i: usize, j: usize },
    MissingLabel(SimplexId),
    UnexpectedLabel(SimplexId),
    UnknownLabel { simplex: SimplexId, label: String },
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaViolation::BadDataType(msg) => write!(f, "{msg}"),
            SchemaViolation::FaceCount { simplex, dim, faces } => {
                write!(f, "`{simplex}` has dimension {dim} but {faces} faces")
            }
            SchemaViolation::DanglingFace { simplex, index, face } => {
                write!(f, "face {index} of `{simplex}` refers to missing simplex `{face}`")
            }
            SchemaViolation::FaceDimension { simplex, index, face, found } => {
                write!(f, "face {index} of `{simplex}` is `{face}` of dimension {found}")
            }
            SchemaViolation::SimplicialIdentity { simplex, i, j } => write!(
                f,
                "`{simplex}` breaks face_{i}(face_{j}(x)) = face_{}(face_{i}(x))",
                j - 1
            ),
            SchemaViolation::MissingLabel(s) => write!(f, "vertex `{s}` has no label"),
            SchemaViolation::UnexpectedLabel(s) => write!(f, "`{s}` is not a vertex but carries a label"),
            SchemaViolation::UnknownLabel { simplex, label } => {
                write!(f, "`{simplex}` is labeled by unknown datatype `{label}`")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    registry: Registry,
    simplices: BTreeMap<SimplexId, Simplex>,
}

impl Schema {
    pub fn new(registry: Registry) -> Self {
        Schema { registry, simplices: BTreeMap::new() }
    }

    /// Builds a schema without checking invariants (see [`Schema::validate`]).
    pub fn from_parts(
        registry: Registry,
        simplices: impl IntoIterator<Item = Simplex>,
    ) -> Result<Self, SchemaError> {
        let mut map = BTreeMap::new();
        for s in simplices {
            if map.contains_key(&s.id) {
                return Err(SchemaError::DuplicateSimplex(s.id));
            }
            map.insert(s.id.clone(), s);
        }
        Ok(Schema { registry, simplices: map })
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn contains(&self, id: &SimplexId) -> bool {
        self.simplices.contains_key(id)
    }

    pub fn get(&self, id: &SimplexId) -> Result<&Simplex, SchemaError> {
        self.simplices.get(id).ok_or_else(|| SchemaError::UnknownSimplex(id.clone()))
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &SimplexId> {
        self.simplices.keys()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.values().filter(|s| s.dim == 0)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.values().map(|s| s.dim).max()
    }

    pub fn count_by_dim(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for s in self.simplices.values() {
            *out.entry(s.dim).or_insert(0) += 1;
        }
        out
    }

    /// The stored face array as `(face_index, face id)` pairs.
    pub fn faces(&self, id: &SimplexId) -> Result<Vec<(usize, SimplexId)>, SchemaError> {
        Ok(self.get(id)?.faces.iter().cloned().enumerate().collect())
    }

    /// Every `(coface, index)` such that `coface.faces[index] == id`.
    pub fn cofaces(&self, id: &SimplexId) -> Result<BTreeSet<(SimplexId, usize)>, SchemaError> {
        self.get(id)?;
        let mut out = BTreeSet::new();
        for s in self.simplices.values() {
            for (i, f) in s.faces.iter().enumerate() {
                if f == id {
                    out.insert((s.id.clone(), i));
                }
            }
        }
        Ok(out)
    }

    /// Simplices that are not a face of anything.
    pub fn maximal(&self) -> Vec<SimplexId> {
        let mut is_face = BTreeSet::new();
        for s in self.simplices.values() {
            is_face.extend(s.faces.iter().cloned());
        }
        self.simplices.keys().filter(|id| !is_face.contains(*id)).cloned().collect()
    }

    /// The simplex and all of its iterated faces.
    pub fn closure(&self, id: &SimplexId) -> Result<BTreeSet<SimplexId>, SchemaError> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id.clone()];
        while let Some(cur) = stack.pop() {
            if out.insert(cur.clone()) {
                stack.extend(self.get(&cur)?.faces.iter().cloned());
            }
        }
        Ok(out)
    }

    /// Vertex occupying each slot: slot `k` is what remains after deleting
    /// every other slot. Repeated vertices (loops) are allowed.
    pub fn vertex_slots(&self, id: &SimplexId) -> Result<Vec<SimplexId>, SchemaError> {
        let s = self.get(id)?;
        self.slots_at(s, s.dim)
    }

    fn slots_at(&self, s: &Simplex, expected_dim: usize) -> Result<Vec<SimplexId>, SchemaError> {
        if s.dim != expected_dim || s.faces.len() != if s.dim == 0 { 0 } else { s.dim + 1 } {
            return Err(SchemaError::Invalid(vec![SchemaViolation::FaceCount {
                simplex: s.id.clone(),
                dim: s.dim,
                faces: s.faces.len(),
            }]));
        }
        if s.dim == 0 {
            return Ok(vec![s.id.clone()]);
        }
        let last_face = self.get(&s.faces[s.dim])?;
        let mut slots = self.slots_at(last_face, s.dim - 1)?;
        let first_face = self.get(&s.faces[0])?;
        let tail = self.slots_at(first_face, s.dim - 1)?;
        slots.push(tail.last().cloned().expect("non-empty"));
        Ok(slots)
    }

    /// Datatype of each vertex slot.
    pub fn slot_types(&self, id: &SimplexId) -> Result<Vec<DataType>, SchemaError> {
        self.vertex_slots(id)?
            .iter()
            .map(|v| {
                let label = self.get(v)?.label.clone().unwrap_or_default();
                self.registry.get(&label).cloned().ok_or(SchemaError::UnknownDataType(label))
            })
            .collect()
    }

    pub fn slot_labels(&self, id: &SimplexId) -> Result<Vec<String>, SchemaError> {
        self.vertex_slots(id)?
            .iter()
            .map(|v| Ok(self.get(v)?.label.clone().unwrap_or_default()))
            .collect()
    }

    /// Slot display order: ascending vertex id, then slot index.
    pub fn display_slot_order(&self, id: &SimplexId) -> Result<Vec<usize>, SchemaError> {
        let slots = self.vertex_slots(id)?;
        let mut order: Vec<usize> = (0..slots.len()).collect();
        order.sort_by(|&a, &b| slots[a].cmp(&slots[b]).then(a.cmp(&b)));
        Ok(order)
    }

    /// Applies a composite face map by deleting slots from the highest down.
    pub fn face_of(&self, id: &SimplexId, face: &FaceMap) -> Result<SimplexId, SchemaError> {
        let mut cur = id.clone();
        for &slot in face.deleted().iter().rev() {
            let s = self.get(&cur)?;
            if slot >= s.faces.len() {
                return Err(SchemaError::BadFaceMap { simplex: id.clone(), face: face.to_string() });
            }
            cur = s.faces[slot].clone();
        }
        Ok(cur)
    }

    /// Every face map from `big` onto `small`, in lexicographic order of the
    /// deleted slot sets. Empty if `small` is not a proper iterated face.
    pub fn face_maps_between(
        &self,
        big: &SimplexId,
        small: &SimplexId,
    ) -> Result<Vec<FaceMap>, SchemaError> {
        let b = self.get(big)?;
        let s = self.get(small)?;
        if s.dim >= b.dim {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for deleted in combinations(b.dim + 1, b.dim - s.dim) {
            let fm = FaceMap(deleted);
            if &self.face_of(big, &fm)? == small {
                out.push(fm);
            }
        }
        Ok(out)
    }

    /// Checks every schema invariant. An empty report means the schema is valid.
    pub fn validate(&self) -> Vec<SchemaViolation> {
        let mut out = Vec::new();
        for dt in self.registry.iter() {
            out.extend(dt.declaration_problems().into_iter().map(SchemaViolation::BadDataType));
        }
        let mut structurally_ok = BTreeSet::new();
        for s in self.simplices.values() {
            let expected = if s.dim == 0 { 0 } else { s.dim + 1 };
            if s.faces.len() != expected {
                out.push(SchemaViolation::FaceCount {
                    simplex: s.id.clone(),
                    dim: s.dim,
                    faces: s.faces.len(),
                });
                continue;
            }
            match (&s.label, s.dim) {
                (None, 0) => out.push(SchemaViolation::MissingLabel(s.id.clone())),
                (Some(l), 0) if self.registry.get(l).is_none() => {
                    out.push(SchemaViolation::UnknownLabel { simplex: s.id.clone(), label: l.clone() })
                }
                (Some(_), d) if d > 0 => out.push(SchemaViolation::UnexpectedLabel(s.id.clone())),
                _ => {}
            }
            let mut ok = true;
            for (i, f) in s.faces.iter().enumerate() {
                match self.simplices.get(f) {
                    None => {
                        ok = false;
                        out.push(SchemaViolation::DanglingFace {
                            simplex: s.id.clone(),
                            index: i,
                            face: f.clone(),
                        })
                    }
                    Some(fs) if fs.dim + 1 != s.dim => {
                        ok = false;
                        out.push(SchemaViolation::FaceDimension {
                            simplex: s.id.clone(),
                            index: i,
                            face: f.clone(),
                            found: fs.dim,
                        })
                    }
                    Some(_) => {}
                }
            }
            if ok {
                structurally_ok.insert(s.id.clone());
            }
        }
        for s in self.simplices.values() {
            if s.dim < 2 || !structurally_ok.contains(&s.id) {
                continue;
            }
            if !s.faces.iter().all(|f| structurally_ok.contains(f)) {
                continue;
            }
            for j in 1..=s.dim {
                for i in 0..j {
                    let lhs = &self.simplices[&s.faces[j]].faces[i];
                    let rhs = &self.simplices[&s.faces[i]].faces[j - 1];
                    if lhs != rhs {
                        out.push(SchemaViolation::SimplicialIdentity { simplex: s.id.clone(), i, j });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn ensure_valid(&self) -> Result<(), SchemaError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(SchemaError::Invalid(report))
        }
    }

    /// The symmetric representable on `labels`: one simplex per non-empty
    /// subset of the slots. Ids are `x` followed by the slot numbers, e.g.
    /// `x0_2`.
    pub fn make_representable(registry: &Registry, labels: &[&str]) -> Result<Schema, SchemaError> {
        representable(registry, labels, |slots| {
            let parts: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
            format!("x{}", parts.join("_"))
        })
    }

    /// A representable whose simplex ids concatenate vertex names:
    /// `[("A","a"),("B","b")]` gives `A`, `B` and `AB`.
    pub fn representable_named(
        registry: &Registry,
        vertices: &[(&str, &str)],
    ) -> Result<Schema, SchemaError> {
        let labels: Vec<&str> = vertices.iter().map(|(_, l)| *l).collect();
        representable(registry, &labels, |slots| slots.iter().map(|&s| vertices[s].0).collect())
    }

    /// Id of the representable's simplex on a given slot subset, matching
    /// [`Schema::make_representable`].
    pub fn representable_id(slots: &[usize]) -> SimplexId {
        let parts: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
        SimplexId(format!("x{}", parts.join("_")))
    }

    /// Re-indexes simplices: for each entry, new slot `a` is old slot `perm[a]`.
    pub fn reindexed(&self, perms: &BTreeMap<SimplexId, Vec<usize>>) -> Schema {
        let mut out = self.clone();
        for (id, perm) in perms {
            if let Some(s) = out.simplices.get_mut(id) {
                if s.dim > 0 {
                    let old = s.faces.clone();
                    s.faces = perm.iter().map(|&p| old[p].clone()).collect();
                }
            }
        }
        out
    }

    /// Slot permutations that re-index `start` by `perm` and keep the
    /// simplicial identities intact around it.
    pub fn reindex_plan(
        &self,
        start: &SimplexId,
        perm: &[usize],
    ) -> Result<BTreeMap<SimplexId, Vec<usize>>, SchemaError> {
        let mut plan: BTreeMap<SimplexId, Vec<usize>> = BTreeMap::new();
        let mut queue = VecDeque::new();
        fn assign(
            id: SimplexId,
            p: Vec<usize>,
            plan: &mut BTreeMap<SimplexId, Vec<usize>>,
            queue: &mut VecDeque<SimplexId>,
        ) -> Result<(), SchemaError> {
            match plan.get(&id) {
                Some(existing) if existing != &p => Err(SchemaError::MatchingNotRealizable(format!(
                    "`{id}` would need slot orders {existing:?} and {p:?}"
                ))),
                Some(_) => Ok(()),
                None => {
                    plan.insert(id.clone(), p);
                    queue.push_back(id);
                    Ok(())
                }
            }
        }
        assign(start.clone(), perm.to_vec(), &mut plan, &mut queue)?;
        let is_identity = |p: &[usize]| p.iter().enumerate().all(|(i, &j)| i == j);
        loop {
            // faces are forced by their cofaces
            while let Some(id) = queue.pop_front() {
                let p = plan[&id].clone();
                let s = self.get(&id)?;
                for a in 0..s.faces.len() {
                    let j = p[a];
                    let face_perm: Vec<usize> = (0..=s.dim)
                        .filter(|&b| b != a)
                        .map(|b| if p[b] < j { p[b] } else { p[b] - 1 })
                        .collect();
                    assign(s.faces[j].clone(), face_perm, &mut plan, &mut queue)?;
                }
            }
            // an unassigned coface of a moved simplex takes a slot order
            // agreeing with every face already assigned
            let mut guess = None;
            'search: for id in plan.iter().filter(|(_, p)| !is_identity(p)).map(|(id, _)| id) {
                for (z, _) in self.cofaces(id)? {
                    if !plan.contains_key(&z) {
                        guess = Some(z);
                        break 'search;
                    }
                }
            }
            let Some(z) = guess else { break };
            let zp = self.coface_order(&z, &plan)?;
            assign(z, zp, &mut plan, &mut queue)?;
        }
        plan.retain(|_, p| p.iter().enumerate().any(|(i, &j)| i != j));
        Ok(plan)
    }

    /// Slot order of `z` (new slot `a` holds old slot `order[a]`) that
    /// induces the planned order on every planned simplex below it. Ties keep
    /// the old order.
    fn coface_order(&self, z: &SimplexId, plan: &BTreeMap<SimplexId, Vec<usize>>) -> Result<Vec<usize>, SchemaError> {
        let s = self.get(z)?;
        let n = s.dim + 1;
        let mut after: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for y in self.closure(z)? {
            let Some(p) = plan.get(&y) else { continue };
            if &y == z {
                continue;
            }
            for fm in self.face_maps_between(z, &y)? {
                let kept = fm.retained(s.dim);
                for w in p.windows(2) {
                    after[kept[w[0]]].insert(kept[w[1]]);
                }
            }
        }
        let mut indegree = vec![0; n];
        for succ in &after {
            for &v in succ {
                indegree[v] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &after[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() < n {
            return Err(SchemaError::MatchingNotRealizable(format!("faces of `{z}` need contradictory slot orders")));
        }
        Ok(order)
    }

    /// Pushout of `left` and `right` identifying the closure of `x1` with the
    /// closure of `x2` along `matching`.
    pub fn glue(
        left: &Schema,
        x1: &SimplexId,
        right: &Schema,
        x2: &SimplexId,
        matching: &SlotMatching,
    ) -> Result<Glued, SchemaError> {
        left.ensure_valid()?;
        right.ensure_valid()?;
        let registry = left.registry.merged(&right.registry)?;
        check_attachment(left, x1, right, x2, matching)?;

        let perms = if matching.is_identity() {
            BTreeMap::new()
        } else {
            right.reindex_plan(x2, &matching.0)?
        };
        let right = right.reindexed(&perms);
        if let Some(v) = right.validate().into_iter().next() {
            return Err(SchemaError::MatchingNotRealizable(v.to_string()));
        }

        let mut taken: BTreeSet<SimplexId> = left.ids().chain(right.ids()).cloned().collect();
        let mut right_ids = BTreeMap::new();
        for id in right.ids() {
            let new = if left.contains(id) {
                let mut candidate = format!("{id}'");
                while taken.contains(&SimplexId(candidate.clone())) {
                    candidate.push('\'');
                }
                let c = SimplexId(candidate);
                taken.insert(c.clone());
                c
            } else {
                id.clone()
            };
            right_ids.insert(id.clone(), new);
        }
        let mut union = left.simplices.clone();
        for s in right.simplices.values() {
            let mut s = s.clone();
            s.id = right_ids[&s.id].clone();
            s.faces = s.faces.iter().map(|f| right_ids[f].clone()).collect();
            union.insert(s.id.clone(), s);
        }
        let union = Schema { registry, simplices: union };
        let (schema, quotient) = identify(&union, &[(x1.clone(), right_ids[x2].clone())])?;
        let left_map = left.ids().map(|id| (id.clone(), quotient[id].clone())).collect();
        let right_map = right_ids.iter().map(|(id, u)| (id.clone(), quotient[u].clone())).collect();
        Ok(Glued { schema, left: left_map, right: right_map, union, quotient, right_ids, right_perms: perms })
    }

    /// Identifies the closure of `x2` with that of `x1` inside one schema
    /// (e.g. dropping one end of an edge onto the other makes a loop).
    pub fn glue_within(
        &self,
        x1: &SimplexId,
        x2: &SimplexId,
        matching: &SlotMatching,
    ) -> Result<Glued, SchemaError> {
        self.ensure_valid()?;
        check_attachment(self, x1, self, x2, matching)?;
        let perms = if matching.is_identity() {
            BTreeMap::new()
        } else {
            let plan = self.reindex_plan(x2, &matching.0)?;
            if let Some(c) = self.closure(x1)?.iter().find(|c| plan.contains_key(*c)) {
                return Err(SchemaError::MatchingNotRealizable(format!(
                    "re-indexing `{x2}` also moves `{c}`"
                )));
            }
            plan
        };
        let union = self.reindexed(&perms);
        if let Some(v) = union.validate().into_iter().next() {
            return Err(SchemaError::MatchingNotRealizable(v.to_string()));
        }
        let (schema, quotient) = identify(&union, &[(x1.clone(), x2.clone())])?;
        let right_ids = self.ids().map(|id| (id.clone(), id.clone())).collect();
        Ok(Glued {
            schema,
            left: quotient.clone(),
            right: quotient.clone(),
            union,
            quotient,
            right_ids,
            right_perms: perms,
        })
    }

    /// Disjoint union; colliding right ids are primed.
    pub fn disjoint_union(left: &Schema, right: &Schema) -> Result<Glued, SchemaError> {
        let registry = left.registry.merged(&right.registry)?;
        let mut taken: BTreeSet<SimplexId> = left.ids().chain(right.ids()).cloned().collect();
        let mut right_ids = BTreeMap::new();
        for id in right.ids() {
            let mut new = id.clone();
            if left.contains(id) {
                let mut candidate = format!("{id}'");
                while taken.contains(&SimplexId(candidate.clone())) {
                    candidate.push('\'');
                }
                new = SimplexId(candidate);
                taken.insert(new.clone());
            }
            right_ids.insert(id.clone(), new);
        }
        let mut simplices = left.simplices.clone();
        for s in right.simplices.values() {
            let mut s = s.clone();
            s.id = right_ids[&s.id].clone();
            s.faces = s.faces.iter().map(|f| right_ids[f].clone()).collect();
            simplices.insert(s.id.clone(), s);
        }
        let union = Schema { registry, simplices };
        let quotient: BTreeMap<_, _> = union.ids().map(|id| (id.clone(), id.clone())).collect();
        Ok(Glued {
            schema: union.clone(),
            left: left.ids().map(|id| (id.clone(), id.clone())).collect(),
            right: right_ids.clone(),
            union,
            quotient,
            right_ids,
            right_perms: BTreeMap::new(),
        })
    }

    /// Rebuilds the schema as the colimit of the representables of its
    /// simplices, glued along their faces. The result reuses the input ids.
    pub fn reassemble(&self) -> Result<Schema, SchemaError> {
        self.ensure_valid()?;
        let tag = |x: &SimplexId, slots: &[usize]| {
            let parts: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
            SimplexId(format!("{x}|{}", parts.join(".")))
        };
        let mut simplices = BTreeMap::new();
        let mut tops = BTreeMap::new();
        for s in self.simplices.values() {
            let labels = self.slot_labels(&s.id)?;
            let n = labels.len();
            for mask in 1u64..(1u64 << n) {
                let slots: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
                let id = tag(&s.id, &slots);
                let simplex = if slots.len() == 1 {
                    Simplex::vertex(id.clone(), labels[slots[0]].clone())
                } else {
                    let faces = (0..slots.len())
                        .map(|i| {
                            let mut sub = slots.clone();
                            sub.remove(i);
                            tag(&s.id, &sub)
                        })
                        .collect::<Vec<_>>();
                    Simplex::with_faces(id.clone(), faces)
                };
                simplices.insert(id, simplex);
            }
            tops.insert(tag(&s.id, &(0..n).collect::<Vec<_>>()), s.id.clone());
        }
        let union = Schema { registry: self.registry.clone(), simplices };
        let mut seeds = Vec::new();
        for s in self.simplices.values() {
            let n = s.dim + 1;
            for (i, f) in s.faces.iter().enumerate() {
                let f_top = tag(f, &(0..n - 1).collect::<Vec<_>>());
                let sub: Vec<usize> = (0..n).filter(|&k| k != i).collect();
                seeds.push((f_top, tag(&s.id, &sub)));
            }
        }
        let (quotient_schema, quotient) = identify(&union, &seeds)?;
        // name each class after the simplex whose top landed in it
        let mut names: BTreeMap<SimplexId, SimplexId> = BTreeMap::new();
        for (top, x) in &tops {
            names.entry(quotient[top].clone()).or_insert_with(|| x.clone());
        }
        let rename = |id: &SimplexId| names.get(id).cloned().unwrap_or_else(|| id.clone());
        let mut out = BTreeMap::new();
        for s in quotient_schema.simplices.values() {
            let mut s = s.clone();
            s.id = rename(&s.id);
            s.faces = s.faces.iter().map(&rename).collect();
            out.insert(s.id.clone(), s);
        }
        Ok(Schema { registry: self.registry.clone(), simplices: out })
    }
}

/// Result of a glue: the pushout and where every input simplex went.
#[derive(Clone, Debug)]
pub struct Glued {
    pub schema: Schema,
    /// Left simplex id to result id.
    pub left: BTreeMap<SimplexId, SimplexId>,
    /// Right simplex id to result id.
    pub right: BTreeMap<SimplexId, SimplexId>,
    /// Disjoint union before identification (right side re-indexed and renamed).
    pub union: Schema,
    /// Union id to result id.
    pub quotient: BTreeMap<SimplexId, SimplexId>,
    /// Right simplex id to union id.
    pub right_ids: BTreeMap<SimplexId, SimplexId>,
    /// Slot permutations applied to right simplices (keyed by original id).
    pub right_perms: BTreeMap<SimplexId, Vec<usize>>,
}

fn check_attachment(
    left: &Schema,
    x1: &SimplexId,
    right: &Schema,
    x2: &SimplexId,
    matching: &SlotMatching,
) -> Result<(), SchemaError> {
    let a = left.get(x1)?;
    let b = right.get(x2)?;
    if a.dim != b.dim {
        return Err(SchemaError::DimensionMismatch {
            left: x1.clone(),
            left_dim: a.dim,
            right: x2.clone(),
            right_dim: b.dim,
        });
    }
    matching.check(a.dim)?;
    let la = left.slot_labels(x1)?;
    let lb = right.slot_labels(x2)?;
    for (k, &m) in matching.0.iter().enumerate() {
        if la[k] != lb[m] {
            return Err(SchemaError::LabelMismatch { slot: k, left: la[k].clone(), right: lb[m].clone() });
        }
    }
    Ok(())
}

/// Quotient of `union` by the smallest face-closed equivalence containing the
/// seed pairs. The first member of a pair names the merged class.
fn identify(
    union: &Schema,
    seeds: &[(SimplexId, SimplexId)],
) -> Result<(Schema, BTreeMap<SimplexId, SimplexId>), SchemaError> {
    let mut parent: BTreeMap<SimplexId, SimplexId> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<SimplexId, SimplexId>, id: &SimplexId) -> SimplexId {
        let mut root = id.clone();
        while let Some(p) = parent.get(&root) {
            root = p.clone();
        }
        let mut cur = id.clone();
        while let Some(p) = parent.get(&cur).cloned() {
            parent.insert(cur, root.clone());
            cur = p;
        }
        root
    }
    let mut queue: VecDeque<(SimplexId, SimplexId)> = seeds.iter().cloned().collect();
    while let Some((a, b)) = queue.pop_front() {
        let ra = find(&mut parent, &a);
        let rb = find(&mut parent, &b);
        if ra == rb {
            continue;
        }
        let sa = union.get(&ra)?;
        let sb = union.get(&rb)?;
        if sa.dim != sb.dim {
            return Err(SchemaError::DimensionMismatch {
                left: ra.clone(),
                left_dim: sa.dim,
                right: rb.clone(),
                right_dim: sb.dim,
            });
        }
        if sa.dim == 0 && sa.label != sb.label {
            return Err(SchemaError::LabelMismatch {
                slot: 0,
                left: sa.label.clone().unwrap_or_default(),
                right: sb.label.clone().unwrap_or_default(),
            });
        }
        for (fa, fb) in sa.faces.iter().zip(&sb.faces) {
            queue.push_back((fa.clone(), fb.clone()));
        }
        parent.insert(rb, ra);
    }
    let ids: Vec<SimplexId> = union.ids().cloned().collect();
    let quotient: BTreeMap<SimplexId, SimplexId> =
        ids.iter().map(|id| (id.clone(), find(&mut parent, id))).collect();
    let mut simplices = BTreeMap::new();
    for s in union.simplices.values() {
        if quotient[&s.id] != s.id {
            continue;
        }
        let mut s = s.clone();
        s.faces = s.faces.iter().map(|f| quotient[f].clone()).collect();
        simplices.insert(s.id.clone(), s);
    }
    Ok((Schema { registry: union.registry.clone(), simplices }, quotient))
}

fn representable(
    registry: &Registry,
    labels: &[&str],
    name: impl Fn(&[usize]) -> String,
) -> Result<Schema, SchemaError> {
    if labels.is_empty() {
        return Err(SchemaError::EmptyLabels);
    }
    for l in labels {
        if registry.get(l).is_none() {
            return Err(SchemaError::UnknownDataType((*l).to_owned()));
        }
    }
    let n = labels.len();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n) {
        let slots: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
        let id = SimplexId(name(&slots));
        if slots.len() == 1 {
            out.push(Simplex::vertex(id, labels[slots[0]]));
        } else {
            let faces: Vec<SimplexId> = (0..slots.len())
                .map(|i| {
                    let mut sub = slots.clone();
                    sub.remove(i);
                    SimplexId(name(&sub))
                })
                .collect();
            out.push(Simplex::with_faces(id, faces));
        }
    }
    Schema::from_parts(registry.clone(), out)
}

/// `k`-element subsets of `0..n`, ascending, in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Isomorphism witness: each simplex of the first schema maps to a simplex of
/// the second together with the slot bijection (`perm[k]` is the target slot
/// of source slot `k`).
pub type Isomorphism = BTreeMap<SimplexId, (SimplexId, Vec<usize>)>;

/// Searches for an isomorphism of labeled symmetric semi-simplicial sets:
/// a bijection on simplices preserving dimension, labels and faces up to the
/// slot bijections.
pub fn find_isomorphism(a: &Schema, b: &Schema) -> Option<Isomorphism> {
    if a.len() != b.len() || a.count_by_dim() != b.count_by_dim() {
        return None;
    }
    let mut labels_a: Vec<_> = a.vertices().map(|v| v.label.clone()).collect();
    let mut labels_b: Vec<_> = b.vertices().map(|v| v.label.clone()).collect();
    labels_a.sort();
    labels_b.sort();
    if labels_a != labels_b {
        return None;
    }

    struct State {
        fwd: BTreeMap<SimplexId, (SimplexId, Vec<usize>)>,
        rev: BTreeMap<SimplexId, SimplexId>,
        trail: Vec<SimplexId>,
    }

    fn try_map(a: &Schema, b: &Schema, x: &SimplexId, y: &SimplexId, perm: Vec<usize>, st: &mut State) -> bool {
        if let Some((yy, pp)) = st.fwd.get(x) {
            return yy == y && *pp == perm;
        }
        if st.rev.contains_key(y) {
            return false;
        }
        let (sx, sy) = match (a.get(x), b.get(y)) {
            (Ok(sx), Ok(sy)) => (sx, sy),
            _ => return false,
        };
        if sx.dim != sy.dim || sx.label != sy.label {
            return false;
        }
        st.fwd.insert(x.clone(), (y.clone(), perm.clone()));
        st.rev.insert(y.clone(), x.clone());
        st.trail.push(x.clone());
        for i in 0..sx.faces.len() {
            let pi = perm[i];
            let face_perm: Vec<usize> = (0..=sx.dim)
                .filter(|&k| k != i)
                .map(|k| if perm[k] < pi { perm[k] } else { perm[k] - 1 })
                .collect();
            if !try_map(a, b, &sx.faces[i], &sy.faces[pi], face_perm, st) {
                return false;
            }
        }
        true
    }

    fn undo(st: &mut State, mark: usize) {
        while st.trail.len() > mark {
            let x = st.trail.pop().expect("trail");
            if let Some((y, _)) = st.fwd.remove(&x) {
                st.rev.remove(&y);
            }
        }
    }

    let mut st = State { fwd: BTreeMap::new(), rev: BTreeMap::new(), trail: Vec::new() };
    let mut maximal: Vec<SimplexId> = a.maximal();
    maximal.sort_by(|p, q| a.simplices[q].dim.cmp(&a.simplices[p].dim).then(p.cmp(q)));

    // fast path: same ids, identity slots
    if a.ids().eq(b.ids()) {
        let ok = maximal.iter().all(|x| {
            let d = a.simplices[x].dim;
            try_map(a, b, x, x, (0..=d).collect(), &mut st)
        });
        if ok && st.fwd.len() == a.len() {
            return Some(st.fwd);
        }
        undo(&mut st, 0);
    }

    let coface_count = |s: &Schema| {
        let mut counts: BTreeMap<SimplexId, usize> = s.ids().map(|id| (id.clone(), 0)).collect();
        for x in s.simplices() {
            for f in &x.faces {
                *counts.get_mut(f).expect("face") += 1;
            }
        }
        counts
    };
    let ca = coface_count(a);
    let cb = coface_count(b);
    let b_maximal = b.maximal();

    fn search(
        idx: usize,
        maximal: &[SimplexId],
        a: &Schema,
        b: &Schema,
        b_maximal: &[SimplexId],
        ca: &BTreeMap<SimplexId, usize>,
        cb: &BTreeMap<SimplexId, usize>,
        st: &mut State,
    ) -> bool {
        if idx == maximal.len() {
            return st.fwd.len() == a.len();
        }
        let x = &maximal[idx];
        if st.fwd.contains_key(x) {
            return search(idx + 1, maximal, a, b, b_maximal, ca, cb, st);
        }
        let sx = &a.simplices[x];
        let lx = a.slot_labels(x).unwrap_or_default();
        for y in b_maximal {
            let sy = &b.simplices[y];
            if sy.dim != sx.dim || st.rev.contains_key(y) || ca[x] != cb[y] {
                continue;
            }
            let ly = b.slot_labels(y).unwrap_or_default();
            for perm in permutations(sx.dim + 1) {
                if (0..lx.len()).any(|k| lx[k] != ly[perm[k]]) {
                    continue;
                }
                let mark = st.trail.len();
                if try_map(a, b, x, y, perm, st)
                    && search(idx + 1, maximal, a, b, b_maximal, ca, cb, st)
                {
                    return true;
                }
                undo(st, mark);
            }
        }
        false
    }

    if search(0, &maximal, a, b, &b_maximal, &ca, &cb, &mut st) {
        Some(st.fwd)
    } else {
        None
    }
}

pub fn is_isomorphic(a: &Schema, b: &Schema) -> bool {
    find_isomorphism(a, b).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::DataType;

    fn reg(names: &[&str]) -> Registry {
        let mut r = Registry::new();
        for n in names {
            r.insert(DataType::text(*n)).unwrap();
        }
        r
    }

    fn id(s: &str) -> SimplexId {
        SimplexId::from(s)
    }

    #[test]
    fn representable_counts() {
        let r = reg(&["SSN", "First", "Last", "A", "B", "C", "D"]);
        assert_eq!(Schema::make_representable(&r, &["SSN"]).unwrap().len(), 1);
        let tri = Schema::make_representable(&r, &["First", "Last", "SSN"]).unwrap();
        assert_eq!(tri.len(), 7);
        assert_eq!(tri.count_by_dim(), BTreeMap::from([(0, 3), (1, 3), (2, 1)]));
        let tet = Schema::make_representable(&r, &["A", "B", "C", "D"]).unwrap();
        assert_eq!(tet.len(), 15);
        assert_eq!(tet.count_by_dim(), BTreeMap::from([(0, 4), (1, 6), (2, 4), (3, 1)]));
        assert!(tet.validate().is_empty());
        assert!(matches!(
            Schema::make_representable(&r, &["Nope"]),
            Err(SchemaError::UnknownDataType(_))
        ));
        assert_eq!(Schema::make_representable(&r, &[]), Err(SchemaError::EmptyLabels));
    }

    #[test]
    fn vertex_slots_of_triangle_and_loop() {
        let r = reg(&["A", "B", "C", "P"]);
        let tri = Schema::representable_named(&r, &[("A", "A"), ("B", "B"), ("C", "C")]).unwrap();
        assert_eq!(tri.vertex_slots(&id("A")).unwrap(), vec![id("A")]);
        assert_eq!(tri.vertex_slots(&id("ABC")).unwrap(), vec![id("A"), id("B"), id("C")]);

        let loop_schema = Schema::from_parts(
            r.clone(),
            vec![Simplex::vertex("P", "P"), Simplex::with_faces("E", ["P", "P"])],
        )
        .unwrap();
        assert!(loop_schema.validate().is_empty());
        assert_eq!(loop_schema.vertex_slots(&id("E")).unwrap(), vec![id("P"), id("P")]);
        assert!(matches!(tri.vertex_slots(&id("Z")), Err(SchemaError::UnknownSimplex(_))));
    }

    #[test]
    fn faces_and_cofaces() {
        let r = reg(&["A", "B", "C", "D"]);
        let edge = Schema::representable_named(&r, &[("A", "A"), ("B", "B")]).unwrap();
        let tri = Schema::representable_named(&r, &[("B", "B"), ("C", "C"), ("D", "D")]).unwrap();
        assert!(edge.faces(&id("A")).unwrap().is_empty());
        assert_eq!(
            tri.faces(&id("BCD")).unwrap(),
            vec![(0, id("CD")), (1, id("BD")), (2, id("BC"))]
        );
        let g = Schema::glue(&edge, &id("B"), &tri, &id("B"), &SlotMatching::identity(0)).unwrap();
        let cof: BTreeSet<SimplexId> = g.schema.cofaces(&id("B")).unwrap().into_iter().map(|(s, _)| s).collect();
        assert_eq!(cof, BTreeSet::from([id("AB"), id("BC"), id("BD")]));
    }

    #[test]
    fn validation_reports_injected_defects() {
        let r = reg(&["A", "B", "C"]);
        let tri = Schema::representable_named(&r, &[("A", "A"), ("B", "B"), ("C", "C")]).unwrap();
        assert!(tri.validate().is_empty());

        // swap two faces of the triangle: identities break
        let mut broken = tri.clone();
        let s = broken.simplices.get_mut(&id("ABC")).unwrap();
        s.faces.swap(0, 1);
        let report = broken.validate();
        assert!(!report.is_empty());
        assert!(report.iter().all(|v| matches!(v, SchemaViolation::SimplicialIdentity { .. })));

        // break exactly one identity: relabel one edge's face
        let mut one = Schema::from_parts(
            r.clone(),
            vec![
                Simplex::vertex("A", "A"),
                Simplex::vertex("B", "B"),
                Simplex::vertex("C", "C"),
                Simplex::vertex("C2", "C"),
                Simplex::with_faces("BC", ["C", "B"]),
                Simplex::with_faces("AC", ["C2", "A"]),
                Simplex::with_faces("AB", ["B", "A"]),
                Simplex::with_faces("ABC", ["BC", "AC", "AB"]),
            ],
        )
        .unwrap();
        let report = one.validate();
        assert_eq!(report, vec![SchemaViolation::SimplicialIdentity { simplex: id("ABC"), i: 0, j: 1 }]);
        one.simplices.insert(id("X"), Simplex::with_faces("X", ["A", "missing"]));
        assert!(one
            .validate()
            .contains(&SchemaViolation::DanglingFace { simplex: id("X"), index: 1, face: id("missing") }));

        let dangling = Schema::from_parts(
            r.clone(),
            vec![Simplex::vertex("A", "A"), Simplex::with_faces("AB", ["B", "A"])],
        )
        .unwrap();
        assert_eq!(
            dangling.validate(),
            vec![SchemaViolation::DanglingFace { simplex: id("AB"), index: 0, face: id("B") }]
        );
    }

    #[test]
    fn glue_edge_to_triangle_at_vertex() {
        let r = reg(&["A", "B", "C", "D"]);
        let edge = Schema::representable_named(&r, &[("A", "A"), ("B", "B")]).unwrap();
        let tri = Schema::representable_named(&r, &[("B", "B"), ("C", "C"), ("D", "D")]).unwrap();
        let g = Schema::glue(&edge, &id("B"), &tri, &id("B"), &SlotMatching::identity(0)).unwrap();
        // 3 + 7 - 1 by inclusion-exclusion
        assert_eq!(g.schema.len(), 9);
        assert_eq!(g.schema.count_by_dim(), BTreeMap::from([(0, 4), (1, 4), (2, 1)]));
        assert!(g.schema.validate().is_empty());
        assert_eq!(g.right[&id("B")], id("B"));
        assert_eq!(g.left[&id("B")], id("B"));
    }

    #[test]
    fn glue_vertex_onto_other_end_makes_loop() {
        let r = reg(&["person"]);
        let edge = Schema::representable_named(&r, &[("P", "person"), ("Q", "person")]).unwrap();
        let g = edge.glue_within(&id("P"), &id("Q"), &SlotMatching::identity(0)).unwrap();
        assert_eq!(g.schema.len(), 2);
        assert_eq!(g.schema.vertex_slots(&id("PQ")).unwrap(), vec![id("P"), id("P")]);
        assert!(g.schema.validate().is_empty());
    }

    #[test]
    fn glue_two_triangles_into_rhombus() {
        let r = reg(&["companies", "date", "creation"]);
        let left = Schema::representable_named(
            &r,
            &[("c1", "companies"), ("c2", "companies"), ("d", "date")],
        )
        .unwrap();
        let right = Schema::representable_named(
            &r,
            &[("c1", "companies"), ("c2", "companies"), ("k", "creation")],
        )
        .unwrap();
        for m in [SlotMatching(vec![0, 1]), SlotMatching(vec![1, 0])] {
            let g = Schema::glue(&left, &id("c1c2"), &right, &id("c1c2"), &m).unwrap();
            assert_eq!(g.schema.count_by_dim(), BTreeMap::from([(0, 4), (1, 5), (2, 2)]));
            assert!(g.schema.validate().is_empty(), "{:?}", g.schema.validate());
        }
    }

    #[test]
    fn glue_errors() {
        let r = reg(&["A", "B"]);
        let edge = Schema::representable_named(&r, &[("A", "A"), ("B", "B")]).unwrap();
        assert!(matches!(
            Schema::glue(&edge, &id("A"), &edge, &id("AB"), &SlotMatching::identity(0)),
            Err(SchemaError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Schema::glue(&edge, &id("A"), &edge, &id("B"), &SlotMatching::identity(0)),
            Err(SchemaError::LabelMismatch { .. })
        ));
        assert!(matches!(
            Schema::glue(&edge, &id("AB"), &edge, &id("AB"), &SlotMatching(vec![1, 0])),
            Err(SchemaError::LabelMismatch { .. })
        ));
        assert!(matches!(
            Schema::glue(&edge, &id("nope"), &edge, &id("AB"), &SlotMatching::identity(1)),
            Err(SchemaError::UnknownSimplex(_))
        ));
    }

    #[test]
    fn reassemble_is_isomorphic() {
        let r = reg(&["A", "B", "C", "D"]);
        let v = Schema::make_representable(&r, &["A"]).unwrap();
        assert!(is_isomorphic(&v.reassemble().unwrap(), &v));
        let edge = Schema::representable_named(&r, &[("A", "A"), ("B", "B")]).unwrap();
        let tri = Schema::representable_named(&r, &[("B", "B"), ("C", "C"), ("D", "D")]).unwrap();
        let g = Schema::glue(&edge, &id("B"), &tri, &id("B"), &SlotMatching::identity(0)).unwrap();
        let back = g.schema.reassemble().unwrap();
        assert_eq!(back, g.schema);
    }

    #[test]
    fn isomorphism_sees_through_renaming_and_slot_order() {
        let r = reg(&["A", "B", "C"]);
        let t1 = Schema::representable_named(&r, &[("A", "A"), ("B", "B"), ("C", "C")]).unwrap();
        let t2 = Schema::representable_named(&r, &[("c", "C"), ("a", "A"), ("b", "B")]).unwrap();
        assert!(is_isomorphic(&t1, &t2));
        let edge = Schema::representable_named(&r, &[("A", "A"), ("B", "B")]).unwrap();
        assert!(!is_isomorphic(&t1, &edge));
    }

    #[test]
    fn face_maps_between_iterated_faces() {
        let r = reg(&["A", "B", "C"]);
        let tri = Schema::representable_named(&r, &[("A", "A"), ("B", "B"), ("C", "C")]).unwrap();
        assert_eq!(tri.face_maps_between(&id("ABC"), &id("C")).unwrap(), vec![FaceMap::new(vec![0, 1])]);
        assert_eq!(tri.face_maps_between(&id("ABC"), &id("AB")).unwrap(), vec![FaceMap::single(2)]);
        assert!(tri.face_maps_between(&id("AB"), &id("C")).unwrap().is_empty());
        let lp = Schema::from_parts(r, vec![Simplex::vertex("P", "A"), Simplex::with_faces("E", ["P", "P"])]).unwrap();
        assert_eq!(
            lp.face_maps_between(&id("E"), &id("P")).unwrap(),
            vec![FaceMap::single(0), FaceMap::single(1)]
        );
    }

    #[test]
    fn display_order_sorts_by_vertex_id() {
        let r = reg(&["A", "B"]);
        let s = Schema::from_parts(
            r,
            vec![Simplex::vertex("b", "B"), Simplex::vertex("a", "A"), Simplex::with_faces("e", ["a", "b"])],
        )
        .unwrap();
        // slots are [b, a]
        assert_eq!(s.vertex_slots(&id("e")).unwrap(), vec![id("b"), id("a")]);
        assert_eq!(s.display_slot_order(&id("e")).unwrap(), vec![1, 0]);
    }

    #[test]
    fn flipping_an_inner_edge_moves_its_triangle() {
        let x = Schema::make_representable(&reg(&["p"]), &["p", "p", "p"]).unwrap();
        let plan = x.reindex_plan(&id("x0_2"), &[1, 0]).unwrap();
        let y = x.reindexed(&plan);
        assert!(y.validate().is_empty());
        assert_eq!(y.vertex_slots(&id("x0_2")).unwrap(), vec![id("x2"), id("x0")]);
        let tri = y.vertex_slots(&id("x0_1_2")).unwrap();
        let at = |v: &str| tri.iter().position(|s| s == &id(v)).unwrap();
        assert!(at("x2") < at("x0"));
    }
}
