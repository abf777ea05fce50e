//! Concrete and virtual tables over a single simplex, and the table combinators.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::SheafError;
use crate::schema::SimplexId;
use crate::value::{DataType, Key, Tuple, TypeKind, Value};

/// A finite table: keys with (not necessarily distinct) tuples.
#[derive(Clone, Debug)]
pub struct ConcreteTable {
    simplex: SimplexId,
    rows: Vec<(Key, Tuple)>,
    index: BTreeMap<Key, usize>,
}

impl PartialEq for ConcreteTable {
    fn eq(&self, other: &Self) -> bool {
        self.simplex == other.simplex && self.rows == other.rows
    }
}

impl ConcreteTable {
    pub fn new(simplex: SimplexId, rows: Vec<(Key, Tuple)>) -> Result<Self, SheafError> {
        let mut index = BTreeMap::new();
        for (i, (k, _)) in rows.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(SheafError::DuplicateKey { simplex, key: k.clone() });
            }
        }
        Ok(ConcreteTable { simplex, rows, index })
    }

    /// Rows keyed `0`, `1`, ... in the given order.
    pub fn from_tuples(simplex: SimplexId, tuples: impl IntoIterator<Item = Tuple>) -> Self {
        let rows = tuples.into_iter().enumerate().map(|(i, t)| (Key::seq(i), t)).collect();
        ConcreteTable::new(simplex, rows).expect("sequential keys are distinct")
    }

    pub fn empty(simplex: SimplexId) -> Self {
        ConcreteTable { simplex, rows: Vec::new(), index: BTreeMap::new() }
    }

    pub fn simplex(&self) -> &SimplexId {
        &self.simplex
    }

    pub fn rows(&self) -> &[(Key, Tuple)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &Key) -> Option<&Tuple> {
        self.index.get(key).map(|&i| &self.rows[i].1)
    }

    pub fn contains_key(&self, key: &Key) -> bool {
        self.index.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.rows.iter().map(|(k, _)| k)
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.rows.iter().map(|(_, t)| t)
    }

    /// Multiplicity of each tuple value.
    pub fn value_counts(&self) -> BTreeMap<Tuple, usize> {
        let mut out = BTreeMap::new();
        for (_, t) in &self.rows {
            *out.entry(t.clone()).or_insert(0) += 1;
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        self.value_counts().values().all(|&c| c == 1)
    }

    /// Keys of the rows carrying `tuple`, in row order.
    pub fn keys_with(&self, tuple: &Tuple) -> Vec<&Key> {
        self.rows.iter().filter(|(_, t)| t == tuple).map(|(k, _)| k).collect()
    }

    pub(crate) fn with_simplex(mut self, simplex: SimplexId) -> Self {
        self.simplex = simplex;
        self
    }

    pub(crate) fn map_tuples(&self, f: impl Fn(&Tuple) -> Tuple) -> Self {
        ConcreteTable {
            simplex: self.simplex.clone(),
            rows: self.rows.iter().map(|(k, t)| (k.clone(), f(t))).collect(),
            index: self.index.clone(),
        }
    }
}

/// Computed relations that are never materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// Every conforming tuple.
    Gamma,
    /// `slot[sum] = slot[summands[0]] + slot[summands[1]]`.
    Addition { summands: [usize; 2], sum: usize },
    /// `slot[target] - slot[source] = d`.
    Difference { d: i64, source: usize, target: usize },
}

impl Builtin {
    pub fn addition() -> Self {
        Builtin::Addition { summands: [0, 1], sum: 2 }
    }

    pub fn difference(d: i64) -> Self {
        Builtin::Difference { d, source: 0, target: 1 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Gamma => "gamma",
            Builtin::Addition { .. } => "addition",
            Builtin::Difference { .. } => "difference",
        }
    }

    pub fn arity(&self) -> Option<usize> {
        match self {
            Builtin::Gamma => None,
            Builtin::Addition { .. } => Some(3),
            Builtin::Difference { .. } => Some(2),
        }
    }

    /// The same relation after the owning simplex is re-indexed so that new
    /// slot `a` is old slot `perm[a]`.
    pub fn reindexed(&self, perm: &[usize]) -> Builtin {
        let to_new = |old: usize| perm.iter().position(|&p| p == old).expect("permutation");
        match self {
            Builtin::Gamma => Builtin::Gamma,
            Builtin::Addition { summands, sum } => Builtin::Addition {
                summands: [to_new(summands[0]), to_new(summands[1])],
                sum: to_new(*sum),
            },
            Builtin::Difference { d, source, target } => {
                Builtin::Difference { d: *d, source: to_new(*source), target: to_new(*target) }
            }
        }
    }

    fn slots(&self) -> Vec<usize> {
        match self {
            Builtin::Gamma => Vec::new(),
            Builtin::Addition { summands, sum } => vec![summands[0], summands[1], *sum],
            Builtin::Difference { source, target, .. } => vec![*source, *target],
        }
    }

    fn check(&self, types: &[DataType]) -> Result<(), SheafError> {
        if let Some(n) = self.arity() {
            if types.len() != n {
                return Err(SheafError::BadBuiltin(format!(
                    "`{}` needs {n} slots, the simplex has {}",
                    self.name(),
                    types.len()
                )));
            }
            let mut slots = self.slots();
            slots.sort_unstable();
            slots.dedup();
            if slots.len() != n || slots.iter().any(|&s| s >= n) {
                return Err(SheafError::BadBuiltin(format!("`{}` has bad slot roles", self.name())));
            }
            if let Some(t) = types.iter().find(|t| t.kind() != &TypeKind::Integer) {
                return Err(SheafError::BadBuiltin(format!(
                    "`{}` needs integer slots, `{}` is not",
                    self.name(),
                    t.name()
                )));
            }
        }
        Ok(())
    }

    fn holds(&self, t: &Tuple) -> bool {
        let int = |s: usize| t.get(s).and_then(Value::as_int);
        match self {
            Builtin::Gamma => true,
            Builtin::Addition { summands, sum } => {
                match (int(summands[0]), int(summands[1]), int(*sum)) {
                    (Some(a), Some(b), Some(c)) => a.checked_add(b) == Some(c),
                    _ => false,
                }
            }
            Builtin::Difference { d, source, target } => match (int(*source), int(*target)) {
                (Some(s), Some(t)) => t.checked_sub(s) == Some(*d),
                _ => false,
            },
        }
    }

    /// Fills every missing slot it can compute from the bound ones.
    /// Returns `None` if arithmetic overflows.
    fn derive(&self, vals: &mut [Option<Value>]) -> Option<()> {
        let int = |v: &Option<Value>| v.as_ref().and_then(Value::as_int);
        match self {
            Builtin::Gamma => {}
            Builtin::Addition { summands: [a, b], sum: c } => {
                let (x, y, z) = (int(&vals[*a]), int(&vals[*b]), int(&vals[*c]));
                match (x, y, z) {
                    (Some(x), Some(y), None) => vals[*c] = Some(Value::Int(x.checked_add(y)?)),
                    (Some(x), None, Some(z)) => vals[*b] = Some(Value::Int(z.checked_sub(x)?)),
                    (None, Some(y), Some(z)) => vals[*a] = Some(Value::Int(z.checked_sub(y)?)),
                    _ => {}
                }
            }
            Builtin::Difference { d, source, target } => {
                match (int(&vals[*source]), int(&vals[*target])) {
                    (Some(s), None) => vals[*target] = Some(Value::Int(s.checked_add(*d)?)),
                    (None, Some(t)) => vals[*source] = Some(Value::Int(t.checked_sub(*d)?)),
                    _ => {}
                }
            }
        }
        Some(())
    }

    fn determines(&self, bound: &[bool]) -> bool {
        match self {
            Builtin::Gamma => bound.iter().all(|&b| b),
            Builtin::Addition { summands, sum } => {
                [summands[0], summands[1], *sum].iter().filter(|&&s| bound[s]).count() >= 2
            }
            Builtin::Difference { source, target, .. } => bound[*source] || bound[*target],
        }
    }
}

/// A virtual table: a builtin relation over one simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualTable {
    simplex: SimplexId,
    builtin: Builtin,
    types: Vec<DataType>,
}

impl VirtualTable {
    pub fn new(simplex: SimplexId, builtin: Builtin, types: Vec<DataType>) -> Result<Self, SheafError> {
        builtin.check(&types)?;
        Ok(VirtualTable { simplex, builtin, types })
    }

    pub fn simplex(&self) -> &SimplexId {
        &self.simplex
    }

    pub fn builtin(&self) -> &Builtin {
        &self.builtin
    }

    pub fn types(&self) -> &[DataType] {
        &self.types
    }

    pub fn arity(&self) -> usize {
        self.types.len()
    }

    pub(crate) fn with_simplex(mut self, simplex: SimplexId) -> Self {
        self.simplex = simplex;
        self
    }

    /// Membership predicate: conformance plus the builtin relation.
    pub fn contains(&self, t: &Tuple) -> bool {
        t.arity() == self.types.len()
            && t.values().iter().zip(&self.types).all(|(v, ty)| ty.conforms(v))
            && self.builtin.holds(t)
    }

    /// Declared slot subsets that determine the remaining slots.
    pub fn determining_sets(&self) -> Vec<Vec<usize>> {
        match &self.builtin {
            Builtin::Gamma => {
                let finite: Vec<usize> =
                    (0..self.arity()).filter(|&s| !self.types[s].is_enumerated()).collect();
                vec![finite]
            }
            Builtin::Addition { summands: [a, b], sum: c } => {
                let mut sets = vec![vec![*a, *b], vec![*a, *c], vec![*b, *c]];
                for s in &mut sets {
                    s.sort_unstable();
                }
                sets
            }
            Builtin::Difference { source, target, .. } => vec![vec![*source], vec![*target]],
        }
    }

    /// Whether completions from these bound slots form a finite set.
    pub fn can_complete(&self, bound: &[usize]) -> bool {
        let flags: Vec<bool> = (0..self.arity())
            .map(|s| bound.contains(&s) || self.types[s].is_enumerated())
            .collect();
        self.builtin.determines(&flags)
    }

    /// All member tuples agreeing with the bound slots.
    pub fn complete(&self, partial: &[Option<Value>]) -> Result<Vec<Tuple>, SheafError> {
        if partial.len() != self.arity() {
            return Err(SheafError::BadBuiltin(format!(
                "expected {} slots, got {}",
                self.arity(),
                partial.len()
            )));
        }
        let bound: Vec<usize> = (0..partial.len()).filter(|&s| partial[s].is_some()).collect();
        if !self.can_complete(&bound) {
            let free: Vec<&str> = (0..self.arity())
                .filter(|s| partial[*s].is_none())
                .map(|s| self.types[s].name())
                .collect();
            return Err(SheafError::NotEnumerable {
                simplex: self.simplex.clone(),
                detail: format!(
                    "`{}` cannot enumerate slots of type {}",
                    self.builtin.name(),
                    free.join(", ")
                ),
            });
        }
        // enumerate the free enumerated slots the builtin cannot derive
        let mut probe: Vec<bool> = partial.iter().map(Option::is_some).collect();
        let mut derived = partial.to_vec();
        self.builtin.derive(&mut derived);
        for (s, v) in derived.iter().enumerate() {
            probe[s] = v.is_some();
        }
        let mut choices: Vec<usize> = Vec::new();
        if !self.builtin.determines(&probe) {
            for s in 0..self.arity() {
                if partial[s].is_none() && self.types[s].is_enumerated() {
                    choices.push(s);
                }
            }
        }
        let mut out = Vec::new();
        let mut stack: Vec<Vec<Option<Value>>> = vec![partial.to_vec()];
        for &s in &choices {
            let values = self.types[s].values().expect("enumerated");
            stack = stack
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q[s] = Some(v.clone());
                        q
                    }).collect::<Vec<_>>()
                })
                .collect();
        }
        for mut cand in stack {
            if self.builtin.derive(&mut cand).is_none() {
                continue;
            }
            if cand.iter().any(Option::is_none) {
                continue;
            }
            let t = Tuple(cand.into_iter().map(|v| v.expect("filled")).collect());
            if self.contains(&t) && !out.contains(&t) {
                out.push(t);
            }
        }
        Ok(out)
    }

    /// Every member tuple, when finite.
    pub fn enumerate(&self) -> Result<Vec<Tuple>, SheafError> {
        self.complete(&vec![None; self.arity()])
    }

    /// Human-readable rule, with slots named `a`, `b`, `c`, ...
    pub fn description(&self) -> String {
        let name = |s: usize| slot_letter(s);
        match &self.builtin {
            Builtin::Gamma => {
                let types: Vec<&str> = self.types.iter().map(DataType::name).collect();
                format!("all tuples of ({})", types.join(", "))
            }
            Builtin::Addition { summands, sum } => {
                format!("{} = {} + {}", name(*sum), name(summands[0]), name(summands[1]))
            }
            Builtin::Difference { d, source, target } => {
                format!("{} - {} = {d}", name(*target), name(*source))
            }
        }
    }

    /// A few member tuples for display.
    pub fn samples(&self, n: usize) -> Vec<Tuple> {
        let mut out = Vec::new();
        match &self.builtin {
            Builtin::Gamma => {
                if let Ok(all) = self.enumerate() {
                    return all.into_iter().take(n).collect();
                }
                for k in 0..n {
                    let t: Vec<Value> = self.types.iter().map(|ty| sample_value(ty, k)).collect();
                    out.push(Tuple(t));
                }
            }
            Builtin::Addition { summands, .. } => {
                for k in 0..n {
                    let mut p = vec![None; 3];
                    p[summands[0]] = Some(Value::Int(k as i64 + 1));
                    p[summands[1]] = Some(Value::Int(k as i64 + 2));
                    if let Ok(mut ts) = self.complete(&p) {
                        out.append(&mut ts);
                    }
                }
            }
            Builtin::Difference { source, .. } => {
                for k in 0..n {
                    let mut p = vec![None; 2];
                    p[*source] = Some(Value::Int(k as i64));
                    if let Ok(mut ts) = self.complete(&p) {
                        out.append(&mut ts);
                    }
                }
            }
        }
        out
    }
}

fn slot_letter(s: usize) -> String {
    if s < 26 {
        ((b'a' + s as u8) as char).to_string()
    } else {
        format!("x{s}")
    }
}

fn sample_value(ty: &DataType, k: usize) -> Value {
    match ty.kind() {
        TypeKind::Integer => Value::Int(k as i64),
        TypeKind::Text => Value::Text(format!("text{k}")),
        TypeKind::Date => {
            let base = chrono::NaiveDate::from_ymd_opt(2024, 1, 1).expect("date");
            Value::Date(base + chrono::Duration::days(k as i64))
        }
        TypeKind::Enumerated(vs) => Value::Sym(vs[k % vs.len()].clone()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Concrete(ConcreteTable),
    Virtual(VirtualTable),
}

impl Table {
    pub fn simplex(&self) -> &SimplexId {
        match self {
            Table::Concrete(t) => t.simplex(),
            Table::Virtual(t) => t.simplex(),
        }
    }

    pub fn as_concrete(&self) -> Option<&ConcreteTable> {
        match self {
            Table::Concrete(t) => Some(t),
            Table::Virtual(_) => None,
        }
    }

    pub fn as_virtual(&self) -> Option<&VirtualTable> {
        match self {
            Table::Virtual(t) => Some(t),
            Table::Concrete(_) => None,
        }
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self, Table::Virtual(_))
    }

    pub(crate) fn with_simplex(self, simplex: SimplexId) -> Table {
        match self {
            Table::Concrete(t) => Table::Concrete(t.with_simplex(simplex)),
            Table::Virtual(t) => Table::Virtual(t.with_simplex(simplex)),
        }
    }
}

impl From<ConcreteTable> for Table {
    fn from(t: ConcreteTable) -> Self {
        Table::Concrete(t)
    }
}

impl From<VirtualTable> for Table {
    fn from(t: VirtualTable) -> Self {
        Table::Virtual(t)
    }
}

impl fmt::Display for ConcreteTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "table over {}", self.simplex)?;
        for (k, t) in &self.rows {
            writeln!(f, "  {k}: {t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnionMode {
    All,
    Dedup,
}

/// Pairs rows with equal tuples. Against a virtual table the concrete rows
/// are filtered by membership and keep their keys.
pub fn fiber_product(t1: &Table, t2: &Table) -> Result<Table, SheafError> {
    if t1.simplex() != t2.simplex() {
        return Err(SheafError::SimplexMismatch(t1.simplex().clone(), t2.simplex().clone()));
    }
    match (t1, t2) {
        (Table::Concrete(a), Table::Concrete(b)) => {
            let mut by_value: BTreeMap<&Tuple, Vec<&Key>> = BTreeMap::new();
            for (k, t) in b.rows() {
                by_value.entry(t).or_default().push(k);
            }
            let mut rows = Vec::new();
            for (k1, t) in a.rows() {
                for k2 in by_value.get(t).into_iter().flatten() {
                    rows.push((Key::pair(k1, k2), t.clone()));
                }
            }
            Ok(Table::Concrete(ConcreteTable::new(a.simplex().clone(), rows)?))
        }
        (Table::Concrete(c), Table::Virtual(v)) | (Table::Virtual(v), Table::Concrete(c)) => {
            let rows = c.rows().iter().filter(|(_, t)| v.contains(t)).cloned().collect();
            Ok(Table::Concrete(ConcreteTable::new(c.simplex().clone(), rows)?))
        }
        (Table::Virtual(_), Table::Virtual(_)) => Err(SheafError::NotConcrete(t1.simplex().clone())),
    }
}

/// `All` keeps every row of both tables; `Dedup` keeps one row per distinct
/// tuple. Keys are renumbered.
pub fn union(t1: &ConcreteTable, t2: &ConcreteTable, mode: UnionMode) -> Result<ConcreteTable, SheafError> {
    if t1.simplex() != t2.simplex() {
        return Err(SheafError::SimplexMismatch(t1.simplex().clone(), t2.simplex().clone()));
    }
    let all = t1.tuples().chain(t2.tuples()).cloned();
    let tuples: Vec<Tuple> = match mode {
        UnionMode::All => all.collect(),
        UnionMode::Dedup => {
            let mut seen = std::collections::BTreeSet::new();
            all.filter(|t| seen.insert(t.clone())).collect()
        }
    };
    Ok(ConcreteTable::from_tuples(t1.simplex().clone(), tuples))
}
