//! Key sheaves on a schema, record assignments, partially constrained ("cylinder") sheaves,
//! and data migration along schema morphisms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schema::{same, Schema, SchemaMorphism, Subschema};
use crate::simple_schema::Record;
use crate::table::Key;
use crate::typespec::Value;
use crate::unionfind::UnionFind;

pub const UNIVERSAL_KEY: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub keys: BTreeSet<Key>,
    /// `restrictions[i]` sends each key to a key of face `i`.
    pub restrictions: Vec<BTreeMap<Key, Key>>,
}

impl Section {
    pub fn empty(n_faces: usize) -> Self {
        Section {
            keys: BTreeSet::new(),
            restrictions: vec![BTreeMap::new(); n_faces],
        }
    }
}

#[derive(Debug, Clone)]
pub struct KeySheaf {
    base: Arc<Schema>,
    sections: Vec<Section>,
}

impl PartialEq for KeySheaf {
    fn eq(&self, other: &Self) -> bool {
        same(&self.base, &other.base) && self.sections == other.sections
    }
}

impl Eq for KeySheaf {}

fn n_faces(x: &Schema, s: usize) -> usize {
    x.faces(s).len()
}

impl KeySheaf {
    pub fn new(base: Arc<Schema>, sections: Vec<Section>) -> Result<Self> {
        if sections.len() != base.len() {
            return Err(Error::InvalidDatabase(format!(
                "{} sections for {} simplices",
                sections.len(),
                base.len()
            )));
        }
        for (s, sec) in sections.iter().enumerate() {
            if sec.restrictions.len() != n_faces(&base, s) {
                return Err(Error::InvalidDatabase(format!(
                    "`{}` needs one restriction map per face",
                    base.id(s)
                )));
            }
        }
        Ok(KeySheaf { base, sections })
    }

    pub fn empty(base: &Arc<Schema>) -> Self {
        KeySheaf {
            sections: (0..base.len()).map(|s| Section::empty(n_faces(base, s))).collect(),
            base: base.clone(),
        }
    }

    pub fn base(&self) -> &Arc<Schema> {
        &self.base
    }

    pub fn section(&self, s: usize) -> &Section {
        &self.sections[s]
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn keys(&self, s: usize) -> &BTreeSet<Key> {
        &self.sections[s].keys
    }

    pub fn restrict(&self, s: usize, i: usize, k: &str) -> Option<&Key> {
        self.sections[s].restrictions[i].get(k)
    }

    /// Restriction of `k` to the face of `s` spanned by the sorted positions `keep`.
    pub fn restrict_to<'a>(&'a self, s: usize, k: &'a str, keep: &[usize]) -> Option<(usize, &'a str)> {
        let mut cur = s;
        let mut key: &str = k;
        for p in (0..=self.base.dim(s)).rev() {
            if keep.binary_search(&p).is_err() {
                key = self.restrict(cur, p, key)?;
                cur = self.base.face(cur, p);
            }
        }
        Some((cur, key))
    }

    pub fn total_keys(&self) -> usize {
        self.sections.iter().map(|s| s.keys.len()).sum()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let x = &self.base;
        let mut out = Vec::new();
        for s in 0..x.len() {
            let sec = &self.sections[s];
            for (i, map) in sec.restrictions.iter().enumerate() {
                let f = x.face(s, i);
                for k in &sec.keys {
                    match map.get(k) {
                        None => out.push(Violation::MissingRestriction {
                            simplex: x.id(s).into(),
                            face: i,
                            key: k.clone(),
                        }),
                        Some(img) if !self.sections[f].keys.contains(img) => {
                            out.push(Violation::DanglingRestriction {
                                simplex: x.id(s).into(),
                                face: i,
                                key: k.clone(),
                            })
                        }
                        _ => {}
                    }
                }
                for k in map.keys() {
                    if !sec.keys.contains(k) {
                        out.push(Violation::UnknownKey {
                            simplex: x.id(s).into(),
                            key: k.clone(),
                        });
                    }
                }
            }
            let d = x.dim(s);
            if d >= 2 {
                for k in &sec.keys {
                    for j in 1..=d {
                        for i in 0..j {
                            let a = self
                                .restrict(s, j, k)
                                .and_then(|kj| self.restrict(x.face(s, j), i, kj));
                            let b = self
                                .restrict(s, i, k)
                                .and_then(|ki| self.restrict(x.face(s, i), j - 1, ki));
                            if let (Some(a), Some(b)) = (a, b) {
                                if a != b {
                                    out.push(Violation::Functoriality {
                                        simplex: x.id(s).into(),
                                        faces: (i, j),
                                        key: k.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingRestriction { simplex: String, face: usize, key: Key },
    DanglingRestriction { simplex: String, face: usize, key: Key },
    UnknownKey { simplex: String, key: Key },
    Functoriality { simplex: String, faces: (usize, usize), key: Key },
    MissingRecord { simplex: String, key: Key },
    BadRecord { simplex: String, key: Key },
    Naturality { simplex: String, face: usize, key: Key },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingRestriction { simplex, face, key } => {
                write!(f, "{simplex}: key {key} has no restriction to face {face}")
            }
            Violation::DanglingRestriction { simplex, face, key } => {
                write!(f, "{simplex}: key {key} restricts to a missing key of face {face}")
            }
            Violation::UnknownKey { simplex, key } => {
                write!(f, "{simplex}: restriction given for unknown key {key}")
            }
            Violation::Functoriality { simplex, faces, key } => write!(
                f,
                "{simplex}: key {key} restricts inconsistently through faces {} and {}",
                faces.0, faces.1
            ),
            Violation::MissingRecord { simplex, key } => write!(f, "{simplex}: key {key} has no record"),
            Violation::BadRecord { simplex, key } => {
                write!(f, "{simplex}: record of key {key} does not fit the vertex types")
            }
            Violation::Naturality { simplex, face, key } => write!(
                f,
                "{simplex}: record of key {key} disagrees with its restriction to face {face}"
            ),
        }
    }
}

/// Records for every key of every simplex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataMap {
    pub records: Vec<BTreeMap<Key, Record>>,
}

impl DataMap {
    pub fn record(&self, s: usize, k: &str) -> Option<&Record> {
        self.records.get(s)?.get(k)
    }

    /// Fills in every simplex from vertex values alone, following restrictions down to vertices.
    pub fn from_vertices(sheaf: &KeySheaf, vertex_records: &HashMap<usize, BTreeMap<Key, Value>>) -> Result<Self> {
        let x = sheaf.base();
        let mut records = Vec::with_capacity(x.len());
        for s in 0..x.len() {
            let mut map = BTreeMap::new();
            for k in sheaf.keys(s) {
                let mut values = Vec::with_capacity(x.dim(s) + 1);
                for j in 0..=x.dim(s) {
                    let (v, vk) = sheaf.restrict_to(s, k, &[j]).ok_or_else(|| {
                        Error::InvalidDatabase(format!("{}: key {k} does not reach vertex {j}", x.id(s)))
                    })?;
                    let value = vertex_records.get(&v).and_then(|m| m.get(vk)).ok_or_else(|| {
                        Error::InvalidDatabase(format!("vertex {} has no value for key {vk}", x.id(v)))
                    })?;
                    values.push(value.clone());
                }
                map.insert(k.clone(), Record(values));
            }
            records.push(map);
        }
        Ok(DataMap { records })
    }
}

pub fn validate_sheaf_and_data(k: &KeySheaf, data: &DataMap) -> Vec<Violation> {
    let mut out = k.validate();
    let x = k.base();
    for s in 0..x.len() {
        let schema = x.vertex_schema(s);
        let recs = data.records.get(s);
        for key in k.keys(s) {
            let Some(r) = recs.and_then(|m| m.get(key)) else {
                out.push(Violation::MissingRecord {
                    simplex: x.id(s).into(),
                    key: key.clone(),
                });
                continue;
            };
            if !schema.is_valid_record(r) {
                out.push(Violation::BadRecord {
                    simplex: x.id(s).into(),
                    key: key.clone(),
                });
                continue;
            }
            for i in 0..x.faces(s).len() {
                let Some(fk) = k.restrict(s, i, key) else { continue };
                if let Some(fr) = data.record(x.face(s, i), fk) {
                    let mut expect = r.0.clone();
                    expect.remove(i);
                    if fr.0 != expect {
                        out.push(Violation::Naturality {
                            simplex: x.id(s).into(),
                            face: i,
                            key: key.clone(),
                        });
                    }
                }
            }
        }
        if let Some(m) = recs {
            for key in m.keys() {
                if !k.keys(s).contains(key) {
                    out.push(Violation::UnknownKey {
                        simplex: x.id(s).into(),
                        key: key.clone(),
                    });
                }
            }
        }
    }
    out
}

/// A compatible choice of keys over a subschema, with one entry per member simplex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family {
    pub assignment: Vec<(usize, Key)>,
}

impl Family {
    pub fn get(&self, s: usize) -> Option<&Key> {
        self.assignment
            .binary_search_by_key(&s, |(t, _)| *t)
            .ok()
            .map(|i| &self.assignment[i].1)
    }

    /// Same family seen on a smaller subschema.
    pub fn restrict(&self, sub: &Subschema) -> Family {
        Family {
            assignment: self
                .assignment
                .iter()
                .filter(|(s, _)| sub.contains(*s))
                .cloned()
                .collect(),
        }
    }

    /// `(id:key,...)` over the maximal simplices, sorted by id.
    pub fn serialize(&self, x: &Schema, maximal: &[usize]) -> Key {
        let mut parts: Vec<String> = maximal
            .iter()
            .map(|&m| format!("{}:{}", x.id(m), self.get(m).expect("maximal simplex assigned")))
            .collect();
        parts.sort_unstable();
        format!("({})", parts.join(","))
    }
}

/// Join order and hash indexes for enumerating families of one sheaf over one subschema.
struct FamilyPlan {
    steps: Vec<Step>,
}

struct Step {
    simplex: usize,
    /// Faces already fixed by earlier steps, as (face, kept positions).
    anchors: Vec<(usize, Vec<usize>)>,
    /// Faces this step fixes, as (face, kept positions).
    fresh: Vec<(usize, Vec<usize>)>,
    index: HashMap<Vec<Key>, Vec<Key>>,
}

impl FamilyPlan {
    fn new(k: &KeySheaf, sub: &Subschema) -> FamilyPlan {
        let x = k.base();
        let mut maximal = x.maximal(sub);
        // Greedy order: biggest first, then whatever shares the most vertices with what is placed.
        let mut order = Vec::with_capacity(maximal.len());
        let mut placed_vertices: BTreeSet<usize> = BTreeSet::new();
        while !maximal.is_empty() {
            let best = (0..maximal.len())
                .max_by_key(|&i| {
                    let m = maximal[i];
                    let shared = x.vertices(m).iter().filter(|v| placed_vertices.contains(v)).count();
                    (shared, x.dim(m), std::cmp::Reverse(m))
                })
                .expect("nonempty");
            let m = maximal.remove(best);
            placed_vertices.extend(x.vertices(m).iter().copied());
            order.push(m);
        }
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        let mut steps = Vec::with_capacity(order.len());
        for m in order {
            let mut faces = x.proper_faces(m);
            faces.push((m, (0..=x.dim(m)).collect()));
            let (shared, fresh): (Vec<_>, Vec<_>) = faces.into_iter().partition(|(f, _)| covered.contains(f));
            // Keep only anchors that are not faces of other anchors; the rest follow.
            let anchors: Vec<(usize, Vec<usize>)> = shared
                .iter()
                .filter(|(_, keep)| {
                    !shared
                        .iter()
                        .any(|(_, other)| other.len() > keep.len() && keep.iter().all(|p| other.contains(p)))
                })
                .cloned()
                .collect();
            let mut index: HashMap<Vec<Key>, Vec<Key>> = HashMap::new();
            for key in k.keys(m) {
                let sig: Option<Vec<Key>> = anchors
                    .iter()
                    .map(|(_, keep)| k.restrict_to(m, key, keep).map(|(_, r)| r.to_string()))
                    .collect();
                if let Some(sig) = sig {
                    index.entry(sig).or_default().push(key.clone());
                }
            }
            covered.extend(fresh.iter().map(|(f, _)| *f));
            steps.push(Step {
                simplex: m,
                anchors,
                fresh,
                index,
            });
        }
        FamilyPlan { steps }
    }

    fn run(&self, k: &KeySheaf, mut visit: impl FnMut(&HashMap<usize, Key>)) {
        fn go(
            plan: &FamilyPlan,
            k: &KeySheaf,
            i: usize,
            assigned: &mut HashMap<usize, Key>,
            visit: &mut dyn FnMut(&HashMap<usize, Key>),
        ) {
            if i == plan.steps.len() {
                visit(assigned);
                return;
            }
            let step = &plan.steps[i];
            let sig: Vec<Key> = step.anchors.iter().map(|(f, _)| assigned[f].clone()).collect();
            let Some(candidates) = step.index.get(&sig) else { return };
            for key in candidates {
                let mut ok = true;
                let mut added = Vec::with_capacity(step.fresh.len());
                for (f, keep) in &step.fresh {
                    match k.restrict_to(step.simplex, key, keep) {
                        Some((_, r)) => added.push((*f, r.to_string())),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                for (f, r) in &added {
                    assigned.insert(*f, r.clone());
                }
                go(plan, k, i + 1, assigned, visit);
                for (f, _) in &added {
                    assigned.remove(f);
                }
            }
        }
        go(self, k, 0, &mut HashMap::new(), &mut visit);
    }
}

/// All matching families of `k` over `sub`; the empty subschema has exactly one.
pub fn evaluate_on_subschema(k: &KeySheaf, sub: &Subschema) -> Vec<Family> {
    let plan = FamilyPlan::new(k, sub);
    let mut out = Vec::new();
    plan.run(k, |assigned| {
        let mut assignment: Vec<(usize, Key)> = assigned.iter().map(|(s, k)| (*s, k.clone())).collect();
        assignment.sort_unstable();
        out.push(Family { assignment });
    });
    out.sort();
    out
}

pub type PartialRecord = Vec<Option<Value>>;

/// A key sheaf whose rows constrain only some vertex positions; a free position ranges over
/// its whole type. Fully constrained rows are ordinary records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSheaf {
    sheaf: KeySheaf,
    partial: Vec<BTreeMap<Key, PartialRecord>>,
}

impl CylinderSheaf {
    pub fn new(sheaf: KeySheaf, partial: Vec<BTreeMap<Key, PartialRecord>>) -> Result<Self> {
        let c = CylinderSheaf { sheaf, partial };
        let x = c.sheaf.base();
        if c.partial.len() != x.len() {
            return Err(Error::InvalidDatabase("one row map per simplex is needed".into()));
        }
        for s in 0..x.len() {
            for k in c.sheaf.keys(s) {
                match c.partial[s].get(k) {
                    Some(p) if p.len() == x.dim(s) + 1 => {}
                    _ => {
                        return Err(Error::InvalidDatabase(format!(
                            "{}: key {k} lacks a row of the right width",
                            x.id(s)
                        )))
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn from_data(sheaf: &KeySheaf, data: &DataMap) -> Self {
        let partial = data
            .records
            .iter()
            .map(|m| {
                m.iter()
                    .map(|(k, r)| (k.clone(), r.0.iter().cloned().map(Some).collect()))
                    .collect()
            })
            .collect();
        CylinderSheaf {
            sheaf: sheaf.clone(),
            partial,
        }
    }

    /// One row per simplex, every position free.
    pub fn universal(base: &Arc<Schema>) -> Self {
        let star = UNIVERSAL_KEY.to_string();
        let sections = (0..base.len())
            .map(|s| Section {
                keys: [star.clone()].into_iter().collect(),
                restrictions: vec![[(star.clone(), star.clone())].into_iter().collect(); n_faces(base, s)],
            })
            .collect();
        let partial = (0..base.len())
            .map(|s| [(star.clone(), vec![None; base.dim(s) + 1])].into_iter().collect())
            .collect();
        CylinderSheaf {
            sheaf: KeySheaf {
                base: base.clone(),
                sections,
            },
            partial,
        }
    }

    pub fn empty(base: &Arc<Schema>) -> Self {
        CylinderSheaf {
            sheaf: KeySheaf::empty(base),
            partial: vec![BTreeMap::new(); base.len()],
        }
    }

    pub fn base(&self) -> &Arc<Schema> {
        self.sheaf.base()
    }

    pub fn sheaf(&self) -> &KeySheaf {
        &self.sheaf
    }

    pub fn row(&self, s: usize, k: &str) -> Option<&PartialRecord> {
        self.partial[s].get(k)
    }

    pub fn rows(&self, s: usize) -> &BTreeMap<Key, PartialRecord> {
        &self.partial[s]
    }

    pub fn is_total(&self) -> bool {
        self.partial.iter().all(|m| m.values().all(|p| p.iter().all(Option::is_some)))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.sheaf.validate();
        let x = self.base();
        for s in 0..x.len() {
            let types = x.position_types(s);
            for (k, row) in &self.partial[s] {
                let fits = row.len() == types.len()
                    && row.iter().zip(&types).all(|(v, t)| match v {
                        None => true,
                        Some(v) => v.type_name() == *t && x.spec().check_member(t, v.payload()).unwrap_or(false),
                    });
                if !fits {
                    out.push(Violation::BadRecord {
                        simplex: x.id(s).into(),
                        key: k.clone(),
                    });
                    continue;
                }
                for i in 0..x.faces(s).len() {
                    let Some(fk) = self.sheaf.restrict(s, i, k) else { continue };
                    let Some(frow) = self.row(x.face(s, i), fk) else { continue };
                    let mut projected = row.clone();
                    projected.remove(i);
                    // every constraint on the face must already hold on the simplex
                    if frow.iter().zip(&projected).any(|(f, p)| f.is_some() && f != p) {
                        out.push(Violation::Naturality {
                            simplex: x.id(s).into(),
                            face: i,
                            key: k.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Expands free positions over their (finite) domains; keys of expanded rows become `k|v1,v2`.
    pub fn materialize(&self) -> Result<(KeySheaf, DataMap)> {
        self.materialize_tracked().map(|(k, d, _)| (k, d))
    }

    /// As [`CylinderSheaf::materialize`], also returning the row each new key came from.
    pub fn materialize_tracked(&self) -> Result<(KeySheaf, DataMap, Vec<BTreeMap<Key, Key>>)> {
        let x = self.base();
        let spec = x.spec();
        let mut expanded: Vec<BTreeMap<Key, (Key, Record)>> = Vec::with_capacity(x.len());
        for s in 0..x.len() {
            let types = x.position_types(s);
            let mut out = BTreeMap::new();
            for (k, row) in &self.partial[s] {
                let free: Vec<usize> = (0..row.len()).filter(|&j| row[j].is_none()).collect();
                if free.is_empty() {
                    let r = Record(row.iter().map(|v| v.clone().expect("total")).collect());
                    out.insert(k.clone(), (k.clone(), r));
                    continue;
                }
                let mut domains = Vec::with_capacity(free.len());
                for &j in &free {
                    match spec.enumerate_domain(types[j]) {
                        Ok(d) => domains.push(d),
                        Err(Error::NotEnumerable(_)) => {
                            return Err(Error::NonFiniteResult(format!(
                                "simplex `{}` leaves a `{}` position free",
                                x.id(s),
                                types[j]
                            )))
                        }
                        Err(e) => return Err(e),
                    }
                }
                let mut idx = vec![0usize; free.len()];
                'outer: loop {
                    let mut values = row.clone();
                    for (n, &j) in free.iter().enumerate() {
                        values[j] = Some(domains[n][idx[n]].clone());
                    }
                    let tail: Vec<String> = free.iter().map(|&j| values[j].as_ref().expect("set").to_string()).collect();
                    let key = format!("{k}|{}", tail.join(","));
                    out.insert(key, (k.clone(), Record(values.into_iter().map(|v| v.expect("set")).collect())));
                    for n in 0..idx.len() {
                        idx[n] += 1;
                        if idx[n] < domains[n].len() {
                            continue 'outer;
                        }
                        idx[n] = 0;
                    }
                    break;
                }
            }
            expanded.push(out);
        }
        let mut sections = Vec::with_capacity(x.len());
        let mut records = Vec::with_capacity(x.len());
        for s in 0..x.len() {
            let mut restrictions = vec![BTreeMap::new(); n_faces(x, s)];
            for (key, (base_key, rec)) in &expanded[s] {
                for (i, map) in restrictions.iter_mut().enumerate() {
                    let f = x.face(s, i);
                    let Some(fk) = self.sheaf.restrict(s, i, base_key) else { continue };
                    let Some(frow) = self.row(f, fk) else { continue };
                    let mut frec = rec.0.clone();
                    frec.remove(i);
                    let free: Vec<String> = (0..frow.len())
                        .filter(|&j| frow[j].is_none())
                        .map(|j| frec[j].to_string())
                        .collect();
                    let target = if free.is_empty() {
                        fk.clone()
                    } else {
                        format!("{fk}|{}", free.join(","))
                    };
                    map.insert(key.clone(), target);
                }
            }
            sections.push(Section {
                keys: expanded[s].keys().cloned().collect(),
                restrictions,
            });
            records.push(expanded[s].iter().map(|(k, (_, r))| (k.clone(), r.clone())).collect());
        }
        let origin = expanded
            .iter()
            .map(|m| m.iter().map(|(k, (b, _))| (k.clone(), b.clone())).collect())
            .collect();
        Ok((
            KeySheaf {
                base: x.clone(),
                sections,
            },
            DataMap { records },
            origin,
        ))
    }

    /// The data of a cylinder with no free positions.
    pub fn to_data(&self) -> Result<DataMap> {
        if !self.is_total() {
            return Err(Error::NonFiniteResult("cylinder has free positions".into()));
        }
        Ok(DataMap {
            records: self
                .partial
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|(k, p)| (k.clone(), Record(p.iter().map(|v| v.clone().expect("total")).collect())))
                        .collect()
                })
                .collect(),
        })
    }
}

pub fn pullback(f: &SchemaMorphism, c: &CylinderSheaf) -> Result<CylinderSheaf> {
    if !same(f.target(), c.base()) {
        return Err(Error::SchemaMismatch("pullback along a map into another schema".into()));
    }
    let (y, x) = (f.source(), f.target());
    let mut sections = Vec::with_capacity(y.len());
    let mut partial = Vec::with_capacity(y.len());
    for s in 0..y.len() {
        let img = f.image(s);
        let t = img.target;
        let mut restrictions = Vec::with_capacity(n_faces(y, s));
        for i in 0..n_faces(y, s) {
            let mut beta = img.alpha.clone();
            beta.remove(i);
            let mut hit: Vec<usize> = beta.clone();
            hit.sort_unstable();
            hit.dedup();
            let map: BTreeMap<Key, Key> = if hit.len() == x.dim(t) + 1 {
                c.sheaf.keys(t).iter().map(|k| (k.clone(), k.clone())).collect()
            } else {
                let missing = (0..=x.dim(t)).find(|p| hit.binary_search(p).is_err()).expect("one position");
                c.sheaf.section(t).restrictions[missing].clone()
            };
            restrictions.push(map);
        }
        sections.push(Section {
            keys: c.sheaf.keys(t).clone(),
            restrictions,
        });
        partial.push(
            c.partial[t]
                .iter()
                .map(|(k, row)| (k.clone(), img.alpha.iter().map(|&a| row[a].clone()).collect()))
                .collect(),
        );
    }
    CylinderSheaf::new(KeySheaf::new(y.clone(), sections)?, partial)
}

/// Evaluates the direct image `V ↦ K(f⁻¹V)` on demand.
pub struct PushforwardStar<'a> {
    pub map: &'a SchemaMorphism,
    pub sheaf: &'a KeySheaf,
}

impl PushforwardStar<'_> {
    pub fn evaluate(&self, v: &Subschema) -> Vec<Family> {
        evaluate_on_subschema(self.sheaf, &self.map.preimage_subschema(v))
    }
}

pub fn pushforward_star<'a>(f: &'a SchemaMorphism, k: &'a KeySheaf) -> PushforwardStar<'a> {
    PushforwardStar { map: f, sheaf: k }
}

/// A pushforward together with the family behind each of its rows.
pub struct Pushforward {
    pub cylinder: CylinderSheaf,
    pub families: Vec<BTreeMap<Key, Family>>,
}

/// Rows at `s` are the families over the preimage of the closure of `s`, constrained where
/// that preimage forces values. Families forcing two values on one position are dropped.
pub fn pushforward_plus(f: &SchemaMorphism, c: &CylinderSheaf) -> Result<CylinderSheaf> {
    Ok(pushforward_plus_detailed(f, c)?.cylinder)
}

/// Forced values of a family, as positions of the simplex `s` it lies over; `None` on conflict.
fn forced_row(f: &SchemaMorphism, c: &CylinderSheaf, s: usize, fam: &Family) -> Option<PartialRecord> {
    let (y, x) = (f.source(), f.target());
    let sv = x.vertices(s);
    let mut u: PartialRecord = vec![None; sv.len()];
    for (ys, yk) in &fam.assignment {
        let row = c.row(*ys, yk).expect("family keys have rows");
        for (j, val) in row.iter().enumerate() {
            let Some(val) = val else { continue };
            let xv = f.image(y.vertices(*ys)[j]).target;
            let pos = sv.iter().position(|&v| v == xv).expect("preimage lies over the closure");
            match &u[pos] {
                Some(old) if old != val => return None,
                _ => u[pos] = Some(val.clone()),
            }
        }
    }
    Some(u)
}

/// Rows of the pushforward at a single simplex, with the family behind each.
pub fn pushforward_rows_at(f: &SchemaMorphism, c: &CylinderSheaf, s: usize) -> Result<Vec<(Key, PartialRecord, Family)>> {
    if !same(f.source(), c.base()) {
        return Err(Error::SchemaMismatch("pushforward along a map from another schema".into()));
    }
    let y = f.source();
    let p = f.preimage_subschema(&f.target().closure([s]));
    let maximal = y.maximal(&p);
    Ok(evaluate_on_subschema(&c.sheaf, &p)
        .into_iter()
        .filter_map(|fam| forced_row(f, c, s, &fam).map(|u| (fam.serialize(y, &maximal), u, fam)))
        .collect())
}

pub fn pushforward_plus_detailed(f: &SchemaMorphism, c: &CylinderSheaf) -> Result<Pushforward> {
    if !same(f.source(), c.base()) {
        return Err(Error::SchemaMismatch("pushforward along a map from another schema".into()));
    }
    let (y, x) = (f.source(), f.target());
    let mut by_preimage: HashMap<Subschema, (Vec<usize>, Vec<Family>)> = HashMap::new();
    let mut preimages = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let p = f.preimage_subschema(&x.closure([s]));
        if !by_preimage.contains_key(&p) {
            let fams = evaluate_on_subschema(&c.sheaf, &p);
            by_preimage.insert(p.clone(), (y.maximal(&p), fams));
        }
        preimages.push(p);
    }
    let mut rows: Vec<BTreeMap<Key, PartialRecord>> = Vec::with_capacity(x.len());
    let mut families: Vec<BTreeMap<Key, Family>> = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let (maximal, fams) = &by_preimage[&preimages[s]];
        let mut r = BTreeMap::new();
        let mut fm = BTreeMap::new();
        for fam in fams {
            if let Some(u) = forced_row(f, c, s, fam) {
                let key = fam.serialize(y, maximal);
                r.insert(key.clone(), u);
                fm.insert(key, fam.clone());
            }
        }
        rows.push(r);
        families.push(fm);
    }
    let mut sections = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let mut restrictions = Vec::with_capacity(n_faces(x, s));
        for i in 0..n_faces(x, s) {
            let d = x.face(s, i);
            let (dmax, _) = &by_preimage[&preimages[d]];
            let map: BTreeMap<Key, Key> = families[s]
                .iter()
                .map(|(key, fam)| (key.clone(), fam.restrict(&preimages[d]).serialize(y, dmax)))
                .collect();
            restrictions.push(map);
        }
        sections.push(Section {
            keys: rows[s].keys().cloned().collect(),
            restrictions,
        });
    }
    let cylinder = CylinderSheaf::new(KeySheaf::new(x.clone(), sections)?, rows)?;
    Ok(Pushforward { cylinder, families })
}

/// Copies the sheaf along a monic map and leaves everything else empty.
pub fn extend_by_empty(f: &SchemaMorphism, c: &CylinderSheaf) -> Result<CylinderSheaf> {
    if !f.is_monic() {
        return Err(Error::NotMonic);
    }
    if !same(f.source(), c.base()) {
        return Err(Error::SchemaMismatch("extension along a map from another schema".into()));
    }
    let x = f.target();
    let mut out = CylinderSheaf::empty(x);
    for s in 0..f.source().len() {
        let t = f.image(s).target;
        out.sheaf.sections[t] = c.sheaf.sections[s].clone();
        out.partial[t] = c.partial[s].clone();
    }
    Ok(out)
}

/// One key per distinct record (the first in key order); restrictions follow the records.
pub fn image_data(k: &KeySheaf, data: &DataMap) -> (KeySheaf, DataMap) {
    let x = k.base();
    let mut reps: Vec<HashMap<&Record, &Key>> = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let mut m = HashMap::new();
        for key in k.keys(s) {
            if let Some(r) = data.record(s, key) {
                m.entry(r).or_insert(key);
            }
        }
        reps.push(m);
    }
    let mut sections = Vec::with_capacity(x.len());
    let mut records = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let kept: BTreeMap<Key, Record> = reps[s].iter().map(|(r, k)| ((*k).clone(), (*r).clone())).collect();
        let restrictions = (0..n_faces(x, s))
            .map(|i| {
                kept.iter()
                    .map(|(key, r)| {
                        let mut fr = r.0.clone();
                        fr.remove(i);
                        let target = reps[x.face(s, i)].get(&Record(fr)).expect("naturality");
                        (key.clone(), (*target).clone())
                    })
                    .collect()
            })
            .collect();
        sections.push(Section {
            keys: kept.keys().cloned().collect(),
            restrictions,
        });
        records.push(kept);
    }
    (
        KeySheaf {
            base: x.clone(),
            sections,
        },
        DataMap { records },
    )
}

/// A natural map of key sets between two sheaves on one schema, simplex by simplex.
#[derive(Debug, Clone)]
pub struct SheafArrow {
    pub source: usize,
    pub target: usize,
    pub maps: Vec<BTreeMap<Key, Key>>,
}

#[derive(Debug, Clone)]
pub struct SheafLimit {
    pub cylinder: CylinderSheaf,
    /// For each simplex and limit key, the chosen row of every diagram object.
    pub components: Vec<BTreeMap<Key, Vec<Key>>>,
}

pub fn tuple_key(parts: &[Key]) -> Key {
    format!("({})", parts.join(","))
}

fn merge_into(merged: &mut [Option<Value>], row: &[Option<Value>]) -> bool {
    for (m, r) in merged.iter_mut().zip(row) {
        if let Some(v) = r {
            match m {
                Some(old) if old != v => return false,
                _ => *m = Some(v.clone()),
            }
        }
    }
    true
}

struct RowIndex<'a> {
    rows: Vec<(&'a Key, &'a PartialRecord)>,
    /// Rows grouped by the set of positions they constrain.
    groups: Vec<(Vec<usize>, Vec<usize>)>,
    cache: HashMap<(usize, Vec<usize>), HashMap<Vec<&'a Value>, Vec<usize>>>,
}

impl<'a> RowIndex<'a> {
    fn new(rows: &'a BTreeMap<Key, PartialRecord>) -> Self {
        let rows: Vec<(&Key, &PartialRecord)> = rows.iter().collect();
        let mut by_mask: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (i, (_, r)) in rows.iter().enumerate() {
            let mask: Vec<usize> = (0..r.len()).filter(|&j| r[j].is_some()).collect();
            by_mask.entry(mask).or_default().push(i);
        }
        RowIndex {
            rows,
            groups: by_mask.into_iter().collect(),
            cache: HashMap::new(),
        }
    }

    /// Rows whose constraints agree with `merged` wherever both are set.
    fn compatible(&mut self, merged: &[Option<Value>]) -> Vec<usize> {
        let mut out = Vec::new();
        for g in 0..self.groups.len() {
            let q: Vec<usize> = self.groups[g].0.iter().copied().filter(|&j| merged[j].is_some()).collect();
            if q.is_empty() {
                out.extend_from_slice(&self.groups[g].1);
                continue;
            }
            let rows = &self.rows;
            let members = &self.groups[g].1;
            let idx = self.cache.entry((g, q.clone())).or_insert_with(|| {
                let mut m: HashMap<Vec<&Value>, Vec<usize>> = HashMap::new();
                for &i in members {
                    let sig = q.iter().map(|&j| rows[i].1[j].as_ref().expect("in group")).collect();
                    m.entry(sig).or_default().push(i);
                }
                m
            });
            let sig: Vec<&Value> = q.iter().map(|&j| merged[j].as_ref().expect("set")).collect();
            if let Some(hits) = idx.get(&sig) {
                out.extend_from_slice(hits);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Limit of a finite diagram of cylinder sheaves on one schema, computed simplex by simplex.
pub fn sheaf_limit(base: &Arc<Schema>, objects: &[CylinderSheaf], arrows: &[SheafArrow]) -> Result<SheafLimit> {
    for o in objects {
        if !same(o.base(), base) {
            return Err(Error::SchemaMismatch("limit diagram over different schemas".into()));
        }
    }
    if objects.is_empty() {
        let cylinder = CylinderSheaf::universal(base);
        let components = (0..base.len())
            .map(|_| [(UNIVERSAL_KEY.to_string(), Vec::new())].into_iter().collect())
            .collect();
        return Ok(SheafLimit { cylinder, components });
    }
    let n = objects.len();
    let mut inverse: Vec<Vec<HashMap<&Key, Vec<&Key>>>> = Vec::with_capacity(arrows.len());
    for a in arrows {
        if a.source >= n || a.target >= n || a.maps.len() != base.len() {
            return Err(Error::InvalidMorphism("bad limit diagram arrow".into()));
        }
        inverse.push(
            a.maps
                .iter()
                .map(|m| {
                    let mut inv: HashMap<&Key, Vec<&Key>> = HashMap::new();
                    for (k, v) in m {
                        inv.entry(v).or_default().push(k);
                    }
                    inv
                })
                .collect(),
        );
    }

    let mut rows_out: Vec<BTreeMap<Key, PartialRecord>> = Vec::with_capacity(base.len());
    let mut components: Vec<BTreeMap<Key, Vec<Key>>> = Vec::with_capacity(base.len());
    for s in 0..base.len() {
        let width = base.dim(s) + 1;
        let mut indexes: Vec<RowIndex> = objects.iter().map(|o| RowIndex::new(&o.partial[s])).collect();
        let mut found: BTreeMap<Key, (Vec<Key>, PartialRecord)> = BTreeMap::new();
        let mut chosen: Vec<Option<Key>> = vec![None; n];
        let mut stack_merged: Vec<PartialRecord> = vec![vec![None; width]];

        // Objects reached through arrows from already chosen ones come early.
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        while order.len() < n {
            let next = (0..n)
                .filter(|&i| !placed[i])
                .max_by_key(|&i| {
                    let forced = arrows.iter().any(|a| a.target == i && placed[a.source]);
                    let linked = arrows.iter().any(|a| a.source == i && placed[a.target]);
                    (forced, linked, std::cmp::Reverse(i))
                })
                .expect("unplaced object");
            placed[next] = true;
            order.push(next);
        }

        #[allow(clippy::too_many_arguments)]
        fn go<'a>(
            s: usize,
            depth: usize,
            order: &[usize],
            objects: &'a [CylinderSheaf],
            arrows: &[SheafArrow],
            inverse: &[Vec<HashMap<&'a Key, Vec<&'a Key>>>],
            indexes: &mut [RowIndex<'a>],
            chosen: &mut Vec<Option<Key>>,
            merged_stack: &mut Vec<PartialRecord>,
            found: &mut BTreeMap<Key, (Vec<Key>, PartialRecord)>,
        ) {
            if depth == order.len() {
                let parts: Vec<Key> = chosen.iter().map(|c| c.clone().expect("chosen")).collect();
                let merged = merged_stack.last().expect("stack").clone();
                found.insert(tuple_key(&parts), (parts, merged));
                return;
            }
            let i = order[depth];
            let rows = &objects[i].partial[s];
            let mut candidates: Option<Vec<&Key>> = None;
            for a in arrows.iter().filter(|a| a.target == i) {
                if let Some(src) = &chosen[a.source] {
                    let img = a.maps[s].get(src);
                    candidates = Some(img.filter(|k| rows.contains_key(*k)).into_iter().collect());
                    break;
                }
            }
            if candidates.is_none() {
                for (ai, a) in arrows.iter().enumerate() {
                    if a.source == i {
                        if let Some(tgt) = &chosen[a.target] {
                            candidates = Some(inverse[ai][s].get(tgt).cloned().unwrap_or_default());
                            break;
                        }
                    }
                }
            }
            let merged_now = merged_stack.last().expect("stack").clone();
            let candidates: Vec<&Key> = match candidates {
                Some(c) => c,
                None => {
                    let idx = &mut indexes[i];
                    idx.compatible(&merged_now).into_iter().map(|r| idx.rows[r].0).collect()
                }
            };
            for key in candidates {
                let ok = arrows.iter().all(|a| {
                    let (src, tgt) = if a.source == i {
                        (Some(key), chosen[a.target].as_ref())
                    } else if a.target == i {
                        (chosen[a.source].as_ref(), Some(key))
                    } else {
                        return true;
                    };
                    match (src, tgt) {
                        (Some(x), Some(y)) => a.maps[s].get(x) == Some(y),
                        _ => true,
                    }
                });
                if !ok {
                    continue;
                }
                let mut merged = merged_now.clone();
                if !merge_into(&mut merged, &rows[key]) {
                    continue;
                }
                chosen[i] = Some(key.clone());
                merged_stack.push(merged);
                go(s, depth + 1, order, objects, arrows, inverse, indexes, chosen, merged_stack, found);
                merged_stack.pop();
                chosen[i] = None;
            }
        }
        go(
            s,
            0,
            &order,
            objects,
            arrows,
            &inverse,
            &mut indexes,
            &mut chosen,
            &mut stack_merged,
            &mut found,
        );
        let mut r = BTreeMap::new();
        let mut c = BTreeMap::new();
        for (k, (parts, merged)) in found {
            r.insert(k.clone(), merged);
            c.insert(k, parts);
        }
        rows_out.push(r);
        components.push(c);
    }

    let mut sections = Vec::with_capacity(base.len());
    for s in 0..base.len() {
        let mut restrictions = Vec::with_capacity(n_faces(base, s));
        for i in 0..n_faces(base, s) {
            let mut map = BTreeMap::new();
            for (k, parts) in &components[s] {
                let restricted: Option<Vec<Key>> = parts
                    .iter()
                    .enumerate()
                    .map(|(o, p)| objects[o].sheaf.restrict(s, i, p).cloned())
                    .collect();
                if let Some(r) = restricted {
                    map.insert(k.clone(), tuple_key(&r));
                }
            }
            restrictions.push(map);
        }
        sections.push(Section {
            keys: rows_out[s].keys().cloned().collect(),
            restrictions,
        });
    }
    let cylinder = CylinderSheaf::new(KeySheaf::new(base.clone(), sections)?, rows_out)?;
    Ok(SheafLimit { cylinder, components })
}

#[derive(Debug, Clone)]
pub struct SheafColimit {
    pub cylinder: CylinderSheaf,
    /// For each object, simplex and key, the class it lands in.
    pub injections: Vec<Vec<BTreeMap<Key, Key>>>,
}

/// Colimit of a finite diagram of cylinder sheaves on one schema: tagged union, then
/// union-find. Classes are named after members in objects without outgoing arrows.
pub fn sheaf_colimit(base: &Arc<Schema>, objects: &[CylinderSheaf], arrows: &[SheafArrow]) -> Result<SheafColimit> {
    for o in objects {
        if !same(o.base(), base) {
            return Err(Error::SchemaMismatch("colimit diagram over different schemas".into()));
        }
    }
    let n = objects.len();
    let has_out: Vec<bool> = (0..n).map(|i| arrows.iter().any(|a| a.source == i)).collect();
    let mut names: Vec<BTreeMap<Key, (Key, PartialRecord)>> = Vec::with_capacity(base.len());
    let mut injections: Vec<Vec<BTreeMap<Key, Key>>> = vec![Vec::with_capacity(base.len()); n];
    for s in 0..base.len() {
        let mut tagged: Vec<(usize, &Key)> = Vec::new();
        let mut pos: HashMap<(usize, &Key), usize> = HashMap::new();
        for (o, obj) in objects.iter().enumerate() {
            for k in obj.sheaf.keys(s) {
                pos.insert((o, k), tagged.len());
                tagged.push((o, k));
            }
        }
        let mut uf = UnionFind::new(tagged.len());
        for a in arrows {
            for (k, v) in &a.maps[s] {
                let (Some(&p), Some(&q)) = (pos.get(&(a.source, k)), pos.get(&(a.target, v))) else {
                    return Err(Error::InvalidMorphism(format!(
                        "arrow sends {k} to missing key {v} at `{}`",
                        base.id(s)
                    )));
                };
                uf.union(p, q);
            }
        }
        let (class, count) = uf.classes();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (i, c) in class.iter().enumerate() {
            members[*c].push(i);
        }
        let mut class_name = Vec::with_capacity(count);
        let mut out = BTreeMap::new();
        for m in &members {
            let named: Vec<&usize> = m.iter().filter(|&&i| !has_out[tagged[i].0]).collect();
            let pick: Vec<&usize> = if named.is_empty() { m.iter().collect() } else { named };
            let name = pick
                .iter()
                .map(|&&i| format!("{}:{}", tagged[i].0 + 1, tagged[i].1))
                .collect::<Vec<_>>()
                .join("~");
            let row = objects[tagged[m[0]].0].partial[s][tagged[m[0]].1].clone();
            for &i in m {
                if objects[tagged[i].0].partial[s][tagged[i].1] != row {
                    return Err(Error::UnsupportedColimit(format!(
                        "identified keys at `{}` carry different constraints",
                        base.id(s)
                    )));
                }
            }
            out.insert(name.clone(), (name.clone(), row));
            class_name.push(name);
        }
        for (o, inj) in injections.iter_mut().enumerate() {
            inj.push(
                objects[o]
                    .sheaf
                    .keys(s)
                    .iter()
                    .map(|k| (k.clone(), class_name[class[pos[&(o, k)]]].clone()))
                    .collect(),
            );
        }
        names.push(out);
    }
    let mut sections = Vec::with_capacity(base.len());
    let mut partial = Vec::with_capacity(base.len());
    for s in 0..base.len() {
        let mut restrictions = vec![BTreeMap::new(); n_faces(base, s)];
        for (o, obj) in objects.iter().enumerate() {
            for k in obj.sheaf.keys(s) {
                let name = &injections[o][s][k];
                for (i, map) in restrictions.iter_mut().enumerate() {
                    if let Some(fk) = obj.sheaf.restrict(s, i, k) {
                        let target = injections[o][base.face(s, i)][fk].clone();
                        if let Some(old) = map.insert(name.clone(), target.clone()) {
                            if old != target {
                                return Err(Error::InvalidMorphism(
                                    "diagram arrows are not natural".into(),
                                ));
                            }
                        }
                    }
                }
            }
        }
        sections.push(Section {
            keys: names[s].keys().cloned().collect(),
            restrictions,
        });
        partial.push(names[s].values().map(|(k, r)| (k.clone(), r.clone())).collect());
    }
    let cylinder = CylinderSheaf::new(KeySheaf::new(base.clone(), sections)?, partial)?;
    Ok(SheafColimit { cylinder, injections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::enumerate_subschemas;
    use crate::typespec::TypeSpec;

    fn worked() -> (KeySheaf, DataMap) {
        let spec = Arc::new(TypeSpec::standard());
        let x = Schema::builder(spec.clone())
            .vertex("First", "First", "Str")
            .vertex("BYear", "BYear", "Z")
            .simplex("e", &["BYear", "First"])
            .build()
            .unwrap();
        let keys = |ks: &[&str]| ks.iter().map(|k| k.to_string()).collect::<BTreeSet<_>>();
        let map = |ps: &[(&str, &str)]| ps.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let sheaf = KeySheaf::new(
            x.clone(),
            vec![
                Section { keys: keys(&["1", "2"]), restrictions: vec![] },
                Section { keys: keys(&["x", "y", "z"]), restrictions: vec![] },
                Section {
                    keys: keys(&["4", "cc", "10"]),
                    restrictions: vec![
                        map(&[("4", "x"), ("cc", "z"), ("10", "z")]),
                        map(&[("4", "1"), ("cc", "2"), ("10", "2")]),
                    ],
                },
            ],
        )
        .unwrap();
        let mut vertex = HashMap::new();
        vertex.insert(
            0,
            [("1", "Barack"), ("2", "Michelle")]
                .iter()
                .map(|(k, v)| (k.to_string(), spec.value("Str", *v).unwrap()))
                .collect(),
        );
        vertex.insert(
            1,
            [("x", 1961), ("y", 1946), ("z", 1964)]
                .iter()
                .map(|(k, v)| (k.to_string(), spec.value("Z", *v).unwrap()))
                .collect(),
        );
        let data = DataMap::from_vertices(&sheaf, &vertex).unwrap();
        (sheaf, data)
    }

    #[test]
    fn forced_values() {
        let (k, d) = worked();
        assert!(validate_sheaf_and_data(&k, &d).is_empty());
        assert_eq!(d.record(2, "4").unwrap().to_string(), "(Barack; 1961)");
        assert_eq!(d.record(2, "cc").unwrap().to_string(), "(Michelle; 1964)");
        assert_eq!(d.record(2, "10").unwrap(), d.record(2, "cc").unwrap());
    }

    #[test]
    fn fault_injection() {
        let (mut k, d) = worked();
        k.sections[2].restrictions[1].insert("4".into(), "2".into());
        let v = validate_sheaf_and_data(&k, &d);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Naturality { face: 1, .. }));
    }

    #[test]
    fn families() {
        let (k, _) = worked();
        let x = k.base().clone();
        assert_eq!(evaluate_on_subschema(&k, &Subschema::empty()).len(), 1);
        let verts = x.subschema_of_ids(&["First", "BYear"]).unwrap();
        assert_eq!(evaluate_on_subschema(&k, &verts).len(), 6);
        let all = evaluate_on_subschema(&k, &x.all());
        assert_eq!(all.len(), 3);
        let mut names: Vec<Key> = all.iter().map(|f| f.serialize(&x, &x.maximal(&x.all()))).collect();
        names.sort();
        assert_eq!(names, ["(e:10)", "(e:4)", "(e:cc)"]);
        assert_eq!(enumerate_subschemas(&x).unwrap().len(), 5);
    }

    #[test]
    fn image_collapses_duplicates() {
        let (k, d) = worked();
        let (k2, d2) = image_data(&k, &d);
        assert_eq!(k2.keys(2).len(), 2);
        assert!(validate_sheaf_and_data(&k2, &d2).is_empty());
        assert_eq!(image_data(&k2, &d2), (k2, d2));
    }

    #[test]
    fn identity_migrations() {
        let (k, d) = worked();
        let c = CylinderSheaf::from_data(&k, &d);
        let id = SchemaMorphism::identity(k.base());
        assert_eq!(pullback(&id, &c).unwrap(), c);
        assert_eq!(extend_by_empty(&id, &c).unwrap(), c);
        let pf = pushforward_plus(&id, &c).unwrap();
        assert!(pf.is_total());
        assert_eq!(pf.sheaf().keys(2).len(), 3);
        assert!(pf.validate().is_empty());
    }

    #[test]
    fn universal_limit() {
        let (k, _) = worked();
        let lim = sheaf_limit(k.base(), &[], &[]).unwrap();
        assert_eq!(lim.cylinder, CylinderSheaf::universal(k.base()));
        let col = sheaf_colimit(k.base(), &[], &[]).unwrap();
        assert_eq!(col.cylinder.sheaf().total_keys(), 0);
    }
}
