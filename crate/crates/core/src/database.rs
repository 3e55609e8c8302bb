//! Databases over simplicial schemas, their morphisms, and queries built from limits and colimits.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{ExplicitSections, ExplicitSimplex};
use crate::keysheaf::{
    evaluate_on_subschema, extend_by_empty, image_data, pullback, pushforward_plus,
    pushforward_plus_detailed, pushforward_rows_at, sheaf_colimit, sheaf_limit,
    validate_sheaf_and_data, CylinderSheaf, DataMap, Family, KeySheaf, Pushforward, Section,
    SheafArrow, Violation, UNIVERSAL_KEY,
};
use crate::schema::{
    same, schema_colimit, schema_isomorphisms, simplex_schema, vertex_classifier, Schema,
    SchemaArrow, SchemaDiagram, SchemaMorphism, SimplexImage, Subschema,
};
use crate::simple_schema::{Record, SimpleSchemaMorphism};
use crate::table::{Key, Table, TableMorphism};
use crate::typespec::{Payload, TypeSpec, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    sheaf: KeySheaf,
    data: DataMap,
}

impl Database {
    pub fn new(sheaf: KeySheaf, data: DataMap) -> Result<Self> {
        let v = validate_sheaf_and_data(&sheaf, &data);
        if let Some(first) = v.first() {
            return Err(Error::InvalidDatabase(format!(
                "{first} ({} problem{} in all)",
                v.len(),
                if v.len() == 1 { "" } else { "s" }
            )));
        }
        Ok(Database { sheaf, data })
    }

    pub fn empty(schema: &Arc<Schema>) -> Self {
        Database {
            sheaf: KeySheaf::empty(schema),
            data: DataMap {
                records: vec![BTreeMap::new(); schema.len()],
            },
        }
    }

    pub fn builder(schema: &Arc<Schema>) -> DatabaseBuilder {
        DatabaseBuilder {
            schema: schema.clone(),
            keys: vec![BTreeSet::new(); schema.len()],
            restrictions: (0..schema.len()).map(|s| vec![BTreeMap::new(); schema.faces(s).len()]).collect(),
            records: vec![BTreeMap::new(); schema.len()],
            errors: Vec::new(),
        }
    }

    pub fn from_cylinder(c: &CylinderSheaf) -> Result<Self> {
        if c.is_total() {
            Database::new(c.sheaf().clone(), c.to_data()?)
        } else {
            let (k, d) = c.materialize()?;
            Database::new(k, d)
        }
    }

    pub fn to_cylinder(&self) -> CylinderSheaf {
        CylinderSheaf::from_data(&self.sheaf, &self.data)
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.sheaf.base()
    }

    pub fn sheaf(&self) -> &KeySheaf {
        &self.sheaf
    }

    pub fn data(&self) -> &DataMap {
        &self.data
    }

    pub fn keys(&self, s: usize) -> &BTreeSet<Key> {
        self.sheaf.keys(s)
    }

    pub fn record(&self, s: usize, k: &str) -> Option<&Record> {
        self.data.record(s, k)
    }

    /// The table stored at one simplex.
    pub fn table_at(&self, s: usize) -> Table {
        Table::new(
            self.schema().vertex_schema(s),
            self.data.records[s].iter().map(|(k, r)| (k.clone(), r.clone())),
        )
        .expect("validated records")
    }

    /// Same data on an equal schema value.
    pub fn rebase(&self, schema: &Arc<Schema>) -> Result<Database> {
        if **schema != **self.schema() {
            return Err(Error::SchemaMismatch("rebase onto a different schema".into()));
        }
        Ok(Database {
            sheaf: KeySheaf::new(schema.clone(), self.sheaf.sections().to_vec())?,
            data: self.data.clone(),
        })
    }

    pub fn rename_keys(&self, maps: &[BTreeMap<Key, Key>]) -> Result<Database> {
        let x = self.schema();
        let mut sections = Vec::with_capacity(x.len());
        let mut records = Vec::with_capacity(x.len());
        for s in 0..x.len() {
            let rn = |k: &Key| maps[s].get(k).cloned().unwrap_or_else(|| k.clone());
            let sec = self.sheaf.section(s);
            let keys: BTreeSet<Key> = sec.keys.iter().map(rn).collect();
            if keys.len() != sec.keys.len() {
                return Err(Error::InvalidDatabase(format!("renaming merges keys at `{}`", x.id(s))));
            }
            let restrictions = sec
                .restrictions
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let f = x.face(s, i);
                    m.iter()
                        .map(|(k, v)| (rn(k), maps[f].get(v).cloned().unwrap_or_else(|| v.clone())))
                        .collect()
                })
                .collect();
            sections.push(Section { keys, restrictions });
            records.push(self.data.records[s].iter().map(|(k, r)| (rn(k), r.clone())).collect());
        }
        Database::new(KeySheaf::new(x.clone(), sections)?, DataMap { records })
    }
}

/// Assembles a database by simplex id. Records of higher simplices may be left out and are
/// then read off the vertices.
pub struct DatabaseBuilder {
    schema: Arc<Schema>,
    keys: Vec<BTreeSet<Key>>,
    restrictions: Vec<Vec<BTreeMap<Key, Key>>>,
    records: Vec<BTreeMap<Key, Vec<Payload>>>,
    errors: Vec<Error>,
}

impl DatabaseBuilder {
    fn simplex(&mut self, id: &str) -> Option<usize> {
        match self.schema.index_of(id) {
            Ok(s) => Some(s),
            Err(e) => {
                self.errors.push(e);
                None
            }
        }
    }

    pub fn rows(mut self, id: &str, rows: Vec<(&str, Vec<Payload>)>) -> Self {
        if let Some(s) = self.simplex(id) {
            for (k, r) in rows {
                self.keys[s].insert(k.to_string());
                self.records[s].insert(k.to_string(), r);
            }
        }
        self
    }

    pub fn keys(mut self, id: &str, keys: &[&str]) -> Self {
        if let Some(s) = self.simplex(id) {
            self.keys[s].extend(keys.iter().map(|k| k.to_string()));
        }
        self
    }

    pub fn restrict(mut self, id: &str, face: usize, pairs: &[(&str, &str)]) -> Self {
        if let Some(s) = self.simplex(id) {
            if face >= self.restrictions[s].len() {
                self.errors.push(Error::InvalidDatabase(format!("`{id}` has no face {face}")));
            } else {
                self.restrictions[s][face].extend(pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())));
            }
        }
        self
    }

    pub fn build(mut self) -> Result<Database> {
        if let Some(e) = self.errors.pop() {
            return Err(e);
        }
        let x = self.schema.clone();
        let sections = self
            .keys
            .into_iter()
            .zip(self.restrictions)
            .map(|(keys, restrictions)| Section { keys, restrictions })
            .collect();
        let sheaf = KeySheaf::new(x.clone(), sections)?;
        let mut vertex = HashMap::new();
        for v in x.vertex_ids() {
            let t = x.vertex_type(v);
            let mut m = BTreeMap::new();
            for k in sheaf.keys(v) {
                let raw = self.records[v].get(k).ok_or_else(|| {
                    Error::InvalidDatabase(format!("vertex `{}` has no value for key {k}", x.id(v)))
                })?;
                if raw.len() != 1 {
                    return Err(Error::Arity { expected: 1, found: raw.len() });
                }
                m.insert(k.clone(), x.spec().value(t, raw[0].clone())?);
            }
            vertex.insert(v, m);
        }
        let derived = DataMap::from_vertices(&sheaf, &vertex)?;
        let mut records = derived.records;
        for s in 0..x.len() {
            let schema = x.vertex_schema(s);
            for (k, raw) in &self.records[s] {
                let given = schema.check_record(raw.clone())?;
                match records[s].get(k) {
                    Some(r) if *r != given => {
                        return Err(Error::InvalidDatabase(format!(
                            "`{}`: record {given} of key {k} disagrees with its vertices {r}",
                            x.id(s)
                        )))
                    }
                    Some(_) => {}
                    None => {
                        return Err(Error::InvalidDatabase(format!("`{}`: record for unknown key {k}", x.id(s))))
                    }
                }
                records[s].insert(k.clone(), given);
            }
        }
        Database::new(sheaf, DataMap { records })
    }
}

/// A database morphism `A → B`: a schema map from B's schema to A's, and for each simplex of
/// B's schema a key map out of the pulled-back section of A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbMorphism {
    pub schema_map: SchemaMorphism,
    pub sharp: Vec<BTreeMap<Key, Key>>,
    pub integrity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    Unmapped { simplex: String, key: Key },
    Dangling { simplex: String, key: Key },
    Naturality { simplex: String, face: usize, key: Key },
    Integrity { simplex: String, key: Key },
}

impl DbMorphism {
    pub fn identity(schema: &Arc<Schema>, sheaf: &KeySheaf) -> Self {
        DbMorphism {
            schema_map: SchemaMorphism::identity(schema),
            sharp: (0..schema.len())
                .map(|s| sheaf.keys(s).iter().map(|k| (k.clone(), k.clone())).collect())
                .collect(),
            integrity: true,
        }
    }

    /// First `self`, then `other`.
    pub fn then(&self, other: &DbMorphism) -> Result<DbMorphism> {
        let schema_map = other.schema_map.then(&self.schema_map)?;
        let sharp = (0..other.schema_map.source().len())
            .map(|z| {
                let y = other.schema_map.image(z).target;
                self.sharp[y]
                    .iter()
                    .filter_map(|(k, mid)| other.sharp[z].get(mid).map(|v| (k.clone(), v.clone())))
                    .collect()
            })
            .collect();
        Ok(DbMorphism {
            schema_map,
            sharp,
            integrity: self.integrity && other.integrity,
        })
    }
}

/// The unique morphism into the final database on `h`'s source.
pub fn final_morphism(db: &CylinderSheaf, h: &SchemaMorphism) -> DbMorphism {
    DbMorphism {
        schema_map: h.clone(),
        sharp: (0..h.source().len())
            .map(|z| {
                db.sheaf()
                    .keys(h.image(z).target)
                    .iter()
                    .map(|k| (k.clone(), UNIVERSAL_KEY.to_string()))
                    .collect()
            })
            .collect(),
        integrity: true,
    }
}

pub fn validate_db_morphism(
    source: &CylinderSheaf,
    target: &CylinderSheaf,
    m: &DbMorphism,
) -> Result<Vec<MorphismViolation>> {
    let f = &m.schema_map;
    if !same(f.target(), source.base()) || !same(f.source(), target.base()) {
        return Err(Error::Direction(
            "the schema map must run from the target's schema to the source's".into(),
        ));
    }
    let y = target.base();
    let pulled = pullback(f, source)?;
    let mut out = Vec::new();
    if m.sharp.len() != y.len() {
        return Err(Error::InvalidMorphism("one key map per simplex is needed".into()));
    }
    for s in 0..y.len() {
        for k in pulled.sheaf().keys(s) {
            let Some(img) = m.sharp[s].get(k) else {
                out.push(MorphismViolation::Unmapped { simplex: y.id(s).into(), key: k.clone() });
                continue;
            };
            let Some(trow) = target.row(s, img) else {
                out.push(MorphismViolation::Dangling { simplex: y.id(s).into(), key: k.clone() });
                continue;
            };
            for i in 0..y.faces(s).len() {
                let via_face = pulled
                    .sheaf()
                    .restrict(s, i, k)
                    .and_then(|fk| m.sharp[y.face(s, i)].get(fk));
                let direct = target.sheaf().restrict(s, i, img);
                if via_face != direct {
                    out.push(MorphismViolation::Naturality {
                        simplex: y.id(s).into(),
                        face: i,
                        key: k.clone(),
                    });
                }
            }
            if m.integrity {
                let srow = pulled.row(s, k).expect("pulled rows");
                if trow.iter().zip(srow).any(|(t, s)| t.is_some() && t != s) {
                    out.push(MorphismViolation::Integrity { simplex: y.id(s).into(), key: k.clone() });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DbArrow {
    pub source: usize,
    pub target: usize,
    pub morphism: DbMorphism,
}

#[derive(Debug, Clone, Default)]
pub struct DbDiagram {
    pub objects: Vec<CylinderSheaf>,
    pub arrows: Vec<DbArrow>,
}

/// A limit before materialization: possibly free positions, legs into every object.
#[derive(Debug, Clone)]
pub struct DbLimit {
    pub cylinder: CylinderSheaf,
    pub legs: Vec<DbMorphism>,
}

impl DbLimit {
    pub fn schema(&self) -> &Arc<Schema> {
        self.cylinder.base()
    }

    /// Expands free enumerable positions; legs are carried along.
    pub fn materialize(&self) -> Result<(Database, Vec<DbMorphism>)> {
        if self.cylinder.is_total() {
            let db = Database::new(self.cylinder.sheaf().clone(), self.cylinder.to_data()?)?;
            return Ok((db, self.legs.clone()));
        }
        let (k, d, origin) = self.cylinder.materialize_tracked()?;
        let db = Database::new(k, d)?;
        let legs = self
            .legs
            .iter()
            .map(|leg| DbMorphism {
                schema_map: leg.schema_map.clone(),
                sharp: (0..leg.schema_map.source().len())
                    .map(|y| {
                        let t = leg.schema_map.image(y).target;
                        origin[t]
                            .iter()
                            .filter_map(|(new, old)| leg.sharp[y].get(old).map(|v| (new.clone(), v.clone())))
                            .collect()
                    })
                    .collect(),
                integrity: leg.integrity,
            })
            .collect();
        Ok((db, legs))
    }

    pub fn database(&self) -> Result<Database> {
        Ok(self.materialize()?.0)
    }
}

/// Unit-like comparison map from a sheaf on the target of `f` into the pushforward of its pullback:
/// each key goes to the family of its own restrictions.
fn restriction_family_arrow(
    f: &SchemaMorphism,
    k: &KeySheaf,
    source: usize,
    target: usize,
    pf: &Pushforward,
) -> SheafArrow {
    let (y, x) = (f.source(), f.target());
    let maps = (0..x.len())
        .map(|s| {
            let p = f.preimage_subschema(&x.closure([s]));
            let maximal = y.maximal(&p);
            let sv = x.vertices(s);
            k.keys(s)
                .iter()
                .filter_map(|key| {
                    let assignment: Option<Vec<(usize, Key)>> = p
                        .iter()
                        .map(|ys| {
                            let t = f.image(ys).target;
                            let mut keep: Vec<usize> = x
                                .vertices(t)
                                .iter()
                                .map(|v| sv.iter().position(|w| w == v).expect("face of s"))
                                .collect();
                            keep.sort_unstable();
                            k.restrict_to(s, key, &keep).map(|(_, r)| (ys, r.to_string()))
                        })
                        .collect();
                    let fam = Family { assignment: assignment? };
                    let name = fam.serialize(y, &maximal);
                    pf.families[s].contains_key(&name).then(|| (key.clone(), name))
                })
                .collect()
        })
        .collect();
    SheafArrow { source, target, maps }
}

pub fn db_limit(diagram: &DbDiagram) -> Result<DbLimit> {
    let objs = &diagram.objects;
    let spec = match objs.first() {
        Some(o) => o.base().spec().clone(),
        None => return Err(Error::InvalidMorphism("limit of an empty diagram needs a schema".into())),
    };
    let sd = SchemaDiagram {
        objects: objs.iter().map(|o| o.base().clone()).collect(),
        arrows: diagram
            .arrows
            .iter()
            .map(|a| SchemaArrow {
                source: a.target,
                target: a.source,
                map: a.morphism.schema_map.clone(),
            })
            .collect(),
    };
    let colim = schema_colimit(&sd, &spec)?;
    let l = colim.schema.clone();
    let pushed: Vec<Pushforward> = objs
        .iter()
        .zip(&colim.legs)
        .map(|(o, leg)| pushforward_plus_detailed(leg, o))
        .collect::<Result<_>>()?;

    let mut arrows = Vec::with_capacity(diagram.arrows.len());
    for a in &diagram.arrows {
        let (i, j) = (a.source, a.target);
        let g = &a.morphism.schema_map;
        let xj = objs[j].base();
        let mut maps = Vec::with_capacity(l.len());
        for s in 0..l.len() {
            let pj = colim.legs[j].preimage_subschema(&l.closure([s]));
            let maximal = xj.maximal(&pj);
            let mut m = BTreeMap::new();
            for (key, fam) in &pushed[i].families[s] {
                let assignment: Option<Vec<(usize, Key)>> = pj
                    .iter()
                    .map(|yv| {
                        let t = g.image(yv).target;
                        fam.get(t)
                            .and_then(|k| a.morphism.sharp[yv].get(k))
                            .map(|v| (yv, v.clone()))
                    })
                    .collect();
                let Some(assignment) = assignment else { continue };
                let name = Family { assignment }.serialize(xj, &maximal);
                if pushed[j].families[s].contains_key(&name) {
                    m.insert(key.clone(), name);
                }
            }
            maps.push(m);
        }
        arrows.push(SheafArrow { source: i, target: j, maps });
    }

    let cylinders: Vec<CylinderSheaf> = pushed.iter().map(|p| p.cylinder.clone()).collect();
    let lim = sheaf_limit(&l, &cylinders, &arrows)?;
    let legs = colim
        .legs
        .iter()
        .enumerate()
        .map(|(i, leg)| DbMorphism {
            schema_map: leg.clone(),
            sharp: (0..leg.source().len())
                .map(|y| {
                    let t = leg.image(y).target;
                    lim.components[t]
                        .iter()
                        .map(|(key, parts)| {
                            let fam = &pushed[i].families[t][&parts[i]];
                            (key.clone(), fam.get(y).expect("family covers the preimage").clone())
                        })
                        .collect()
                })
                .collect(),
            integrity: true,
        })
        .collect();
    Ok(DbLimit {
        cylinder: lim.cylinder,
        legs,
    })
}

/// Fiber product `a ×_c b`.
pub fn db_pullback(
    a: &CylinderSheaf,
    b: &CylinderSheaf,
    c: &CylinderSheaf,
    ma: &DbMorphism,
    mb: &DbMorphism,
) -> Result<DbLimit> {
    db_limit(&DbDiagram {
        objects: vec![a.clone(), b.clone(), c.clone()],
        arrows: vec![
            DbArrow { source: 0, target: 2, morphism: ma.clone() },
            DbArrow { source: 1, target: 2, morphism: mb.clone() },
        ],
    })
}

/// Join over a shared schema mapped into both sides.
pub fn db_join(
    a: &CylinderSheaf,
    b: &CylinderSheaf,
    into_a: &SchemaMorphism,
    into_b: &SchemaMorphism,
) -> Result<DbLimit> {
    if !same(into_a.source(), into_b.source()) {
        return Err(Error::SchemaMismatch("join maps start at different schemas".into()));
    }
    let shared = CylinderSheaf::universal(into_a.source());
    db_pullback(a, b, &shared, &final_morphism(a, into_a), &final_morphism(b, into_b))
}

/// Join on pairs of simplex ids; the shared part is the closure of the left-hand ids.
pub fn db_join_on(a: &Database, b: &Database, pairs: &[(&str, &str)]) -> Result<DbLimit> {
    let xa = a.schema();
    let left: Vec<&str> = pairs.iter().map(|(l, _)| *l).collect();
    let inc = xa.restrict_to(&xa.closure_of_ids(&left)?)?;
    let into_b = SchemaMorphism::from_pairs(inc.source(), b.schema(), pairs)?;
    db_join(&a.to_cylinder(), &b.to_cylinder(), &inc, &into_b)
}

/// Objectwise colimit on one schema; every schema map must be the identity.
pub fn db_colimit_fixed_schema(diagram: &DbDiagram) -> Result<Database> {
    let Some(first) = diagram.objects.first() else {
        return Err(Error::UnsupportedColimit("empty diagram has no schema".into()));
    };
    let base = first.base().clone();
    let mut objects = Vec::with_capacity(diagram.objects.len());
    for o in &diagram.objects {
        if **o.base() != *base {
            return Err(Error::UnsupportedColimit("objects live on different schemas".into()));
        }
        objects.push(CylinderSheaf::new(KeySheaf::new(base.clone(), o.sheaf().sections().to_vec())?, (0..base.len()).map(|s| o.rows(s).clone()).collect())?);
    }
    let mut arrows = Vec::with_capacity(diagram.arrows.len());
    for a in &diagram.arrows {
        let f = &a.morphism.schema_map;
        if **f.source() != *base || **f.target() != *base || f.images().iter().enumerate().any(|(s, i)| i.target != s || !i.is_identity()) {
            return Err(Error::UnsupportedColimit(
                "colimits are only computed over a fixed schema".into(),
            ));
        }
        arrows.push(SheafArrow {
            source: a.source,
            target: a.target,
            maps: a.morphism.sharp.clone(),
        });
    }
    let col = sheaf_colimit(&base, &objects, &arrows)?;
    Database::from_cylinder(&col.cylinder)
}

pub fn coproduct(a: &Database, b: &Database) -> Result<Database> {
    db_colimit_fixed_schema(&DbDiagram {
        objects: vec![a.to_cylinder(), b.to_cylinder()],
        arrows: vec![],
    })
}

/// Pushout of `a ← overlap → b`; key maps are given per simplex.
pub fn union_over(
    a: &Database,
    b: &Database,
    overlap: &Database,
    into_a: &[BTreeMap<Key, Key>],
    into_b: &[BTreeMap<Key, Key>],
) -> Result<Database> {
    let id = SchemaMorphism::identity(a.schema());
    let m = |sharp: &[BTreeMap<Key, Key>]| DbMorphism {
        schema_map: id.clone(),
        sharp: sharp.to_vec(),
        integrity: true,
    };
    db_colimit_fixed_schema(&DbDiagram {
        objects: vec![overlap.to_cylinder(), a.to_cylinder(), b.to_cylinder()],
        arrows: vec![
            DbArrow { source: 0, target: 1, morphism: m(into_a) },
            DbArrow { source: 0, target: 2, morphism: m(into_b) },
        ],
    })
}

/// Union identifying keys whose data agree on every simplex (the shared part is computed).
pub fn union_by_records(a: &Database, b: &Database) -> Result<Database> {
    let x = a.schema();
    let ra = to_relational(a);
    let rb = to_relational(b);
    let mut overlap_keys = Vec::with_capacity(x.len());
    let mut into_a = Vec::with_capacity(x.len());
    let mut into_b = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let by_rec: HashMap<&Record, &Key> = rb.data.records[s].iter().map(|(k, r)| (r, k)).collect();
        let mut ov = BTreeMap::new();
        let mut ma = BTreeMap::new();
        let mut mb = BTreeMap::new();
        for (k, r) in &ra.data.records[s] {
            if let Some(kb) = by_rec.get(r) {
                ov.insert(k.clone(), r.clone());
                ma.insert(k.clone(), k.clone());
                mb.insert(k.clone(), (*kb).clone());
            }
        }
        overlap_keys.push(ov);
        into_a.push(ma);
        into_b.push(mb);
    }
    let sections = (0..x.len())
        .map(|s| Section {
            keys: overlap_keys[s].keys().cloned().collect(),
            restrictions: (0..x.faces(s).len())
                .map(|i| {
                    overlap_keys[s]
                        .keys()
                        .filter_map(|k| ra.sheaf.restrict(s, i, k).map(|v| (k.clone(), v.clone())))
                        .collect()
                })
                .collect(),
        })
        .collect();
    let overlap = Database::new(KeySheaf::new(x.clone(), sections)?, DataMap { records: overlap_keys })?;
    union_over(&ra, &rb.rebase(x)?, &overlap, &into_a, &into_b)
}

pub fn insert(db: &Database, rows: &Database) -> Result<Database> {
    coproduct(db, &rows.rebase(db.schema())?)
}

pub fn db_project(db: &Database, sub: &Subschema) -> Result<Database> {
    let inc = db.schema().restrict_to(sub)?;
    Database::from_cylinder(&pullback(&inc, &db.to_cylinder())?)
}

/// The selection's data as a database on the subschema-as-schema of `sub`.
fn selection_on(db: &Database, sub: &Subschema, selection: &Database) -> Result<(SchemaMorphism, Database)> {
    let inc = db.schema().restrict_to(sub)?;
    let sel = selection.rebase(inc.source()).map_err(|_| {
        Error::SchemaMismatch("selection schema is not the selected subschema".into())
    })?;
    Ok((inc, sel))
}

/// Fiber product `db ×_{1_S} selection`. Keys are (db key, selection family, final key) tuples.
pub fn db_select_limit(db: &Database, sub: &Subschema, selection: &Database) -> Result<DbLimit> {
    let (inc, sel) = selection_on(db, sub, selection)?;
    let s_schema = inc.source().clone();
    let a = db.to_cylinder();
    let b = sel.to_cylinder();
    let lim = db_pullback(
        &a,
        &b,
        &CylinderSheaf::universal(&s_schema),
        &final_morphism(&a, &inc),
        &final_morphism(&b, &SchemaMorphism::identity(&s_schema)),
    )?;
    Ok(lim)
}

pub fn db_select(db: &Database, sub: &Subschema, selection: &Database) -> Result<Database> {
    let lim = db_select_limit(db, sub, selection)?;
    lim.database()?.rebase(db.schema())
}

/// Keys of `db` on simplices of `sub` picked out by the selection.
pub fn selected_keys(db: &Database, sub: &Subschema, selection: &Database) -> Result<Vec<BTreeSet<Key>>> {
    let lim = db_select_limit(db, sub, selection)?;
    let leg = &lim.legs[0];
    let x = db.schema();
    Ok((0..x.len())
        .map(|s| {
            if sub.contains(s) {
                leg.sharp[s].values().cloned().collect()
            } else {
                BTreeSet::new()
            }
        })
        .collect())
}

/// Keys with some face restriction (themselves included) in `marked`.
pub fn closure_of(db: &Database, marked: &[BTreeSet<Key>]) -> Vec<BTreeSet<Key>> {
    let x = db.schema();
    (0..x.len())
        .map(|s| {
            let mut faces = x.proper_faces(s);
            faces.push((s, (0..=x.dim(s)).collect()));
            db.keys(s)
                .iter()
                .filter(|k| {
                    faces.iter().any(|(f, keep)| {
                        !marked[*f].is_empty()
                            && db
                                .sheaf
                                .restrict_to(s, k, keep)
                                .is_some_and(|(_, r)| marked[*f].contains(r))
                    })
                })
                .cloned()
                .collect()
        })
        .collect()
}

/// Removes the given keys; the caller guarantees the removed set is closed under cofaces.
pub fn remove_keys(db: &Database, removed: &[BTreeSet<Key>]) -> Result<Database> {
    let x = db.schema();
    let sections = (0..x.len())
        .map(|s| {
            let keys: BTreeSet<Key> = db.keys(s).difference(&removed[s]).cloned().collect();
            let restrictions = db
                .sheaf
                .section(s)
                .restrictions
                .iter()
                .map(|m| m.iter().filter(|(k, _)| keys.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect())
                .collect();
            Section { keys, restrictions }
        })
        .collect();
    let records = (0..x.len())
        .map(|s| {
            db.data.records[s]
                .iter()
                .filter(|(k, _)| !removed[s].contains(*k))
                .map(|(k, r)| (k.clone(), r.clone()))
                .collect()
        })
        .collect();
    Database::new(KeySheaf::new(x.clone(), sections)?, DataMap { records })
}

pub fn db_delete(db: &Database, sub: &Subschema, selection: &Database) -> Result<Database> {
    let selected = selected_keys(db, sub, selection)?;
    remove_keys(db, &closure_of(db, &selected))
}

pub fn to_relational(db: &Database) -> Database {
    let (k, d) = image_data(&db.sheaf, &db.data);
    Database { sheaf: k, data: d }
}

pub fn is_relational(db: &Database) -> bool {
    db.data.records.iter().all(|m| {
        let mut seen = std::collections::HashSet::new();
        m.values().all(|r| seen.insert(r))
    })
}

/// The morphism `db → to_relational(db)` sending each key to its record's representative.
pub fn relational_unit(db: &Database) -> DbMorphism {
    let rel = to_relational(db);
    let x = db.schema();
    DbMorphism {
        schema_map: SchemaMorphism::identity(x),
        sharp: (0..x.len())
            .map(|s| {
                let reps: HashMap<&Record, &Key> = rel.data.records[s].iter().map(|(k, r)| (r, k)).collect();
                db.data.records[s].iter().map(|(k, r)| (k.clone(), reps[r].clone())).collect()
            })
            .collect(),
        integrity: true,
    }
}

/// The constant sheaf of a table on the full simplex of its schema.
pub fn from_table(t: &Table) -> Database {
    let x = simplex_schema(t.schema());
    let keys: BTreeSet<Key> = t.keys().cloned().collect();
    let ident: BTreeMap<Key, Key> = keys.iter().map(|k| (k.clone(), k.clone())).collect();
    let sections = (0..x.len())
        .map(|s| Section {
            keys: keys.clone(),
            restrictions: vec![ident.clone(); x.faces(s).len()],
        })
        .collect();
    let records = (0..x.len())
        .map(|s| t.rows().iter().map(|(k, r)| (k.clone(), r.project(x.vertices(s)))).collect())
        .collect();
    Database {
        sheaf: KeySheaf::new(x, sections).expect("one section per simplex"),
        data: DataMap { records },
    }
}

/// All global matching families as one table over every vertex.
pub fn global_table(db: &Database) -> Result<Table> {
    global_table_of(&db.to_cylinder())
}

pub fn global_table_of(c: &CylinderSheaf) -> Result<Table> {
    let vc = vertex_classifier(c.base());
    let Some(top) = vc.top() else {
        let fams = evaluate_on_subschema(c.sheaf(), &Subschema::empty());
        let rows = fams.iter().map(|f| (f.serialize(c.base(), &[]), Record(vec![])));
        return Table::new(vc.columns, rows);
    };
    let rows = pushforward_rows_at(&vc.map, c, top)?;
    let spec = c.base().spec();
    let mut out = Vec::with_capacity(rows.len());
    for (key, partial, _) in rows {
        let free: Vec<usize> = (0..partial.len()).filter(|&j| partial[j].is_none()).collect();
        if free.is_empty() {
            out.push((key, Record(partial.into_iter().map(|v| v.expect("total")).collect())));
            continue;
        }
        let mut domains = Vec::with_capacity(free.len());
        for &j in &free {
            let t = &vc.columns.attributes()[j].type_name;
            domains.push(spec.enumerate_domain(t).map_err(|_| {
                Error::NonFiniteResult(format!("column `{}` is unconstrained", vc.columns.attributes()[j].name))
            })?);
        }
        let mut idx = vec![0usize; free.len()];
        'outer: loop {
            let mut values = partial.clone();
            for (n, &j) in free.iter().enumerate() {
                values[j] = Some(domains[n][idx[n]].clone());
            }
            let tail: Vec<String> = free.iter().map(|&j| values[j].as_ref().expect("set").to_string()).collect();
            out.push((format!("{key}|{}", tail.join(",")), Record(values.into_iter().map(|v| v.expect("set")).collect())));
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
    Table::new(vc.columns, out)
}

/// The unit `t → global_table(from_table(t))`.
pub fn table_unit(t: &Table) -> Result<TableMorphism> {
    let ft = from_table(t);
    let g = global_table(&ft)?;
    let x = ft.schema();
    let maximal = x.maximal(&x.all());
    let key_map = t
        .keys()
        .map(|k| {
            let fam = Family {
                assignment: (0..x.len()).map(|s| (s, k.clone())).collect(),
            };
            (k.clone(), fam.serialize(x, &maximal))
        })
        .collect::<Vec<_>>();
    let schema_map = SimpleSchemaMorphism::new(g.schema().clone(), t.schema().clone(), (0..t.schema().len()).collect())?;
    Ok(TableMorphism::new(t, &g, key_map, schema_map))
}

/// The counit `from_table(global_table(db)) → db`.
pub fn global_counit(db: &Database) -> Result<DbMorphism> {
    let g = global_table(db)?;
    let fg = from_table(&g);
    let vc = vertex_classifier(db.schema());
    let schema_map = SchemaMorphism::new(db.schema().clone(), fg.schema().clone(), vc.map.images().to_vec())?;
    let x = db.schema();
    let fams: Vec<(Key, Family)> = evaluate_on_subschema(&db.sheaf, &x.all())
        .into_iter()
        .map(|f| (f.serialize(x, &x.maximal(&x.all())), f))
        .collect();
    let sharp = (0..x.len())
        .map(|s| fams.iter().filter(|(k, _)| g.row(k).is_some()).map(|(k, f)| (k.clone(), f.get(s).expect("global").clone())).collect())
        .collect();
    Ok(DbMorphism { schema_map, sharp, integrity: true })
}

/// `from_table` on morphisms.
pub fn from_table_morphism(m: &TableMorphism) -> Result<DbMorphism> {
    let a = from_table(&m.source);
    let b = from_table(&m.target);
    let (xa, xb) = (a.schema(), b.schema());
    let vmap: HashMap<usize, usize> = m.schema_map.map().iter().enumerate().map(|(i, &j)| (i, j)).collect();
    let schema_map = SchemaMorphism::from_vertex_map(xb, xa, &vmap)?;
    let sharp = (0..xb.len()).map(|_| m.key_map.clone()).collect();
    Ok(DbMorphism { schema_map, sharp, integrity: true })
}

/// `global_table` on morphisms `a → b`.
pub fn global_table_morphism(m: &DbMorphism, a: &Database, b: &Database) -> Result<TableMorphism> {
    let ga = global_table(a)?;
    let gb = global_table(b)?;
    let (xa, xb) = (a.schema(), b.schema());
    let g = &m.schema_map;
    let max_a = xa.maximal(&xa.all());
    let max_b = xb.maximal(&xb.all());
    let mut key_map = Vec::new();
    for fam in evaluate_on_subschema(&a.sheaf, &xa.all()) {
        let assignment: Option<Vec<(usize, Key)>> = (0..xb.len())
            .map(|y| {
                fam.get(g.image(y).target)
                    .and_then(|k| m.sharp[y].get(k))
                    .map(|v| (y, v.clone()))
            })
            .collect();
        let assignment = assignment.ok_or_else(|| Error::InvalidMorphism("key map is not total".into()))?;
        key_map.push((fam.serialize(xa, &max_a), Family { assignment }.serialize(xb, &max_b)));
    }
    let cols_a: Vec<usize> = xa.vertex_ids().collect();
    let cols_b: Vec<usize> = xb.vertex_ids().collect();
    let map = cols_b
        .iter()
        .map(|&v| cols_a.iter().position(|&w| w == g.image(v).target).expect("vertices go to vertices"))
        .collect();
    let schema_map = SimpleSchemaMorphism::new(gb.schema().clone(), ga.schema().clone(), map)?;
    Ok(TableMorphism::new(&ga, &gb, key_map, schema_map))
}

pub fn db_pullback_along(f: &SchemaMorphism, db: &Database) -> Result<Database> {
    Database::from_cylinder(&pullback(f, &db.to_cylinder())?)
}

pub fn db_pushforward(f: &SchemaMorphism, db: &Database) -> Result<CylinderSheaf> {
    pushforward_plus(f, &db.to_cylinder())
}

pub fn db_extend(f: &SchemaMorphism, db: &Database) -> Result<Database> {
    Database::from_cylinder(&extend_by_empty(f, &db.to_cylinder())?)
}

/// The initial database: the empty sheaf over the terminal schema. That schema is finite
/// only when there is at most one type; otherwise it has simplices of every dimension.
pub fn initial_database(spec: &Arc<TypeSpec>) -> Result<Database> {
    let types: Vec<&str> = spec.types().map(|(n, _)| n).collect();
    match types.as_slice() {
        [] => Ok(Database::empty(&Schema::empty(spec.clone()))),
        [t] => {
            let x = Schema::builder(spec.clone()).vertex(t, t, t).build()?;
            Ok(Database::empty(&x))
        }
        _ => Err(Error::InitialNotMaterializable(format!(
            "{} types give a terminal schema with simplices in every dimension",
            types.len()
        ))),
    }
}

pub fn view_extract(db: &Database, sub: &Subschema) -> Result<Database> {
    db_project(db, sub)
}

/// Commits an edited view (the old view plus new rows) back into the database.
pub fn view_commit_insert(db: &Database, sub: &Subschema, edited: &Database) -> Result<Database> {
    let x = db.schema();
    let inc = x.restrict_to(sub)?;
    let view = db_project(db, sub)?;
    let edited = edited
        .rebase(inc.source())
        .map_err(|_| Error::SchemaMismatch("edited view is not on the view's schema".into()))?;
    for s in 0..inc.source().len() {
        for k in view.keys(s) {
            if edited.record(s, k) != view.record(s, k)
                || (0..inc.source().faces(s).len()).any(|i| edited.sheaf.restrict(s, i, k) != view.sheaf.restrict(s, i, k))
            {
                return Err(Error::InvalidDatabase(format!(
                    "edited view changes existing key {k} at `{}`",
                    inc.source().id(s)
                )));
            }
        }
    }
    let ext_view = extend_by_empty(&inc, &view.to_cylinder())?;
    let ext_edit = extend_by_empty(&inc, &edited.to_cylinder())?;
    let ident = |c: &CylinderSheaf| -> Vec<BTreeMap<Key, Key>> {
        (0..x.len()).map(|s| c.sheaf().keys(s).iter().map(|k| (k.clone(), k.clone())).collect()).collect()
    };
    let arrows = vec![
        SheafArrow { source: 1, target: 0, maps: ident(&ext_view) },
        SheafArrow { source: 1, target: 2, maps: ident(&ext_view) },
    ];
    let col = sheaf_colimit(x, &[db.to_cylinder(), ext_view, ext_edit], &arrows)?;
    let merged = Database::from_cylinder(&col.cylinder)?;
    let mut rename: Vec<BTreeMap<Key, Key>> = vec![BTreeMap::new(); x.len()];
    for s in 0..x.len() {
        for k in db.keys(s) {
            rename[s].insert(col.injections[0][s][k].clone(), k.clone());
        }
        for k in col.injections[2][s].keys() {
            let class = &col.injections[2][s][k];
            if rename[s].contains_key(class) {
                continue;
            }
            let name = if db.keys(s).contains(k) { format!("new:{k}") } else { k.clone() };
            rename[s].insert(class.clone(), name);
        }
    }
    merged.rename_keys(&rename)
}

/// Deletes view keys (and everything resting on them) through the pushforward along the view.
pub fn view_commit_delete(db: &Database, sub: &Subschema, deleted: &[BTreeSet<Key>]) -> Result<Database> {
    let x = db.schema();
    let inc = x.restrict_to(sub)?;
    let view = db_project(db, sub)?;
    if deleted.len() != inc.source().len() {
        return Err(Error::InvalidDatabase("one deleted-key set per view simplex".into()));
    }
    let closed = closure_of(&view, deleted);
    let kept = remove_keys(&view, &closed)?;
    let pf_view = pushforward_plus_detailed(&inc, &view.to_cylinder())?;
    let pf_kept = pushforward_plus_detailed(&inc, &kept.to_cylinder())?;
    let unit = restriction_family_arrow(&inc, &db.sheaf, 0, 1, &pf_view);
    let along = SheafArrow {
        source: 2,
        target: 1,
        maps: (0..x.len())
            .map(|s| pf_kept.families[s].keys().map(|k| (k.clone(), k.clone())).collect())
            .collect(),
    };
    let lim = sheaf_limit(
        x,
        &[db.to_cylinder(), pf_view.cylinder.clone(), pf_kept.cylinder.clone()],
        &[unit, along],
    )?;
    let result = Database::from_cylinder(&lim.cylinder)?;
    let rename: Vec<BTreeMap<Key, Key>> = lim
        .components
        .iter()
        .map(|m| m.iter().map(|(k, parts)| (k.clone(), parts[0].clone())).collect())
        .collect();
    result.rename_keys(&rename)
}

/// Keys renamed `k0, k1, ...` per simplex in sorted order, with the old names.
pub fn canonicalize_keys(db: &Database) -> Result<(Database, Vec<BTreeMap<Key, Key>>)> {
    let maps: Vec<BTreeMap<Key, Key>> = (0..db.schema().len())
        .map(|s| db.keys(s).iter().enumerate().map(|(i, k)| (k.clone(), format!("k{i}"))).collect())
        .collect();
    let renamed = db.rename_keys(&maps)?;
    let provenance = maps
        .into_iter()
        .map(|m| m.into_iter().map(|(old, new)| (new, old)).collect())
        .collect();
    Ok((renamed, provenance))
}

pub fn canonicalize_table_keys(t: &Table) -> Result<(Table, BTreeMap<Key, Key>)> {
    let mut provenance = BTreeMap::new();
    let rows: Vec<(Key, Record)> = t
        .rows()
        .iter()
        .enumerate()
        .map(|(i, (k, r))| {
            provenance.insert(format!("k{i}"), k.clone());
            (format!("k{i}"), r.clone())
        })
        .collect();
    Ok((Table::new(t.schema().clone(), rows)?, provenance))
}

pub const ISO_SEARCH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbIsomorphism {
    pub simplex_map: Vec<usize>,
    pub key_maps: Vec<BTreeMap<Key, Key>>,
}

fn hash_of<T: Hash>(t: &T) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

/// Color refinement of keys by record and by the colors of faces and cofaces.
fn key_colors(db: &Database) -> Vec<BTreeMap<Key, u64>> {
    let x = db.schema();
    let mut colors: Vec<BTreeMap<Key, u64>> = (0..x.len())
        .map(|s| db.keys(s).iter().map(|k| (k.clone(), hash_of(&(x.dim(s), db.record(s, k))))).collect())
        .collect();
    let rounds = x.max_dim().unwrap_or(0) + 2;
    for _ in 0..rounds {
        let mut up: Vec<BTreeMap<&Key, Vec<(usize, u64)>>> = vec![BTreeMap::new(); x.len()];
        for s in 0..x.len() {
            for k in db.keys(s) {
                for i in 0..x.faces(s).len() {
                    if let Some(fk) = db.sheaf.restrict(s, i, k) {
                        up[x.face(s, i)].entry(fk).or_default().push((i, colors[s][k]));
                    }
                }
            }
        }
        let next = (0..x.len())
            .map(|s| {
                db.keys(s)
                    .iter()
                    .map(|k| {
                        let down: Vec<u64> = (0..x.faces(s).len())
                            .map(|i| db.sheaf.restrict(s, i, k).map(|fk| colors[x.face(s, i)][fk]).unwrap_or(0))
                            .collect();
                        let mut ups = up[s].get(k).cloned().unwrap_or_default();
                        ups.sort_unstable();
                        (k.clone(), hash_of(&(colors[s][k], down, ups)))
                    })
                    .collect()
            })
            .collect();
        colors = next;
    }
    colors
}

/// Searches for an isomorphism ignoring simplex ids, vertex names and key names.
pub fn find_isomorphism(a: &Database, b: &Database) -> Result<Option<DbIsomorphism>> {
    let (xa, xb) = (a.schema(), b.schema());
    if (0..xa.len()).map(|s| a.keys(s).len()).sum::<usize>() != (0..xb.len()).map(|s| b.keys(s).len()).sum::<usize>() {
        return Ok(None);
    }
    let ca = key_colors(a);
    let cb = key_colors(b);
    let mut budget = ISO_SEARCH_CAP;
    for phi in schema_isomorphisms(xa, xb, 64) {
        let counts_match = (0..xa.len()).all(|s| {
            let mut p: Vec<u64> = ca[s].values().copied().collect();
            let mut q: Vec<u64> = cb[phi[s]].values().copied().collect();
            p.sort_unstable();
            q.sort_unstable();
            p == q
        });
        if !counts_match {
            continue;
        }
        let mut order: Vec<(usize, &Key)> = Vec::new();
        let mut simplices: Vec<usize> = (0..xa.len()).collect();
        simplices.sort_by_key(|&s| xa.dim(s));
        for s in simplices {
            for k in a.keys(s) {
                order.push((s, k));
            }
        }
        let mut psi: Vec<BTreeMap<Key, Key>> = vec![BTreeMap::new(); xa.len()];
        let mut used: Vec<BTreeSet<Key>> = vec![BTreeSet::new(); xa.len()];
        #[allow(clippy::too_many_arguments)]
        fn go(
            i: usize,
            order: &[(usize, &Key)],
            a: &Database,
            b: &Database,
            phi: &[usize],
            ca: &[BTreeMap<Key, u64>],
            cb: &[BTreeMap<Key, u64>],
            psi: &mut Vec<BTreeMap<Key, Key>>,
            used: &mut Vec<BTreeSet<Key>>,
            budget: &mut usize,
        ) -> Result<bool> {
            if i == order.len() {
                return Ok(true);
            }
            let (s, k) = order[i];
            let t = phi[s];
            let xa = a.schema();
            for cand in b.keys(t) {
                if *budget == 0 {
                    return Err(Error::TooLarge(format!("isomorphism search exceeded {ISO_SEARCH_CAP} steps")));
                }
                *budget -= 1;
                if used[s].contains(cand) || ca[s][k] != cb[t][cand] || a.record(s, k) != b.record(t, cand) {
                    continue;
                }
                let faces_ok = (0..xa.faces(s).len()).all(|f| {
                    let fa = a.sheaf.restrict(s, f, k);
                    let fb = b.sheaf.restrict(t, f, cand);
                    match (fa, fb) {
                        (Some(fa), Some(fb)) => psi[xa.face(s, f)].get(fa) == Some(fb),
                        _ => false,
                    }
                });
                if !faces_ok {
                    continue;
                }
                psi[s].insert(k.clone(), cand.clone());
                used[s].insert(cand.clone());
                if go(i + 1, order, a, b, phi, ca, cb, psi, used, budget)? {
                    return Ok(true);
                }
                psi[s].remove(k);
                used[s].remove(cand);
            }
            Ok(false)
        }
        if go(0, &order, a, b, &phi, &ca, &cb, &mut psi, &mut used, &mut budget)? {
            return Ok(Some(DbIsomorphism { simplex_map: phi, key_maps: psi }));
        }
    }
    Ok(None)
}

pub fn is_isomorphic(a: &Database, b: &Database) -> Result<bool> {
    Ok(find_isomorphism(a, b)?.is_some())
}

/// Every morphism `a → b` in the category of databases on one schema (identity schema map).
pub fn enumerate_homs(a: &CylinderSheaf, b: &CylinderSheaf, cap: usize) -> Result<Vec<Vec<BTreeMap<Key, Key>>>> {
    let x = a.base();
    if **x != **b.base() {
        return Err(Error::SchemaMismatch("hom-sets are taken over one schema".into()));
    }
    let mut order: Vec<(usize, &Key)> = Vec::new();
    let mut simplices: Vec<usize> = (0..x.len()).collect();
    simplices.sort_by_key(|&s| x.dim(s));
    for s in simplices {
        for k in a.sheaf().keys(s) {
            order.push((s, k));
        }
    }
    let mut out = Vec::new();
    let mut h: Vec<BTreeMap<Key, Key>> = vec![BTreeMap::new(); x.len()];
    fn go(
        i: usize,
        order: &[(usize, &Key)],
        a: &CylinderSheaf,
        b: &CylinderSheaf,
        h: &mut Vec<BTreeMap<Key, Key>>,
        out: &mut Vec<Vec<BTreeMap<Key, Key>>>,
        cap: usize,
    ) -> Result<()> {
        if i == order.len() {
            if out.len() >= cap {
                return Err(Error::TooLarge(format!("more than {cap} morphisms")));
            }
            out.push(h.clone());
            return Ok(());
        }
        let (s, k) = order[i];
        let x = a.base();
        let arow = a.row(s, k).expect("row");
        for cand in b.sheaf().keys(s) {
            let brow = b.row(s, cand).expect("row");
            if brow.iter().zip(arow).any(|(bv, av)| bv.is_some() && bv != av) {
                continue;
            }
            let natural = (0..x.faces(s).len()).all(|f| {
                match (a.sheaf().restrict(s, f, k), b.sheaf().restrict(s, f, cand)) {
                    (Some(fa), Some(fb)) => h[x.face(s, f)].get(fa) == Some(fb),
                    _ => false,
                }
            });
            if !natural {
                continue;
            }
            h[s].insert(k.clone(), cand.clone());
            go(i + 1, order, a, b, h, out, cap)?;
            h[s].remove(k);
        }
        Ok(())
    }
    go(0, &order, a, b, &mut h, &mut out, cap)?;
    Ok(out)
}

/// The transpose of `h: f*A → B` under pullback ⊣ pushforward: a morphism `A → f₊B`.
pub fn transpose_to_pushforward(
    f: &SchemaMorphism,
    a: &KeySheaf,
    pushed: &Pushforward,
    h: &[BTreeMap<Key, Key>],
) -> Option<Vec<BTreeMap<Key, Key>>> {
    let (y, x) = (f.source(), f.target());
    (0..x.len())
        .map(|s| {
            let p = f.preimage_subschema(&x.closure([s]));
            let maximal = y.maximal(&p);
            let sv = x.vertices(s);
            a.keys(s)
                .iter()
                .map(|k| {
                    let assignment: Option<Vec<(usize, Key)>> = p
                        .iter()
                        .map(|ys| {
                            let t = f.image(ys).target;
                            let mut keep: Vec<usize> = x
                                .vertices(t)
                                .iter()
                                .map(|v| sv.iter().position(|w| w == v).expect("face"))
                                .collect();
                            keep.sort_unstable();
                            let (_, rk) = a.restrict_to(s, k, &keep)?;
                            h[ys].get(rk).map(|v| (ys, v.clone()))
                        })
                        .collect();
                    let name = Family { assignment: assignment? }.serialize(y, &maximal);
                    pushed.families[s].contains_key(&name).then(|| (k.clone(), name))
                })
                .collect()
        })
        .collect()
}

/// The transpose of `h: f₍!₎A → B` under extension ⊣ pullback, for monic `f`.
pub fn transpose_from_extension(f: &SchemaMorphism, h: &[BTreeMap<Key, Key>]) -> Vec<BTreeMap<Key, Key>> {
    (0..f.source().len()).map(|y| h[f.image(y).target].clone()).collect()
}

/// Free positions of `s` in a record, for building selections from raw values.
pub fn single_row_database(schema: &Arc<Schema>, values: &[(usize, Value)], key: &str) -> Result<Database> {
    let mut b = Database::builder(schema);
    for (v, value) in values {
        b = b.rows(schema.id(*v), vec![(key, vec![value.payload().clone()])]);
    }
    for s in 0..schema.len() {
        if schema.dim(s) > 0 {
            b = b.keys(schema.id(s), &[key]);
            for i in 0..schema.faces(s).len() {
                b = b.restrict(schema.id(s), i, &[(key, key)]);
            }
        }
    }
    b.build()
}

/// The image of `s` under a leg, for callers that need to locate simplices across a limit.
pub fn leg_target(leg: &DbMorphism, s: usize) -> &SimplexImage {
    leg.schema_map.image(s)
}

/// The database as plain sets and maps, for the brute-force oracle.
pub fn to_explicit_sections(db: &Database) -> ExplicitSections {
    let x = db.schema();
    let vertices: Vec<usize> = x.vertex_ids().collect();
    let names = x.column_names(&vertices);
    ExplicitSections {
        simplices: (0..x.len())
            .map(|s| ExplicitSimplex {
                id: x.id(s).to_string(),
                faces: x.faces(s).to_vec(),
                keys: db.keys(s).iter().cloned().collect(),
                restrictions: db.sheaf.section(s).restrictions.clone(),
                column: vertices.iter().position(|&v| v == s).map(|j| {
                    (
                        names[j].clone(),
                        x.vertex_type(s).to_string(),
                        db.data.records[s].iter().map(|(k, r)| (k.clone(), r.values()[0].clone())).collect(),
                    )
                }),
            })
            .collect(),
    }
}

pub fn violations(db: &Database) -> Vec<Violation> {
    validate_sheaf_and_data(&db.sheaf, &db.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simple_schema::SimpleSchema;

    fn spec() -> Arc<TypeSpec> {
        Arc::new(TypeSpec::standard())
    }

    fn edge_schema(s: &Arc<TypeSpec>) -> Arc<Schema> {
        Schema::builder(s.clone())
            .vertex("First", "First", "Str")
            .vertex("BYear", "BYear", "Z")
            .simplex("e", &["BYear", "First"])
            .build()
            .unwrap()
    }

    fn worked(s: &Arc<TypeSpec>) -> Database {
        Database::builder(&edge_schema(s))
            .rows("First", vec![("1", vec!["Barack".into()]), ("2", vec!["Michelle".into()])])
            .rows("BYear", vec![("x", vec![1961.into()]), ("y", vec![1946.into()]), ("z", vec![1964.into()])])
            .keys("e", &["4", "cc", "10"])
            .restrict("e", 0, &[("4", "x"), ("cc", "z"), ("10", "z")])
            .restrict("e", 1, &[("4", "1"), ("cc", "2"), ("10", "2")])
            .build()
            .unwrap()
    }

    fn barack(db: &Database) -> (Subschema, Database) {
        let x = db.schema();
        let sub = x.subschema_of_ids(&["First"]).unwrap();
        let inc = x.restrict_to(&sub).unwrap();
        let sel = Database::builder(inc.source())
            .rows("First", vec![("b", vec!["Barack".into()])])
            .build()
            .unwrap();
        (sub, sel)
    }

    #[test]
    fn forced_records() {
        let s = spec();
        let db = worked(&s);
        assert_eq!(db.record(2, "4").unwrap().to_string(), "(Barack; 1961)");
        assert_eq!(db.record(2, "10").unwrap().to_string(), "(Michelle; 1964)");
    }

    #[test]
    fn global_table_of_worked_example() {
        let s = spec();
        let g = global_table(&worked(&s)).unwrap();
        assert_eq!(g.len(), 3);
        let names: Vec<&str> = g.schema().attributes().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["First", "BYear"]);
        assert_eq!(g.row("(e:4)").unwrap().to_string(), "(Barack; 1961)");
    }

    #[test]
    fn select_and_delete() {
        let s = spec();
        let db = worked(&s);
        let (sub, sel) = barack(&db);
        let out = db_select(&db, &sub, &sel).unwrap();
        assert_eq!(out.keys(2).len(), 1);
        let sk = selected_keys(&db, &sub, &sel).unwrap();
        assert_eq!(sk[0], ["1".to_string()].into_iter().collect());
        let del = db_delete(&db, &sub, &sel).unwrap();
        assert_eq!(del.keys(0).iter().collect::<Vec<_>>(), ["2"]);
        assert_eq!(del.keys(2).len(), 2);
        assert!(!del.keys(2).contains("4"));
        assert_eq!(del.keys(1).len(), 3);
        let again = db_select(&del, &sub, &sel).unwrap();
        assert_eq!(again.sheaf().total_keys(), again.keys(1).len());
        let empty_sel = Database::empty(sel.schema());
        assert_eq!(db_delete(&db, &sub, &empty_sel).unwrap(), db);
    }

    #[test]
    fn view_delete_matches_delete() {
        let s = spec();
        let db = worked(&s);
        let (sub, sel) = barack(&db);
        let selected = selected_keys(&db, &sub, &sel).unwrap();
        let deleted: Vec<BTreeSet<Key>> = sub.iter().map(|s| selected[s].clone()).collect();
        let via_view = view_commit_delete(&db, &sub, &deleted).unwrap();
        assert_eq!(via_view, db_delete(&db, &sub, &sel).unwrap());
    }

    #[test]
    fn projections() {
        let s = spec();
        let db = worked(&s);
        let x = db.schema();
        assert_eq!(db_project(&db, &x.all()).unwrap(), db);
        let v = db_project(&db, &x.subschema_of_ids(&["First"]).unwrap()).unwrap();
        assert_eq!(v.record(0, "1").unwrap().to_string(), "(Barack)");
        assert_eq!(v.keys(0).len(), 2);
        assert!(db_project(&db, &Subschema::empty()).unwrap().schema().is_empty());
    }

    #[test]
    fn relational() {
        let s = spec();
        let db = worked(&s);
        assert!(!is_relational(&db));
        let r = to_relational(&db);
        assert_eq!(r.keys(2).len(), 2);
        assert_eq!(to_relational(&r), r);
        assert!(validate_db_morphism(&db.to_cylinder(), &r.to_cylinder(), &relational_unit(&db)).unwrap().is_empty());
    }

    #[test]
    fn table_round_trip() {
        let s = spec();
        let sigma = SimpleSchema::from_pairs(&s, &[("First", "Str"), ("Last", "Str"), ("Age", "Z")]).unwrap();
        let t = Table::from_raw(
            sigma,
            vec![
                ("1", vec!["Barack".into(), "Obama".into(), 1961.into()]),
                ("2", vec!["Michelle".into(), "Obama".into(), 1964.into()]),
                ("foo", vec!["Barack".into(), "Obama".into(), 1961.into()]),
            ],
        )
        .unwrap();
        let g = global_table(&from_table(&t)).unwrap();
        assert_eq!(g.record_multiset(), t.record_multiset());
        let unit = table_unit(&t).unwrap();
        assert!(crate::table::validate_table_morphism(&unit).unwrap());
    }

    #[test]
    fn coproducts_and_unions() {
        let s = spec();
        let db = worked(&s);
        let both = coproduct(&db, &db).unwrap();
        assert_eq!(both.keys(2).len(), 6);
        let u = union_by_records(&db, &db).unwrap();
        assert_eq!(u.keys(2).len(), 2);
    }

    #[test]
    fn isomorphism_of_renamed() {
        let s = spec();
        let db = worked(&s);
        let (c, prov) = canonicalize_keys(&db).unwrap();
        assert!(is_isomorphic(&db, &c).unwrap());
        assert_eq!(prov[2]["k0"], "10");
        let r = to_relational(&db);
        assert!(!is_isomorphic(&db, &r).unwrap());
    }

    #[test]
    fn limit_of_one_object() {
        let s = spec();
        let db = worked(&s);
        let lim = db_limit(&DbDiagram { objects: vec![db.to_cylinder()], arrows: vec![] }).unwrap();
        assert!(is_isomorphic(&lim.database().unwrap(), &db).unwrap());
    }

    #[test]
    fn product_with_final() {
        let s = spec();
        let db = worked(&s);
        let x = db.schema();
        let id = SchemaMorphism::identity(x);
        let lim = db_join(&db.to_cylinder(), &CylinderSheaf::universal(x), &id, &id).unwrap();
        assert!(is_isomorphic(&lim.database().unwrap(), &db).unwrap());
    }

    #[test]
    fn initial() {
        let s = spec();
        assert!(matches!(initial_database(&s), Err(Error::InitialNotMaterializable(_))));
        let one = Arc::new(TypeSpec::new([("B", crate::typespec::DataTypeDomain::Bool)]).unwrap());
        assert_eq!(initial_database(&one).unwrap().schema().len(), 1);
    }
}
