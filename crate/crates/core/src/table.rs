//! Keyed tables over a simple schema and the relational operations on them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::simple_schema::{
    enumerate_morphisms, pushout_simple_schema, Attribute, Record, SimpleSchema,
    SimpleSchemaMorphism,
};
use crate::typespec::{Payload, TypeSpec};
use crate::unionfind::UnionFind;

pub type Key = String;

pub fn pair_key(a: &str, b: &str) -> Key {
    format!("({a},{b})")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    schema: SimpleSchema,
    rows: BTreeMap<Key, Record>,
}

impl Table {
    pub fn new(schema: SimpleSchema, rows: impl IntoIterator<Item = (Key, Record)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, r) in rows {
            if !schema.is_valid_record(&r) {
                return Err(Error::InvalidTable(format!("row `{k}` = {r} does not fit {schema}")));
            }
            if map.insert(k.clone(), r).is_some() {
                return Err(Error::InvalidTable(format!("duplicate key `{k}`")));
            }
        }
        Ok(Table { schema, rows: map })
    }

    pub fn from_raw(schema: SimpleSchema, rows: Vec<(&str, Vec<Payload>)>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|(k, raw)| Ok((k.to_string(), schema.check_record(raw)?)))
            .collect::<Result<Vec<_>>>()?;
        Table::new(schema, rows)
    }

    pub fn schema(&self) -> &SimpleSchema {
        &self.schema
    }

    pub fn rows(&self) -> &BTreeMap<Key, Record> {
        &self.rows
    }

    pub fn row(&self, key: &str) -> Option<&Record> {
        self.rows.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.rows.keys()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_relational(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.rows.values().all(|r| seen.insert(r))
    }

    /// Records sorted, duplicates kept.
    pub fn record_multiset(&self) -> Vec<Record> {
        let mut v: Vec<Record> = self.rows.values().cloned().collect();
        v.sort();
        v
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<String> = std::iter::once("key".to_string())
            .chain(self.schema.attributes().iter().map(|a| a.name.clone()))
            .collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(k, r)| {
                std::iter::once(k.clone())
                    .chain(r.values().iter().map(|v| v.to_string()))
                    .collect()
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        for row in std::iter::once(&header).chain(&body) {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            writeln!(f, "{}", cells.join(" | ").trim_end())?;
        }
        Ok(())
    }
}

/// A key map running with the arrow and a schema map running against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMorphism {
    pub source: Table,
    pub target: Table,
    pub key_map: BTreeMap<Key, Key>,
    pub schema_map: SimpleSchemaMorphism,
}

impl TableMorphism {
    pub fn new(
        source: &Table,
        target: &Table,
        key_map: impl IntoIterator<Item = (Key, Key)>,
        schema_map: SimpleSchemaMorphism,
    ) -> Self {
        TableMorphism {
            source: source.clone(),
            target: target.clone(),
            key_map: key_map.into_iter().collect(),
            schema_map,
        }
    }

    pub fn identity(t: &Table) -> Self {
        TableMorphism {
            source: t.clone(),
            target: t.clone(),
            key_map: t.keys().map(|k| (k.clone(), k.clone())).collect(),
            schema_map: SimpleSchemaMorphism::identity(&t.schema),
        }
    }

    pub fn then(&self, other: &TableMorphism) -> Result<TableMorphism> {
        if self.target != other.source {
            return Err(Error::Composition("table morphisms do not meet".into()));
        }
        let key_map = self
            .key_map
            .iter()
            .map(|(k, v)| {
                other
                    .key_map
                    .get(v)
                    .map(|w| (k.clone(), w.clone()))
                    .ok_or_else(|| Error::InvalidMorphism(format!("key `{v}` unmapped")))
            })
            .collect::<Result<_>>()?;
        Ok(TableMorphism {
            source: self.source.clone(),
            target: other.target.clone(),
            key_map,
            schema_map: other.schema_map.then(&self.schema_map)?,
        })
    }
}

pub fn validate_table_morphism(m: &TableMorphism) -> Result<bool> {
    if m.schema_map.source() != m.target.schema() || m.schema_map.target() != m.source.schema() {
        return Err(Error::Direction(
            "the schema map must run from the target's schema to the source's".into(),
        ));
    }
    if m.key_map.len() != m.source.len() {
        return Ok(false);
    }
    for (k, r) in m.source.rows() {
        let Some(img) = m.key_map.get(k) else { return Ok(false) };
        let Some(target_row) = m.target.row(img) else { return Ok(false) };
        if &m.schema_map.restrict_record(r) != target_row {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All valid morphisms `t1 → t2`.
pub fn enumerate_table_morphisms(t1: &Table, t2: &Table) -> Vec<TableMorphism> {
    let mut out = Vec::new();
    for f in enumerate_morphisms(t2.schema(), t1.schema()) {
        let keys: Vec<&Key> = t1.keys().collect();
        let choices: Vec<Vec<&Key>> = keys
            .iter()
            .map(|k| {
                let want = f.restrict_record(&t1.rows[*k]);
                t2.rows.iter().filter(|(_, r)| **r == want).map(|(k2, _)| k2).collect()
            })
            .collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; keys.len()];
        loop {
            out.push(TableMorphism {
                source: t1.clone(),
                target: t2.clone(),
                key_map: keys
                    .iter()
                    .zip(&idx)
                    .enumerate()
                    .map(|(i, (k, &j))| ((*k).clone(), choices[i][j].clone()))
                    .collect(),
                schema_map: f.clone(),
            });
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FiberProduct {
    pub table: Table,
    pub proj1: TableMorphism,
    pub proj2: TableMorphism,
}

fn amalgamate(
    legs: (&SimpleSchemaMorphism, &SimpleSchemaMorphism),
    width: usize,
    r1: &Record,
    r2: &Record,
) -> Record {
    let mut out = vec![None; width];
    for (i, &p) in legs.0.map().iter().enumerate() {
        out[p] = Some(r1.0[i].clone());
    }
    for (i, &p) in legs.1.map().iter().enumerate() {
        if out[p].is_none() {
            out[p] = Some(r2.0[i].clone());
        }
    }
    Record(out.into_iter().map(|v| v.expect("pushout legs are jointly surjective")).collect())
}

fn fiber_from_pairs(
    t1: &Table,
    t2: &Table,
    f1: &SimpleSchemaMorphism,
    f2: &SimpleSchemaMorphism,
    pairs: Vec<(&Key, &Key)>,
) -> Result<FiberProduct> {
    let p = pushout_simple_schema(f1, f2)?;
    let width = p.schema.len();
    let mut rows = Vec::with_capacity(pairs.len());
    let mut k1s = Vec::new();
    let mut k2s = Vec::new();
    for (k1, k2) in pairs {
        let key = pair_key(k1, k2);
        rows.push((key.clone(), amalgamate((&p.leg1, &p.leg2), width, &t1.rows[k1], &t2.rows[k2])));
        k1s.push((key.clone(), k1.clone()));
        k2s.push((key, k2.clone()));
    }
    let table = Table::new(p.schema.clone(), rows)?;
    Ok(FiberProduct {
        proj1: TableMorphism::new(&table, t1, k1s, p.leg1),
        proj2: TableMorphism::new(&table, t2, k2s, p.leg2),
        table,
    })
}

pub fn table_fiber_product(m1: &TableMorphism, m2: &TableMorphism) -> Result<FiberProduct> {
    if m1.target != m2.target {
        return Err(Error::SchemaMismatch("fiber product legs have different targets".into()));
    }
    let mut by_image: HashMap<&Key, Vec<&Key>> = HashMap::new();
    for (k2, img) in &m2.key_map {
        by_image.entry(img).or_default().push(k2);
    }
    let mut pairs = Vec::new();
    for (k1, img) in &m1.key_map {
        for k2 in by_image.get(img).into_iter().flatten() {
            pairs.push((k1, *k2));
        }
    }
    fiber_from_pairs(&m1.source, &m2.source, &m1.schema_map, &m2.schema_map, pairs)
}

/// Fiber product over the universal table on a shared schema: rows pair up when their
/// restrictions agree. Hash join; the universal table itself is never built.
pub fn equi_join(
    t1: &Table,
    t2: &Table,
    f1: &SimpleSchemaMorphism,
    f2: &SimpleSchemaMorphism,
) -> Result<FiberProduct> {
    if f1.source() != f2.source() || f1.target() != t1.schema() || f2.target() != t2.schema() {
        return Err(Error::SchemaMismatch("join maps do not fit the tables".into()));
    }
    let mut index: HashMap<Record, Vec<&Key>> = HashMap::new();
    for (k2, r2) in t2.rows() {
        index.entry(f2.restrict_record(r2)).or_default().push(k2);
    }
    let mut pairs = Vec::new();
    for (k1, r1) in t1.rows() {
        for k2 in index.get(&f1.restrict_record(r1)).into_iter().flatten() {
            pairs.push((k1, *k2));
        }
    }
    fiber_from_pairs(t1, t2, f1, f2, pairs)
}

pub fn union_all(t1: &Table, t2: &Table) -> Result<Table> {
    if t1.schema != t2.schema {
        return Err(Error::SchemaMismatch(format!("{} vs {}", t1.schema, t2.schema)));
    }
    let rows = t1
        .rows
        .iter()
        .map(|(k, r)| (format!("1:{k}"), r.clone()))
        .chain(t2.rows.iter().map(|(k, r)| (format!("2:{k}"), r.clone())));
    Table::new(t1.schema.clone(), rows)
}

/// Pushout of `t1 ← overlap → t2` with the schema held fixed.
pub fn union_over(g1: &TableMorphism, g2: &TableMorphism) -> Result<Table> {
    if g1.source != g2.source {
        return Err(Error::SchemaMismatch("union legs start at different tables".into()));
    }
    let (t1, t2) = (&g1.target, &g2.target);
    if t1.schema != t2.schema || !g1.schema_map.is_identity() || !g2.schema_map.is_identity() {
        return Err(Error::SchemaMismatch("union requires one fixed schema".into()));
    }
    for g in [g1, g2] {
        if !validate_table_morphism(g)? {
            return Err(Error::InvalidMorphism("union leg fails its integrity check".into()));
        }
    }
    let tagged: Vec<(Key, &Record)> = t1
        .rows
        .iter()
        .map(|(k, r)| (format!("1:{k}"), r))
        .chain(t2.rows.iter().map(|(k, r)| (format!("2:{k}"), r)))
        .collect();
    let index: HashMap<&str, usize> = tagged.iter().enumerate().map(|(i, (k, _))| (k.as_str(), i)).collect();
    let mut uf = UnionFind::new(tagged.len());
    for k in g1.source.keys() {
        let a = index[format!("1:{}", g1.key_map[k]).as_str()];
        let b = index[format!("2:{}", g2.key_map[k]).as_str()];
        uf.union(a, b);
    }
    let (class, n) = uf.classes();
    let mut members: Vec<Vec<&str>> = vec![Vec::new(); n];
    for (i, (k, _)) in tagged.iter().enumerate() {
        members[class[i]].push(k);
    }
    let mut rows: Vec<Option<(Key, Record)>> = vec![None; n];
    for (i, (_, r)) in tagged.iter().enumerate() {
        if rows[class[i]].is_none() {
            rows[class[i]] = Some((members[class[i]].join("~"), (*r).clone()));
        }
    }
    Table::new(t1.schema.clone(), rows.into_iter().flatten())
}

pub fn project_table(t: &Table, attrs: &[&str]) -> Result<Table> {
    let inc = t.schema.restrict(attrs)?;
    Table::new(
        inc.source().clone(),
        t.rows.iter().map(|(k, r)| (k.clone(), inc.restrict_record(r))),
    )
}

pub fn select_table(t: &Table, attrs: &[&str], selection: &Table) -> Result<Table> {
    let inc = t.schema.restrict(attrs)?;
    if inc.source() != selection.schema() {
        return Err(Error::SchemaMismatch(format!(
            "selection has schema {}, expected {}",
            selection.schema(),
            inc.source()
        )));
    }
    let relational = selection.is_relational();
    let mut index: HashMap<&Record, Vec<&Key>> = HashMap::new();
    for (k, r) in selection.rows() {
        index.entry(r).or_default().push(k);
    }
    let mut rows = Vec::new();
    for (k, r) in t.rows() {
        for k2 in index.get(&inc.restrict_record(r)).into_iter().flatten() {
            let key = if relational { k.clone() } else { pair_key(k, k2) };
            rows.push((key, r.clone()));
        }
    }
    Table::new(t.schema.clone(), rows)
}

pub fn image_table(t: &Table) -> Table {
    let mut seen = std::collections::HashSet::new();
    let rows = t
        .rows
        .iter()
        .filter(|(_, r)| seen.insert(*r))
        .map(|(k, r)| (k.clone(), r.clone()))
        .collect();
    Table { schema: t.schema.clone(), rows }
}

pub fn terminal_table(spec: &Arc<TypeSpec>) -> Table {
    Table {
        schema: SimpleSchema::empty(spec.clone()),
        rows: [("*".to_string(), Record(vec![]))].into_iter().collect(),
    }
}

/// No rows, one column per declared type.
pub fn initial_table(spec: &Arc<TypeSpec>) -> Table {
    let attrs = spec.types().map(|(n, _)| Attribute::new(n, n)).collect();
    Table {
        schema: SimpleSchema::new(spec.clone(), attrs).expect("type names are distinct"),
        rows: BTreeMap::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> Arc<TypeSpec> {
        Arc::new(TypeSpec::standard())
    }

    fn obama(s: &Arc<TypeSpec>) -> Table {
        let sigma = SimpleSchema::from_pairs(s, &[("First Name", "Str"), ("Last Name", "Str"), ("Age", "Z")]).unwrap();
        Table::from_raw(
            sigma,
            vec![
                ("1", vec!["Barack".into(), "Obama".into(), 1961.into()]),
                ("2", vec!["Michelle".into(), "Obama".into(), 1964.into()]),
                ("foo", vec!["Barack".into(), "Obama".into(), 1961.into()]),
            ],
        )
        .unwrap()
    }

    fn names_table(s: &Arc<TypeSpec>) -> Table {
        let sigma = SimpleSchema::from_pairs(s, &[("First", "Str"), ("Last", "Str")]).unwrap();
        Table::from_raw(
            sigma,
            vec![
                ("5", vec!["Barack".into(), "Obama".into()]),
                ("6", vec!["Michelle".into(), "Obama".into()]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn morphism_into_projection() {
        let s = spec();
        let t1 = obama(&s);
        let t2 = names_table(&s);
        let f = SimpleSchemaMorphism::new(t2.schema().clone(), t1.schema().clone(), vec![0, 1]).unwrap();
        let m = TableMorphism::new(
            &t1,
            &t2,
            [("1", "5"), ("2", "6"), ("foo", "5")].map(|(a, b)| (a.to_string(), b.to_string())),
            f,
        );
        assert!(validate_table_morphism(&m).unwrap());
        assert_eq!(enumerate_table_morphisms(&t1, &t2).len(), 1);
        assert!(enumerate_table_morphisms(&t2, &t1).is_empty());
        assert!(validate_table_morphism(&TableMorphism::identity(&t1)).unwrap());
        let mut wrong = m.clone();
        wrong.schema_map = SimpleSchemaMorphism::identity(t1.schema());
        assert!(matches!(validate_table_morphism(&wrong), Err(Error::Direction(_))));
    }

    #[test]
    fn select_barack() {
        let s = spec();
        let t = obama(&s);
        let sel_schema = SimpleSchema::from_pairs(&s, &[("First Name", "Str")]).unwrap();
        let sel = Table::from_raw(sel_schema.clone(), vec![("b", vec!["Barack".into()])]).unwrap();
        let out = select_table(&t, &["First Name"], &sel).unwrap();
        assert_eq!(out.keys().cloned().collect::<Vec<_>>(), ["1", "foo"]);
        assert!(out.rows().values().all(|r| r.to_string() == "(Barack; Obama; 1961)"));
        let none = Table::new(sel_schema, vec![]).unwrap();
        assert!(select_table(&t, &["First Name"], &none).unwrap().is_empty());
    }

    #[test]
    fn projections() {
        let s = spec();
        let t = obama(&s);
        let p = project_table(&t, &["First Name", "Last Name"]).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.row("2").unwrap().to_string(), "(Michelle; Obama)");
        assert_eq!(project_table(&t, &["First Name", "Last Name", "Age"]).unwrap(), t);
        let e = project_table(&t, &[]).unwrap();
        assert_eq!(e.len(), 3);
        assert!(e.schema().is_empty());
        assert!(matches!(project_table(&t, &["Height"]), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn unions() {
        let s = spec();
        let t = obama(&s);
        assert_eq!(union_all(&t, &t).unwrap().len(), 6);
        let empty = Table::new(t.schema().clone(), vec![]).unwrap();
        assert_eq!(union_all(&t, &empty).unwrap().record_multiset(), t.record_multiset());
        assert!(matches!(union_all(&t, &names_table(&s)), Err(Error::SchemaMismatch(_))));

        let id = TableMorphism::identity(&t);
        assert_eq!(union_over(&id, &id).unwrap().record_multiset(), t.record_multiset());

        let overlap = Table::from_raw(
            t.schema().clone(),
            vec![("o", vec!["Michelle".into(), "Obama".into(), 1964.into()])],
        )
        .unwrap();
        let g = TableMorphism::new(
            &overlap,
            &t,
            [("o".to_string(), "2".to_string())],
            SimpleSchemaMorphism::identity(t.schema()),
        );
        let u = union_over(&g, &g).unwrap();
        assert_eq!(u.len(), 5);
        assert!(u.row("1:2~2:2").is_some());

        let none = Table::new(t.schema().clone(), vec![]).unwrap();
        let e = TableMorphism::new(&none, &t, Vec::<(Key, Key)>::new(), SimpleSchemaMorphism::identity(t.schema()));
        assert_eq!(union_over(&e, &e).unwrap(), union_all(&t, &t).unwrap());
    }

    #[test]
    fn image() {
        let s = spec();
        let t = obama(&s);
        let im = image_table(&t);
        assert_eq!(im.keys().cloned().collect::<Vec<_>>(), ["1", "2"]);
        assert_eq!(image_table(&im), im);
        assert_eq!(image_table(&union_all(&t, &t).unwrap()).record_multiset(), im.record_multiset());
    }

    #[test]
    fn terminal_and_initial() {
        let s = spec();
        let one = terminal_table(&s);
        assert_eq!(one.len(), 1);
        assert!(one.schema().is_empty());
        assert_eq!(enumerate_table_morphisms(&obama(&s), &one).len(), 1);
        assert_eq!(initial_table(&s).len(), 0);
    }

    #[test]
    fn diagonal_fiber_product() {
        let s = spec();
        let t = obama(&s);
        let id = TableMorphism::identity(&t);
        let fp = table_fiber_product(&id, &id).unwrap();
        assert_eq!(fp.table.len(), 3);
        assert!(fp.table.row("(foo,foo)").is_some());
        assert_eq!(fp.table.schema(), t.schema());
        assert!(validate_table_morphism(&fp.proj1).unwrap());
    }
}
