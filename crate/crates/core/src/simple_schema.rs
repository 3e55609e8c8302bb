//! Ordered typed attribute lists, their morphisms and records.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::typespec::{Payload, TypeSpec, Value};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attribute {
    pub name: String,
    pub type_name: String,
}

impl Attribute {
    pub fn new(name: impl Into<String>, type_name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            type_name: type_name.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimpleSchema {
    spec: Arc<TypeSpec>,
    attrs: Vec<Attribute>,
}

impl PartialEq for SimpleSchema {
    fn eq(&self, other: &Self) -> bool {
        self.attrs == other.attrs && (Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec)
    }
}

impl Eq for SimpleSchema {}

impl SimpleSchema {
    pub fn new(spec: Arc<TypeSpec>, attrs: Vec<Attribute>) -> Result<Self> {
        for (i, a) in attrs.iter().enumerate() {
            if attrs[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidSimpleSchema(format!(
                    "duplicate attribute `{}`",
                    a.name
                )));
            }
            if !spec.contains(&a.type_name) {
                return Err(Error::UnknownType(a.type_name.clone()));
            }
        }
        Ok(SimpleSchema { spec, attrs })
    }

    pub fn from_pairs(spec: &Arc<TypeSpec>, pairs: &[(&str, &str)]) -> Result<Self> {
        SimpleSchema::new(
            spec.clone(),
            pairs.iter().map(|(n, t)| Attribute::new(*n, *t)).collect(),
        )
    }

    pub fn empty(spec: Arc<TypeSpec>) -> Self {
        SimpleSchema { spec, attrs: Vec::new() }
    }

    pub fn spec(&self) -> &Arc<TypeSpec> {
        &self.spec
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == name)
    }

    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.position(n).ok_or_else(|| Error::UnknownAttribute(n.to_string())))
            .collect()
    }

    pub fn check_record(&self, raw: Vec<Payload>) -> Result<Record> {
        if raw.len() != self.attrs.len() {
            return Err(Error::Arity {
                expected: self.attrs.len(),
                found: raw.len(),
            });
        }
        raw.into_iter()
            .zip(&self.attrs)
            .enumerate()
            .map(|(position, (p, a))| {
                self.spec.value(&a.type_name, p).map_err(|e| match e {
                    Error::TypeMismatch { .. } => Error::TypeMismatch {
                        position,
                        type_name: a.type_name.clone(),
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Record)
    }

    pub fn is_valid_record(&self, r: &Record) -> bool {
        r.0.len() == self.attrs.len()
            && r.0.iter().zip(&self.attrs).all(|(v, a)| {
                v.type_name() == a.type_name
                    && self.spec.check_member(&a.type_name, v.payload()).unwrap_or(false)
            })
    }

    /// The subschema on the named attributes, in this schema's order, with its inclusion.
    pub fn restrict(&self, names: &[&str]) -> Result<SimpleSchemaMorphism> {
        let mut positions = self.positions(names)?;
        positions.sort_unstable();
        positions.dedup();
        let sub = SimpleSchema {
            spec: self.spec.clone(),
            attrs: positions.iter().map(|&p| self.attrs[p].clone()).collect(),
        };
        SimpleSchemaMorphism::new(sub, self.clone(), positions)
    }
}

impl fmt::Display for SimpleSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.attrs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", a.name, a.type_name)?;
        }
        write!(f, ")")
    }
}

/// A record stored positionally; attribute names live on the schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Record(pub Vec<Value>);

impl Record {
    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn project(&self, positions: &[usize]) -> Record {
        Record(positions.iter().map(|&p| self.0[p].clone()).collect())
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleSchemaMorphism {
    source: SimpleSchema,
    target: SimpleSchema,
    map: Vec<usize>,
}

impl SimpleSchemaMorphism {
    pub fn new(source: SimpleSchema, target: SimpleSchema, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::InvalidMorphism(format!(
                "map has {} entries for {} attributes",
                map.len(),
                source.len()
            )));
        }
        for (i, &j) in map.iter().enumerate() {
            let Some(t) = target.attrs.get(j) else {
                return Err(Error::InvalidMorphism(format!("position {j} out of range")));
            };
            if t.type_name != source.attrs[i].type_name {
                return Err(Error::InvalidMorphism(format!(
                    "`{}` and `{}` have different types",
                    source.attrs[i].name, t.name
                )));
            }
            if i > 0 && map[i - 1] > j {
                return Err(Error::InvalidMorphism("map is not order-preserving".into()));
            }
        }
        Ok(SimpleSchemaMorphism { source, target, map })
    }

    pub fn from_names(
        source: &SimpleSchema,
        target: &SimpleSchema,
        pairs: &[(&str, &str)],
    ) -> Result<Self> {
        let mut map = vec![usize::MAX; source.len()];
        for (a, b) in pairs {
            let i = source.position(a).ok_or_else(|| Error::UnknownAttribute(a.to_string()))?;
            map[i] = target.position(b).ok_or_else(|| Error::UnknownAttribute(b.to_string()))?;
        }
        if let Some(i) = map.iter().position(|&j| j == usize::MAX) {
            return Err(Error::InvalidMorphism(format!(
                "attribute `{}` is not mapped",
                source.attrs[i].name
            )));
        }
        SimpleSchemaMorphism::new(source.clone(), target.clone(), map)
    }

    pub fn identity(schema: &SimpleSchema) -> Self {
        SimpleSchemaMorphism {
            source: schema.clone(),
            target: schema.clone(),
            map: (0..schema.len()).collect(),
        }
    }

    pub fn source(&self) -> &SimpleSchema {
        &self.source
    }

    pub fn target(&self) -> &SimpleSchema {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimpleSchemaMorphism) -> Result<Self> {
        if self.target != other.source {
            return Err(Error::Composition(format!(
                "{} is not {}",
                self.target, other.source
            )));
        }
        Ok(SimpleSchemaMorphism {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&j| other.map[j]).collect(),
        })
    }

    /// The induced map on records, running against the arrow: records on the target become records on the source.
    pub fn restrict_record(&self, r: &Record) -> Record {
        r.project(&self.map)
    }
}

pub fn compose(g: &SimpleSchemaMorphism, f: &SimpleSchemaMorphism) -> Result<SimpleSchemaMorphism> {
    f.then(g)
}

#[derive(Debug, Clone)]
pub struct SimplePushout {
    pub schema: SimpleSchema,
    pub leg1: SimpleSchemaMorphism,
    pub leg2: SimpleSchemaMorphism,
}

pub fn pushout_simple_schema(
    f1: &SimpleSchemaMorphism,
    f2: &SimpleSchemaMorphism,
) -> Result<SimplePushout> {
    if f1.source != f2.source {
        return Err(Error::SchemaMismatch("pushout legs have different sources".into()));
    }
    let (s1, s2) = (&f1.target, &f2.target);
    let n1 = s1.len();
    let mut uf = UnionFind::new(n1 + s2.len());
    for (&a, &b) in f1.map.iter().zip(&f2.map) {
        uf.union(a, n1 + b);
    }
    let attr = |i: usize| if i < n1 { &s1.attrs[i] } else { &s2.attrs[i - n1] };
    let mut class_of = vec![usize::MAX; n1 + s2.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n1 + s2.len() {
        let root = uf.find(i);
        if class_of[root] == usize::MAX {
            class_of[root] = classes.len();
            classes.push(Vec::new());
        }
        classes[class_of[root]].push(i);
    }
    // Column order: σ₁'s classes as they appear, then each class new to σ₂ slotted in just
    // before the next σ₂ attribute that is already placed (or appended when none follows).
    let mut seq: Vec<usize> = Vec::new();
    for i in 0..n1 {
        let c = class_of[uf.find(i)];
        if !seq.contains(&c) {
            seq.push(c);
        }
    }
    let mut pending: Vec<usize> = Vec::new();
    for i in 0..s2.len() {
        let c = class_of[uf.find(n1 + i)];
        if let Some(p) = seq.iter().position(|&d| d == c) {
            for (j, q) in pending.drain(..).enumerate() {
                seq.insert(p + j, q);
            }
        } else if !pending.contains(&c) {
            pending.push(c);
        }
    }
    seq.extend(pending);
    let mut rank = vec![0; classes.len()];
    for (r, &c) in seq.iter().enumerate() {
        rank[c] = r;
    }
    let mut attrs: Vec<Attribute> = Vec::new();
    for &c in &seq {
        let members = &classes[c];
        let mut names: Vec<&str> = Vec::new();
        for &m in members {
            if !names.contains(&attr(m).name.as_str()) {
                names.push(&attr(m).name);
            }
        }
        let type_name = &attr(members[0]).type_name;
        if members.iter().any(|&m| &attr(m).type_name != type_name) {
            return Err(Error::LabelConflict(format!("class {}", names.join("="))));
        }
        let base = names.join("=");
        let mut name = base.clone();
        let mut n = 1;
        while attrs.iter().any(|a| a.name == name) {
            n += 1;
            name = format!("{base}#{n}");
        }
        attrs.push(Attribute::new(name, type_name.clone()));
    }
    let schema = SimpleSchema::new(s1.spec.clone(), attrs)?;
    let leg = |offset: usize, len: usize| -> Vec<usize> {
        (0..len).map(|i| rank[class_of[uf.find(offset + i)]]).collect()
    };
    let map1 = leg(0, n1);
    let map2 = leg(n1, s2.len());
    for (m, which) in [(&map1, "first"), (&map2, "second")] {
        if m.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::OrderConflict(format!(
                "the {which} leg would not be order-preserving"
            )));
        }
    }
    Ok(SimplePushout {
        leg1: SimpleSchemaMorphism::new(s1.clone(), schema.clone(), map1)?,
        leg2: SimpleSchemaMorphism::new(s2.clone(), schema.clone(), map2)?,
        schema,
    })
}

/// Every order- and type-preserving map between two simple schemas.
pub fn enumerate_morphisms(source: &SimpleSchema, target: &SimpleSchema) -> Vec<SimpleSchemaMorphism> {
    fn go(
        source: &SimpleSchema,
        target: &SimpleSchema,
        map: &mut Vec<usize>,
        out: &mut Vec<SimpleSchemaMorphism>,
    ) {
        let i = map.len();
        if i == source.len() {
            out.push(SimpleSchemaMorphism {
                source: source.clone(),
                target: target.clone(),
                map: map.clone(),
            });
            return;
        }
        let start = map.last().copied().unwrap_or(0);
        for j in start..target.len() {
            if target.attrs[j].type_name == source.attrs[i].type_name {
                map.push(j);
                go(source, target, map, out);
                map.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(source, target, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> Arc<TypeSpec> {
        Arc::new(TypeSpec::standard())
    }

    #[test]
    fn records() {
        let s = spec();
        let sigma = SimpleSchema::from_pairs(&s, &[("First", "Str"), ("Last", "Str"), ("Age", "Z")]).unwrap();
        let r = sigma.check_record(vec!["Barack".into(), "Obama".into(), 1961.into()]).unwrap();
        assert_eq!(r.to_string(), "(Barack; Obama; 1961)");
        assert_eq!(SimpleSchema::empty(s.clone()).check_record(vec![]).unwrap(), Record(vec![]));
        let age = SimpleSchema::from_pairs(&s, &[("Age", "Z")]).unwrap();
        assert!(matches!(
            age.check_record(vec!["abc".into()]),
            Err(Error::TypeMismatch { position: 0, .. })
        ));
        assert!(matches!(age.check_record(vec![]), Err(Error::Arity { .. })));
    }

    #[test]
    fn restriction_is_projection() {
        let s = spec();
        let big = SimpleSchema::from_pairs(&s, &[("First Name", "Str"), ("Last Name", "Str"), ("Age", "Z")]).unwrap();
        let small = SimpleSchema::from_pairs(&s, &[("First", "Str"), ("Last", "Str")]).unwrap();
        let f = SimpleSchemaMorphism::from_names(&small, &big, &[("First", "First Name"), ("Last", "Last Name")]).unwrap();
        let r = big.check_record(vec!["Barack".into(), "Obama".into(), 1961.into()]).unwrap();
        assert_eq!(f.restrict_record(&r).to_string(), "(Barack; Obama)");
        assert_eq!(SimpleSchemaMorphism::identity(&big).restrict_record(&r), r);

        let one = SimpleSchema::from_pairs(&s, &[("x", "Str")]).unwrap();
        let fold = SimpleSchemaMorphism::new(small.clone(), one.clone(), vec![0, 0]).unwrap();
        let r = one.check_record(vec!["x".into()]).unwrap();
        assert_eq!(fold.restrict_record(&r).to_string(), "(x; x)");
    }

    #[test]
    fn rejects_disorder_and_type_change() {
        let s = spec();
        let ab = SimpleSchema::from_pairs(&s, &[("a", "Str"), ("b", "Str")]).unwrap();
        assert!(SimpleSchemaMorphism::new(ab.clone(), ab.clone(), vec![1, 0]).is_err());
        let az = SimpleSchema::from_pairs(&s, &[("a", "Str"), ("z", "Z")]).unwrap();
        assert!(SimpleSchemaMorphism::new(ab, az, vec![0, 1]).is_err());
    }

    #[test]
    fn composition() {
        let s = spec();
        let a = SimpleSchema::from_pairs(&s, &[("a", "Str")]).unwrap();
        let ab = SimpleSchema::from_pairs(&s, &[("a", "Str"), ("b", "Str")]).unwrap();
        let abc = SimpleSchema::from_pairs(&s, &[("a", "Str"), ("b", "Str"), ("c", "Z")]).unwrap();
        let f = SimpleSchemaMorphism::from_names(&a, &ab, &[("a", "a")]).unwrap();
        let g = SimpleSchemaMorphism::from_names(&ab, &abc, &[("a", "a"), ("b", "b")]).unwrap();
        let gf = compose(&g, &f).unwrap();
        assert_eq!(gf, SimpleSchemaMorphism::from_names(&a, &abc, &[("a", "a")]).unwrap());
        assert_eq!(f.then(&SimpleSchemaMorphism::identity(&ab)).unwrap(), f);
        assert!(matches!(compose(&f, &g), Err(Error::Composition(_))));
    }

    #[test]
    fn pushouts() {
        let s = spec();
        let last = SimpleSchema::from_pairs(&s, &[("Last", "Str")]).unwrap();
        let fl = SimpleSchema::from_pairs(&s, &[("First", "Str"), ("Last", "Str")]).unwrap();
        let lb = SimpleSchema::from_pairs(&s, &[("LName", "Str"), ("BYear", "Z")]).unwrap();
        let f1 = SimpleSchemaMorphism::from_names(&last, &fl, &[("Last", "Last")]).unwrap();
        let f2 = SimpleSchemaMorphism::from_names(&last, &lb, &[("Last", "LName")]).unwrap();
        let p = pushout_simple_schema(&f1, &f2).unwrap();
        let names: Vec<&str> = p.schema.attributes().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["First", "Last=LName", "BYear"]);
        assert_eq!(f1.then(&p.leg1).unwrap(), f2.then(&p.leg2).unwrap());

        let empty = SimpleSchema::empty(s.clone());
        let e1 = SimpleSchemaMorphism::new(empty.clone(), fl.clone(), vec![]).unwrap();
        let e2 = SimpleSchemaMorphism::new(empty, lb.clone(), vec![]).unwrap();
        assert_eq!(pushout_simple_schema(&e1, &e2).unwrap().schema.len(), 4);

        let id = SimpleSchemaMorphism::identity(&fl);
        assert_eq!(pushout_simple_schema(&id, &id).unwrap().schema, fl);
    }

    #[test]
    fn pushout_order_conflict() {
        let s = spec();
        let ab = SimpleSchema::from_pairs(&s, &[("a", "Str"), ("b", "Str")]).unwrap();
        let xb = SimpleSchema::from_pairs(&s, &[("x", "Str"), ("b", "Str"), ("a", "Str")]).unwrap();
        let f1 = SimpleSchemaMorphism::identity(&ab);
        let f2 = SimpleSchemaMorphism::new(ab.clone(), xb.clone(), vec![0, 1]).unwrap();
        // the third column of xb lands after b in both legs, so this one is fine
        assert!(pushout_simple_schema(&f1, &f2).is_ok());
        // new columns are slotted in before the next shared one
        let bx = SimpleSchema::from_pairs(&s, &[("b", "Str"), ("y", "Str")]).unwrap();
        let a_only = SimpleSchema::from_pairs(&s, &[("a", "Str")]).unwrap();
        let h1 = SimpleSchemaMorphism::from_names(&a_only, &ab, &[("a", "b")]).unwrap();
        let h2 = SimpleSchemaMorphism::from_names(&a_only, &bx, &[("a", "y")]).unwrap();
        let p = pushout_simple_schema(&h1, &h2).unwrap();
        assert_eq!(p.schema.to_string(), SimpleSchema::from_pairs(&s, &[("a", "Str"), ("b", "Str"), ("b=y", "Str")]).unwrap().to_string());
        // σ₁ collapses both source columns; σ₂ keeps a column strictly between them
        let c = SimpleSchema::from_pairs(&s, &[("c", "Str")]).unwrap();
        let xzy = SimpleSchema::from_pairs(&s, &[("x", "Str"), ("z", "Str"), ("y", "Str")]).unwrap();
        let g1 = SimpleSchemaMorphism::new(ab.clone(), c, vec![0, 0]).unwrap();
        let g2 = SimpleSchemaMorphism::new(ab.clone(), xzy, vec![0, 2]).unwrap();
        assert!(matches!(pushout_simple_schema(&g1, &g2), Err(Error::OrderConflict(_))));
    }
}
