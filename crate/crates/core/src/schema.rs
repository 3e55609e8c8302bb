//! Finite labeled simplicial schemas, presented by their non-degenerate simplices.
//!
//! Face `i` of an `n`-simplex deletes vertex position `i`. Every simplex has distinct
//! vertices, so a face is determined by the vertex positions it keeps.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::simple_schema::{Attribute, SimpleSchema};
use crate::typespec::TypeSpec;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexLabel {
    pub name: String,
    pub type_name: String,
}

/// One simplex as given to [`Schema::from_parts`]: a label for vertices, a face list otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSimplex {
    pub id: String,
    pub faces: Vec<usize>,
    pub label: Option<VertexLabel>,
}

#[derive(Debug, Clone)]
struct Simplex {
    raw: RawSimplex,
    dim: usize,
    vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Schema {
    spec: Arc<TypeSpec>,
    simplices: Vec<Simplex>,
    index: HashMap<String, usize>,
    cofaces: Vec<Vec<(usize, usize)>>,
    by_vertex_set: HashMap<Vec<usize>, Vec<usize>>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.simplices.len() == other.simplices.len()
            && self.simplices.iter().zip(&other.simplices).all(|(a, b)| a.raw == b.raw)
            && (Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec)
    }
}

impl Eq for Schema {}

pub struct SchemaBuilder {
    spec: Arc<TypeSpec>,
    vertices: Vec<(String, VertexLabel)>,
    simplices: Vec<(String, Vec<String>)>,
}

impl SchemaBuilder {
    pub fn vertex(mut self, id: &str, name: &str, type_name: &str) -> Self {
        self.vertices.push((
            id.to_string(),
            VertexLabel {
                name: name.to_string(),
                type_name: type_name.to_string(),
            },
        ));
        self
    }

    /// `faces[i]` is the face opposite vertex `i`.
    pub fn simplex(mut self, id: &str, faces: &[&str]) -> Self {
        self.simplices
            .push((id.to_string(), faces.iter().map(|f| f.to_string()).collect()));
        self
    }

    pub fn build(self) -> Result<Arc<Schema>> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        for (i, id) in self
            .vertices
            .iter()
            .map(|(id, _)| id)
            .chain(self.simplices.iter().map(|(id, _)| id))
            .enumerate()
        {
            if ids.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidSchema(format!("duplicate simplex id `{id}`")));
            }
        }
        let mut raw: Vec<RawSimplex> = self
            .vertices
            .into_iter()
            .map(|(id, label)| RawSimplex {
                id,
                faces: vec![],
                label: Some(label),
            })
            .collect();
        for (id, faces) in self.simplices {
            let faces = faces
                .iter()
                .map(|f| ids.get(f).copied().ok_or_else(|| Error::UnknownSimplex(f.clone())))
                .collect::<Result<Vec<_>>>()?;
            raw.push(RawSimplex { id, faces, label: None });
        }
        Schema::from_parts(self.spec, raw).map(Arc::new)
    }
}

impl Schema {
    pub fn builder(spec: Arc<TypeSpec>) -> SchemaBuilder {
        SchemaBuilder {
            spec,
            vertices: Vec::new(),
            simplices: Vec::new(),
        }
    }

    pub fn empty(spec: Arc<TypeSpec>) -> Arc<Schema> {
        Arc::new(Schema::from_parts(spec, vec![]).expect("empty schema is valid"))
    }

    pub fn from_parts(spec: Arc<TypeSpec>, raw: Vec<RawSimplex>) -> Result<Schema> {
        let n = raw.len();
        let mut index = HashMap::new();
        for (i, r) in raw.iter().enumerate() {
            if r.id.is_empty() {
                return Err(Error::InvalidSchema("empty simplex id".into()));
            }
            if index.insert(r.id.clone(), i).is_some() {
                return Err(Error::InvalidSchema(format!("duplicate simplex id `{}`", r.id)));
            }
        }
        let mut dims = Vec::with_capacity(n);
        for r in &raw {
            match &r.label {
                Some(label) => {
                    if !r.faces.is_empty() {
                        return Err(Error::InvalidSchema(format!("vertex `{}` has faces", r.id)));
                    }
                    if !spec.contains(&label.type_name) {
                        return Err(Error::UnknownType(label.type_name.clone()));
                    }
                    dims.push(0);
                }
                None => {
                    if r.faces.len() < 2 {
                        return Err(Error::InvalidSchema(format!(
                            "simplex `{}` needs at least two faces",
                            r.id
                        )));
                    }
                    dims.push(r.faces.len() - 1);
                }
            }
        }
        for (i, r) in raw.iter().enumerate() {
            for &f in &r.faces {
                if f >= n {
                    return Err(Error::InvalidSchema(format!("`{}` names a missing face", r.id)));
                }
                if dims[f] + 1 != dims[i] {
                    return Err(Error::InvalidSchema(format!(
                        "face `{}` of `{}` has the wrong dimension",
                        raw[f].id, r.id
                    )));
                }
            }
            let d = dims[i];
            if d >= 2 {
                for j in 1..=d {
                    for k in 0..j {
                        let a = raw[raw[r.faces[j]].faces[k]].id.as_str();
                        let b = raw[raw[r.faces[k]].faces[j - 1]].id.as_str();
                        if a != b {
                            return Err(Error::InvalidSchema(format!(
                                "`{}` violates the simplicial identity at ({k},{j}): `{a}` vs `{b}`",
                                r.id
                            )));
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| dims[i]);
        let mut vertices: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &i in &order {
            let d = dims[i];
            vertices[i] = if d == 0 {
                vec![i]
            } else {
                let f = &raw[i].faces;
                let mut v = vertices[f[d]].clone();
                v.push(*vertices[f[0]].last().expect("faces have vertices"));
                v
            };
            let v = &vertices[i];
            if (1..v.len()).any(|a| v[..a].contains(&v[a])) {
                return Err(Error::InvalidSchema(format!(
                    "simplex `{}` repeats a vertex",
                    raw[i].id
                )));
            }
            for (k, &f) in raw[i].faces.iter().enumerate() {
                let mut expect = v.clone();
                expect.remove(k);
                if vertices[f] != expect {
                    return Err(Error::InvalidSchema(format!(
                        "face {k} of `{}` does not match its vertices",
                        raw[i].id
                    )));
                }
            }
        }
        let mut cofaces = vec![Vec::new(); n];
        let mut by_vertex_set: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, r) in raw.iter().enumerate() {
            for (k, &f) in r.faces.iter().enumerate() {
                cofaces[f].push((i, k));
            }
            let mut set = vertices[i].clone();
            set.sort_unstable();
            by_vertex_set.entry(set).or_default().push(i);
        }
        let simplices = raw
            .into_iter()
            .zip(dims)
            .zip(vertices)
            .map(|((raw, dim), vertices)| Simplex { raw, dim, vertices })
            .collect();
        Ok(Schema {
            spec,
            simplices,
            index,
            cofaces,
            by_vertex_set,
        })
    }

    pub fn spec(&self) -> &Arc<TypeSpec> {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn raw(&self, s: usize) -> &RawSimplex {
        &self.simplices[s].raw
    }

    pub fn raw_parts(&self) -> Vec<RawSimplex> {
        self.simplices.iter().map(|s| s.raw.clone()).collect()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.simplices[s].raw.id
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.find(id).ok_or_else(|| Error::UnknownSimplex(id.to_string()))
    }

    pub fn dim(&self, s: usize) -> usize {
        self.simplices[s].dim
    }

    pub fn faces(&self, s: usize) -> &[usize] {
        &self.simplices[s].raw.faces
    }

    pub fn face(&self, s: usize, i: usize) -> usize {
        self.simplices[s].raw.faces[i]
    }

    /// `(coface, i)` pairs with `face(coface, i) == s`.
    pub fn cofaces(&self, s: usize) -> &[(usize, usize)] {
        &self.cofaces[s]
    }

    pub fn label(&self, s: usize) -> Option<&VertexLabel> {
        self.simplices[s].raw.label.as_ref()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&s| self.simplices[s].dim == 0)
    }

    pub fn vertices(&self, s: usize) -> &[usize] {
        &self.simplices[s].vertices
    }

    pub fn vertex_type(&self, v: usize) -> &str {
        &self.label(v).expect("a vertex").type_name
    }

    pub fn position_types(&self, s: usize) -> Vec<&str> {
        self.vertices(s).iter().map(|&v| self.vertex_type(v)).collect()
    }

    /// Simplices whose vertex set is exactly `set` (sorted).
    pub fn with_vertex_set(&self, set: &[usize]) -> &[usize] {
        self.by_vertex_set.get(set).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.dim).max()
    }

    /// Column names for a list of vertices: the label name, or `name#id` when two share a name.
    pub fn column_names(&self, vertices: &[usize]) -> Vec<String> {
        vertices
            .iter()
            .map(|&v| {
                let name = &self.label(v).expect("a vertex").name;
                let clash = vertices
                    .iter()
                    .filter(|&&w| &self.label(w).expect("a vertex").name == name)
                    .count()
                    > 1;
                if clash {
                    format!("{name}#{}", self.id(v))
                } else {
                    name.clone()
                }
            })
            .collect()
    }

    pub fn vertex_schema(&self, s: usize) -> SimpleSchema {
        let vs = self.vertices(s);
        let attrs = self
            .column_names(vs)
            .into_iter()
            .zip(vs)
            .map(|(n, &v)| Attribute::new(n, self.vertex_type(v)))
            .collect();
        SimpleSchema::new(self.spec.clone(), attrs).expect("column names are distinct")
    }

    /// The face of `s` keeping exactly the (sorted) vertex positions in `keep`.
    pub fn face_spanned(&self, s: usize, keep: &[usize]) -> usize {
        let mut cur = s;
        for p in (0..=self.dim(s)).rev() {
            if keep.binary_search(&p).is_err() {
                cur = self.face(cur, p);
            }
        }
        cur
    }

    /// Every proper nonempty face of `s` with the positions it keeps.
    pub fn proper_faces(&self, s: usize) -> Vec<(usize, Vec<usize>)> {
        let n = self.dim(s) + 1;
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << n) - 1 {
            let keep: Vec<usize> = (0..n).filter(|&p| mask & (1 << p) != 0).collect();
            out.push((self.face_spanned(s, &keep), keep));
        }
        out
    }

    pub fn all(&self) -> Subschema {
        Subschema((0..self.len()).collect())
    }

    pub fn closure<I: IntoIterator<Item = usize>>(&self, members: I) -> Subschema {
        let mut set = BTreeSet::new();
        let mut stack: Vec<usize> = members.into_iter().collect();
        while let Some(s) = stack.pop() {
            if set.insert(s) {
                stack.extend_from_slice(self.faces(s));
            }
        }
        Subschema(set)
    }

    pub fn closure_of_ids(&self, ids: &[&str]) -> Result<Subschema> {
        let members = ids.iter().map(|id| self.index_of(id)).collect::<Result<Vec<_>>>()?;
        Ok(self.closure(members))
    }

    pub fn is_face_closed(&self, members: &BTreeSet<usize>) -> bool {
        members
            .iter()
            .all(|&s| s < self.len() && self.faces(s).iter().all(|f| members.contains(f)))
    }

    pub fn subschema(&self, members: impl IntoIterator<Item = usize>) -> Result<Subschema> {
        let set: BTreeSet<usize> = members.into_iter().collect();
        if !self.is_face_closed(&set) {
            return Err(Error::NotFaceClosed(format!(
                "{{{}}}",
                set.iter().map(|&s| self.id(s)).collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(Subschema(set))
    }

    pub fn subschema_of_ids(&self, ids: &[&str]) -> Result<Subschema> {
        let members = ids.iter().map(|id| self.index_of(id)).collect::<Result<Vec<_>>>()?;
        self.subschema(members)
    }

    /// Members of `sub` that are not a face of another member.
    pub fn maximal(&self, sub: &Subschema) -> Vec<usize> {
        sub.iter()
            .filter(|&s| self.cofaces(s).iter().all(|(c, _)| !sub.contains(*c)))
            .collect()
    }

    /// The subschema as a schema of its own, with the same ids, and its inclusion.
    pub fn restrict_to(self: &Arc<Self>, sub: &Subschema) -> Result<SchemaMorphism> {
        if !self.is_face_closed(&sub.0) {
            return Err(Error::NotFaceClosed("restriction target".into()));
        }
        let members: Vec<usize> = sub.iter().collect();
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let raw = members
            .iter()
            .map(|&s| {
                let r = self.raw(s);
                RawSimplex {
                    id: r.id.clone(),
                    faces: r.faces.iter().map(|f| local[f]).collect(),
                    label: r.label.clone(),
                }
            })
            .collect();
        let small = Arc::new(Schema::from_parts(self.spec.clone(), raw)?);
        let images = members
            .iter()
            .map(|&s| SimplexImage::identity(s, self.dim(s)))
            .collect();
        SchemaMorphism::new(small, self.clone(), images)
    }
}

/// A face-closed set of simplices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subschema(BTreeSet<usize>);

impl Subschema {
    pub fn empty() -> Self {
        Subschema(BTreeSet::new())
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.0.contains(&s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &Subschema) -> Subschema {
        Subschema(self.0.union(&other.0).copied().collect())
    }

    pub fn intersect(&self, other: &Subschema) -> Subschema {
        Subschema(self.0.intersection(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Subschema) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn ids<'a>(&self, schema: &'a Schema) -> Vec<&'a str> {
        self.iter().map(|s| schema.id(s)).collect()
    }
}

pub const SUBSCHEMA_ENUMERATION_CAP: usize = 20;

pub fn enumerate_subschemas(x: &Schema) -> Result<Vec<Subschema>> {
    if x.len() > SUBSCHEMA_ENUMERATION_CAP {
        return Err(Error::TooLarge(format!(
            "{} simplices exceeds the cap of {SUBSCHEMA_ENUMERATION_CAP}",
            x.len()
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by_key(|&s| x.dim(s));
    fn go(x: &Schema, order: &[usize], i: usize, cur: &mut BTreeSet<usize>, out: &mut Vec<Subschema>) {
        if i == order.len() {
            out.push(Subschema(cur.clone()));
            return;
        }
        let s = order[i];
        go(x, order, i + 1, cur, out);
        if x.faces(s).iter().all(|f| cur.contains(f)) {
            cur.insert(s);
            go(x, order, i + 1, cur, out);
            cur.remove(&s);
        }
    }
    let mut out = Vec::new();
    go(x, &order, 0, &mut BTreeSet::new(), &mut out);
    out.sort();
    Ok(out)
}

/// Where a simplex goes: a target simplex and a surjection from source positions onto its positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplexImage {
    pub target: usize,
    pub alpha: Vec<usize>,
}

impl SimplexImage {
    pub fn identity(target: usize, dim: usize) -> Self {
        SimplexImage {
            target,
            alpha: (0..=dim).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha.iter().enumerate().all(|(i, &a)| i == a)
    }
}

/// Image of face `i` of a simplex whose image is `img`.
pub fn face_image(target: &Schema, img: &SimplexImage, i: usize) -> SimplexImage {
    let mut beta = img.alpha.clone();
    beta.remove(i);
    let mut keep = beta.clone();
    keep.sort_unstable();
    keep.dedup();
    SimplexImage {
        target: target.face_spanned(img.target, &keep),
        alpha: beta
            .iter()
            .map(|b| keep.binary_search(b).expect("kept"))
            .collect(),
    }
}

/// Image of the face of a simplex spanned by the (sorted) positions `keep`.
pub fn restrict_image(target: &Schema, img: &SimplexImage, keep: &[usize]) -> SimplexImage {
    let beta: Vec<usize> = keep.iter().map(|&p| img.alpha[p]).collect();
    let mut span = beta.clone();
    span.sort_unstable();
    span.dedup();
    SimplexImage {
        target: target.face_spanned(img.target, &span),
        alpha: beta.iter().map(|b| span.binary_search(b).expect("kept")).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct SchemaMorphism {
    source: Arc<Schema>,
    target: Arc<Schema>,
    images: Vec<SimplexImage>,
}

impl PartialEq for SchemaMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images && same(&self.source, &other.source) && same(&self.target, &other.target)
    }
}

impl Eq for SchemaMorphism {}

pub fn same(a: &Arc<Schema>, b: &Arc<Schema>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl SchemaMorphism {
    pub fn new(source: Arc<Schema>, target: Arc<Schema>, images: Vec<SimplexImage>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMorphism(msg));
        if images.len() != source.len() {
            return bad(format!("{} images for {} simplices", images.len(), source.len()));
        }
        if source.spec() != target.spec() {
            return bad("schemas use different type specifications".into());
        }
        for (s, img) in images.iter().enumerate() {
            let id = source.id(s);
            if img.target >= target.len() {
                return bad(format!("`{id}` maps outside the target"));
            }
            let m = target.dim(img.target);
            if img.alpha.len() != source.dim(s) + 1 {
                return bad(format!("`{id}` has a position map of the wrong length"));
            }
            let hit: BTreeSet<usize> = img.alpha.iter().copied().collect();
            if hit.len() != m + 1 || hit.iter().any(|&a| a > m) {
                return bad(format!("position map of `{id}` is not onto `{}`", target.id(img.target)));
            }
            let (ts, tt) = (source.position_types(s), target.position_types(img.target));
            if img.alpha.iter().enumerate().any(|(j, &a)| ts[j] != tt[a]) {
                return bad(format!("`{id}` changes a vertex type"));
            }
            for i in 0..source.faces(s).len() {
                let f = source.face(s, i);
                if images[f] != face_image(&target, img, i) {
                    return bad(format!(
                        "face {i} of `{id}` is sent to `{}`, not the matching face",
                        target.id(images[f].target)
                    ));
                }
            }
        }
        Ok(SchemaMorphism { source, target, images })
    }

    pub fn identity(x: &Arc<Schema>) -> Self {
        SchemaMorphism {
            source: x.clone(),
            target: x.clone(),
            images: (0..x.len()).map(|s| SimplexImage::identity(s, x.dim(s))).collect(),
        }
    }

    /// Spreads the given assignments to all faces, then validates.
    pub fn generate(
        source: Arc<Schema>,
        target: Arc<Schema>,
        assignments: Vec<(usize, SimplexImage)>,
    ) -> Result<Self> {
        let mut images: Vec<Option<SimplexImage>> = vec![None; source.len()];
        let mut stack = assignments;
        while let Some((s, img)) = stack.pop() {
            if img.target >= target.len() || img.alpha.len() != source.dim(s) + 1 {
                return Err(Error::InvalidMorphism(format!("bad image for `{}`", source.id(s))));
            }
            match &images[s] {
                Some(old) if *old == img => continue,
                Some(_) => {
                    return Err(Error::InvalidMorphism(format!(
                        "`{}` is sent to two places",
                        source.id(s)
                    )))
                }
                None => {}
            }
            if source.dim(s) > 0 {
                for i in 0..=source.dim(s) {
                    stack.push((source.face(s, i), face_image(&target, &img, i)));
                }
            }
            images[s] = Some(img);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(s, i)| {
                i.ok_or_else(|| Error::InvalidMorphism(format!("`{}` is not mapped", source.id(s))))
            })
            .collect::<Result<Vec<_>>>()?;
        SchemaMorphism::new(source, target, images)
    }

    /// Simplex-to-simplex assignments by id, without collapsing; faces follow.
    pub fn from_pairs(source: &Arc<Schema>, target: &Arc<Schema>, pairs: &[(&str, &str)]) -> Result<Self> {
        let assignments = pairs
            .iter()
            .map(|(a, b)| {
                let s = source.index_of(a)?;
                Ok((s, SimplexImage::identity(target.index_of(b)?, source.dim(s))))
            })
            .collect::<Result<Vec<_>>>()?;
        SchemaMorphism::generate(source.clone(), target.clone(), assignments)
    }

    /// Assignments by id with explicit position maps.
    pub fn from_assignments(
        source: &Arc<Schema>,
        target: &Arc<Schema>,
        assignments: &[(&str, &str, Vec<usize>)],
    ) -> Result<Self> {
        let assignments = assignments
            .iter()
            .map(|(a, b, alpha)| {
                Ok((
                    source.index_of(a)?,
                    SimplexImage {
                        target: target.index_of(b)?,
                        alpha: alpha.clone(),
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        SchemaMorphism::generate(source.clone(), target.clone(), assignments)
    }

    /// Determined by where vertices go; fails when a simplex has no or several candidate images.
    pub fn from_vertex_map(source: &Arc<Schema>, target: &Arc<Schema>, vmap: &HashMap<usize, usize>) -> Result<Self> {
        let mut images = Vec::with_capacity(source.len());
        for s in 0..source.len() {
            let w: Vec<usize> = source
                .vertices(s)
                .iter()
                .map(|v| {
                    vmap.get(v).copied().ok_or_else(|| {
                        Error::InvalidMorphism(format!("vertex `{}` is not mapped", source.id(*v)))
                    })
                })
                .collect::<Result<_>>()?;
            let mut set = w.clone();
            set.sort_unstable();
            set.dedup();
            let t = match target.with_vertex_set(&set) {
                [t] => *t,
                [] => {
                    return Err(Error::InvalidMorphism(format!(
                        "no simplex of the target spans the image of `{}`",
                        source.id(s)
                    )))
                }
                _ => {
                    return Err(Error::InvalidMorphism(format!(
                        "several simplices span the image of `{}`",
                        source.id(s)
                    )))
                }
            };
            let tv = target.vertices(t);
            let alpha = w
                .iter()
                .map(|x| tv.iter().position(|y| y == x).expect("same vertex set"))
                .collect();
            images.push(SimplexImage { target: t, alpha });
        }
        SchemaMorphism::new(source.clone(), target.clone(), images)
    }

    pub fn source(&self) -> &Arc<Schema> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Schema> {
        &self.target
    }

    pub fn image(&self, s: usize) -> &SimplexImage {
        &self.images[s]
    }

    pub fn images(&self) -> &[SimplexImage] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        same(&self.source, &self.target)
            && self.images.iter().enumerate().all(|(s, i)| i.target == s && i.is_identity())
    }

    pub fn is_monic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.images.iter().all(|i| i.is_identity() && seen.insert(i.target))
    }

    pub fn is_order_preserving(&self) -> bool {
        self.images.iter().all(|i| i.alpha.windows(2).all(|w| w[0] <= w[1]))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SchemaMorphism) -> Result<SchemaMorphism> {
        if !same(&self.target, &other.source) {
            return Err(Error::Composition("schema morphisms do not meet".into()));
        }
        let images = self
            .images
            .iter()
            .map(|i| {
                let j = &other.images[i.target];
                SimplexImage {
                    target: j.target,
                    alpha: i.alpha.iter().map(|&a| j.alpha[a]).collect(),
                }
            })
            .collect();
        Ok(SchemaMorphism {
            source: self.source.clone(),
            target: other.target.clone(),
            images,
        })
    }

    pub fn image_subschema(&self, s: &Subschema) -> Subschema {
        self.target.closure(s.iter().map(|x| self.images[x].target))
    }

    pub fn preimage_subschema(&self, t: &Subschema) -> Subschema {
        Subschema(
            (0..self.source.len())
                .filter(|&s| t.contains(self.images[s].target))
                .collect(),
        )
    }
}

/// Every order-preserving morphism between two schemas. Exponential; for small tests.
pub fn all_morphisms(source: &Arc<Schema>, target: &Arc<Schema>) -> Vec<SchemaMorphism> {
    let mut order: Vec<usize> = (0..source.len()).collect();
    order.sort_by_key(|&s| source.dim(s));
    let mut images: Vec<Option<SimplexImage>> = vec![None; source.len()];
    let mut out = Vec::new();
    fn go(
        source: &Schema,
        target: &Schema,
        order: &[usize],
        i: usize,
        images: &mut Vec<Option<SimplexImage>>,
        out: &mut Vec<Vec<SimplexImage>>,
    ) {
        if i == order.len() {
            out.push(images.iter().map(|x| x.clone().expect("assigned")).collect());
            return;
        }
        let s = order[i];
        let candidates: Vec<SimplexImage> = if source.dim(s) == 0 {
            target
                .vertex_ids()
                .filter(|&t| target.vertex_type(t) == source.vertex_type(s))
                .map(|t| SimplexImage::identity(t, 0))
                .collect()
        } else {
            let w: Vec<usize> = source
                .vertices(s)
                .iter()
                .map(|&v| images[v].as_ref().expect("vertex first").target)
                .collect();
            let mut set = w.clone();
            set.sort_unstable();
            set.dedup();
            target
                .with_vertex_set(&set)
                .iter()
                .map(|&t| {
                    let tv = target.vertices(t);
                    SimplexImage {
                        target: t,
                        alpha: w.iter().map(|x| tv.iter().position(|y| y == x).expect("spans")).collect(),
                    }
                })
                .filter(|img| {
                    img.alpha.windows(2).all(|p| p[0] <= p[1])
                        && (0..=source.dim(s)).all(|k| {
                            images[source.face(s, k)].as_ref() == Some(&face_image(target, img, k))
                        })
                })
                .collect()
        };
        for c in candidates {
            images[s] = Some(c);
            go(source, target, order, i + 1, images, out);
        }
        images[s] = None;
    }
    let mut raw = Vec::new();
    go(source, target, &order, 0, &mut images, &mut raw);
    for imgs in raw {
        out.push(SchemaMorphism {
            source: source.clone(),
            target: target.clone(),
            images: imgs,
        });
    }
    out
}

/// Simplex bijections `a → b` preserving faces and vertex types (names are ignored).
pub fn schema_isomorphisms(a: &Schema, b: &Schema, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if a.len() != b.len() || a.spec() != b.spec() {
        return out;
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by_key(|&s| a.dim(s));
    fn go(
        a: &Schema,
        b: &Schema,
        order: &[usize],
        i: usize,
        phi: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if i == order.len() {
            out.push(phi.clone());
            return;
        }
        let s = order[i];
        let candidates: Vec<usize> = if a.dim(s) == 0 {
            b.vertex_ids()
                .filter(|&t| b.vertex_type(t) == a.vertex_type(s))
                .collect()
        } else {
            let f0 = phi[a.face(s, 0)];
            b.cofaces(f0)
                .iter()
                .filter(|&&(t, k)| k == 0 && b.dim(t) == a.dim(s))
                .map(|&(t, _)| t)
                .filter(|&t| (0..=a.dim(s)).all(|k| b.face(t, k) == phi[a.face(s, k)]))
                .collect()
        };
        for t in candidates {
            if used[t] {
                continue;
            }
            used[t] = true;
            phi[s] = t;
            go(a, b, order, i + 1, phi, used, out, limit);
            used[t] = false;
        }
        phi[s] = usize::MAX;
    }
    let mut phi = vec![usize::MAX; a.len()];
    let mut used = vec![false; b.len()];
    go(a, b, &order, 0, &mut phi, &mut used, &mut out, limit);
    out
}

/// The full simplex on a simple schema: one simplex per nonempty set of attributes.
pub fn simplex_schema(sigma: &SimpleSchema) -> Arc<Schema> {
    let n = sigma.len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=n {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            subsets.push(combo.clone());
            let mut i = size;
            while i > 0 && combo[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    let index: HashMap<Vec<usize>, usize> = subsets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let attrs = sigma.attributes();
    let raw = subsets
        .iter()
        .map(|set| {
            let id = set.iter().map(|&p| attrs[p].name.as_str()).collect::<Vec<_>>().join(",");
            if set.len() == 1 {
                RawSimplex {
                    id,
                    faces: vec![],
                    label: Some(VertexLabel {
                        name: attrs[set[0]].name.clone(),
                        type_name: attrs[set[0]].type_name.clone(),
                    }),
                }
            } else {
                let faces = (0..set.len())
                    .map(|i| {
                        let mut f = set.clone();
                        f.remove(i);
                        index[&f]
                    })
                    .collect();
                RawSimplex { id, faces, label: None }
            }
        })
        .collect();
    Arc::new(Schema::from_parts(sigma.spec().clone(), raw).expect("simplex schemas are valid"))
}

#[derive(Debug, Clone)]
pub struct VertexClassifier {
    pub columns: SimpleSchema,
    pub simplex: Arc<Schema>,
    pub map: SchemaMorphism,
}

impl VertexClassifier {
    /// The simplex of the target spanning every column, if there is at least one column.
    pub fn top(&self) -> Option<usize> {
        self.simplex.len().checked_sub(1)
    }
}

/// Sends each simplex to the face of one big simplex spanned by its vertices.
pub fn vertex_classifier(x: &Arc<Schema>) -> VertexClassifier {
    let vertices: Vec<usize> = x.vertex_ids().collect();
    let attrs = x
        .column_names(&vertices)
        .into_iter()
        .zip(&vertices)
        .map(|(n, &v)| Attribute::new(n, x.vertex_type(v)))
        .collect();
    let columns = SimpleSchema::new(x.spec().clone(), attrs).expect("column names are distinct");
    let simplex = simplex_schema(&columns);
    let vmap: HashMap<usize, usize> = vertices
        .iter()
        .enumerate()
        .map(|(c, &v)| (v, simplex.with_vertex_set(&[c])[0]))
        .collect();
    let map = SchemaMorphism::from_vertex_map(x, &simplex, &vmap).expect("the big simplex spans everything");
    VertexClassifier { columns, simplex, map }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdArrow {
    pub face: usize,
    pub simplex: usize,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NdCategory {
    pub objects: Vec<usize>,
    pub arrows: Vec<NdArrow>,
}

/// Simplices and all non-identity face inclusions between them.
pub fn nd_category(x: &Schema) -> NdCategory {
    let mut arrows = Vec::new();
    for s in 0..x.len() {
        for (face, positions) in x.proper_faces(s) {
            arrows.push(NdArrow { face, simplex: s, positions });
        }
    }
    NdCategory {
        objects: (0..x.len()).collect(),
        arrows,
    }
}

#[derive(Debug, Clone)]
pub struct SchemaArrow {
    pub source: usize,
    pub target: usize,
    pub map: SchemaMorphism,
}

#[derive(Debug, Clone, Default)]
pub struct SchemaDiagram {
    pub objects: Vec<Arc<Schema>>,
    pub arrows: Vec<SchemaArrow>,
}

#[derive(Debug, Clone)]
pub struct SchemaColimit {
    pub schema: Arc<Schema>,
    pub legs: Vec<SchemaMorphism>,
}

pub fn schema_colimit(diagram: &SchemaDiagram, spec: &Arc<TypeSpec>) -> Result<SchemaColimit> {
    let objs = &diagram.objects;
    for o in objs {
        if o.spec() != spec {
            return Err(Error::SchemaMismatch("diagram mixes type specifications".into()));
        }
    }
    for a in &diagram.arrows {
        if a.source >= objs.len() || a.target >= objs.len() {
            return Err(Error::InvalidMorphism("diagram arrow out of range".into()));
        }
        if !same(a.map.source(), &objs[a.source]) || !same(a.map.target(), &objs[a.target]) {
            return Err(Error::InvalidMorphism("diagram arrow does not fit its objects".into()));
        }
    }
    let mut offset = Vec::with_capacity(objs.len());
    let mut total = 0;
    for o in objs {
        offset.push(total);
        total += o.len();
    }
    let locate = |g: usize| -> (usize, usize) {
        let o = offset.partition_point(|&off| off <= g) - 1;
        (o, g - offset[o])
    };
    let dim = |g: usize| {
        let (o, s) = locate(g);
        objs[o].dim(s)
    };
    let face = |g: usize, i: usize| {
        let (o, s) = locate(g);
        offset[o] + objs[o].face(s, i)
    };

    let mut uf = UnionFind::new(total);
    // (collapsed simplex, target simplex, alpha)
    let mut collapses: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for a in &diagram.arrows {
        for s in 0..objs[a.source].len() {
            let img = a.map.image(s);
            let (gs, gt) = (offset[a.source] + s, offset[a.target] + img.target);
            if img.is_identity() && img.alpha.len() == objs[a.target].dim(img.target) + 1 {
                uf.union(gs, gt);
            } else {
                collapses.push((gs, gt, img.alpha.clone()));
            }
        }
    }

    // Identified simplices identify their faces; equal collapses identify their targets.
    let collapse_of: Vec<Option<(usize, Vec<usize>)>> = loop {
        let mut changed = false;
        let mut first: HashMap<usize, usize> = HashMap::new();
        for g in 0..total {
            let r = uf.find(g);
            match first.get(&r) {
                None => {
                    first.insert(r, g);
                }
                Some(&h) => {
                    if dim(g) != dim(h) {
                        return Err(Error::UnsupportedColimit("identifies simplices of different dimensions".into()));
                    }
                    if dim(g) > 0 {
                        for i in 0..=dim(g) {
                            changed |= uf.union(face(g, i), face(h, i));
                        }
                    }
                }
            }
        }
        let mut per_class: HashMap<usize, (usize, Vec<usize>)> = HashMap::new();
        for (gs, gt, alpha) in &collapses {
            let r = uf.find(*gs);
            match per_class.get(&r) {
                None => {
                    per_class.insert(r, (*gt, alpha.clone()));
                }
                Some((t0, a0)) => {
                    if a0 != alpha {
                        return Err(Error::UnsupportedColimit(
                            "a simplex collapses in two incompatible ways".into(),
                        ));
                    }
                    let t0 = *t0;
                    changed |= uf.union(t0, *gt);
                }
            }
        }
        if !changed {
            let mut out = vec![None; total];
            for g in 0..total {
                if let Some(c) = per_class.get(&uf.find(g)) {
                    out[g] = Some(c.clone());
                }
            }
            break out;
        }
    };

    let (class, n_classes) = uf.classes();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for g in 0..total {
        members[class[g]].push(g);
    }
    let collapsed: Vec<bool> = members.iter().map(|m| collapse_of[m[0]].is_some()).collect();
    let mut new_index = vec![usize::MAX; n_classes];
    let mut kept = Vec::new();
    for c in 0..n_classes {
        if !collapsed[c] {
            new_index[c] = kept.len();
            kept.push(c);
        }
    }

    let plain_id = |c: usize| {
        let mut ids: Vec<&str> = members[c]
            .iter()
            .map(|&g| {
                let (o, s) = locate(g);
                objs[o].id(s)
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.join("~")
    };
    let tagged_id = |c: usize| {
        let mut ids: Vec<String> = members[c]
            .iter()
            .map(|&g| {
                let (o, s) = locate(g);
                format!("{}:{}", o + 1, objs[o].id(s))
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.join("~")
    };
    let plain: Vec<String> = kept.iter().map(|&c| plain_id(c)).collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for p in &plain {
        *counts.entry(p).or_default() += 1;
    }
    let mut raw = Vec::with_capacity(kept.len());
    for (i, &c) in kept.iter().enumerate() {
        let id = if counts[plain[i].as_str()] > 1 { tagged_id(c) } else { plain[i].clone() };
        let rep = members[c][0];
        let label = if dim(rep) == 0 {
            let mut names: Vec<&str> = Vec::new();
            let mut type_name: Option<&str> = None;
            for &g in &members[c] {
                let (o, s) = locate(g);
                let l = objs[o].label(s).expect("a vertex");
                if let Some(t) = type_name {
                    if t != l.type_name {
                        return Err(Error::LabelConflict(format!(
                            "`{}` is glued to a vertex of type `{t}`",
                            objs[o].id(s)
                        )));
                    }
                }
                type_name = Some(&l.type_name);
                if !names.contains(&l.name.as_str()) {
                    names.push(&l.name);
                }
            }
            Some(VertexLabel {
                name: names.join("="),
                type_name: type_name.expect("nonempty class").to_string(),
            })
        } else {
            None
        };
        let mut faces = Vec::new();
        if dim(rep) > 0 {
            for k in 0..=dim(rep) {
                let fc = class[face(rep, k)];
                if collapsed[fc] {
                    return Err(Error::UnsupportedColimit(format!(
                        "`{id}` would keep a collapsed face"
                    )));
                }
                faces.push(new_index[fc]);
            }
        }
        raw.push(RawSimplex { id, faces, label });
    }
    let schema = Arc::new(Schema::from_parts(spec.clone(), raw)?);

    // Resolve each simplex to (kept class, alpha), following chains of collapses.
    fn resolve(
        g: usize,
        class: &[usize],
        collapse_of: &[Option<(usize, Vec<usize>)>],
        new_index: &[usize],
        dim: &dyn Fn(usize) -> usize,
    ) -> SimplexImage {
        match &collapse_of[g] {
            None => SimplexImage::identity(new_index[class[g]], dim(g)),
            Some((t, alpha)) => {
                let inner = resolve(*t, class, collapse_of, new_index, dim);
                SimplexImage {
                    target: inner.target,
                    alpha: alpha.iter().map(|&a| inner.alpha[a]).collect(),
                }
            }
        }
    }
    let mut legs = Vec::with_capacity(objs.len());
    for (o, obj) in objs.iter().enumerate() {
        let images = (0..obj.len())
            .map(|s| resolve(offset[o] + s, &class, &collapse_of, &new_index, &dim))
            .collect();
        legs.push(SchemaMorphism::new(obj.clone(), schema.clone(), images)?);
    }
    Ok(SchemaColimit { schema, legs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> Arc<TypeSpec> {
        Arc::new(TypeSpec::standard())
    }

    fn edge(s: &Arc<TypeSpec>, a: (&str, &str), b: (&str, &str), e: &str) -> Arc<Schema> {
        Schema::builder(s.clone())
            .vertex(a.0, a.0, a.1)
            .vertex(b.0, b.0, b.1)
            .simplex(e, &[b.0, a.0])
            .build()
            .unwrap()
    }

    fn triangle(s: &Arc<TypeSpec>) -> Arc<Schema> {
        let sigma = SimpleSchema::from_pairs(s, &[("a", "Str"), ("b", "Str"), ("c", "Z")]).unwrap();
        simplex_schema(&sigma)
    }

    #[test]
    fn simplex_schemas() {
        let s = spec();
        for (n, expect) in [(1, 1), (2, 3), (3, 7), (4, 15)] {
            let attrs: Vec<(String, &str)> = (0..n).map(|i| (format!("x{i}"), "Z")).collect();
            let pairs: Vec<(&str, &str)> = attrs.iter().map(|(a, t)| (a.as_str(), *t)).collect();
            let x = simplex_schema(&SimpleSchema::from_pairs(&s, &pairs).unwrap());
            assert_eq!(x.len(), expect);
            assert_eq!(x.max_dim(), Some(n - 1));
        }
        assert!(simplex_schema(&SimpleSchema::empty(s)).is_empty());
    }

    #[test]
    fn vertices_and_faces() {
        let s = spec();
        let t = triangle(&s);
        let top = t.index_of("a,b,c").unwrap();
        let names: Vec<&str> = t.vertices(top).iter().map(|&v| t.id(v)).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert_eq!(t.id(t.face(top, 1)), "a,c");
        assert_eq!(t.id(t.face_spanned(top, &[1])), "b");
        assert_eq!(t.proper_faces(top).len(), 6);
    }

    #[test]
    fn validation() {
        let s = spec();
        let no_face = Schema::builder(s.clone()).vertex("a", "a", "Z").simplex("e", &["a", "b"]).build();
        assert!(matches!(no_face, Err(Error::UnknownSimplex(_))));
        let bad_type = Schema::builder(s.clone()).vertex("a", "a", "Real").build();
        assert!(matches!(bad_type, Err(Error::UnknownType(_))));
        let looped = Schema::builder(s.clone()).vertex("a", "a", "Z").simplex("e", &["a", "a"]).build();
        assert!(matches!(looped, Err(Error::InvalidSchema(_))));
        // a "triangle" whose edges do not meet correctly
        let broken = Schema::builder(s.clone())
            .vertex("a", "a", "Z")
            .vertex("b", "b", "Z")
            .vertex("c", "c", "Z")
            .simplex("ab", &["b", "a"])
            .simplex("bc", &["c", "b"])
            .simplex("ac", &["c", "a"])
            .simplex("t", &["bc", "ab", "ab"])
            .build();
        assert!(matches!(broken, Err(Error::InvalidSchema(_))));
        let parallel = Schema::builder(s)
            .vertex("A", "City", "Str")
            .vertex("B", "City", "Str")
            .simplex("f", &["B", "A"])
            .simplex("g", &["A", "B"])
            .build()
            .unwrap();
        assert_eq!(parallel.len(), 4);
    }

    #[test]
    fn nd_counts() {
        let s = spec();
        let e = edge(&s, ("a", "Str"), ("b", "Z"), "e");
        assert_eq!(nd_category(&e).arrows.len(), 2);
        let t = triangle(&s);
        let nd = nd_category(&t);
        assert_eq!((nd.objects.len(), nd.arrows.len()), (7, 12));
        let disc = Schema::builder(s).vertex("a", "a", "Z").vertex("b", "b", "Z").build().unwrap();
        assert!(nd_category(&disc).arrows.is_empty());
    }

    #[test]
    fn subschemas() {
        let s = spec();
        let e = edge(&s, ("First", "Str"), ("BYear", "Z"), "e");
        let subs = enumerate_subschemas(&e).unwrap();
        assert_eq!(subs.len(), 5);
        assert_eq!(e.closure([e.index_of("e").unwrap()]), e.all());
        let v = e.subschema_of_ids(&["First"]).unwrap();
        assert_eq!(Subschema::empty().union(&v), v);
        assert!(e.subschema_of_ids(&["e"]).is_err());
        for a in &subs {
            for b in &subs {
                assert!(e.is_face_closed(a.union(b).members()));
                assert!(e.is_face_closed(a.intersect(b).members()));
            }
        }
        let big = simplex_schema(
            &SimpleSchema::from_pairs(&s, &[("a", "Z"), ("b", "Z"), ("c", "Z"), ("d", "Z"), ("e", "Z")]).unwrap(),
        );
        assert!(matches!(enumerate_subschemas(&big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn collapse_map() {
        let s = spec();
        let src = Schema::builder(s.clone())
            .vertex("x", "x", "Str")
            .vertex("y", "y", "Str")
            .simplex("xy", &["y", "x"])
            .build()
            .unwrap();
        let tgt = edge(&s, ("S", "Str"), ("N", "Z"), "SN");
        let f = SchemaMorphism::from_assignments(&src, &tgt, &[("xy", "S", vec![0, 0])]).unwrap();
        let str_vertex = tgt.subschema_of_ids(&["S"]).unwrap();
        assert_eq!(f.preimage_subschema(&str_vertex), src.all());
        assert_eq!(f.preimage_subschema(&Subschema::empty()), Subschema::empty());
        assert_eq!(f.image_subschema(&src.all()), str_vertex);
        assert!(!f.is_monic());
        let id = SchemaMorphism::identity(&tgt);
        assert_eq!(id.image_subschema(&tgt.all()), tgt.all());
        assert_eq!(f.then(&id).unwrap(), f);
    }

    #[test]
    fn glue_two_edges() {
        let s = spec();
        let e1 = edge(&s, ("a", "Str"), ("m", "Str"), "e1");
        let e2 = edge(&s, ("m", "Str"), ("c", "Str"), "e2");
        let v = Schema::builder(s.clone()).vertex("m", "m", "Str").build().unwrap();
        let d = SchemaDiagram {
            objects: vec![v.clone(), e1.clone(), e2.clone()],
            arrows: vec![
                SchemaArrow { source: 0, target: 1, map: SchemaMorphism::from_pairs(&v, &e1, &[("m", "m")]).unwrap() },
                SchemaArrow { source: 0, target: 2, map: SchemaMorphism::from_pairs(&v, &e2, &[("m", "m")]).unwrap() },
            ],
        };
        let c = schema_colimit(&d, &s).unwrap();
        assert_eq!(c.schema.vertex_ids().count(), 3);
        assert_eq!(c.schema.len(), 5);
        let via1 = d.arrows[0].map.then(&c.legs[1]).unwrap();
        let via2 = d.arrows[1].map.then(&c.legs[2]).unwrap();
        assert_eq!(via1, via2);
    }

    #[test]
    fn circle_from_two_edges() {
        let s = spec();
        let e1 = Schema::builder(s.clone()).vertex("A", "City", "Str").vertex("B", "City", "Str").simplex("f", &["B", "A"]).build().unwrap();
        let e2 = Schema::builder(s.clone()).vertex("C", "City", "Str").vertex("D", "City", "Str").simplex("g", &["D", "C"]).build().unwrap();
        let two = Schema::builder(s.clone()).vertex("p", "City", "Str").vertex("q", "City", "Str").build().unwrap();
        let d = SchemaDiagram {
            objects: vec![two.clone(), e1.clone(), e2.clone()],
            arrows: vec![
                SchemaArrow { source: 0, target: 1, map: SchemaMorphism::from_pairs(&two, &e1, &[("p", "A"), ("q", "B")]).unwrap() },
                SchemaArrow { source: 0, target: 2, map: SchemaMorphism::from_pairs(&two, &e2, &[("p", "D"), ("q", "C")]).unwrap() },
            ],
        };
        let c = schema_colimit(&d, &s).unwrap();
        assert_eq!(c.schema.vertex_ids().count(), 2);
        assert_eq!(c.schema.len(), 4);
        let vc = vertex_classifier(&c.schema);
        assert_eq!(vc.columns.len(), 2);
        let edge_of_delta = vc.simplex.len() - 1;
        for s in 0..c.schema.len() {
            if c.schema.dim(s) == 1 {
                assert_eq!(vc.map.image(s).target, edge_of_delta);
            }
        }
    }

    #[test]
    fn coproduct_of_vertices() {
        let s = spec();
        let v = Schema::builder(s.clone()).vertex("v", "v", "Z").build().unwrap();
        let d = SchemaDiagram { objects: vec![v.clone(), v.clone()], arrows: vec![] };
        let c = schema_colimit(&d, &s).unwrap();
        assert_eq!(c.schema.len(), 2);
        assert_eq!(c.schema.id(0), "1:v");
        assert_eq!(c.schema.id(1), "2:v");
    }

    #[test]
    fn classifier_of_a_simplex() {
        let s = spec();
        let t = triangle(&s);
        let vc = vertex_classifier(&t);
        assert_eq!(vc.simplex.len(), 7);
        assert!(vc.map.is_monic());
        assert!(vc.map.is_order_preserving());
        let disc = Schema::builder(s).vertex("a", "a", "Z").vertex("b", "b", "Z").build().unwrap();
        let vc = vertex_classifier(&disc);
        assert!((0..2).all(|v| vc.simplex.dim(vc.map.image(v).target) == 0));
    }

    #[test]
    fn morphism_enumeration() {
        let s = spec();
        let e = edge(&s, ("a", "Str"), ("b", "Str"), "e");
        let v = Schema::builder(s.clone()).vertex("x", "x", "Str").build().unwrap();
        assert_eq!(all_morphisms(&v, &e).len(), 2);
        // identity, plus the two collapses onto a vertex
        assert_eq!(all_morphisms(&e, &e).len(), 3);
        assert_eq!(schema_isomorphisms(&e, &e, 10).len(), 1);
    }
}
