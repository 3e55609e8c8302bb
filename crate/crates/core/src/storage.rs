//! On-disk formats: one JSON envelope per value, DOT for schemas, CSV for flat tables.
//!
//! Every writer produces sorted object keys, two-space indentation and a trailing newline, so
//! saving a loaded value reproduces the file byte for byte once it has been written once.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Read;
use std::sync::Arc;

use serde_json::{json, Map, Value as Json};

use crate::database::Database;
use crate::error::{Error, Result};
use crate::keysheaf::{CylinderSheaf, KeySheaf, PartialRecord, Section};
use crate::schema::{RawSimplex, Schema, SchemaMorphism, SimplexImage, VertexLabel};
use crate::simple_schema::{Attribute, Record, SimpleSchema};
use crate::table::{Key, Table};
use crate::typespec::{Payload, TypeSpec};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone)]
pub enum Document {
    TypeSpec(Arc<TypeSpec>),
    Schema(Arc<Schema>),
    Table(Table),
    Database(Database),
    Cylinder(CylinderSheaf),
    Morphism(SchemaMorphism),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::TypeSpec(_) => "typespec",
            Document::Schema(_) => "schema",
            Document::Table(_) => "table",
            Document::Database(_) => "database",
            Document::Cylinder(_) => "cylinder",
            Document::Morphism(_) => "morphism",
        }
    }

    pub fn to_json(&self) -> Json {
        let mut body = match self {
            Document::TypeSpec(t) => typespec_json(t),
            Document::Schema(x) => schema_json(x),
            Document::Table(t) => table_json(t),
            Document::Database(d) => database_json(d),
            Document::Cylinder(c) => cylinder_json(c),
            Document::Morphism(m) => morphism_json(m),
        };
        let obj = body.as_object_mut().expect("bodies are objects");
        obj.insert("kind".into(), json!(self.kind()));
        obj.insert("version".into(), json!(FORMAT_VERSION));
        body
    }

    pub fn to_text(&self) -> String {
        to_text(&self.to_json())
    }

    pub fn from_text(text: &str) -> Result<Document> {
        let j: Json = serde_json::from_str(text)?;
        Document::from_json(&j)
    }

    pub fn from_json(j: &Json) -> Result<Document> {
        let obj = j.as_object().ok_or_else(|| fmt_err("top level must be an object"))?;
        match obj.get("version").and_then(Json::as_u64) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(fmt_err(format!("unsupported format version {v}"))),
            None => return Err(fmt_err("missing `version`")),
        }
        let kind = obj.get("kind").and_then(Json::as_str).ok_or_else(|| fmt_err("missing `kind`"))?;
        Ok(match kind {
            "typespec" => Document::TypeSpec(typespec_from(j)?),
            "schema" => Document::Schema(schema_from(j)?),
            "table" => Document::Table(table_from(j)?),
            "database" => Document::Database(database_from(j)?),
            "cylinder" => Document::Cylinder(cylinder_from(j)?),
            "morphism" => Document::Morphism(morphism_from(j)?),
            other => return Err(fmt_err(format!("unknown kind `{other}`"))),
        })
    }
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn to_text(j: &Json) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("json values serialize");
    s.push('\n');
    s
}

pub fn load(path: &std::path::Path) -> Result<Document> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    Document::from_text(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        Error::Json(j) => Error::Format(format!("{}: {j}", path.display())),
        other => other,
    })
}

pub fn save(path: &std::path::Path, doc: &Document) -> Result<()> {
    std::fs::write(path, doc.to_text())?;
    Ok(())
}

fn field<'a>(j: &'a Json, name: &str) -> Result<&'a Json> {
    j.get(name).ok_or_else(|| fmt_err(format!("missing `{name}`")))
}

fn str_field<'a>(j: &'a Json, name: &str) -> Result<&'a str> {
    field(j, name)?.as_str().ok_or_else(|| fmt_err(format!("`{name}` must be a string")))
}

fn array<'a>(j: &'a Json, name: &str) -> Result<&'a Vec<Json>> {
    field(j, name)?.as_array().ok_or_else(|| fmt_err(format!("`{name}` must be an array")))
}

fn object<'a>(j: &'a Json, name: &str) -> Result<&'a Map<String, Json>> {
    field(j, name)?.as_object().ok_or_else(|| fmt_err(format!("`{name}` must be an object")))
}

fn typespec_json(t: &TypeSpec) -> Json {
    serde_json::to_value(t).expect("type specs serialize")
}

fn typespec_from(j: &Json) -> Result<Arc<TypeSpec>> {
    let t: TypeSpec = serde_json::from_value(json!({ "types": field(j, "types")? }))?;
    t.validate()?;
    Ok(Arc::new(t))
}

fn embedded_spec(j: &Json) -> Result<Arc<TypeSpec>> {
    typespec_from(field(j, "typespec")?)
}

fn schema_json(x: &Schema) -> Json {
    let simplices: Vec<Json> = (0..x.len())
        .map(|s| match x.label(s) {
            Some(l) => json!({ "id": x.id(s), "name": l.name, "type": l.type_name }),
            None => json!({
                "id": x.id(s),
                "faces": x.faces(s).iter().map(|&f| x.id(f)).collect::<Vec<_>>(),
            }),
        })
        .collect();
    json!({ "typespec": typespec_json(x.spec()), "simplices": simplices })
}

fn schema_from(j: &Json) -> Result<Arc<Schema>> {
    schema_with_spec(j, embedded_spec(j)?)
}

fn schema_with_spec(j: &Json, spec: Arc<TypeSpec>) -> Result<Arc<Schema>> {
    let items = array(j, "simplices")?;
    let mut index = HashMap::new();
    for (i, item) in items.iter().enumerate() {
        index.insert(str_field(item, "id")?.to_string(), i);
    }
    let mut raw = Vec::with_capacity(items.len());
    for item in items {
        let id = str_field(item, "id")?.to_string();
        if item.get("faces").is_some() {
            let faces = array(item, "faces")?
                .iter()
                .map(|f| {
                    let f = f.as_str().ok_or_else(|| fmt_err("face ids must be strings"))?;
                    index.get(f).copied().ok_or_else(|| Error::UnknownSimplex(f.to_string()))
                })
                .collect::<Result<_>>()?;
            raw.push(RawSimplex { id, faces, label: None });
        } else {
            let label = VertexLabel {
                name: str_field(item, "name")?.to_string(),
                type_name: str_field(item, "type")?.to_string(),
            };
            raw.push(RawSimplex { id, faces: vec![], label: Some(label) });
        }
    }
    Ok(Arc::new(Schema::from_parts(spec, raw)?))
}

fn record_json(r: &Record) -> Json {
    Json::Array(r.values().iter().map(|v| v.to_json()).collect())
}

fn table_json(t: &Table) -> Json {
    let columns: Vec<Json> = t
        .schema()
        .attributes()
        .iter()
        .map(|a| json!({ "name": a.name, "type": a.type_name }))
        .collect();
    let rows: Map<String, Json> = t.rows().iter().map(|(k, r)| (k.clone(), record_json(r))).collect();
    json!({ "typespec": typespec_json(t.schema().spec()), "columns": columns, "rows": rows })
}

fn table_from(j: &Json) -> Result<Table> {
    let spec = embedded_spec(j)?;
    let attrs = array(j, "columns")?
        .iter()
        .map(|c| Ok(Attribute::new(str_field(c, "name")?, str_field(c, "type")?)))
        .collect::<Result<Vec<_>>>()?;
    let schema = SimpleSchema::new(spec.clone(), attrs)?;
    let mut rows = Vec::new();
    for (k, vals) in object(j, "rows")? {
        rows.push((k.clone(), record_from(&schema, vals)?));
    }
    Table::new(schema, rows)
}

fn record_from(schema: &SimpleSchema, vals: &Json) -> Result<Record> {
    let vals = vals.as_array().ok_or_else(|| fmt_err("a row must be an array"))?;
    if vals.len() != schema.len() {
        return Err(Error::Arity { expected: schema.len(), found: vals.len() });
    }
    let values = schema
        .attributes()
        .iter()
        .zip(vals)
        .map(|(a, v)| schema.spec().value_from_json(&a.type_name, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Record(values))
}

fn section_json(x: &Schema, k: &KeySheaf, s: usize) -> Map<String, Json> {
    let sec = k.section(s);
    let mut m = Map::new();
    m.insert("keys".into(), json!(sec.keys.iter().collect::<Vec<_>>()));
    if !sec.restrictions.is_empty() {
        let r: Map<String, Json> = sec
            .restrictions
            .iter()
            .enumerate()
            .map(|(i, map)| (i.to_string(), json!(map)))
            .collect();
        m.insert("restrictions".into(), Json::Object(r));
    }
    debug_assert_eq!(sec.restrictions.len(), x.faces(s).len());
    m
}

fn database_json(d: &Database) -> Json {
    let x = d.schema();
    let data: Map<String, Json> = (0..x.len())
        .map(|s| {
            let mut m = section_json(x, d.sheaf(), s);
            let rows: Map<String, Json> = d.data().records[s].iter().map(|(k, r)| (k.clone(), record_json(r))).collect();
            m.insert("rows".into(), Json::Object(rows));
            (x.id(s).to_string(), Json::Object(m))
        })
        .collect();
    json!({ "schema": schema_json(x), "data": data })
}

fn cylinder_json(c: &CylinderSheaf) -> Json {
    let x = c.base();
    let data: Map<String, Json> = (0..x.len())
        .map(|s| {
            let mut m = section_json(x, c.sheaf(), s);
            let rows: Map<String, Json> = c
                .rows(s)
                .iter()
                .map(|(k, r)| {
                    let vals: Vec<Json> = r.iter().map(|v| v.as_ref().map_or(Json::Null, |v| v.to_json())).collect();
                    (k.clone(), Json::Array(vals))
                })
                .collect();
            m.insert("rows".into(), Json::Object(rows));
            (x.id(s).to_string(), Json::Object(m))
        })
        .collect();
    json!({ "schema": schema_json(x), "data": data })
}

fn key_list(j: &Json) -> Result<Vec<Key>> {
    array(j, "keys")?
        .iter()
        .map(|k| k.as_str().map(str::to_string).ok_or_else(|| fmt_err("keys must be strings")))
        .collect()
}

fn restriction_maps(j: &Json, n_faces: usize) -> Result<Vec<BTreeMap<Key, Key>>> {
    let mut out = vec![BTreeMap::new(); n_faces];
    if n_faces == 0 {
        return Ok(out);
    }
    for (i, m) in object(j, "restrictions")? {
        let i: usize = i.parse().map_err(|_| fmt_err(format!("face index `{i}` is not a number")))?;
        if i >= n_faces {
            return Err(fmt_err(format!("face index {i} out of range")));
        }
        out[i] = serde_json::from_value(m.clone())?;
    }
    Ok(out)
}

fn sections_from(x: &Schema, data: &Map<String, Json>) -> Result<Vec<Section>> {
    for id in data.keys() {
        if x.find(id).is_none() {
            return Err(Error::UnknownSimplex(id.clone()));
        }
    }
    (0..x.len())
        .map(|s| match data.get(x.id(s)) {
            Some(j) => Ok(Section {
                keys: key_list(j)?.into_iter().collect(),
                restrictions: restriction_maps(j, x.faces(s).len())?,
            }),
            None => Ok(Section::empty(x.faces(s).len())),
        })
        .collect()
}

fn database_from(j: &Json) -> Result<Database> {
    let x = schema_from(field(j, "schema")?)?;
    let data = object(j, "data")?;
    let sheaf = KeySheaf::new(x.clone(), sections_from(&x, data)?)?;
    let mut b = Database::builder(&x);
    for s in 0..x.len() {
        let id = x.id(s);
        let sec = sheaf.section(s);
        let keys: Vec<&str> = sec.keys.iter().map(String::as_str).collect();
        b = b.keys(id, &keys);
        for (i, m) in sec.restrictions.iter().enumerate() {
            let pairs: Vec<(&str, &str)> = m.iter().map(|(a, c)| (a.as_str(), c.as_str())).collect();
            b = b.restrict(id, i, &pairs);
        }
        let Some(rows) = data.get(id).and_then(|d| d.get("rows")) else { continue };
        let rows = rows.as_object().ok_or_else(|| fmt_err("`rows` must be an object"))?;
        let schema = x.vertex_schema(s);
        let mut raw = Vec::with_capacity(rows.len());
        for (k, vals) in rows {
            let rec = record_from(&schema, vals)?;
            raw.push((k.as_str(), rec.values().iter().map(|v| v.payload().clone()).collect::<Vec<Payload>>()));
        }
        b = b.rows(id, raw);
    }
    b.build()
}

fn cylinder_from(j: &Json) -> Result<CylinderSheaf> {
    let x = schema_from(field(j, "schema")?)?;
    let data = object(j, "data")?;
    let sheaf = KeySheaf::new(x.clone(), sections_from(&x, data)?)?;
    let mut partial = Vec::with_capacity(x.len());
    for s in 0..x.len() {
        let types = x.position_types(s);
        let mut m = BTreeMap::new();
        if let Some(rows) = data.get(x.id(s)).and_then(|d| d.get("rows")) {
            let rows = rows.as_object().ok_or_else(|| fmt_err("`rows` must be an object"))?;
            for (k, vals) in rows {
                let vals = vals.as_array().ok_or_else(|| fmt_err("a row must be an array"))?;
                if vals.len() != types.len() {
                    return Err(Error::Arity { expected: types.len(), found: vals.len() });
                }
                let row: PartialRecord = types
                    .iter()
                    .zip(vals)
                    .map(|(t, v)| if v.is_null() { Ok(None) } else { x.spec().value_from_json(t, v).map(Some) })
                    .collect::<Result<_>>()?;
                m.insert(k.clone(), row);
            }
        }
        partial.push(m);
    }
    CylinderSheaf::new(sheaf, partial)
}

fn morphism_json(m: &SchemaMorphism) -> Json {
    let (src, tgt) = (m.source(), m.target());
    let images: Map<String, Json> = (0..src.len())
        .map(|s| {
            let img = m.image(s);
            (src.id(s).to_string(), json!({ "target": tgt.id(img.target), "alpha": img.alpha }))
        })
        .collect();
    json!({ "source": schema_json(src), "target": schema_json(tgt), "images": images })
}

fn morphism_from(j: &Json) -> Result<SchemaMorphism> {
    let src = schema_from(field(j, "source")?)?;
    let tgt = schema_from(field(j, "target")?)?;
    let images_j = object(j, "images")?;
    let mut images = Vec::with_capacity(src.len());
    for s in 0..src.len() {
        let img = images_j
            .get(src.id(s))
            .ok_or_else(|| fmt_err(format!("no image for `{}`", src.id(s))))?;
        let t = str_field(img, "target")?;
        let target = tgt.index_of(t)?;
        let alpha: Vec<usize> = serde_json::from_value(field(img, "alpha")?.clone())?;
        images.push(SimplexImage { target, alpha });
    }
    SchemaMorphism::new(src, tgt, images)
}

/// Graphviz text for the face poset: one node per simplex, one arc per face.
pub fn render_schema(x: &Schema) -> String {
    let mut out = String::from("digraph schema {\n  rankdir=BT;\n");
    for s in 0..x.len() {
        let label = match x.label(s) {
            Some(l) => format!("{}: {} ({})", x.id(s), l.name, l.type_name),
            None => x.id(s).to_string(),
        };
        let shape = if x.dim(s) == 0 { "ellipse" } else { "box" };
        writeln!(out, "  {:?} [label={:?}, shape={shape}];", x.id(s), label).expect("string write");
    }
    for s in 0..x.len() {
        for (i, &f) in x.faces(s).iter().enumerate() {
            writeln!(out, "  {:?} -> {:?} [label=\"d{i}\"];", x.id(s), x.id(f)).expect("string write");
        }
    }
    out.push_str("}\n");
    out
}

/// Reads a CSV whose header cells are `name:type`. Keys come from `key_column` when given,
/// otherwise rows are numbered `r0, r1, ...`.
pub fn import_csv(reader: impl Read, spec: &Arc<TypeSpec>, key_column: Option<&str>) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut attrs = Vec::new();
    let mut key_pos = None;
    for (i, h) in headers.iter().enumerate() {
        if Some(h) == key_column {
            key_pos = Some(i);
            continue;
        }
        let (name, ty) = h
            .split_once(':')
            .ok_or_else(|| fmt_err(format!("header `{h}` should read name:type")))?;
        attrs.push((i, Attribute::new(name, ty)));
    }
    if key_column.is_some() && key_pos.is_none() {
        return Err(Error::UnknownAttribute(key_column.unwrap_or_default().to_string()));
    }
    let schema = SimpleSchema::new(spec.clone(), attrs.iter().map(|(_, a)| a.clone()).collect())?;
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let key = match key_pos {
            Some(p) => rec.get(p).unwrap_or_default().to_string(),
            None => format!("r{n}"),
        };
        let values = attrs
            .iter()
            .map(|(i, a)| spec.parse_value(&a.type_name, rec.get(*i).unwrap_or_default()))
            .collect::<Result<Vec<_>>>()?;
        rows.push((key, Record(values)));
    }
    if rows.iter().map(|(k, _)| k).collect::<std::collections::BTreeSet<_>>().len() != rows.len() {
        return Err(Error::InvalidTable("duplicate keys in the key column".into()));
    }
    Table::new(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Arc<Schema> {
        Schema::builder(Arc::new(TypeSpec::standard()))
            .vertex("First", "First", "Str")
            .vertex("BYear", "BYear", "Z")
            .simplex("e", &["BYear", "First"])
            .build()
            .unwrap()
    }

    #[test]
    fn schema_round_trip() {
        let d = Document::Schema(edge());
        let text = d.to_text();
        assert!(text.ends_with("}\n"));
        assert_eq!(Document::from_text(&text).unwrap().to_text(), text);
    }

    #[test]
    fn version_gate() {
        let mut j = Document::Schema(edge()).to_json();
        j["version"] = json!(2);
        assert!(matches!(Document::from_json(&j), Err(Error::Format(_))));
    }

    #[test]
    fn dot_counts() {
        let dot = render_schema(&edge());
        assert_eq!(dot.matches("shape=").count(), 3);
        assert_eq!(dot.matches(" -> ").count(), 2);
    }

    #[test]
    fn csv_with_and_without_keys() {
        let spec = Arc::new(TypeSpec::standard());
        let text = "id,First:Str,Age:Z\n1,Barack,1961\nfoo,Barack,1961\n";
        let t = import_csv(text.as_bytes(), &spec, Some("id")).unwrap();
        assert_eq!(t.keys().collect::<Vec<_>>(), ["1", "foo"]);
        let t = import_csv("First:Str\nA\nB\n".as_bytes(), &spec, None).unwrap();
        assert_eq!(t.keys().collect::<Vec<_>>(), ["r0", "r1"]);
    }
}
