#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use sdb_core::database::{global_table, to_explicit_sections, Database};
use sdb_core::oracle::{oracle_matching_families, FlatTable};
use sdb_core::schema::{Schema, Subschema};
use sdb_core::simple_schema::SimpleSchema;
use sdb_core::table::Table;
use sdb_core::typespec::{DataTypeDomain, Payload, TypeSpec, Value};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub fn seed() -> u64 {
    std::env::var("SDB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Bool, a three-colour enum and strings; every value a generator draws comes from a tiny pool
/// so that joins and selections actually match.
pub fn small_spec() -> Arc<TypeSpec> {
    Arc::new(
        TypeSpec::new([
            ("Bool", DataTypeDomain::Bool),
            ("Color", DataTypeDomain::enumeration(&["r", "g", "b"])),
            ("Str", DataTypeDomain::String),
        ])
        .unwrap(),
    )
}

pub fn bool_spec() -> Arc<TypeSpec> {
    Arc::new(TypeSpec::new([("Bool", DataTypeDomain::Bool)]).unwrap())
}

pub struct Gen {
    pub rng: StdRng,
    pub spec: Arc<TypeSpec>,
}

impl Gen {
    pub fn new(salt: u64) -> Gen {
        Gen {
            rng: StdRng::seed_from_u64(seed() ^ salt),
            spec: small_spec(),
        }
    }

    pub fn from_seed(seed: u64) -> Gen {
        Gen {
            rng: StdRng::seed_from_u64(seed),
            spec: small_spec(),
        }
    }

    pub fn random_type(&mut self) -> &'static str {
        ["Bool", "Color", "Str"].choose(&mut self.rng).unwrap()
    }

    pub fn random_payload(&mut self, ty: &str) -> Payload {
        match ty {
            "Bool" => Payload::Bool(self.rng.gen()),
            "Color" => Payload::Enum(["r", "g", "b"].choose(&mut self.rng).unwrap().to_string()),
            _ => Payload::Text(["a", "b", "c"].choose(&mut self.rng).unwrap().to_string()),
        }
    }

    /// Forced vertices come first (id = name), then up to `extra` random ones named
    /// `{prefix}{i}`. Forced edges are always present; other edges and triangles are coin flips,
    /// stopping at `max_simplices`.
    pub fn schema(
        &mut self,
        prefix: &str,
        forced: &[(&str, &str)],
        forced_edges: &[(&str, &str)],
        extra: usize,
        max_simplices: usize,
    ) -> Arc<Schema> {
        let mut vertices: Vec<(String, String)> =
            forced.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect();
        let n_extra = self.rng.gen_range(0..=extra);
        for i in 0..n_extra {
            let t = self.random_type().to_string();
            vertices.push((format!("{prefix}{i}"), t));
        }
        let mut count = vertices.len();
        let mut b = Schema::builder(self.spec.clone());
        for (id, t) in &vertices {
            b = b.vertex(id, id, t);
        }
        let mut edges: HashMap<(usize, usize), String> = HashMap::new();
        let pos = |id: &str| vertices.iter().position(|(v, _)| v == id).unwrap();
        for (x, y) in forced_edges {
            let (i, j) = (pos(x), pos(y));
            let id = format!("{}_{}", vertices[i].0, vertices[j].0);
            b = b.simplex(&id, &[&vertices[j].0, &vertices[i].0]);
            edges.insert((i, j), id);
            count += 1;
        }
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                if count >= max_simplices || edges.contains_key(&(i, j)) || !self.rng.gen_bool(0.5) {
                    continue;
                }
                let id = format!("{}_{}", vertices[i].0, vertices[j].0);
                b = b.simplex(&id, &[&vertices[j].0, &vertices[i].0]);
                edges.insert((i, j), id);
                count += 1;
            }
        }
        let n = vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if count >= max_simplices || !self.rng.gen_bool(0.5) {
                        continue;
                    }
                    let (Some(jk), Some(ik), Some(ij)) =
                        (edges.get(&(j, k)), edges.get(&(i, k)), edges.get(&(i, j)))
                    else {
                        continue;
                    };
                    let id = format!("{}_{}_{}", vertices[i].0, vertices[j].0, vertices[k].0);
                    b = b.simplex(&id, &[jk, ik, ij]);
                    count += 1;
                }
            }
        }
        b.build().unwrap()
    }

    /// Up to `max_keys` keys per simplex. Higher simplices pick among compatible face tuples,
    /// possibly twice, so the result need not be relational.
    pub fn database(&mut self, x: &Arc<Schema>, max_keys: usize) -> Database {
        let mut keys: Vec<Vec<String>> = vec![Vec::new(); x.len()];
        let mut restr: Vec<Vec<HashMap<String, String>>> = vec![Vec::new(); x.len()];
        let mut b = Database::builder(x);
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by_key(|&s| x.dim(s));
        for s in order {
            let n = self.rng.gen_range(0..=max_keys);
            let id = x.id(s).to_string();
            if x.dim(s) == 0 {
                let ty = x.vertex_type(s).to_string();
                let rows: Vec<(String, Vec<Payload>)> =
                    (0..n).map(|i| (format!("k{i}"), vec![self.random_payload(&ty)])).collect();
                keys[s] = rows.iter().map(|(k, _)| k.clone()).collect();
                b = b.rows(&id, rows.iter().map(|(k, p)| (k.as_str(), p.clone())).collect());
                continue;
            }
            let faces = x.faces(s).to_vec();
            let mut candidates: Vec<Vec<String>> = vec![vec![]];
            for &f in &faces {
                let mut next = Vec::new();
                for c in &candidates {
                    for k in &keys[f] {
                        let mut c = c.clone();
                        c.push(k.clone());
                        next.push(c);
                    }
                }
                candidates = next;
            }
            candidates.retain(|c| {
                x.dim(s) < 2
                    || (0..faces.len()).all(|j| {
                    (0..j).all(|i| restr[faces[j]][i].get(&c[j]) == restr[faces[i]][j - 1].get(&c[i]))
                })
            });
            if candidates.is_empty() {
                restr[s] = vec![HashMap::new(); faces.len()];
                continue;
            }
            let mut maps = vec![HashMap::new(); faces.len()];
            for i in 0..n {
                let key = format!("k{i}");
                let c = candidates.choose(&mut self.rng).unwrap().clone();
                for (f, fk) in c.into_iter().enumerate() {
                    maps[f].insert(key.clone(), fk);
                }
                keys[s].push(key);
            }
            let kref: Vec<&str> = keys[s].iter().map(String::as_str).collect();
            b = b.keys(&id, &kref);
            for (f, m) in maps.iter().enumerate() {
                let pairs: Vec<(&str, &str)> = m.iter().map(|(a, c)| (a.as_str(), c.as_str())).collect();
                b = b.restrict(&id, f, &pairs);
            }
            restr[s] = maps;
        }
        b.build().unwrap()
    }

    pub fn table(&mut self, prefix: &str, max_cols: usize, max_rows: usize) -> Table {
        let n = self.rng.gen_range(1..=max_cols);
        let cols: Vec<(String, String)> =
            (0..n).map(|i| (format!("{prefix}{i}"), self.random_type().to_string())).collect();
        let pairs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let schema = SimpleSchema::from_pairs(&self.spec, &pairs).unwrap();
        let rows = self.rng.gen_range(0..=max_rows);
        let data: Vec<(String, Vec<Payload>)> = (0..rows)
            .map(|i| (format!("r{i}"), cols.iter().map(|(_, t)| self.random_payload(t)).collect()))
            .collect();
        Table::from_raw(schema, data.iter().map(|(k, v)| (k.as_str(), v.clone())).collect()).unwrap()
    }

    pub fn simplex_of(&mut self, x: &Schema) -> usize {
        self.rng.gen_range(0..x.len())
    }
}

/// Global families computed by brute force, never by the engine.
pub fn oracle_global(db: &Database) -> FlatTable {
    oracle_matching_families(&to_explicit_sections(db)).unwrap()
}

pub fn engine_global(db: &Database) -> FlatTable {
    FlatTable::from(&global_table(db).unwrap())
}

pub fn column_names(t: &FlatTable) -> Vec<&str> {
    t.columns.iter().map(|(n, _)| n.as_str()).collect()
}

/// Multisets agree once columns are matched by name.
pub fn same_records(engine: &FlatTable, oracle: &FlatTable) -> Result<(), String> {
    let order = column_names(oracle);
    let mut a = column_names(engine);
    let mut b = order.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(format!("columns differ: {a:?} vs {b:?}"));
    }
    let left = engine.multiset_in(&order).map_err(|e| e.to_string())?;
    let right = oracle.multiset();
    if left != right {
        return Err(format!("records differ:\nengine\n{engine}\noracle\n{oracle}"));
    }
    Ok(())
}

pub fn vertex_names(x: &Schema, sub: &Subschema) -> Vec<String> {
    let verts: Vec<usize> = sub.iter().filter(|&s| x.dim(s) == 0).collect();
    x.column_names(&verts)
}

pub fn value(spec: &TypeSpec, ty: &str, text: &str) -> Value {
    spec.parse_value(ty, text).unwrap()
}
