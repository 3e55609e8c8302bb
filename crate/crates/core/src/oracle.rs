//! A brute-force reference engine on explicit rows.
//!
//! Nothing here touches the simplicial machinery: sections are plain lists of keys and
//! restriction maps, and every answer comes from nested loops or exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::table::Table;
use crate::typespec::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatTable {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<(String, Vec<Value>)>,
}

impl FlatTable {
    pub fn new(columns: Vec<(String, String)>, rows: Vec<(String, Vec<Value>)>) -> Result<Self> {
        for (key, r) in &rows {
            if r.len() != columns.len() {
                return Err(Error::Arity { expected: columns.len(), found: r.len() });
            }
            for (i, (v, (_, t))) in r.iter().zip(&columns).enumerate() {
                if v.type_name() != t {
                    return Err(Error::InvalidTable(format!(
                        "row {key}: value at {i} has type `{}`, column wants `{t}`",
                        v.type_name()
                    )));
                }
            }
        }
        Ok(FlatTable { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted records, with columns reordered to `order`.
    pub fn multiset_in(&self, order: &[&str]) -> Result<Vec<Vec<Value>>> {
        let idx: Vec<usize> = order.iter().map(|c| self.column(c)).collect::<Result<_>>()?;
        let mut out: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|(_, r)| idx.iter().map(|&i| r[i].clone()).collect())
            .collect();
        out.sort();
        Ok(out)
    }

    pub fn multiset(&self) -> Vec<Vec<Value>> {
        let mut out: Vec<Vec<Value>> = self.rows.iter().map(|(_, r)| r.clone()).collect();
        out.sort();
        out
    }
}

impl From<&Table> for FlatTable {
    fn from(t: &Table) -> Self {
        FlatTable {
            columns: t
                .schema()
                .attributes()
                .iter()
                .map(|a| (a.name.clone(), a.type_name.clone()))
                .collect(),
            rows: t.rows().iter().map(|(k, r)| (k.clone(), r.values().to_vec())).collect(),
        }
    }
}

impl fmt::Display for FlatTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(f, "key | {}", names.join(" | "))?;
        for (k, r) in &self.rows {
            let vals: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{k} | {}", vals.join(" | "))?;
        }
        Ok(())
    }
}

/// Nested-loop equi-join. Output columns are all of `a`'s, then `b`'s columns not in `on`.
pub fn oracle_equijoin(a: &FlatTable, b: &FlatTable, on: &[(&str, &str)]) -> Result<FlatTable> {
    let mut pairs = Vec::with_capacity(on.len());
    for (ca, cb) in on {
        let (i, j) = (a.column(ca)?, b.column(cb)?);
        if a.columns[i].1 != b.columns[j].1 {
            return Err(Error::InvalidTable(format!(
                "cannot join `{ca}`: {} against `{cb}`: {}",
                a.columns[i].1, b.columns[j].1
            )));
        }
        pairs.push((i, j));
    }
    let dropped: BTreeSet<usize> = pairs.iter().map(|&(_, j)| j).collect();
    let kept: Vec<usize> = (0..b.columns.len()).filter(|j| !dropped.contains(j)).collect();
    let mut columns = a.columns.clone();
    columns.extend(kept.iter().map(|&j| b.columns[j].clone()));
    let mut rows = Vec::new();
    for (ka, ra) in &a.rows {
        for (kb, rb) in &b.rows {
            if pairs.iter().all(|&(i, j)| ra[i] == rb[j]) {
                let mut r = ra.clone();
                r.extend(kept.iter().map(|&j| rb[j].clone()));
                rows.push((format!("({ka},{kb})"), r));
            }
        }
    }
    Ok(FlatTable { columns, rows })
}

/// Keeps a row once for every predicate row agreeing with it on the predicate's columns.
/// A row matched by exactly one predicate row keeps its key.
pub fn oracle_select(t: &FlatTable, predicate: &FlatTable) -> Result<FlatTable> {
    let idx: Vec<usize> = predicate
        .columns
        .iter()
        .map(|(n, _)| t.column(n))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (k, r) in &t.rows {
        let hits: Vec<&String> = predicate
            .rows
            .iter()
            .filter(|(_, p)| idx.iter().zip(p).all(|(&i, v)| &r[i] == v))
            .map(|(pk, _)| pk)
            .collect();
        if hits.len() == 1 {
            rows.push((k.clone(), r.clone()));
        } else {
            rows.extend(hits.into_iter().map(|pk| (format!("({k},{pk})"), r.clone())));
        }
    }
    Ok(FlatTable { columns: t.columns.clone(), rows })
}

pub fn oracle_project(t: &FlatTable, columns: &[&str]) -> Result<FlatTable> {
    let idx: Vec<usize> = columns.iter().map(|c| t.column(c)).collect::<Result<_>>()?;
    Ok(FlatTable {
        columns: idx.iter().map(|&i| t.columns[i].clone()).collect(),
        rows: t
            .rows
            .iter()
            .map(|(k, r)| (k.clone(), idx.iter().map(|&i| r[i].clone()).collect()))
            .collect(),
    })
}

/// One row per distinct record, keeping the smallest key.
pub fn oracle_dedupe(t: &FlatTable) -> FlatTable {
    let mut sorted = t.rows.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut seen = BTreeSet::new();
    let rows = sorted.into_iter().filter(|(_, r)| seen.insert(r.clone())).collect();
    FlatTable { columns: t.columns.clone(), rows }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSimplex {
    pub id: String,
    /// Simplex index of each face, in face order.
    pub faces: Vec<usize>,
    pub keys: Vec<String>,
    /// One map per face.
    pub restrictions: Vec<BTreeMap<String, String>>,
    /// For a vertex: its column name, type and values by key.
    pub column: Option<(String, String, BTreeMap<String, Value>)>,
}

/// A database spelled out as sets and maps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExplicitSections {
    pub simplices: Vec<ExplicitSimplex>,
}

impl ExplicitSections {
    fn position(&self, id: &str) -> Result<usize> {
        self.simplices
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownSimplex(id.to_string()))
    }

    /// Keeps only the listed simplices, which must include all their faces.
    pub fn restrict(&self, ids: &[&str]) -> Result<ExplicitSections> {
        let mut keep: Vec<usize> = ids.iter().map(|id| self.position(id)).collect::<Result<_>>()?;
        keep.sort_unstable();
        keep.dedup();
        let mut simplices = Vec::with_capacity(keep.len());
        for &s in &keep {
            let old = &self.simplices[s];
            let faces = old
                .faces
                .iter()
                .map(|f| {
                    keep.iter().position(|k| k == f).ok_or_else(|| {
                        Error::NotFaceClosed(format!("`{}` lacks its face `{}`", old.id, self.simplices[*f].id))
                    })
                })
                .collect::<Result<_>>()?;
            simplices.push(ExplicitSimplex { faces, ..old.clone() });
        }
        Ok(ExplicitSections { simplices })
    }

    fn maximal(&self) -> Vec<usize> {
        let mut covered = vec![false; self.simplices.len()];
        for s in &self.simplices {
            for &f in &s.faces {
                covered[f] = true;
            }
        }
        (0..self.simplices.len()).filter(|&s| !covered[s]).collect()
    }

    pub fn columns(&self) -> Vec<(String, String)> {
        self.simplices
            .iter()
            .filter_map(|s| s.column.as_ref().map(|(n, t, _)| (n.clone(), t.clone())))
            .collect()
    }
}

/// Tries every choice of keys on the maximal simplices and keeps the ones whose restrictions
/// never disagree. Each surviving choice becomes one row over the vertex columns.
pub fn oracle_matching_families(x: &ExplicitSections) -> Result<FlatTable> {
    let maximal = x.maximal();
    let columns = x.columns();
    let n = x.simplices.len();
    let mut rows = Vec::new();
    let mut choice = vec![0usize; maximal.len()];
    if maximal.iter().any(|&m| x.simplices[m].keys.is_empty()) {
        return Ok(FlatTable { columns, rows });
    }
    'outer: loop {
        let mut assigned: Vec<Option<&String>> = vec![None; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut ok = true;
        for (i, &m) in maximal.iter().enumerate() {
            assigned[m] = Some(&x.simplices[m].keys[choice[i]]);
            stack.push(m);
        }
        while let Some(s) = stack.pop() {
            let k = assigned[s].expect("assigned before push");
            let simplex = &x.simplices[s];
            for (i, &f) in simplex.faces.iter().enumerate() {
                let Some(r) = simplex.restrictions[i].get(k) else {
                    ok = false;
                    break;
                };
                match assigned[f] {
                    Some(prev) if prev != r => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        assigned[f] = Some(r);
                        stack.push(f);
                    }
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            let mut names: Vec<String> = maximal
                .iter()
                .map(|&m| format!("{}:{}", x.simplices[m].id, assigned[m].expect("maximal")))
                .collect();
            names.sort();
            let mut record = Vec::with_capacity(columns.len());
            for (s, simplex) in x.simplices.iter().enumerate() {
                if let Some((name, _, values)) = &simplex.column {
                    let k = assigned[s].expect("every vertex lies under a maximal simplex");
                    let v = values
                        .get(k)
                        .ok_or_else(|| Error::InvalidDatabase(format!("column `{name}` has no value for {k}")))?;
                    record.push(v.clone());
                }
            }
            rows.push((format!("({})", names.join(",")), record));
        }
        for i in 0..choice.len() {
            choice[i] += 1;
            if choice[i] < x.simplices[maximal[i]].keys.len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        break;
    }
    Ok(FlatTable { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typespec::TypeSpec;

    fn v(spec: &TypeSpec, t: &str, text: &str) -> Value {
        spec.parse_value(t, text).unwrap()
    }

    fn obama(spec: &TypeSpec) -> FlatTable {
        let cols = vec![("First".into(), "Str".into()), ("Last".into(), "Str".into()), ("Age".into(), "Z".into())];
        let rows = [("1", "Barack", "Obama", "1961"), ("2", "Michelle", "Obama", "1964"), ("foo", "Barack", "Obama", "1961")]
            .iter()
            .map(|(k, a, b, c)| (k.to_string(), vec![v(spec, "Str", a), v(spec, "Str", b), v(spec, "Z", c)]))
            .collect();
        FlatTable::new(cols, rows).unwrap()
    }

    #[test]
    fn select_and_dedupe() {
        let spec = TypeSpec::standard();
        let t = obama(&spec);
        let p = FlatTable::new(vec![("First".into(), "Str".into())], vec![("b".into(), vec![v(&spec, "Str", "Barack")])]).unwrap();
        let s = oracle_select(&t, &p).unwrap();
        let keys: Vec<&str> = s.rows.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["1", "foo"]);
        assert_eq!(oracle_dedupe(&t).len(), 2);
        assert_eq!(oracle_project(&t, &["First", "Last", "Age"]).unwrap(), t);
    }

    #[test]
    fn joins() {
        let spec = TypeSpec::standard();
        let t = obama(&spec);
        let empty = FlatTable::new(t.columns.clone(), vec![]).unwrap();
        assert!(oracle_equijoin(&t, &empty, &[("Last", "Last")]).unwrap().is_empty());
        let other = FlatTable::new(vec![("X".into(), "Z".into())], vec![("a".into(), vec![v(&spec, "Z", "1")]), ("b".into(), vec![v(&spec, "Z", "2")])]).unwrap();
        assert_eq!(oracle_equijoin(&t, &other, &[]).unwrap().len(), 6);
        assert!(oracle_equijoin(&t, &other, &[("First", "X")]).is_err());
    }

    #[test]
    fn edge_families() {
        let spec = TypeSpec::standard();
        let col = |name: &str, t: &str, vals: &[(&str, &str)]| {
            Some((name.to_string(), t.to_string(), vals.iter().map(|(k, x)| (k.to_string(), v(&spec, t, x))).collect()))
        };
        let strs = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let map = |xs: &[(&str, &str)]| xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let x = ExplicitSections {
            simplices: vec![
                ExplicitSimplex { id: "First".into(), faces: vec![], keys: strs(&["1", "2"]), restrictions: vec![], column: col("First", "Str", &[("1", "Barack"), ("2", "Michelle")]) },
                ExplicitSimplex { id: "BYear".into(), faces: vec![], keys: strs(&["x", "y", "z"]), restrictions: vec![], column: col("BYear", "Z", &[("x", "1961"), ("y", "1946"), ("z", "1964")]) },
                ExplicitSimplex {
                    id: "e".into(),
                    faces: vec![1, 0],
                    keys: strs(&["4", "cc", "10"]),
                    restrictions: vec![map(&[("4", "x"), ("cc", "z"), ("10", "z")]), map(&[("4", "1"), ("cc", "2"), ("10", "2")])],
                    column: None,
                },
            ],
        };
        let f = oracle_matching_families(&x).unwrap();
        assert_eq!(f.len(), 3);
        let verts = x.restrict(&["First", "BYear"]).unwrap();
        assert_eq!(oracle_matching_families(&verts).unwrap().len(), 6);
        assert!(x.restrict(&["e"]).is_err());
    }
}
