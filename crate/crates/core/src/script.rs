//! Query scripts and the operations shared by scripts and the command line.
//!
//! ```text
//! a = load "first_last.json"
//! b = load "lname_byear.json"
//! j = join a b on Last=Last
//! g = global-table j
//! show g
//! save g "result.json"
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::database::{
    canonicalize_keys, canonicalize_table_keys, coproduct, db_delete, db_extend, db_join_on,
    db_project, db_pullback_along, db_pushforward, db_select, global_table, insert, to_relational,
    union_by_records, Database,
};
use crate::error::{Error, Result};
use crate::schema::{same, SchemaMorphism, Subschema};
use crate::storage::{self, render_schema, Document};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Join,
    Select,
    Project,
    Delete,
    Union,
    UnionAll,
    Insert,
    Pullback,
    Pushforward,
    Extend,
    ToRelational,
    GlobalTable,
}

impl Op {
    pub fn parse(word: &str) -> Option<Op> {
        Some(match word {
            "join" => Op::Join,
            "select" => Op::Select,
            "project" => Op::Project,
            "delete" => Op::Delete,
            "union" => Op::Union,
            "union-all" => Op::UnionAll,
            "insert" => Op::Insert,
            "pullback" => Op::Pullback,
            "pushforward" => Op::Pushforward,
            "extend" => Op::Extend,
            "to-relational" => Op::ToRelational,
            "global-table" => Op::GlobalTable,
            _ => return None,
        })
    }

    /// How many bound values the operation consumes.
    pub fn arity(self) -> usize {
        match self {
            Op::ToRelational | Op::GlobalTable | Op::Project => 1,
            _ => 2,
        }
    }
}

/// Extra words after the operands: `on` pairs for join, simplex ids for project.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpArgs {
    pub on: Vec<(String, String)>,
    pub keep: Vec<String>,
}

fn expect_db<'a>(d: &'a Document, what: &str) -> Result<&'a Database> {
    match d {
        Document::Database(db) => Ok(db),
        other => Err(Error::Format(format!("{what} must be a database, found a {}", other.kind()))),
    }
}

fn expect_morphism<'a>(d: &'a Document, what: &str) -> Result<&'a SchemaMorphism> {
    match d {
        Document::Morphism(m) => Ok(m),
        other => Err(Error::Format(format!("{what} must be a schema morphism, found a {}", other.kind()))),
    }
}

/// The simplices of `db`'s schema named by the selection's schema, as a subschema.
fn selection_subschema(db: &Database, selection: &Database) -> Result<Subschema> {
    let ids: Vec<&str> = (0..selection.schema().len()).map(|s| selection.schema().id(s)).collect();
    let sub = db.schema().subschema_of_ids(&ids)?;
    Ok(sub)
}

/// Checks the operands' kinds (exit code 1 territory) before running anything.
pub fn check_operands(op: Op, operands: &[&Document]) -> Result<()> {
    if operands.len() != op.arity() {
        return Err(Error::Arity { expected: op.arity(), found: operands.len() });
    }
    expect_db(operands[0], "the first operand")?;
    match op {
        Op::Pullback | Op::Pushforward | Op::Extend => {
            expect_morphism(operands[1], "the second operand")?;
        }
        _ if op.arity() == 2 => {
            expect_db(operands[1], "the second operand")?;
        }
        _ => {}
    }
    Ok(())
}

pub fn apply(op: Op, operands: &[&Document], args: &OpArgs) -> Result<Document> {
    check_operands(op, operands)?;
    let a = expect_db(operands[0], "the first operand")?;
    let second_db = || expect_db(operands[1], "the second operand");
    let along = || expect_morphism(operands[1], "the second operand");
    Ok(match op {
        Op::Join => {
            if args.on.is_empty() {
                return Err(Error::Format("join needs at least one `on` pair".into()));
            }
            let pairs: Vec<(&str, &str)> = args.on.iter().map(|(l, r)| (l.as_str(), r.as_str())).collect();
            Document::Database(db_join_on(a, second_db()?, &pairs)?.database()?)
        }
        Op::Select => {
            let sel = second_db()?;
            Document::Database(db_select(a, &selection_subschema(a, sel)?, sel)?)
        }
        Op::Delete => {
            let sel = second_db()?;
            Document::Database(db_delete(a, &selection_subschema(a, sel)?, sel)?)
        }
        Op::Project => {
            let ids: Vec<&str> = args.keep.iter().map(String::as_str).collect();
            let sub = a.schema().closure_of_ids(&ids)?;
            Document::Database(db_project(a, &sub)?)
        }
        Op::Union => Document::Database(union_by_records(a, &second_db()?.rebase(a.schema())?)?),
        Op::UnionAll => Document::Database(coproduct(a, &second_db()?.rebase(a.schema())?)?),
        Op::Insert => Document::Database(insert(a, second_db()?)?),
        Op::Pullback => {
            let f = along()?;
            let db = a.rebase(f.target())?;
            Document::Database(db_pullback_along(f, &db)?)
        }
        Op::Pushforward => {
            let f = along()?;
            if !same(f.source(), a.schema()) {
                return Err(Error::SchemaMismatch("pushforward runs along a map out of the database's schema".into()));
            }
            let c = db_pushforward(f, a)?;
            match Database::from_cylinder(&c) {
                Ok(db) => Document::Database(db),
                Err(Error::NonFiniteResult(_)) => Document::Cylinder(c),
                Err(e) => return Err(e),
            }
        }
        Op::Extend => {
            let f = along()?;
            let db = a.rebase(f.source())?;
            Document::Database(db_extend(f, &db)?)
        }
        Op::ToRelational => Document::Database(to_relational(a)),
        Op::GlobalTable => Document::Table(global_table(a)?),
    })
}

/// Renames keys to `k0, k1, ...`; other documents pass through.
pub fn canonical(doc: Document) -> Result<Document> {
    Ok(match doc {
        Document::Database(db) => Document::Database(canonicalize_keys(&db)?.0),
        Document::Table(t) => Document::Table(canonicalize_table_keys(&t)?.0),
        other => other,
    })
}

/// Human-readable rendering for `show`.
pub fn show(doc: &Document) -> String {
    match doc {
        Document::TypeSpec(_) | Document::Morphism(_) | Document::Cylinder(_) => doc.to_text(),
        Document::Schema(x) => render_schema(x),
        Document::Table(t) => t.to_string(),
        Document::Database(db) => {
            let x = db.schema();
            let mut out = String::new();
            for s in 0..x.len() {
                out.push_str(&format!("[{}]\n{}", x.id(s), db.table_at(s)));
                for (i, m) in db.sheaf().section(s).restrictions.iter().enumerate() {
                    let pairs: Vec<String> = m.iter().map(|(k, v)| format!("{k}->{v}")).collect();
                    out.push_str(&format!("  d{i} to {}: {}\n", x.id(x.face(s, i)), pairs.join(", ")));
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Load { name: String, path: String },
    Apply { name: String, op: Op, operands: Vec<String>, args: OpArgs },
    Show { name: String },
    Save { name: String, path: String },
}

impl Command {
    fn reads(&self) -> Vec<&str> {
        match self {
            Command::Load { .. } => vec![],
            Command::Apply { operands, .. } => operands.iter().map(String::as_str).collect(),
            Command::Show { name } | Command::Save { name, .. } => vec![name.as_str()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// Bad script text, unbound names, unreadable or invalid inputs.
    Validation,
    /// An operation failed on valid inputs.
    Engine,
}

#[derive(Debug)]
pub struct ScriptError {
    pub line: usize,
    pub binding: Option<String>,
    pub severity: Severity,
    pub source: Error,
}

impl ScriptError {
    pub fn exit_code(&self) -> i32 {
        match self.severity {
            Severity::Validation => 1,
            Severity::Engine => 2,
        }
    }
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)?;
        if let Some(b) = &self.binding {
            write!(f, " (`{b}`)")?;
        }
        write!(f, ": {}", self.source)
    }
}

impl std::error::Error for ScriptError {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    /// (line number, command)
    pub commands: Vec<(usize, Command)>,
}

fn tokenize(line: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(c) => s.push(c),
                    None => return Err("unterminated string".into()),
                }
            }
            out.push(format!("\"{s}"));
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                s.push(c);
                chars.next();
            }
            out.push(s);
        }
    }
    Ok(out)
}

fn quoted(tok: &str) -> Option<&str> {
    tok.strip_prefix('"')
}

fn ident(tok: &str) -> bool {
    !tok.is_empty()
        && tok.chars().all(|c| c.is_alphanumeric() || c == '_')
        && !tok.starts_with(|c: char| c.is_ascii_digit())
}

fn parse_line(tokens: &[String]) -> std::result::Result<Command, String> {
    let t: Vec<&str> = tokens.iter().map(String::as_str).collect();
    match t.as_slice() {
        ["show", name] if ident(name) => Ok(Command::Show { name: name.to_string() }),
        ["save", name, path] if ident(name) => match quoted(path) {
            Some(p) => Ok(Command::Save { name: name.to_string(), path: p.to_string() }),
            None => Err("save needs a quoted path".into()),
        },
        [name, "=", "load", path] if ident(name) => match quoted(path) {
            Some(p) => Ok(Command::Load { name: name.to_string(), path: p.to_string() }),
            None => Err("load needs a quoted path".into()),
        },
        [name, "=", word, rest @ ..] if ident(name) => {
            let op = Op::parse(word).ok_or_else(|| format!("unknown operation `{word}`"))?;
            let n = op.arity();
            if rest.len() < n || rest[..n].iter().any(|r| !ident(r)) {
                return Err(format!("`{word}` takes {n} operand{}", if n == 1 { "" } else { "s" }));
            }
            let operands = rest[..n].iter().map(|s| s.to_string()).collect();
            let extra = &rest[n..];
            let mut args = OpArgs::default();
            match (op, extra) {
                (Op::Join, ["on", pairs @ ..]) if !pairs.is_empty() => {
                    for p in pairs.join("").split(',').filter(|p| !p.is_empty()) {
                        let (l, r) = p.split_once('=').ok_or_else(|| format!("bad join pair `{p}`"))?;
                        args.on.push((l.to_string(), r.to_string()));
                    }
                }
                (Op::Join, _) => return Err("join needs `on a=b[,c=d]`".into()),
                (Op::Project, ids) => {
                    if ids.is_empty() {
                        return Err("project needs simplex ids".into());
                    }
                    args.keep = ids.iter().map(|s| s.trim_matches(',').to_string()).collect();
                }
                (_, []) => {}
                (_, more) => return Err(format!("unexpected `{}`", more.join(" "))),
            }
            Ok(Command::Apply { name: name.to_string(), op, operands, args })
        }
        _ => Err("cannot parse command".into()),
    }
}

impl Script {
    /// Parses and checks that every name is bound before use.
    pub fn parse(text: &str) -> std::result::Result<Script, ScriptError> {
        let mut commands = Vec::new();
        let mut bound: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or_default().trim();
            if body.is_empty() {
                continue;
            }
            let fail = |msg: String, binding: Option<String>| ScriptError {
                line,
                binding,
                severity: Severity::Validation,
                source: Error::Format(format!("{msg}: `{}`", raw.trim())),
            };
            let tokens = tokenize(body).map_err(|m| fail(m, None))?;
            let cmd = parse_line(&tokens).map_err(|m| fail(m, None))?;
            for r in cmd.reads() {
                if !bound.contains_key(r) {
                    return Err(fail(format!("unbound name `{r}`"), Some(r.to_string())));
                }
            }
            match &cmd {
                Command::Load { name, .. } | Command::Apply { name, .. } => {
                    bound.insert(name.clone(), line);
                }
                _ => {}
            }
            commands.push((line, cmd));
        }
        Ok(Script { commands })
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Directory that `load` paths are relative to.
    pub input_dir: PathBuf,
    /// Directory that `save` paths are relative to.
    pub output_dir: PathBuf,
    pub canonical_keys: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub shown: String,
    pub saved: Vec<PathBuf>,
}

pub fn run_script(text: &str, opts: &RunOptions) -> std::result::Result<RunOutput, ScriptError> {
    let script = Script::parse(text)?;
    let mut env: HashMap<String, Document> = HashMap::new();
    let mut out = RunOutput::default();
    for (line, cmd) in script.commands {
        let err = |binding: &str, severity, source| ScriptError {
            line,
            binding: Some(binding.to_string()),
            severity,
            source,
        };
        match cmd {
            Command::Load { name, path } => {
                let doc = storage::load(&resolve(&opts.input_dir, &path))
                    .map_err(|e| err(&name, Severity::Validation, e))?;
                env.insert(name, doc);
            }
            Command::Apply { name, op, operands, args } => {
                let docs: Vec<&Document> = operands.iter().map(|o| &env[o]).collect();
                check_operands(op, &docs).map_err(|e| err(&name, Severity::Validation, e))?;
                let doc = apply(op, &docs, &args).map_err(|e| err(&name, Severity::Engine, e))?;
                env.insert(name, doc);
            }
            Command::Show { name } => {
                let doc = finish(&env[&name], opts.canonical_keys).map_err(|e| err(&name, Severity::Engine, e))?;
                out.shown.push_str(&show(&doc));
            }
            Command::Save { name, path } => {
                let doc = finish(&env[&name], opts.canonical_keys).map_err(|e| err(&name, Severity::Engine, e))?;
                let target = resolve(&opts.output_dir, &path);
                storage::save(&target, &doc).map_err(|e| err(&name, Severity::Engine, e))?;
                out.saved.push(target);
            }
        }
    }
    Ok(out)
}

fn finish(doc: &Document, canonical_keys: bool) -> Result<Document> {
    if canonical_keys {
        canonical(doc.clone())
    } else {
        Ok(doc.clone())
    }
}

fn resolve(dir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}
