use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sdb_core::oracle::{oracle_equijoin, FlatTable};
use sdb_core::script::{apply, canonical, check_operands, run_script, show, Op, OpArgs, RunOptions};
use sdb_core::storage::{import_csv, load, render_schema, Document};
use sdb_core::Error;

#[derive(Parser)]
#[command(name = "sdb", version, about = "Databases over simplicial schemas")]
struct Cli {
    /// Type specification file; required by import-csv.
    #[arg(long, global = true)]
    typespec: Option<PathBuf>,
    /// Write the result here instead of stdout (a directory for `run`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rename keys to k0, k1, ... before writing.
    #[arg(long, global = true)]
    canonical_keys: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Pair {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct Along {
    db: PathBuf,
    /// Schema morphism file.
    #[arg(long)]
    along: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check that files load and validate.
    Validate { files: Vec<PathBuf> },
    /// Join two databases on pairs of simplex ids, `left=right`.
    Join {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_delimiter = ',', required = true)]
        on: Vec<String>,
    },
    Union(Pair),
    UnionAll(Pair),
    Insert(Pair),
    /// Keep what matches a selection database on a subschema.
    Select {
        db: PathBuf,
        selection: PathBuf,
    },
    Project {
        db: PathBuf,
        /// Simplex ids to keep (faces are added).
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<String>,
    },
    Delete {
        db: PathBuf,
        selection: PathBuf,
    },
    GlobalTable { db: PathBuf },
    ToRelational { db: PathBuf },
    Pullback(Along),
    Pushforward(Along),
    Extend(Along),
    /// Print a file; schemas print as Graphviz.
    Show {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a query script.
    Run { script: PathBuf },
    #[command(hide = true)]
    OracleJoin {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_delimiter = ',')]
        on: Vec<String>,
    },
    /// Read a CSV with `name:type` headers into a table.
    ImportCsv {
        csv: PathBuf,
        #[arg(long)]
        key_column: Option<String>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure { code: 1, message: e.to_string() }
}

fn engine(e: Error) -> Failure {
    Failure { code: 2, message: e.to_string() }
}

fn load_doc(p: &Path) -> Result<Document, Failure> {
    load(p).map_err(|e| invalid(format!("{}: {e}", p.display())))
}

fn split_pairs(items: &[String]) -> Result<Vec<(String, String)>, Failure> {
    items
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or_else(|| invalid(format!("expected left=right, got `{p}`")))
        })
        .collect()
}

fn emit(cli: &Cli, doc: Document) -> Result<(), Failure> {
    let doc = if cli.canonical_keys { canonical(doc).map_err(engine)? } else { doc };
    match &cli.out {
        Some(p) => std::fs::write(p, doc.to_text()).map_err(|e| engine(e.into())),
        None => {
            print!("{}", doc.to_text());
            Ok(())
        }
    }
}

fn operate(cli: &Cli, op: Op, files: &[&Path], args: OpArgs) -> Result<(), Failure> {
    let docs = files.iter().map(|p| load_doc(p)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Document> = docs.iter().collect();
    check_operands(op, &refs).map_err(invalid)?;
    let result = apply(op, &refs, &args).map_err(engine)?;
    emit(cli, result)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate { files } => {
            for f in files {
                let doc = load_doc(f)?;
                println!("{}: ok ({})", f.display(), doc.kind());
            }
            Ok(())
        }
        Command::Join { pair, on } => {
            let args = OpArgs { on: split_pairs(on)?, keep: vec![] };
            operate(cli, Op::Join, &[&pair.a, &pair.b], args)
        }
        Command::Union(p) => operate(cli, Op::Union, &[&p.a, &p.b], OpArgs::default()),
        Command::UnionAll(p) => operate(cli, Op::UnionAll, &[&p.a, &p.b], OpArgs::default()),
        Command::Insert(p) => operate(cli, Op::Insert, &[&p.a, &p.b], OpArgs::default()),
        Command::Select { db, selection } => operate(cli, Op::Select, &[db, selection], OpArgs::default()),
        Command::Delete { db, selection } => operate(cli, Op::Delete, &[db, selection], OpArgs::default()),
        Command::Project { db, keep } => {
            operate(cli, Op::Project, &[db], OpArgs { on: vec![], keep: keep.clone() })
        }
        Command::GlobalTable { db } => operate(cli, Op::GlobalTable, &[db], OpArgs::default()),
        Command::ToRelational { db } => operate(cli, Op::ToRelational, &[db], OpArgs::default()),
        Command::Pullback(a) => operate(cli, Op::Pullback, &[&a.db, &a.along], OpArgs::default()),
        Command::Pushforward(a) => operate(cli, Op::Pushforward, &[&a.db, &a.along], OpArgs::default()),
        Command::Extend(a) => operate(cli, Op::Extend, &[&a.db, &a.along], OpArgs::default()),
        Command::Show { file, json } => {
            let doc = load_doc(file)?;
            let doc = if cli.canonical_keys { canonical(doc).map_err(engine)? } else { doc };
            let text = match (&doc, json) {
                (_, true) => doc.to_text(),
                (Document::Schema(x), false) => render_schema(x),
                (_, false) => show(&doc),
            };
            print!("{text}");
            Ok(())
        }
        Command::Run { script } => {
            let text = std::fs::read_to_string(script).map_err(|e| invalid(format!("{}: {e}", script.display())))?;
            let input_dir = script.parent().map(Path::to_path_buf).unwrap_or_default();
            let output_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&output_dir).map_err(|e| engine(e.into()))?;
            let opts = RunOptions { input_dir, output_dir, canonical_keys: cli.canonical_keys };
            let out = run_script(&text, &opts).map_err(|e| {
                let quoted = text.lines().nth(e.line.saturating_sub(1)).unwrap_or_default().trim();
                Failure {
                    code: e.exit_code() as u8,
                    message: format!("{}: {e}\n  | {quoted}", script.display()),
                }
            })?;
            print!("{}", out.shown);
            Ok(())
        }
        Command::OracleJoin { pair, on } => {
            let table = |p: &Path| match load_doc(p)? {
                Document::Table(t) => Ok(FlatTable::from(&t)),
                other => Err(invalid(format!("{}: expected a table, found a {}", p.display(), other.kind()))),
            };
            let (a, b) = (table(&pair.a)?, table(&pair.b)?);
            let pairs = split_pairs(on)?;
            let refs: Vec<(&str, &str)> = pairs.iter().map(|(l, r)| (l.as_str(), r.as_str())).collect();
            print!("{}", oracle_equijoin(&a, &b, &refs).map_err(engine)?);
            Ok(())
        }
        Command::ImportCsv { csv, key_column } => {
            let spec_path = cli.typespec.as_ref().ok_or_else(|| invalid("import-csv needs --typespec"))?;
            let spec = match load_doc(spec_path)? {
                Document::TypeSpec(t) => t,
                other => return Err(invalid(format!("--typespec names a {}", other.kind()))),
            };
            let f = File::open(csv).map_err(|e| invalid(format!("{}: {e}", csv.display())))?;
            let t = import_csv(f, &spec, key_column.as_deref()).map_err(|e| invalid(format!("{}: {e}", csv.display())))?;
            emit(cli, Document::Table(t))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(seed) = std::env::var("SDB_SEED") {
        if seed.parse::<u64>().is_err() {
            eprintln!("sdb: SDB_SEED must be an unsigned integer");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sdb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
