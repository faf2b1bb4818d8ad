use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pgschema::compat::check_compat;
use pgschema::diff::{annotate_visual, compute_diff, render_raw, render_semantic};
use pgschema::extract::{extract_schema, ExtractionOptions};
use pgschema::graph::{load_graph, validate_conformance, ConformanceOptions, PropertyGraph};
use pgschema::refine::{apply_edit, Edit};
use pgschema::schema::SchemaGraph;
use pgschema::text::{parse_schema, schema_text};
use pgschema::workspace::{render_export, ExportFormat, Workspace};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_COMPAT: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(name = "pgschema", version, about = "Property-graph schema extraction, refinement and versioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a schema from a JSON-lines graph.
    Extract {
        #[arg(long)]
        graph: PathBuf,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_cardinality: bool,
        #[arg(long)]
        subtypes: bool,
    },
    /// Check a graph against a schema; exits 4 when it does not conform.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        open_world: bool,
    },
    /// Rewrite a schema file in canonical form.
    Fmt {
        file: PathBuf,
        /// Only report whether the file is canonical (exit 4 if not).
        #[arg(long)]
        check: bool,
    },
    /// Apply one JSON edit command to a schema file or workspace head.
    Edit {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        workspace: Option<PathBuf>,
        #[arg(long)]
        json: String,
        /// Refuse the edit (exit 3) if it breaks existing data.
        #[arg(long)]
        check_compat: bool,
        /// Write here instead of in place; `-` for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two schema files or two workspace versions.
    Diff {
        a: Option<PathBuf>,
        b: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["a", "b"])]
        workspace: Option<PathBuf>,
        /// Version id or `head`.
        #[arg(long, requires = "workspace")]
        from: Option<String>,
        #[arg(long, requires = "workspace")]
        to: Option<String>,
        #[command(flatten)]
        mode: DiffMode,
        /// Exit 3 if the change breaks existing data.
        #[arg(long)]
        check_compat: bool,
    },
    /// Record a new version in a workspace.
    Commit {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long, short)]
        message: String,
        /// Replace the head with this file before committing.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// List the versions of a workspace.
    Log {
        #[arg(long)]
        workspace: PathBuf,
    },
    /// Render a schema as pgs or json.
    Export {
        #[arg(long, conflicts_with = "schema", required_unless_present = "schema")]
        workspace: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value = "pgs")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API for a workspace.
    Serve {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct DiffMode {
    #[arg(long)]
    semantic: bool,
    #[arg(long)]
    visual: bool,
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_schema(path: &Path) -> Result<SchemaGraph, Failure> {
    let text = read_text(path)?;
    parse_schema(&text).map_err(|errors| {
        let lines: Vec<String> = errors
            .iter()
            .map(|e| format!("{}:{e}", path.display()))
            .collect();
        input(lines.join("\n"))
    })
}

fn read_graph(path: &Path) -> Result<PropertyGraph, Failure> {
    let file = fs::File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    load_graph(BufReader::new(file)).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_workspace(root: &Path) -> Result<Workspace, Failure> {
    Workspace::load(root).map_err(input)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) if p != Path::new("-") => fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        _ => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(input)
        }
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value"));
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Extract {
            graph,
            out,
            no_cardinality,
            subtypes,
        } => {
            let g = read_graph(&graph)?;
            let opts = ExtractionOptions {
                infer_cardinality: !no_cardinality,
                infer_subtypes: subtypes,
                ..ExtractionOptions::default()
            };
            write_out(out.as_deref(), &schema_text(&extract_schema(&g, opts)))?;
            Ok(0)
        }
        Command::Validate {
            graph,
            schema,
            open_world,
        } => {
            let g = read_graph(&graph)?;
            let s = read_schema(&schema)?;
            let report = validate_conformance(&g, &s, ConformanceOptions { open_world });
            print_json(&json!(report));
            Ok(if report.ok { 0 } else { EXIT_CHECK })
        }
        Command::Fmt { file, check } => {
            let original = read_text(&file)?;
            let formatted = schema_text(&read_schema(&file)?);
            if check {
                if formatted != original {
                    println!("{} is not canonical", file.display());
                    return Ok(EXIT_CHECK);
                }
            } else if formatted != original {
                write_out(Some(&file), &formatted)?;
            }
            Ok(0)
        }
        Command::Edit {
            file,
            workspace,
            json,
            check_compat: guard,
            out,
        } => {
            let edit = Edit::from_json(&json).map_err(input)?;
            let mut ws = workspace.as_deref().map(load_workspace).transpose()?;
            let before = match (&ws, &file) {
                (Some(w), _) => w.head().clone(),
                (None, Some(f)) => read_schema(f)?,
                (None, None) => unreachable!("clap requires a file or workspace"),
            };
            let after = apply_edit(&before, &edit).map_err(input)?;
            if guard {
                let report = check_compat(&compute_diff(&before, &after));
                if !report.compatible {
                    print_json(&json!(report));
                    return Ok(EXIT_COMPAT);
                }
            }
            match (&mut ws, out, file) {
                (_, Some(out), _) => write_out(Some(&out), &schema_text(&after))?,
                (Some(w), None, _) => w.set_head(after).map_err(input)?,
                (None, None, Some(f)) => write_out(Some(&f), &schema_text(&after))?,
                (None, None, None) => unreachable!("clap requires a file or workspace"),
            }
            Ok(0)
        }
        Command::Diff {
            a,
            b,
            workspace,
            from,
            to,
            mode,
            check_compat: guard,
        } => {
            let (old, new) = match workspace {
                Some(root) => {
                    let w = load_workspace(&root)?;
                    let pick = |which: Option<String>| -> Result<SchemaGraph, Failure> {
                        let which = which.ok_or_else(|| Failure {
                            code: EXIT_USAGE,
                            message: "--from and --to are required with --workspace".into(),
                        })?;
                        if which == "head" {
                            return Ok(w.head().clone());
                        }
                        let id = which.parse().map_err(|_| input(format!("bad version `{which}`")))?;
                        Ok(w.version(id).map_err(input)?.schema.clone())
                    };
                    (pick(from)?, pick(to)?)
                }
                None => match (a, b) {
                    (Some(a), Some(b)) => (read_schema(&a)?, read_schema(&b)?),
                    _ => {
                        return Err(Failure {
                            code: EXIT_USAGE,
                            message: "diff needs two schema files or --workspace".into(),
                        })
                    }
                },
            };
            let d = compute_diff(&old, &new);
            if mode.json {
                print_json(&json!(d));
            } else if mode.visual {
                print_json(&json!(annotate_visual(&old, &new, &d)));
            } else if mode.raw {
                print!("{}", render_raw(&schema_text(&old), &schema_text(&new)));
            } else {
                for line in render_semantic(&d) {
                    println!("{line}");
                }
            }
            if guard {
                let report = check_compat(&d);
                if !report.compatible {
                    for v in &report.violations {
                        eprintln!("incompatible: {} ({})", v.record.sentence(), v.reason);
                    }
                    return Ok(EXIT_COMPAT);
                }
            }
            Ok(0)
        }
        Command::Commit {
            workspace,
            message,
            schema,
        } => {
            let mut w = load_workspace(&workspace)?;
            if let Some(path) = schema {
                w.set_head(read_schema(&path)?).map_err(input)?;
            }
            let v = w.commit(&message).map_err(input)?;
            print_json(&json!({ "id": v.id, "message": v.message, "timestamp": v.timestamp }));
            Ok(0)
        }
        Command::Log { workspace } => {
            print_json(&json!(load_workspace(&workspace)?.version_meta()));
            Ok(0)
        }
        Command::Export {
            workspace,
            schema,
            format,
            out,
        } => {
            let format: ExportFormat = format.parse().map_err(|e| Failure {
                code: EXIT_USAGE,
                message: format!("{e}"),
            })?;
            let s = match (workspace, schema) {
                (Some(root), _) => load_workspace(&root)?.head().clone(),
                (None, Some(path)) => read_schema(&path)?,
                (None, None) => unreachable!("clap requires a schema or workspace"),
            };
            write_out(out.as_deref(), &render_export(&s, format))?;
            Ok(0)
        }
        Command::Serve { workspace, port } => {
            load_workspace(&workspace)?;
            let runtime = tokio::runtime::Runtime::new().map_err(input)?;
            eprintln!("serving {} on http://127.0.0.1:{port}", workspace.display());
            runtime.block_on(pgschema::service::serve(workspace, port)).map_err(input)?;
            Ok(0)
        }
    }
}
