//! Subcommands of the `pargraph` binary.
//!
//! [`execute`] runs a full argument vector and returns what the binary would
//! print together with its exit code: 0 on success, 1 when the requested
//! property does not hold (non-regular family, non-isomorphic graphs, failed
//! engine step) and 2 for unusable input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use pargraph_core::life::{run_life, Grid, LifeConfig, LifeError, LifeMode, Pattern, Preset};
use pargraph_core::{
    aut_graph, enumerate_all, find_conflict, find_isomorphism, normalize_fresh, rewrite,
    select_representatives_seeded, select_representatives_with, Graph, GroupError, Labels, Mode,
    Morphism, PermGroup, RewriteError, RuleAuts, RuleMatch, RuleSet, SymmetryError,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::syntax::{self, format_graph, Document, SyntaxError};

#[derive(Debug, Parser)]
#[command(
    name = "pargraph",
    version,
    about = "Parallel rewriting of term-labelled graphs"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a file and print it back in canonical form
    Parse { file: PathBuf },
    /// List the matchings of the file's rules into a graph
    Match {
        file: PathBuf,
        #[arg(long)]
        graph: String,
        /// Only this rule
        #[arg(long)]
        rule: Option<String>,
    },
    /// Rewrite a graph with every matching of the file's rules at once
    Step {
        file: PathBuf,
        #[arg(long)]
        graph: String,
        /// Only this rule
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Min)]
        mode: ModeArg,
        /// Keep one matching per class of matchings equivalent under rule automorphisms
        #[arg(long)]
        modulo_aut: bool,
        /// Draw class representatives at random instead of taking the least one
        #[arg(long, requires = "modulo_aut")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Rename fresh items to n1, n2, … and e1, e2, … after each step
        #[arg(long)]
        normalize_fresh: bool,
    },
    /// Check that no matching deletes what another one keeps or creates
    CheckRegular {
        file: PathBuf,
        #[arg(long)]
        graph: String,
        /// Only this rule
        #[arg(long)]
        rule: Option<String>,
    },
    /// Automorphism group of a graph or of a rule
    Aut {
        file: PathBuf,
        #[arg(long, conflicts_with = "rule", required_unless_present = "rule")]
        graph: Option<String>,
        #[arg(long)]
        rule: Option<String>,
    },
    /// Look for an isomorphism between two graphs of a file
    Iso {
        file: PathBuf,
        first: String,
        second: String,
    },
    /// Game of Life on a torus, encoded as graph rewriting
    Life {
        #[arg(long, default_value_t = 5)]
        width: usize,
        #[arg(long, default_value_t = 5)]
        height: usize,
        #[arg(long, value_enum, conflicts_with = "cells")]
        pattern: Option<PresetArg>,
        /// Live cells as `row,col` pairs separated by spaces or semicolons
        #[arg(long)]
        cells: Option<String>,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = LifeModeArg::Min)]
        mode: LifeModeArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Min,
    Max,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Min => Mode::Min,
            ModeArg::Max => Mode::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LifeModeArg {
    Min,
    Max,
    AutoMin,
    AutoMax,
}

impl From<LifeModeArg> for LifeMode {
    fn from(m: LifeModeArg) -> LifeMode {
        match m {
            LifeModeArg::Min => LifeMode::Min,
            LifeModeArg::Max => LifeMode::Max,
            LifeModeArg::AutoMin => LifeMode::AutoMin,
            LifeModeArg::AutoMax => LifeMode::AutoMax,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetArg {
    Blinker,
    Block,
    Glider,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Blinker => Preset::Blinker,
            PresetArg::Block => Preset::Block,
            PresetArg::Glider => Preset::Glider,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{source}", path.display())]
    Syntax { path: PathBuf, source: SyntaxError },
    #[error("no graph named `{0}`")]
    UnknownGraph(String),
    #[error("no rule named `{0}`")]
    UnknownRule(String),
    #[error("bad cell `{0}`: expected `row,col`")]
    BadCell(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Life(#[from] LifeError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. }
            | CliError::Syntax { .. }
            | CliError::UnknownGraph(_)
            | CliError::UnknownRule(_)
            | CliError::BadCell(_)
            | CliError::Life(LifeError::TooSmall { .. } | LifeError::OutOfBounds { .. }) => 2,
            _ => 1,
        }
    }
}

/// Standard output and exit code of a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

/// Everything a process run would produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return Execution {
                stdout,
                stderr,
                code,
            };
        }
    };
    match run(&cli) {
        Ok(out) => Execution {
            stdout: out.stdout,
            stderr: String::new(),
            code: out.code,
        },
        Err(e) => Execution {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        },
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let json = cli.json;
    match &cli.command {
        Command::Parse { file } => {
            let doc = load(file)?;
            Ok(Outcome::ok(if json {
                render_json(&document_json(&doc))
            } else {
                syntax::format(&doc)
            }))
        }
        Command::Match { file, graph, rule } => {
            let doc = load(file)?;
            let g = pick_graph(&doc, graph)?;
            let ms = enumerate_all(&pick_rules(&doc, rule.as_deref())?, g);
            Ok(Outcome::ok(if json {
                render_json(&Value::Array(ms.iter().map(match_json).collect()))
            } else {
                ms.iter()
                    .map(|m| format!("{} {m}\n", m.rule().name()))
                    .collect()
            }))
        }
        Command::Step {
            file,
            graph,
            rule,
            mode,
            modulo_aut,
            seed,
            steps,
            normalize_fresh: normalize,
        } => {
            let doc = load(file)?;
            let rules = pick_rules(&doc, rule.as_deref())?;
            let mut g = pick_graph(&doc, graph)?.clone();
            let mut auts = RuleAuts::new();
            let mut log = Vec::new();
            for i in 0..*steps {
                let all = enumerate_all(&rules, &g);
                let ms = match (modulo_aut, seed) {
                    (false, _) => all,
                    (true, None) => select_representatives_with(&mut auts, &all)?,
                    (true, Some(s)) => {
                        select_representatives_seeded(&all, s.wrapping_add(i as u64))?
                    }
                };
                let regular = find_conflict(&ms).is_none();
                g = rewrite(&g, &ms, (*mode).into())?;
                if *normalize {
                    g = normalize_fresh(&g);
                }
                log.push((ms.len(), regular));
            }
            Ok(Outcome::ok(if json {
                let steps: Vec<Value> = log
                    .iter()
                    .map(|&(n, regular)| json!({ "matchings": n, "regular": regular }))
                    .collect();
                render_json(&json!({ "steps": steps, "graph": graph_json(&g) }))
            } else {
                let mut out = String::new();
                for (i, (n, regular)) in log.iter().enumerate() {
                    let tag = if *regular { "regular" } else { "not regular" };
                    writeln!(out, "// step {}: {}, {tag}", i + 1, count(*n, "matching")).unwrap();
                }
                out + &format_graph(graph, &g)
            }))
        }
        Command::CheckRegular { file, graph, rule } => {
            let doc = load(file)?;
            let g = pick_graph(&doc, graph)?;
            let ms = enumerate_all(&pick_rules(&doc, rule.as_deref())?, g);
            let conflict = find_conflict(&ms);
            let code = u8::from(conflict.is_some());
            let stdout = if json {
                let pair = conflict
                    .as_ref()
                    .map(|(mu, nu)| json!({ "deleting": mu.key(), "affected": nu.key() }));
                render_json(
                    &json!({ "matchings": ms.len(), "regular": conflict.is_none(), "conflict": pair }),
                )
            } else {
                match &conflict {
                    None => format!("regular: {}\n", count(ms.len(), "matching")),
                    Some((mu, nu)) => format!(
                        "not regular: {} deletes part of what {} keeps or creates\n  {}: {mu}\n  {}: {nu}\n",
                        mu.key(),
                        nu.key(),
                        mu.key(),
                        nu.key()
                    ),
                }
            };
            Ok(Outcome { stdout, code })
        }
        Command::Aut { file, graph, rule } => {
            let doc = load(file)?;
            let group = match (graph, rule) {
                (Some(name), _) => aut_graph(pick_graph(&doc, name)?)?,
                (None, Some(name)) => {
                    let r = doc
                        .rule(name)
                        .ok_or_else(|| CliError::UnknownRule(name.clone()))?;
                    RuleAuts::new().get(r)?.group.clone()
                }
                (None, None) => unreachable!("clap requires --graph or --rule"),
            };
            Ok(Outcome::ok(if json {
                render_json(&json!({ "order": group.order(), "elements": group.rendered() }))
            } else {
                group_text(&group)
            }))
        }
        Command::Iso {
            file,
            first,
            second,
        } => {
            let doc = load(file)?;
            let iso = find_isomorphism(pick_graph(&doc, first)?, pick_graph(&doc, second)?);
            let code = u8::from(iso.is_none());
            let stdout = if json {
                render_json(
                    &json!({ "isomorphic": iso.is_some(), "map": iso.as_ref().map(morphism_json) }),
                )
            } else {
                match &iso {
                    Some(m) => format!("isomorphic: {m}\n"),
                    None => "not isomorphic\n".to_owned(),
                }
            };
            Ok(Outcome { stdout, code })
        }
        Command::Life {
            width,
            height,
            pattern,
            cells,
            steps,
            mode,
        } => {
            let pattern = match cells {
                Some(text) => Pattern::Cells(parse_cells(text)?),
                None => Pattern::Preset(pattern.unwrap_or(PresetArg::Blinker).into()),
            };
            let cfg = LifeConfig {
                width: *width,
                height: *height,
                pattern,
                steps: *steps,
                mode: (*mode).into(),
            };
            let frames = run_life(&cfg)?;
            Ok(Outcome::ok(if json {
                let frames: Vec<Value> = frames.iter().map(grid_json).collect();
                render_json(&json!({ "width": width, "height": height, "frames": frames }))
            } else {
                let mut out = String::new();
                for (i, f) in frames.iter().enumerate() {
                    writeln!(out, "step {i} (population {})\n{f}", f.population()).unwrap();
                }
                out
            }))
        }
    }
}

fn load(path: &Path) -> Result<Document, CliError> {
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    syntax::parse(&src).map_err(|source| CliError::Syntax {
        path: path.to_owned(),
        source,
    })
}

fn pick_graph<'d>(doc: &'d Document, name: &str) -> Result<&'d Graph, CliError> {
    doc.graph(name)
        .ok_or_else(|| CliError::UnknownGraph(name.to_owned()))
}

fn pick_rules(doc: &Document, name: Option<&str>) -> Result<RuleSet, CliError> {
    match name {
        None => Ok(doc.rules.clone()),
        Some(n) => {
            let r = doc
                .rule(n)
                .ok_or_else(|| CliError::UnknownRule(n.to_owned()))?;
            Ok(RuleSet::new([r.clone()]).expect("a single rule has a unique name"))
        }
    }
}

fn parse_cells(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(|c: char| c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|cell| {
            let bad = || CliError::BadCell(cell.to_owned());
            let (r, c) = cell.split_once(',').ok_or_else(bad)?;
            Ok((
                r.trim().parse().map_err(|_| bad())?,
                c.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn count(n: usize, noun: &str) -> String {
    if n == 1 {
        format!("1 {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

fn group_text(group: &PermGroup) -> String {
    let mut out = format!("order {}\n", group.order());
    for p in group.rendered() {
        writeln!(out, "  {p}").unwrap();
    }
    out
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn labels_json(ls: &Labels) -> Value {
    ls.iter().map(|t| Value::String(t.to_string())).collect()
}

/// Nodes and edges in id order with sorted labels.
pub fn graph_json(g: &Graph) -> Value {
    let nodes: Vec<Value> = g
        .vertices()
        .map(|(v, ls)| json!({ "id": v.to_string(), "labels": labels_json(ls) }))
        .collect();
    let edges: Vec<Value> = g
        .arrows()
        .map(|(a, arr)| {
            json!({
                "id": a.to_string(),
                "src": arr.src.to_string(),
                "tgt": arr.tgt.to_string(),
                "labels": labels_json(&arr.labels),
            })
        })
        .collect();
    json!({ "nodes": nodes, "edges": edges })
}

fn morphism_json(m: &Morphism) -> Value {
    let pairs = |it: &mut dyn Iterator<Item = (String, String)>| {
        Value::Object(it.map(|(k, v)| (k, Value::String(v))).collect())
    };
    json!({
        "vertices": pairs(&mut m.vertices.iter().map(|(k, v)| (k.to_string(), v.to_string()))),
        "arrows": pairs(&mut m.arrows.iter().map(|(k, v)| (k.to_string(), v.to_string()))),
        "subst": pairs(&mut m.subst.iter().map(|(k, v)| (k.to_string(), v.to_string()))),
    })
}

fn match_json(m: &RuleMatch) -> Value {
    let mut v = morphism_json(&m.morphism());
    v["rule"] = Value::String(m.rule().name().to_string());
    v["key"] = Value::String(m.key());
    v
}

fn document_json(doc: &Document) -> Value {
    let graphs: serde_json::Map<String, Value> = doc
        .graphs
        .iter()
        .map(|(name, g)| (name.to_string(), graph_json(g)))
        .collect();
    let rules: serde_json::Map<String, Value> = doc
        .rules
        .rules()
        .iter()
        .map(|r| {
            let vars: Vec<Value> = r.vars().iter().map(|v| Value::String(v.to_string())).collect();
            let sides = json!({ "vars": vars, "L": graph_json(r.lhs()), "K": graph_json(r.kept()), "R": graph_json(r.rhs()) });
            (r.name().to_string(), sides)
        })
        .collect();
    json!({ "graphs": graphs, "rules": rules })
}

fn grid_json(g: &Grid) -> Value {
    g.to_string()
        .lines()
        .map(|l| Value::String(l.to_owned()))
        .collect()
}
