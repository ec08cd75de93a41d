//! The `.pgr` text format: an optional signature, named graphs and rules.
//!
//! ```text
//! signature { sort S; const a: S; fn s(S): S; }
//! graph G { node 1 {a}; node 2; edge 3: 1 -> 2 {s(a)}; }
//! rule r { vars u; L { node x {u}; } K { node x; } R { node x {s(u)}; } }
//! ```
//!
//! Without a signature block every symbol gets the single sort `S` and the
//! arity of its uses. Ids containing `@` are reserved for rewriting output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use pargraph_core::{
    Graph, GraphError, Labels, Name, Rule, RuleError, RuleSet, Signature, Term, TermError, Var,
    DEFAULT_SORT,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("`@` is reserved for ids created by rewriting")]
    ReservedNamespace,
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("symbol `{symbol}` is used with {first} and with {second} arguments")]
    ArityConflict {
        symbol: String,
        first: usize,
        second: usize,
    },
    #[error("variable `{0}` needs a sort since the signature has several")]
    MissingSort(String),
    #[error("{0} `{1}` is defined twice")]
    Duplicate(&'static str, String),
    #[error("a second signature block")]
    SecondSignature,
    #[error("rule part `{0}` is missing")]
    MissingPart(&'static str),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

impl Pos {
    fn error(self, kind: impl Into<SyntaxErrorKind>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col,
            kind: kind.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) {
        if self.chars.next() == Some('\n') {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    while let Some(c) = cur.peek() {
        let pos = cur.pos;
        if c.is_whitespace() {
            cur.bump();
        } else if c == '/' {
            cur.bump();
            if cur.peek() != Some('/') {
                return Err(pos.error(SyntaxErrorKind::UnexpectedChar('/')));
            }
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
        } else if is_ident_char(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c == '@' {
                    return Err(cur.pos.error(SyntaxErrorKind::ReservedNamespace));
                }
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                cur.bump();
            }
            out.push((Tok::Ident(s), pos));
        } else if c == '-' {
            cur.bump();
            if cur.peek() != Some('>') {
                return Err(pos.error(SyntaxErrorKind::UnexpectedChar('-')));
            }
            cur.bump();
            out.push((Tok::Punct("->"), pos));
        } else if c == '@' {
            return Err(pos.error(SyntaxErrorKind::ReservedNamespace));
        } else {
            let p = match c {
                '{' => "{",
                '}' => "}",
                '(' => "(",
                ')' => ")",
                ';' => ";",
                ':' => ":",
                ',' => ",",
                other => return Err(pos.error(SyntaxErrorKind::UnexpectedChar(other))),
            };
            cur.bump();
            out.push((Tok::Punct(p), pos));
        }
    }
    out.push((Tok::Eof, cur.pos));
    Ok(out)
}

#[derive(Debug, Clone)]
struct RawTerm {
    name: String,
    args: Vec<RawTerm>,
    pos: Pos,
}

#[derive(Debug, Clone)]
enum RawItem {
    Node {
        id: String,
        labels: Vec<RawTerm>,
        pos: Pos,
    },
    Edge {
        id: String,
        src: String,
        tgt: String,
        labels: Vec<RawTerm>,
        pos: Pos,
    },
}

#[derive(Debug, Clone)]
enum SigDecl {
    Sort(String, Pos),
    Symbol {
        name: String,
        args: Vec<String>,
        result: String,
        pos: Pos,
    },
}

#[derive(Debug, Clone)]
struct RawRule {
    name: String,
    vars: Vec<(String, Option<String>, Pos)>,
    parts: [Vec<RawItem>; 3],
    pos: Pos,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        self.pos().error(SyntaxErrorKind::Expected {
            expected: expected.into(),
            found: self.peek().to_string(),
        })
    }

    fn punct(&mut self, p: &'static str) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Punct(p) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn eat(&mut self, p: &'static str) -> bool {
        let hit = *self.peek() == Tok::Punct(p);
        if hit {
            self.next();
        }
        hit
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.next().1;
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn term(&mut self) -> Result<RawTerm, SyntaxError> {
        let (name, pos) = self.ident("a term")?;
        let mut args = Vec::new();
        if self.eat("(") {
            loop {
                args.push(self.term()?);
                if self.eat(")") {
                    break;
                }
                self.punct(",")?;
            }
        }
        Ok(RawTerm { name, args, pos })
    }

    fn labels(&mut self) -> Result<Vec<RawTerm>, SyntaxError> {
        let mut out = Vec::new();
        if !self.eat("{") {
            return Ok(out);
        }
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            if self.eat("}") {
                return Ok(out);
            }
            self.punct(",")?;
        }
    }

    fn items(&mut self) -> Result<Vec<RawItem>, SyntaxError> {
        self.punct("{")?;
        let mut out = Vec::new();
        while !self.eat("}") {
            if self.is_keyword("node") {
                let pos = self.next().1;
                let (id, _) = self.ident("a node id")?;
                let labels = self.labels()?;
                self.punct(";")?;
                out.push(RawItem::Node { id, labels, pos });
            } else if self.is_keyword("edge") {
                let pos = self.next().1;
                let (id, _) = self.ident("an edge id")?;
                self.punct(":")?;
                let (src, _) = self.ident("a source node")?;
                self.punct("->")?;
                let (tgt, _) = self.ident("a target node")?;
                let labels = self.labels()?;
                self.punct(";")?;
                out.push(RawItem::Edge {
                    id,
                    src,
                    tgt,
                    labels,
                    pos,
                });
            } else {
                return Err(self.unexpected("`node`, `edge` or `}`"));
            }
        }
        Ok(out)
    }

    fn signature(&mut self) -> Result<Vec<SigDecl>, SyntaxError> {
        self.punct("{")?;
        let mut out = Vec::new();
        while !self.eat("}") {
            if self.is_keyword("sort") {
                self.next();
                let (name, pos) = self.ident("a sort name")?;
                out.push(SigDecl::Sort(name, pos));
            } else if self.is_keyword("const") {
                self.next();
                let (name, pos) = self.ident("a constant name")?;
                self.punct(":")?;
                let (result, _) = self.ident("a sort")?;
                out.push(SigDecl::Symbol {
                    name,
                    args: vec![],
                    result,
                    pos,
                });
            } else if self.is_keyword("fn") {
                self.next();
                let (name, pos) = self.ident("a function name")?;
                self.punct("(")?;
                let mut args = Vec::new();
                if !self.eat(")") {
                    loop {
                        args.push(self.ident("a sort")?.0);
                        if self.eat(")") {
                            break;
                        }
                        self.punct(",")?;
                    }
                }
                self.punct(":")?;
                let (result, _) = self.ident("a sort")?;
                out.push(SigDecl::Symbol {
                    name,
                    args,
                    result,
                    pos,
                });
            } else {
                return Err(self.unexpected("`sort`, `const`, `fn` or `}`"));
            }
            self.punct(";")?;
        }
        Ok(out)
    }

    fn rule(&mut self, name: String, pos: Pos) -> Result<RawRule, SyntaxError> {
        self.punct("{")?;
        let mut vars = Vec::new();
        if self.is_keyword("vars") {
            self.next();
            loop {
                let (v, vpos) = self.ident("a variable")?;
                let sort = if self.eat(":") {
                    Some(self.ident("a sort")?.0)
                } else {
                    None
                };
                vars.push((v, sort, vpos));
                if self.eat(";") {
                    break;
                }
                self.punct(",")?;
            }
        }
        let mut parts: [Option<Vec<RawItem>>; 3] = [None, None, None];
        for (i, kw) in ["L", "K", "R"].into_iter().enumerate() {
            if !self.is_keyword(kw) {
                return Err(self.pos().error(SyntaxErrorKind::MissingPart(kw)));
            }
            self.next();
            parts[i] = Some(self.items()?);
        }
        self.punct("}")?;
        let [l, k, r] = parts.map(|p| p.expect("all three parsed"));
        Ok(RawRule {
            name,
            vars,
            parts: [l, k, r],
            pos,
        })
    }
}

/// A parsed file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub signature: Signature,
    /// Whether the file declared the signature or it was inferred.
    pub explicit_signature: bool,
    pub graphs: Vec<(Name, Graph)>,
    pub rules: RuleSet,
}

impl Document {
    pub fn graph(&self, name: &str) -> Option<&Graph> {
        self.graphs
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, g)| g)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.get(name)
    }
}

impl Default for Document {
    fn default() -> Self {
        Document {
            signature: Signature::single_sorted(),
            explicit_signature: false,
            graphs: Vec::new(),
            rules: RuleSet::new([]).expect("empty rule set"),
        }
    }
}

pub fn parse(src: &str) -> Result<Document, SyntaxError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
    };
    let mut sig_decls: Option<Vec<SigDecl>> = None;
    let mut graphs: Vec<(String, Vec<RawItem>, Pos)> = Vec::new();
    let mut rules: Vec<RawRule> = Vec::new();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "signature" => {
                let pos = p.next().1;
                if sig_decls.is_some() {
                    return Err(pos.error(SyntaxErrorKind::SecondSignature));
                }
                sig_decls = Some(p.signature()?);
            }
            Tok::Ident(kw) if kw == "graph" => {
                p.next();
                let (name, pos) = p.ident("a graph name")?;
                if graphs.iter().any(|(n, _, _)| *n == name) {
                    return Err(pos.error(SyntaxErrorKind::Duplicate("graph", name)));
                }
                let items = p.items()?;
                graphs.push((name, items, pos));
            }
            Tok::Ident(kw) if kw == "rule" => {
                p.next();
                let (name, pos) = p.ident("a rule name")?;
                rules.push(p.rule(name, pos)?);
            }
            _ => return Err(p.unexpected("`signature`, `graph` or `rule`")),
        }
    }

    let explicit_signature = sig_decls.is_some();
    let signature = match sig_decls {
        Some(decls) => declared_signature(&decls)?,
        None => inferred_signature(&graphs, &rules)?,
    };
    let sole_sort: Option<Name> = {
        let sorts: Vec<&Name> = signature.sorts().collect();
        (sorts.len() == 1).then(|| sorts[0].clone())
    };

    let mut doc_graphs = Vec::new();
    for (name, items, _) in &graphs {
        let g = build_graph(&signature, &BTreeMap::new(), items)?;
        doc_graphs.push((Name::from(name.as_str()), g));
    }
    let mut doc_rules = Vec::new();
    for raw in &rules {
        let mut vars = BTreeMap::new();
        for (v, sort, pos) in &raw.vars {
            let sort: Name = match (sort, &sole_sort) {
                (Some(s), _) => {
                    if !signature.has_sort(s) {
                        return Err(pos.error(TermError::UnknownSort(s.as_str().into())));
                    }
                    s.as_str().into()
                }
                (None, Some(s)) => s.clone(),
                (None, None) => return Err(pos.error(SyntaxErrorKind::MissingSort(v.clone()))),
            };
            if vars.insert(v.clone(), Var::new(v.as_str(), sort)).is_some() {
                return Err(pos.error(SyntaxErrorKind::Duplicate("variable", v.clone())));
            }
        }
        let [l, k, r] = &raw.parts;
        let rule = Rule::new(
            raw.name.as_str(),
            build_graph(&signature, &vars, l)?,
            build_graph(&signature, &vars, k)?,
            build_graph(&signature, &vars, r)?,
        )
        .map_err(|e| raw.pos.error(e))?;
        doc_rules.push(rule);
    }
    let rule_set = RuleSet::new(doc_rules).map_err(|e| {
        let pos = match &e {
            RuleError::DuplicateName(n) | RuleError::SharedLhsItems(_, n) => rules
                .iter()
                .rev()
                .find(|r| *r.name == **n)
                .map_or(Pos { line: 1, col: 1 }, |r| r.pos),
            _ => Pos { line: 1, col: 1 },
        };
        pos.error(e)
    })?;
    Ok(Document {
        signature,
        explicit_signature,
        graphs: doc_graphs,
        rules: rule_set,
    })
}

fn declared_signature(decls: &[SigDecl]) -> Result<Signature, SyntaxError> {
    let mut sig = Signature::new();
    for d in decls {
        match d {
            SigDecl::Sort(s, pos) => sig.declare_sort(s.as_str()).map_err(|e| pos.error(e))?,
            SigDecl::Symbol {
                name,
                args,
                result,
                pos,
            } => sig
                .declare_symbol(
                    name.as_str(),
                    args.iter().map(|a| Name::from(a.as_str())).collect(),
                    result.as_str(),
                )
                .map_err(|e| pos.error(e))?,
        }
    }
    Ok(sig)
}

fn inferred_signature(
    graphs: &[(String, Vec<RawItem>, Pos)],
    rules: &[RawRule],
) -> Result<Signature, SyntaxError> {
    fn visit(
        t: &RawTerm,
        vars: &BTreeSet<&str>,
        arity: &mut BTreeMap<String, usize>,
    ) -> Result<(), SyntaxError> {
        if t.args.is_empty() && vars.contains(t.name.as_str()) {
            return Ok(());
        }
        match arity.get(&t.name) {
            Some(&n) if n != t.args.len() => {
                return Err(t.pos.error(SyntaxErrorKind::ArityConflict {
                    symbol: t.name.clone(),
                    first: n,
                    second: t.args.len(),
                }))
            }
            Some(_) => {}
            None => {
                arity.insert(t.name.clone(), t.args.len());
            }
        }
        t.args.iter().try_for_each(|a| visit(a, vars, arity))
    }
    let labels = |item: &RawItem| match item {
        RawItem::Node { labels, .. } | RawItem::Edge { labels, .. } => labels.clone(),
    };
    let mut arity = BTreeMap::new();
    let none = BTreeSet::new();
    for (_, items, _) in graphs {
        for t in items.iter().flat_map(labels) {
            visit(&t, &none, &mut arity)?;
        }
    }
    for r in rules {
        let vars: BTreeSet<&str> = r.vars.iter().map(|(v, _, _)| v.as_str()).collect();
        for t in r.parts.iter().flatten().flat_map(labels) {
            visit(&t, &vars, &mut arity)?;
        }
    }
    let mut sig = Signature::single_sorted();
    for (name, n) in arity {
        sig.declare_symbol(name.as_str(), vec![DEFAULT_SORT.into(); n], DEFAULT_SORT)
            .map_err(|e| Pos { line: 1, col: 1 }.error(e))?;
    }
    Ok(sig)
}

fn build_term(
    sig: &Signature,
    vars: &BTreeMap<String, Var>,
    t: &RawTerm,
) -> Result<Term, SyntaxError> {
    if t.args.is_empty() {
        if let Some(v) = vars.get(&t.name) {
            return Ok(Term::var(v.clone()));
        }
    }
    let args = t
        .args
        .iter()
        .map(|a| build_term(sig, vars, a))
        .collect::<Result<Vec<_>, _>>()?;
    sig.app(&t.name, args).map_err(|e| t.pos.error(e))
}

fn build_graph(
    sig: &Signature,
    vars: &BTreeMap<String, Var>,
    items: &[RawItem],
) -> Result<Graph, SyntaxError> {
    let mut g = Graph::with_varset(vars.values().cloned());
    let terms = |ls: &[RawTerm]| -> Result<Labels, SyntaxError> {
        ls.iter().map(|t| build_term(sig, vars, t)).collect()
    };
    // nodes first so that edges may refer to nodes declared later
    for item in items {
        if let RawItem::Node { id, labels, pos } = item {
            g.add_vertex(id.as_str(), terms(labels)?)
                .map_err(|e| pos.error(e))?;
        }
    }
    for item in items {
        if let RawItem::Edge {
            id,
            src,
            tgt,
            labels,
            pos,
        } = item
        {
            g.add_arrow(id.as_str(), src.as_str(), tgt.as_str(), terms(labels)?)
                .map_err(|e| pos.error(e))?;
        }
    }
    Ok(g)
}

fn write_labels(out: &mut String, ls: &Labels) {
    if ls.is_empty() {
        return;
    }
    let shown: Vec<String> = ls.iter().map(Term::to_string).collect();
    let _ = write!(out, " {{{}}}", shown.join(", "));
}

fn write_items(out: &mut String, g: &Graph, indent: &str) {
    for (v, ls) in g.vertices() {
        let _ = write!(out, "{indent}node {v}");
        write_labels(out, ls);
        out.push_str(";\n");
    }
    for (a, arrow) in g.arrows() {
        let _ = write!(out, "{indent}edge {a}: {} -> {}", arrow.src, arrow.tgt);
        write_labels(out, &arrow.labels);
        out.push_str(";\n");
    }
}

/// A `graph` block. Fresh ids print as `item@key`, which [`parse`] rejects.
pub fn format_graph(name: &str, g: &Graph) -> String {
    let mut out = format!("graph {name} {{\n");
    write_items(&mut out, g, "    ");
    out.push_str("}\n");
    out
}

pub fn format_rule(rule: &Rule, sig: &Signature) -> String {
    let single = sig.sorts().count() == 1;
    let mut out = format!("rule {} {{\n", rule.name());
    if !rule.vars().is_empty() {
        let vars: Vec<String> = rule
            .vars()
            .iter()
            .map(|v| {
                if single {
                    v.name.to_string()
                } else {
                    format!("{}: {}", v.name, v.sort)
                }
            })
            .collect();
        let _ = writeln!(out, "    vars {};", vars.join(", "));
    }
    for (part, g) in [("L", rule.lhs()), ("K", rule.kept()), ("R", rule.rhs())] {
        let _ = writeln!(out, "    {part} {{");
        write_items(&mut out, g, "        ");
        out.push_str("    }\n");
    }
    out.push_str("}\n");
    out
}

pub fn format_signature(sig: &Signature) -> String {
    let mut out = String::from("signature {\n");
    for s in sig.sorts() {
        let _ = writeln!(out, "    sort {s};");
    }
    for (name, decl) in sig.symbols() {
        if decl.args.is_empty() {
            let _ = writeln!(out, "    const {name}: {};", decl.result);
        } else {
            let args: Vec<&str> = decl.args.iter().map(|a| &**a).collect();
            let _ = writeln!(out, "    fn {name}({}): {};", args.join(", "), decl.result);
        }
    }
    out.push_str("}\n");
    out
}

/// Canonical text: signature (when declared), graphs, then rules, blocks
/// separated by blank lines.
pub fn format(doc: &Document) -> String {
    let mut blocks = Vec::new();
    if doc.explicit_signature {
        blocks.push(format_signature(&doc.signature));
    }
    blocks.extend(doc.graphs.iter().map(|(n, g)| format_graph(n, g)));
    blocks.extend(
        doc.rules
            .rules()
            .iter()
            .map(|r| format_rule(r, &doc.signature)),
    );
    blocks.join("\n")
}
