//! Many-sorted first-order terms: the label algebra of every graph.
//!
//! A [`Term`] is either a sorted [`Var`] or the application of a function
//! symbol to argument terms. Terms are reference counted, so cloning is
//! cheap and they can be shared freely between graphs. All comparisons are
//! structural; the derived total order (variables before applications, then
//! by name, then by arguments) is the one canonical order used everywhere a
//! deterministic ordering of labels is needed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish identifier used for symbols, sorts, variables and graph items.
pub type Name = Arc<str>;

/// Sort used when a document does not declare any.
pub const DEFAULT_SORT: &str = "S";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("variable `{0}` is not bound by the substitution")]
    UnboundVariable(Name),
    #[error("variable `{var}` of sort `{expected}` cannot be bound to a term of sort `{found}`")]
    SortMismatch {
        var: Name,
        expected: Name,
        found: Name,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Name),
    #[error("unknown sort `{0}`")]
    UnknownSort(Name),
    #[error("symbol `{symbol}` expects {expected} argument(s), got {found}")]
    Arity {
        symbol: Name,
        expected: usize,
        found: usize,
    },
    #[error("argument {position} of `{symbol}` must have sort `{expected}`, found `{found}`")]
    ArgumentSort {
        symbol: Name,
        position: usize,
        expected: Name,
        found: Name,
    },
    #[error("`{0}` is declared more than once or clashes with another name")]
    NameClash(Name),
}

/// A sorted variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Name,
    pub sort: Name,
}

impl Var {
    pub fn new(name: impl Into<Name>, sort: impl Into<Name>) -> Self {
        Var {
            name: name.into(),
            sort: sort.into(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Var(Var),
    App {
        symbol: Name,
        args: Vec<Term>,
        sort: Name,
    },
}

/// A finite term over a signature and a set of variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term(Arc<TermKind>);

impl Term {
    pub fn var(var: Var) -> Self {
        Term(Arc::new(TermKind::Var(var)))
    }

    /// Builds an application without consulting a signature.
    pub fn app(symbol: impl Into<Name>, sort: impl Into<Name>, args: Vec<Term>) -> Self {
        Term(Arc::new(TermKind::App {
            symbol: symbol.into(),
            args,
            sort: sort.into(),
        }))
    }

    pub fn constant(symbol: impl Into<Name>, sort: impl Into<Name>) -> Self {
        Term::app(symbol, sort, Vec::new())
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &*self.0 {
            TermKind::Var(v) => Some(v),
            TermKind::App { .. } => None,
        }
    }

    pub fn sort(&self) -> &Name {
        match &*self.0 {
            TermKind::Var(v) => &v.sort,
            TermKind::App { sort, .. } => sort,
        }
    }

    pub fn is_ground(&self) -> bool {
        match &*self.0 {
            TermKind::Var(_) => false,
            TermKind::App { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// The variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match &*self.0 {
            TermKind::Var(v) => {
                out.insert(v.clone());
            }
            TermKind::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// All subterms, the term itself included.
    pub fn subterms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_subterms(&mut out);
        out
    }

    pub(crate) fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        if out.insert(self.clone()) {
            if let TermKind::App { args, .. } = &*self.0 {
                args.iter().for_each(|a| a.collect_subterms(out));
            }
        }
    }

    pub fn size(&self) -> usize {
        match &*self.0 {
            TermKind::Var(_) => 1,
            TermKind::App { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            TermKind::Var(v) => f.write_str(&v.name),
            TermKind::App { symbol, args, .. } => {
                f.write_str(symbol)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite, sort-respecting map from variables to terms, extended
/// homomorphically to all terms by [`Substitution::apply`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.map.get(var)
    }

    /// Binds `var` to `term`, checking sorts. Rebinding replaces the old value.
    pub fn bind(&mut self, var: Var, term: Term) -> Result<(), TermError> {
        if term.sort() != &var.sort {
            return Err(TermError::SortMismatch {
                expected: var.sort.clone(),
                found: term.sort().clone(),
                var: var.name,
            });
        }
        self.map.insert(var, term);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Homomorphic extension of the substitution to `term`.
    pub fn apply(&self, term: &Term) -> Result<Term, TermError> {
        match term.kind() {
            TermKind::Var(v) => self
                .map
                .get(v)
                .cloned()
                .ok_or_else(|| TermError::UnboundVariable(v.name.clone())),
            TermKind::App { symbol, args, sort } => {
                if term.is_ground() {
                    return Ok(term.clone());
                }
                let args = args
                    .iter()
                    .map(|a| self.apply(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::app(symbol.clone(), sort.clone(), args))
            }
        }
    }

    /// Applies the substitution to every term of a set.
    pub fn apply_set(&self, terms: &BTreeSet<Term>) -> Result<BTreeSet<Term>, TermError> {
        terms.iter().map(|t| self.apply(t)).collect()
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Substitution) -> Result<Substitution, TermError> {
        let map = other
            .map
            .iter()
            .map(|(v, t)| Ok((v.clone(), self.apply(t)?)))
            .collect::<Result<_, TermError>>()?;
        Ok(Substitution { map })
    }

    /// Restriction to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Substitution {
        let map = vars
            .into_iter()
            .filter_map(|v| self.map.get(v).map(|t| (v.clone(), t.clone())))
            .collect();
        Substitution { map }
    }

    /// Returns the variable bijection this substitution encodes, if it maps
    /// its domain injectively onto variables.
    pub fn as_renaming(&self) -> Option<BTreeMap<Var, Var>> {
        let mut seen = BTreeSet::new();
        let mut out = BTreeMap::new();
        for (v, t) in &self.map {
            let w = t.as_var()?;
            if !seen.insert(w.clone()) {
                return None;
            }
            out.insert(v.clone(), w.clone());
        }
        Some(out)
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}↦{t}")?;
        }
        f.write_str("}")
    }
}

/// One-sided matching: the least extension of `partial` that maps `pattern`
/// onto `ground`, or `None` when no extension exists.
///
/// A sort mismatch between a pattern variable and the ground subterm it would
/// be bound to is reported as an error rather than a failed match.
pub fn match_term(
    pattern: &Term,
    ground: &Term,
    partial: &Substitution,
) -> Result<Option<Substitution>, TermError> {
    let mut out = partial.clone();
    if match_into(pattern, ground, &mut out)? {
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

fn match_into(pattern: &Term, ground: &Term, subst: &mut Substitution) -> Result<bool, TermError> {
    match (pattern.kind(), ground.kind()) {
        (TermKind::Var(v), _) => {
            if let Some(bound) = subst.get(v) {
                return Ok(bound == ground);
            }
            subst.bind(v.clone(), ground.clone())?;
            Ok(true)
        }
        (
            TermKind::App { symbol, args, sort },
            TermKind::App {
                symbol: gsym,
                args: gargs,
                sort: gsort,
            },
        ) => {
            if symbol != gsym || sort != gsort || args.len() != gargs.len() {
                return Ok(false);
            }
            for (p, g) in args.iter().zip(gargs) {
                if !match_into(p, g, subst)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (TermKind::App { .. }, TermKind::Var(_)) => Ok(false),
    }
}

/// Matching against a binding vector indexed by variable position; used by
/// the graph matcher, which undoes bindings through a trail.
pub(crate) fn match_indexed(
    pattern: &Term,
    ground: &Term,
    var_index: &BTreeMap<Var, usize>,
    bindings: &mut [Option<Term>],
    trail: &mut Vec<usize>,
) -> bool {
    match (pattern.kind(), ground.kind()) {
        (TermKind::Var(v), _) => {
            let i = var_index[v];
            match &bindings[i] {
                Some(b) => b == ground,
                None => {
                    if ground.sort() != &v.sort {
                        return false;
                    }
                    bindings[i] = Some(ground.clone());
                    trail.push(i);
                    true
                }
            }
        }
        (
            TermKind::App { symbol, args, sort },
            TermKind::App {
                symbol: gsym,
                args: gargs,
                sort: gsort,
            },
        ) => {
            symbol == gsym
                && sort == gsort
                && args.len() == gargs.len()
                && args
                    .iter()
                    .zip(gargs)
                    .all(|(p, g)| match_indexed(p, g, var_index, bindings, trail))
        }
        (TermKind::App { .. }, TermKind::Var(_)) => false,
    }
}

/// Applies a binding vector to a term whose variables are all bound.
pub(crate) fn apply_indexed(
    term: &Term,
    var_index: &BTreeMap<Var, usize>,
    bindings: &[Option<Term>],
) -> Option<Term> {
    match term.kind() {
        TermKind::Var(v) => bindings[var_index[v]].clone(),
        TermKind::App { symbol, args, sort } => {
            if term.is_ground() {
                return Some(term.clone());
            }
            let args = args
                .iter()
                .map(|a| apply_indexed(a, var_index, bindings))
                .collect::<Option<Vec<_>>>()?;
            Some(Term::app(symbol.clone(), sort.clone(), args))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolDecl {
    pub args: Vec<Name>,
    pub result: Name,
}

/// A finite many-sorted signature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: BTreeSet<Name>,
    symbols: BTreeMap<Name, SymbolDecl>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single-sorted signature with the sort [`DEFAULT_SORT`].
    pub fn single_sorted() -> Self {
        let mut sig = Signature::new();
        sig.sorts.insert(DEFAULT_SORT.into());
        sig
    }

    pub fn declare_sort(&mut self, sort: impl Into<Name>) -> Result<(), TermError> {
        let sort = sort.into();
        if self.symbols.contains_key(&sort) || !self.sorts.insert(sort.clone()) {
            return Err(TermError::NameClash(sort));
        }
        Ok(())
    }

    pub fn declare_symbol(
        &mut self,
        symbol: impl Into<Name>,
        args: Vec<Name>,
        result: impl Into<Name>,
    ) -> Result<(), TermError> {
        let symbol = symbol.into();
        let result = result.into();
        if self.sorts.contains(&symbol) || self.symbols.contains_key(&symbol) {
            return Err(TermError::NameClash(symbol));
        }
        for s in args.iter().chain(std::iter::once(&result)) {
            if !self.sorts.contains(s) {
                return Err(TermError::UnknownSort(s.clone()));
            }
        }
        self.symbols.insert(symbol, SymbolDecl { args, result });
        Ok(())
    }

    pub fn sorts(&self) -> impl Iterator<Item = &Name> {
        self.sorts.iter()
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.contains(sort)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&Name, &SymbolDecl)> {
        self.symbols.iter()
    }

    pub fn symbol(&self, name: &str) -> Option<&SymbolDecl> {
        self.symbols.get(name)
    }

    /// Builds a well-sorted application.
    pub fn app(&self, symbol: &str, args: Vec<Term>) -> Result<Term, TermError> {
        let (name, decl) = self
            .symbols
            .get_key_value(symbol)
            .ok_or_else(|| TermError::UnknownSymbol(symbol.into()))?;
        if decl.args.len() != args.len() {
            return Err(TermError::Arity {
                symbol: name.clone(),
                expected: decl.args.len(),
                found: args.len(),
            });
        }
        for (i, (expected, arg)) in decl.args.iter().zip(&args).enumerate() {
            if expected != arg.sort() {
                return Err(TermError::ArgumentSort {
                    symbol: name.clone(),
                    position: i + 1,
                    expected: expected.clone(),
                    found: arg.sort().clone(),
                });
            }
        }
        Ok(Term::app(name.clone(), decl.result.clone(), args))
    }

    pub fn constant(&self, symbol: &str) -> Result<Term, TermError> {
        self.app(symbol, Vec::new())
    }

    /// Checks that `term` only uses declared symbols and sorts, with the
    /// declared arities.
    pub fn check(&self, term: &Term) -> Result<(), TermError> {
        match term.kind() {
            TermKind::Var(v) => {
                if self.symbols.contains_key(&v.name) {
                    return Err(TermError::NameClash(v.name.clone()));
                }
                if !self.sorts.contains(&v.sort) {
                    return Err(TermError::UnknownSort(v.sort.clone()));
                }
                Ok(())
            }
            TermKind::App { symbol, args, sort } => {
                args.iter().try_for_each(|a| self.check(a))?;
                let rebuilt = self.app(symbol, args.clone())?;
                if rebuilt.sort() != sort {
                    return Err(TermError::ArgumentSort {
                        symbol: symbol.clone(),
                        position: 0,
                        expected: rebuilt.sort().clone(),
                        found: sort.clone(),
                    });
                }
                Ok(())
            }
        }
    }
}
