//! Linear terms, identities and system specifications.
//!
//! Variables are 0-based indices internally; surface names (`x`, `y`, `z`, ...)
//! exist only in the parser and renderer.

mod parse;
mod render;

pub use parse::{parse_identity, parse_system};
pub use render::{render_system, render_term, variable_names};

use crate::error::{Error, Result};

/// An operation symbol with its arity (always at least 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Ordered, non-empty list of operation symbols with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Invalid("signature has no symbols".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.arity == 0 {
                return Err(Error::Invalid(format!("constant symbol {}/0 is not allowed", s.name)));
            }
            if symbols[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::Invalid(format!("duplicate symbol {}", s.name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn arity(&self, symbol: usize) -> usize {
        self.symbols[symbol].arity
    }

    pub fn name(&self, symbol: usize) -> &str {
        &self.symbols[symbol].name
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }
}

/// A term with at most one operation symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinearTerm {
    Var(usize),
    App { symbol: usize, args: Vec<usize> },
}

impl LinearTerm {
    pub fn app(symbol: usize, args: impl Into<Vec<usize>>) -> Self {
        LinearTerm::App {
            symbol,
            args: args.into(),
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn variables(&self) -> Vec<usize> {
        match self {
            LinearTerm::Var(v) => vec![*v],
            LinearTerm::App { args, .. } => {
                let mut seen = Vec::new();
                for &a in args {
                    if !seen.contains(&a) {
                        seen.push(a);
                    }
                }
                seen
            }
        }
    }

    /// Bit mask of the variables occurring in the term.
    pub fn variable_mask(&self) -> u64 {
        match self {
            LinearTerm::Var(v) => 1 << v,
            LinearTerm::App { args, .. } => args.iter().fold(0, |m, &a| m | (1 << a)),
        }
    }

    pub fn max_variable(&self) -> usize {
        match self {
            LinearTerm::Var(v) => *v,
            LinearTerm::App { args, .. } => args.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, LinearTerm::Var(_))
    }
}

/// `s[γ]`: replace every variable `x` by `gamma[x]`.
pub fn substitute(term: &LinearTerm, gamma: &[usize]) -> Result<LinearTerm> {
    let map = |v: usize| {
        gamma
            .get(v)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("substitution undefined on variable {v}")))
    };
    Ok(match term {
        LinearTerm::Var(v) => LinearTerm::Var(map(*v)?),
        LinearTerm::App { symbol, args } => LinearTerm::App {
            symbol: *symbol,
            args: args.iter().map(|&a| map(a)).collect::<Result<_>>()?,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity {
    pub lhs: LinearTerm,
    pub rhs: LinearTerm,
}

impl Identity {
    pub fn new(lhs: LinearTerm, rhs: LinearTerm) -> Self {
        Identity { lhs, rhs }
    }

    /// Number of distinct variables across both sides.
    pub fn variable_count(&self) -> usize {
        (self.lhs.variable_mask() | self.rhs.variable_mask()).count_ones() as usize
    }

    pub fn max_variable(&self) -> usize {
        self.lhs.max_variable().max(self.rhs.max_variable())
    }

    /// Rename variables to `0, 1, ...` in order of first occurrence (left side first).
    pub fn normalized(&self) -> Identity {
        let mut order: Vec<usize> = Vec::new();
        for t in [&self.lhs, &self.rhs] {
            for v in t.variables() {
                if !order.contains(&v) {
                    order.push(v);
                }
            }
        }
        let mut gamma = vec![0; self.max_variable() + 1];
        for (i, &v) in order.iter().enumerate() {
            gamma[v] = i;
        }
        Identity {
            lhs: substitute(&self.lhs, &gamma).expect("total renaming"),
            rhs: substitute(&self.rhs, &gamma).expect("total renaming"),
        }
    }
}

/// A linear system: signature plus a finite list of linear identities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemSpec {
    pub name: String,
    pub signature: Signature,
    pub identities: Vec<Identity>,
}

impl SystemSpec {
    /// Validates every identity against the signature and renames its
    /// variables into first-occurrence order.
    pub fn new(name: impl Into<String>, signature: Signature, identities: Vec<Identity>) -> Result<Self> {
        let mut spec = SystemSpec {
            name: name.into(),
            signature,
            identities,
        };
        for (i, id) in spec.identities.iter().enumerate() {
            for t in [&id.lhs, &id.rhs] {
                spec.check_term(t)
                    .map_err(|e| Error::Invalid(format!("identity {}: {e}", i + 1)))?;
            }
        }
        for id in &mut spec.identities {
            *id = id.normalized();
        }
        Ok(spec)
    }

    pub fn check_term(&self, t: &LinearTerm) -> Result<()> {
        if t.max_variable() >= 64 {
            return Err(Error::Invalid("more than 64 variables in one term".into()));
        }
        if let LinearTerm::App { symbol, args } = t {
            if *symbol >= self.signature.len() {
                return Err(Error::Invalid(format!("undeclared symbol index {symbol}")));
            }
            let arity = self.signature.arity(*symbol);
            if args.len() != arity {
                return Err(Error::Invalid(format!(
                    "arity mismatch for {}: expected {arity}, got {}",
                    self.signature.name(*symbol),
                    args.len()
                )));
            }
        }
        Ok(())
    }

    /// Render a term with the default surface variable names.
    pub fn display_term(&self, t: &LinearTerm) -> String {
        let names = variable_names(&self.signature, t.max_variable() + 1);
        render::render_term(&self.signature, t, &names)
    }

    pub fn display_identity(&self, id: &Identity) -> String {
        let names = variable_names(&self.signature, id.max_variable() + 1);
        format!(
            "{} = {}",
            render::render_term(&self.signature, &id.lhs, &names),
            render::render_term(&self.signature, &id.rhs, &names)
        )
    }
}

/// First-occurrence canonical labels of a tuple's equality kernel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    labels: Vec<u8>,
}

impl Pattern {
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of blocks.
    pub fn blocks(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    /// Build from labels already in first-occurrence form.
    pub fn from_labels(labels: Vec<u8>) -> Result<Self> {
        let mut max: i32 = -1;
        for &l in &labels {
            if l as i32 > max + 1 {
                return Err(Error::Invalid(format!("labels {labels:?} are not in canonical form")));
            }
            max = max.max(l as i32);
        }
        if labels.is_empty() {
            return Err(Error::Invalid("empty pattern".into()));
        }
        Ok(Pattern { labels })
    }

    /// All patterns on `[d]`, in lexicographic order of their labels.
    pub fn all(d: usize) -> Vec<Pattern> {
        fn extend(prefix: &mut Vec<u8>, max: u8, d: usize, out: &mut Vec<Pattern>) {
            if prefix.len() == d {
                out.push(Pattern { labels: prefix.clone() });
                return;
            }
            for l in 0..=max + 1 {
                prefix.push(l);
                extend(prefix, max.max(l), d, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if d > 0 {
            let mut prefix = vec![0u8];
            extend(&mut prefix, 0, d, &mut out);
        }
        out
    }
}

/// The pattern of a tuple: equal entries get equal labels, numbered by first occurrence.
pub fn pattern_of<T: PartialEq>(tuple: &[T]) -> Result<Pattern> {
    if tuple.is_empty() {
        return Err(Error::Invalid("pattern of an empty tuple".into()));
    }
    let mut labels = Vec::with_capacity(tuple.len());
    for (i, v) in tuple.iter().enumerate() {
        let label = match tuple[..i].iter().position(|u| u == v) {
            Some(j) => labels[j],
            None => labels.iter().map(|&l: &u8| l + 1).max().unwrap_or(0),
        };
        labels.push(label);
    }
    Ok(Pattern { labels })
}

/// Proper identification minors: every non-injective self-map of the term's
/// variable set, paired with the resulting term. Maps are listed in
/// lexicographic order of their images.
pub fn identification_minors(t: &LinearTerm) -> Result<Vec<(Vec<usize>, LinearTerm)>> {
    let LinearTerm::App { .. } = t else {
        return Err(Error::Invalid("identification minors of a bare variable".into()));
    };
    let vars = {
        let mut v = t.variables();
        v.sort_unstable();
        v
    };
    let k = vars.len();
    let size = t.max_variable() + 1;
    let mut out = Vec::new();
    let mut choice = vec![0usize; k];
    loop {
        let mut seen = 0u64;
        let injective = choice.iter().all(|&c| {
            let fresh = seen & (1 << c) == 0;
            seen |= 1 << c;
            fresh
        });
        if !injective {
            let mut gamma: Vec<usize> = (0..size).collect();
            for (i, &v) in vars.iter().enumerate() {
                gamma[v] = vars[choice[i]];
            }
            let minor = substitute(t, &gamma)?;
            out.push((gamma, minor));
        }
        // odometer, last position fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Least `m` such that `{x1..xm}` is large enough for the system (and the
/// extra identity, when given).
pub fn required_variable_count(spec: &SystemSpec, extra: Option<&Identity>) -> usize {
    let mut m = 2.max(spec.signature.max_arity());
    for id in spec.identities.iter().chain(extra) {
        m = m.max(id.variable_count()).max(id.max_variable() + 1);
    }
    m
}
