//! The universe of linear terms over `m` variables and the least
//! substitution-closed equivalence relation generated by a system.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::budget::{checked_pow, Budget};
use crate::error::{Error, Result};
use crate::syntax::{required_variable_count, variable_names, Identity, LinearTerm, Signature, SystemSpec};

/// All linear terms over `x0..x(m-1)`: variables first, then for each symbol
/// its argument tuples in lexicographic order. Terms are encoded as indices
/// and decoded on demand.
#[derive(Debug, Clone)]
pub struct TermUniverse {
    signature: Signature,
    m: usize,
    offsets: Vec<usize>,
    len: usize,
}

impl TermUniverse {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn symbol_at(&self, idx: usize) -> usize {
        self.offsets.partition_point(|&o| o <= idx) - 1
    }

    pub fn term(&self, idx: usize) -> LinearTerm {
        assert!(idx < self.len, "term index {idx} out of range");
        if idx < self.m {
            return LinearTerm::Var(idx);
        }
        let f = self.symbol_at(idx);
        let arity = self.signature.arity(f);
        let mut rem = idx - self.offsets[f];
        let mut args = vec![0; arity];
        for slot in args.iter_mut().rev() {
            *slot = rem % self.m;
            rem /= self.m;
        }
        LinearTerm::App { symbol: f, args }
    }

    pub fn index_of(&self, t: &LinearTerm) -> Result<usize> {
        let outside = || Error::Invalid(format!("term {t:?} is outside the universe over {} variables", self.m));
        match t {
            LinearTerm::Var(v) if *v < self.m => Ok(*v),
            LinearTerm::Var(_) => Err(outside()),
            LinearTerm::App { symbol, args } => {
                if *symbol >= self.signature.len() || args.len() != self.signature.arity(*symbol) {
                    return Err(outside());
                }
                let mut idx = 0;
                for &a in args {
                    if a >= self.m {
                        return Err(outside());
                    }
                    idx = idx * self.m + a;
                }
                Ok(self.offsets[*symbol] + idx)
            }
        }
    }

    /// Index of `t[gamma]` where `t` is the term at `idx`.
    pub fn substitute_index(&self, idx: usize, gamma: &[usize]) -> usize {
        if idx < self.m {
            return gamma[idx];
        }
        let f = self.symbol_at(idx);
        let arity = self.signature.arity(f);
        let mut rem = idx - self.offsets[f];
        let mut out = 0;
        let mut place = 1;
        for _ in 0..arity {
            out += gamma[rem % self.m] * place;
            rem /= self.m;
            place *= self.m;
        }
        self.offsets[f] + out
    }

    /// Bit mask of the variables occurring in the term at `idx`.
    pub fn variable_mask(&self, idx: usize) -> u64 {
        if idx < self.m {
            return 1 << idx;
        }
        let f = self.symbol_at(idx);
        let mut rem = idx - self.offsets[f];
        let mut mask = 0;
        for _ in 0..self.signature.arity(f) {
            mask |= 1 << (rem % self.m);
            rem /= self.m;
        }
        mask
    }
}

pub fn build_universe(signature: &Signature, m: usize, budget: &Budget) -> Result<TermUniverse> {
    if m < signature.max_arity().max(1) {
        return Err(Error::Invalid(format!(
            "{m} variables cannot host a symbol of arity {}",
            signature.max_arity()
        )));
    }
    budget.check_vars(m)?;
    let mut offsets = Vec::with_capacity(signature.len());
    let mut len = m;
    for s in signature.symbols() {
        offsets.push(len);
        len = checked_pow(m as u64, s.arity)
            .and_then(|c| usize::try_from(c).ok())
            .and_then(|c| len.checked_add(c))
            .filter(|&l| l <= budget.max_universe)
            .ok_or_else(|| {
                Error::Budget(format!(
                    "more than {} linear terms over {m} variables",
                    budget.max_universe
                ))
            })?;
    }
    Ok(TermUniverse {
        signature: signature.clone(),
        m,
        offsets,
        len,
    })
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        true
    }
}

/// Generators of the full transformation monoid on `[m]`: a transposition,
/// the m-cycle and one map of rank m-1.
pub(crate) fn monoid_generators(m: usize) -> Vec<Vec<usize>> {
    let mut gens = Vec::new();
    if m >= 2 {
        let mut swap: Vec<usize> = (0..m).collect();
        swap.swap(0, 1);
        gens.push(swap);
        if m >= 3 {
            gens.push((0..m).map(|i| (i + 1) % m).collect());
        }
        let mut collapse: Vec<usize> = (0..m).collect();
        collapse[1] = 0;
        gens.push(collapse);
    }
    gens
}

/// Generators of the symmetric group on `[m]`.
pub(crate) fn permutation_generators(m: usize) -> Vec<Vec<usize>> {
    monoid_generators(m).into_iter().filter(|g| is_permutation(g)).collect()
}

fn is_permutation(g: &[usize]) -> bool {
    let mut seen = 0u64;
    g.iter().all(|&x| {
        let fresh = seen & (1 << x) == 0;
        seen |= 1 << x;
        fresh
    })
}

/// The closure `≡` of a system on the terms over `m` variables.
#[derive(Debug, Clone)]
pub struct ClosurePartition {
    spec: SystemSpec,
    universe: TermUniverse,
    class_of: Vec<u32>,
    classes: Vec<Vec<u32>>,
}

pub fn compute_closure(spec: &SystemSpec, m: usize, budget: &Budget) -> Result<ClosurePartition> {
    let needed = required_variable_count(spec, None);
    if m < needed {
        return Err(Error::Invalid(format!("{m} variables are not enough for the system (need {needed})")));
    }
    let universe = build_universe(&spec.signature, m, budget)?;
    let mut uf = UnionFind::new(universe.len());
    let mut work: Vec<(u32, u32)> = Vec::new();
    for id in &spec.identities {
        let s = universe.index_of(&id.lhs)? as u32;
        let t = universe.index_of(&id.rhs)? as u32;
        if uf.union(s, t) {
            work.push((s, t));
        }
    }
    // Every merge is recorded as a pair; images of recorded pairs under the
    // generators are merged in turn. The recorded pairs generate the relation,
    // so closure under generators gives closure under all maps X -> X.
    let gens = monoid_generators(m);
    while let Some((s, t)) = work.pop() {
        for g in &gens {
            let s2 = universe.substitute_index(s as usize, g) as u32;
            let t2 = universe.substitute_index(t as usize, g) as u32;
            if uf.union(s2, t2) {
                work.push((s2, t2));
            }
        }
    }
    let mut class_of = vec![u32::MAX; universe.len()];
    let mut root_class: HashMap<u32, u32> = HashMap::new();
    let mut classes: Vec<Vec<u32>> = Vec::new();
    for (idx, slot) in class_of.iter_mut().enumerate() {
        let root = uf.find(idx as u32);
        let id = *root_class.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            (classes.len() - 1) as u32
        });
        *slot = id;
        classes[id as usize].push(idx as u32);
    }
    Ok(ClosurePartition {
        spec: spec.clone(),
        universe,
        class_of,
        classes,
    })
}

impl ClosurePartition {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn universe(&self) -> &TermUniverse {
        &self.universe
    }

    pub fn m(&self) -> usize {
        self.universe.m
    }

    /// Class id of a term index. Class ids follow the order of their least member.
    pub fn class_of(&self, idx: usize) -> usize {
        self.class_of[idx] as usize
    }

    pub fn class_of_term(&self, t: &LinearTerm) -> Result<usize> {
        Ok(self.class_of(self.universe.index_of(t)?))
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn members(&self, class: usize) -> &[u32] {
        &self.classes[class]
    }

    /// Syntactic entailment `Σ ⊢_X s ≈ t`.
    pub fn entails(&self, s: &LinearTerm, t: &LinearTerm) -> Result<bool> {
        Ok(self.class_of_term(s)? == self.class_of_term(t)?)
    }

    pub fn is_satisfiable(&self) -> bool {
        self.unsat_witness().is_none()
    }

    /// Two distinct variables in one class, if any.
    pub fn unsat_witness(&self) -> Option<(usize, usize)> {
        let m = self.m();
        self.classes
            .iter()
            .find(|c| c.len() >= 2 && (c[1] as usize) < m)
            .map(|c| (c[0] as usize, c[1] as usize))
    }

    /// A variable equivalent to `t`, if any (the least one).
    pub fn triviality_witness(&self, t: &LinearTerm) -> Result<Option<usize>> {
        let c = self.class_of_term(t)?;
        Ok(self.class_variable(c))
    }

    /// The least variable in a class.
    pub fn class_variable(&self, class: usize) -> Option<usize> {
        let first = self.classes[class][0] as usize;
        (first < self.m()).then_some(first)
    }

    /// One class per line, members rendered and space separated.
    pub fn dump(&self) -> String {
        let names = variable_names(&self.spec.signature, self.m());
        let mut out = String::new();
        for members in &self.classes {
            let row: Vec<String> = members
                .iter()
                .map(|&i| crate::syntax::render_term(&self.spec.signature, &self.universe.term(i as usize), &names))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

type CacheKey = (SystemSpec, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<ClosurePartition>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<ClosurePartition>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `compute_closure` memoized per `(spec, m)`.
pub fn closure(spec: &SystemSpec, m: usize, budget: &Budget) -> Result<Arc<ClosurePartition>> {
    let key = (spec.clone(), m);
    if let Some(c) = cache().read().expect("closure cache poisoned").get(&key) {
        return Ok(Arc::clone(c));
    }
    let computed = Arc::new(compute_closure(spec, m, budget)?);
    let mut w = cache().write().expect("closure cache poisoned");
    Ok(Arc::clone(w.entry(key).or_insert(computed)))
}

/// Closure at the least admissible `m`.
pub fn default_closure(spec: &SystemSpec, budget: &Budget) -> Result<Arc<ClosurePartition>> {
    closure(spec, required_variable_count(spec, None), budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionReport {
    pub idempotent: bool,
    pub satisfiable: bool,
    pub has_nontrivial_term: bool,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.idempotent && self.satisfiable && self.has_nontrivial_term
    }

    /// Error describing the first failed flag.
    pub fn require(&self) -> Result<()> {
        if !self.satisfiable {
            Err(Error::Unsatisfiable("the system entails x = y".into()))
        } else if !self.idempotent {
            Err(Error::Assumption("the system is not idempotent".into()))
        } else if !self.has_nontrivial_term {
            Err(Error::Assumption("every linear term is trivial".into()))
        } else {
            Ok(())
        }
    }
}

pub fn assumptions(closure: &ClosurePartition) -> AssumptionReport {
    let sig = &closure.spec.signature;
    let idempotent = (0..sig.len()).all(|f| {
        let t = LinearTerm::app(f, vec![0; sig.arity(f)]);
        closure.triviality_witness(&t).ok().flatten() == Some(0)
    });
    let has_nontrivial_term = (0..closure.class_count()).any(|c| closure.class_variable(c).is_none());
    AssumptionReport {
        idempotent,
        satisfiable: closure.is_satisfiable(),
        has_nontrivial_term,
    }
}

pub fn validate_assumptions(spec: &SystemSpec, budget: &Budget) -> Result<AssumptionReport> {
    Ok(assumptions(&*default_closure(spec, budget)?))
}

/// Outcome of an entailment query at an automatically chosen `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entailment {
    pub entailed: bool,
    pub m: usize,
    /// When false, the answer is syntactic only: everything is entailed semantically.
    pub satisfiable: bool,
}

pub fn entails_identity(spec: &SystemSpec, query: &Identity, budget: &Budget) -> Result<Entailment> {
    for t in [&query.lhs, &query.rhs] {
        spec.check_term(t)?;
    }
    let query = query.normalized();
    let m = required_variable_count(spec, Some(&query));
    let c = closure(spec, m, budget)?;
    Ok(Entailment {
        entailed: c.entails(&query.lhs, &query.rhs)?,
        m,
        satisfiable: c.is_satisfiable(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_system;

    fn spec(text: &str) -> SystemSpec {
        parse_system(text).unwrap()
    }

    #[test]
    fn universe_sizes() {
        let b = Budget::default();
        let cm = spec("signature f/3\nidentity f(x,x,y) = y");
        assert_eq!(build_universe(&cm.signature, 3, &b).unwrap().len(), 30);
        let hm = spec("signature q1/3, q2/3\nidentity q1(x,y,y) = x");
        assert_eq!(build_universe(&hm.signature, 3, &b).unwrap().len(), 57);
        let bin = spec("signature f/2\nidentity f(x,x) = x");
        assert_eq!(build_universe(&bin.signature, 2, &b).unwrap().len(), 6);
        assert!(matches!(build_universe(&bin.signature, 8, &b), Err(Error::Budget(_))));
    }

    #[test]
    fn universe_round_trip() {
        let s = spec("signature f/3, g/2\nidentity f(x,x,y) = y");
        let u = build_universe(&s.signature, 3, &Budget::default()).unwrap();
        for i in 0..u.len() {
            assert_eq!(u.index_of(&u.term(i)).unwrap(), i);
            let gamma = [2, 0, 0];
            let direct = crate::syntax::substitute(&u.term(i), &gamma).unwrap();
            assert_eq!(u.substitute_index(i, &gamma), u.index_of(&direct).unwrap());
            assert_eq!(u.variable_mask(i), u.term(i).variable_mask());
        }
    }

    #[test]
    fn generators() {
        assert_eq!(monoid_generators(3), vec![vec![1, 0, 2], vec![1, 2, 0], vec![0, 0, 2]]);
        assert_eq!(permutation_generators(2), vec![vec![1, 0]]);
        assert!(monoid_generators(1).is_empty());
    }

    #[test]
    fn collapse_is_unsatisfiable() {
        let s = spec("signature f/2\nidentity f(x,y) = x\nidentity f(x,y) = y");
        let c = compute_closure(&s, 2, &Budget::default()).unwrap();
        assert!(!c.is_satisfiable());
        assert_eq!(c.unsat_witness(), Some((0, 1)));
        let r = assumptions(&c);
        assert!(!r.satisfiable);
        assert!(matches!(r.require(), Err(Error::Unsatisfiable(_))));
    }

    #[test]
    fn empty_system_has_singleton_classes() {
        let sig = Signature::new(vec![crate::syntax::Symbol { name: "f".into(), arity: 2 }]).unwrap();
        let s = SystemSpec::new("", sig, vec![]).unwrap();
        let c = compute_closure(&s, 2, &Budget::default()).unwrap();
        assert_eq!(c.class_count(), 6);
        assert!(c.is_satisfiable());
    }

    #[test]
    fn projection_system_flags() {
        let s = spec("signature f/2\nidentity f(x,y) = x");
        let r = validate_assumptions(&s, &Budget::default()).unwrap();
        assert_eq!(
            r,
            AssumptionReport {
                idempotent: true,
                satisfiable: true,
                has_nontrivial_term: false
            }
        );
    }

    #[test]
    fn maltsev_entailment() {
        let s = spec("signature f/3\nidentity f(x,y,y) = x\nidentity f(x,x,y) = y");
        let q = crate::syntax::parse_identity(&s.signature, "f(x,y,x) = f(y,x,y)").unwrap();
        let e = entails_identity(&s, &q, &Budget::default()).unwrap();
        assert!(!e.entailed);
        assert!(e.satisfiable);
        let q = crate::syntax::parse_identity(&s.signature, "f(y,y,y) = y").unwrap();
        assert!(entails_identity(&s, &q, &Budget::default()).unwrap().entailed);
    }

    #[test]
    fn cache_returns_shared_closure() {
        let s = spec("signature f/3\nidentity f(x,y,y) = x\nidentity f(x,x,y) = y");
        let a = closure(&s, 3, &Budget::default()).unwrap();
        let b = closure(&s, 3, &Budget::default()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
