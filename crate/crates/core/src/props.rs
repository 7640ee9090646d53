//! Decision procedures on concrete finite algebras: subuniverses,
//! automorphisms, compatible crosses, idemprimality, minority pairs.

use std::collections::HashSet;

use serde_json::{json, Value};

use crate::algebra::{cell_args, cell_index, FiniteAlgebra};
use crate::asymptotics::binomial;
use crate::budget::{checked_pow, Budget};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Subset(Vec<u32>),
    Permutation(Vec<u32>),
    Element(u32),
    /// An argument tuple whose value escapes.
    Cell { operation: String, args: Vec<u32> },
    /// Tuples whose coordinatewise image escapes a relation.
    Tuples { operation: String, tuples: Vec<Vec<u32>> },
}

impl Witness {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::Subset(s) => json!({"subset": s}),
            Witness::Permutation(p) => json!({"permutation": p}),
            Witness::Element(a) => json!({"element": a}),
            Witness::Cell { operation, args } => json!({"operation": operation, "args": args}),
            Witness::Tuples { operation, tuples } => json!({"operation": operation, "tuples": tuples}),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub property: String,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl PropertyResult {
    fn new(property: &str, holds: bool, witness: Option<Witness>) -> Self {
        PropertyResult {
            property: property.to_string(),
            holds,
            witness,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "property": self.property,
            "holds": self.holds,
            "witness": self.witness.as_ref().map(Witness::to_json),
        })
    }
}

fn member_mask(n: usize, set: &[u32]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &b in set {
        if b as usize >= n {
            return Err(Error::Invalid(format!("element {b} is outside 0..{n}")));
        }
        mask[b as usize] = true;
    }
    Ok(mask)
}

/// Visit every tuple over `elems` of length `d`, lexicographically; stop when `f` returns false.
fn for_each_tuple(elems: &[u32], d: usize, mut f: impl FnMut(&[u32]) -> bool) -> bool {
    if elems.is_empty() {
        return true;
    }
    let mut idx = vec![0usize; d];
    let mut tuple: Vec<u32> = vec![elems[0]; d];
    loop {
        if !f(&tuple) {
            return false;
        }
        let mut pos = d;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                tuple[pos] = elems[idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = elems[0];
        }
    }
}

fn escaping_cell(algebra: &FiniteAlgebra, set: &[u32], mask: &[bool]) -> Option<(usize, Vec<u32>)> {
    for (i, op) in algebra.operations.iter().enumerate() {
        let mut bad = None;
        for_each_tuple(set, op.arity, |t| {
            if mask[op.table[cell_index(algebra.n, t)] as usize] {
                true
            } else {
                bad = Some(t.to_vec());
                false
            }
        });
        if let Some(t) = bad {
            return Some((i, t));
        }
    }
    None
}

fn sorted_set(set: &[u32]) -> Vec<u32> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

pub fn is_subuniverse(algebra: &FiniteAlgebra, set: &[u32]) -> Result<PropertyResult> {
    if set.is_empty() {
        return Err(Error::Invalid("subuniverse check needs a non-empty set".into()));
    }
    let set = sorted_set(set);
    let mask = member_mask(algebra.n, &set)?;
    Ok(match escaping_cell(algebra, &set, &mask) {
        None => PropertyResult::new("subuniverse", true, None),
        Some((op, args)) => PropertyResult::new(
            "subuniverse",
            false,
            Some(Witness::Cell {
                operation: algebra.operations[op].name.clone(),
                args,
            }),
        ),
    })
}

/// Least subuniverse containing `gens`, sorted.
pub fn generated_subuniverse(algebra: &FiniteAlgebra, gens: &[u32]) -> Result<Vec<u32>> {
    if gens.is_empty() {
        return Err(Error::Invalid("generating set must be non-empty".into()));
    }
    let n = algebra.n;
    let gens = sorted_set(gens);
    let mut inside = member_mask(n, &gens)?;
    let mut elems = gens;
    let mut done = 0;
    let mut tuple = Vec::new();
    // semi-naive: each round only visits tuples with an element added in the previous round
    while done < elems.len() && elems.len() < n {
        let cur = elems.len();
        for op in &algebra.operations {
            let d = op.arity;
            for first_new in 0..d {
                let ranges: Vec<(usize, usize)> = (0..d)
                    .map(|p| match p.cmp(&first_new) {
                        std::cmp::Ordering::Less => (0, done),
                        std::cmp::Ordering::Equal => (done, cur),
                        std::cmp::Ordering::Greater => (0, cur),
                    })
                    .collect();
                if ranges.iter().any(|r| r.0 >= r.1) {
                    continue;
                }
                let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                'tuples: loop {
                    tuple.clear();
                    tuple.extend(idx.iter().map(|&i| elems[i]));
                    let v = op.table[cell_index(n, &tuple)];
                    if !inside[v as usize] {
                        inside[v as usize] = true;
                        elems.push(v);
                        if elems.len() == n {
                            break 'tuples;
                        }
                    }
                    let mut pos = d;
                    loop {
                        if pos == 0 {
                            break 'tuples;
                        }
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < ranges[pos].1 {
                            break;
                        }
                        idx[pos] = ranges[pos].0;
                    }
                }
                if elems.len() == n {
                    break;
                }
            }
            if elems.len() == n {
                break;
            }
        }
        done = cur;
    }
    elems.sort_unstable();
    Ok(elems)
}

/// Some 2-generated subuniverse is proper, i.e. a proper subalgebra of size > 1 exists.
pub fn has_proper_subalgebra_size_gt1(algebra: &FiniteAlgebra) -> Result<PropertyResult> {
    let n = algebra.n as u32;
    if n < 2 {
        return Err(Error::Invalid("needs at least 2 elements".into()));
    }
    for a in 0..n {
        for b in a + 1..n {
            let s = generated_subuniverse(algebra, &[a, b])?;
            if s.len() < n as usize {
                return Ok(PropertyResult::new("subalgGT1", true, Some(Witness::Subset(s))));
            }
        }
    }
    Ok(PropertyResult::new("subalgGT1", false, None))
}

/// Visit `k`-subsets of `0..n` lexicographically; stop when `f` returns false.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[u32]) -> bool) {
    if k > n {
        return;
    }
    let mut s: Vec<u32> = (0..k as u32).collect();
    loop {
        if !f(&s) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| (s[i] as usize) < n - k + i) else {
            return;
        };
        s[i] += 1;
        for j in i + 1..k {
            s[j] = s[j - 1] + 1;
        }
    }
}

fn check_subset_budget(n: usize, k: usize, budget: &Budget) -> Result<()> {
    let count = binomial(n as u64, k as u64);
    let count = u64::try_from(count).ok();
    budget.check_enumeration(&format!("{k}-subsets of {n} elements"), count)?;
    Ok(())
}

fn subset_closed(algebra: &FiniteAlgebra, s: &[u32], mask: &mut [bool]) -> bool {
    for &b in s {
        mask[b as usize] = true;
    }
    let ok = escaping_cell(algebra, s, mask).is_none();
    for &b in s {
        mask[b as usize] = false;
    }
    ok
}

/// All `k`-element subuniverses, lexicographically.
pub fn subalgebras_of_size(algebra: &FiniteAlgebra, k: usize, budget: &Budget) -> Result<Vec<Vec<u32>>> {
    if k == 0 {
        return Err(Error::Invalid("subalgebra size must be positive".into()));
    }
    check_subset_budget(algebra.n, k, budget)?;
    let mut mask = vec![false; algebra.n];
    let mut out = Vec::new();
    for_each_subset(algebra.n, k, |s| {
        if subset_closed(algebra, s, &mut mask) {
            out.push(s.to_vec());
        }
        true
    });
    Ok(out)
}

/// Existence of a `k`-element subuniverse, stopping at the first one.
pub fn has_subalgebra_of_size(algebra: &FiniteAlgebra, k: usize, budget: &Budget) -> Result<PropertyResult> {
    if k == 0 {
        return Err(Error::Invalid("subalgebra size must be positive".into()));
    }
    check_subset_budget(algebra.n, k, budget)?;
    let mut mask = vec![false; algebra.n];
    let mut found = None;
    for_each_subset(algebra.n, k, |s| {
        if subset_closed(algebra, s, &mut mask) {
            found = Some(s.to_vec());
            false
        } else {
            true
        }
    });
    let name = format!("subalg{k}");
    Ok(PropertyResult::new(&name, found.is_some(), found.map(Witness::Subset)))
}

struct AutSearch<'a> {
    algebra: &'a FiniteAlgebra,
    image: Vec<u32>,
    used: Vec<bool>,
    processed: Vec<u32>,
    log: Vec<u32>,
}

const UNSET: u32 = u32::MAX;

impl AutSearch<'_> {
    fn assign(&mut self, x: u32, y: u32) -> bool {
        if self.image[x as usize] != UNSET {
            return self.image[x as usize] == y;
        }
        if self.used[y as usize] {
            return false;
        }
        self.image[x as usize] = y;
        self.used[y as usize] = true;
        self.log.push(x);
        true
    }

    fn undo_to(&mut self, mark: usize, processed: usize) {
        while self.log.len() > mark {
            let x = self.log.pop().expect("log entry");
            let y = self.image[x as usize];
            self.used[y as usize] = false;
            self.image[x as usize] = UNSET;
        }
        self.processed.truncate(processed);
    }

    /// Check or force `π(f(a)) = f(π(a))` for all tuples over processed elements.
    fn propagate(&mut self) -> bool {
        let n = self.algebra.n;
        while self.processed.len() < self.log.len() {
            let e = self.log[self.processed.len()];
            self.processed.push(e);
            let elems = self.processed.clone();
            let e_pos = elems.len() - 1;
            for op in &self.algebra.operations {
                let d = op.arity;
                let mut idx = vec![0usize; d];
                let mut args = vec![0u32; d];
                let mut imgs = vec![0u32; d];
                loop {
                    if idx.contains(&e_pos) {
                        for j in 0..d {
                            args[j] = elems[idx[j]];
                            imgs[j] = self.image[args[j] as usize];
                        }
                        let r = op.table[cell_index(n, &args)];
                        let r_img = op.table[cell_index(n, &imgs)];
                        if !self.assign(r, r_img) {
                            return false;
                        }
                    }
                    let mut pos = d;
                    let mut finished = true;
                    while pos > 0 {
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < elems.len() {
                            finished = false;
                            break;
                        }
                        idx[pos] = 0;
                    }
                    if finished {
                        break;
                    }
                }
            }
        }
        true
    }

    fn search(&mut self, out: &mut Vec<Vec<u32>>, stop_at_nontrivial: bool) -> bool {
        let n = self.algebra.n as u32;
        let Some(x) = (0..n).find(|&x| self.image[x as usize] == UNSET) else {
            let nontrivial = self.image.iter().enumerate().any(|(i, &y)| i as u32 != y);
            out.push(self.image.clone());
            return stop_at_nontrivial && nontrivial;
        };
        for y in 0..n {
            if self.used[y as usize] {
                continue;
            }
            let (mark, processed) = (self.log.len(), self.processed.len());
            if self.assign(x, y) && self.propagate() && self.search(out, stop_at_nontrivial) {
                return true;
            }
            self.undo_to(mark, processed);
        }
        false
    }
}

fn run_aut(algebra: &FiniteAlgebra, budget: &Budget, stop_at_nontrivial: bool) -> Result<Vec<Vec<u32>>> {
    budget.check_carrier(algebra.n)?;
    let n = algebra.n;
    let mut s = AutSearch {
        algebra,
        image: vec![UNSET; n],
        used: vec![false; n],
        processed: Vec::new(),
        log: Vec::new(),
    };
    let mut out = Vec::new();
    s.search(&mut out, stop_at_nontrivial);
    Ok(out)
}

/// All automorphisms, in lexicographic order of their image arrays.
pub fn automorphisms(algebra: &FiniteAlgebra, budget: &Budget) -> Result<Vec<Vec<u32>>> {
    let auts = run_aut(algebra, budget, false)?;
    debug_assert!(is_group(&auts), "automorphisms do not form a group");
    Ok(auts)
}

fn is_group(perms: &[Vec<u32>]) -> bool {
    let set: HashSet<&Vec<u32>> = perms.iter().collect();
    perms.iter().all(|a| {
        perms.iter().all(|b| {
            let c: Vec<u32> = b.iter().map(|&x| a[x as usize]).collect();
            set.contains(&c)
        })
    })
}

pub fn has_nontrivial_automorphism(algebra: &FiniteAlgebra, budget: &Budget) -> Result<PropertyResult> {
    let found = run_aut(algebra, budget, true)?
        .into_iter()
        .find(|p| p.iter().enumerate().any(|(i, &y)| i as u32 != y));
    Ok(PropertyResult::new("automorphism", found.is_some(), found.map(Witness::Permutation)))
}

/// For one operation: the tuple pair breaking the cross at `a`, if any.
fn cross_violation(algebra: &FiniteAlgebra, op: usize, a: u32) -> Option<(Vec<u32>, Vec<u32>)> {
    let n = algebra.n;
    let table = &algebra.operations[op].table;
    let d = algebra.operations[op].arity;
    let full = (1usize << d) - 1;
    // bad[S]: some cell with value != a has a at every position of S
    let mut bad: Vec<Option<usize>> = vec![None; 1 << d];
    let mut args = vec![0u32; d];
    for (cell, &v) in table.iter().enumerate() {
        if v == a {
            continue;
        }
        cell_args(n, cell, &mut args);
        let z = args.iter().enumerate().fold(0, |m, (i, &x)| if x == a { m | (1 << i) } else { m });
        if bad[z].is_none() {
            bad[z] = Some(cell);
        }
    }
    for bit in 0..d {
        for s in 0..=full {
            if s & (1 << bit) == 0 && bad[s].is_none() {
                bad[s] = bad[s | (1 << bit)];
            }
        }
    }
    for t in 0..=full {
        if let (Some(u), Some(v)) = (bad[t], bad[full & !t]) {
            let mut ua = vec![0; d];
            let mut va = vec![0; d];
            cell_args(n, u, &mut ua);
            cell_args(n, v, &mut va);
            return Some((ua, va));
        }
    }
    None
}

/// Whether `({a}×A) ∪ (A×{a})` is a compatible relation.
pub fn cross_compatible(algebra: &FiniteAlgebra, a: u32) -> Result<PropertyResult> {
    if a as usize >= algebra.n {
        return Err(Error::Invalid(format!("element {a} is outside 0..{}", algebra.n)));
    }
    for op in 0..algebra.operations.len() {
        if let Some((u, v)) = cross_violation(algebra, op, a) {
            return Ok(PropertyResult::new(
                "cross",
                false,
                Some(Witness::Tuples {
                    operation: algebra.operations[op].name.clone(),
                    tuples: vec![u, v],
                }),
            ));
        }
    }
    Ok(PropertyResult::new("cross", true, Some(Witness::Element(a))))
}

/// Some cross is compatible.
pub fn has_compatible_cross(algebra: &FiniteAlgebra) -> Result<PropertyResult> {
    for a in 0..algebra.n as u32 {
        if cross_compatible(algebra, a)?.holds {
            return Ok(PropertyResult::new("cross", true, Some(Witness::Element(a))));
        }
    }
    Ok(PropertyResult::new("cross", false, None))
}

/// The cross at `a` as an explicit binary relation.
pub fn cross_relation(n: usize, a: u32) -> Vec<Vec<u32>> {
    let mut r = Vec::new();
    for x in 0..n as u32 {
        for y in 0..n as u32 {
            if x == a || y == a {
                r.push(vec![x, y]);
            }
        }
    }
    r
}

/// Generic check that a relation is closed under all operations, coordinatewise.
pub fn is_compatible_relation(algebra: &FiniteAlgebra, relation: &[Vec<u32>], budget: &Budget) -> Result<PropertyResult> {
    let Some(k) = relation.first().map(Vec::len) else {
        return Ok(PropertyResult::new("compatible", true, None));
    };
    if relation.iter().any(|r| r.len() != k || r.iter().any(|&x| x as usize >= algebra.n)) {
        return Err(Error::Invalid("relation rows must share one length and lie in the carrier".into()));
    }
    let set: HashSet<&[u32]> = relation.iter().map(Vec::as_slice).collect();
    let rows: Vec<u32> = (0..relation.len() as u32).collect();
    for op in &algebra.operations {
        budget.check_enumeration("relation compatibility", checked_pow(relation.len() as u64, op.arity))?;
        let mut bad = None;
        let mut args = vec![0u32; op.arity];
        let mut out = vec![0u32; k];
        for_each_tuple(&rows, op.arity, |choice| {
            for c in 0..k {
                for (j, &r) in choice.iter().enumerate() {
                    args[j] = relation[r as usize][c];
                }
                out[c] = op.table[cell_index(algebra.n, &args)];
            }
            if set.contains(out.as_slice()) {
                true
            } else {
                bad = Some(choice.iter().map(|&r| relation[r as usize].clone()).collect());
                false
            }
        });
        if let Some(tuples) = bad {
            return Ok(PropertyResult::new(
                "compatible",
                false,
                Some(Witness::Tuples {
                    operation: op.name.clone(),
                    tuples,
                }),
            ));
        }
    }
    Ok(PropertyResult::new("compatible", true, None))
}

/// No proper subalgebra of size > 1, no nontrivial automorphism, no compatible cross.
pub fn is_idemprimal(algebra: &FiniteAlgebra, budget: &Budget) -> Result<PropertyResult> {
    if algebra.n <= 2 {
        return Err(Error::Unsupported("the idemprimality criterion needs more than 2 elements".into()));
    }
    if !algebra.is_idempotent() {
        return Err(Error::Invalid("the idemprimality criterion needs an idempotent algebra".into()));
    }
    let sub = has_proper_subalgebra_size_gt1(algebra)?;
    if sub.holds {
        return Ok(PropertyResult::new("idemprimal", false, sub.witness));
    }
    let aut = has_nontrivial_automorphism(algebra, budget)?;
    if aut.holds {
        return Ok(PropertyResult::new("idemprimal", false, aut.witness));
    }
    let cross = has_compatible_cross(algebra)?;
    if cross.holds {
        return Ok(PropertyResult::new("idemprimal", false, cross.witness));
    }
    Ok(PropertyResult::new("idemprimal", true, None))
}

/// Some pair `{a, b}` is a subuniverse on which `symbol` is the minority operation.
pub fn has_minority_two_subalgebra(algebra: &FiniteAlgebra, symbol: usize) -> Result<PropertyResult> {
    let op = algebra
        .operations
        .get(symbol)
        .ok_or_else(|| Error::Invalid(format!("no operation {symbol}")))?;
    if op.arity != 3 {
        return Err(Error::Invalid(format!("{} is not ternary", op.name)));
    }
    let n = algebra.n as u32;
    let mut mask = vec![false; algebra.n];
    for a in 0..n {
        for b in a + 1..n {
            let pair = [a, b];
            let minority = for_each_tuple(&pair, 3, |t| {
                let odd = if t[0] == t[1] { t[2] } else if t[0] == t[2] { t[1] } else { t[0] };
                op.table[cell_index(algebra.n, t)] == odd
            });
            if minority && subset_closed(algebra, &pair, &mut mask) {
                return Ok(PropertyResult::new("minority2", true, Some(Witness::Subset(pair.to_vec()))));
            }
        }
    }
    Ok(PropertyResult::new("minority2", false, None))
}
