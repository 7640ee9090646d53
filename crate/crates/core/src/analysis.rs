//! Essential variables, symmetry groups, S_X-orbits of closure classes, the
//! canonical transversal and minimal terms.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::kelly::{default_closure, permutation_generators, ClosurePartition};
use crate::perm::{factorial, permutations};
use crate::syntax::{identification_minors, substitute, LinearTerm, SystemSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInfo {
    pub id: usize,
    pub members: Vec<u32>,
    /// Essential variables as a bit mask.
    pub essential: u64,
    pub orbit: usize,
}

impl ClassInfo {
    pub fn essential_vars(&self) -> Vec<usize> {
        mask_vars(self.essential)
    }

    pub fn essential_arity(&self) -> usize {
        self.essential.count_ones() as usize
    }
}

fn mask_vars(mask: u64) -> Vec<usize> {
    (0..64).filter(|v| mask & (1 << v) != 0).collect()
}

fn initial_segment(d: usize) -> u64 {
    if d >= 64 {
        u64::MAX
    } else {
        (1u64 << d) - 1
    }
}

/// Intersection of member variable sets per class, checked to be realized by
/// some member and non-empty.
fn all_essential(closure: &ClosurePartition) -> Result<Vec<u64>> {
    let u = closure.universe();
    let mut ess = vec![u64::MAX; closure.class_count()];
    for idx in 0..u.len() {
        ess[closure.class_of(idx)] &= u.variable_mask(idx);
    }
    let mut realized = vec![false; closure.class_count()];
    for idx in 0..u.len() {
        let c = closure.class_of(idx);
        if u.variable_mask(idx) == ess[c] {
            realized[c] = true;
        }
    }
    for (c, (&e, &r)) in ess.iter().zip(&realized).enumerate() {
        if e == 0 || !r {
            return Err(Error::Assumption(format!(
                "class {c} has no member realizing its essential variables (is the system idempotent and satisfiable?)"
            )));
        }
    }
    Ok(ess)
}

pub fn essential_variables(closure: &ClosurePartition, class: usize) -> Result<Vec<usize>> {
    if class >= closure.class_count() {
        return Err(Error::Invalid(format!("no class {class}")));
    }
    let u = closure.universe();
    let members = closure.members(class);
    let ess = members.iter().fold(u64::MAX, |acc, &i| acc & u.variable_mask(i as usize));
    if ess == 0 || !members.iter().any(|&i| u.variable_mask(i as usize) == ess) {
        return Err(Error::Assumption(format!("essential variables of class {class} are not realized")));
    }
    Ok(mask_vars(ess))
}

/// Image of a class under a permutation of the variables.
fn act(closure: &ClosurePartition, class: usize, gamma: &[usize]) -> usize {
    let t = closure.members(class)[0] as usize;
    closure.class_of(closure.universe().substitute_index(t, gamma))
}

/// All classes with essential sets and S_X-orbit ids. Orbits are numbered in
/// order of their least class id.
pub fn orbit_partition(closure: &ClosurePartition) -> Result<Vec<ClassInfo>> {
    let ess = all_essential(closure)?;
    let gens = permutation_generators(closure.m());
    let mut orbit = vec![usize::MAX; closure.class_count()];
    let mut next = 0;
    for start in 0..closure.class_count() {
        if orbit[start] != usize::MAX {
            continue;
        }
        orbit[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for g in &gens {
                let img = act(closure, c, g);
                if orbit[img] == usize::MAX {
                    orbit[img] = next;
                    queue.push_back(img);
                }
            }
        }
        next += 1;
    }
    Ok((0..closure.class_count())
        .map(|id| ClassInfo {
            id,
            members: closure.members(id).to_vec(),
            essential: ess[id],
            orbit: orbit[id],
        })
        .collect())
}

/// Permutations of `0..degree` stored as image arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGroup {
    pub degree: usize,
    pub elements: Vec<Vec<usize>>,
}

impl SymmetryGroup {
    pub fn trivial(degree: usize) -> Self {
        SymmetryGroup {
            degree,
            elements: vec![(0..degree).collect()],
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        self.elements.iter().any(|e| e == p)
    }

    /// Index in the full symmetric group.
    pub fn index(&self) -> u64 {
        factorial(self.degree) / self.order() as u64
    }
}

fn extend(p: &[usize], m: usize) -> Vec<usize> {
    let mut g: Vec<usize> = (0..m).collect();
    g[..p.len()].copy_from_slice(p);
    g
}

/// All `π ∈ S_d` with `t[π] ≡ t`, for a term whose variables are exactly `x0..x(d-1)`.
pub fn symmetry_group(closure: &ClosurePartition, rep: &LinearTerm) -> Result<SymmetryGroup> {
    let d = rep.variables().len();
    if rep.variable_mask() != initial_segment(d) {
        return Err(Error::Invalid("representative must use exactly the first d variables".into()));
    }
    let u = closure.universe();
    let idx = u.index_of(rep)?;
    let class = closure.class_of(idx);
    let elements = permutations(d)
        .into_iter()
        .filter(|p| closure.class_of(u.substitute_index(idx, &extend(p, closure.m()))) == class)
        .collect();
    Ok(SymmetryGroup { degree: d, elements })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalEntry {
    pub class_id: usize,
    pub representative: LinearTerm,
    pub arity: usize,
    pub group: SymmetryGroup,
    pub q: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    /// Entry 0 is the variable class with representative `x`.
    pub entries: Vec<TransversalEntry>,
}

impl Transversal {
    /// True when every linear term is trivial.
    pub fn violates_global_assumption(&self) -> bool {
        self.entries.len() == 1
    }

    pub fn nontrivial(&self) -> &[TransversalEntry] {
        &self.entries[1..]
    }
}

/// One class per orbit: the least class whose essential set is an initial
/// segment, represented by its least member with exactly those variables.
pub fn canonical_transversal(closure: &ClosurePartition, classes: &[ClassInfo]) -> Result<Transversal> {
    if let Some((a, b)) = closure.unsat_witness() {
        return Err(Error::Unsatisfiable(format!("x{} and x{} share a class", a + 1, b + 1)));
    }
    let report = crate::kelly::assumptions(closure);
    if !report.idempotent {
        return Err(Error::Assumption("the system is not idempotent".into()));
    }
    let u = closure.universe();
    let orbit_count = classes.iter().map(|c| c.orbit + 1).max().unwrap_or(0);
    let mut chosen: Vec<Option<usize>> = vec![None; orbit_count];
    for c in classes {
        let d = c.essential_arity();
        if c.essential == initial_segment(d) && chosen[c.orbit].is_none() {
            chosen[c.orbit] = Some(c.id);
        }
    }
    let mut entries = Vec::with_capacity(orbit_count);
    for (orbit, class) in chosen.into_iter().enumerate() {
        let id = class.ok_or_else(|| Error::Invalid(format!("orbit {orbit} has no canonical class")))?;
        let info = &classes[id];
        let d = info.essential_arity();
        let rep_idx = *info
            .members
            .iter()
            .find(|&&i| u.variable_mask(i as usize) == info.essential)
            .expect("essential set realized");
        let (representative, group) = if closure.class_variable(id).is_some() {
            (LinearTerm::Var(0), SymmetryGroup::trivial(1))
        } else {
            let rep = u.term(rep_idx as usize);
            let group = symmetry_group(closure, &rep)?;
            (rep, group)
        };
        entries.push(TransversalEntry {
            class_id: id,
            representative,
            arity: d,
            q: group.index(),
            group,
        });
    }
    entries.sort_by_key(|e| (e.arity, e.class_id));
    debug_assert_eq!(entries[0].representative, LinearTerm::Var(0));
    Ok(Transversal { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinimalKind {
    BinaryNontrivial,
    Minority,
    TwoThirdsMinority,
    Majority,
    Semiprojection,
}

impl MinimalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MinimalKind::BinaryNontrivial => "binary-nontrivial",
            MinimalKind::Minority => "minority",
            MinimalKind::TwoThirdsMinority => "two-thirds-minority",
            MinimalKind::Majority => "majority",
            MinimalKind::Semiprojection => "semiprojection",
        }
    }
}

impl fmt::Display for MinimalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalTermReport {
    pub term: LinearTerm,
    pub kind: MinimalKind,
    /// `π` such that `term[π]` satisfies the defining identities verbatim.
    pub witness: Vec<usize>,
}

fn is_trivial_as(closure: &ClosurePartition, t: &LinearTerm, var: usize) -> Result<bool> {
    Ok(closure.triviality_witness(t)? == Some(var))
}

/// Rename the variables of `t` onto `x0..x(d-1)` preserving their order.
fn compact(t: &LinearTerm, m: usize) -> Result<LinearTerm> {
    let mut gamma: Vec<usize> = (0..m.max(t.max_variable() + 1)).collect();
    let mut vars = t.variables();
    vars.sort_unstable();
    for (i, v) in vars.into_iter().enumerate() {
        gamma[v] = i;
    }
    substitute(t, &gamma)
}

fn is_minimal_compact(closure: &ClosurePartition, t: &LinearTerm) -> Result<bool> {
    if t.is_var() || closure.triviality_witness(t)?.is_some() {
        return Ok(false);
    }
    for (_, minor) in identification_minors(t)? {
        if closure.triviality_witness(&minor)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_minimal(closure: &ClosurePartition, t: &LinearTerm) -> Result<bool> {
    if t.is_var() {
        return Ok(false);
    }
    is_minimal_compact(closure, &compact(t, closure.m())?)
}

// The three ternary cases: each identity is (substitution of x,y,z, expected variable).
const MINORITY: [([usize; 3], usize); 3] = [([0, 1, 1], 0), ([1, 0, 1], 0), ([1, 1, 0], 0)];
const TWO_THIRDS: [([usize; 3], usize); 3] = [([0, 1, 1], 0), ([0, 1, 0], 0), ([1, 1, 0], 0)];
const MAJORITY: [([usize; 3], usize); 3] = [([0, 1, 1], 1), ([1, 0, 1], 1), ([1, 1, 0], 1)];

pub fn classify_minimal(closure: &ClosurePartition, t: &LinearTerm) -> Result<MinimalTermReport> {
    let m = closure.m();
    let t = compact(t, m)?;
    if !is_minimal_compact(closure, &t)? {
        return Err(Error::Invalid(format!("{} is not a minimal term", closure.spec().display_term(&t))));
    }
    let d = t.variables().len();
    let perms = permutations(d);
    let ternary = |ids: &[([usize; 3], usize); 3]| -> Result<Option<Vec<usize>>> {
        for p in &perms {
            let tp = substitute(&t, &extend(p, m))?;
            let mut all = true;
            for (gamma, var) in ids {
                if !is_trivial_as(closure, &substitute(&tp, &extend(gamma, m))?, *var)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(Some(p.clone()));
            }
        }
        Ok(None)
    };
    let found = match d {
        2 => Some((MinimalKind::BinaryNontrivial, perms[0].clone())),
        3 => {
            let mut hit = None;
            for (kind, ids) in [
                (MinimalKind::Minority, &MINORITY),
                (MinimalKind::TwoThirdsMinority, &TWO_THIRDS),
                (MinimalKind::Majority, &MAJORITY),
            ] {
                if let Some(p) = ternary(ids)? {
                    hit = Some((kind, p));
                    break;
                }
            }
            hit
        }
        _ => None,
    };
    if let Some((kind, witness)) = found {
        return Ok(MinimalTermReport { term: t, kind, witness });
    }
    if d >= 3 {
        for p in &perms {
            let tp = substitute(&t, &extend(p, m))?;
            let mut all = true;
            for (gamma, minor) in identification_minors(&tp)? {
                if !is_trivial_as(closure, &minor, gamma[0])? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(MinimalTermReport {
                    term: t,
                    kind: MinimalKind::Semiprojection,
                    witness: p.clone(),
                });
            }
        }
    }
    Err(Error::Invalid(format!(
        "minimal term {} matches none of the known cases",
        closure.spec().display_term(&t)
    )))
}

/// Full structural analysis of a satisfiable idempotent system at one `m`.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub closure: Arc<ClosurePartition>,
    pub classes: Vec<ClassInfo>,
    pub transversal: Transversal,
}

impl Analysis {
    pub fn new(closure: Arc<ClosurePartition>) -> Result<Self> {
        if let Some((a, b)) = closure.unsat_witness() {
            return Err(Error::Unsatisfiable(format!("x{} and x{} share a class", a + 1, b + 1)));
        }
        let classes = orbit_partition(&closure)?;
        let transversal = canonical_transversal(&closure, &classes)?;
        Ok(Analysis {
            closure,
            classes,
            transversal,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        self.closure.spec()
    }

    pub fn orbit_count(&self) -> usize {
        self.transversal.entries.len()
    }

    /// Class ids per orbit, orbits in order of their least class id.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.orbit_count()];
        for c in &self.classes {
            out[c.orbit].push(c.id);
        }
        out
    }

    /// Minimal transversal representatives (one per orbit of minimal terms).
    pub fn minimal_terms(&self) -> Result<Vec<LinearTerm>> {
        let mut out = Vec::new();
        for e in self.transversal.nontrivial() {
            if is_minimal_compact(&self.closure, &e.representative)? {
                out.push(e.representative.clone());
            }
        }
        Ok(out)
    }

    pub fn minimal_reports(&self) -> Result<Vec<MinimalTermReport>> {
        self.minimal_terms()?
            .iter()
            .map(|t| classify_minimal(&self.closure, t))
            .collect()
    }

    pub fn essentially_different(&self, s: &LinearTerm, t: &LinearTerm) -> Result<bool> {
        let a = self.closure.class_of_term(s)?;
        let b = self.closure.class_of_term(t)?;
        Ok(self.classes[a].orbit != self.classes[b].orbit)
    }
}

/// Analysis at the least admissible `m`, with the closure taken from the cache.
pub fn analyze(spec: &SystemSpec, budget: &Budget) -> Result<Analysis> {
    Analysis::new(default_closure(spec, budget)?)
}
