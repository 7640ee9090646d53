//! The correspondence between models and families of free functions: pattern
//! dispatch, uniform sampling, realization, extraction and enumeration.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{cell_args, cell_index, validate_model, FiniteAlgebra, Operation};
use crate::analysis::{Analysis, Transversal};
use crate::budget::{checked_pow, Budget};
use crate::error::{Error, Result};
use crate::syntax::{pattern_of, LinearTerm, Pattern};

/// Where the value of `f(a)` comes from, for all `a` of one pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dispatch {
    /// Transversal entry; 0 means the value is an argument.
    pub entry: usize,
    /// `sigma[j]` is the argument position feeding variable `j` of the representative.
    pub sigma: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchTable {
    /// Per symbol, per pattern (in `Pattern::all` order).
    pub symbols: Vec<Vec<(Pattern, Dispatch)>>,
}

impl DispatchTable {
    pub fn lookup(&self, symbol: usize, pattern: &Pattern) -> Option<&Dispatch> {
        self.symbols[symbol].iter().find(|(p, _)| p == pattern).map(|(_, d)| d)
    }
}

/// Injective maps from `b` blocks into `0..m`, lexicographic.
fn injective_assignments(b: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: u64, b: usize, m: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == b {
            out.push(prefix.clone());
            return;
        }
        for v in 0..m {
            if used & (1 << v) == 0 {
                prefix.push(v);
                go(prefix, used | (1 << v), b, m, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, b, m, &mut out);
    out
}

fn dispatch_with<F>(analysis: &Analysis, mut order: F) -> Result<DispatchTable>
where
    F: FnMut(&mut Vec<Vec<usize>>),
{
    let closure = &analysis.closure;
    let sig = &closure.spec().signature;
    let m = closure.m();
    let mut entry_of_class: HashMap<usize, usize> = HashMap::new();
    for (i, e) in analysis.transversal.entries.iter().enumerate() {
        entry_of_class.insert(e.class_id, i);
    }
    let mut symbols = Vec::with_capacity(sig.len());
    for f in 0..sig.len() {
        let arity = sig.arity(f);
        let mut rows = Vec::new();
        for pattern in Pattern::all(arity) {
            let mut candidates = injective_assignments(pattern.blocks(), m);
            order(&mut candidates);
            let mut found = None;
            for assign in &candidates {
                let z: Vec<usize> = pattern.labels().iter().map(|&l| assign[l as usize]).collect();
                let class = closure.class_of_term(&LinearTerm::app(f, z.clone()))?;
                if let Some(&entry) = entry_of_class.get(&class) {
                    let d = analysis.transversal.entries[entry].arity;
                    let sigma = (0..d)
                        .map(|j| z.iter().position(|&v| v == j))
                        .collect::<Option<Vec<usize>>>()
                        .ok_or_else(|| Error::Invalid("dispatch hit lacks an essential variable".into()))?;
                    found = Some(Dispatch { entry, sigma });
                    break;
                }
            }
            let dispatch = found.ok_or_else(|| {
                Error::Invalid(format!(
                    "no transversal class reached for {} with pattern {:?}",
                    sig.name(f),
                    pattern.labels()
                ))
            })?;
            rows.push((pattern, dispatch));
        }
        symbols.push(rows);
    }
    Ok(DispatchTable { symbols })
}

/// For each symbol and pattern, the first variable tuple (in lexicographic
/// order of block assignments) landing in a transversal class.
pub fn build_dispatch(analysis: &Analysis) -> Result<DispatchTable> {
    dispatch_with(analysis, |_| {})
}

/// The same construction with candidate tuples visited in a random order.
pub fn build_dispatch_shuffled<R: Rng>(analysis: &Analysis, rng: &mut R) -> Result<DispatchTable> {
    dispatch_with(analysis, |c| c.shuffle(rng))
}

/// One free function per nontrivial transversal entry, stored on the
/// lexicographically least member of each orbit of injective tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MFamily {
    pub n: usize,
    pub tables: Vec<FamilyTable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyTable {
    pub arity: usize,
    /// Orbit keys, concatenated; `keys.len() = arity·values.len()`.
    pub keys: Arc<Vec<u32>>,
    pub values: Vec<u32>,
}

impl FamilyTable {
    pub fn key(&self, slot: usize) -> &[u32] {
        &self.keys[slot * self.arity..(slot + 1) * self.arity]
    }
}

impl MFamily {
    pub fn draws(&self) -> usize {
        self.tables.iter().map(|t| t.values.len()).sum()
    }

    /// All values in entry order then key order.
    pub fn flat_values(&self) -> Vec<u32> {
        self.tables.iter().flat_map(|t| t.values.iter().copied()).collect()
    }
}

#[derive(Debug, Clone)]
struct EntryLayout {
    arity: usize,
    keys: Arc<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellSource {
    /// A fixed element, from a projection.
    Element(u32),
    /// Position in the flat family values.
    Slot(usize),
}

/// Everything needed to sample and realize models on a fixed carrier.
/// Realization is a gather: each table cell reads one position of
/// `[0, 1, .., n-1, family values..]`.
#[derive(Debug, Clone)]
pub struct FamilyLayout {
    n: usize,
    names: Vec<String>,
    arities: Vec<usize>,
    entries: Vec<EntryLayout>,
    /// Per symbol, per cell: index into the combined value vector.
    plans: Vec<Vec<u32>>,
    /// Per entry (index 0 unused), first position of its slots in the family values.
    offsets: Vec<usize>,
    draws: usize,
}

fn checked_cells(n: usize, arity: usize, budget: &Budget) -> Result<usize> {
    checked_pow(n as u64, arity)
        .filter(|&c| c <= budget.max_table_cells)
        .map(|c| c as usize)
        .ok_or_else(|| {
            Error::Budget(format!(
                "a table of arity {arity} over {n} elements exceeds {} cells",
                budget.max_table_cells
            ))
        })
}

/// Orbit keys and a dense slot map for the injective `d`-tuples over `n`.
fn orbit_keys(n: usize, d: usize, group: &[Vec<usize>], budget: &Budget) -> Result<(Vec<u32>, Vec<u32>)> {
    let cells = checked_cells(n, d, budget)?;
    let mut slot_of = vec![u32::MAX; cells];
    let mut keys = Vec::new();
    let mut tuple = vec![0u32; d];
    let mut image = vec![0u32; d];
    let mut slots = 0u32;
    for cell in 0..cells {
        if slot_of[cell] != u32::MAX {
            continue;
        }
        cell_args(n, cell, &mut tuple);
        if pattern_is_injective(&tuple) {
            // the first tuple of an orbit met in cell order is its least member
            keys.extend_from_slice(&tuple);
            for pi in group {
                for (j, &p) in pi.iter().enumerate() {
                    image[j] = tuple[p];
                }
                slot_of[cell_index(n, &image)] = slots;
            }
            slots += 1;
        }
    }
    Ok((keys, slot_of))
}

fn pattern_is_injective(t: &[u32]) -> bool {
    t.iter().enumerate().all(|(i, a)| !t[..i].contains(a))
}

impl FamilyLayout {
    pub fn new(analysis: &Analysis, dispatch: &DispatchTable, n: usize, budget: &Budget) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("carrier must be non-empty".into()));
        }
        let sig = &analysis.spec().signature;
        let transversal: &Transversal = &analysis.transversal;
        let mut entries = vec![EntryLayout {
            arity: 1,
            keys: Arc::new(Vec::new()),
        }];
        let mut slot_maps = vec![Vec::new()];
        let mut offsets = vec![0];
        let mut draws = 0;
        for e in transversal.nontrivial() {
            let (keys, slot_of) = orbit_keys(n, e.arity, &e.group.elements, budget)?;
            offsets.push(draws);
            draws += keys.len() / e.arity;
            entries.push(EntryLayout {
                arity: e.arity,
                keys: Arc::new(keys),
            });
            slot_maps.push(slot_of);
        }
        let mut plans = Vec::with_capacity(sig.len());
        for f in 0..sig.len() {
            let arity = sig.arity(f);
            let cells = checked_cells(n, arity, budget)?;
            let patterns: HashMap<Vec<u8>, &Dispatch> = dispatch.symbols[f]
                .iter()
                .map(|(p, d)| (p.labels().to_vec(), d))
                .collect();
            let mut plan = Vec::with_capacity(cells);
            let mut args = vec![0u32; arity];
            let mut key = Vec::new();
            for cell in 0..cells {
                cell_args(n, cell, &mut args);
                let pattern = pattern_of(&args)?;
                let d = patterns[pattern.labels()];
                let pos = if d.entry == 0 {
                    args[d.sigma[0]] as usize
                } else {
                    key.clear();
                    key.extend(d.sigma.iter().map(|&p| args[p]));
                    let slot = slot_maps[d.entry][cell_index(n, &key)] as usize;
                    n + offsets[d.entry] + slot
                };
                plan.push(pos as u32);
            }
            plans.push(plan);
        }
        Ok(FamilyLayout {
            n,
            names: sig.symbols().iter().map(|s| s.name.clone()).collect(),
            arities: sig.symbols().iter().map(|s| s.arity).collect(),
            entries,
            plans,
            offsets,
            draws,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of independent values in a family, `p(n)`.
    pub fn draws(&self) -> usize {
        self.draws
    }

    /// Draw every value uniformly from `0..n`, in entry then key order.
    pub fn sample_values<R: Rng>(&self, rng: &mut R, out: &mut Vec<u32>) {
        out.clear();
        let n = self.n as u32;
        out.extend((0..self.draws).map(|_| rng.random_range(0..n)));
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> MFamily {
        let mut values = Vec::new();
        self.sample_values(rng, &mut values);
        self.family_from_values(&values)
    }

    pub fn family_from_values(&self, values: &[u32]) -> MFamily {
        assert_eq!(values.len(), self.draws, "wrong number of family values");
        let tables = self.entries[1..]
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let start = self.offsets[i + 1];
                let len = e.keys.len() / e.arity;
                FamilyTable {
                    arity: e.arity,
                    keys: Arc::clone(&e.keys),
                    values: values[start..start + len].to_vec(),
                }
            })
            .collect();
        MFamily { n: self.n, tables }
    }

    /// Where a table cell of `symbol` reads its value from.
    pub fn cell_source(&self, symbol: usize, cell: usize) -> CellSource {
        let p = self.plans[symbol][cell] as usize;
        if p < self.n {
            CellSource::Element(p as u32)
        } else {
            CellSource::Slot(p - self.n)
        }
    }

    pub fn symbol_count(&self) -> usize {
        self.plans.len()
    }

    pub fn arity(&self, symbol: usize) -> usize {
        self.arities[symbol]
    }

    /// Fill operation tables from flat family values.
    pub fn realize_values(&self, values: &[u32]) -> FiniteAlgebra {
        assert_eq!(values.len(), self.draws, "wrong number of family values");
        let mut combined: Vec<u32> = (0..self.n as u32).collect();
        combined.extend_from_slice(values);
        let operations = self
            .plans
            .iter()
            .enumerate()
            .map(|(f, plan)| Operation {
                name: self.names[f].clone(),
                arity: self.arities[f],
                table: plan.iter().map(|&p| combined[p as usize]).collect(),
            })
            .collect();
        FiniteAlgebra {
            n: self.n,
            operations,
        }
    }

    pub fn realize(&self, family: &MFamily) -> Result<FiniteAlgebra> {
        let shape_ok = family.n == self.n
            && family.tables.len() + 1 == self.entries.len()
            && family
                .tables
                .iter()
                .zip(&self.entries[1..])
                .all(|(t, e)| t.arity == e.arity && t.keys == e.keys);
        if !shape_ok {
            return Err(Error::Invalid("family does not match this layout".into()));
        }
        Ok(self.realize_values(&family.flat_values()))
    }
}

/// `h_i := t_i^A` on the orbit keys. The algebra is validated first.
pub fn extract_mfamily(analysis: &Analysis, layout: &FamilyLayout, algebra: &FiniteAlgebra) -> Result<MFamily> {
    if algebra.n != layout.n {
        return Err(Error::Invalid(format!("algebra has {} elements, layout expects {}", algebra.n, layout.n)));
    }
    let v = validate_model(analysis.spec(), algebra)?;
    if let Some(c) = v.counterexample {
        return Err(Error::Invalid(format!(
            "algebra violates identity {} at {:?}",
            c.identity + 1,
            c.assignment
        )));
    }
    let tables = analysis
        .transversal
        .nontrivial()
        .iter()
        .zip(&layout.entries[1..])
        .map(|(e, l)| {
            let values = l
                .keys
                .chunks(l.arity)
                .map(|key| algebra.eval(&e.representative, key))
                .collect();
            FamilyTable {
                arity: l.arity,
                keys: Arc::clone(&l.keys),
                values,
            }
        })
        .collect();
    Ok(MFamily { n: layout.n, tables })
}

/// Fixed public mixing function for per-sample seeds.
pub fn mix(master: u64, index: u64) -> u64 {
    let mut z = master ^ splitmix(index.wrapping_add(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator used for sample `index` under `master`.
pub fn sample_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(master, index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Every assignment of values to orbit keys.
    Family,
    /// Every table, filtered by validation.
    Brute,
}

struct Odometer {
    digits: Vec<u32>,
    base: u32,
    done: bool,
}

impl Odometer {
    fn new(len: usize, base: u32) -> Self {
        Odometer {
            digits: vec![0; len],
            base,
            done: false,
        }
    }

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let cur = self.digits.clone();
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < self.base {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(cur)
    }
}

/// All models on `n` elements, either through families or by brute force.
pub fn enumerate_models<'a>(
    analysis: &'a Analysis,
    n: usize,
    backend: Backend,
    budget: &Budget,
) -> Result<Box<dyn Iterator<Item = FiniteAlgebra> + 'a>> {
    match backend {
        Backend::Family => {
            let dispatch = build_dispatch(analysis)?;
            let layout = FamilyLayout::new(analysis, &dispatch, n, budget)?;
            budget.check_enumeration("family enumeration", checked_pow(n as u64, layout.draws))?;
            let mut odo = Odometer::new(layout.draws, n as u32);
            Ok(Box::new(std::iter::from_fn(move || {
                odo.next().map(|v| layout.realize_values(&v))
            })))
        }
        Backend::Brute => {
            let sig = analysis.spec().signature.clone();
            let mut cells = Vec::new();
            for s in sig.symbols() {
                cells.push(checked_cells(n, s.arity, budget)?);
            }
            let total: usize = cells.iter().sum();
            budget.check_enumeration("brute-force enumeration", checked_pow(n as u64, total))?;
            let mut odo = Odometer::new(total, n as u32);
            let spec = analysis.spec();
            Ok(Box::new(std::iter::from_fn(move || loop {
                let v = odo.next()?;
                let mut start = 0;
                let operations = sig
                    .symbols()
                    .iter()
                    .zip(&cells)
                    .map(|(s, &c)| {
                        let op = Operation {
                            name: s.name.clone(),
                            arity: s.arity,
                            table: v[start..start + c].to_vec(),
                        };
                        start += c;
                        op
                    })
                    .collect();
                let algebra = FiniteAlgebra { n, operations };
                if validate_model(spec, &algebra).map(|r| r.holds).unwrap_or(false) {
                    return Some(algebra);
                }
            })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::syntax::parse_system;

    const MALTSEV: &str = "signature f/3\nidentity f(x,y,y) = x\nidentity f(x,x,y) = y";
    const CMALTSEV: &str = "signature f/3\nidentity f(x,x,y) = y\nidentity f(x,y,z) = f(z,y,x)";

    fn run(text: &str) -> Analysis {
        analyze(&parse_system(text).unwrap(), &Budget::default()).unwrap()
    }

    #[test]
    fn maltsev_dispatch() {
        let a = run(MALTSEV);
        let d = build_dispatch(&a).unwrap();
        let get = |labels: &[u8]| d.lookup(0, &Pattern::from_labels(labels.to_vec()).unwrap()).unwrap().clone();
        assert_eq!(get(&[0, 0, 1]), Dispatch { entry: 0, sigma: vec![2] });
        assert_eq!(get(&[0, 1, 1]), Dispatch { entry: 0, sigma: vec![0] });
        assert_eq!(get(&[0, 1, 0]), Dispatch { entry: 1, sigma: vec![0, 1] });
        assert_eq!(get(&[0, 1, 2]), Dispatch { entry: 2, sigma: vec![0, 1, 2] });
    }

    #[test]
    fn draws_match_p() {
        let a = run(CMALTSEV);
        let d = build_dispatch(&a).unwrap();
        let b = Budget::default();
        assert_eq!(FamilyLayout::new(&a, &d, 3, &b).unwrap().draws(), 9);
        assert_eq!(FamilyLayout::new(&a, &d, 1, &b).unwrap().draws(), 0);
    }

    #[test]
    fn realize_follows_rule() {
        let a = run(CMALTSEV);
        let d = build_dispatch(&a).unwrap();
        let layout = FamilyLayout::new(&a, &d, 3, &Budget::default()).unwrap();
        let mut rng = sample_rng(1, 0);
        let mut fam = layout.sample(&mut rng);
        // h for f(x,y,x) keyed on (0,1)
        let slot = (0..fam.tables[0].values.len()).find(|&s| fam.tables[0].key(s) == [0, 1]).unwrap();
        fam.tables[0].values[slot] = 2;
        let alg = layout.realize(&fam).unwrap();
        assert_eq!(alg.apply(0, &[0, 1, 0]), 2);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(alg.apply(0, &[x, y, y]), x);
                assert_eq!(alg.apply(0, &[x, x, y]), y);
            }
        }
        assert!(alg.is_idempotent());
        assert!(validate_model(a.spec(), &alg).unwrap().holds);
        assert_eq!(extract_mfamily(&a, &layout, &alg).unwrap(), fam);
    }

    #[test]
    fn enumeration_backends_agree() {
        for text in [MALTSEV, CMALTSEV] {
            let a = run(text);
            let b = Budget::default();
            let mut fam: Vec<_> = enumerate_models(&a, 2, Backend::Family, &b).unwrap().collect();
            let mut brute: Vec<_> = enumerate_models(&a, 2, Backend::Brute, &b).unwrap().collect();
            assert_eq!(fam.len(), 4);
            fam.sort_by(|x, y| x.operations[0].table.cmp(&y.operations[0].table));
            brute.sort_by(|x, y| x.operations[0].table.cmp(&y.operations[0].table));
            assert_eq!(fam, brute);
            assert_eq!(enumerate_models(&a, 1, Backend::Family, &b).unwrap().count(), 1);
        }
    }

    #[test]
    fn mixing_is_fixed() {
        assert_ne!(mix(7, 0), mix(7, 1));
        assert_ne!(mix(7, 0), mix(8, 0));
        assert_eq!(mix(7, 3), mix(7, 3));
    }
}
