//! Seeded, parallel Monte Carlo estimates of property probabilities over
//! random models, compared with exact and limiting values.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::algebra::FiniteAlgebra;
use crate::analysis::Analysis;
use crate::asymptotics::{parameters, to_f64, LimitValue, Parameters};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::factory::{build_dispatch, mix, sample_rng, CellSource, FamilyLayout};
use crate::kelly::{assumptions, default_closure};
use crate::props;
use crate::syntax::{render_system, SystemSpec};

/// Wilson interval at 95%.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Property {
    /// Some `k`-element subuniverse exists.
    Subalg(usize),
    /// No 2-element subuniverse exists.
    NoSubalg2,
    /// Some proper subuniverse of size > 1 exists.
    SubalgGT1,
    Automorphism,
    Cross,
    Idemprimal,
    /// Some 2-element subuniverse on which the first ternary symbol is the minority operation.
    Minority2,
    /// The given subset is a subuniverse.
    FixedB(Vec<u32>),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Subalg(k) => write!(f, "subalg{k}"),
            Property::NoSubalg2 => write!(f, "nosubalg2"),
            Property::SubalgGT1 => write!(f, "subalgGT1"),
            Property::Automorphism => write!(f, "automorphism"),
            Property::Cross => write!(f, "cross"),
            Property::Idemprimal => write!(f, "idemprimal"),
            Property::Minority2 => write!(f, "minority2"),
            Property::FixedB(b) => {
                let parts: Vec<String> = b.iter().map(u32::to_string).collect();
                write!(f, "fixedB={}", parts.join(","))
            }
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unknown property {s:?}"));
        Ok(match s {
            "nosubalg2" => Property::NoSubalg2,
            "subalgGT1" => Property::SubalgGT1,
            "automorphism" => Property::Automorphism,
            "cross" => Property::Cross,
            "idemprimal" => Property::Idemprimal,
            "minority2" => Property::Minority2,
            _ => {
                if let Some(k) = s.strip_prefix("subalg") {
                    let k: usize = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(bad());
                    }
                    Property::Subalg(k)
                } else if let Some(list) = s.strip_prefix("fixedB=") {
                    let mut b = list
                        .split(',')
                        .map(|x| x.trim().parse::<u32>())
                        .collect::<std::result::Result<Vec<u32>, _>>()
                        .map_err(|_| bad())?;
                    b.sort_unstable();
                    b.dedup();
                    if b.is_empty() {
                        return Err(bad());
                    }
                    Property::FixedB(b)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

/// Parse a comma-separated property list; bare numbers continue a preceding `fixedB=`.
pub fn parse_property_list(s: &str) -> Result<Vec<Property>> {
    let mut tokens: Vec<String> = Vec::new();
    for tok in s.split(',').map(str::trim) {
        let continues = tokens.last().is_some_and(|t| t.starts_with("fixedB="));
        if continues && !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_digit()) {
            let last = tokens.last_mut().expect("checked above");
            last.push(',');
            last.push_str(tok);
        } else {
            tokens.push(tok.to_string());
        }
    }
    tokens.iter().map(|t| t.parse()).collect()
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: SystemSpec,
    pub n: usize,
    pub samples: u64,
    pub master_seed: u64,
    pub properties: Vec<Property>,
    pub threads: usize,
    pub budget: Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryKind {
    ExactFiniteN,
    Asymptotic,
    Open,
    None,
}

impl TheoryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoryKind::ExactFiniteN => "exact_finite_n",
            TheoryKind::Asymptotic => "asymptotic",
            TheoryKind::Open => "open",
            TheoryKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    pub kind: TheoryKind,
    pub value: Option<f64>,
    /// Limit as n grows, when known; may accompany an exact finite-n value.
    pub limit: Option<LimitValue>,
}

impl Theory {
    fn exact(value: f64, limit: Option<LimitValue>) -> Self {
        Theory {
            kind: TheoryKind::ExactFiniteN,
            value: Some(value),
            limit,
        }
    }

    fn limit(limit: LimitValue) -> Self {
        match limit.value() {
            Some(v) => Theory {
                kind: TheoryKind::Asymptotic,
                value: Some(v),
                limit: Some(limit),
            },
            None => Theory {
                kind: TheoryKind::Open,
                value: None,
                limit: Some(limit),
            },
        }
    }

    fn none() -> Self {
        Theory {
            kind: TheoryKind::None,
            value: None,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub property: Property,
    pub successes: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub theory: Theory,
    /// `(frequency - theory) / sqrt(theory (1 - theory) / samples)`.
    pub sigma_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusReport {
    pub system: String,
    pub system_hash: String,
    pub n: usize,
    pub samples: u64,
    pub master_seed: u64,
    pub rows: Vec<PropertyRow>,
}

/// Hex SHA-256 of the rendered system.
pub fn system_hash(spec: &SystemSpec) -> String {
    let digest = Sha256::digest(render_system(spec).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn wilson_interval(successes: u64, samples: u64) -> (f64, f64) {
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = (center - half).clamp(0.0, 1.0).min(p);
    let hi = (center + half).clamp(0.0, 1.0).max(p);
    (lo, hi)
}

fn sigma_deviation(frequency: f64, theory: Option<f64>, samples: u64) -> Option<f64> {
    let t = theory?;
    let var = t * (1.0 - t) / samples as f64;
    (var > 0.0).then(|| (frequency - t) / var.sqrt())
}

fn first_ternary(spec: &SystemSpec) -> Result<usize> {
    (0..spec.signature.len())
        .find(|&s| spec.signature.arity(s) == 3)
        .ok_or_else(|| Error::Invalid("minority2 needs a ternary operation symbol".into()))
}

/// Probability that a fixed pair is a subuniverse on which `symbol` is the minority operation.
pub fn minority_pair_probability(layout: &FamilyLayout, symbol: usize) -> f64 {
    let n = layout.n();
    if n < 2 {
        return 0.0;
    }
    // allowed values per family slot; by symmetry the pair {0, 1} stands for all pairs
    let mut allowed: std::collections::HashMap<usize, [bool; 2]> = std::collections::HashMap::new();
    for s in 0..layout.symbol_count() {
        let d = layout.arity(s);
        let mut args = vec![0u32; d];
        for bits in 0..1usize << d {
            for (j, a) in args.iter_mut().enumerate() {
                *a = (bits >> (d - 1 - j) & 1) as u32;
            }
            let cell = args.iter().fold(0, |acc, &a| acc * n + a as usize);
            let want = (s == symbol).then(|| {
                let ones = args.iter().filter(|&&a| a == 1).count();
                (ones % 2) as u32
            });
            match layout.cell_source(s, cell) {
                CellSource::Element(e) => {
                    if want.is_some_and(|w| w != e) {
                        return 0.0;
                    }
                }
                CellSource::Slot(k) => {
                    let entry = allowed.entry(k).or_insert([true, true]);
                    if let Some(w) = want {
                        entry[1 - w as usize] = false;
                    }
                }
            }
        }
    }
    let mut p = 1.0;
    for ok in allowed.values() {
        let c = ok.iter().filter(|&&b| b).count();
        p *= c as f64 / n as f64;
    }
    p
}

fn binom_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Theory value for one property at carrier size `n`.
pub fn theory_for(property: &Property, params: &Parameters, layout: &FamilyLayout, spec: &SystemSpec) -> Result<Theory> {
    let n = layout.n();
    let d = params.d_min;
    let table = params.asymptotic_table()?;
    Ok(match property {
        Property::FixedB(b) => {
            if b.iter().any(|&x| x as usize >= n) {
                return Err(Error::Invalid(format!("{property} is not a subset of 0..{n}")));
            }
            let k = b.len();
            if k < d {
                Theory::exact(1.0, None)
            } else {
                let p = to_f64(&params.fixed_subalgebra_probability(k as u64, n as u64)?);
                Theory::exact(p, None)
            }
        }
        Property::Subalg(k) => {
            let k = *k;
            if k > n {
                Theory::exact(0.0, None)
            } else if k == n || k < d {
                Theory::exact(1.0, None)
            } else if k == d {
                let none = params.no_size_d_subalgebra_probability(n as u64)?;
                let value = none.exact.as_ref().map(to_f64).unwrap_or(none.value);
                Theory::exact(1.0 - value, Some(table.limit_for_size(k)))
            } else {
                Theory::limit(table.limit_for_size(k))
            }
        }
        Property::NoSubalg2 => {
            if n < 2 {
                Theory::exact(1.0, None)
            } else if d > 2 || n == 2 {
                Theory::exact(0.0, None)
            } else {
                let none = params.no_size_d_subalgebra_probability(n as u64)?;
                let value = none.exact.as_ref().map(to_f64).unwrap_or(none.value);
                let limit = match table.limit_for_size(2) {
                    LimitValue::One => LimitValue::Zero,
                    LimitValue::Zero => LimitValue::One,
                    LimitValue::OneMinusExpNeg { num, den } => LimitValue::exp_neg(num, den),
                    other => other,
                };
                Theory::exact(value, Some(limit))
            }
        }
        Property::SubalgGT1 => {
            if n <= 2 {
                Theory::exact(0.0, None)
            } else if d > 2 {
                Theory::exact(1.0, None)
            } else {
                let at2 = table.limit_for_size(2);
                let at3 = table.limit_for_size(3);
                if at2 == LimitValue::One {
                    Theory::limit(LimitValue::One)
                } else if at3 == LimitValue::Open {
                    Theory::limit(LimitValue::Open)
                } else {
                    Theory::limit(at2)
                }
            }
        }
        Property::Automorphism => Theory::limit(LimitValue::Zero),
        Property::Cross => {
            if d == 2 {
                Theory::limit(LimitValue::Zero)
            } else {
                Theory::none()
            }
        }
        Property::Idemprimal => {
            if d > 2 {
                Theory::exact(0.0, Some(LimitValue::Zero))
            } else {
                Theory::limit(params.idemprimality_verdict()?.limit)
            }
        }
        Property::Minority2 => {
            let pi = minority_pair_probability(layout, first_ternary(spec)?);
            let pairs = binom_f64(n, 2);
            Theory::exact(-(pairs * (-pi).ln_1p()).exp_m1(), None)
        }
    })
}

/// Lazily evaluated properties of one sampled algebra.
struct Evaluator<'a> {
    algebra: &'a FiniteAlgebra,
    budget: &'a Budget,
    minority_symbol: Option<usize>,
    subalg_gt1: Option<bool>,
    automorphism: Option<bool>,
    cross: Option<bool>,
}

impl Evaluator<'_> {
    fn subalg_gt1(&mut self) -> Result<bool> {
        if self.subalg_gt1.is_none() {
            let v = self.algebra.n > 2 && props::has_proper_subalgebra_size_gt1(self.algebra)?.holds;
            self.subalg_gt1 = Some(v);
        }
        Ok(self.subalg_gt1.unwrap_or_default())
    }

    fn automorphism(&mut self) -> Result<bool> {
        if self.automorphism.is_none() {
            self.automorphism = Some(props::has_nontrivial_automorphism(self.algebra, self.budget)?.holds);
        }
        Ok(self.automorphism.unwrap_or_default())
    }

    fn cross(&mut self) -> Result<bool> {
        if self.cross.is_none() {
            self.cross = Some(props::has_compatible_cross(self.algebra)?.holds);
        }
        Ok(self.cross.unwrap_or_default())
    }

    fn eval(&mut self, p: &Property) -> Result<bool> {
        let a = self.algebra;
        Ok(match p {
            Property::Subalg(k) => props::has_subalgebra_of_size(a, *k, self.budget)?.holds,
            Property::NoSubalg2 => !props::has_subalgebra_of_size(a, 2, self.budget)?.holds,
            Property::SubalgGT1 => self.subalg_gt1()?,
            Property::Automorphism => self.automorphism()?,
            Property::Cross => self.cross()?,
            Property::Idemprimal => !self.subalg_gt1()? && !self.automorphism()? && !self.cross()?,
            Property::Minority2 => {
                let s = self.minority_symbol.expect("checked when the experiment starts");
                props::has_minority_two_subalgebra(a, s)?.holds
            }
            Property::FixedB(b) => props::is_subuniverse(a, b)?.holds,
        })
    }
}

fn check_experiment(exp: &Experiment) -> Result<()> {
    if exp.samples == 0 {
        return Err(Error::Invalid("a census needs at least one sample".into()));
    }
    if exp.samples > exp.budget.max_samples {
        return Err(Error::Budget(format!(
            "{} samples exceed the limit of {}",
            exp.samples, exp.budget.max_samples
        )));
    }
    if exp.n == 0 {
        return Err(Error::Invalid("carrier size must be at least 1".into()));
    }
    exp.budget.check_carrier(exp.n)?;
    if exp.threads == 0 {
        return Err(Error::Invalid("thread count must be at least 1".into()));
    }
    if exp.properties.is_empty() {
        return Err(Error::Invalid("no properties requested".into()));
    }
    if exp.n <= 2 && exp.properties.contains(&Property::Idemprimal) {
        return Err(Error::Unsupported("idemprimality needs a carrier of more than 2 elements".into()));
    }
    Ok(())
}

/// Count successes for sample indices `j ≡ worker (mod stride)`.
fn run_worker(exp: &Experiment, layout: &FamilyLayout, minority_symbol: Option<usize>, worker: u64, stride: u64) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; exp.properties.len()];
    let mut values = Vec::with_capacity(layout.draws());
    let mut j = worker;
    while j < exp.samples {
        let mut rng = sample_rng(exp.master_seed, j);
        layout.sample_values(&mut rng, &mut values);
        let algebra = layout.realize_values(&values);
        let mut ev = Evaluator {
            algebra: &algebra,
            budget: &exp.budget,
            minority_symbol,
            subalg_gt1: None,
            automorphism: None,
            cross: None,
        };
        for (c, p) in counts.iter_mut().zip(&exp.properties) {
            if ev.eval(p)? {
                *c += 1;
            }
        }
        j += stride;
    }
    Ok(counts)
}

pub fn run_census(exp: &Experiment) -> Result<CensusReport> {
    check_experiment(exp)?;
    let closure = default_closure(&exp.spec, &exp.budget)?;
    assumptions(&closure).require()?;
    let analysis = Analysis::new(closure)?;
    let params = parameters(&analysis.transversal)?;
    let dispatch = build_dispatch(&analysis)?;
    let layout = FamilyLayout::new(&analysis, &dispatch, exp.n, &exp.budget)?;
    let minority_symbol = if exp.properties.contains(&Property::Minority2) {
        Some(first_ternary(&exp.spec)?)
    } else {
        None
    };
    let theories = exp
        .properties
        .iter()
        .map(|p| theory_for(p, &params, &layout, &exp.spec))
        .collect::<Result<Vec<_>>>()?;
    // fixed subsets outside the carrier were rejected above; subset sizes are budgeted here
    for p in &exp.properties {
        if let Property::Subalg(k) = p {
            if *k <= exp.n {
                let count = crate::asymptotics::binomial(exp.n as u64, *k as u64);
                exp.budget
                    .check_enumeration(&format!("{k}-subsets"), u64::try_from(count).ok())?;
            }
        }
    }

    let threads = exp.threads.min(exp.samples as usize).max(1);
    let counts = if threads == 1 {
        run_worker(exp, &layout, minority_symbol, 0, 1)?
    } else {
        let results: Vec<Result<Vec<u64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|w| {
                    let layout = &layout;
                    scope.spawn(move || run_worker(exp, layout, minority_symbol, w, threads as u64))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("census worker panicked"))
                .collect()
        });
        let mut total = vec![0u64; exp.properties.len()];
        for r in results {
            for (t, c) in total.iter_mut().zip(r?) {
                *t += c;
            }
        }
        total
    };

    let rows = exp
        .properties
        .iter()
        .zip(counts)
        .zip(theories)
        .map(|((p, successes), theory)| {
            let frequency = successes as f64 / exp.samples as f64;
            let (ci_low, ci_high) = wilson_interval(successes, exp.samples);
            PropertyRow {
                property: p.clone(),
                successes,
                frequency,
                ci_low,
                ci_high,
                sigma_deviation: sigma_deviation(frequency, theory.value, exp.samples),
                theory,
            }
        })
        .collect();
    Ok(CensusReport {
        system: exp.spec.name.clone(),
        system_hash: system_hash(&exp.spec),
        n: exp.n,
        samples: exp.samples,
        master_seed: exp.master_seed,
        rows,
    })
}

/// One report per carrier size; the reports use seeds `mix(master, n)`.
pub fn sweep_census(exp: &Experiment, sizes: &[usize]) -> Result<Vec<CensusReport>> {
    sizes
        .iter()
        .map(|&n| {
            let e = Experiment {
                n,
                master_seed: mix(exp.master_seed, n as u64),
                ..exp.clone()
            };
            run_census(&e)
        })
        .collect()
}

/// `x` with 10 significant digits, ties to even, trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.9e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let mut out = String::from(sign);
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        out = trimmed.to_string();
    }
    out
}

pub const CSV_HEADER: [&str; 12] = [
    "system",
    "n",
    "samples",
    "master_seed",
    "property",
    "successes",
    "frequency",
    "ci_low",
    "ci_high",
    "theory_kind",
    "theory_value",
    "sigma_deviation",
];

/// Reports as CSV with a single header line.
pub fn to_csv(reports: &[CensusReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        for row in &r.rows {
            let theory_value = row.theory.value.map(format_float).unwrap_or_default();
            let sigma = row.sigma_deviation.map(format_float).unwrap_or_default();
            w.write_record([
                r.system.clone(),
                r.n.to_string(),
                r.samples.to_string(),
                r.master_seed.to_string(),
                row.property.to_string(),
                row.successes.to_string(),
                format_float(row.frequency),
                format_float(row.ci_low),
                format_float(row.ci_high),
                row.theory.kind.as_str().to_string(),
                theory_value,
                sigma,
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

/// Sample index `j` of an experiment as a concrete algebra.
pub fn sample_algebra(layout: &FamilyLayout, master_seed: u64, j: u64) -> FiniteAlgebra {
    let mut rng = sample_rng(master_seed, j);
    let mut values = Vec::new();
    layout.sample_values(&mut rng, &mut values);
    layout.realize_values(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_system;

    const MALTSEV: &str = "# system: maltsev\nsignature f/3\nidentity x = f(x,y,y)\nidentity f(x,x,y) = y";

    fn exp(text: &str, n: usize, samples: u64, props: &str, threads: usize) -> Experiment {
        Experiment {
            spec: parse_system(text).unwrap(),
            n,
            samples,
            master_seed: 7,
            properties: parse_property_list(props).unwrap(),
            threads,
            budget: Budget::default(),
        }
    }

    #[test]
    fn floats() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.0625), "0.0625");
        assert_eq!(format_float(0.1353352832366127), "0.1353352832");
        assert_eq!(format_float(-2.5e-7), "-0.00000025");
        assert_eq!(format_float(12345678901.0), "12345678900");
        assert_eq!(format_float(1.00000000005), "1");
    }

    #[test]
    fn property_names() {
        let ps = parse_property_list("subalg2,fixedB=0,1,cross,subalg5").unwrap();
        assert_eq!(
            ps,
            vec![Property::Subalg(2), Property::FixedB(vec![0, 1]), Property::Cross, Property::Subalg(5)]
        );
        let names: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["subalg2", "fixedB=0,1", "cross", "subalg5"]);
        assert!(parse_property_list("bogus").is_err());
        assert!(parse_property_list("subalg0").is_err());
    }

    #[test]
    fn wilson_covers() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo + hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theory_values() {
        let e = exp(MALTSEV, 16, 10, "subalg2,minority2,fixedB=0,1,nosubalg2", 1);
        let r = run_census(&e).unwrap();
        let v: Vec<f64> = r.rows.iter().map(|row| row.theory.value.unwrap()).collect();
        assert!((v[0] - (1.0 - (63.0f64 / 64.0).powi(120))).abs() < 1e-12);
        assert!((v[1] - (1.0 - (255.0f64 / 256.0).powi(120))).abs() < 1e-12);
        assert!((v[2] - 1.0 / 64.0).abs() < 1e-15);
        assert!((v[0] + v[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let csv: Vec<String> = [1, 3, 8]
            .iter()
            .map(|&t| to_csv(&[run_census(&exp(MALTSEV, 5, 200, "subalg2,automorphism,cross,idemprimal", t)).unwrap()]).unwrap())
            .collect();
        assert_eq!(csv[0], csv[1]);
        assert_eq!(csv[0], csv[2]);
        assert!(csv[0].starts_with("system,n,samples,master_seed,property,"));
    }

    #[test]
    fn degenerate_sizes() {
        let r = run_census(&exp(MALTSEV, 1, 5, "subalg2,nosubalg2,subalgGT1,automorphism,cross", 2)).unwrap();
        let counts: Vec<u64> = r.rows.iter().map(|row| row.successes).collect();
        assert_eq!(counts, [0, 5, 0, 0, 5]);
        assert!(run_census(&exp(MALTSEV, 2, 5, "idemprimal", 1)).is_err());
    }
}
