//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use maltsev_models::algebra::FiniteAlgebra;
use maltsev_models::analysis::{analyze, essential_variables, orbit_partition, symmetry_group, Analysis};
use maltsev_models::asymptotics::{murskii_tail, parameters, zeta};
use maltsev_models::builtins::{builtin_system, expected_verdict, BuiltinId};
use maltsev_models::census::{run_census, sample_algebra, sweep_census, to_csv, CensusReport, Experiment, Property};
use maltsev_models::factory::{
    build_dispatch, build_dispatch_shuffled, enumerate_models, extract_mfamily, sample_rng, Backend, FamilyLayout,
};
use maltsev_models::kelly::compute_closure;
use maltsev_models::props::{
    cross_compatible, cross_relation, is_compatible_relation, is_idemprimal, is_subuniverse,
};
use maltsev_models::syntax::{substitute, LinearTerm, SystemSpec};
use maltsev_models::Budget;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{brute_models, spec, term, CMALTSEV, MALTSEV};

type Outcome = Result<String, String>;

/// Members, essential variables, and the group generator besides the identity.
type TableRow = (&'static [&'static str], &'static [usize], Option<[usize; 3]>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn builtin(id: &str) -> SystemSpec {
    builtin_system(&BuiltinId::from_str(id).unwrap()).unwrap()
}

fn analysis_of(s: &SystemSpec) -> Analysis {
    analyze(s, &Budget::default()).unwrap()
}

fn experiment(s: SystemSpec, n: usize, samples: u64, seed: u64, properties: Vec<Property>) -> Experiment {
    Experiment {
        spec: s,
        n,
        samples,
        master_seed: seed,
        properties,
        threads: std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1),
        budget: Budget::default(),
    }
}

fn row<'a>(r: &'a CensusReport, p: &Property) -> &'a maltsev_models::census::PropertyRow {
    r.rows.iter().find(|row| &row.property == p).unwrap()
}

/// `(frequency - value) / σ` with σ from the exact value.
fn deviation(freq: f64, value: f64, samples: u64) -> f64 {
    let sigma = (value * (1.0 - value) / samples as f64).sqrt();
    (freq - value) / sigma
}

fn c1_table_one() -> Outcome {
    let s = spec(CMALTSEV);
    let sig = s.signature.clone();
    let closure = compute_closure(&s, 3, &Budget::default()).map_err(|e| e.to_string())?;
    ensure(closure.class_count() == 12, format!("{} classes", closure.class_count()))?;

    let table: [TableRow; 12] = [
        (&["x", "f(x,x,x)", "f(y,y,x)", "f(x,y,y)", "f(z,z,x)", "f(x,z,z)"], &[0], None),
        (&["y", "f(y,y,y)", "f(x,x,y)", "f(y,x,x)", "f(z,z,y)", "f(y,z,z)"], &[1], None),
        (&["z", "f(z,z,z)", "f(x,x,z)", "f(z,x,x)", "f(y,y,z)", "f(z,y,y)"], &[2], None),
        (&["f(x,y,x)"], &[0, 1], None),
        (&["f(y,x,y)"], &[0, 1], None),
        (&["f(x,z,x)"], &[0, 2], None),
        (&["f(z,x,z)"], &[0, 2], None),
        (&["f(y,z,y)"], &[1, 2], None),
        (&["f(z,y,z)"], &[1, 2], None),
        (&["f(x,y,z)", "f(z,y,x)"], &[0, 1, 2], Some([2, 1, 0])),
        (&["f(y,x,z)", "f(z,x,y)"], &[0, 1, 2], Some([0, 2, 1])),
        (&["f(x,z,y)", "f(y,z,x)"], &[0, 1, 2], Some([1, 0, 2])),
    ];
    let universe = closure.universe();
    let mut seen = BTreeSet::new();
    for (members, ess, generator) in table {
        let terms: Vec<LinearTerm> = members.iter().map(|m| term(&sig, m)).collect();
        let class = closure.class_of_term(&terms[0]).map_err(|e| e.to_string())?;
        let expected: BTreeSet<usize> = terms.iter().map(|t| universe.index_of(t).unwrap()).collect();
        let actual: BTreeSet<usize> = closure.members(class).iter().map(|&i| i as usize).collect();
        ensure(actual == expected, format!("class of {} differs", members[0]))?;
        seen.insert(class);

        let got = essential_variables(&closure, class).map_err(|e| e.to_string())?;
        ensure(got == ess, format!("essential variables of {}: {got:?}", members[0]))?;

        // rename the essential variables onto x, y, z in order
        let mut gamma = vec![0usize; 3];
        for (j, &v) in ess.iter().enumerate() {
            gamma[v] = j;
        }
        let rep = substitute(&terms[0], &gamma).map_err(|e| e.to_string())?;
        let group = symmetry_group(&closure, &rep).map_err(|e| e.to_string())?;
        let mut expected_group: BTreeSet<Vec<usize>> = BTreeSet::from([(0..ess.len()).collect()]);
        if let Some(g) = generator {
            expected_group.insert(g.to_vec());
        }
        let actual_group: BTreeSet<Vec<usize>> = group.elements.into_iter().collect();
        ensure(actual_group == expected_group, format!("group of {}: {actual_group:?}", members[0]))?;
    }
    ensure(seen.len() == 12, "table rows do not hit 12 distinct classes")?;

    let classes = orbit_partition(&closure).map_err(|e| e.to_string())?;
    let mut orbits: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for c in &classes {
        orbits.entry(c.orbit).or_default().insert(c.id);
    }
    let sizes: BTreeSet<usize> = orbits.values().map(|o| o.len()).collect();
    ensure(orbits.len() == 3 && sizes == BTreeSet::from([3, 6]), format!("orbits {orbits:?}"))?;
    Ok("12 classes, 3 orbits".into())
}

fn c2_parameters() -> Outcome {
    let mut notes = Vec::new();
    let p = parameters(&analysis_of(&spec(MALTSEV)).transversal).unwrap();
    ensure(p.d_min == 2 && p.p(2).unwrap() == 2, format!("maltsev d={} p(2)={}", p.d_min, p.p(2).unwrap()))?;

    for (name, want) in [("minority1", 6), ("minority2", 2), ("minority3", 1)] {
        let p = parameters(&analysis_of(&builtin(name)).transversal).unwrap();
        let got = p.p(3).unwrap();
        ensure(got == want, format!("{name} p(3)={got}, want {want}"))?;
    }

    for k in 2..=5usize {
        let a = analysis_of(&builtin(&format!("hagemann-mitschke:{k}")));
        let got = a.minimal_terms().unwrap().len();
        ensure(got == 2 * k - 3, format!("hagemann-mitschke:{k} has {got} minimal terms"))?;
    }

    for k in [4u32, 5] {
        let a = analysis_of(&builtin(&format!("near-unanimity:{k}")));
        let p = parameters(&a.transversal).unwrap();
        let want = 2u64.pow(k) - 2 * k as u64 - 2;
        let binary_orbits = a.transversal.nontrivial().iter().filter(|e| e.arity == 2).count();
        ensure(p.d_min == 2 && p.p(2).unwrap() == want, format!("near-unanimity:{k} p(2)={}", p.p(2).unwrap()))?;
        notes.push(format!("nu{k}: p(2)={want}, {binary_orbits} binary orbits"));
    }
    Ok(notes.join("; "))
}

fn c3_verdicts() -> Outcome {
    let mut ids: Vec<String> = Vec::new();
    for k in 2..=5 {
        ids.push(format!("hagemann-mitschke:{k}"));
        ids.push(format!("jonsson:{k}"));
    }
    for k in 3..=5 {
        ids.push(format!("near-unanimity:{k}"));
    }
    for name in [
        "minority1",
        "minority2",
        "minority3",
        "majority",
        "two-thirds-minority",
        "pixley-pair",
        "siggers4",
        "siggers6",
        "olsak",
        "edge:3",
        "cube:3",
        "day:2",
        "day:3",
        "gumm:1",
        "gumm:2",
        "sd-join:3",
        "sd-join:4",
    ] {
        ids.push(name.into());
    }
    let mut checked = 0;
    let mut advisory = Vec::new();
    for id in &ids {
        let bid = BuiltinId::from_str(id).unwrap();
        let expected = expected_verdict(&bid).ok_or(format!("no table entry for {id}"))?;
        let a = analysis_of(&builtin_system(&bid).unwrap());
        let got = parameters(&a.transversal).unwrap().idemprimality_verdict().unwrap().almost_surely;
        if expected.source_encoded {
            if got != expected.almost_surely_idemprimal {
                advisory.push(format!("{id} differs"));
            }
        } else {
            ensure(
                got == expected.almost_surely_idemprimal,
                format!("{id}: got {got}, table says {}", expected.almost_surely_idemprimal),
            )?;
            checked += 1;
        }
    }
    let adv = if advisory.is_empty() { "advisory all agree".to_string() } else { advisory.join(", ") };
    Ok(format!("{checked} exact, {adv}"))
}

fn c4_bijection() -> Outcome {
    let budget = Budget::default();
    for text in [MALTSEV, CMALTSEV] {
        let s = spec(text);
        let a = analysis_of(&s);
        let p = parameters(&a.transversal).unwrap();
        let brute: BTreeSet<Vec<Vec<u32>>> = brute_models(&s, 2).iter().map(tables).collect();
        let family: Vec<FiniteAlgebra> = enumerate_models(&a, 2, Backend::Family, &budget).unwrap().collect();
        let family_set: BTreeSet<Vec<Vec<u32>>> = family.iter().map(tables).collect();
        let count = p.model_count(2).unwrap();
        ensure(brute.len() == 4, format!("{}: {} brute models", s.name, brute.len()))?;
        ensure(count == 4u32.into(), format!("n^p(n) = {count}"))?;
        ensure(brute == family_set && family.len() == 4, "backends disagree")?;

        let layout = FamilyLayout::new(&a, &build_dispatch(&a).unwrap(), 2, &budget).unwrap();
        for alg in brute_models(&s, 2) {
            let fam = extract_mfamily(&a, &layout, &alg).unwrap();
            ensure(layout.realize(&fam).unwrap() == alg, "realize after extract changed a model")?;
        }
        for code in 0..1u32 << layout.draws() {
            let values: Vec<u32> = (0..layout.draws()).map(|i| (code >> i) & 1).collect();
            let fam = layout.family_from_values(&values);
            let back = extract_mfamily(&a, &layout, &layout.realize(&fam).unwrap()).unwrap();
            ensure(back == fam, "extract after realize changed a family")?;
        }
    }
    Ok("4 models each".into())
}

fn tables(a: &FiniteAlgebra) -> Vec<Vec<u32>> {
    a.operations.iter().map(|o| o.table.clone()).collect()
}

fn c5_fixed_b() -> Outcome {
    let b = Property::FixedB(vec![0, 1]);
    let r = run_census(&experiment(spec(MALTSEV), 8, 50_000, 20240501, vec![b.clone()])).map_err(|e| e.to_string())?;
    let row = row(&r, &b);
    let z = deviation(row.frequency, 1.0 / 16.0, r.samples);
    ensure(row.theory.value == Some(1.0 / 16.0), format!("theory {:?}", row.theory.value))?;
    ensure(z.abs() <= 3.0, format!("freq {} is {z:.2} sigma from 1/16", row.frequency))?;
    Ok(format!("freq {:.5}, {z:+.2} sigma", row.frequency))
}

fn c6_reports() -> Vec<CensusReport> {
    let props = vec![Property::Subalg(2), Property::Minority2];
    sweep_census(&experiment(spec(MALTSEV), 16, 20_000, 6, props), &[16]).unwrap()
}

fn c6_finite_n(reports: &[CensusReport]) -> Outcome {
    let r = &reports[0];
    let mut notes = Vec::new();
    for (p, value) in [
        (Property::Subalg(2), 1.0 - (1.0 - 1.0 / 64.0f64).powi(120)),
        (Property::Minority2, 1.0 - (1.0 - 1.0 / 256.0f64).powi(120)),
    ] {
        let row = row(r, &p);
        let theory = row.theory.value.unwrap();
        ensure((theory - value).abs() < 1e-12, format!("{p}: theory {theory} vs {value}"))?;
        let z = deviation(row.frequency, value, r.samples);
        ensure(z.abs() <= 3.0, format!("{p}: freq {} is {z:.2} sigma from {value:.4}", row.frequency))?;
        notes.push(format!("{p} {:.4} vs {value:.4} ({z:+.2} sigma)", row.frequency));
    }
    Ok(notes.join("; "))
}

fn c7_trend() -> Outcome {
    let sizes = [8usize, 16, 32];
    let reports = sweep_census(&experiment(spec(MALTSEV), 8, 10_000, 7, vec![Property::NoSubalg2]), &sizes)
        .map_err(|e| e.to_string())?;
    let limit = (-2.0f64).exp();
    let mut gaps = Vec::new();
    let mut notes = Vec::new();
    for (r, &n) in reports.iter().zip(&sizes) {
        let row = row(r, &Property::NoSubalg2);
        let nf = n as f64;
        let value = (1.0 - 4.0 / (nf * nf)).powf(nf * (nf - 1.0) / 2.0);
        let theory = row.theory.value.unwrap();
        ensure((theory - value).abs() < 1e-12, format!("n={n}: theory {theory} vs {value}"))?;
        let z = deviation(row.frequency, value, r.samples);
        ensure(z.abs() <= 3.0, format!("n={n}: freq {} is {z:.2} sigma from {value:.4}", row.frequency))?;
        gaps.push(value - limit);
        notes.push(format!("n={n} {:.4}/{value:.4}", row.frequency));
    }
    ensure(gaps.iter().all(|&g| g > 0.0) && gaps.windows(2).all(|w| w[1] < w[0]), format!("gaps {gaps:?}"))?;
    Ok(notes.join(", "))
}

fn c8_rarity() -> Outcome {
    let props = vec![Property::Automorphism, Property::Cross, Property::Idemprimal];
    let r = run_census(&experiment(builtin("hagemann-mitschke:3"), 16, 2_000, 8, props.clone()))
        .map_err(|e| e.to_string())?;
    let f: Vec<f64> = props.iter().map(|p| row(&r, p).frequency).collect();
    ensure(f[0] <= 0.01, format!("automorphism {}", f[0]))?;
    ensure(f[1] <= 0.01, format!("cross {}", f[1]))?;
    ensure(f[2] >= 0.9, format!("idemprimal {}", f[2]))?;
    Ok(format!("aut {}, cross {}, idemprimal {}", f[0], f[1], f[2]))
}

fn c9_majority() -> Outcome {
    let budget = Budget::default();
    let s = builtin("majority");
    let a = analysis_of(&s);
    let layout = FamilyLayout::new(&a, &build_dispatch(&a).unwrap(), 7, &budget).unwrap();
    for j in 0..100 {
        let alg = sample_algebra(&layout, 9, j);
        for x in 0..7u32 {
            ensure(cross_compatible(&alg, x).unwrap().holds, format!("sample {j}: cross at {x}"))?;
            let rel = cross_relation(7, x);
            ensure(is_compatible_relation(&alg, &rel, &budget).unwrap().holds, "relation check disagrees")?;
            for y in x + 1..7 {
                ensure(is_subuniverse(&alg, &[x, y]).unwrap().holds, format!("sample {j}: {{{x},{y}}}"))?;
            }
        }
        ensure(!is_idemprimal(&alg, &budget).unwrap().holds, format!("sample {j} idemprimal"))?;
    }
    Ok("100 samples".into())
}

fn c10_uniformity() -> Outcome {
    let s = spec(MALTSEV);
    let a = analysis_of(&s);
    let layout = FamilyLayout::new(&a, &build_dispatch(&a).unwrap(), 2, &Budget::default()).unwrap();
    let models: Vec<Vec<Vec<u32>>> = brute_models(&s, 2).iter().map(tables).collect();
    let samples = 40_000u64;
    let mut counts = vec![0u64; models.len()];
    for j in 0..samples {
        let t = tables(&sample_algebra(&layout, 10, j));
        let i = models.iter().position(|m| *m == t).ok_or("sample is not a model")?;
        counts[i] += 1;
    }
    let expected = samples as f64 / models.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((models.len() - 1) as f64).unwrap();
    let p = 1.0 - dist.cdf(stat);
    ensure(p > 0.001, format!("chi2 {stat:.3}, p {p:.5}, counts {counts:?}"))?;
    Ok(format!("chi2 {stat:.3}, p {p:.3}"))
}

fn c11_invariance() -> Outcome {
    let budget = Budget::default();
    for text in [CMALTSEV, MALTSEV] {
        let a = analysis_of(&spec(text));
        for n in [2usize, 3] {
            let base = FamilyLayout::new(&a, &build_dispatch(&a).unwrap(), n, &budget).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let families: Vec<Vec<u32>> = (0..20)
                .map(|_| (0..base.draws()).map(|_| rng.random_range(0..n as u32)).collect())
                .collect();
            let expected: Vec<FiniteAlgebra> = families.iter().map(|v| base.realize_values(v)).collect();
            for round in 0..100 {
                let dispatch = build_dispatch_shuffled(&a, &mut sample_rng(round, n as u64)).unwrap();
                let layout = FamilyLayout::new(&a, &dispatch, n, &budget).unwrap();
                for (v, e) in families.iter().zip(&expected) {
                    ensure(layout.realize_values(v) == *e, format!("order {round} changes a realization at n={n}"))?;
                }
            }
        }
    }
    Ok("100 orders".into())
}

fn c12_zeta() -> Outcome {
    let z = zeta(100, 4);
    ensure((z - 0.016062).abs() <= 1e-6, format!("zeta(100,4) = {z}"))?;
    for n in 10..=1000u64 {
        let bound = (4096.0 / 24.0) / (n * n) as f64;
        ensure(zeta(n, 4) <= bound, format!("zeta({n},4) above bound"))?;
    }
    let tails: Vec<f64> = [50, 100, 200].iter().map(|&n| murskii_tail(n).unwrap()).collect();
    ensure(tails.windows(2).all(|w| w[1] < w[0]), format!("tails {tails:?}"))?;
    Ok(format!("zeta(100,4) = {z:.7}"))
}

fn c13_determinism(reports: &[CensusReport]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in [1, 4, 16] {
        let path = dir.path().join(format!("t{threads}.csv"));
        let args = [
            "maltsev".to_string(),
            "census".into(),
            "maltsev".into(),
            "-n".into(),
            "16".into(),
            "--samples".into(),
            "20000".into(),
            "--seed".into(),
            "6".into(),
            "--property".into(),
            "subalg2,minority2".into(),
            "--threads".into(),
            threads.to_string(),
            "-o".into(),
            path.display().to_string(),
        ];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = maltsev_models::cli::run(args, &mut out, &mut err);
        ensure(code == 0, format!("exit {code}: {}", String::from_utf8_lossy(&err)))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), "CSV differs across thread counts")?;
    let in_process = to_csv(reports).map_err(|e| e.to_string())?;
    ensure(outputs[0] == in_process.as_bytes(), "CLI output differs from the in-process census")?;
    Ok(format!("{} bytes", outputs[0].len()))
}

fn report(index: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panic: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} {index:>2} {name} [{secs:.2}s] {detail}");
    outcome.is_ok()
}

fn main() {
    let mut ok = true;
    ok &= report(1, "closure classes of commutative maltsev", c1_table_one);
    ok &= report(2, "parameter goldens", c2_parameters);
    ok &= report(3, "idemprimality verdict table", c3_verdicts);
    ok &= report(4, "bijection against brute force", c4_bijection);
    ok &= report(5, "fixed subset subuniverse frequency", c5_fixed_b);
    let c6 = catch_unwind(c6_reports).ok();
    ok &= report(6, "finite-n two-element subalgebras", || match &c6 {
        Some(r) => c6_finite_n(r),
        None => Err("census failed".into()),
    });
    ok &= report(7, "no two-element subalgebra trend", c7_trend);
    ok &= report(8, "rare properties", c8_rarity);
    ok &= report(9, "majority models", c9_majority);
    ok &= report(10, "uniform sampling", c10_uniformity);
    ok &= report(11, "dispatch order invariance", c11_invariance);
    ok &= report(12, "zeta diagnostics", c12_zeta);
    ok &= report(13, "thread-count determinism", || match &c6 {
        Some(r) => c13_determinism(r),
        None => Err("census failed".into()),
    });
    if !ok {
        std::process::exit(1);
    }
}
