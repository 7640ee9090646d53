#![allow(dead_code)]

use maltsev_models::algebra::{FiniteAlgebra, Operation};
use maltsev_models::syntax::{parse_system, LinearTerm, Signature, SystemSpec};

pub const MALTSEV: &str = "# system: maltsev\nsignature f/3\nidentity x = f(x,y,y)\nidentity f(x,x,y) = y\n";
pub const CMALTSEV: &str = "# system: cmaltsev\nsignature f/3\nidentity f(x,x,y) = y\nidentity f(x,y,z) = f(z,y,x)\n";

pub fn spec(text: &str) -> SystemSpec {
    parse_system(text).unwrap()
}

/// `f(y,x,y)` style term with x, y, z, u, v, w as variables 0..5.
pub fn term(sig: &Signature, text: &str) -> LinearTerm {
    let var = |s: &str| ["x", "y", "z", "u", "v", "w"].iter().position(|v| *v == s.trim()).unwrap();
    match text.split_once('(') {
        None => LinearTerm::Var(var(text)),
        Some((name, rest)) => {
            let args: Vec<usize> = rest.trim_end_matches(')').split(',').map(var).collect();
            LinearTerm::app(sig.index_of(name.trim()).unwrap(), args)
        }
    }
}

/// Direct check of every identity under every assignment.
pub fn satisfies(spec: &SystemSpec, a: &FiniteAlgebra) -> bool {
    spec.identities.iter().all(|id| {
        let k = id.max_variable() + 1;
        let total = a.n.pow(k as u32);
        (0..total).all(|mut code| {
            let mut env = vec![0u32; k];
            for slot in env.iter_mut().rev() {
                *slot = (code % a.n) as u32;
                code /= a.n;
            }
            a.eval(&id.lhs, &env) == a.eval(&id.rhs, &env)
        })
    })
}

/// Every assignment of tables to the signature, filtered by `satisfies`.
pub fn brute_models(spec: &SystemSpec, n: usize) -> Vec<FiniteAlgebra> {
    let sig = &spec.signature;
    let cells: Vec<usize> = sig.symbols().iter().map(|s| n.pow(s.arity as u32)).collect();
    let total: usize = cells.iter().sum();
    let count = n.pow(total as u32);
    let mut out = Vec::new();
    for mut code in 0..count {
        let mut flat = vec![0u32; total];
        for slot in flat.iter_mut().rev() {
            *slot = (code % n) as u32;
            code /= n;
        }
        let mut start = 0;
        let operations = sig
            .symbols()
            .iter()
            .zip(&cells)
            .map(|(s, &c)| {
                let op = Operation {
                    name: s.name.clone(),
                    arity: s.arity,
                    table: flat[start..start + c].to_vec(),
                };
                start += c;
                op
            })
            .collect();
        let a = FiniteAlgebra { n, operations };
        if satisfies(spec, &a) {
            out.push(a);
        }
    }
    out
}

/// Ternary algebra from a closure.
pub fn ternary(n: usize, f: impl Fn(u32, u32, u32) -> u32) -> FiniteAlgebra {
    let mut table = Vec::new();
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            for c in 0..n as u32 {
                table.push(f(a, b, c));
            }
        }
    }
    FiniteAlgebra::new(n, vec![Operation { name: "f".into(), arity: 3, table }]).unwrap()
}
