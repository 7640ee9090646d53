//! Finite algebras on `{0..n-1}` with row-major operation tables.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::syntax::{Identity, LinearTerm, Signature, SystemSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    /// Cell `Σ a_j·n^{d-1-j}` holds `f(a_0, .., a_{d-1})`.
    pub table: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAlgebra {
    pub n: usize,
    pub operations: Vec<Operation>,
}

pub(crate) fn cell_index(n: usize, args: &[u32]) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a as usize)
}

/// Decode a cell index into its argument tuple.
pub(crate) fn cell_args(n: usize, mut cell: usize, out: &mut [u32]) {
    for slot in out.iter_mut().rev() {
        *slot = (cell % n) as u32;
        cell /= n;
    }
}

impl FiniteAlgebra {
    pub fn new(n: usize, operations: Vec<Operation>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("carrier must be non-empty".into()));
        }
        for op in &operations {
            let cells = crate::budget::checked_pow(n as u64, op.arity)
                .ok_or_else(|| Error::Budget(format!("table of {} is too large", op.name)))?;
            if op.table.len() as u64 != cells {
                return Err(Error::Invalid(format!(
                    "table of {} has {} cells, expected {cells}",
                    op.name,
                    op.table.len()
                )));
            }
            if let Some(v) = op.table.iter().find(|&&v| v as usize >= n) {
                return Err(Error::Invalid(format!("table of {} contains {v}, outside 0..{n}", op.name)));
            }
        }
        Ok(FiniteAlgebra { n, operations })
    }

    pub fn apply(&self, op: usize, args: &[u32]) -> u32 {
        self.operations[op].table[cell_index(self.n, args)]
    }

    pub fn is_idempotent(&self) -> bool {
        self.operations.iter().all(|op| {
            (0..self.n as u32).all(|a| {
                let args = vec![a; op.arity];
                op.table[cell_index(self.n, &args)] == a
            })
        })
    }

    /// Check that operation names and arities follow the signature, in order.
    pub fn check_signature(&self, signature: &Signature) -> Result<()> {
        let ok = self.operations.len() == signature.len()
            && self
                .operations
                .iter()
                .zip(signature.symbols())
                .all(|(op, s)| op.name == s.name && op.arity == s.arity);
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid("algebra operations do not match the system's signature".into()))
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut ops = Map::new();
        for op in &self.operations {
            ops.insert(op.name.clone(), json!({"arity": op.arity, "table": op.table}));
        }
        json!({"n": self.n, "operations": ops})
    }

    /// Compact single-line JSON document.
    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
        let bad = |msg: &str| Error::Invalid(format!("algebra document: {msg}"));
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing integer field \"n\""))? as usize;
        let ops = v
            .get("operations")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing object field \"operations\""))?;
        let mut operations = Vec::new();
        for (name, op) in ops {
            let arity = op
                .get("arity")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("operation without integer \"arity\""))? as usize;
            let table = op
                .get("table")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("operation without \"table\" array"))?
                .iter()
                .map(|c| c.as_u64().and_then(|c| u32::try_from(c).ok()))
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| bad("table entries must be non-negative integers"))?;
            operations.push(Operation {
                name: name.clone(),
                arity,
                table,
            });
        }
        FiniteAlgebra::new(n, operations)
    }

    /// Evaluate a linear term under an assignment of its variables.
    pub fn eval(&self, t: &LinearTerm, assignment: &[u32]) -> u32 {
        match t {
            LinearTerm::Var(v) => assignment[*v],
            LinearTerm::App { symbol, args } => {
                let op = &self.operations[*symbol];
                let cell = args.iter().fold(0, |acc, &a| acc * self.n + assignment[a] as usize);
                op.table[cell]
            }
        }
    }
}

/// The first failing identity and assignment, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub identity: usize,
    pub assignment: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

fn check_identity(algebra: &FiniteAlgebra, id: &Identity) -> Option<Vec<u32>> {
    let k = id.max_variable() + 1;
    let n = algebra.n as u32;
    let mut a = vec![0u32; k];
    loop {
        if algebra.eval(&id.lhs, &a) != algebra.eval(&id.rhs, &a) {
            return Some(a);
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            a[pos] += 1;
            if a[pos] < n {
                break;
            }
            a[pos] = 0;
        }
    }
}

/// Check every identity on every assignment, in lexicographic order.
pub fn validate_model(spec: &SystemSpec, algebra: &FiniteAlgebra) -> Result<Validation> {
    algebra.check_signature(&spec.signature)?;
    for (i, id) in spec.identities.iter().enumerate() {
        if let Some(assignment) = check_identity(algebra, id) {
            return Ok(Validation {
                holds: false,
                counterexample: Some(Counterexample { identity: i, assignment }),
            });
        }
    }
    Ok(Validation {
        holds: true,
        counterexample: None,
    })
}
