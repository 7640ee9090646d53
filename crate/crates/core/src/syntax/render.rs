use super::{LinearTerm, Signature, SystemSpec};

const BASE_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

/// Surface names for variables `0..count`, avoiding the signature's symbol names.
pub fn variable_names(signature: &Signature, count: usize) -> Vec<String> {
    let candidates: [Box<dyn Fn(usize) -> String>; 3] = [
        Box::new(|i| match BASE_NAMES.get(i) {
            Some(n) => n.to_string(),
            None => format!("x{}", i + 1),
        }),
        Box::new(|i| format!("v{}", i + 1)),
        Box::new(|i| format!("_v{}", i + 1)),
    ];
    for scheme in &candidates {
        let names: Vec<String> = (0..count).map(scheme).collect();
        if names.iter().all(|n| signature.index_of(n).is_none()) {
            return names;
        }
    }
    // symbol names made of `_v<digits>` for every index: fall back to a longer prefix
    let mut prefix = "__v".to_string();
    loop {
        let names: Vec<String> = (0..count).map(|i| format!("{prefix}{}", i + 1)).collect();
        if names.iter().all(|n| signature.index_of(n).is_none()) {
            return names;
        }
        prefix.insert(0, '_');
    }
}

pub fn render_term(signature: &Signature, t: &LinearTerm, names: &[String]) -> String {
    match t {
        LinearTerm::Var(v) => names[*v].clone(),
        LinearTerm::App { symbol, args } => {
            let args: Vec<&str> = args.iter().map(|&a| names[a].as_str()).collect();
            format!("{}({})", signature.name(*symbol), args.join(","))
        }
    }
}

/// Deterministic `.mlt` rendering: optional name header, one signature line,
/// one identity per line, trailing newline.
pub fn render_system(spec: &SystemSpec) -> String {
    let mut out = String::new();
    if !spec.name.is_empty() {
        out.push_str(&format!("# system: {}\n", spec.name));
    }
    let decls: Vec<String> = spec
        .signature
        .symbols()
        .iter()
        .map(|s| format!("{}/{}", s.name, s.arity))
        .collect();
    out.push_str(&format!("signature {}\n", decls.join(", ")));
    for id in &spec.identities {
        let names = variable_names(&spec.signature, id.max_variable() + 1);
        out.push_str(&format!(
            "identity {} = {}\n",
            render_term(&spec.signature, &id.lhs, &names),
            render_term(&spec.signature, &id.rhs, &names)
        ));
    }
    out
}
