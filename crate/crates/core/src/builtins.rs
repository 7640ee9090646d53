//! Parametric generators for familiar idempotent linear Maltsev conditions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::syntax::{parse_system, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Maltsev,
    CommutativeMaltsev,
    HagemannMitschke,
    Jonsson,
    Day,
    Gumm,
    SdJoin,
    NearUnanimity,
    WeakNu,
    Cyclic,
    Minority1,
    Minority2,
    Minority3,
    Majority,
    TwoThirdsMinority,
    PixleyPair,
    Cube,
    Edge,
    Parallelogram,
    Siggers4,
    Siggers6,
    Olsak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    None,
    /// Integer parameter with its least admissible value and a default.
    K { min: usize, default: usize },
    MN,
}

impl Family {
    pub const ALL: [Family; 22] = [
        Family::Maltsev,
        Family::CommutativeMaltsev,
        Family::HagemannMitschke,
        Family::Jonsson,
        Family::Day,
        Family::Gumm,
        Family::SdJoin,
        Family::NearUnanimity,
        Family::WeakNu,
        Family::Cyclic,
        Family::Minority1,
        Family::Minority2,
        Family::Minority3,
        Family::Majority,
        Family::TwoThirdsMinority,
        Family::PixleyPair,
        Family::Cube,
        Family::Edge,
        Family::Parallelogram,
        Family::Siggers4,
        Family::Siggers6,
        Family::Olsak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Maltsev => "maltsev",
            Family::CommutativeMaltsev => "commutative-maltsev",
            Family::HagemannMitschke => "hagemann-mitschke",
            Family::Jonsson => "jonsson",
            Family::Day => "day",
            Family::Gumm => "gumm",
            Family::SdJoin => "sd-join",
            Family::NearUnanimity => "near-unanimity",
            Family::WeakNu => "weak-nu",
            Family::Cyclic => "cyclic",
            Family::Minority1 => "minority1",
            Family::Minority2 => "minority2",
            Family::Minority3 => "minority3",
            Family::Majority => "majority",
            Family::TwoThirdsMinority => "two-thirds-minority",
            Family::PixleyPair => "pixley-pair",
            Family::Cube => "cube",
            Family::Edge => "edge",
            Family::Parallelogram => "parallelogram",
            Family::Siggers4 => "siggers4",
            Family::Siggers6 => "siggers6",
            Family::Olsak => "olsak",
        }
    }

    fn param(self) -> Param {
        use Family::*;
        match self {
            HagemannMitschke => Param::K { min: 2, default: 3 },
            Jonsson => Param::K { min: 2, default: 4 },
            Day => Param::K { min: 2, default: 2 },
            Gumm => Param::K { min: 0, default: 1 },
            SdJoin => Param::K { min: 2, default: 4 },
            NearUnanimity => Param::K { min: 3, default: 4 },
            WeakNu => Param::K { min: 3, default: 4 },
            Cyclic => Param::K { min: 2, default: 4 },
            Cube => Param::K { min: 2, default: 3 },
            Edge => Param::K { min: 2, default: 3 },
            Parallelogram => Param::MN,
            _ => Param::None,
        }
    }

    /// Identity lists taken from the original sources rather than printed in full.
    pub fn source_encoded(self) -> bool {
        matches!(self, Family::Day | Family::Gumm | Family::SdJoin)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown builtin family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BuiltinId {
    pub family: Family,
    pub k: Option<usize>,
    pub mn: Option<(usize, usize)>,
}

impl BuiltinId {
    pub fn new(family: Family) -> Self {
        let k = match family.param() {
            Param::K { default, .. } => Some(default),
            _ => None,
        };
        let mn = (family.param() == Param::MN).then_some((1, 1));
        BuiltinId { family, k, mn }
    }

    pub fn with_k(family: Family, k: usize) -> Self {
        BuiltinId {
            family,
            k: Some(k),
            mn: None,
        }
    }

    pub fn with_mn(family: Family, m: usize, n: usize) -> Self {
        BuiltinId {
            family,
            k: None,
            mn: Some((m, n)),
        }
    }

    /// Check parameter presence and range.
    pub fn validate(&self) -> Result<()> {
        let name = self.family.name();
        match self.family.param() {
            Param::None => {
                if self.k.is_some() || self.mn.is_some() {
                    return Err(Error::Invalid(format!("{name} takes no parameter")));
                }
            }
            Param::K { min, .. } => match (self.k, self.mn) {
                (Some(k), None) if k >= min => {}
                (Some(k), None) => return Err(Error::Invalid(format!("{name} needs k >= {min}, got {k}"))),
                _ => return Err(Error::Invalid(format!("{name} needs one parameter k >= {min}"))),
            },
            Param::MN => match (self.k, self.mn) {
                (None, Some((m, n))) if m >= 1 && n >= 1 => {}
                _ => return Err(Error::Invalid(format!("{name} needs parameters m, n >= 1"))),
            },
        }
        Ok(())
    }
}

impl fmt::Display for BuiltinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family.name())?;
        if let Some(k) = self.k {
            write!(f, ":{k}")?;
        }
        if let Some((m, n)) = self.mn {
            write!(f, ":{m},{n}")?;
        }
        Ok(())
    }
}

impl FromStr for BuiltinId {
    type Err = Error;

    /// `name`, `name:k` or `name:m,n`; a bare parametric name takes the default.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let family: Family = name.parse()?;
        let bad = || Error::Invalid(format!("bad builtin parameter in {s:?}"));
        let id = match arg {
            None => BuiltinId::new(family),
            Some(arg) => match arg.split_once(',') {
                Some((m, n)) => {
                    BuiltinId::with_mn(family, m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?)
                }
                None => BuiltinId::with_k(family, arg.trim().parse().map_err(|_| bad())?),
            },
        };
        id.validate()?;
        Ok(id)
    }
}

/// Tuple over `x`/`y` as argument text.
fn args(t: &[bool]) -> String {
    t.iter().map(|&b| if b { "y" } else { "x" }).collect::<Vec<_>>().join(",")
}

/// `lone y` tuple of length `k` at position `i`.
fn lone(k: usize, i: usize) -> Vec<bool> {
    (0..k).map(|j| j == i).collect()
}

fn jonsson_lines(k: usize, ends: bool, sig: &mut Vec<String>, ids: &mut Vec<String>) {
    let t = |i: usize| format!("t{i}");
    let range = if ends { 0..=k } else { 1..=k - 1 };
    for i in range.clone() {
        sig.push(format!("{}/3", t(i)));
    }
    let term = |i: usize, a: &str| {
        if !ends && i == 0 {
            "x".to_string()
        } else if !ends && i == k {
            "z".to_string()
        } else {
            format!("{}({a})", t(i))
        }
    };
    if ends {
        ids.push(format!("{}(x,y,z) = x", t(0)));
    }
    for i in 1..k {
        ids.push(format!("{}(x,y,x) = x", t(i)));
    }
    for i in 0..k {
        let a = if i % 2 == 0 { "x,x,z" } else { "x,z,z" };
        let (l, r) = (term(i, a), term(i + 1, a));
        let (l, r) = if !ends && i + 1 == k { (l, "z".into()) } else { (l, r) };
        ids.push(format!("{l} = {r}"));
    }
    if ends {
        ids.push(format!("{}(x,y,z) = z", t(k)));
    }
}

fn text(id: &BuiltinId, sig: &[String], ids: &[String]) -> String {
    let mut s = format!("# system: {id}\nsignature {}\n", sig.join(", "));
    for l in ids {
        s.push_str("identity ");
        s.push_str(l);
        s.push('\n');
    }
    s
}

/// Source text of the system, before parsing.
fn source(id: &BuiltinId) -> Result<String> {
    id.validate()?;
    let k = id.k.unwrap_or(0);
    let mut sig: Vec<String> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let idem = |sym: &str, d: usize| format!("{sym}({}) = x", vec!["x"; d].join(","));
    match id.family {
        Family::Maltsev => {
            sig.push("f/3".into());
            ids.push("x = f(x,y,y)".into());
            ids.push("f(x,x,y) = y".into());
        }
        Family::CommutativeMaltsev => {
            sig.push("f/3".into());
            ids.push("f(x,x,y) = y".into());
            ids.push("f(x,y,z) = f(z,y,x)".into());
        }
        Family::HagemannMitschke => {
            for i in 1..k {
                sig.push(format!("q{i}/3"));
            }
            ids.push("x = q1(x,y,y)".into());
            for i in 1..k - 1 {
                ids.push(format!("q{i}(x,x,y) = q{}(x,y,y)", i + 1));
            }
            ids.push(format!("q{}(x,x,y) = y", k - 1));
        }
        Family::Jonsson => jonsson_lines(k, true, &mut sig, &mut ids),
        Family::Day => {
            for i in 0..=k {
                sig.push(format!("m{i}/4"));
            }
            ids.push("m0(x,y,z,u) = x".into());
            for i in 1..k {
                ids.push(format!("m{i}(x,y,y,x) = x"));
            }
            for i in 0..k {
                let a = if i % 2 == 0 { "x,x,u,u" } else { "x,y,y,u" };
                ids.push(format!("m{i}({a}) = m{}({a})", i + 1));
            }
            ids.push(format!("m{k}(x,y,z,u) = u"));
        }
        Family::Gumm => {
            for i in 0..=k {
                sig.push(format!("d{i}/3"));
            }
            sig.push("p/3".into());
            ids.push("d0(x,y,z) = x".into());
            for i in 1..=k {
                ids.push(format!("d{i}(x,y,x) = x"));
            }
            for i in 0..k {
                let a = if i % 2 == 0 { "x,x,z" } else { "x,z,z" };
                ids.push(format!("d{i}({a}) = d{}({a})", i + 1));
            }
            ids.push(format!("d{k}(x,z,z) = p(x,z,z)"));
            ids.push("p(x,x,z) = z".into());
        }
        Family::SdJoin => {
            for i in 0..=k {
                sig.push(format!("d{i}/3"));
            }
            ids.push("d0(x,y,z) = x".into());
            for i in 0..k {
                let j = i + 1;
                if i % 2 == 0 {
                    ids.push(format!("d{i}(x,y,x) = d{j}(x,y,x)"));
                    ids.push(format!("d{i}(x,y,y) = d{j}(x,y,y)"));
                } else {
                    ids.push(format!("d{i}(x,x,y) = d{j}(x,x,y)"));
                }
            }
            ids.push(format!("d{k}(x,y,z) = z"));
        }
        Family::NearUnanimity | Family::Majority => {
            let k = if id.family == Family::Majority { 3 } else { k };
            sig.push(format!("g/{k}"));
            for i in 0..k {
                ids.push(format!("g({}) = x", args(&lone(k, i))));
            }
        }
        Family::WeakNu => {
            sig.push(format!("w/{k}"));
            ids.push(idem("w", k));
            for i in 0..k - 1 {
                ids.push(format!("w({}) = w({})", args(&lone(k, i)), args(&lone(k, i + 1))));
            }
        }
        Family::Cyclic => {
            let sym = crate::syntax::Symbol {
                name: "c".into(),
                arity: k,
            };
            let vars = crate::syntax::variable_names(&crate::syntax::Signature::new(vec![sym])?, k);
            sig.push(format!("c/{k}"));
            ids.push(idem("c", k));
            let rotated: Vec<String> = (0..k).map(|i| vars[(i + 1) % k].clone()).collect();
            ids.push(format!("c({}) = c({})", vars.join(","), rotated.join(",")));
        }
        Family::Minority1 | Family::Minority2 | Family::Minority3 => {
            sig.push("f/3".into());
            ids.push("f(x,y,y) = x".into());
            ids.push("f(y,y,x) = x".into());
            ids.push("f(y,x,y) = x".into());
            if id.family != Family::Minority1 {
                ids.push("f(x,y,z) = f(y,z,x)".into());
            }
            if id.family == Family::Minority3 {
                ids.push("f(x,y,z) = f(y,x,z)".into());
            }
        }
        Family::TwoThirdsMinority => {
            sig.push("f/3".into());
            ids.push("f(x,y,y) = x".into());
            ids.push("f(x,y,x) = x".into());
            ids.push("f(y,y,x) = x".into());
        }
        Family::PixleyPair => {
            sig.push("f/3".into());
            sig.push("d/3".into());
            ids.push("x = f(x,y,y)".into());
            ids.push("f(x,x,y) = y".into());
            ids.push("d(x,x,y) = x".into());
            ids.push("d(x,y,x) = x".into());
            ids.push("d(y,x,x) = x".into());
        }
        Family::Cube => {
            let arity = (1usize << k) - 1;
            sig.push(format!("c/{arity}"));
            for row in 0..k {
                let t: Vec<bool> = (1..=arity).map(|col| col >> row & 1 == 1).collect();
                ids.push(format!("c({}) = x", args(&t)));
            }
        }
        Family::Edge => {
            sig.push(format!("e/{}", k + 1));
            let mut rows = vec![
                (0..=k).map(|j| j < 2).collect::<Vec<bool>>(),
                (0..=k).map(|j| j == 0 || j == 2).collect(),
            ];
            for i in 3..=k {
                rows.push(lone(k + 1, i));
            }
            for r in rows {
                ids.push(format!("e({}) = x", args(&r)));
            }
        }
        Family::Parallelogram => {
            return Err(Error::Unsupported(format!(
                "{id}: parallelogram identities are not implemented"
            )));
        }
        Family::Siggers4 => {
            sig.push("s/4".into());
            ids.push(idem("s", 4));
            ids.push("s(x,y,x,z) = s(y,x,z,y)".into());
        }
        Family::Siggers6 => {
            sig.push("s/6".into());
            ids.push(idem("s", 6));
            ids.push("s(x,y,x,z,y,z) = s(y,x,z,x,z,y)".into());
        }
        Family::Olsak => {
            sig.push("o/6".into());
            ids.push(idem("o", 6));
            ids.push("o(x,y,y,y,x,x) = o(y,x,y,x,y,x)".into());
            ids.push("o(y,x,y,x,y,x) = o(y,y,x,x,x,y)".into());
        }
    }
    Ok(text(id, &sig, &ids))
}

pub fn builtin_system(id: &BuiltinId) -> Result<SystemSpec> {
    parse_system(&source(id)?)
}

/// Jónsson terms with the inessential end symbols eliminated.
pub fn jonsson_without_ends(k: usize) -> Result<SystemSpec> {
    if k < 2 {
        return Err(Error::Invalid(format!("jonsson needs k >= 2, got {k}")));
    }
    let mut sig = Vec::new();
    let mut ids = Vec::new();
    jonsson_lines(k, false, &mut sig, &mut ids);
    let mut s = format!("# system: jonsson-without-ends:{k}\nsignature {}\n", sig.join(", "));
    for l in ids {
        s.push_str(&format!("identity {l}\n"));
    }
    parse_system(&s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectedVerdict {
    /// Random finite models are almost surely idemprimal.
    pub almost_surely_idemprimal: bool,
    /// Identity list follows a cited convention; verdict checks are advisory.
    pub source_encoded: bool,
}

/// Published answer to "almost surely idemprimal?", where one exists.
pub fn expected_verdict(id: &BuiltinId) -> Option<ExpectedVerdict> {
    use Family::*;
    let k = id.k.unwrap_or(0);
    let yes = match id.family {
        Maltsev | Minority1 | Minority2 | Minority3 | Majority | TwoThirdsMinority | PixleyPair => false,
        HagemannMitschke | Cube | Edge => k >= 3,
        Jonsson | SdJoin | NearUnanimity | WeakNu | Cyclic => k >= 4,
        Day => true,
        Gumm => k >= 1,
        Parallelogram | Siggers4 | Siggers6 | Olsak => true,
        CommutativeMaltsev => return None,
    };
    Some(ExpectedVerdict {
        almost_surely_idemprimal: yes,
        source_encoded: id.family.source_encoded(),
    })
}

/// Parameter instances covered by fixtures and verdict tests.
pub fn fixture_ids() -> Vec<BuiltinId> {
    use Family::*;
    let mut out = Vec::new();
    for f in Family::ALL {
        match f {
            HagemannMitschke => out.extend((2..=5).map(|k| BuiltinId::with_k(f, k))),
            Jonsson | SdJoin => out.extend((2..=5).map(|k| BuiltinId::with_k(f, k))),
            Day => out.extend((2..=3).map(|k| BuiltinId::with_k(f, k))),
            Gumm => out.extend((0..=2).map(|k| BuiltinId::with_k(f, k))),
            NearUnanimity | WeakNu => out.extend((3..=5).map(|k| BuiltinId::with_k(f, k))),
            Cyclic => out.extend((2..=5).map(|k| BuiltinId::with_k(f, k))),
            Cube => out.extend((2..=3).map(|k| BuiltinId::with_k(f, k))),
            Edge => out.extend((2..=4).map(|k| BuiltinId::with_k(f, k))),
            Parallelogram => {}
            _ => out.push(BuiltinId::new(f)),
        }
    }
    out
}

/// File name of a fixture, e.g. `hagemann-mitschke-3.mlt`.
pub fn fixture_file_name(id: &BuiltinId) -> String {
    match id.k {
        Some(k) => format!("{}-{k}.mlt", id.family.name()),
        None => format!("{}.mlt", id.family.name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::render_system;

    #[test]
    fn ids_parse() {
        let id: BuiltinId = "hagemann-mitschke:3".parse().unwrap();
        assert_eq!(id, BuiltinId::with_k(Family::HagemannMitschke, 3));
        assert_eq!(id.to_string(), "hagemann-mitschke:3");
        assert_eq!("jonsson".parse::<BuiltinId>().unwrap().k, Some(4));
        assert!("near-unanimity:2".parse::<BuiltinId>().is_err());
        assert!("maltsev:2".parse::<BuiltinId>().is_err());
        assert!("bogus".parse::<BuiltinId>().is_err());
        assert!(builtin_system(&"parallelogram:1,2".parse().unwrap()).is_err());
    }

    #[test]
    fn shapes() {
        let hm = builtin_system(&BuiltinId::with_k(Family::HagemannMitschke, 3)).unwrap();
        assert_eq!(hm.signature.len(), 2);
        assert_eq!(hm.identities.len(), 3);
        let nu = builtin_system(&BuiltinId::with_k(Family::NearUnanimity, 4)).unwrap();
        assert_eq!(nu.identities.len(), 4);
        assert_eq!(nu.signature.arity(0), 4);
        let m2 = builtin_system(&BuiltinId::new(Family::Minority2)).unwrap();
        assert_eq!(m2.identities.len(), 4);
        let cube = builtin_system(&BuiltinId::with_k(Family::Cube, 3)).unwrap();
        assert_eq!(cube.signature.arity(0), 7);
        assert_eq!(
            render_system(&builtin_system(&BuiltinId::new(Family::Maltsev)).unwrap()),
            "# system: maltsev\nsignature f/3\nidentity x = f(x,y,y)\nidentity f(x,x,y) = y\n"
        );
    }

    #[test]
    fn all_fixtures_build() {
        for id in fixture_ids() {
            let spec = builtin_system(&id).unwrap();
            assert_eq!(spec.name, id.to_string());
        }
    }
}
