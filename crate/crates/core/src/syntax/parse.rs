use super::{Identity, LinearTerm, Signature, Symbol, SystemSpec};
use crate::error::{Error, Result};

const NAME_HEADER: &str = "system:";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Punct(char),
}

struct Lexer<'a> {
    text: &'a str,
    line: usize,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Lexer { text, line, pos: 0 }
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.column(), msg)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c == ' ' || c == '\t' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        let col = self.column();
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok(Some((Tok::Ident(rest[..len].to_string()), col)));
        }
        if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let value = rest[..len]
                .parse()
                .map_err(|_| self.err(format!("integer out of range: {}", &rest[..len])))?;
            self.pos += len;
            return Ok(Some((Tok::Int(value), col)));
        }
        if "(),=/".contains(c) {
            self.pos += 1;
            return Ok(Some((Tok::Punct(c), col)));
        }
        Err(self.err(format!("unexpected character {c:?}")))
    }

    fn expect_punct(&mut self, p: char) -> Result<()> {
        match self.next()? {
            Some((Tok::Punct(q), _)) if q == p => Ok(()),
            Some((t, col)) => Err(Error::parse(self.line, col, format!("expected '{p}', found {t:?}"))),
            None => Err(self.err(format!("expected '{p}', found end of line"))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize)> {
        match self.next()? {
            Some((Tok::Ident(s), col)) => Ok((s, col)),
            Some((t, col)) => Err(Error::parse(self.line, col, format!("expected a name, found {t:?}"))),
            None => Err(self.err("expected a name, found end of line")),
        }
    }

    fn peek_punct(&mut self, p: char) -> bool {
        self.skip_ws();
        self.text[self.pos..].starts_with(p)
    }
}

fn keyword<'a>(line: &'a str, kw: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(kw)?;
    if rest.is_empty() || rest.starts_with([' ', '\t']) {
        Some(rest)
    } else {
        None
    }
}

/// Parse a system file. Symbols keep declaration order; variables are numbered
/// by first occurrence within each identity (left side first).
pub fn parse_system(text: &str) -> Result<SystemSpec> {
    let mut name = String::new();
    let mut symbols: Vec<Symbol> = Vec::new();
    let mut identity_lines = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix(NAME_HEADER) {
                if name.is_empty() {
                    name = n.trim().to_string();
                }
            }
            continue;
        }
        let offset = raw.len() - raw.trim_start().len();
        if let Some(rest) = keyword(line, "signature") {
            let mut lx = Lexer::new(rest, line_no);
            // keep reported columns relative to the raw line
            let base = offset + "signature".len();
            let shift = |e: Error| match e {
                Error::Parse { line, column, message } => Error::Parse {
                    line,
                    column: column + base,
                    message,
                },
                other => other,
            };
            loop {
                let (sym, col) = lx.expect_ident().map_err(shift)?;
                lx.expect_punct('/').map_err(shift)?;
                let arity = match lx.next().map_err(shift)? {
                    Some((Tok::Int(a), _)) => a,
                    _ => return Err(shift(lx.err("expected an arity"))),
                };
                if arity == 0 {
                    return Err(Error::parse(line_no, col + base, format!("constant symbol {sym}/0 is not allowed")));
                }
                if symbols.iter().any(|s| s.name == sym) {
                    return Err(Error::parse(line_no, col + base, format!("duplicate symbol {sym}")));
                }
                symbols.push(Symbol { name: sym, arity });
                if lx.at_end() {
                    break;
                }
                lx.expect_punct(',').map_err(shift)?;
            }
        } else if let Some(rest) = keyword(line, "identity") {
            identity_lines.push((line_no, offset + "identity".len(), rest.to_string()));
        } else {
            return Err(Error::parse(line_no, offset + 1, "expected 'signature', 'identity' or a comment"));
        }
    }

    if symbols.is_empty() {
        return Err(Error::parse(1, 1, "no signature declared"));
    }
    let signature = Signature::new(symbols)?;
    let mut identities = Vec::new();
    for (line_no, base, rest) in identity_lines {
        let id = parse_identity_line(&signature, &rest, line_no).map_err(|e| match e {
            Error::Parse { line, column, message } => Error::Parse {
                line,
                column: column + base,
                message,
            },
            other => other,
        })?;
        identities.push(id);
    }
    SystemSpec::new(name, signature, identities)
}

/// Parse `lhs = rhs` against an existing signature (used for entailment queries).
pub fn parse_identity(signature: &Signature, text: &str) -> Result<Identity> {
    parse_identity_line(signature, text.trim(), 1)
}

fn parse_identity_line(signature: &Signature, text: &str, line: usize) -> Result<Identity> {
    let mut lx = Lexer::new(text, line);
    let mut vars: Vec<String> = Vec::new();
    let lhs = parse_term(signature, &mut lx, &mut vars)?;
    lx.expect_punct('=')?;
    let rhs = parse_term(signature, &mut lx, &mut vars)?;
    if !lx.at_end() {
        return Err(lx.err("trailing input after identity"));
    }
    Ok(Identity { lhs, rhs })
}

fn parse_term(signature: &Signature, lx: &mut Lexer<'_>, vars: &mut Vec<String>) -> Result<LinearTerm> {
    let (name, col) = lx.expect_ident()?;
    let mut var_index = |n: &str| match vars.iter().position(|v| v == n) {
        Some(i) => i,
        None => {
            vars.push(n.to_string());
            vars.len() - 1
        }
    };
    if !lx.peek_punct('(') {
        if signature.index_of(&name).is_some() {
            return Err(Error::parse(lx.line, col, format!("operation symbol {name} used as a variable")));
        }
        return Ok(LinearTerm::Var(var_index(&name)));
    }
    let Some(symbol) = signature.index_of(&name) else {
        return Err(Error::parse(lx.line, col, format!("undeclared operation symbol {name}")));
    };
    lx.expect_punct('(')?;
    let mut args = Vec::new();
    loop {
        let (arg, acol) = lx.expect_ident()?;
        if lx.peek_punct('(') || signature.index_of(&arg).is_some() {
            return Err(Error::parse(lx.line, acol, format!("non-linear term: nested application of {arg}")));
        }
        args.push(var_index(&arg));
        match lx.next()? {
            Some((Tok::Punct(','), _)) => continue,
            Some((Tok::Punct(')'), _)) => break,
            Some((t, c)) => return Err(Error::parse(lx.line, c, format!("expected ',' or ')', found {t:?}"))),
            None => return Err(lx.err("unterminated argument list")),
        }
    }
    let arity = signature.arity(symbol);
    if args.len() != arity {
        return Err(Error::parse(
            lx.line,
            col,
            format!("arity mismatch: {name} expects {arity} arguments, got {}", args.len()),
        ));
    }
    Ok(LinearTerm::App { symbol, args })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_identity() {
        let s = parse_system("signature f/3\nidentity f(x,x,y) = y").unwrap();
        assert_eq!(s.signature.len(), 1);
        assert_eq!(s.identities.len(), 1);
        assert_eq!(s.identities[0].lhs, LinearTerm::app(0, vec![0, 0, 1]));
        assert_eq!(s.identities[0].rhs, LinearTerm::Var(1));
    }

    #[test]
    fn commutative_maltsev_file() {
        let text = "# system: cmaltsev\n# Example system\nsignature f/3\nidentity f(x,x,y) = y\nidentity f(x,y,z) = f(z,y,x)\n";
        let s = parse_system(text).unwrap();
        assert_eq!(s.name, "cmaltsev");
        assert_eq!(s.signature.symbols()[0], Symbol { name: "f".into(), arity: 3 });
        assert_eq!(s.identities.len(), 2);
        assert_eq!(s.identities[1].rhs, LinearTerm::app(0, vec![2, 1, 0]));
    }

    #[test]
    fn variables_numbered_per_identity() {
        let s = parse_system("signature f/2\nidentity f(b,a) = a\nidentity f(a,b) = b").unwrap();
        assert_eq!(s.identities[0].lhs, LinearTerm::app(0, vec![0, 1]));
        assert_eq!(s.identities[1].lhs, LinearTerm::app(0, vec![0, 1]));
        assert_eq!(s.identities[1].rhs, LinearTerm::Var(1));
    }

    #[test]
    fn rejects_constant_symbol() {
        let e = parse_system("signature c/0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e:?}");
        assert!(e.to_string().contains("constant"));
    }

    #[test]
    fn rejects_arity_mismatch() {
        let e = parse_system("signature f/3\nidentity f(x,y) = x").unwrap_err();
        assert!(e.to_string().contains("arity mismatch"), "{e}");
    }

    #[test]
    fn rejects_nested_terms() {
        let e = parse_system("signature f/2\nidentity f(f(x,y),y) = x").unwrap_err();
        assert!(e.to_string().contains("non-linear"), "{e}");
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_system("signature f/2\nidentity f(x,,y) = x").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 14);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_undeclared_symbol_and_garbage() {
        assert!(parse_system("signature f/2\nidentity g(x,y) = x").is_err());
        assert!(parse_system("signature f/2\nfoo bar").is_err());
        assert!(parse_system("identity x = x").is_err());
        assert!(parse_system("signature f/2, f/3").is_err());
    }
}
