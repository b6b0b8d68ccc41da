//! The `.ssg` text format for recursion systems.
//!
//! ```text
//! # Basilica
//! alphabet: 0 1
//! backend: free
//! a = (0 1)(1, b)
//! b = (1, a)
//! ```
//!
//! A generator line is `name = (c1)(c2)...(w0, ..., w{d-1})`: disjoint cycles
//! of letters, then an optional section list. Section words use generator
//! names, `^-1`/`^k` or a trailing `'` for inverses and powers, parentheses
//! for grouping and `1` for the empty word. An omitted section list means all
//! sections are trivial; `()` is the identity permutation.

use std::path::Path;

use crate::backend::{BackendDescriptor, FactorSpec};
use crate::error::{Error, ParseError, Result, ValidationError};
use crate::recursion::{valid_name, Alphabet, GeneratorDef, GroupWord, Permutation, RecursionSystem, Sym};

/// Source text plus where it came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDoc {
    pub text: String,
    pub origin: String,
}

impl SourceDoc {
    pub fn inline(text: impl Into<String>) -> Self {
        Self { text: text.into(), origin: "<inline>".into() }
    }

    pub fn read(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        Ok(Self { text: std::fs::read_to_string(path)?, origin: path.display().to_string() })
    }
}

pub fn parse_str(text: &str) -> Result<RecursionSystem> {
    parse(&SourceDoc::inline(text))
}

pub fn parse_file(path: impl AsRef<Path>) -> Result<RecursionSystem> {
    let doc =
        SourceDoc::read(path.as_ref()).map_err(|e| Error::Malformed(format!("{}: {e}", path.as_ref().display())))?;
    parse(&doc)
}

struct RawGenerator {
    name: String,
    line: usize,
    cycles: Vec<Vec<(String, usize)>>,
    sections: Option<Vec<(String, usize)>>,
}

enum RawBackend {
    Tree,
    Free,
    Orders(Vec<u32>),
    Factors(Vec<FactorSpec>),
}

struct Reader<'a> {
    origin: &'a str,
}

impl Reader<'_> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { origin: self.origin.to_string(), line, column, message: message.into() }
    }
}

pub fn parse(doc: &SourceDoc) -> Result<RecursionSystem> {
    let rd = Reader { origin: &doc.origin };
    let mut alphabet: Option<Alphabet> = None;
    let mut backend: Option<RawBackend> = None;
    let mut raw: Vec<RawGenerator> = Vec::new();
    let mut last_line = 0;

    for (i, full) in doc.text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let content = full.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let content = content.trim_end();
        let body = &content[indent..];
        if let Some(rest) = body.strip_prefix("alphabet:") {
            if alphabet.is_some() {
                return Err(rd.err(line_no, indent + 1, "duplicate `alphabet:` line").into());
            }
            let symbols: Vec<&str> = rest.split_whitespace().collect();
            alphabet = Some(Alphabet::new(symbols)?);
            continue;
        }
        if alphabet.is_none() {
            return Err(rd.err(line_no, indent + 1, "expected `alphabet:` line first").into());
        }
        if let Some(rest) = body.strip_prefix("backend:") {
            if backend.is_some() {
                return Err(rd.err(line_no, indent + 1, "duplicate `backend:` line").into());
            }
            let col = indent + "backend:".len() + 1;
            backend = Some(parse_backend(&rd, rest, line_no, col)?);
            continue;
        }
        raw.push(parse_generator_line(&rd, body, line_no, indent)?);
    }

    let Some(alphabet) = alphabet else {
        return Err(rd.err(last_line.max(1), 1, "missing `alphabet:` line").into());
    };
    if raw.is_empty() {
        return Err(ValidationError::NoGenerators.into());
    }
    let names: Vec<String> = raw.iter().map(|g| g.name.clone()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(ValidationError::DuplicateGenerator(n.clone()).into());
        }
    }
    let d = alphabet.len();
    let mut generators = Vec::with_capacity(raw.len());
    for g in &raw {
        let mut cycles = Vec::with_capacity(g.cycles.len());
        let mut used = vec![false; d];
        for cycle in &g.cycles {
            let mut c = Vec::with_capacity(cycle.len());
            for (sym, _) in cycle {
                let x = alphabet
                    .index_of(sym)
                    .ok_or_else(|| ValidationError::CycleLetter { generator: g.name.clone(), letter: sym.clone() })?;
                if used[x] {
                    return Err(
                        ValidationError::OverlappingCycles { generator: g.name.clone(), letter: sym.clone() }.into()
                    );
                }
                used[x] = true;
                c.push(x);
            }
            cycles.push(c);
        }
        let perm = Permutation::from_cycles(d, &cycles)?;
        let sections = match &g.sections {
            None => vec![GroupWord::empty(); d],
            Some(list) => {
                if list.len() != d {
                    return Err(ValidationError::SectionCount {
                        generator: g.name.clone(),
                        expected: d,
                        found: list.len(),
                    }
                    .into());
                }
                list.iter()
                    .map(|(text, col)| {
                        parse_word_names(&names, text).map_err(|e| match e {
                            WordError::Unknown(symbol) => {
                                Error::from(ValidationError::UnknownSymbol { generator: g.name.clone(), symbol })
                            }
                            WordError::Syntax(pos, msg) => rd.err(g.line, col + pos, msg).into(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        generators.push(GeneratorDef { name: g.name.clone(), perm, sections });
    }
    let backend = match backend.unwrap_or(RawBackend::Tree) {
        RawBackend::Tree => BackendDescriptor::Tree,
        RawBackend::Free => BackendDescriptor::Free,
        RawBackend::Orders(orders) => {
            if orders.len() != names.len() {
                return Err(ValidationError::Backend(format!(
                    "{} orders given for {} generators",
                    orders.len(),
                    names.len()
                ))
                .into());
            }
            BackendDescriptor::FreeProduct(
                names.iter().zip(orders).map(|(n, k)| FactorSpec::cyclic(n.clone(), k)).collect(),
            )
        }
        RawBackend::Factors(f) => BackendDescriptor::FreeProduct(f),
    };
    Ok(RecursionSystem::new(alphabet, generators, backend)?)
}

fn parse_backend(rd: &Reader, text: &str, line: usize, col: usize) -> Result<RawBackend> {
    let t = text.trim();
    let col = col + (text.len() - text.trim_start().len());
    match t {
        "tree" => return Ok(RawBackend::Tree),
        "free" => return Ok(RawBackend::Free),
        _ => {}
    }
    let Some(inner) = t.strip_prefix("free-product(").and_then(|s| s.strip_suffix(')')) else {
        return Err(rd.err(line, col, format!("unknown backend `{t}`")).into());
    };
    let inner = inner.trim();
    if let Some(list) = inner.strip_prefix("orders:") {
        let orders = list
            .split_whitespace()
            .map(|s| s.parse::<u32>().map_err(|_| rd.err(line, col, format!("bad order `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if orders.is_empty() {
            return Err(rd.err(line, col, "empty order list").into());
        }
        return Ok(RawBackend::Orders(orders));
    }
    if let Some(list) = inner.strip_prefix("factors:") {
        let mut factors = Vec::new();
        for item in list.split('|') {
            let parts: Vec<&str> = item.split_whitespace().collect();
            match parts.as_slice() {
                [] => return Err(rd.err(line, col, "empty factor").into()),
                [single] if single.contains('^') => {
                    let (name, k) = single.split_once('^').expect("contains ^");
                    let k = k.parse::<u32>().map_err(|_| rd.err(line, col, format!("bad order in `{single}`")))?;
                    factors.push(FactorSpec::cyclic(name, k));
                }
                names => factors.push(FactorSpec::cluster(names.iter().copied())),
            }
        }
        return Ok(RawBackend::Factors(factors));
    }
    Err(rd.err(line, col, "expected `orders:` or `factors:` in free-product(...)").into())
}

fn parse_generator_line(rd: &Reader, body: &str, line: usize, indent: usize) -> Result<RawGenerator> {
    let Some((lhs, rhs)) = body.split_once('=') else {
        return Err(rd.err(line, indent + 1, "expected `name = ...`").into());
    };
    let name = lhs.trim();
    if !valid_name(name) {
        return Err(rd.err(line, indent + 1, format!("invalid generator name `{name}`")).into());
    }
    let rhs_start = indent + lhs.len() + 1;
    let chars: Vec<(usize, char)> = rhs.char_indices().collect();
    let mut groups: Vec<(usize, String)> = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (off, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        if c != '(' {
            return Err(rd.err(line, rhs_start + off + 1, format!("unexpected `{c}`")).into());
        }
        let mut depth = 0;
        let mut end = None;
        for (j, &(_, cj)) in chars.iter().enumerate().skip(k) {
            match cj {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(j);
                        break;
                    }
                }
                _ => {}
            }
        }
        let Some(end) = end else {
            return Err(rd.err(line, rhs_start + off + 1, "unclosed `(`").into());
        };
        let inner_start = off + 1;
        let inner_end = chars[end].0;
        groups.push((rhs_start + inner_start + 1, rhs[inner_start..inner_end].to_string()));
        k = end + 1;
    }
    let mut cycles = Vec::new();
    let mut sections = None;
    let n_groups = groups.len();
    for (gi, (col, inner)) in groups.into_iter().enumerate() {
        if inner.contains(',') {
            if gi + 1 != n_groups {
                return Err(rd.err(line, col, "section list must be the last group").into());
            }
            let mut list = Vec::new();
            let mut offset = 0;
            for piece in inner.split(',') {
                let lead = piece.len() - piece.trim_start().len();
                list.push((piece.trim().to_string(), col + offset + lead));
                offset += piece.len() + 1;
            }
            sections = Some(list);
        } else {
            let tokens: Vec<(String, usize)> = {
                let mut out = Vec::new();
                let mut pos = 0;
                for piece in inner.split_whitespace() {
                    let at = inner[pos..].find(piece).map_or(pos, |p| p + pos);
                    out.push((piece.to_string(), col + at));
                    pos = at + piece.len();
                }
                out
            };
            if tokens.is_empty() {
                continue;
            }
            // "(01)" with single-character letters
            let tokens = if tokens.len() == 1 && tokens[0].0.chars().count() > 1 && !tokens[0].0.contains('.') {
                tokens[0].0.chars().enumerate().map(|(i, c)| (c.to_string(), tokens[0].1 + i)).collect()
            } else {
                tokens
            };
            cycles.push(tokens);
        }
    }
    Ok(RawGenerator { name: name.to_string(), line, cycles, sections })
}

enum WordError {
    Unknown(String),
    Syntax(usize, String),
}

/// Parses a group word against a list of generator names (longest match).
fn parse_word_names(names: &[String], text: &str) -> Result<GroupWord, WordError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let syms = parse_seq(names, &chars, &mut pos, None)?;
    if pos != chars.len() {
        return Err(WordError::Syntax(pos, format!("unexpected `{}`", chars[pos])));
    }
    Ok(GroupWord::from_syms(syms))
}

/// Reads up to and including `close`, or to the end of input when `None`.
fn parse_seq(names: &[String], chars: &[char], pos: &mut usize, close: Option<char>) -> Result<Vec<Sym>, WordError> {
    let mut out: Vec<Sym> = Vec::new();
    loop {
        while *pos < chars.len() && (chars[*pos].is_whitespace() || matches!(chars[*pos], '*' | '·')) {
            *pos += 1;
        }
        if *pos >= chars.len() {
            return match close {
                Some(c) => Err(WordError::Syntax(*pos, format!("expected `{c}`"))),
                None => Ok(out),
            };
        }
        let c = chars[*pos];
        let mut atom: Vec<Sym>;
        let prefix: Vec<Sym>;
        if Some(c) == close {
            *pos += 1;
            return Ok(out);
        } else if matches!(c, ')' | ']' | ',') {
            return Err(WordError::Syntax(*pos, format!("unexpected `{c}`")));
        } else if c == '(' {
            *pos += 1;
            atom = parse_seq(names, chars, pos, Some(')'))?;
            prefix = Vec::new();
        } else if c == '[' {
            // commutator [x, y] = x^-1 y^-1 x y
            *pos += 1;
            let x = parse_seq(names, chars, pos, Some(','))?;
            let y = parse_seq(names, chars, pos, Some(']'))?;
            atom = [invert(&x), invert(&y), x, y].concat();
            prefix = Vec::new();
        } else if c == '1' && !chars.get(*pos + 1).is_some_and(|n| n.is_alphanumeric()) {
            *pos += 1;
            atom = Vec::new();
            prefix = Vec::new();
        } else if c.is_alphabetic() || c == '_' {
            let start = *pos;
            while *pos < chars.len() && (chars[*pos].is_alphanumeric() || chars[*pos] == '_') {
                *pos += 1;
            }
            let ident: String = chars[start..*pos].iter().collect();
            let mut run = split_names(names, &ident).ok_or(WordError::Unknown(ident))?;
            // postfix operators bind to the last name of a run
            let last = run.pop().expect("non-empty run");
            prefix = run;
            atom = vec![last];
        } else {
            return Err(WordError::Syntax(*pos, format!("unexpected `{c}`")));
        }
        loop {
            if *pos < chars.len() && chars[*pos] == '\'' {
                *pos += 1;
                atom = invert(&atom);
            } else if *pos < chars.len() && chars[*pos] == '^' {
                *pos += 1;
                let start = *pos;
                if *pos < chars.len() && matches!(chars[*pos], '-' | '+') {
                    *pos += 1;
                }
                while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                    *pos += 1;
                }
                let s: String = chars[start..*pos].iter().collect();
                let k: i64 = s.parse().map_err(|_| WordError::Syntax(start, "expected an integer exponent".into()))?;
                atom = GroupWord::from_syms(atom).pow(k).syms().to_vec();
            } else {
                break;
            }
        }
        out.extend(prefix);
        out.extend(atom);
    }
}

fn invert(syms: &[Sym]) -> Vec<Sym> {
    syms.iter().rev().map(|s| s.inverse()).collect()
}

fn split_names(names: &[String], ident: &str) -> Option<Vec<Sym>> {
    if let Some(i) = names.iter().position(|n| n == ident) {
        return Some(vec![Sym::new(i, false)]);
    }
    let mut out = Vec::new();
    let mut rest = ident;
    while !rest.is_empty() {
        let (i, n) =
            names.iter().enumerate().filter(|(_, n)| rest.starts_with(n.as_str())).max_by_key(|(_, n)| n.len())?;
        out.push(Sym::new(i, false));
        rest = &rest[n.len()..];
    }
    Some(out)
}

/// Word parsing for user-supplied text (CLI arguments, certificates).
pub(crate) fn parse_word_text(
    sys: &RecursionSystem,
    text: &str,
    origin: &str,
    line: usize,
    column: usize,
) -> Result<GroupWord, ParseError> {
    let names: Vec<String> = sys.generators().iter().map(|g| g.name.clone()).collect();
    parse_word_names(&names, text).map_err(|e| {
        let (pos, message) = match e {
            WordError::Unknown(s) => (0, format!("unknown generator `{s}`")),
            WordError::Syntax(p, m) => (p, m),
        };
        ParseError { origin: origin.to_string(), line, column: column + pos, message }
    })
}

fn format_section(sys: &RecursionSystem, w: &GroupWord) -> String {
    sys.format_word(w)
}

/// Canonical text: declaration order, cycles with the least letter first,
/// trivial section lists omitted, backend line only when not `tree`.
pub fn serialize(sys: &RecursionSystem) -> String {
    let alphabet = sys.alphabet();
    let mut out = format!("alphabet: {}\n", alphabet.symbols().join(" "));
    match sys.backend() {
        BackendDescriptor::Tree => {}
        BackendDescriptor::Free => out.push_str("backend: free\n"),
        BackendDescriptor::FreeProduct(factors) => {
            let declared: Vec<&str> = sys.generators().iter().map(|g| g.name.as_str()).collect();
            let orders_form = factors.len() == declared.len()
                && factors.iter().zip(&declared).all(|(f, n)| f.order.is_some() && f.generators == [n.to_string()]);
            if orders_form {
                let orders: Vec<String> = factors.iter().map(|f| f.order.expect("checked").to_string()).collect();
                out.push_str(&format!("backend: free-product(orders: {})\n", orders.join(" ")));
            } else {
                let items: Vec<String> = factors
                    .iter()
                    .map(|f| match f.order {
                        Some(k) => format!("{}^{k}", f.generators[0]),
                        None => f.generators.join(" "),
                    })
                    .collect();
                out.push_str(&format!("backend: free-product(factors: {})\n", items.join(" | ")));
            }
        }
    }
    for g in sys.generators() {
        let mut rhs = String::new();
        for cycle in g.perm.cycles() {
            let syms: Vec<&str> = cycle.iter().map(|&x| alphabet.symbol(x)).collect();
            rhs.push_str(&format!("({})", syms.join(" ")));
        }
        if g.sections.iter().any(|w| !w.is_empty()) {
            let secs: Vec<String> = g.sections.iter().map(|w| format_section(sys, w)).collect();
            rhs.push_str(&format!("({})", secs.join(", ")));
        }
        if rhs.is_empty() {
            rhs.push_str("()");
        }
        out.push_str(&format!("{} = {}\n", g.name, rhs));
    }
    out
}

pub fn to_source_doc(sys: &RecursionSystem) -> SourceDoc {
    SourceDoc::inline(serialize(sys))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASILICA: &str = "alphabet: 0 1\na = (0 1)(1, b)\nb = (1, a)";

    #[test]
    fn parses_basilica() {
        let sys = parse_str(BASILICA).unwrap();
        assert_eq!(sys.degree(), 2);
        assert_eq!(sys.generators().len(), 2);
        let a = &sys.generators()[0];
        assert_eq!(a.perm.images(), &[1, 0]);
        assert_eq!(a.sections[1], GroupWord::gen(1));
        assert_eq!(serialize(&sys), "alphabet: 0 1\na = (0 1)(1, b)\nb = (1, a)\n");
    }

    #[test]
    fn no_generators_is_a_validation_error() {
        assert_eq!(parse_str("alphabet: 0 1").unwrap_err(), Error::Validation(ValidationError::NoGenerators));
    }

    #[test]
    fn parses_gupta_sidki() {
        let sys = parse_str("alphabet: 0 1 2\na = (0 1 2)\nb = (a, a^-1, b)").unwrap();
        let b = &sys.generators()[1];
        assert!(b.perm.is_identity());
        assert_eq!(b.sections[1], GroupWord::gen_inv(0));
        assert!(sys.generators()[0].sections.iter().all(GroupWord::is_empty));
    }

    #[test]
    fn compact_cycles_and_primes() {
        let sys = parse_str("alphabet: 0 1 2\na = (012)(1, 1, a'a')").unwrap();
        assert_eq!(sys.generators()[0].perm.images(), &[1, 2, 0]);
        assert_eq!(sys.generators()[0].sections[2], GroupWord::gen_inv(0).pow(2));
        assert_eq!(serialize(&sys), "alphabet: 0 1 2\na = (0 1 2)(1, 1, a^-1a^-1)\n");
    }

    #[test]
    fn hanoi_serializes_canonically() {
        let sys = parse_str(crate::corpus::HANOI).unwrap();
        let text = serialize(&sys);
        assert!(text.contains("a = (0 1)(1, 1, a)\n"), "{text}");
        assert_eq!(text.lines().filter(|l| l.contains(" = ")).count(), 3);
    }

    #[test]
    fn finitary_generator_omits_sections() {
        let sys = parse_str("alphabet: 0 1\na = (0 1)").unwrap();
        assert_eq!(serialize(&sys), "alphabet: 0 1\na = (0 1)\n");
        let sys = parse_str("alphabet: 0 1\ne = ()").unwrap();
        assert_eq!(serialize(&sys), "alphabet: 0 1\ne = ()\n");
    }

    #[test]
    fn error_positions() {
        let e = parse_str("alphabet: 0 1\na = (0 1)(1, b").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { line: 2, .. })), "{e:?}");
        let e = parse_str("a = (0 1)").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { line: 1, column: 1, .. })));
        let e = parse_str("").unwrap_err();
        assert!(matches!(e, Error::Parse(_)));
        let e = parse_str("alphabet: 0 1\na = (0 1)(1, c)").unwrap_err();
        assert!(matches!(e, Error::Validation(ValidationError::UnknownSymbol { .. })));
        let e = parse_str("alphabet: 0 1\na = (0 2)").unwrap_err();
        assert!(matches!(e, Error::Validation(ValidationError::CycleLetter { .. })));
        let e = parse_str("alphabet: 0 1\na = (0 1)\na = (1, a)").unwrap_err();
        assert!(matches!(e, Error::Validation(ValidationError::DuplicateGenerator(_))));
        let e = parse_str("alphabet: 0 1\na = (1, a, a)").unwrap_err();
        assert!(matches!(e, Error::Validation(ValidationError::SectionCount { .. })));
        let e = parse_str("alphabet: 0 1\na = (0 1)(1, a^x)").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { line: 2, .. })), "{e:?}");
    }

    #[test]
    fn comments_and_backends() {
        let text = "# header\nalphabet: 0 1 2   # letters\nbackend: free-product(orders: 3 3)\n\na = (0 1 2)\nb = (a, a^-1, b) # Gupta-Sidki\n";
        let sys = parse_str(text).unwrap();
        assert_eq!(
            sys.backend(),
            &BackendDescriptor::FreeProduct(vec![FactorSpec::cyclic("a", 3), FactorSpec::cyclic("b", 3)])
        );
        assert!(serialize(&sys).contains("backend: free-product(orders: 3 3)\n"));
        let g = parse_str(crate::corpus::UNIVERSAL_GRIGORCHUK).unwrap();
        assert!(serialize(&g).contains("backend: free-product(factors: a | b c d)\n"));
    }

    #[test]
    fn word_syntax() {
        let sys = parse_str(BASILICA).unwrap();
        let w = sys.parse_word("(ab)^2 b^-1 a^-1 b").unwrap();
        assert_eq!(sys.format_word(&w), "abb");
        assert_eq!(sys.parse_word("1").unwrap(), GroupWord::empty());
        assert_eq!(sys.parse_word("a * a'").unwrap(), GroupWord::empty());
        assert!(sys.parse_word("abc").is_err());
        assert!(sys.parse_word("(a").is_err());
        let c = sys.parse_word("[b, a^-1 b a]").unwrap();
        assert_eq!(sys.format_word(&c), "b^-1a^-1b^-1aba^-1ba");
        assert_eq!(sys.parse_word("[a, b]^-1").unwrap(), sys.parse_word("[b, a]").unwrap());
        assert!(sys.parse_word("[a b]").is_err());
        assert!(sys.parse_word("a, b").is_err());
    }
}
