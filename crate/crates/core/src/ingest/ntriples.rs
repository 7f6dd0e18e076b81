//! Line parser for N-Triples.
//!
//! Each line is `<subject> <predicate> <object> .` with optional trailing
//! comment. Terms come back in the canonical lexical forms used by
//! [`Term`](super::Term): escapes are decoded, literals are re-escaped
//! canonically, `xsd:string` datatypes are dropped and language tags are
//! lowercased.
//!
//! Reference: <https://www.w3.org/TR/n-triples/>

use std::borrow::Cow;

use super::term::{escape_literal_into, Term, TermKind};

const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTerm<'a> {
    pub kind: TermKind,
    pub lexical: Cow<'a, str>,
}

impl RawTerm<'_> {
    pub fn into_term(self) -> Term {
        Term {
            kind: self.kind,
            lexical: self.lexical.into_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTriple<'a> {
    pub subject: RawTerm<'a>,
    pub predicate: RawTerm<'a>,
    pub object: RawTerm<'a>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "column {}: {}", self.column + 1, self.message)
    }
}

impl std::error::Error for SyntaxError {}

type ParseResult<T> = Result<T, SyntaxError>;

/// Parses one line. Blank lines and comment-only lines give `Ok(None)`.
pub fn parse_line(line: &str) -> ParseResult<Option<RawTriple<'_>>> {
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some(b'#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some(b'<') => cur.iri()?,
        Some(b'_') => cur.blank()?,
        _ => return Err(cur.err("expected IRI or blank node as subject")),
    };
    cur.skip_ws();
    let predicate = match cur.peek() {
        Some(b'<') => cur.iri()?,
        _ => return Err(cur.err("expected IRI as predicate")),
    };
    cur.skip_ws();
    let object = match cur.peek() {
        Some(b'<') => cur.iri()?,
        Some(b'_') => cur.blank()?,
        Some(b'"') => cur.literal()?,
        _ => return Err(cur.err("expected IRI, blank node or literal as object")),
    };
    cur.skip_ws();
    if cur.peek() != Some(b'.') {
        return Err(cur.err("expected '.' after object"));
    }
    cur.pos += 1;
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some(b'#') {
        return Err(cur.err("unexpected content after '.'"));
    }
    Ok(Some(RawTriple {
        subject,
        predicate,
        object,
    }))
}

/// Parses a single term in N-Triples syntax, e.g. `<http://x>` or `_:b0`.
/// Surrounding whitespace is ignored.
pub fn parse_term(text: &str) -> ParseResult<Term> {
    let mut cur = Cursor { src: text, pos: 0 };
    cur.skip_ws();
    let term = match cur.peek() {
        Some(b'<') => cur.iri()?,
        Some(b'_') => cur.blank()?,
        Some(b'"') => cur.literal()?,
        _ => return Err(cur.err("expected IRI, blank node or literal")),
    };
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.err("unexpected content after term"));
    }
    Ok(term.into_term())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: &str) -> SyntaxError {
        SyntaxError {
            column: self.pos,
            message: message.to_owned(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn iri(&mut self) -> ParseResult<RawTerm<'a>> {
        debug_assert_eq!(self.peek(), Some(b'<'));
        self.pos += 1;
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut escaped = false;
        loop {
            match bytes.get(self.pos) {
                None => return Err(self.err("unterminated IRI")),
                Some(b'>') => break,
                Some(b'\\') => {
                    escaped = true;
                    self.pos += 1;
                    match bytes.get(self.pos) {
                        Some(b'u') => self.pos += 5,
                        Some(b'U') => self.pos += 9,
                        _ => return Err(self.err("invalid escape in IRI")),
                    }
                }
                Some(&c) if c <= 0x20 || b"<\"{}|^`".contains(&c) => {
                    return Err(self.err("illegal character in IRI"))
                }
                Some(_) => self.pos += 1,
            }
        }
        if self.pos > self.src.len() {
            return Err(self.err("truncated escape in IRI"));
        }
        let raw = &self.src[start..self.pos];
        self.pos += 1;
        let lexical = if escaped {
            Cow::Owned(unescape(raw, false).map_err(|m| SyntaxError {
                column: start,
                message: m,
            })?)
        } else {
            Cow::Borrowed(raw)
        };
        Ok(RawTerm {
            kind: TermKind::Iri,
            lexical,
        })
    }

    fn blank(&mut self) -> ParseResult<RawTerm<'a>> {
        if !self.src[self.pos..].starts_with("_:") {
            return Err(self.err("expected '_:'"));
        }
        self.pos += 2;
        let start = self.pos;
        let rest = &self.src[start..];
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            let ok = if i == 0 {
                c.is_alphanumeric() || c == '_'
            } else {
                c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{00B7}')
            };
            if !ok {
                break;
            }
            end = i + c.len_utf8();
        }
        // A label may not end with '.', which then belongs to the statement.
        while end > 0 && rest.as_bytes()[end - 1] == b'.' {
            end -= 1;
        }
        if end == 0 {
            return Err(self.err("empty blank node label"));
        }
        self.pos = start + end;
        Ok(RawTerm {
            kind: TermKind::BlankNode,
            lexical: Cow::Borrowed(&rest[..end]),
        })
    }

    fn literal(&mut self) -> ParseResult<RawTerm<'a>> {
        debug_assert_eq!(self.peek(), Some(b'"'));
        self.pos += 1;
        let start = self.pos;
        let bytes = self.src.as_bytes();
        loop {
            match bytes.get(self.pos) {
                None | Some(b'\n' | b'\r') => return Err(self.err("unterminated literal")),
                Some(b'"') => break,
                Some(b'\\') => self.pos += 2,
                Some(_) => self.pos += 1,
            }
        }
        let value = unescape(&self.src[start..self.pos], true).map_err(|m| SyntaxError {
            column: start,
            message: m,
        })?;
        self.pos += 1;

        let mut lexical = String::with_capacity(value.len() + 2);
        lexical.push('"');
        escape_literal_into(&value, &mut lexical);
        lexical.push('"');

        match self.peek() {
            Some(b'@') => {
                self.pos += 1;
                let tag_start = self.pos;
                let mut seen_dash = false;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphabetic() || (seen_dash && c.is_ascii_digit()) {
                        self.pos += 1;
                    } else if c == b'-' && self.pos > tag_start {
                        seen_dash = true;
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let tag = &self.src[tag_start..self.pos];
                if tag.is_empty() || tag.ends_with('-') {
                    return Err(self.err("invalid language tag"));
                }
                lexical.push('@');
                lexical.push_str(&tag.to_ascii_lowercase());
            }
            Some(b'^') => {
                if !self.src[self.pos..].starts_with("^^<") {
                    return Err(self.err("expected '^^<' before datatype IRI"));
                }
                self.pos += 2;
                let datatype = self.iri()?;
                if datatype.lexical != XSD_STRING {
                    lexical.push_str("^^<");
                    lexical.push_str(&datatype.lexical);
                    lexical.push('>');
                }
            }
            _ => {}
        }
        Ok(RawTerm {
            kind: TermKind::Literal,
            lexical: Cow::Owned(lexical),
        })
    }
}

/// Decodes `\uXXXX` / `\UXXXXXXXX` and, when `echar` is set, the string
/// escapes `\t \b \n \r \f \" \' \\`.
fn unescape(raw: &str, echar: bool) -> Result<String, String> {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let e = chars.next().ok_or("dangling backslash")?;
        let width = match e {
            'u' => 4,
            'U' => 8,
            't' if echar => {
                out.push('\t');
                continue;
            }
            'b' if echar => {
                out.push('\u{8}');
                continue;
            }
            'n' if echar => {
                out.push('\n');
                continue;
            }
            'r' if echar => {
                out.push('\r');
                continue;
            }
            'f' if echar => {
                out.push('\u{c}');
                continue;
            }
            '"' | '\'' | '\\' if echar => {
                out.push(e);
                continue;
            }
            other => return Err(format!("invalid escape '\\{other}'")),
        };
        let hex: String = chars.by_ref().take(width).collect();
        if hex.len() != width {
            return Err("truncated unicode escape".into());
        }
        let code = u32::from_str_radix(&hex, 16).map_err(|_| format!("bad hex '{hex}'"))?;
        out.push(char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(line: &str) -> (Term, Term, Term) {
        let t = parse_line(line).unwrap().unwrap();
        (
            t.subject.into_term(),
            t.predicate.into_term(),
            t.object.into_term(),
        )
    }

    #[test]
    fn parses_iri_triple() {
        let (s, p, o) = triple("<http://a> <http://p> <http://b> .");
        assert_eq!(s, Term::iri("http://a"));
        assert_eq!(p, Term::iri("http://p"));
        assert_eq!(o, Term::iri("http://b"));
    }

    #[test]
    fn relative_iris_and_tight_spacing() {
        let (s, _, o) = triple("<a><eq><b>.");
        assert_eq!(s, Term::iri("a"));
        assert_eq!(o, Term::iri("b"));
    }

    #[test]
    fn skips_blank_and_comment_lines() {
        assert_eq!(parse_line("").unwrap(), None);
        assert_eq!(parse_line("   \t").unwrap(), None);
        assert_eq!(parse_line("# comment").unwrap(), None);
    }

    #[test]
    fn blank_nodes_and_trailing_dot() {
        let (s, _, o) = triple("_:b1 <http://p> _:x.y.");
        assert_eq!(s, Term::blank("b1"));
        assert_eq!(o, Term::blank("x.y"));
    }

    #[test]
    fn literal_forms_are_canonical() {
        let (_, _, o) = triple(r#"<s> <p> "a\tbA" ."#);
        assert_eq!(o.lexical, "\"a\tbA\"");
        let (_, _, o) = triple(r#"<s> <p> "x"@EN-gb ."#);
        assert_eq!(o.lexical, "\"x\"@en-gb");
        let (_, _, o) =
            triple(r#"<s> <p> "1"^^<http://www.w3.org/2001/XMLSchema#integer> ."#);
        assert_eq!(
            o.lexical,
            "\"1\"^^<http://www.w3.org/2001/XMLSchema#integer>"
        );
        let (_, _, o) =
            triple(r#"<s> <p> "s"^^<http://www.w3.org/2001/XMLSchema#string> ."#);
        assert_eq!(o.lexical, "\"s\"");
        let (_, _, o) = triple(r#"<s> <p> "say \"hi\"\\" # trailing"#.replace("# trailing", ". # c").as_str());
        assert_eq!(o.lexical, r#""say \"hi\"\\""#);
    }

    #[test]
    fn iri_unicode_escape() {
        let (s, _, _) = triple(r"<http://x/\u00E9> <p> <o> .");
        assert_eq!(s.lexical, "http://x/é");
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "<a> <b> .",
            "<a> <b> <c>",
            "\"lit\" <p> <o> .",
            "<a> _:b <c> .",
            "<a b> <p> <o> .",
            "<a> <p> \"unterminated .",
            "<a> <p> <o> . junk",
            "<a> <p> \"x\"@ .",
        ] {
            assert!(parse_line(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn parse_term_round_trips_display() {
        for t in [
            Term::iri("http://x/a"),
            Term::blank("f0_b1"),
            Term::literal("tab\there \"q\""),
        ] {
            assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        }
    }
}
