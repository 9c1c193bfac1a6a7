//! The self-describing text document format used for problem files and
//! results: `key: value` lines, inline bracketed lists, and block lists of
//! `- item` continuation lines. Versioned with a `format: 1` header.
//!
//! ```text
//! format: 1
//! kind: instance
//! mode: cyclo
//! weights: [2, 2, 2]
//! xi:
//!   - [zeta(1/5), zeta(-1/5)]
//!   - [zeta(1/7), zeta(-1/7)]
//!   - [zeta(1/11), zeta(-1/11)]
//! alpha: [2, 1, 1, 1]
//! ```
//!
//! Tokens are integers, atoms (unquoted runs without whitespace, commas or
//! brackets — `zeta(1/5)`, `g1^2*g3^-1`, `1.5+0.5i`) and double-quoted
//! strings. `#` starts a comment. Parse errors carry line and column.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Atom(String),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Atom(_) => "atom",
            Value::Str(_) => "string",
            Value::List(_) => "list",
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Atom(s) | Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DocError {
    pub pos: Option<Pos>,
    pub msg: String,
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(pos) => write!(f, "{pos}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

impl std::error::Error for DocError {}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, DocError> {
    Err(DocError {
        pos: Some(pos),
        msg: msg.into(),
    })
}

/// An ordered key/value document.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub entries: Vec<(String, Value, Pos)>,
}

impl Document {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v)
    }

    pub fn pos_of(&self, key: &str) -> Option<Pos> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, _, p)| *p)
    }

    pub fn require(&self, key: &str) -> Result<&Value, DocError> {
        self.get(key).ok_or(DocError {
            pos: None,
            msg: format!("missing required key '{key}'"),
        })
    }

    pub fn push(&mut self, key: &str, value: Value) {
        self.entries.push((
            key.to_string(),
            value,
            Pos { line: 0, col: 0 },
        ));
    }
}

struct Lexer<'a> {
    text: &'a [u8],
    idx: usize,
    line: usize,
    line_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBracket,
    RBracket,
    Comma,
    Int(i64),
    Atom(String),
    Str(String),
    End,
}

impl<'a> Lexer<'a> {
    fn new(line_text: &'a str, line: usize, col0: usize) -> Self {
        Lexer {
            text: line_text.as_bytes(),
            idx: 0,
            line,
            line_start: col0,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.line_start + self.idx + 1,
        }
    }

    fn next_tok(&mut self) -> Result<(Tok, Pos), DocError> {
        while self.idx < self.text.len() && (self.text[self.idx] as char).is_whitespace() {
            self.idx += 1;
        }
        let pos = self.pos();
        if self.idx >= self.text.len() || self.text[self.idx] == b'#' {
            return Ok((Tok::End, pos));
        }
        let c = self.text[self.idx];
        match c {
            b'[' => {
                self.idx += 1;
                Ok((Tok::LBracket, pos))
            }
            b']' => {
                self.idx += 1;
                Ok((Tok::RBracket, pos))
            }
            b',' => {
                self.idx += 1;
                Ok((Tok::Comma, pos))
            }
            b'"' => {
                self.idx += 1;
                let start = self.idx;
                while self.idx < self.text.len() && self.text[self.idx] != b'"' {
                    self.idx += 1;
                }
                if self.idx >= self.text.len() {
                    return err(pos, "unterminated string");
                }
                let s = std::str::from_utf8(&self.text[start..self.idx])
                    .map_err(|_| DocError {
                        pos: Some(pos),
                        msg: "invalid UTF-8 in string".into(),
                    })?
                    .to_string();
                self.idx += 1;
                Ok((Tok::Str(s), pos))
            }
            _ => {
                let start = self.idx;
                while self.idx < self.text.len() {
                    let c = self.text[self.idx];
                    if c == b'[' || c == b']' || c == b',' || c == b'#' || (c as char).is_whitespace()
                    {
                        break;
                    }
                    self.idx += 1;
                }
                let s = std::str::from_utf8(&self.text[start..self.idx])
                    .map_err(|_| DocError {
                        pos: Some(pos),
                        msg: "invalid UTF-8 in atom".into(),
                    })?
                    .to_string();
                match s.parse::<i64>() {
                    Ok(i) => Ok((Tok::Int(i), pos)),
                    Err(_) => Ok((Tok::Atom(s), pos)),
                }
            }
        }
    }

    fn parse_value(&mut self) -> Result<Value, DocError> {
        let (tok, pos) = self.next_tok()?;
        self.parse_value_from(tok, pos)
    }

    fn parse_value_from(&mut self, tok: Tok, pos: Pos) -> Result<Value, DocError> {
        match tok {
            Tok::Int(i) => Ok(Value::Int(i)),
            Tok::Atom(s) => Ok(Value::Atom(s)),
            Tok::Str(s) => Ok(Value::Str(s)),
            Tok::LBracket => {
                let mut items = Vec::new();
                loop {
                    let (tok, p) = self.next_tok()?;
                    match tok {
                        Tok::RBracket => return Ok(Value::List(items)),
                        Tok::End => return err(p, "unterminated '['"),
                        Tok::Comma => {
                            if items.is_empty() {
                                return err(p, "unexpected ','");
                            }
                        }
                        other => items.push(self.parse_value_from(other, p)?),
                    }
                }
            }
            Tok::RBracket => err(pos, "unexpected ']'"),
            Tok::Comma => err(pos, "unexpected ','"),
            Tok::End => err(pos, "expected a value"),
        }
    }

    fn expect_end(&mut self) -> Result<(), DocError> {
        let (tok, pos) = self.next_tok()?;
        if tok == Tok::End {
            Ok(())
        } else {
            err(pos, format!("unexpected trailing content: {tok:?}"))
        }
    }
}

/// Parses a whole document.
pub fn parse(text: &str) -> Result<Document, DocError> {
    let mut doc = Document::default();
    // key currently accepting `- item` lines, if any
    let mut open_block: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim_start();
        let indent = raw.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("- ").or(if trimmed == "-" {
            Some("")
        } else {
            None
        }) {
            let Some(slot) = open_block else {
                return err(
                    Pos {
                        line,
                        col: indent + 1,
                    },
                    "block item without a preceding 'key:' line",
                );
            };
            let mut lex = Lexer::new(rest, line, indent + 2);
            let value = lex.parse_value()?;
            lex.expect_end()?;
            match &mut doc.entries[slot].1 {
                Value::List(items) => items.push(value),
                _ => unreachable!("open blocks are lists"),
            }
            continue;
        }
        let Some((key_part, rest)) = trimmed.split_once(':') else {
            return err(
                Pos {
                    line,
                    col: indent + 1,
                },
                "expected 'key: value'",
            );
        };
        let key = key_part.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return err(
                Pos {
                    line,
                    col: indent + 1,
                },
                format!("invalid key '{key}'"),
            );
        }
        let pos = Pos {
            line,
            col: indent + 1,
        };
        if doc.get(key).is_some() {
            return err(pos, format!("duplicate key '{key}'"));
        }
        let mut lex = Lexer::new(rest, line, indent + key_part.len() + 1);
        let (tok, tpos) = lex.next_tok()?;
        if tok == Tok::End {
            // block list: subsequent `- item` lines append here
            doc.entries.push((key.to_string(), Value::List(Vec::new()), pos));
            open_block = Some(doc.entries.len() - 1);
        } else {
            let value = lex.parse_value_from(tok, tpos)?;
            lex.expect_end()?;
            doc.entries.push((key.to_string(), value, pos));
            open_block = None;
        }
    }
    Ok(doc)
}

fn atom_needs_quoting(s: &str) -> bool {
    s.is_empty()
        || s.parse::<i64>().is_ok()
        || s.chars().any(|c| {
            c.is_whitespace() || c == '[' || c == ']' || c == ',' || c == '#' || c == '"'
        })
}

fn render_value(v: &Value, out: &mut String) {
    match v {
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Atom(s) => {
            if atom_needs_quoting(s) {
                out.push('"');
                out.push_str(s);
                out.push('"');
            } else {
                out.push_str(s);
            }
        }
        Value::Str(s) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                render_value(item, out);
            }
            out.push(']');
        }
    }
}

/// Renders a document. Lists of lists print in block form, scalars and
/// flat lists inline.
pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    for (key, value, _) in &doc.entries {
        match value {
            Value::List(items)
                if !items.is_empty() && items.iter().all(|i| matches!(i, Value::List(_))) =>
            {
                out.push_str(key);
                out.push_str(":\n");
                for item in items {
                    out.push_str("  - ");
                    render_value(item, &mut out);
                    out.push('\n');
                }
            }
            _ => {
                out.push_str(key);
                out.push_str(": ");
                render_value(value, &mut out);
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_and_lists() {
        let doc = parse(
            "format: 1\nkind: instance # trailing comment\nweights: [2, 2]\nnote: \"two words\"\n",
        )
        .unwrap();
        assert_eq!(doc.get("format"), Some(&Value::Int(1)));
        assert_eq!(doc.get("kind"), Some(&Value::Atom("instance".into())));
        assert_eq!(
            doc.get("weights"),
            Some(&Value::List(vec![Value::Int(2), Value::Int(2)]))
        );
        assert_eq!(doc.get("note"), Some(&Value::Str("two words".into())));
    }

    #[test]
    fn parses_block_lists() {
        let doc = parse("xi:\n  - [a, b]\n  - [c]\nalpha: [1]\n").unwrap();
        let xi = doc.get("xi").unwrap().as_list().unwrap();
        assert_eq!(xi.len(), 2);
        assert_eq!(xi[1], Value::List(vec![Value::Atom("c".into())]));
        assert_eq!(doc.get("alpha").unwrap().as_list().unwrap().len(), 1);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("weights: [2, 2\n").unwrap_err();
        assert_eq!(e.pos.map(|p| p.line), Some(1));
        let e = parse("  - [1]\n").unwrap_err();
        assert!(e.msg.contains("block item"));
        let e = parse("a: 1\na: 2\n").unwrap_err();
        assert!(e.msg.contains("duplicate"));
        let e = parse("just some text\n").unwrap_err();
        assert_eq!(e.pos.map(|p| p.line), Some(1));
    }

    #[test]
    fn round_trips() {
        let text = "format: 1\nxi:\n  - [zeta(1/5), -1/2]\n  - [g1^2*g3^-1]\nalpha: [2, 1, 0]\nmsg: \"has spaces\"\n";
        let doc = parse(text).unwrap();
        let rendered = render(&doc);
        let doc2 = parse(&rendered).unwrap();
        assert_eq!(doc.entries.len(), doc2.entries.len());
        for ((k1, v1, _), (k2, v2, _)) in doc.entries.iter().zip(&doc2.entries) {
            assert_eq!(k1, k2);
            assert_eq!(v1, v2);
        }
    }

    #[test]
    fn nested_inline_lists() {
        let doc = parse("m: [[1, 2], [3, 4]]\n").unwrap();
        let m = doc.get("m").unwrap().as_list().unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0], Value::List(vec![Value::Int(1), Value::Int(2)]));
    }
}
