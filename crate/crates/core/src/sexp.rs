use std::fmt;

use itertools::Itertools;

use crate::error::{Result, WbError};

/// A minimal S-expression value, used for element serialization and for the
/// command-line input format.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(s: impl Into<String>) -> Sexp {
        Sexp::Atom(s.into())
    }

    pub fn list(items: Vec<Sexp>) -> Sexp {
        Sexp::List(items)
    }

    pub fn nat(n: usize) -> Sexp {
        Sexp::Atom(n.to_string())
    }

    pub fn as_atom(&self) -> Result<&str> {
        match self {
            Sexp::Atom(s) => Ok(s),
            Sexp::List(_) => Err(WbError::Parse("expected an atom, found a list".into())),
        }
    }

    pub fn as_list(&self) -> Result<&[Sexp]> {
        match self {
            Sexp::List(items) => Ok(items),
            Sexp::Atom(a) => Err(WbError::Parse(format!("expected a list, found atom `{a}`"))),
        }
    }

    pub fn as_nat(&self) -> Result<usize> {
        self.as_atom()?
            .parse()
            .map_err(|_| WbError::Parse(format!("expected a natural number, found `{self}`")))
    }

    /// A list whose head is the given keyword; returns the remaining items.
    pub fn as_tagged(&self, tag: &str) -> Result<&[Sexp]> {
        let items = self.as_list()?;
        match items.first() {
            Some(Sexp::Atom(head)) if head == tag => Ok(&items[1..]),
            _ => Err(WbError::Parse(format!("expected a `({tag} …)` form, found `{self}`"))),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s) => f.write_str(&quote(s)),
            Sexp::List(items) => write!(f, "({})", items.iter().join(" ")),
        }
    }
}

/// Quotes a token if it contains delimiters; bare tokens print as-is.
pub fn quote(s: &str) -> String {
    if !s.is_empty()
        && s.chars()
            .all(|c| !c.is_whitespace() && c != '(' && c != ')' && c != '"' && c != '\\' && c != ';')
    {
        s.to_string()
    } else {
        let escaped: String = s
            .chars()
            .flat_map(|c| match c {
                '"' | '\\' => vec!['\\', c],
                _ => vec![c],
            })
            .collect();
        format!("\"{escaped}\"")
    }
}

/// Parses a single S-expression; trailing input is an error. `;` starts a
/// line comment.
pub fn parse(input: &str) -> Result<Sexp> {
    let mut parser = Parser {
        chars: input.chars().collect(),
        pos: 0,
    };
    parser.skip_trivia();
    let value = parser.value()?;
    parser.skip_trivia();
    if parser.pos != parser.chars.len() {
        return Err(WbError::Parse(format!(
            "unexpected trailing input at offset {}",
            parser.pos
        )));
    }
    Ok(value)
}

/// Parses a sequence of S-expressions (for fixture files).
pub fn parse_many(input: &str) -> Result<Vec<Sexp>> {
    let mut parser = Parser {
        chars: input.chars().collect(),
        pos: 0,
    };
    let mut out = Vec::new();
    loop {
        parser.skip_trivia();
        if parser.pos == parser.chars.len() {
            return Ok(out);
        }
        out.push(parser.value()?);
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += 1;
            } else if c == ';' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn value(&mut self) -> Result<Sexp> {
        match self.peek() {
            None => Err(WbError::Parse("unexpected end of input".into())),
            Some('(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => return Err(WbError::Parse("unclosed `(`".into())),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Sexp::List(items));
                        }
                        Some(_) => items.push(self.value()?),
                    }
                }
            }
            Some(')') => Err(WbError::Parse(format!("unmatched `)` at offset {}", self.pos))),
            Some('"') => {
                self.pos += 1;
                let mut s = String::new();
                loop {
                    match self.peek() {
                        None => return Err(WbError::Parse("unclosed string literal".into())),
                        Some('"') => {
                            self.pos += 1;
                            return Ok(Sexp::Atom(s));
                        }
                        Some('\\') => {
                            self.pos += 1;
                            match self.peek() {
                                Some(c @ ('"' | '\\')) => {
                                    s.push(c);
                                    self.pos += 1;
                                }
                                _ => return Err(WbError::Parse("bad escape in string".into())),
                            }
                        }
                        Some(c) => {
                            s.push(c);
                            self.pos += 1;
                        }
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' || c == ';' {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(Sexp::Atom(self.chars[start..self.pos].iter().collect()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for src in [
            "(op gamma (c 2) (c 2) (c 1))",
            "x",
            "(a (b c) () \"two words\")",
            "(nested ((deeply (1 2 3))))",
        ] {
            let v = parse(src).unwrap();
            assert_eq!(parse(&v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let v = parse("; header\n ( a ; mid\n b )\n").unwrap();
        assert_eq!(v, Sexp::list(vec![Sexp::atom("a"), Sexp::atom("b")]));
        assert_eq!(parse_many("a (b) ; tail\n c").unwrap().len(), 3);
    }

    #[test]
    fn errors_are_parse_errors() {
        for bad in ["(a", ")", "(a))", "\"open", ""] {
            assert!(matches!(parse(bad), Err(WbError::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn tagged_access() {
        let v = parse("(perm 2 1)").unwrap();
        let rest = v.as_tagged("perm").unwrap();
        assert_eq!(rest[0].as_nat().unwrap(), 2);
        assert!(v.as_tagged("op").is_err());
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("plain"), "plain");
        assert_eq!(quote("two words"), "\"two words\"");
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
        assert_eq!(quote(""), "\"\"");
    }
}
