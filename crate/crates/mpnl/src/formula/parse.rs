//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Grammar, loosest to tightest: `->`, `|`, `&`, then the unary prefixes
//! `~`, `<r>`, `<l>`, `[r]`, `[l]`. Binary operators associate to the left.

use super::Formula;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at {pos}: found {found}, expected {}", expected.join(", "))]
pub struct ParseError {
    pub pos: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    LenKw,
    Pi,
    True,
    False,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DiamondR,
    DiamondL,
    BoxR,
    BoxL,
    LParen,
    RParen,
    Lt,
    Le,
    EqOp,
    Ge,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::LenKw => "`len`".into(),
            Tok::Pi => "`pi`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DiamondR => "`<r>`".into(),
            Tok::DiamondL => "`<l>`".into(),
            Tok::BoxR => "`[r]`".into(),
            Tok::BoxL => "`[l]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::EqOp => "`=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'~' => {
                toks.push((i, Tok::Tilde));
                i += 1;
            }
            b'&' => {
                toks.push((i, Tok::Amp));
                i += 1;
            }
            b'|' => {
                toks.push((i, Tok::Pipe));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return Err(ParseError {
                        pos: i,
                        found: "`-`".into(),
                        expected: vec!["`->`"],
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'r') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((i, Tok::DiamondR));
                    i += 3;
                } else if bytes.get(i + 1) == Some(&b'l') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((i, Tok::DiamondL));
                    i += 3;
                } else if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((i, Tok::Le));
                    i += 2;
                } else {
                    toks.push((i, Tok::Lt));
                    i += 1;
                }
            }
            b'>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((i, Tok::Ge));
                    i += 2;
                } else {
                    toks.push((i, Tok::Gt));
                    i += 1;
                }
            }
            b'=' => {
                toks.push((i, Tok::EqOp));
                i += 1;
            }
            b'[' => {
                if bytes.get(i + 1) == Some(&b'r') && bytes.get(i + 2) == Some(&b']') {
                    toks.push((i, Tok::BoxR));
                    i += 3;
                } else if bytes.get(i + 1) == Some(&b'l') && bytes.get(i + 2) == Some(&b']') {
                    toks.push((i, Tok::BoxL));
                    i += 3;
                } else {
                    return Err(ParseError {
                        pos: i,
                        found: "`[`".into(),
                        expected: vec!["`[r]`", "`[l]`"],
                    });
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let s = &text[start..i];
                let n: u64 = s.parse().map_err(|_| ParseError {
                    pos: start,
                    found: format!("`{s}`"),
                    expected: vec!["integer fitting in 64 bits"],
                })?;
                toks.push((start, Tok::Int(n)));
            }
            b'a'..=b'z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase()
                        || bytes[i].is_ascii_digit()
                        || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "len" => Tok::LenKw,
                    "pi" => Tok::Pi,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((start, tok));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    found: format!("`{}`", &text[i..i + 1]),
                    expected: vec!["formula"],
                });
            }
        }
    }
    toks.push((text.len(), Tok::Eof));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        self.at += 1;
        t
    }

    fn err(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            pos: self.pos(),
            found: self.peek().describe(),
            expected,
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.or()?;
        while *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.or()?;
            f = Formula::implies(f, rhs);
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::DiamondR => {
                self.bump();
                Ok(Formula::diamond_r(self.unary()?))
            }
            Tok::DiamondL => {
                self.bump();
                Ok(Formula::diamond_l(self.unary()?))
            }
            Tok::BoxR => {
                self.bump();
                Ok(Formula::box_r(self.unary()?))
            }
            Tok::BoxL => {
                self.bump();
                Ok(Formula::box_l(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Prop(name))
            }
            Tok::Pi => {
                self.bump();
                Ok(Formula::Pi)
            }
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LenKw => {
                self.bump();
                let cmp = self.bump();
                let make: fn(u64) -> Formula = match cmp {
                    Tok::Lt => Formula::LenLt,
                    Tok::Le => Formula::LenLe,
                    Tok::EqOp => Formula::LenEq,
                    Tok::Ge => Formula::LenGe,
                    Tok::Gt => Formula::LenGt,
                    _ => {
                        self.at -= 1;
                        return Err(self.err(vec!["`<`", "`<=`", "`=`", "`>=`", "`>`"]));
                    }
                };
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.bump();
                        Ok(make(n))
                    }
                    _ => Err(self.err(vec!["integer"])),
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.implies()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.err(vec!["`)`"]));
                }
                self.bump();
                Ok(f)
            }
            _ => Err(self.err(vec!["formula"])),
        }
    }
}

/// Parses the ASCII syntax into a [`Formula`] (surface forms preserved).
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let f = p.implies()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(vec!["end of input", "operator"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_precedence() {
        let f = parse("len<2 & <r> p").unwrap();
        assert_eq!(
            f,
            Formula::and(Formula::LenLt(2), Formula::diamond_r(Formula::prop("p")))
        );
    }

    #[test]
    fn double_negation_is_preserved() {
        assert_eq!(
            parse("~~p").unwrap(),
            Formula::neg(Formula::neg(Formula::prop("p")))
        );
    }

    #[test]
    fn missing_operand_is_an_error() {
        let e = parse("<r>").unwrap_err();
        assert_eq!(e.pos, 3);
        assert!(e.expected.contains(&"formula"));
    }

    #[test]
    fn binary_ops_are_left_associative() {
        assert_eq!(
            parse("p -> q -> r").unwrap(),
            Formula::implies(
                Formula::implies(Formula::prop("p"), Formula::prop("q")),
                Formula::prop("r")
            )
        );
        assert_eq!(
            parse("p | q | r").unwrap(),
            Formula::or(
                Formula::or(Formula::prop("p"), Formula::prop("q")),
                Formula::prop("r")
            )
        );
    }

    #[test]
    fn len_variants() {
        assert_eq!(parse("len<=3").unwrap(), Formula::LenLe(3));
        assert_eq!(parse("len=0").unwrap(), Formula::LenEq(0));
        assert_eq!(parse("len>=2").unwrap(), Formula::LenGe(2));
        assert_eq!(parse("len>7").unwrap(), Formula::LenGt(7));
    }

    #[test]
    fn roundtrip_examples() {
        for s in [
            "p",
            "~~p",
            "len<2 & <r>p",
            "(p | q) & ~r",
            "[r](p -> <l>len<3)",
            "p -> q -> r | s & t",
        ] {
            let f = parse(s).unwrap();
            let g = parse(&f.to_string()).unwrap();
            assert_eq!(f, g, "roundtrip failed for {s}");
        }
    }
}
