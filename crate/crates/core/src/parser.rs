//! Concrete syntax.
//!
//! ```text
//! phi  ::= "true" | "false" | atom | "~" phi | phi "&" phi | phi "|" phi
//!        | phi "^" phi | phi "->" phi | phi "<->" phi
//!        | "B" agent phi | "K" agent phi | "W" agent phi | "O" agent phi
//!        | "[" "+" agent phi "]" phi | "(" phi ")"
//! atom ::= ident [ "(" ident { "," ident } ")" ]
//! ```
//!
//! Binding strength, tightest first: prefix operators, `&`, `|`, `^`, `->`,
//! `<->`. Implication associates to the right, the rest to the left.

use std::fmt;

use thiserror::Error;

use crate::formula::{Agent, AtomId, Formula, Kind};
use crate::instance::{InstanceError, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: usize, col: usize, expected: Vec<String>, found: String },
    #[error("{line}:{col}: agent ids are positive integers, found {found}")]
    Agent { line: usize, col: usize, found: String },
    #[error("{line}:{col}: operand of {op} must be free of K, W, O and expansions")]
    NotExplicit { line: usize, col: usize, op: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Tilde,
    Amp,
    Bar,
    Caret,
    Arrow,
    DArrow,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Plus,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DArrow => f.write_str("`<->`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '~' => Some(Tok::Tilde),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '+' => Some(Tok::Plus),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        let (tok, len) = if let Some(t) = single {
            (t, 1)
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            (Tok::Arrow, 2)
        } else if c == '<' && chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
            (Tok::DArrow, 3)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            // digits directly followed by letters form an identifier such as `2nd`
            if j < chars.len() && is_ident_char(chars[j]) {
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            } else {
                (Tok::Int(chars[i..j].iter().collect()), j - i)
            }
        } else if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            return Err(ParseError::Syntax {
                line: l0,
                col: c0,
                expected: vec!["a formula token".into()],
                found: format!("`{c}`"),
            });
        };
        out.push(Spanned { tok, line: l0, col: c0 });
        i += len;
        col += len;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 6] = ["B", "K", "W", "O", "true", "false"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let name = tok.to_string();
            self.fail(&[&name])
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.xor()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.or()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let rhs = self.or()?;
            lhs = Formula::xor(lhs, rhs);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.prefix()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.prefix()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn agent(&mut self) -> Result<Agent, ParseError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Int(s) => match s.parse::<u32>() {
                Ok(n) if n >= 1 => {
                    self.bump();
                    Ok(Agent(n))
                }
                _ => Err(ParseError::Agent { line, col, found: s }),
            },
            _ => self.fail(&["agent id"]),
        }
    }

    fn explicit_operand(&mut self, op: &str) -> Result<Formula, ParseError> {
        let (line, col) = self.here();
        let f = self.prefix()?;
        if !f.is_l0() {
            return Err(ParseError::NotExplicit { line, col, op: op.into() });
        }
        Ok(f)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.prefix()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::LBrack => {
                self.bump();
                self.expect(Tok::Plus)?;
                let i = self.agent()?;
                let (line, col) = self.here();
                let info = self.formula()?;
                if !info.is_l0() {
                    return Err(ParseError::NotExplicit { line, col, op: "[+]".into() });
                }
                self.expect(Tok::RBrack)?;
                let body = self.prefix()?;
                Ok(Formula::expand(i, info, body))
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    self.bump();
                    Ok(Formula::top())
                }
                "false" => {
                    self.bump();
                    Ok(Formula::bottom())
                }
                "B" => {
                    self.bump();
                    let i = self.agent()?;
                    Ok(Formula::explicit(i, self.explicit_operand("B")?))
                }
                "K" | "W" | "O" => {
                    self.bump();
                    let i = self.agent()?;
                    let body = self.prefix()?;
                    Ok(match s.as_str() {
                        "K" => Formula::at_least(i, body),
                        "W" => Formula::at_most(i, body),
                        _ => Formula::only(i, body),
                    })
                }
                _ => self.atom(),
            },
            _ => self.fail(&["formula"]),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let Tok::Ident(name) = self.bump() else { unreachable!() };
        if *self.peek() != Tok::LParen {
            return Ok(Formula::atom(AtomId::new(&name)));
        }
        // `p(` is only an argument list when it is followed by `arg ,` or `arg )`
        let is_args = matches!(
            (self.toks.get(self.pos + 1).map(|t| &t.tok), self.toks.get(self.pos + 2).map(|t| &t.tok)),
            (Some(Tok::Ident(a)), Some(Tok::Comma | Tok::RParen)) if !KEYWORDS.contains(&a.as_str())
        ) || matches!(
            (self.toks.get(self.pos + 1).map(|t| &t.tok), self.toks.get(self.pos + 2).map(|t| &t.tok)),
            (Some(Tok::Int(_)), Some(Tok::Comma | Tok::RParen))
        );
        if !is_args {
            return self.fail(&["`&`", "`|`", "`^`", "`->`", "`<->`", "`)`", "end of input"]);
        }
        self.bump();
        let mut args = Vec::new();
        loop {
            match self.bump() {
                Tok::Ident(a) | Tok::Int(a) => args.push(a),
                _ => {
                    self.pos -= 1;
                    return self.fail(&["atom argument"]);
                }
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                _ => return self.fail(&["`,`", "`)`"]),
            }
        }
        Ok(Formula::atom(AtomId::new(&format!("{}({})", name, args.join(",")))))
    }
}

/// Parses one formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.fail(&["`&`", "`|`", "`^`", "`->`", "`<->`", "end of input"]);
    }
    Ok(f)
}

/// Parses and validates an instance document.
pub fn parse_instance(document: &str) -> Result<ProblemInstance, InstanceError> {
    ProblemInstance::from_json(document)
}

/// Prints a formula so that [`parse_formula`] gives it back unchanged.
pub fn print_formula(phi: &Formula) -> String {
    phi.to_string()
}

const P_IFF: u8 = 1;
const P_IMP: u8 = 2;
const P_XOR: u8 = 3;
const P_OR: u8 = 4;
const P_AND: u8 = 5;
const P_PREFIX: u8 = 6;

fn prec(phi: &Formula) -> u8 {
    match phi.kind() {
        Kind::Iff(..) => P_IFF,
        Kind::Implies(..) => P_IMP,
        Kind::Xor(..) => P_XOR,
        Kind::Or(..) => P_OR,
        Kind::And(..) => P_AND,
        _ => P_PREFIX,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, phi: &Formula, min: u8) -> fmt::Result {
    if prec(phi) < min {
        write!(f, "(")?;
        write_formula(f, phi)?;
        write!(f, ")")
    } else {
        write_formula(f, phi)
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
    let binary = |f: &mut fmt::Formatter<'_>, a: &Formula, b: &Formula, op: &str, p: u8, right: bool| {
        let (lp, rp) = if right { (p + 1, p) } else { (p, p + 1) };
        write_at(f, a, lp)?;
        write!(f, " {op} ")?;
        write_at(f, b, rp)
    };
    match phi.kind() {
        Kind::Atom(p) => write!(f, "{p}"),
        Kind::Top => f.write_str("true"),
        Kind::Bottom => f.write_str("false"),
        Kind::Not(a) => {
            f.write_str("~")?;
            write_at(f, a, P_PREFIX)
        }
        Kind::And(a, b) => binary(f, a, b, "&", P_AND, false),
        Kind::Or(a, b) => binary(f, a, b, "|", P_OR, false),
        Kind::Xor(a, b) => binary(f, a, b, "^", P_XOR, false),
        Kind::Implies(a, b) => binary(f, a, b, "->", P_IMP, true),
        Kind::Iff(a, b) => binary(f, a, b, "<->", P_IFF, false),
        Kind::Explicit(i, a) => {
            write!(f, "B {i} ")?;
            write_at(f, a, P_PREFIX)
        }
        Kind::AtLeast(i, a) => {
            write!(f, "K {i} ")?;
            write_at(f, a, P_PREFIX)
        }
        Kind::AtMost(i, a) => {
            write!(f, "W {i} ")?;
            write_at(f, a, P_PREFIX)
        }
        Kind::Only(i, a) => {
            write!(f, "O {i} ")?;
            write_at(f, a, P_PREFIX)
        }
        Kind::Expand(i, a, b) => {
            write!(f, "[+{i} ")?;
            write_formula(f, a)?;
            f.write_str("]")?;
            if !matches!(b.kind(), Kind::Expand(..)) {
                f.write_str(" ")?;
            }
            write_at(f, b, P_PREFIX)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        Formula::atom(s)
    }

    #[test]
    fn modal_keywords() {
        assert_eq!(parse_formula("K 1 (p & q)").unwrap(), Formula::at_least(Agent(1), Formula::and(p("p"), p("q"))));
        assert_eq!(parse_formula("O 2 ~vote(1,c1)").unwrap(), Formula::only(Agent(2), Formula::not(p("vote(1,c1)"))));
    }

    #[test]
    fn expansion_chain() {
        let v = p("vote(1,c2)");
        let f = parse_formula("[+2 vote(1,c2)][+3 vote(1,c2)] X").unwrap();
        assert_eq!(f, Formula::expand(Agent(2), v.clone(), Formula::expand(Agent(3), v, p("X"))));
        assert_eq!(f.to_string(), "[+2 vote(1,c2)][+3 vote(1,c2)] X");
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("a | b & c ^ d -> e -> f <-> g").unwrap();
        let expected = Formula::iff(
            Formula::implies(
                Formula::xor(Formula::or(p("a"), Formula::and(p("b"), p("c"))), p("d")),
                Formula::implies(p("e"), p("f")),
            ),
            p("g"),
        );
        assert_eq!(f, expected);
        assert_eq!(parse_formula("K 1 p & q").unwrap(), Formula::and(Formula::at_least(Agent(1), p("p")), p("q")));
        assert_eq!(parse_formula("a & b & c").unwrap(), Formula::and(Formula::and(p("a"), p("b")), p("c")));
    }

    #[test]
    fn printing() {
        assert_eq!(Formula::at_least(Agent(1), p("p")).to_string(), "K 1 p");
        assert_eq!(Formula::only(Agent(1), Formula::xor(p("p"), p("q"))).to_string(), "O 1 (p ^ q)");
        assert_eq!(parse_formula("~(p & q) -> (r -> s)").unwrap().to_string(), "~(p & q) -> r -> s");
        assert_eq!(parse_formula("(p -> q) -> r").unwrap().to_string(), "(p -> q) -> r");
        assert_eq!(parse_formula("p & (q & r)").unwrap().to_string(), "p & (q & r)");
    }

    #[test]
    fn errors_carry_position() {
        match parse_formula("p &\n  & q") {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_formula("K 0 p"), Err(ParseError::Agent { .. })));
        assert!(matches!(parse_formula("B 1 K 1 p"), Err(ParseError::NotExplicit { .. })));
        assert!(matches!(parse_formula("[+1 K 1 p] q"), Err(ParseError::NotExplicit { .. })));
        assert!(parse_formula("p q").is_err());
        assert!(parse_formula("(p").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn keywords_are_not_atoms() {
        assert!(parse_formula("K").is_err());
        assert_eq!(parse_formula("Kx").unwrap(), p("Kx"));
    }
}
