//! The diagram DSL: lexer, parser, AST and canonical renderer.
//!
//! Grammar:
//! ```text
//! document := stmt* ;
//! stmt := "dim" INT
//!       | "let" NAME "=" expr
//!       | "let" NAME "=" "braid:" wordtoken+      (word runs to end of line)
//!       | "check" expr "==" expr ["scalar" SCAL]
//!       | "eval" expr ;
//! expr := term { ";" term } ;     vertical composition, first listed applied first
//! term := atom { "|" atom } ;     horizontal juxtaposition
//! atom := "id(" INT ")" | "cap" | "cup"
//!       | "bspider(" INT "," INT ")" | "wspider(" INT "," INT ")"
//!       | "F" | "F2" | "G" | "X" | "Y" | "Z" | "CNOT"
//!       | "ghz(" INT ")" | "max(" INT ")" | "bell+" | "bell-"
//!       | NAME | "(" expr ")" ;
//! wordtoken := "b" INT ["'"] | "c" INT ":" SIGNEDINT ;
//! SCAL := "d^(" FRACTION ")" | complex literal "a+bi" ;
//! ```
//! `#` starts a line comment. Spider arities read `(inputs, outputs)`.

use quon_core::quon_calculus::{BraidSign, WordGen};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: expected {}",
            self.line, self.col, self.expected
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Id(usize),
    Cap,
    Cup,
    BSpider(usize, usize),
    WSpider(usize, usize),
    F,
    F2,
    G,
    X,
    Y,
    Z,
    Cnot,
    Ghz(usize),
    Max(usize),
    BellPlus,
    BellMinus,
    Name(String),
    Paren(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    /// d^(num/den)
    DPow(i64, i64),
    Complex(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Dim(usize),
    LetExpr(String, Expr),
    LetWord(String, Vec<WordGen>),
    Check {
        lhs: Expr,
        rhs: Expr,
        scalar: Option<Scalar>,
    },
    Eval(Expr),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub stmts: Vec<Stmt>,
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64, bool), // value, trailing 'i'
    LParen,
    RParen,
    Comma,
    Semi,
    Pipe,
    EqEq,
    Eq,
    Colon,
    Caret,
    Plus,
    Minus,
    Slash,
    Quote,
    Newline,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: l, col: co });
        match c {
            '\n' => {
                chars.next();
                push(Tok::Newline);
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                push(Tok::LParen);
            }
            ')' => {
                chars.next();
                col += 1;
                push(Tok::RParen);
            }
            ',' => {
                chars.next();
                col += 1;
                push(Tok::Comma);
            }
            ';' => {
                chars.next();
                col += 1;
                push(Tok::Semi);
            }
            '|' => {
                chars.next();
                col += 1;
                push(Tok::Pipe);
            }
            ':' => {
                chars.next();
                col += 1;
                push(Tok::Colon);
            }
            '^' => {
                chars.next();
                col += 1;
                push(Tok::Caret);
            }
            '+' => {
                chars.next();
                col += 1;
                push(Tok::Plus);
            }
            '-' => {
                chars.next();
                col += 1;
                push(Tok::Minus);
            }
            '/' => {
                chars.next();
                col += 1;
                push(Tok::Slash);
            }
            '\'' => {
                chars.next();
                col += 1;
                push(Tok::Quote);
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push(Tok::EqEq);
                } else {
                    push(Tok::Eq);
                }
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                let mut is_float = false;
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else if c2 == '.' && !is_float {
                        is_float = true;
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let imag = if chars.peek() == Some(&'i') {
                    chars.next();
                    col += 1;
                    true
                } else {
                    false
                };
                if is_float || imag {
                    let v: f64 = s.parse().map_err(|_| ParseError {
                        line: l,
                        col: co,
                        expected: "a number".into(),
                    })?;
                    push(Tok::Float(v, imag));
                } else {
                    let v: i64 = s.parse().map_err(|_| ParseError {
                        line: l,
                        col: co,
                        expected: "an integer".into(),
                    })?;
                    push(Tok::Int(v));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push(Tok::Ident(s));
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    expected: format!("a token (found {other:?})"),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Stream {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Stream {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn peek_skip_newlines(&mut self) -> Option<&Spanned> {
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Newline)) {
            self.pos += 1;
        }
        self.peek()
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(s) => ParseError {
                line: s.line,
                col: s.col,
                expected: expected.to_string(),
            },
            None => ParseError {
                line: usize::MAX,
                col: 0,
                expected: format!("{expected} (found end of input)"),
            },
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(s) if s.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here(what)),
        }
    }

    fn expect_usize(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::Int(v)) if v >= 0 => {
                self.pos += 1;
                Ok(v as usize)
            }
            _ => Err(self.err_here(what)),
        }
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let toks = lex(text)?;
    let mut s = Stream { toks, pos: 0 };
    let mut stmts = Vec::new();
    while let Some(sp) = s.peek_skip_newlines() {
        let sp = sp.clone();
        match &sp.tok {
            Tok::Ident(kw) => match kw.as_str() {
                "dim" => {
                    s.next();
                    let d = s.expect_usize("a positive dimension")?;
                    stmts.push(Stmt::Dim(d));
                }
                "let" => {
                    s.next();
                    let name = match s.next().map(|t| t.tok) {
                        Some(Tok::Ident(n)) => n,
                        _ => return Err(s.err_here("a definition name")),
                    };
                    s.expect(Tok::Eq, "'='")?;
                    // braid-word definitions run to end of line
                    let is_word = matches!(s.peek().map(|t| &t.tok), Some(Tok::Ident(id)) if id == "braid");
                    if is_word {
                        s.next();
                        s.expect(Tok::Colon, "':' after braid")?;
                        let gens = parse_word(&mut s)?;
                        stmts.push(Stmt::LetWord(name, gens));
                    } else {
                        let e = parse_expr(&mut s)?;
                        stmts.push(Stmt::LetExpr(name, e));
                    }
                }
                "check" => {
                    s.next();
                    let lhs = parse_expr(&mut s)?;
                    s.expect(Tok::EqEq, "'=='")?;
                    let rhs = parse_expr(&mut s)?;
                    let scalar = if matches!(s.peek().map(|t| &t.tok), Some(Tok::Ident(id)) if id == "scalar")
                    {
                        s.next();
                        Some(parse_scalar(&mut s)?)
                    } else {
                        None
                    };
                    stmts.push(Stmt::Check { lhs, rhs, scalar });
                }
                "eval" => {
                    s.next();
                    let e = parse_expr(&mut s)?;
                    stmts.push(Stmt::Eval(e));
                }
                _ => return Err(s.err_here("a statement (dim, let, check, eval)")),
            },
            _ => return Err(s.err_here("a statement (dim, let, check, eval)")),
        }
    }
    Ok(Document { stmts })
}

fn parse_word(s: &mut Stream) -> Result<Vec<WordGen>, ParseError> {
    let mut gens = Vec::new();
    loop {
        match s.peek().map(|t| t.tok.clone()) {
            Some(Tok::Ident(id)) => {
                if let Some(rest) = id.strip_prefix('b') {
                    let i: u8 = rest
                        .parse()
                        .map_err(|_| s.err_here("a braid token b1..b3"))?;
                    if !(1..=3).contains(&i) {
                        return Err(s.err_here("a braid position 1..3"));
                    }
                    s.next();
                    let sign = if matches!(s.peek().map(|t| &t.tok), Some(Tok::Quote)) {
                        s.next();
                        BraidSign::Negative
                    } else {
                        BraidSign::Positive
                    };
                    gens.push(WordGen::Braid(i, sign));
                } else if let Some(rest) = id.strip_prefix('c') {
                    let strand: u8 = rest
                        .parse()
                        .map_err(|_| s.err_here("a charge token c1..c4"))?;
                    if !(1..=4).contains(&strand) {
                        return Err(s.err_here("a strand 1..4"));
                    }
                    s.next();
                    s.expect(Tok::Colon, "':' in charge token")?;
                    let neg = if matches!(s.peek().map(|t| &t.tok), Some(Tok::Minus)) {
                        s.next();
                        true
                    } else {
                        false
                    };
                    let mag = s.expect_usize("a charge value")? as i64;
                    gens.push(WordGen::Charge(strand, if neg { -mag } else { mag }));
                } else {
                    return Err(s.err_here("a word token (bK, bK', cS:g)"));
                }
            }
            Some(Tok::Newline) | None => break,
            _ => return Err(s.err_here("a word token (bK, bK', cS:g)")),
        }
    }
    if gens.is_empty() {
        return Err(s.err_here("at least one word token"));
    }
    Ok(gens)
}

fn parse_scalar(s: &mut Stream) -> Result<Scalar, ParseError> {
    match s.peek().map(|t| t.tok.clone()) {
        Some(Tok::Ident(id)) if id == "d" => {
            s.next();
            s.expect(Tok::Caret, "'^' in d-power")?;
            s.expect(Tok::LParen, "'('")?;
            let neg = if matches!(s.peek().map(|t| &t.tok), Some(Tok::Minus)) {
                s.next();
                true
            } else {
                false
            };
            let num = s.expect_usize("a numerator")? as i64;
            let den = if matches!(s.peek().map(|t| &t.tok), Some(Tok::Slash)) {
                s.next();
                s.expect_usize("a denominator")? as i64
            } else {
                1
            };
            s.expect(Tok::RParen, "')'")?;
            Ok(Scalar::DPow(if neg { -num } else { num }, den))
        }
        _ => {
            // complex literal: [-] num [i] [(+|-) num i]
            let mut sign = 1.0;
            if matches!(s.peek().map(|t| &t.tok), Some(Tok::Minus)) {
                s.next();
                sign = -1.0;
            }
            let (v1, imag1) = parse_number(s)?;
            if imag1 {
                return Ok(Scalar::Complex(0.0, sign * v1));
            }
            let re = sign * v1;
            let im_sign = match s.peek().map(|t| t.tok.clone()) {
                Some(Tok::Plus) => {
                    s.next();
                    1.0
                }
                Some(Tok::Minus) => {
                    s.next();
                    -1.0
                }
                _ => return Ok(Scalar::Complex(re, 0.0)),
            };
            let (v2, imag2) = parse_number(s)?;
            if !imag2 {
                return Err(s.err_here("an imaginary part ending in 'i'"));
            }
            Ok(Scalar::Complex(re, im_sign * v2))
        }
    }
}

fn parse_number(s: &mut Stream) -> Result<(f64, bool), ParseError> {
    match s.peek().map(|t| t.tok.clone()) {
        Some(Tok::Int(v)) => {
            s.next();
            Ok((v as f64, false))
        }
        Some(Tok::Float(v, imag)) => {
            s.next();
            Ok((v, imag))
        }
        _ => Err(s.err_here("a number")),
    }
}

fn parse_expr(s: &mut Stream) -> Result<Expr, ParseError> {
    let mut terms = vec![parse_term(s)?];
    while matches!(s.peek().map(|t| &t.tok), Some(Tok::Semi)) {
        s.next();
        terms.push(parse_term(s)?);
    }
    Ok(Expr { terms })
}

fn parse_term(s: &mut Stream) -> Result<Term, ParseError> {
    let mut atoms = vec![parse_atom(s)?];
    while matches!(s.peek().map(|t| &t.tok), Some(Tok::Pipe)) {
        s.next();
        atoms.push(parse_atom(s)?);
    }
    Ok(Term { atoms })
}

fn parse_atom(s: &mut Stream) -> Result<Atom, ParseError> {
    match s.peek().map(|t| t.tok.clone()) {
        Some(Tok::LParen) => {
            s.next();
            let e = parse_expr(s)?;
            s.expect(Tok::RParen, "')'")?;
            Ok(Atom::Paren(Box::new(e)))
        }
        Some(Tok::Ident(id)) => {
            s.next();
            match id.as_str() {
                "id" => {
                    s.expect(Tok::LParen, "'('")?;
                    let k = s.expect_usize("a wire count")?;
                    s.expect(Tok::RParen, "')'")?;
                    Ok(Atom::Id(k))
                }
                "cap" => Ok(Atom::Cap),
                "cup" => Ok(Atom::Cup),
                "bspider" | "wspider" => {
                    s.expect(Tok::LParen, "'('")?;
                    let ins = s.expect_usize("an input count")?;
                    s.expect(Tok::Comma, "','")?;
                    let outs = s.expect_usize("an output count")?;
                    s.expect(Tok::RParen, "')'")?;
                    Ok(if id == "bspider" {
                        Atom::BSpider(ins, outs)
                    } else {
                        Atom::WSpider(ins, outs)
                    })
                }
                "F" => Ok(Atom::F),
                "F2" => Ok(Atom::F2),
                "G" => Ok(Atom::G),
                "X" => Ok(Atom::X),
                "Y" => Ok(Atom::Y),
                "Z" => Ok(Atom::Z),
                "CNOT" => Ok(Atom::Cnot),
                "ghz" => {
                    s.expect(Tok::LParen, "'('")?;
                    let n = s.expect_usize("a leg count")?;
                    s.expect(Tok::RParen, "')'")?;
                    Ok(Atom::Ghz(n))
                }
                "max" => {
                    s.expect(Tok::LParen, "'('")?;
                    let n = s.expect_usize("a leg count")?;
                    s.expect(Tok::RParen, "')'")?;
                    Ok(Atom::Max(n))
                }
                "bell" => match s.next().map(|t| t.tok) {
                    Some(Tok::Plus) => Ok(Atom::BellPlus),
                    Some(Tok::Minus) => Ok(Atom::BellMinus),
                    _ => Err(s.err_here("'+' or '-' after bell")),
                },
                _ => Ok(Atom::Name(id)),
            }
        }
        _ => Err(s.err_here("an atom")),
    }
}

// ---------------------------------------------------------------------------
// renderer
// ---------------------------------------------------------------------------

pub fn render(doc: &Document) -> String {
    let mut out = String::new();
    for stmt in &doc.stmts {
        match stmt {
            Stmt::Dim(d) => out.push_str(&format!("dim {d}\n")),
            Stmt::LetExpr(name, e) => out.push_str(&format!("let {name} = {}\n", render_expr(e))),
            Stmt::LetWord(name, gens) => {
                let toks: Vec<String> = gens
                    .iter()
                    .map(|g| match g {
                        WordGen::Braid(i, BraidSign::Positive) => format!("b{i}"),
                        WordGen::Braid(i, BraidSign::Negative) => format!("b{i}'"),
                        WordGen::Charge(s, g) => format!("c{s}:{g}"),
                    })
                    .collect();
                out.push_str(&format!("let {name} = braid: {}\n", toks.join(" ")));
            }
            Stmt::Check { lhs, rhs, scalar } => {
                out.push_str(&format!(
                    "check {} == {}",
                    render_expr(lhs),
                    render_expr(rhs)
                ));
                match scalar {
                    Some(Scalar::DPow(num, den)) => {
                        if *den == 1 {
                            out.push_str(&format!(" scalar d^({num})"));
                        } else {
                            out.push_str(&format!(" scalar d^({num}/{den})"));
                        }
                    }
                    Some(Scalar::Complex(re, im)) => {
                        if *im >= 0.0 {
                            out.push_str(&format!(" scalar {re}+{im}i"));
                        } else {
                            out.push_str(&format!(" scalar {re}-{}i", -im));
                        }
                    }
                    None => {}
                }
                out.push('\n');
            }
            Stmt::Eval(e) => out.push_str(&format!("eval {}\n", render_expr(e))),
        }
    }
    out
}

pub fn render_expr(e: &Expr) -> String {
    e.terms
        .iter()
        .map(render_term)
        .collect::<Vec<_>>()
        .join(" ; ")
}

fn render_term(t: &Term) -> String {
    t.atoms
        .iter()
        .map(render_atom)
        .collect::<Vec<_>>()
        .join(" | ")
}

fn render_atom(a: &Atom) -> String {
    match a {
        Atom::Id(k) => format!("id({k})"),
        Atom::Cap => "cap".into(),
        Atom::Cup => "cup".into(),
        Atom::BSpider(i, o) => format!("bspider({i},{o})"),
        Atom::WSpider(i, o) => format!("wspider({i},{o})"),
        Atom::F => "F".into(),
        Atom::F2 => "F2".into(),
        Atom::G => "G".into(),
        Atom::X => "X".into(),
        Atom::Y => "Y".into(),
        Atom::Z => "Z".into(),
        Atom::Cnot => "CNOT".into(),
        Atom::Ghz(n) => format!("ghz({n})"),
        Atom::Max(n) => format!("max({n})"),
        Atom::BellPlus => "bell+".into(),
        Atom::BellMinus => "bell-".into(),
        Atom::Name(n) => n.clone(),
        Atom::Paren(e) => format!("( {} )", render_expr(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let doc = parse("dim 2\nlet c = bspider(1,2)\neval c\n").unwrap();
        assert_eq!(doc.stmts.len(), 3);
        assert!(matches!(doc.stmts[0], Stmt::Dim(2)));

        let doc2 =
            parse("dim 3\ncheck wspider(2,1) ; F == bspider(2,1) scalar d^(1/2)\n").unwrap();
        match &doc2.stmts[1] {
            Stmt::Check { scalar, .. } => assert_eq!(scalar, &Some(Scalar::DPow(1, 2))),
            _ => panic!("expected check"),
        }

        let doc3 = parse("dim 2\nlet w = braid: b1 b2' c1:1\n").unwrap();
        match &doc3.stmts[1] {
            Stmt::LetWord(name, gens) => {
                assert_eq!(name, "w");
                assert_eq!(gens.len(), 3);
            }
            _ => panic!("expected word"),
        }
    }

    #[test]
    fn roundtrip() {
        let src = "dim 3\nlet c = bspider(1,2)\nlet w = braid: b1 b2' c4:-1\ncheck wspider(2,1) ; F == bspider(2,1) scalar d^(1/2)\ncheck Z ; Z ; Z == id(1)\neval c | ( F ; G )\ncheck X == X scalar 1+0i\n";
        let doc = parse(src).unwrap();
        let rendered = render(&doc);
        let doc2 = parse(&rendered).unwrap();
        assert_eq!(doc, doc2);
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("dim 2\nlet = 3\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
