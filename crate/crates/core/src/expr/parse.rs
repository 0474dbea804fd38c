//! Recursive-descent parser for coefficient expressions.
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary `-`, `^`.
//! Binary operators associate to the left except `^`, which associates to the
//! right (`2^3^2 = 2^9`, `-x^2 = -(x^2)`).

use std::fmt;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    /// Shift the position of an error found in a fragment that starts at
    /// (`line`, `column`) of a larger document.
    pub fn offset(mut self, line: usize, column: usize) -> Self {
        if self.line == 1 {
            self.column += column - 1;
        }
        self.line += line - 1;
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: expected {}", self.line, self.column, self.expected.join(" or "))?;
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub allow_quaternion: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn err(column: usize, expected: &[&str], found: String) -> ParseError {
    ParseError { line: 1, column, expected: expected.iter().map(|s| s.to_string()).collect(), found }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| err(col, &["number"], format!("`{text}`")))?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return Err(err(col, &["expression"], format!("`{c}`")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    opts: ParseOptions,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(err(self.column(), &[name], self.peek().describe()))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.column();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(Expr::Pi),
                "x" => {
                    if *self.peek() == Tok::LBracket {
                        self.bump();
                        let c = self.column();
                        let j = match self.bump() {
                            Tok::Num(v) if v.fract() == 0.0 && (0.0..4.0).contains(&v) => v as usize,
                            t => return Err(err(c, &["coordinate index 0..=3"], t.describe())),
                        };
                        self.expect(Tok::RBracket, "`]`")?;
                        Ok(Expr::VarIndex(j))
                    } else {
                        Ok(Expr::Var)
                    }
                }
                "sin" | "cos" | "abs" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Abs,
                    };
                    self.expect(Tok::LParen, "`(`")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                _ => Err(err(col, &["expression"], format!("unknown name `{name}`"))),
            },
            Tok::LParen => {
                let first = self.expr()?;
                if *self.peek() == Tok::Comma {
                    if !self.opts.allow_quaternion {
                        return Err(err(self.column(), &["`)`"], "`,` (quaternion literal outside quaternion mode)".into()));
                    }
                    let mut comps = vec![first];
                    for _ in 0..3 {
                        self.expect(Tok::Comma, "`,`")?;
                        comps.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    let arr: [Expr; 4] = comps.try_into().expect("four components");
                    Ok(Expr::Quat(Box::new(arr)))
                } else {
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(first)
                }
            }
            t => Err(err(col, &["expression"], t.describe())),
        }
    }
}

/// Parse with quaternion literals allowed.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    parse_expr_with(src, ParseOptions { allow_quaternion: true })
}

pub fn parse_expr_with(src: &str, opts: ParseOptions) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, opts };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(err(p.column(), &["operator", "end of input"], p.peek().describe()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn scaled_sine() {
        let e = parse_expr("0.5*sin(x)").unwrap();
        assert_eq!(e, Expr::Mul(b(Expr::Num(0.5)), b(Expr::Call(Func::Sin, b(Expr::Var)))));
    }

    #[test]
    fn unary_minus_binds_tighter_than_division() {
        let e = parse_expr("-2/3*cos(x)").unwrap();
        let want = Expr::Mul(
            b(Expr::Div(b(Expr::Neg(b(Expr::Num(2.0)))), b(Expr::Num(3.0)))),
            b(Expr::Call(Func::Cos, b(Expr::Var))),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn power_is_right_associative_and_beats_negation() {
        let e = parse_expr("-x^2^3").unwrap();
        let want = Expr::Neg(b(Expr::Pow(b(Expr::Var), b(Expr::Pow(b(Expr::Num(2.0)), b(Expr::Num(3.0)))))));
        assert_eq!(e, want);
    }

    #[test]
    fn quaternion_literal() {
        let e = parse_expr("(0.1, 0.5, -0.2, -0.1)").unwrap();
        match e {
            Expr::Quat(c) => {
                assert_eq!(c[0], Expr::Num(0.1));
                assert_eq!(c[2], Expr::Neg(b(Expr::Num(0.2))));
            }
            other => panic!("not a quaternion literal: {other:?}"),
        }
    }

    #[test]
    fn quaternion_literal_rejected_in_real_mode() {
        let e = parse_expr_with("(1, 2, 3, 4)", ParseOptions::default()).unwrap_err();
        assert_eq!(e.column, 3);
    }

    #[test]
    fn unterminated_call_reports_end_column() {
        let e = parse_expr("sin(").unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
        assert_eq!(e.expected, vec!["expression".to_string()]);
    }

    #[test]
    fn trailing_garbage() {
        let e = parse_expr("x x").unwrap_err();
        assert_eq!(e.column, 3);
    }

    #[test]
    fn unknown_identifier() {
        assert!(parse_expr("tan(x)").is_err());
    }

    #[test]
    fn coordinate_index() {
        assert_eq!(parse_expr("x[3]").unwrap(), Expr::VarIndex(3));
        assert!(parse_expr("x[4]").is_err());
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(parse_expr("1e-3").unwrap(), Expr::Num(1e-3));
        assert_eq!(parse_expr("2.5E2").unwrap(), Expr::Num(250.0));
    }
}
