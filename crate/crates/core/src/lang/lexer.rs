//! Tokeniser for the program and expression syntax.
//!
//! Two lexing rules deserve calling out because they resolve ambiguities
//! the grammar would otherwise have:
//!
//! * **Side tags bind tight.** An identifier immediately followed (no
//!   whitespace) by `<1>` or `<2>` is a single tagged-identifier token:
//!   `x<1>` reads variable `x` in the left memory. A comparison against a
//!   literal needs the space: `x < 1`.
//! * **Rationals are one token.** `3/4` (no interior whitespace) is the
//!   rational three-quarters; the language has no division operator, so
//!   `/` appears only inside rational literals.

use super::Side;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    TaggedIdent(String, Side),
    Int(String),
    /// Numerator and denominator digits of a `p/q` literal.
    Rat(String, String),
    // Punctuation and operators.
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    DotDot,
    Assign,    // <-
    SampleOp,  // <$
    Arrow,     // ->
    Implies,   // =>
    Iff,       // <=>
    Eq,        // =
    EqEq,      // ==
    Ne,        // !=
    Lt,        // <
    Le,        // <=
    Gt,        // >
    Ge,        // >=
    Plus,
    Minus,
    Star,
    Bang,
    AndAnd,
    OrOr,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::TaggedIdent(s, Side::Left) => write!(f, "{s}<1>"),
            Tok::TaggedIdent(s, Side::Right) => write!(f, "{s}<2>"),
            Tok::Int(s) => write!(f, "{s}"),
            Tok::Rat(p, q) => write!(f, "{p}/{q}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Comma => write!(f, ","),
            Tok::Semi => write!(f, ";"),
            Tok::Colon => write!(f, ":"),
            Tok::Dot => write!(f, "."),
            Tok::DotDot => write!(f, ".."),
            Tok::Assign => write!(f, "<-"),
            Tok::SampleOp => write!(f, "<$"),
            Tok::Arrow => write!(f, "->"),
            Tok::Implies => write!(f, "=>"),
            Tok::Iff => write!(f, "<=>"),
            Tok::Eq => write!(f, "="),
            Tok::EqEq => write!(f, "=="),
            Tok::Ne => write!(f, "!="),
            Tok::Lt => write!(f, "<"),
            Tok::Le => write!(f, "<="),
            Tok::Gt => write!(f, ">"),
            Tok::Ge => write!(f, ">="),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Bang => write!(f, "!"),
            Tok::AndAnd => write!(f, "&&"),
            Tok::OrOr => write!(f, "||"),
        }
    }
}

/// A token with its source position (1-based line and column).
#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, super::ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! err {
        ($($a:tt)*) => {
            return Err(super::ParseError { line, col, msg: format!($($a)*) })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: tl, col: tc });

        // Advance helpers keep line/col in sync with i.
        macro_rules! bump {
            () => {{
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }};
            ($n:expr) => {{
                for _ in 0..$n {
                    bump!();
                }
            }};
        }

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let name: String = chars[start..i].iter().collect();
            // Tight side tag: ident immediately followed by `<1>` or `<2>`.
            if i + 2 < chars.len()
                && chars[i] == '<'
                && (chars[i + 1] == '1' || chars[i + 1] == '2')
                && chars[i + 2] == '>'
            {
                let side = if chars[i + 1] == '1' { Side::Left } else { Side::Right };
                bump!(3);
                push(Tok::TaggedIdent(name, side));
            } else {
                push(Tok::Ident(name));
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let num: String = chars[start..i].iter().collect();
            // Rational literal p/q: slash immediately after the digits.
            if i < chars.len() && chars[i] == '/' {
                if i + 1 >= chars.len() || !chars[i + 1].is_ascii_digit() {
                    err!("expected denominator digits after `/` in rational literal");
                }
                bump!(); // the slash
                let dstart = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let den: String = chars[dstart..i].iter().collect();
                push(Tok::Rat(num, den));
            } else {
                push(Tok::Int(num));
            }
            continue;
        }
        match c {
            '(' => {
                push(Tok::LParen);
                bump!();
            }
            ')' => {
                push(Tok::RParen);
                bump!();
            }
            '{' => {
                push(Tok::LBrace);
                bump!();
            }
            '}' => {
                push(Tok::RBrace);
                bump!();
            }
            '[' => {
                push(Tok::LBracket);
                bump!();
            }
            ']' => {
                push(Tok::RBracket);
                bump!();
            }
            ',' => {
                push(Tok::Comma);
                bump!();
            }
            ';' => {
                push(Tok::Semi);
                bump!();
            }
            ':' => {
                push(Tok::Colon);
                bump!();
            }
            '.' => {
                if i + 1 < chars.len() && chars[i + 1] == '.' {
                    push(Tok::DotDot);
                    bump!(2);
                } else {
                    push(Tok::Dot);
                    bump!();
                }
            }
            '+' => {
                push(Tok::Plus);
                bump!();
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    push(Tok::Arrow);
                    bump!(2);
                } else {
                    push(Tok::Minus);
                    bump!();
                }
            }
            '*' => {
                push(Tok::Star);
                bump!();
            }
            '!' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::Ne);
                    bump!(2);
                } else {
                    push(Tok::Bang);
                    bump!();
                }
            }
            '&' => {
                if i + 1 < chars.len() && chars[i + 1] == '&' {
                    push(Tok::AndAnd);
                    bump!(2);
                } else {
                    err!("expected `&&`");
                }
            }
            '|' => {
                if i + 1 < chars.len() && chars[i + 1] == '|' {
                    push(Tok::OrOr);
                    bump!(2);
                } else {
                    err!("expected `||`");
                }
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::EqEq);
                    bump!(2);
                } else if i + 1 < chars.len() && chars[i + 1] == '>' {
                    push(Tok::Implies);
                    bump!(2);
                } else {
                    push(Tok::Eq);
                    bump!();
                }
            }
            '<' => {
                if i + 2 < chars.len() && chars[i + 1] == '=' && chars[i + 2] == '>' {
                    push(Tok::Iff);
                    bump!(3);
                } else if i + 1 < chars.len() && chars[i + 1] == '-' {
                    push(Tok::Assign);
                    bump!(2);
                } else if i + 1 < chars.len() && chars[i + 1] == '$' {
                    push(Tok::SampleOp);
                    bump!(2);
                } else if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::Le);
                    bump!(2);
                } else {
                    push(Tok::Lt);
                    bump!();
                }
            }
            '>' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push(Tok::Ge);
                    bump!(2);
                } else {
                    push(Tok::Gt);
                    bump!();
                }
            }
            '/' => err!("`/` only occurs inside rational literals like 3/4"),
            _ => err!("unexpected character {c:?}"),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|s| s.tok).collect()
    }

    #[test]
    fn tags_lex_tight() {
        assert_eq!(
            toks("x<1> x<2>"),
            vec![
                Tok::TaggedIdent("x".into(), Side::Left),
                Tok::TaggedIdent("x".into(), Side::Right)
            ]
        );
        // With a space it is a comparison.
        assert_eq!(
            toks("x < 1"),
            vec![Tok::Ident("x".into()), Tok::Lt, Tok::Int("1".into())]
        );
        // `x<1` without the closing bracket is also a comparison.
        assert_eq!(
            toks("x<1"),
            vec![Tok::Ident("x".into()), Tok::Lt, Tok::Int("1".into())]
        );
    }

    #[test]
    fn rationals_are_single_tokens() {
        assert_eq!(toks("3/4"), vec![Tok::Rat("3".into(), "4".into())]);
        assert_eq!(
            toks("1 + 14/15"),
            vec![Tok::Int("1".into()), Tok::Plus, Tok::Rat("14".into(), "15".into())]
        );
    }

    #[test]
    fn comments_and_operators() {
        assert_eq!(
            toks("a <- b # comment\n<= <$ => <=> .. ->"),
            vec![
                Tok::Ident("a".into()),
                Tok::Assign,
                Tok::Ident("b".into()),
                Tok::Le,
                Tok::SampleOp,
                Tok::Implies,
                Tok::Iff,
                Tok::DotDot,
                Tok::Arrow,
            ]
        );
    }

    #[test]
    fn error_position() {
        let e = lex("ab\n  ?").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
    }
}
