use crate::model::{Diagnostic, RuleId, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    /// Content of `«...»` or `<<...>>`.
    Stereo(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Semi,
    Eq,
    DotDot,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Stereo(s) => format!("«{s}»"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub start: Pos,
    pub end: Pos,
}

pub fn span(file: Option<&str>, start: Pos, end: Pos) -> SourceSpan {
    SourceSpan {
        file: file.map(str::to_string),
        start_line: start.line,
        start_col: start.col,
        end_line: end.line,
        end_col: end.col,
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }
}

/// Splits the source into tokens. Lexical errors are reported and the
/// offending characters skipped.
pub fn tokenize(file: Option<&str>, source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor { chars: source.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let error = |start: Pos, end: Pos, message: String| {
        let sp = span(file, start, end);
        Diagnostic { location: sp.to_string(), span: Some(sp), ..Diagnostic::error(RuleId::P007, "", message) }
    };

    while let Some(c) = cur.peek() {
        let start = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' {
            cur.bump();
            if cur.peek() == Some('-') {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                errors.push(error(start, cur.pos, "unexpected character `-`".into()));
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                s.push(c);
                cur.bump();
            }
            Tok::Number(s)
        } else if c == '«' || c == '<' {
            cur.bump();
            if c == '<' && cur.peek() != Some('<') {
                errors.push(error(start, cur.pos, "unexpected character `<`".into()));
                continue;
            }
            if c == '<' {
                cur.bump();
            }
            let mut s = String::new();
            let mut closed = false;
            while let Some(d) = cur.peek() {
                if d == '\n' {
                    break;
                }
                if c == '«' && d == '»' {
                    cur.bump();
                    closed = true;
                    break;
                }
                if c == '<' && d == '>' {
                    cur.bump();
                    if cur.peek() == Some('>') {
                        cur.bump();
                        closed = true;
                        break;
                    }
                    s.push('>');
                    continue;
                }
                s.push(d);
                cur.bump();
            }
            if !closed {
                errors.push(error(start, cur.pos, "unterminated stereotype".into()));
                continue;
            }
            Tok::Stereo(s.trim().to_string())
        } else {
            cur.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '*' => Tok::Star,
                '.' if cur.peek() == Some('.') => {
                    cur.bump();
                    Tok::DotDot
                }
                other => {
                    errors.push(error(start, cur.pos, format!("unexpected character `{other}`")));
                    continue;
                }
            }
        };
        tokens.push(Token { tok, start, end: cur.pos });
    }
    tokens.push(Token { tok: Tok::Eof, start: cur.pos, end: cur.pos });
    (tokens, errors)
}
