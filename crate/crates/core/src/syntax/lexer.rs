use crate::error::SyntaxError;
use crate::term::Flavor;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    /// MFE: lowercase function/atom name, possibly `module:name`.
    /// MFH: any identifier.
    Ident(String),
    /// MFE only: uppercase- or underscore-initial variable.
    Var(String),
    Fun,
    End,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Arrow,
    Eq,
    Backslash,
    Backtick,
    Plus,
    Minus,
    Star,
    Slash,
    Define,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(n) => n.to_string(),
            Tok::Ident(s) | Tok::Var(s) => s.clone(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Fun => "fun",
            Tok::End => "end",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::Eq => "=",
            Tok::Backslash => "\\",
            Tok::Backtick => "`",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Define => ":=",
            Tok::Int(_) | Tok::Ident(_) | Tok::Var(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Position just past the token's last character.
    pub end_line: usize,
    pub end_col: usize,
    /// First token on its line, starting in column 1.
    pub at_line_start: bool,
}

pub fn tokenize(src: &str, flavor: Flavor) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut line_has_token = false;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_has_token = false;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '%' && flavor == Flavor::Mfe) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let start = (line, col);
        let at_line_start = !line_has_token && col == 1;
        let ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_' || (flavor == Flavor::Mfh && c == '\'');
        let take_ident = |j: usize| {
            let mut k = j;
            while k < chars.len() && ident_char(chars[k]) {
                k += 1;
            }
            k
        };

        let (tok, len) = if c.is_ascii_digit() {
            let j = take_ident(i);
            let text: String = chars[i..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| SyntaxError {
                line,
                column: col,
                expected: "integer literal".into(),
                found: text.clone(),
            })?;
            (Tok::Int(n), j - i)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = take_ident(i);
            let mut text: String = chars[i..j].iter().collect();
            match flavor {
                Flavor::Mfe if c.is_ascii_uppercase() || c == '_' => (Tok::Var(text), j - i),
                Flavor::Mfe => {
                    // module:name is a single token; `:=` is not a qualifier.
                    if j + 1 < chars.len() && chars[j] == ':' && chars[j + 1].is_ascii_lowercase() {
                        let k = take_ident(j + 1);
                        text = chars[i..k].iter().collect();
                        j = k;
                    }
                    let tok = match text.as_str() {
                        "fun" => Tok::Fun,
                        "end" => Tok::End,
                        _ => Tok::Ident(text),
                    };
                    (tok, j - i)
                }
                Flavor::Mfh => (Tok::Ident(text), j - i),
            }
        } else {
            let next = chars.get(i + 1).copied();
            match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                (':', Some('=')) => (Tok::Define, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('=', _) => (Tok::Eq, 1),
                ('\\', _) => (Tok::Backslash, 1),
                ('`', _) => (Tok::Backtick, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                _ => {
                    return Err(SyntaxError {
                        line,
                        column: col,
                        expected: "token".into(),
                        found: format!("`{c}`"),
                    })
                }
            }
        };
        i += len;
        col += len;
        line_has_token = true;
        out.push(Token {
            tok,
            line: start.0,
            col: start.1,
            end_line: line,
            end_col: col,
            at_line_start,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        end_line: line,
        end_col: col,
        at_line_start: col == 1,
    });
    Ok(out)
}

/// Token-level comparison, ignoring whitespace and comments.
pub fn tokens_equal(a: &str, b: &str, flavor: Flavor) -> bool {
    match (tokenize(a, flavor), tokenize(b, flavor)) {
        (Ok(x), Ok(y)) => x.iter().map(|t| &t.tok).eq(y.iter().map(|t| &t.tok)),
        _ => false,
    }
}
