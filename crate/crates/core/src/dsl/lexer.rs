use super::{DslError, DslErrorKind};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Equals,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// 1-based position of a token's first character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, pos });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(word),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' {
            let start = i;
            let len = scan_number(&chars[i..]).ok_or_else(|| {
                DslError::new(
                    DslErrorKind::Syntax,
                    pos,
                    format!("malformed number starting with `{c}`"),
                )
            })?;
            i += len;
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| {
                DslError::new(
                    DslErrorKind::Syntax,
                    pos,
                    format!("malformed number `{text}`"),
                )
            })?;
            col += len;
            out.push(Token {
                tok: Tok::Number(value),
                pos,
            });
            continue;
        }
        return Err(DslError::new(
            DslErrorKind::Syntax,
            pos,
            format!("unexpected character `{c}`"),
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

/// Length of `[+-]?(digits(.digits*)?|.digits)([eE][+-]?digits)?`, or
/// `None` when no digits follow the sign.
fn scan_number(s: &[char]) -> Option<usize> {
    let mut i = 0;
    if matches!(s.first(), Some('+' | '-')) {
        i += 1;
    }
    let int_start = i;
    while i < s.len() && s[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < s.len() && s[i] == '.' {
        i += 1;
        let frac_start = i;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < s.len() && (s[i] == 'e' || s[i] == 'E') {
        let mut j = i + 1;
        if j < s.len() && (s[j] == '+' || s[j] == '-') {
            j += 1;
        }
        let exp_start = j;
        while j < s.len() && s[j].is_ascii_digit() {
            j += 1;
        }
        if j == exp_start {
            return None;
        }
        i = j;
    }
    // A number must not run straight into an identifier character.
    if i < s.len() && (s[i].is_ascii_alphabetic() || s[i] == '_' || s[i] == '.') {
        return None;
    }
    Some(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers() {
        assert_eq!(
            toks("1 -2.5 .5 +3e2 4E-1"),
            vec![
                Tok::Number(1.0),
                Tok::Number(-2.5),
                Tok::Number(0.5),
                Tok::Number(300.0),
                Tok::Number(0.4),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let t = tokenize("# header\n  var x\n(").unwrap();
        assert_eq!(t[0].pos, Pos { line: 2, column: 3 });
        assert_eq!(t[1].pos, Pos { line: 2, column: 7 });
        assert_eq!(t[2].pos, Pos { line: 3, column: 1 });
    }

    #[test]
    fn bad_input() {
        let e = tokenize("var x [0, 1] {\n  a: tri(0, 1, 2) $").unwrap_err();
        assert_eq!((e.line, e.column), (2, 19));
        assert_eq!(e.kind, DslErrorKind::Syntax);
        assert!(tokenize("1e").is_err());
        assert!(tokenize("-").is_err());
        assert!(tokenize("12abc").is_err());
    }
}
