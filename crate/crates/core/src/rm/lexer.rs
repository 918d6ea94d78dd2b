use super::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Module,
    EndModule,
    Init,
    True,
    False,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Semi,
    DotDot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Prime,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Module => "module",
            Tok::EndModule => "endmodule",
            Tok::Init => "init",
            Tok::True => "true",
            Tok::False => "false",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::DotDot => "..",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Not => "!",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Prime => "'",
            Tok::Arrow => "->",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let next = chars.get(i + 1).copied();

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
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<i64>().map_err(|_| ParseError {
                pos,
                kind: ParseErrorKind::Syntax(format!("integer literal `{text}` is too large")),
            })?;
            col += i - start;
            out.push((Tok::Int(value), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "module" => Tok::Module,
                "endmodule" => Tok::EndModule,
                "init" => Tok::Init,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }

        let (tok, width) = match (c, next) {
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('&', _) => (Tok::And, 1),
            ('|', _) => (Tok::Or, 1),
            ('!', _) => (Tok::Not, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('\'', _) => (Tok::Prime, 1),
            _ => {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                })
            }
        };
        out.push((tok, pos));
        i += width;
        col += width;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrows_and_ranges() {
        let toks: Vec<Tok> = tokenize("[0..1] x->y'=-2 // note\n<= >= !=")
            .unwrap()
            .into_iter()
            .map(|t| t.0)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::LBracket,
                Tok::Int(0),
                Tok::DotDot,
                Tok::Int(1),
                Tok::RBracket,
                Tok::Ident("x".into()),
                Tok::Arrow,
                Tok::Ident("y".into()),
                Tok::Prime,
                Tok::Eq,
                Tok::Minus,
                Tok::Int(2),
                Tok::Le,
                Tok::Ge,
                Tok::Ne,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("module\n  m").unwrap();
        assert_eq!(toks[1].1, Pos { line: 2, column: 3 });
    }

    #[test]
    fn bad_character() {
        let err = tokenize("x @").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, column: 3 });
    }
}
