use super::SqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Bare word: keyword or unquoted identifier.
    Word(String),
    /// Identifier written with backticks or brackets.
    Quoted(String),
    Number(String),
    /// String literal content, unescaped.
    Str(String),
    Symbol(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

const SYMBOLS: &[&str] = &[
    "<>", "!=", "<=", ">=", "==", "||", "(", ")", ",", ".", "*", "=", "<", ">", "+", "-", "/", "%",
    ";",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, SqlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'\'' || c == b'"' {
            let (content, next) = quoted(text, i, c)?;
            out.push(Token {
                tok: Tok::Str(content),
                offset: start,
            });
            i = next;
            continue;
        }
        if c == b'`' || c == b'[' {
            let close = if c == b'`' { b'`' } else { b']' };
            let (content, next) = quoted(text, i, close)?;
            out.push(Token {
                tok: Tok::Quoted(content),
                offset: start,
            });
            i = next;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token {
                tok: Tok::Number(text[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] >= 0x80)
            {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(text[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(sym) => {
                out.push(Token {
                    tok: Tok::Symbol(sym),
                    offset: start,
                });
                i += sym.len();
            }
            None => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(SqlError::Parse {
                    offset: i,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        }
    }
    Ok(out)
}

/// Reads a quoted run starting at `start`; a doubled closing quote escapes it.
fn quoted(text: &str, start: usize, close: u8) -> Result<(String, usize), SqlError> {
    let bytes = text.as_bytes();
    let mut i = start + 1;
    let mut content = String::new();
    let mut run = i;
    while i < bytes.len() {
        if bytes[i] == close {
            if close != b']' && bytes.get(i + 1) == Some(&close) {
                content.push_str(&text[run..=i]);
                i += 2;
                run = i;
                continue;
            }
            content.push_str(&text[run..i]);
            return Ok((content, i + 1));
        }
        i += 1;
    }
    Err(SqlError::Parse {
        offset: start,
        message: "unterminated quoted text".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_symbols_and_words() {
        let toks = tokenize("SELECT t1.a, count(*) FROM x WHERE a >= 10").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Word("SELECT".into()));
        assert_eq!(kinds[2], Tok::Symbol("."));
        assert!(kinds.contains(&Tok::Symbol(">=")));
        assert_eq!(kinds.last(), Some(&Tok::Number("10".into())));
    }

    #[test]
    fn both_quote_styles_are_strings() {
        let toks = tokenize(r#"'it''s' "Computer Info.Systems""#).unwrap();
        assert_eq!(toks[0].tok, Tok::Str("it's".into()));
        assert_eq!(toks[1].tok, Tok::Str("Computer Info.Systems".into()));
    }

    #[test]
    fn unterminated_string_reports_offset() {
        match tokenize("SELECT 'abc") {
            Err(SqlError::Parse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("unexpected {other:?}"),
        }
    }
}
