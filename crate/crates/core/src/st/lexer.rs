//! Tokenizer for the Structured Text subset.
//!
//! Comments (`// ...` and `(* ... *)`) are dropped, except line comments that
//! start with `//#`, which carry verification pragmas and are returned as a
//! single [`TokenKind::Pragma`] token.

use std::fmt;

use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PragmaKeyword {
    Assert,
    Assume,
    Range,
}

impl fmt::Display for PragmaKeyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PragmaKeyword::Assert => "ASSERT",
            PragmaKeyword::Assume => "ASSUME",
            PragmaKeyword::Range => "RANGE",
        })
    }
}

/// Raw pragma as found in a `//#KIND(body) : name;` comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PragmaToken {
    pub kind: PragmaKeyword,
    pub body: String,
    /// Position of the first character of `body`.
    pub body_span: Span,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    /// Duration literal in milliseconds.
    Time(i64),
    True,
    False,

    FunctionBlock,
    EndFunctionBlock,
    DataBlock,
    EndDataBlock,
    VarInput,
    VarOutput,
    Var,
    EndVar,
    Begin,
    If,
    Then,
    Elsif,
    Else,
    EndIf,
    Not,
    And,
    Or,
    Xor,
    Bool,
    IntType,
    TimeType,

    Assign,
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    Dot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Implies,

    Pragma(PragmaToken),
}

impl TokenKind {
    /// Short description used in "expected ..." diagnostics.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Time(ms) => format!("time literal `T#{ms}ms`"),
            TokenKind::Pragma(p) => format!("pragma `//#{}`", p.kind),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::True => "TRUE",
            TokenKind::False => "FALSE",
            TokenKind::FunctionBlock => "FUNCTION_BLOCK",
            TokenKind::EndFunctionBlock => "END_FUNCTION_BLOCK",
            TokenKind::DataBlock => "DATA_BLOCK",
            TokenKind::EndDataBlock => "END_DATA_BLOCK",
            TokenKind::VarInput => "VAR_INPUT",
            TokenKind::VarOutput => "VAR_OUTPUT",
            TokenKind::Var => "VAR",
            TokenKind::EndVar => "END_VAR",
            TokenKind::Begin => "BEGIN",
            TokenKind::If => "IF",
            TokenKind::Then => "THEN",
            TokenKind::Elsif => "ELSIF",
            TokenKind::Else => "ELSE",
            TokenKind::EndIf => "END_IF",
            TokenKind::Not => "NOT",
            TokenKind::And => "AND",
            TokenKind::Or => "OR",
            TokenKind::Xor => "XOR",
            TokenKind::Bool => "BOOL",
            TokenKind::IntType => "INT",
            TokenKind::TimeType => "TIME",
            TokenKind::Assign => ":=",
            TokenKind::Colon => ":",
            TokenKind::Semi => ";",
            TokenKind::Comma => ",",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::Dot => ".",
            TokenKind::Eq => "=",
            TokenKind::Ne => "<>",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Implies => "-->",
            TokenKind::Ident(_) | TokenKind::Int(_) | TokenKind::Time(_) | TokenKind::Pragma(_) => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("unknown character `{ch}`")]
    UnknownCharacter { span: Span, ch: char },
    #[error("unterminated block comment")]
    UnterminatedComment { span: Span },
    #[error("unterminated quoted identifier")]
    UnterminatedQuote { span: Span },
    #[error("malformed literal `{text}`")]
    BadLiteral { span: Span, text: String },
    #[error("malformed pragma: {reason}")]
    BadPragma { span: Span, reason: String },
}

impl LexError {
    pub fn span(&self) -> Span {
        match self {
            LexError::UnknownCharacter { span, .. }
            | LexError::UnterminatedComment { span }
            | LexError::UnterminatedQuote { span }
            | LexError::BadLiteral { span, .. }
            | LexError::BadPragma { span, .. } => *span,
        }
    }
}

fn keyword(word: &str) -> Option<TokenKind> {
    let kind = match word.to_ascii_uppercase().as_str() {
        "TRUE" => TokenKind::True,
        "FALSE" => TokenKind::False,
        "FUNCTION_BLOCK" => TokenKind::FunctionBlock,
        "END_FUNCTION_BLOCK" => TokenKind::EndFunctionBlock,
        "DATA_BLOCK" => TokenKind::DataBlock,
        "END_DATA_BLOCK" => TokenKind::EndDataBlock,
        "VAR_INPUT" => TokenKind::VarInput,
        "VAR_OUTPUT" => TokenKind::VarOutput,
        "VAR" => TokenKind::Var,
        "END_VAR" => TokenKind::EndVar,
        "BEGIN" => TokenKind::Begin,
        "IF" => TokenKind::If,
        "THEN" => TokenKind::Then,
        "ELSIF" => TokenKind::Elsif,
        "ELSE" => TokenKind::Else,
        "END_IF" => TokenKind::EndIf,
        "NOT" => TokenKind::Not,
        "AND" => TokenKind::And,
        "OR" => TokenKind::Or,
        "XOR" => TokenKind::Xor,
        "BOOL" => TokenKind::Bool,
        "INT" => TokenKind::IntType,
        "TIME" => TokenKind::TimeType,
        _ => return None,
    };
    Some(kind)
}

/// True when `word` would lex as a keyword rather than an identifier.
pub fn is_keyword(word: &str) -> bool {
    keyword(word).is_some()
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor {
    fn new(src: &str, start: Span) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: start.line,
            col: start.col,
        }
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }
}

/// Tokenizes a whole source text.
pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    lex_at(text, Span::new(1, 1))
}

/// Tokenizes `text` as if it started at `start` in some enclosing file.
pub fn lex_at(text: &str, start: Span) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor::new(text, start);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let span = cur.span();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.starts_with("//#") {
            let tok = lex_pragma(&mut cur)?;
            tokens.push(Token {
                kind: TokenKind::Pragma(tok),
                span,
            });
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.starts_with("(*") {
            cur.bump_n(2);
            loop {
                if cur.starts_with("*)") {
                    cur.bump_n(2);
                    break;
                }
                if cur.bump().is_none() {
                    return Err(LexError::UnterminatedComment { span });
                }
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut name = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\n') | None => return Err(LexError::UnterminatedQuote { span }),
                    Some(ch) => name.push(ch),
                }
            }
            tokens.push(Token {
                kind: TokenKind::Ident(name),
                span,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(ch) = cur.peek() {
                if ch.is_ascii_alphanumeric() || ch == '_' {
                    word.push(ch);
                    cur.bump();
                } else {
                    break;
                }
            }
            if cur.peek() == Some('#') && matches!(word.to_ascii_uppercase().as_str(), "T" | "TIME") {
                cur.bump();
                let ms = lex_duration(&mut cur, span)?;
                tokens.push(Token {
                    kind: TokenKind::Time(ms),
                    span,
                });
                continue;
            }
            let kind = keyword(&word).unwrap_or(TokenKind::Ident(word));
            tokens.push(Token { kind, span });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(ch) = cur.peek() {
                if ch.is_ascii_digit() || ch == '_' {
                    if ch != '_' {
                        digits.push(ch);
                    }
                    cur.bump();
                } else {
                    break;
                }
            }
            let value = digits.parse::<i64>().map_err(|_| LexError::BadLiteral {
                span,
                text: digits.clone(),
            })?;
            tokens.push(Token {
                kind: TokenKind::Int(value),
                span,
            });
            continue;
        }

        let (kind, len) = if cur.starts_with("-->") {
            (TokenKind::Implies, 3)
        } else if cur.starts_with(":=") {
            (TokenKind::Assign, 2)
        } else if cur.starts_with("<>") {
            (TokenKind::Ne, 2)
        } else if cur.starts_with("<=") {
            (TokenKind::Le, 2)
        } else if cur.starts_with(">=") {
            (TokenKind::Ge, 2)
        } else {
            let kind = match c {
                ':' => TokenKind::Colon,
                ';' => TokenKind::Semi,
                ',' => TokenKind::Comma,
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '.' => TokenKind::Dot,
                '=' => TokenKind::Eq,
                '<' => TokenKind::Lt,
                '>' => TokenKind::Gt,
                '+' => TokenKind::Plus,
                '-' => TokenKind::Minus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                _ => return Err(LexError::UnknownCharacter { span, ch: c }),
            };
            (kind, 1)
        };
        cur.bump_n(len);
        tokens.push(Token { kind, span });
    }
    Ok(tokens)
}

/// Parses the `400ms` / `1s500ms` part of a duration literal.
fn lex_duration(cur: &mut Cursor, span: Span) -> Result<i64, LexError> {
    let mut total: i64 = 0;
    let mut text = String::new();
    let mut parts = 0;
    loop {
        let mut digits = String::new();
        while let Some(ch) = cur.peek() {
            if ch.is_ascii_digit() {
                digits.push(ch);
                cur.bump();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            break;
        }
        let mut unit = String::new();
        while let Some(ch) = cur.peek() {
            if ch.is_ascii_alphabetic() {
                unit.push(ch.to_ascii_lowercase());
                cur.bump();
            } else {
                break;
            }
        }
        text.push_str(&digits);
        text.push_str(&unit);
        let scale = match unit.as_str() {
            "ms" => 1,
            "s" => 1_000,
            "m" => 60_000,
            "h" => 3_600_000,
            "d" => 86_400_000,
            _ => {
                return Err(LexError::BadLiteral {
                    span,
                    text: format!("T#{text}"),
                })
            }
        };
        let value: i64 = digits.parse().map_err(|_| LexError::BadLiteral {
            span,
            text: format!("T#{text}"),
        })?;
        total = value
            .checked_mul(scale)
            .and_then(|v| total.checked_add(v))
            .ok_or_else(|| LexError::BadLiteral {
                span,
                text: format!("T#{text}"),
            })?;
        parts += 1;
    }
    if parts == 0 {
        return Err(LexError::BadLiteral {
            span,
            text: "T#".into(),
        });
    }
    Ok(total)
}

/// Lexes `//#KIND(body) [: name] [;]` up to the end of the line.
fn lex_pragma(cur: &mut Cursor) -> Result<PragmaToken, LexError> {
    let span = cur.span();
    cur.bump_n(3);
    let mut word = String::new();
    while let Some(ch) = cur.peek() {
        if ch.is_ascii_alphabetic() {
            word.push(ch);
            cur.bump();
        } else {
            break;
        }
    }
    let kind = match word.to_ascii_uppercase().as_str() {
        "ASSERT" => PragmaKeyword::Assert,
        "ASSUME" => PragmaKeyword::Assume,
        "RANGE" => PragmaKeyword::Range,
        _ => {
            return Err(LexError::BadPragma {
                span,
                reason: format!("unknown pragma `{word}`"),
            })
        }
    };
    skip_inline_space(cur);
    if cur.peek() != Some('(') {
        return Err(LexError::BadPragma {
            span,
            reason: "expected `(` after pragma keyword".into(),
        });
    }
    cur.bump();
    let body_span = cur.span();
    let mut depth = 1;
    let mut body = String::new();
    loop {
        match cur.peek() {
            None | Some('\n') => {
                return Err(LexError::BadPragma {
                    span,
                    reason: "unbalanced parentheses".into(),
                })
            }
            Some('(') => depth += 1,
            Some(')') => {
                depth -= 1;
                if depth == 0 {
                    cur.bump();
                    break;
                }
            }
            _ => {}
        }
        body.push(cur.bump().unwrap_or_default());
    }
    skip_inline_space(cur);
    let mut name = None;
    if cur.peek() == Some(':') {
        cur.bump();
        skip_inline_space(cur);
        let mut ident = String::new();
        let quoted = cur.peek() == Some('"');
        if quoted {
            cur.bump();
        }
        while let Some(ch) = cur.peek() {
            if quoted {
                if ch == '"' {
                    cur.bump();
                    break;
                }
                if ch == '\n' {
                    break;
                }
            } else if !(ch.is_ascii_alphanumeric() || ch == '_') {
                break;
            }
            ident.push(ch);
            cur.bump();
        }
        if ident.is_empty() {
            return Err(LexError::BadPragma {
                span,
                reason: "expected a name after `:`".into(),
            });
        }
        name = Some(ident);
        skip_inline_space(cur);
    }
    if cur.peek() == Some(';') {
        cur.bump();
    }
    skip_inline_space(cur);
    if cur.starts_with("//") {
        while let Some(ch) = cur.peek() {
            if ch == '\n' {
                break;
            }
            cur.bump();
        }
    }
    match cur.peek() {
        None | Some('\n') => {}
        Some(ch) => {
            return Err(LexError::BadPragma {
                span,
                reason: format!("unexpected `{ch}` after pragma"),
            })
        }
    }
    Ok(PragmaToken {
        kind,
        body,
        body_span,
        name,
    })
}

fn skip_inline_space(cur: &mut Cursor) {
    while matches!(cur.peek(), Some(' ' | '\t' | '\r')) {
        cur.bump();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        lex(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn assignment_tokens() {
        assert_eq!(
            kinds("v_out := TRUE;"),
            vec![
                TokenKind::Ident("v_out".into()),
                TokenKind::Assign,
                TokenKind::True,
                TokenKind::Semi
            ]
        );
    }

    #[test]
    fn pragma_is_one_token() {
        let toks = kinds("//#ASSERT(x) : a1;");
        assert_eq!(toks.len(), 1);
        match &toks[0] {
            TokenKind::Pragma(p) => {
                assert_eq!(p.kind, PragmaKeyword::Assert);
                assert_eq!(p.body, "x");
                assert_eq!(p.name.as_deref(), Some("a1"));
            }
            other => panic!("expected pragma, got {other:?}"),
        }
    }

    #[test]
    fn timer_call_tokens() {
        assert_eq!(
            kinds("ET(IN := FALSE);"),
            vec![
                TokenKind::Ident("ET".into()),
                TokenKind::LParen,
                TokenKind::Ident("IN".into()),
                TokenKind::Assign,
                TokenKind::False,
                TokenKind::RParen,
                TokenKind::Semi
            ]
        );
    }

    #[test]
    fn comments_are_dropped() {
        assert_eq!(
            kinds("a (* block\n comment *) // line\n b"),
            vec![TokenKind::Ident("a".into()), TokenKind::Ident("b".into())]
        );
    }

    #[test]
    fn keywords_ignore_case_identifiers_do_not() {
        assert_eq!(
            kinds("if If iF Foo foo"),
            vec![
                TokenKind::If,
                TokenKind::If,
                TokenKind::If,
                TokenKind::Ident("Foo".into()),
                TokenKind::Ident("foo".into())
            ]
        );
    }

    #[test]
    fn quoted_identifier_strips_quotes() {
        assert_eq!(
            kinds("\"FDBACK_simplified_inst\".ERROR"),
            vec![
                TokenKind::Ident("FDBACK_simplified_inst".into()),
                TokenKind::Dot,
                TokenKind::Ident("ERROR".into())
            ]
        );
    }

    #[test]
    fn time_literals() {
        assert_eq!(kinds("T#400ms"), vec![TokenKind::Time(400)]);
        assert_eq!(kinds("t#1s200ms"), vec![TokenKind::Time(1200)]);
        assert_eq!(kinds("TIME#2m"), vec![TokenKind::Time(120_000)]);
        assert!(matches!(lex("T#4x"), Err(LexError::BadLiteral { .. })));
    }

    #[test]
    fn implication_and_minus() {
        assert_eq!(
            kinds("a --> b - 1"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Implies,
                TokenKind::Ident("b".into()),
                TokenKind::Minus,
                TokenKind::Int(1)
            ]
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            lex("x := 1;\n  $"),
            Err(LexError::UnknownCharacter {
                span: Span::new(2, 3),
                ch: '$'
            })
        );
        assert!(matches!(
            lex("(* never closed"),
            Err(LexError::UnterminatedComment { .. })
        ));
        assert!(matches!(lex("//#FOO(x)"), Err(LexError::BadPragma { .. })));
    }

    #[test]
    fn pragma_body_position_and_trailing_comment() {
        let toks = lex("  //#ASSUME(v_1 = FALSE) : r4; // given\nx").unwrap();
        match &toks[0].kind {
            TokenKind::Pragma(p) => {
                assert_eq!(p.kind, PragmaKeyword::Assume);
                assert_eq!(p.body_span, Span::new(1, 13));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(toks[1].kind, TokenKind::Ident("x".into()));
    }
}
