use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    /// A single punctuation character. Multi-character operators are
    /// recognized later from adjacent punctuation (see [`super::ops`]).
    Punct,
    StringLit,
    CharLit,
    Number,
    Comment,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct && self.text.len() == c.len_utf8() && self.text.starts_with(c)
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Identifier
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.kind,
            TokenKind::StringLit | TokenKind::CharLit | TokenKind::Number
        ) || (self.kind == TokenKind::Keyword && matches!(self.text.as_str(), "true" | "false" | "null"))
    }

    /// Byte offset one past the last character.
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }

    /// Last line this token touches (differs from `line` for block comments
    /// and text blocks).
    pub fn end_line(&self) -> usize {
        self.line + self.text.matches('\n').count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexErrorKind {
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("unterminated text block")]
    UnterminatedTextBlock,
    #[error("unterminated character literal")]
    UnterminatedChar,
    #[error("unterminated block comment")]
    UnterminatedComment,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct LexError {
    pub line: usize,
    pub kind: LexErrorKind,
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "void", "volatile", "while",
];

pub const PRIMITIVE_TYPES: &[&str] = &[
    "boolean", "byte", "char", "double", "float", "int", "long", "short",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize) {
        self.tokens.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            line,
            offset: start,
        });
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            let line = self.line;
            if c.is_whitespace() {
                self.bump();
            } else if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                self.push(TokenKind::Comment, start, line);
            } else if c == '/' && self.peek_at(1) == Some('*') {
                self.bump();
                self.bump();
                loop {
                    match self.bump() {
                        Some('*') if self.peek() == Some('/') => {
                            self.bump();
                            break;
                        }
                        Some(_) => {}
                        None => {
                            return Err(LexError {
                                line,
                                kind: LexErrorKind::UnterminatedComment,
                            })
                        }
                    }
                }
                self.push(TokenKind::Comment, start, line);
            } else if c == '"' {
                if self.peek_at(1) == Some('"') && self.peek_at(2) == Some('"') {
                    self.text_block(line)?;
                } else {
                    self.quoted('"', line, LexErrorKind::UnterminatedString)?;
                }
                self.push(TokenKind::StringLit, start, line);
            } else if c == '\'' {
                self.quoted('\'', line, LexErrorKind::UnterminatedChar)?;
                self.push(TokenKind::CharLit, start, line);
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
            {
                self.number();
                self.push(TokenKind::Number, start, line);
            } else if is_ident_start(c) {
                while self.peek().is_some_and(is_ident_continue) {
                    self.bump();
                }
                let kind = if is_keyword(&self.src[start..self.pos]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                };
                self.push(kind, start, line);
            } else if c == '@' && self.peek_at(1).is_some_and(is_ident_start) {
                // `@interface` declares an annotation type; keep `interface`
                // visible as a keyword.
                let rest = &self.src[self.pos + 1..];
                let word_len = rest
                    .char_indices()
                    .find(|(_, c)| !is_ident_continue(*c))
                    .map_or(rest.len(), |(i, _)| i);
                if &rest[..word_len] == "interface" {
                    self.bump();
                    self.push(TokenKind::Punct, start, line);
                } else {
                    self.bump();
                    while self.peek().is_some_and(is_ident_continue) {
                        self.bump();
                    }
                    self.push(TokenKind::Annotation, start, line);
                }
            } else {
                self.bump();
                self.push(TokenKind::Punct, start, line);
            }
        }
        Ok(self.tokens)
    }

    fn quoted(&mut self, quote: char, line: usize, err: LexErrorKind) -> Result<(), LexError> {
        self.bump();
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    match self.peek() {
                        Some('\n') | None => break,
                        _ => {
                            self.bump();
                        }
                    }
                }
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(());
                }
                Some('\n') | None => break,
                Some(_) => {
                    self.bump();
                }
            }
        }
        Err(LexError { line, kind: err })
    }

    fn text_block(&mut self, line: usize) -> Result<(), LexError> {
        for _ in 0..3 {
            self.bump();
        }
        loop {
            match self.bump() {
                Some('\\') => {
                    self.bump();
                }
                Some('"') if self.peek() == Some('"') && self.peek_at(1) == Some('"') => {
                    self.bump();
                    self.bump();
                    return Ok(());
                }
                Some(_) => {}
                None => {
                    return Err(LexError {
                        line,
                        kind: LexErrorKind::UnterminatedTextBlock,
                    })
                }
            }
        }
    }

    fn number(&mut self) {
        let hex = self.peek() == Some('0') && matches!(self.peek_at(1), Some('x' | 'X'));
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                self.bump();
                let exponent = if hex {
                    matches!(c, 'p' | 'P')
                } else {
                    matches!(c, 'e' | 'E')
                };
                if exponent && matches!(self.peek(), Some('+' | '-')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }
}

/// Split source text into tokens with line numbers attached.
///
/// String/char literals, text blocks and comments are single tokens, so
/// nothing inside them is ever seen by construct counting.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer {
        src: source,
        pos: 0,
        line: 1,
        tokens: Vec::new(),
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn literals_and_comments_are_opaque() {
        let toks = tokenize(r#""a // x" /*c*/ if"#).unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![StringLit, Comment, Keyword]
        );
        assert_eq!(toks[0].text, r#""a // x""#);
        assert_eq!(toks[2].text, "if");
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  \n\t ").unwrap().is_empty());
    }

    #[test]
    fn for_header_has_fifteen_tokens() {
        let toks = tokenize("for(int i=0;i<n;i++)").unwrap();
        assert_eq!(toks.len(), 15);
        assert!(toks.iter().all(|t| t.kind != Comment));
        assert_eq!(toks[0].kind, Keyword);
        assert_eq!(toks[5].kind, Number);
    }

    #[test]
    fn line_numbers() {
        let toks = tokenize("a\n/* x\ny */ b\n\n c").unwrap();
        let lines: Vec<_> = toks.iter().map(|t| (t.text.as_str(), t.line)).collect();
        assert_eq!(lines, vec![("a", 1), ("/* x\ny */", 2), ("b", 3), ("c", 5)]);
        assert_eq!(toks[1].end_line(), 3);
    }

    #[test]
    fn escapes_and_char_literals() {
        assert_eq!(kinds(r#""say \"hi\"" '\'' 'x'"#), vec![StringLit, CharLit, CharLit]);
        assert_eq!(kinds(r#""\\" x"#), vec![StringLit, Identifier]);
    }

    #[test]
    fn text_block() {
        let toks = tokenize("s = \"\"\"\n  if (x) { \"q\" }\n  \"\"\"; y").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![Identifier, Punct, StringLit, Punct, Identifier]
        );
        assert_eq!(toks[4].line, 3);
    }

    #[test]
    fn numbers() {
        let toks = tokenize("1.5e-3 0x1F 10_000L .5f 3").unwrap();
        assert!(toks.iter().all(|t| t.kind == Number), "{toks:?}");
        assert_eq!(toks.len(), 5);
    }

    #[test]
    fn annotations() {
        let toks = tokenize("@Override @interface Foo").unwrap();
        assert_eq!(toks[0].kind, Annotation);
        assert_eq!(toks[0].text, "@Override");
        assert!(toks[1].is_punct('@'));
        assert!(toks[2].is_keyword("interface"));
    }

    #[test]
    fn unterminated_string_reports_line() {
        let err = tokenize("a\nb = \"oops\nc").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, LexErrorKind::UnterminatedString);
    }

    #[test]
    fn unterminated_comment_reports_line() {
        let err = tokenize("x\n\n/* never closed").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.kind, LexErrorKind::UnterminatedComment);
    }

    #[test]
    fn unicode_identifiers() {
        let toks = tokenize("int größe = 1;").unwrap();
        assert_eq!(toks[1].kind, Identifier);
        assert_eq!(toks[1].text, "größe");
    }
}
