//! Recognition of multi-character operators from adjacent punctuation.

use super::lexer::{Token, TokenKind};

// Longest first for maximal munch.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

/// Merge runs of touching punctuation tokens into operators by maximal
/// munch. Non-punctuation tokens pass through unchanged; comments are dropped.
pub fn glue(tokens: &[Token]) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        if tok.kind == TokenKind::Comment {
            i += 1;
            continue;
        }
        if tok.kind != TokenKind::Punct {
            out.push(tok.clone());
            i += 1;
            continue;
        }
        // Collect the run of touching punctuation starting here (at most 4).
        let mut run = tok.text.clone();
        let mut j = i + 1;
        while j < tokens.len()
            && j - i < 4
            && tokens[j].kind == TokenKind::Punct
            && tokens[j].offset == tokens[j - 1].end()
        {
            run.push_str(&tokens[j].text);
            j += 1;
        }
        let matched = OPERATORS
            .iter()
            .find(|op| run.starts_with(*op))
            .map(|op| op.len())
            .unwrap_or(tok.text.len());
        // Each punct token is one ASCII char, except stray non-ASCII punctuation.
        let consumed = if matched == tok.text.len() {
            1
        } else {
            matched
        };
        out.push(Token {
            kind: TokenKind::Punct,
            text: run[..matched].to_string(),
            line: tok.line,
            offset: tok.offset,
        });
        i += consumed;
    }
    out
}
