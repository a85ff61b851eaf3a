//! Method boundary extraction over the token stream.
//!
//! A brace/parenthesis matcher, not a Java grammar: every `{` is classified
//! from the tokens immediately before it as a class body, a method or
//! constructor body, or a plain block. Generics are not tracked.

use std::collections::HashMap;

use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;

/// One method or constructor declaration with a body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSpan {
    pub file_path: String,
    /// `Class.method(arity)`, with nested classes joined by `.` and anonymous
    /// classes numbered `Outer$1`. Overloads of equal arity get `#2`, `#3`, ...
    /// in source order.
    pub qualified_name: String,
    pub name: String,
    /// Simple name of the declaring class; empty for anonymous classes.
    pub class_name: String,
    pub is_constructor: bool,
    pub returns_void: bool,
    pub param_names: Vec<String>,
    pub start_line: usize,
    pub end_line: usize,
    pub body_open_line: usize,
    pub body_close_line: usize,
    /// Declaration tokens from the first modifier or annotation up to the
    /// closing parenthesis (or the end of the `throws` clause).
    pub signature_tokens: Vec<Token>,
    /// Tokens strictly between the body braces, without comments and without
    /// the tokens of nested methods (anonymous and local classes).
    pub body_tokens: Vec<Token>,
}

impl MethodSpan {
    pub fn arity(&self) -> usize {
        self.param_names.len()
    }

    /// `file_path::qualified_name`, the join key for fault labels.
    pub fn method_id(&self) -> String {
        format!("{}::{}", self.file_path, self.qualified_name)
    }
}

#[derive(Debug, Clone)]
struct ClassScope {
    name: String,
    qual: String,
    is_record: bool,
    record_arity: usize,
    enum_constants_open: bool,
    anon_counter: u32,
}

#[derive(Debug, Clone)]
enum Frame {
    Paren,
    Class(ClassScope),
    Method(usize),
    Block,
}

#[derive(Debug)]
struct PendingClass {
    depth: usize,
    name: String,
    is_enum: bool,
    is_record: bool,
    name_idx: usize,
}

#[derive(Debug)]
struct RawSpan {
    class_qual: String,
    class_name: String,
    name: String,
    is_constructor: bool,
    returns_void: bool,
    param_names: Vec<String>,
    decl_start: usize,
    open: usize,
    close: usize,
}

/// Tokenize `source` and extract one [`MethodSpan`] per method or constructor
/// declaration that has a body.
pub fn extract_methods(source: &str, file_path: &str) -> Result<Vec<MethodSpan>, ParseError> {
    let tokens = tokenize(source).map_err(|e| ParseError::lex(file_path, e))?;
    extract_from_tokens(&tokens, file_path)
}

pub fn extract_from_tokens(tokens: &[Token], file_path: &str) -> Result<Vec<MethodSpan>, ParseError> {
    let code: Vec<Token> = tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Comment)
        .cloned()
        .collect();
    let raw = scan(&code, file_path)?;
    Ok(build_spans(&code, raw, file_path))
}

fn scan(code: &[Token], file_path: &str) -> Result<Vec<RawSpan>, ParseError> {
    let mut stack: Vec<(Frame, usize)> = Vec::new();
    let mut pending: Option<PendingClass> = None;
    let mut spans: Vec<RawSpan> = Vec::new();

    for i in 0..code.len() {
        let tok = &code[i];
        match tok.kind {
            TokenKind::Keyword if matches!(tok.text.as_str(), "class" | "interface" | "enum") => {
                let after_dot = i > 0 && code[i - 1].is_punct('.');
                if !after_dot {
                    if let Some(name_tok) = code.get(i + 1).filter(|t| t.is_ident()) {
                        pending = Some(PendingClass {
                            depth: stack.len(),
                            name: name_tok.text.clone(),
                            is_enum: tok.text == "enum",
                            is_record: false,
                            name_idx: i + 1,
                        });
                    }
                }
            }
            TokenKind::Identifier if tok.text == "record" => {
                let named = code.get(i + 1).is_some_and(|t| t.is_ident());
                let opens = code
                    .get(i + 2)
                    .is_some_and(|t| t.is_punct('(') || t.is_punct('<'));
                if named && opens {
                    pending = Some(PendingClass {
                        depth: stack.len(),
                        name: code[i + 1].text.clone(),
                        is_enum: false,
                        is_record: true,
                        name_idx: i + 1,
                    });
                }
            }
            TokenKind::Punct => match tok.text.as_str() {
                "(" | "[" => stack.push((Frame::Paren, i)),
                ")" | "]" => match stack.pop() {
                    Some((Frame::Paren, _)) => {}
                    _ => return Err(ParseError::unbalanced(file_path, tok.line, &tok.text)),
                },
                ";" => {
                    if let Some((Frame::Class(class), _)) = stack.last_mut() {
                        class.enum_constants_open = false;
                    }
                    if pending.as_ref().is_some_and(|p| p.depth == stack.len()) {
                        pending = None;
                    }
                }
                "{" => {
                    let frame = classify_open(code, i, &mut stack, pending.take(), &mut spans);
                    stack.push((frame, i));
                }
                "}" => match stack.pop() {
                    Some((Frame::Method(idx), _)) => spans[idx].close = i,
                    Some((Frame::Class(_) | Frame::Block, _)) => {}
                    _ => return Err(ParseError::unbalanced(file_path, tok.line, "}")),
                },
                _ => {}
            },
            _ => {}
        }
    }

    if let Some((_, open)) = stack.last() {
        return Err(ParseError::unclosed(file_path, code[*open].line, &code[*open].text));
    }
    Ok(spans)
}

fn nearest_class(stack: &[(Frame, usize)]) -> Option<&ClassScope> {
    stack.iter().rev().find_map(|(f, _)| match f {
        Frame::Class(c) => Some(c),
        _ => None,
    })
}

fn nearest_class_mut(stack: &mut [(Frame, usize)]) -> Option<&mut ClassScope> {
    stack.iter_mut().rev().find_map(|(f, _)| match f {
        Frame::Class(c) => Some(c),
        _ => None,
    })
}

fn classify_open(
    code: &[Token],
    i: usize,
    stack: &mut [(Frame, usize)],
    pending: Option<PendingClass>,
    spans: &mut Vec<RawSpan>,
) -> Frame {
    if let Some(p) = pending.filter(|p| p.depth == stack.len()) {
        let qual = match nearest_class(stack) {
            Some(outer) => format!("{}.{}", outer.qual, p.name),
            None => p.name.clone(),
        };
        let record_arity = if p.is_record {
            record_components(code, p.name_idx, i)
        } else {
            0
        };
        return Frame::Class(ClassScope {
            name: p.name,
            qual,
            is_record: p.is_record,
            record_arity,
            enum_constants_open: p.is_enum,
            anon_counter: 0,
        });
    }

    let (in_paren, in_enum_constants) = match stack.last() {
        Some((Frame::Paren, _)) => (true, false),
        Some((Frame::Class(c), _)) => (false, c.enum_constants_open),
        Some(_) => (false, false),
        None => return Frame::Block,
    };
    let prev = i.checked_sub(1).map(|p| &code[p]);
    let anonymous = in_enum_constants
        || prev.is_some_and(|t| t.is_punct(')'))
            && matching_open(code, i - 1).is_some_and(|open| preceded_by_new(code, open));
    if anonymous {
        return anonymous_class(stack);
    }
    if in_paren {
        return Frame::Block;
    }

    let Some((Frame::Class(class), _)) = stack.last() else {
        return Frame::Block;
    };

    if let Some(close) = declaration_close_paren(code, i) {
        let Some(open) = matching_open(code, close) else {
            return Frame::Block;
        };
        let name_idx = match open.checked_sub(1) {
            Some(n) if code[n].is_ident() => n,
            _ => return Frame::Block,
        };
        let decl_start = declaration_start(code, name_idx);
        let name = code[name_idx].text.clone();
        let is_constructor = name == class.name;
        let returns_void = name_idx > 0 && code[name_idx - 1].is_keyword("void");
        spans.push(RawSpan {
            class_qual: class.qual.clone(),
            class_name: class.name.clone(),
            name,
            is_constructor,
            returns_void,
            param_names: param_names(&code[open + 1..close]),
            decl_start,
            open: i,
            close: i,
        });
        return Frame::Method(spans.len() - 1);
    }

    // Compact canonical constructor of a record: `Name {`.
    if class.is_record && prev.is_some_and(|t| t.is_ident() && t.text == class.name) {
        let name_idx = i - 1;
        spans.push(RawSpan {
            class_qual: class.qual.clone(),
            class_name: class.name.clone(),
            name: class.name.clone(),
            is_constructor: true,
            returns_void: false,
            // Parameters are implicit; names are not visible in the body
            // declaration, but arity follows the record header.
            param_names: (0..class.record_arity).map(|k| format!("${k}")).collect(),
            decl_start: declaration_start(code, name_idx),
            open: i,
            close: i,
        });
        return Frame::Method(spans.len() - 1);
    }

    // Static or instance initializer, or an array initializer in a field.
    Frame::Block
}

fn anonymous_class(stack: &mut [(Frame, usize)]) -> Frame {
    let (qual, n) = match nearest_class_mut(stack) {
        Some(outer) => {
            outer.anon_counter += 1;
            (outer.qual.clone(), outer.anon_counter)
        }
        None => (String::new(), 1),
    };
    Frame::Class(ClassScope {
        name: String::new(),
        qual: format!("{qual}${n}"),
        is_record: false,
        record_arity: 0,
        enum_constants_open: false,
        anon_counter: 0,
    })
}

/// Index of the `(` matching the `)` at `close`.
fn matching_open(code: &[Token], close: usize) -> Option<usize> {
    let mut depth = 0usize;
    for j in (0..=close).rev() {
        if code[j].is_punct(')') {
            depth += 1;
        } else if code[j].is_punct('(') {
            depth -= 1;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

/// Whether the call-like `( ... )` opening at `open` is an instance creation
/// `new Type<Args>(...)`.
fn preceded_by_new(code: &[Token], open: usize) -> bool {
    let mut j = open;
    // Skip type arguments written backwards: `<...>`.
    if j > 0 && code[j - 1].is_punct('>') {
        let mut depth = 0i32;
        loop {
            if j == 0 {
                return false;
            }
            j -= 1;
            if code[j].is_punct('>') {
                depth += 1;
            } else if code[j].is_punct('<') {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
        }
    }
    // Qualified type name `a.b.C`.
    let mut saw_ident = false;
    while j > 0 && (code[j - 1].is_ident() || code[j - 1].is_punct('.')) {
        saw_ident |= code[j - 1].is_ident();
        j -= 1;
    }
    saw_ident && j > 0 && code[j - 1].is_keyword("new")
}

/// For a `{` at `open`, the index of the parameter list's `)` if the tokens
/// before it look like `( ... )` or `( ... ) throws A, b.C`.
fn declaration_close_paren(code: &[Token], open: usize) -> Option<usize> {
    let prev = open.checked_sub(1)?;
    if code[prev].is_punct(')') {
        return Some(prev);
    }
    let mut j = prev;
    loop {
        let t = &code[j];
        if t.is_keyword("throws") {
            let before = j.checked_sub(1)?;
            return code[before].is_punct(')').then_some(before);
        }
        let in_type_list = t.is_ident()
            || t.is_punct('.')
            || t.is_punct(',')
            || t.is_punct('<')
            || t.is_punct('>')
            || t.kind == TokenKind::Annotation;
        if !in_type_list || j == 0 {
            return None;
        }
        j -= 1;
    }
}

/// Walk back from the method name to the first token of the declaration:
/// the token after the previous `;`, `{` or `}` outside parentheses.
fn declaration_start(code: &[Token], name_idx: usize) -> usize {
    let mut depth = 0i32;
    let mut j = name_idx;
    while j > 0 {
        let t = &code[j - 1];
        if t.is_punct(')') {
            depth += 1;
        } else if t.is_punct('(') {
            depth -= 1;
        } else if depth == 0 && (t.is_punct(';') || t.is_punct('{') || t.is_punct('}')) {
            break;
        }
        j -= 1;
    }
    j
}

/// Parameter names: the last identifier of each top-level comma-separated
/// segment of the parameter list.
fn param_names(params: &[Token]) -> Vec<String> {
    let mut names = Vec::new();
    let mut depth = 0i32;
    let mut last_ident: Option<&str> = None;
    let mut nonempty = false;
    for t in params {
        if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "(" | "[" | "{" | "<" => depth += 1,
                ")" | "]" | "}" | ">" => depth -= 1,
                "," if depth == 0 => {
                    names.push(last_ident.unwrap_or("_").to_string());
                    last_ident = None;
                    nonempty = false;
                    continue;
                }
                _ => {}
            }
        }
        nonempty = true;
        if depth == 0 && t.is_ident() {
            last_ident = Some(&t.text);
        }
    }
    if nonempty {
        names.push(last_ident.unwrap_or("_").to_string());
    }
    names
}

fn record_components(code: &[Token], name_idx: usize, body_open: usize) -> usize {
    let Some(open) = (name_idx..body_open).find(|&j| code[j].is_punct('(')) else {
        return 0;
    };
    let mut depth = 0usize;
    for j in open..body_open {
        if code[j].is_punct('(') {
            depth += 1;
        } else if code[j].is_punct(')') {
            depth -= 1;
            if depth == 0 {
                return param_names(&code[open + 1..j]).len();
            }
        }
    }
    0
}

fn build_spans(code: &[Token], raw: Vec<RawSpan>, file_path: &str) -> Vec<MethodSpan> {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by_key(|&k| raw[k].decl_start);

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut spans = Vec::with_capacity(raw.len());
    for &k in &order {
        let r = &raw[k];
        let base = format!("{}.{}({})", r.class_qual, r.name, r.param_names.len());
        let ordinal = seen.entry(base.clone()).or_insert(0);
        *ordinal += 1;
        let qualified_name = if *ordinal == 1 {
            base
        } else {
            format!("{base}#{ordinal}")
        };

        // Nested spans lie wholly inside this body; cut out their tokens.
        let nested: Vec<(usize, usize)> = raw
            .iter()
            .filter(|o| o.decl_start > r.open && o.close < r.close)
            .map(|o| (o.decl_start, o.close))
            .collect();
        let body_tokens = (r.open + 1..r.close)
            .filter(|j| !nested.iter().any(|&(s, e)| (s..=e).contains(j)))
            .map(|j| code[j].clone())
            .collect();

        spans.push(MethodSpan {
            file_path: file_path.to_string(),
            qualified_name,
            name: r.name.clone(),
            class_name: r.class_name.clone(),
            is_constructor: r.is_constructor,
            returns_void: r.returns_void,
            param_names: r.param_names.clone(),
            start_line: code[r.decl_start].line,
            end_line: code[r.close].line,
            body_open_line: code[r.open].line,
            body_close_line: code[r.close].line,
            signature_tokens: code[r.decl_start..r.open].to_vec(),
            body_tokens,
        });
    }
    spans
}
