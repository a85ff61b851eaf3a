use std::collections::BTreeSet;

use super::extract::MethodSpan;
use super::lexer::{Token, TokenKind, PRIMITIVE_TYPES};
use super::ops::glue;
use crate::metric::{CategoryId, CategorySet, CountMetricId, MetricVector, NumericMetricId};

/// Compute the numeric metrics, construct counts and categories of a method.
pub fn compute_metrics(span: &MethodSpan) -> MetricVector {
    let body = glue(&span.body_tokens);
    let do_tails = do_while_tails(&body);

    let mut m = MetricVector::default();
    m.set_numeric(NumericMetricId::Sloc, sloc(span));
    m.set_numeric(NumericMetricId::MaxNestingDepth, max_nesting(&body));
    m.set_numeric(NumericMetricId::NumParameters, span.arity() as u32);
    m.set_numeric(NumericMetricId::NumStatements, count_statements(&body, &do_tails));

    let mut decisions = 0;
    for (i, t) in body.iter().enumerate() {
        let mut bump = |id: CountMetricId| m.counts[id.index()] += 1;
        match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "for" | "do") => {
                bump(CountMetricId::Loops);
                decisions += 1;
            }
            (TokenKind::Keyword, "while") if !do_tails.contains(&i) => {
                bump(CountMetricId::Loops);
                decisions += 1;
            }
            (TokenKind::Keyword, "if") => {
                bump(CountMetricId::Conditions);
                decisions += 1;
            }
            (TokenKind::Punct, "?") if is_ternary(&body, i) => {
                bump(CountMetricId::Conditions);
                decisions += 1;
            }
            (TokenKind::Keyword, "case") => {
                bump(CountMetricId::SwitchCases);
                decisions += 1;
            }
            (TokenKind::Keyword, "catch") => decisions += 1,
            (TokenKind::Keyword, "try") => bump(CountMetricId::TryBlocks),
            (TokenKind::Keyword, "return") => bump(CountMetricId::Returns),
            (TokenKind::Keyword, "throw") => bump(CountMetricId::Throws),
            (TokenKind::Punct, "&&" | "||") => {
                bump(CountMetricId::LogicalOperators);
                decisions += 1;
            }
            (TokenKind::Punct, "!") => bump(CountMetricId::LogicalOperators),
            (TokenKind::Punct, "+" | "-" | "*" | "/" | "%") => {
                bump(CountMetricId::ArithmeticOperators)
            }
            (TokenKind::Punct, "(") if is_cast(&body, i) => bump(CountMetricId::Casts),
            _ => {}
        }
        if starts_local_declaration(&body, i) {
            m.counts[CountMetricId::LocalVariables.index()] += 1;
        }
    }
    m.set_numeric(NumericMetricId::CyclomaticComplexity, 1 + decisions);
    m.categories = categorize(span, &m);
    m
}

/// Lines holding at least one code token of the method: its declaration,
/// both body braces and every body token (multi-line literals count every
/// line they cover).
fn sloc(span: &MethodSpan) -> u32 {
    let mut lines = BTreeSet::new();
    for t in span.signature_tokens.iter().chain(&span.body_tokens) {
        lines.extend(t.line..=t.end_line());
    }
    lines.insert(span.body_open_line);
    lines.insert(span.body_close_line);
    lines.len() as u32
}

fn max_nesting(body: &[Token]) -> u32 {
    let mut depth = 0u32;
    let mut max = 0u32;
    for t in body {
        if t.is_punct('{') {
            depth += 1;
            max = max.max(depth);
        } else if t.is_punct('}') {
            depth = depth.saturating_sub(1);
        }
    }
    max
}

/// Indices of `while` tokens that close a braced `do { ... } while (...)`.
fn do_while_tails(body: &[Token]) -> BTreeSet<usize> {
    let mut tails = BTreeSet::new();
    let mut opened_by_do: Vec<bool> = Vec::new();
    for (i, t) in body.iter().enumerate() {
        if t.is_punct('{') {
            opened_by_do.push(i > 0 && body[i - 1].is_keyword("do"));
        } else if t.is_punct('}')
            && opened_by_do.pop() == Some(true)
            && body.get(i + 1).is_some_and(|n| n.is_keyword("while"))
        {
            tails.insert(i + 1);
        }
    }
    tails
}

/// Statements: `;` terminators directly inside braces (not in a `for` header
/// or other parentheses) plus compound statements that need no terminator.
fn count_statements(body: &[Token], do_tails: &BTreeSet<usize>) -> u32 {
    let mut count = 0;
    let mut brackets: Vec<char> = Vec::new();
    for (i, t) in body.iter().enumerate() {
        match (t.kind, t.text.as_str()) {
            (TokenKind::Punct, "(" | "[" | "{") => brackets.push(t.text.chars().next().unwrap()),
            (TokenKind::Punct, ")" | "]" | "}") => {
                brackets.pop();
            }
            (TokenKind::Punct, ";") if matches!(brackets.last(), None | Some('{')) => count += 1,
            (TokenKind::Keyword, "if" | "for" | "switch" | "try" | "synchronized") => count += 1,
            (TokenKind::Keyword, "while") if !do_tails.contains(&i) => count += 1,
            _ => {}
        }
    }
    count
}

fn is_ternary(body: &[Token], i: usize) -> bool {
    let prev_wild = i > 0 && (body[i - 1].is_punct('<') || body[i - 1].is_punct(','));
    let next_wild = body.get(i + 1).is_some_and(|n| {
        n.is_keyword("extends")
            || n.is_keyword("super")
            || matches!(n.text.as_str(), ">" | ">>" | ">>>" | ",")
    });
    !(prev_wild || next_wild)
}

/// Skip a type starting at `j`: a primitive, or a dotted name with optional
/// type arguments, followed by any number of `[]`. Returns the index after it.
fn skip_type(body: &[Token], mut j: usize) -> Option<usize> {
    let t = body.get(j)?;
    if t.kind == TokenKind::Keyword && PRIMITIVE_TYPES.contains(&t.text.as_str()) {
        j += 1;
    } else if t.is_ident() {
        j += 1;
        while body.get(j).is_some_and(|d| d.is_punct('.'))
            && body.get(j + 1).is_some_and(Token::is_ident)
        {
            j += 2;
        }
        if body.get(j).is_some_and(|t| t.is_punct('<')) {
            j = skip_type_args(body, j)?;
        }
    } else {
        return None;
    }
    while body.get(j).is_some_and(|t| t.is_punct('[')) && body.get(j + 1).is_some_and(|t| t.is_punct(']')) {
        j += 2;
    }
    Some(j)
}

fn skip_type_args(body: &[Token], start: usize) -> Option<usize> {
    let mut depth = 0i32;
    let mut j = start;
    loop {
        let t = body.get(j)?;
        match (t.kind, t.text.as_str()) {
            (TokenKind::Punct, "<") => depth += 1,
            (TokenKind::Punct, ">") => depth -= 1,
            (TokenKind::Punct, ">>") => depth -= 2,
            (TokenKind::Punct, ">>>") => depth -= 3,
            (TokenKind::Punct, "." | "," | "?" | "[" | "]" | "&") => {}
            (TokenKind::Identifier | TokenKind::Annotation, _) => {}
            (TokenKind::Keyword, "extends" | "super") => {}
            (TokenKind::Keyword, kw) if PRIMITIVE_TYPES.contains(&kw) => {}
            _ => return None,
        }
        j += 1;
        if depth <= 0 {
            return (depth == 0).then_some(j);
        }
    }
}

/// `( Type )` directly followed by an operand, where the `(` cannot be a
/// call, a control-statement header or an annotation argument list.
fn is_cast(body: &[Token], open: usize) -> bool {
    if let Some(prev) = open.checked_sub(1).map(|p| &body[p]) {
        let blocked = prev.is_ident()
            || prev.is_punct(')')
            || prev.is_punct(']')
            || prev.kind == TokenKind::Annotation
            || (prev.kind == TokenKind::Keyword
                && matches!(
                    prev.text.as_str(),
                    "if" | "while" | "for" | "switch" | "catch" | "synchronized" | "try" | "this" | "super"
                ));
        if blocked {
            return false;
        }
    }
    let Some(close) = skip_type(body, open + 1) else {
        return false;
    };
    if !body.get(close).is_some_and(|t| t.is_punct(')')) {
        return false;
    }
    body.get(close + 1).is_some_and(|n| {
        n.is_ident()
            || n.is_literal()
            || n.is_punct('(')
            || (n.kind == TokenKind::Keyword && matches!(n.text.as_str(), "this" | "new" | "super"))
    })
}

/// `[final] Type name` followed by `=`, `;`, `,` or (in a `for` header) `:`,
/// starting at a statement boundary.
fn starts_local_declaration(body: &[Token], i: usize) -> bool {
    let in_header = i >= 2
        && body[i - 1].is_punct('(')
        && (body[i - 2].is_keyword("for") || body[i - 2].is_keyword("try"));
    let at_boundary = i == 0
        || in_header
        || matches!(body[i - 1].text.as_str(), ";" | "{" | "}" | ":") && body[i - 1].kind == TokenKind::Punct;
    if !at_boundary {
        return false;
    }
    let mut j = i;
    while body
        .get(j)
        .is_some_and(|t| t.is_keyword("final") || t.kind == TokenKind::Annotation)
    {
        j += 1;
    }
    if body.get(j).is_some_and(|t| t.text == "yield") {
        return false;
    }
    let Some(after_type) = skip_type(body, j) else {
        return false;
    };
    if !body.get(after_type).is_some_and(Token::is_ident) {
        return false;
    }
    match body.get(after_type + 1).map(|t| t.text.as_str()) {
        Some("=" | ";" | ",") => true,
        Some(":") => in_header,
        _ => false,
    }
}

/// Index just past a "chain" expression `a.b(x).c` starting at `start`, and
/// the number of call argument groups in it.
fn chain(body: &[Token], start: usize) -> Option<(usize, usize)> {
    let first = body.get(start)?;
    if !(first.is_ident() || first.is_keyword("this") || first.is_keyword("super")) {
        return None;
    }
    let mut j = start + 1;
    let mut calls = 0;
    loop {
        match body.get(j) {
            Some(t) if t.is_punct('.') && body.get(j + 1).is_some_and(Token::is_ident) => j += 2,
            Some(t) if t.is_punct('(') => {
                let mut depth = 0i32;
                loop {
                    let t = body.get(j)?;
                    if t.is_punct('(') {
                        depth += 1;
                    } else if t.is_punct(')') {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    j += 1;
                }
                j += 1;
                calls += 1;
            }
            _ => return Some((j, calls)),
        }
    }
}

/// Assign category flags from the method's shape.
///
/// - Getter: no parameters, non-void, body is `return <field or call chain>;`
/// - Setter: void, body is one assignment of a parameter to a field
/// - Delegation: body is one statement consisting of a single method call,
///   optionally returned
/// - Empty: no statements
/// - Constructor: declaration name equals the class name
/// - EqualsHashCodeToString: named `equals`, `hashCode` or `toString`
pub fn categorize(span: &MethodSpan, metrics: &MetricVector) -> CategorySet {
    let body = glue(&span.body_tokens);
    let n = body.len();
    let mut cats = CategorySet::empty();

    let empty = metrics.numeric(NumericMetricId::NumStatements) == 0;
    cats.set(CategoryId::Empty, empty);
    cats.set(CategoryId::Constructor, span.is_constructor);
    cats.set(
        CategoryId::EqualsHashCodeToString,
        matches!(span.name.as_str(), "equals" | "hashCode" | "toString"),
    );
    if empty || n < 2 || !body[n - 1].is_punct(';') {
        return cats;
    }

    let returned = body[0].is_keyword("return");
    let expr_start = usize::from(returned);
    if let Some((end, calls)) = chain(&body, expr_start) {
        let whole = end == n - 1;
        if whole && returned && span.param_names.is_empty() && !span.returns_void && !span.is_constructor {
            cats.insert(CategoryId::Getter);
        }
        if whole && calls == 1 && body[end - 1].is_punct(')') {
            cats.insert(CategoryId::Delegation);
        }
    }

    if span.returns_void && !span.param_names.is_empty() && !returned {
        let lhs_end = if body[0].is_keyword("this") && n > 2 && body[1].is_punct('.') && body[2].is_ident() {
            Some(3)
        } else if body[0].is_ident() && !span.param_names.contains(&body[0].text) {
            Some(1)
        } else {
            None
        };
        if let Some(k) = lhs_end {
            let assigns_param = n == k + 3
                && body[k].is_punct('=')
                && body[k + 1].is_ident()
                && span.param_names.contains(&body[k + 1].text);
            cats.set(CategoryId::Setter, assigns_param);
        }
    }
    cats
}
