//! The `.ltw` text format and tree literals.
//!
//! ```text
//! # Example: a^(2^2) in front of every output
//! input f:1 g:0
//! slp A = "a"
//! slp B = $A $A
//! axiom = $B $B q(x)
//! rule q f(x1) = "b" q(x1)
//! rule q g = ""
//! ```
//!
//! One declaration per line. Words are juxtaposed double- or single-quoted
//! literals and `$NAME` references to `slp` declarations; inside an `slp`
//! body the `$` may be omitted. Literals accept `\"`, `\'`, `\\`, `\n`, `\t`
//! and `\xHH` escapes.

use crate::error::Error;
use crate::ltw::{Axiom, Call, Ltw, RankedAlphabet, Rule, StateId};
use crate::tree::Tree;
use crate::word::{Production, SlpPool, WordRef};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Words up to this length are printed as literals.
pub const INLINE_WORD_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Model { line: usize, source: Error },
    #[error("missing axiom declaration")]
    MissingAxiom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Number(usize),
    Literal(Vec<u8>),
    Ref(String),
    Punct(char),
}

struct Lexer<'a> {
    line: usize,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    tokens: Vec<(usize, Token)>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    fn tokenize(line: usize, text: &'a str) -> Result<Vec<(usize, Token)>, ParseError> {
        let mut lx = Lexer {
            line,
            chars: text.char_indices().peekable(),
            tokens: Vec::new(),
        };
        lx.run()?;
        Ok(lx.tokens)
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(&(pos, c)) = self.chars.peek() {
            let col = pos + 1;
            match c {
                '#' => break,
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                '"' | '\'' => {
                    self.chars.next();
                    let lit = self.literal(c, col)?;
                    self.tokens.push((col, Token::Literal(lit)));
                }
                '$' => {
                    self.chars.next();
                    let name = self.ident();
                    if name.is_empty() {
                        return Err(syntax(self.line, col, "expected a name after '$'"));
                    }
                    self.tokens.push((col, Token::Ref(name)));
                }
                '(' | ')' | ',' | ':' | '=' => {
                    self.chars.next();
                    self.tokens.push((col, Token::Punct(c)));
                }
                c if c.is_ascii_digit() => {
                    let mut n = String::new();
                    while let Some(&(_, d)) = self.chars.peek() {
                        if !d.is_ascii_digit() {
                            break;
                        }
                        n.push(d);
                        self.chars.next();
                    }
                    let v = n.parse().map_err(|_| syntax(self.line, col, "number too large"))?;
                    self.tokens.push((col, Token::Number(v)));
                }
                c if is_ident_start(c) => {
                    let name = self.ident();
                    self.tokens.push((col, Token::Ident(name)));
                }
                _ => return Err(syntax(self.line, col, format!("unexpected character '{c}'"))),
            }
        }
        Ok(())
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if !is_ident_char(c) {
                break;
            }
            s.push(c);
            self.chars.next();
        }
        s
    }

    fn literal(&mut self, quote: char, col: usize) -> Result<Vec<u8>, ParseError> {
        let mut out = Vec::new();
        loop {
            let Some((pos, c)) = self.chars.next() else {
                return Err(syntax(self.line, col, "unterminated literal"));
            };
            match c {
                c if c == quote => return Ok(out),
                '\\' => {
                    let Some((_, e)) = self.chars.next() else {
                        return Err(syntax(self.line, pos + 1, "dangling escape"));
                    };
                    match e {
                        '"' | '\'' | '\\' => out.push(e as u8),
                        'n' => out.push(b'\n'),
                        't' => out.push(b'\t'),
                        'x' => {
                            let hex: String = (0..2).filter_map(|_| self.chars.next().map(|(_, h)| h)).collect();
                            let b = u8::from_str_radix(&hex, 16)
                                .map_err(|_| syntax(self.line, pos + 1, "bad \\x escape"))?;
                            out.push(b);
                        }
                        _ => return Err(syntax(self.line, pos + 1, format!("unknown escape '\\{e}'"))),
                    }
                }
                c if c.is_ascii() => out.push(c as u8),
                _ => {
                    let mut buf = [0u8; 4];
                    out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                }
            }
        }
    }
}

struct Cursor {
    line: usize,
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Token> {
        self.tokens.get(self.pos + k).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or(self.tokens.last())
            .map_or(1, |(c, _)| *c)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        syntax(self.line, self.column(), message)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, p: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token::Punct(c)) if *c == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected '{p}'"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

/// One item of a right-hand side.
enum Item {
    Word(WordRef),
    Call { state: String, var: String, column: usize },
}

struct RuleDecl {
    line: usize,
    state: String,
    symbol: String,
    vars: Vec<String>,
    items: Vec<Item>,
}

pub fn parse_ltw(text: &str) -> Result<Ltw, ParseError> {
    parse_ltw_with_pool(text, SlpPool::new())
}

/// Parses into the given (usually freshly seeded) pool.
pub fn parse_ltw_with_pool(text: &str, mut pool: SlpPool) -> Result<Ltw, ParseError> {
    let mut alphabet = RankedAlphabet::new();
    let mut slps: HashMap<String, WordRef> = HashMap::new();
    let mut axiom: Option<(usize, Vec<Item>)> = None;
    let mut rules: Vec<RuleDecl> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens = Lexer::tokenize(line, raw)?;
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor { line, tokens, pos: 0 };
        let keyword = cur.ident("a declaration keyword")?;
        match keyword.as_str() {
            "input" => {
                while !cur.at_end() {
                    let name = cur.ident("a symbol name")?;
                    cur.expect_punct(':')?;
                    let arity = match cur.next() {
                        Some(Token::Number(n)) => n,
                        _ => return Err(syntax(line, cur.column(), "expected an arity")),
                    };
                    alphabet
                        .add(&name, arity)
                        .map_err(|source| ParseError::Model { line, source })?;
                }
            }
            "slp" => {
                let name = cur.ident("an SLP name")?;
                cur.expect_punct('=')?;
                let mut acc = pool.empty();
                while !cur.at_end() {
                    let w = match cur.next() {
                        Some(Token::Literal(s)) => pool.literal(&s),
                        Some(Token::Ref(r) | Token::Ident(r)) => *slps
                            .get(&r)
                            .ok_or_else(|| syntax(line, cur.column(), format!("undefined SLP {r}")))?,
                        _ => return Err(syntax(line, cur.column(), "expected a word")),
                    };
                    acc = pool.concat(acc, w);
                }
                if slps.insert(name.clone(), acc).is_some() {
                    return Err(syntax(line, 1, format!("duplicate SLP {name}")));
                }
            }
            "axiom" => {
                if axiom.is_some() {
                    return Err(syntax(line, 1, "duplicate axiom"));
                }
                cur.expect_punct('=')?;
                axiom = Some((line, parse_items(&mut cur, &mut pool, &slps)?));
            }
            "rule" => {
                let state = cur.ident("a state name")?;
                let symbol = cur.ident("an input symbol")?;
                let mut vars = Vec::new();
                if cur.peek() == Some(&Token::Punct('(')) {
                    cur.pos += 1;
                    if cur.peek() != Some(&Token::Punct(')')) {
                        loop {
                            vars.push(cur.ident("a variable")?);
                            match cur.next() {
                                Some(Token::Punct(',')) => {}
                                Some(Token::Punct(')')) => break,
                                _ => return Err(syntax(line, cur.column(), "expected ',' or ')'")),
                            }
                        }
                    } else {
                        cur.pos += 1;
                    }
                }
                cur.expect_punct('=')?;
                let items = parse_items(&mut cur, &mut pool, &slps)?;
                rules.push(RuleDecl {
                    line,
                    state,
                    symbol,
                    vars,
                    items,
                });
            }
            other => return Err(syntax(line, 1, format!("unknown declaration '{other}'"))),
        }
    }

    let (ax_line, ax_items) = axiom.ok_or(ParseError::MissingAxiom)?;
    let model = |line: usize| move |source: Error| ParseError::Model { line, source };
    let (before, ax_state, after) = split_axiom(ax_line, ax_items, &mut pool)?;
    let mut m = Ltw::new(alphabet, pool, &ax_state);
    let empty = m.pool().empty();
    m.set_axiom(Axiom {
        before,
        state: StateId(0),
        after,
    });

    let intern = |m: &mut Ltw, name: &str| -> StateId { m.state(name).unwrap_or_else(|| m.add_state(name).unwrap()) };
    for decl in &rules {
        intern(&mut m, &decl.state);
        for item in &decl.items {
            if let Item::Call { state, .. } = item {
                intern(&mut m, state);
            }
        }
    }
    for decl in rules {
        let line = decl.line;
        let f = m
            .alphabet()
            .get(&decl.symbol)
            .ok_or_else(|| ParseError::Model {
                line,
                source: Error::UnknownSymbol(decl.symbol.clone()),
            })?;
        let arity = m.alphabet().arity(f);
        if decl.vars.len() != arity {
            return Err(ParseError::Model {
                line,
                source: Error::Arity {
                    symbol: decl.symbol.clone(),
                    expected: arity,
                    found: decl.vars.len(),
                },
            });
        }
        let q = m.state(&decl.state).expect("interned");
        let mut words = vec![empty];
        let mut calls = Vec::new();
        for item in decl.items {
            match item {
                Item::Word(w) => {
                    let last = words.last_mut().expect("nonempty");
                    *last = m.pool_mut().concat(*last, w);
                }
                Item::Call { state, var, column } => {
                    let child = decl
                        .vars
                        .iter()
                        .position(|v| *v == var)
                        .ok_or_else(|| syntax(line, column, format!("unknown variable {var}")))?;
                    calls.push(Call {
                        state: m.state(&state).expect("interned"),
                        child,
                    });
                    words.push(empty);
                }
            }
        }
        m.add_rule(q, f, Rule { words, calls }).map_err(model(line))?;
    }
    Ok(m)
}

fn parse_items(cur: &mut Cursor, pool: &mut SlpPool, slps: &HashMap<String, WordRef>) -> Result<Vec<Item>, ParseError> {
    let mut items = Vec::new();
    while !cur.at_end() {
        let column = cur.column();
        match cur.next() {
            Some(Token::Literal(s)) => items.push(Item::Word(pool.literal(&s))),
            Some(Token::Ref(r)) => {
                let w = *slps
                    .get(&r)
                    .ok_or_else(|| syntax(cur.line, column, format!("undefined SLP {r}")))?;
                items.push(Item::Word(w));
            }
            Some(Token::Ident(state)) => {
                if cur.peek() != Some(&Token::Punct('(')) || !matches!(cur.peek_at(2), Some(Token::Punct(')'))) {
                    return Err(syntax(cur.line, column, "expected a call of the form state(x)"));
                }
                cur.pos += 1;
                let var = cur.ident("a variable")?;
                cur.pos += 1;
                items.push(Item::Call { state, var, column });
            }
            _ => return Err(syntax(cur.line, column, "expected a word or a call")),
        }
    }
    Ok(items)
}

fn split_axiom(line: usize, items: Vec<Item>, pool: &mut SlpPool) -> Result<(WordRef, String, WordRef), ParseError> {
    let mut before = pool.empty();
    let mut after = pool.empty();
    let mut state = None;
    for item in items {
        match item {
            Item::Word(w) if state.is_none() => before = pool.concat(before, w),
            Item::Word(w) => after = pool.concat(after, w),
            Item::Call { state: s, column, .. } => {
                if state.is_some() {
                    return Err(syntax(line, column, "the axiom must contain exactly one call"));
                }
                state = Some(s);
            }
        }
    }
    let state = state.ok_or_else(|| syntax(line, 1, "the axiom must contain exactly one call"))?;
    Ok((before, state, after))
}

/// Tree literal such as `f(g, h())`.
pub fn parse_tree(text: &str) -> Result<Tree, ParseError> {
    let tokens = Lexer::tokenize(1, text)?;
    let mut cur = Cursor { line: 1, tokens, pos: 0 };
    let t = tree_rec(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("trailing input after tree"));
    }
    Ok(t)
}

/// Tree literal checked against an alphabet.
pub fn parse_tree_checked(text: &str, alphabet: &RankedAlphabet) -> Result<Tree, ParseError> {
    let t = parse_tree(text)?;
    check_tree(&t, alphabet).map_err(|source| ParseError::Model { line: 1, source })?;
    Ok(t)
}

pub fn check_tree(t: &Tree, alphabet: &RankedAlphabet) -> Result<(), Error> {
    let f = alphabet
        .get(&t.symbol)
        .ok_or_else(|| Error::UnknownSymbol(t.symbol.clone()))?;
    if alphabet.arity(f) != t.children.len() {
        return Err(Error::Arity {
            symbol: t.symbol.clone(),
            expected: alphabet.arity(f),
            found: t.children.len(),
        });
    }
    t.children.iter().try_for_each(|c| check_tree(c, alphabet))
}

fn tree_rec(cur: &mut Cursor) -> Result<Tree, ParseError> {
    let symbol = cur.ident("a tree symbol")?;
    let mut children = Vec::new();
    if cur.peek() == Some(&Token::Punct('(')) {
        cur.pos += 1;
        if cur.peek() == Some(&Token::Punct(')')) {
            cur.pos += 1;
        } else {
            loop {
                children.push(tree_rec(cur)?);
                match cur.next() {
                    Some(Token::Punct(',')) => {}
                    Some(Token::Punct(')')) => break,
                    _ => {
                        cur.pos -= 1;
                        return Err(cur.err("expected ',' or ')'"));
                    }
                }
            }
        }
    }
    Ok(Tree { symbol, children })
}

/// Escaped double-quoted literal.
pub fn quote(symbols: &[u8]) -> String {
    let mut s = String::with_capacity(symbols.len() + 2);
    s.push('"');
    for &b in symbols {
        match b {
            b'"' => s.push_str("\\\""),
            b'\\' => s.push_str("\\\\"),
            0x20..=0x7e => s.push(b as char),
            _ => {
                let _ = write!(s, "\\x{b:02x}");
            }
        }
    }
    s.push('"');
    s
}

/// Assigns names to long words and emits their `slp` declarations.
struct WordPrinter<'a> {
    pool: &'a SlpPool,
    names: HashMap<WordRef, String>,
    decls: Vec<String>,
}

impl WordPrinter<'_> {
    /// Printed form of a word as a sequence of atoms; empty for ε.
    fn atom(&mut self, w: WordRef) -> String {
        if self.pool.is_empty(w) {
            return String::new();
        }
        match self.pool.expand(w, INLINE_WORD_LIMIT) {
            Ok(s) => quote(&s),
            Err(_) => format!("${}", self.name(w)),
        }
    }

    fn name(&mut self, w: WordRef) -> String {
        if let Some(n) = self.names.get(&w) {
            return n.clone();
        }
        // post-order without recursion; the DAG may be deep
        let mut stack = vec![(w, false)];
        while let Some((v, expanded)) = stack.pop() {
            if self.names.contains_key(&v) {
                continue;
            }
            let Production::Concat(a, b) = self.pool.production(v) else {
                unreachable!("long words are concatenations")
            };
            let long = |x: WordRef| self.pool.expand(x, INLINE_WORD_LIMIT).is_err();
            if !expanded {
                stack.push((v, true));
                for x in [b, a] {
                    if long(x) && !self.names.contains_key(&x) {
                        stack.push((x, false));
                    }
                }
                continue;
            }
            let body: Vec<String> = [a, b]
                .into_iter()
                .map(|x| match self.names.get(&x) {
                    Some(n) => format!("${n}"),
                    None => quote(&self.pool.expand(x, INLINE_WORD_LIMIT).expect("short")),
                })
                .collect();
            let name = format!("W{}", self.decls.len());
            self.decls.push(format!("slp {name} = {}", body.join(" ")));
            self.names.insert(v, name);
        }
        self.names[&w].clone()
    }
}

/// Canonical text: input, slp declarations, axiom, then rules sorted by state
/// name and symbol declaration order.
pub fn print_ltw(m: &Ltw) -> String {
    let mut wp = WordPrinter {
        pool: m.pool(),
        names: HashMap::new(),
        decls: Vec::new(),
    };
    let alphabet = m.alphabet();
    let input: Vec<String> = alphabet
        .symbols()
        .map(|f| format!("{}:{}", alphabet.name(f), alphabet.arity(f)))
        .collect();

    let ax = m.axiom();
    let mut parts = Vec::new();
    let before = wp.atom(ax.before);
    if !before.is_empty() {
        parts.push(before);
    }
    parts.push(format!("{}(x)", m.state_name(ax.state)));
    let after = wp.atom(ax.after);
    if !after.is_empty() {
        parts.push(after);
    }
    let axiom = format!("axiom = {}", parts.join(" "));

    let mut rules: Vec<_> = m.rules().collect();
    rules.sort_by(|a, b| m.state_name(a.0).cmp(m.state_name(b.0)).then(a.1.cmp(&b.1)));
    let mut rule_lines = Vec::new();
    for (q, f, rule) in rules {
        let n = rule.arity();
        let mut head = format!("rule {} {}", m.state_name(q), alphabet.name(f));
        if n > 0 {
            let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            let _ = write!(head, "({})", vars.join(","));
        }
        let mut rhs = Vec::new();
        for (i, &w) in rule.words.iter().enumerate() {
            let a = wp.atom(w);
            if !a.is_empty() {
                rhs.push(a);
            }
            if let Some(c) = rule.calls.get(i) {
                rhs.push(format!("{}(x{})", m.state_name(c.state), c.child + 1));
            }
        }
        if rhs.is_empty() {
            rhs.push("\"\"".to_string());
        }
        rule_lines.push(format!("{head} = {}", rhs.join(" ")));
    }

    let mut out = format!("input {}\n", input.join(" "));
    for d in &wp.decls {
        out.push_str(d);
        out.push('\n');
    }
    out.push_str(&axiom);
    out.push('\n');
    for r in rule_lines {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Structural equality modulo state ids and word-node identity.
pub fn same_structure(a: &Ltw, b: &Ltw) -> bool {
    if a.alphabet() != b.alphabet() || a.num_rules() != b.num_rules() {
        return false;
    }
    let mut memo = HashMap::new();
    let mut pool = a.pool().clone();
    let mut word_eq = |pool: &mut SlpPool, x: WordRef, y: WordRef| {
        let y = pool.import(b.pool(), y, &mut memo);
        pool.equals(x, y)
    };
    let (xa, xb) = (a.axiom(), b.axiom());
    if a.state_name(xa.state) != b.state_name(xb.state)
        || !word_eq(&mut pool, xa.before, xb.before)
        || !word_eq(&mut pool, xa.after, xb.after)
    {
        return false;
    }
    for (q, f, r) in a.rules() {
        let Some(q2) = b.state(a.state_name(q)) else { return false };
        let Some(r2) = b.rule(q2, f) else { return false };
        if r.sigma() != r2.sigma() {
            return false;
        }
        for (c, c2) in r.calls.iter().zip(&r2.calls) {
            if a.state_name(c.state) != b.state_name(c2.state) {
                return false;
            }
        }
        for (&w, &w2) in r.words.iter().zip(&r2.words) {
            if !word_eq(&mut pool, w, w2) {
                return false;
            }
        }
    }
    true
}
