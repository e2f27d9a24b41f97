//! Recursive-descent parser for the textual query grammar.
//!
//! Keywords are case-insensitive and whitespace is free-form. Identifiers
//! (variables, labels, relationship types, property names) are
//! case-sensitive. Property keys may be quoted strings when they are not
//! plain identifiers; dotted keys like `network.cidr` parse bare.

use super::{
    CompareOp, Direction, EdgePattern, GraphQueryIR, NodePattern, OrderBy, Predicate, ReturnItem,
    SortDirection,
};
use crate::model::PropertyValue;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Parse failure with source position and the token set that would have
/// been accepted.
#[derive(Debug, Error, PartialEq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: found {}, expected {}",
            self.line,
            self.col,
            self.found,
            self.expected.join(" | ")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    Dash,
    Arrow,     // ->
    BackArrow, // <-
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(s) => format!("number {s}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Dash => "'-'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::BackArrow => "'<-'".into(),
            Tok::Eq => "'='".into(),
            Tok::Ne => "'<>'".into(),
            Tok::Lt => "'<'".into(),
            Tok::Le => "'<='".into(),
            Tok::Gt => "'>'".into(),
            Tok::Ge => "'>='".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

struct Cursor {
    chars: Vec<char>,
    idx: usize,
    line: u32,
    col: u32,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.idx + ahead).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.idx];
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn take_while(&mut self, keep: impl Fn(char) -> bool, into: &mut String) {
        while let Some(c) = self.peek() {
            if keep(c) {
                into.push(self.bump());
            } else {
                break;
            }
        }
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut cur = Cursor {
        chars: text.chars().collect(),
        idx: 0,
        line: 1,
        col: 1,
    };

    while let Some(c) = cur.peek() {
        let (tline, tcol) = (cur.line, cur.col);

        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_', &mut ident);
            out.push(Spanned {
                tok: Tok::Ident(ident),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut num = String::new();
            cur.take_while(|c| c.is_ascii_digit(), &mut num);
            // A dot only joins the number when a digit follows; otherwise it
            // is property-path punctuation.
            if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                num.push(cur.bump());
                cur.take_while(|c| c.is_ascii_digit(), &mut num);
            }
            if matches!(cur.peek(), Some('e') | Some('E')) {
                let after_sign = match cur.peek_at(1) {
                    Some('+') | Some('-') => cur.peek_at(2),
                    other => other,
                };
                if after_sign.is_some_and(|c| c.is_ascii_digit()) {
                    num.push(cur.bump());
                    if matches!(cur.peek(), Some('+') | Some('-')) {
                        num.push(cur.bump());
                    }
                    cur.take_while(|c| c.is_ascii_digit(), &mut num);
                }
            }
            out.push(Spanned {
                tok: Tok::Num(num),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.peek() {
                    None => {
                        return Err(ParseError {
                            line: tline,
                            col: tcol,
                            found: "unterminated string".into(),
                            expected: vec!["closing '\"'".into()],
                        })
                    }
                    Some('"') => {
                        cur.bump();
                        break;
                    }
                    Some('\\') => {
                        let (eline, ecol) = (cur.line, cur.col);
                        cur.bump();
                        match cur.peek() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('r') => s.push('\r'),
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            other => {
                                return Err(ParseError {
                                    line: eline,
                                    col: ecol,
                                    found: format!(
                                        "escape \\{}",
                                        other.map_or(String::new(), |c| c.to_string())
                                    ),
                                    expected: vec!["one of \\n \\t \\r \\\" \\\\".into()],
                                })
                            }
                        }
                        cur.bump();
                    }
                    Some(_) => {
                        let c = cur.bump();
                        s.push(c);
                    }
                }
            }
            out.push(Spanned {
                tok: Tok::Str(s),
                line: tline,
                col: tcol,
            });
            continue;
        }

        cur.bump();
        let follow = cur.peek();
        let mut eat_one = |tok: Tok| {
            cur.bump();
            tok
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::Eq,
            '-' => match follow {
                Some('>') => eat_one(Tok::Arrow),
                _ => Tok::Dash,
            },
            '<' => match follow {
                Some('-') => eat_one(Tok::BackArrow),
                Some('=') => eat_one(Tok::Le),
                Some('>') => eat_one(Tok::Ne),
                _ => Tok::Lt,
            },
            '>' => match follow {
                Some('=') => eat_one(Tok::Ge),
                _ => Tok::Gt,
            },
            '!' => match follow {
                Some('=') => eat_one(Tok::Ne),
                _ => {
                    return Err(ParseError {
                        line: tline,
                        col: tcol,
                        found: "'!'".into(),
                        expected: vec!["'!='".into()],
                    })
                }
            },
            other => {
                return Err(ParseError {
                    line: tline,
                    col: tcol,
                    found: format!("{other:?}"),
                    expected: vec!["a query token".into()],
                })
            }
        };
        out.push(Spanned {
            tok,
            line: tline,
            col: tcol,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line: cur.line,
        col: cur.col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    patterns: Vec<NodePattern>,
    var_index: BTreeMap<String, usize>,
    anon_counter: usize,
}

/// Parses the textual grammar into a validated [`GraphQueryIR`].
pub fn parse_ir_text(text: &str) -> Result<GraphQueryIR, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        patterns: Vec::new(),
        var_index: BTreeMap::new(),
        anon_counter: 0,
    };
    parser.query()
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let here = self.peek();
        ParseError {
            line: here.line,
            col: here.col,
            found: here.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn error_at(&self, spanned: &Spanned, found: String, expected: &[&str]) -> ParseError {
        ParseError {
            line: spanned.line,
            col: spanned.col,
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn keyword(&self) -> Option<String> {
        match &self.peek().tok {
            Tok::Ident(s) => Some(s.to_ascii_uppercase()),
            _ => None,
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.keyword().as_deref() == Some(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(&[kw]))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn query(&mut self) -> Result<GraphQueryIR, ParseError> {
        let mut edges = Vec::new();

        self.expect_keyword("MATCH")?;
        self.match_paths(&mut edges)?;
        while self.eat_keyword("MATCH") {
            self.match_paths(&mut edges)?;
        }

        let mut predicates = Vec::new();
        if self.eat_keyword("WHERE") {
            predicates.push(self.predicate()?);
            while self.eat_keyword("AND") {
                predicates.push(self.predicate()?);
            }
        }

        self.expect_keyword("RETURN")?;
        let mut returns = vec![self.return_item()?];
        while self.eat(&Tok::Comma) {
            returns.push(self.return_item()?);
        }

        let mut order_by = None;
        if self.eat_keyword("ORDER") {
            self.expect_keyword("BY")?;
            let (var, property) = self.qualified()?;
            let direction = if self.eat_keyword("DESC") {
                SortDirection::Desc
            } else {
                self.eat_keyword("ASC");
                SortDirection::Asc
            };
            order_by = Some(OrderBy {
                var,
                property,
                direction,
            });
        }

        let mut limit = None;
        if self.eat_keyword("LIMIT") {
            let here = self.peek().clone();
            let n = self.integer("a positive integer")?;
            if n <= 0 {
                return Err(self.error_at(&here, format!("LIMIT {n}"), &["a positive integer"]));
            }
            limit = Some(n as usize);
        }

        if self.peek().tok != Tok::Eof {
            return Err(self.error(&["end of query"]));
        }

        let ir = GraphQueryIR {
            node_patterns: std::mem::take(&mut self.patterns),
            edge_patterns: edges,
            predicates,
            returns,
            order_by,
            limit,
        };
        debug_assert!(ir.validate().is_ok(), "parser produced invalid IR");
        Ok(ir)
    }

    fn match_paths(&mut self, edges: &mut Vec<EdgePattern>) -> Result<(), ParseError> {
        loop {
            self.path(edges)?;
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(())
    }

    fn path(&mut self, edges: &mut Vec<EdgePattern>) -> Result<(), ParseError> {
        let mut left = self.node_pattern()?;
        loop {
            let (rel_type, direction) = match self.peek().tok {
                Tok::Dash => {
                    self.advance();
                    let rel = self.edge_body()?;
                    match self.peek().tok {
                        Tok::Arrow => {
                            self.advance();
                            (rel, Direction::Forward)
                        }
                        Tok::Dash => {
                            self.advance();
                            (rel, Direction::Either)
                        }
                        _ => return Err(self.error(&["'->'", "'-'"])),
                    }
                }
                Tok::BackArrow => {
                    self.advance();
                    let rel = self.edge_body()?;
                    self.expect(Tok::Dash, "'-'")?;
                    (rel, Direction::Backward)
                }
                _ => break,
            };
            let right = self.node_pattern()?;
            edges.push(EdgePattern {
                src_var: left.clone(),
                dst_var: right.clone(),
                rel_type,
                direction,
            });
            left = right;
        }
        Ok(())
    }

    fn edge_body(&mut self) -> Result<String, ParseError> {
        self.expect(Tok::LBracket, "'['")?;
        self.expect(Tok::Colon, "':'")?;
        let rel = self.ident("a relationship type")?;
        self.expect(Tok::RBracket, "']'")?;
        Ok(rel)
    }

    /// Parses one `(var:Label {k: v})` pattern and returns the variable it
    /// binds. Re-referencing a declared variable merges its constraints.
    fn node_pattern(&mut self) -> Result<String, ParseError> {
        let open = self.peek().clone();
        self.expect(Tok::LParen, "'('")?;

        let var = match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance();
                Some(s)
            }
            _ => None,
        };
        let label = if self.eat(&Tok::Colon) {
            Some(self.ident("a node label")?)
        } else {
            None
        };
        let mut props = BTreeMap::new();
        if self.eat(&Tok::LBrace) && !self.eat(&Tok::RBrace) {
            loop {
                let key = self.prop_key()?;
                self.expect(Tok::Colon, "':'")?;
                let value = self.literal()?;
                props.insert(key, value);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(Tok::Comma, "','")?;
            }
        }
        self.expect(Tok::RParen, "')'")?;

        let var = match var {
            Some(v) => v,
            None => {
                // Anonymous pattern: allocate a fresh variable name.
                loop {
                    let candidate = format!("_anon{}", self.anon_counter);
                    self.anon_counter += 1;
                    if !self.var_index.contains_key(&candidate) {
                        break candidate;
                    }
                }
            }
        };

        match self.var_index.get(&var).copied() {
            Some(idx) => {
                match (&self.patterns[idx].label, &label) {
                    (Some(a), Some(b)) if a != b => {
                        let found = format!(
                            "variable {var:?} re-declared with label {b:?} (already {a:?})"
                        );
                        return Err(self.error_at(&open, found, &["a matching label or none"]));
                    }
                    (None, Some(b)) => self.patterns[idx].label = Some(b.clone()),
                    _ => {}
                }
                for (k, v) in props {
                    if self.patterns[idx]
                        .prop_equals
                        .get(&k)
                        .is_some_and(|prev| prev != &v)
                    {
                        let found = format!(
                            "variable {var:?} re-declared with conflicting value for {k:?}"
                        );
                        return Err(self.error_at(
                            &open,
                            found,
                            &["a consistent property constraint"],
                        ));
                    }
                    self.patterns[idx].prop_equals.insert(k, v);
                }
            }
            None => {
                self.var_index.insert(var.clone(), self.patterns.len());
                self.patterns.push(NodePattern {
                    var: var.clone(),
                    label,
                    prop_equals: props,
                });
            }
        }
        Ok(var)
    }

    fn prop_key(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            Tok::Ident(_) => self.dotted_name("a property key"),
            _ => Err(self.error(&["a property key", "a quoted key"])),
        }
    }

    fn dotted_name(&mut self, what: &str) -> Result<String, ParseError> {
        let mut name = self.ident(what)?;
        while self.peek().tok == Tok::Dot {
            self.advance();
            name.push('.');
            name.push_str(&self.ident("a property segment")?);
        }
        Ok(name)
    }

    fn qualified(&mut self) -> Result<(String, String), ParseError> {
        let here = self.peek().clone();
        let var = self.ident("a variable")?;
        if !self.var_index.contains_key(&var) {
            return Err(self.error_at(
                &here,
                format!("undeclared variable {var:?}"),
                &["a variable declared in MATCH"],
            ));
        }
        self.expect(Tok::Dot, "'.'")?;
        let property = self.dotted_name("a property name")?;
        Ok((var, property))
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        if self.keyword().as_deref() == Some("EXISTS") {
            self.advance();
            self.expect(Tok::LParen, "'('")?;
            let (var, property) = self.qualified()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(Predicate::Exists { var, property });
        }
        let (var, property) = self.qualified()?;
        if self.keyword().as_deref() == Some("BETWEEN") {
            self.advance();
            let start_tok = self.peek().clone();
            let start = self.integer("a timestamp")?;
            self.expect_keyword("AND")?;
            let end = self.integer("a timestamp")?;
            if start > end {
                return Err(self.error_at(
                    &start_tok,
                    format!("window {start}..{end}"),
                    &["start <= end"],
                ));
            }
            return Ok(Predicate::TimeWindow {
                var,
                property,
                start,
                end,
            });
        }
        let op = match self.peek().tok {
            Tok::Eq => CompareOp::Eq,
            Tok::Ne => CompareOp::Ne,
            Tok::Lt => CompareOp::Lt,
            Tok::Le => CompareOp::Le,
            Tok::Gt => CompareOp::Gt,
            Tok::Ge => CompareOp::Ge,
            _ => return Err(self.error(&["'='", "'<>'", "'<'", "'<='", "'>'", "'>='", "BETWEEN"])),
        };
        self.advance();
        let value = self.literal()?;
        Ok(Predicate::Compare {
            var,
            property,
            op,
            value,
        })
    }

    fn integer(&mut self, what: &str) -> Result<i64, ParseError> {
        let negative = self.eat(&Tok::Dash);
        match &self.peek().tok {
            Tok::Num(raw) => {
                let here = self.peek().clone();
                let parsed: i64 = raw
                    .parse()
                    .map_err(|_| self.error_at(&here, format!("number {raw}"), &[what]))?;
                self.advance();
                Ok(if negative { -parsed } else { parsed })
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn literal(&mut self) -> Result<PropertyValue, ParseError> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(PropertyValue::Text(s))
            }
            Tok::Num(raw) => {
                let here = self.peek().clone();
                let n: f64 = raw
                    .parse()
                    .map_err(|_| self.error_at(&here, format!("number {raw}"), &["a number"]))?;
                self.advance();
                Ok(PropertyValue::Number(n))
            }
            Tok::Dash => {
                self.advance();
                match self.peek().tok.clone() {
                    Tok::Num(raw) => {
                        let here = self.peek().clone();
                        let n: f64 = raw.parse().map_err(|_| {
                            self.error_at(&here, format!("number {raw}"), &["a number"])
                        })?;
                        self.advance();
                        Ok(PropertyValue::Number(-n))
                    }
                    _ => Err(self.error(&["a number"])),
                }
            }
            Tok::Ident(word) => {
                let upper = word.to_ascii_uppercase();
                match upper.as_str() {
                    "TRUE" => {
                        self.advance();
                        Ok(PropertyValue::Bool(true))
                    }
                    "FALSE" => {
                        self.advance();
                        Ok(PropertyValue::Bool(false))
                    }
                    "TIMESTAMP" => {
                        self.advance();
                        self.expect(Tok::LParen, "'('")?;
                        let secs = self.integer("epoch seconds")?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(PropertyValue::Timestamp(secs))
                    }
                    _ => {
                        Err(self.error(&["a string", "a number", "true", "false", "timestamp(n)"]))
                    }
                }
            }
            _ => Err(self.error(&["a string", "a number", "true", "false", "timestamp(n)"])),
        }
    }

    fn return_item(&mut self) -> Result<ReturnItem, ParseError> {
        let here = self.peek().clone();
        let var = self.ident("a variable")?;
        if !self.var_index.contains_key(&var) {
            return Err(self.error_at(
                &here,
                format!("undeclared variable {var:?}"),
                &["a variable declared in MATCH"],
            ));
        }
        if self.eat(&Tok::Dot) {
            let property = self.dotted_name("a property name")?;
            Ok(ReturnItem::Property(var, property))
        } else {
            Ok(ReturnItem::Node(var))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED_EXAMPLE: &str = r#"
        MATCH (ci:ComputeInstance)-[:DEPLOYED_IN]->(:Environment {name:"Production"})
        MATCH (ci)-[:HAS_VULNERABILITY]->(v:Vulnerability)
        RETURN ci.name, v.description
    "#;

    #[test]
    fn worked_example_shapes() {
        let ir = parse_ir_text(WORKED_EXAMPLE).unwrap();
        assert_eq!(ir.node_patterns.len(), 3);
        assert_eq!(ir.edge_patterns.len(), 2);
        assert_eq!(ir.returns.len(), 2);
        assert!(ir.predicates.is_empty());

        // The anonymous environment pattern carries the property constraint.
        let env = &ir.node_patterns[1];
        assert_eq!(env.label.as_deref(), Some("Environment"));
        assert_eq!(
            env.prop_equals.get("name"),
            Some(&PropertyValue::Text("Production".into()))
        );
        // `(ci)` in the second MATCH re-references rather than re-declares.
        assert_eq!(ir.node_patterns[0].var, "ci");
        assert_eq!(ir.edge_patterns[1].src_var, "ci");
    }

    #[test]
    fn minimal_query() {
        let ir = parse_ir_text("MATCH (n) RETURN n").unwrap();
        assert_eq!(ir.node_patterns.len(), 1);
        assert_eq!(ir.node_patterns[0].label, None);
        assert_eq!(ir.returns, vec![ReturnItem::Node("n".into())]);
    }

    #[test]
    fn unclosed_pattern_reports_position() {
        let err = parse_ir_text("MATCH (a:X RETURN a").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col >= 12, "column was {}", err.col);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let ir = parse_ir_text("match (n:NLB) return n.name order by n.name desc limit 2").unwrap();
        assert_eq!(ir.limit, Some(2));
        assert_eq!(ir.order_by.as_ref().unwrap().direction, SortDirection::Desc);
    }

    #[test]
    fn where_clause_forms() {
        let ir = parse_ir_text(
            r#"MATCH (a:Service), (b:Database)
               WHERE a.cost >= 12.5 AND a.created_at BETWEEN 100 AND 200
                 AND EXISTS(b.cpu_util) AND a.state <> "stopped" AND b.shared != true
               RETURN a.name"#,
        )
        .unwrap();
        assert_eq!(ir.predicates.len(), 5);
        assert!(matches!(
            ir.predicates[1],
            Predicate::TimeWindow {
                start: 100,
                end: 200,
                ..
            }
        ));
        assert!(matches!(
            ir.predicates[4],
            Predicate::Compare {
                op: CompareOp::Ne,
                value: PropertyValue::Bool(true),
                ..
            }
        ));
    }

    #[test]
    fn backward_and_either_edges() {
        let ir = parse_ir_text(
            "MATCH (a:NLB)<-[:FRONTED_BY]-(s:Service)-[:COMMUNICATES_WITH]-(t:Service) RETURN a",
        )
        .unwrap();
        assert_eq!(ir.edge_patterns[0].direction, Direction::Backward);
        assert_eq!(ir.edge_patterns[1].direction, Direction::Either);
    }

    #[test]
    fn conflicting_redeclaration_is_rejected() {
        let err = parse_ir_text("MATCH (a:X) MATCH (a:Y) RETURN a").unwrap_err();
        assert!(err.found.contains("re-declared"));
    }

    #[test]
    fn undeclared_where_var_is_rejected() {
        let err = parse_ir_text("MATCH (a) WHERE b.x = 1 RETURN a").unwrap_err();
        assert!(err.found.contains("undeclared"));
    }

    #[test]
    fn timestamp_literal_and_quoted_key() {
        let ir = parse_ir_text(
            r#"MATCH (a {created: timestamp(42), "network.cidr": "10.0.0.0/8"}) RETURN a"#,
        )
        .unwrap();
        let p = &ir.node_patterns[0].prop_equals;
        assert_eq!(p.get("created"), Some(&PropertyValue::Timestamp(42)));
        assert_eq!(
            p.get("network.cidr"),
            Some(&PropertyValue::Text("10.0.0.0/8".into()))
        );
    }

    #[test]
    fn reversed_window_is_rejected() {
        let err = parse_ir_text("MATCH (a) WHERE a.t BETWEEN 5 AND 2 RETURN a").unwrap_err();
        assert!(err.expected.iter().any(|e| e.contains("start")));
    }
}
